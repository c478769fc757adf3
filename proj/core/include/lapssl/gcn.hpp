#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "lapssl/data_io.hpp"
#include "lapssl/spectral.hpp"
#include "lapssl/types.hpp"

namespace lapssl {

// Layer propagation operator: sparse for Residual / Renormalized,
// materialized dense inverse for AutoRegressive.
struct Propagator {
  SpMat sparse;
  Mat dense;
  bool is_dense = false;

  Mat apply(const Mat& X) const {
    return is_dense ? Mat(dense * X) : Mat(sparse * X);
  }
  Mat apply_transpose(const Mat& X) const {
    return is_dense ? Mat(dense.transpose() * X)
                    : Mat(sparse.transpose() * X);
  }
};

Propagator propagation_matrix(const Graph& g, const FilterSpec& spec);

struct GcnModel {
  Mat theta1;  // d x h
  Mat theta2;  // h x c
  FilterSpec prop;
  unsigned init_seed = 0;
};

enum class Optimizer { Adam, Sgd };

struct TrainConfig {
  double lr = 0.1;
  double weight_decay = 5e-4;
  double dropout = 0.5;
  int hidden = 16;
  int epochs = 200;
  unsigned seed = 0;
  Optimizer optimizer = Optimizer::Adam;
};

struct ForwardPass {
  Mat H1;      // hidden activations after dropout (if any)
  Mat logits;
  Mat probs;
  Mat drop_mask;  // empty in eval mode
};

// H1 = ReLU(P X Theta1) with inverted dropout when a seed is given;
// logits = P H1 Theta2; probs are row-softmax. PX, when provided, must
// equal P.apply(X) and skips recomputing it.
ForwardPass gcn_forward(const GcnModel& model, const Propagator& P, const Mat& X,
                        double dropout = 0.0,
                        std::optional<unsigned> dropout_seed = std::nullopt,
                        const Mat* PX = nullptr);

struct LossGrads {
  double loss = 0.0;
  Mat d_theta1;
  Mat d_theta2;
  ForwardPass fwd;
};

// Masked mean cross-entropy plus weight_decay * |Theta1|_F^2 (first
// layer only); exact analytic gradients for the realized forward pass.
LossGrads gcn_loss_and_grads(const GcnModel& model, const Propagator& P,
                             const Mat& X, const Mat& Y,
                             const std::vector<bool>& mask,
                             const TrainConfig& config,
                             std::optional<unsigned> dropout_seed = std::nullopt,
                             const Mat* PX = nullptr);

// Seeded Glorot-uniform initialization.
GcnModel init_gcn(int in_dim, int hidden, int out_dim, const FilterSpec& spec,
                  unsigned seed);

// Full training run returning the best-validation checkpoint and its
// metrics. P and PX, when given, must match the filter spec; passing
// them lets sweeps share the materialized operator across seeds.
std::pair<GcnModel, Metrics> train_gcn(const Dataset& ds, const FilterSpec& spec,
                                       const TrainConfig& config,
                                       const Propagator* P = nullptr,
                                       const Mat* PX = nullptr);

// Hidden embedding of the trained model (eval mode) -> k-nearest
// neighborhoods -> reconstruction weights -> closed-form label
// propagation from the train mask -> argmax.
Metrics net1_pipeline(const Dataset& ds, const FilterSpec& spec,
                      const TrainConfig& config, double lp_alpha = 0.99,
                      int knn_k = 10, const Propagator* P = nullptr,
                      const Mat* PX = nullptr);

double masked_accuracy(const Mat& scores, const std::vector<int>& labels,
                       const std::vector<bool>& mask);

// Flat binary checkpoint: magic "LSSL", version, dims, filter spec, then
// Theta1 and Theta2 row-major as little-endian 64-bit floats.
void save_checkpoint(const GcnModel& model, const std::string& path);
GcnModel load_checkpoint(const std::string& path);

}  // namespace lapssl
