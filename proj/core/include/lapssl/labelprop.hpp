#pragma once

#include <utility>
#include <vector>

#include "lapssl/edge_weights.hpp"
#include "lapssl/types.hpp"

namespace lapssl {

// One-hot rows for labeled nodes, zero rows for unlabeled ones.
struct LabelMatrix {
  Mat Y;
  std::vector<bool> labeled;

  // Throws unless labeled rows sum to 1 and unlabeled rows are zero.
  void validate() const;
};

LabelMatrix make_label_matrix(const std::vector<int>& labels,
                              const std::vector<bool>& labeled_mask,
                              int num_classes);

// Symmetric precision matrix with an observed/latent index partition.
struct PartitionedPrecision {
  Mat Q;
  std::vector<int> observed;
  std::vector<int> latent;

  Mat block(const std::vector<int>& rows, const std::vector<int>& cols) const;
  Mat Qxx() const { return block(latent, latent); }
  Mat Qxy() const { return block(latent, observed); }
  Mat Qyx() const { return block(observed, latent); }
  Mat Qyy() const { return block(observed, observed); }
};

PartitionedPrecision partition_precision(const Mat& Q,
                                         const std::vector<bool>& observed_mask);

// Diffusion F <- alpha*W*F + (1-alpha)*Y until the sup-norm step change
// drops below tol; the limit is (1-alpha)(I - alpha W)^{-1} Y.
std::pair<Mat, SolverReport> lp_iterate(const WeightMatrix& W, const Mat& Y,
                                        double alpha = 0.99, double tol = 1e-8,
                                        int max_iter = 10000);

Mat lp_closed_form(const WeightMatrix& W, const Mat& Y, double alpha = 0.99);

// Interior values of the harmonic extension: y_u = (I - W_uu)^{-1} W_ul y_l.
// y_l rows follow the labeled nodes in ascending index order; the result
// rows follow the unlabeled nodes likewise.
Mat harmonic_solution(const WeightMatrix& W, const std::vector<bool>& labeled_mask,
                      const Mat& y_l);

// Gaussian conditional mean E[x|y] = -Qxx^{-1} Qxy y.
Vec crf_expectation(const PartitionedPrecision& P, const Vec& y);

// Out-of-sample mean for one appended node: -(1/q_o) * q_on . y.
double crf_inductive(double q_o, const Vec& q_on, const Vec& y);

struct BiasedSolution {
  Vec x;
  Vec y;
  Vec b;
  SolverReport report;  // residual of the block system at the solution
};

// State-bias model: the precision couples (y, x, b_x) as
//   [ (1-l)Qyy      (1-l)Qyx       0    ]
//   [ (1-l)Qxy  (1-l)Qxx + l*I   -l*I   ] * (y, x, b_x) = 0.
//   [    0           -l*I         l*I   ]
// y is pinned to the given observations; (x, b_x) is the minimum-norm
// least-squares solution of the remaining homogeneous system.
BiasedSolution crf_biased_states(const PartitionedPrecision& P, double lambda,
                                 const Vec& y);

// Observation-bias model, block structure
//   [ (1-l)Qyy + l*I  (1-l)Qyx   -l*I ]
//   [   (1-l)Qxy      (1-l)Qxx     0  ] * (y, x, b_y) = 0.
//   [     -l*I            0       l*I ]
// The anchor pins either the raw observations y or the bias reference b_y;
// the other two blocks come out as the minimum-norm least-squares solution.
enum class BiasAnchor { Observations, Bias };

BiasedSolution crf_biased_observations(const PartitionedPrecision& P,
                                       double lambda, const Vec& anchor,
                                       BiasAnchor mode = BiasAnchor::Observations);

// Order 1: 0.5 x'(I-W)x. Order 2: 0.5 |(I-W)x|^2.
double graph_energy(const WeightMatrix& W, const Vec& x, int order);

// Argmax per row with ties toward the lowest class index.
std::vector<int> hard_labels(const Mat& F);

}  // namespace lapssl
