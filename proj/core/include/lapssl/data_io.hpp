#pragma once

#include <string>
#include <utility>
#include <vector>

#include "lapssl/graph.hpp"
#include "lapssl/labelprop.hpp"
#include "lapssl/types.hpp"

namespace lapssl {

struct Dataset {
  Mat X;
  LabelMatrix Y;
  Graph g;
  std::vector<int> labels;  // class index per node
  std::vector<bool> train_mask, val_mask, test_mask;
  std::vector<std::string> class_names;

  int n() const { return g.n; }
  int num_classes() const { return static_cast<int>(class_names.size()); }

  // Masks disjoint, sizes consistent, every class in the train mask.
  void validate() const;
};

// Raw citation-network format: content rows "id f1 ... fd label" and
// cites rows "cited citing", tab separated. Nodes are ordered by
// ascending numeric id. Citations become undirected edges; a cites row
// naming an unknown id is an error. row_normalize rescales each feature
// row to sum 1.
Dataset load_cora(const std::string& content_path, const std::string& cites_path,
                  bool row_normalize = false);

struct SplitSpec {
  int per_class_train = 20;
  int val = 500;
  int test = 1000;
  unsigned seed = 0;
};

struct SplitMasks {
  std::vector<bool> train, val, test;
};

// Seeded per-class train sampling; val and test drawn from the shuffled
// remainder. Deterministic across platforms for a fixed seed.
SplitMasks make_split(const Dataset& ds, const SplitSpec& spec);

// Points drawn from mutually orthogonal random subspaces (columns of one
// orthonormal frame are partitioned across them), uniform coefficients
// in [-1, 1], optional isotropic Gaussian noise. X is dims x total.
std::pair<Mat, std::vector<int>> synth_union_of_subspaces(
    int dims, const std::vector<int>& subspace_dims, int points_per,
    double noise_sigma, unsigned seed);

// Stochastic block model, undirected simple graph; needs p_out < p_in.
std::pair<Graph, std::vector<int>> synth_sbm(const std::vector<int>& block_sizes,
                                             double p_in, double p_out,
                                             unsigned seed);

struct Metrics {
  double train_acc = 0.0;
  double val_acc = 0.0;
  double test_acc = 0.0;
  std::vector<double> loss_curve;
  int best_epoch = 0;
  int seed = 0;
  std::string config_json = "{}";  // JSON object with run parameters
};

// JSON schema: {"accuracy": {"train","val","test"}, "loss_curve": [...],
// "config": {...}, "seed": int, "best_epoch": int}. Unknown extra keys
// are tolerated on read; missing or mistyped required keys are errors.
void write_metrics(const Metrics& metrics, const std::string& path);
Metrics read_metrics(const std::string& path);

// Dense CSV: one row per line, comma separated, full precision.
void write_csv_matrix(const Mat& M, const std::string& path);
Mat read_csv_matrix(const std::string& path);

}  // namespace lapssl
