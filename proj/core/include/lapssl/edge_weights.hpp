#pragma once

#include <utility>
#include <vector>

#include "lapssl/graph.hpp"
#include "lapssl/types.hpp"

namespace lapssl {

// Per-node ordered neighbor indices; a node is never its own neighbor.
using NeighborhoodMap = std::vector<std::vector<int>>;

struct WeightMatrix {
  SpMat W;
  bool row_stochastic = false;
};

// k nearest rows of X by Euclidean distance, ties toward the lower index.
NeighborhoodMap knn_neighbors(const Mat& X, int k);

// Adjacency support of an existing graph.
NeighborhoodMap graph_neighbors(const Graph& g);

// w_ij = exp(-|x_i - x_j|^2 / (4t)) on the neighborhood support.
WeightMatrix rbf_weights(const Mat& X, const NeighborhoodMap& nbrs, double t,
                         bool normalize);

// Softmax over each neighborhood of beta * cos(z_i, z_j).
WeightMatrix cosine_attention_weights(const Mat& Z, const NeighborhoodMap& nbrs,
                                      double beta);

// Minimum-norm reconstruction weights: per-row Gram
// G_jk = (x_i - x_j).(x_i - x_k), solved with the sum-to-one constraint.
// The Gram is ridge-boosted by eps_reg * trace(G) per round until the
// solve is well conditioned. Weights may be negative.
WeightMatrix lle_weights_closed_form(const Mat& X, const NeighborhoodMap& nbrs,
                                     double eps_reg = 1e-3);

// Nonnegative variant by damped multiplicative updates: the step
// w <- w .* (mu / (G w + mu * e e^T w))^theta starts from uniform weights
// and is renormalized onto the simplex, with theta halved until the row
// objective 0.5 w'Gw + (mu/2)(e'w)^2 does not increase, so the reported
// objective is non-increasing; rows that cannot descend at any damping
// level freeze where they are. Rows are renormalized to sum 1 at exit.
std::pair<WeightMatrix, SolverReport> lle_weights_nmf(
    const Mat& X, const NeighborhoodMap& nbrs, double mu = 1.0, int iters = 500,
    double tol = 1e-10);

// W = (|Z| + |Z^T|) / 2.
WeightMatrix affinity_from_representation(const Mat& Z);

}  // namespace lapssl
