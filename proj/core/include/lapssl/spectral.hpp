#pragma once

#include <utility>
#include <vector>

#include "lapssl/graph.hpp"
#include "lapssl/types.hpp"

namespace lapssl {

struct EigenPair {
  double value = 0.0;
  Vec vector;  // unit norm
};

enum class EigenWhich { Largest, SmallestNonzero };

// Power iteration on a Gershgorin-shifted copy of M, so "Largest" means
// the largest algebraic eigenvalue. SmallestNonzero deflates null_space
// (pass the known kernel vector of a Laplacian, any scaling) and
// otherwise returns the smallest eigenvalue.
std::pair<EigenPair, SolverReport> extreme_eigen(const SpMat& M,
                                                 EigenWhich which,
                                                 double tol = 1e-10,
                                                 int max_iter = 5000,
                                                 const Vec& null_space = Vec());

// Row/column-sum bracket for the Perron root of a nonnegative matrix:
// max(min row sum, min col sum) <= rho(M) <= min(max row sum, max col sum).
std::pair<double, double> spectral_radius_bounds(const Mat& M);

// Estimate 2*mean_degree / (gamma + mean_degree) for the top eigenvalue
// of the loop-augmented normalized Laplacian.
double lambda_max_estimate(const DegreeStats& stats, double gamma);

// Dense e^{-tL} via full eigendecomposition; diagnostic for n <= 2000.
Mat heat_kernel(const SpMat& L, double t);

enum class FilterKind { AutoRegressive, Residual, Renormalized };

struct FilterSpec {
  FilterKind kind = FilterKind::Renormalized;
  double eta = 1.0;    // AutoRegressive / Residual strength
  int k = 1;           // Renormalized power
  double gamma = 1.0;  // self-loop weight of the Laplacian the filter uses
};

enum class FilterMode { Direct, Iterative };

// AutoRegressive: (I + eta*L)^{-1} X, solved dense SPD in Direct mode or
// expanded as the geometric series X'(i+1) = X + eta/(1+eta) * S * X'(i),
// S = I - L, for t = max(floor(4*eta), 1) steps (ar_steps overrides),
// returning X'(t)/(1+eta). Residual: (I - eta*L) X. Renormalized: S^k X.
std::pair<Mat, SolverReport> apply_filter(const Graph& g,
                                          const FilterSpec& spec, const Mat& X,
                                          FilterMode mode = FilterMode::Direct,
                                          int ar_steps = 0);

// Max column variance of rows of (D^{-1}A)^k X; shrinks toward zero on
// connected non-bipartite graphs as k grows.
double deep_collapse_demo(const Graph& g, const Mat& X, int k);

// log(n / n_labeled) / log(mean_degree), the depth at which k-hop
// neighborhoods of the labeled set cover the graph.
double optimal_depth(const DegreeStats& stats, int n_labeled, int n);

// Eigenvectors 2..m+1 (ascending eigenvalue) of the symmetric normalized
// Laplacian, skipping the constant-direction kernel. With per_component,
// each connected component is embedded independently; otherwise a
// disconnected graph is an error.
Mat spectral_embedding(const Graph& g, int m, bool per_component = false);

// Best-of-restarts Lloyd iteration with seeded farthest-point seeding.
// Ties break toward the lowest cluster index; returns labels and inertia.
std::pair<std::vector<int>, double> kmeans(const Mat& points, int k,
                                           unsigned seed, int restarts = 3);

}  // namespace lapssl
