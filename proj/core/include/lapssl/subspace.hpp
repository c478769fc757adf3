#pragma once

#include <tuple>
#include <utility>
#include <vector>

#include "lapssl/types.hpp"

namespace lapssl {

struct LrrResult {
  Mat Z;  // n x n representation
  Mat E;  // d x n error matrix
  SolverReport report;
};

struct RpcaResult {
  Mat Lr;  // low-rank part
  Mat S;   // sparse part
  SolverReport report;
};

// min |J|_* + lam |E|_{2,1} s.t. X = XZ + E, Z = J, by inexact ALM with
// a geometric penalty schedule. Feasibility of both constraints <= tol
// at reported convergence.
LrrResult lrr_alm(const Mat& X, double lam, double mu0 = 1e-2,
                  double mu_max = 1e6, double rho_mu = 1.5, double tol = 1e-6,
                  int max_iter = 1000);

// min |L|_* + rho |S|_1 s.t. M = L + S, scaled ADMM with svt and
// soft-threshold subproblems.
RpcaResult rpca(const Mat& M, double rho, double tol = 1e-7,
                int max_iter = 1000);

// min lam |Z|_1 + 0.5 |X - XZ|_F^2 with diag(Z) = 0, by proximal
// gradient; the zero diagonal is part of the prox, so it holds at every
// iterate and the objective never increases.
std::pair<Mat, SolverReport> ssc(const Mat& X, double lam, double tol = 1e-8,
                                 int max_iter = 2000);

using ObservedEntries = std::vector<std::tuple<int, int, double>>;

// Nuclear-norm completion: monotone accelerated proximal gradient on
// 0.5 |P(M) - P(A)|_F^2 + lam |M|_* with a descending lam schedule
// (empty schedule selects one from the data). max_iter is the total
// inner-step budget across the schedule.
std::pair<Mat, SolverReport> matrix_complete(const ObservedEntries& observed,
                                             int rows, int cols,
                                             std::vector<double> lam_schedule = {},
                                             double tol = 1e-8,
                                             int max_iter = 2000);

// Top-k eigenvectors of the centered covariance (1/n) Xc Xc'; returns
// the orthonormal basis (d x k) and projections W' Xc (k x n).
std::pair<Mat, Mat> pca(const Mat& X, int k);

enum class SubspaceMethod { Lrr, Ssc };

struct SubspaceClusterParams {
  double lambda = 10.0;
  double tol = 1e-6;
  int max_iter = 1000;
  unsigned seed = 0;
  int restarts = 5;
};

// Representation -> affinity (|Z|+|Z'|)/2 -> spectral embedding ->
// k-means. Component indicator columns are prepended to the embedding,
// restoring the constant directions the embedding drops, so exactly
// separable affinities cluster by connected component.
std::vector<int> subspace_cluster(const Mat& X, SubspaceMethod method, int k,
                                  const SubspaceClusterParams& params = {});

}  // namespace lapssl
