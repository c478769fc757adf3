#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <vector>

namespace lapssl {

// Row-major dense and CSR sparse carriers used across the library.
using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vec = Eigen::VectorXd;
using SpMat = Eigen::SparseMatrix<double, Eigen::RowMajor>;
using Triplet = Eigen::Triplet<double>;

// Convergence trace returned by every iterative solver.
struct SolverReport {
  int iterations = 0;
  std::vector<double> objective_history;
  std::vector<double> residual_history;
  bool converged = false;
  double tolerance_used = 0.0;
};

}  // namespace lapssl
