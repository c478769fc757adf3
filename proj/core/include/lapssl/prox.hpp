#pragma once

#include <functional>
#include <utility>
#include <vector>

#include "lapssl/types.hpp"

namespace lapssl {

double soft_threshold(double x, double lam);
Vec soft_threshold(const Vec& x, double lam);
Mat soft_threshold(const Mat& X, double lam);

// Prox of lam * nuclear norm: U diag(max(0, s - lam)) V'.
Mat svt(const Mat& A, double lam);

// Prox of lam * sum of column norms: whole-column shrinkage.
Mat l21_shrink(const Mat& Q, double lam);

// t_0 = 1, t_{k+1} = (1 + sqrt(4 t_k^2 + 1)) / 2; returns t_0..t_k.
std::vector<double> nesterov_sequence(int k);

// Largest eigenvalue of A'A by power iteration (deterministic start).
double gram_spectral_norm(const Mat& A);

enum class Penalty { L1, Nuclear, L21 };

// min |Ax - b|^2 + lambda * P(x). The quadratic carries no 1/2, so its
// gradient is 2 A'(Ax - b) and the Lipschitz constant is 2 rho(A'A).
struct ProxProblem {
  Mat A;
  Vec b;
  Penalty penalty = Penalty::L1;
  double lambda = 0.0;
  double step = 0.0;  // 0 selects 1 / (2 rho(A'A))
};

double lasso_objective(const ProxProblem& prob, const Vec& x);

// Proximal gradient with fixed step; objective never increases (an
// increase beyond round-off signals a bad step and throws).
std::pair<Vec, SolverReport> ista(const ProxProblem& prob, const Vec& x0,
                                  int iters, double tol);

// Momentum variant with the Nesterov sequence. Transient objective
// ripples are allowed; only catastrophic growth throws.
std::pair<Vec, SolverReport> fista(const ProxProblem& prob, const Vec& x0,
                                   int iters, double tol);

// x_update(v, rho) = argmin_x f(x) + (rho/2)|Ax - v|^2, and likewise
// z_update for g with B. Scaled dual ascent on Ax + Bz = c.
using ProxOracle = std::function<Vec(const Vec&, double)>;

struct AdmmSolution {
  Vec x;
  Vec z;
  Vec u;
  SolverReport report;
};

AdmmSolution admm(const ProxOracle& x_update, const ProxOracle& z_update,
                  const Mat& A, const Mat& B, const Vec& c, double rho,
                  int iters, double tol,
                  const std::function<double(const Vec&, const Vec&)>&
                      objective = nullptr);

// min |Ax - b|^2 + lam |Lreg x|^2 by the normal equations with sqrt(lam)
// folded into Lreg.
Vec ridge(const Mat& A, const Vec& b, const Mat& Lreg, double lam);

}  // namespace lapssl
