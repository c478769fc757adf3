#include "lapssl/prox.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <Eigen/SVD>

namespace lapssl {

double soft_threshold(double x, double lam) {
  if (lam < 0) throw std::invalid_argument("soft_threshold: negative threshold");
  if (x > lam) return x - lam;
  if (x < -lam) return x + lam;
  return 0.0;
}

Vec soft_threshold(const Vec& x, double lam) {
  if (lam < 0) throw std::invalid_argument("soft_threshold: negative threshold");
  return x.array().sign() * (x.array().abs() - lam).max(0.0);
}

Mat soft_threshold(const Mat& X, double lam) {
  if (lam < 0) throw std::invalid_argument("soft_threshold: negative threshold");
  return X.array().sign() * (X.array().abs() - lam).max(0.0);
}

Mat svt(const Mat& A, double lam) {
  if (lam < 0) throw std::invalid_argument("svt: negative threshold");
  if (lam == 0.0) return A;
  Eigen::JacobiSVD<Mat> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
  Vec s = (svd.singularValues().array() - lam).max(0.0);
  return svd.matrixU() * s.asDiagonal() * svd.matrixV().transpose();
}

Mat l21_shrink(const Mat& Q, double lam) {
  if (lam < 0) throw std::invalid_argument("l21_shrink: negative threshold");
  Mat W = Q;
  for (int c = 0; c < Q.cols(); ++c) {
    const double norm = Q.col(c).norm();
    if (norm <= lam)
      W.col(c).setZero();
    else
      W.col(c) *= (norm - lam) / norm;
  }
  return W;
}

std::vector<double> nesterov_sequence(int k) {
  if (k < 0) throw std::invalid_argument("nesterov_sequence: negative length");
  std::vector<double> t(k + 1);
  t[0] = 1.0;
  for (int i = 0; i < k; ++i)
    t[i + 1] = 0.5 * (1.0 + std::sqrt(4.0 * t[i] * t[i] + 1.0));
  return t;
}

double gram_spectral_norm(const Mat& A) {
  if (A.size() == 0) return 0.0;
  const int m = static_cast<int>(A.cols());
  Vec v(m);
  for (int i = 0; i < m; ++i) v[i] = std::sin(i + 1.0) + 0.25;
  v.normalize();
  double lam = 0.0;
  for (int it = 0; it < 200; ++it) {
    Vec w = A.transpose() * (A * v);
    const double wn = w.norm();
    if (wn == 0.0) return 0.0;
    w /= wn;
    const double next = (A * w).squaredNorm();
    const bool settled = std::abs(next - lam) <= 1e-13 * std::max(1.0, next);
    lam = next;
    v = std::move(w);
    if (settled && it > 2) break;
  }
  return lam;
}

double lasso_objective(const ProxProblem& prob, const Vec& x) {
  double pen = 0.0;
  switch (prob.penalty) {
    case Penalty::L1: pen = x.lpNorm<1>(); break;
    case Penalty::Nuclear:
      throw std::invalid_argument("lasso_objective: nuclear penalty needs a matrix iterate");
    case Penalty::L21:
      throw std::invalid_argument("lasso_objective: l21 penalty needs a matrix iterate");
  }
  return (prob.A * x - prob.b).squaredNorm() + prob.lambda * pen;
}

namespace {

double pick_step(const ProxProblem& prob) {
  if (prob.step > 0.0) return prob.step;
  const double lf = 2.0 * gram_spectral_norm(prob.A);
  if (lf <= 0.0) return 1.0;
  return 1.0 / (lf * (1.0 + 1e-9));
}

void check_l1(const ProxProblem& prob, const Vec& x0) {
  if (prob.penalty != Penalty::L1)
    throw std::invalid_argument("vector solver requires the l1 penalty");
  if (prob.lambda < 0) throw std::invalid_argument("negative penalty weight");
  if (prob.A.cols() != x0.size() || prob.A.rows() != prob.b.size())
    throw std::invalid_argument("problem dimensions disagree");
}

}  // namespace

std::pair<Vec, SolverReport> ista(const ProxProblem& prob, const Vec& x0,
                                  int iters, double tol) {
  check_l1(prob, x0);
  const double tau = pick_step(prob);
  SolverReport rep;
  rep.tolerance_used = tol;
  Vec x = x0;
  double prev_obj = lasso_objective(prob, x);
  for (int k = 0; k < iters; ++k) {
    Vec grad = 2.0 * (prob.A.transpose() * (prob.A * x - prob.b));
    Vec next = soft_threshold(Vec(x - tau * grad), prob.lambda * tau);
    const double obj = lasso_objective(prob, next);
    if (obj > prev_obj + 1e-9 * std::max(1.0, std::abs(prev_obj)))
      throw std::runtime_error("ista: objective increased; step too large");
    const double gap = (next - x).norm();
    x = std::move(next);
    prev_obj = obj;
    rep.iterations = k + 1;
    rep.objective_history.push_back(obj);
    rep.residual_history.push_back(gap);
    if (gap <= tol) {
      rep.converged = true;
      break;
    }
  }
  return {x, rep};
}

std::pair<Vec, SolverReport> fista(const ProxProblem& prob, const Vec& x0,
                                   int iters, double tol) {
  check_l1(prob, x0);
  const double tau = pick_step(prob);
  SolverReport rep;
  rep.tolerance_used = tol;
  Vec x = x0, x_prev = x0, y = x0;
  double t = 1.0;
  double best_obj = lasso_objective(prob, x);
  for (int k = 0; k < iters; ++k) {
    Vec grad = 2.0 * (prob.A.transpose() * (prob.A * y - prob.b));
    Vec next = soft_threshold(Vec(y - tau * grad), prob.lambda * tau);
    const double obj = lasso_objective(prob, next);
    if (obj > 10.0 * std::max(1.0, best_obj) + 1e-9)
      throw std::runtime_error("fista: objective blew up; step too large");
    best_obj = std::min(best_obj, obj);
    const double t_next = 0.5 * (1.0 + std::sqrt(4.0 * t * t + 1.0));
    y = next + ((t - 1.0) / t_next) * (next - x);
    const double gap = (next - x).norm();
    x_prev = std::move(x);
    x = std::move(next);
    t = t_next;
    rep.iterations = k + 1;
    rep.objective_history.push_back(obj);
    rep.residual_history.push_back(gap);
    if (gap <= tol) {
      rep.converged = true;
      break;
    }
  }
  return {x, rep};
}

AdmmSolution admm(const ProxOracle& x_update, const ProxOracle& z_update,
                  const Mat& A, const Mat& B, const Vec& c, double rho,
                  int iters, double tol,
                  const std::function<double(const Vec&, const Vec&)>& objective) {
  if (rho <= 0.0) throw std::invalid_argument("admm: rho must be > 0");
  if (A.rows() != B.rows() || A.rows() != c.size())
    throw std::invalid_argument("admm: constraint dimensions disagree");

  AdmmSolution sol;
  sol.x = Vec::Zero(A.cols());
  sol.z = Vec::Zero(B.cols());
  sol.u = Vec::Zero(c.size());
  sol.report.tolerance_used = tol;

  for (int k = 0; k < iters; ++k) {
    sol.x = x_update(Vec(c - B * sol.z - sol.u), rho);
    Vec z_prev = sol.z;
    sol.z = z_update(Vec(c - A * sol.x - sol.u), rho);
    Vec gap = A * sol.x + B * sol.z - c;
    sol.u += gap;

    const double primal = gap.norm();
    const double dual = rho * (A.transpose() * (B * (sol.z - z_prev))).norm();
    sol.report.iterations = k + 1;
    sol.report.residual_history.push_back(std::max(primal, dual));
    if (objective) sol.report.objective_history.push_back(objective(sol.x, sol.z));
    if (primal <= tol && dual <= tol) {
      sol.report.converged = true;
      break;
    }
  }
  return sol;
}

Vec ridge(const Mat& A, const Vec& b, const Mat& Lreg, double lam) {
  if (lam < 0) throw std::invalid_argument("ridge: negative penalty weight");
  if (A.rows() != b.size())
    throw std::invalid_argument("ridge: dimension mismatch");
  if (Lreg.size() > 0 && Lreg.cols() != A.cols())
    throw std::invalid_argument("ridge: regularizer width mismatch");
  Mat G = A.transpose() * A;
  if (Lreg.size() > 0 && lam > 0) G += lam * (Lreg.transpose() * Lreg);
  Eigen::LDLT<Mat> ldlt(G);
  Vec x = ldlt.solve(A.transpose() * b);
  if (ldlt.info() != Eigen::Success ||
      (G * x - A.transpose() * b).norm() >
          1e-8 * std::max(1.0, (A.transpose() * b).norm()))
    throw std::runtime_error("ridge: singular normal equations");
  return x;
}

}  // namespace lapssl
