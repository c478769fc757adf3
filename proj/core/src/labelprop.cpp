#include "lapssl/labelprop.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace lapssl {

void LabelMatrix::validate() const {
  if (static_cast<size_t>(Y.rows()) != labeled.size())
    throw std::invalid_argument("LabelMatrix: mask length must match rows");
  for (int i = 0; i < Y.rows(); ++i) {
    const double s = Y.row(i).sum();
    if (labeled[i]) {
      if (std::abs(s - 1.0) > 1e-12 || Y.row(i).minCoeff() < 0)
        throw std::invalid_argument("LabelMatrix: labeled rows must be one-hot");
    } else if (s != 0.0 || Y.row(i).cwiseAbs().maxCoeff() != 0.0) {
      throw std::invalid_argument("LabelMatrix: unlabeled rows must be zero");
    }
  }
}

LabelMatrix make_label_matrix(const std::vector<int>& labels,
                              const std::vector<bool>& labeled_mask,
                              int num_classes) {
  if (labels.size() != labeled_mask.size())
    throw std::invalid_argument("make_label_matrix: size mismatch");
  const int n = static_cast<int>(labels.size());
  LabelMatrix lm;
  lm.Y = Mat::Zero(n, num_classes);
  lm.labeled = labeled_mask;
  for (int i = 0; i < n; ++i) {
    if (!labeled_mask[i]) continue;
    if (labels[i] < 0 || labels[i] >= num_classes)
      throw std::out_of_range("make_label_matrix: class index out of range");
    lm.Y(i, labels[i]) = 1.0;
  }
  return lm;
}

Mat PartitionedPrecision::block(const std::vector<int>& rows,
                                const std::vector<int>& cols) const {
  Mat B(rows.size(), cols.size());
  for (size_t r = 0; r < rows.size(); ++r)
    for (size_t c = 0; c < cols.size(); ++c) B(r, c) = Q(rows[r], cols[c]);
  return B;
}

PartitionedPrecision partition_precision(const Mat& Q,
                                         const std::vector<bool>& observed_mask) {
  if (Q.rows() != Q.cols())
    throw std::invalid_argument("partition_precision: square matrix required");
  if (static_cast<size_t>(Q.rows()) != observed_mask.size())
    throw std::invalid_argument("partition_precision: mask length mismatch");
  if (!Q.isApprox(Q.transpose(), 1e-10))
    throw std::invalid_argument("partition_precision: matrix must be symmetric");
  PartitionedPrecision P;
  P.Q = Q;
  for (int i = 0; i < Q.rows(); ++i)
    (observed_mask[i] ? P.observed : P.latent).push_back(i);
  return P;
}

std::pair<Mat, SolverReport> lp_iterate(const WeightMatrix& W, const Mat& Y,
                                        double alpha, double tol, int max_iter) {
  if (alpha <= 0.0 || alpha >= 1.0)
    throw std::invalid_argument("lp_iterate: alpha must lie in (0,1)");
  if (W.W.rows() != Y.rows())
    throw std::invalid_argument("lp_iterate: dimension mismatch");
  SolverReport rep;
  rep.tolerance_used = tol;
  Mat F = Y;
  for (int k = 0; k < max_iter; ++k) {
    Mat next = alpha * (W.W * F) + (1.0 - alpha) * Y;
    const double resid = (next - F).cwiseAbs().maxCoeff();
    F = std::move(next);
    rep.iterations = k + 1;
    rep.residual_history.push_back(resid);
    if (resid <= tol) {
      rep.converged = true;
      break;
    }
  }
  return {F, rep};
}

Mat lp_closed_form(const WeightMatrix& W, const Mat& Y, double alpha) {
  if (alpha <= 0.0 || alpha >= 1.0)
    throw std::invalid_argument("lp_closed_form: alpha must lie in (0,1)");
  if (W.W.rows() != Y.rows())
    throw std::invalid_argument("lp_closed_form: dimension mismatch");
  Mat A = -alpha * Mat(W.W);
  A.diagonal().array() += 1.0;
  Eigen::PartialPivLU<Mat> lu(A);
  return lu.solve((1.0 - alpha) * Y);
}

Mat harmonic_solution(const WeightMatrix& W, const std::vector<bool>& labeled_mask,
                      const Mat& y_l) {
  const int n = static_cast<int>(W.W.rows());
  if (static_cast<size_t>(n) != labeled_mask.size())
    throw std::invalid_argument("harmonic_solution: mask length mismatch");
  std::vector<int> lab, unlab;
  for (int i = 0; i < n; ++i) (labeled_mask[i] ? lab : unlab).push_back(i);
  if (static_cast<int>(lab.size()) != y_l.rows())
    throw std::invalid_argument("harmonic_solution: y_l rows must match labeled count");
  const int nu = static_cast<int>(unlab.size());
  if (nu == 0) return Mat(0, y_l.cols());

  std::vector<int> pos(n, -1);
  for (int u = 0; u < nu; ++u) pos[unlab[u]] = u;
  std::vector<int> lab_pos(n, -1);
  for (size_t l = 0; l < lab.size(); ++l) lab_pos[lab[l]] = static_cast<int>(l);

  Mat Wuu = Mat::Zero(nu, nu);
  Mat Wul_yl = Mat::Zero(nu, y_l.cols());
  for (int u = 0; u < nu; ++u)
    for (SpMat::InnerIterator it(W.W, unlab[u]); it; ++it) {
      const int j = static_cast<int>(it.col());
      if (pos[j] >= 0)
        Wuu(u, pos[j]) = it.value();
      else
        Wul_yl.row(u) += it.value() * y_l.row(lab_pos[j]);
    }

  Mat A = -Wuu;
  A.diagonal().array() += 1.0;
  Eigen::FullPivLU<Mat> lu(A);
  if (!lu.isInvertible())
    throw std::runtime_error(
        "harmonic_solution: unlabeled block singular (component without labels)");
  return lu.solve(Wul_yl);
}

Vec crf_expectation(const PartitionedPrecision& P, const Vec& y) {
  if (static_cast<size_t>(y.size()) != P.observed.size())
    throw std::invalid_argument("crf_expectation: observation length mismatch");
  const Mat Qxx = P.Qxx();
  if (Qxx.rows() == 0) return Vec();
  Eigen::LLT<Mat> llt(Qxx);
  if (llt.info() != Eigen::Success)
    throw std::domain_error("crf_expectation: latent precision block not positive definite");
  return llt.solve(-(P.Qxy() * y));
}

double crf_inductive(double q_o, const Vec& q_on, const Vec& y) {
  if (q_o == 0.0) throw std::invalid_argument("crf_inductive: zero self-precision");
  if (q_on.size() != y.size())
    throw std::invalid_argument("crf_inductive: dimension mismatch");
  return -q_on.dot(y) / q_o;
}

namespace {

// Minimum-norm least squares for M_u * u ~ -M_f * f with f pinned.
BiasedSolution solve_pinned(const Mat& M_f, const Mat& M_u, const Vec& f) {
  Eigen::CompleteOrthogonalDecomposition<Mat> cod(M_u);
  Vec rhs = -(M_f * f);
  Vec u = cod.solve(rhs);
  BiasedSolution sol;
  sol.report.converged = true;
  sol.report.residual_history.push_back((M_u * u - rhs).norm());
  sol.report.iterations = 1;
  sol.report.objective_history.push_back(sol.report.residual_history.back());
  sol.x = u;  // caller slices
  return sol;
}

}  // namespace

BiasedSolution crf_biased_states(const PartitionedPrecision& P, double lambda,
                                 const Vec& y) {
  if (lambda <= 0.0 || lambda >= 1.0)
    throw std::invalid_argument("crf_biased_states: lambda must lie in (0,1)");
  const int ny = static_cast<int>(P.observed.size());
  const int nx = static_cast<int>(P.latent.size());
  if (y.size() != ny)
    throw std::invalid_argument("crf_biased_states: observation length mismatch");
  const double l = lambda, c = 1.0 - lambda;
  const Mat I = Mat::Identity(nx, nx);

  // Pinning y removes the y-stationarity rows; what remains are the
  // stationarity conditions of the free blocks (x, b_x).
  Mat My(2 * nx, ny);
  My << c * P.Qxy(), Mat::Zero(nx, ny);
  Mat Mu(2 * nx, 2 * nx);
  Mu << c * P.Qxx() + l * I, -l * I,
        -l * I, l * I;

  BiasedSolution sol = solve_pinned(My, Mu, y);
  Vec u = sol.x;
  sol.x = u.head(nx);
  sol.b = u.tail(nx);
  sol.y = y;
  return sol;
}

BiasedSolution crf_biased_observations(const PartitionedPrecision& P,
                                       double lambda, const Vec& anchor,
                                       BiasAnchor mode) {
  if (lambda <= 0.0 || lambda >= 1.0)
    throw std::invalid_argument("crf_biased_observations: lambda must lie in (0,1)");
  const int ny = static_cast<int>(P.observed.size());
  const int nx = static_cast<int>(P.latent.size());
  if (anchor.size() != ny)
    throw std::invalid_argument("crf_biased_observations: anchor length mismatch");
  const double l = lambda, c = 1.0 - lambda;
  const Mat Iy = Mat::Identity(ny, ny);

  BiasedSolution sol;
  if (mode == BiasAnchor::Observations) {
    // Free blocks (x, b_y): stationarity in x and b_y with y pinned.
    Mat My(nx + ny, ny);
    My << c * P.Qxy(), -l * Iy;
    Mat Mu(nx + ny, nx + ny);
    Mu << c * P.Qxx(), Mat::Zero(nx, ny),
          Mat::Zero(ny, nx), l * Iy;
    sol = solve_pinned(My, Mu, anchor);
    Vec u = sol.x;
    sol.x = u.head(nx);
    sol.b = u.tail(ny);
    sol.y = anchor;
  } else {
    // Free blocks (y, x): stationarity in y and x with b_y pinned.
    Mat Mb(ny + nx, ny);
    Mb << -l * Iy, Mat::Zero(nx, ny);
    Mat Mu(ny + nx, ny + nx);
    Mu << c * P.Qyy() + l * Iy, c * P.Qyx(),
          c * P.Qxy(), c * P.Qxx();
    sol = solve_pinned(Mb, Mu, anchor);
    Vec u = sol.x;
    sol.y = u.head(ny);
    sol.x = u.tail(nx);
    sol.b = anchor;
  }
  return sol;
}

double graph_energy(const WeightMatrix& W, const Vec& x, int order) {
  if (W.W.rows() != x.size())
    throw std::invalid_argument("graph_energy: dimension mismatch");
  const Vec Lx = x - W.W * x;
  if (order == 1) return 0.5 * x.dot(Lx);
  if (order == 2) return 0.5 * Lx.squaredNorm();
  throw std::invalid_argument("graph_energy: order must be 1 or 2");
}

std::vector<int> hard_labels(const Mat& F) {
  std::vector<int> out(F.rows());
  for (int i = 0; i < F.rows(); ++i) {
    int arg = 0;
    for (int c = 1; c < F.cols(); ++c)
      if (F(i, c) > F(i, arg)) arg = c;
    out[i] = arg;
  }
  return out;
}

}  // namespace lapssl
