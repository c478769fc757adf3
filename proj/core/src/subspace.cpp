#include "lapssl/subspace.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <Eigen/SVD>

#include "lapssl/edge_weights.hpp"
#include "lapssl/prox.hpp"
#include "lapssl/spectral.hpp"

namespace lapssl {

namespace {

double nuclear_norm(const Mat& A) {
  return Eigen::JacobiSVD<Mat>(A).singularValues().sum();
}

double l21_norm(const Mat& A) {
  double s = 0.0;
  for (int c = 0; c < A.cols(); ++c) s += A.col(c).norm();
  return s;
}

}  // namespace

LrrResult lrr_alm(const Mat& X, double lam, double mu0, double mu_max,
                  double rho_mu, double tol, int max_iter) {
  if (lam <= 0) throw std::invalid_argument("lrr_alm: lam must be > 0");
  if (mu0 <= 0 || rho_mu < 1 || mu_max < mu0)
    throw std::invalid_argument("lrr_alm: bad penalty schedule");
  const int n = static_cast<int>(X.cols());

  LrrResult res;
  res.Z = Mat::Zero(n, n);
  res.E = Mat::Zero(X.rows(), n);
  res.report.tolerance_used = tol;

  Mat J = Mat::Zero(n, n);
  Mat Y1 = Mat::Zero(X.rows(), n);
  Mat Y2 = Mat::Zero(n, n);
  double mu = mu0;

  Mat G = X.transpose() * X;
  Mat sys = G + Mat::Identity(n, n);
  Eigen::LLT<Mat> llt(sys);
  if (llt.info() != Eigen::Success)
    throw std::runtime_error("lrr_alm: normal-equation factorization failed");

  for (int k = 0; k < max_iter; ++k) {
    J = svt(res.Z + Y2 / mu, 1.0 / mu);
    res.Z = llt.solve(X.transpose() * (X - res.E) + J +
                      (X.transpose() * Y1 - Y2) / mu);
    res.E = l21_shrink(X - X * res.Z + Y1 / mu, lam / mu);

    Mat feas1 = X - X * res.Z - res.E;
    Mat feas2 = res.Z - J;
    Y1 += mu * feas1;
    Y2 += mu * feas2;
    mu = std::min(rho_mu * mu, mu_max);

    const double r1 = feas1.norm(), r2 = feas2.norm();
    res.report.iterations = k + 1;
    res.report.residual_history.push_back(std::max(r1, r2));
    res.report.objective_history.push_back(nuclear_norm(J) + lam * l21_norm(res.E));
    if (r1 <= tol && r2 <= tol) {
      res.report.converged = true;
      break;
    }
  }
  return res;
}

RpcaResult rpca(const Mat& M, double rho, double tol, int max_iter) {
  if (rho <= 0) throw std::invalid_argument("rpca: rho must be > 0");
  RpcaResult res;
  res.Lr = Mat::Zero(M.rows(), M.cols());
  res.S = Mat::Zero(M.rows(), M.cols());
  res.report.tolerance_used = tol;

  const double l1 = M.cwiseAbs().sum();
  if (l1 == 0.0) {
    res.report.converged = true;
    return res;
  }
  const double beta =
      static_cast<double>(M.rows()) * static_cast<double>(M.cols()) / (4.0 * l1);

  Mat U = Mat::Zero(M.rows(), M.cols());
  for (int k = 0; k < max_iter; ++k) {
    res.Lr = svt(M - res.S - U, 1.0 / beta);
    Mat S_prev = res.S;
    res.S = soft_threshold(Mat(M - res.Lr - U), rho / beta);
    Mat gap = res.Lr + res.S - M;
    U += gap;

    const double primal = gap.norm();
    const double dual = beta * (res.S - S_prev).norm();
    res.report.iterations = k + 1;
    res.report.residual_history.push_back(std::max(primal, dual));
    res.report.objective_history.push_back(nuclear_norm(res.Lr) +
                                           rho * res.S.cwiseAbs().sum());
    if (primal <= tol && dual <= tol) {
      res.report.converged = true;
      break;
    }
  }
  return res;
}

std::pair<Mat, SolverReport> ssc(const Mat& X, double lam, double tol,
                                 int max_iter) {
  if (lam <= 0) throw std::invalid_argument("ssc: lam must be > 0");
  const int n = static_cast<int>(X.cols());
  SolverReport rep;
  rep.tolerance_used = tol;

  Mat G = X.transpose() * X;
  const double lf = std::max(gram_spectral_norm(X), 1e-12);
  const double tau = 1.0 / lf;

  Mat Z = Mat::Zero(n, n);
  auto objective = [&](const Mat& W) {
    return lam * W.cwiseAbs().sum() + 0.5 * (X - X * W).squaredNorm();
  };
  for (int k = 0; k < max_iter; ++k) {
    Mat next = soft_threshold(Mat(Z - tau * (G * Z - G)), lam * tau);
    next.diagonal().setZero();
    const double gap = (next - Z).norm();
    Z = std::move(next);
    rep.iterations = k + 1;
    rep.objective_history.push_back(objective(Z));
    rep.residual_history.push_back(gap);
    if (gap <= tol) {
      rep.converged = true;
      break;
    }
  }
  return {Z, rep};
}

std::pair<Mat, SolverReport> matrix_complete(const ObservedEntries& observed,
                                             int rows, int cols,
                                             std::vector<double> lam_schedule,
                                             double tol, int max_iter) {
  if (observed.empty())
    throw std::invalid_argument("matrix_complete: no observed entries");
  if (rows < 1 || cols < 1)
    throw std::invalid_argument("matrix_complete: bad shape");

  Mat mask = Mat::Zero(rows, cols);
  Mat target = Mat::Zero(rows, cols);
  for (const auto& [i, j, v] : observed) {
    if (i < 0 || i >= rows || j < 0 || j >= cols)
      throw std::out_of_range("matrix_complete: entry index out of range");
    mask(i, j) = 1.0;
    target(i, j) = v;
  }

  const double scale = std::max(target.cwiseAbs().maxCoeff(), 1e-12);
  if (lam_schedule.empty()) {
    double lam = 0.5 * scale;
    const double lam_min = 1e-10 * scale;
    while (lam > lam_min) {
      lam_schedule.push_back(lam);
      lam *= 0.25;
    }
    lam_schedule.push_back(lam_min);
  }

  SolverReport rep;
  rep.tolerance_used = tol;
  Mat Mx = Mat::Zero(rows, cols);
  int budget = max_iter;

  for (double lam : lam_schedule) {
    auto objective = [&](const Mat& W) {
      return 0.5 * (mask.array() * (W - target).array()).matrix().squaredNorm() +
             lam * nuclear_norm(W);
    };
    // Monotone accelerated steps: the cheaper of the prox candidate and
    // the incumbent is kept, momentum from both.
    Mat x = Mx, y = Mx;
    double t = 1.0;
    double fx = objective(x);
    while (budget > 0) {
      --budget;
      Mat grad = (mask.array() * (y - target).array()).matrix();
      Mat z = svt(y - grad, lam);
      const double fz = objective(z);
      Mat x_next = fz <= fx ? z : x;
      const double fx_next = std::min(fz, fx);
      const double t_next = 0.5 * (1.0 + std::sqrt(4.0 * t * t + 1.0));
      y = x_next + (t / t_next) * (z - x_next) +
          ((t - 1.0) / t_next) * (x_next - x);
      const double gap = (x_next - x).norm();
      x = std::move(x_next);
      fx = fx_next;
      t = t_next;
      rep.iterations += 1;
      rep.objective_history.push_back(fx);
      rep.residual_history.push_back(gap);
      if (gap <= tol) break;
    }
    Mx = x;
    if (budget <= 0) break;
  }

  const double obs_norm = std::max((mask.array() * target.array()).matrix().norm(), 1e-300);
  rep.converged =
      (mask.array() * (Mx - target).array()).matrix().norm() <= tol * obs_norm * 10.0 + tol;
  return {Mx, rep};
}

std::pair<Mat, Mat> pca(const Mat& X, int k) {
  const int d = static_cast<int>(X.rows());
  const int n = static_cast<int>(X.cols());
  if (k < 1 || k > std::min(d, n))
    throw std::invalid_argument("pca: need 1 <= k <= min(d, n)");
  Vec mean = X.rowwise().mean();
  Mat Xc = X.colwise() - mean;
  Mat C = (Xc * Xc.transpose()) / n;
  Eigen::SelfAdjointEigenSolver<Mat> es(C);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("pca: eigendecomposition failed");
  Mat W(d, k);
  for (int j = 0; j < k; ++j) W.col(j) = es.eigenvectors().col(d - 1 - j);
  return {W, W.transpose() * Xc};
}

std::vector<int> subspace_cluster(const Mat& X, SubspaceMethod method, int k,
                                  const SubspaceClusterParams& params) {
  const int n = static_cast<int>(X.cols());
  if (k < 1 || k > n)
    throw std::invalid_argument("subspace_cluster: need 1 <= k <= n");

  Mat Z;
  if (method == SubspaceMethod::Lrr)
    Z = lrr_alm(X, params.lambda, 1e-2, 1e6, 1.5, params.tol, params.max_iter).Z;
  else
    Z = ssc(X, params.lambda, params.tol, params.max_iter).first;

  Mat W = 0.5 * (Z.cwiseAbs() + Z.transpose().cwiseAbs());
  const double top = W.maxCoeff();
  const double cut = top > 0 ? 1e-6 * top : 0.0;
  EdgeList edges;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (W(i, j) > cut) edges.emplace_back(i, j, W(i, j));
  Graph g = build_graph(n, edges, false);

  // Component indicators stand in for the constant eigenvectors the
  // embedding drops; with them, separable affinities split exactly.
  std::vector<int> comp(n, 0);
  int ncomp = 1;
  {
    std::vector<int> stack;
    std::vector<bool> seen(n, false);
    ncomp = 0;
    for (int s = 0; s < n; ++s) {
      if (seen[s]) continue;
      stack.push_back(s);
      seen[s] = true;
      while (!stack.empty()) {
        int u = stack.back();
        stack.pop_back();
        comp[u] = ncomp;
        for (SpMat::InnerIterator it(g.adjacency, u); it; ++it)
          if (!seen[it.col()]) {
            seen[it.col()] = true;
            stack.push_back(static_cast<int>(it.col()));
          }
      }
      ++ncomp;
    }
  }

  const int m = std::min(k, n - 1);
  Mat emb = m >= 1 ? spectral_embedding(g, m, true) : Mat::Zero(n, 0);
  Mat feats(n, ncomp + emb.cols());
  feats.setZero();
  for (int i = 0; i < n; ++i) feats(i, comp[i]) = 1.0;
  feats.rightCols(emb.cols()) = emb;

  return kmeans(feats, k, params.seed, params.restarts).first;
}

}  // namespace lapssl
