#include "lapssl/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <random>
#include <stdexcept>

namespace lapssl {

namespace {

double inf_norm(const SpMat& M) {
  double best = 0.0;
  for (int i = 0; i < M.rows(); ++i) {
    double row = 0.0;
    for (SpMat::InnerIterator it(M, i); it; ++it) row += std::abs(it.value());
    best = std::max(best, row);
  }
  return best;
}

// Gershgorin bracket [lo, hi] containing every eigenvalue.
std::pair<double, double> gershgorin(const SpMat& M) {
  double lo = 0.0, hi = 0.0;
  for (int i = 0; i < M.rows(); ++i) {
    double diag = 0.0, off = 0.0;
    for (SpMat::InnerIterator it(M, i); it; ++it) {
      if (it.col() == i)
        diag = it.value();
      else
        off += std::abs(it.value());
    }
    lo = std::min(lo, diag - off);
    hi = std::max(hi, diag + off);
  }
  return {lo, hi};
}

Vec deterministic_start(int n, int phase) {
  Vec v(n);
  for (int i = 0; i < n; ++i) v[i] = std::sin(i + 1.0 + 0.7 * phase) + 0.25;
  return v;
}

std::vector<int> component_ids(const Graph& g, int* count) {
  std::vector<int> comp(g.n, -1);
  int c = 0;
  for (int s = 0; s < g.n; ++s) {
    if (comp[s] >= 0) continue;
    std::queue<int> q;
    q.push(s);
    comp[s] = c;
    while (!q.empty()) {
      int u = q.front();
      q.pop();
      for (SpMat::InnerIterator it(g.adjacency, u); it; ++it)
        if (comp[it.col()] < 0) {
          comp[it.col()] = c;
          q.push(it.col());
        }
    }
    ++c;
  }
  *count = c;
  return comp;
}

}  // namespace

std::pair<EigenPair, SolverReport> extreme_eigen(const SpMat& M,
                                                 EigenWhich which, double tol,
                                                 int max_iter,
                                                 const Vec& null_space) {
  const int n = static_cast<int>(M.rows());
  if (n == 0 || M.rows() != M.cols())
    throw std::invalid_argument("extreme_eigen: square nonempty matrix required");

  const double scale = inf_norm(M);
  SolverReport rep;
  rep.tolerance_used = tol;
  if (scale == 0.0) {
    EigenPair p{0.0, Vec::Unit(n, 0)};
    rep.converged = true;
    return {p, rep};
  }
  const double thresh = tol * std::min(1.0, scale);

  // Shift so the wanted extreme becomes the dominant eigenvalue of B.
  auto [lo, hi] = gershgorin(M);
  const bool largest = which == EigenWhich::Largest;
  const double shift = largest ? -lo : hi;
  const double sign = largest ? 1.0 : -1.0;

  Vec null_unit;
  if (!largest && null_space.size() == n && null_space.norm() > 0)
    null_unit = null_space.normalized();

  auto project = [&](Vec& v) {
    if (null_unit.size() == n) v -= null_unit.dot(v) * null_unit;
  };

  Vec v = deterministic_start(n, 0);
  project(v);
  if (v.norm() < 1e-12) v = deterministic_start(n, 1), project(v);
  v.normalize();

  EigenPair pair;
  for (int it = 0; it < max_iter; ++it) {
    Vec w = sign * (M * v) + shift * v;
    project(w);
    const double wn = w.norm();
    if (wn < 1e-300) {
      v = deterministic_start(n, it + 2);
      project(v);
      v.normalize();
      continue;
    }
    v = w / wn;
    const double lam = v.dot(M * v);
    const double resid = (M * v - lam * v).norm();
    rep.iterations = it + 1;
    rep.residual_history.push_back(resid);
    pair.value = lam;
    pair.vector = v;
    if (resid <= thresh) {
      rep.converged = true;
      break;
    }
  }
  return {pair, rep};
}

std::pair<double, double> spectral_radius_bounds(const Mat& M) {
  if (M.size() == 0) return {0.0, 0.0};
  if (M.minCoeff() < 0.0)
    throw std::invalid_argument("spectral_radius_bounds: negative entry");
  const Vec row = M.rowwise().sum();
  const Vec col = M.colwise().sum().transpose();
  return {std::max(row.minCoeff(), col.minCoeff()),
          std::min(row.maxCoeff(), col.maxCoeff())};
}

double lambda_max_estimate(const DegreeStats& stats, double gamma) {
  if (gamma < 0.0) throw std::invalid_argument("lambda_max_estimate: gamma < 0");
  if (stats.mean_degree <= 0.0)
    throw std::invalid_argument("lambda_max_estimate: mean degree must be > 0");
  return 2.0 * stats.mean_degree / (gamma + stats.mean_degree);
}

Mat heat_kernel(const SpMat& L, double t) {
  const int n = static_cast<int>(L.rows());
  if (n > 2000)
    throw std::invalid_argument("heat_kernel: dense diagnostic capped at n=2000");
  if (t < 0.0) throw std::invalid_argument("heat_kernel: negative time");
  if (t == 0.0) return Mat::Identity(n, n);
  Eigen::SelfAdjointEigenSolver<Mat> es{Mat(L)};
  if (es.info() != Eigen::Success)
    throw std::runtime_error("heat_kernel: eigendecomposition failed");
  const Vec decay = (-t * es.eigenvalues().array()).exp();
  Mat K = es.eigenvectors() * decay.asDiagonal() * es.eigenvectors().transpose();
  return 0.5 * (K + K.transpose());
}

std::pair<Mat, SolverReport> apply_filter(const Graph& g, const FilterSpec& spec,
                                          const Mat& X, FilterMode mode,
                                          int ar_steps) {
  if (X.rows() != g.n)
    throw std::invalid_argument("apply_filter: X row count must equal n");
  SolverReport rep;
  const LaplacianSpec lap{LaplacianKind::SymNormalized, spec.gamma};

  if (spec.kind == FilterKind::Residual) {
    if (spec.eta < 0) throw std::invalid_argument("apply_filter: eta < 0");
    SpMat L = laplacian(g, lap);
    rep.converged = true;
    return {X - spec.eta * (L * X), rep};
  }

  if (spec.kind == FilterKind::Renormalized) {
    if (spec.k < 0) throw std::invalid_argument("apply_filter: k < 0");
    SpMat L = laplacian(g, lap);
    SpMat S(g.n, g.n);
    S.setIdentity();
    S = (S - L).pruned();
    Mat Y = X;
    for (int i = 0; i < spec.k; ++i) Y = S * Y;
    rep.converged = true;
    return {Y, rep};
  }

  // AutoRegressive
  if (spec.eta < 0) throw std::invalid_argument("apply_filter: eta < 0");
  if (spec.eta == 0.0) {
    rep.converged = true;
    return {X, rep};
  }
  SpMat L = laplacian(g, lap);
  rep.tolerance_used = 0.0;

  if (mode == FilterMode::Direct) {
    Mat A = spec.eta * Mat(L);
    A.diagonal().array() += 1.0;
    Eigen::LLT<Mat> llt(A);
    if (llt.info() != Eigen::Success)
      throw std::runtime_error("apply_filter: AR system not positive definite");
    Mat Y = llt.solve(X);
    rep.converged = true;
    return {Y, rep};
  }

  SpMat S(g.n, g.n);
  S.setIdentity();
  S = (S - L).pruned();
  const double c = spec.eta / (1.0 + spec.eta);
  const int steps =
      ar_steps > 0 ? ar_steps : std::max(static_cast<int>(4.0 * spec.eta), 1);
  const double xnorm = std::max(1.0, X.norm());
  Mat Y = X;
  for (int i = 0; i < steps; ++i) {
    Mat next = X + c * (S * Y);
    rep.residual_history.push_back((next - Y).norm() / xnorm);
    Y = std::move(next);
  }
  rep.iterations = steps;
  rep.converged = true;
  return {Y / (1.0 + spec.eta), rep};
}

double deep_collapse_demo(const Graph& g, const Mat& X, int k) {
  if (k < 0) throw std::invalid_argument("deep_collapse_demo: negative power");
  if (X.rows() != g.n)
    throw std::invalid_argument("deep_collapse_demo: X row count must equal n");
  Vec d = augmented_degrees(g, 0.0);
  for (int i = 0; i < g.n; ++i)
    if (d[i] <= 0.0)
      throw std::domain_error("deep_collapse_demo: zero-degree node");
  SpMat P = g.adjacency;
  for (int i = 0; i < P.rows(); ++i)
    for (SpMat::InnerIterator it(P, i); it; ++it) it.valueRef() /= d[i];
  Mat Y = X;
  for (int i = 0; i < k; ++i) Y = P * Y;
  double worst = 0.0;
  for (int c = 0; c < Y.cols(); ++c) {
    const double mean = Y.col(c).mean();
    worst = std::max(worst, (Y.col(c).array() - mean).square().mean());
  }
  return worst;
}

double optimal_depth(const DegreeStats& stats, int n_labeled, int n) {
  if (stats.mean_degree <= 1.0)
    throw std::domain_error("optimal_depth: mean degree must exceed 1");
  if (n_labeled < 1 || n < n_labeled)
    throw std::invalid_argument("optimal_depth: need 1 <= n_labeled <= n");
  return std::log(static_cast<double>(n) / n_labeled) / std::log(stats.mean_degree);
}

Mat spectral_embedding(const Graph& g, int m, bool per_component) {
  if (m < 1 || m >= g.n)
    throw std::invalid_argument("spectral_embedding: need 1 <= m < n");
  int ncomp = 0;
  const std::vector<int> comp = component_ids(g, &ncomp);
  if (ncomp > 1 && !per_component)
    throw std::invalid_argument("spectral_embedding: disconnected graph");

  Mat out = Mat::Zero(g.n, m);
  for (int c = 0; c < ncomp; ++c) {
    std::vector<int> nodes;
    for (int i = 0; i < g.n; ++i)
      if (comp[i] == c) nodes.push_back(i);
    const int s = static_cast<int>(nodes.size());
    if (s == 1) continue;

    std::vector<int> local(g.n, -1);
    for (int idx = 0; idx < s; ++idx) local[nodes[idx]] = idx;
    EdgeList edges;
    for (int idx = 0; idx < s; ++idx)
      for (SpMat::InnerIterator it(g.adjacency, nodes[idx]); it; ++it)
        if (local[it.col()] > idx)
          edges.emplace_back(idx, local[it.col()], it.value());
    Graph sub = build_graph(s, edges, false);

    SpMat L = laplacian(sub, {LaplacianKind::SymNormalized, 0.0});
    Eigen::SelfAdjointEigenSolver<Mat> es{Mat(L)};
    if (es.info() != Eigen::Success)
      throw std::runtime_error("spectral_embedding: eigendecomposition failed");
    const int cols = std::min(m, s - 1);
    for (int j = 0; j < cols; ++j)
      for (int idx = 0; idx < s; ++idx)
        out(nodes[idx], j) = es.eigenvectors()(idx, j + 1);
  }
  return out;
}

std::pair<std::vector<int>, double> kmeans(const Mat& points, int k,
                                           unsigned seed, int restarts) {
  const int n = static_cast<int>(points.rows());
  if (k < 1 || k > n) throw std::invalid_argument("kmeans: need 1 <= k <= n");
  restarts = std::max(restarts, 1);

  std::vector<int> best_labels;
  double best_inertia = std::numeric_limits<double>::infinity();

  for (int r = 0; r < restarts; ++r) {
    std::mt19937 gen(seed + static_cast<unsigned>(r));
    Mat centers(k, points.cols());
    centers.row(0) = points.row(static_cast<int>(gen() % n));

    Vec near2 = (points.rowwise() - centers.row(0)).rowwise().squaredNorm();
    for (int c = 1; c < k; ++c) {
      int far = 0;
      for (int i = 1; i < n; ++i)
        if (near2[i] > near2[far]) far = i;
      centers.row(c) = points.row(far);
      near2 = near2.cwiseMin(
          (points.rowwise() - centers.row(c)).rowwise().squaredNorm());
    }

    std::vector<int> labels(n, 0);
    for (int iter = 0; iter < 100; ++iter) {
      bool changed = false;
      for (int i = 0; i < n; ++i) {
        int arg = 0;
        double best = (points.row(i) - centers.row(0)).squaredNorm();
        for (int c = 1; c < k; ++c) {
          const double d2 = (points.row(i) - centers.row(c)).squaredNorm();
          if (d2 < best) {
            best = d2;
            arg = c;
          }
        }
        if (arg != labels[i]) changed = true;
        labels[i] = arg;
      }
      Mat sums = Mat::Zero(k, points.cols());
      std::vector<int> counts(k, 0);
      for (int i = 0; i < n; ++i) {
        sums.row(labels[i]) += points.row(i);
        ++counts[labels[i]];
      }
      for (int c = 0; c < k; ++c)
        if (counts[c] > 0) centers.row(c) = sums.row(c) / counts[c];
      if (!changed && iter > 0) break;
    }

    double inertia = 0.0;
    for (int i = 0; i < n; ++i)
      inertia += (points.row(i) - centers.row(labels[i])).squaredNorm();
    if (inertia < best_inertia) {
      best_inertia = inertia;
      best_labels = labels;
    }
  }
  return {best_labels, best_inertia};
}

}  // namespace lapssl
