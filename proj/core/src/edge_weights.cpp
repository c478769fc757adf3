#include "lapssl/edge_weights.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace lapssl {

namespace {

void check_support(int n, const NeighborhoodMap& nbrs) {
  if (static_cast<int>(nbrs.size()) != n)
    throw std::invalid_argument("neighborhood map size must match point count");
  for (int i = 0; i < n; ++i)
    for (int j : nbrs[i]) {
      if (j < 0 || j >= n) throw std::out_of_range("neighbor index out of range");
      if (j == i) throw std::invalid_argument("node listed as its own neighbor");
    }
}

SpMat from_rows(int n, const NeighborhoodMap& nbrs,
                const std::vector<std::vector<double>>& rows) {
  std::vector<Triplet> trips;
  for (int i = 0; i < n; ++i)
    for (size_t s = 0; s < nbrs[i].size(); ++s)
      trips.emplace_back(i, nbrs[i][s], rows[i][s]);
  SpMat W(n, n);
  W.setFromTriplets(trips.begin(), trips.end());
  W.makeCompressed();
  return W;
}

}  // namespace

NeighborhoodMap knn_neighbors(const Mat& X, int k) {
  const int n = static_cast<int>(X.rows());
  if (k < 1 || k >= n) throw std::invalid_argument("knn_neighbors: need 1 <= k < n");
  NeighborhoodMap nbrs(n);
  std::vector<std::pair<double, int>> cand(n - 1);
  for (int i = 0; i < n; ++i) {
    int m = 0;
    for (int j = 0; j < n; ++j) {
      if (j == i) continue;
      cand[m++] = {(X.row(i) - X.row(j)).squaredNorm(), j};
    }
    std::partial_sort(cand.begin(), cand.begin() + k, cand.end());
    nbrs[i].resize(k);
    for (int s = 0; s < k; ++s) nbrs[i][s] = cand[s].second;
  }
  return nbrs;
}

NeighborhoodMap graph_neighbors(const Graph& g) {
  NeighborhoodMap nbrs(g.n);
  for (int i = 0; i < g.n; ++i)
    for (SpMat::InnerIterator it(g.adjacency, i); it; ++it)
      if (it.col() != i) nbrs[i].push_back(static_cast<int>(it.col()));
  return nbrs;
}

WeightMatrix rbf_weights(const Mat& X, const NeighborhoodMap& nbrs, double t,
                         bool normalize) {
  if (t <= 0.0) throw std::invalid_argument("rbf_weights: bandwidth must be > 0");
  const int n = static_cast<int>(X.rows());
  check_support(n, nbrs);
  std::vector<std::vector<double>> rows(n);
  for (int i = 0; i < n; ++i) {
    rows[i].resize(nbrs[i].size());
    double sum = 0.0;
    for (size_t s = 0; s < nbrs[i].size(); ++s) {
      const double d2 = (X.row(i) - X.row(nbrs[i][s])).squaredNorm();
      rows[i][s] = std::exp(-d2 / (4.0 * t));
      sum += rows[i][s];
    }
    if (normalize && sum > 0.0)
      for (double& w : rows[i]) w /= sum;
  }
  return {from_rows(n, nbrs, rows), normalize};
}

WeightMatrix cosine_attention_weights(const Mat& Z, const NeighborhoodMap& nbrs,
                                      double beta) {
  if (beta < 0.0) throw std::invalid_argument("cosine_attention_weights: beta < 0");
  const int n = static_cast<int>(Z.rows());
  check_support(n, nbrs);
  Vec norms = Z.rowwise().norm();
  std::vector<std::vector<double>> rows(n);
  for (int i = 0; i < n; ++i) {
    if (nbrs[i].empty()) continue;
    if (norms[i] == 0.0)
      throw std::invalid_argument("cosine_attention_weights: zero-norm embedding");
    rows[i].resize(nbrs[i].size());
    double top = -std::numeric_limits<double>::infinity();
    for (size_t s = 0; s < nbrs[i].size(); ++s) {
      const int j = nbrs[i][s];
      if (norms[j] == 0.0)
        throw std::invalid_argument("cosine_attention_weights: zero-norm embedding");
      rows[i][s] = beta * Z.row(i).dot(Z.row(j)) / (norms[i] * norms[j]);
      top = std::max(top, rows[i][s]);
    }
    double sum = 0.0;
    for (double& w : rows[i]) {
      w = std::exp(w - top);
      sum += w;
    }
    for (double& w : rows[i]) w /= sum;
  }
  return {from_rows(n, nbrs, rows), true};
}

WeightMatrix lle_weights_closed_form(const Mat& X, const NeighborhoodMap& nbrs,
                                     double eps_reg) {
  if (eps_reg <= 0.0) throw std::invalid_argument("lle_weights_closed_form: eps_reg <= 0");
  const int n = static_cast<int>(X.rows());
  check_support(n, nbrs);
  std::vector<std::vector<double>> rows(n);
  for (int i = 0; i < n; ++i) {
    const int s = static_cast<int>(nbrs[i].size());
    if (s == 0) continue;
    Mat D(s, X.cols());
    for (int a = 0; a < s; ++a) D.row(a) = X.row(i) - X.row(nbrs[i][a]);
    Mat G = D * D.transpose();
    const double tr = G.trace();
    if (tr <= 0.0) {  // all neighbors coincide with x_i: any convex combo fits
      rows[i].assign(s, 1.0 / s);
      continue;
    }
    const Vec e = Vec::Ones(s);
    bool solved = false;
    for (int round = 0; round <= 10; ++round) {
      Eigen::LDLT<Mat> ldlt(G);
      Vec w = ldlt.solve(e);
      const double total = w.sum();
      const double resid = (G * w - e).lpNorm<Eigen::Infinity>();
      if (ldlt.info() == Eigen::Success && w.allFinite() &&
          std::abs(total) > 1e-12 * s &&
          resid <= 1e-8 * std::max(1.0, w.lpNorm<Eigen::Infinity>() * G.lpNorm<Eigen::Infinity>())) {
        w /= total;
        rows[i].assign(w.data(), w.data() + s);
        solved = true;
        break;
      }
      G.diagonal().array() += eps_reg * G.trace();
    }
    if (!solved)
      throw std::runtime_error("lle_weights_closed_form: singular Gram after regularization");
  }
  return {from_rows(n, nbrs, rows), true};
}

std::pair<WeightMatrix, SolverReport> lle_weights_nmf(const Mat& X,
                                                      const NeighborhoodMap& nbrs,
                                                      double mu, int iters,
                                                      double tol) {
  if (mu <= 0.0) throw std::invalid_argument("lle_weights_nmf: mu must be > 0");
  const int n = static_cast<int>(X.rows());
  check_support(n, nbrs);

  std::vector<Mat> gram(n);
  std::vector<Vec> w(n);
  std::vector<bool> active(n, false);
  for (int i = 0; i < n; ++i) {
    const int s = static_cast<int>(nbrs[i].size());
    if (s == 0) continue;
    Mat D(s, X.cols());
    for (int a = 0; a < s; ++a) D.row(a) = X.row(i) - X.row(nbrs[i][a]);
    gram[i] = D * D.transpose();
    w[i] = Vec::Constant(s, 1.0 / s);
    active[i] = true;
  }

  auto objective = [&](int i, const Vec& v) {
    const double sum = v.sum();
    return 0.5 * v.dot(gram[i] * v) + 0.5 * mu * sum * sum;
  };

  SolverReport rep;
  rep.tolerance_used = tol;
  std::vector<bool> frozen(n, false);
  for (int it = 0; it < iters; ++it) {
    double max_change = 0.0;
    for (int i = 0; i < n; ++i) {
      if (!active[i] || frozen[i]) continue;
      const Vec denom = (gram[i] * w[i]).array() + mu * w[i].sum();
      Vec ratio(denom.size());
      for (int j = 0; j < ratio.size(); ++j)
        ratio[j] = mu / std::max(denom[j], 1e-12 * mu);
      const double before = objective(i, w[i]);
      // each candidate step is renormalized onto the simplex, then damped
      // until the row objective stops increasing; a row that cannot descend
      // at any damping level has nowhere left to go and is frozen
      bool accepted = false;
      for (double theta : {1.0, 0.5, 0.25, 0.125, 0.0625}) {
        Vec next = w[i].array() * ratio.array().pow(theta);
        if (!next.allFinite() || next.sum() <= 0.0) continue;
        next /= next.sum();
        if (objective(i, next) <= before) {
          const double change = (next - w[i]).lpNorm<Eigen::Infinity>();
          max_change = std::max(max_change, change);
          w[i] = next;
          if (change <= tol) frozen[i] = true;
          accepted = true;
          break;
        }
      }
      if (!accepted) frozen[i] = true;
    }
    double total_obj = 0.0;
    for (int i = 0; i < n; ++i)
      if (active[i]) total_obj += objective(i, w[i]);
    rep.iterations = it + 1;
    rep.objective_history.push_back(total_obj);
    rep.residual_history.push_back(max_change);
    if (max_change <= tol) {
      rep.converged = true;
      break;
    }
  }

  std::vector<std::vector<double>> rows(n);
  for (int i = 0; i < n; ++i) {
    if (!active[i]) continue;
    const double sum = w[i].sum();
    if (sum > 0.0) w[i] /= sum;
    rows[i].assign(w[i].data(), w[i].data() + w[i].size());
  }
  return {{from_rows(n, nbrs, rows), true}, rep};
}

WeightMatrix affinity_from_representation(const Mat& Z) {
  if (Z.rows() != Z.cols())
    throw std::invalid_argument("affinity_from_representation: square input required");
  Mat W = 0.5 * (Z.cwiseAbs() + Z.transpose().cwiseAbs());
  return {W.sparseView(), false};
}

}  // namespace lapssl
