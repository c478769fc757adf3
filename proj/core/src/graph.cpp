#include "lapssl/graph.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>

namespace lapssl {

Graph build_graph(int n, const EdgeList& edges, bool directed) {
  if (n < 0) throw std::invalid_argument("build_graph: negative node count");
  std::vector<Triplet> trips;
  trips.reserve(edges.size() * (directed ? 1 : 2));
  for (const auto& [i, j, w] : edges) {
    if (i < 0 || i >= n || j < 0 || j >= n)
      throw std::out_of_range("build_graph: edge index out of range");
    if (i == j) throw std::invalid_argument("build_graph: self-loop in input");
    if (w < 0) throw std::invalid_argument("build_graph: negative edge weight");
    trips.emplace_back(i, j, w);
    if (!directed) trips.emplace_back(j, i, w);
  }
  Graph g;
  g.n = n;
  g.directed = directed;
  g.adjacency.resize(n, n);
  g.adjacency.setFromTriplets(trips.begin(), trips.end());  // duplicates sum
  g.adjacency.makeCompressed();
  return g;
}

DegreeStats degree_stats(const Graph& g) {
  DegreeStats s;
  if (g.n == 0) return s;
  double total = 0.0;
  int max_deg = 0;
  int min_deg = std::numeric_limits<int>::max();
  for (int i = 0; i < g.n; ++i) {
    int nnz = 0;
    for (SpMat::InnerIterator it(g.adjacency, i); it; ++it) {
      total += it.value();
      ++nnz;
    }
    max_deg = std::max(max_deg, nnz);
    min_deg = std::min(min_deg, nnz);
  }
  s.mean_degree = total / g.n;
  s.max_degree = max_deg;
  s.min_degree = min_deg;
  s.edge_end_count = std::llround(total);
  return s;
}

Vec augmented_degrees(const Graph& g, double gamma) {
  Vec d = Vec::Constant(g.n, gamma);
  for (int i = 0; i < g.n; ++i)
    for (SpMat::InnerIterator it(g.adjacency, i); it; ++it) d[i] += it.value();
  return d;
}

SpMat laplacian(const Graph& g, const LaplacianSpec& spec) {
  const int n = g.n;
  const double gamma = spec.self_loop_gamma;
  if (gamma < 0) throw std::invalid_argument("laplacian: negative gamma");
  std::vector<Triplet> trips;
  trips.reserve(static_cast<size_t>(g.adjacency.nonZeros()) + n);

  if (spec.kind == LaplacianKind::Unnormalized) {
    // Loop augmentation cancels here: (D + gI) - (A + gI) = D - A.
    Vec d = augmented_degrees(g, 0.0);
    for (int i = 0; i < n; ++i) {
      trips.emplace_back(i, i, d[i]);
      for (SpMat::InnerIterator it(g.adjacency, i); it; ++it)
        trips.emplace_back(i, it.col(), -it.value());
    }
  } else {
    Vec d = augmented_degrees(g, gamma);
    for (int i = 0; i < n; ++i)
      if (d[i] <= 0.0)
        throw std::domain_error(
            "laplacian: zero augmented degree under a normalized kind");
    if (spec.kind == LaplacianKind::SymNormalized) {
      Vec dis = d.array().rsqrt();
      for (int i = 0; i < n; ++i) {
        trips.emplace_back(i, i, 1.0 - gamma * dis[i] * dis[i]);
        for (SpMat::InnerIterator it(g.adjacency, i); it; ++it)
          trips.emplace_back(i, it.col(), -dis[i] * it.value() * dis[it.col()]);
      }
    } else {  // RandomWalk: I - D~^{-1} A~
      for (int i = 0; i < n; ++i) {
        trips.emplace_back(i, i, 1.0 - gamma / d[i]);
        for (SpMat::InnerIterator it(g.adjacency, i); it; ++it)
          trips.emplace_back(i, it.col(), -it.value() / d[i]);
      }
    }
  }
  SpMat L(n, n);
  L.setFromTriplets(trips.begin(), trips.end());
  L.makeCompressed();
  return L;
}

std::pair<Vec, SolverReport> pagerank(const Graph& g, double alpha, double tol,
                                      int max_iter) {
  if (alpha <= 0.0 || alpha >= 1.0)
    throw std::invalid_argument("pagerank: damping must lie in (0,1)");
  const int n = g.n;
  if (n == 0) return {Vec(), SolverReport{0, {}, {}, true, tol}};

  Vec outdeg = Vec::Zero(n);
  for (int i = 0; i < n; ++i)
    for (SpMat::InnerIterator it(g.adjacency, i); it; ++it)
      outdeg[i] += it.value();

  Vec h = Vec::Constant(n, 1.0 / n);
  SolverReport rep;
  rep.tolerance_used = tol;
  for (int k = 0; k < max_iter; ++k) {
    Vec next = Vec::Constant(n, (1.0 - alpha) / n);
    double dangling_mass = 0.0;
    for (int v = 0; v < n; ++v) {
      if (outdeg[v] <= 0.0) {
        dangling_mass += h[v];
        continue;
      }
      const double share = h[v] / outdeg[v];
      for (SpMat::InnerIterator it(g.adjacency, v); it; ++it)
        next[it.col()] += alpha * share * it.value();
    }
    next.array() += alpha * dangling_mass / n;
    const double resid = (next - h).lpNorm<1>();
    h = next;
    rep.residual_history.push_back(resid);
    rep.iterations = k + 1;
    if (resid <= tol) {
      rep.converged = true;
      break;
    }
  }
  return {h, rep};
}

std::vector<std::vector<int>> wl_refine(const Graph& g,
                                        const std::vector<int>& init_colors,
                                        int rounds) {
  if (static_cast<int>(init_colors.size()) != g.n)
    throw std::invalid_argument("wl_refine: color count must match node count");
  if (rounds < 0) throw std::invalid_argument("wl_refine: negative rounds");

  std::vector<std::vector<int>> history;
  history.reserve(rounds + 1);

  // Canonical relabel of the initial coloring, first-seen node order.
  std::vector<int> colors(g.n);
  {
    std::map<int, int> relabel;
    for (int i = 0; i < g.n; ++i) {
      auto [it, fresh] = relabel.try_emplace(init_colors[i],
                                             static_cast<int>(relabel.size()));
      colors[i] = it->second;
      (void)fresh;
    }
  }
  history.push_back(colors);

  for (int r = 0; r < rounds; ++r) {
    std::map<std::pair<int, std::vector<int>>, int> table;
    std::vector<int> next(g.n);
    for (int i = 0; i < g.n; ++i) {
      std::vector<int> nbr;
      for (SpMat::InnerIterator it(g.adjacency, i); it; ++it)
        nbr.push_back(colors[it.col()]);
      std::sort(nbr.begin(), nbr.end());
      auto [it, fresh] = table.try_emplace({colors[i], std::move(nbr)},
                                           static_cast<int>(table.size()));
      next[i] = it->second;
      (void)fresh;
    }
    colors = std::move(next);
    history.push_back(colors);
  }
  return history;
}

Vec bellman_ford(const Graph& g, int source) {
  if (source < 0 || source >= g.n)
    throw std::out_of_range("bellman_ford: source out of range");
  const double inf = std::numeric_limits<double>::infinity();
  Vec dist = Vec::Constant(g.n, inf);
  dist[source] = 0.0;
  for (int round = 0; round < g.n - 1; ++round) {
    bool changed = false;
    for (int u = 0; u < g.n; ++u) {
      if (dist[u] == inf) continue;
      for (SpMat::InnerIterator it(g.adjacency, u); it; ++it) {
        const double cand = dist[u] + it.value();
        if (cand < dist[it.col()]) {
          dist[it.col()] = cand;
          changed = true;
        }
      }
    }
    if (!changed) break;
  }
  return dist;
}

Graph read_edge_list(const std::string& path, bool directed, int n_hint) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("read_edge_list: cannot open " + path);
  EdgeList edges;
  int max_index = -1;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream ss(line);
    long long i = -1, j = -1;
    double w = 1.0;
    if (!(ss >> i >> j))
      throw std::runtime_error("read_edge_list: parse error at line " +
                               std::to_string(lineno));
    ss >> w;  // optional third column
    edges.emplace_back(static_cast<int>(i), static_cast<int>(j), w);
    max_index = std::max({max_index, static_cast<int>(i), static_cast<int>(j)});
  }
  const int n = std::max(n_hint, max_index + 1);
  return build_graph(n, edges, directed);
}

void write_edge_list(const Graph& g, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_edge_list: cannot open " + path);
  out.precision(17);
  for (int i = 0; i < g.n; ++i)
    for (SpMat::InnerIterator it(g.adjacency, i); it; ++it) {
      if (!g.directed && it.col() < i) continue;
      out << i << '\t' << it.col() << '\t' << it.value() << '\n';
    }
  if (!out) throw std::runtime_error("write_edge_list: write failed");
}

}  // namespace lapssl
