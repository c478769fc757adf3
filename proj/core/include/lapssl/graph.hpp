#pragma once

#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "lapssl/types.hpp"

namespace lapssl {

// Weighted graph with CSR adjacency. The base edge set never contains
// self-loops; loop augmentation happens at Laplacian construction time.
struct Graph {
  int n = 0;
  bool directed = false;
  SpMat adjacency;  // n x n; exactly symmetric when undirected

  int num_nodes() const { return n; }
};

using EdgeList = std::vector<std::tuple<int, int, double>>;

// Loop weight gamma is applied to A before any degree normalization:
// A~ = A + gamma*I, D~ = diag(A~ * 1).
enum class LaplacianKind { Unnormalized, SymNormalized, RandomWalk };

struct LaplacianSpec {
  LaplacianKind kind = LaplacianKind::SymNormalized;
  double self_loop_gamma = 0.0;
};

// mean_degree averages weighted degrees; max/min count stored neighbors.
struct DegreeStats {
  double mean_degree = 0.0;
  int max_degree = 0;
  int min_degree = 0;
  long long edge_end_count = 0;  // sum of adjacency entries
};

// Duplicate edges merge by weight summation; undirected input is
// symmetrized. Self-loops and negative weights are rejected.
Graph build_graph(int n, const EdgeList& edges, bool directed);

DegreeStats degree_stats(const Graph& g);

SpMat laplacian(const Graph& g, const LaplacianSpec& spec);

// Loop-augmented degree vector: diag(A + gamma*I) row sums.
Vec augmented_degrees(const Graph& g, double gamma);

// Fixed point of h_u = (1-alpha)/n + alpha * sum_{v in N_in(u)} h_v / d_v.
// Dangling nodes spread their mass uniformly.
std::pair<Vec, SolverReport> pagerank(const Graph& g, double alpha,
                                      double tol = 1e-12, int max_iter = 1000);

// One-dimensional Weisfeiler-Lehman color refinement. Returns rounds+1
// colorings (round 0 is the initial one, relabeled canonically). Colors
// are small integers assigned in first-seen node order, so isomorphic
// components of the same graph receive identical color multisets.
std::vector<std::vector<int>> wl_refine(const Graph& g,
                                        const std::vector<int>& init_colors,
                                        int rounds);

// Shortest-path distances from source; unreachable nodes get +infinity.
// Weights must be nonnegative.
Vec bellman_ford(const Graph& g, int source);

// Text round-trip: one "i<TAB>j[<TAB>w]" edge per line, 0-based, w
// defaulting to 1. Node count is 1 + max index unless n_hint is larger.
Graph read_edge_list(const std::string& path, bool directed, int n_hint = 0);
void write_edge_list(const Graph& g, const std::string& path);

}  // namespace lapssl
