#include <benchmark/benchmark.h>

#include <map>
#include <utility>

#include "lapssl/data_io.hpp"
#include "lapssl/graph.hpp"
#include "lapssl/prox.hpp"
#include "lapssl/rng.hpp"
#include "lapssl/spectral.hpp"
#include "lapssl/types.hpp"

namespace {

using namespace lapssl;

// Shared graph fixtures keyed by size; mean degree stays near 16 as n
// grows so the sparse kernels scale the way they would on real data.
const Graph& sbm_fixture(int n) {
  static std::map<int, Graph> cache;
  auto it = cache.find(n);
  if (it == cache.end()) {
    const int block = n / 8;
    std::vector<int> blocks(8, block);
    const double p_in = std::min(1.0, 100.0 / n);
    const double p_out = 4.0 / n;
    auto [g, labels] = synth_sbm(blocks, p_in, p_out, 42);
    it = cache.emplace(n, std::move(g)).first;
  }
  return it->second;
}

Mat random_mat(int rows, int cols, unsigned seed) {
  Prng rng(seed);
  Mat M(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) M(i, j) = rng.normal();
  return M;
}

void BM_LaplacianBuild(benchmark::State& state) {
  const Graph& g = sbm_fixture(static_cast<int>(state.range(0)));
  const LaplacianSpec spec{LaplacianKind::SymNormalized, 1.0};
  for (auto _ : state) {
    SpMat L = laplacian(g, spec);
    benchmark::DoNotOptimize(L);
  }
}
BENCHMARK(BM_LaplacianBuild)->Arg(512)->Arg(2048)->Arg(8192);

void BM_FilterRenormalized(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const Graph& g = sbm_fixture(n);
  const Mat X = random_mat(n, 32, 7);
  FilterSpec spec;
  spec.kind = FilterKind::Renormalized;
  spec.k = 2;
  for (auto _ : state) {
    auto [Xf, rep] = apply_filter(g, spec, X);
    benchmark::DoNotOptimize(Xf);
  }
}
BENCHMARK(BM_FilterRenormalized)->Arg(512)->Arg(2048)->Arg(8192);

void BM_FilterAutoRegressive(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const Graph& g = sbm_fixture(n);
  const Mat X = random_mat(n, 32, 7);
  FilterSpec spec;
  spec.kind = FilterKind::AutoRegressive;
  spec.eta = 1.0;
  for (auto _ : state) {
    auto [Xf, rep] = apply_filter(g, spec, X);  // dense SPD solve
    benchmark::DoNotOptimize(Xf);
  }
}
BENCHMARK(BM_FilterAutoRegressive)->Arg(256)->Arg(512)->Arg(1024);

void BM_Fista(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  ProxProblem prob;
  prob.A = random_mat(n / 2, n, 3);
  const Vec x_true = Vec::Zero(n);
  prob.b = prob.A * x_true + 0.1 * random_mat(n / 2, 1, 4).col(0);
  prob.lambda = 0.1;
  const Vec x0 = Vec::Zero(n);
  for (auto _ : state) {
    auto [x, rep] = fista(prob, x0, 100, 0.0);
    benchmark::DoNotOptimize(x);
  }
}
BENCHMARK(BM_Fista)->Arg(128)->Arg(256)->Arg(512);

void BM_Svt(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const Mat A = random_mat(n, n, 9);
  const double lam = 0.5 * std::sqrt(static_cast<double>(n));
  for (auto _ : state) {
    Mat S = svt(A, lam);
    benchmark::DoNotOptimize(S);
  }
}
BENCHMARK(BM_Svt)->Arg(64)->Arg(128)->Arg(256)->Arg(512);

}  // namespace

BENCHMARK_MAIN();
