// Serial references against the OpenMP kernels. The second argument of the
// parallel benchmarks is the worker count (0: runtime default).

#include <benchmark/benchmark.h>

#include <random>

#include "boxcouple/coarse.hpp"
#include "boxcouple/ghmetric.hpp"
#include "boxcouple/measures.hpp"
#include "boxcouple/parallel.hpp"
#include "boxcouple/spectral.hpp"

using namespace boxcouple;

namespace {

std::shared_ptr<const coarse::GroupSpace> cyclic_space(std::int64_t n) {
  return coarse::GroupSpace::from_quotient(std::make_shared<const groups::FiniteQuotient>(groups::cyclic_quotient(n)));
}

std::pair<measures::FiniteMeasure, measures::FiniteMeasure> measure_pair(std::size_t n) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0, 1);
  std::vector<std::string> labels;
  std::vector<double> d(n * n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    labels.push_back("p" + std::to_string(i));
    for (std::size_t j = 0; j < i; ++j) d[i * n + j] = d[j * n + i] = 1 + std::floor(4 * u(rng));
  }
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) d[i * n + j] = std::min(d[i * n + j], d[i * n + k] + d[k * n + j]);
    }
  }
  auto space = std::make_shared<const FiniteMetricSpace>(labels, d);
  auto weights = [&] {
    std::vector<double> w(n);
    double total = 0;
    for (auto& v : w) total += (v = u(rng));
    for (auto& v : w) v /= total;
    return w;
  };
  return {measures::FiniteMeasure(space, weights()), measures::FiniteMeasure(space, weights())};
}

void threads_from(benchmark::State& state, int index) { parallel::set_thread_count(static_cast<int>(state.range(index))); }

void BM_DeficiencySerial(benchmark::State& state) {
  auto [a, b] = measure_pair(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(measures::reference::deficiency(a, b, 1.0));
}

void BM_DeficiencyParallel(benchmark::State& state) {
  threads_from(state, 1);
  auto [a, b] = measure_pair(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(measures::deficiency(a, b, 1.0));
  parallel::set_thread_count(0);
}

void BM_CheegerSerial(benchmark::State& state) {
  auto g = spectral::cayley_graph(groups::cyclic_quotient(state.range(0), {1, 2})).graph;
  for (auto _ : state) benchmark::DoNotOptimize(spectral::reference::exact_cheeger(g));
}

void BM_CheegerParallel(benchmark::State& state) {
  threads_from(state, 1);
  auto g = spectral::cayley_graph(groups::cyclic_quotient(state.range(0), {1, 2})).graph;
  for (auto _ : state) benchmark::DoNotOptimize(spectral::exact_cheeger(g));
  parallel::set_thread_count(0);
}

coarse::MapRecord identity_map(std::int64_t n) {
  auto x = cyclic_space(n);
  coarse::Table t(x->size());
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = static_cast<std::uint32_t>(i);
  return {x, x, t};
}

void BM_VerifySerial(benchmark::State& state) {
  auto f = identity_map(state.range(0));
  auto c = coarse::ControlData::parse("affine:1,0/affine:1,0/0");
  for (auto _ : state) benchmark::DoNotOptimize(coarse::reference::verify(f, c, coarse::Mode::equivalence));
}

void BM_VerifyParallel(benchmark::State& state) {
  threads_from(state, 1);
  auto f = identity_map(state.range(0));
  auto c = coarse::ControlData::parse("affine:1,0/affine:1,0/0");
  for (auto _ : state) benchmark::DoNotOptimize(coarse::verify(f, c, coarse::Mode::equivalence));
  parallel::set_thread_count(0);
}

void BM_EnumerateSerial(benchmark::State& state) {
  auto x = cyclic_space(state.range(0));
  auto c = coarse::ControlData::parse("affine:1,1/affine:1,-1/1");
  for (auto _ : state) benchmark::DoNotOptimize(coarse::reference::enumerate(*x, *x, c, true, false));
}

void BM_EnumerateParallel(benchmark::State& state) {
  threads_from(state, 1);
  auto x = cyclic_space(state.range(0));
  auto c = coarse::ControlData::parse("affine:1,1/affine:1,-1/1");
  for (auto _ : state) benchmark::DoNotOptimize(coarse::enumerate_map_space(x, x, c, true, false));
  parallel::set_thread_count(0);
}

void BM_GhBoundsParallel(benchmark::State& state) {
  threads_from(state, 1);
  auto a = cyclic_space(state.range(0))->metric_space();
  auto b = cyclic_space(state.range(0) + 1)->metric_space();
  for (auto _ : state) benchmark::DoNotOptimize(gh::gh_bounds(a, b));
  parallel::set_thread_count(0);
}

}  // namespace

BENCHMARK(BM_DeficiencySerial)->Arg(16)->Arg(20)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_DeficiencyParallel)->Args({16, 1})->Args({16, 0})->Args({20, 1})->Args({20, 0})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_CheegerSerial)->Arg(16)->Arg(20)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_CheegerParallel)->Args({16, 1})->Args({16, 0})->Args({20, 1})->Args({20, 0})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_VerifySerial)->Arg(128)->Arg(512)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_VerifyParallel)->Args({128, 1})->Args({128, 0})->Args({512, 1})->Args({512, 0})->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_EnumerateSerial)->Arg(8)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_EnumerateParallel)->Args({8, 1})->Args({8, 0})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_GhBoundsParallel)->Args({6, 1})->Args({6, 0})->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
