#include <benchmark/benchmark.h>

#include <cmath>
#include <random>
#include <vector>

#include "ergode/kernels.hpp"
#include "ergode/measures.hpp"
#include "ergode/systems.hpp"

using namespace ergode;

namespace {

std::vector<double> random_values(std::size_t n) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> v(n);
  for (auto& x : v) x = u(rng);
  return v;
}

// golden-mean words with frequency of 0 in [0.55, 0.65]
template <bool Parallel>
void BM_CountWords(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  int k = 2;
  benchmark::DoNotOptimize(k);  // as in the library, the alphabet is a runtime value
  const std::vector<std::uint8_t> adj = {1, 1, 1, 0};
  auto pred = [n](std::span<const Symbol> w) {
    int zeros = 0;
    for (auto a : w) zeros += a == 0;
    return zeros >= 0.55 * n && zeros <= 0.65 * n;
  };
  for (auto _ : state) {
    const auto c = Parallel ? kernels::count_words_parallel(k, n, adj, pred) : kernels::count_words_serial(k, n, adj, pred);
    benchmark::DoNotOptimize(c);
  }
  state.SetItemsProcessed(state.iterations() * (std::int64_t{1} << n));
}

template <bool Parallel>
void BM_WordEntropy(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  int k = 2;
  benchmark::DoNotOptimize(k);
  const Measure mu = Measure::markov({{0.9, 0.1}, {0.2, 0.8}});
  auto mass = [&](std::span<const Symbol> w) { return cylinder_mass(mu, w); };
  for (auto _ : state) {
    const double h = Parallel ? kernels::word_entropy_parallel(k, n, mass) : kernels::word_entropy_serial(k, n, mass);
    benchmark::DoNotOptimize(h);
  }
  state.SetItemsProcessed(state.iterations() * (std::int64_t{1} << n));
}

template <bool Parallel>
void BM_BirkhoffSum(benchmark::State& state) {
  const auto v = random_values(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    const double s = Parallel ? kernels::birkhoff_sum_parallel(v) : kernels::birkhoff_sum_serial(v);
    benchmark::DoNotOptimize(s);
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

template <bool Parallel>
void BM_LogCaratheodory(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto lc = random_values(n);
  auto depth = random_values(n);
  for (auto& d : depth) d = 1 + 100 * d;
  for (auto _ : state) {
    const double s = Parallel ? kernels::log_caratheodory_parallel(lc, depth, 0.5) : kernels::log_caratheodory_serial(lc, depth, 0.5);
    benchmark::DoNotOptimize(s);
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

}  // namespace

BENCHMARK(BM_CountWords<false>)->Name("count_words/serial")->Arg(16)->Arg(20);
BENCHMARK(BM_CountWords<true>)->Name("count_words/parallel")->Arg(16)->Arg(20);
BENCHMARK(BM_WordEntropy<false>)->Name("word_entropy/serial")->Arg(12)->Arg(16);
BENCHMARK(BM_WordEntropy<true>)->Name("word_entropy/parallel")->Arg(12)->Arg(16);
BENCHMARK(BM_BirkhoffSum<false>)->Name("birkhoff_sum/serial")->Arg(1 << 16)->Arg(1 << 22);
BENCHMARK(BM_BirkhoffSum<true>)->Name("birkhoff_sum/parallel")->Arg(1 << 16)->Arg(1 << 22);
BENCHMARK(BM_LogCaratheodory<false>)->Name("log_caratheodory/serial")->Arg(1 << 12)->Arg(1 << 18);
BENCHMARK(BM_LogCaratheodory<true>)->Name("log_caratheodory/parallel")->Arg(1 << 12)->Arg(1 << 18);

BENCHMARK_MAIN();
