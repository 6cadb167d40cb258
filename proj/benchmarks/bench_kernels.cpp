#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "bcpo/kernels.hpp"

using namespace bcpo::nd;

namespace {

std::vector<double> random_vec(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> d;
  std::vector<double> v(n);
  for (auto& x : v) x = d(rng);
  return v;
}

void bench_matmul_serial(benchmark::State& state) {
  const long n = state.range(0);
  const auto A = random_vec(static_cast<std::size_t>(n * n), 1);
  const auto B = random_vec(static_cast<std::size_t>(n * n), 2);
  std::vector<double> C(static_cast<std::size_t>(n * n));
  for (auto _ : state) {
    kern::serial::matmul(A.data(), B.data(), C.data(), n, n, n);
    benchmark::ClobberMemory();
  }
  state.SetItemsProcessed(state.iterations() * 2 * n * n * n);
}

void bench_matmul_parallel(benchmark::State& state) {
  const long n = state.range(0);
  const auto A = random_vec(static_cast<std::size_t>(n * n), 1);
  const auto B = random_vec(static_cast<std::size_t>(n * n), 2);
  std::vector<double> C(static_cast<std::size_t>(n * n));
  for (auto _ : state) {
    kern::par::matmul(A.data(), B.data(), C.data(), n, n, n);
    benchmark::ClobberMemory();
  }
  state.SetItemsProcessed(state.iterations() * 2 * n * n * n);
}

void bench_xlogx_serial(benchmark::State& state) {
  const long n = state.range(0);
  auto x = random_vec(static_cast<std::size_t>(n), 3);
  for (auto& v : x) v = v * v + 1e-9;
  for (auto _ : state) benchmark::DoNotOptimize(kern::serial::xlogx_sum(x.data(), n));
  state.SetItemsProcessed(state.iterations() * n);
}

void bench_xlogx_parallel(benchmark::State& state) {
  const long n = state.range(0);
  auto x = random_vec(static_cast<std::size_t>(n), 3);
  for (auto& v : x) v = v * v + 1e-9;
  for (auto _ : state) benchmark::DoNotOptimize(kern::par::xlogx_sum(x.data(), n));
  state.SetItemsProcessed(state.iterations() * n);
}

}  // namespace

BENCHMARK(bench_matmul_serial)->Arg(64)->Arg(256)->Arg(512);
BENCHMARK(bench_matmul_parallel)->Arg(64)->Arg(256)->Arg(512);
BENCHMARK(bench_xlogx_serial)->Arg(1 << 20);
BENCHMARK(bench_xlogx_parallel)->Arg(1 << 20);

BENCHMARK_MAIN();
