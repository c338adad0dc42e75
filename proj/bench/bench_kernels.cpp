#include <benchmark/benchmark.h>

#include "ovmkit/kernels.hpp"
#include "ovmkit/lyapunov.hpp"
#include "ovmkit/models.hpp"
#include "ovmkit/rng.hpp"

using namespace ovmkit;

namespace {

std::vector<HermitianMatrix> masses(std::size_t d, std::size_t m) {
  Rng rng(1);
  return models::random_grid_povm(rng, d, m).cell_masses();
}

std::vector<ComplexMatrix> values(std::size_t d, std::size_t m) {
  Rng rng(2);
  std::vector<ComplexMatrix> v;
  for (std::size_t k = 0; k < m; ++k) v.push_back(models::random_complex(rng, d));
  return v;
}

template <auto Fn>
void roots(benchmark::State& st) {
  const auto ms = masses(static_cast<std::size_t>(st.range(0)), static_cast<std::size_t>(st.range(1)));
  for (auto _ : st) benchmark::DoNotOptimize(Fn(ms));
}

template <auto Fn>
void conjugated(benchmark::State& st) {
  const std::size_t d = static_cast<std::size_t>(st.range(0));
  const std::size_t m = static_cast<std::size_t>(st.range(1));
  const auto r = kernels::serial::psd_roots(masses(d, m));
  const auto v = values(d, m);
  for (auto _ : st) benchmark::DoNotOptimize(Fn(r, v));
}

template <auto Fn>
void nearest(benchmark::State& st) {
  const std::size_t m = static_cast<std::size_t>(st.range(0));
  const OVM u = models::uhl(m);
  const HermitianMatrix half = 0.5 * u.total();
  for (auto _ : st) benchmark::DoNotOptimize(Fn(u.cell_masses(), half));
}

template <auto Fn>
void certificate(benchmark::State& st) {
  Rng rng(7);
  const OVM nu = models::random_grid_povm(rng, 2, static_cast<std::size_t>(st.range(0)));
  for (auto _ : st) benchmark::DoNotOptimize(Fn(nu, 20, 7));
}

}  // namespace

BENCHMARK(roots<kernels::serial::psd_roots>)->Name("psd_roots/serial")->Args({4, 256})->Args({8, 1024});
BENCHMARK(roots<kernels::omp::psd_roots>)->Name("psd_roots/omp")->Args({4, 256})->Args({8, 1024});
BENCHMARK(conjugated<kernels::serial::conjugated_sum>)->Name("conjugated_sum/serial")->Args({4, 256})->Args({8, 1024});
BENCHMARK(conjugated<kernels::omp::conjugated_sum>)->Name("conjugated_sum/omp")->Args({4, 256})->Args({8, 1024});
BENCHMARK(nearest<kernels::serial::nearest_subset>)->Name("nearest_subset/serial")->Arg(10)->Arg(14);
BENCHMARK(nearest<kernels::omp::nearest_subset>)->Name("nearest_subset/omp")->Arg(10)->Arg(14);
BENCHMARK(certificate<convexity_certificate_serial>)->Name("convexity_certificate/serial")->Arg(40);
BENCHMARK(certificate<convexity_certificate>)->Name("convexity_certificate/omp")->Arg(40);

BENCHMARK_MAIN();
