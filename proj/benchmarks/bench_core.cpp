#include <benchmark/benchmark.h>

#include "nilflow/blocks.hpp"
#include "nilflow/equidist.hpp"
#include "nilflow/hardy.hpp"
#include "nilflow/nilgroup.hpp"
#include "nilflow/philox.hpp"

using namespace nilflow;

namespace {

nilgroup::UnipotentElement heis_b(unsigned bits) {
  return nilgroup::UnipotentElement::heisenberg(sqrt(real_from(2, bits)),
                                                sqrt(real_from(3, bits)),
                                                real_from(0, bits), bits);
}

void BM_hardy_eval(benchmark::State& state) {
  const auto a = hardy::parse_hardy("t^1.5");
  const unsigned bits = static_cast<unsigned>(state.range(0));
  long n = 2;
  for (auto _ : state) {
    benchmark::DoNotOptimize(hardy::eval(a, real_from(n, bits), bits).value);
    n = n % 100000 + 2;
  }
}
BENCHMARK(BM_hardy_eval)->Arg(128)->Arg(192)->Arg(256);

void BM_floor_eval(benchmark::State& state) {
  const auto a = hardy::parse_hardy("t^1.5");
  long n = 2;
  for (auto _ : state) {
    benchmark::DoNotOptimize(hardy::floor_eval(a, n, 160));
    n = n % 100000 + 2;
  }
}
BENCHMARK(BM_floor_eval);

void BM_orbit_step(benchmark::State& state) {
  const unsigned bits = 160;
  const auto b = heis_b(bits);
  const auto poly = nilgroup::pow_poly(b);
  std::int64_t m = 3;
  for (auto _ : state) {
    const auto g = poly.eval_int(BigInt(m));
    benchmark::DoNotOptimize(nilgroup::reduce(g).point.coords);
    m = (m * 1103515245 + 12345) % 31622776;
    if (m < 0) m = -m;
  }
}
BENCHMARK(BM_orbit_step);

void BM_pow_real(benchmark::State& state) {
  const unsigned bits = 192;
  const auto b = heis_b(bits);
  const Real s = sqrt(real_from(5, bits));
  for (auto _ : state) benchmark::DoNotOptimize(nilgroup::pow_real(b, s));
}
BENCHMARK(BM_pow_real);

void BM_star_discrepancy(benchmark::State& state) {
  const std::size_t n = static_cast<std::size_t>(state.range(0));
  std::vector<double> base(n);
  for (std::size_t i = 0; i < n; ++i) base[i] = Philox::u01(7, i);
  for (auto _ : state) {
    std::vector<double> xs = base;
    benchmark::DoNotOptimize(equidist::star_discrepancy_1d(std::move(xs)));
  }
}
BENCHMARK(BM_star_discrepancy)->Arg(1000)->Arg(100000);

void BM_weyl_sum(benchmark::State& state) {
  equidist::TorusPoints pts;
  pts.dim = 1;
  const std::size_t n = 100000;
  pts.flat.resize(n);
  for (std::size_t i = 0; i < n; ++i) pts.flat[i] = Philox::u01(11, i);
  const long kappa[1] = {3};
  for (auto _ : state) benchmark::DoNotOptimize(equidist::weyl_sum(pts, kappa));
}
BENCHMARK(BM_weyl_sum);

void BM_block_pipeline(benchmark::State& state) {
  const auto a = hardy::parse_hardy("t*log(t)");
  for (auto _ : state)
    benchmark::DoNotOptimize(blocks::block_pipeline(a, 1, 5000, 2, 160, 5));
}
BENCHMARK(BM_block_pipeline);

void BM_philox(benchmark::State& state) {
  std::uint64_t i = 0;
  for (auto _ : state) benchmark::DoNotOptimize(Philox::u01(42, ++i));
}
BENCHMARK(BM_philox);

}  // namespace

BENCHMARK_MAIN();
