#include "nilflow/real.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <thread>

namespace nilflow {

Real frac(const Real& x) {
  Real f = x - floor(x);
  if (f < 0) f += 1;    // guard against directed-rounding edge at exact integers
  if (f >= 1) f -= 1;
  return f;
}

Real dist_to_int(const Real& x) {
  Real f = frac(x);
  Real g = 1 - f;
  return f <= g ? f : g;
}

std::complex<double> unit_e(const Real& x) {
  const double f = frac(x).convert_to<double>();
  return unit_e(f);
}

std::complex<double> unit_e(double x) {
  const double a = 2.0 * 3.14159265358979323846 * (x - std::floor(x));
  return {std::cos(a), std::sin(a)};
}

std::string real_to_decimal(const Real& x) {
  // ceil(bits * log10(2)) + 2 digits suffice for an exact round-trip at the
  // same precision.
  const long digits = static_cast<long>(std::ceil(bits_of(x) * 0.30103)) + 2;
  mpfr_exp_t exp = 0;
  char* s = mpfr_get_str(nullptr, &exp, 10, static_cast<size_t>(digits),
                         x.backend().data(), MPFR_RNDN);
  if (s == nullptr) throw Error("mpfr_get_str failed");
  std::string mant(s);
  mpfr_free_str(s);
  if (mant == "@NaN@" || mant == "@Inf@" || mant == "-@Inf@") return mant;
  std::string sign;
  if (!mant.empty() && mant[0] == '-') {
    sign = "-";
    mant = mant.substr(1);
  }
  while (mant.size() > 1 && mant.back() == '0') mant.pop_back();
  return sign + "0." + mant + "e" + std::to_string(static_cast<long>(exp));
}

namespace {

template <class T>
T pairwise_impl(std::span<const T> v) {
  if (v.size() <= 16) {
    T acc{};
    for (const T& x : v) acc += x;
    return acc;
  }
  const std::size_t half = v.size() / 2;
  return pairwise_impl(v.first(half)) + pairwise_impl(v.subspan(half));
}

}  // namespace

double pairwise_sum(std::span<const double> v) { return pairwise_impl(v); }

std::complex<double> pairwise_sum(std::span<const std::complex<double>> v) {
  return pairwise_impl(v);
}

void parallel_for(std::size_t n, unsigned threads,
                  const std::function<void(std::size_t)>& fn) {
  if (threads <= 1 || n < 2048) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  const std::size_t chunk = 1024;  // fixed grid, independent of thread count
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (;;) {
      const std::size_t c = next.fetch_add(1);
      const std::size_t lo = c * chunk;
      if (lo >= n) return;
      const std::size_t hi = std::min(n, lo + chunk);
      for (std::size_t i = lo; i < hi; ++i) fn(i);
    }
  };
  std::vector<std::thread> pool;
  const unsigned k = std::min<unsigned>(threads, std::thread::hardware_concurrency());
  for (unsigned t = 1; t < std::max(1u, k); ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
}

}  // namespace nilflow
