#include "doctest.h"
#include "nilflow/real.hpp"

using namespace nilflow;

TEST_CASE("frac and dist_to_int at high precision") {
  Real x = real_from("123456789.75", 192);
  CHECK(frac(x).convert_to<double>() == doctest::Approx(0.75));
  CHECK(dist_to_int(x).convert_to<double>() == doctest::Approx(0.25));
  Real neg = real_from("-2.25", 192);
  CHECK(frac(neg).convert_to<double>() == doctest::Approx(0.75));
  CHECK(frac(real_from(5L, 64)) == 0);
}

TEST_CASE("unit_e reduces huge arguments before trig") {
  // e(2^80 * sqrt(2)): fractional part needs ~80 extra bits
  Real big = ldexp(sqrt(real_from(2, 200)), 80);
  const auto z = unit_e(big);
  const double f = frac(big).convert_to<double>();
  CHECK(std::abs(z - unit_e(f)) < 1e-14);
  CHECK(std::abs(std::abs(z) - 1.0) < 1e-14);
}

TEST_CASE("decimal serialization round-trips bit-exactly") {
  for (unsigned bits : {64u, 150u, 192u, 256u}) {
    Real x = sqrt(real_from(7, bits)) / 3;
    const std::string s = real_to_decimal(x);
    Real back = real_from(s, static_cast<unsigned>(bits_of(x)));
    CHECK(back == x);
  }
}

TEST_CASE("pairwise sum is order-deterministic and accurate") {
  std::vector<double> v(100001);
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = 1.0 / (1.0 + static_cast<double>(i));
  const double a = pairwise_sum(std::span<const double>(v));
  const double b = pairwise_sum(std::span<const double>(v));
  CHECK(a == b);
  long double ref = 0;
  for (double x : v) ref += x;
  CHECK(std::abs(a - static_cast<double>(ref)) < 1e-9);
}
