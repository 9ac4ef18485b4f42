#include <cmath>

#include "doctest.h"
#include "nilflow/randomseq.hpp"

using namespace nilflow;
using namespace nilflow::randomseq;

TEST_CASE("sigma specs validate their invariants") {
  CHECK_NOTHROW(SigmaSpec::power(Rational(1, 2)));
  CHECK_THROWS_AS(SigmaSpec::power(Rational(3, 2)), ConfigInvalid);
  // 1/n is the documented bad regime: rejected unless explicitly allowed
  CHECK_THROWS_AS(SigmaSpec::power(Rational(1)), ConfigInvalid);
  SigmaSpec bad;
  bad.form = SigmaSpec::Form::Power;
  bad.c = 1;
  bad.allow_bad_regime = true;
  CHECK_NOTHROW(bad.validate());
  // grammar certificate: n * sigma_n -> inf must hold symbolically
  CHECK_THROWS_AS(SigmaSpec::from_expr(hardy::parse_hardy("t^-1")), ConfigInvalid);
  CHECK_NOTHROW(SigmaSpec::from_expr(hardy::parse_hardy("t^-0.5")));
}

TEST_CASE("sample is deterministic and respects sigma == 1") {
  SigmaSpec all;
  all.form = SigmaSpec::Form::Table;
  all.table = {1.0};
  const auto s = sample(all, 42, 500);
  REQUIRE(s.kept.size() == 500);
  for (std::size_t i = 0; i < 500; ++i)
    CHECK(s.kept[i] == static_cast<std::int64_t>(i) + 1);

  const auto spec = SigmaSpec::power(Rational(1, 2));
  const auto a = sample(spec, 7, 20000);
  const auto b = sample(spec, 7, 20000);
  CHECK(a.kept == b.kept);
  const auto c = sample(spec, 8, 20000);
  CHECK(a.kept != c.kept);
  // strict monotonicity and count consistency
  for (std::size_t i = 1; i < a.kept.size(); ++i) CHECK(a.kept[i] > a.kept[i - 1]);
  std::int64_t recount = 0;
  for (auto v : a.kept)
    if (v <= 10000) ++recount;
  CHECK(recount == a.count_upto(10000));
}

TEST_CASE("weight matches direct summation and stays monotone") {
  SigmaSpec one;
  one.form = SigmaSpec::Form::Table;
  one.table = {1.0};
  CHECK(weight(one, 100) == doctest::Approx(100.0));

  const auto spec = SigmaSpec::power(Rational(1, 2));
  double direct = 0.0;
  for (int n = 1; n <= 10000; ++n) direct += 1.0 / std::sqrt(static_cast<double>(n));
  CHECK(weight(spec, 10000) == doctest::Approx(direct).epsilon(1e-8));
  CHECK(weight(spec, 10000) > weight(spec, 9999));
  // w(N)/log N grows for power specs
  CHECK(weight(spec, 1000000) / std::log(1e6) > weight(spec, 1000) / std::log(1e3));
}

TEST_CASE("growth of the kept set follows n^{1/(1-c)} up to the density constant") {
  // sigma_n = n^{-1/2}: w(N) ~ 2 sqrt(N), so a_n ~ (n/2)^2 = n^2/4
  const auto spec = SigmaSpec::power(Rational(1, 2));
  int within = 0;
  for (int s = 0; s < 6; ++s) {
    const auto smpl = sample(spec, 100 + static_cast<std::uint64_t>(s), 1200000);
    REQUIRE(smpl.kept.size() >= 2000);
    const double a2000 = static_cast<double>(smpl.kept[1999]);
    const double ratio = a2000 / (2000.0 * 2000.0 / 4.0);
    if (ratio > 0.8 && ratio < 1.2) ++within;
  }
  CHECK(within >= 5);
}

TEST_CASE("strong law: A(N)/w(N) concentrates near 1") {
  const auto spec = SigmaSpec::power(Rational(1, 2));
  const auto smpl = sample(spec, 11, 100000);
  const double ratio =
      static_cast<double>(smpl.count_upto(100000)) / weight(spec, 100000);
  CHECK(ratio > 0.85);
  CHECK(ratio < 1.15);
}

TEST_CASE("compare_averages: full sigma gives gap zero") {
  SigmaSpec all;
  all.form = SigmaSpec::Form::Table;
  all.table = {1.0};
  const unsigned bits = 160;
  const auto b = nilgroup::UnipotentElement::heisenberg(
      sqrt(real_from(2, bits)), sqrt(real_from(3, bits)), real_from(0, bits), bits);
  nilgroup::NilPoint x0{3, {real_from(0, bits), real_from(0, bits), real_from(0, bits)}};
  const auto F = equidist::character_function(equidist::HorizontalCharacter{{1, 0}}, 3);
  const auto smpl = sample(all, 3, 5000);
  equidist::OrbitOptions opt;
  opt.bits = bits;
  const auto r = compare_averages(smpl, b, x0, F, 5000, opt);
  CHECK(r.gap == doctest::Approx(0.0));
  CHECK(r.sparse_count == 5000);

  // constant test functions are gap-free for any sample
  const auto spec = SigmaSpec::power(Rational(1, 2));
  const auto sparse = sample(spec, 5, 5000);
  nilgroup::TestFunction one{
      "one", 0.0, [](std::span<const double>) { return std::complex<double>(1, 0); }};
  const auto r1 = compare_averages(sparse, b, x0, one, 5000, opt);
  CHECK(r1.gap == doctest::Approx(0.0));
}

TEST_CASE("sample serialization round-trips through the run-length bitmap") {
  const auto spec = SigmaSpec::power(Rational(1, 2));
  const auto s = sample(spec, 99, 50000);
  const std::string wire = serialize_sample(s, spec);
  const auto back = deserialize_sample(wire, &spec);
  CHECK(back.seed == s.seed);
  CHECK(back.n_max == s.n_max);
  CHECK(back.kept == s.kept);
  // wrong spec is rejected
  const auto other = SigmaSpec::power(Rational(1, 3));
  CHECK_THROWS_AS(deserialize_sample(wire, &other), ConfigInvalid);
  // dense sets (runs of kept integers) survive too
  SigmaSpec all;
  all.form = SigmaSpec::Form::Table;
  all.table = {1.0};
  const auto dense = sample(all, 1, 100);
  const auto dense_back = deserialize_sample(serialize_sample(dense, all), &all);
  CHECK(dense_back.kept == dense.kept);
}

TEST_CASE("moment estimate: zero coefficients give zero, constants obey the bound") {
  SigmaSpec half;
  half.form = SigmaSpec::Form::Table;
  half.table = {0.5};
  const auto z = moment_estimate(half, [](std::int64_t) { return 0.0; }, 2000, 100, 3);
  CHECK(z.value == doctest::Approx(0.0));
  const auto m = moment_estimate(half, [](std::int64_t) { return 1.0; }, 10000, 200, 3);
  CHECK(m.value <= 8.0 * m.reference);
  CHECK(m.bootstrap_error < m.value);
  // decreasing in N at fixed spec
  const auto m5 =
      moment_estimate(half, [](std::int64_t) { return 1.0; }, 100000, 200, 3);
  CHECK(m5.value < m.value);
}
