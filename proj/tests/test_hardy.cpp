#include <cmath>

#include "doctest.h"
#include "nilflow/hardy.hpp"
#include "nilflow/philox.hpp"

using namespace nilflow;
using namespace nilflow::hardy;

namespace {

double eval_d(const HardyExpr& a, double t, unsigned bits = 128) {
  return eval(a, real_from(t, bits), bits).value.convert_to<double>();
}

// random grammar expression over a small term pool
HardyExpr random_expr(std::uint64_t seed) {
  static const char* pool[] = {"t^1.5",      "t*log(t)",   "t^2",      "log(t)",
                               "t^sqrt3",    "sqrt2*t^2",  "t^(1/3)",  "(log(t))^2",
                               "t^2*log(t)", "3*t - t^0.5"};
  HardyExpr acc;
  const int k = 1 + static_cast<int>(Philox::u64(seed, 0) % 3);
  for (int i = 0; i < k; ++i) {
    const auto pick = Philox::u64(seed, static_cast<std::uint64_t>(i) + 1) % 10;
    acc = acc + parse_hardy(pool[pick]);
  }
  return acc;
}

}  // namespace

TEST_CASE("eval matches closed forms") {
  // t log t at t = e equals e
  const HardyExpr a = parse_hardy("t*log(t)");
  const Real e1 = exp(real_from(1, 192));
  const auto r = eval(a, e1, 192);
  CHECK(abs(r.value - e1).convert_to<double>() < 1e-40);
  // exact power
  CHECK(eval_d(parse_hardy("t^1.5"), 4.0) == doctest::Approx(8.0).epsilon(1e-12));
}

TEST_CASE("eval of t^sqrt3 matches an independent big-float oracle to 40 digits") {
  const HardyExpr a = parse_hardy("t^sqrt3");
  const Real t = real_from(1000000L, 256);
  const auto got = eval(a, t, 192);
  // independent route: exp(sqrt(3) * ln t) at higher precision
  const Real oracle = exp(sqrt(real_from(3, 320)) * log(real_from(1000000L, 320)));
  const Real rel = abs(got.value - oracle) / oracle;
  CHECK(rel.convert_to<double>() < 1e-40);
  CHECK(got.abs_error.convert_to<double>() >
        abs(got.value - oracle).convert_to<double>() / 16);
}

TEST_CASE("eval rejects bad inputs") {
  CHECK_THROWS(eval(parse_hardy("t"), real_from(1L, 128), 128));
  CHECK_THROWS(eval(parse_hardy("t"), real_from(10L, 128), 32));
}

TEST_CASE("derivative closed forms") {
  // d/dt (t log t) = log t + 1
  const HardyExpr d1 = derivative(parse_hardy("t*log(t)"), 1);
  CHECK(eval_d(d1, 100.0) == doctest::Approx(std::log(100.0) + 1).epsilon(1e-12));
  // second derivative is 1/t (the n^2/2N Taylor coefficient seen blockwise)
  const HardyExpr d2 = derivative(parse_hardy("t*log(t)"), 2);
  REQUIRE(d2.terms().size() == 1);
  CHECK(eval_d(d2, 50.0) == doctest::Approx(1.0 / 50).epsilon(1e-12));
  // (t^{3/2})'' = (3/4) t^{-1/2}
  const HardyExpr p2 = derivative(parse_hardy("t^1.5"), 2);
  const double t0 = 1e5;
  CHECK(eval_d(p2, t0) / (eval_d(parse_hardy("t^1.5"), t0) / (t0 * t0)) ==
        doctest::Approx(0.75).epsilon(1e-9));
  // derivative of order 0 is identity
  CHECK(derivative(parse_hardy("t^2"), 0).to_string() ==
        parse_hardy("t^2").to_string());
}

TEST_CASE("derivative closure: derivatives re-parse as grammar elements") {
  for (std::uint64_t s = 0; s < 100; ++s) {
    HardyExpr a = random_expr(s);
    for (unsigned o = 1; o <= 4; ++o) {
      const HardyExpr d = derivative(a, o);
      if (d.is_zero()) continue;
      const HardyExpr reparsed = parse_hardy(d.to_string());
      // same value at a test point
      const double t0 = 1234.5;
      CHECK(eval_d(reparsed, t0) == doctest::Approx(eval_d(d, t0)).epsilon(1e-10));
    }
  }
}

TEST_CASE("finite differences agree with symbolic derivatives") {
  for (std::uint64_t s = 0; s < 12; ++s) {
    const HardyExpr a = random_expr(s + 500);
    const HardyExpr da = derivative(a, 1);
    if (da.is_zero()) continue;
    for (double t0 : {1e3, 1e4, 1e5}) {
      const unsigned bits = 256;
      const Real t = real_from(t0, bits);
      const Real h = t * ldexp(real_from(1, bits), -27);  // ~t * 1e-8
      const Real num =
          (eval(a, t + h, bits).value - eval(a, t - h, bits).value) / (2 * h);
      const Real sym = eval(da, t, bits).value;
      if (sym == 0) continue;
      CHECK(abs(num / sym - 1).convert_to<double>() < 1e-6);
    }
  }
}

TEST_CASE("growth classification") {
  CHECK(classify_type(parse_hardy("t*log(t)")) == GrowthType{true, 1});
  CHECK(classify_type(parse_hardy("t^2")) == GrowthType{false, 2});
  CHECK(classify_type(parse_hardy("t^sqrt3")) == GrowthType{true, 1});
  CHECK(classify_type(parse_hardy("(log(t))^2")) == GrowthType{true, 0});
  CHECK(classify_type(parse_hardy("7")) == GrowthType{false, 0});
  CHECK_THROWS(classify_type(parse_hardy("t^-1")));
}

TEST_CASE("derivative growth ratios on the shipped corpus") {
  // for type k^+ and l <= k: a^(l)(t) ~ a(t)/t^l, ratio within [0.5, 2] at t >= 1e6
  const char* corpus[] = {"t*log(t)", "t^1.5", "t^1.2", "t^sqrt3",
                          "sqrt2*t^2 + sqrt3*t"};
  for (const char* txt : corpus) {
    const HardyExpr a = parse_hardy(txt);
    const GrowthType ty = classify_type(a);
    if (!ty.plus) continue;
    for (long l = 1; l <= ty.k; ++l) {
      const double t0 = 1e6;
      const double lhs = eval_d(derivative(a, static_cast<unsigned>(l)), t0, 256);
      const double rhs = eval_d(a, t0, 256) / std::pow(t0, static_cast<double>(l));
      const double ratio = lhs / rhs;
      CHECK(ratio > 0.5);
      CHECK(ratio < 2.0);
    }
  }
}

TEST_CASE("growth_compare orders by leading term") {
  CHECK(growth_compare(parse_hardy("t^1.5"), parse_hardy("t^2.5")) == Ordering::Less);
  CHECK(growth_compare(parse_hardy("t*log(t)"), parse_hardy("t")) ==
        Ordering::Greater);
  CHECK(growth_compare(parse_hardy("3*t^2"), parse_hardy("t^2")) ==
        Ordering::Similar);
  CHECK(growth_compare(parse_hardy("t^sqrt2"), parse_hardy("t^1.5")) ==
        Ordering::Less);
}

TEST_CASE("distance_class trichotomy") {
  using K = DistanceClass::Kind;
  CHECK(distance_class(parse_hardy("t^1.5")).kind == K::FarFromPolys);

  const auto conv = distance_class(parse_hardy("t^2 + t^-1"));
  CHECK(conv.kind == K::PolyPlusConvergent);
  REQUIRE(conv.p.size() == 3);
  CHECK(conv.p[2] == 1);
  CHECK(conv.c.sym().rational_part() == 1);
  CHECK(conv.d.sym().is_zero());

  const auto lin = distance_class(parse_hardy("t/2 + log(t)"));
  CHECK(lin.kind == K::NearLinearOverM);
  CHECK(lin.m == 2);

  // the complementary class: a = c p + O(log t), not pointwise good
  CHECK(distance_class(parse_hardy("log(t)")).kind == K::PolyPlusLogBounded);
  CHECK(distance_class(parse_hardy("t^2 + log(t)")).kind == K::PolyPlusLogBounded);
  CHECK(!pointwise_good(distance_class(parse_hardy("log(t)"))));

  // incommensurable polynomial parts stay far from c * Z[t]
  CHECK(distance_class(parse_hardy("sqrt2*t^2 + sqrt3*t")).kind == K::FarFromPolys);
  CHECK(distance_class(parse_hardy("sqrt2*t^2 + sqrt2*t + log(t)")).kind ==
        K::PolyPlusLogBounded);

  // L:basicequi example list is all far from polynomials
  for (const char* txt :
       {"t^sqrt3", "t*log(t)", "sqrt2*t^2 + t^0.5", "(log(t))^2"})
    CHECK(distance_class(parse_hardy(txt)).kind == K::FarFromPolys);
}

TEST_CASE("distance_class is total and deterministic on a corpus") {
  for (std::uint64_t s = 0; s < 60; ++s) {
    const HardyExpr a = random_expr(s + 900);
    if (a.is_zero()) continue;
    const auto k1 = distance_class(a).kind;
    const auto k2 = distance_class(a).kind;
    CHECK(k1 == k2);
  }
}

TEST_CASE("stirling rewrite of log(n!) tracks lgamma") {
  const HardyExpr lf = parse_hardy("logfact(t)");
  for (long n : {10L, 100L, 5000L}) {
    Real t = real_from(n, 256);
    Real truth = lgamma(t + 1);
    const auto got = eval(lf, t, 192);
    CHECK(abs(got.value - truth).convert_to<double>() <= 1.0 / (12.0 * n) + 1e-30);
    CHECK(got.abs_error.convert_to<double>() >=
          abs(got.value - truth).convert_to<double>() * 0.9);
  }
  // powers stay in the grammar with a propagated envelope
  const HardyExpr lf2 = parse_hardy("logfact(t)^2");
  Real t = real_from(1000L, 256);
  Real truth = lgamma(t + 1) * lgamma(t + 1);
  const auto got = eval(lf2, t, 192);
  CHECK(abs(got.value - truth) < got.abs_error);
}

TEST_CASE("floor_eval decides exact and irrational cases") {
  CHECK(floor_eval(parse_hardy("t^1.5"), 10000, 150) == BigInt(1000000));
  CHECK(floor_eval(parse_hardy("t^1.5"), 2, 150) == BigInt(2));  // 2.828 -> 2
  const BigInt v = floor_eval(parse_hardy("sqrt2*t^2"), 1000, 150);
  CHECK(v == BigInt("1414213"));
}

TEST_CASE("exponent comparisons detect declared ties") {
  const Exponent a = Exponent::irrational("sqrt3", sqrt(real_from(3, 256)));
  const Exponent b = Exponent::irrational("sqrt3", sqrt(real_from(3, 256)));
  CHECK(Exponent::compare(a, b) == 0);
  CHECK(Exponent::compare(a.plus(Rational(-1)), b) < 0);
  const Exponent c = Exponent::irrational("almost",
                                          sqrt(real_from(3, 256)) +
                                              ldexp(real_from(1, 256), -220));
  CHECK_THROWS_AS(Exponent::compare(a, c), UndecidableInGrammar);
}
