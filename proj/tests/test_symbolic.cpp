#include "doctest.h"
#include "nilflow/symbolic.hpp"

using namespace nilflow;

TEST_CASE("parse and evaluate symbolic reals") {
  const SymbolicReal a = parse_symbolic("sqrt2");
  CHECK(a.value(128).convert_to<double>() == doctest::Approx(std::sqrt(2.0)));
  const SymbolicReal b = parse_symbolic("1/2 + sqrt5/2");
  const SymbolicReal phi = parse_symbolic("phi");
  CHECK(b == phi);
  CHECK(phi.value(128).convert_to<double>() ==
        doctest::Approx((1 + std::sqrt(5.0)) / 2));
  const SymbolicReal c = parse_symbolic("-3/4");
  CHECK(c.rational_part() == Rational(-3, 4));
  CHECK(c.is_rational());
  const SymbolicReal d = parse_symbolic("2*sqrt3 - sqrt2");
  CHECK(d.value(128).convert_to<double>() ==
        doctest::Approx(2 * std::sqrt(3.0) - std::sqrt(2.0)));
  CHECK(parse_symbolic("1.25").rational_part() == Rational(5, 4));
}

TEST_CASE("q_dependent decides exactly") {
  const SymbolicReal s2 = parse_symbolic("sqrt2");
  const SymbolicReal s3 = parse_symbolic("sqrt3");
  CHECK(!q_dependent(s2, s3));
  CHECK(q_dependent(s2, parse_symbolic("3*sqrt2/5")));
  CHECK(q_dependent(parse_symbolic("1/3"), parse_symbolic("7")));
  // zero is dependent with everything
  CHECK(q_dependent(SymbolicReal(), s2));
  // 1 + sqrt2 vs sqrt2: not parallel (rational coordinates differ)
  CHECK(!q_dependent(parse_symbolic("1 + sqrt2"), s2));
}

TEST_CASE("rational_ratio extracts the exact multiplier") {
  const SymbolicReal x = parse_symbolic("2*sqrt3 + 1/2");
  const SymbolicReal y = parse_symbolic("3*sqrt3 + 3/4");
  const auto r = rational_ratio(x, y);
  REQUIRE(r.has_value());
  CHECK(*r == Rational(3, 2));
  CHECK(!rational_ratio(x, parse_symbolic("sqrt2")).has_value());
}

TEST_CASE("unknown symbols are rejected") {
  CHECK_THROWS_AS(parse_symbolic("sqrt11"), UndecidableInGrammar);
}
