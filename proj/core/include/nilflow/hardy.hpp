#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "nilflow/symbolic.hpp"

namespace nilflow::hardy {

// Growth exponent rational + scale*(declared irrational). The irrational part
// is a 256-bit value plus a provenance tag; two exponents with the same tag
// compare exactly through their rational parts, everything else falls back to
// a 2^-200 decision window.
class Exponent {
 public:
  Exponent() : rat_(0) {}
  explicit Exponent(Rational r) : rat_(std::move(r)) {}
  explicit Exponent(long v) : rat_(v) {}
  static Exponent irrational(const std::string& tag, Real value256,
                             Rational scale = Rational(1),
                             Rational offset = Rational(0));

  bool is_rational() const { return scale_ == 0; }
  bool is_integer() const { return is_rational() && denominator(rat_) == 1; }
  const Rational& rational_part() const { return rat_; }

  Real value(unsigned bits) const;
  long floor_value() const;  // throws UndecidableInGrammar within 2^-200 of an integer

  Exponent plus(const Rational& q) const;
  Exponent plus(const Exponent& o) const;  // exact only when tags match or one side rational
  Exponent scaled(const Rational& q) const;

  // -1 / 0 / +1; throws UndecidableInGrammar on an unresolvable tie.
  static int compare(const Exponent& a, const Exponent& b);

  std::string to_string() const;

 private:
  Rational rat_;
  Rational scale_{0};
  std::string tag_;
  Real irr_;  // value of the tagged irrational itself, 256 bits
};

// Term coefficient: exact symbolic, or a declared-independent numeric carried
// at 256 bits (floats enter only through the assume-independent path, and
// products of two irrational symbolics drop to numeric).
class Coeff {
 public:
  Coeff() : v_(SymbolicReal()) {}
  explicit Coeff(SymbolicReal s) : v_(std::move(s)) {}
  explicit Coeff(Rational q) : v_(SymbolicReal(std::move(q))) {}
  static Coeff numeric(Real v256);

  bool is_exact() const { return std::holds_alternative<SymbolicReal>(v_); }
  bool is_zero() const;
  const SymbolicReal& sym() const { return std::get<SymbolicReal>(v_); }

  Real value(unsigned bits) const;
  Coeff operator+(const Coeff& o) const;
  Coeff operator-() const;
  Coeff scaled(const Rational& q) const;
  Coeff times(const Coeff& o) const;
  Coeff times_exponent(const Exponent& g) const;

  std::string to_string() const;

 private:
  std::variant<SymbolicReal, Real> v_;
};

struct Term {
  Coeff coeff;
  Exponent gamma;       // exponent of t
  unsigned logpow = 0;  // exponent of log t
};

// Finite sum of c * t^gamma * (log t)^e, kept sorted by decreasing growth
// order (gamma, e), no duplicate keys, no zero coefficients. Closed under
// d/dt, + and *. An optional tail envelope (all-positive expression) bounds
// the absolute error against the represented function; only the Stirling
// rewrite of log(n!) produces one.
class HardyExpr {
 public:
  HardyExpr() = default;
  explicit HardyExpr(std::vector<Term> terms) { assign(std::move(terms)); }

  const std::vector<Term>& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }
  const std::vector<Term>& tail() const { return tail_; }
  void set_tail(std::vector<Term> tail);

  HardyExpr operator+(const HardyExpr& o) const;
  HardyExpr operator-(const HardyExpr& o) const;
  HardyExpr operator*(const HardyExpr& o) const;
  HardyExpr scaled(const Rational& q) const;
  HardyExpr powi(unsigned k) const;

  std::string to_string() const;

 private:
  std::vector<Term> terms_;
  std::vector<Term> tail_;
  void assign(std::vector<Term> terms);
};

struct GrowthType {
  bool plus = false;  // Type(k) vs TypePlus(k)
  long k = 0;
  bool operator==(const GrowthType&) const = default;
};

// Trichotomy of pointwise-good Hardy sequences, plus the complementary class
// the grammar also contains (a = c*p + O(log t), not convergent, p not t/m):
// those sequences are exactly the ones with no limiting distribution.
struct DistanceClass {
  enum class Kind { FarFromPolys, PolyPlusConvergent, NearLinearOverM, PolyPlusLogBounded };
  Kind kind = Kind::FarFromPolys;
  Coeff c;                  // PolyPlusConvergent / PolyPlusLogBounded
  std::vector<BigInt> p;    // integer polynomial, ascending, primitive
  Coeff d;                  // limit, PolyPlusConvergent
  long m = 0;               // NearLinearOverM
};

bool pointwise_good(const DistanceClass& dc);

enum class Ordering { Less, Similar, Greater };

struct EvalResult {
  Real value;
  Real abs_error;  // conservative bound, includes any tail envelope
};

// a(t) at t >= 2 with the requested precision (>= 64 bits).
EvalResult eval(const HardyExpr& a, const Real& t, unsigned bits);

// Exact symbolic derivative; order 0 returns a.
HardyExpr derivative(const HardyExpr& a, unsigned order = 1);

GrowthType classify_type(const HardyExpr& a);

DistanceClass distance_class(const HardyExpr& a);

Ordering growth_compare(const HardyExpr& a, const HardyExpr& b);

// floor(a(n)) decided at escalating precision (factor 2, at most 4 times).
BigInt floor_eval(const HardyExpr& a, long n, unsigned bits);

// Expression text: "t^1.5", "t*log(t)", "sqrt2*t^2 + sqrt3*t", "logfact(t)^2".
HardyExpr parse_hardy(const std::string& text);

}  // namespace nilflow::hardy
