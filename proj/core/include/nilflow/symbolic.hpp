#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "nilflow/real.hpp"

namespace nilflow {

// Declared irrational basis. Every registered symbol, together with 1, is
// declared Q-linearly independent of the others; that declaration is the
// axiom all exact rationality decisions rest on. The shipped table only
// contains symbols for which the declaration is a theorem (square-free
// radicals, cube roots, logs of multiplicatively independent integers) or the
// standard transcendence assumption (pi, e vs the rest).
struct BasisSymbol {
  std::string name;
  Real (*value)(unsigned bits);
};

const std::vector<BasisSymbol>& basis_table();
bool is_basis_symbol(const std::string& name);
Real basis_value(const std::string& name, unsigned bits);

// Exact real of the form  rational + sum(coeff_s * s)  over basis symbols.
class SymbolicReal {
 public:
  SymbolicReal() = default;
  explicit SymbolicReal(Rational r) : rational_(std::move(r)) {}
  explicit SymbolicReal(long v) : rational_(v) {}

  static SymbolicReal symbol(const std::string& name, Rational coeff = Rational(1));

  const Rational& rational_part() const { return rational_; }
  const std::map<std::string, Rational>& irrational_part() const { return irr_; }

  bool is_zero() const { return rational_ == 0 && irr_.empty(); }
  bool is_rational() const { return irr_.empty(); }

  Real value(unsigned bits) const;

  SymbolicReal operator+(const SymbolicReal& o) const;
  SymbolicReal operator-(const SymbolicReal& o) const;
  SymbolicReal operator-() const;
  SymbolicReal scaled(const Rational& q) const;

  bool operator==(const SymbolicReal& o) const {
    return rational_ == o.rational_ && irr_ == o.irr_;
  }

  std::string to_string() const;

 private:
  Rational rational_;
  std::map<std::string, Rational> irr_;  // no zero coefficients kept
  void prune();
};

// True iff p*x + q*y = 0 for some rationals (p,q) != (0,0); decided exactly
// from the coefficient vectors over {1} and the basis.
bool q_dependent(const SymbolicReal& x, const SymbolicReal& y);

// r with y = r*x, when x != 0 and such a rational r exists.
std::optional<Rational> rational_ratio(const SymbolicReal& x, const SymbolicReal& y);

// Parses "sqrt2", "-3/4", "1.25", "sqrt2/2", "1/2 + sqrt5/2", "phi", ...
SymbolicReal parse_symbolic(const std::string& text);

}  // namespace nilflow
