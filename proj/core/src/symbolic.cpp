#include "nilflow/symbolic.hpp"

#include <cctype>
#include <sstream>

namespace nilflow {

namespace {

Real sq(long n, unsigned bits) { return sqrt(real_from(n, bits)); }

Real v_sqrt2(unsigned b) { return sq(2, b); }
Real v_sqrt3(unsigned b) { return sq(3, b); }
Real v_sqrt5(unsigned b) { return sq(5, b); }
Real v_sqrt6(unsigned b) { return sq(6, b); }
Real v_sqrt7(unsigned b) { return sq(7, b); }
Real v_cbrt2(unsigned b) { return cbrt(real_from(2, b)); }
Real v_log2(unsigned b) { return log(real_from(2, b)); }
Real v_log3(unsigned b) { return log(real_from(3, b)); }
Real v_pi(unsigned b) {
  Real x = real_carrier(b);
  mpfr_const_pi(x.backend().data(), MPFR_RNDN);
  return x;
}
Real v_euler(unsigned b) { return exp(real_from(1, b)); }

}  // namespace

const std::vector<BasisSymbol>& basis_table() {
  static const std::vector<BasisSymbol> table = {
      {"sqrt2", v_sqrt2}, {"sqrt3", v_sqrt3}, {"sqrt5", v_sqrt5},
      {"sqrt6", v_sqrt6}, {"sqrt7", v_sqrt7}, {"cbrt2", v_cbrt2},
      {"log2", v_log2},   {"log3", v_log3},   {"pi", v_pi},
      {"euler", v_euler},
  };
  return table;
}

bool is_basis_symbol(const std::string& name) {
  for (const auto& s : basis_table())
    if (s.name == name) return true;
  return false;
}

Real basis_value(const std::string& name, unsigned bits) {
  for (const auto& s : basis_table())
    if (s.name == name) return s.value(bits);
  throw UndecidableInGrammar("unknown basis symbol: " + name);
}

SymbolicReal SymbolicReal::symbol(const std::string& name, Rational coeff) {
  if (!is_basis_symbol(name))
    throw UndecidableInGrammar("unknown basis symbol: " + name);
  SymbolicReal s;
  if (coeff != 0) s.irr_[name] = std::move(coeff);
  return s;
}

Real SymbolicReal::value(unsigned bits) const {
  const unsigned wb = bits + 16;
  Real acc = real_from(rational_, wb);
  for (const auto& [name, coeff] : irr_)
    acc += real_from(coeff, wb) * basis_value(name, wb);
  return acc;
}

void SymbolicReal::prune() {
  for (auto it = irr_.begin(); it != irr_.end();)
    it = (it->second == 0) ? irr_.erase(it) : std::next(it);
}

SymbolicReal SymbolicReal::operator+(const SymbolicReal& o) const {
  SymbolicReal r = *this;
  r.rational_ += o.rational_;
  for (const auto& [name, coeff] : o.irr_) r.irr_[name] += coeff;
  r.prune();
  return r;
}

SymbolicReal SymbolicReal::operator-(const SymbolicReal& o) const {
  return *this + (-o);
}

SymbolicReal SymbolicReal::operator-() const {
  SymbolicReal r = *this;
  r.rational_ = -r.rational_;
  for (auto& [name, coeff] : r.irr_) coeff = -coeff;
  return r;
}

SymbolicReal SymbolicReal::scaled(const Rational& q) const {
  SymbolicReal r = *this;
  r.rational_ *= q;
  for (auto& [name, coeff] : r.irr_) coeff *= q;
  r.prune();
  return r;
}

std::string SymbolicReal::to_string() const {
  std::ostringstream os;
  bool first = true;
  if (rational_ != 0 || irr_.empty()) {
    os << rational_;
    first = false;
  }
  for (const auto& [name, coeff] : irr_) {
    if (!first) os << (coeff >= 0 ? " + " : " - ");
    const Rational c = (!first && coeff < 0) ? Rational(-coeff) : coeff;
    if (c == 1)
      os << name;
    else
      os << c << "*" << name;
    first = false;
  }
  return os.str();
}

namespace {

// Coefficient vector over {1} + basis, in a fixed symbol order.
std::vector<Rational> coeff_vector(const SymbolicReal& x) {
  std::vector<Rational> v;
  v.push_back(x.rational_part());
  for (const auto& s : basis_table()) {
    auto it = x.irrational_part().find(s.name);
    v.push_back(it == x.irrational_part().end() ? Rational(0) : it->second);
  }
  return v;
}

}  // namespace

bool q_dependent(const SymbolicReal& x, const SymbolicReal& y) {
  if (x.is_zero() || y.is_zero()) return true;
  const auto vx = coeff_vector(x);
  const auto vy = coeff_vector(y);
  // parallel test: all 2x2 minors vanish
  for (std::size_t i = 0; i < vx.size(); ++i)
    for (std::size_t j = i + 1; j < vx.size(); ++j)
      if (vx[i] * vy[j] != vx[j] * vy[i]) return false;
  return true;
}

std::optional<Rational> rational_ratio(const SymbolicReal& x, const SymbolicReal& y) {
  if (x.is_zero()) return std::nullopt;
  if (!q_dependent(x, y)) return std::nullopt;
  const auto vx = coeff_vector(x);
  const auto vy = coeff_vector(y);
  for (std::size_t i = 0; i < vx.size(); ++i)
    if (vx[i] != 0) return vy[i] / vx[i];
  return std::nullopt;
}

namespace {

struct SymCursor {
  const std::string& s;
  std::size_t i = 0;
  void skip_ws() {
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
  }
  bool eat(char c) {
    skip_ws();
    if (i < s.size() && s[i] == c) {
      ++i;
      return true;
    }
    return false;
  }
  char peek() {
    skip_ws();
    return i < s.size() ? s[i] : '\0';
  }
};

Rational rational_from_decimal(const std::string& text) {
  // "1.25" -> 5/4, "3" -> 3, "3/4" -> 3/4
  auto slash = text.find('/');
  if (slash != std::string::npos) {
    const BigInt num(text.substr(0, slash));
    const BigInt den(text.substr(slash + 1));
    if (den == 0) throw ConfigInvalid("zero denominator: " + text);
    return Rational(num, den);
  }
  auto dot = text.find('.');
  if (dot == std::string::npos) return Rational(BigInt(text));
  std::string digits = text.substr(0, dot) + text.substr(dot + 1);
  const std::size_t fdigits = text.size() - dot - 1;
  BigInt den = 1;
  for (std::size_t k = 0; k < fdigits; ++k) den *= 10;
  return Rational(BigInt(digits), den);
}

std::string read_number(SymCursor& c) {
  c.skip_ws();
  std::string out;
  while (c.i < c.s.size() &&
         (std::isdigit(static_cast<unsigned char>(c.s[c.i])) || c.s[c.i] == '.'))
    out += c.s[c.i++];
  if (out.empty()) throw ConfigInvalid("expected number in: " + c.s);
  return out;
}

std::string read_ident(SymCursor& c) {
  c.skip_ws();
  std::string out;
  while (c.i < c.s.size() &&
         (std::isalnum(static_cast<unsigned char>(c.s[c.i])) || c.s[c.i] == '_'))
    out += c.s[c.i++];
  return out;
}

// atom := number | ident, optionally "/ number"
SymbolicReal parse_term(SymCursor& c) {
  c.skip_ws();
  SymbolicReal v;
  if (std::isdigit(static_cast<unsigned char>(c.peek()))) {
    Rational q = rational_from_decimal(read_number(c));
    if (c.eat('*')) {
      const std::string name = read_ident(c);
      if (name == "phi")
        v = SymbolicReal(Rational(1, 2)).scaled(q) +
            SymbolicReal::symbol("sqrt5", Rational(1, 2) * q);
      else
        v = SymbolicReal::symbol(name, q);
    } else {
      v = SymbolicReal(q);
    }
  } else {
    const std::string name = read_ident(c);
    if (name.empty()) throw ConfigInvalid("bad symbolic literal: " + c.s);
    if (name == "phi")
      v = SymbolicReal(Rational(1, 2)) + SymbolicReal::symbol("sqrt5", Rational(1, 2));
    else
      v = SymbolicReal::symbol(name);
  }
  if (c.eat('/')) {
    const Rational d = rational_from_decimal(read_number(c));
    if (d == 0) throw ConfigInvalid("division by zero in: " + c.s);
    v = v.scaled(1 / d);
  }
  return v;
}

}  // namespace

SymbolicReal parse_symbolic(const std::string& text) {
  SymCursor c{text};
  bool neg = c.eat('-');
  if (!neg) c.eat('+');
  SymbolicReal acc = parse_term(c);
  if (neg) acc = -acc;
  for (;;) {
    if (c.eat('+'))
      acc = acc + parse_term(c);
    else if (c.eat('-'))
      acc = acc - parse_term(c);
    else
      break;
  }
  c.skip_ws();
  if (c.i != text.size())
    throw ConfigInvalid("trailing characters in symbolic literal: " + text);
  return acc;
}

}  // namespace nilflow
