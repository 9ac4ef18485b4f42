#include <cctype>

#include "nilflow/hardy.hpp"

namespace nilflow::hardy {

namespace {

struct Cursor {
  const std::string& s;
  std::size_t i = 0;
  void ws() {
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
  }
  bool eat(char c) {
    ws();
    if (i < s.size() && s[i] == c) {
      ++i;
      return true;
    }
    return false;
  }
  bool eat(const std::string& word) {
    ws();
    if (s.compare(i, word.size(), word) == 0) {
      const std::size_t j = i + word.size();
      const bool boundary =
          j >= s.size() || !(std::isalnum(static_cast<unsigned char>(s[j])) || s[j] == '_');
      if (boundary) {
        i = j;
        return true;
      }
    }
    return false;
  }
  char peek() {
    ws();
    return i < s.size() ? s[i] : '\0';
  }
  [[noreturn]] void fail(const std::string& what) const {
    throw ConfigInvalid("parse error in \"" + s + "\" at offset " +
                        std::to_string(i) + ": " + what);
  }
};

Rational decimal_rational(Cursor& c) {
  c.ws();
  std::string digits;
  while (c.i < c.s.size() && (std::isdigit(static_cast<unsigned char>(c.s[c.i])) ||
                              c.s[c.i] == '.'))
    digits += c.s[c.i++];
  if (digits.empty()) c.fail("expected a number");
  auto dot = digits.find('.');
  if (dot == std::string::npos) return Rational(BigInt(digits));
  const std::string whole = digits.substr(0, dot), fracpart = digits.substr(dot + 1);
  BigInt den = 1;
  for (std::size_t k = 0; k < fracpart.size(); ++k) den *= 10;
  return Rational(BigInt(whole.empty() ? "0" : whole) * den + BigInt(fracpart.empty() ? "0" : fracpart), den);
}

std::string read_ident(Cursor& c) {
  c.ws();
  std::string out;
  while (c.i < c.s.size() && (std::isalnum(static_cast<unsigned char>(c.s[c.i])) ||
                              c.s[c.i] == '_'))
    out += c.s[c.i++];
  return out;
}

HardyExpr constant_expr(Coeff c) {
  return HardyExpr(std::vector<Term>{Term{std::move(c), Exponent(0), 0}});
}

HardyExpr monomial(Coeff c, Exponent g, unsigned e) {
  return HardyExpr(std::vector<Term>{Term{std::move(c), std::move(g), e}});
}

// log(n!) via Stirling: n log n - n + (1/2) log n + log sqrt(2 pi), with the
// dropped tail carried as the envelope 1/(12 t).
HardyExpr logfact_expr() {
  std::vector<Term> ts;
  ts.push_back(Term{Coeff(Rational(1)), Exponent(1), 1});
  ts.push_back(Term{Coeff(Rational(-1)), Exponent(1), 0});
  ts.push_back(Term{Coeff(Rational(1, 2)), Exponent(0), 1});
  Real two_pi = real_from(2, 256) * basis_value("pi", 256);
  ts.push_back(Term{Coeff::numeric(log(two_pi) / 2), Exponent(0), 0});
  HardyExpr e{std::move(ts)};
  e.set_tail({Term{Coeff(Rational(1, 12)), Exponent(-1), 0}});
  return e;
}

HardyExpr parse_expr(Cursor& c);

// one summand of an exponent: q | ident | q*ident (the starred form only
// appears inside parentheses, where it cannot collide with multiplication)
Exponent parse_exponent_part(Cursor& c, bool allow_star) {
  if (std::isdigit(static_cast<unsigned char>(c.peek()))) {
    Rational q = decimal_rational(c);
    if (c.eat('/')) q /= decimal_rational(c);
    if (allow_star && c.eat('*')) {
      const std::string name = read_ident(c);
      if (name.empty()) c.fail("expected symbol after '*' in exponent");
      return Exponent::irrational(name, basis_value(name, 256), q);
    }
    return Exponent(q);
  }
  const std::string name = read_ident(c);
  if (name.empty()) c.fail("expected exponent");
  Exponent g = Exponent::irrational(name, basis_value(name, 256));
  if (c.eat('/')) {
    const Rational d = decimal_rational(c);
    if (d == 0) c.fail("zero denominator in exponent");
    g = g.scaled(1 / d);
  }
  return g;
}

Exponent parse_power_exponent(Cursor& c) {
  if (c.eat('(')) {
    bool neg = c.eat('-');
    if (!neg) c.eat('+');
    Exponent g = parse_exponent_part(c, true);
    if (neg) g = g.scaled(Rational(-1));
    for (;;) {
      if (c.eat('+'))
        g = g.plus(parse_exponent_part(c, true));
      else if (c.eat('-'))
        g = g.plus(parse_exponent_part(c, true).scaled(Rational(-1)));
      else
        break;
    }
    if (!c.eat(')')) c.fail("expected ')' after exponent");
    return g;
  }
  bool neg = c.eat('-');
  Exponent g = parse_exponent_part(c, false);
  return neg ? g.scaled(Rational(-1)) : g;
}

unsigned parse_uint(Cursor& c) {
  const Rational q = decimal_rational(c);
  if (denominator(q) != 1 || q < 0) c.fail("expected a non-negative integer power");
  return numerator(q).convert_to<unsigned>();
}

HardyExpr parse_atom(Cursor& c) {
  c.ws();
  if (c.peek() == '(') {
    c.eat('(');
    HardyExpr e = parse_expr(c);
    if (!c.eat(')')) c.fail("expected ')'");
    if (c.eat('^')) return e.powi(parse_uint(c));
    return e;
  }
  if (std::isdigit(static_cast<unsigned char>(c.peek()))) {
    Rational q = decimal_rational(c);
    if (c.eat('/')) q /= decimal_rational(c);
    return constant_expr(Coeff(q));
  }
  if (c.eat(std::string("logfact"))) {
    if (!(c.eat('(') && c.eat(std::string("t")) && c.eat(')')))
      c.fail("logfact takes the bare variable: logfact(t)");
    HardyExpr e = logfact_expr();
    if (c.eat('^')) return e.powi(parse_uint(c));
    return e;
  }
  if (c.eat(std::string("log"))) {
    if (!c.eat('(')) c.fail("expected '(' after log");
    // grammar closure: only log of the bare variable stays inside the grammar
    if (!(c.eat(std::string("t")) && c.eat(')')))
      c.fail("only log(t) is inside the grammar");
    unsigned e = 1;
    if (c.eat('^')) e = parse_uint(c);
    return monomial(Coeff(Rational(1)), Exponent(0), e);
  }
  if (c.eat(std::string("t"))) {
    if (c.eat('^')) return monomial(Coeff(Rational(1)), parse_power_exponent(c), 0);
    return monomial(Coeff(Rational(1)), Exponent(1), 0);
  }
  const std::string name = read_ident(c);
  if (name.empty()) c.fail("expected a factor");
  SymbolicReal v = name == "phi"
                       ? SymbolicReal(Rational(1, 2)) +
                             SymbolicReal::symbol("sqrt5", Rational(1, 2))
                       : SymbolicReal::symbol(name);
  HardyExpr e = constant_expr(Coeff(std::move(v)));
  if (c.eat('^')) return e.powi(parse_uint(c));
  return e;
}

bool expr_is_constant(const HardyExpr& e) {
  for (const auto& t : e.terms())
    if (!(t.gamma.is_rational() && t.gamma.rational_part() == 0 && t.logpow == 0))
      return false;
  return true;
}

HardyExpr parse_product(Cursor& c) {
  HardyExpr acc = parse_atom(c);
  for (;;) {
    if (c.eat('*')) {
      acc = acc * parse_atom(c);
    } else if (c.eat('/')) {
      HardyExpr d = parse_atom(c);
      if (!expr_is_constant(d) || d.is_zero())
        c.fail("division only by non-zero constants");
      const Coeff& dc = d.terms().front().coeff;
      if (dc.is_exact() && dc.sym().is_rational())
        acc = acc.scaled(1 / dc.sym().rational_part());
      else
        acc = acc * constant_expr(Coeff::numeric(1 / dc.value(320)));
    } else {
      break;
    }
  }
  return acc;
}

HardyExpr parse_expr(Cursor& c) {
  bool neg = c.eat('-');
  if (!neg) c.eat('+');
  HardyExpr acc = parse_product(c);
  if (neg) acc = acc.scaled(Rational(-1));
  for (;;) {
    if (c.eat('+'))
      acc = acc + parse_product(c);
    else if (c.eat('-'))
      acc = acc - parse_product(c);
    else
      break;
  }
  return acc;
}

}  // namespace

HardyExpr parse_hardy(const std::string& text) {
  Cursor c{text};
  HardyExpr e = parse_expr(c);
  c.ws();
  if (c.i != text.size()) c.fail("trailing characters");
  return e;
}

}  // namespace nilflow::hardy
