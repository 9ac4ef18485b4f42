#include "nilflow/hardy.hpp"

#include <algorithm>
#include <iomanip>
#include <sstream>

namespace nilflow::hardy {

namespace {

constexpr unsigned kIrrBits = 256;
constexpr long kTieWindow = -200;  // 2^-200 decision window

// sign of x with the declared decision window; 2 means "tie".
int window_sign(const Real& x) {
  if (x == 0) return 0;
  Real ax = abs(x);
  Real w = real_from(1, 64);
  w = ldexp(w, kTieWindow);
  if (ax <= w) return 2;
  return x > 0 ? 1 : -1;
}

}  // namespace

Exponent Exponent::irrational(const std::string& tag, Real value256,
                              Rational scale, Rational offset) {
  Exponent e;
  e.rat_ = std::move(offset);
  e.scale_ = std::move(scale);
  e.tag_ = tag;
  e.irr_ = real_carrier(kIrrBits);
  e.irr_ = value256;
  if (e.scale_ == 0) e.tag_.clear();
  return e;
}

Real Exponent::value(unsigned bits) const {
  Real v = real_from(rat_, bits);
  if (scale_ != 0) v += real_from(scale_, bits) * irr_;
  return v;
}

long Exponent::floor_value() const {
  if (is_rational()) {
    BigInt f = numerator(rat_) / denominator(rat_);
    if (f * denominator(rat_) > numerator(rat_)) f -= 1;  // floor for negatives
    return f.convert_to<long>();
  }
  Real v = value(320);
  Real fl = floor(v);
  const int s = window_sign(v - fl);
  if (s == 2 || window_sign(fl + 1 - v) == 2)
    throw UndecidableInGrammar("exponent too close to an integer: " + to_string());
  return fl.convert_to<long>();
}

Exponent Exponent::plus(const Rational& q) const {
  Exponent e = *this;
  e.rat_ += q;
  return e;
}

Exponent Exponent::plus(const Exponent& o) const {
  if (o.is_rational()) return plus(o.rat_);
  if (is_rational()) return o.plus(rat_);
  if (tag_ == o.tag_) {
    Exponent e = *this;
    e.rat_ += o.rat_;
    e.scale_ += o.scale_;
    if (e.scale_ == 0) e.tag_.clear();
    return e;
  }
  // two distinct declared irrationals: collapse to a fresh numeric declaration
  Real v = value(320) + o.value(320);
  Real v256 = real_carrier(kIrrBits);
  v256 = v;
  return irrational(to_string() + "+" + o.to_string(), v256);
}

Exponent Exponent::scaled(const Rational& q) const {
  Exponent e = *this;
  e.rat_ *= q;
  e.scale_ *= q;
  if (e.scale_ == 0) e.tag_.clear();
  return e;
}

int Exponent::compare(const Exponent& a, const Exponent& b) {
  if (a.is_rational() && b.is_rational())
    return a.rat_ < b.rat_ ? -1 : (a.rat_ == b.rat_ ? 0 : 1);
  if (a.tag_ == b.tag_ && a.scale_ == b.scale_)
    return a.rat_ < b.rat_ ? -1 : (a.rat_ == b.rat_ ? 0 : 1);
  const int s = window_sign(a.value(320) - b.value(320));
  if (s == 2)
    throw UndecidableInGrammar("exponent tie narrower than 2^-200: " +
                               a.to_string() + " vs " + b.to_string());
  return s;
}

std::string Exponent::to_string() const {
  std::ostringstream os;
  if (is_rational()) {
    os << rat_;
    return os.str();
  }
  if (rat_ != 0) os << rat_ << (scale_ > 0 ? "+" : "");
  if (scale_ == -1)
    os << "-";
  else if (scale_ != 1)
    os << scale_ << "*";
  os << (tag_.empty() ? "<num>" : tag_);
  return os.str();
}

Coeff Coeff::numeric(Real v256) {
  Coeff c;
  if (bits_of(v256) < kIrrBits) {
    Real w = real_carrier(kIrrBits);
    w = v256;
    c.v_ = w;
  } else {
    c.v_ = v256;
  }
  return c;
}

bool Coeff::is_zero() const {
  if (is_exact()) return sym().is_zero();
  return std::get<Real>(v_) == 0;
}

Real Coeff::value(unsigned bits) const {
  if (is_exact()) return sym().value(bits);
  return std::get<Real>(v_);
}

Coeff Coeff::operator+(const Coeff& o) const {
  if (is_exact() && o.is_exact()) return Coeff(sym() + o.sym());
  return numeric(value(320) + o.value(320));
}

Coeff Coeff::operator-() const {
  if (is_exact()) return Coeff(-sym());
  return numeric(-std::get<Real>(v_));
}

Coeff Coeff::scaled(const Rational& q) const {
  if (is_exact()) return Coeff(sym().scaled(q));
  return numeric(real_from(q, 320) * std::get<Real>(v_));
}

Coeff Coeff::times(const Coeff& o) const {
  if (is_exact() && sym().is_rational()) return o.scaled(sym().rational_part());
  if (o.is_exact() && o.sym().is_rational()) return scaled(o.sym().rational_part());
  return numeric(value(320) * o.value(320));
}

Coeff Coeff::times_exponent(const Exponent& g) const {
  if (g.is_rational()) return scaled(g.rational_part());
  return numeric(value(320) * g.value(320));
}

std::string Coeff::to_string() const {
  if (is_exact()) return sym().to_string();
  std::ostringstream os;
  os << std::setprecision(20) << std::get<Real>(v_);
  return os.str();
}

namespace {

// growth order: lexicographic on (gamma, logpow), descending sort
int key_cmp(const Term& a, const Term& b) {
  const int c = Exponent::compare(a.gamma, b.gamma);
  if (c != 0) return c;
  if (a.logpow != b.logpow) return a.logpow < b.logpow ? -1 : 1;
  return 0;
}

std::vector<Term> normalize(std::vector<Term> in) {
  std::vector<Term> out;
  for (auto& t : in) {
    if (t.coeff.is_zero()) continue;
    bool merged = false;
    for (auto& u : out) {
      if (key_cmp(t, u) == 0) {
        u.coeff = u.coeff + t.coeff;
        merged = true;
        break;
      }
    }
    if (!merged) out.push_back(std::move(t));
  }
  std::erase_if(out, [](const Term& t) { return t.coeff.is_zero(); });
  std::sort(out.begin(), out.end(), [](const Term& a, const Term& b) {
    return key_cmp(a, b) > 0;
  });
  return out;
}

std::vector<Term> abs_envelope(const std::vector<Term>& ts) {
  std::vector<Term> out;
  out.reserve(ts.size());
  for (const auto& t : ts) {
    Real m = abs(t.coeff.value(320));
    m += ldexp(m, -100);  // round the bound upward
    out.push_back(Term{Coeff::numeric(m), t.gamma, t.logpow});
  }
  return out;
}

std::vector<Term> cross_product(const std::vector<Term>& a, const std::vector<Term>& b) {
  std::vector<Term> out;
  out.reserve(a.size() * b.size());
  for (const auto& x : a)
    for (const auto& y : b)
      out.push_back(Term{x.coeff.times(y.coeff), x.gamma.plus(y.gamma),
                         x.logpow + y.logpow});
  return out;
}

}  // namespace

void HardyExpr::assign(std::vector<Term> terms) { terms_ = normalize(std::move(terms)); }

void HardyExpr::set_tail(std::vector<Term> tail) { tail_ = normalize(std::move(tail)); }

HardyExpr HardyExpr::operator+(const HardyExpr& o) const {
  std::vector<Term> ts = terms_;
  ts.insert(ts.end(), o.terms_.begin(), o.terms_.end());
  HardyExpr r(std::move(ts));
  std::vector<Term> tl = tail_;
  tl.insert(tl.end(), o.tail_.begin(), o.tail_.end());
  r.set_tail(std::move(tl));
  return r;
}

HardyExpr HardyExpr::operator-(const HardyExpr& o) const {
  return *this + o.scaled(Rational(-1));
}

HardyExpr HardyExpr::scaled(const Rational& q) const {
  std::vector<Term> ts;
  ts.reserve(terms_.size());
  for (const auto& t : terms_) ts.push_back(Term{t.coeff.scaled(q), t.gamma, t.logpow});
  HardyExpr r(std::move(ts));
  const Rational aq = q < 0 ? Rational(-q) : q;
  std::vector<Term> tl;
  for (const auto& t : tail_) tl.push_back(Term{t.coeff.scaled(aq), t.gamma, t.logpow});
  r.set_tail(std::move(tl));
  return r;
}

HardyExpr HardyExpr::operator*(const HardyExpr& o) const {
  HardyExpr r(cross_product(terms_, o.terms_));
  if (!tail_.empty() || !o.tail_.empty()) {
    // |err(AB)| <= |A|*tB + |B|*tA + tA*tB, coefficientwise envelopes
    std::vector<Term> tl;
    auto append = [&tl](std::vector<Term> v) {
      tl.insert(tl.end(), v.begin(), v.end());
    };
    if (!o.tail_.empty()) append(cross_product(abs_envelope(terms_), o.tail_));
    if (!tail_.empty()) append(cross_product(abs_envelope(o.terms_), tail_));
    if (!tail_.empty() && !o.tail_.empty()) append(cross_product(tail_, o.tail_));
    r.set_tail(std::move(tl));
  }
  return r;
}

HardyExpr HardyExpr::powi(unsigned k) const {
  HardyExpr acc(std::vector<Term>{Term{Coeff(Rational(1)), Exponent(0), 0}});
  for (unsigned i = 0; i < k; ++i) acc = acc * (*this);
  return acc;
}

std::string HardyExpr::to_string() const {
  if (terms_.empty()) return "0";
  std::ostringstream os;
  bool first = true;
  for (const auto& t : terms_) {
    if (!first) os << " + ";
    os << "(" << t.coeff.to_string() << ")";
    const bool has_t = !(t.gamma.is_rational() && t.gamma.rational_part() == 0);
    if (has_t) os << "*t^(" << t.gamma.to_string() << ")";
    if (t.logpow > 0) os << "*log(t)^" << t.logpow;
    first = false;
  }
  return os.str();
}

EvalResult eval(const HardyExpr& a, const Real& t, unsigned bits) {
  if (bits < 64) throw Error("eval: bits must be >= 64");
  if (t < 2) throw Error("eval: t must be >= 2");
  const unsigned wb = bits + 32;
  Real tw = real_carrier(wb);
  tw = t;
  const Real logt = log(tw);
  Real acc = real_from(0L, wb);
  Real err = real_from(0L, 64);
  const Real ulp_rel = ldexp(real_from(1, 64), 1 - static_cast<long>(bits));
  const Real decl_rel = ldexp(real_from(1, 64), -250);
  for (const auto& term : a.terms()) {
    Real v = term.coeff.value(wb);
    if (!(term.gamma.is_rational() && term.gamma.rational_part() == 0))
      v *= pow(tw, term.gamma.value(wb));
    for (unsigned i = 0; i < term.logpow; ++i) v *= logt;
    acc += v;
    Real av = abs(v);
    err += av * ulp_rel;
    if (!term.gamma.is_rational()) err += av * logt * decl_rel;
    if (!term.coeff.is_exact()) err += av * decl_rel;
  }
  for (const auto& term : a.tail()) {
    Real v = term.coeff.value(wb);
    v *= pow(tw, term.gamma.value(wb));
    for (unsigned i = 0; i < term.logpow; ++i) v *= logt;
    err += abs(v);
  }
  if (!mpfr_number_p(acc.backend().data()))
    throw PrecisionExhausted("eval overflow: " + a.to_string());
  return {acc, err};
}

HardyExpr derivative(const HardyExpr& a, unsigned order) {
  HardyExpr cur = a;
  for (unsigned o = 0; o < order; ++o) {
    std::vector<Term> out;
    for (const auto& t : cur.terms()) {
      // d/dt [c t^g log^e] = (c g) t^(g-1) log^e + (c e) t^(g-1) log^(e-1)
      Coeff cg = t.coeff.times_exponent(t.gamma);
      if (!cg.is_zero())
        out.push_back(Term{std::move(cg), t.gamma.plus(Rational(-1)), t.logpow});
      if (t.logpow >= 1)
        out.push_back(Term{t.coeff.scaled(Rational(t.logpow)),
                           t.gamma.plus(Rational(-1)), t.logpow - 1});
    }
    HardyExpr next{std::move(out)};
    if (!cur.tail().empty()) {
      // Stirling-type envelopes decay one power of t per derivative.
      std::vector<Term> tl;
      for (const auto& t : cur.tail())
        tl.push_back(Term{t.coeff, t.gamma.plus(Rational(-1)), t.logpow});
      next.set_tail(std::move(tl));
    }
    cur = std::move(next);
  }
  return cur;
}

namespace {

// lexicographic compare of a term key against (gamma=q, logpow=e)
int key_vs(const Term& t, const Rational& q, unsigned e) {
  const int c = Exponent::compare(t.gamma, Exponent(q));
  if (c != 0) return c;
  if (t.logpow != e) return t.logpow < e ? -1 : 1;
  return 0;
}

}  // namespace

GrowthType classify_type(const HardyExpr& a) {
  if (a.is_zero()) throw Error("classify_type: zero function has no type");
  const Term& lead = a.terms().front();
  if (key_vs(lead, Rational(0), 0) < 0)
    throw Error("classify_type: decaying function has no non-negative type");
  const bool exact_power = lead.gamma.is_integer() && lead.logpow == 0;
  return GrowthType{!exact_power, lead.gamma.floor_value()};
}

bool pointwise_good(const DistanceClass& dc) {
  return dc.kind != DistanceClass::Kind::PolyPlusLogBounded;
}

DistanceClass distance_class(const HardyExpr& a) {
  std::vector<Term> qnc;  // integer gamma >= 1, no log
  Coeff q0;               // constant term
  std::vector<Term> rest;
  for (const auto& t : a.terms()) {
    const bool poly_key = t.gamma.is_integer() && t.logpow == 0 &&
                          t.gamma.rational_part() >= 0;
    if (poly_key && t.gamma.rational_part() == 0)
      q0 = t.coeff;
    else if (poly_key)
      qnc.push_back(t);
    else
      rest.push_back(t);
  }

  DistanceClass dc;
  if (!rest.empty() && key_vs(rest.front(), Rational(0), 1) > 0) {
    dc.kind = DistanceClass::Kind::FarFromPolys;
    return dc;
  }
  const bool log_line = !rest.empty() && key_vs(rest.front(), Rational(0), 1) == 0;

  // factor qnc = c0 * p0 with p0 primitive integer, if commensurable
  Coeff c0;
  std::vector<BigInt> p0;
  if (!qnc.empty()) {
    bool all_exact = true;
    for (const auto& t : qnc) all_exact = all_exact && t.coeff.is_exact();
    if (qnc.size() == 1) {
      const long deg = qnc.front().gamma.floor_value();
      p0.assign(static_cast<std::size_t>(deg) + 1, BigInt(0));
      p0.back() = 1;
      c0 = qnc.front().coeff;
    } else if (!all_exact) {
      throw UndecidableInGrammar(
          "distance_class: numeric coefficients on the polynomial part");
    } else {
      const SymbolicReal& base = qnc.front().coeff.sym();
      std::vector<Rational> ratios(qnc.size());
      for (std::size_t i = 0; i < qnc.size(); ++i) {
        auto r = rational_ratio(base, qnc[i].coeff.sym());
        if (!r) {
          dc.kind = DistanceClass::Kind::FarFromPolys;
          return dc;
        }
        ratios[i] = *r;
      }
      BigInt den = 1;
      for (const auto& r : ratios) den = lcm(den, denominator(r));
      std::vector<BigInt> nums(qnc.size());
      BigInt content = 0;
      for (std::size_t i = 0; i < qnc.size(); ++i) {
        nums[i] = numerator(ratios[i]) * (den / denominator(ratios[i]));
        content = gcd(content, nums[i]);
      }
      const long deg = qnc.front().gamma.floor_value();  // leading term, sorted desc
      p0.assign(static_cast<std::size_t>(deg) + 1, BigInt(0));
      for (std::size_t i = 0; i < qnc.size(); ++i)
        p0[static_cast<std::size_t>(qnc[i].gamma.floor_value())] = nums[i] / content;
      Rational mult(content, den);
      if (p0.back() < 0) {
        for (auto& c : p0) c = -c;
        mult = -mult;
      }
      c0 = Coeff(base.scaled(mult));
    }
  }

  if (!log_line) {
    dc.kind = DistanceClass::Kind::PolyPlusConvergent;
    dc.c = c0;
    dc.p = std::move(p0);
    dc.d = q0;
    return dc;
  }

  // remainder comparable to log t: pointwise-good only in the t/m case
  const bool is_linear_over_m = [&] {
    if (p0.size() != 2 || p0[0] != 0 || p0[1] != 1) return false;
    if (!c0.is_exact() || !c0.sym().is_rational()) return false;
    const Rational q = c0.sym().rational_part();
    return numerator(q) == 1 || numerator(q) == -1;
  }();
  if (is_linear_over_m) {
    const Rational q = c0.sym().rational_part();
    dc.kind = DistanceClass::Kind::NearLinearOverM;
    dc.m = (BigInt(numerator(q)) * denominator(q)).convert_to<long>();
    return dc;
  }
  dc.kind = DistanceClass::Kind::PolyPlusLogBounded;
  dc.c = c0;
  dc.p = std::move(p0);
  return dc;
}

Ordering growth_compare(const HardyExpr& a, const HardyExpr& b) {
  if (a.is_zero() && b.is_zero()) return Ordering::Similar;
  if (a.is_zero()) return Ordering::Less;
  if (b.is_zero()) return Ordering::Greater;
  const int c = key_cmp(a.terms().front(), b.terms().front());
  if (c < 0) return Ordering::Less;
  if (c > 0) return Ordering::Greater;
  return Ordering::Similar;
}

BigInt floor_eval(const HardyExpr& a, long n, unsigned bits) {
  unsigned b = bits;
  for (int attempt = 0; attempt <= 4; ++attempt, b *= 2) {
    const EvalResult r = eval(a, real_from(n, b), b);
    Real nearest = floor(r.value + Real(0.5));
    Real d = abs(r.value - nearest);
    if (d == 0) {
      // re-check one level up: exact values stay exact, near-misses move
      const EvalResult r2 = eval(a, real_from(n, b * 2), b * 2);
      if (abs(r2.value - nearest) == 0) {
        BigInt out;
        mpfr_get_z(out.backend().data(), nearest.backend().data(), MPFR_RNDN);
        return out;
      }
      continue;
    }
    if (d > r.abs_error * 4) {
      Real fl = floor(r.value);
      BigInt out;
      mpfr_get_z(out.backend().data(), fl.backend().data(), MPFR_RNDN);
      return out;
    }
  }
  throw PrecisionExhausted("floor_eval: value within guard distance of an integer at n=" +
                           std::to_string(n));
}

}  // namespace nilflow::hardy
