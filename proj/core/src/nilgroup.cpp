#include "nilflow/nilgroup.hpp"

#include <sstream>

#include "json.hpp"

namespace nilflow::nilgroup {

UpperIndex::UpperIndex(int dim) : d(dim) {
  if (dim < 2 || dim > 6) throw DimensionMismatch("dimension must be in [2,6]");
}

int UpperIndex::flat(int i, int j) const {
  if (!(0 <= i && i < j && j < d)) throw DimensionMismatch("bad upper index");
  const int o = j - i;  // offset 1..d-1
  int base = 0;
  for (int k = 1; k < o; ++k) base += d - k;
  return base + i;
}

std::pair<int, int> UpperIndex::unflat(int k) const {
  for (int o = 1; o < d; ++o) {
    const int n = d - o;
    if (k < n) return {k, k + o};
    k -= n;
  }
  throw DimensionMismatch("bad flat index");
}

UnipotentElement::UnipotentElement(int d, unsigned bits) : idx_(d), bits_(bits) {
  e_.assign(idx_.count(), real_from(0L, bits));
}

UnipotentElement UnipotentElement::heisenberg(const Real& x, const Real& y,
                                              const Real& z, unsigned bits) {
  UnipotentElement g(3, bits);
  g.at(0, 1) = x;
  g.at(1, 2) = y;
  g.at(0, 2) = z;
  return g;
}

LieElement::LieElement(int d, unsigned bits) : idx_(d), bits_(bits) {
  e_.assign(idx_.count(), real_from(0L, bits));
}

std::vector<double> NilPoint::coords_d() const {
  std::vector<double> out;
  out.reserve(coords.size());
  for (const auto& c : coords) out.push_back(c.convert_to<double>());
  return out;
}

UnipotentElement mul(const UnipotentElement& g, const UnipotentElement& h) {
  if (g.dim() != h.dim()) throw DimensionMismatch("mul: dimension mismatch");
  const int d = g.dim();
  UnipotentElement out(d, std::max(g.bits(), h.bits()));
  for (int i = 0; i < d; ++i)
    for (int j = i + 1; j < d; ++j) {
      Real acc = g.at(i, j) + h.at(i, j);
      for (int k = i + 1; k < j; ++k) acc += g.at(i, k) * h.at(k, j);
      out.at(i, j) = acc;
    }
  return out;
}

UnipotentElement inv(const UnipotentElement& g) {
  // (I + N)^-1 = sum_{j<d} (-N)^j, exact finite Neumann series
  const int d = g.dim();
  UnipotentElement minus_n(d, g.bits());
  for (int i = 0; i < d; ++i)
    for (int j = i + 1; j < d; ++j) minus_n.at(i, j) = -g.at(i, j);

  UnipotentElement acc = minus_n;  // I + (-N) so far
  UnipotentElement power = minus_n;
  for (int p = 2; p < d; ++p) {
    // power <- power * (-N) on the strictly-upper part
    UnipotentElement next(d, g.bits());
    for (int i = 0; i < d; ++i)
      for (int j = i + 1; j < d; ++j) {
        Real acc2 = real_from(0L, g.bits());
        for (int k = i + 1; k < j; ++k) acc2 += power.at(i, k) * minus_n.at(k, j);
        next.at(i, j) = acc2;
      }
    power = next;
    for (int i = 0; i < d; ++i)
      for (int j = i + 1; j < d; ++j) acc.at(i, j) += power.at(i, j);
  }
  return acc;
}

namespace {

// strict-upper product: (A*B) with both strictly upper
void strict_mul_into(const UnipotentElement&, const UnipotentElement&, int) = delete;

std::vector<Real> strict_mul(const UpperIndex& idx, const std::vector<Real>& a,
                             const std::vector<Real>& b, unsigned bits) {
  std::vector<Real> out(a.size(), real_from(0L, bits));
  for (int i = 0; i < idx.d; ++i)
    for (int j = i + 1; j < idx.d; ++j) {
      Real acc = real_from(0L, bits);
      for (int k = i + 1; k < j; ++k)
        acc += a[idx.flat(i, k)] * b[idx.flat(k, j)];
      out[idx.flat(i, j)] = acc;
    }
  return out;
}

}  // namespace

LieElement log_map(const UnipotentElement& g) {
  // log(I+N) = sum_{j=1}^{d-1} (-1)^(j+1) N^j / j
  const int d = g.dim();
  const UpperIndex idx(d);
  std::vector<Real> n = g.entries();
  LieElement out(d, g.bits());
  std::vector<Real> power = n;
  for (int j = 1; j < d; ++j) {
    const Rational coeff = (j % 2 == 1) ? Rational(1, j) : Rational(-1, j);
    const Real cf = real_from(coeff, g.bits());
    for (int k = 0; k < idx.count(); ++k) {
      auto [r, c] = idx.unflat(k);
      out.at(r, c) += cf * power[k];
    }
    if (j + 1 < d) power = strict_mul(idx, power, n, g.bits());
  }
  return out;
}

UnipotentElement exp_map(const LieElement& x) {
  // exp(X) = sum_{j<d} X^j / j!
  const int d = x.dim();
  const UpperIndex idx(d);
  std::vector<Real> xs(idx.count(), real_from(0L, x.bits()));
  for (int k = 0; k < idx.count(); ++k) {
    auto [r, c] = idx.unflat(k);
    xs[k] = x.at(r, c);
  }
  UnipotentElement out(d, x.bits());
  std::vector<Real> power = xs;
  BigInt fact = 1;
  for (int j = 1; j < d; ++j) {
    fact *= j;
    const Real cf = real_from(Rational(BigInt(1), fact), x.bits());
    for (int k = 0; k < idx.count(); ++k) {
      auto [r, c] = idx.unflat(k);
      out.at(r, c) += cf * power[k];
    }
    if (j + 1 < d) power = strict_mul(idx, power, xs, x.bits());
  }
  return out;
}

UnipotentElement pow_real(const UnipotentElement& b, const Real& s) {
  LieElement x = log_map(b);
  LieElement sx(b.dim(), b.bits());
  for (int i = 0; i < b.dim(); ++i)
    for (int j = i + 1; j < b.dim(); ++j) sx.at(i, j) = s * x.at(i, j);
  return exp_map(sx);
}

PolyMatrix::PolyMatrix(int d, unsigned bits) : idx_(d), bits_(bits) {
  p_.assign(idx_.count(), {});
}

UnipotentElement PolyMatrix::eval(const Real& m) const {
  UnipotentElement out(idx_.d, bits_);
  for (int k = 0; k < idx_.count(); ++k) {
    auto [i, j] = idx_.unflat(k);
    const auto& cs = p_[k];
    Real acc = real_from(0L, bits_);
    for (auto it = cs.rbegin(); it != cs.rend(); ++it) acc = acc * m + *it;
    out.at(i, j) = acc;
  }
  return out;
}

UnipotentElement PolyMatrix::eval_int(const BigInt& m) const {
  return eval(real_from(m, bits_));
}

PolyMatrix pow_poly(const UnipotentElement& b) {
  // b^m = exp(m log b): entry (i,j) = sum_j (X^p / p!)(i,j) m^p
  const int d = b.dim();
  const UpperIndex idx(d);
  LieElement x = log_map(b);
  std::vector<Real> xs(idx.count(), real_from(0L, b.bits()));
  for (int k = 0; k < idx.count(); ++k) {
    auto [r, c] = idx.unflat(k);
    xs[k] = x.at(r, c);
  }
  PolyMatrix pm(d, b.bits());
  for (int k = 0; k < idx.count(); ++k) {
    auto [r, c] = idx.unflat(k);
    pm.entry(r, c).assign(static_cast<std::size_t>(c - r) + 1, real_from(0L, b.bits()));
  }
  std::vector<Real> power = xs;
  BigInt fact = 1;
  for (int p = 1; p < d; ++p) {
    fact *= p;
    const Real cf = real_from(Rational(BigInt(1), fact), b.bits());
    for (int k = 0; k < idx.count(); ++k) {
      auto [r, c] = idx.unflat(k);
      if (p <= c - r) pm.entry(r, c)[static_cast<std::size_t>(p)] += cf * power[k];
    }
    if (p + 1 < d) power = strict_mul(idx, power, xs, b.bits());
  }
  return pm;
}

ReduceResult reduce(const UnipotentElement& g) {
  const int d = g.dim();
  const UpperIndex idx(d);
  UnipotentElement work = g;
  IntegerUnipotent gamma_inv;  // product of the elementary peels, built as we go
  gamma_inv.d = d;
  gamma_inv.e.assign(idx.count(), BigInt(0));

  // gamma accumulates as an exact integer matrix: work * E = reduced, with
  // E = prod (I - k_ab E_ab); gamma = E^-1 recovered at the end.
  std::vector<std::vector<BigInt>> emat(static_cast<std::size_t>(d),
                                        std::vector<BigInt>(static_cast<std::size_t>(d), 0));
  for (int i = 0; i < d; ++i) emat[static_cast<std::size_t>(i)][static_cast<std::size_t>(i)] = 1;

  const Real guard = ldexp(real_from(1, 64), -32);
  const long res_bits = std::max<long>(16, static_cast<long>(g.bits()) - 48);
  for (int o = 1; o < d; ++o) {
    for (int i = 0; i + o < d; ++i) {
      const int j = i + o;
      Real v = work.at(i, j);
      if (!mpfr_number_p(v.backend().data()))
        throw PrecisionExhausted("reduce: non-finite entry");
      // values that are integer within the numeric resolution envelope are
      // snapped: either floor choice names the same coset point
      const Real snap = (abs(v) + 1) * ldexp(real_from(1, 64), -res_bits);
      Real d2i = dist_to_int(v);
      if (d2i != 0 && d2i < snap) {
        v = floor(v + Real(0.5));
        work.at(i, j) = v;
      }
      if (dist_to_int(v) < guard && frac(v) != 0)
        throw PrecisionExhausted("reduce: entry within 2^-32 of an integer");
      Real fl = floor(v);
      BigInt k;
      mpfr_get_z(k.backend().data(), fl.backend().data(), MPFR_RNDN);
      if (k == 0) continue;
      // work <- work * (I - k E_ij): column j gets -k * column i
      work.at(i, j) -= real_from(k, work.bits());
      for (int r = 0; r < i; ++r)
        work.at(r, j) -= real_from(k, work.bits()) * work.at(r, i);
      // emat <- emat * (I - k E_ij), exact
      for (int r = 0; r <= i; ++r)
        emat[static_cast<std::size_t>(r)][static_cast<std::size_t>(j)] -=
            k * emat[static_cast<std::size_t>(r)][static_cast<std::size_t>(i)];
    }
  }

  // invert the exact integer unit-triangular matrix by Neumann series
  std::vector<std::vector<BigInt>> n(static_cast<std::size_t>(d),
                                     std::vector<BigInt>(static_cast<std::size_t>(d), 0));
  for (int i = 0; i < d; ++i)
    for (int j = i + 1; j < d; ++j)
      n[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] =
          -emat[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  std::vector<std::vector<BigInt>> inv_acc = n, power = n;
  for (int i = 0; i < d; ++i) inv_acc[static_cast<std::size_t>(i)][static_cast<std::size_t>(i)] = 1;
  for (int p = 2; p < d; ++p) {
    std::vector<std::vector<BigInt>> next(static_cast<std::size_t>(d),
                                          std::vector<BigInt>(static_cast<std::size_t>(d), 0));
    for (int i = 0; i < d; ++i)
      for (int j = i + 1; j < d; ++j) {
        BigInt acc = 0;
        for (int k = i + 1; k < j; ++k)
          acc += power[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)] *
                 n[static_cast<std::size_t>(k)][static_cast<std::size_t>(j)];
        next[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = acc;
      }
    power = next;
    for (int i = 0; i < d; ++i)
      for (int j = i + 1; j < d; ++j)
        inv_acc[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] +=
            power[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  }
  for (int k = 0; k < idx.count(); ++k) {
    auto [i, j] = idx.unflat(k);
    gamma_inv.e[static_cast<std::size_t>(k)] =
        inv_acc[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  }

  NilPoint pt;
  pt.d = d;
  pt.coords.reserve(static_cast<std::size_t>(idx.count()));
  for (int k = 0; k < idx.count(); ++k) {
    auto [i, j] = idx.unflat(k);
    pt.coords.push_back(work.at(i, j));
  }
  return {std::move(pt), std::move(gamma_inv)};
}

UnipotentElement embed(const NilPoint& p, unsigned bits) {
  UnipotentElement g(p.d, bits);
  const UpperIndex idx(p.d);
  for (int k = 0; k < idx.count(); ++k) {
    auto [i, j] = idx.unflat(k);
    g.at(i, j) = p.coords[static_cast<std::size_t>(k)];
  }
  return g;
}

UnipotentElement embed_integer(const IntegerUnipotent& gi, unsigned bits) {
  UnipotentElement g(gi.d, bits);
  const UpperIndex idx(gi.d);
  for (int k = 0; k < idx.count(); ++k) {
    auto [i, j] = idx.unflat(k);
    g.at(i, j) = real_from(gi.e[static_cast<std::size_t>(k)], bits);
  }
  return g;
}

std::vector<Real> horizontal(const UnipotentElement& g) {
  std::vector<Real> out;
  out.reserve(static_cast<std::size_t>(g.dim()) - 1);
  for (int i = 0; i + 1 < g.dim(); ++i) out.push_back(frac(g.at(i, i + 1)));
  return out;
}

bool is_ergodic_heisenberg(const SymbolicReal& alpha, const SymbolicReal& beta) {
  // {1, a, b} independent iff both irrational parts are non-zero and the two
  // are not parallel over Q
  SymbolicReal a_irr = alpha - SymbolicReal(alpha.rational_part());
  SymbolicReal b_irr = beta - SymbolicReal(beta.rational_part());
  if (a_irr.is_zero() || b_irr.is_zero()) return false;
  return !q_dependent(a_irr, b_irr);
}

std::string UnipotentElement::to_json() const {
  nlohmann::json j;
  j["dimension"] = dim();
  j["precision_bits"] = bits_;
  nlohmann::json arr = nlohmann::json::array();
  // row-major strictly-upper order for the wire format
  for (int i = 0; i < dim(); ++i)
    for (int jj = i + 1; jj < dim(); ++jj) arr.push_back(real_to_decimal(at(i, jj)));
  j["upper"] = arr;
  return j.dump();
}

UnipotentElement UnipotentElement::from_json(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  const int d = j.at("dimension").get<int>();
  const unsigned bits = j.at("precision_bits").get<unsigned>();
  UnipotentElement g(d, bits);
  const auto& arr = j.at("upper");
  std::size_t k = 0;
  for (int i = 0; i < d; ++i)
    for (int jj = i + 1; jj < d; ++jj)
      g.at(i, jj) = real_from(arr.at(k++).get<std::string>(), bits);
  return g;
}

}  // namespace nilflow::nilgroup
