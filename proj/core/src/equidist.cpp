#include "nilflow/equidist.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace nilflow::equidist {

Real PolySeq::eval(const BigInt& n) const {
  // sum binom(n,i) alpha_i with exact integer binomials
  Real acc = real_from(0L, alpha.empty() ? 64 : bits_of(alpha.front()));
  BigInt binom = 1;  // binom(n,0)
  for (std::size_t i = 0; i < alpha.size(); ++i) {
    if (i > 0) {
      binom *= (n - static_cast<long>(i) + 1);
      binom /= static_cast<long>(i);
    }
    acc += alpha[i] * real_from(binom, bits_of(alpha[i]));
  }
  return acc;
}

namespace {

// Stirling numbers of the second kind, small table
BigInt stirling2(unsigned n, unsigned k) {
  if (n == k) return 1;
  if (k == 0 || k > n) return 0;
  return stirling2(n - 1, k - 1) + BigInt(k) * stirling2(n - 1, k);
}

BigInt factorial(unsigned n) {
  BigInt f = 1;
  for (unsigned i = 2; i <= n; ++i) f *= i;
  return f;
}

}  // namespace

PolySeq polyseq_from_monomial(std::span<const Real> monomial) {
  // n^i = sum_j S(i,j) j! binom(n,j)
  PolySeq p;
  if (monomial.empty()) return p;
  const unsigned bits = static_cast<unsigned>(bits_of(monomial[0]));
  p.alpha.assign(monomial.size(), real_from(0L, bits));
  for (unsigned i = 0; i < monomial.size(); ++i)
    for (unsigned j = 0; j <= i; ++j) {
      const BigInt w = stirling2(i, j) * factorial(j);
      if (w != 0) p.alpha[j] += monomial[i] * real_from(w, bits);
    }
  return p;
}

PolySeq polyseq_scale_int(const PolySeq& p, long k) {
  PolySeq out = p;
  for (auto& a : out.alpha) a *= k;
  return out;
}

PolySeq polyseq_add(const PolySeq& a, const PolySeq& b) {
  PolySeq out;
  const std::size_t n = std::max(a.alpha.size(), b.alpha.size());
  for (std::size_t i = 0; i < n; ++i) {
    Real v = real_from(0L, 64);
    if (i < a.alpha.size()) v += a.alpha[i];
    if (i < b.alpha.size()) v += b.alpha[i];
    out.alpha.push_back(v);
  }
  return out;
}

long HorizontalCharacter::magnitude() const {
  long m = 0;
  for (long k : kappa) m = std::max(m, std::abs(k));
  return m;
}

bool HorizontalCharacter::trivial() const { return magnitude() == 0; }

std::string HorizontalCharacter::to_string() const {
  std::ostringstream os;
  os << "(";
  for (std::size_t i = 0; i < kappa.size(); ++i)
    os << kappa[i] << (i + 1 < kappa.size() ? "," : "");
  os << ")";
  return os.str();
}

std::complex<double> weyl_sum(const TorusPoints& pts, std::span<const long> kappa) {
  if (kappa.size() != static_cast<std::size_t>(pts.dim))
    throw DimensionMismatch("weyl_sum: frequency dimension mismatch");
  bool nontrivial = false;
  for (long k : kappa) nontrivial = nontrivial || k != 0;
  if (!nontrivial) throw Error("weyl_sum: kappa must be non-trivial");
  const std::size_t n = pts.count();
  if (n == 0) throw Error("weyl_sum: empty sequence");
  std::vector<std::complex<double>> vals(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto row = pts.row(i);
    double phase = 0.0;
    for (std::size_t j = 0; j < kappa.size(); ++j) {
      double p = static_cast<double>(kappa[j]) * row[j];
      phase += p - std::floor(p);
    }
    vals[i] = unit_e(phase);
  }
  return pairwise_sum(std::span<const std::complex<double>>(vals)) /
         static_cast<double>(n);
}

double star_discrepancy_1d(std::vector<double> points) {
  const std::size_t n = points.size();
  if (n == 0) throw Error("star_discrepancy_1d: empty sequence");
  std::sort(points.begin(), points.end());
  double d = 0.0;
  for (std::size_t i = 1; i <= n; ++i) {
    const double x = points[i - 1];
    d = std::max(d, std::abs(static_cast<double>(i) / n - x));
    d = std::max(d, std::abs(x - static_cast<double>(i - 1) / n));
  }
  return d;
}

double l2_star_discrepancy(const TorusPoints& pts) {
  const std::size_t n = pts.count();
  const int m = pts.dim;
  if (n == 0) throw Error("l2_star_discrepancy: empty sequence");
  const double third = std::pow(1.0 / 3.0, m);
  std::vector<double> lin(n);
  for (std::size_t i = 0; i < n; ++i) {
    double prod = 1.0;
    for (double x : pts.row(i)) prod *= (1.0 - x * x) / 2.0;
    lin[i] = prod;
  }
  double quad = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      double prod = 1.0;
      const auto ri = pts.row(i), rj = pts.row(j);
      for (int c = 0; c < m; ++c) prod *= 1.0 - std::max(ri[c], rj[c]);
      quad += prod;
    }
  }
  const double nn = static_cast<double>(n);
  const double t2 = third - 2.0 / nn * pairwise_sum(std::span<const double>(lin)) +
                    quad / (nn * nn);
  return std::sqrt(std::max(0.0, t2));
}

double cinf_norm(const PolySeq& p, long N) {
  if (N < 1) throw Error("cinf_norm: N must be >= 1");
  if (p.degree() < 1) throw Error("cinf_norm: degree must be >= 1");
  double best = 0.0;
  double npow = 1.0;
  for (int i = 1; i <= p.degree(); ++i) {
    npow *= static_cast<double>(N);
    const double dist = dist_to_int(p.alpha[static_cast<std::size_t>(i)])
                            .convert_to<double>();
    best = std::max(best, npow * dist);
  }
  return best;
}

namespace {

void for_each_kappa(int m, long M, const std::function<void(std::span<const long>)>& fn) {
  std::vector<long> k(static_cast<std::size_t>(m), -M);
  for (;;) {
    bool nontrivial = false;
    for (long v : k) nontrivial = nontrivial || v != 0;
    if (nontrivial) fn(k);
    int pos = m - 1;
    while (pos >= 0) {
      if (++k[static_cast<std::size_t>(pos)] <= M) break;
      k[static_cast<std::size_t>(pos)] = -M;
      --pos;
    }
    if (pos < 0) return;
  }
}

}  // namespace

std::optional<Obstruction> obstruction_scan(std::span<const PolySeq> p, long N, long M) {
  if (M < 1) throw Error("obstruction_scan: M must be >= 1");
  const int m = static_cast<int>(p.size());
  std::optional<Obstruction> best;
  const auto first_nonzero = [](const std::vector<long>& k) {
    for (long x : k)
      if (x != 0) return x;
    return 0L;
  };
  for_each_kappa(m, M, [&](std::span<const long> kappa) {
    PolySeq combo;
    double v = 0.0;  // a combination that collapses to a constant is a norm-0 witness
    for (int j = 0; j < m; ++j)
      if (kappa[static_cast<std::size_t>(j)] != 0)
        combo = polyseq_add(
            combo, polyseq_scale_int(p[static_cast<std::size_t>(j)],
                                     kappa[static_cast<std::size_t>(j)]));
    if (combo.degree() >= 1) v = cinf_norm(combo, N);
    std::vector<long> kv(kappa.begin(), kappa.end());
    HorizontalCharacter chi{std::move(kv)};
    const bool take = [&] {
      if (!best) return true;
      if (v != best->norm) return v < best->norm;
      if (chi.magnitude() != best->chi.magnitude())
        return chi.magnitude() < best->chi.magnitude();
      return first_nonzero(chi.kappa) > 0 && first_nonzero(best->chi.kappa) < 0;
    }();
    if (take) best = Obstruction{std::move(chi), v};
  });
  if (best && best->norm <= static_cast<double>(M)) return best;
  return std::nullopt;
}

unsigned policy_bits(int d, std::int64_t max_abs_m) {
  const double lg = std::log2(std::max<double>(2.0, static_cast<double>(max_abs_m)));
  return static_cast<unsigned>(std::ceil((d - 1) * lg)) + 96;
}

TestFunction character_function(const HorizontalCharacter& chi, int d) {
  // horizontal coordinates sit first in offset-major order
  std::vector<long> kappa = chi.kappa;
  if (kappa.size() != static_cast<std::size_t>(d - 1))
    throw DimensionMismatch("character frequency must have d-1 entries");
  double lip = 0.0;
  for (long k : kappa) lip += 2.0 * 3.14159265358979323846 * std::abs(k);
  TestFunction F;
  F.name = "char" + chi.to_string();
  F.lipschitz = lip;
  F.f = [kappa](std::span<const double> x) {
    double phase = 0.0;
    for (std::size_t j = 0; j < kappa.size(); ++j)
      phase += static_cast<double>(kappa[j]) * x[j];
    return unit_e(phase);
  };
  return F;
}

TestFunction coordinate_bump(int coord, int cube_dim) {
  if (coord < 0 || coord >= cube_dim) throw DimensionMismatch("bump coordinate");
  TestFunction F;
  F.name = "bump[" + std::to_string(coord) + "]";
  F.lipschitz = 8.0;
  F.f = [coord](std::span<const double> x) {
    double u = x[static_cast<std::size_t>(coord)] - 0.3;
    u -= std::floor(u + 0.5);  // distance on the circle
    const double v = 1.0 - 8.0 * std::abs(u);
    return std::complex<double>(std::max(0.0, v), 0.0);
  };
  return F;
}

}  // namespace nilflow::equidist
