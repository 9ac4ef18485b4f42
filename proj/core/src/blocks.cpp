#include "nilflow/blocks.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace nilflow::blocks {

using hardy::Exponent;
using hardy::HardyExpr;

double BlockLen::eval(double t) const {
  const double th = theta.value(64).convert_to<double>();
  const double le = numerator(logexp).convert_to<double>() /
                    denominator(logexp).convert_to<double>();
  return std::pow(t, th) * std::pow(std::log(t), le);
}

std::string BlockLen::to_string() const {
  std::ostringstream os;
  os << "t^" << theta.to_string();
  if (logexp != 0) os << " * log(t)^(" << logexp << ")";
  return os.str();
}

namespace {

struct GrowthKey {
  Exponent gamma;
  Rational logexp;
};

GrowthKey leading_key(const HardyExpr& e) {
  const auto& t = e.terms().front();
  return {t.gamma, Rational(t.logpow)};
}

// sign of (gamma, logexp) against (0, 0), lexicographic
int key_sign(const GrowthKey& k) {
  const int c = Exponent::compare(k.gamma, Exponent(0));
  if (c != 0) return c;
  if (k.logexp == 0) return 0;
  return k.logexp > 0 ? 1 : -1;
}

double abs_eval(const HardyExpr& e, double t, unsigned bits) {
  return std::abs(
      hardy::eval(e, real_from(t, bits), bits).value.convert_to<double>());
}

}  // namespace

BlockLen select_block_length(const HardyExpr& a, int m) {
  if (m < 1) throw Error("select_block_length: m must be >= 1");
  const HardyExpr am = hardy::derivative(a, static_cast<unsigned>(m));
  const HardyExpr am1 = hardy::derivative(a, static_cast<unsigned>(m) + 1);
  if (am.is_zero() || am1.is_zero())
    throw NoFeasibleBlockLength("derivative of order " + std::to_string(m) +
                                " or " + std::to_string(m + 1) + " vanishes");

  // numeric sanity at three scales: |a^(m+1)| decreasing, t^-m << a^(m) << 1
  const double ts[3] = {1e4, 1e6, 1e8};
  double prev1 = -1.0, prev_scaled = -1.0;
  for (int i = 0; i < 3; ++i) {
    const double v1 = abs_eval(am1, ts[i], 96);
    const double vm = abs_eval(am, ts[i], 96);
    const double scaled = vm * std::pow(ts[i], m);
    if (i > 0 && (v1 > prev1 || scaled < prev_scaled))
      throw NoFeasibleBlockLength("block-length hypotheses fail numerically for " +
                                  a.to_string());
    if (vm >= 1.0 && i == 2)
      throw NoFeasibleBlockLength("a^(m) does not decay for " + a.to_string());
    prev1 = v1;
    prev_scaled = scaled;
  }

  const GrowthKey km = leading_key(am);
  const GrowthKey km1 = leading_key(am1);

  // theta bounds: m*theta + gamma_m > 0 and (m+1)*theta + gamma_{m+1} < 0
  Exponent lo = km.gamma.scaled(Rational(-1, m));
  Exponent hi = km1.gamma.scaled(Rational(-1, m + 1));
  const Exponent zero(0), one(1);
  if (Exponent::compare(lo, zero) < 0) lo = zero;
  if (Exponent::compare(hi, one) > 0) hi = one;

  const int rel = Exponent::compare(lo, hi);
  if (rel > 0)
    throw NoFeasibleBlockLength("empty feasible exponent interval for " +
                                a.to_string());

  BlockLen out;
  if (rel < 0) {
    out.theta = lo.plus(hi).scaled(Rational(1, 2));
    out.logexp = 0;
  } else {
    // gamma-degenerate interval: pick the log-power from the e-constraints
    out.theta = lo;
    Rational s_lo = -km.logexp / m;
    Rational s_hi = -km1.logexp / (m + 1);
    if (Exponent::compare(out.theta, one) == 0) s_hi = std::min(s_hi, Rational(0));
    if (Exponent::compare(out.theta, zero) == 0) s_lo = std::max(s_lo, Rational(0));
    if (!(s_lo < s_hi))
      throw NoFeasibleBlockLength("degenerate feasible interval for " + a.to_string());
    out.logexp = (s_lo + s_hi) / 2;
  }

  // certificates, exactly as growth comparisons
  auto certify = [&](int mult, const GrowthKey& k, int want) {
    GrowthKey total{out.theta.scaled(Rational(mult)).plus(k.gamma),
                    Rational(mult) * out.logexp + k.logexp};
    if (key_sign(total) != want)
      throw NoFeasibleBlockLength("certificate failed for " + a.to_string());
  };
  certify(m, km, 1);        // l^m a^(m) >> 1
  certify(m + 1, km1, -1);  // l^(m+1) a^(m+1) << 1
  GrowthKey lt{out.theta.plus(Rational(-1)), out.logexp};
  if (key_sign(lt) >= 0) throw NoFeasibleBlockLength("l must grow slower than t");
  return out;
}

TaylorBlock taylor_block(const HardyExpr& a, long N, int m, long L, unsigned bits) {
  if (N < 2) throw Error("taylor_block: N must be >= 2");
  TaylorBlock tb;
  tb.base = N;
  tb.degree = m;
  tb.len = L;
  const Real tN = real_from(N, bits);
  std::vector<Real> monomial;
  BigInt fact = 1;
  HardyExpr d = a;
  for (int i = 0; i <= m; ++i) {
    if (i > 0) {
      d = hardy::derivative(d, 1);
      fact *= i;
    }
    const Real v = hardy::eval(d, tN, bits).value;
    monomial.push_back(v / real_from(fact, bits));
  }
  tb.poly = equidist::polyseq_from_monomial(monomial);
  const HardyExpr dm1 = hardy::derivative(d, 1);
  if (dm1.is_zero()) {
    tb.remainder_bound = 0.0;  // exact polynomial
  } else {
    fact *= (m + 1);
    const Real r = abs(hardy::eval(dm1, tN, bits).value) *
                   pow(real_from(L, bits), m + 1) / real_from(fact, bits);
    tb.remainder_bound = r.convert_to<double>();
  }
  return tb;
}

BlockSchedule cover(long n_start, long n_end, const BlockLen& l) {
  if (n_start < 2) throw Error("cover: range must start at n >= 2");
  if (n_end < n_start) throw Error("cover: empty range");
  BlockSchedule s;
  long k = n_start;
  while (k <= n_end) {
    const long len = std::max<long>(
        1, static_cast<long>(std::floor(l.eval(static_cast<double>(k)))));
    const long last = std::min(n_end, k + len);
    s.blocks.emplace_back(k, last);
    k = last + 1;
  }
  return s;
}

BlockPipelineResult block_pipeline(const HardyExpr& a, long kappa, long n_end, int m,
                                   unsigned bits, long scan_bound, long n_start) {
  if (kappa == 0) throw Error("block_pipeline: kappa must be non-zero");
  BlockPipelineResult out;
  out.degree = m;
  bool exact_poly = false;
  try {
    out.length = select_block_length(a, m);
  } catch (const NoFeasibleBlockLength&) {
    if (hardy::derivative(a, static_cast<unsigned>(m) + 1).is_zero()) {
      // polynomial inputs, blocks are exact; any sub-linear length works
      exact_poly = true;
      out.length = BlockLen{Exponent(Rational(1, 2)), Rational(0)};
    } else {
      throw;
    }
  }
  (void)exact_poly;

  const BlockSchedule sched = cover(n_start, n_end, out.length);

  // exact evaluations over the full range, one fractional part per n
  const std::size_t total = static_cast<std::size_t>(n_end - n_start + 1);
  std::vector<std::complex<double>> vals(total);
  double phase_err = 0.0;
  for (std::size_t i = 0; i < total; ++i) {
    const long n = n_start + static_cast<long>(i);
    const auto r = hardy::eval(a, real_from(n, bits), bits);
    vals[i] = unit_e(real_from(kappa, bits) * r.value);
    phase_err += std::abs(kappa) * r.abs_error.convert_to<double>();
  }

  std::vector<std::complex<double>> block_sums;
  block_sums.reserve(sched.blocks.size());
  for (const auto& [b0, b1] : sched.blocks) {
    const long L = b1 - b0;
    TaylorBlock tb = taylor_block(a, b0, m, std::max<long>(L, 1), bits);
    BlockRow row;
    row.base = b0;
    row.len = L;
    row.remainder_bound = tb.remainder_bound;

    const std::size_t off = static_cast<std::size_t>(b0 - n_start);
    const std::span<const std::complex<double>> chunk(vals.data() + off,
                                                      static_cast<std::size_t>(L) + 1);
    const std::complex<double> bsum = pairwise_sum(chunk);
    block_sums.push_back(bsum);
    row.weyl_modulus = std::abs(bsum) / static_cast<double>(L + 1);

    std::vector<std::complex<double>> pvals(static_cast<std::size_t>(L) + 1);
    for (long n = 0; n <= L; ++n)
      pvals[static_cast<std::size_t>(n)] =
          unit_e(real_from(kappa, bits) * tb.poly.eval(BigInt(n)));
    row.poly_modulus =
        std::abs(pairwise_sum(std::span<const std::complex<double>>(pvals))) /
        static_cast<double>(L + 1);

    const PolySeq scaled = equidist::polyseq_scale_int(tb.poly, kappa);
    row.witness = equidist::obstruction_scan(std::span<const PolySeq>(&scaled, 1),
                                             std::max<long>(L, 1), scan_bound);
    out.rows.push_back(std::move(row));
  }

  out.aggregate = pairwise_sum(std::span<const std::complex<double>>(block_sums)) /
                  static_cast<double>(total);
  out.direct = pairwise_sum(std::span<const std::complex<double>>(vals)) /
               static_cast<double>(total);
  // 2 pi * phase error per term, plus double-rounding slack for the two sums
  out.error_bound = 2.0 * 3.14159265358979323846 * phase_err /
                        static_cast<double>(total) +
                    1e-12;
  const auto& last = sched.blocks.back();
  const double lval = out.length.eval(static_cast<double>(last.first));
  if (last.second - last.first < static_cast<long>(lval))
    out.truncated_tail_weight =
        static_cast<double>(last.second - last.first + 1) / static_cast<double>(total);
  return out;
}

RBlockResult r_block_scalar(const HardyExpr& a, long R, long N, double eps,
                            unsigned bits) {
  if (R < 1) throw Error("r_block_scalar: R must be >= 1");
  RBlockResult out;
  out.eps = eps;
  const HardyExpr da = hardy::derivative(a, 1);
  const long n0 = (R >= 2) ? 1 : 2;  // keep every evaluation point at t >= 2
  std::vector<double> moduli(static_cast<std::size_t>(N - n0 + 1));
  std::vector<std::complex<double>> means(static_cast<std::size_t>(N - n0 + 1));
  long n_small = 0;
  double acc_small = 0.0, acc_large = 0.0;
  for (long n = n0; n <= N; ++n) {
    const Real t = real_from(R * n, bits);
    const Real base = hardy::eval(a, t, bits).value;
    const Real slope = hardy::eval(da, t, bits).value;
    const double slope_frac = frac(slope).convert_to<double>();
    std::complex<double> acc{0.0, 0.0};
    for (long r = 1; r <= R; ++r)
      acc += unit_e(static_cast<double>(r) * slope_frac);
    acc /= static_cast<double>(R);
    const std::complex<double> A = unit_e(base) * acc;
    means[static_cast<std::size_t>(n - n0)] = A;
    const double mod = std::abs(A);
    moduli[static_cast<std::size_t>(n - n0)] = mod;
    const double dist = std::min(slope_frac, 1.0 - slope_frac);
    if (dist <= eps) {
      ++n_small;
      acc_small += mod;
    } else {
      acc_large += mod;
    }
  }
  const double count = static_cast<double>(N - n0 + 1);
  out.mean_modulus = pairwise_sum(std::span<const double>(moduli)) / count;
  out.mean = pairwise_sum(std::span<const std::complex<double>>(means)) / count;
  out.mass_small = static_cast<double>(n_small) / count;
  out.sum_small = acc_small / count;
  out.sum_large = acc_large / count;
  return out;
}

RBlockResult r_block_orbit(std::span<const hardy::HardyExpr> seqs,
                           std::span<const equidist::UnipotentElement> bs,
                           const equidist::TestFunction& F, long R, long N,
                           double eps, unsigned bits) {
  if (seqs.size() != bs.size() || seqs.empty())
    throw DimensionMismatch("r_block_orbit: sequence/group mismatch");
  RBlockResult out;
  out.eps = eps;
  const std::size_t ell = seqs.size();

  std::vector<int> degree(ell);
  std::vector<std::vector<hardy::HardyExpr>> derivs(ell);
  int total_dim = 0;
  std::vector<nilgroup::LieElement> logs;
  for (std::size_t i = 0; i < ell; ++i) {
    degree[i] = static_cast<int>(hardy::classify_type(seqs[i]).k);
    for (int j = 0; j <= degree[i]; ++j)
      derivs[i].push_back(hardy::derivative(seqs[i], static_cast<unsigned>(j)));
    logs.push_back(nilgroup::log_map(bs[i]));
    total_dim += bs[i].dim() * (bs[i].dim() - 1) / 2;
  }
  const hardy::HardyExpr da0 = hardy::derivative(seqs[0], 1);

  std::vector<double> moduli(static_cast<std::size_t>(N));
  std::vector<std::complex<double>> means(static_cast<std::size_t>(N));
  long n_small = 0;
  double acc_small = 0.0, acc_large = 0.0;
  std::vector<double> x(static_cast<std::size_t>(total_dim));
  for (long n = 1; n <= N; ++n) {
    const Real t = real_from(R * n, bits);
    // Taylor coefficients per component
    std::vector<std::vector<Real>> coeff(ell);
    for (std::size_t i = 0; i < ell; ++i) {
      BigInt fact = 1;
      for (int j = 0; j <= degree[i]; ++j) {
        if (j > 0) fact *= j;
        coeff[i].push_back(hardy::eval(derivs[i][static_cast<std::size_t>(j)], t, bits)
                               .value /
                           real_from(fact, bits));
      }
    }
    std::complex<double> acc{0.0, 0.0};
    for (long r = 1; r <= R; ++r) {
      std::size_t off = 0;
      for (std::size_t i = 0; i < ell; ++i) {
        Real p = real_from(0L, bits);
        const Real rr = real_from(r, bits);
        for (auto it = coeff[i].rbegin(); it != coeff[i].rend(); ++it)
          p = p * rr + *it;
        nilgroup::LieElement sx(bs[i].dim(), bits);
        for (int a2 = 0; a2 < bs[i].dim(); ++a2)
          for (int b2 = a2 + 1; b2 < bs[i].dim(); ++b2)
            sx.at(a2, b2) = p * logs[i].at(a2, b2);
        const auto pt = nilgroup::reduce(nilgroup::exp_map(sx)).point.coords_d();
        std::copy(pt.begin(), pt.end(), x.begin() + static_cast<std::ptrdiff_t>(off));
        off += pt.size();
      }
      acc += F.f(x);
    }
    acc /= static_cast<double>(R);
    means[static_cast<std::size_t>(n - 1)] = acc;
    const double mod = std::abs(acc);
    moduli[static_cast<std::size_t>(n - 1)] = mod;
    const double dist =
        dist_to_int(hardy::eval(da0, t, bits).value).convert_to<double>();
    if (dist <= eps) {
      ++n_small;
      acc_small += mod;
    } else {
      acc_large += mod;
    }
  }
  out.mean_modulus =
      pairwise_sum(std::span<const double>(moduli)) / static_cast<double>(N);
  out.mean = pairwise_sum(std::span<const std::complex<double>>(means)) /
             static_cast<double>(N);
  out.mass_small = static_cast<double>(n_small) / static_cast<double>(N);
  out.sum_small = acc_small / static_cast<double>(N);
  out.sum_large = acc_large / static_cast<double>(N);
  return out;
}

}  // namespace nilflow::blocks
