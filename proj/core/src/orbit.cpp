#include <algorithm>
#include <cmath>

#include "nilflow/equidist.hpp"

namespace nilflow::equidist {

IntSequence hardy_int_sequence(const hardy::HardyExpr& a, std::string id, long first_n,
                               std::size_t count, unsigned bits) {
  IntSequence s;
  s.id = std::move(id);
  s.first_n = first_n;
  s.values.resize(count);
  for (std::size_t i = 0; i < count; ++i) {
    const BigInt v = hardy::floor_eval(a, first_n + static_cast<long>(i), bits);
    s.values[i] = v.convert_to<std::int64_t>();
  }
  return s;
}

IntSequence identity_sequence(long first_n, std::size_t count) {
  IntSequence s;
  s.id = "n";
  s.first_n = first_n;
  s.values.resize(count);
  for (std::size_t i = 0; i < count; ++i)
    s.values[i] = first_n + static_cast<std::int64_t>(i);
  return s;
}

namespace {

UnipotentElement recarry(const UnipotentElement& b, unsigned bits) {
  UnipotentElement out(b.dim(), bits);
  for (int i = 0; i < b.dim(); ++i)
    for (int j = i + 1; j < b.dim(); ++j) {
      Real v = real_carrier(bits);
      v = b.at(i, j);
      out.at(i, j) = v;
    }
  return out;
}

}  // namespace

OrbitCoords nil_orbit(const UnipotentElement& b, const NilPoint& x0,
                      const IntSequence& seq, const OrbitOptions& opt) {
  std::int64_t max_m = 2;
  for (auto v : seq.values) max_m = std::max(max_m, std::abs(v));
  const unsigned bits = opt.bits ? opt.bits : policy_bits(b.dim(), max_m);

  const UnipotentElement bw = b.bits() < bits ? recarry(b, bits) : b;
  const nilgroup::PolyMatrix poly = nilgroup::pow_poly(bw);
  const UnipotentElement g0 = nilgroup::embed(x0, bits);
  bool x0_origin = true;
  for (const auto& c : x0.coords) x0_origin = x0_origin && c == 0;

  const int dim = b.dim() * (b.dim() - 1) / 2;
  OrbitCoords out;
  out.points.dim = dim;
  out.points.flat.assign(seq.values.size() * static_cast<std::size_t>(dim), 0.0);
  out.bits_used = bits;

  // per-point computation with bounded precision escalation on guard hits
  auto point_at = [&](std::int64_t m, std::size_t* esc) {
    unsigned bt = bits;
    for (int attempt = 0;; ++attempt) {
      try {
        const UnipotentElement bm = attempt == 0
                                        ? poly.eval_int(BigInt(m))
                                        : nilgroup::pow_poly(recarry(bw, bt))
                                              .eval_int(BigInt(m));
        const UnipotentElement g = x0_origin ? bm : nilgroup::mul(bm, g0);
        return nilgroup::reduce(g).point.coords_d();
      } catch (const PrecisionExhausted&) {
        if (attempt >= 4) throw;
        bt *= 2;
        if (esc) ++*esc;
      }
    }
  };

  std::vector<std::size_t> esc(seq.values.size(), 0);
  parallel_for(seq.values.size(), opt.threads, [&](std::size_t i) {
    const auto coords = point_at(seq.values[i], &esc[i]);
    std::copy(coords.begin(), coords.end(),
              out.points.flat.begin() + static_cast<std::ptrdiff_t>(
                                            i * static_cast<std::size_t>(dim)));
  });
  for (auto e : esc) out.escalations += e;
  return out;
}

OrbitAverage orbit_average(const UnipotentElement& b, const NilPoint& x0,
                           const IntSequence& seq, const TestFunction& F,
                           const OrbitOptions& opt) {
  const OrbitCoords oc = nil_orbit(b, x0, seq, opt);
  const std::size_t n = oc.points.count();
  std::vector<std::complex<double>> vals(n);
  for (std::size_t i = 0; i < n; ++i) vals[i] = F.f(oc.points.row(i));
  OrbitAverage out;
  out.value = pairwise_sum(std::span<const std::complex<double>>(vals)) /
              static_cast<double>(n);
  const HaarEstimate h =
      nilgroup::haar_average(oc.points.dim, F, opt.haar_samples, opt.haar_seed);
  out.haar = h.value;
  out.haar_std_error = h.std_error;
  out.gap = std::abs(out.value - out.haar);
  out.escalations = oc.escalations;
  return out;
}

OrbitAverage joint_orbit_average(std::span<const UnipotentElement> bs,
                                 std::span<const NilPoint> x0s,
                                 std::span<const IntSequence> seqs,
                                 const TestFunction& F, const OrbitOptions& opt) {
  if (bs.size() != x0s.size() || bs.size() != seqs.size() || bs.empty())
    throw DimensionMismatch("joint_orbit_average: list length mismatch");
  std::size_t n = seqs[0].values.size();
  for (const auto& s : seqs) n = std::min(n, s.values.size());

  std::vector<OrbitCoords> comps;
  int total_dim = 0;
  for (std::size_t c = 0; c < bs.size(); ++c) {
    comps.push_back(nil_orbit(bs[c], x0s[c], seqs[c], opt));
    total_dim += comps.back().points.dim;
  }
  std::vector<std::complex<double>> vals(n);
  std::vector<double> x(static_cast<std::size_t>(total_dim));
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t off = 0;
    for (const auto& cc : comps) {
      const auto row = cc.points.row(i);
      std::copy(row.begin(), row.end(), x.begin() + static_cast<std::ptrdiff_t>(off));
      off += row.size();
    }
    vals[i] = F.f(x);
  }
  OrbitAverage out;
  out.value = pairwise_sum(std::span<const std::complex<double>>(vals)) /
              static_cast<double>(n);
  const HaarEstimate h =
      nilgroup::haar_average(total_dim, F, opt.haar_samples, opt.haar_seed);
  out.haar = h.value;
  out.haar_std_error = h.std_error;
  out.gap = std::abs(out.value - out.haar);
  for (const auto& cc : comps) out.escalations += cc.escalations;
  return out;
}

}  // namespace nilflow::equidist
