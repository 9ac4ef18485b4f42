// Measures every quantity a shipped threshold is pinned to and prints one
// line per measurement. Re-run after any numerical change and compare with
// docs/pilot_results.csv before touching a threshold.

#include <cstdio>
#include <string>

#include "nilflow/blocks.hpp"
#include "nilflow/equidist.hpp"
#include "nilflow/hardy.hpp"
#include "nilflow/lab.hpp"
#include "nilflow/randomseq.hpp"

using namespace nilflow;

namespace {

void row(const std::string& name, double value) {
  std::printf("%s,%.6g\n", name.c_str(), value);
}

equidist::TorusPoints frac_stream(const hardy::HardyExpr& a, long N, unsigned bits) {
  equidist::TorusPoints pts;
  pts.dim = 1;
  pts.flat.resize(static_cast<std::size_t>(N));
  for (long i = 0; i < N; ++i) {
    const auto r = hardy::eval(a, real_from(i + 2, bits), bits);
    pts.flat[static_cast<std::size_t>(i)] = frac(r.value).convert_to<double>();
  }
  return pts;
}

nilgroup::UnipotentElement heis_sqrt23(unsigned bits) {
  return nilgroup::UnipotentElement::heisenberg(
      sqrt(real_from(2, bits)), sqrt(real_from(3, bits)), real_from(0L, bits), bits);
}

}  // namespace

int main() {
  std::printf("measurement,value\n");

  // T:Bos desk scale: star discrepancies
  for (const char* txt : {"t^1.5", "t*log(t)", "sqrt2*t^2 + t^0.5", "log(t)"}) {
    const auto a = hardy::parse_hardy(txt);
    for (long N : {1000L, 10000L, 100000L}) {
      auto pts = frac_stream(a, N, 192);
      row(std::string("dstar[") + txt + "]@" + std::to_string(N),
          equidist::star_discrepancy_1d(std::move(pts.flat)));
    }
  }

  // block pipeline for n log n
  {
    const auto a = hardy::parse_hardy("t*log(t)");
    for (long N : {10000L, 100000L}) {
      const auto res = blocks::block_pipeline(a, 1, N, 2, 192, 10);
      row("blocks[nlogn]-aggregate@" + std::to_string(N), std::abs(res.aggregate));
      row("blocks[nlogn]-agg_direct_diff@" + std::to_string(N),
          std::abs(res.aggregate - res.direct));
      row("blocks[nlogn]-error_bound@" + std::to_string(N), res.error_bound);
      double mx = 0, mx_tail = 0;
      for (const auto& r : res.rows) {
        mx = std::max(mx, r.weyl_modulus);
        if (r.base >= 10000) mx_tail = std::max(mx_tail, r.weyl_modulus);
      }
      row("blocks[nlogn]-max_block@" + std::to_string(N), mx);
      if (N == 100000) row("blocks[nlogn]-max_block_base_ge_1e4", mx_tail);
    }
  }

  // orbit averages along [n^{3/2}] on the Heisenberg nilmanifold
  {
    const auto a = hardy::parse_hardy("t^1.5");
    const auto seq = equidist::hardy_int_sequence(a, "t^1.5", 2, 100000, 192);
    const auto b = heis_sqrt23(192);
    nilgroup::NilPoint x0{3, {real_from(0L, 192), real_from(0L, 192), real_from(0L, 192)}};
    equidist::OrbitOptions oopt;
    oopt.bits = 192;
    for (const auto& chi :
         {equidist::HorizontalCharacter{{1, 0}}, equidist::HorizontalCharacter{{0, 1}},
          equidist::HorizontalCharacter{{1, 1}}}) {
      const auto F = equidist::character_function(chi, 3);
      const auto r = equidist::orbit_average(b, x0, seq, F, oopt);
      row("orbit_gap[n^{3/2}]" + F.name, r.gap);
    }
    const auto Fb = equidist::coordinate_bump(2, 3);
    const auto rb = equidist::orbit_average(b, x0, seq, Fb, oopt);
    row("orbit_gap[n^{3/2}]bump", rb.gap);
  }

  // joint orbit along ([n^{3/2}], [n^{5/2}])
  {
    const auto b = heis_sqrt23(256);
    nilgroup::NilPoint x0{3, {real_from(0L, 256), real_from(0L, 256), real_from(0L, 256)}};
    const auto s1 = equidist::hardy_int_sequence(hardy::parse_hardy("t^1.5"), "t^1.5",
                                                 2, 100000, 192);
    const auto s2 = equidist::hardy_int_sequence(hardy::parse_hardy("t^2.5"), "t^2.5",
                                                 2, 100000, 256);
    lab::TestFunctionSpec tf;
    tf.type = "character";
    tf.kappa = {{1, 0}, {0, 1}};
    const auto F = tf.build(2, 3);
    const nilgroup::UnipotentElement bs[2] = {b, b};
    const nilgroup::NilPoint xs[2] = {x0, x0};
    const equidist::IntSequence seqs[2] = {s1, s2};
    equidist::OrbitOptions oopt;
    oopt.bits = 256;
    const auto r = equidist::joint_orbit_average(bs, xs, seqs, F, oopt);
    row("joint_gap[n32,n52]", r.gap);
  }

  // torus application: [n^{3/2}]^2 sqrt2
  {
    const auto a = hardy::parse_hardy("t^1.5");
    const long N = 100000;
    std::vector<double> xs(static_cast<std::size_t>(N));
    const Real s2 = sqrt(real_from(2, 224));
    for (long i = 0; i < N; ++i) {
      const BigInt m = hardy::floor_eval(a, i + 2, 192);
      xs[static_cast<std::size_t>(i)] =
          frac(real_from(BigInt(m * m), 224) * s2).convert_to<double>();
    }
    row("dstar[app1_n32_sq_sqrt2]@100000", equidist::star_discrepancy_1d(std::move(xs)));
  }

  // random sparse sequences, sigma = n^{-1/2}
  {
    const auto spec = randomseq::SigmaSpec::power(Rational(1, 2));
    const auto b = heis_sqrt23(192);
    nilgroup::NilPoint x0{3, {real_from(0L, 192), real_from(0L, 192), real_from(0L, 192)}};
    const auto F = equidist::character_function(equidist::HorizontalCharacter{{1, 0}}, 3);
    const auto Fb = equidist::coordinate_bump(2, 3);
    const long N = 100000;
    const std::int64_t horizon = 52000000;
    for (int s = 0; s < 20; ++s) {
      const auto smpl = randomseq::sample(spec, 1000 + s, horizon);
      if (smpl.kept.size() >= 10000)
        row("random-growth_ratio seed" + std::to_string(s),
            static_cast<double>(smpl.kept[9999]) / 1e8);
      row("random-strong_law seed" + std::to_string(s),
          static_cast<double>(smpl.count_upto(N)) / randomseq::weight(spec, N));
      const auto cmp = randomseq::compare_averages(smpl, b, x0, F, N, {});
      row("random-sparse_full_gap[char] seed" + std::to_string(s), cmp.gap);
      const auto cmpb = randomseq::compare_averages(smpl, b, x0, Fb, N, {});
      row("random-sparse_full_gap[bump] seed" + std::to_string(s), cmpb.gap);
    }
    randomseq::SigmaSpec half;
    half.form = randomseq::SigmaSpec::Form::Table;
    half.table = {0.5};
    const auto mom = randomseq::moment_estimate(
        half, [](std::int64_t) { return 1.0; }, 10000, 500, 7);
    row("moment[const_half]@1e4", mom.value);
    row("moment_ref[const_half]@1e4", mom.reference);
  }

  // r-block diagnostic for n log n
  {
    const auto r = blocks::r_block_scalar(hardy::parse_hardy("t*log(t)"), 64, 10000,
                                          0.05, 128);
    row("rblock[nlogn]-mean_modulus", r.mean_modulus);
    row("rblock[nlogn]-bound_2e+1_2Re", 2 * 0.05 + 1.0 / (2 * 64 * 0.05));
  }
  return 0;
}
