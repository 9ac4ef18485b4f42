#include <cmath>

#include "doctest.h"
#include "nilflow/equidist.hpp"
#include "nilflow/philox.hpp"

using namespace nilflow;
using namespace nilflow::equidist;

namespace {

TorusPoints points_1d(std::vector<double> xs) {
  TorusPoints p;
  p.dim = 1;
  p.flat = std::move(xs);
  return p;
}

std::vector<double> kron_sqrt2(std::size_t n) {
  const Real s2 = sqrt(real_from(2, 128));
  std::vector<double> xs(n);
  for (std::size_t i = 0; i < n; ++i)
    xs[i] = frac(real_from(static_cast<long>(i) + 1, 128) * s2).convert_to<double>();
  return xs;
}

// O(N^2) reference: max empirical-vs-length defect over intervals anchored at
// the points themselves
double star_discrepancy_brute(std::vector<double> xs) {
  std::sort(xs.begin(), xs.end());
  const double n = static_cast<double>(xs.size());
  double worst = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double below = static_cast<double>(i);      // strictly left of xs[i]
    const double upto = static_cast<double>(i + 1);   // including xs[i]
    worst = std::max(worst, std::abs(upto / n - xs[i]));
    worst = std::max(worst, std::abs(xs[i] - below / n));
  }
  return worst;
}

}  // namespace

TEST_CASE("weyl_sum closed cases") {
  // x_n = n/2, kappa = 2: e(2 x_n) = 1 for all n
  std::vector<double> xs;
  for (int n = 1; n <= 100; ++n) xs.push_back(0.5 * n - std::floor(0.5 * n));
  const long two[1] = {2};
  CHECK(std::abs(weyl_sum(points_1d(xs), two) - std::complex<double>(1, 0)) < 1e-12);
  // kappa = 1, even count: alternating +-1 cancels
  const long one[1] = {1};
  CHECK(std::abs(weyl_sum(points_1d(xs), one)) < 1e-12);

  const long zero[1] = {0};
  CHECK_THROWS(weyl_sum(points_1d(xs), zero));
}

TEST_CASE("weyl_sum of {n sqrt2} matches a 128-bit direct oracle") {
  const auto xs = kron_sqrt2(1000);
  const long one[1] = {1};
  const auto got = weyl_sum(points_1d(xs), one);
  // independent summation in high precision
  const Real s2 = sqrt(real_from(2, 128));
  Real re = real_from(0, 128), im = real_from(0, 128);
  for (long n = 1; n <= 1000; ++n) {
    Real ang = 2 * real_from(3.14159265358979323846, 128) * frac(n * s2);
    re += cos(ang);
    im += sin(ang);
  }
  const std::complex<double> oracle(re.convert_to<double>() / 1000,
                                    im.convert_to<double>() / 1000);
  CHECK(std::abs(got - oracle) < 1e-9);
  CHECK(std::abs(got) <= 0.05);
}

TEST_CASE("weyl_sum modulus never exceeds one") {
  for (std::uint64_t s = 0; s < 20; ++s) {
    std::vector<double> xs(200);
    for (std::size_t i = 0; i < xs.size(); ++i) xs[i] = Philox::u01(s, i);
    const long k[1] = {static_cast<long>(1 + s % 5)};
    CHECK(std::abs(weyl_sum(points_1d(xs), k)) <= 1.0 + 1e-12);
  }
}

TEST_CASE("star discrepancy exact cases") {
  std::vector<double> eq;
  for (int i = 0; i < 50; ++i) eq.push_back(i / 50.0);
  CHECK(star_discrepancy_1d(eq) == doctest::Approx(1.0 / 50));
  CHECK(star_discrepancy_1d({0.0}) == doctest::Approx(1.0));
}

TEST_CASE("star discrepancy agrees with the brute-force scan") {
  auto xs = kron_sqrt2(100);
  CHECK(star_discrepancy_1d(xs) == doctest::Approx(star_discrepancy_brute(xs)));
  for (std::uint64_t s = 0; s < 25; ++s) {
    std::vector<double> r(3 + s * 7 % 198);
    for (std::size_t i = 0; i < r.size(); ++i) r[i] = Philox::u01(900 + s, i);
    CHECK(star_discrepancy_1d(r) == doctest::Approx(star_discrepancy_brute(r)));
  }
}

TEST_CASE("star discrepancy of {n sqrt2} shrinks from 1e3 to 1e5") {
  const double d3 = star_discrepancy_1d(kron_sqrt2(1000));
  const double d5 = star_discrepancy_1d(kron_sqrt2(100000));
  CHECK(d5 < d3);
}

TEST_CASE("l2 star discrepancy: one point at the origin") {
  // direct integral of (Aamount - vol)^2 over anchored boxes: 1/3
  const double v = l2_star_discrepancy(points_1d({0.0}));
  CHECK(v == doctest::Approx(std::sqrt(1.0 / 3.0)));
}

TEST_CASE("l2 star discrepancy against a box-counting grid estimate") {
  // 2-d Kronecker stream
  TorusPoints p;
  p.dim = 2;
  const std::size_t N = 512;
  const Real s2 = sqrt(real_from(2, 128)), s3 = sqrt(real_from(3, 128));
  for (std::size_t i = 1; i <= N; ++i) {
    p.flat.push_back(frac(real_from(static_cast<long>(i), 128) * s2).convert_to<double>());
    p.flat.push_back(frac(real_from(static_cast<long>(i), 128) * s3).convert_to<double>());
  }
  const double warnock = l2_star_discrepancy(p);
  // independent route: average the squared box defect over a corner grid
  const int G = 128;
  double acc = 0.0;
  for (int a = 1; a <= G; ++a) {
    for (int b = 1; b <= G; ++b) {
      const double xa = a / static_cast<double>(G);
      const double yb = b / static_cast<double>(G);
      std::size_t cnt = 0;
      for (std::size_t i = 0; i < N; ++i)
        if (p.row(i)[0] < xa && p.row(i)[1] < yb) ++cnt;
      const double defect = cnt / static_cast<double>(N) - xa * yb;
      acc += defect * defect;
    }
  }
  const double grid = std::sqrt(acc / (G * G));
  CHECK(warnock == doctest::Approx(grid).epsilon(0.08));
  // clustering all points maximizes the discrepancy among these configurations
  TorusPoints clustered;
  clustered.dim = 2;
  for (std::size_t i = 0; i < N; ++i) {
    clustered.flat.push_back(0.0);
    clustered.flat.push_back(0.0);
  }
  CHECK(l2_star_discrepancy(clustered) > warnock);
}

TEST_CASE("cinf_norm matches the binomial-basis formula") {
  PolySeq p1;
  p1.alpha = {real_from(0, 128), real_from(0.5, 128)};
  CHECK(cinf_norm(p1, 10) == doctest::Approx(5.0));
  PolySeq p2;
  p2.alpha = {real_from(0, 128), real_from(1.0, 128)};
  CHECK(cinf_norm(p2, 10) == doctest::Approx(0.0));
  PolySeq p3;
  p3.alpha = {real_from(0, 128), real_from(0, 128), real_from(Rational(1, 3), 128)};
  CHECK(cinf_norm(p3, 4) == doctest::Approx(16.0 / 3));
  // alpha_0 never contributes
  PolySeq p4;
  p4.alpha = {real_from(0.49, 128), real_from(1.0, 128)};
  CHECK(cinf_norm(p4, 7) == doctest::Approx(0.0));
  // the i-term maximization picks the largest N^i ||alpha_i||
  PolySeq p5;
  p5.alpha = {real_from(0, 128), real_from(0.25, 128), real_from(0.001, 128)};
  CHECK(cinf_norm(p5, 10) == doctest::Approx(std::max(10 * 0.25, 100 * 0.001)));
}

TEST_CASE("polyseq binomial conversion and evaluation") {
  // n^2 = 2 binom(n,2) + binom(n,1)
  std::vector<Real> mono = {real_from(0, 128), real_from(0, 128), real_from(1, 128)};
  const PolySeq p = polyseq_from_monomial(mono);
  REQUIRE(p.alpha.size() == 3);
  CHECK(p.alpha[1].convert_to<double>() == doctest::Approx(1.0));
  CHECK(p.alpha[2].convert_to<double>() == doctest::Approx(2.0));
  for (long n : {0L, 1L, 5L, 23L})
    CHECK(p.eval(BigInt(n)).convert_to<double>() ==
          doctest::Approx(static_cast<double>(n * n)));
}

namespace {

// independent double-loop scan used as the obstruction oracle
std::optional<std::pair<std::vector<long>, double>> scan_brute(
    std::span<const PolySeq> p, long N, long M) {
  std::optional<std::pair<std::vector<long>, double>> best;
  const int m = static_cast<int>(p.size());
  std::vector<long> k(static_cast<std::size_t>(m), -M);
  for (;;) {
    bool nontrivial = false;
    for (long v : k) nontrivial = nontrivial || v != 0;
    if (nontrivial) {
      PolySeq combo;
      for (int j = 0; j < m; ++j)
        combo = polyseq_add(combo, polyseq_scale_int(p[static_cast<std::size_t>(j)],
                                                     k[static_cast<std::size_t>(j)]));
      double v = 0.0;
      if (combo.degree() >= 1) {
        double npow = 1.0;
        for (int i = 1; i <= combo.degree(); ++i) {
          npow *= static_cast<double>(N);
          v = std::max(v, npow * dist_to_int(combo.alpha[static_cast<std::size_t>(i)])
                                   .convert_to<double>());
        }
      }
      if (!best || v < best->second) best = {{k.begin(), k.end()}, v};
    }
    int pos = m - 1;
    while (pos >= 0) {
      if (++k[static_cast<std::size_t>(pos)] <= M) break;
      k[static_cast<std::size_t>(pos)] = -M;
      --pos;
    }
    if (pos < 0) break;
  }
  if (best && best->second <= static_cast<double>(M)) return best;
  return std::nullopt;
}

}  // namespace

TEST_CASE("obstruction scan: rational frequency is caught, sqrt2 is clean") {
  // p(n) = n/2: kappa = 2 gives an integer polynomial, norm 0
  PolySeq half;
  half.alpha = {real_from(0, 192), real_from(Rational(1, 2), 192)};
  const auto hit = obstruction_scan(std::span<const PolySeq>(&half, 1), 100, 5);
  REQUIRE(hit.has_value());
  CHECK(std::abs(hit->chi.kappa[0]) == 2);
  CHECK(hit->norm == doctest::Approx(0.0));

  PolySeq irr;
  irr.alpha = {real_from(0, 192), sqrt(real_from(2, 192))};
  CHECK(!obstruction_scan(std::span<const PolySeq>(&irr, 1), 10000, 10).has_value());

  // n^2/7 + 0.3 n: kappa=7 kills the quadratic but leaves N||2.1|| = 100
  std::vector<Real> mono = {real_from(0, 192), real_from(0.3, 192),
                            real_from(Rational(1, 7), 192)};
  PolySeq q = polyseq_from_monomial(mono);
  CHECK(!obstruction_scan(std::span<const PolySeq>(&q, 1), 1000, 10).has_value());
}

TEST_CASE("obstruction scan agrees with the double-loop reference") {
  for (std::uint64_t s = 0; s < 100; ++s) {
    PolySeq p;
    const int deg = 1 + static_cast<int>(Philox::u64(s, 0) % 3);
    for (int i = 0; i <= deg; ++i) {
      double v;
      const auto pick = Philox::u64(s, static_cast<std::uint64_t>(i) + 1) % 4;
      if (pick == 0)
        v = 0.5;
      else if (pick == 1)
        v = 1.0 / 7;
      else
        v = Philox::u01(s ^ 0xabc, static_cast<std::uint64_t>(i));
      p.alpha.push_back(real_from(v, 192));
    }
    const long N = 1 + static_cast<long>(Philox::u64(s, 9) % 1000);
    const long M = 1 + static_cast<long>(Philox::u64(s, 10) % 20);
    const auto got = obstruction_scan(std::span<const PolySeq>(&p, 1), N, M);
    const auto ref = scan_brute(std::span<const PolySeq>(&p, 1), N, M);
    CHECK(got.has_value() == ref.has_value());
    if (got && ref) CHECK(got->norm == doctest::Approx(ref->second));
  }
}

TEST_CASE("orbit averages: constant function has zero gap") {
  const unsigned bits = 160;
  const auto b = UnipotentElement::heisenberg(sqrt(real_from(2, bits)),
                                              sqrt(real_from(3, bits)),
                                              real_from(0, bits), bits);
  nilgroup::NilPoint x0{3, {real_from(0, bits), real_from(0, bits), real_from(0, bits)}};
  const auto seq = identity_sequence(2, 2000);
  TestFunction one{"one", 0.0,
                   [](std::span<const double>) { return std::complex<double>(1, 0); }};
  OrbitOptions opt;
  opt.bits = bits;
  const auto r = orbit_average(b, x0, seq, one, opt);
  CHECK(r.value.real() == doctest::Approx(1.0));
  CHECK(r.gap == doctest::Approx(0.0));
}

TEST_CASE("linear orbit equidistributes against a character") {
  const unsigned bits = 160;
  const auto b = UnipotentElement::heisenberg(sqrt(real_from(2, bits)),
                                              sqrt(real_from(3, bits)),
                                              real_from(0, bits), bits);
  nilgroup::NilPoint x0{3, {real_from(0, bits), real_from(0, bits), real_from(0, bits)}};
  const auto seq = identity_sequence(2, 20000);
  const auto F = character_function(HorizontalCharacter{{1, 0}}, 3);
  OrbitOptions opt;
  opt.bits = bits;
  const auto r = orbit_average(b, x0, seq, F, opt);
  CHECK(r.gap < 0.01);
}

TEST_CASE("orbit from a non-origin base point still equidistributes") {
  const unsigned bits = 160;
  const auto b = UnipotentElement::heisenberg(sqrt(real_from(2, bits)),
                                              sqrt(real_from(3, bits)),
                                              real_from(0, bits), bits);
  nilgroup::NilPoint x0{
      3, {real_from(0.5, bits), real_from(0.25, bits), real_from(0.125, bits)}};
  const auto seq = identity_sequence(2, 20000);
  const auto F = character_function(HorizontalCharacter{{1, 1}}, 3);
  OrbitOptions opt;
  opt.bits = bits;
  const auto r = orbit_average(b, x0, seq, F, opt);
  CHECK(r.gap < 0.02);
  // first point is b^2 * x0, reduced
  const auto g2 = nilgroup::pow_poly(b).eval_int(BigInt(2));
  const auto expect =
      nilgroup::reduce(nilgroup::mul(g2, nilgroup::embed(x0, bits)));
  const auto oc = nil_orbit(b, x0, seq, opt);
  CHECK(oc.points.row(0)[0] ==
        doctest::Approx(expect.point.coords[0].convert_to<double>()));
  CHECK(oc.points.row(0)[2] ==
        doctest::Approx(expect.point.coords[2].convert_to<double>()));
}

TEST_CASE("joint orbit average with one component reduces to orbit_average") {
  const unsigned bits = 160;
  const auto b = UnipotentElement::heisenberg(sqrt(real_from(2, bits)),
                                              sqrt(real_from(3, bits)),
                                              real_from(0, bits), bits);
  nilgroup::NilPoint x0{3, {real_from(0, bits), real_from(0, bits), real_from(0, bits)}};
  const auto seq = hardy_int_sequence(hardy::parse_hardy("t^1.5"), "t^1.5", 2, 3000, 150);
  const auto F = character_function(HorizontalCharacter{{1, 1}}, 3);
  OrbitOptions opt;
  opt.bits = bits;
  const auto single = orbit_average(b, x0, seq, F, opt);
  const UnipotentElement bs[1] = {b};
  const nilgroup::NilPoint xs[1] = {x0};
  const IntSequence seqs[1] = {seq};
  const auto joint = joint_orbit_average(bs, xs, seqs, F, opt);
  CHECK(joint.value.real() == doctest::Approx(single.value.real()));
  CHECK(joint.value.imag() == doctest::Approx(single.value.imag()));
}

TEST_CASE("precision policy grows with the exponent range") {
  CHECK(policy_bits(3, 100000) >= 96 + 2 * 16);
  CHECK(policy_bits(3, 1) == 96 + 2);
  CHECK(policy_bits(6, 1000000000) > policy_bits(3, 1000000000));
}
