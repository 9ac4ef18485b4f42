#pragma once

#include <complex>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "nilflow/hardy.hpp"
#include "nilflow/nilgroup.hpp"

namespace nilflow::equidist {

using nilgroup::HaarEstimate;
using nilgroup::NilPoint;
using nilgroup::TestFunction;
using nilgroup::UnipotentElement;

// Real polynomial sequence in binomial basis: p(n) = sum binom(n,i) alpha_i.
struct PolySeq {
  std::vector<Real> alpha;  // degree = alpha.size()-1
  int degree() const { return static_cast<int>(alpha.size()) - 1; }
  Real eval(const BigInt& n) const;
};

// binomial-basis coefficients from monomial ones (c_i on n^i)
PolySeq polyseq_from_monomial(std::span<const Real> monomial);
PolySeq polyseq_scale_int(const PolySeq& p, long k);
PolySeq polyseq_add(const PolySeq& a, const PolySeq& b);

struct HorizontalCharacter {
  std::vector<long> kappa;
  long magnitude() const;  // sup norm
  bool trivial() const;
  std::string to_string() const;
};

// Materialized finite sequence on T^m, coordinates already reduced mod 1.
struct TorusPoints {
  int dim = 1;
  std::vector<double> flat;  // size = n * dim
  std::size_t count() const { return flat.size() / static_cast<std::size_t>(dim); }
  std::span<const double> row(std::size_t n) const {
    return {flat.data() + n * static_cast<std::size_t>(dim),
            static_cast<std::size_t>(dim)};
  }
};

// (1/N) sum e(kappa . x_n). Fixed pairwise summation order.
std::complex<double> weyl_sum(const TorusPoints& pts, std::span<const long> kappa);

// Exact 1-D star discrepancy via sort, O(N log N).
double star_discrepancy_1d(std::vector<double> points);

// Warnock closed form for the L2 star discrepancy, O(N^2 m).
double l2_star_discrepancy(const TorusPoints& pts);

// C-infinity smoothness norm: max_{1<=i<=k} N^i * dist(alpha_i, Z).
double cinf_norm(const PolySeq& p, long N);

struct Obstruction {
  HorizontalCharacter chi;
  double norm;
};

// Scans non-trivial |kappa|_inf <= M for the character minimizing
// cinf_norm(kappa . p, N); a hit means the block cannot be equidistributed.
std::optional<Obstruction> obstruction_scan(std::span<const PolySeq> p, long N, long M);

// Orbit machinery ------------------------------------------------------------

struct IntSequence {
  std::string id;                    // cache key component
  std::vector<std::int64_t> values;  // a(n) for n = first_n, first_n+1, ...
  long first_n = 2;
};

// [a(n)] for n in [first_n, first_n + count)
IntSequence hardy_int_sequence(const hardy::HardyExpr& a, std::string id, long first_n,
                               std::size_t count, unsigned bits);
IntSequence identity_sequence(long first_n, std::size_t count);

struct OrbitOptions {
  unsigned bits = 0;          // 0: pick from the precision policy
  unsigned threads = 1;
  std::size_t haar_samples = 100000;
  std::uint64_t haar_seed = 0;
};

// Full Mal'cev coordinates of (b^{a(n)} x0) for every n; dim = d(d-1)/2.
// Near-integer reductions escalate precision (x2, at most 4 times) per point.
struct OrbitCoords {
  TorusPoints points;
  std::size_t escalations = 0;
  unsigned bits_used = 0;
};
OrbitCoords nil_orbit(const UnipotentElement& b, const NilPoint& x0,
                      const IntSequence& seq, const OrbitOptions& opt = {});

struct OrbitAverage {
  std::complex<double> value;
  std::complex<double> haar;
  double gap = 0.0;        // |value - haar|
  double haar_std_error = 0.0;
  std::size_t escalations = 0;
};

OrbitAverage orbit_average(const UnipotentElement& b, const NilPoint& x0,
                           const IntSequence& seq, const TestFunction& F,
                           const OrbitOptions& opt = {});

// Product-space analogue; seq/group lists must have equal lengths. F sees the
// concatenated coordinate vector.
OrbitAverage joint_orbit_average(std::span<const UnipotentElement> bs,
                                 std::span<const NilPoint> x0s,
                                 std::span<const IntSequence> seqs,
                                 const TestFunction& F, const OrbitOptions& opt = {});

// Default precision policy: ceil((d-1) * log2(max |m|)) + 96.
unsigned policy_bits(int d, std::int64_t max_abs_m);

// Horizontal character as a test function on the coordinate cube.
TestFunction character_function(const HorizontalCharacter& chi, int d);
// Triangular bump on one coordinate: center 0.3, half-width 1/8.
TestFunction coordinate_bump(int coord, int cube_dim);

}  // namespace nilflow::equidist
