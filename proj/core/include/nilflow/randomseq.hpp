#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "nilflow/equidist.hpp"
#include "nilflow/hardy.hpp"

namespace nilflow::randomseq {

// Inclusion probabilities sigma_n: decreasing, in [0,1], with n*sigma_n -> inf
// certified for the grammar forms. sigma = 1/n is representable but only as a
// negative control; it fails the certificate and must be requested with
// allow_bad_regime.
struct SigmaSpec {
  enum class Form { Power, Table, Expr };
  Form form = Form::Power;
  Rational c{1, 2};                      // sigma_n = n^-c, 0 <= c < 1
  std::vector<double> table;             // explicit head, constant afterwards
  std::optional<hardy::HardyExpr> expr;  // sigma(n) = expr(n)
  bool allow_bad_regime = false;

  static SigmaSpec power(const Rational& c);
  static SigmaSpec from_expr(const hardy::HardyExpr& e, bool allow_bad = false);

  double sigma(std::int64_t n) const;
  std::string id() const;
  void validate() const;
};

// Increasing enumeration of a Bernoulli(sigma_n) random set. Sampling is a
// pure function of (spec, seed, n_max): the per-index decision is keyed
// Philox, so any evaluation order gives the same set.
struct RandomSeqSample {
  std::uint64_t seed = 0;
  std::int64_t n_max = 0;
  std::vector<std::int64_t> kept;  // a_1 < a_2 < ...

  std::int64_t count_upto(std::int64_t N) const;  // A(N, omega)
};

RandomSeqSample sample(const SigmaSpec& spec, std::uint64_t seed, std::int64_t n_max);

// Wire format: run-length-encoded kept-set bitmap (alternating skip/keep run
// lengths over [1, n_max]) plus seed and a hash of the generating spec.
std::string serialize_sample(const RandomSeqSample& s, const SigmaSpec& spec);
RandomSeqSample deserialize_sample(const std::string& text,
                                   const SigmaSpec* expected_spec = nullptr);

// w(N) = sum_{n<=N} sigma_n, compensated summation.
double weight(const SigmaSpec& spec, std::int64_t N);

struct CompareAverages {
  std::complex<double> sparse;
  std::complex<double> full;
  double gap = 0.0;
  std::int64_t sparse_count = 0;
};

// Orbit average along the kept set vs the full orbit average, both over [1,N].
CompareAverages compare_averages(const RandomSeqSample& sample,
                                 const equidist::UnipotentElement& b,
                                 const nilgroup::NilPoint& x0,
                                 const nilgroup::TestFunction& F, std::int64_t N,
                                 const equidist::OrbitOptions& opt = {});

struct MomentEstimate {
  double value = 0.0;          // L^p norm estimate, p = ceil(log N)
  double bootstrap_error = 0.0;
  double reference = 0.0;      // sqrt(log N / w(N))
};

// Monte-Carlo L^{ceil(log N)} norm of (1/w(N)) sum (X_n - sigma_n) c_n over
// the random set, with a bootstrap error bar. c_n must be bounded by 1.
MomentEstimate moment_estimate(const SigmaSpec& spec,
                               const std::function<double(std::int64_t)>& coeff,
                               std::int64_t N, int trials, std::uint64_t seed);

}  // namespace nilflow::randomseq
