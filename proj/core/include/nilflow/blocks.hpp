#pragma once

#include <complex>
#include <optional>
#include <vector>

#include "nilflow/equidist.hpp"
#include "nilflow/hardy.hpp"

namespace nilflow::blocks {

using equidist::Obstruction;
using equidist::PolySeq;

// Block length l(t) = t^theta * (log t)^logexp. theta is an exact grammar
// exponent; logexp may be a negative rational (the (log t)^2 case needs
// lengths like t / (log t)^{3/4}, just outside the expression grammar).
struct BlockLen {
  hardy::Exponent theta;
  Rational logexp{0};
  double eval(double t) const;
  std::string to_string() const;
};

// Feasible-length selection from the two growth constraints
//   l^(m+1) |a^(m+1)| << 1 << l^m |a^(m)|,  l < t,
// midpoint rule on the exponent pair, certified by growth comparison.
BlockLen select_block_length(const hardy::HardyExpr& a, int m);

struct TaylorBlock {
  long base = 0;   // expansion point N
  int degree = 0;  // m
  PolySeq poly;    // degree-m Taylor polynomial of a(N+n) in binomial basis
  long len = 0;    // block covers n = 0..len
  double remainder_bound = 0.0;  // |a^(m+1)(N)| L^(m+1) / (m+1)!
};

TaylorBlock taylor_block(const hardy::HardyExpr& a, long N, int m, long L,
                         unsigned bits);

struct BlockSchedule {
  std::vector<std::pair<long, long>> blocks;  // [first, last], inclusive
};

// Greedy left-to-right cover of [n_start, n_end] by [k, k + floor(l(k))].
BlockSchedule cover(long n_start, long n_end, const BlockLen& l);

struct BlockRow {
  long base = 0;
  long len = 0;
  double weyl_modulus = 0.0;       // |E_{n in block} e(kappa a(n))|, exact evaluation
  double poly_modulus = 0.0;       // same with the Taylor polynomial instead of a
  double remainder_bound = 0.0;
  std::optional<Obstruction> witness;
};

struct BlockPipelineResult {
  std::vector<BlockRow> rows;
  std::complex<double> aggregate;       // block-grouped average of e(kappa a(n))
  std::complex<double> direct;          // plain average, same range
  double error_bound = 0.0;             // numeric bound on |aggregate - direct|
  double truncated_tail_weight = 0.0;   // share of the final clipped block
  BlockLen length;
  int degree = 0;
};

// Per-block Weyl sums over the schedule for the frequency kappa, obstruction
// scan of each block polynomial, plus the aggregate/direct cross-check.
BlockPipelineResult block_pipeline(const hardy::HardyExpr& a, long kappa, long n_end,
                                   int m, unsigned bits, long scan_bound = 10,
                                   long n_start = 2);

struct RBlockResult {
  double mean_modulus = 0.0;            // E_n |A_{R,n}|
  std::complex<double> mean = 0.0;      // E_n A_{R,n}
  double mass_small = 0.0;              // share of n with ||a'(Rn)|| <= eps
  double sum_small = 0.0;               // contribution of that set to E|A|
  double sum_large = 0.0;               // complementary contribution
  double eps = 0.0;
};

// Fixed-width diagnostic A_{R,n} = E_{1<=r<=R} e(a(Rn) + r a'(Rn)), split by
// ||a'(Rn)|| <= eps as in the model argument.
RBlockResult r_block_scalar(const hardy::HardyExpr& a, long R, long N, double eps,
                            unsigned bits);

// Product-orbit variant: A_{R,n} = E_r F(b_i^{p_i(r)} Gamma) with p_i the
// degree-k_i Taylor polynomial of a_i at Rn.
RBlockResult r_block_orbit(std::span<const hardy::HardyExpr> seqs,
                           std::span<const equidist::UnipotentElement> bs,
                           const equidist::TestFunction& F, long R, long N,
                           double eps, unsigned bits);

}  // namespace nilflow::blocks
