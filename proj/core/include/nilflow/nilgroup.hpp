#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "nilflow/symbolic.hpp"

namespace nilflow::nilgroup {

// Index set for strictly upper entries of a d x d matrix, 2 <= d <= 6.
// Storage is offset-major: first superdiagonal (1,2),(2,3),...  then (1,3),...
// which is also the Mal'cev peeling order.
struct UpperIndex {
  int d;
  explicit UpperIndex(int dim);
  int count() const { return d * (d - 1) / 2; }
  int flat(int i, int j) const;                  // 0-based, i < j
  std::pair<int, int> unflat(int k) const;
};

class LieElement;
class PolyMatrix;
struct NilPoint;

// Unit upper-triangular matrix over arbitrary-precision reals.
class UnipotentElement {
 public:
  UnipotentElement(int d, unsigned bits);
  static UnipotentElement identity(int d, unsigned bits) { return {d, bits}; }
  static UnipotentElement heisenberg(const Real& x, const Real& y, const Real& z,
                                     unsigned bits);

  int dim() const { return idx_.d; }
  unsigned bits() const { return bits_; }
  const Real& at(int i, int j) const { return e_[idx_.flat(i, j)]; }
  Real& at(int i, int j) { return e_[idx_.flat(i, j)]; }
  const std::vector<Real>& entries() const { return e_; }

  std::string to_json() const;
  static UnipotentElement from_json(const std::string& text);

 private:
  UpperIndex idx_;
  unsigned bits_;
  std::vector<Real> e_;
};

// Strictly upper-triangular (nilpotent) matrix: the Lie algebra side.
class LieElement {
 public:
  LieElement(int d, unsigned bits);
  int dim() const { return idx_.d; }
  unsigned bits() const { return bits_; }
  const Real& at(int i, int j) const { return e_[idx_.flat(i, j)]; }
  Real& at(int i, int j) { return e_[idx_.flat(i, j)]; }

 private:
  UpperIndex idx_;
  unsigned bits_;
  std::vector<Real> e_;
};

// Point of X = G/Gamma in Mal'cev coordinates of the second kind, every
// coordinate in [0,1), offset-major order.
struct NilPoint {
  int d = 0;
  std::vector<Real> coords;
  std::vector<double> coords_d() const;
};

// Integer lattice element produced by reduction.
struct IntegerUnipotent {
  int d = 0;
  std::vector<BigInt> e;  // offset-major strictly upper
};

UnipotentElement mul(const UnipotentElement& g, const UnipotentElement& h);
UnipotentElement inv(const UnipotentElement& g);
LieElement log_map(const UnipotentElement& g);
UnipotentElement exp_map(const LieElement& x);
UnipotentElement pow_real(const UnipotentElement& b, const Real& s);

// Entry polynomials of b^m as polynomials in m; entry (i,j) has degree <= j-i.
class PolyMatrix {
 public:
  PolyMatrix(int d, unsigned bits);
  int dim() const { return idx_.d; }
  const std::vector<Real>& entry(int i, int j) const { return p_[idx_.flat(i, j)]; }
  std::vector<Real>& entry(int i, int j) { return p_[idx_.flat(i, j)]; }
  UnipotentElement eval(const Real& m) const;
  UnipotentElement eval_int(const BigInt& m) const;

 private:
  UpperIndex idx_;
  unsigned bits_;
  std::vector<std::vector<Real>> p_;
};

PolyMatrix pow_poly(const UnipotentElement& b);

struct ReduceResult {
  NilPoint point;
  IntegerUnipotent gamma;  // g = embed(point) * gamma
};

// Fundamental-domain reduction, peeling integer parts offset-major. Throws
// PrecisionExhausted when an entry sits within 2^-32 of an integer.
ReduceResult reduce(const UnipotentElement& g);
UnipotentElement embed(const NilPoint& p, unsigned bits);
UnipotentElement embed_integer(const IntegerUnipotent& g, unsigned bits);

// Superdiagonal mod 1: the horizontal torus T^(d-1).
std::vector<Real> horizontal(const UnipotentElement& g);

// Exact Q-linear-independence test of {1, alpha, beta} over the declared basis.
bool is_ergodic_heisenberg(const SymbolicReal& alpha, const SymbolicReal& beta);

// Bounded test function on the coordinate cube with a declared Lipschitz
// constant (sup-norm metric on second-kind coordinates).
struct TestFunction {
  std::string name;
  double lipschitz = 1.0;
  std::function<std::complex<double>(std::span<const double>)> f;
};

struct HaarEstimate {
  std::complex<double> value;
  double std_error = 0.0;
};

// Quasi-Monte-Carlo average over the coordinate cube [0,1)^m (Haar = Lebesgue
// in these coordinates). Deterministic for fixed (dim, samples, seed):
// 16 shifted Kronecker streams, standard error across shifts.
HaarEstimate haar_average(int cube_dim, const TestFunction& F, std::size_t samples,
                          std::uint64_t seed = 0);

}  // namespace nilflow::nilgroup
