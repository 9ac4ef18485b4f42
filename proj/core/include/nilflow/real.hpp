#pragma once

#include <boost/multiprecision/gmp.hpp>
#include <boost/multiprecision/mpfr.hpp>

#include <complex>
#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace nilflow {

// Arbitrary-precision reals. Precision travels with values: construct carriers
// at an explicit bit count and every derived expression keeps at least the
// operand precision, so results are a pure function of the inputs.
using Real = boost::multiprecision::mpfr_float;
using Rational = boost::multiprecision::mpq_rational;
using BigInt = boost::multiprecision::mpz_int;

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct PrecisionExhausted : Error {
  using Error::Error;
};
struct UndecidableInGrammar : Error {
  using Error::Error;
};
struct DimensionMismatch : Error {
  using Error::Error;
};
struct NoFeasibleBlockLength : Error {
  using Error::Error;
};
struct ConfigInvalid : Error {
  using Error::Error;
};
struct IOFailure : Error {
  using Error::Error;
};

inline long bits_of(const Real& x) { return mpfr_get_prec(x.backend().data()); }

// NaN-valued carrier at the requested precision; assign before use.
inline Real real_carrier(unsigned bits) {
  Real x;
  mpfr_set_prec(x.backend().data(), static_cast<mpfr_prec_t>(bits));
  return x;
}

template <class T>
  requires std::is_arithmetic_v<T>
inline Real real_from(T v, unsigned bits) {
  Real x = real_carrier(bits);
  x = v;
  return x;
}

inline Real real_from(const Rational& v, unsigned bits) {
  Real x = real_carrier(bits);
  x = v;
  return x;
}

inline Real real_from(const BigInt& v, unsigned bits) {
  Real x = real_carrier(bits);
  x = v;
  return x;
}

// Parses a decimal string at the requested precision (one rounding).
inline Real real_from(const std::string& s, unsigned bits) {
  Real x = real_carrier(bits);
  x.assign(s);
  return x;
}

// x mod 1 in [0,1).
Real frac(const Real& x);

// Distance to the nearest integer.
Real dist_to_int(const Real& x);

// e(x) = exp(2*pi*i*x). The fractional part is taken at the full precision of
// x before dropping to double, so huge arguments keep an accurate phase.
std::complex<double> unit_e(const Real& x);
std::complex<double> unit_e(double x);

// Decimal serialization that round-trips bit-exactly when re-read at the same
// precision.
std::string real_to_decimal(const Real& x);

// Fixed-shape pairwise reduction: the result depends only on the input order,
// never on chunking or thread count.
double pairwise_sum(std::span<const double> v);
std::complex<double> pairwise_sum(std::span<const std::complex<double>> v);

// Runs fn(i) for i in [0,n) over a deterministic chunk grid, in parallel.
void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& fn);

}  // namespace nilflow
