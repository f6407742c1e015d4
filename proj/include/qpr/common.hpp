#pragma once

#include <gmpxx.h>

#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>

namespace qpr {

using BigInt = mpz_class;
using Rational = mpq_class;
using Complex = std::complex<double>;

inline constexpr double TWO_PI = 6.283185307179586476925286766559;

/// Domain-level failure (bad inputs, violated preconditions, lost contracts).
/// The message strings are part of the library contract and are matched by
/// callers and tests.
class DomainError : public std::runtime_error {
public:
  explicit DomainError(const std::string& msg) : std::runtime_error(msg) {}
};

/// frac(r) in [0,1), exact.
inline Rational frac(const Rational& r) {
  Rational f = r;
  mpz_class fl;
  mpz_fdiv_q(fl.get_mpz_t(), f.get_num_mpz_t(), f.get_den_mpz_t());
  f -= Rational(fl);
  return f;
}

/// Distance to the nearest integer, exact.
inline Rational torus_dist(const Rational& r) {
  Rational f = frac(r);
  Rational g = 1 - f;
  return f <= g ? f : g;
}

/// ||x||_T = inf_{p in Z} |x - p|, in [0, 1/2].
inline double torus_norm(double x) {
  double f = x - std::floor(x);
  return std::min(f, 1.0 - f);
}

/// Signed representative of r mod 1 in (-1/2, 1/2], reduced exactly before
/// the double conversion (mpq_get_d truncates, which would destroy the
/// distance to the nearest integer for values close to 1).
inline double signed_frac_d(const Rational& r) {
  Rational f = frac(r);
  if (f > Rational(1, 2)) f -= 1;
  return f.get_d();
}

/// Natural log of a positive big integer, accurate to ~1 ulp of long double.
inline long double log_big(const BigInt& n) {
  if (n <= 0) throw DomainError("log_big: nonpositive");
  long int ex = 0;
  double mant = mpz_get_d_2exp(&ex, n.get_mpz_t());
  return std::log((long double)mant) + (long double)ex * 0.69314718055994530942L;
}

/// n^e as a long double log comparison helper: returns true iff a > b^e.
inline bool big_gt_pow(const BigInt& a, const BigInt& b, double e) {
  return log_big(a) > (long double)e * log_big(b);
}
inline bool big_le_pow(const BigInt& a, const BigInt& b, double e) {
  return !big_gt_pow(a, b, e);
}
inline bool big_ge_pow(const BigInt& a, const BigInt& b, double e) {
  return log_big(a) >= (long double)e * log_big(b);
}

}  // namespace qpr
