#pragma once

#include <cmath>
#include <cstdint>
#include <gmpxx.h>

namespace curvflux {

/// Exact arbitrary-precision rational.
using Rational = mpq_class;

/// Mode traits for the two scalar kinds every algebraic routine is generic
/// over: exact rationals and IEEE doubles.
template <class S>
struct ScalarTraits;

template <>
struct ScalarTraits<double> {
  static constexpr bool exact = false;
  static double from_int(std::int64_t v) { return static_cast<double>(v); }
  static double from_ratio(std::int64_t p, std::int64_t q) {
    return static_cast<double>(p) / static_cast<double>(q);
  }
  static double to_double(double v) { return v; }
  static double abs(double v) { return std::fabs(v); }
  static bool is_zero(double v) { return v == 0.0; }
};

template <>
struct ScalarTraits<Rational> {
  static constexpr bool exact = true;
  static Rational from_int(std::int64_t v) {
    return Rational(mpz_class(std::to_string(v)));
  }
  static Rational from_ratio(std::int64_t p, std::int64_t q) {
    Rational r(mpz_class(std::to_string(p)), mpz_class(std::to_string(q)));
    r.canonicalize();
    return r;
  }
  static double to_double(const Rational& v) { return v.get_d(); }
  static Rational abs(const Rational& v) { return ::abs(v); }
  static bool is_zero(const Rational& v) { return sgn(v) == 0; }
};

template <class S>
S from_int(std::int64_t v) {
  return ScalarTraits<S>::from_int(v);
}

template <class S>
double to_double(const S& v) {
  return ScalarTraits<S>::to_double(v);
}

/// Integer power by repeated multiplication; exact in rational mode.
template <class S>
S ipow(const S& base, int e) {
  S out = from_int<S>(1);
  for (int i = 0; i < e; ++i) out *= base;
  return out;
}

/// C(n, k) as a scalar; zero outside 0 <= k <= n.
template <class S>
S binomial(int n, int k) {
  if (k < 0 || n < 0 || k > n) return from_int<S>(0);
  if (k > n - k) k = n - k;
  S out = from_int<S>(1);
  for (int i = 1; i <= k; ++i) {
    out *= from_int<S>(n - k + i);
    out /= from_int<S>(i);
  }
  return out;
}

template <class S>
S factorial(int n) {
  S out = from_int<S>(1);
  for (int i = 2; i <= n; ++i) out *= from_int<S>(i);
  return out;
}

}  // namespace curvflux
