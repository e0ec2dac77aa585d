#pragma once

// Classical, weighted and binomially shifted elementary symmetric functions.
//
// Every routine is generic over the scalar mode (Rational or double). The
// weighted functions are the coefficients of the generating function
//
//     sum_k sigma_k^inf(mu0, mu) t^k = exp(mu0 t) * prod_j (1 + mu_j t),
//
// and the shifted functions are the classical sigma_k of the list mu_i + lambda.

#include <algorithm>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "curvflux/errors.hpp"
#include "curvflux/scalar.hpp"

namespace curvflux::sympoly {

/// A weight eigenvalue mu0 together with n principal curvatures.
///
/// Power sums p_i = sum_j mu_j^i (j >= 1, mu0 excluded) are computed once at
/// construction for i <= n + 1 and reused by the recursive evaluator.
template <class S>
class Spectrum {
 public:
  Spectrum(S mu0, std::vector<S> mu) : mu0_(std::move(mu0)), mu_(std::move(mu)) {
    if (mu_.empty()) throw DomainError("Spectrum: n must be at least 1");
    if constexpr (!ScalarTraits<S>::exact) {
      if (!std::isfinite(mu0_)) throw DomainError("Spectrum: non-finite mu0");
      for (double v : mu_)
        if (!std::isfinite(v)) throw DomainError("Spectrum: non-finite entry");
    }
    power_sums_.reserve(mu_.size() + 2);
    power_sums_.push_back(from_int<S>(static_cast<std::int64_t>(mu_.size())));
    std::vector<S> powers(mu_.size(), from_int<S>(1));
    for (std::size_t i = 1; i <= mu_.size() + 1; ++i) {
      S sum = from_int<S>(0);
      for (std::size_t j = 0; j < mu_.size(); ++j) {
        powers[j] *= mu_[j];
        sum += powers[j];
      }
      power_sums_.push_back(sum);
    }
  }

  const S& mu0() const { return mu0_; }
  const std::vector<S>& mu() const { return mu_; }
  int n() const { return static_cast<int>(mu_.size()); }

  /// sum_{j=1}^n mu_j^i.
  S power_sum(int i) const {
    if (i >= 0 && static_cast<std::size_t>(i) < power_sums_.size()) return power_sums_[i];
    S sum = from_int<S>(0);
    for (const S& v : mu_) sum += ipow(v, i);
    return sum;
  }

  /// Same spectrum with mu_i removed (1-based). Requires n >= 2.
  Spectrum without(int i) const {
    if (i < 1 || i > n()) throw DomainError("Spectrum::without: index out of range");
    if (n() == 1) throw DomainError("Spectrum::without: cannot delete the only entry");
    std::vector<S> rest;
    rest.reserve(mu_.size() - 1);
    for (int j = 0; j < n(); ++j)
      if (j != i - 1) rest.push_back(mu_[j]);
    return Spectrum(mu0_, std::move(rest));
  }

  Spectrum with_mu0(S mu0) const { return Spectrum(std::move(mu0), mu_); }

 private:
  S mu0_;
  std::vector<S> mu_;
  std::vector<S> power_sums_;
};

namespace detail {
inline void require_nonnegative(int k, const char* what) {
  if (k < 0) throw DomainError(std::string(what) + ": k must be non-negative");
}
}  // namespace detail

/// sigma_0..sigma_kmax of a plain list, by expanding prod (1 + mu_j t).
/// Entries beyond n are zero.
template <class S>
std::vector<S> sigma_all(const std::vector<S>& mu, int k_max) {
  detail::require_nonnegative(k_max, "sigma_all");
  std::vector<S> e(static_cast<std::size_t>(k_max) + 1, from_int<S>(0));
  e[0] = from_int<S>(1);
  int filled = 0;
  for (const S& m : mu) {
    filled = std::min(filled + 1, k_max);
    for (int j = filled; j >= 1; --j) e[j] += m * e[j - 1];
  }
  return e;
}

/// Classical sigma_k: sum of all products of k distinct entries; 1 for k = 0,
/// 0 for k > n.
template <class S>
S sigma_k(const std::vector<S>& mu, int k) {
  detail::require_nonnegative(k, "sigma_k");
  if (k > static_cast<int>(mu.size())) return from_int<S>(0);
  return sigma_all(mu, k)[k];
}

/// sigma_0^inf..sigma_kmax^inf by the Newton-identity recursion
///
///   k sigma_k = sigma_{k-1} (mu0 + p_1) + sum_{i=1}^{k-1} (-1)^i sigma_{k-1-i} p_{i+1}
///
/// where p_i are the power sums of mu (mu0 enters only through p_1's slot).
template <class S>
std::vector<S> sigma_inf_recursive_all(const Spectrum<S>& s, int k_max) {
  detail::require_nonnegative(k_max, "sigma_inf_recursive");
  std::vector<S> out;
  out.reserve(static_cast<std::size_t>(k_max) + 1);
  out.push_back(from_int<S>(1));
  const S first = s.mu0() + s.power_sum(1);
  for (int k = 1; k <= k_max; ++k) {
    S acc = out[k - 1] * first;
    for (int i = 1; i <= k - 1; ++i) {
      S term = out[k - 1 - i] * s.power_sum(i + 1);
      if (i % 2 == 1)
        acc -= term;
      else
        acc += term;
    }
    acc /= from_int<S>(k);
    out.push_back(std::move(acc));
  }
  return out;
}

template <class S>
S sigma_inf_recursive(const Spectrum<S>& s, int k) {
  return sigma_inf_recursive_all(s, k).back();
}

/// sum_{j=0}^k mu0^j / j! * sigma_{k-j}(mu).
template <class S>
S sigma_inf_closed(const Spectrum<S>& s, int k) {
  detail::require_nonnegative(k, "sigma_inf_closed");
  const std::vector<S> classical = sigma_all(s.mu(), k);
  S out = from_int<S>(0);
  S weight = from_int<S>(1);  // mu0^j / j!
  for (int j = 0; j <= k; ++j) {
    if (j > 0) {
      weight *= s.mu0();
      weight /= from_int<S>(j);
    }
    out += weight * classical[k - j];
  }
  return out;
}

/// All sigma_j^inf for j <= k_max through the closed form (one expansion).
template <class S>
std::vector<S> sigma_inf_closed_all(const Spectrum<S>& s, int k_max) {
  detail::require_nonnegative(k_max, "sigma_inf_closed_all");
  const std::vector<S> classical = sigma_all(s.mu(), k_max);
  std::vector<S> weights(static_cast<std::size_t>(k_max) + 1);
  weights[0] = from_int<S>(1);
  for (int j = 1; j <= k_max; ++j) weights[j] = weights[j - 1] * s.mu0() / from_int<S>(j);
  std::vector<S> out(static_cast<std::size_t>(k_max) + 1, from_int<S>(0));
  for (int k = 0; k <= k_max; ++k)
    for (int j = 0; j <= k; ++j) out[k] += weights[j] * classical[k - j];
  return out;
}

/// sum_{j=0}^k mu1^j / j! * sigma_{k-j}^inf(mu0, mu); equals
/// sigma_k^inf(mu0 + mu1, mu).
template <class S>
S sigma_inf_shift(const Spectrum<S>& s, const S& mu1, int k) {
  detail::require_nonnegative(k, "sigma_inf_shift");
  const std::vector<S> base = sigma_inf_recursive_all(s, k);
  S out = from_int<S>(0);
  S weight = from_int<S>(1);
  for (int j = 0; j <= k; ++j) {
    if (j > 0) {
      weight *= mu1;
      weight /= from_int<S>(j);
    }
    out += weight * base[k - j];
  }
  return out;
}

/// sum_{j=0}^k C(n-k+j, j) lambda^j sigma_{k-j}(mu), i.e. sigma_k of the
/// list mu_i + lambda. Defined for 0 <= k <= n.
template <class S>
S sigma_tilde(const S& lambda, const std::vector<S>& mu, int k) {
  detail::require_nonnegative(k, "sigma_tilde");
  const int n = static_cast<int>(mu.size());
  if (k > n) throw DomainError("sigma_tilde: k exceeds n");
  const std::vector<S> classical = sigma_all(mu, k);
  S out = from_int<S>(0);
  S power = from_int<S>(1);
  for (int j = 0; j <= k; ++j) {
    if (j > 0) power *= lambda;
    out += binomial<S>(n - k + j, j) * power * classical[k - j];
  }
  return out;
}

/// Ratio between the lambda^j coefficient of the shifted expansion and the
/// mu0^j coefficient of the weighted expansion: C(n-k+j, j) * j!.
template <class S>
S coefficient_ratio(int n, int k, int j) {
  if (j < 0 || j > k || k > n) throw DomainError("coefficient_ratio: need 0 <= j <= k <= n");
  return binomial<S>(n - k + j, j) * factorial<S>(j);
}

/// sigma_{k,i}^inf: sigma_k^inf of the spectrum with mu_i (1-based) deleted.
/// For n = 1 the deleted spectrum is empty and the value is mu0^k / k!.
template <class S>
S sigma_inf_reduced(const Spectrum<S>& s, int k, int i) {
  detail::require_nonnegative(k, "sigma_inf_reduced");
  if (i < 1 || i > s.n()) throw DomainError("sigma_inf_reduced: index out of range");
  if (s.n() == 1) return ipow(s.mu0(), k) / factorial<S>(k);
  return sigma_inf_closed(s.without(i), k);
}

}  // namespace curvflux::sympoly
