#pragma once

// Weighted Newton transformations T_k^inf(mu0, A), their trace and
// eigenvalue identities, and the weighted mean curvatures H_{k,f}.

#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>

#include "curvflux/endomorphism.hpp"
#include "curvflux/sympoly.hpp"

namespace curvflux::newton {

/// Residual bound for the float-mode eigensolver, ||A v - lambda v||.
inline constexpr double kEigenResidualTol = 1e-10;

/// Eigenvalues of a symmetric operator. Rational mode accepts diagonal
/// operators only; float mode runs a symmetric eigensolver and verifies the
/// eigenpairs.
template <class S>
std::vector<S> spectrum_of(const Endomorphism<S>& a) {
  if (!a.is_symmetric()) throw ContractError("operator is not symmetric");
  if (a.is_diagonal()) return a.diagonal_entries();
  if constexpr (ScalarTraits<S>::exact) {
    throw DomainError("exact mode requires a diagonal operator");
  } else {
    const Eigen::MatrixXd m = to_eigen(a);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(0.5 * (m + m.transpose()));
    if (solver.info() != Eigen::Success) throw ContractError("symmetric eigensolver failed");
    const double scale = std::max(1.0, m.norm());
    for (int i = 0; i < m.rows(); ++i) {
      const Eigen::VectorXd v = solver.eigenvectors().col(i);
      const double res = (m * v - solver.eigenvalues()(i) * v).norm();
      if (res > kEigenResidualTol * scale)
        throw ContractError("eigenpair residual " + std::to_string(res) + " exceeds tolerance");
    }
    std::vector<double> out(solver.eigenvalues().data(),
                            solver.eigenvalues().data() + solver.eigenvalues().size());
    return out;
  }
}

template <class S>
struct NewtonChain {
  S mu0;
  Endomorphism<S> A;
  int k_max = 0;
  std::vector<Endomorphism<S>> T;  // T[0..k_max]
  std::vector<S> sigma;            // sigma^inf_0..sigma^inf_{k_max+1}
};

namespace detail {
inline void require_order(int k, int n, const char* what) {
  if (k < 0 || k > n)
    throw DomainError(std::string(what) + ": need 0 <= k <= n (k=" + std::to_string(k) +
                      ", n=" + std::to_string(n) + ")");
}
}  // namespace detail

/// T_0 = I, T_k = sigma_k^inf I - A T_{k-1}, with every sigma computed once
/// from the spectrum of A.
template <class S>
NewtonChain<S> newton_chain(const S& mu0, const Endomorphism<S>& A, int k_max) {
  detail::require_order(k_max, A.dim(), "newton_chain");
  const sympoly::Spectrum<S> spec(mu0, spectrum_of(A));
  NewtonChain<S> chain{mu0, A, k_max, {}, sympoly::sigma_inf_closed_all(spec, k_max + 1)};
  const auto id = Endomorphism<S>::identity(A.dim());
  chain.T.push_back(id);
  for (int k = 1; k <= k_max; ++k) chain.T.push_back(chain.sigma[k] * id - A * chain.T[k - 1]);
  return chain;
}

/// sum_{j=0}^k (-1)^j sigma_{k-j}^inf A^j.
template <class S>
Endomorphism<S> newton_explicit(const S& mu0, const Endomorphism<S>& A, int k) {
  detail::require_order(k, A.dim(), "newton_explicit");
  const sympoly::Spectrum<S> spec(mu0, spectrum_of(A));
  const std::vector<S> sigma = sympoly::sigma_inf_closed_all(spec, k);
  auto power = Endomorphism<S>::identity(A.dim());
  auto out = Endomorphism<S>::zero(A.dim());
  for (int j = 0; j <= k; ++j) {
    if (j > 0) power = power * A;
    if (j % 2 == 0)
      out += sigma[k - j] * power;
    else
      out -= sigma[k - j] * power;
  }
  return out;
}

/// tr(A T_k^inf) - ((k+1) sigma_{k+1}^inf - mu0 sigma_k^inf).
template <class S>
S trace_identity_residual(const S& mu0, const Endomorphism<S>& A, int k) {
  if (k < 0 || k > A.dim() - 1) throw DomainError("trace_identity_residual: need 0 <= k <= n-1");
  const auto chain = newton_chain(mu0, A, k);
  const S lhs = (A * chain.T[k]).trace();
  const S rhs = from_int<S>(k + 1) * chain.sigma[k + 1] - mu0 * chain.sigma[k];
  return lhs - rhs;
}

/// (T_k^inf)_ii - sigma_{k,i}^inf for a diagonal operator.
template <class S>
std::vector<S> eigenstructure_residual(const S& mu0, const Endomorphism<S>& d, int k) {
  if (!d.is_diagonal()) throw DomainError("eigenstructure_residual: operator must be diagonal");
  detail::require_order(k, d.dim(), "eigenstructure_residual");
  const auto t = newton_explicit(mu0, d, k);
  const sympoly::Spectrum<S> spec(mu0, d.diagonal_entries());
  std::vector<S> out;
  out.reserve(d.dim());
  for (int i = 1; i <= d.dim(); ++i) out.push_back(t(i - 1, i - 1) - sympoly::sigma_inf_reduced(spec, k, i));
  return out;
}

/// H_{k,f} = sigma_k^inf(mu0, A) / C(n, k).
template <class S>
S weighted_mean_curvature(const S& mu0, const Endomorphism<S>& A, int k) {
  detail::require_order(k, A.dim(), "weighted_mean_curvature");
  const sympoly::Spectrum<S> spec(mu0, spectrum_of(A));
  return sympoly::sigma_inf_closed(spec, k) / binomial<S>(A.dim(), k);
}

/// |H_{r,f}| <= tol.
inline bool minimality_test(double mu0, const Endomorphism<double>& A, int r, double tol) {
  return std::fabs(weighted_mean_curvature(mu0, A, r)) <= tol;
}

/// Weighted mean curvatures together with the flux-formula constants.
///
/// `c_prev_printed` is n C(n, k-1); `c_prev_trace` is C(n, k-1), the factor
/// that actually multiplies mu0 H_{k-1,f} in tr T_k^inf.
template <class S>
struct CurvatureVector {
  std::vector<S> H;         // H_{k,f}, k = 0..n
  std::vector<S> binom;     // C(n, k)
  std::vector<S> c;         // (n-k) C(n, k)
  std::vector<S> c_prev_printed;
  std::vector<S> c_prev_trace;
};

template <class S>
CurvatureVector<S> curvature_vector(const S& mu0, const Endomorphism<S>& A) {
  const int n = A.dim();
  const sympoly::Spectrum<S> spec(mu0, spectrum_of(A));
  const auto sigma = sympoly::sigma_inf_closed_all(spec, n);
  CurvatureVector<S> cv;
  for (int k = 0; k <= n; ++k) {
    const S b = binomial<S>(n, k);
    cv.binom.push_back(b);
    cv.H.push_back(sigma[k] / b);
    cv.c.push_back(from_int<S>(n - k) * b);
    const S bp = binomial<S>(n, k - 1);
    cv.c_prev_printed.push_back(from_int<S>(n) * bp);
    cv.c_prev_trace.push_back(bp);
  }
  return cv;
}

}  // namespace curvflux::newton
