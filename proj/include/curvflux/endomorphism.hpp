#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "curvflux/errors.hpp"
#include "curvflux/scalar.hpp"

namespace curvflux {

/// Dense n x n operator on a tangent space, expressed in an orthonormal
/// frame. Used for the shape operator and the Newton transformations in
/// both scalar modes.
template <class S>
class Endomorphism {
 public:
  Endomorphism() = default;
  explicit Endomorphism(int dim) : dim_(dim), a_(static_cast<std::size_t>(dim) * dim, from_int<S>(0)) {
    if (dim < 1) throw DomainError("Endomorphism: dimension must be positive");
  }

  static Endomorphism zero(int dim) { return Endomorphism(dim); }

  static Endomorphism identity(int dim) {
    Endomorphism m(dim);
    for (int i = 0; i < dim; ++i) m(i, i) = from_int<S>(1);
    return m;
  }

  static Endomorphism diagonal(const std::vector<S>& d) {
    Endomorphism m(static_cast<int>(d.size()));
    for (int i = 0; i < m.dim(); ++i) m(i, i) = d[i];
    return m;
  }

  int dim() const { return dim_; }

  S& operator()(int i, int j) { return a_[static_cast<std::size_t>(i) * dim_ + j]; }
  const S& operator()(int i, int j) const { return a_[static_cast<std::size_t>(i) * dim_ + j]; }

  S trace() const {
    S t = from_int<S>(0);
    for (int i = 0; i < dim_; ++i) t += (*this)(i, i);
    return t;
  }

  std::vector<S> diagonal_entries() const {
    std::vector<S> d;
    d.reserve(dim_);
    for (int i = 0; i < dim_; ++i) d.push_back((*this)(i, i));
    return d;
  }

  bool is_diagonal() const {
    for (int i = 0; i < dim_; ++i)
      for (int j = 0; j < dim_; ++j)
        if (i != j && !ScalarTraits<S>::is_zero((*this)(i, j))) return false;
    return true;
  }

  /// Exact equality in rational mode; |a_ij - a_ji| <= tol * max(1, max|a|)
  /// in float mode.
  bool is_symmetric(double tol = 1e-12) const {
    if constexpr (ScalarTraits<S>::exact) {
      for (int i = 0; i < dim_; ++i)
        for (int j = i + 1; j < dim_; ++j)
          if ((*this)(i, j) != (*this)(j, i)) return false;
      return true;
    } else {
      double scale = 1.0;
      for (double v : a_) scale = std::max(scale, std::fabs(v));
      for (int i = 0; i < dim_; ++i)
        for (int j = i + 1; j < dim_; ++j)
          if (std::fabs((*this)(i, j) - (*this)(j, i)) > tol * scale) return false;
      return true;
    }
  }

  Endomorphism& operator+=(const Endomorphism& o) {
    check_same(o);
    for (std::size_t i = 0; i < a_.size(); ++i) a_[i] += o.a_[i];
    return *this;
  }
  Endomorphism& operator-=(const Endomorphism& o) {
    check_same(o);
    for (std::size_t i = 0; i < a_.size(); ++i) a_[i] -= o.a_[i];
    return *this;
  }
  Endomorphism& operator*=(const S& s) {
    for (auto& v : a_) v *= s;
    return *this;
  }

  friend Endomorphism operator+(Endomorphism a, const Endomorphism& b) { return a += b; }
  friend Endomorphism operator-(Endomorphism a, const Endomorphism& b) { return a -= b; }
  friend Endomorphism operator*(const S& s, Endomorphism a) { return a *= s; }

  friend Endomorphism operator*(const Endomorphism& a, const Endomorphism& b) {
    a.check_same(b);
    Endomorphism c(a.dim_);
    for (int i = 0; i < a.dim_; ++i)
      for (int k = 0; k < a.dim_; ++k) {
        const S& aik = a(i, k);
        if (ScalarTraits<S>::is_zero(aik)) continue;
        for (int j = 0; j < a.dim_; ++j) c(i, j) += aik * b(k, j);
      }
    return c;
  }

  std::vector<S> apply(const std::vector<S>& v) const {
    if (static_cast<int>(v.size()) != dim_) throw DomainError("Endomorphism::apply: size mismatch");
    std::vector<S> out(dim_, from_int<S>(0));
    for (int i = 0; i < dim_; ++i)
      for (int j = 0; j < dim_; ++j) out[i] += (*this)(i, j) * v[j];
    return out;
  }

  friend bool operator==(const Endomorphism& a, const Endomorphism& b) {
    return a.dim_ == b.dim_ && a.a_ == b.a_;
  }

 private:
  void check_same(const Endomorphism& o) const {
    if (o.dim_ != dim_) throw DomainError("Endomorphism: dimension mismatch");
  }

  int dim_ = 0;
  std::vector<S> a_;
};

inline Eigen::MatrixXd to_eigen(const Endomorphism<double>& m) {
  Eigen::MatrixXd out(m.dim(), m.dim());
  for (int i = 0; i < m.dim(); ++i)
    for (int j = 0; j < m.dim(); ++j) out(i, j) = m(i, j);
  return out;
}

inline Endomorphism<double> from_eigen(const Eigen::MatrixXd& m) {
  if (m.rows() != m.cols()) throw DomainError("from_eigen: matrix must be square");
  Endomorphism<double> out(static_cast<int>(m.rows()));
  for (int i = 0; i < out.dim(); ++i)
    for (int j = 0; j < out.dim(); ++j) out(i, j) = m(i, j);
  return out;
}

}  // namespace curvflux
