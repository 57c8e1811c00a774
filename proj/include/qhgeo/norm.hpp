#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace qhgeo {

template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

using Vector = VectorX<double>;
using Matrix = MatrixX<double>;

/// A (possibly coordinate-scaled) p-norm on R^n:  ||v|| = ||W v||_p  with
/// W = diag(weights).  The exponent p ranges over [1, inf]; p = inf is
/// stored as std::numeric_limits<Scalar>::infinity().
template <typename Scalar>
class BasicNorm {
 public:
  BasicNorm() = default;

  static BasicNorm p_norm(Eigen::Index dim, Scalar p) {
    return BasicNorm(dim, p, VectorX<Scalar>::Ones(dim), false);
  }

  static BasicNorm euclidean(Eigen::Index dim) { return p_norm(dim, Scalar(2)); }

  static BasicNorm weighted(Scalar p, VectorX<Scalar> weights) {
    const Eigen::Index dim = weights.size();
    if (dim > 0 && (weights.array() <= Scalar(0)).any()) {
      throw std::invalid_argument("norm weights must be positive");
    }
    if (dim > 0 && !weights.allFinite()) {
      throw std::invalid_argument("norm weights must be finite");
    }
    return BasicNorm(dim, p, std::move(weights), true);
  }

  Eigen::Index dim() const { return dim_; }
  Scalar p() const { return p_; }
  bool is_infinity() const { return std::isinf(p_); }
  bool is_weighted() const { return weighted_; }
  const VectorX<Scalar>& weights() const { return weights_; }

  /// Hoelder conjugate q with 1/p + 1/q = 1.
  Scalar dual_exponent() const {
    if (p_ == Scalar(1)) return std::numeric_limits<Scalar>::infinity();
    if (is_infinity()) return Scalar(1);
    return p_ / (p_ - Scalar(1));
  }

  /// Differentiable away from the origin.
  bool is_smooth() const { return p_ > Scalar(1) && !is_infinity(); }

  bool is_euclidean() const { return p_ == Scalar(2) && !weighted_; }

  template <typename Derived>
  Scalar operator()(const Eigen::MatrixBase<Derived>& v) const {
    check_dim(v.size());
    if (!weighted_) return raw_norm(v, p_);
    return raw_norm(weights_.cwiseProduct(v), p_);
  }

  /// Dual norm ||f||_* = sup { f.v : ||v|| <= 1 } = ||W^{-1} f||_q.
  template <typename Derived>
  Scalar dual(const Eigen::MatrixBase<Derived>& f) const {
    check_dim(f.size());
    const Scalar q = dual_exponent();
    if (!weighted_) return raw_norm(f, q);
    return raw_norm(f.cwiseQuotient(weights_), q);
  }

  /// Gradient of the norm at v != 0.  For p in {1, inf} this is the
  /// subgradient selection of norming_functional: the lexicographically
  /// smallest extreme point of the subdifferential.
  template <typename Derived>
  VectorX<Scalar> gradient(const Eigen::MatrixBase<Derived>& v) const {
    check_dim(v.size());
    const VectorX<Scalar> u = weights_.cwiseProduct(v);
    VectorX<Scalar> g = VectorX<Scalar>::Zero(dim_);
    if (p_ == Scalar(1)) {
      for (Eigen::Index i = 0; i < dim_; ++i) {
        g(i) = u(i) > Scalar(0) ? Scalar(1) : Scalar(-1);
      }
    } else if (is_infinity()) {
      const Scalar top = u.cwiseAbs().maxCoeff();
      Eigen::Index pick = -1;
      for (Eigen::Index i = 0; i < dim_; ++i) {
        if (std::abs(u(i)) != top) continue;
        if (u(i) < Scalar(0)) {
          pick = i;
          break;
        }
        pick = i;
      }
      g(pick) = u(pick) < Scalar(0) ? Scalar(-1) : Scalar(1);
    } else {
      const Scalar n = raw_norm(u, p_);
      if (n == Scalar(0)) throw std::invalid_argument("norm gradient at the zero vector");
      for (Eigen::Index i = 0; i < dim_; ++i) {
        const Scalar r = std::abs(u(i)) / n;
        const Scalar mag = p_ == Scalar(2) ? r : std::pow(r, p_ - Scalar(1));
        g(i) = u(i) < Scalar(0) ? -mag : mag;
      }
    }
    return weights_.cwiseProduct(g);
  }

  /// Hessian of the norm at v != 0; zero for the polyhedral cases.  For
  /// p < 2 the diagonal term is regularized where coordinates vanish.
  template <typename Derived>
  MatrixX<Scalar> hessian(const Eigen::MatrixBase<Derived>& v) const {
    check_dim(v.size());
    MatrixX<Scalar> h = MatrixX<Scalar>::Zero(dim_, dim_);
    if (!is_smooth()) return h;
    const VectorX<Scalar> u = weights_.cwiseProduct(v);
    const Scalar n = raw_norm(u, p_);
    if (n == Scalar(0)) throw std::invalid_argument("norm hessian at the zero vector");
    VectorX<Scalar> g(dim_);
    VectorX<Scalar> diag(dim_);
    for (Eigen::Index i = 0; i < dim_; ++i) {
      Scalar r = std::abs(u(i)) / n;
      const Scalar mag = p_ == Scalar(2) ? r : std::pow(r, p_ - Scalar(1));
      g(i) = u(i) < Scalar(0) ? -mag : mag;
      if (p_ < Scalar(2)) r = std::max(r, Scalar(1e-6));
      diag(i) = p_ == Scalar(2) ? Scalar(1) : std::pow(r, p_ - Scalar(2));
    }
    h = diag.asDiagonal();
    h -= g * g.transpose();
    h *= (p_ - Scalar(1)) / n;
    return weights_.asDiagonal() * h * weights_.asDiagonal();
  }

 private:
  BasicNorm(Eigen::Index dim, Scalar p, VectorX<Scalar> weights, bool weighted)
      : dim_(dim), p_(p), weights_(std::move(weights)), weighted_(weighted) {
    if (dim_ < 1) throw std::invalid_argument("norm dimension must be positive");
    if (std::isnan(p_) || p_ < Scalar(1)) {
      throw std::invalid_argument("norm exponent p must lie in [1, inf]");
    }
  }

  void check_dim(Eigen::Index n) const {
    if (n != dim_) {
      throw std::invalid_argument("dimension mismatch: norm has dim " + std::to_string(dim_) +
                                  ", vector has " + std::to_string(n));
    }
  }

  template <typename Derived>
  static Scalar raw_norm(const Eigen::MatrixBase<Derived>& u, Scalar p) {
    if (p == Scalar(2)) return u.norm();
    if (p == Scalar(1)) return u.template lpNorm<1>();
    if (std::isinf(p)) return u.template lpNorm<Eigen::Infinity>();
    const Scalar top = u.cwiseAbs().maxCoeff();
    if (top == Scalar(0)) return Scalar(0);
    Scalar sum(0);
    for (Eigen::Index i = 0; i < u.size(); ++i) sum += std::pow(std::abs(u(i)) / top, p);
    return top * std::pow(sum, Scalar(1) / p);
  }

  Eigen::Index dim_ = 0;
  Scalar p_ = Scalar(2);
  VectorX<Scalar> weights_;
  bool weighted_ = false;
};

using Norm = BasicNorm<double>;

template <typename Scalar, typename Derived>
Scalar eval_norm(const BasicNorm<Scalar>& norm, const Eigen::MatrixBase<Derived>& v) {
  return norm(v);
}

/// A continuous linear functional acting by the dot product.
template <typename Scalar>
struct BasicFunctional {
  VectorX<Scalar> coefficients;
  Scalar dual_norm_value = Scalar(0);

  template <typename Derived>
  Scalar operator()(const Eigen::MatrixBase<Derived>& v) const {
    return coefficients.dot(v);
  }
};

using Functional = BasicFunctional<double>;

/// f with f(v) = ||v|| and ||f||_* = 1.
template <typename Scalar, typename Derived>
BasicFunctional<Scalar> norming_functional(const BasicNorm<Scalar>& norm,
                                           const Eigen::MatrixBase<Derived>& v) {
  if (norm(v) == Scalar(0)) throw std::invalid_argument("norming functional of the zero vector");
  BasicFunctional<Scalar> f;
  f.coefficients = norm.gradient(v);
  f.dual_norm_value = norm.dual(f.coefficients);
  return f;
}

}  // namespace qhgeo
