#pragma once

#include "qhgeo/norm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace qhgeo {

enum class Shape { kHalfspace, kBall, kPolytope, kPunctured, kSlab };

/// Open half-space { x : normal . x > offset }.
template <typename Scalar>
struct BasicFace {
  VectorX<Scalar> normal;
  Scalar offset = Scalar(0);
};

/// A proper open domain of R^n with an exact boundary-distance oracle
/// measured in the ambient norm.  Distances to hyperplanes use the dual
/// norm of the face normal, so every shape works with every norm.
template <typename Scalar>
class BasicDomain {
 public:
  using Face = BasicFace<Scalar>;

  static BasicDomain halfspace(BasicNorm<Scalar> norm, VectorX<Scalar> normal, Scalar offset) {
    BasicDomain d(Shape::kHalfspace, std::move(norm));
    d.add_face(std::move(normal), offset);
    return d;
  }

  static BasicDomain ball(BasicNorm<Scalar> norm, VectorX<Scalar> center, Scalar radius) {
    BasicDomain d(Shape::kBall, std::move(norm));
    d.check_point(center, "ball center");
    if (!(radius > Scalar(0)) || !std::isfinite(radius)) {
      throw std::invalid_argument("ball radius must be positive");
    }
    d.point_ = std::move(center);
    d.radius_ = radius;
    return d;
  }

  static BasicDomain polytope(BasicNorm<Scalar> norm, const std::vector<Face>& faces) {
    if (faces.empty()) throw std::invalid_argument("polytope needs at least one face");
    BasicDomain d(Shape::kPolytope, std::move(norm));
    for (const Face& f : faces) d.add_face(f.normal, f.offset);
    return d;
  }

  static BasicDomain punctured(BasicNorm<Scalar> norm, VectorX<Scalar> point) {
    BasicDomain d(Shape::kPunctured, std::move(norm));
    d.check_point(point, "puncture");
    d.point_ = std::move(point);
    return d;
  }

  /// { x : lower < normal . x < upper }.
  static BasicDomain slab(BasicNorm<Scalar> norm, VectorX<Scalar> normal, Scalar lower,
                          Scalar upper) {
    if (!(lower < upper)) throw std::invalid_argument("slab needs lower < upper");
    BasicDomain d(Shape::kSlab, std::move(norm));
    VectorX<Scalar> neg = -normal;
    d.add_face(std::move(normal), lower);
    d.add_face(std::move(neg), -upper);
    return d;
  }

  /// Axis-aligned open box (lo, hi), as a polytope.
  static BasicDomain box(BasicNorm<Scalar> norm, const VectorX<Scalar>& lo,
                         const VectorX<Scalar>& hi) {
    const Eigen::Index n = norm.dim();
    if (lo.size() != n || hi.size() != n) throw std::invalid_argument("box corner dimension");
    std::vector<Face> faces;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (!(lo(i) < hi(i))) throw std::invalid_argument("box needs lo < hi");
      VectorX<Scalar> e = VectorX<Scalar>::Unit(n, i);
      faces.push_back({e, lo(i)});
      faces.push_back({-e, -hi(i)});
    }
    BasicDomain d = polytope(std::move(norm), faces);
    return d;
  }

  Shape shape() const { return shape_; }
  const BasicNorm<Scalar>& norm() const { return norm_; }
  Eigen::Index dim() const { return norm_.dim(); }
  const std::vector<Face>& faces() const { return faces_; }
  const VectorX<Scalar>& point() const { return point_; }
  Scalar radius() const { return radius_; }

  bool is_convex() const { return shape_ != Shape::kPunctured; }

  /// d(x) = dist(x, boundary), clamped to 0 outside the domain.
  template <typename Derived>
  Scalar boundary_distance(const Eigen::MatrixBase<Derived>& x) const {
    return std::max(signed_distance(x), Scalar(0));
  }

  template <typename Derived>
  bool contains(const Eigen::MatrixBase<Derived>& x) const {
    return signed_distance(x) > Scalar(0);
  }

  /// Gradient of d on the smooth piece containing x (active face with the
  /// lowest index on ties).
  template <typename Derived>
  VectorX<Scalar> distance_gradient(const Eigen::MatrixBase<Derived>& x) const {
    switch (shape_) {
      case Shape::kBall:
        return -norm_.gradient(x - point_);
      case Shape::kPunctured:
        return norm_.gradient(x - point_);
      default: {
        const std::size_t i = active_face(x);
        return faces_[i].normal / face_dual_[i];
      }
    }
  }

  template <typename Derived>
  MatrixX<Scalar> distance_hessian(const Eigen::MatrixBase<Derived>& x) const {
    switch (shape_) {
      case Shape::kBall:
        return -norm_.hessian(x - point_);
      case Shape::kPunctured:
        return norm_.hessian(x - point_);
      default:
        return MatrixX<Scalar>::Zero(dim(), dim());
    }
  }

  /// Parameters t in (0,1), sorted, where d restricted to the segment
  /// a + t (b - a) may fail to be smooth.
  std::vector<Scalar> segment_breakpoints(const VectorX<Scalar>& a,
                                          const VectorX<Scalar>& b) const {
    std::vector<Scalar> ts;
    const VectorX<Scalar> e = b - a;
    if (shape_ == Shape::kBall || shape_ == Shape::kPunctured) {
      const VectorX<Scalar> u0 = norm_.weights().cwiseProduct(a - point_);
      const VectorX<Scalar> du = norm_.weights().cwiseProduct(e);
      auto push = [&](Scalar t) {
        if (t > Scalar(0) && t < Scalar(1)) ts.push_back(t);
      };
      if (norm_.p() == Scalar(1)) {
        // Coordinate sign changes are the kinks of the l1 norm.
        for (Eigen::Index i = 0; i < dim(); ++i) {
          if (du(i) != Scalar(0)) push(-u0(i) / du(i));
        }
      }
      if (shape_ == Shape::kBall) {
        // The ball center is a kink of d for every norm.
        const Scalar ee = du.squaredNorm();
        if (ee > Scalar(0)) {
          const Scalar t = -u0.dot(du) / ee;
          if ((u0 + t * du).norm() <= Scalar(1e-14) * (u0.norm() + du.norm())) push(t);
        }
      }
      if (norm_.is_infinity()) {
        for (Eigen::Index i = 0; i < dim(); ++i) {
          for (Eigen::Index j = i + 1; j < dim(); ++j) {
            for (Scalar s : {Scalar(1), Scalar(-1)}) {
              const Scalar den = du(i) - s * du(j);
              if (den != Scalar(0)) push((s * u0(j) - u0(i)) / den);
            }
          }
        }
      }
    } else if (faces_.size() > 1) {
      std::vector<Scalar> alpha(faces_.size()), beta(faces_.size());
      for (std::size_t i = 0; i < faces_.size(); ++i) {
        alpha[i] = (faces_[i].normal.dot(a) - faces_[i].offset) / face_dual_[i];
        beta[i] = faces_[i].normal.dot(e) / face_dual_[i];
      }
      const Scalar scale = std::abs(*std::max_element(alpha.begin(), alpha.end())) +
                           std::abs(*std::max_element(beta.begin(), beta.end())) + Scalar(1);
      for (std::size_t i = 0; i < faces_.size(); ++i) {
        for (std::size_t j = i + 1; j < faces_.size(); ++j) {
          const Scalar den = beta[i] - beta[j];
          if (den == Scalar(0)) continue;
          const Scalar t = (alpha[j] - alpha[i]) / den;
          if (!(t > Scalar(0) && t < Scalar(1))) continue;
          const Scalar fi = alpha[i] + beta[i] * t;
          Scalar lowest = fi;
          for (std::size_t k = 0; k < faces_.size(); ++k) {
            lowest = std::min(lowest, alpha[k] + beta[k] * t);
          }
          if (fi <= lowest + Scalar(1e-13) * scale) ts.push_back(t);
        }
      }
    }
    std::sort(ts.begin(), ts.end());
    ts.erase(std::unique(ts.begin(), ts.end()), ts.end());
    return ts;
  }

  /// min over the closed segment [a, b] of d.  Exact by concavity of d for
  /// convex shapes; a 1-D convex minimization for the punctured space.
  Scalar min_distance_on_segment(const VectorX<Scalar>& a, const VectorX<Scalar>& b) const {
    if (is_convex()) return std::min(boundary_distance(a), boundary_distance(b));
    const VectorX<Scalar> u0 = a - point_;
    const VectorX<Scalar> e = b - a;
    if (norm_.is_euclidean()) {
      const Scalar ee = e.squaredNorm();
      Scalar t = ee > Scalar(0) ? -u0.dot(e) / ee : Scalar(0);
      t = std::clamp(t, Scalar(0), Scalar(1));
      return (u0 + t * e).norm();
    }
    // Golden-section search on the convex function t -> ||u0 + t e||.
    const Scalar invphi = (std::sqrt(Scalar(5)) - Scalar(1)) / Scalar(2);
    Scalar lo(0), hi(1);
    Scalar m1 = hi - invphi * (hi - lo), m2 = lo + invphi * (hi - lo);
    Scalar f1 = norm_(u0 + m1 * e), f2 = norm_(u0 + m2 * e);
    for (int it = 0; it < 90; ++it) {
      if (f1 < f2) {
        hi = m2; m2 = m1; f2 = f1;
        m1 = hi - invphi * (hi - lo);
        f1 = norm_(u0 + m1 * e);
      } else {
        lo = m1; m1 = m2; f1 = f2;
        m2 = lo + invphi * (hi - lo);
        f2 = norm_(u0 + m2 * e);
      }
    }
    return std::min({f1, f2, norm_(u0), norm_(u0 + e)});
  }

  /// The closed segment [a, b] lies in the domain.
  bool segment_inside(const VectorX<Scalar>& a, const VectorX<Scalar>& b) const {
    if (!contains(a) || !contains(b)) return false;
    return is_convex() || min_distance_on_segment(a, b) > Scalar(0);
  }

  /// sup { t >= 0 : x + s u in the domain for all s in [0, t) }; +inf for
  /// unbounded rays.  x must lie in the domain.
  Scalar ray_exit(const VectorX<Scalar>& x, const VectorX<Scalar>& u) const {
    const Scalar inf = std::numeric_limits<Scalar>::infinity();
    switch (shape_) {
      case Shape::kPunctured: {
        // The ray meets the puncture only if q - x is a positive multiple of u.
        const VectorX<Scalar> w = point_ - x;
        const Scalar uu = u.squaredNorm();
        if (uu == Scalar(0)) return inf;
        const Scalar t = w.dot(u) / uu;
        if (t > Scalar(0) && (w - t * u).norm() <= Scalar(1e-14) * w.norm()) return t;
        return inf;
      }
      case Shape::kBall: {
        Scalar lo(0), hi(1);
        const VectorX<Scalar> c = x - point_;
        if (norm_(u) == Scalar(0)) return inf;
        while (norm_(c + hi * u) < radius_) hi *= Scalar(2);
        for (int it = 0; it < 200 && hi - lo > Scalar(1e-15) * hi; ++it) {
          const Scalar mid = Scalar(0.5) * (lo + hi);
          (norm_(c + mid * u) < radius_ ? lo : hi) = mid;
        }
        return hi;
      }
      default: {
        Scalar t = inf;
        for (const Face& f : faces_) {
          const Scalar rate = f.normal.dot(u);
          if (rate < Scalar(0)) t = std::min(t, (f.normal.dot(x) - f.offset) / -rate);
        }
        return t;
      }
    }
  }

  /// Point symmetry about the origin.
  bool is_symmetric_about_origin(Scalar tol = Scalar(1e-12)) const {
    switch (shape_) {
      case Shape::kHalfspace:
      case Shape::kPunctured:
        return false;
      case Shape::kBall:
        return point_.cwiseAbs().maxCoeff() <= tol;
      default: {
        for (const Face& f : faces_) {
          bool found = false;
          for (const Face& g : faces_) {
            if ((f.normal + g.normal).cwiseAbs().maxCoeff() <= tol * (Scalar(1) + f.normal.norm()) &&
                std::abs(f.offset - g.offset) <= tol * (Scalar(1) + std::abs(f.offset))) {
              found = true;
              break;
            }
          }
          if (!found) return false;
        }
        return true;
      }
    }
  }

 private:
  BasicDomain(Shape shape, BasicNorm<Scalar> norm) : shape_(shape), norm_(std::move(norm)) {
    if (norm_.dim() < 2) throw std::invalid_argument("domains require dimension >= 2");
  }

  void check_point(const VectorX<Scalar>& p, const char* what) const {
    if (p.size() != dim()) throw std::invalid_argument(std::string(what) + " dimension mismatch");
    if (!p.allFinite()) throw std::invalid_argument(std::string(what) + " must be finite");
  }

  void add_face(VectorX<Scalar> normal, Scalar offset) {
    check_point(normal, "face normal");
    const Scalar dn = norm_.dual(normal);
    if (dn == Scalar(0)) throw std::invalid_argument("face normal must be nonzero");
    if (!std::isfinite(offset)) throw std::invalid_argument("face offset must be finite");
    faces_.push_back({std::move(normal), offset});
    face_dual_.push_back(dn);
  }

  template <typename Derived>
  Scalar signed_distance(const Eigen::MatrixBase<Derived>& x) const {
    if (x.size() != dim()) throw std::invalid_argument("point dimension mismatch");
    switch (shape_) {
      case Shape::kBall:
        return radius_ - norm_(x - point_);
      case Shape::kPunctured:
        return norm_(x - point_);
      default: {
        Scalar d = std::numeric_limits<Scalar>::infinity();
        for (std::size_t i = 0; i < faces_.size(); ++i) {
          d = std::min(d, (faces_[i].normal.dot(x) - faces_[i].offset) / face_dual_[i]);
        }
        return d;
      }
    }
  }

  template <typename Derived>
  std::size_t active_face(const Eigen::MatrixBase<Derived>& x) const {
    std::size_t best = 0;
    Scalar d = std::numeric_limits<Scalar>::infinity();
    for (std::size_t i = 0; i < faces_.size(); ++i) {
      const Scalar di = (faces_[i].normal.dot(x) - faces_[i].offset) / face_dual_[i];
      if (di < d) {
        d = di;
        best = i;
      }
    }
    return best;
  }

  Shape shape_;
  BasicNorm<Scalar> norm_;
  std::vector<Face> faces_;
  std::vector<Scalar> face_dual_;
  VectorX<Scalar> point_;
  Scalar radius_ = Scalar(0);
};

using Domain = BasicDomain<double>;
using Face = BasicFace<double>;

template <typename Scalar, typename Derived>
Scalar boundary_distance(const BasicDomain<Scalar>& domain, const Eigen::MatrixBase<Derived>& x) {
  return domain.boundary_distance(x);
}

template <typename Scalar, typename Derived>
bool contains(const BasicDomain<Scalar>& domain, const Eigen::MatrixBase<Derived>& x) {
  return domain.contains(x);
}

struct ConcavityReport {
  double max_violation = 0.0;
  int evaluations = 0;
};

/// Checks d(s x + (1-s) y) >= s d(x) + (1-s) d(y) on a uniform grid of s.
template <typename Scalar>
ConcavityReport concavity_check(const BasicDomain<Scalar>& domain, const VectorX<Scalar>& x,
                                const VectorX<Scalar>& y, int grid) {
  if (!domain.is_convex()) throw std::invalid_argument("concavity check needs a convex domain");
  if (grid < 2) throw std::invalid_argument("concavity grid needs at least 2 points");
  if (!domain.contains(x) || !domain.contains(y)) {
    throw std::domain_error("concavity check endpoints must lie in the domain");
  }
  const Scalar dx = domain.boundary_distance(x);
  const Scalar dy = domain.boundary_distance(y);
  ConcavityReport report;
  for (int k = 0; k < grid; ++k) {
    const Scalar s = Scalar(k) / Scalar(grid - 1);
    const VectorX<Scalar> z = s * x + (Scalar(1) - s) * y;
    const Scalar gap = s * dx + (Scalar(1) - s) * dy - domain.boundary_distance(z);
    report.max_violation = std::max(report.max_violation, static_cast<double>(gap));
    ++report.evaluations;
  }
  return report;
}

}  // namespace qhgeo
