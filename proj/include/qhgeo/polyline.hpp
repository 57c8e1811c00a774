#pragma once

#include "qhgeo/weight.hpp"

#include <utility>
#include <vector>

namespace qhgeo {

/// Parameter intervals [t0, t1] covering [0, 1] for the quadrature of the
/// segment a -> b: split at the kinks of d, then into panels no longer than
/// half the smallest boundary distance on each piece.  Empty when the
/// segment leaves the domain.
std::vector<std::pair<double, double>> segment_panels(const Domain& domain, const Vector& a,
                                                      const Vector& b);

// Weighted length of one straight segment, integral of w(a + t(b-a)) ||b-a||
// over t in [0, 1].  Composite Gauss-Legendre: the segment is first split
// at the kinks of d, then each piece into panels no longer than half the
// smallest boundary distance on the piece, so the nearest singularity of
// the integrand stays at least two panel lengths away.  Returns +inf when
// the segment leaves the domain.
double segment_length(const Weight& weight, const Vector& a, const Vector& b);

/// Parameter t in [0, 1] where the weighted length from a reaches
/// `fraction` of the segment total.
double segment_split(const Weight& weight, const Vector& a, const Vector& b, double fraction);

/// Value, gradient and Hessian of segment_length with respect to both
/// endpoints.  `hab(i, j)` is the mixed derivative d^2 S / da_i db_j.
struct SegmentJet {
  double value = 0.0;
  Vector grad_a;
  Vector grad_b;
  Matrix haa;
  Matrix hab;
  Matrix hbb;
};

SegmentJet segment_jet(const Weight& weight, const Vector& a, const Vector& b);

/// A finite vertex path in a domain with its boundary distances, cumulative
/// weighted length, and per-segment unit velocity F (segment direction with
/// ||F|| = 1 in the ambient norm).  Vertices are stored as matrix columns.
class Polyline {
 public:
  Polyline() = default;

  /// Throws std::domain_error for a vertex outside the domain and
  /// std::invalid_argument for repeated consecutive vertices.  A segment
  /// leaving the domain gives an infinite cumulative length.
  static Polyline build(const Weight& weight, Matrix vertices);

  /// Points sampled along a longer curve.  `cumulative` holds the weighted
  /// length of the source curve up to each sample rather than the chord
  /// lengths between samples.
  static Polyline from_samples(const Weight& weight, Matrix vertices, Vector cumulative);

  Eigen::Index size() const { return vertices_.cols(); }
  Eigen::Index dim() const { return vertices_.rows(); }
  const Matrix& vertices() const { return vertices_; }
  Vector vertex(Eigen::Index i) const { return vertices_.col(i); }
  const Vector& distances() const { return distances_; }
  const Vector& cumulative() const { return cumulative_; }
  const Matrix& qh_velocity() const { return velocity_; }
  double length() const { return size() == 0 ? 0.0 : cumulative_(size() - 1); }

 private:
  Matrix vertices_;
  Vector distances_;
  Vector cumulative_;
  Matrix velocity_;
};

/// Inverse of the cumulative weighted length along a polyline: the point
/// reached after weighted length s from the first vertex.
class ArcLengthMap {
 public:
  ArcLengthMap(const Weight& weight, const Polyline& path);

  double length() const { return total_; }

  struct Location {
    Vector point;
    Eigen::Index segment = 0;
  };

  /// s is clamped to [0, length()].
  Location at(double s) const;

  /// Cumulative weighted length at each vertex.
  const std::vector<double>& vertex_lengths() const { return at_vertex_; }

 private:
  struct Panel {
    double t0;
    double t1;
    double s0;  // weighted length from the first vertex to the panel start
  };

  const Weight* weight_;
  Matrix vertices_;
  std::vector<std::vector<Panel>> panels_;
  std::vector<double> at_vertex_;
  std::vector<double> seg_norm_;
  double total_ = 0.0;
};

/// Interior turning angles (radians) between consecutive segment
/// directions, one per interior vertex.
Vector turning_angles(const Polyline& path);

}  // namespace qhgeo
