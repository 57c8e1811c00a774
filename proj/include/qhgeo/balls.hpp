#pragma once

#include "qhgeo/geodesic.hpp"

#include <string>
#include <vector>

namespace qhgeo {

/// Points of the quasihyperbolic sphere S(center, radius) found along rays.
struct SphereTrace {
  Domain domain;
  Vector center;
  double radius = 0.0;
  double tolerance = 0.0;
  std::vector<Vector> directions;
  std::vector<double> t;
  std::vector<Vector> points;
  std::vector<double> residuals;
  std::vector<char> censored;
  std::string warning;

  /// Indices of rays that reached the sphere.
  std::vector<std::size_t> traced() const;
  int censored_count() const;
};

/// `count` Euclidean unit directions evenly spaced on the circle, starting
/// at angle `phase`.
std::vector<Vector> circle_directions(int count, double phase = 0.0);

SphereTrace trace_sphere(const Domain& domain, const Vector& x0, double r,
                         const std::vector<Vector>& directions, const SolverConfig& config = {},
                         double tolerance = 1e-9);

struct ConvexityReport {
  int pairs_checked = 0;
  int violations = 0;
  double worst_excess = 0.0;       // max of k(x0, s p + (1-s) q) - r
  int censored = 0;
  int separated_pairs = 0;
  double strictness_margin = 0.0;  // min of r - k over pairs with ||p - q|| >= separation
};

/// Samples pairs of traced points and s in (0, 1) and counts points of the
/// chords with k(x0, .) > r + trace tolerance.
ConvexityReport convexity_check(const SphereTrace& trace, int samples, const SolverConfig& config = {},
                                std::uint64_t seed = 1, double separation = 0.1);

struct StarlikeReport {
  int samples = 0;
  int evaluations = 0;             // (y, t) pairs
  int violations = 0;              // sum of the three counts below
  int ball_violations = 0;         // j(x0, z_t) > r + 1e-9
  int log2_violations = 0;         // j(x0, z_t) > log 2 + 1e-9
  int inequality_violations = 0;   // j(x0, z_t) above the intermediate bound
  int bound_above_log2 = 0;        // intermediate bound exceeds log 2 + 1e-9
  double max_j = 0.0;
  bool guaranteed = false;         // r <= log 2
};

/// Draws y with j(x0, y) <= r and checks the points z_t = x0 + t (y - x0)
/// for t = k / t_steps, k = 1..t_steps, together with the bound
///   j(x0, z_t) <= log(1 + t ||x0 - y|| / min(d(x0), d(y) - (1 - t) ||x0 - y||)).
StarlikeReport j_ball_starlike_check(const Domain& domain, const Vector& x0, double r, int samples,
                                     std::uint64_t seed, int t_steps = 10);

struct TangentEstimate {
  Vector point;
  Functional normal;
  double fit_residual = 0.0;
  Vector euclidean_normal;  // unit Euclidean normal of the fitted hyperplane
};

/// Least-squares hyperplane through the traced point z and its nearest
/// traced neighbours; the normal is oriented away from the centre.
TangentEstimate tangent_normal(const SphereTrace& trace, std::size_t z_index, int k_neighbors = 0);

struct TangentCoincidenceReport {
  bool skipped = false;
  double angle_between_normals = 0.0;  // radians
  double k_x0_z = 0.0;
  double k_y_z = 0.0;
  double k_x0_y = 0.0;
  TangentEstimate outer;
  TangentEstimate inner;
};

/// Traces S(x0, r) and S(y, s) near their common point z and compares the
/// fitted normals.  Throws std::invalid_argument when the nesting
/// hypothesis s = r - k(x0, y), k(x0, z) = r, k(y, z) = s fails beyond
/// `hypothesis_tolerance` (relative to r).
TangentCoincidenceReport tangent_coincidence_check(const Domain& domain, const Vector& x0, double r,
                                                   const Vector& y, double s, const Vector& z,
                                                   const SolverConfig& config = {},
                                                   double hypothesis_tolerance = 1e-3);

/// Minkowski functional of the ball B_k(0, r): 1 / t where t v lies on the
/// sphere.  The domain must contain 0 and be symmetric about it.
double gauge_from_ball(const Domain& domain, double r, const Vector& v, const SolverConfig& config = {});

struct GaugeEquivalence {
  double c1 = 0.0;  // min of gauge(v) / ||v||
  double c2 = 0.0;  // max of gauge(v) / ||v||
  int directions = 0;
};

GaugeEquivalence gauge_equivalence(const Domain& domain, double r, int directions,
                                   const SolverConfig& config = {}, std::uint64_t seed = 1);

}  // namespace qhgeo
