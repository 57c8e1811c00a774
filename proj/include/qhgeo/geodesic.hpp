#pragma once

#include "qhgeo/metrics.hpp"

#include <cstdint>
#include <vector>

namespace qhgeo {

struct SolverConfig {
  int initial_vertices = 9;       // vertex count of level 0, endpoints included
  int refinement_levels = 3;      // vertex doublings after level 0
  int max_iterations = 60;        // Newton iterations per level
  double step_tolerance = 1e-10;  // relative to the endpoint separation
  double length_tolerance = 1e-3; // relative length change of the last level
  std::uint64_t seed = 0;         // 0: no perturbation of the initial path

  /// Throws std::invalid_argument unless every field is positive
  /// (seed excepted).
  void validate() const;
};

struct LevelRecord {
  int vertex_count = 0;
  double length = 0.0;
  double max_turning_angle = 0.0;
  int iterations = 0;
};

struct GeodesicResult {
  Polyline path;
  double upper_bound = 0.0;  // weighted length of path
  double lower_bound = 0.0;  // j for the quasihyperbolic weight, else 0
  int iterations = 0;
  bool converged = false;
  std::vector<LevelRecord> refinement_history;
  bool symmetry_perturbed = false;  // initial path offset across a puncture
  bool grid_initialized = false;
};

/// Minimizes the weighted length over polylines from x to y.
///
/// Level 0 is the straight segment with vertices at equal weighted length,
/// or a grid-graph shortest path when the segment leaves the domain.  Each
/// level runs damped Newton on the interior vertices, moving every vertex
/// normal to its local chord, with a backtracking line search that keeps all
/// vertices and segments inside the domain.  Refinement inserts the weighted
/// midpoint of every segment, so the path is unchanged by refinement and
/// level lengths never increase.
GeodesicResult solve_geodesic(const Weight& weight, const Vector& x, const Vector& y,
                              const SolverConfig& config = {});

struct DistanceBounds {
  double upper = 0.0;
  double lower = 0.0;
};

/// Quasihyperbolic distance bracket: lower = j(x, y), upper = solved length.
DistanceBounds qh_distance(const Domain& domain, const Vector& x, const Vector& y,
                           const SolverConfig& config = {});

/// Resamples the path at `samples` points equally spaced in weighted length.
/// The result carries the source arc length at each sample.
Polyline unit_speed_reparametrize(const Weight& weight, const Polyline& path, int samples);

/// Largest interior turning angle.  With at least three interior vertices
/// the first and last are skipped; otherwise every interior angle counts.
double max_interior_turning_angle(const Polyline& path);

struct TurningProfile {
  std::vector<int> vertex_counts;
  std::vector<double> max_angle_per_level;
  std::vector<double> decrease_factors;  // angle(level k-1) / angle(level k)
};

TurningProfile turning_angle_profile(const GeodesicResult& result);

struct AverageReport {
  double length_lambda = 0.0;
  double length_gamma = 0.0;
  double avg_of_lengths = 0.0;
  double length_of_avg = 0.0;
  bool dominated = false;
  bool equal_lengths = false;  // within 1e-9 relative
};

/// Both paths are parametrized on [0, 1] at constant quasihyperbolic speed
/// and averaged pointwise.  The length of the average is integrated with
/// the exact velocity lambda'(t) = L F(t) / w(lambda(t)), so for paths of
/// equal length the integrand is dominated node by node.
AverageReport average_path_check(const Weight& weight, const Polyline& lambda, const Polyline& gamma);

/// Cuts the longer path at the weighted length of the shorter one.
std::pair<Polyline, Polyline> equalize_lengths(const Weight& weight, const Polyline& a, const Polyline& b);

struct EndpointDerivativeReport {
  Vector argmax_direction;
  Vector terminal_velocity;   // unit direction of the last geodesic segment
  double angle_to_velocity = 0.0;  // radians
  double max_value = 0.0;
  double predicted = 0.0;          // 1 / d(x)
  double reverse_value = 0.0;      // derivative along the reversed velocity
  std::vector<Vector> directions;
  std::vector<double> values;
  double step = 0.0;
};

/// Central differences (k(x0, x + h z) - k(x0, x - h z)) / 2h over unit
/// directions z of the norm; h = 0 selects 1e-4 d(x).  In the plane the
/// best sampled angle is polished by golden-section search.
EndpointDerivativeReport endpoint_derivative_check(const Domain& domain, const Vector& x0,
                                                   const Vector& x, const GeodesicResult& result,
                                                   int directions, double h,
                                                   const SolverConfig& config = {});

/// Point on the quasihyperbolic sphere S(x0, r) along the ray x0 + t u.
struct RayCrossing {
  double t = 0.0;
  Vector point;
  double residual = 0.0;  // k(x0, point) - r
  bool censored = false;  // the ray leaves the domain before reaching r
  int solves = 0;
};

/// Brackets the crossing between the straight-segment length (an upper
/// bound of k) and j (a lower bound), then runs Illinois regula falsi on
/// k(x0, x0 + t u) - r until |residual| <= tolerance.
RayCrossing sphere_crossing(const Domain& domain, const Vector& x0, const Vector& u, double r,
                            const SolverConfig& config, double tolerance = 1e-9);

struct MidpointProbeReport {
  double radius = 0.0;                 // k(x0, y)
  std::vector<Vector> projected;       // y_n moved onto S(x0, radius)
  std::vector<double> midpoint_distances;  // k(x0, (y + y_n)/2)
  std::vector<double> midpoint_gaps;       // radius - midpoint distance
  std::vector<double> norm_gaps;           // ||y - y_n||
  bool midpoint_converges = false;
  bool norm_converges = false;
  bool consistent = true;  // midpoint convergence accompanied by norm convergence
};

MidpointProbeReport midpoint_convergence_probe(const Domain& domain, const Vector& x0, const Vector& y,
                                               const std::vector<Vector>& y_seq,
                                               const SolverConfig& config = {});

}  // namespace qhgeo
