#include "qhgeo/catalog.hpp"
#include "qhgeo/geodesic.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace qhgeo;

namespace {

Vector v2(double a, double b) {
  Vector v(2);
  v << a, b;
  return v;
}

Matrix columns(const std::vector<Vector>& pts) {
  Matrix m(pts.front().size(), static_cast<Eigen::Index>(pts.size()));
  for (std::size_t i = 0; i < pts.size(); ++i) m.col(static_cast<Eigen::Index>(i)) = pts[i];
  return m;
}

const Domain kHalfPlane = catalog_domain("half-plane");
const Domain kPunctured = catalog_domain("punctured");

// Hyperbolic distance of the upper half-plane.
double half_plane_oracle(const Vector& x, const Vector& y) {
  return std::acosh(1.0 + (x - y).squaredNorm() / (2.0 * x(1) * y(1)));
}

// Quasihyperbolic distance of the punctured Euclidean plane (angles up to pi).
double punctured_oracle(const Vector& x, const Vector& y) {
  const double theta = std::acos(std::clamp(x.dot(y) / (x.norm() * y.norm()), -1.0, 1.0));
  const double l = std::log(x.norm() / y.norm());
  return std::sqrt(theta * theta + l * l);
}

SolverConfig fine() {
  SolverConfig c;
  c.refinement_levels = 4;
  return c;
}

}  // namespace

TEST_CASE("half-plane examples") {
  const Weight qh = Weight::quasihyperbolic(kHalfPlane);
  const GeodesicResult vertical = solve_geodesic(qh, v2(0, 1), v2(0, 4));
  CHECK(vertical.upper_bound == doctest::Approx(std::log(4.0)).epsilon(0.005));
  CHECK(vertical.path.vertices().row(0).cwiseAbs().maxCoeff() < 1e-6);
  CHECK(vertical.path.vertex(0) == v2(0, 1));
  CHECK(vertical.path.vertex(vertical.path.size() - 1) == v2(0, 4));
  CHECK(vertical.converged);

  const GeodesicResult arc = solve_geodesic(qh, v2(-1, 1), v2(1, 1));
  CHECK(arc.upper_bound == doctest::Approx(std::acosh(3.0)).epsilon(0.01));
  CHECK(arc.upper_bound >= std::acosh(3.0) - 1e-9);
  // the geodesic is the circular arc centred at the origin through both points
  for (Eigen::Index i = 0; i < arc.path.size(); ++i) {
    CHECK(arc.path.vertex(i).norm() == doctest::Approx(std::sqrt(2.0)).epsilon(2e-3));
  }
}

TEST_CASE("coincident endpoints") {
  const Weight qh = Weight::quasihyperbolic(kHalfPlane);
  const GeodesicResult r = solve_geodesic(qh, v2(0.3, 2), v2(0.3, 2));
  CHECK(r.path.size() == 1);
  CHECK(r.upper_bound == 0.0);
  CHECK(r.lower_bound == 0.0);
  const DistanceBounds b = qh_distance(kHalfPlane, v2(0.3, 2), v2(0.3, 2));
  CHECK(b.upper == 0.0);
  CHECK(b.lower == 0.0);
}

TEST_CASE("endpoints outside the domain are rejected") {
  const Weight qh = Weight::quasihyperbolic(kHalfPlane);
  CHECK_THROWS_AS(solve_geodesic(qh, v2(0, -1), v2(0, 1)), std::domain_error);
  SolverConfig bad;
  bad.initial_vertices = 1;
  CHECK_THROWS_AS(solve_geodesic(qh, v2(0, 1), v2(0, 2), bad), std::invalid_argument);
}

TEST_CASE("distance bounds") {
  const DistanceBounds ray = qh_distance(kHalfPlane, v2(0, 1), v2(0, 4));
  CHECK(ray.lower == doctest::Approx(std::log(4.0)).epsilon(1e-12));
  CHECK(ray.upper == doctest::Approx(std::log(4.0)).epsilon(0.005));
  const DistanceBounds across = qh_distance(kHalfPlane, v2(-1, 1), v2(1, 1));
  CHECK(across.lower == doctest::Approx(std::log(3.0)).epsilon(1e-12));
  CHECK(across.upper == doctest::Approx(1.7627).epsilon(0.01));
}

TEST_CASE("random half-plane pairs match the hyperbolic oracle") {
  std::mt19937_64 rng(101);
  for (int i = 0; i < 20; ++i) {
    const Vector x = catalog_point("half-plane", rng), y = catalog_point("half-plane", rng);
    const double k = qh_distance(kHalfPlane, x, y).upper;
    const double oracle = half_plane_oracle(x, y);
    CHECK(k >= oracle * (1.0 - 1e-9));
    CHECK(k <= oracle * 1.01);
  }
}

TEST_CASE("punctured plane matches its closed form") {
  std::mt19937_64 rng(102);
  for (int i = 0; i < 20; ++i) {
    const Vector x = catalog_point("punctured", rng), y = catalog_point("punctured", rng);
    const double k = qh_distance(kPunctured, x, y).upper;
    const double oracle = punctured_oracle(x, y);
    CHECK(k >= oracle * (1.0 - 1e-6));
    CHECK(k <= oracle * 1.01);
  }
}

TEST_CASE("antipodal points around the puncture") {
  const Weight qh = Weight::quasihyperbolic(kPunctured);
  const GeodesicResult r = solve_geodesic(qh, v2(1, 0), v2(-1, 0), fine());
  CHECK(r.grid_initialized);
  CHECK(r.symmetry_perturbed);
  CHECK(r.upper_bound == doctest::Approx(std::numbers::pi).epsilon(0.01));
  for (Eigen::Index i = 0; i < r.path.size(); ++i) CHECK(r.path.distances()(i) > 0.5);
}

TEST_CASE("non-convex start: the straight segment crosses the puncture") {
  const Weight qh = Weight::quasihyperbolic(kPunctured);
  const Vector x = v2(2, 0.01), y = v2(-0.5, -0.003);
  const GeodesicResult r = solve_geodesic(qh, x, y, fine());
  CHECK(r.grid_initialized);
  CHECK(r.upper_bound == doctest::Approx(punctured_oracle(x, y)).epsilon(0.01));
}

TEST_CASE("three-dimensional ball with a non-Euclidean norm") {
  const Domain ball = Domain::ball(Norm::p_norm(3, 3.0), Vector::Zero(3), 1.0);
  Vector x(3), y(3);
  x << -0.5, 0.2, 0.1;
  y << 0.4, -0.3, 0.5;
  const DistanceBounds b = qh_distance(ball, x, y, fine());
  CHECK(b.lower <= b.upper + 1e-9);
  const GeodesicResult r = solve_geodesic(Weight::quasihyperbolic(ball), x, y, fine());
  CHECK(r.converged);
  // the straight chord is an admissible competitor
  CHECK(r.upper_bound <= segment_length(Weight::quasihyperbolic(ball), x, y) + 1e-12);
}

TEST_CASE("j never exceeds the computed distance") {
  std::mt19937_64 rng(103);
  for (const std::string& name : catalog_names()) {
    const Domain d = catalog_domain(name);
    for (int i = 0; i < 40; ++i) {
      const Vector x = catalog_point(name, rng), y = catalog_point(name, rng);
      const DistanceBounds b = qh_distance(d, x, y);
      CHECK(b.lower <= b.upper + 1e-9);
    }
  }
}

TEST_CASE("symmetry and triangle inequality of the upper bound") {
  std::mt19937_64 rng(104);
  const SolverConfig cfg;
  for (const std::string& name : {"square", "slab", "half-plane"}) {
    const Domain d = catalog_domain(name);
    for (int i = 0; i < 8; ++i) {
      const Vector x = catalog_point(name, rng), y = catalog_point(name, rng), z = catalog_point(name, rng);
      const double xy = qh_distance(d, x, y, cfg).upper, yx = qh_distance(d, y, x, cfg).upper;
      CHECK(std::abs(xy - yx) <= 2.0 * cfg.length_tolerance * xy);
      const double xz = qh_distance(d, x, z, cfg).upper, yz = qh_distance(d, y, z, cfg).upper;
      CHECK(xz <= xy + yz + 3.0 * cfg.length_tolerance * xz);
    }
  }
}

TEST_CASE("refinement never lengthens the path") {
  std::mt19937_64 rng(105);
  for (const std::string& name : catalog_names()) {
    const Weight w = Weight::quasihyperbolic(catalog_domain(name));
    for (int i = 0; i < 6; ++i) {
      const GeodesicResult r = solve_geodesic(w, catalog_point(name, rng), catalog_point(name, rng), fine());
      for (std::size_t k = 1; k < r.refinement_history.size(); ++k) {
        CHECK(r.refinement_history[k].length <= r.refinement_history[k - 1].length + 1e-9);
      }
      CHECK(r.refinement_history.back().vertex_count == r.path.size());
    }
  }
}

TEST_CASE("independently seeded solves agree") {
  std::mt19937_64 rng(106);
  for (double p : {1.5, 2.0, 4.0}) {
    const Domain d = Domain::box(Norm::p_norm(2, p), Vector::Zero(2), Vector::Ones(2));
    const Weight w = Weight::quasihyperbolic(d);
    for (int i = 0; i < 3; ++i) {
      const Vector x = catalog_point("square", rng), y = catalog_point("square", rng);
      SolverConfig a = fine(), b = fine();
      a.seed = 11;
      b.seed = 977;
      const GeodesicResult ra = solve_geodesic(w, x, y, a), rb = solve_geodesic(w, x, y, b);
      CHECK(std::abs(ra.upper_bound - rb.upper_bound) <= 2.0 * a.length_tolerance * ra.upper_bound);
      // unit-speed resamplings stay within a path tolerance of 2% of the chord
      const Polyline ua = unit_speed_reparametrize(w, ra.path, 33), ub = unit_speed_reparametrize(w, rb.path, 33);
      const double sup = (ua.vertices() - ub.vertices()).colwise().norm().maxCoeff();
      CHECK(sup <= 0.02 * (x - y).norm() + 1e-3);
    }
  }
}

TEST_CASE("unit-speed reparametrization") {
  const Weight qh = Weight::quasihyperbolic(kHalfPlane);
  const double e2 = std::exp(2.0);
  const Polyline seg = Polyline::build(qh, columns({v2(0, 1), v2(0, e2)}));
  const Polyline three = unit_speed_reparametrize(qh, seg, 3);
  CHECK(three.size() == 3);
  CHECK(three.vertex(1)(1) == doctest::Approx(std::numbers::e).epsilon(1e-9));
  const Polyline two = unit_speed_reparametrize(qh, seg, 2);
  CHECK(two.vertex(0) == seg.vertex(0));
  CHECK(two.vertex(1) == seg.vertex(1));

  const GeodesicResult arc = solve_geodesic(qh, v2(-1, 1), v2(1, 1));
  const Polyline u = unit_speed_reparametrize(qh, arc.path, 21);
  const double step = arc.path.length() / 20.0;
  for (Eigen::Index i = 1; i < u.size(); ++i) {
    CHECK(u.cumulative()(i) - u.cumulative()(i - 1) == doctest::Approx(step).epsilon(1e-6));
  }
  CHECK(u.length() == doctest::Approx(arc.path.length()).epsilon(1e-9));
  CHECK_THROWS_AS(unit_speed_reparametrize(qh, Polyline::build(qh, columns({v2(0, 1)})), 5), std::invalid_argument);
}

TEST_CASE("turning-angle profile") {
  const Weight hp = Weight::quasihyperbolic(kHalfPlane);
  SolverConfig cfg;
  cfg.refinement_levels = 5;
  const TurningProfile arc = turning_angle_profile(solve_geodesic(hp, v2(-1, 1), v2(1, 1), cfg));
  CHECK(arc.decrease_factors.size() == 5);
  for (double f : arc.decrease_factors) CHECK(f >= 1.4);

  const TurningProfile radial =
      turning_angle_profile(solve_geodesic(Weight::quasihyperbolic(kPunctured), v2(0.5, 0.5), v2(2, 2), cfg));
  for (double a : radial.max_angle_per_level) CHECK(a < 1e-6);

  const Polyline two = Polyline::build(hp, columns({v2(0, 1), v2(1, 1), v2(1, 2)}));
  const Vector angles = turning_angles(two);
  CHECK(angles.size() == 1);
  CHECK(angles(0) == doctest::Approx(std::numbers::pi / 2));
}

TEST_CASE("averaging examples") {
  const Weight hp = Weight::quasihyperbolic(kHalfPlane);
  const Polyline line = Polyline::build(hp, columns({v2(0, 1), v2(0, 2), v2(0, 4)}));
  const AverageReport same = average_path_check(hp, line, line);
  CHECK(same.length_of_avg == doctest::Approx(same.avg_of_lengths).epsilon(1e-9));
  CHECK(same.dominated);

  const Polyline bent = Polyline::build(hp, columns({v2(0, 1), v2(0.6, 1.8), v2(0.5, 3.0), v2(0, 4)}));
  const auto [a, b] = equalize_lengths(hp, line, bent);
  const AverageReport r = average_path_check(hp, a, b);
  CHECK(r.equal_lengths);
  CHECK(r.dominated);
  CHECK(r.length_of_avg < r.avg_of_lengths);

  CHECK_THROWS_AS(average_path_check(Weight::quasihyperbolic(kPunctured),
                                     Polyline::build(Weight::quasihyperbolic(kPunctured), columns({v2(1, 0), v2(2, 0)})),
                                     Polyline::build(Weight::quasihyperbolic(kPunctured), columns({v2(1, 0), v2(2, 0)}))),
                  std::invalid_argument);
}

TEST_CASE("averaging over random square paths") {
  std::mt19937_64 rng(107);
  const Weight w = Weight::quasihyperbolic(catalog_domain("square"));
  int violations = 0;
  for (int i = 0; i < 200; ++i) {
    std::vector<Vector> p, q;
    for (int k = 0; k < 6; ++k) {
      p.push_back(catalog_point("square", rng));
      q.push_back(catalog_point("square", rng));
    }
    const auto [a, b] = equalize_lengths(w, Polyline::build(w, columns(p)), Polyline::build(w, columns(q)));
    const AverageReport r = average_path_check(w, a, b);
    violations += r.dominated ? 0 : 1;
  }
  CHECK(violations == 0);
}

TEST_CASE("endpoint derivative on the vertical ray") {
  const Vector x0 = v2(0, 1), x = v2(0, 4);
  const GeodesicResult res = solve_geodesic(Weight::quasihyperbolic(kHalfPlane), x0, x);
  const EndpointDerivativeReport r = endpoint_derivative_check(kHalfPlane, x0, x, res, 64, 0.0);
  CHECK(r.angle_to_velocity * 180.0 / std::numbers::pi <= 5.0);
  CHECK(r.max_value == doctest::Approx(0.25).epsilon(0.02));
  CHECK(r.predicted == 0.25);
  CHECK(r.reverse_value == doctest::Approx(-0.25).epsilon(0.02));
  CHECK(r.argmax_direction(1) > 0.99);
  // horizontal directions are tangent to the sphere through x
  for (std::size_t i = 0; i < r.directions.size(); ++i) {
    if (std::abs(r.directions[i](1)) < 1e-12) CHECK(std::abs(r.values[i]) < 1e-3);
  }
}

TEST_CASE("endpoint derivative off the axis") {
  const Vector x0 = v2(-1, 1), x = v2(1, 1);
  const GeodesicResult res = solve_geodesic(Weight::quasihyperbolic(kHalfPlane), x0, x, fine());
  const EndpointDerivativeReport r = endpoint_derivative_check(kHalfPlane, x0, x, res, 64, 0.0);
  CHECK(r.angle_to_velocity * 180.0 / std::numbers::pi <= 5.0);
  CHECK(r.max_value == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("sphere crossing along the normal ray") {
  const SolverConfig cfg;
  const RayCrossing up = sphere_crossing(kHalfPlane, v2(0, 1), v2(0, 1), std::log(2.0), cfg);
  CHECK(up.point(1) == doctest::Approx(2.0).epsilon(1e-6));
  CHECK(std::abs(up.residual) <= 1e-9);
  const RayCrossing down = sphere_crossing(kHalfPlane, v2(0, 1), v2(0, -1), std::log(2.0), cfg);
  CHECK(down.point(1) == doctest::Approx(0.5).epsilon(1e-6));
  const RayCrossing tiny = sphere_crossing(kHalfPlane, v2(0, 1), v2(1, 0), 1e-6, cfg);
  CHECK((tiny.point - v2(0, 1)).norm() < 2e-6);
  const RayCrossing out = sphere_crossing(catalog_domain("square"), v2(0.5, 0.5), v2(1, 0), 50.0, cfg);
  CHECK(out.censored);
}

TEST_CASE("midpoint convergence probe") {
  const SolverConfig cfg;
  const Vector x0 = v2(0, 1), y = v2(1, 2);
  SUBCASE("constant sequence") {
    const MidpointProbeReport r = midpoint_convergence_probe(kHalfPlane, x0, y, {y, y, y}, cfg);
    for (double g : r.norm_gaps) CHECK(g < 1e-6);
    for (double g : r.midpoint_gaps) CHECK(std::abs(g) < 1e-6);
  }
  SUBCASE("approaching along the sphere") {
    std::vector<Vector> seq;
    for (int k = 1; k <= 6; ++k) seq.push_back(y + std::pow(0.5, k) * v2(1.0, 0.4));
    const MidpointProbeReport r = midpoint_convergence_probe(kHalfPlane, x0, y, seq, cfg);
    CHECK(r.norm_gaps.back() < r.norm_gaps.front());
    CHECK(r.midpoint_converges);
    CHECK(r.norm_converges);
    CHECK(r.consistent);
    for (const Vector& p : r.projected) {
      CHECK(half_plane_oracle(x0, p) == doctest::Approx(half_plane_oracle(x0, y)).epsilon(0.01));
    }
  }
  SUBCASE("fixed far point") {
    const MidpointProbeReport r = midpoint_convergence_probe(kHalfPlane, x0, y, std::vector<Vector>(4, v2(-1, 2)), cfg);
    CHECK(r.midpoint_gaps.back() > 0.05);
    CHECK_FALSE(r.midpoint_converges);
    CHECK(r.consistent);
  }
}
