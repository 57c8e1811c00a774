#include "qhgeo/balls.hpp"
#include "qhgeo/catalog.hpp"

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

const Domain kHalfPlane = catalog_domain("half-plane");

double degrees(double rad) { return rad * 180.0 / std::numbers::pi; }

}  // namespace

TEST_CASE("normal-ray crossings of the half-plane sphere") {
  const double r = std::log(2.0);
  const SphereTrace tr = trace_sphere(kHalfPlane, v2(0, 1), r, {v2(0, 1), v2(0, -1)});
  REQUIRE(tr.censored_count() == 0);
  CHECK(tr.points[0](1) == doctest::Approx(2.0).epsilon(1e-6));
  CHECK(tr.points[1](1) == doctest::Approx(0.5).epsilon(1e-6));
  CHECK(std::abs(tr.points[0](0)) < 1e-12);
}

TEST_CASE("traced spheres are the hyperbolic circles") {
  // S(e2, r) in the upper half-plane is the Euclidean circle about (0, cosh r)
  // of radius sinh r.
  for (double r : {0.3, 1.0, 2.0}) {
    const SphereTrace tr = trace_sphere(kHalfPlane, v2(0, 1), r, circle_directions(24, 0.1));
    CHECK(tr.censored_count() == 0);
    for (std::size_t i = 0; i < tr.points.size(); ++i) {
      const double rho = (tr.points[i] - v2(0, std::cosh(r))).norm();
      CHECK(rho == doctest::Approx(std::sinh(r)).epsilon(0.005));
      CHECK(std::abs(tr.residuals[i]) <= tr.tolerance);
    }
  }
}

TEST_CASE("small radii collapse onto the centre") {
  const SphereTrace tr = trace_sphere(catalog_domain("square"), v2(0.4, 0.6), 1e-7, circle_directions(8));
  for (const Vector& p : tr.points) CHECK((p - v2(0.4, 0.6)).norm() < 1e-6);
}

TEST_CASE("crossing distance grows with the radius") {
  for (const std::string& name : {"square", "slab", "punctured"}) {
    const Domain d = catalog_domain(name);
    const Vector x0 = name == "punctured" ? v2(1, 0.5) : v2(0.5, 0.5);
    const auto dirs = circle_directions(6, 0.2);
    std::vector<double> prev(dirs.size(), 0.0);
    for (double r : {0.2, 0.5, 0.9}) {
      const SphereTrace tr = trace_sphere(d, x0, r, dirs);
      for (std::size_t i : tr.traced()) {
        CHECK(tr.t[i] > prev[i]);
        prev[i] = tr.t[i];
      }
    }
  }
}

TEST_CASE("far spheres in bounded domains are censored") {
  const SphereTrace tr = trace_sphere(catalog_domain("square"), v2(0.5, 0.5), 40.0, circle_directions(6));
  CHECK(tr.censored_count() == 6);
  CHECK(tr.traced().empty());
}

TEST_CASE("quasihyperbolic balls of convex domains are convex") {
  SUBCASE("half-plane") {
    const SphereTrace tr = trace_sphere(kHalfPlane, v2(0, 1), 1.0, circle_directions(32));
    const ConvexityReport rep = convexity_check(tr, 100, {}, 3);
    CHECK(rep.pairs_checked == 100);
    CHECK(rep.violations == 0);
    CHECK(rep.worst_excess <= 1e-3);
    CHECK(rep.separated_pairs > 0);
    CHECK(rep.strictness_margin > 0.0);
  }
  SUBCASE("square in the l^4 norm") {
    const Domain d = Domain::box(Norm::p_norm(2, 4.0), Vector::Zero(2), Vector::Ones(2));
    const SphereTrace tr = trace_sphere(d, v2(0.35, 0.55), 0.8, circle_directions(24));
    const ConvexityReport rep = convexity_check(tr, 50, {}, 4);
    CHECK(rep.violations == 0);
    CHECK(rep.strictness_margin > 0.0);
  }
  SUBCASE("punctured space is refused") {
    const SphereTrace tr = trace_sphere(catalog_domain("punctured"), v2(1, 0), 0.5, circle_directions(8));
    CHECK_THROWS_AS(convexity_check(tr, 10), std::invalid_argument);
  }
}

TEST_CASE("j-balls of radius log 2 are starlike") {
  for (const std::string& name : catalog_names()) {
    const Domain d = catalog_domain(name);
    const Vector x0 = name == "punctured" ? v2(1, 0) : name == "half-plane" ? v2(0, 1) : v2(0.5, 0.5);
    const StarlikeReport rep = j_ball_starlike_check(d, x0, std::log(2.0), 500, 7);
    CAPTURE(name);
    CHECK(rep.guaranteed);
    CHECK(rep.samples == 500);
    CHECK(rep.violations == 0);
    CHECK(rep.bound_above_log2 == 0);
    CHECK(rep.max_j <= std::log(2.0) + 1e-9);
  }
  const StarlikeReport big = j_ball_starlike_check(kHalfPlane, v2(0, 1), 2.0, 50, 7);
  CHECK_FALSE(big.guaranteed);
  CHECK(big.ball_violations == 0);
}

TEST_CASE("tangent normals") {
  const SphereTrace tr = trace_sphere(kHalfPlane, v2(0, 1), std::log(2.0), circle_directions(16, 0.0));
  // direction 4 of 16 points straight up
  const TangentEstimate top = tangent_normal(tr, 4, 2);
  CHECK(std::abs(top.euclidean_normal(0)) < 1e-3);
  CHECK(top.euclidean_normal(1) > 0.999);
  CHECK(top.normal.coefficients.cwiseAbs().maxCoeff() == doctest::Approx(1.0));

  // two points determine the line through them exactly
  SphereTrace two = tr;
  two.points = {v2(0, 0), v2(1, 1), v2(5, 5)};
  two.censored = {0, 0, 0};
  two.center = v2(1, -1);
  const TangentEstimate line = tangent_normal(two, 0, 1);
  CHECK(line.fit_residual < 1e-14);
  CHECK(line.euclidean_normal(0) == doctest::Approx(-std::sqrt(0.5)));
  CHECK(line.euclidean_normal(1) == doctest::Approx(std::sqrt(0.5)));
  CHECK_THROWS_AS(tangent_normal(tr, 99), std::invalid_argument);
}

TEST_CASE("nested spheres share the tangent at the contact point") {
  SUBCASE("vertical geodesic") {
    const TangentCoincidenceReport rep =
        tangent_coincidence_check(kHalfPlane, v2(0, 1), std::log(4.0), v2(0, 2), std::log(2.0), v2(0, 4));
    CHECK_FALSE(rep.skipped);
    CHECK(degrees(rep.angle_between_normals) <= 2.0);
    CHECK(rep.k_y_z == doctest::Approx(std::log(2.0)).epsilon(0.005));
  }
  SUBCASE("circular geodesic") {
    // (0, sqrt 2) is the hyperbolic midpoint of the arc from (-1, 1) to (1, 1)
    const double r = std::acosh(3.0);
    const Vector y = v2(0, std::sqrt(2.0));
    const TangentCoincidenceReport rep =
        tangent_coincidence_check(kHalfPlane, v2(-1, 1), r, y, 0.5 * r, v2(1, 1), {}, 5e-3);
    CHECK(degrees(rep.angle_between_normals) <= 2.0);
  }
  SUBCASE("degenerate inner sphere") {
    const TangentCoincidenceReport rep =
        tangent_coincidence_check(kHalfPlane, v2(0, 1), std::log(4.0), v2(0, 4), 0.0, v2(0, 4));
    CHECK(rep.skipped);
  }
  SUBCASE("centre off the geodesic") {
    CHECK_THROWS_AS(
        tangent_coincidence_check(kHalfPlane, v2(0, 1), std::log(4.0), v2(0.5, 2), std::log(2.0), v2(0, 4)),
        std::invalid_argument);
  }
}

TEST_CASE("gauge of a ball matches the radial oracle") {
  // In B(0, 1) the quasihyperbolic distance from the centre is log 1/(1 - ||x||),
  // so the gauge of the ball of radius r is ||v|| / (1 - exp(-r)).
  for (double p : {1.5, 2.0, 4.0}) {
    const Norm n = Norm::p_norm(2, p);
    const Domain ball = Domain::ball(n, Vector::Zero(2), 1.0);
    const double r = 0.7;
    const double scale = 1.0 / (1.0 - std::exp(-r));
    for (const Vector& v : circle_directions(10, 0.3)) {
      CHECK(gauge_from_ball(ball, r, v) == doctest::Approx(scale * n(v)).epsilon(1e-6));
    }
    const GaugeEquivalence eq = gauge_equivalence(ball, r, 16);
    CHECK(eq.c1 == doctest::Approx(scale).epsilon(1e-6));
    CHECK(eq.c2 == doctest::Approx(scale).epsilon(1e-6));
  }
}

TEST_CASE("gauge of the square is a norm") {
  const Domain sq = Domain::box(Norm::euclidean(2), v2(-1, -1), v2(1, 1));
  std::mt19937_64 rng(8);
  std::normal_distribution<double> gauss;
  const double r = 0.5;
  for (int i = 0; i < 5; ++i) {
    const Vector a = v2(gauss(rng), gauss(rng)), b = v2(gauss(rng), gauss(rng));
    const double ga = gauge_from_ball(sq, r, a), gb = gauge_from_ball(sq, r, b);
    CHECK(gauge_from_ball(sq, r, Vector(a + b)) <= (ga + gb) * (1.0 + 1e-6));
    CHECK(gauge_from_ball(sq, r, Vector(-2.5 * a)) == doctest::Approx(2.5 * ga).epsilon(1e-6));
  }
  // a sphere point has gauge one
  const RayCrossing c = sphere_crossing(sq, Vector::Zero(2), v2(0.3, 0.8), r, {});
  CHECK(gauge_from_ball(sq, r, c.point) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK_THROWS_AS(gauge_from_ball(kHalfPlane, r, v2(1, 0)), std::invalid_argument);
}
