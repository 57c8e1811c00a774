#include "qhgeo/balls.hpp"

#include <Eigen/QR>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

namespace qhgeo {

std::vector<std::size_t> SphereTrace::traced() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < censored.size(); ++i) {
    if (!censored[i]) out.push_back(i);
  }
  return out;
}

int SphereTrace::censored_count() const {
  return static_cast<int>(std::count(censored.begin(), censored.end(), char(1)));
}

std::vector<Vector> circle_directions(int count, double phase) {
  std::vector<Vector> out;
  for (int i = 0; i < count; ++i) {
    const double a = phase + 2.0 * std::numbers::pi * i / count;
    Vector u(2);
    u << std::cos(a), std::sin(a);
    out.push_back(u);
  }
  return out;
}

SphereTrace trace_sphere(const Domain& domain, const Vector& x0, double r,
                         const std::vector<Vector>& directions, const SolverConfig& config,
                         double tolerance) {
  if (!domain.contains(x0)) throw std::domain_error("sphere centre outside the domain");
  if (!(r > 0.0)) throw std::invalid_argument("sphere radius must be positive");
  SphereTrace trace{domain, x0, r, tolerance, {}, {}, {}, {}, {}, {}};
  for (const Vector& u : directions) {
    const RayCrossing c = sphere_crossing(domain, x0, u, r, config, tolerance);
    trace.directions.push_back(u);
    trace.t.push_back(c.t);
    trace.points.push_back(c.censored ? Vector(x0) : c.point);
    trace.residuals.push_back(c.residual);
    trace.censored.push_back(c.censored ? 1 : 0);
  }
  if (!directions.empty() && trace.censored_count() == static_cast<int>(directions.size())) {
    trace.warning = "every ray left the domain before reaching the sphere";
  }
  return trace;
}

ConvexityReport convexity_check(const SphereTrace& trace, int samples, const SolverConfig& config,
                                std::uint64_t seed, double separation) {
  if (!trace.domain.is_convex()) throw std::invalid_argument("convexity check needs a convex domain");
  const std::vector<std::size_t> ok = trace.traced();
  if (ok.size() < 2) throw std::invalid_argument("convexity check needs at least two traced points");
  const Weight weight = Weight::quasihyperbolic(trace.domain);
  const Norm& norm = trace.domain.norm();
  ConvexityReport rep;
  rep.censored = trace.censored_count();
  rep.worst_excess = -std::numeric_limits<double>::infinity();
  rep.strictness_margin = std::numeric_limits<double>::infinity();
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, ok.size() - 1);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (int k = 0; k < samples; ++k) {
    const std::size_t i = ok[pick(rng)];
    std::size_t j = ok[pick(rng)];
    while (j == i) j = ok[pick(rng)];
    const double s = 0.05 + 0.9 * unif(rng);
    const Vector& p = trace.points[i];
    const Vector& q = trace.points[j];
    const Vector z = s * p + (1.0 - s) * q;
    const double excess = solve_geodesic(weight, trace.center, z, config).upper_bound - trace.radius;
    ++rep.pairs_checked;
    rep.worst_excess = std::max(rep.worst_excess, excess);
    if (excess > trace.tolerance) ++rep.violations;
    if (norm(p - q) >= separation) {
      ++rep.separated_pairs;
      rep.strictness_margin = std::min(rep.strictness_margin, -excess);
    }
  }
  if (rep.separated_pairs == 0) rep.strictness_margin = 0.0;
  return rep;
}

StarlikeReport j_ball_starlike_check(const Domain& domain, const Vector& x0, double r, int samples,
                                     std::uint64_t seed, int t_steps) {
  if (!domain.contains(x0)) throw std::domain_error("ball centre outside the domain");
  if (!(r > 0.0)) throw std::invalid_argument("ball radius must be positive");
  if (samples < 1 || t_steps < 1) throw std::invalid_argument("need positive sample counts");
  const Norm& norm = domain.norm();
  const Eigen::Index n = x0.size();
  const double d0 = domain.boundary_distance(x0);
  const double tol = 1e-9;
  StarlikeReport rep;
  rep.guaranteed = r <= std::log(2.0) + 1e-15;
  // ||y - x0|| <= (e^r - 1) d0 and ||v||_inf <= ||v|| / min weight.
  const double half = std::expm1(r) * d0 / norm.weights().minCoeff();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  long attempts = 0;
  const long max_attempts = 1000L * samples;
  while (rep.samples < samples && attempts < max_attempts) {
    ++attempts;
    Vector y(n);
    for (Eigen::Index i = 0; i < n; ++i) y(i) = x0(i) + half * unif(rng);
    if (!domain.contains(y) || j_metric(domain, x0, y) > r) continue;
    ++rep.samples;
    const double L = norm(y - x0);
    const double dy = domain.boundary_distance(y);
    for (int k = 1; k <= t_steps; ++k) {
      const double t = static_cast<double>(k) / t_steps;
      const Vector z = x0 + t * (y - x0);
      ++rep.evaluations;
      if (!domain.contains(z)) {
        ++rep.ball_violations;
        continue;
      }
      const double jz = j_metric(domain, x0, z);
      rep.max_j = std::max(rep.max_j, jz);
      if (jz > r + tol) ++rep.ball_violations;
      if (jz > std::log(2.0) + tol) ++rep.log2_violations;
      const double denom = std::min(d0, dy - (1.0 - t) * L);
      if (denom > 0.0) {
        const double bound = std::log1p(t * L / denom);
        if (jz > bound + tol) ++rep.inequality_violations;
        if (bound > std::log(2.0) + tol) ++rep.bound_above_log2;
      }
    }
  }
  rep.violations = rep.ball_violations + rep.log2_violations + rep.inequality_violations;
  return rep;
}

TangentEstimate tangent_normal(const SphereTrace& trace, std::size_t z_index, int k_neighbors) {
  const std::vector<std::size_t> ok = trace.traced();
  if (z_index >= trace.points.size() || trace.censored[z_index]) {
    throw std::invalid_argument("tangent point is not a traced sphere point");
  }
  const Eigen::Index n = trace.center.size();
  const std::size_t k = static_cast<std::size_t>(k_neighbors > 0 ? k_neighbors : 2 * n);
  const Vector& z = trace.points[z_index];
  std::vector<std::size_t> others;
  for (std::size_t i : ok) {
    if (i != z_index) others.push_back(i);
  }
  std::sort(others.begin(), others.end(), [&](std::size_t a, std::size_t b) {
    return (trace.points[a] - z).norm() < (trace.points[b] - z).norm();
  });
  if (others.size() > k) others.resize(k);
  if (static_cast<Eigen::Index>(others.size()) + 1 < n) {
    throw std::invalid_argument("not enough neighbours for a tangent fit");
  }
  Matrix P(static_cast<Eigen::Index>(others.size()) + 1, n);
  P.row(0) = z.transpose();
  for (std::size_t i = 0; i < others.size(); ++i) {
    P.row(static_cast<Eigen::Index>(i) + 1) = trace.points[others[i]].transpose();
  }
  const Eigen::RowVectorXd centroid = P.colwise().mean();
  const Matrix C = P.rowwise() - centroid;
  const Eigen::JacobiSVD<Matrix> svd(C, Eigen::ComputeFullV);
  const Vector sv = svd.singularValues();
  if (sv.size() >= n - 1 && n >= 2 && sv(n - 2) <= 1e-14 * std::max(sv(0), 1e-300)) {
    throw std::invalid_argument("degenerate neighbour configuration");
  }
  Vector nu = svd.matrixV().col(n - 1);
  if (nu.dot(z - trace.center) < 0.0) nu = -nu;
  TangentEstimate est;
  est.point = z;
  est.euclidean_normal = nu;
  const double dual = trace.domain.norm().dual(nu);
  est.normal.coefficients = nu / dual;
  est.normal.dual_norm_value = 1.0;
  est.fit_residual = sv.size() >= n ? sv(n - 1) / std::sqrt(static_cast<double>(P.rows())) : 0.0;
  return est;
}

namespace {

/// Rays fanning around the direction of z - c with angular spread `angle`
/// in each orthogonal direction; the central ray is first.
std::vector<Vector> fan(const Vector& centre_dir, double angle) {
  const Eigen::Index n = centre_dir.size();
  const Vector u = centre_dir.normalized();
  std::vector<Vector> out{u};
  const Eigen::HouseholderQR<Matrix> qr{Matrix(u)};
  const Matrix Q = qr.householderQ();
  for (Eigen::Index k = 1; k < n; ++k) {
    for (int side : {-2, -1, 1, 2}) {
      const double a = side * angle;
      out.push_back(std::cos(a) * u + std::sin(a) * Vector(Q.col(k)));
    }
  }
  return out;
}

}  // namespace

TangentCoincidenceReport tangent_coincidence_check(const Domain& domain, const Vector& x0, double r,
                                                   const Vector& y, double s, const Vector& z,
                                                   const SolverConfig& config,
                                                   double hypothesis_tolerance) {
  const Weight weight = Weight::quasihyperbolic(domain);
  TangentCoincidenceReport rep;
  rep.k_x0_z = solve_geodesic(weight, x0, z, config).upper_bound;
  rep.k_x0_y = solve_geodesic(weight, x0, y, config).upper_bound;
  const double tol = hypothesis_tolerance * r;
  if (std::abs(rep.k_x0_z - r) > tol) throw std::invalid_argument("z does not lie on S(x0, r)");
  if (std::abs(rep.k_x0_y + s - r) > tol) throw std::invalid_argument("nesting hypothesis s = r - k(x0, y) fails");
  if (s <= tol) {
    rep.skipped = true;
    return rep;
  }
  rep.k_y_z = solve_geodesic(weight, y, z, config).upper_bound;
  if (std::abs(rep.k_y_z - s) > tol) throw std::invalid_argument("z does not lie on S(y, s); y is off the geodesic");

  const double h = 0.05 * domain.boundary_distance(z);
  const SphereTrace outer = trace_sphere(domain, x0, r, fan(z - x0, h / (z - x0).norm()), config);
  const SphereTrace inner = trace_sphere(domain, y, s, fan(z - y, h / (z - y).norm()), config);
  if (outer.censored_count() > 0 || inner.censored_count() > 0) {
    throw std::runtime_error("local sphere trace left the domain");
  }
  rep.outer = tangent_normal(outer, 0, static_cast<int>(outer.points.size()) - 1);
  rep.inner = tangent_normal(inner, 0, static_cast<int>(inner.points.size()) - 1);
  const Vector& a = rep.outer.euclidean_normal;
  const Vector& b = rep.inner.euclidean_normal;
  rep.angle_between_normals = 2.0 * std::atan2((a - b).norm(), (a + b).norm());
  return rep;
}

double gauge_from_ball(const Domain& domain, double r, const Vector& v, const SolverConfig& config) {
  const Vector origin = Vector::Zero(domain.dim());
  if (!domain.contains(origin)) throw std::invalid_argument("gauge needs 0 inside the domain");
  if (!domain.is_symmetric_about_origin()) throw std::invalid_argument("gauge needs a domain symmetric about 0");
  if (v.size() != domain.dim() || v.norm() == 0.0) throw std::invalid_argument("gauge argument must be nonzero");
  const RayCrossing c = sphere_crossing(domain, origin, v, r, config);
  if (c.censored) throw std::runtime_error("ray does not reach the ball boundary");
  return 1.0 / c.t;
}

GaugeEquivalence gauge_equivalence(const Domain& domain, double r, int directions,
                                   const SolverConfig& config, std::uint64_t seed) {
  if (directions < 1) throw std::invalid_argument("need at least one direction");
  const Norm& norm = domain.norm();
  GaugeEquivalence out;
  out.directions = directions;
  out.c1 = std::numeric_limits<double>::infinity();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss;
  for (int i = 0; i < directions; ++i) {
    Vector v(domain.dim());
    if (domain.dim() == 2) {
      const double a = 2.0 * std::numbers::pi * i / directions;
      v << std::cos(a), std::sin(a);
    } else {
      for (Eigen::Index c = 0; c < v.size(); ++c) v(c) = gauss(rng);
    }
    const double ratio = gauge_from_ball(domain, r, v, config) / norm(v);
    out.c1 = std::min(out.c1, ratio);
    out.c2 = std::max(out.c2, ratio);
  }
  return out;
}

}  // namespace qhgeo
