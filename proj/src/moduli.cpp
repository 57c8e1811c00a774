#include "qhgeo/moduli.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

namespace qhgeo {
namespace {

constexpr double kPi = std::numbers::pi;

struct Plane {
  Vector b1;
  Vector b2;
};

std::vector<Plane> coordinate_planes(Eigen::Index n) {
  std::vector<Plane> planes;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      planes.push_back({Vector::Unit(n, i), Vector::Unit(n, j)});
    }
  }
  return planes;
}

Plane random_plane(Eigen::Index n, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss;
  for (;;) {
    Vector a(n), b(n);
    for (Eigen::Index i = 0; i < n; ++i) a(i) = gauss(rng);
    for (Eigen::Index i = 0; i < n; ++i) b(i) = gauss(rng);
    const double na = a.norm();
    if (na < 1e-8) continue;
    a /= na;
    b -= a.dot(b) * a;
    const double nb = b.norm();
    if (nb < 1e-8) continue;
    return {a, b / nb};
  }
}

/// Nudges a plane by a small random rotation of its basis.
Plane jitter_plane(const Plane& pl, double scale, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss;
  const Eigen::Index n = pl.b1.size();
  Vector a = pl.b1, b = pl.b2;
  for (Eigen::Index i = 0; i < n; ++i) a(i) += scale * gauss(rng);
  for (Eigen::Index i = 0; i < n; ++i) b(i) += scale * gauss(rng);
  a.normalize();
  b -= a.dot(b) * a;
  b.normalize();
  return {a, b};
}

Vector sphere_point(const Norm& norm, const Plane& pl, double theta) {
  Vector v = std::cos(theta) * pl.b1 + std::sin(theta) * pl.b2;
  return v / norm(v);
}

struct Candidate {
  double value = 0.0;
  Plane plane;
  double theta1 = 0.0;
  double theta2 = 0.0;
  Vector x;
  Vector y;
};

/// Budget-limited evaluator.  `sign` = +1 minimizes, -1 maximizes.
class Search {
 public:
  Search(long budget, double sign) : budget_(budget), sign_(sign) {}

  bool exhausted() const { return used_ >= budget_; }
  long used() const { return used_; }

  template <typename Eval>
  bool offer(Eval&& eval, const Plane& pl, double t1, double t2) {
    if (exhausted()) return false;
    ++used_;
    Candidate c = eval(pl, t1, t2);
    if (!std::isfinite(c.value)) return false;
    const bool better = !has_best_ || sign_ * c.value < sign_ * best_.value;
    if (better) {
      best_ = std::move(c);
      has_best_ = true;
    }
    return better;
  }

  bool has_best() const { return has_best_; }
  const Candidate& best() const { return best_; }

 private:
  long budget_;
  long used_ = 0;
  double sign_;
  Candidate best_;
  bool has_best_ = false;
};

Candidate convexity_pair(const Norm& norm, const Plane& pl, double theta, double eps) {
  Candidate c;
  c.plane = pl;
  c.theta1 = theta;
  c.x = sphere_point(norm, pl, theta);
  if (eps >= 2.0) {
    c.y = -c.x;
    c.theta2 = theta + kPi;
  } else {
    // The chord length from x grows from 0 to 2 along the half-circle to -x.
    double lo = 0.0, hi = kPi;
    if (norm(c.x - sphere_point(norm, pl, theta + hi)) < eps) {
      c.value = std::numeric_limits<double>::quiet_NaN();
      return c;
    }
    for (int it = 0; it < 64; ++it) {
      const double mid = 0.5 * (lo + hi);
      (norm(c.x - sphere_point(norm, pl, theta + mid)) < eps ? lo : hi) = mid;
    }
    const Vector ylo = sphere_point(norm, pl, theta + lo);
    const Vector yhi = sphere_point(norm, pl, theta + hi);
    const bool pick_lo = std::abs(norm(c.x - ylo) - eps) < std::abs(norm(c.x - yhi) - eps);
    c.y = pick_lo ? ylo : yhi;
    c.theta2 = theta + (pick_lo ? lo : hi);
  }
  c.value = 1.0 - 0.5 * norm(c.x + c.y);
  return c;
}

Candidate smoothness_pair(const Norm& norm, const Plane& pl, double t1, double t2, double tau) {
  Candidate c;
  c.plane = pl;
  c.theta1 = t1;
  c.theta2 = t2;
  c.x = sphere_point(norm, pl, t1);
  c.y = tau * sphere_point(norm, pl, t2);
  c.value = 0.5 * (norm(c.x + c.y) + norm(c.x - c.y)) - 1.0;
  return c;
}

std::vector<Plane> search_planes(const Norm& norm, long samples, std::mt19937_64& rng) {
  std::vector<Plane> planes = coordinate_planes(norm.dim());
  if (norm.dim() > 2) {
    const long extra = std::max<long>(0, samples / 256 - static_cast<long>(planes.size()));
    for (long i = 0; i < extra; ++i) planes.push_back(random_plane(norm.dim(), rng));
  }
  return planes;
}

/// Golden-section polish of a 1-D slice theta -> f(theta) on [a, b].
template <typename F>
void golden(F&& f, double a, double b, int iterations) {
  const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
  double m1 = b - invphi * (b - a), m2 = a + invphi * (b - a);
  double f1 = f(m1), f2 = f(m2);
  for (int it = 0; it < iterations; ++it) {
    if (f1 < f2) {
      b = m2; m2 = m1; f2 = f1;
      m1 = b - invphi * (b - a);
      f1 = f(m1);
    } else {
      a = m1; m1 = m2; f1 = f2;
      m2 = a + invphi * (b - a);
      f2 = f(m2);
    }
  }
}

ModulusEstimate finish(const Norm& norm, const Candidate& best, double argument, long budget,
                       std::uint64_t seed, bool convexity) {
  ModulusEstimate est;
  est.argument = argument;
  est.budget = budget;
  est.seed = seed;
  est.witness_x = best.x;
  est.witness_y = best.y;
  est.value = convexity ? 1.0 - 0.5 * norm(best.x + best.y)
                        : 0.5 * (norm(best.x + best.y) + norm(best.x - best.y)) - 1.0;
  return est;
}

}  // namespace

ModulusEstimate modulus_convexity(const Norm& norm, double eps, long budget, std::uint64_t seed) {
  if (!(eps > 0.0 && eps <= 2.0)) throw std::invalid_argument("modulus of convexity needs eps in (0, 2]");
  if (budget < 1) throw std::invalid_argument("budget must be positive");
  if (norm.dim() < 2) throw std::invalid_argument("moduli need dimension >= 2");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto eval = [&](const Plane& pl, double t1, double) { return convexity_pair(norm, pl, t1, eps); };

  Search search(budget, +1.0);
  const long stage1 = std::max<long>(1, budget * 4 / 5);
  const std::vector<Plane> planes = search_planes(norm, stage1, rng);
  for (const Plane& pl : coordinate_planes(norm.dim())) {
    for (int k = 0; k < 8; ++k) search.offer(eval, pl, k * kPi / 4.0, 0.0);
  }
  const long per_plane = std::max<long>(1, stage1 / static_cast<long>(planes.size()));
  std::vector<Candidate> tops;
  for (const Plane& pl : planes) {
    Candidate local;
    bool have = false;
    for (long k = 0; k < per_plane && !search.exhausted(); ++k) {
      const double theta = 2.0 * kPi * (static_cast<double>(k) + unit(rng)) / per_plane;
      Candidate c = convexity_pair(norm, pl, theta, eps);
      search.offer([&](const Plane&, double, double) { return c; }, pl, theta, 0.0);
      if (std::isfinite(c.value) && (!have || c.value < local.value)) {
        local = c;
        have = true;
      }
    }
    if (have) tops.push_back(local);
  }
  std::sort(tops.begin(), tops.end(),
            [](const Candidate& a, const Candidate& b) { return a.value < b.value; });
  if (tops.size() > 6) tops.resize(6);

  // Polish each top candidate in theta, then (n > 2) in the plane itself.
  const double spacing = 2.0 * kPi / static_cast<double>(per_plane);
  for (const Candidate& start : tops) {
    Plane pl = start.plane;
    double theta = start.theta1;
    auto slice = [&](double t) {
      if (search.exhausted()) return std::numeric_limits<double>::infinity();
      search.offer(eval, pl, t, 0.0);
      const Candidate c = convexity_pair(norm, pl, t, eps);
      return std::isfinite(c.value) ? c.value : std::numeric_limits<double>::infinity();
    };
    golden(slice, theta - 2.0 * spacing, theta + 2.0 * spacing, 60);
    if (norm.dim() > 2) {
      double scale = 0.05;
      for (int round = 0; round < 200 && !search.exhausted(); ++round) {
        const Plane trial = jitter_plane(pl, scale, rng);
        if (search.offer(eval, trial, theta, 0.0)) {
          pl = trial;
        } else {
          scale *= 0.9;
        }
      }
      theta = search.best().theta1;
      pl = search.best().plane;
      golden(slice, theta - spacing, theta + spacing, 40);
    }
  }
  if (!search.has_best()) throw std::runtime_error("modulus of convexity: no feasible pair found");
  return finish(norm, search.best(), eps, budget, seed, true);
}

ModulusEstimate modulus_smoothness(const Norm& norm, double tau, long budget, std::uint64_t seed) {
  if (!(tau > 0.0) || !std::isfinite(tau)) throw std::invalid_argument("modulus of smoothness needs tau > 0");
  if (budget < 1) throw std::invalid_argument("budget must be positive");
  if (norm.dim() < 2) throw std::invalid_argument("moduli need dimension >= 2");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto eval = [&](const Plane& pl, double t1, double t2) { return smoothness_pair(norm, pl, t1, t2, tau); };

  Search search(budget, -1.0);
  for (const Plane& pl : coordinate_planes(norm.dim())) {
    for (int a = 0; a < 8; ++a) {
      for (int b = 0; b < 8; ++b) search.offer(eval, pl, a * kPi / 4.0, b * kPi / 4.0);
    }
  }
  const long stage1 = std::max<long>(1, budget * 4 / 5);
  const std::vector<Plane> planes = search_planes(norm, stage1, rng);
  const long per_plane = std::max<long>(1, stage1 / static_cast<long>(planes.size()));
  const long side = std::max<long>(1, static_cast<long>(std::sqrt(static_cast<double>(per_plane))));
  std::vector<Candidate> tops;
  for (const Plane& pl : planes) {
    Candidate local;
    bool have = false;
    for (long i = 0; i < side && !search.exhausted(); ++i) {
      for (long j = 0; j < side && !search.exhausted(); ++j) {
        const double t1 = 2.0 * kPi * (static_cast<double>(i) + unit(rng)) / side;
        const double t2 = 2.0 * kPi * (static_cast<double>(j) + unit(rng)) / side;
        Candidate c = smoothness_pair(norm, pl, t1, t2, tau);
        search.offer([&](const Plane&, double, double) { return c; }, pl, t1, t2);
        if (!have || c.value > local.value) {
          local = c;
          have = true;
        }
      }
    }
    if (have) tops.push_back(local);
  }
  tops.push_back(search.best());
  std::sort(tops.begin(), tops.end(),
            [](const Candidate& a, const Candidate& b) { return a.value > b.value; });
  if (tops.size() > 6) tops.resize(6);

  // Compass search on (theta1, theta2), plus plane jitter when n > 2.
  for (const Candidate& start : tops) {
    Plane pl = start.plane;
    double t1 = start.theta1, t2 = start.theta2;
    double value = start.value;
    double step = 2.0 * kPi / static_cast<double>(side);
    while (step > 1e-13 && !search.exhausted()) {
      bool moved = false;
      const double moves[4][2] = {{step, 0.0}, {-step, 0.0}, {0.0, step}, {0.0, -step}};
      for (const auto& m : moves) {
        const Candidate c = smoothness_pair(norm, pl, t1 + m[0], t2 + m[1], tau);
        search.offer([&](const Plane&, double, double) { return c; }, pl, c.theta1, c.theta2);
        if (c.value > value) {
          value = c.value;
          t1 += m[0];
          t2 += m[1];
          moved = true;
          break;
        }
      }
      if (!moved) step *= 0.5;
    }
    if (norm.dim() > 2) {
      double scale = 0.05;
      for (int round = 0; round < 200 && !search.exhausted(); ++round) {
        const Plane trial = jitter_plane(pl, scale, rng);
        const Candidate c = smoothness_pair(norm, trial, t1, t2, tau);
        search.offer([&](const Plane&, double, double) { return c; }, trial, t1, t2);
        if (c.value > value) {
          value = c.value;
          pl = trial;
        } else {
          scale *= 0.9;
        }
      }
    }
  }
  return finish(norm, search.best(), tau, budget, seed, false);
}

PowerTypeFit power_type_fit(std::span<const ModulusEstimate> estimates) {
  if (estimates.size() < 3) throw std::invalid_argument("power type fit needs at least 3 estimates");
  std::vector<double> args;
  for (const ModulusEstimate& e : estimates) {
    if (!(e.value > 0.0)) {
      throw std::invalid_argument("power type fit: zero modulus estimate (not uniformly convex there)");
    }
    if (!(e.argument > 0.0)) throw std::invalid_argument("power type fit: arguments must be positive");
    args.push_back(e.argument);
  }
  std::sort(args.begin(), args.end());
  if (std::adjacent_find(args.begin(), args.end()) != args.end()) {
    throw std::invalid_argument("power type fit needs distinct arguments");
  }
  const Eigen::Index m = static_cast<Eigen::Index>(estimates.size());
  Matrix design(m, 2);
  Vector rhs(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    design(i, 0) = 1.0;
    design(i, 1) = std::log(estimates[static_cast<std::size_t>(i)].argument);
    rhs(i) = std::log(estimates[static_cast<std::size_t>(i)].value);
  }
  const Vector coef = design.colPivHouseholderQr().solve(rhs);
  PowerTypeFit fit;
  fit.p = coef(1);
  const Vector resid = rhs - design * coef;
  const double ss_tot = (rhs.array() - rhs.mean()).square().sum();
  fit.r_squared = ss_tot > 0.0 ? 1.0 - resid.squaredNorm() / ss_tot : 1.0;
  fit.K = std::numeric_limits<double>::infinity();
  for (const ModulusEstimate& e : estimates) {
    fit.K = std::min(fit.K, e.value / std::pow(e.argument, fit.p));
  }
  return fit;
}

double distance_to_line(const Norm& norm, const Vector& y, const Vector& x) {
  const double nx = norm(x);
  if (nx == 0.0) throw std::invalid_argument("distance to line: x must be nonzero");
  const double ny = norm(y);
  if (ny == 0.0) return 0.0;
  Eigen::Index pivot = 0;
  x.cwiseAbs().maxCoeff(&pivot);
  const double ratio = y(pivot) / x(pivot);
  if ((y - ratio * x).cwiseAbs().maxCoeff() == 0.0) return 0.0;

  // The minimizer satisfies |t| ||x|| <= ||y|| + ||y - t x|| <= 2 ||y||.
  auto f = [&](double t) { return norm(y - t * x); };
  const double bound = 2.0 * ny / nx;
  double best = std::min({f(0.0), f(ratio)});
  auto tracked = [&](double t) {
    const double v = f(t);
    best = std::min(best, v);
    return v;
  };
  golden(tracked, -bound, bound, 100);
  return best;
}

LurProbeReport lur_defect_probe(const Norm& norm, const Vector& x, const std::vector<Vector>& y_seq) {
  const double nx = norm(x);
  if (nx == 0.0) throw std::invalid_argument("LUR probe: x must be nonzero");
  LurProbeReport report;
  double max_defect = 0.0, max_dist = 0.0;
  for (std::size_t n = 0; n < y_seq.size(); ++n) {
    const Vector& y = y_seq[n];
    const double ny = norm(y);
    const double defect = std::max(0.0, nx + ny - norm(x + y));
    const double dist = distance_to_line(norm, y, x);
    report.defects.push_back(defect);
    report.line_distances.push_back(dist);
    max_defect = std::max(max_defect, defect);
    max_dist = std::max(max_dist, dist);
    const double defect_tol = 1e-12 * (nx + ny);
    const double dist_tol = 1e-6 * std::max(nx, ny);
    if (!report.failure_witness && defect <= defect_tol && dist > dist_tol) {
      report.failure_witness = true;
      report.witness_index = static_cast<long>(n);
    }
  }
  if (!y_seq.empty()) {
    const double ny = norm(y_seq.back());
    const double last_defect = report.defects.back();
    const double last_dist = report.line_distances.back();
    report.defect_decays = last_defect <= 1e-9 * (nx + ny) || last_defect <= 0.1 * max_defect;
    report.distance_decays = last_dist <= 1e-6 * std::max(nx, ny) || last_dist <= 0.1 * max_dist;
  }
  report.consistent = !report.failure_witness && (!report.defect_decays || report.distance_decays);
  return report;
}

}  // namespace qhgeo
