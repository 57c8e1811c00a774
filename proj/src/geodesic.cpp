#include "qhgeo/geodesic.hpp"

#include "qhgeo/quadrature.hpp"

#include <Eigen/QR>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <queue>
#include <random>
#include <stdexcept>

namespace qhgeo {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double energy(const Weight& weight, const Matrix& V) {
  double e = 0.0;
  for (Eigen::Index i = 0; i + 1 < V.cols(); ++i) e += segment_length(weight, V.col(i), V.col(i + 1));
  return e;
}

bool admissible(const Domain& domain, const Matrix& V, double floor) {
  for (Eigen::Index i = 1; i + 1 < V.cols(); ++i) {
    if (!(domain.boundary_distance(V.col(i)) >= floor)) return false;
  }
  for (Eigen::Index i = 0; i + 1 < V.cols(); ++i) {
    if (!domain.segment_inside(V.col(i), V.col(i + 1))) return false;
  }
  return true;
}

/// Orthonormal basis (columns) of the Euclidean complement of c.
Matrix normal_basis(const Vector& c) {
  const Eigen::Index n = c.size();
  if (n == 2) {
    Matrix N(2, 1);
    N << -c(1), c(0);
    return N / c.norm();
  }
  const Eigen::HouseholderQR<Matrix> qr{Matrix(c)};
  const Matrix Q = qr.householderQ();
  return Q.rightCols(n - 1);
}

struct LevelOutcome {
  int iterations = 0;
  bool settled = false;
};

LevelOutcome newton_level(const Weight& weight, Matrix& V, const SolverConfig& config, double scale,
                          double floor) {
  const Domain& domain = weight.domain();
  const Eigen::Index m = V.cols();
  const Eigen::Index n = V.rows();
  const Eigen::Index r = n - 1;
  const Eigen::Index M = m - 2;
  LevelOutcome out;
  if (M <= 0) {
    out.settled = true;
    return out;
  }
  std::vector<SegmentJet> jets(static_cast<std::size_t>(m - 1));
  std::vector<Matrix> basis(static_cast<std::size_t>(M));
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt;
  double E = energy(weight, V);

  for (int iter = 0; iter < config.max_iterations; ++iter) {
    out.iterations = iter + 1;
    for (Eigen::Index i = 0; i + 1 < m; ++i) {
      jets[static_cast<std::size_t>(i)] = segment_jet(weight, V.col(i), V.col(i + 1));
    }
    for (Eigen::Index k = 0; k < M; ++k) {
      basis[static_cast<std::size_t>(k)] = normal_basis(V.col(k + 2) - V.col(k));
    }
    // Reduced gradient and block tridiagonal Hessian in normal coordinates;
    // vertex k + 1 of the path is unknown block k.
    Vector g(M * r);
    std::vector<Eigen::Triplet<double>> triplets;
    double diag_max = 0.0;
    for (Eigen::Index k = 0; k < M; ++k) {
      const SegmentJet& left = jets[static_cast<std::size_t>(k)];
      const SegmentJet& right = jets[static_cast<std::size_t>(k + 1)];
      const Matrix& N = basis[static_cast<std::size_t>(k)];
      g.segment(k * r, r) = N.transpose() * (left.grad_b + right.grad_a);
      const Matrix D = N.transpose() * (left.hbb + right.haa) * N;
      for (Eigen::Index i = 0; i < r; ++i) {
        diag_max = std::max(diag_max, std::abs(D(i, i)));
        for (Eigen::Index j = 0; j < r; ++j) triplets.emplace_back(k * r + i, k * r + j, D(i, j));
      }
      if (k + 1 < M) {
        const Matrix B = N.transpose() * right.hab * basis[static_cast<std::size_t>(k + 1)];
        for (Eigen::Index i = 0; i < r; ++i) {
          for (Eigen::Index j = 0; j < r; ++j) {
            triplets.emplace_back(k * r + i, (k + 1) * r + j, B(i, j));
            triplets.emplace_back((k + 1) * r + j, k * r + i, B(i, j));
          }
        }
      }
    }
    if (g.norm() == 0.0) {
      out.settled = true;
      break;
    }
    Eigen::SparseMatrix<double> H(M * r, M * r);
    H.setFromTriplets(triplets.begin(), triplets.end());

    // Levenberg-Marquardt shift until the factorization is positive definite.
    double mu = 0.0;
    bool factored = false;
    Eigen::SparseMatrix<double> eye(M * r, M * r);
    eye.setIdentity();
    for (int attempt = 0; attempt < 60 && !factored; ++attempt) {
      ldlt.compute(mu > 0.0 ? Eigen::SparseMatrix<double>(H + mu * eye) : H);
      factored = ldlt.info() == Eigen::Success && ldlt.vectorD().minCoeff() > 0.0;
      if (!factored) mu = mu == 0.0 ? 1e-10 * std::max(diag_max, 1e-300) : 10.0 * mu;
    }
    if (!factored) break;
    const Vector delta = ldlt.solve(-g);
    const double slope = g.dot(delta);
    if (!(slope < 0.0)) {
      out.settled = true;
      break;
    }
    Matrix step = Matrix::Zero(n, m);
    for (Eigen::Index k = 0; k < M; ++k) {
      step.col(k + 1) = basis[static_cast<std::size_t>(k)] * delta.segment(k * r, r);
    }

    double alpha = 1.0;
    bool accepted = false;
    Matrix trial;
    double E_trial = kInf;
    for (int ls = 0; ls < 50; ++ls, alpha *= 0.5) {
      trial = V + alpha * step;
      if (!admissible(domain, trial, floor)) continue;
      E_trial = energy(weight, trial);
      if (E_trial <= E + 1e-4 * alpha * slope) {
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      out.settled = true;
      break;
    }
    const double moved = alpha * step.colwise().norm().maxCoeff();
    const double decrease = E - E_trial;
    V = std::move(trial);
    E = E_trial;
    if (moved <= config.step_tolerance * scale || decrease <= 1e-15 * E) {
      out.settled = true;
      break;
    }
  }
  return out;
}

/// One sweep of per-vertex golden-section searches along the normal of the
/// neighbouring chord.  Newton stalls where the weight has a cusp (the ridge
/// of the boundary distance); this derivative-free pass does not.
double polish_sweep(const Weight& weight, Matrix& V, double floor) {
  const Domain& domain = weight.domain();
  constexpr double kGolden = 0.6180339887498949;
  double gained = 0.0;
  for (Eigen::Index k = 1; k + 1 < V.cols(); ++k) {
    const Vector a = V.col(k - 1), b = V.col(k + 1), c = V.col(k);
    const double spacing = std::min((c - a).norm(), (b - c).norm());
    const double reach = 0.5 * spacing;
    if (!(reach > 0.0)) continue;
    const Matrix N = normal_basis(b - a);
    for (Eigen::Index j = 0; j < N.cols(); ++j) {
      const Vector u = N.col(j);
      const Vector base = V.col(k);
      auto f = [&](double t) {
        const Vector p = base + t * u;
        if (!(domain.boundary_distance(p) >= floor) || !domain.segment_inside(a, p) || !domain.segment_inside(p, b)) {
          return kInf;
        }
        return segment_length(weight, a, p) + segment_length(weight, p, b);
      };
      const double f0 = f(0.0);
      double lo = -reach, hi = reach;
      double t1 = hi - kGolden * (hi - lo), t2 = lo + kGolden * (hi - lo);
      double f1 = f(t1), f2 = f(t2);
      for (int it = 0; it < 60 && hi - lo > 1e-10 * reach; ++it) {
        if (f1 <= f2) {
          hi = t2;
          t2 = t1;
          f2 = f1;
          t1 = hi - kGolden * (hi - lo);
          f1 = f(t1);
        } else {
          lo = t1;
          t1 = t2;
          f1 = f2;
          t2 = lo + kGolden * (hi - lo);
          f2 = f(t2);
        }
      }
      const double t = f1 <= f2 ? t1 : t2;
      const double ft = std::min(f1, f2);
      if (ft < f0) {
        V.col(k) = base + t * u;
        gained += f0 - ft;
      }
    }
  }
  return gained;
}

Matrix straight_init(const Weight& weight, const Vector& x, const Vector& y, int count) {
  Matrix V(x.size(), count);
  V.col(0) = x;
  V.col(count - 1) = y;
  for (int k = 1; k + 1 < count; ++k) {
    const double t = segment_split(weight, x, y, static_cast<double>(k) / (count - 1));
    V.col(k) = x + t * (y - x);
  }
  return V;
}

Matrix refine(const Weight& weight, const Matrix& V) {
  const Eigen::Index m = V.cols();
  Matrix out(V.rows(), 2 * m - 1);
  for (Eigen::Index i = 0; i + 1 < m; ++i) {
    const Vector a = V.col(i), b = V.col(i + 1);
    out.col(2 * i) = a;
    out.col(2 * i + 1) = a + segment_split(weight, a, b, 0.5) * (b - a);
  }
  out.col(2 * m - 2) = V.col(m - 1);
  return out;
}

void perturb(const Domain& domain, Matrix& V, std::uint64_t seed, double floor) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  for (Eigen::Index k = 1; k + 1 < V.cols(); ++k) {
    const double spacing =
        std::min((V.col(k) - V.col(k - 1)).norm(), (V.col(k + 1) - V.col(k)).norm());
    double amp = 0.25 * std::min(domain.boundary_distance(V.col(k)), spacing);
    Vector dir(V.rows());
    for (Eigen::Index i = 0; i < dir.size(); ++i) dir(i) = unif(rng);
    const Vector keep = V.col(k);
    for (int halve = 0; halve < 40; ++halve, amp *= 0.5) {
      V.col(k) = keep + amp * dir;
      if (admissible(domain, V, floor)) break;
      V.col(k) = keep;
    }
  }
}

/// Shortest path on a uniform grid graph around the endpoints with edge
/// cost w(midpoint) ||edge||.  The grid is shifted by 1e-6 of the endpoint
/// separation perpendicular to y - x so that no node or edge sits on a
/// symmetry axis through a puncture.
Matrix grid_path(const Weight& weight, const Vector& x, const Vector& y) {
  const Domain& domain = weight.domain();
  const Norm& norm = domain.norm();
  const Eigen::Index n = x.size();
  const int g = n == 2 ? 65 : (n == 3 ? 17 : 7);
  const double sep = (y - x).norm();
  const Vector e = (y - x) / sep;
  Eigen::Index axis = 0;
  e.cwiseAbs().minCoeff(&axis);
  Vector perp = Vector::Unit(n, axis) - e(axis) * e;
  perp.normalize();
  const Vector lo = x.cwiseMin(y).array() - 0.75 * sep + 1e-6 * sep * perp.array();
  const Vector hi = x.cwiseMax(y).array() + 0.75 * sep + 1e-6 * sep * perp.array();
  const Vector step = (hi - lo) / (g - 1);

  long total = 1;
  for (Eigen::Index i = 0; i < n; ++i) total *= g;
  auto position = [&](long id) {
    Vector p(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      p(i) = lo(i) + step(i) * static_cast<double>(id % g);
      id /= g;
    }
    return p;
  };
  std::vector<char> valid(static_cast<std::size_t>(total));
  for (long id = 0; id < total; ++id) {
    valid[static_cast<std::size_t>(id)] = domain.boundary_distance(position(id)) > 1e-9 * sep;
  }
  auto edge_cost = [&](const Vector& a, const Vector& b) {
    if (!domain.segment_inside(a, b)) return kInf;
    return weight(Vector(0.5 * (a + b))) * norm(b - a);
  };
  // Grid nodes near a free point: its cell widened by one ring.
  auto nearby = [&](const Vector& p) {
    std::vector<long> ids{0};
    long stride = 1;
    for (Eigen::Index i = 0; i < n; ++i) {
      const long c = static_cast<long>(std::floor((p(i) - lo(i)) / step(i)));
      std::vector<long> next;
      for (long id : ids) {
        for (long d = -1; d <= 2; ++d) {
          const long ci = c + d;
          if (ci >= 0 && ci < g) next.push_back(id + ci * stride);
        }
      }
      ids = std::move(next);
      stride *= g;
    }
    return ids;
  };
  std::vector<long> offsets;
  {
    std::vector<long> acc{0};
    long stride = 1;
    for (Eigen::Index i = 0; i < n; ++i) {
      std::vector<long> next;
      for (long a : acc) {
        for (long d = -1; d <= 1; ++d) next.push_back(a + d * stride);
      }
      acc = std::move(next);
      stride *= g;
    }
    for (long a : acc) {
      if (a != 0) offsets.push_back(a);
    }
  }
  auto coords = [&](long id) {
    std::vector<long> c(static_cast<std::size_t>(n));
    for (auto& v : c) {
      v = id % g;
      id /= g;
    }
    return c;
  };

  const long source = total, target = total + 1;
  std::vector<double> dist(static_cast<std::size_t>(total + 2), kInf);
  std::vector<long> prev(static_cast<std::size_t>(total + 2), -1);
  std::vector<std::pair<long, double>> to_target;
  for (long id : nearby(y)) {
    if (valid[static_cast<std::size_t>(id)]) {
      const double c = edge_cost(position(id), y);
      if (std::isfinite(c)) to_target.emplace_back(id, c);
    }
  }
  using Item = std::pair<double, long>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> queue;
  dist[static_cast<std::size_t>(source)] = 0.0;
  queue.emplace(0.0, source);
  while (!queue.empty()) {
    const auto [du, u] = queue.top();
    queue.pop();
    if (du > dist[static_cast<std::size_t>(u)]) continue;
    if (u == target) break;
    auto relax = [&](long v, double c) {
      if (!std::isfinite(c)) return;
      if (du + c < dist[static_cast<std::size_t>(v)]) {
        dist[static_cast<std::size_t>(v)] = du + c;
        prev[static_cast<std::size_t>(v)] = u;
        queue.emplace(du + c, v);
      }
    };
    if (u == source) {
      for (long id : nearby(x)) {
        if (valid[static_cast<std::size_t>(id)]) relax(id, edge_cost(x, position(id)));
      }
      continue;
    }
    const Vector pu = position(u);
    const std::vector<long> cu = coords(u);
    for (long off : offsets) {
      const long v = u + off;
      if (v < 0 || v >= total || !valid[static_cast<std::size_t>(v)]) continue;
      const std::vector<long> cv = coords(v);
      bool neighbour = true;
      for (std::size_t i = 0; i < cu.size(); ++i) neighbour = neighbour && std::abs(cu[i] - cv[i]) <= 1;
      if (neighbour) relax(v, edge_cost(pu, position(v)));
    }
    for (const auto& [id, c] : to_target) {
      if (id == u) relax(target, c);
    }
  }
  if (!std::isfinite(dist[static_cast<std::size_t>(target)])) {
    throw std::runtime_error("no grid path between the endpoints");
  }
  std::vector<Vector> pts;
  for (long v = target; v != -1; v = prev[static_cast<std::size_t>(v)]) {
    pts.push_back(v == target ? y : (v == source ? x : position(v)));
  }
  std::reverse(pts.begin(), pts.end());
  Matrix V(n, static_cast<Eigen::Index>(pts.size()));
  for (std::size_t i = 0; i < pts.size(); ++i) V.col(static_cast<Eigen::Index>(i)) = pts[i];
  return V;
}

/// Grid path resampled to about `count` vertices at equal weighted spacing.
Matrix grid_init(const Weight& weight, const Vector& x, const Vector& y, int count, double floor) {
  const Matrix raw = grid_path(weight, x, y);
  const Polyline path = Polyline::build(weight, raw);
  const ArcLengthMap map(weight, path);
  for (int c = count; c < 8 * count && c < raw.cols(); c *= 2) {
    Matrix V(x.size(), c);
    for (int k = 0; k < c; ++k) V.col(k) = map.at(map.length() * k / (c - 1)).point;
    V.col(0) = x;
    V.col(c - 1) = y;
    if (admissible(weight.domain(), V, floor)) return V;
  }
  return raw;
}

double euclid_angle(const Vector& a, const Vector& b) {
  const Vector u = a.normalized(), v = b.normalized();
  return 2.0 * std::atan2((u - v).norm(), (u + v).norm());
}

}  // namespace

void SolverConfig::validate() const {
  if (initial_vertices < 2) throw std::invalid_argument("initial_vertices must be at least 2");
  if (refinement_levels < 0) throw std::invalid_argument("refinement_levels must not be negative");
  if (max_iterations < 1) throw std::invalid_argument("max_iterations must be positive");
  if (!(step_tolerance > 0.0)) throw std::invalid_argument("step_tolerance must be positive");
  if (!(length_tolerance > 0.0)) throw std::invalid_argument("length_tolerance must be positive");
}

double max_interior_turning_angle(const Polyline& path) {
  const Vector a = turning_angles(path);
  if (a.size() == 0) return 0.0;
  if (a.size() >= 3) return a.segment(1, a.size() - 2).maxCoeff();
  return a.maxCoeff();
}

GeodesicResult solve_geodesic(const Weight& weight, const Vector& x, const Vector& y,
                              const SolverConfig& config) {
  config.validate();
  const Domain& domain = weight.domain();
  if (x.size() != domain.dim() || y.size() != domain.dim()) {
    throw std::invalid_argument("endpoint dimension mismatch");
  }
  if (!domain.contains(x) || !domain.contains(y)) throw std::domain_error("endpoint outside the domain");
  GeodesicResult res;
  res.lower_bound = weight.is_quasihyperbolic() ? j_metric(domain, x, y) : 0.0;
  if (x == y) {
    res.path = Polyline::build(weight, Matrix(x));
    res.converged = true;
    res.refinement_history.push_back({1, 0.0, 0.0, 0});
    return res;
  }
  const double scale = (y - x).norm();
  const double floor = 1e-9 * scale;
  Matrix V;
  if (domain.segment_inside(x, y)) {
    V = straight_init(weight, x, y, config.initial_vertices);
    // A chord grazing a hole of a non-convex domain is a poor start: Newton
    // cannot move it across the hole, so keep the grid path when it is shorter.
    if (!domain.is_convex()) {
      Matrix G = grid_init(weight, x, y, config.initial_vertices, floor);
      if (Polyline::build(weight, G).length() < Polyline::build(weight, V).length()) {
        V = std::move(G);
        res.grid_initialized = true;
      }
    }
  } else {
    V = grid_init(weight, x, y, config.initial_vertices, floor);
    res.grid_initialized = true;
    res.symmetry_perturbed = domain.shape() == Shape::kPunctured;
  }
  if (config.seed != 0) perturb(domain, V, config.seed, floor);

  for (int level = 0; level <= config.refinement_levels; ++level) {
    if (level > 0) V = refine(weight, V);
    int level_iterations = 0;
    for (int round = 0; round < 8; ++round) {
      const LevelOutcome o = newton_level(weight, V, config, scale, floor);
      level_iterations += o.iterations;
      // Polishing gains below this are invisible at the requested tolerance.
      const double negligible = 1e-3 * config.length_tolerance * energy(weight, V);
      double gained = 0.0;
      for (int sweep = 0; sweep < 20; ++sweep) {
        const double g = polish_sweep(weight, V, floor);
        gained += g;
        if (g <= negligible) break;
      }
      if (gained <= negligible) break;
    }
    res.iterations += level_iterations;
    const Polyline p = Polyline::build(weight, V);
    res.refinement_history.push_back(
        {static_cast<int>(V.cols()), p.length(), max_interior_turning_angle(p), level_iterations});
    if (level == config.refinement_levels) res.path = p;
  }
  res.upper_bound = res.path.length();
  const auto& h = res.refinement_history;
  if (h.size() >= 2) {
    const double prev = h[h.size() - 2].length, last = h.back().length;
    res.converged = std::abs(prev - last) < config.length_tolerance * last;
  } else {
    res.converged = true;
  }
  return res;
}

DistanceBounds qh_distance(const Domain& domain, const Vector& x, const Vector& y,
                           const SolverConfig& config) {
  const GeodesicResult r = solve_geodesic(Weight::quasihyperbolic(domain), x, y, config);
  return {r.upper_bound, r.lower_bound};
}

Polyline unit_speed_reparametrize(const Weight& weight, const Polyline& path, int samples) {
  if (samples < 2) throw std::invalid_argument("reparametrization needs at least 2 samples");
  if (path.size() < 2 || !(path.length() > 0.0)) throw std::invalid_argument("zero-length path");
  const ArcLengthMap map(weight, path);
  const double L = map.length();
  Matrix V(path.dim(), samples);
  Vector cumulative(samples);
  for (int k = 0; k < samples; ++k) {
    cumulative(k) = L * k / (samples - 1);
    V.col(k) = map.at(cumulative(k)).point;
  }
  V.col(0) = path.vertex(0);
  V.col(samples - 1) = path.vertex(path.size() - 1);
  cumulative(samples - 1) = L;
  return Polyline::from_samples(weight, std::move(V), std::move(cumulative));
}

TurningProfile turning_angle_profile(const GeodesicResult& result) {
  if (result.refinement_history.empty()) throw std::invalid_argument("empty refinement history");
  if (result.path.size() < 3) throw std::invalid_argument("turning angles need at least 3 vertices");
  TurningProfile out;
  for (const LevelRecord& rec : result.refinement_history) {
    out.vertex_counts.push_back(rec.vertex_count);
    out.max_angle_per_level.push_back(rec.max_turning_angle);
  }
  for (std::size_t i = 1; i < out.max_angle_per_level.size(); ++i) {
    const double cur = out.max_angle_per_level[i];
    out.decrease_factors.push_back(cur > 0.0 ? out.max_angle_per_level[i - 1] / cur : kInf);
  }
  return out;
}

AverageReport average_path_check(const Weight& weight, const Polyline& lambda, const Polyline& gamma) {
  const Domain& domain = weight.domain();
  if (!domain.is_convex()) throw std::invalid_argument("averaging needs a convex domain");
  if (!weight.is_quasihyperbolic()) throw std::invalid_argument("averaging needs the quasihyperbolic weight");
  if (lambda.size() < 2 || gamma.size() < 2) throw std::invalid_argument("averaging needs paths with 2+ vertices");
  const ArcLengthMap ml(weight, lambda), mg(weight, gamma);
  AverageReport rep;
  rep.length_lambda = ml.length();
  rep.length_gamma = mg.length();
  rep.avg_of_lengths = 0.5 * (rep.length_lambda + rep.length_gamma);
  rep.equal_lengths = std::abs(rep.length_lambda - rep.length_gamma) <=
                      1e-9 * std::max(rep.length_lambda, rep.length_gamma);
  if (!(rep.length_lambda > 0.0) || !(rep.length_gamma > 0.0)) throw std::invalid_argument("zero-length path");

  std::vector<double> cuts;
  for (double s : ml.vertex_lengths()) cuts.push_back(s / rep.length_lambda);
  for (double s : mg.vertex_lengths()) cuts.push_back(s / rep.length_gamma);
  std::sort(cuts.begin(), cuts.end());
  cuts.front() = 0.0;
  cuts.back() = 1.0;

  const Norm& norm = domain.norm();
  const GaussRule& rule = gauss_legendre(8);
  auto velocity = [&](const Polyline& p, const ArcLengthMap::Location& at, double L) {
    const Vector e = p.vertex(at.segment + 1) - p.vertex(at.segment);
    return Vector(L * e / (norm(e) * weight(at.point)));
  };
  const double Lmax = std::max(rep.length_lambda, rep.length_gamma);
  double total = 0.0;
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
    const double t0 = cuts[k], t1 = cuts[k + 1];
    if (!(t1 > t0)) continue;
    const int panels = std::max(1, static_cast<int>(std::ceil(Lmax * (t1 - t0) / 0.25)));
    const double h = (t1 - t0) / panels;
    for (int p = 0; p < panels; ++p) {
      for (int q = 0; q < 8; ++q) {
        const double t = t0 + h * (p + rule.nodes(q));
        const auto a = ml.at(t * rep.length_lambda);
        const auto b = mg.at(t * rep.length_gamma);
        const Vector mid = 0.5 * (a.point + b.point);
        const Vector v = 0.5 * (velocity(lambda, a, rep.length_lambda) + velocity(gamma, b, rep.length_gamma));
        total += h * rule.weights(q) * norm(v) * weight(mid);
      }
    }
  }
  rep.length_of_avg = total;
  rep.dominated = rep.length_of_avg <= rep.avg_of_lengths + 1e-9;
  return rep;
}

std::pair<Polyline, Polyline> equalize_lengths(const Weight& weight, const Polyline& a, const Polyline& b) {
  const ArcLengthMap ma(weight, a), mb(weight, b);
  const bool cut_a = ma.length() > mb.length();
  const Polyline& longer = cut_a ? a : b;
  const ArcLengthMap& map = cut_a ? ma : mb;
  const double target = cut_a ? mb.length() : ma.length();
  const auto at = map.at(target);
  Matrix V(longer.dim(), at.segment + 2);
  V.leftCols(at.segment + 1) = longer.vertices().leftCols(at.segment + 1);
  V.col(at.segment + 1) = at.point;
  if ((at.point - longer.vertex(at.segment)).norm() == 0.0) V.conservativeResize(Eigen::NoChange, at.segment + 1);
  Polyline cut = Polyline::build(weight, std::move(V));
  return cut_a ? std::make_pair(cut, b) : std::make_pair(a, cut);
}

RayCrossing sphere_crossing(const Domain& domain, const Vector& x0, const Vector& u, double r,
                            const SolverConfig& config, double tolerance) {
  if (!domain.contains(x0)) throw std::domain_error("ray origin outside the domain");
  if (!(r > 0.0)) throw std::invalid_argument("sphere radius must be positive");
  const Norm& norm = domain.norm();
  if (norm(u) == 0.0) throw std::invalid_argument("ray direction must be nonzero");
  const Weight weight = Weight::quasihyperbolic(domain);
  const double exit = domain.ray_exit(x0, u);
  const double d0 = domain.boundary_distance(x0);
  RayCrossing out;

  // Increasing functions of t with value r at the sought bracket ends.
  auto crossing = [&](auto&& f) {
    double lo = 0.0, hi = std::min(d0 / norm(u), 0.5 * exit);
    while (f(hi) < r) {
      lo = hi;
      hi = std::isfinite(exit) ? 0.5 * (hi + exit) : 2.0 * hi;
      if (hi > 1e12 * (d0 / norm(u)) || (std::isfinite(exit) && exit - hi <= 1e-15 * exit)) return kInf;
    }
    for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
      const double mid = 0.5 * (lo + hi);
      (f(mid) < r ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
  };
  const double t_lo0 = crossing([&](double t) { return segment_length(weight, x0, Vector(x0 + t * u)); });
  const double t_hi0 = crossing([&](double t) {
    const Vector z = x0 + t * u;
    return domain.contains(z) ? j_metric(domain, x0, z) : kInf;
  });
  if (!std::isfinite(t_lo0) && !std::isfinite(t_hi0)) {
    out.censored = true;
    return out;
  }
  SolverConfig cfg = config;
  cfg.seed = 0;
  auto f = [&](double t) {
    ++out.solves;
    return solve_geodesic(weight, x0, Vector(x0 + t * u), cfg).upper_bound - r;
  };
  double t_lo = std::isfinite(t_lo0) ? t_lo0 : 0.5 * t_hi0;
  double t_hi = std::isfinite(t_hi0) ? std::max(t_hi0, t_lo) : t_lo;
  double f_lo = f(t_lo);
  for (int k = 0; k < 60 && f_lo > tolerance; ++k) {
    t_lo *= 0.5;
    f_lo = f(t_lo);
  }
  auto finish = [&](double t, double ft) {
    out.t = t;
    out.point = x0 + t * u;
    out.residual = ft;
    return out;
  };
  if (std::abs(f_lo) <= tolerance) return finish(t_lo, f_lo);
  double f_hi = t_hi == t_lo ? f_lo : f(t_hi);
  for (int k = 0; k < 60 && f_hi < -tolerance; ++k) {
    t_lo = t_hi;
    f_lo = f_hi;
    t_hi = std::isfinite(exit) ? 0.5 * (t_hi + exit) : 2.0 * t_hi;
    f_hi = f(t_hi);
  }
  if (std::abs(f_hi) <= tolerance) return finish(t_hi, f_hi);
  if (f_hi < 0.0) {
    out.censored = true;
    return out;
  }
  int side = 0;
  double t = t_lo, ft = f_lo;
  for (int it = 0; it < 80; ++it) {
    t = (t_lo * f_hi - t_hi * f_lo) / (f_hi - f_lo);
    if (!(t > t_lo && t < t_hi)) t = 0.5 * (t_lo + t_hi);
    ft = f(t);
    if (std::abs(ft) <= tolerance) break;
    if (ft < 0.0) {
      t_lo = t;
      f_lo = ft;
      if (side == -1) f_hi *= 0.5;
      side = -1;
    } else {
      t_hi = t;
      f_hi = ft;
      if (side == 1) f_lo *= 0.5;
      side = 1;
    }
    if (t_hi - t_lo <= 1e-15 * t_hi) break;
  }
  return finish(t, ft);
}

EndpointDerivativeReport endpoint_derivative_check(const Domain& domain, const Vector& x0,
                                                   const Vector& x, const GeodesicResult& result,
                                                   int directions, double h,
                                                   const SolverConfig& config) {
  if (directions < 2) throw std::invalid_argument("need at least 2 directions");
  if (result.path.size() < 2) throw std::invalid_argument("geodesic has no terminal segment");
  if (!domain.contains(x)) throw std::domain_error("endpoint outside the domain");
  const Norm& norm = domain.norm();
  const Weight weight = Weight::quasihyperbolic(domain);
  const double dx = domain.boundary_distance(x);
  EndpointDerivativeReport rep;
  rep.step = h > 0.0 ? h : 1e-4 * dx;
  rep.predicted = 1.0 / dx;
  const Polyline& path = result.path;
  const Vector last = path.vertex(path.size() - 1) - path.vertex(path.size() - 2);
  rep.terminal_velocity = last / norm(last);

  auto k = [&](const Vector& z) { return solve_geodesic(weight, x0, z, config).upper_bound; };
  auto derivative = [&](const Vector& z) {
    const Vector fwd = x + rep.step * z, bwd = x - rep.step * z;
    if (!domain.contains(fwd) || !domain.contains(bwd)) throw std::domain_error("finite-difference step exits the domain");
    return (k(fwd) - k(bwd)) / (2.0 * rep.step);
  };
  const Eigen::Index n = x.size();
  auto planar = [&](double theta) {
    Vector z(2);
    z << std::cos(theta), std::sin(theta);
    return Vector(z / norm(z));
  };
  std::mt19937_64 rng(config.seed + 1);
  std::normal_distribution<double> gauss;
  std::size_t best = 0;
  for (int i = 0; i < directions; ++i) {
    Vector z(n);
    if (n == 2) {
      z = planar(2.0 * std::numbers::pi * i / directions);
    } else {
      for (Eigen::Index c = 0; c < n; ++c) z(c) = gauss(rng);
      z /= norm(z);
    }
    rep.directions.push_back(z);
    rep.values.push_back(derivative(z));
    if (rep.values.back() > rep.values[best]) best = rep.directions.size() - 1;
  }
  rep.argmax_direction = rep.directions[best];
  rep.max_value = rep.values[best];
  if (n == 2) {
    const double width = 2.0 * std::numbers::pi / directions;
    const double centre = 2.0 * std::numbers::pi * static_cast<double>(best) / directions;
    const double g = 0.5 * (std::sqrt(5.0) - 1.0);
    double a = centre - width, b = centre + width;
    double c = b - g * (b - a), d = a + g * (b - a);
    double fc = derivative(planar(c)), fd = derivative(planar(d));
    for (int it = 0; it < 30; ++it) {
      if (fc > fd) {
        b = d;
        d = c;
        fd = fc;
        c = b - g * (b - a);
        fc = derivative(planar(c));
      } else {
        a = c;
        c = d;
        fc = fd;
        d = a + g * (b - a);
        fd = derivative(planar(d));
      }
    }
    const double theta = fc > fd ? c : d;
    const double value = std::max(fc, fd);
    if (value > rep.max_value) {
      rep.max_value = value;
      rep.argmax_direction = planar(theta);
    }
  }
  rep.angle_to_velocity = euclid_angle(rep.argmax_direction, rep.terminal_velocity);
  rep.reverse_value = derivative(Vector(-rep.terminal_velocity));
  return rep;
}

MidpointProbeReport midpoint_convergence_probe(const Domain& domain, const Vector& x0, const Vector& y,
                                               const std::vector<Vector>& y_seq,
                                               const SolverConfig& config) {
  if (!domain.is_convex()) throw std::invalid_argument("midpoint probe needs a convex domain");
  const Weight weight = Weight::quasihyperbolic(domain);
  const Norm& norm = domain.norm();
  MidpointProbeReport rep;
  rep.radius = solve_geodesic(weight, x0, y, config).upper_bound;
  const double tol = 1e-9 * std::max(1.0, rep.radius);
  for (const Vector& yn : y_seq) {
    const RayCrossing c = sphere_crossing(domain, x0, yn - x0, rep.radius, config);
    if (c.censored) throw std::domain_error("sequence point cannot be projected onto the sphere");
    const Vector mid = 0.5 * (y + c.point);
    const double md = solve_geodesic(weight, x0, mid, config).upper_bound;
    rep.projected.push_back(c.point);
    rep.midpoint_distances.push_back(md);
    rep.midpoint_gaps.push_back(rep.radius - md);
    rep.norm_gaps.push_back(norm(y - c.point));
  }
  auto decays = [](const std::vector<double>& v, double floor) {
    if (v.empty()) return true;
    double peak = 0.0;
    for (double a : v) peak = std::max(peak, std::abs(a));
    return peak <= floor || std::abs(v.back()) <= std::max(0.1 * peak, floor);
  };
  rep.midpoint_converges = decays(rep.midpoint_gaps, 1e-6 * std::max(1.0, rep.radius));
  rep.norm_converges = decays(rep.norm_gaps, 1e3 * tol * norm(y - x0));
  rep.consistent = !rep.midpoint_converges || rep.norm_converges;
  return rep;
}

}  // namespace qhgeo
