#include "qhgeo/cli.hpp"

#include "qhgeo/balls.hpp"
#include "qhgeo/catalog.hpp"
#include "qhgeo/moduli.hpp"
#include "qhgeo/report.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <iostream>
#include <map>
#include <numbers>
#include <optional>
#include <random>

namespace qhgeo::cli {
namespace {

constexpr double kLog2 = std::numbers::ln2;

std::string flag(bool b) { return b ? "true" : "false"; }

std::vector<std::string> coordinate_header(const std::string& prefix, Eigen::Index dim) {
  std::vector<std::string> h;
  for (Eigen::Index i = 0; i < dim; ++i) h.push_back(prefix + std::to_string(i));
  return h;
}

void append(std::vector<std::string>& row, const Vector& v) {
  for (Eigen::Index i = 0; i < v.size(); ++i) row.push_back(format_number(v(i)));
}

std::vector<std::string> concat(std::vector<std::string> a, const std::vector<std::string>& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

// Key/value table used for run summaries.
class Summary {
 public:
  void add(const std::string& key, const std::string& value) { table_.add_row({key, value}); }
  void add(const std::string& key, double value) { add(key, format_number(value)); }
  void add(const std::string& key, long value) { add(key, std::to_string(value)); }
  void add(const std::string& key, int value) { add(key, std::to_string(value)); }
  void add(const std::string& key, bool value) { add(key, flag(value)); }
  std::string str() const { return table_.str(); }

 private:
  CsvTable table_{{"key", "value"}};
};

struct Geometry {
  Domain domain;
  Weight weight;
};

class Run {
 public:
  Run(const RunConfig& config) : config_(config), dir_(std::filesystem::path(config.output_dir) / config.scenario) {}

  const RunConfig& config() const { return config_; }
  Outcome& outcome() { return outcome_; }

  void write(const std::string& name, const std::string& content) {
    write_atomic(dir_ / name, content);
    outcome_.files.push_back(dir_ / name);
  }
  void say(const std::string& line) { outcome_.messages.push_back(line); }

  Norm norm() const { return make_norm(config_.norm); }

  Geometry geometry() const {
    const Norm n = norm();
    Domain d = make_domain(config_.domain, n);
    Weight w = make_weight(config_.weight, d);
    return {std::move(d), std::move(w)};
  }

  Params params() const { return Params(config_.operation.params, "operation.params"); }

 private:
  const RunConfig& config_;
  std::filesystem::path dir_;
  Outcome outcome_;
};

Vector read_point(const Params& p, const std::string& key, const Domain& domain) {
  Vector v = p.vector(key);
  if (v.size() != domain.dim()) throw ConfigError("operation.params." + key + ": expected norm.dim coordinates");
  if (!domain.contains(v)) throw ConfigError("operation.params." + key + ": point lies outside the domain");
  return v;
}

std::vector<Vector> read_points(const Params& p, const std::string& key, const Domain& domain) {
  std::vector<Vector> pts = p.points(key);
  for (const Vector& v : pts) {
    if (v.size() != domain.dim()) throw ConfigError("operation.params." + key + ": expected norm.dim coordinates");
    if (!domain.contains(v)) throw ConfigError("operation.params." + key + ": point lies outside the domain");
  }
  return pts;
}

double positive(const Params& p, const std::string& key, double fallback) {
  const double v = p.number(key, fallback);
  if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError("operation.params." + key + ": expected a positive number");
  return v;
}

int count(const Params& p, const std::string& key, long fallback, long minimum = 1) {
  const long v = p.integer(key, fallback);
  if (v < minimum || v > 100000000) {
    throw ConfigError("operation.params." + key + ": expected an integer >= " + std::to_string(minimum));
  }
  return static_cast<int>(v);
}

void require_convex(const Domain& d, const std::string& what) {
  if (!d.is_convex()) throw ConfigError("domain.shape: " + what + " needs a convex domain");
}

void require_qh(const Weight& w, const std::string& what) {
  if (!w.is_quasihyperbolic()) throw ConfigError("weight.kind: " + what + " needs the quasihyperbolic weight");
}

std::vector<Vector> ray_directions(const Params& p, Eigen::Index dim, std::uint64_t seed) {
  const int rays = count(p, "rays", 64, 3);
  const double phase = p.number("phase", 0.0);
  if (dim == 2) return circle_directions(rays, phase);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss;
  std::vector<Vector> dirs;
  for (int i = 0; i < rays; ++i) {
    Vector v(dim);
    for (Eigen::Index c = 0; c < dim; ++c) v(c) = gauss(rng);
    dirs.push_back(v / v.norm());
  }
  return dirs;
}

std::string trace_csv(const SphereTrace& trace) {
  const Eigen::Index dim = trace.center.size();
  CsvTable t(concat(concat(concat({"ray"}, coordinate_header("u", dim)), concat({"t"}, coordinate_header("x", dim))),
                    {"residual", "censored"}));
  for (std::size_t i = 0; i < trace.directions.size(); ++i) {
    std::vector<std::string> row{std::to_string(i)};
    append(row, trace.directions[i]);
    row.push_back(format_number(trace.t[i]));
    append(row, trace.points[i]);
    row.push_back(format_number(trace.residuals[i]));
    row.push_back(flag(trace.censored[i] != 0));
    t.add_row(std::move(row));
  }
  return t.str();
}

std::string trace_svg(const SphereTrace& trace) {
  SvgCanvas svg;
  const std::vector<std::size_t> ok = trace.traced();
  Matrix pts(2, static_cast<Eigen::Index>(ok.size()));
  for (std::size_t i = 0; i < ok.size(); ++i) pts.col(static_cast<Eigen::Index>(i)) = trace.points[ok[i]];
  if (ok.size() >= 2) svg.polyline(pts, "#1f5fa8", ok.size() == trace.directions.size());
  for (std::size_t i : ok) svg.circle(trace.points[i], 1.5, "#1f5fa8");
  svg.circle(trace.center, 3.0, "#b03020");
  return svg.render();
}

// ---------------------------------------------------------------- moduli

void cmd_moduli(Run& run) {
  const RunConfig& cfg = run.config();
  const std::string& op = cfg.operation.name;
  if (op != "convexity" && op != "smoothness") {
    throw ConfigError("operation.name: moduli expects 'convexity' or 'smoothness'");
  }
  const Params p = run.params();
  const std::vector<double> args = p.numbers("arguments");
  const long budget = count(p, "budget", 10000);
  p.finish();
  if (args.empty()) throw ConfigError("operation.params.arguments: expected at least one value");
  const Norm norm = run.norm();

  std::vector<ModulusEstimate> est;
  for (double a : args) {
    if (op == "convexity" && !(a > 0.0 && a <= 2.0)) {
      throw ConfigError("operation.params.arguments: convexity arguments must lie in (0, 2]");
    }
    if (op == "smoothness" && !(a > 0.0 && std::isfinite(a))) {
      throw ConfigError("operation.params.arguments: smoothness arguments must be positive");
    }
    est.push_back(op == "convexity" ? modulus_convexity(norm, a, budget, cfg.seed)
                                    : modulus_smoothness(norm, a, budget, cfg.seed));
  }

  const Eigen::Index dim = norm.dim();
  CsvTable t(concat(concat({"argument", "value"}, coordinate_header("witness_x", dim)),
                    coordinate_header("witness_y", dim)));
  for (const ModulusEstimate& e : est) {
    std::vector<std::string> row{format_number(e.argument), format_number(e.value)};
    append(row, e.witness_x);
    append(row, e.witness_y);
    t.add_row(std::move(row));
  }
  run.write("moduli.csv", t.str());
  run.say(op + ": " + std::to_string(est.size()) + " estimates at budget " + std::to_string(budget));

  const bool fittable = est.size() >= 3 && std::all_of(est.begin(), est.end(), [](const ModulusEstimate& e) {
                          return e.value > 0.0;
                        });
  if (fittable) {
    const PowerTypeFit fit = power_type_fit(est);
    run.say("power type fit: K = " + format_number(fit.K) + ", p = " + format_number(fit.p) +
            ", R^2 = " + format_number(fit.r_squared));
  }
}

// -------------------------------------------------------------- geodesic

void cmd_geodesic(Run& run) {
  const RunConfig& cfg = run.config();
  if (cfg.operation.name != "geodesic") throw ConfigError("operation.name: geodesic expects 'geodesic'");
  const Geometry g = run.geometry();
  const Params p = run.params();
  const Vector x = read_point(p, "x", g.domain);
  const Vector y = read_point(p, "y", g.domain);
  const int samples = count(p, "unit_speed_samples", 0, 0);
  p.finish();

  const GeodesicResult res = solve_geodesic(g.weight, x, y, cfg.solver);
  const Eigen::Index dim = x.size();

  const Polyline& path = res.path;
  CsvTable pc(concat(concat({"index"}, coordinate_header("x", dim)), {"distance", "cumulative_length"}));
  for (Eigen::Index i = 0; i < path.size(); ++i) {
    std::vector<std::string> row{std::to_string(i)};
    append(row, path.vertex(i));
    row.push_back(format_number(path.distances()(i)));
    row.push_back(format_number(path.cumulative()(i)));
    pc.add_row(std::move(row));
  }
  run.write("path.csv", pc.str());

  CsvTable hc({"level", "vertex_count", "length", "max_turning_angle", "iterations"});
  for (std::size_t i = 0; i < res.refinement_history.size(); ++i) {
    const LevelRecord& r = res.refinement_history[i];
    hc.add_row({std::to_string(i), std::to_string(r.vertex_count), format_number(r.length),
                format_number(r.max_turning_angle), std::to_string(r.iterations)});
  }
  run.write("history.csv", hc.str());

  Summary s;
  s.add("upper_bound", res.upper_bound);
  s.add("lower_bound", res.lower_bound);
  s.add("vertices", static_cast<long>(path.size()));
  s.add("iterations", res.iterations);
  s.add("converged", res.converged);
  s.add("symmetry_perturbed", res.symmetry_perturbed);
  s.add("grid_initialized", res.grid_initialized);
  run.write("summary.csv", s.str());

  if (samples >= 2 && path.size() >= 2 && path.length() > 0.0) {
    const Polyline u = unit_speed_reparametrize(g.weight, path, samples);
    CsvTable uc(concat(concat({"index"}, coordinate_header("x", dim)), {"cumulative_length"}));
    for (Eigen::Index i = 0; i < u.size(); ++i) {
      std::vector<std::string> row{std::to_string(i)};
      append(row, u.vertex(i));
      row.push_back(format_number(u.cumulative()(i)));
      uc.add_row(std::move(row));
    }
    run.write("unit_speed.csv", uc.str());
  }

  if (dim == 2) {
    SvgCanvas svg;
    if (path.size() >= 2) svg.polyline(path.vertices(), "#1f5fa8");
    svg.circle(x, 3.0, "#b03020");
    svg.circle(y, 3.0, "#b03020");
    run.write("path.svg", svg.render());
  }

  run.say("upper bound " + format_number(res.upper_bound) + ", lower bound " + format_number(res.lower_bound) +
          ", " + std::to_string(path.size()) + " vertices");
  if (!res.converged) {
    run.say("solver did not reach the length tolerance");
    run.outcome().exit_code = kNotConverged;
  }
}

// ----------------------------------------------------------------- trace

void cmd_trace(Run& run) {
  const RunConfig& cfg = run.config();
  if (cfg.operation.name != "trace") throw ConfigError("operation.name: trace expects 'trace'");
  const Geometry g = run.geometry();
  require_qh(g.weight, "sphere tracing");
  const Params p = run.params();
  const Vector c = read_point(p, "center", g.domain);
  const double r = positive(p, "radius", 1.0);
  const std::vector<Vector> dirs = ray_directions(p, c.size(), cfg.seed);
  p.finish();

  const SphereTrace trace = trace_sphere(g.domain, c, r, dirs, cfg.solver);
  run.write("trace.csv", trace_csv(trace));
  if (c.size() == 2) run.write("trace.svg", trace_svg(trace));
  run.say(std::to_string(trace.traced().size()) + " rays traced, " + std::to_string(trace.censored_count()) +
          " censored");
  if (!trace.warning.empty()) run.say("warning: " + trace.warning);
}

// ---------------------------------------------------------------- verify

bool suite_averaging(Run& run, Summary& s) {
  const RunConfig& cfg = run.config();
  const Geometry g = run.geometry();
  require_convex(g.domain, "averaging");
  require_qh(g.weight, "averaging");
  const Params p = run.params();
  const int trials = count(p, "trials", 100);
  const int interior = count(p, "vertices", 6, 0);
  const Vector lo = p.vector("sample_lo");
  const Vector hi = p.vector("sample_hi");
  const double margin = positive(p, "margin", 0.01);
  p.finish();
  if (lo.size() != g.domain.dim() || hi.size() != g.domain.dim() || (hi.array() <= lo.array()).any()) {
    throw ConfigError("operation.params.sample_lo: expected a box with sample_lo < sample_hi");
  }

  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  auto sample = [&]() {
    for (int attempt = 0; attempt < 100000; ++attempt) {
      Vector v(lo.size());
      for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = lo(i) + (hi(i) - lo(i)) * unif(rng);
      if (g.domain.boundary_distance(v) > margin) return v;
    }
    throw ConfigError("operation.params.sample_lo: sampling box misses the domain interior");
  };
  auto random_path = [&]() {
    Matrix m(lo.size(), interior + 2);
    for (int i = 0; i < interior + 2; ++i) m.col(i) = sample();
    return Polyline::build(g.weight, m);
  };

  CsvTable t({"trial", "length_lambda", "length_gamma", "avg_of_lengths", "length_of_avg", "dominated"});
  int violations = 0;
  double worst = -std::numeric_limits<double>::infinity();
  for (int k = 0; k < trials; ++k) {
    const auto [a, b] = equalize_lengths(g.weight, random_path(), random_path());
    const AverageReport r = average_path_check(g.weight, a, b);
    const bool ok = r.dominated && r.equal_lengths;
    violations += ok ? 0 : 1;
    worst = std::max(worst, r.length_of_avg - r.avg_of_lengths);
    t.add_row({std::to_string(k), format_number(r.length_lambda), format_number(r.length_gamma),
               format_number(r.avg_of_lengths), format_number(r.length_of_avg), flag(ok)});
  }
  run.write("averaging.csv", t.str());
  s.add("trials", trials);
  s.add("violations", violations);
  s.add("worst_excess", worst);
  run.say("averaging: " + std::to_string(violations) + " violations in " + std::to_string(trials) + " trials");
  return violations == 0;
}

bool suite_convexity(Run& run, Summary& s) {
  const RunConfig& cfg = run.config();
  const Geometry g = run.geometry();
  require_convex(g.domain, "convexity");
  require_qh(g.weight, "convexity");
  const Params p = run.params();
  const Vector c = read_point(p, "center", g.domain);
  const double r = positive(p, "radius", 1.0);
  const std::vector<Vector> dirs = ray_directions(p, c.size(), cfg.seed);
  const int pairs = count(p, "pairs", 1000);
  const double separation = positive(p, "separation", 0.1);
  p.finish();

  const SphereTrace trace = trace_sphere(g.domain, c, r, dirs, cfg.solver);
  run.write("convexity_trace.csv", trace_csv(trace));
  if (trace.traced().size() < 2) throw ConfigError("operation.params.radius: no sphere points could be traced");
  const ConvexityReport rep = convexity_check(trace, pairs, cfg.solver, cfg.seed, separation);
  s.add("pairs_checked", rep.pairs_checked);
  s.add("violations", rep.violations);
  s.add("worst_excess", rep.worst_excess);
  s.add("censored_rays", rep.censored);
  s.add("separated_pairs", rep.separated_pairs);
  s.add("strictness_margin", rep.strictness_margin);
  run.say("convexity: " + std::to_string(rep.violations) + " violations in " + std::to_string(rep.pairs_checked) +
          " pairs, strictness margin " + format_number(rep.strictness_margin));
  return rep.violations == 0 && (rep.separated_pairs == 0 || rep.strictness_margin > 0.0);
}

bool suite_starlike(Run& run, Summary& s) {
  const RunConfig& cfg = run.config();
  const Geometry g = run.geometry();
  const Params p = run.params();
  const Vector c = read_point(p, "center", g.domain);
  const double r = positive(p, "radius", kLog2);
  const int samples = count(p, "samples", 1000);
  const int t_steps = count(p, "t_steps", 10);
  p.finish();

  const StarlikeReport rep = j_ball_starlike_check(g.domain, c, r, samples, cfg.seed, t_steps);
  s.add("radius", r);
  s.add("guaranteed_regime", rep.guaranteed);
  s.add("samples", rep.samples);
  s.add("evaluations", rep.evaluations);
  s.add("violations", rep.violations);
  s.add("ball_violations", rep.ball_violations);
  s.add("log2_violations", rep.log2_violations);
  s.add("inequality_violations", rep.inequality_violations);
  s.add("bound_above_log2", rep.bound_above_log2);
  s.add("max_j", rep.max_j);
  run.say("starlike: " + std::to_string(rep.violations) + " violations in " + std::to_string(rep.evaluations) +
          " evaluations" + (rep.guaranteed ? "" : " (exploratory radius above log 2)"));
  return rep.violations == 0;
}

bool suite_smoothness(Run& run, Summary& s) {
  const RunConfig& cfg = run.config();
  const Geometry g = run.geometry();
  const Params p = run.params();
  const Vector x = read_point(p, "x", g.domain);
  const Vector y = read_point(p, "y", g.domain);
  const double min_factor = positive(p, "min_factor", 1.4);
  const int min_levels = count(p, "min_levels", 4);
  p.finish();

  const GeodesicResult res = solve_geodesic(g.weight, x, y, cfg.solver);
  const TurningProfile prof = turning_angle_profile(res);
  CsvTable t({"level", "vertex_count", "max_turning_angle", "decrease_factor"});
  bool ok = static_cast<int>(prof.decrease_factors.size()) >= min_levels;
  for (std::size_t i = 0; i < prof.max_angle_per_level.size(); ++i) {
    const std::string f = i == 0 ? "" : format_number(prof.decrease_factors[i - 1]);
    if (i > 0 && !(prof.decrease_factors[i - 1] >= min_factor)) ok = false;
    t.add_row({std::to_string(i), std::to_string(prof.vertex_counts[i]), format_number(prof.max_angle_per_level[i]),
               f});
  }
  run.write("smoothness.csv", t.str());
  const double min_seen = prof.decrease_factors.empty()
                              ? 0.0
                              : *std::min_element(prof.decrease_factors.begin(), prof.decrease_factors.end());
  s.add("doublings", static_cast<long>(prof.decrease_factors.size()));
  s.add("min_decrease_factor", min_seen);
  s.add("required_factor", min_factor);
  s.add("converged", res.converged);
  run.say("smoothness: smallest decrease factor " + format_number(min_seen) + " over " +
          std::to_string(prof.decrease_factors.size()) + " doublings");
  return ok;
}

bool suite_endpoint(Run& run, Summary& s) {
  const RunConfig& cfg = run.config();
  const Geometry g = run.geometry();
  require_qh(g.weight, "the endpoint derivative");
  const Params p = run.params();
  const Vector x0 = read_point(p, "x0", g.domain);
  const Vector x = read_point(p, "x", g.domain);
  const int directions = count(p, "directions", 64, 4);
  const double h = p.number("h", 0.0);
  const double angle_tol = positive(p, "angle_tolerance_deg", 5.0);
  const double rel_tol = positive(p, "relative_tolerance", 0.02);
  p.finish();

  const GeodesicResult res = solve_geodesic(g.weight, x0, x, cfg.solver);
  const EndpointDerivativeReport rep = endpoint_derivative_check(g.domain, x0, x, res, directions, h, cfg.solver);
  const Eigen::Index dim = x.size();
  CsvTable t(concat(concat({"index"}, coordinate_header("z", dim)), {"derivative"}));
  for (std::size_t i = 0; i < rep.directions.size(); ++i) {
    std::vector<std::string> row{std::to_string(i)};
    append(row, rep.directions[i]);
    row.push_back(format_number(rep.values[i]));
    t.add_row(std::move(row));
  }
  run.write("endpoint.csv", t.str());
  const double angle_deg = rep.angle_to_velocity * 180.0 / std::numbers::pi;
  const double rel = std::abs(rep.max_value - rep.predicted) / rep.predicted;
  s.add("angle_to_velocity_deg", angle_deg);
  s.add("max_value", rep.max_value);
  s.add("predicted", rep.predicted);
  s.add("relative_error", rel);
  s.add("reverse_value", rep.reverse_value);
  s.add("step", rep.step);
  run.say("endpoint: angle " + format_number(angle_deg) + " deg, max " + format_number(rep.max_value) +
          " vs 1/d(x) = " + format_number(rep.predicted));
  return angle_deg <= angle_tol && rel <= rel_tol;
}

bool suite_midpoint(Run& run, Summary& s) {
  const RunConfig& cfg = run.config();
  const Geometry g = run.geometry();
  require_convex(g.domain, "the midpoint probe");
  const Params p = run.params();
  const Vector x0 = read_point(p, "x0", g.domain);
  const Vector y = read_point(p, "y", g.domain);
  const std::vector<Vector> seq = read_points(p, "sequence", g.domain);
  p.finish();
  if (seq.size() < 2) throw ConfigError("operation.params.sequence: expected at least two points");

  const MidpointProbeReport rep = midpoint_convergence_probe(g.domain, x0, y, seq, cfg.solver);
  const Eigen::Index dim = y.size();
  CsvTable t(concat(concat({"index"}, coordinate_header("y", dim)), {"midpoint_distance", "midpoint_gap", "norm_gap"}));
  for (std::size_t i = 0; i < rep.projected.size(); ++i) {
    std::vector<std::string> row{std::to_string(i)};
    append(row, rep.projected[i]);
    row.push_back(format_number(rep.midpoint_distances[i]));
    row.push_back(format_number(rep.midpoint_gaps[i]));
    row.push_back(format_number(rep.norm_gaps[i]));
    t.add_row(std::move(row));
  }
  run.write("midpoint.csv", t.str());
  s.add("radius", rep.radius);
  s.add("midpoint_converges", rep.midpoint_converges);
  s.add("norm_converges", rep.norm_converges);
  s.add("consistent", rep.consistent);
  run.say(std::string("midpoint: ") + (rep.consistent ? "consistent" : "midpoint convergence without norm convergence"));
  return rep.consistent;
}

bool suite_series(Run& run, Summary& s) {
  const RunConfig& cfg = run.config();
  const Params p = run.params();
  const std::vector<Params> cases = p.objects("cases");
  const int random_trials = count(p, "random_trials", 0, 0);
  const int random_terms = count(p, "random_terms", 20);
  p.finish();

  std::mt19937_64 rng(cfg.seed);
  CsvTable t({"case", "kind", "lambda", "alpha", "terms", "hypothesis_ok", "lhs", "rhs", "slack", "holds"});
  int failures = 0;
  double worst_equality = 0.0;
  auto record = [&](const std::string& id, const std::string& kind, const SeriesCase& sc, bool equality) {
    const SeriesReport r = series_lemma_check(sc);
    bool ok = r.holds;
    if (equality) {
      worst_equality = std::max(worst_equality, std::abs(r.slack));
      ok = ok && std::abs(r.slack) <= 1e-9;
    }
    failures += ok ? 0 : 1;
    t.add_row({id, kind, format_number(sc.lambda), format_number(sc.alpha), std::to_string(sc.terms.size()),
               flag(r.hypothesis_ok), format_number(r.lhs), format_number(r.rhs), format_number(r.slack), flag(ok)});
  };

  for (std::size_t i = 0; i < cases.size(); ++i) {
    const Params& c = cases[i];
    const double lambda = positive(c, "lambda", 1.0);
    const double alpha = positive(c, "alpha", 1.0);
    if (alpha > 1.0) throw ConfigError("operation.params.cases[" + std::to_string(i) + "].alpha: must lie in (0, 1]");
    const bool has_terms = c.has("terms");
    const bool has_eq = c.has("equality_terms");
    if (has_terms == has_eq) {
      throw ConfigError("operation.params.cases[" + std::to_string(i) + "]: give exactly one of terms, equality_terms");
    }
    if (has_eq) {
      const int n = count(c, "equality_terms", 50);
      c.finish();
      record(std::to_string(i), "equality", series_equality_case(lambda, alpha, n), true);
    } else {
      SeriesCase sc;
      sc.lambda = lambda;
      sc.alpha = alpha;
      sc.terms = c.numbers("terms");
      if (c.has("tail_ratio")) sc.tail_ratio = c.number("tail_ratio");
      c.finish();
      try {
        record(std::to_string(i), "given", sc, false);
      } catch (const std::invalid_argument& e) {
        throw ConfigError("operation.params.cases[" + std::to_string(i) + "]: " + e.what());
      }
    }
    for (int k = 0; k < random_trials; ++k) {
      record(std::to_string(i) + "." + std::to_string(k), "random",
             series_random_case(lambda, alpha, random_terms, rng), false);
    }
  }
  run.write("series.csv", t.str());
  s.add("rows", static_cast<long>(t.rows()));
  s.add("failures", failures);
  s.add("max_equality_slack", worst_equality);
  run.say("series: " + std::to_string(failures) + " failures in " + std::to_string(t.rows()) + " rows");
  return failures == 0;
}

ModulusOfContinuity read_modulus(const Params& p) {
  const std::string kind = p.text("kind", "power");
  try {
    if (kind == "power") {
      const double c = p.number("c", 1.0), a = p.number("a");
      p.finish();
      return ModulusOfContinuity::power(c, a);
    }
    if (kind == "log") {
      const double c = p.number("c", 1.0);
      p.finish();
      return ModulusOfContinuity::log_type(c);
    }
    if (kind == "tabulated") {
      std::vector<double> t = p.numbers("t"), v = p.numbers("values");
      p.finish();
      return ModulusOfContinuity::tabulated(std::move(t), std::move(v));
    }
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("operation.params.nu: ") + e.what());
  }
  throw ConfigError("operation.params.nu.kind: expected power, log or tabulated");
}

bool suite_dini(Run& run, Summary& s) {
  const Params p = run.params();
  const ModulusOfContinuity nu = read_modulus(p.object("nu"));
  std::vector<double> sv;
  if (p.has("s")) {
    sv = p.numbers("s");
  } else {
    for (int k = 1; k <= 12; ++k) sv.push_back(std::pow(10.0, -k));
  }
  const std::string expect = p.text("expect", "pass");
  if (expect != "pass" && expect != "fail" && expect != "inconclusive") {
    throw ConfigError("operation.params.expect: expected pass, fail or inconclusive");
  }
  std::optional<double> alpha;
  if (p.has("dyadic_alpha")) alpha = positive(p, "dyadic_alpha", 1.0);
  p.finish();
  for (double v : sv) {
    if (!(v > 0.0 && v <= 1.0)) throw ConfigError("operation.params.s: values must lie in (0, 1]");
  }

  const DiniReport rep = dini_ratio_curve(nu, sv);
  CsvTable t({"s", "integral", "ratio"});
  for (std::size_t i = 0; i < rep.s.size(); ++i) {
    t.add_row({format_number(rep.s[i]), format_number(rep.integrals[i]), format_number(rep.ratios[i])});
  }
  run.write("dini.csv", t.str());
  s.add("verdict", to_string(rep.verdict));
  s.add("expected", expect);
  s.add("limsup_estimate", rep.limsup_estimate);
  if (alpha) {
    const DyadicSums d = nu_dyadic_sums(nu, *alpha, 1, 30);
    s.add("dyadic_C_estimate", d.C_estimate);
    s.add("dyadic_tail_sum_alpha", d.tail_sum_alpha);
    s.add("dyadic_truncated", d.truncated);
  }
  run.say("dini: verdict " + to_string(rep.verdict) + " (expected " + expect + "), limsup estimate " +
          format_number(rep.limsup_estimate));
  return to_string(rep.verdict) == expect;
}

bool suite_gauge(Run& run, Summary& s) {
  const RunConfig& cfg = run.config();
  const Geometry g = run.geometry();
  require_convex(g.domain, "the ball gauge");
  const Params p = run.params();
  const double r = positive(p, "radius", 1.0);
  const int pairs = count(p, "pairs", 20);
  const int directions = count(p, "directions", 16);
  const int lur_steps = count(p, "lur_steps", 8, 0);
  p.finish();
  const Vector origin = Vector::Zero(g.domain.dim());
  if (!g.domain.contains(origin) || !g.domain.is_symmetric_about_origin()) {
    throw ConfigError("domain: the ball gauge needs a domain symmetric about the origin");
  }

  const Eigen::Index dim = g.domain.dim();
  auto gauge = [&](const Vector& v) { return gauge_from_ball(g.domain, r, v, cfg.solver); };
  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> gauss;
  auto random_vector = [&]() {
    Vector v(dim);
    for (Eigen::Index i = 0; i < dim; ++i) v(i) = gauss(rng);
    return v;
  };

  CsvTable t({"check", "index", "lhs", "rhs", "ok"});
  int failures = 0;
  for (int i = 0; i < pairs; ++i) {
    const Vector u = random_vector(), v = random_vector();
    const double gu = gauge(u), gv = gauge(v);
    const double lambda = 0.25 + 2.0 * std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    const double scaled = gauge(-lambda * u);
    const bool hom_ok = std::abs(scaled - lambda * gu) <= 1e-6 * lambda * gu;
    t.add_row({"homogeneity", std::to_string(i), format_number(scaled), format_number(lambda * gu), flag(hom_ok)});
    const double guv = gauge(u + v);
    const bool tri_ok = guv <= (gu + gv) * (1.0 + 1e-6);
    t.add_row({"triangle", std::to_string(i), format_number(guv), format_number(gu + gv), flag(tri_ok)});
    failures += (hom_ok ? 0 : 1) + (tri_ok ? 0 : 1);
  }

  // LUR probe of the gauge: y_n on the gauge sphere approaching x.
  // Reported only; finite-dimensional strict convexity is not asserted.
  const Vector e0 = Vector::Unit(dim, 0), e1 = Vector::Unit(dim, 1 % dim);
  const Vector x = e0 / gauge(e0);
  for (int n = 1; n <= lur_steps; ++n) {
    Vector yn = e0 + std::pow(2.0, -n) * e1;
    yn /= gauge(yn);
    const double defect = gauge(x) + gauge(yn) - gauge(x + yn);
    const double dist = distance_to_line(Norm::euclidean(dim), yn, x);
    t.add_row({"lur", std::to_string(n), format_number(defect), format_number(dist), "true"});
  }
  run.write("gauge.csv", t.str());

  const GaugeEquivalence eq = gauge_equivalence(g.domain, r, directions, cfg.solver, cfg.seed);
  s.add("failures", failures);
  s.add("equivalence_c1", eq.c1);
  s.add("equivalence_c2", eq.c2);
  run.say("gauge: " + std::to_string(failures) + " failures, " + format_number(eq.c1) +
          " ||v|| <= |||v||| <= " + format_number(eq.c2) + " ||v||");
  return failures == 0;
}

using Suite = bool (*)(Run&, Summary&);

const std::vector<std::pair<std::string, Suite>>& suites() {
  static const std::vector<std::pair<std::string, Suite>> table{
      {"averaging", suite_averaging}, {"convexity", suite_convexity}, {"starlike", suite_starlike},
      {"smoothness", suite_smoothness}, {"endpoint", suite_endpoint}, {"midpoint", suite_midpoint},
      {"series", suite_series},       {"dini", suite_dini},           {"gauge", suite_gauge},
  };
  return table;
}

void cmd_verify(Run& run, const std::string& requested) {
  const std::string name = requested.empty() ? run.config().operation.name : requested;
  const auto& table = suites();
  const auto it = std::find_if(table.begin(), table.end(), [&](const auto& e) { return e.first == name; });
  if (it == table.end()) throw ConfigError("suite: unknown verification suite '" + name + "'");
  Summary s;
  s.add("suite", name);
  const bool passed = it->second(run, s);
  s.add("passed", passed);
  run.write(name + "_summary.csv", s.str());
  run.say(name + (passed ? ": PASS" : ": FAIL"));
  if (!passed) run.outcome().exit_code = kVerificationFailed;
}

}  // namespace

std::vector<std::string> command_names() { return {"moduli", "geodesic", "trace", "verify"}; }

std::vector<std::string> suite_names() {
  std::vector<std::string> out;
  for (const auto& e : suites()) out.push_back(e.first);
  return out;
}

Outcome run(const std::string& command, const RunConfig& config, const std::string& suite) {
  if (config.scenario.empty() || config.scenario.find_first_of("/\\") != std::string::npos ||
      config.scenario == "." || config.scenario == "..") {
    throw ConfigError("scenario: expected a plain, non-empty name");
  }
  Run r(config);
  try {
    if (command == "moduli") {
      cmd_moduli(r);
    } else if (command == "geodesic") {
      cmd_geodesic(r);
    } else if (command == "trace") {
      cmd_trace(r);
    } else if (command == "verify") {
      cmd_verify(r, suite);
    } else {
      throw ConfigError("command: unknown command '" + command + "'");
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return r.outcome();
}

int main(int argc, char** argv) {
  CLI::App app{"Quasihyperbolic geodesics, balls and normed-space moduli"};
  app.require_subcommand(1, 1);
  std::string config_path, out_dir, suite;
  std::uint64_t seed = 0;
  for (const std::string& name : command_names()) {
    static const std::map<std::string, std::string> kAbout{
        {"moduli", "estimate moduli of convexity or smoothness of the norm"},
        {"geodesic", "solve for a geodesic and bound the distance between two points"},
        {"trace", "trace a quasihyperbolic sphere along rays from its centre"},
        {"verify", "run a verification suite and report PASS or FAIL"}};
    CLI::App* sub = app.add_subcommand(name, kAbout.at(name));
    sub->add_option("--config", config_path, "JSON run configuration")->required()->check(CLI::ExistingFile);
    sub->add_option("--seed", seed, "override the configured seed");
    sub->add_option("--out", out_dir, "override the output directory");
    if (name == "verify") sub->add_option("--suite", suite, "verification suite");
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kConfigError;
  }
  const CLI::App* chosen = app.get_subcommands().front();

  try {
    RunConfig cfg = load_run_config(config_path);
    if (chosen->count("--seed") > 0) cfg.seed = seed;
    if (!out_dir.empty()) cfg.output_dir = out_dir;
    const Outcome o = run(chosen->get_name(), cfg, suite);
    for (const std::string& m : o.messages) std::cout << m << '\n';
    for (const auto& f : o.files) std::cout << "wrote " << f.string() << '\n';
    return o.exit_code;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid input: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::domain_error& e) {
    std::cerr << "invalid input: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kNotConverged;
  }
}

}  // namespace qhgeo::cli
