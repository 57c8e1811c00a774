#include "qhgeo/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

namespace qhgeo {
namespace {

using nlohmann::json;

void check_keys(const json& j, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) throw ConfigError(where + ": expected an object");
  for (const auto& item : j.items()) {
    const bool known = std::any_of(allowed.begin(), allowed.end(),
                                   [&](const char* k) { return item.key() == k; });
    if (!known) throw ConfigError(where + "." + item.key() + ": unknown key");
  }
}

double get_number(const json& j, const char* key, const std::string& where) {
  const json& v = j.at(key);
  if (!v.is_number()) throw ConfigError(where + "." + key + ": expected a number");
  return v.get<double>();
}

long get_integer(const json& j, const char* key, const std::string& where) {
  const json& v = j.at(key);
  if (!v.is_number_integer()) throw ConfigError(where + "." + key + ": expected an integer");
  return v.get<long>();
}

std::string get_text(const json& j, const char* key, const std::string& where) {
  const json& v = j.at(key);
  if (!v.is_string()) throw ConfigError(where + "." + key + ": expected a string");
  return v.get<std::string>();
}

std::vector<double> get_numbers(const json& j, const char* key, const std::string& where) {
  const json& v = j.at(key);
  if (!v.is_array()) throw ConfigError(where + "." + key + ": expected an array of numbers");
  std::vector<double> out;
  for (const json& x : v) {
    if (!x.is_number()) throw ConfigError(where + "." + key + ": expected an array of numbers");
    out.push_back(x.get<double>());
  }
  return out;
}

void require(const json& j, const char* key, const std::string& where) {
  if (!j.contains(key)) throw ConfigError(where + "." + key + ": missing required key");
}

DomainSpec parse_domain(const json& j) {
  const std::string where = "domain";
  if (!j.is_object()) throw ConfigError(where + ": expected an object");
  require(j, "shape", where);
  DomainSpec d;
  d.shape = get_text(j, "shape", where);
  if (d.shape == "halfspace") {
    check_keys(j, where, {"shape", "normal", "offset"});
    require(j, "normal", where);
    d.normal = get_numbers(j, "normal", where);
    if (j.contains("offset")) d.offset = get_number(j, "offset", where);
  } else if (d.shape == "ball") {
    check_keys(j, where, {"shape", "center", "radius"});
    require(j, "center", where);
    require(j, "radius", where);
    d.center = get_numbers(j, "center", where);
    d.radius = get_number(j, "radius", where);
  } else if (d.shape == "polytope") {
    check_keys(j, where, {"shape", "faces"});
    require(j, "faces", where);
    if (!j.at("faces").is_array()) throw ConfigError(where + ".faces: expected an array");
    for (std::size_t i = 0; i < j.at("faces").size(); ++i) {
      const std::string fw = where + ".faces[" + std::to_string(i) + "]";
      const json& f = j.at("faces")[i];
      check_keys(f, fw, {"normal", "offset"});
      require(f, "normal", fw);
      FaceSpec face;
      face.normal = get_numbers(f, "normal", fw);
      if (f.contains("offset")) face.offset = get_number(f, "offset", fw);
      d.faces.push_back(face);
    }
  } else if (d.shape == "punctured") {
    check_keys(j, where, {"shape", "point"});
    require(j, "point", where);
    d.point = get_numbers(j, "point", where);
  } else if (d.shape == "slab") {
    check_keys(j, where, {"shape", "normal", "lower", "upper"});
    require(j, "normal", where);
    require(j, "lower", where);
    require(j, "upper", where);
    d.normal = get_numbers(j, "normal", where);
    d.lower = get_number(j, "lower", where);
    d.upper = get_number(j, "upper", where);
  } else {
    throw ConfigError(where + ".shape: unknown shape '" + d.shape + "'");
  }
  return d;
}

json domain_json(const DomainSpec& d) {
  json j{{"shape", d.shape}};
  if (d.shape == "halfspace") {
    j["normal"] = d.normal;
    j["offset"] = d.offset;
  } else if (d.shape == "ball") {
    j["center"] = d.center;
    j["radius"] = d.radius;
  } else if (d.shape == "polytope") {
    j["faces"] = json::array();
    for (const FaceSpec& f : d.faces) j["faces"].push_back({{"normal", f.normal}, {"offset", f.offset}});
  } else if (d.shape == "punctured") {
    j["point"] = d.point;
  } else if (d.shape == "slab") {
    j["normal"] = d.normal;
    j["lower"] = d.lower;
    j["upper"] = d.upper;
  }
  return j;
}

WeightSpec parse_weight(const json& j) {
  const std::string where = "weight";
  if (!j.is_object()) throw ConfigError(where + ": expected an object");
  require(j, "kind", where);
  WeightSpec w;
  w.kind = get_text(j, "kind", where);
  if (w.kind == "quasihyperbolic") {
    check_keys(j, where, {"kind"});
  } else if (w.kind == "distance_power") {
    check_keys(j, where, {"kind", "exponent"});
    require(j, "exponent", where);
    w.exponent = get_number(j, "exponent", where);
  } else if (w.kind == "perturbed") {
    check_keys(j, where, {"kind", "perturbation", "amplitude", "frequency"});
    require(j, "amplitude", where);
    if (j.contains("perturbation")) w.perturbation = get_text(j, "perturbation", where);
    if (w.perturbation != "sine" && w.perturbation != "radial") {
      throw ConfigError(where + ".perturbation: expected 'sine' or 'radial'");
    }
    w.amplitude = get_number(j, "amplitude", where);
    if (j.contains("frequency")) w.frequency = get_number(j, "frequency", where);
  } else {
    throw ConfigError(where + ".kind: unknown weight kind '" + w.kind + "'");
  }
  return w;
}

json weight_json(const WeightSpec& w) {
  json j{{"kind", w.kind}};
  if (w.kind == "distance_power") j["exponent"] = w.exponent;
  if (w.kind == "perturbed") {
    j["perturbation"] = w.perturbation;
    j["amplitude"] = w.amplitude;
    j["frequency"] = w.frequency;
  }
  return j;
}

SolverConfig parse_solver(const json& j) {
  const std::string where = "solver";
  check_keys(j, where, {"initial_vertices", "refinement_levels", "max_iterations", "step_tolerance",
                        "length_tolerance", "seed"});
  SolverConfig s;
  if (j.contains("initial_vertices")) s.initial_vertices = static_cast<int>(get_integer(j, "initial_vertices", where));
  if (j.contains("refinement_levels")) s.refinement_levels = static_cast<int>(get_integer(j, "refinement_levels", where));
  if (j.contains("max_iterations")) s.max_iterations = static_cast<int>(get_integer(j, "max_iterations", where));
  if (j.contains("step_tolerance")) s.step_tolerance = get_number(j, "step_tolerance", where);
  if (j.contains("length_tolerance")) s.length_tolerance = get_number(j, "length_tolerance", where);
  if (j.contains("seed")) {
    if (!j.at("seed").is_number_unsigned()) throw ConfigError(where + ".seed: expected a non-negative integer");
    s.seed = j.at("seed").get<std::uint64_t>();
  }
  try {
    s.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(where + ": " + e.what());
  }
  return s;
}

json solver_json(const SolverConfig& s) {
  return {{"initial_vertices", s.initial_vertices}, {"refinement_levels", s.refinement_levels},
          {"max_iterations", s.max_iterations},     {"step_tolerance", s.step_tolerance},
          {"length_tolerance", s.length_tolerance}, {"seed", s.seed}};
}

Vector to_vector(const std::vector<double>& v) {
  return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

}  // namespace

bool operator==(const SolverConfig& a, const SolverConfig& b) {
  return a.initial_vertices == b.initial_vertices && a.refinement_levels == b.refinement_levels &&
         a.max_iterations == b.max_iterations && a.step_tolerance == b.step_tolerance &&
         a.length_tolerance == b.length_tolerance && a.seed == b.seed;
}

bool operator==(const RunConfig& a, const RunConfig& b) {
  return a.scenario == b.scenario && a.seed == b.seed && a.output_dir == b.output_dir && a.norm == b.norm &&
         a.domain == b.domain && a.weight == b.weight && a.solver == b.solver && a.operation == b.operation;
}

NormSpec parse_norm_spec(const json& j, const std::string& where) {
  check_keys(j, where, {"kind", "p", "dim", "weights"});
  require(j, "kind", where);
  require(j, "p", where);
  require(j, "dim", where);
  if (get_text(j, "kind", where) != "p") throw ConfigError(where + ".kind: only kind \"p\" is supported");
  NormSpec n;
  const json& p = j.at("p");
  if (p.is_string()) {
    if (p.get<std::string>() != "inf") throw ConfigError(where + ".p: expected a number >= 1 or \"inf\"");
    n.p = std::numeric_limits<double>::infinity();
  } else if (p.is_number()) {
    n.p = p.get<double>();
    if (!(n.p >= 1.0)) throw ConfigError(where + ".p: expected a number >= 1 or \"inf\"");
  } else {
    throw ConfigError(where + ".p: expected a number >= 1 or \"inf\"");
  }
  const long dim = get_integer(j, "dim", where);
  if (dim < 1) throw ConfigError(where + ".dim: expected a positive integer");
  n.dim = static_cast<int>(dim);
  if (j.contains("weights")) {
    n.weights = get_numbers(j, "weights", where);
    if (static_cast<long>(n.weights.size()) != dim) throw ConfigError(where + ".weights: expected dim entries");
    for (double w : n.weights) {
      if (!(w > 0.0) || !std::isfinite(w)) throw ConfigError(where + ".weights: entries must be positive");
    }
  }
  return n;
}

json to_json(const NormSpec& n) {
  json j{{"kind", "p"}, {"dim", n.dim}};
  if (std::isinf(n.p)) {
    j["p"] = "inf";
  } else {
    j["p"] = n.p;
  }
  if (!n.weights.empty()) j["weights"] = n.weights;
  return j;
}

RunConfig parse_run_config(const json& j) {
  check_keys(j, "config", {"scenario", "seed", "output_dir", "norm", "domain", "weight", "solver", "operation"});
  RunConfig c;
  require(j, "scenario", "config");
  c.scenario = get_text(j, "scenario", "config");
  if (j.contains("seed")) {
    if (!j.at("seed").is_number_unsigned()) throw ConfigError("config.seed: expected a non-negative integer");
    c.seed = j.at("seed").get<std::uint64_t>();
  }
  if (j.contains("output_dir")) c.output_dir = get_text(j, "output_dir", "config");
  if (j.contains("norm")) c.norm = parse_norm_spec(j.at("norm"));
  if (j.contains("domain")) {
    c.domain = parse_domain(j.at("domain"));
  } else {
    c.domain.shape.clear();
  }
  if (j.contains("weight")) c.weight = parse_weight(j.at("weight"));
  if (j.contains("solver")) c.solver = parse_solver(j.at("solver"));
  require(j, "operation", "config");
  const json& op = j.at("operation");
  check_keys(op, "operation", {"name", "params"});
  require(op, "name", "operation");
  c.operation.name = get_text(op, "name", "operation");
  if (op.contains("params")) {
    if (!op.at("params").is_object()) throw ConfigError("operation.params: expected an object");
    c.operation.params = op.at("params");
  }
  return c;
}

json to_json(const RunConfig& c) {
  json j{{"scenario", c.scenario},
         {"seed", c.seed},
         {"output_dir", c.output_dir},
         {"norm", to_json(c.norm)},
         {"weight", weight_json(c.weight)},
         {"solver", solver_json(c.solver)},
         {"operation", {{"name", c.operation.name}, {"params", c.operation.params}}}};
  if (!c.domain.shape.empty()) j["domain"] = domain_json(c.domain);
  return j;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config: malformed JSON: ") + e.what());
  }
  return parse_run_config(j);
}

Norm make_norm(const NormSpec& spec) {
  try {
    if (spec.weights.empty()) return Norm::p_norm(spec.dim, spec.p);
    return Norm::weighted(spec.p, to_vector(spec.weights));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("norm: ") + e.what());
  }
}

Domain make_domain(const DomainSpec& spec, const Norm& norm) {
  if (spec.shape.empty()) throw ConfigError("domain: missing required key");
  auto sized = [&](const std::vector<double>& v, const char* key) {
    if (static_cast<Eigen::Index>(v.size()) != norm.dim()) {
      throw ConfigError(std::string("domain.") + key + ": expected norm.dim entries");
    }
    return to_vector(v);
  };
  try {
    if (spec.shape == "halfspace") return Domain::halfspace(norm, sized(spec.normal, "normal"), spec.offset);
    if (spec.shape == "ball") return Domain::ball(norm, sized(spec.center, "center"), spec.radius);
    if (spec.shape == "punctured") return Domain::punctured(norm, sized(spec.point, "point"));
    if (spec.shape == "slab") return Domain::slab(norm, sized(spec.normal, "normal"), spec.lower, spec.upper);
    std::vector<Domain::Face> faces;
    for (const FaceSpec& f : spec.faces) faces.push_back({sized(f.normal, "faces.normal"), f.offset});
    return Domain::polytope(norm, faces);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("domain: ") + e.what());
  }
}

Weight make_weight(const WeightSpec& spec, const Domain& domain) {
  try {
    if (spec.kind == "distance_power") return Weight::distance_power(domain, spec.exponent);
    if (spec.kind == "perturbed") {
      Perturbation p;
      p.kind = spec.perturbation == "radial" ? Perturbation::Kind::kRadial : Perturbation::Kind::kSine;
      p.amplitude = spec.amplitude;
      p.frequency = spec.frequency;
      return Weight::perturbed(domain, p);
    }
    return Weight::quasihyperbolic(domain);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("weight: ") + e.what());
  }
}

Params::Params(const json& j, std::string where) : j_(j), where_(std::move(where)) {
  if (!j_.is_object()) throw ConfigError(where_ + ": expected an object");
}

bool Params::has(const std::string& key) const {
  seen_.push_back(key);
  return j_.contains(key);
}

const json& Params::at(const std::string& key) const {
  seen_.push_back(key);
  if (!j_.contains(key)) fail(key, "missing required key");
  return j_.at(key);
}

void Params::fail(const std::string& key, const std::string& what) const {
  throw ConfigError(where_ + "." + key + ": " + what);
}

double Params::number(const std::string& key) const {
  const json& v = at(key);
  if (v.is_string() && v.get<std::string>() == "inf") return std::numeric_limits<double>::infinity();
  if (!v.is_number()) fail(key, "expected a number");
  return v.get<double>();
}

double Params::number(const std::string& key, double fallback) const {
  return has(key) ? number(key) : fallback;
}

long Params::integer(const std::string& key) const {
  const json& v = at(key);
  if (!v.is_number_integer()) fail(key, "expected an integer");
  return v.get<long>();
}

long Params::integer(const std::string& key, long fallback) const {
  return has(key) ? integer(key) : fallback;
}

std::string Params::text(const std::string& key, const std::string& fallback) const {
  if (!has(key)) return fallback;
  const json& v = at(key);
  if (!v.is_string()) fail(key, "expected a string");
  return v.get<std::string>();
}

std::vector<double> Params::numbers(const std::string& key) const {
  const json& v = at(key);
  if (!v.is_array()) fail(key, "expected an array of numbers");
  std::vector<double> out;
  for (const json& x : v) {
    if (!x.is_number()) fail(key, "expected an array of numbers");
    out.push_back(x.get<double>());
  }
  return out;
}

Vector Params::vector(const std::string& key) const { return to_vector(numbers(key)); }

std::vector<Vector> Params::points(const std::string& key) const {
  const json& v = at(key);
  if (!v.is_array()) fail(key, "expected an array of points");
  std::vector<Vector> out;
  for (const json& p : v) {
    if (!p.is_array()) fail(key, "expected an array of points");
    std::vector<double> xs;
    for (const json& x : p) {
      if (!x.is_number()) fail(key, "expected an array of points");
      xs.push_back(x.get<double>());
    }
    out.push_back(to_vector(xs));
  }
  return out;
}

Params Params::object(const std::string& key) const { return Params(at(key), where_ + "." + key); }

std::vector<Params> Params::objects(const std::string& key) const {
  const json& v = at(key);
  if (!v.is_array()) fail(key, "expected an array of objects");
  std::vector<Params> out;
  for (std::size_t i = 0; i < v.size(); ++i) out.emplace_back(v[i], where_ + "." + key + "[" + std::to_string(i) + "]");
  return out;
}

void Params::finish() const {
  for (const auto& item : j_.items()) {
    if (std::find(seen_.begin(), seen_.end(), item.key()) == seen_.end()) {
      fail(item.key(), "unknown key");
    }
  }
}

}  // namespace qhgeo
