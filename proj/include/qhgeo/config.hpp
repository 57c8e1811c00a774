#pragma once

#include "qhgeo/geodesic.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

namespace qhgeo {

/// Invalid or malformed configuration.  The message starts with the dotted
/// path of the offending key.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct NormSpec {
  double p = 2.0;                // +inf is written as "inf"
  int dim = 2;
  std::vector<double> weights;   // empty: unweighted
  bool operator==(const NormSpec&) const = default;
};

struct FaceSpec {
  std::vector<double> normal;
  double offset = 0.0;
  bool operator==(const FaceSpec&) const = default;
};

/// Fields used per shape:
///   halfspace  normal, offset      (normal . x > offset)
///   ball       center, radius
///   polytope   faces
///   punctured  point
///   slab       normal, lower, upper
struct DomainSpec {
  std::string shape;  // empty: no domain given
  std::vector<double> normal;
  double offset = 0.0;
  std::vector<double> center;
  double radius = 0.0;
  std::vector<FaceSpec> faces;
  std::vector<double> point;
  double lower = 0.0;
  double upper = 0.0;
  bool operator==(const DomainSpec&) const = default;
};

/// kind: quasihyperbolic | distance_power (exponent) |
///       perturbed (perturbation sine|radial, amplitude, frequency)
struct WeightSpec {
  std::string kind = "quasihyperbolic";
  double exponent = 1.0;
  std::string perturbation = "sine";
  double amplitude = 0.0;
  double frequency = 1.0;
  bool operator==(const WeightSpec&) const = default;
};

struct OperationSpec {
  std::string name;
  nlohmann::json params = nlohmann::json::object();
  bool operator==(const OperationSpec&) const = default;
};

struct RunConfig {
  std::string scenario;
  std::uint64_t seed = 0;
  std::string output_dir = "out";
  NormSpec norm;
  DomainSpec domain;
  WeightSpec weight;
  SolverConfig solver;
  OperationSpec operation;
};

bool operator==(const SolverConfig& a, const SolverConfig& b);
bool operator==(const RunConfig& a, const RunConfig& b);

/// Strict parse: unknown keys, wrong types and out-of-range values throw
/// ConfigError.  Only `scenario` and `operation.name` are required.
RunConfig parse_run_config(const nlohmann::json& j);
nlohmann::json to_json(const RunConfig& config);
RunConfig load_run_config(const std::filesystem::path& path);

NormSpec parse_norm_spec(const nlohmann::json& j, const std::string& where = "norm");
nlohmann::json to_json(const NormSpec& spec);

Norm make_norm(const NormSpec& spec);
Domain make_domain(const DomainSpec& spec, const Norm& norm);
Weight make_weight(const WeightSpec& spec, const Domain& domain);

/// Typed access to an operation's parameter object.  Every read marks the
/// key as known; finish() rejects keys that were never read.
class Params {
 public:
  Params(const nlohmann::json& j, std::string where);

  bool has(const std::string& key) const;
  double number(const std::string& key) const;
  double number(const std::string& key, double fallback) const;
  long integer(const std::string& key) const;
  long integer(const std::string& key, long fallback) const;
  std::string text(const std::string& key, const std::string& fallback) const;
  Vector vector(const std::string& key) const;
  std::vector<double> numbers(const std::string& key) const;
  std::vector<Vector> points(const std::string& key) const;
  Params object(const std::string& key) const;
  std::vector<Params> objects(const std::string& key) const;
  void finish() const;

 private:
  const nlohmann::json& at(const std::string& key) const;
  [[noreturn]] void fail(const std::string& key, const std::string& what) const;

  nlohmann::json j_;
  std::string where_;
  mutable std::vector<std::string> seen_;
};

}  // namespace qhgeo
