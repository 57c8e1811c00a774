#include "qhgeo/catalog.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace qhgeo {

std::vector<std::string> catalog_names() { return {"half-plane", "square", "slab", "punctured"}; }

Domain catalog_domain(const std::string& name) {
  const Norm euclid = Norm::euclidean(2);
  if (name == "half-plane") return Domain::halfspace(euclid, Vector::Unit(2, 1), 0.0);
  if (name == "square") return Domain::box(euclid, Vector::Zero(2), Vector::Ones(2));
  if (name == "slab") return Domain::slab(euclid, Vector::Unit(2, 0), 0.0, 1.0);
  if (name == "punctured") return Domain::punctured(euclid, Vector::Zero(2));
  throw std::invalid_argument("unknown catalog domain: " + name);
}

Vector catalog_point(const std::string& name, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  Vector p(2);
  if (name == "half-plane") {
    p << -2.0 + 4.0 * unif(rng), 0.1 * std::pow(30.0, unif(rng));
  } else if (name == "square") {
    p << 0.02 + 0.96 * unif(rng), 0.02 + 0.96 * unif(rng);
  } else if (name == "slab") {
    p << 0.02 + 0.96 * unif(rng), -2.0 + 4.0 * unif(rng);
  } else if (name == "punctured") {
    const double r = 0.1 * std::pow(30.0, unif(rng));
    const double a = 2.0 * std::numbers::pi * unif(rng);
    p << r * std::cos(a), r * std::sin(a);
  } else {
    throw std::invalid_argument("unknown catalog domain: " + name);
  }
  return p;
}

}  // namespace qhgeo
