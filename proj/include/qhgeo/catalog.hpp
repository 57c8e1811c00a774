#pragma once

#include "qhgeo/domain.hpp"

#include <random>
#include <string>
#include <vector>

namespace qhgeo {

// Planar benchmark domains with the Euclidean norm:
//   half-plane  x2 > 0
//   square      (0, 1)^2
//   slab        0 < x1 < 1
//   punctured   plane minus the origin
std::vector<std::string> catalog_names();
Domain catalog_domain(const std::string& name);

/// Random point of a catalog domain from a bounded sampling region, kept at
/// least a small distance from the boundary.
Vector catalog_point(const std::string& name, std::mt19937_64& rng);

}  // namespace qhgeo
