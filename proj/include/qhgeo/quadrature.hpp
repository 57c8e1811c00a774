#pragma once

#include "qhgeo/norm.hpp"

namespace qhgeo {

/// Gauss-Legendre nodes and weights mapped to [0, 1].
struct GaussRule {
  Vector nodes;
  Vector weights;
};

/// Golub-Welsch construction; rules are cached per order.
const GaussRule& gauss_legendre(int order);

}  // namespace qhgeo
