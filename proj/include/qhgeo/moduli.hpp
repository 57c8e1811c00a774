#pragma once

#include "qhgeo/norm.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace qhgeo {

/// A budgeted estimate of the modulus of convexity or smoothness at one
/// argument, together with the pair of vectors that attains it.
struct ModulusEstimate {
  double argument = 0.0;
  double value = 0.0;
  Vector witness_x;
  Vector witness_y;
  long budget = 0;
  std::uint64_t seed = 0;
};

/// delta(eps) = inf { 1 - ||x+y||/2 : ||x|| = ||y|| = 1, ||x-y|| = eps }.
///
/// Searches pairs inside 2-planes: x runs over the unit sphere of the plane
/// and y is located on the same sphere by bisection on the chord length, so
/// every evaluated pair is feasible.  The result is the best feasible value
/// found and therefore an upper estimate of the infimum.  Coordinate planes
/// and the angles k*pi/4 are always included as starts; the rest of the
/// budget is stratified random sampling followed by golden-section polish.
ModulusEstimate modulus_convexity(const Norm& norm, double eps, long budget, std::uint64_t seed);

/// rho(tau) = sup { (||x+y|| + ||x-y||)/2 - 1 : ||x|| = 1, ||y|| = tau }.
/// Lower estimate of the supremum (best feasible value found).
ModulusEstimate modulus_smoothness(const Norm& norm, double tau, long budget, std::uint64_t seed);

struct PowerTypeFit {
  double K = 0.0;
  double p = 0.0;
  double r_squared = 0.0;
};

/// Least-squares fit of log(value) against log(argument).  K is the largest
/// constant with value >= K * argument^p on every input.
PowerTypeFit power_type_fit(std::span<const ModulusEstimate> estimates);

/// inf over real t of ||y - t x||.
double distance_to_line(const Norm& norm, const Vector& y, const Vector& x);

struct LurProbeReport {
  std::vector<double> defects;         // ||x|| + ||y_n|| - ||x + y_n||
  std::vector<double> line_distances;  // d(y_n, span{x})
  bool defect_decays = false;
  bool distance_decays = false;
  bool failure_witness = false;  // vanishing defect with distance bounded away
  long witness_index = -1;
  bool consistent = true;        // defect decay is accompanied by distance decay
};

LurProbeReport lur_defect_probe(const Norm& norm, const Vector& x, const std::vector<Vector>& y_seq);

}  // namespace qhgeo
