#pragma once

#include "qhgeo/domain.hpp"

namespace qhgeo {

enum class WeightKind { kQuasihyperbolic, kDistancePower, kPerturbed };

/// Smooth factor g of a perturbed weight w = (1 + g) / d.
///   sine:   g(x) = amplitude * sin(frequency * sum_i x_i),   |amplitude| < 1
///   radial: g(x) = amplitude * |x|^2 / (1 + |x|^2),          amplitude > -1
/// (|.| is the Euclidean length.)
struct Perturbation {
  enum class Kind { kSine, kRadial };
  Kind kind = Kind::kSine;
  double amplitude = 0.0;
  double frequency = 1.0;
};

/// Value, gradient and Hessian of a weight at a point.
struct WeightJet {
  double value = 0.0;
  Vector gradient;
  Matrix hessian;
};

/// A positive weight on a domain, expressed through the boundary distance:
///   quasihyperbolic   w = 1 / d
///   distance_power    w = d^(-a),  a >= 0   (a = 0 is the constant weight)
///   perturbed         w = (1 + g) / d
class Weight {
 public:
  static Weight quasihyperbolic(Domain domain);
  static Weight distance_power(Domain domain, double exponent);
  static Weight perturbed(Domain domain, Perturbation perturbation);

  WeightKind kind() const { return kind_; }
  const Domain& domain() const { return domain_; }
  double exponent() const { return exponent_; }
  const Perturbation& perturbation() const { return perturbation_; }
  bool is_quasihyperbolic() const { return kind_ == WeightKind::kQuasihyperbolic; }

  /// +inf outside the domain.
  double operator()(const Vector& x) const;

  /// Derivatives on the smooth piece of d containing x.
  WeightJet jet(const Vector& x) const;

 private:
  Weight(Domain domain, WeightKind kind) : domain_(std::move(domain)), kind_(kind) {}

  Domain domain_;
  WeightKind kind_;
  double exponent_ = 1.0;
  Perturbation perturbation_;
};

}  // namespace qhgeo
