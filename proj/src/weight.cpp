#include "qhgeo/weight.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace qhgeo {
namespace {

struct ScalarJet {
  double value;
  double d1;
  double d2;
};

/// phi(d) and its first two derivatives, where w = phi(d) * (1 + g).
ScalarJet profile(WeightKind kind, double exponent, double d) {
  if (kind == WeightKind::kDistancePower) {
    const double v = std::pow(d, -exponent);
    return {v, -exponent * v / d, exponent * (exponent + 1.0) * v / (d * d)};
  }
  const double v = 1.0 / d;
  return {v, -v * v, 2.0 * v * v * v};
}

struct PerturbationJet {
  double value = 0.0;
  Vector gradient;
  Matrix hessian;
};

PerturbationJet perturbation_jet(const Perturbation& p, const Vector& x) {
  const Eigen::Index n = x.size();
  PerturbationJet g;
  if (p.kind == Perturbation::Kind::kSine) {
    const double s = p.frequency * x.sum();
    const double c = std::cos(s), sn = std::sin(s);
    g.value = p.amplitude * sn;
    g.gradient = Vector::Constant(n, p.amplitude * p.frequency * c);
    g.hessian = Matrix::Constant(n, n, -p.amplitude * p.frequency * p.frequency * sn);
  } else {
    const double r2 = x.squaredNorm();
    const double q = 1.0 + r2;
    g.value = p.amplitude * r2 / q;
    g.gradient = (2.0 * p.amplitude / (q * q)) * x;
    g.hessian = (2.0 * p.amplitude / (q * q)) * Matrix::Identity(n, n) -
                (8.0 * p.amplitude / (q * q * q)) * x * x.transpose();
  }
  return g;
}

}  // namespace

Weight Weight::quasihyperbolic(Domain domain) {
  return Weight(std::move(domain), WeightKind::kQuasihyperbolic);
}

Weight Weight::distance_power(Domain domain, double exponent) {
  if (!(exponent >= 0.0) || !std::isfinite(exponent)) {
    throw std::invalid_argument("distance-power weight needs exponent >= 0");
  }
  Weight w(std::move(domain), WeightKind::kDistancePower);
  w.exponent_ = exponent;
  return w;
}

Weight Weight::perturbed(Domain domain, Perturbation perturbation) {
  if (perturbation.kind == Perturbation::Kind::kSine && !(std::abs(perturbation.amplitude) < 1.0)) {
    throw std::invalid_argument("sine perturbation needs |amplitude| < 1");
  }
  if (perturbation.kind == Perturbation::Kind::kRadial && !(perturbation.amplitude > -1.0)) {
    throw std::invalid_argument("radial perturbation needs amplitude > -1");
  }
  if (!std::isfinite(perturbation.amplitude) || !std::isfinite(perturbation.frequency)) {
    throw std::invalid_argument("perturbation parameters must be finite");
  }
  Weight w(std::move(domain), WeightKind::kPerturbed);
  w.perturbation_ = perturbation;
  return w;
}

double Weight::operator()(const Vector& x) const {
  const double d = domain_.boundary_distance(x);
  if (!(d > 0.0)) return std::numeric_limits<double>::infinity();
  const double phi = profile(kind_, exponent_, d).value;
  if (kind_ != WeightKind::kPerturbed) return phi;
  return phi * (1.0 + perturbation_jet(perturbation_, x).value);
}

WeightJet Weight::jet(const Vector& x) const {
  const double d = domain_.boundary_distance(x);
  if (!(d > 0.0)) throw std::domain_error("weight derivatives requested outside the domain");
  const ScalarJet phi = profile(kind_, exponent_, d);
  const Vector dg = domain_.distance_gradient(x);
  WeightJet out;
  out.value = phi.value;
  out.gradient = phi.d1 * dg;
  out.hessian = phi.d2 * dg * dg.transpose();
  if (domain_.shape() == Shape::kBall || domain_.shape() == Shape::kPunctured) {
    out.hessian += phi.d1 * domain_.distance_hessian(x);
  }
  if (kind_ == WeightKind::kPerturbed) {
    const PerturbationJet g = perturbation_jet(perturbation_, x);
    const double f = 1.0 + g.value;
    out.hessian = f * out.hessian + out.gradient * g.gradient.transpose() +
                  g.gradient * out.gradient.transpose() + phi.value * g.hessian;
    out.gradient = f * out.gradient + phi.value * g.gradient;
    out.value = f * phi.value;
  }
  return out;
}

}  // namespace qhgeo
