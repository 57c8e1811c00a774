#pragma once

#include "qhgeo/polyline.hpp"

#include <optional>
#include <random>
#include <string>
#include <vector>

namespace qhgeo {

struct LengthQuadrature {
  enum class Rule { kMidpoint, kGaussLegendre };
  Rule rule = Rule::kMidpoint;
  int subdivisions = 1024;  // per segment, midpoint rule only
};

struct LengthEstimate {
  double length = 0.0;
  double error_estimate = 0.0;
};

/// Weighted length sum over segments of integral w(gamma) ||d gamma||.
/// The midpoint rule samples every segment at `subdivisions` cell centres; a
/// segment that leaves the domain gives +inf.  Gauss-Legendre uses the
/// adaptive panel rule of segment_length.
double path_length_weighted(const Weight& weight, const Polyline& path,
                            const LengthQuadrature& quadrature = {});

/// Same length with a Richardson-style estimate |L(n) - L(n/2)| / 3 for the
/// midpoint rule (second order).  For Gauss-Legendre the estimate compares
/// against the midpoint rule at the default subdivision count.
LengthEstimate path_length_estimate(const Weight& weight, const Polyline& path,
                                    const LengthQuadrature& quadrature = {});

/// j(x, y) = log(1 + ||x - y|| / min(d(x), d(y))).  Throws std::domain_error
/// for points outside the domain.
double j_metric(const Domain& domain, const Vector& x, const Vector& y);

/// Modulus of continuity nu of a weight.
///   power:      nu(t) = c t^a,            0 < a <= 1
///   log:        nu(t) = c / log(e + 1/t)
///   tabulated:  piecewise linear through the samples, through (0, 0) on the
///               left and constant to the right of the last sample
class ModulusOfContinuity {
 public:
  enum class Kind { kPower, kLog, kTabulated };

  static ModulusOfContinuity power(double c, double a);
  static ModulusOfContinuity log_type(double c);
  static ModulusOfContinuity tabulated(std::vector<double> t, std::vector<double> values);

  Kind kind() const { return kind_; }
  double c() const { return c_; }
  double a() const { return a_; }
  const std::vector<double>& sample_t() const { return t_; }
  const std::vector<double>& sample_values() const { return v_; }

  double operator()(double t) const;

  /// Integral of nu(t)/t over (lo, s].  lo = 0 is allowed and gives +inf for
  /// the log kind.
  double integral_over_t(double lo, double s) const;

 private:
  explicit ModulusOfContinuity(Kind kind) : kind_(kind) {}

  Kind kind_;
  double c_ = 1.0;
  double a_ = 1.0;
  std::vector<double> t_;
  std::vector<double> v_;
};

enum class Verdict { kPass, kFail, kInconclusive };
std::string to_string(Verdict v);

struct DiniOptions {
  // Evaluate the integral from 0 with closed forms where they exist.  When
  // false the integral starts at `truncation` and the verdict comes from the
  // growth heuristic alone.
  bool analytic_tail = true;
  double truncation = 1e-300;
  double growth_threshold = 1.5;   // growth across the last two decades => fail
  double bounded_threshold = 1.05; // growth at most this => pass
};

struct DiniReport {
  std::vector<double> s;
  std::vector<double> integrals;
  std::vector<double> ratios;
  double limsup_estimate = 0.0;
  Verdict verdict = Verdict::kInconclusive;
};

/// Ratios (integral_0^s nu(t)/t dt) / nu(s) over a strictly decreasing grid
/// in (0, 1].
DiniReport dini_ratio_curve(const ModulusOfContinuity& nu, const std::vector<double>& s_values,
                            const DiniOptions& options = {});

struct DyadicSums {
  std::vector<double> ratios;  // sum_{j>k} nu(2^-j) / nu(2^-k) for k = k0..K
  double C_estimate = 0.0;     // max of ratios
  double tail_sum_alpha = 0.0; // sum_{j>=1} nu(2^-j)^alpha
  bool analytic_tail = false;
  bool truncated = false;
};

DyadicSums nu_dyadic_sums(const ModulusOfContinuity& nu, double alpha, int k0, int K);

struct BetaSeries {
  std::vector<double> beta_values;  // beta(h / 2^j), j = 0..J-1
  double partial_sum = 0.0;
  double fitted_ratio = 0.0;        // geometric ratio fitted on the tail half
  bool converged = false;
};

/// beta(h) = (1/c) (2/omega0)^(1/p) nu(3h)^(1/p) at the scales h / 2^j.
/// Converged when a least-squares geometric fit of the tail half has ratio
/// below one and lies above every tail term.
BetaSeries beta_series(const ModulusOfContinuity& nu, double c, double omega0, double p, double h,
                       int J);

/// Non-negative terms x_0, ..., x_{N-1}, optionally continued by the
/// geometric tail x_{N-1+k} = x_{N-1} q^k.
struct SeriesCase {
  double lambda = 1.0;
  double alpha = 1.0;
  std::vector<double> terms;
  std::optional<double> tail_ratio;
};

struct SeriesReport {
  bool hypothesis_ok = false;
  double lhs = 0.0;
  double rhs = 0.0;
  bool holds = false;
  double slack = 0.0;  // rhs - lhs
  long first_violation = -1;
};

/// Checks lambda x_n >= sum_{k>n} x_k for every n and, when it holds, the
/// bound sum x_k^alpha <= (sum x_k)^alpha / ((lambda+1)^alpha - lambda^alpha).
SeriesReport series_lemma_check(const SeriesCase& series);

/// Terms of the extremal sequence x_k = (lambda / (lambda + 1))^k with its
/// analytic tail.
SeriesCase series_equality_case(double lambda, double alpha, int terms);

/// Random finite sequence satisfying lambda x_n >= sum_{k>n} x_k, built from
/// the last term backwards with a random excess factor in [1, 3).
SeriesCase series_random_case(double lambda, double alpha, int terms, std::mt19937_64& rng);

}  // namespace qhgeo
