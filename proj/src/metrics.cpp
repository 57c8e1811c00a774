#include "qhgeo/metrics.hpp"

#include "qhgeo/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace qhgeo {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double midpoint_length(const Weight& weight, const Polyline& path, int n) {
  const Domain& domain = weight.domain();
  double total = 0.0;
  Vector x(path.dim());
  for (Eigen::Index i = 0; i + 1 < path.size(); ++i) {
    const Vector a = path.vertices().col(i);
    const Vector e = path.vertices().col(i + 1) - a;
    if (!domain.segment_inside(a, a + e)) return kInf;
    double part = 0.0;
    for (int k = 0; k < n; ++k) {
      x = a + ((k + 0.5) / n) * e;
      part += weight(x);
    }
    total += part * domain.norm()(e) / n;
  }
  return total;
}

double gauss_length(const Weight& weight, const Polyline& path, bool halved) {
  double total = 0.0;
  for (Eigen::Index i = 0; i + 1 < path.size(); ++i) {
    const Vector a = path.vertices().col(i), b = path.vertices().col(i + 1);
    if (halved) {
      const Vector m = 0.5 * (a + b);
      total += segment_length(weight, a, m) + segment_length(weight, m, b);
    } else {
      total += segment_length(weight, a, b);
    }
  }
  return total;
}

}  // namespace

double path_length_weighted(const Weight& weight, const Polyline& path,
                            const LengthQuadrature& quadrature) {
  if (path.size() < 2) return 0.0;
  if (quadrature.rule == LengthQuadrature::Rule::kGaussLegendre) {
    return gauss_length(weight, path, false);
  }
  if (quadrature.subdivisions < 1) throw std::invalid_argument("subdivisions must be positive");
  return midpoint_length(weight, path, quadrature.subdivisions);
}

LengthEstimate path_length_estimate(const Weight& weight, const Polyline& path,
                                    const LengthQuadrature& quadrature) {
  LengthEstimate out;
  if (path.size() < 2) return out;
  if (quadrature.rule == LengthQuadrature::Rule::kGaussLegendre) {
    out.length = gauss_length(weight, path, false);
    out.error_estimate = std::abs(gauss_length(weight, path, true) - out.length);
    return out;
  }
  const int n = quadrature.subdivisions;
  if (n < 2) throw std::invalid_argument("error estimate needs at least 2 subdivisions");
  out.length = midpoint_length(weight, path, n);
  out.error_estimate = std::abs(out.length - midpoint_length(weight, path, n / 2)) / 3.0;
  return out;
}

double j_metric(const Domain& domain, const Vector& x, const Vector& y) {
  const double dx = domain.boundary_distance(x);
  const double dy = domain.boundary_distance(y);
  if (!(dx > 0.0) || !(dy > 0.0)) throw std::domain_error("j metric needs points inside the domain");
  return std::log1p(domain.norm()(x - y) / std::min(dx, dy));
}

ModulusOfContinuity ModulusOfContinuity::power(double c, double a) {
  if (!(c > 0.0) || !(a > 0.0 && a <= 1.0)) {
    throw std::invalid_argument("power modulus needs c > 0 and 0 < a <= 1");
  }
  ModulusOfContinuity nu(Kind::kPower);
  nu.c_ = c;
  nu.a_ = a;
  return nu;
}

ModulusOfContinuity ModulusOfContinuity::log_type(double c) {
  if (!(c > 0.0)) throw std::invalid_argument("log modulus needs c > 0");
  ModulusOfContinuity nu(Kind::kLog);
  nu.c_ = c;
  return nu;
}

ModulusOfContinuity ModulusOfContinuity::tabulated(std::vector<double> t, std::vector<double> values) {
  if (t.empty() || t.size() != values.size()) {
    throw std::invalid_argument("tabulated modulus needs matching non-empty samples");
  }
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (!(t[i] > 0.0) || !std::isfinite(t[i]) || !(values[i] >= 0.0) || !std::isfinite(values[i])) {
      throw std::invalid_argument("tabulated modulus samples must be finite with t > 0, value >= 0");
    }
    if (i > 0 && !(t[i] > t[i - 1])) throw std::invalid_argument("tabulated t must increase");
    if (i > 0 && values[i] < values[i - 1]) {
      throw std::invalid_argument("tabulated modulus must be nondecreasing");
    }
  }
  ModulusOfContinuity nu(Kind::kTabulated);
  nu.t_ = std::move(t);
  nu.v_ = std::move(values);
  return nu;
}

double ModulusOfContinuity::operator()(double t) const {
  if (!(t > 0.0)) return 0.0;
  switch (kind_) {
    case Kind::kPower:
      return c_ * std::pow(t, a_);
    case Kind::kLog:
      return c_ / std::log(std::numbers::e + 1.0 / t);
    case Kind::kTabulated:
      break;
  }
  if (t >= t_.back()) return v_.back();
  const auto it = std::upper_bound(t_.begin(), t_.end(), t);
  const std::size_t i = static_cast<std::size_t>(it - t_.begin());
  const double t0 = i == 0 ? 0.0 : t_[i - 1];
  const double v0 = i == 0 ? 0.0 : v_[i - 1];
  return v0 + (v_[i] - v0) * (t - t0) / (t_[i] - t0);
}

double ModulusOfContinuity::integral_over_t(double lo, double s) const {
  if (!(s > lo) || lo < 0.0) return 0.0;
  switch (kind_) {
    case Kind::kPower:
      return c_ * (std::pow(s, a_) - std::pow(lo, a_)) / a_;
    case Kind::kLog: {
      if (lo == 0.0) return kInf;
      // In u = log t the integrand nu(e^u) is smooth and bounded.
      const GaussRule& rule = gauss_legendre(8);
      const double u0 = std::log(lo), u1 = std::log(s);
      const int panels = std::max(1, static_cast<int>(std::ceil(u1 - u0)));
      const double h = (u1 - u0) / panels;
      double sum = 0.0;
      for (int p = 0; p < panels; ++p) {
        for (int q = 0; q < 8; ++q) {
          sum += h * rule.weights(q) * (*this)(std::exp(u0 + h * (p + rule.nodes(q))));
        }
      }
      return sum;
    }
    case Kind::kTabulated:
      break;
  }
  // Exact integral of the piecewise linear interpolant divided by t.
  std::vector<double> knots{0.0};
  std::vector<double> vals{0.0};
  knots.insert(knots.end(), t_.begin(), t_.end());
  vals.insert(vals.end(), v_.begin(), v_.end());
  double sum = 0.0;
  for (std::size_t i = 0; i + 1 < knots.size(); ++i) {
    const double x0 = std::max(lo, knots[i]), x1 = std::min(s, knots[i + 1]);
    if (!(x1 > x0)) continue;
    const double beta = (vals[i + 1] - vals[i]) / (knots[i + 1] - knots[i]);
    const double alpha = vals[i] - beta * knots[i];
    sum += beta * (x1 - x0);
    if (alpha != 0.0) sum += alpha * std::log(x1 / x0);
  }
  if (s > knots.back()) sum += vals.back() * std::log(s / std::max(lo, knots.back()));
  return sum;
}

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::kPass:
      return "pass";
    case Verdict::kFail:
      return "fail";
    case Verdict::kInconclusive:
      break;
  }
  return "inconclusive";
}

DiniReport dini_ratio_curve(const ModulusOfContinuity& nu, const std::vector<double>& s_values,
                            const DiniOptions& options) {
  if (s_values.empty()) throw std::invalid_argument("dini grid is empty");
  for (std::size_t i = 0; i < s_values.size(); ++i) {
    if (!(s_values[i] > 0.0 && s_values[i] <= 1.0)) throw std::invalid_argument("dini grid must lie in (0, 1]");
    if (i > 0 && !(s_values[i] < s_values[i - 1])) {
      throw std::invalid_argument("dini grid must be strictly decreasing");
    }
    if (!(nu(s_values[i]) > 0.0)) throw std::invalid_argument("modulus must be positive on the grid");
  }
  DiniReport r;
  r.s = s_values;
  const double lo = options.analytic_tail ? 0.0 : options.truncation;
  for (double s : s_values) {
    const double integral = nu.integral_over_t(std::min(lo, s), s);
    r.integrals.push_back(integral);
    r.ratios.push_back(integral / nu(s));
  }

  if (std::any_of(r.ratios.begin(), r.ratios.end(), [](double v) { return !std::isfinite(v); })) {
    r.limsup_estimate = kInf;
    r.verdict = Verdict::kFail;
    return r;
  }
  // Window: the last two decades of the grid.
  const double s_last = s_values.back();
  std::size_t i0 = s_values.size();
  for (std::size_t i = 0; i < s_values.size(); ++i) {
    if (s_values[i] >= 100.0 * s_last) i0 = i;
  }
  r.limsup_estimate = *std::max_element(r.ratios.begin(), r.ratios.end());
  if (nu.kind() == ModulusOfContinuity::Kind::kTabulated) return r;
  if (options.analytic_tail && nu.kind() == ModulusOfContinuity::Kind::kPower) {
    r.verdict = Verdict::kPass;
    return r;
  }
  if (i0 == s_values.size()) return r;
  r.limsup_estimate = *std::max_element(r.ratios.begin() + static_cast<long>(i0), r.ratios.end());
  const double growth = r.ratios.back() / r.ratios[i0];
  bool monotone = true;
  for (std::size_t i = i0 + 1; i < r.ratios.size(); ++i) {
    monotone = monotone && r.ratios[i] >= r.ratios[i - 1] * (1.0 - 1e-12);
  }
  if (monotone && growth >= options.growth_threshold) {
    r.verdict = Verdict::kFail;
  } else if (growth <= options.bounded_threshold) {
    r.verdict = Verdict::kPass;
  }
  return r;
}

DyadicSums nu_dyadic_sums(const ModulusOfContinuity& nu, double alpha, int k0, int K) {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw std::invalid_argument("alpha must lie in (0, 1]");
  if (k0 < 1 || K <= k0) throw std::invalid_argument("dyadic sums need 1 <= k0 < K");
  DyadicSums out;
  const auto scale = [](int j) { return std::ldexp(1.0, -j); };

  if (nu.kind() == ModulusOfContinuity::Kind::kLog) {
    // nu(2^-j) ~ c / (j log 2): both series diverge.
    out.analytic_tail = true;
    out.ratios.assign(static_cast<std::size_t>(K - k0 + 1), kInf);
    out.C_estimate = kInf;
    out.tail_sum_alpha = kInf;
    return out;
  }
  const bool power = nu.kind() == ModulusOfContinuity::Kind::kPower;
  out.analytic_tail = power;
  out.truncated = !power;
  const int jmax = power ? K + 60 : 1070;
  // Suffix sums S[j] = sum_{i>=j} nu(2^-i) over j = 1..jmax, with the
  // geometric remainder beyond jmax for the power kind.
  std::vector<double> suffix(static_cast<std::size_t>(jmax + 2), 0.0);
  std::vector<double> suffix_alpha(suffix.size(), 0.0);
  if (power) {
    const double r = std::pow(2.0, -nu.a());
    const double ra = std::pow(2.0, -nu.a() * alpha);
    suffix[jmax + 1] = nu(scale(jmax)) * r / (1.0 - r);
    suffix_alpha[jmax + 1] = std::pow(nu(scale(jmax)), alpha) * ra / (1.0 - ra);
  }
  for (int j = jmax; j >= 1; --j) {
    suffix[j] = suffix[j + 1] + nu(scale(j));
    suffix_alpha[j] = suffix_alpha[j + 1] + std::pow(nu(scale(j)), alpha);
  }
  for (int k = k0; k <= K; ++k) {
    const double v = nu(scale(k));
    const double ratio = v > 0.0 ? suffix[k + 1] / v : (suffix[k + 1] > 0.0 ? kInf : 0.0);
    out.ratios.push_back(ratio);
    out.C_estimate = std::max(out.C_estimate, ratio);
  }
  out.tail_sum_alpha = suffix_alpha[1];
  return out;
}

BetaSeries beta_series(const ModulusOfContinuity& nu, double c, double omega0, double p, double h,
                       int J) {
  if (!(c > 0.0) || !(omega0 > 0.0) || !(h > 0.0)) {
    throw std::invalid_argument("beta series needs positive c, omega0 and h");
  }
  if (!(p >= 2.0)) throw std::invalid_argument("beta series needs p >= 2");
  if (J < 4) throw std::invalid_argument("beta series needs at least 4 scales");
  BetaSeries out;
  const double factor = std::pow(2.0 / omega0, 1.0 / p) / c;
  for (int j = 0; j < J; ++j) {
    const double beta = factor * std::pow(nu(3.0 * std::ldexp(h, -j)), 1.0 / p);
    out.beta_values.push_back(beta);
    out.partial_sum += beta;
  }
  // Least-squares line through (j, log beta_j) on the tail half.
  double sj = 0.0, sl = 0.0, sjj = 0.0, sjl = 0.0;
  int count = 0;
  for (int j = J / 2; j < J; ++j) {
    const double b = out.beta_values[static_cast<std::size_t>(j)];
    if (!(b > 0.0)) continue;
    const double l = std::log(b);
    sj += j;
    sl += l;
    sjj += double(j) * j;
    sjl += j * l;
    ++count;
  }
  if (count == 0) {
    out.converged = true;
    return out;
  }
  if (count < 2) return out;
  const double slope = (count * sjl - sj * sl) / (count * sjj - sj * sj);
  const double intercept = (sl - slope * sj) / count;
  out.fitted_ratio = std::exp(slope);
  bool dominated = true;
  for (int j = J / 2; j < J; ++j) {
    const double b = out.beta_values[static_cast<std::size_t>(j)];
    dominated = dominated && b <= std::exp(intercept + slope * j) * (1.0 + 1e-9);
  }
  out.converged = out.fitted_ratio < 1.0 && dominated;
  return out;
}

SeriesReport series_lemma_check(const SeriesCase& series) {
  const double lambda = series.lambda, alpha = series.alpha;
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw std::invalid_argument("lambda must be positive");
  if (!(alpha > 0.0 && alpha <= 1.0)) throw std::invalid_argument("alpha must lie in (0, 1]");
  if (series.terms.empty()) throw std::invalid_argument("series needs at least one term");
  for (double x : series.terms) {
    if (!(x >= 0.0) || !std::isfinite(x)) throw std::invalid_argument("series terms must be finite and >= 0");
  }
  const double q = series.tail_ratio.value_or(0.0);
  if (!(q >= 0.0 && q < 1.0)) throw std::invalid_argument("tail ratio must lie in [0, 1)");

  const std::vector<double>& x = series.terms;
  const std::size_t n = x.size();
  const double last = x.back();
  const double tail = last * q / (1.0 - q);
  const double qa = std::pow(q, alpha);
  const double tail_alpha = q > 0.0 ? std::pow(last, alpha) * qa / (1.0 - qa) : 0.0;

  SeriesReport r;
  r.hypothesis_ok = true;
  double after = tail;  // sum_{k>i} x_k
  for (std::size_t i = n; i-- > 0;) {
    const double lhs = lambda * x[i];
    if (lhs < after - 1e-12 * std::max(lhs, after)) {
      r.hypothesis_ok = false;
      r.first_violation = static_cast<long>(i);
    }
    after += x[i];
  }
  if (q > 0.0 && last > 0.0 && lambda < (q / (1.0 - q)) * (1.0 - 1e-12)) {
    r.hypothesis_ok = false;
    if (r.first_violation < 0) r.first_violation = static_cast<long>(n);
  }
  const double sum = after;
  double sum_alpha = tail_alpha;
  for (std::size_t i = n; i-- > 0;) sum_alpha += std::pow(x[i], alpha);
  r.lhs = sum_alpha;
  r.rhs = std::pow(sum, alpha) / (std::pow(lambda + 1.0, alpha) - std::pow(lambda, alpha));
  r.slack = r.rhs - r.lhs;
  r.holds = r.hypothesis_ok && r.lhs <= r.rhs + 1e-9;
  return r;
}

SeriesCase series_equality_case(double lambda, double alpha, int terms) {
  if (terms < 1) throw std::invalid_argument("equality case needs at least one term");
  SeriesCase s;
  s.lambda = lambda;
  s.alpha = alpha;
  const double q = lambda / (lambda + 1.0);
  for (int k = 0; k < terms; ++k) s.terms.push_back(std::pow(q, k));
  s.tail_ratio = q;
  return s;
}

SeriesCase series_random_case(double lambda, double alpha, int terms, std::mt19937_64& rng) {
  if (terms < 1) throw std::invalid_argument("random case needs at least one term");
  if (!(lambda > 0.0)) throw std::invalid_argument("lambda must be positive");
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  SeriesCase s;
  s.lambda = lambda;
  s.alpha = alpha;
  s.terms.assign(static_cast<std::size_t>(terms), 0.0);
  s.terms.back() = 0.1 + 0.9 * unif(rng);
  double after = s.terms.back();
  for (int i = terms - 2; i >= 0; --i) {
    s.terms[static_cast<std::size_t>(i)] = after / lambda * (1.0 + 2.0 * unif(rng));
    after += s.terms[static_cast<std::size_t>(i)];
  }
  return s;
}

}  // namespace qhgeo
