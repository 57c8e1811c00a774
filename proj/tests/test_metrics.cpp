#include "qhgeo/catalog.hpp"
#include "qhgeo/metrics.hpp"
#include "qhgeo/quadrature.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>
#include <numbers>
#include <random>

using namespace qhgeo;

namespace {

Vector v2(double a, double b) {
  Vector v(2);
  v << a, b;
  return v;
}

Matrix columns(std::initializer_list<Vector> pts) {
  Matrix m(pts.begin()->size(), static_cast<Eigen::Index>(pts.size()));
  Eigen::Index i = 0;
  for (const Vector& p : pts) m.col(i++) = p;
  return m;
}

const Norm kE = Norm::euclidean(2);
const Domain kHalfPlane = Domain::halfspace(kE, v2(0, 1), 0.0);
const LengthQuadrature kMid10k{LengthQuadrature::Rule::kMidpoint, 10000};
const LengthQuadrature kGauss{LengthQuadrature::Rule::kGaussLegendre, 0};

// Independent oracle: adaptive Simpson on t -> w(a + t (b - a)) ||b - a||.
double simpson_segment(const Weight& w, const Vector& a, const Vector& b) {
  const double len = w.domain().norm()(Vector(b - a));
  auto f = [&](double t) { return w(Vector(a + t * (b - a))) * len; };
  auto rec = [&](auto&& self, double lo, double hi, double flo, double fmid, double fhi, double whole,
                 int depth) -> double {
    const double m = 0.5 * (lo + hi), lm = 0.5 * (lo + m), rm = 0.5 * (m + hi);
    const double flm = f(lm), frm = f(rm);
    const double left = (m - lo) / 6 * (flo + 4 * flm + fmid), right = (hi - m) / 6 * (fmid + 4 * frm + fhi);
    if (depth > 40 || std::abs(left + right - whole) < 1e-13 * std::abs(whole)) return left + right;
    return self(self, lo, m, flo, flm, fmid, left, depth + 1) + self(self, m, hi, fmid, frm, fhi, right, depth + 1);
  };
  const double f0 = f(0), f1 = f(1), fm = f(0.5);
  return rec(rec, 0.0, 1.0, f0, fm, f1, (f0 + 4 * fm + f1) / 6, 0);
}

}  // namespace

TEST_CASE("Gauss-Legendre rules integrate polynomials exactly") {
  const GaussRule& g = gauss_legendre(8);
  CHECK(g.weights.sum() == doctest::Approx(1.0).epsilon(1e-15));
  for (int k = 0; k <= 15; ++k) {
    const double q = (g.weights.array() * g.nodes.array().pow(k)).sum();
    CHECK(q == doctest::Approx(1.0 / (k + 1)).epsilon(1e-13));
  }
}

TEST_CASE("weights through the boundary distance") {
  const Weight qh = Weight::quasihyperbolic(kHalfPlane);
  CHECK(qh(v2(3, 4)) == doctest::Approx(0.25));
  CHECK(std::isinf(qh(v2(0, -1))));
  CHECK(Weight::distance_power(kHalfPlane, 0.0)(v2(1, 5)) == 1.0);
  CHECK(Weight::distance_power(kHalfPlane, 2.0)(v2(1, 5)) == doctest::Approx(0.04));
  Perturbation sine;
  sine.amplitude = 0.5;
  sine.frequency = 2.0;
  const Weight pert = Weight::perturbed(kHalfPlane, sine);
  CHECK(pert(v2(0.3, 2.0)) == doctest::Approx((1 + 0.5 * std::sin(2.0 * 2.3)) / 2.0));
  sine.amplitude = 1.5;
  CHECK_THROWS_AS(Weight::perturbed(kHalfPlane, sine), std::invalid_argument);
  CHECK_THROWS_AS(Weight::distance_power(kHalfPlane, -1.0), std::invalid_argument);
}

TEST_CASE("weight derivatives match finite differences") {
  Perturbation radial;
  radial.kind = Perturbation::Kind::kRadial;
  radial.amplitude = 0.3;
  const Norm l3 = Norm::p_norm(2, 3.0);
  const std::vector<Weight> weights{
      Weight::quasihyperbolic(Domain::ball(l3, v2(0, 0), 2.0)),
      Weight::distance_power(Domain::punctured(l3, v2(0.2, 0)), 1.5),
      Weight::perturbed(Domain::halfspace(kE, v2(1, 2), -1.0), radial),
  };
  const Vector x = v2(0.7, -0.4);
  for (const Weight& w : weights) {
    const WeightJet j = w.jet(x);
    for (int i = 0; i < 2; ++i) {
      const double h = 1e-5;
      Vector a = x, b = x;
      a(i) += h;
      b(i) -= h;
      CHECK(j.gradient(i) == doctest::Approx((w(a) - w(b)) / (2 * h)).epsilon(1e-6));
      const Vector hcol = (w.jet(a).gradient - w.jet(b).gradient) / (2 * h);
      for (int k = 0; k < 2; ++k) CHECK(j.hessian(k, i) == doctest::Approx(hcol(k)).epsilon(1e-5));
    }
  }
}

TEST_CASE("segment lengths against closed forms and an adaptive oracle") {
  const Weight qh = Weight::quasihyperbolic(kHalfPlane);
  CHECK(segment_length(qh, v2(0, 1), v2(0, std::numbers::e)) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::isinf(segment_length(qh, v2(0, 1), v2(0, -1))));
  const Weight punct = Weight::quasihyperbolic(Domain::punctured(kE, v2(0, 0)));
  CHECK(segment_length(punct, v2(1, 0), v2(4, 0)) == doctest::Approx(std::log(4.0)).epsilon(1e-12));
  // a chord passing close to the puncture and a slanted chord in a ball
  CHECK(segment_length(punct, v2(-1, 0.05), v2(2, 0.05)) ==
        doctest::Approx(simpson_segment(punct, v2(-1, 0.05), v2(2, 0.05))).epsilon(1e-9));
  const Weight ball = Weight::quasihyperbolic(Domain::ball(Norm::p_norm(2, 4.0), v2(0, 0), 1.0));
  CHECK(segment_length(ball, v2(-0.9, 0.1), v2(0.5, 0.8)) ==
        doctest::Approx(simpson_segment(ball, v2(-0.9, 0.1), v2(0.5, 0.8))).epsilon(1e-9));
  const Weight sq = Weight::quasihyperbolic(catalog_domain("square"));
  CHECK(segment_length(sq, v2(0.01, 0.3), v2(0.9, 0.95)) ==
        doctest::Approx(simpson_segment(sq, v2(0.01, 0.3), v2(0.9, 0.95))).epsilon(1e-9));
}

TEST_CASE("segment split places the weighted fraction") {
  const Weight qh = Weight::quasihyperbolic(kHalfPlane);
  const Vector a = v2(0, 1), b = v2(0, std::exp(2.0));
  const double t = segment_split(qh, a, b, 0.5);
  CHECK(1.0 + t * (b(1) - 1.0) == doctest::Approx(std::numbers::e).epsilon(1e-10));
}

TEST_CASE("segment jet matches finite differences") {
  const std::vector<Weight> weights{Weight::quasihyperbolic(kHalfPlane),
                                    Weight::quasihyperbolic(Domain::punctured(Norm::p_norm(2, 3.0), v2(0, 0))),
                                    Weight::distance_power(catalog_domain("square"), 0.7)};
  const std::vector<std::pair<Vector, Vector>> segs{{v2(-0.5, 0.4), v2(0.8, 1.7)},
                                                     {v2(0.6, 0.5), v2(-0.7, 0.9)},
                                                     {v2(0.2, 0.3), v2(0.7, 0.6)}};
  for (std::size_t k = 0; k < weights.size(); ++k) {
    const Weight& w = weights[k];
    const auto& [a, b] = segs[k];
    CAPTURE(k);
    const SegmentJet j = segment_jet(w, a, b);
    CHECK(j.value == doctest::Approx(segment_length(w, a, b)).epsilon(1e-13));
    const double h = 1e-5;
    for (int i = 0; i < 2; ++i) {
      Vector ap = a, am = a, bp = b, bm = b;
      ap(i) += h;
      am(i) -= h;
      bp(i) += h;
      bm(i) -= h;
      CHECK(j.grad_a(i) == doctest::Approx((segment_length(w, ap, b) - segment_length(w, am, b)) / (2 * h)).epsilon(1e-6));
      CHECK(j.grad_b(i) == doctest::Approx((segment_length(w, a, bp) - segment_length(w, a, bm)) / (2 * h)).epsilon(1e-6));
      const SegmentJet jap = segment_jet(w, ap, b), jam = segment_jet(w, am, b);
      const SegmentJet jbp = segment_jet(w, a, bp), jbm = segment_jet(w, a, bm);
      for (int r = 0; r < 2; ++r) {
        CHECK(j.haa(r, i) == doctest::Approx((jap.grad_a(r) - jam.grad_a(r)) / (2 * h)).epsilon(1e-5));
        CHECK(j.hab(r, i) == doctest::Approx((jbp.grad_a(r) - jbm.grad_a(r)) / (2 * h)).epsilon(1e-5));
        CHECK(j.hbb(r, i) == doctest::Approx((jbp.grad_b(r) - jbm.grad_b(r)) / (2 * h)).epsilon(1e-5));
      }
    }
  }
}

TEST_CASE("path length examples") {
  const Weight qh = Weight::quasihyperbolic(kHalfPlane);
  const Polyline vertical = Polyline::build(qh, columns({v2(0, 1), v2(0, std::numbers::e)}));
  CHECK(std::abs(path_length_weighted(qh, vertical, kMid10k) - 1.0) <= 1e-6);
  CHECK(std::abs(path_length_weighted(qh, vertical, kGauss) - 1.0) <= 1e-12);

  const Weight punct = Weight::quasihyperbolic(Domain::punctured(kE, v2(0, 0)));
  const Polyline radial = Polyline::build(punct, columns({v2(1, 0), v2(4, 0)}));
  CHECK(std::abs(path_length_weighted(punct, radial, kMid10k) - std::log(4.0)) <= 1e-6);

  const Polyline single = Polyline::build(qh, columns({v2(2, 3)}));
  CHECK(path_length_weighted(qh, single) == 0.0);

  CHECK_THROWS_AS(Polyline::build(qh, columns({v2(0, 1), v2(0, -1)})), std::domain_error);
  const Weight sq = Weight::quasihyperbolic(catalog_domain("slab"));
  CHECK(std::isinf(path_length_weighted(sq, Polyline::from_samples(sq, columns({v2(0.5, 0), v2(0.5, 1)}),
                                                                     Vector::Zero(2)))) == false);
}

TEST_CASE("a segment leaving the domain has infinite length") {
  const Weight sq = Weight::quasihyperbolic(catalog_domain("punctured"));
  const Polyline through = Polyline::from_samples(sq, columns({v2(-1, 0), v2(1, 0)}), Vector::Zero(2));
  CHECK(std::isinf(path_length_weighted(sq, through, kGauss)));
}

TEST_CASE("path length is additive under concatenation") {
  std::mt19937_64 rng(3);
  for (const std::string& name : catalog_names()) {
    const Weight w = Weight::quasihyperbolic(catalog_domain(name));
    for (int trial = 0; trial < 30; ++trial) {
      Vector a = catalog_point(name, rng), b = catalog_point(name, rng), c = catalog_point(name, rng);
      if (name == "punctured") {
        // keep the pieces away from the puncture: use points on one side
        a(0) = std::abs(a(0)) + 0.1;
        b(0) = std::abs(b(0)) + 0.1;
        c(0) = std::abs(c(0)) + 0.1;
      }
      for (const LengthQuadrature& q : {kGauss, LengthQuadrature{LengthQuadrature::Rule::kMidpoint, 64}}) {
        const double l1 = path_length_weighted(w, Polyline::build(w, columns({a, b})), q);
        const double l2 = path_length_weighted(w, Polyline::build(w, columns({b, c})), q);
        const double l = path_length_weighted(w, Polyline::build(w, columns({a, b, c})), q);
        CHECK(std::abs(l - (l1 + l2)) <= 1e-12 * l);
      }
    }
  }
}

TEST_CASE("midpoint quadrature converges with a sound error estimate") {
  const Weight qh = Weight::quasihyperbolic(kHalfPlane);
  const Polyline vertical = Polyline::build(qh, columns({v2(0, 0.2), v2(0, 5.0)}));
  const double exact = std::log(25.0);
  for (int n : {16, 64, 256, 1024}) {
    const LengthEstimate coarse = path_length_estimate(qh, vertical, {LengthQuadrature::Rule::kMidpoint, n});
    const LengthEstimate fine = path_length_estimate(qh, vertical, {LengthQuadrature::Rule::kMidpoint, 2 * n});
    CHECK(std::abs(fine.length - coarse.length) <= 4.0 * fine.error_estimate + 1e-15);
    CHECK(std::abs(fine.length - exact) <= 2.0 * fine.error_estimate + 1e-12);
  }
}

TEST_CASE("j metric") {
  CHECK(j_metric(kHalfPlane, v2(1, 2), v2(1, 2)) == 0.0);
  CHECK(j_metric(kHalfPlane, v2(0, 1), v2(0, 2)) == doctest::Approx(std::log(2.0)));
  CHECK(j_metric(catalog_domain("punctured"), v2(1, 0), v2(4, 0)) == doctest::Approx(std::log(4.0)));
  CHECK_THROWS_AS(j_metric(kHalfPlane, v2(0, -1), v2(0, 2)), std::domain_error);
}

TEST_CASE("j metric is symmetric with zero diagonal") {
  std::mt19937_64 rng(6);
  for (const std::string& name : catalog_names()) {
    const Domain d = catalog_domain(name);
    for (int i = 0; i < 2500; ++i) {
      const Vector x = catalog_point(name, rng), y = catalog_point(name, rng);
      CHECK(j_metric(d, x, y) == j_metric(d, y, x));
      CHECK(j_metric(d, x, x) == 0.0);
    }
  }
}

TEST_CASE("Dini ratio curve") {
  std::vector<double> s;
  for (int k = 1; k <= 12; ++k) s.push_back(std::pow(10.0, -k));
  for (double a : {0.25, 0.5, 1.0}) {
    const DiniReport r = dini_ratio_curve(ModulusOfContinuity::power(1.0, a), s);
    for (double ratio : r.ratios) CHECK(ratio == doctest::Approx(1.0 / a).epsilon(1e-12));
    CHECK(r.verdict == Verdict::kPass);
  }
  const DiniReport log_r = dini_ratio_curve(ModulusOfContinuity::log_type(1.0), s);
  CHECK(log_r.verdict == Verdict::kFail);
  CHECK_THROWS_AS(dini_ratio_curve(ModulusOfContinuity::power(1.0, 0.5), {0.1, 0.2}), std::invalid_argument);
  CHECK_THROWS_AS(dini_ratio_curve(ModulusOfContinuity::power(1.0, 0.5), {}), std::invalid_argument);
}

TEST_CASE("Dini integral of the log modulus grows like log log") {
  // nu(t) = 1/log(e + 1/t) ~ 1/log(1/t), whose integral against dt/t from
  // lo to s behaves like log(log(1/lo) / log(1/s)).
  const ModulusOfContinuity nu = ModulusOfContinuity::log_type(1.0);
  const double s = 1e-3;
  const double i1 = nu.integral_over_t(1e-30, s), i2 = nu.integral_over_t(1e-60, s);
  CHECK(i2 - i1 == doctest::Approx(std::log(60.0 / 30.0)).epsilon(0.02));
  CHECK(std::isinf(nu.integral_over_t(0.0, s)));
}

TEST_CASE("tabulated modulus integrates exactly on its pieces") {
  const ModulusOfContinuity nu = ModulusOfContinuity::tabulated({0.1, 0.2, 0.4}, {0.1, 0.3, 0.4});
  // piecewise linear between samples; check against a fine midpoint sum
  double ref = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double t = 0.1 + (0.3 * (i + 0.5)) / n;
    ref += nu(t) / t * 0.3 / n;
  }
  CHECK(nu.integral_over_t(0.1, 0.4) == doctest::Approx(ref).epsilon(1e-8));
  CHECK_THROWS_AS(ModulusOfContinuity::tabulated({0.2, 0.1}, {1, 2}), std::invalid_argument);
  std::vector<double> s{0.4, 0.2, 0.1};
  CHECK(dini_ratio_curve(nu, s).verdict == Verdict::kInconclusive);
}

TEST_CASE("dyadic sums") {
  const DyadicSums lin = nu_dyadic_sums(ModulusOfContinuity::power(1.0, 1.0), 0.5, 1, 40);
  CHECK(lin.C_estimate == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(lin.tail_sum_alpha == doctest::Approx(1.0 / (std::sqrt(2.0) - 1.0)).epsilon(1e-12));
  const DyadicSums half = nu_dyadic_sums(ModulusOfContinuity::power(1.0, 0.5), 1.0, 1, 40);
  CHECK(half.C_estimate == doctest::Approx(1.0 / (std::sqrt(2.0) - 1.0)).epsilon(1e-12));
  const DyadicSums one = nu_dyadic_sums(ModulusOfContinuity::power(1.0, 1.0), 1.0, 1, 10);
  CHECK(one.C_estimate == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::isfinite(one.tail_sum_alpha));
  CHECK(std::isinf(nu_dyadic_sums(ModulusOfContinuity::log_type(1.0), 1.0, 1, 10).C_estimate));
  CHECK_THROWS_AS(nu_dyadic_sums(ModulusOfContinuity::power(1.0, 1.0), 1.0, 5, 5), std::invalid_argument);
}

TEST_CASE("beta series") {
  const BetaSeries lin = beta_series(ModulusOfContinuity::power(1.0, 1.0), 1.0, 1.0, 2.0, 1.0 / 3.0, 40);
  for (int j = 0; j < 40; ++j) {
    CHECK(lin.beta_values[static_cast<std::size_t>(j)] == doctest::Approx(std::sqrt(2.0) * std::pow(2.0, -j / 2.0)));
  }
  CHECK(lin.converged);
  CHECK(lin.fitted_ratio == doctest::Approx(std::pow(2.0, -0.5)).epsilon(1e-9));
  CHECK(std::isfinite(lin.partial_sum));

  const BetaSeries small = beta_series(ModulusOfContinuity::power(1.0, 1.0), 1.0, 1.0, 2.0, 1e-12, 8);
  CHECK(small.beta_values.front() < 1e-5);

  const BetaSeries log_b = beta_series(ModulusOfContinuity::log_type(1.0), 1.0, 1.0, 2.0, 1.0 / 3.0, 40);
  CHECK_FALSE(log_b.converged);
  CHECK_THROWS_AS(beta_series(ModulusOfContinuity::power(1.0, 1.0), 1.0, 1.0, 1.5, 0.3, 40), std::invalid_argument);
}

TEST_CASE("series bound examples") {
  const SeriesReport eq = series_lemma_check(series_equality_case(1.0, 0.5, 60));
  CHECK(eq.hypothesis_ok);
  CHECK(eq.lhs == doctest::Approx(2.0 + std::sqrt(2.0)).epsilon(1e-12));
  CHECK(eq.rhs == doctest::Approx(2.0 + std::sqrt(2.0)).epsilon(1e-12));
  CHECK(std::abs(eq.slack) <= 1e-9);

  SeriesCase spike;
  spike.lambda = 1.0;
  spike.alpha = 0.5;
  spike.terms = {1.0, 0.0, 0.0, 0.0};
  const SeriesReport sp = series_lemma_check(spike);
  CHECK(sp.lhs == doctest::Approx(1.0));
  CHECK(sp.rhs == doctest::Approx(1.0 / (std::sqrt(2.0) - 1.0)));
  CHECK(sp.holds);

  SeriesCase thirds;
  thirds.lambda = 1.0;
  thirds.alpha = 0.5;
  for (int k = 0; k < 30; ++k) thirds.terms.push_back(std::pow(3.0, -k));
  thirds.tail_ratio = 1.0 / 3.0;
  const SeriesReport th = series_lemma_check(thirds);
  CHECK(th.hypothesis_ok);
  CHECK(th.holds);
  CHECK(th.slack > 0.0);

  SeriesCase bad;
  bad.lambda = 0.5;
  bad.alpha = 1.0;
  bad.terms = {1.0, 1.0, 1.0};
  const SeriesReport b = series_lemma_check(bad);
  CHECK_FALSE(b.hypothesis_ok);
  CHECK_FALSE(b.holds);
  CHECK(b.first_violation >= 0);
}

TEST_CASE("series bound equality grid") {
  for (double lambda : {0.5, 1.0, 3.0}) {
    for (double alpha : {0.25, 0.5, 1.0}) {
      const SeriesReport r = series_lemma_check(series_equality_case(lambda, alpha, 80));
      CHECK(r.hypothesis_ok);
      CHECK(std::abs(r.slack) <= 1e-9);
      // closed form: sum q^(alpha k) = 1 / (1 - q^alpha) with q = lambda / (lambda + 1)
      const double q = lambda / (lambda + 1.0);
      CHECK(r.lhs == doctest::Approx(1.0 / (1.0 - std::pow(q, alpha))).epsilon(1e-12));
    }
  }
}

TEST_CASE("random hypothesis-satisfying sequences obey the bound") {
  std::mt19937_64 rng(14);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  int failures = 0;
  for (int i = 0; i < 1000; ++i) {
    const double lambda = 0.1 + 5.0 * unif(rng);
    const double alpha = 0.05 + 0.95 * unif(rng);
    const SeriesReport r = series_lemma_check(series_random_case(lambda, alpha, 1 + i % 40, rng));
    failures += (r.hypothesis_ok && r.holds) ? 0 : 1;
  }
  CHECK(failures == 0);
}
