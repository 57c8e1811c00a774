#include "qhgeo/polyline.hpp"

#include "qhgeo/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace qhgeo {
namespace {

constexpr int kGaussOrder = 8;
constexpr double kPanelRatio = 0.5;
constexpr int kMaxPanels = 1 << 14;

}  // namespace

std::vector<std::pair<double, double>> segment_panels(const Domain& domain, const Vector& a,
                                                      const Vector& b) {
  std::vector<double> cuts = domain.segment_breakpoints(a, b);
  cuts.insert(cuts.begin(), 0.0);
  cuts.push_back(1.0);
  std::vector<std::pair<double, double>> out;
  const Vector e = b - a;
  const double length = domain.norm()(e);
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
    const double t0 = cuts[k], t1 = cuts[k + 1];
    if (!(t1 > t0)) continue;
    const double dmin = domain.min_distance_on_segment(a + t0 * e, a + t1 * e);
    if (!(dmin > 0.0)) return {};
    const double want = std::ceil(length * (t1 - t0) / (kPanelRatio * dmin));
    const int count = static_cast<int>(std::clamp(want, 1.0, static_cast<double>(kMaxPanels)));
    for (int p = 0; p < count; ++p) {
      out.emplace_back(t0 + (t1 - t0) * p / count, t0 + (t1 - t0) * (p + 1) / count);
    }
  }
  return out;
}

double segment_length(const Weight& weight, const Vector& a, const Vector& b) {
  const Domain& domain = weight.domain();
  const double length = domain.norm()(b - a);
  if (length == 0.0) return 0.0;
  if (!domain.segment_inside(a, b)) return std::numeric_limits<double>::infinity();
  static const GaussRule& rule = gauss_legendre(kGaussOrder);
  const Vector e = b - a;
  double sum = 0.0;
  Vector x(a.size());
  for (const auto& [t0, t1] : segment_panels(domain, a, b)) {
    const double h = t1 - t0;
    double part = 0.0;
    for (int q = 0; q < kGaussOrder; ++q) {
      x = a + (t0 + h * rule.nodes(q)) * e;
      part += rule.weights(q) * weight(x);
    }
    sum += h * part;
  }
  return length * sum;
}

double segment_split(const Weight& weight, const Vector& a, const Vector& b, double fraction) {
  if (fraction <= 0.0) return 0.0;
  if (fraction >= 1.0) return 1.0;
  const double total = segment_length(weight, a, b);
  if (!std::isfinite(total)) throw std::domain_error("segment leaves the domain");
  if (total == 0.0) return fraction;
  const double target = fraction * total;
  const Vector e = b - a;
  const double len = weight.domain().norm()(e);
  double lo = 0.0, hi = 1.0, t = fraction;
  for (int it = 0; it < 100; ++it) {
    const double f = segment_length(weight, a, a + t * e) - target;
    if (std::abs(f) <= 1e-15 * total) break;
    (f < 0.0 ? lo : hi) = t;
    const Vector xt = a + t * e;
    const double slope = weight(xt) * len;
    double next = t - f / slope;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - t) <= 1e-16) break;
    t = next;
  }
  return t;
}

SegmentJet segment_jet(const Weight& weight, const Vector& a, const Vector& b) {
  const Domain& domain = weight.domain();
  const Norm& norm = domain.norm();
  const Eigen::Index n = a.size();
  const Vector e = b - a;
  const double len = norm(e);
  if (len == 0.0) throw std::invalid_argument("segment jet of a degenerate segment");
  if (!domain.segment_inside(a, b)) throw std::domain_error("segment leaves the domain");
  static const GaussRule& rule = gauss_legendre(kGaussOrder);

  // S = len * W with W = int w, Ga = int (1-t) grad w, Gb = int t grad w.
  double W = 0.0;
  Vector Ga = Vector::Zero(n), Gb = Vector::Zero(n);
  Matrix Kaa = Matrix::Zero(n, n), Kab = Matrix::Zero(n, n), Kbb = Matrix::Zero(n, n);
  Vector x(n);
  for (const auto& [t0, t1] : segment_panels(domain, a, b)) {
    const double h = t1 - t0;
    for (int q = 0; q < kGaussOrder; ++q) {
      const double t = t0 + h * rule.nodes(q);
      const double wq = h * rule.weights(q);
      x = a + t * e;
      const WeightJet j = weight.jet(x);
      W += wq * j.value;
      Ga.noalias() += (wq * (1.0 - t)) * j.gradient;
      Gb.noalias() += (wq * t) * j.gradient;
      Kaa.noalias() += (wq * (1.0 - t) * (1.0 - t)) * j.hessian;
      Kab.noalias() += (wq * (1.0 - t) * t) * j.hessian;
      Kbb.noalias() += (wq * t * t) * j.hessian;
    }
  }
  const Vector g = norm.gradient(e);
  const Matrix H = norm.hessian(e);
  SegmentJet s;
  s.value = len * W;
  s.grad_a = -W * g + len * Ga;
  s.grad_b = W * g + len * Gb;
  s.haa = W * H - g * Ga.transpose() - Ga * g.transpose() + len * Kaa;
  s.hbb = W * H + g * Gb.transpose() + Gb * g.transpose() + len * Kbb;
  s.hab = -W * H - g * Gb.transpose() + Ga * g.transpose() + len * Kab;

  // Where the active face of d changes, grad w jumps.  The kink parameter t*
  // moves with the endpoints, which adds (jump of the integrand) x dt*/d(a, b)
  // to the second derivatives.
  for (double tk : domain.segment_breakpoints(a, b)) {
    constexpr double kSide = 1e-8;
    if (tk - kSide <= 0.0 || tk + kSide >= 1.0) continue;
    const Vector xm = a + (tk - kSide) * e, xp = a + (tk + kSide) * e;
    const Vector dg = domain.distance_gradient(xp) - domain.distance_gradient(xm);
    const double D = dg.dot(e);
    if (!(std::abs(D) > 1e-12 * dg.norm() * e.norm())) continue;
    const Vector dw = weight.jet(xp).gradient - weight.jet(xm).gradient;
    const Vector ta = (-(1.0 - tk) / D) * dg, tb = (-tk / D) * dg;
    s.haa.noalias() -= (len * (1.0 - tk)) * dw * ta.transpose();
    s.hab.noalias() -= (len * (1.0 - tk)) * dw * tb.transpose();
    s.hbb.noalias() -= (len * tk) * dw * tb.transpose();
  }
  return s;
}

Polyline Polyline::build(const Weight& weight, Matrix vertices) {
  const Domain& domain = weight.domain();
  if (vertices.rows() != domain.dim()) throw std::invalid_argument("polyline dimension mismatch");
  Polyline p;
  const Eigen::Index m = vertices.cols();
  p.vertices_ = std::move(vertices);
  p.distances_.resize(m);
  p.cumulative_.resize(m);
  p.velocity_.resize(domain.dim(), std::max<Eigen::Index>(0, m - 1));
  for (Eigen::Index i = 0; i < m; ++i) {
    if (!domain.contains(p.vertices_.col(i))) {
      throw std::domain_error("polyline vertex " + std::to_string(i) + " lies outside the domain");
    }
    p.distances_(i) = domain.boundary_distance(p.vertices_.col(i));
  }
  if (m > 0) p.cumulative_(0) = 0.0;
  for (Eigen::Index i = 0; i + 1 < m; ++i) {
    const Vector a = p.vertices_.col(i), b = p.vertices_.col(i + 1);
    const Vector e = b - a;
    const double len = domain.norm()(e);
    if (len == 0.0) {
      throw std::invalid_argument("polyline has repeated consecutive vertices at " + std::to_string(i));
    }
    p.velocity_.col(i) = e / len;
    p.cumulative_(i + 1) = p.cumulative_(i) + segment_length(weight, a, b);
  }
  return p;
}

Polyline Polyline::from_samples(const Weight& weight, Matrix vertices, Vector cumulative) {
  if (cumulative.size() != vertices.cols()) throw std::invalid_argument("sample count mismatch");
  Polyline p = build(weight, std::move(vertices));
  for (Eigen::Index i = 1; i < cumulative.size(); ++i) {
    if (cumulative(i) < cumulative(i - 1)) throw std::invalid_argument("cumulative length must not decrease");
  }
  p.cumulative_ = std::move(cumulative);
  return p;
}

ArcLengthMap::ArcLengthMap(const Weight& weight, const Polyline& path)
    : weight_(&weight), vertices_(path.vertices()) {
  static const GaussRule& rule = gauss_legendre(kGaussOrder);
  const Domain& domain = weight.domain();
  at_vertex_.push_back(0.0);
  Vector x(path.dim());
  for (Eigen::Index i = 0; i + 1 < path.size(); ++i) {
    const Vector a = vertices_.col(i);
    const Vector e = vertices_.col(i + 1) - a;
    const double len = domain.norm()(e);
    const auto cuts = segment_panels(domain, a, a + e);
    if (cuts.empty()) throw std::domain_error("polyline segment leaves the domain");
    std::vector<Panel> panels;
    double s = total_;
    for (const auto& [t0, t1] : cuts) {
      panels.push_back({t0, t1, s});
      double part = 0.0;
      for (int q = 0; q < kGaussOrder; ++q) {
        x = a + (t0 + (t1 - t0) * rule.nodes(q)) * e;
        part += rule.weights(q) * weight(x);
      }
      s += (t1 - t0) * part * len;
    }
    panels_.push_back(std::move(panels));
    seg_norm_.push_back(len);
    total_ = s;
    at_vertex_.push_back(total_);
  }
}

ArcLengthMap::Location ArcLengthMap::at(double s) const {
  static const GaussRule& rule = gauss_legendre(kGaussOrder);
  Location out;
  if (panels_.empty()) {
    out.point = vertices_.col(0);
    return out;
  }
  s = std::clamp(s, 0.0, total_);
  const auto it = std::upper_bound(at_vertex_.begin(), at_vertex_.end(), s);
  const Eigen::Index seg = std::min<Eigen::Index>(
      std::max<Eigen::Index>(it - at_vertex_.begin() - 1, 0), static_cast<Eigen::Index>(panels_.size()) - 1);
  out.segment = seg;
  const std::vector<Panel>& panels = panels_[static_cast<std::size_t>(seg)];
  std::size_t k = 0;
  while (k + 1 < panels.size() && panels[k + 1].s0 <= s) ++k;
  const Panel& p = panels[k];
  const double s1 = k + 1 < panels.size() ? panels[k + 1].s0 : at_vertex_[static_cast<std::size_t>(seg) + 1];
  const Vector a = vertices_.col(seg);
  const Vector e = vertices_.col(seg + 1) - a;
  const double len = seg_norm_[static_cast<std::size_t>(seg)];
  const double target = s - p.s0;
  // Newton on F(t) = integral of w ||e|| over [t0, t], safeguarded by the
  // bracket [t0, t1].  Inside one panel a single Gauss rule is accurate.
  double lo = p.t0, hi = p.t1;
  double t = s1 > p.s0 ? p.t0 + (p.t1 - p.t0) * target / (s1 - p.s0) : p.t0;
  Vector x(a.size());
  for (int iter = 0; iter < 60; ++iter) {
    double part = 0.0;
    for (int q = 0; q < kGaussOrder; ++q) {
      x = a + (p.t0 + (t - p.t0) * rule.nodes(q)) * e;
      part += rule.weights(q) * (*weight_)(x);
    }
    const double f = (t - p.t0) * part * len - target;
    (f < 0.0 ? lo : hi) = t;
    x = a + t * e;
    double next = t - f / ((*weight_)(x)*len);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - t) <= 1e-15 * (p.t1 - p.t0) || hi - lo <= 1e-15) {
      t = next;
      break;
    }
    t = next;
  }
  out.point = a + t * e;
  return out;
}

Vector turning_angles(const Polyline& path) {
  const Eigen::Index m = path.size();
  if (m < 3) return Vector();
  Vector angles(m - 2);
  for (Eigen::Index i = 1; i + 1 < m; ++i) {
    const Vector u = (path.vertices().col(i) - path.vertices().col(i - 1)).normalized();
    const Vector v = (path.vertices().col(i + 1) - path.vertices().col(i)).normalized();
    angles(i - 1) = 2.0 * std::atan2((u - v).norm(), (u + v).norm());
  }
  return angles;
}

}  // namespace qhgeo
