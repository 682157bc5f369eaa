#include "lowlying/bump.hpp"

#include <algorithm>
#include <cmath>

#include "lowlying/errors.hpp"

namespace lowlying {

namespace {

constexpr int kPanelNodes = 20;
constexpr double kGrowthGuard = 1e3;

const GaussLegendreRule& panel_rule() {
  static const GaussLegendreRule rule = gauss_legendre(kPanelNodes);
  return rule;
}

const GaussLegendreRule& contour_rule() {
  static const GaussLegendreRule rule = gauss_legendre(24);
  return rule;
}

double log_bump(double xi, double w) { return -1.0 / (w * w - xi * xi); }

struct Rule {
  std::vector<double> xi, log_w;  // nodes, log of quadrature weight times raw bump
};

Rule build_rule(double w, int panels) {
  const auto& gl = panel_rule();
  Rule rule;
  const double h = 2.0 * w / panels;
  for (int p = 0; p < panels; ++p) {
    const double mid = -w + (p + 0.5) * h;
    for (int i = 0; i < kPanelNodes; ++i) {
      const double xi = mid + 0.5 * h * gl.nodes[i];
      rule.xi.push_back(xi);
      rule.log_w.push_back(std::log(0.5 * h * gl.weights[i]) + log_bump(xi, w));
    }
  }
  return rule;
}

Complex eval_raw(const std::vector<double>& xi, const std::vector<double>& log_wb, Complex z) {
  const double x = z.real(), y = z.imag();
  double scale = -1e300;
  for (std::size_t i = 0; i < xi.size(); ++i) scale = std::max(scale, log_wb[i] - 2.0 * kPi * y * xi[i]);
  CompensatedSum<Complex> acc;
  for (std::size_t i = 0; i < xi.size(); ++i) {
    const double mag = std::exp(log_wb[i] - 2.0 * kPi * y * xi[i] - scale);
    const double phase = 2.0 * kPi * x * xi[i];
    acc.add(Complex(mag * std::cos(phase), mag * std::sin(phase)));
  }
  if (scale > 700.0) throw OverflowError("BumpTransform: value not representable");
  return std::exp(scale) * acc.value();
}

}  // namespace

BumpTransform::BumpTransform(double halfwidth, Normalization norm) : w_(halfwidth) {
  if (!(halfwidth > 0.0)) throw DomainError("BumpTransform: halfwidth must be > 0");
  const double w = w_;
  // Probes on the real axis up to where the contour takes over, and on the
  // imaginary axis.
  const double xs = contour_switch();
  const std::vector<Complex> probes = {0.0, 0.37 * xs, 0.81 * xs, xs, {0.0, 5.0 / w}, {0.0, 40.0 / w}};
  const double peak_shift = -1.0 / (w * w);
  auto normalized = [&](const Rule& r) {
    std::vector<double> lw = r.log_w;
    double shift = 0.0;
    if (norm == Normalization::unit_mass) {
      CompensatedSum<double> z;
      for (double v : lw) z.add(std::exp(v - peak_shift));
      shift = peak_shift + std::log(z.value());
    } else {
      shift = peak_shift;
    }
    for (double& v : lw) v -= shift;
    return std::make_pair(lw, shift);
  };
  int panels = 2;
  Rule prev = build_rule(w, panels);
  auto prev_norm = normalized(prev);
  for (;;) {
    if (panels > 16384) throw ConvergenceError("BumpTransform: quadrature did not stabilize");
    Rule next = build_rule(w, 2 * panels);
    auto next_norm = normalized(next);
    double worst = 0.0;
    const double ref = std::abs(eval_raw(next.xi, next_norm.first, 0.0));
    for (Complex z : probes) {
      const Complex a = eval_raw(prev.xi, prev_norm.first, z);
      const Complex b = eval_raw(next.xi, next_norm.first, z);
      const double denom = (z.imag() != 0.0) ? std::abs(b) : ref;
      worst = std::max(worst, std::abs(a - b) / denom);
    }
    panels *= 2;
    prev = std::move(next);
    prev_norm = std::move(next_norm);
    if (worst < 1e-13) break;
  }
  panels_ = panels;
  xi_ = std::move(prev.xi);
  log_wb_ = std::move(prev_norm.first);
  log_norm_ = prev_norm.second;
  wb_.reserve(log_wb_.size());
  for (double v : log_wb_) wb_.push_back(std::exp(v));
}

double BumpTransform::bump(double xi) const {
  if (!(std::abs(xi) < w_)) return 0.0;
  return std::exp(log_bump(xi, w_) - log_norm_);
}

// At the centre of the deformed contour the bump grows by e^{0.2/w^2} while the
// oscillatory factor decays by e^{-pi x w}; switch once the latter wins.
double BumpTransform::contour_switch() const { return 0.2 / (kPi * w_ * w_ * w_) + 8.0; }

Complex BumpTransform::eval(Complex z) const {
  if (!(std::abs(z.imag()) <= kGrowthGuard)) throw OverflowError("BumpTransform: |Im z| above growth guard");
  if (z.imag() == 0.0) return eval_real(z.real());
  if (std::abs(z.real()) <= contour_switch()) {
    Complex v = eval_raw(xi_, log_wb_, z);
    if (z.real() == 0.0) v = Complex(v.real(), 0.0);
    return v;
  }
  // Off-axis far out: refine the real-axis rule in proportion to |Re z|.
  const int factor = static_cast<int>(std::ceil(std::abs(z.real()) / contour_switch()));
  Rule r = build_rule(w_, panels_ * factor);
  for (double& v : r.log_w) v -= log_norm_;
  return eval_raw(r.xi, r.log_w, z);
}

double BumpTransform::log_eval_imag(double y) const {
  if (!(std::abs(y) <= kGrowthGuard)) throw OverflowError("BumpTransform: |y| above growth guard");
  double scale = -1e300;
  for (std::size_t i = 0; i < xi_.size(); ++i) scale = std::max(scale, log_wb_[i] - 2.0 * kPi * y * xi_[i]);
  CompensatedSum<double> acc;
  for (std::size_t i = 0; i < xi_.size(); ++i) acc.add(std::exp(log_wb_[i] - 2.0 * kPi * y * xi_[i] - scale));
  return scale + std::log(acc.value());
}

double BumpTransform::eval_real(double x) const {
  if (std::abs(x) > contour_switch()) return contour_jet(std::abs(x)).s;
  CompensatedSum<double> acc;
  for (std::size_t i = 0; i < xi_.size(); ++i) acc.add(wb_[i] * std::cos(2.0 * kPi * xi_[i] * x));
  return acc.value();
}

BandLimitedJet BumpTransform::jet(double x) const {
  if (std::abs(x) > contour_switch()) {
    auto j = contour_jet(std::abs(x));
    if (x < 0.0) j.ds = -j.ds;
    return j;
  }
  CompensatedSum<double> s, ds, d2s;
  for (std::size_t i = 0; i < xi_.size(); ++i) {
    const double k = 2.0 * kPi * xi_[i];
    const double c = std::cos(k * x), sn = std::sin(k * x);
    s.add(wb_[i] * c);
    ds.add(-wb_[i] * k * sn);
    d2s.add(-wb_[i] * k * k * c);
  }
  return {s.value(), ds.value(), d2s.value()};
}

// Along xi(t) = t + i (w^2 - t^2)/(2w), t in (0, w). The integrand at -t is
// the conjugate of the one at t, so the value is twice the real part of the
// half-path integral. Panels are graded geometrically towards t = w, where
// the saddle points sit for large x.
BandLimitedJet BumpTransform::contour_jet(double x) const {
  const auto& gl = contour_rule();
  const double w = w_;
  const int panels = 24 + static_cast<int>(4.0 * std::log1p(x));
  const double beta = 0.5 / w;
  CompensatedSum<Complex> s, ds, d2s;
  double lo = 0.0;
  for (int p = 0; p < panels; ++p) {
    const double frac_hi = (p + 1 == panels) ? 1.0 : 1.0 - std::pow(0.5, 0.5 * (p + 1));
    const double hi = w * frac_hi;
    const double half = 0.5 * (hi - lo), mid = 0.5 * (hi + lo);
    for (std::size_t i = 0; i < gl.nodes.size(); ++i) {
      const double t = mid + half * gl.nodes[i];
      const Complex xi(t, beta * (w * w - t * t));
      const Complex dxi(1.0, -2.0 * beta * t);
      const Complex k = Complex(0.0, 2.0 * kPi) * xi;
      const Complex expo = -1.0 / (w * w - xi * xi) - log_norm_ + k * x;
      if (expo.real() < -745.0) continue;
      const Complex f = std::exp(expo) * dxi * (half * gl.weights[i]);
      s.add(f);
      ds.add(f * k);
      d2s.add(f * k * k);
    }
    lo = hi;
  }
  return {2.0 * s.value().real(), 2.0 * ds.value().real(), 2.0 * d2s.value().real()};
}

double BumpTransform::self_convolution(double eta) const {
  if (!(std::abs(eta) < 2.0 * w_)) return 0.0;
  CompensatedSum<double> acc;
  for (std::size_t i = 0; i < xi_.size(); ++i) acc.add(wb_[i] * bump(eta - xi_[i]));
  return acc.value();
}

}  // namespace lowlying
