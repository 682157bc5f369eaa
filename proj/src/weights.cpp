#include "lowlying/weights.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "lowlying/errors.hpp"

namespace lowlying::weights {

namespace {

double int_pow(double x, int n) {
  if (n < 0) return 0.0;
  double r = 1.0;
  for (int i = 0; i < n; ++i) r *= x;
  return r;
}

double log_sinh(double y) {
  // y > 0
  if (y > 1.0) return y + std::log1p(-std::exp(-2.0 * y)) - std::log(2.0);
  return std::log(std::sinh(y));
}

}  // namespace

WeightFamily make_weight_family(int M, double bump_halfwidth) {
  if (M < 8 || M % 2 != 0) throw DomainError("make_weight_family: M must be even and >= 8");
  if (!(bump_halfwidth > 0.0) || bump_halfwidth > 0.125) {
    throw DomainError("make_weight_family: bump_halfwidth must lie in (0, 1/8]");
  }
  WeightFamily f;
  f.M = M;
  f.bump_halfwidth = bump_halfwidth;
  f.bump = std::make_shared<const BumpTransform>(bump_halfwidth, BumpTransform::Normalization::unit_mass);
  f.quadrature_nodes = f.bump->quadrature_nodes();
  return f;
}

Complex band_limited_eval(const WeightFamily& family, Complex z) { return family.bump->eval(z); }

double log_band_limited_imag(const WeightFamily& family, double y) { return family.bump->log_eval_imag(y); }

BandLimitedJet band_limited_jet(const WeightFamily& family, double x) { return family.bump->jet(x); }

Complex h_eval(const WeightFamily& family, Complex z) {
  const Complex s = band_limited_eval(family, z);
  Complex p = 1.0;
  for (int i = 0; i < family.M; ++i) p *= z;
  Complex v = p * s * s;
  if (z.imag() == 0.0 || z.real() == 0.0) v = Complex(v.real(), 0.0);
  return v;
}

double h_real(const WeightFamily& family, double x) {
  const double s = family.bump->eval_real(x);
  return int_pow(x, family.M) * s * s;
}

SpectralWeight make_spectral_weight(const WeightFamily& family, int T) {
  if (T <= 1 || T % 2 == 0) throw DomainError("make_spectral_weight: T must be odd and > 1");
  return {family, T};
}

Complex h_T_eval(const SpectralWeight& w, Complex r) {
  if (r == Complex(0.0, 0.0)) return 0.0;
  const double T = w.T;
  if (r.real() == 0.0) {
    const double q = r.imag() / T;
    if (std::abs(q - std::round(q)) < 1e-12 * std::max(1.0, std::abs(q))) {
      throw PoleError("h_T_eval: pole at r = " + std::to_string(r.imag()) + "i");
    }
  }
  if (r.imag() == 0.0) return h_T_real(w, r.real());
  const Complex u = r / T;
  const Complex sh = std::sinh(kPi * u);
  return u * h_eval(w.family, Complex(0.0, 1.0) * u) / sh;
}

double h_T_real(const SpectralWeight& w, double r) {
  if (r == 0.0) return 0.0;
  const double y = std::abs(r) / w.T;
  const double log_mag = (w.family.M + 1) * std::log(y) + 2.0 * log_band_limited_imag(w.family, y) - log_sinh(kPi * y);
  const double sign = (w.family.M % 4 == 0) ? 1.0 : -1.0;
  return sign * std::exp(log_mag);
}

double h_T_halfint_imag(const SpectralWeight& w, int k) {
  if (k < 0) throw DomainError("h_T_halfint_imag: k must be >= 0");
  const double x = (k + 0.5) / w.T;
  return x * h_real(w.family, x) / std::sin(kPi * x);
}

double g_tilde_eval(const WeightFamily& family, double x, int tilde_count, int derivative_order) {
  if (tilde_count < 0 || tilde_count > 2) throw DomainError("g_tilde_eval: tilde_count must be 0, 1 or 2");
  if (derivative_order < 0 || derivative_order > 2) throw DomainError("g_tilde_eval: derivative_order must be 0, 1 or 2");
  if (x == 0.0) return 0.0;
  const int n = tilde_count + family.M;
  const auto jet = band_limited_jet(family, x);
  const double S = jet.s * jet.s;
  const double dS = 2.0 * jet.s * jet.ds;
  const double d2S = 2.0 * (jet.ds * jet.ds + jet.s * jet.d2s);
  const double P = int_pow(x, n);
  const double dP = n * int_pow(x, n - 1);
  const double d2P = n * (n - 1) * int_pow(x, n - 2);
  double v = 0.0;
  switch (derivative_order) {
    case 0: v = P * S; break;
    case 1: v = dP * S + P * dS; break;
    default: v = d2P * S + 2.0 * dP * dS + P * d2S; break;
  }
  return (x > 0.0) ? v : -v;
}

namespace {

// Upper end of the effective support of h on [0, inf).
// Past the peak, stop once h is negligible or s reaches the rounding floor of
// its quadrature (beyond that the computed s is noise of size ~1e-16).
double h_cutoff(const WeightFamily& family) {
  double peak = 0.0, x = 0.0, argmax = 0.0;
  const double step = 0.5;
  for (;;) {
    x += step;
    const double s = family.bump->eval_real(x);
    const double v = std::abs(h_real(family, x));
    if (v > peak) {
      peak = v;
      argmax = x;
    }
    if (x > 2.0 * argmax && (v < 1e-30 * peak || std::abs(s) < 1e-14)) return x;
    if (x > 1e5) throw ConvergenceError("h_cutoff: h does not decay");
  }
}

}  // namespace

FourierValue h_fourier_transform(const WeightFamily& family, double xi) {
  const double X = h_cutoff(family);
  AdaptiveOptions abs_opts;
  abs_opts.initial_panels = 32;
  abs_opts.rel_tol = 1e-12;
  abs_opts.abs_tol = 0.0;
  const auto abs_int = integrate_adaptive([&](double x) { return std::abs(h_real(family, x)); }, 0.0, X, abs_opts);
  const double total_abs = 2.0 * abs_int.value;
  AdaptiveOptions opts;
  opts.initial_panels = 32 + static_cast<int>(4.0 * X * std::abs(xi));
  opts.rel_tol = 0.0;
  opts.abs_tol = 1e-14 * abs_int.value;
  const auto v = integrate_adaptive(
      [&](double x) { return h_real(family, x) * std::cos(2.0 * kPi * x * xi); }, 0.0, X, opts);
  return {2.0 * v.value, total_abs, 2.0 * v.abs_error};
}

double g_fourier_transform_imag(const WeightFamily& family, double xi) {
  const double w = family.bump_halfwidth;
  if (!(std::abs(xi) > 2.0 * w)) throw DomainError("g_fourier_transform_imag: closed form needs |xi| > 2w");
  const int M = family.M;
  const auto& bump = *family.bump;
  const double hstep = 4.0 * w / 64;
  const auto gl = gauss_legendre(20);
  CompensatedSum<double> integral;
  for (int p = 0; p < 64; ++p) {
    const double mid = -2.0 * w + (p + 0.5) * hstep;
    for (std::size_t i = 0; i < gl.nodes.size(); ++i) {
      const double eta = mid + 0.5 * hstep * gl.nodes[i];
      integral.add(0.5 * hstep * gl.weights[i] * bump.self_convolution(eta) * int_pow(1.0 / (xi - eta), M + 1));
    }
  }
  double factor = 1.0 / kPi;
  for (int k = 1; k <= M; ++k) factor *= k / (2.0 * kPi);
  const double sign = (M % 4 == 0) ? -1.0 : 1.0;
  return sign * factor * integral.value();
}

}  // namespace lowlying::weights
