#pragma once

// The admissible weight family: h(x) = x^M s(x)^2 with s the Fourier transform
// of a compactly supported even bump, the spectral weight
// h_T(r) = (r/T) h(ir/T) / sinh(pi r/T), and the odd companion g = sgn(x) h(x).

#include <memory>
#include <vector>

#include "lowlying/bump.hpp"
#include "lowlying/numerics.hpp"

namespace lowlying::weights {

struct WeightFamily {
  int M = 8;
  double bump_halfwidth = 0.125;
  int quadrature_nodes = 0;
  std::shared_ptr<const BumpTransform> bump;  // built eagerly, immutable
};

/// M even and >= 8, 0 < bump_halfwidth <= 1/8. The bump is normalized so that
/// s(0) = 1.
WeightFamily make_weight_family(int M = 8, double bump_halfwidth = 0.125);

/// s(z) = int b(xi) e(z xi) dxi. Throws OverflowError for |Im z| > 1e3 or when
/// the value is not representable.
Complex band_limited_eval(const WeightFamily& family, Complex z);

/// log s(iy) for real y (s is positive on the imaginary axis).
double log_band_limited_imag(const WeightFamily& family, double y);

/// s, s', s'' on the real axis.
BandLimitedJet band_limited_jet(const WeightFamily& family, double x);

/// h(z) = z^M s(z)^2. On the imaginary axis the sign is (-1)^{M/2}.
Complex h_eval(const WeightFamily& family, Complex z);
double h_real(const WeightFamily& family, double x);

struct SpectralWeight {
  WeightFamily family;
  int T = 11;
};

/// T odd and > 1.
SpectralWeight make_spectral_weight(const WeightFamily& family, int T);

/// h_T(r) anywhere off the poles r in iT(Z \ {0}); h_T(0) = 0.
Complex h_T_eval(const SpectralWeight& w, Complex r);

/// h_T on the real axis, evaluated in log form.
double h_T_real(const SpectralWeight& w, double r);

/// h_T((k + 1/2) i) = x h(x) / sin(pi x) with x = (k + 1/2)/T.
double h_T_halfint_imag(const SpectralWeight& w, int k);

/// d^j/dx^j [x^t g(x)] with g = sgn(x) h(x), t and j in {0, 1, 2}.
double g_tilde_eval(const WeightFamily& family, double x, int tilde_count, int derivative_order);

struct FourierValue {
  double value = 0.0;         // int h(x) e(-x xi) dx (real since h is even)
  double abs_integral = 0.0;  // int |h|
  double error_estimate = 0.0;
};

/// Numerical Fourier transform of h by adaptive quadrature over the real line.
FourierValue h_fourier_transform(const WeightFamily& family, double xi);

/// Fourier transform of g for |xi| > 2w, from the closed form
/// (1/(i pi)) (i/2pi)^M M! int (b*b)(eta) (xi - eta)^{-M-1} d eta.
/// Returns the imaginary part (the real part vanishes since g is odd and real).
double g_fourier_transform_imag(const WeightFamily& family, double xi);

}  // namespace lowlying::weights
