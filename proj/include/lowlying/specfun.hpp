#pragma once

// Complex special functions: log-gamma, integer-order Bessel J, imaginary-order
// Bessel J pre-scaled by 1/cosh(pi r), zeta on Re(s) >= 1 and the Dunster
// uniform approximation for imaginary order.

#include <span>
#include <vector>

#include "lowlying/numerics.hpp"

namespace lowlying::specfun {

/// Principal-branch log Gamma(z). Throws PoleError at non-positive integers.
Complex log_gamma_complex(Complex z);

/// J_n(x) for any integer n (negative orders by reflection).
/// Throws OverflowError for |x| > 1e5.
double bessel_j_int(int n, double x);

/// J_0(x), ..., J_{n_max}(x) from one backward-recurrence sweep, x >= 0.
std::vector<double> bessel_j_int_sequence(int n_max, double x);

/// J_k(2 pi x) from the periodic integral over t in [-1/2, 1/2] of
/// e(k t - x sin 2 pi t), evaluated by the trapezoid rule with node doubling.
/// Independent of bessel_j_int. Throws ConvergenceError.
double bessel_j_int_integral_check(int k, double x);

struct ScaledBesselValue {
  Complex value;  // J_{2ir}(x) / cosh(pi r)
  double r = 0.0;
  double x = 0.0;
};

/// J_{2ir}(x)/cosh(pi r) for x > 0, |r| <= 1e4. The gamma factors are carried
/// in log form so nothing overflows. For |r| >= 5 the large-order expansion is
/// used; below that, the power series for small x (relative to the order) and
/// Miller backward recurrence in the real shift of the order otherwise.
ScaledBesselValue scaled_bessel_j_imag(double r, double x);

/// Same value, restricted to the power series route (exposed for tests).
Complex scaled_bessel_series(double r, double x);
/// Same value, restricted to the backward-recurrence route (exposed for tests).
Complex scaled_bessel_recurrence(double r, double x);

/// Same value from the large-order expansion in inverse powers of 2ir; its
/// error is of relative size e^{-2 pi |r|} plus the truncated terms.
Complex scaled_bessel_debye(double r, double x);

/// zeta(s) for Re(s) >= 1 by Euler-Maclaurin summation. PoleError at s = 1.
Complex zeta_right_of_one(Complex s);

/// xi(z) = sqrt(1+z^2) + log(z / (1 + sqrt(1+z^2))), z > 0.
double dunster_xi(double z);

struct DunsterApprox {
  Complex value;             // leading approximation to J_{2ir}(x)/cosh(pi r)
  double rel_error_estimate; // modelled relative error of the leading term
};

/// Constant c in J_{2ir}(x) ~ c e^{pi r} e^{2 i r xi(x/2r)} (4r^2+x^2)^{-1/4}.
Complex dunster_constant();

/// Least-squares fit of the constant against scaled_bessel_j_imag over
/// (r, x) points. Used to pin dunster_constant() empirically.
Complex fit_dunster_constant(std::span<const std::pair<double, double>> points);

/// 2 c e^{2 i r xi(x/2r)} / (4r^2 + x^2)^{1/4}, r > 0, x > 0.
DunsterApprox dunster_leading_term(double r, double x);

}  // namespace lowlying::specfun
