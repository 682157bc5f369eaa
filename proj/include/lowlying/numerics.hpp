#pragma once

// Shared numerical plumbing: compensated accumulation, Gauss-Legendre rules
// and an adaptive Gauss-Kronrod integrator.

#include <cmath>
#include <complex>
#include <functional>
#include <span>
#include <vector>

namespace lowlying {

using Complex = std::complex<double>;

inline constexpr double kPi = 3.14159265358979323846264338327950288;
inline constexpr double kEulerGamma = 0.57721566490153286060651209008240243;

inline bool is_finite(Complex z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); }

/// Neumaier-compensated running sum. Works for double and std::complex<double>
/// (the complex case compensates each component independently).
template <class T>
class CompensatedSum {
 public:
  CompensatedSum() = default;
  explicit CompensatedSum(T init) : sum_(init) {}

  void add(T x) {
    if constexpr (std::is_same_v<T, double>) {
      add_component(sum_, comp_, x);
    } else {
      double sr = sum_.real(), cr = comp_.real();
      double si = sum_.imag(), ci = comp_.imag();
      add_component(sr, cr, x.real());
      add_component(si, ci, x.imag());
      sum_ = T(sr, si);
      comp_ = T(cr, ci);
    }
  }
  CompensatedSum& operator+=(T x) {
    add(x);
    return *this;
  }
  T value() const { return sum_ + comp_; }

 private:
  static void add_component(double& sum, double& comp, double x) {
    const double t = sum + x;
    if (std::abs(sum) >= std::abs(x)) {
      comp += (sum - t) + x;
    } else {
      comp += (x - t) + sum;
    }
    sum = t;
  }
  T sum_{};
  T comp_{};
};

/// Ordered compensated sum of a span; the reduction order is the index order.
double ordered_sum(std::span<const double> values);
Complex ordered_sum(std::span<const Complex> values);

struct GaussLegendreRule {
  std::vector<double> nodes;    // on [-1, 1], ascending
  std::vector<double> weights;
};

/// n-point Gauss-Legendre rule computed by Newton iteration on P_n.
GaussLegendreRule gauss_legendre(int n);

/// Composite fixed rule: `panels` equal panels on [a, b], `rule` on each.
double integrate_panels(const std::function<double(double)>& f, double a, double b, int panels,
                        const GaussLegendreRule& rule);

struct QuadratureResult {
  double value = 0.0;
  double abs_error = 0.0;
  double abs_integral = 0.0;  // integral of |f|, a scale for cancellation
  int evaluations = 0;
};

struct AdaptiveOptions {
  double abs_tol = 1e-12;
  double rel_tol = 1e-12;
  int max_subdivisions = 4000;
  // Initial equal split of [a, b]; useful for long oscillatory ranges.
  int initial_panels = 1;
};

/// Globally adaptive 7/15-point Gauss-Kronrod quadrature. Throws
/// ConvergenceError when the subdivision cap is exhausted before the error
/// estimate meets max(abs_tol, rel_tol * |I|).
QuadratureResult integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                                    const AdaptiveOptions& opts = {});

}  // namespace lowlying
