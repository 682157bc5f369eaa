#pragma once

// The smooth even bump b(xi) = exp(-1/(w^2 - xi^2)) on (-w, w) and its Fourier
// transform s(z) = int b(xi) e(z xi) d xi. Shared by the weight family and the
// test functions.

#include <memory>
#include <vector>

#include "lowlying/numerics.hpp"

namespace lowlying {

struct BandLimitedJet {
  double s = 0.0, ds = 0.0, d2s = 0.0;
};

class BumpTransform {
 public:
  enum class Normalization { unit_mass, unit_peak };

  /// Builds the fixed Gauss-Legendre panel rule by doubling the panel count
  /// until two successive rules agree to 1e-13 on a set of probe points.
  BumpTransform(double halfwidth, Normalization norm);

  double halfwidth() const { return w_; }
  int quadrature_nodes() const { return static_cast<int>(xi_.size()); }

  /// Normalized bump value (0 outside the support).
  double bump(double xi) const;

  /// s(z). Throws OverflowError for |Im z| > 1e3 or an unrepresentable value.
  Complex eval(Complex z) const;
  /// log s(iy), real y.
  double log_eval_imag(double y) const;
  /// s, s', s'' on the real axis. Far out this integrates along a deformed
  /// contour through the saddle points so small values keep relative accuracy.
  BandLimitedJet jet(double x) const;
  double eval_real(double x) const;

  /// (b*b)(eta).
  double self_convolution(double eta) const;

 private:
  double contour_switch() const;
  BandLimitedJet contour_jet(double x) const;
  Complex eval_rule(const std::vector<double>& xi, const std::vector<double>& log_wb, Complex z) const;

  double w_;
  double log_norm_ = 0.0;  // log of the normalizing divisor of exp(-1/(w^2 - xi^2))
  int panels_ = 0;
  std::vector<double> xi_, log_wb_, wb_;
};

}  // namespace lowlying
