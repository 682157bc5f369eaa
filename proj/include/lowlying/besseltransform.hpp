#pragma once

// D_J(X) = int J_{2ir}(X) r h_T(r) / cosh(pi r) dr by quadrature, by residues
// and by the leading uniform asymptotic; the sums S_J, A_g, B_g; and scans of
// |value| / claimed bound over (X, T) grids.

#include <iosfwd>
#include <string>
#include <vector>

#include "lowlying/numerics.hpp"
#include "lowlying/parallel.hpp"
#include "lowlying/weights.hpp"

namespace lowlying::besseltransform {

enum class DJMethod { quadrature, residue, asymptotic };

struct DJResult {
  Complex value;
  DJMethod method = DJMethod::quadrature;
  double X = 0.0;
  int T = 0;
  double error_estimate = 0.0;
};

/// The default family M = 8, w = 1/8 at odd T >= 3.
weights::SpectralWeight default_weight(int T);

/// 2i int_0^R r h_T(r) Im[J_{2ir}(X)/cosh(pi r)] dr with
/// R = (4T/pi) ln(1/tol) + 50; the tail past R is bounded by the decay
/// envelope and added to error_estimate.
DJResult dj_quadrature(const weights::SpectralWeight& w, double X, double tol = 1e-10);
DJResult dj_quadrature(double X, int T, double tol = 1e-10);

/// Split of the residue sum into its two families (already multiplied by the
/// calibrated constants).
struct ResidueFamilies {
  Complex half_integer;
  Complex integer_multiple;
  double truncation_bound = 0.0;
};

/// Residues at r = -(k + 1/2)i and r = -ikT:
///   c1 sum_k (-1)^k (2k+1) J_{2k+1}(X) h_T((k+1/2)i) + c2 T sum_{k>=1} s_k k^2 h(k) J_{2kT}(X)
/// with (c1, c2, s_k) chosen once by calibration against dj_quadrature.
DJResult dj_residue_sum(const weights::SpectralWeight& w, double X, double tol = 1e-12);
DJResult dj_residue_sum(double X, int T, double tol = 1e-12);

struct ResidueConstants {
  Complex c1;
  Complex c2;
  bool alternating = false;  // s_k = (-1)^k when true, 1 otherwise
  double worst_mismatch = 0.0;
};

/// Runs (once) and returns the calibration. Throws CalibrationError if no
/// candidate matches quadrature at every calibration point.
const ResidueConstants& residue_constants();

ResidueFamilies dj_residue_families(const weights::SpectralWeight& w, double X, double tol = 1e-12);

/// The residue route with the weight factors tabulated once, for many X up to
/// X_max (Kloosterman c-sums evaluate D_J at 4 pi sqrt(mn)/c for every c).
class DJKernel {
 public:
  DJKernel(const weights::SpectralWeight& w, double X_max, double tol = 1e-12);
  const weights::SpectralWeight& weight() const { return w_; }
  double X_max() const { return X_max_; }
  /// D_J(X) for 0 <= X <= X_max.
  DJResult operator()(double X) const;
  ResidueFamilies families(double X) const;

  struct Raw {
    double half = 0.0;           // sum (-1)^k (2k+1) J_{2k+1} h_T((k+1/2)i)
    double integer_plain = 0.0;  // T^2 sum_{k>=1} k^2 h(k) J_{2kT}
    double integer_alt = 0.0;    // same with (-1)^k
    double truncation = 0.0;
  };
  Raw raw(double X) const;

 private:
  weights::SpectralWeight w_;
  double X_max_;
  double tol_;
  std::vector<double> half_;    // (2k+1) h_T((k+1/2)i)
  std::vector<double> second_;  // T^2 k^2 h(k), index k
};

/// Leading Dunster term integrated against r h_T(r) (the N_J part); the
/// error estimate integrates |leading term| times its modelled relative error
/// (a bound for E_J). RegimeError for X < T/8.
DJResult dj_asymptotic(const weights::SpectralWeight& w, double X);
DJResult dj_asymptotic(double X, int T);

/// S_J(X) = T sum_k (-1)^k J_{2k+1}(X) x^2 h(x) / sin(pi x), x = (2k+1)/2T.
double sj_direct(const weights::SpectralWeight& w, double X);
double sj_direct(double X, int T);

/// The same sum through the Dirichlet-kernel expansion over |alpha| < T/2.
/// CostGuardError for T > 101.
double sj_alpha_expansion(const weights::SpectralWeight& w, double X);
double sj_alpha_expansion(double X, int T);

struct StationarySums {
  double A = 0.0;  // |A_g(Y)|
  double B = 0.0;  // |B_g(Y)|
  Complex a_sum;
  Complex b_sum;
};

/// A_g(Y), B_g(Y) as exact finite sums. RegimeError for Y > T/(2 pi).
StationarySums stationary_phase_sums(const weights::SpectralWeight& w, double Y);
StationarySums stationary_phase_sums(double Y, int T);

enum class ScanKind { small_X, large_X, souped_up, stationary_A, stationary_B };

ScanKind parse_scan_kind(const std::string& name);
std::string scan_kind_name(ScanKind k);

struct GridPoint {
  double X = 0.0;  // Y for the stationary scans
  int T = 0;
};

struct ScanOptions {
  int M = 8;
  int souped_M = 10;
  double bump_halfwidth = 0.125;
  double tol = 1e-10;
  Exec exec = Exec::parallel;
};

struct ScanReport {
  ScanKind which = ScanKind::small_X;
  std::string x_label = "X";
  std::string t_label = "T";
  std::vector<GridPoint> points;  // evaluated points
  std::vector<double> values;
  std::vector<double> bounds;
  std::vector<double> ratios;
  std::vector<GridPoint> flagged;  // outside the bound's regime, not evaluated
  double sup_ratio = 0.0;
};

/// Claimed bound at a point, and whether the point lies in the regime.
double scan_bound(ScanKind which, double X, int T, int M);
bool scan_in_regime(ScanKind which, double X, int T);

/// Evaluates every in-regime point (in parallel for Exec::parallel); the
/// report is identical for both execution modes.
ScanReport bound_scan(ScanKind which, const std::vector<GridPoint>& grid, const ScanOptions& opts = {});

/// Header "which,X,T,value,bound,ratio", one row per evaluated point, then one
/// comment line per flagged point.
void write_scan_csv(const ScanReport& report, std::ostream& out);

}  // namespace lowlying::besseltransform
