#pragma once

// Both sides of the level-1 Kuznetsov trace formula
//
//   sum_u H(t_u)/||u||^2 lambda_m(u) lambda_n(u)
//     = delta_{m,n}/pi^2 int r H(r) tanh(pi r) dr
//       - 1/pi int tau_{ir}(m) tau_{ir}(n) H(r) / |zeta(1+2ir)|^2 dr
//       + 2i/pi sum_c S(m,n;c)/c int J_{2ir}(4 pi sqrt(mn)/c) r H(r)/cosh(pi r) dr,
//
// with tau_{ir}(n) = sum_{ab=n} (a/b)^{ir}; the total mass and weighted Hecke
// averages built on the geometric side.

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "lowlying/arithmetic.hpp"
#include "lowlying/besseltransform.hpp"
#include "lowlying/maassdata.hpp"
#include "lowlying/parallel.hpp"
#include "lowlying/weights.hpp"

namespace lowlying::kuznetsov {

enum class WeightKind { spectral, gaussian, log_conductor };

struct GaussianTerm {
  double coef = 1.0;
  double center = 0.0;
  double width = 1.0;
};

/// Closed catalogue of admissible test weights H (even, holomorphic on a strip
/// of half-width > 1/2, real on the real line):
///   spectral:      h_T
///   gaussian:      prod_{j<J} (r^2 + (j+1/2)^2) * sum_i coef_i (e^{-(r-c_i)^2/w_i^2} + e^{-(r+c_i)^2/w_i^2})
///   log_conductor: log(1 + r^2) h_T
/// The optional polynomial factor vanishes at the first J half-integer points
/// of the imaginary axis, which speeds up the Kloosterman c-sum.
class AdmissibleWeight {
 public:
  static AdmissibleWeight spectral(const weights::SpectralWeight& w);
  static AdmissibleWeight log_conductor(const weights::SpectralWeight& w);
  static AdmissibleWeight gaussian(double center, double width, int zeros = 0);
  static AdmissibleWeight gaussian_mixture(std::vector<GaussianTerm> terms, int zeros = 0);

  WeightKind kind() const { return kind_; }
  Complex operator()(Complex r) const;
  double real(double r) const;
  /// e-folding length of the decay along the real axis.
  double decay_scale() const;
  /// Past this r, |r H(r)| stays below rel * max |r H| (found by scanning).
  double support_end(double rel = 1e-16) const;
  std::string description() const;
  nlohmann::json to_json() const;
  const weights::SpectralWeight* spectral_weight() const { return spectral_ ? &*spectral_ : nullptr; }

 private:
  WeightKind kind_ = WeightKind::gaussian;
  std::optional<weights::SpectralWeight> spectral_;
  std::vector<GaussianTerm> terms_;
  int zeros_ = 0;
};

/// Checks H(r) = H(-r) on a grid; throws DomainError otherwise.
void check_even(const AdmissibleWeight& H);

struct GeometricBreakdown {
  std::int64_t m = 1, n = 1;
  double delta_term = 0.0;
  double eisenstein_term = 0.0;
  Complex kloosterman_term;  // (2i/pi) sum_c ..., real up to error_budget
  Complex kloosterman_small_c;  // the part of kloosterman_term with c <= c_split
  double c_split = 0.0;
  int c_max = 0;             // largest c summed
  double r_max = 0.0;        // truncation of the r-integrals
  double kloosterman_tail = 0.0;
  double error_budget = 0.0;  // quadrature + truncation, includes the tail
  double total() const { return delta_term + eisenstein_term + kloosterman_term.real(); }
};

struct GeometricOptions {
  int c_max = 1000;
  double tol = 1e-8;  // relative to 1 + max(diagonal integral, |Eisenstein|, |Kloosterman|)
  /// Stop the c-sum early once the tail bound is below 1e-3 of that budget.
  bool stop_when_converged = false;
  /// Tabulate S(., 1; c) for c <= min(c_max, 1000), so side(m, 1) costs one lookup per such c.
  bool tabulate_unit_rows = false;
  Exec exec = Exec::parallel;
};

/// Default c_max for (m, n) and T: max(1000, 4 * 8 pi sqrt(mn) / T).
int default_c_max(std::int64_t m, std::int64_t n, int T);

/// Caches everything that depends only on H: the delta integral, an
/// Eisenstein node table, the Kloosterman moduli and the c-kernel. Immutable
/// after construction, so side() may be called concurrently.
class GeometricEngine {
 public:
  /// max_mn bounds m * n for later side() calls (it sets the Eisenstein node
  /// density and the kernel range).
  GeometricEngine(AdmissibleWeight H, std::int64_t max_mn, GeometricOptions opts = {});
  const AdmissibleWeight& weight() const { return H_; }
  const GeometricOptions& options() const { return opts_; }

  /// c_split > 0 also fills kloosterman_small_c.
  GeometricBreakdown side(std::int64_t m, std::int64_t n, double c_split = 0.0) const;
  double delta_integral() const { return delta_; }
  /// -1/pi int tau_{ir}(m) tau_{ir}(n) H(r)/|zeta(1+2ir)|^2 dr.
  double eisenstein(std::int64_t m, std::int64_t n) const;
  /// int J_{2ir}(x) r H(r)/cosh(pi r) dr (purely imaginary), with an error estimate.
  std::pair<Complex, double> kernel(double x) const;

 private:
  AdmissibleWeight H_;
  std::int64_t max_mn_;
  GeometricOptions opts_;
  double r_max_ = 0.0;
  double delta_ = 0.0, delta_err_ = 0.0;
  std::vector<double> eis_r_, eis_w_;  // nodes, weights * H / |zeta|^2
  double eis_err_ = 0.0;
  std::unique_ptr<besseltransform::DJKernel> dj_;
  std::vector<double> gl_r_, gl_w_;  // weights * r * H for the other kinds
  std::vector<Complex> gl_g_;        // 1/(Gamma(1 + 2ir) cosh(pi r)) at the nodes
  std::vector<std::vector<double>> unit_rows_;  // S(a, 1; c), index c - 1
  std::vector<arithmetic::KloostermanModulus> moduli_;  // index c - 1
  double gl_err_ = 0.0;
};

GeometricBreakdown geometric_side(std::int64_t m, std::int64_t n, const AdmissibleWeight& H, int c_max = 1000,
                                  double tol = 1e-8);

struct SpectralSum {
  double sum = 0.0;
  double tail_budget = 0.0;
  bool tail_usable = true;  // false for empty data or when no count model can be fitted
  std::size_t forms = 0;
};

/// Finite sum over the records plus a tail budget for t beyond the data, using
/// the decay of H and the quadratic count model fitted to the data itself.
SpectralSum spectral_side(std::int64_t m, std::int64_t n, const AdmissibleWeight& H,
                          const std::vector<maassdata::MaassFormRecord>& data);

struct TraceReport {
  std::int64_t m = 1, n = 1;
  nlohmann::json weight;
  SpectralSum spectral;
  GeometricBreakdown geometric;
  double discrepancy = 0.0;
  double budget = 0.0;
  double relative_discrepancy = 0.0;
  bool pass = false;
};

TraceReport check_trace_identity(std::int64_t m, std::int64_t n, const AdmissibleWeight& H,
                                 const std::vector<maassdata::MaassFormRecord>& data, int c_max = 1000,
                                 double tol = 1e-8);
/// As check_trace_identity, but throws VerificationError on failure.
TraceReport verify_trace_identity(std::int64_t m, std::int64_t n, const AdmissibleWeight& H,
                                  const std::vector<maassdata::MaassFormRecord>& data, int c_max = 1000,
                                  double tol = 1e-8);

/// {m, n, weight, spectral, geometric: {delta, eisenstein, kloosterman}, budgets}
nlohmann::json to_json(const TraceReport& report);
nlohmann::json to_json(const GeometricBreakdown& g);

/// Geometric side with m = n = 1 and H = h_T.
double total_mass(const weights::SpectralWeight& w, int c_max = 1000);
double total_mass(int T, int c_max = 1000);

/// Avg(lambda_m; h_T/||u||^2) = geometric_side(m, 1, h_T) / total_mass; 1 for m = 1.
double averaged_eigenvalue(std::int64_t m, const weights::SpectralWeight& w, int c_max = 1000);
double averaged_eigenvalue(std::int64_t m, int T, int c_max = 1000);

}  // namespace lowlying::kuznetsov
