#pragma once

// The explicit-formula average of the one-level density over level-1 Maass
// forms weighted by h_T(t_u)/||u||^2, with every average taken from the
// geometric side of the trace formula, compared with the orthogonal
// prediction phi-hat(0) + phi(0)/2.

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "lowlying/kuznetsov.hpp"
#include "lowlying/rmt.hpp"

namespace lowlying::density {

/// Support guarantees: 5/4 from the basic argument, 2 - 3/(2(M+1)) from the
/// refined one (which needs the order-M zero of h).
inline constexpr double kBasicEtaThreshold = 1.25;
double weight_eta_threshold(int M);

struct DensityReport {
  int T = 0;
  double eta = 0.0;
  double const_term = 0.0;  // phi(0)/2
  double conductor_term = 0.0;
  double prime_term = 0.0;
  double prime_sq_term = 0.0;
  double total = 0.0;
  double rmt_o_prediction = 0.0;
  double deviation = 0.0;
  // Extras.
  double total_mass = 0.0;
  double avg_log_conductor = 0.0;  // Avg(log(1 + t_u^2))
  std::size_t primes = 0;          // primes with phi-hat(log p / (2 log T)) != 0
  std::size_t prime_squares = 0;
  double error_budget = 0.0;  // propagated geometric-side budgets
  double deviation_so_even = 0.0;
  double deviation_so_odd = 0.0;
  bool beyond_basic_threshold = false;   // eta >= 5/4
  bool beyond_weight_threshold = false;  // eta >= 2 - 3/(2(M+1))
};

/// The three parts of the weighted Kloosterman double sum over primes,
///   sum_p log p/(p^{1/2} log T) phi-hat(log p/(2 log T)) (2i/pi) sum_c S(1,p;c)/c int ...,
/// split at p = T^2/(4 pi^2) and c = 4 pi sqrt(p)/T.
struct SplitDiagnostics {
  int T = 0;
  double eta = 0.0;
  double large_p_small_c = 0.0;
  double large_p_large_c = 0.0;
  double small_p = 0.0;
  double total_mass = 0.0;
};

struct DensityOptions {
  int c_max = 1000;
  double tol = 1e-8;
  Exec exec = Exec::parallel;
  std::size_t prime_chunk = 10000;  // primes per parallel task
};

/// Everything in the explicit formula that depends on T and the prime range
/// but not on phi: total mass, Avg(log(1+t^2)), and per prime the geometric
/// sides G(p, 1) (with the Kloosterman split) and G(p^2, 1).
struct PrimeTables {
  int T = 0;
  int M = 8;
  double P = 0.0;  // primes p <= P were tabulated
  double total_mass = 0.0;
  double total_mass_budget = 0.0;
  double log_mass = 0.0;  // geometric side for log(1 + r^2) h_T
  double log_mass_budget = 0.0;
  std::vector<std::uint32_t> primes;
  std::vector<double> g_p, g_p_budget, kl_small_c, kl_large_c;
  std::vector<double> g_p2, g_p2_budget;  // for p^2 <= P
};

/// Tabulates the primes p <= P. CostGuardError if P exceeds the prime cap.
/// Primes are processed in chunks of opts.prime_chunk per task.
PrimeTables build_prime_tables(const weights::SpectralWeight& w, double P, const DensityOptions& opts = {});

/// Assembles the report for phi from tables covering p <= T^{2 eta}.
DensityReport assemble(const PrimeTables& tables, const rmt::TestFunction& phi,
                       SplitDiagnostics* split = nullptr);

DensityReport explicit_formula_average(const weights::SpectralWeight& w, const rmt::TestFunction& phi,
                                       const DensityOptions& opts = {}, SplitDiagnostics* split = nullptr);
DensityReport explicit_formula_average(int T, const rmt::TestFunction& phi, int c_max = 1000);

struct ConvergenceScan {
  std::vector<int> T_list;
  std::vector<double> eta_list;
  std::vector<DensityReport> reports;  // T-major
  std::vector<SplitDiagnostics> splits;
  /// Deviations along T for one eta.
  std::vector<double> deviations(double eta) const;
};

/// One set of prime tables per T (covering the largest eta) reused for every eta.
ConvergenceScan convergence_scan(const std::vector<int>& T_list, const std::vector<double>& eta_list, int M = 8,
                                 double bump_halfwidth = 0.125, const DensityOptions& opts = {});

/// Last value below the first, and at most one step up, by at most 10%.
bool deviations_converge(const std::vector<double>& deviations);

void write_density_csv(std::ostream& os, const std::vector<DensityReport>& reports);
void write_split_csv(std::ostream& os, const std::vector<SplitDiagnostics>& splits);

}  // namespace lowlying::density
