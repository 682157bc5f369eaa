#include "lowlying/density.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <iomanip>
#include <ostream>

#include "lowlying/arithmetic.hpp"
#include "lowlying/errors.hpp"

namespace lowlying::density {

namespace {


}  // namespace

double weight_eta_threshold(int M) { return 2.0 - 3.0 / (2.0 * (M + 1)); }

namespace {

PrimeTables build_once(const weights::SpectralWeight& w, double P, const DensityOptions& opts, int c_max) {
  const std::size_t per_chunk = std::max<std::size_t>(1, opts.prime_chunk);
  PrimeTables t;
  t.T = w.T;
  t.M = w.family.M;
  t.P = P;
  const auto max_p = static_cast<std::int64_t>(std::floor(P));
  t.primes = arithmetic::primes_up_to(max_p, opts.exec);

  kuznetsov::GeometricOptions go;
  go.c_max = c_max;
  go.tol = opts.tol;
  go.exec = opts.exec;
  go.tabulate_unit_rows = true;
  const kuznetsov::GeometricEngine eng(kuznetsov::AdmissibleWeight::spectral(w), std::max<std::int64_t>(max_p, 1), go);
  const auto g11 = eng.side(1, 1);
  t.total_mass = g11.total();
  t.total_mass_budget = g11.error_budget;

  kuznetsov::GeometricOptions lo = go;
  lo.tabulate_unit_rows = false;
  lo.stop_when_converged = true;
  const auto glog = kuznetsov::GeometricEngine(kuznetsov::AdmissibleWeight::log_conductor(w), 1, lo).side(1, 1);
  t.log_mass = glog.total();
  t.log_mass_budget = glog.error_budget;

  const std::size_t n = t.primes.size();
  t.g_p.resize(n);
  t.g_p_budget.resize(n);
  t.kl_small_c.resize(n);
  t.kl_large_c.resize(n);
  std::size_t n2 = 0;
  while (n2 < n && static_cast<double>(t.primes[n2]) * t.primes[n2] <= P) ++n2;
  t.g_p2.resize(n2);
  t.g_p2_budget.resize(n2);

  const double T = w.T;
  auto run_chunk = [&](std::size_t chunk) {
    const std::size_t lo_i = chunk * per_chunk, hi_i = std::min(n, lo_i + per_chunk);
    for (std::size_t i = lo_i; i < hi_i; ++i) {
      const std::int64_t p = t.primes[i];
      const double c_split = 4.0 * kPi * std::sqrt(static_cast<double>(p)) / T;
      const auto g = eng.side(p, 1, c_split);
      t.g_p[i] = g.total();
      t.g_p_budget[i] = g.error_budget;
      t.kl_small_c[i] = g.kloosterman_small_c.real();
      t.kl_large_c[i] = g.kloosterman_term.real() - g.kloosterman_small_c.real();
      if (i < n2) {
        const auto g2 = eng.side(p * p, 1);
        t.g_p2[i] = g2.total();
        t.g_p2_budget[i] = g2.error_budget;
      }
    }
  };
  const std::size_t chunks = (n + per_chunk - 1) / per_chunk;
  if (chunks <= 1 || opts.exec == Exec::serial) {
    // A single chunk leaves the parallelism to the c-sum inside side().
    for (std::size_t c = 0; c < chunks; ++c) run_chunk(c);
  } else {
    // Exceptions cannot leave the parallel region; rethrow the first by chunk.
    std::vector<std::exception_ptr> failures(chunks);
#pragma omp parallel for schedule(dynamic, 1)
    for (std::size_t c = 0; c < chunks; ++c) {
      try {
        run_chunk(c);
      } catch (...) {
        failures[c] = std::current_exception();
      }
    }
    for (const auto& f : failures) {
      if (f) std::rethrow_exception(f);
    }
  }
  return t;
}

}  // namespace

PrimeTables build_prime_tables(const weights::SpectralWeight& w, double P, const DensityOptions& opts) {
  if (w.T < 5 || w.T % 2 == 0) throw DomainError("density: T must be odd and >= 5");
  if (!(P >= 1.0)) throw DomainError("density: prime range must be >= 1");
  if (P > static_cast<double>(arithmetic::kPrimeCap)) {
    throw CostGuardError("density: T^{2 eta} exceeds the prime cap");
  }
  const auto max_p = std::max<std::int64_t>(1, static_cast<std::int64_t>(std::floor(P)));
  int c_max = std::max(opts.c_max, kuznetsov::default_c_max(max_p, 1, w.T));
  // Small T leaves a slowly converging c-sum: double c_max until the tail fits.
  for (;;) {
    try {
      return build_once(w, P, opts, c_max);
    } catch (const BudgetError&) {
      if (c_max >= 2 * std::max(opts.c_max, 1000)) throw;
      c_max *= 2;
    }
  }
}

DensityReport assemble(const PrimeTables& t, const rmt::TestFunction& phi, SplitDiagnostics* split) {
  const double T = t.T;
  const double logT = std::log(T);
  if (std::pow(T, 2.0 * phi.eta) > t.P * (1.0 + 1e-12) + 1.0) {
    throw DomainError("density: prime tables do not cover p <= T^{2 eta}");
  }
  auto phi_hat = [&](double xi) { return rmt::test_function_eval(phi, rmt::Space::xi_space, xi); };
  DensityReport r;
  r.T = t.T;
  r.eta = phi.eta;
  const double phi0 = rmt::test_function_eval(phi, rmt::Space::x_space, 0.0);
  const double phi_hat0 = phi_hat(0.0);
  r.const_term = phi0 / 2.0;
  r.total_mass = t.total_mass;
  r.avg_log_conductor = t.log_mass / t.total_mass;
  r.conductor_term = phi_hat0 * r.avg_log_conductor / (2.0 * logT);

  const double mass = t.total_mass;
  const double threshold_p = T * T / (4.0 * kPi * kPi);
  std::vector<double> prime, prime_budget, s1, s2, s3;
  for (std::size_t i = 0; i < t.primes.size(); ++i) {
    const double p = t.primes[i];
    const double lp = std::log(p);
    const double ph = phi_hat(lp / (2.0 * logT));
    if (ph == 0.0) continue;
    ++r.primes;
    const double wgt = lp / (std::sqrt(p) * logT) * ph;
    prime.push_back(2.0 * wgt * t.g_p[i] / mass);
    prime_budget.push_back(2.0 * std::abs(wgt) * t.g_p_budget[i] / mass);
    if (p >= threshold_p) {
      s1.push_back(wgt * t.kl_small_c[i]);
      s2.push_back(wgt * t.kl_large_c[i]);
    } else {
      s3.push_back(wgt * (t.kl_small_c[i] + t.kl_large_c[i]));
    }
  }
  std::vector<double> sq, sq_budget;
  for (std::size_t i = 0; i < t.g_p2.size(); ++i) {
    const double p = t.primes[i];
    const double lp = std::log(p);
    const double ph = phi_hat(lp / logT);
    if (ph == 0.0) continue;
    ++r.prime_squares;
    const double wgt = 2.0 * lp / (p * logT) * ph;
    sq.push_back(wgt * t.g_p2[i] / mass);
    sq_budget.push_back(std::abs(wgt) * t.g_p2_budget[i] / mass);
  }
  r.prime_term = ordered_sum(prime);
  r.prime_sq_term = ordered_sum(sq);
  r.total = r.const_term + r.conductor_term - r.prime_term - r.prime_sq_term;
  r.rmt_o_prediction = phi_hat0 + phi0 / 2.0;
  r.deviation = std::abs(r.total - r.rmt_o_prediction);

  // Relative budget of the mass propagates into every average.
  const double mass_rel = t.total_mass_budget / mass;
  r.error_budget = ordered_sum(prime_budget) + ordered_sum(sq_budget) +
                   std::abs(phi_hat0) / (2.0 * logT) * (t.log_mass_budget / mass + std::abs(r.avg_log_conductor) * mass_rel) +
                   (std::abs(r.prime_term) + std::abs(r.prime_sq_term)) * mass_rel;

  r.deviation_so_even = std::abs(r.total - rmt::rmt_expected_value_routes(phi, rmt::Group::so_even).xi_space);
  r.deviation_so_odd = std::abs(r.total - rmt::rmt_expected_value_routes(phi, rmt::Group::so_odd).xi_space);
  r.beyond_basic_threshold = phi.eta >= kBasicEtaThreshold;
  r.beyond_weight_threshold = phi.eta >= weight_eta_threshold(t.M);

  if (split) {
    split->T = t.T;
    split->eta = phi.eta;
    split->large_p_small_c = ordered_sum(s1);
    split->large_p_large_c = ordered_sum(s2);
    split->small_p = ordered_sum(s3);
    split->total_mass = mass;
  }
  return r;
}

DensityReport explicit_formula_average(const weights::SpectralWeight& w, const rmt::TestFunction& phi,
                                       const DensityOptions& opts, SplitDiagnostics* split) {
  const double P = std::pow(static_cast<double>(w.T), 2.0 * phi.eta);
  return assemble(build_prime_tables(w, P, opts), phi, split);
}

DensityReport explicit_formula_average(int T, const rmt::TestFunction& phi, int c_max) {
  DensityOptions o;
  o.c_max = c_max;
  return explicit_formula_average(besseltransform::default_weight(T), phi, o);
}

std::vector<double> ConvergenceScan::deviations(double eta) const {
  std::vector<double> out;
  for (const auto& r : reports) {
    if (r.eta == eta) out.push_back(r.deviation);
  }
  return out;
}

ConvergenceScan convergence_scan(const std::vector<int>& T_list, const std::vector<double>& eta_list, int M,
                                 double bump_halfwidth, const DensityOptions& opts) {
  if (T_list.empty() || eta_list.empty()) throw DomainError("convergence_scan: empty grid");
  for (double eta : eta_list) {
    if (!(eta > 0.0) || eta >= 2.0) throw DomainError("convergence_scan: eta must lie in (0, 2)");
  }
  const auto family = weights::make_weight_family(M, bump_halfwidth);
  std::vector<rmt::TestFunction> phis;
  for (double eta : eta_list) phis.push_back(rmt::make_test_function(eta));
  const double eta_max = *std::max_element(eta_list.begin(), eta_list.end());
  ConvergenceScan scan;
  scan.T_list = T_list;
  scan.eta_list = eta_list;
  for (int T : T_list) {
    const auto w = weights::make_spectral_weight(family, T);
    const auto tables = build_prime_tables(w, std::pow(static_cast<double>(T), 2.0 * eta_max), opts);
    for (const auto& phi : phis) {
      SplitDiagnostics s;
      scan.reports.push_back(assemble(tables, phi, &s));
      scan.splits.push_back(s);
    }
  }
  return scan;
}

bool deviations_converge(const std::vector<double>& d) {
  if (d.size() < 2) return false;
  if (!(d.back() < d.front())) return false;
  int inversions = 0;
  for (std::size_t i = 1; i < d.size(); ++i) {
    if (d[i] > d[i - 1]) {
      ++inversions;
      if (d[i] > 1.1 * d[i - 1]) return false;
    }
  }
  return inversions <= 1;
}

void write_density_csv(std::ostream& os, const std::vector<DensityReport>& reports) {
  os << "T,eta,const,conductor,prime,prime_sq,total,prediction,deviation\n";
  os << std::setprecision(17);
  for (const auto& r : reports) {
    os << r.T << ',' << r.eta << ',' << r.const_term << ',' << r.conductor_term << ',' << r.prime_term << ','
       << r.prime_sq_term << ',' << r.total << ',' << r.rmt_o_prediction << ',' << r.deviation << '\n';
  }
  os << std::setprecision(6);
  for (const auto& r : reports) {
    if (r.beyond_basic_threshold) {
      os << "# T=" << r.T << " eta=" << r.eta << " at or above 5/4"
         << (r.beyond_weight_threshold ? " and above 2-3/(2(M+1))" : "") << ": outside the proven range\n";
    }
  }
}

void write_split_csv(std::ostream& os, const std::vector<SplitDiagnostics>& splits) {
  os << "T,eta,large_p_small_c,large_p_large_c,small_p,total_mass\n";
  os << std::setprecision(17);
  for (const auto& s : splits) {
    os << s.T << ',' << s.eta << ',' << s.large_p_small_c << ',' << s.large_p_large_c << ',' << s.small_p << ','
       << s.total_mass << '\n';
  }
}

}  // namespace lowlying::density
