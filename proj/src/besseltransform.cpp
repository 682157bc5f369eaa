#include "lowlying/besseltransform.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <map>
#include <mutex>
#include <ostream>
#include <sstream>

#include "lowlying/errors.hpp"
#include "lowlying/specfun.hpp"

namespace lowlying::besseltransform {

using weights::SpectralWeight;

namespace {

const weights::WeightFamily& default_family() {
  static const weights::WeightFamily f = weights::make_weight_family(8, 0.125);
  return f;
}

void check_X(double X, const char* who) {
  if (!(X >= 0.0) || !std::isfinite(X)) throw DomainError(std::string(who) + ": X must be >= 0");
}

// log of the envelope (X/2)^n / n! for J_n(X).
double log_j_envelope(int n, double X) { return n * std::log(0.5 * X) - std::lgamma(n + 1.0); }

// Number of half-integer residues needed: k_max = ceil(X) + 40, extended until
// the J envelope times the largest weight factor is negligible.
int half_integer_kmax(const SpectralWeight& w, double X, double tol) {
  int k = static_cast<int>(std::ceil(X)) + 40;
  for (;;) {
    const int n = 2 * k + 1;
    const double weight = std::abs(n * weights::h_T_halfint_imag(w, k)) + 1.0;
    if (log_j_envelope(n, X) + std::log(weight) < std::log(1e-3 * tol)) return k;
    k += 20;
    if (k > 200000) throw ConvergenceError("residue sum: J envelope does not fall below tolerance");
  }
}

// |J_n(n z)| <= (z e^{sqrt(1-z^2)} / (1 + sqrt(1-z^2)))^n for 0 < z < 1.
double log_debye_envelope(int n, double X) {
  const double z = X / n;
  if (z >= 1.0) return 0.0;
  const double q = std::sqrt(1.0 - z * z);
  return n * (std::log(z) + q - std::log1p(q));
}

// Sum over k of f(k) J_k(X) x^2 h(x) with x = k/2T, only the pieces shared by
// the two S_J routes.
double x2h(const SpectralWeight& w, int k) {
  const double x = k / (2.0 * w.T);
  return x * x * weights::h_real(w.family, x);
}

}  // namespace

weights::SpectralWeight default_weight(int T) { return weights::make_spectral_weight(default_family(), T); }

DJResult dj_quadrature(const SpectralWeight& w, double X, double tol) {
  if (!(X > 0.0)) throw DomainError("dj_quadrature: X must be > 0");
  if (!(tol >= 1e-12) || tol >= 1.0) throw DomainError("dj_quadrature: tol must lie in [1e-12, 1)");
  const double T = w.T;
  const double R = 4.0 * T / kPi * std::log(1.0 / tol) + 50.0;
  if (R > 1e4) throw DomainError("dj_quadrature: truncation point beyond the Bessel order range");
  const auto f = [&](double r) {
    if (r <= 0.0) return 0.0;
    return r * weights::h_T_real(w, r) * specfun::scaled_bessel_j_imag(r, X).value.imag();
  };
  AdaptiveOptions opts;
  opts.abs_tol = 0.1 * tol;
  opts.rel_tol = 0.0;
  opts.max_subdivisions = 400000;
  // Panels shrink like 1/ln(X/2 + 2) to follow the oscillation of the order.
  opts.initial_panels = static_cast<int>(std::ceil(R * std::log(0.5 * X + 2.0 + R) / kPi)) + 8;
  const auto q = integrate_adaptive(f, 0.0, R, opts);
  // Tail: |J_{2ir}/cosh| <= 1 and h_T decays at least like exp(-pi r / 4T).
  const double tail = 2.0 * R * std::abs(weights::h_T_real(w, R)) * (4.0 * T / kPi) * 2.0;
  DJResult res;
  res.value = Complex(0.0, 2.0 * q.value);
  res.method = DJMethod::quadrature;
  res.X = X;
  res.T = w.T;
  res.error_estimate = 2.0 * q.abs_error + tail;
  return res;
}

DJResult dj_quadrature(double X, int T, double tol) { return dj_quadrature(default_weight(T), X, tol); }

const ResidueConstants& residue_constants() {
  static ResidueConstants constants;
  static std::once_flag once;
  std::call_once(once, [] {
    const std::vector<std::pair<double, int>> points = {{1.0, 5}, {2.0, 11}, {6.0, 5}, {8.0, 5}};
    struct Sample {
      Complex quad;
      DJKernel::Raw raw;
      int T;
    };
    std::vector<Sample> samples;
    for (const auto& [X, T] : points) {
      const auto w = default_weight(T);
      samples.push_back({dj_quadrature(w, X, 1e-11).value, DJKernel(w, X, 1e-13).raw(X), T});
    }
    const Complex I(0.0, 1.0);
    ResidueConstants best;
    best.worst_mismatch = INFINITY;
    int matches = 0;
    for (const Complex c1 : {-I, I}) {
      for (const double c2_sign : {1.0, -1.0}) {
        for (const bool alternating : {false, true}) {
          double worst = 0.0;
          for (const auto& s : samples) {
            // raw integer families already carry T^2 = (T) * (T from c2).
            const double integer = alternating ? s.raw.integer_alt : s.raw.integer_plain;
            const Complex v = c1 * s.raw.half + c2_sign * 2.0 * I * integer;
            worst = std::max(worst, std::abs(v - s.quad) / (1.0 + std::abs(s.quad)));
          }
          if (worst <= 1e-8) ++matches;
          if (worst < best.worst_mismatch) {
            best = {c1, c2_sign * 2.0 * I, alternating, worst};
          }
        }
      }
    }
    if (matches != 1) {
      std::ostringstream msg;
      msg << "residue calibration: " << matches << " candidate constant sets match quadrature (best mismatch "
          << best.worst_mismatch << ")";
      throw CalibrationError(msg.str());
    }
    constants = best;
  });
  return constants;
}

DJKernel::DJKernel(const SpectralWeight& w, double X_max, double tol) : w_(w), X_max_(X_max), tol_(tol) {
  check_X(X_max, "DJKernel");
  const int kmax = half_integer_kmax(w, std::max(X_max, 1e-300), tol);
  half_.resize(kmax + 1);
  for (int k = 0; k <= kmax; ++k) half_[k] = (2 * k + 1) * weights::h_T_halfint_imag(w, k);
  const double T = w.T;
  second_.push_back(0.0);
  for (int k = 1;; ++k) {
    const double scale = T * T * k * k * weights::h_real(w.family, k);
    second_.push_back(scale);
    const int n = 2 * k * w.T;
    if (k >= 5 && n > X_max && std::exp(log_debye_envelope(n, X_max)) * std::abs(scale) < 1e-3 * tol) break;
    if (k > 100000) throw ConvergenceError("DJKernel: second residue family does not converge");
  }
}

DJKernel::Raw DJKernel::raw(double X) const {
  check_X(X, "dj_residue_sum");
  if (X > X_max_ * (1.0 + 1e-12)) throw DomainError("DJKernel: X above the tabulated range");
  Raw out;
  if (X == 0.0) return out;
  // k_max = ceil(X) + 40, extended while the J envelope is not negligible.
  const int kcap = static_cast<int>(half_.size()) - 1;
  int kmax = std::min(kcap, static_cast<int>(std::ceil(X)) + 40);
  while (kmax < kcap &&
         log_j_envelope(2 * kmax + 1, X) + std::log(std::abs(half_[kmax]) + 1.0) >= std::log(1e-3 * tol_)) {
    ++kmax;
  }
  const auto J = specfun::bessel_j_int_sequence(2 * kmax + 1, X);
  CompensatedSum<double> half;
  for (int k = 0; k <= kmax; ++k) {
    const double term = J[2 * k + 1] * half_[k];
    half.add((k % 2 == 0) ? term : -term);
  }
  out.half = half.value();
  if (kmax < kcap) out.truncation = std::exp(log_j_envelope(2 * kmax + 3, X)) * std::abs(half_[kmax + 1]);

  CompensatedSum<double> plain, alt;
  for (std::size_t k = 1; k < second_.size(); ++k) {
    const int n = 2 * static_cast<int>(k) * w_.T;
    if (n > X) {
      const double env = std::exp(log_debye_envelope(n, X)) * std::abs(second_[k]);
      if (env < 1e-3 * tol_) {
        out.truncation += env;
        continue;
      }
    }
    const double term = second_[k] * specfun::bessel_j_int(n, X);
    plain.add(term);
    alt.add((k % 2 == 0) ? term : -term);
  }
  out.integer_plain = plain.value();
  out.integer_alt = alt.value();
  return out;
}

ResidueFamilies DJKernel::families(double X) const {
  const auto& c = residue_constants();
  const auto r = raw(X);
  ResidueFamilies out;
  out.half_integer = c.c1 * r.half;
  // c2 is stored without its factor T; the table already carries T^2.
  out.integer_multiple = c.c2 * (c.alternating ? r.integer_alt : r.integer_plain);
  out.truncation_bound = r.truncation;
  return out;
}

DJResult DJKernel::operator()(double X) const {
  const auto f = families(X);
  DJResult res;
  res.value = f.half_integer + f.integer_multiple;
  res.method = DJMethod::residue;
  res.X = X;
  res.T = w_.T;
  res.error_estimate = f.truncation_bound + 1e-15 * (std::abs(f.half_integer) + std::abs(f.integer_multiple));
  return res;
}

ResidueFamilies dj_residue_families(const SpectralWeight& w, double X, double tol) {
  return DJKernel(w, X, tol).families(X);
}

DJResult dj_residue_sum(const SpectralWeight& w, double X, double tol) { return DJKernel(w, X, tol)(X); }

DJResult dj_residue_sum(double X, int T, double tol) { return dj_residue_sum(default_weight(T), X, tol); }

DJResult dj_asymptotic(const SpectralWeight& w, double X) {
  if (!(X > 0.0)) throw DomainError("dj_asymptotic: X must be > 0");
  if (X < w.T / 8.0) throw RegimeError("dj_asymptotic: needs X >= T/8");
  const double T = w.T;
  const double R = 4.0 * T / kPi * std::log(1e12) + 50.0;
  const auto lead = [&](double r) { return specfun::dunster_leading_term(r, X); };
  AdaptiveOptions opts;
  opts.abs_tol = 1e-11;
  opts.rel_tol = 0.0;
  opts.max_subdivisions = 400000;
  opts.initial_panels = static_cast<int>(std::ceil(R * std::log(0.5 * X + 2.0 + R) / kPi)) + 8;
  const auto main = integrate_adaptive(
      [&](double r) { return r <= 0.0 ? 0.0 : r * weights::h_T_real(w, r) * lead(r).value.imag(); }, 0.0, R, opts);
  AdaptiveOptions bound_opts{0.0, 1e-6, 400000, opts.initial_panels};
  const auto remainder = integrate_adaptive(
      [&](double r) {
        if (r <= 0.0) return 0.0;
        const auto d = lead(r);
        return r * std::abs(weights::h_T_real(w, r)) * std::abs(d.value) * d.rel_error_estimate;
      },
      0.0, R, bound_opts);
  DJResult res;
  res.value = Complex(0.0, 2.0 * main.value);
  res.method = DJMethod::asymptotic;
  res.X = X;
  res.T = w.T;
  res.error_estimate = 2.0 * (main.abs_error + remainder.value);
  return res;
}

DJResult dj_asymptotic(double X, int T) { return dj_asymptotic(default_weight(T), X); }

double sj_direct(const SpectralWeight& w, double X) {
  check_X(X, "sj_direct");
  if (X == 0.0) return 0.0;
  const int kmax = half_integer_kmax(w, X, 1e-14);
  const auto J = specfun::bessel_j_int_sequence(2 * kmax + 1, X);
  CompensatedSum<double> acc;
  for (int k = 0; k <= kmax; ++k) {
    const double x = (2.0 * k + 1.0) / (2.0 * w.T);
    const double term = J[2 * k + 1] * x2h(w, 2 * k + 1) / std::sin(kPi * x);
    acc.add((k % 2 == 0) ? term : -term);
  }
  return w.T * acc.value();
}

double sj_direct(double X, int T) { return sj_direct(default_weight(T), X); }

double sj_alpha_expansion(const SpectralWeight& w, double X) {
  check_X(X, "sj_alpha_expansion");
  if (w.T > 101) throw CostGuardError("sj_alpha_expansion: T above 101 (double sum cost guard)");
  if (X == 0.0) return 0.0;
  const int kmax = half_integer_kmax(w, X, 1e-14);
  const int n_max = 2 * kmax + 1;
  const auto J = specfun::bessel_j_int_sequence(n_max, X);
  const int T = w.T;
  const int half = (T - 1) / 2;
  std::vector<double> coeff(n_max + 1, 0.0);
  for (int k = 1; k <= n_max; ++k) {
    if (k % (2 * T) != 0) coeff[k] = J[k] * x2h(w, k);
  }
  CompensatedSum<Complex> acc;
  for (int alpha = -half; alpha <= half; ++alpha) {
    for (int k = 1; k <= n_max; ++k) {
      if (coeff[k] == 0.0) continue;
      const double turns = static_cast<double>(static_cast<long long>(k) * alpha % (2 * T)) / (2.0 * T);
      acc.add(std::exp(Complex(0.0, 2.0 * kPi * turns)) * coeff[k]);
    }
  }
  return T * acc.value().real();
}

double sj_alpha_expansion(double X, int T) { return sj_alpha_expansion(default_weight(T), X); }

StationarySums stationary_phase_sums(const SpectralWeight& w, double Y) {
  if (!(Y > 0.0)) throw DomainError("stationary_phase_sums: Y must be > 0");
  const double T = w.T;
  if (Y > T / (2.0 * kPi) * (1.0 + 1e-12)) throw RegimeError("stationary_phase_sums: needs Y <= T/(2 pi)");
  const int half = (w.T - 1) / 2;
  CompensatedSum<Complex> a, b;
  for (int alpha = -half; alpha <= half; ++alpha) {
    const double angle = kPi * alpha / T;
    const double arg = kPi * Y / T * std::cos(angle);
    const Complex phase = std::exp(Complex(0.0, 2.0 * kPi * Y * std::sin(angle)));
    a.add(phase * weights::g_tilde_eval(w.family, arg, 2, 0));
    b.add(phase * std::sin(angle) * weights::g_tilde_eval(w.family, arg, 2, 2));
  }
  StationarySums out;
  out.a_sum = T * a.value();
  out.b_sum = (Y / T) * b.value();
  out.A = std::abs(out.a_sum);
  out.B = std::abs(out.b_sum);
  return out;
}

StationarySums stationary_phase_sums(double Y, int T) { return stationary_phase_sums(default_weight(T), Y); }

ScanKind parse_scan_kind(const std::string& name) {
  static const std::map<std::string, ScanKind> table = {{"small_X", ScanKind::small_X},
                                                        {"large_X", ScanKind::large_X},
                                                        {"souped_up", ScanKind::souped_up},
                                                        {"stationary_A", ScanKind::stationary_A},
                                                        {"stationary_B", ScanKind::stationary_B}};
  const auto it = table.find(name);
  if (it == table.end()) {
    throw DomainError("unknown scan '" + name + "' (small_X, large_X, souped_up, stationary_A, stationary_B)");
  }
  return it->second;
}

std::string scan_kind_name(ScanKind k) {
  switch (k) {
    case ScanKind::small_X: return "small_X";
    case ScanKind::large_X: return "large_X";
    case ScanKind::souped_up: return "souped_up";
    case ScanKind::stationary_A: return "stationary_A";
    case ScanKind::stationary_B: return "stationary_B";
  }
  return "?";
}

double scan_bound(ScanKind which, double X, int T, int M) {
  const double t = T;
  switch (which) {
    case ScanKind::small_X: return X / t;
    case ScanKind::large_X: return X / std::sqrt(t);
    case ScanKind::souped_up: return std::pow(X, M) * std::pow(t, 1.5 - 2.0 * M) + std::pow(t, -1.5);
    case ScanKind::stationary_A: return std::pow(X, 4) / std::pow(t, 7);
    case ScanKind::stationary_B: return std::pow(X, 5) / std::pow(t, 9);
  }
  return 0.0;
}

bool scan_in_regime(ScanKind which, double X, int T) {
  switch (which) {
    case ScanKind::small_X: return X <= T;
    case ScanKind::large_X:
    case ScanKind::souped_up: return X >= T / 8.0;
    case ScanKind::stationary_A:
    case ScanKind::stationary_B: return X <= T / (2.0 * kPi) * (1.0 + 1e-12);
  }
  return false;
}

ScanReport bound_scan(ScanKind which, const std::vector<GridPoint>& grid, const ScanOptions& opts) {
  if (grid.empty()) throw DomainError("bound_scan: empty grid");
  const bool souped = which == ScanKind::souped_up;
  const int M = souped ? opts.souped_M : opts.M;
  const auto family = weights::make_weight_family(M, opts.bump_halfwidth);
  ScanReport report;
  report.which = which;
  if (which == ScanKind::stationary_A || which == ScanKind::stationary_B) report.x_label = "Y";
  for (const auto& p : grid) {
    if (!(p.X > 0.0)) throw DomainError("bound_scan: grid X must be > 0");
    weights::make_spectral_weight(family, p.T);  // validates T
    if (scan_in_regime(which, p.X, p.T)) {
      report.points.push_back(p);
    } else {
      report.flagged.push_back(p);
    }
  }
  if (report.points.empty()) throw DomainError("bound_scan: no grid point lies in the regime of the bound");
  const bool uses_dj = which == ScanKind::small_X || which == ScanKind::large_X || souped;
  if (uses_dj) residue_constants();  // calibrate before any point is evaluated

  const std::size_t n = report.points.size();
  report.values.assign(n, 0.0);
  report.bounds.assign(n, 0.0);
  report.ratios.assign(n, 0.0);
  const auto eval = [&](std::size_t i) {
    const auto& p = report.points[i];
    const auto w = weights::make_spectral_weight(family, p.T);
    double v = 0.0;
    if (uses_dj) {
      v = std::abs(dj_residue_sum(w, p.X, std::min(opts.tol, 1e-12)).value);
    } else {
      const auto s = stationary_phase_sums(w, p.X);
      v = (which == ScanKind::stationary_A) ? s.A : s.B;
    }
    report.values[i] = v;
    report.bounds[i] = scan_bound(which, p.X, p.T, M);
    report.ratios[i] = v / report.bounds[i];
  };
  if (opts.exec == Exec::parallel) {
#pragma omp parallel for schedule(dynamic, 1)
    for (std::size_t i = 0; i < n; ++i) eval(i);
  } else {
    for (std::size_t i = 0; i < n; ++i) eval(i);
  }
  report.sup_ratio = *std::max_element(report.ratios.begin(), report.ratios.end());
  if (!std::isfinite(report.sup_ratio)) throw VerificationError("bound_scan: non-finite ratio");
  return report;
}

void write_scan_csv(const ScanReport& report, std::ostream& out) {
  const auto flags = out.flags();
  const auto prec = out.precision();
  out << std::setprecision(17);
  out << "which,X,T,value,bound,ratio\n";
  const std::string name = scan_kind_name(report.which);
  for (std::size_t i = 0; i < report.points.size(); ++i) {
    out << name << ',' << report.points[i].X << ',' << report.points[i].T << ',' << report.values[i] << ','
        << report.bounds[i] << ',' << report.ratios[i] << '\n';
  }
  for (const auto& p : report.flagged) {
    out << "# flagged outside regime: " << report.x_label << '=' << p.X << ",T=" << p.T << '\n';
  }
  out.flags(flags);
  out.precision(prec);
}

}  // namespace lowlying::besseltransform
