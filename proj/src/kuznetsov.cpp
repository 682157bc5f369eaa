#include "lowlying/kuznetsov.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>
#include <span>
#include <sstream>

#include "lowlying/arithmetic.hpp"
#include "lowlying/errors.hpp"
#include "lowlying/specfun.hpp"

namespace lowlying::kuznetsov {

namespace {

constexpr int kBlock = 32;
// Rows cost O(c phi(c)) each, so only small moduli are tabulated.
constexpr int kRowTableMax = 1000;
constexpr int kModulusCacheMax = 8000;

std::vector<std::int64_t> divisors(std::int64_t n) {
  std::vector<std::int64_t> small, large;
  for (std::int64_t d = 1; d * d <= n; ++d) {
    if (n % d) continue;
    small.push_back(d);
    if (d * d != n) large.push_back(n / d);
  }
  small.insert(small.end(), large.rbegin(), large.rend());
  return small;
}

// log(d^2/n) over the divisors d of n, so tau_{ir}(n) = sum cos(r * f).
std::vector<double> tau_frequencies(std::int64_t n) {
  std::vector<double> f;
  const double ln = std::log(static_cast<double>(n));
  for (auto d : divisors(n)) f.push_back(2.0 * std::log(static_cast<double>(d)) - ln);
  return f;
}

double tau(const std::vector<double>& freq, double r) {
  double s = 0.0;
  for (double f : freq) s += std::cos(r * f);
  return s;
}

// sum_{c > C} d(c) c^{-s}, s > 1, from the mean value log t + 2 gamma of d.
double divisor_tail(double C, double s) {
  const double a = s - 1.0;
  return std::pow(C, -a) * ((std::log(C) + 2.0 * kEulerGamma) / a + 1.0 / (a * a));
}

void check_mn(std::int64_t m, std::int64_t n, const char* where) {
  if (m < 1 || n < 1) throw DomainError(std::string(where) + ": m and n must be >= 1");
}

}  // namespace

// ---------------------------------------------------------------- weights

AdmissibleWeight AdmissibleWeight::spectral(const weights::SpectralWeight& w) {
  AdmissibleWeight H;
  H.kind_ = WeightKind::spectral;
  H.spectral_ = w;
  return H;
}

AdmissibleWeight AdmissibleWeight::log_conductor(const weights::SpectralWeight& w) {
  AdmissibleWeight H;
  H.kind_ = WeightKind::log_conductor;
  H.spectral_ = w;
  return H;
}

AdmissibleWeight AdmissibleWeight::gaussian(double center, double width, int zeros) {
  return gaussian_mixture({{1.0, center, width}}, zeros);
}

AdmissibleWeight AdmissibleWeight::gaussian_mixture(std::vector<GaussianTerm> terms, int zeros) {
  if (terms.empty()) throw DomainError("gaussian weight: no terms");
  if (zeros < 0 || zeros > 4) throw DomainError("gaussian weight: zeros must lie in [0, 4]");
  for (const auto& t : terms) {
    if (!(t.width > 0.0) || !std::isfinite(t.center) || !std::isfinite(t.coef)) {
      throw DomainError("gaussian weight: width must be positive and parameters finite");
    }
  }
  AdmissibleWeight H;
  H.kind_ = WeightKind::gaussian;
  H.terms_ = std::move(terms);
  H.zeros_ = zeros;
  return H;
}

Complex AdmissibleWeight::operator()(Complex r) const {
  switch (kind_) {
    case WeightKind::spectral:
      return weights::h_T_eval(*spectral_, r);
    case WeightKind::log_conductor:
      if (r.imag() == 0.0) return real(r.real());
      return std::log(1.0 + r * r) * weights::h_T_eval(*spectral_, r);
    case WeightKind::gaussian: {
      Complex p = 1.0;
      for (int j = 0; j < zeros_; ++j) p *= r * r + (j + 0.5) * (j + 0.5);
      Complex s{};
      for (const auto& t : terms_) {
        const Complex a = (r - t.center) / t.width, b = (r + t.center) / t.width;
        s += t.coef * (std::exp(-a * a) + std::exp(-b * b));
      }
      return p * s;
    }
  }
  return {};
}

double AdmissibleWeight::real(double r) const {
  switch (kind_) {
    case WeightKind::spectral:
      return weights::h_T_real(*spectral_, r);
    case WeightKind::log_conductor:
      return std::log1p(r * r) * weights::h_T_real(*spectral_, r);
    case WeightKind::gaussian: {
      double p = 1.0;
      for (int j = 0; j < zeros_; ++j) p *= r * r + (j + 0.5) * (j + 0.5);
      double s = 0.0;
      for (const auto& t : terms_) {
        const double a = (r - t.center) / t.width, b = (r + t.center) / t.width;
        s += t.coef * (std::exp(-a * a) + std::exp(-b * b));
      }
      return p * s;
    }
  }
  return 0.0;
}

double AdmissibleWeight::decay_scale() const {
  if (kind_ == WeightKind::gaussian) {
    double w = 0.0;
    for (const auto& t : terms_) w = std::max(w, t.width);
    return w;
  }
  // h_T(r) ~ exp(-pi r (1 - 4w)/T) for the bump half-width w.
  const double w = spectral_->family.bump_halfwidth;
  return spectral_->T / (kPi * std::max(1e-3, 1.0 - 4.0 * w));
}

double AdmissibleWeight::support_end(double rel) const {
  double reach = 0.0;
  for (const auto& t : terms_) reach = std::max(reach, std::abs(t.center) + t.width);
  const double step = decay_scale() / 16.0;
  double peak = 0.0, argmax = 0.0;
  for (double r = step;; r += step) {
    const double v = std::abs(r * real(r));
    if (v > peak) {
      peak = v;
      argmax = r;
    }
    if (r > 2.0 * argmax + 1.0 && r > reach && v <= rel * peak) return r;
    if (r > 1e6) throw ConvergenceError("support_end: weight does not decay");
  }
}

std::string AdmissibleWeight::description() const {
  std::ostringstream os;
  os.precision(17);
  switch (kind_) {
    case WeightKind::spectral:
      os << "h_T(T=" << spectral_->T << ", M=" << spectral_->family.M << ", w=" << spectral_->family.bump_halfwidth << ")";
      break;
    case WeightKind::log_conductor:
      os << "log(1+r^2) h_T(T=" << spectral_->T << ", M=" << spectral_->family.M
         << ", w=" << spectral_->family.bump_halfwidth << ")";
      break;
    case WeightKind::gaussian:
      os << "gaussian(";
      for (std::size_t i = 0; i < terms_.size(); ++i) {
        if (i) os << " + ";
        os << terms_[i].coef << "@" << terms_[i].center << "/" << terms_[i].width;
      }
      os << ", zeros=" << zeros_ << ")";
      break;
  }
  return os.str();
}

nlohmann::json AdmissibleWeight::to_json() const {
  nlohmann::json j;
  j["description"] = description();
  switch (kind_) {
    case WeightKind::spectral:
    case WeightKind::log_conductor:
      j["kind"] = kind_ == WeightKind::spectral ? "h_T" : "log_h_T";
      j["T"] = spectral_->T;
      j["M"] = spectral_->family.M;
      j["bump_halfwidth"] = spectral_->family.bump_halfwidth;
      break;
    case WeightKind::gaussian: {
      j["kind"] = "gaussian";
      j["zeros"] = zeros_;
      auto& arr = j["terms"] = nlohmann::json::array();
      for (const auto& t : terms_) arr.push_back({{"coef", t.coef}, {"center", t.center}, {"width", t.width}});
      break;
    }
  }
  return j;
}

void check_even(const AdmissibleWeight& H) {
  const double R = H.support_end(1e-12);
  double scale = 0.0;
  std::vector<std::pair<double, double>> vals;
  for (int i = 1; i <= 200; ++i) {
    const double r = R * i / 200.0;
    const double a = H.real(r);
    const double b = H(Complex(-r, 0.0)).real();
    scale = std::max(scale, std::abs(a));
    vals.emplace_back(a, b);
  }
  for (const auto& [a, b] : vals) {
    if (std::abs(a - b) > 1e-12 * scale) throw DomainError("check_even: weight is not even");
  }
}

int default_c_max(std::int64_t m, std::int64_t n, int T) {
  const double c = 4.0 * 8.0 * kPi * std::sqrt(static_cast<double>(m) * static_cast<double>(n)) / T;
  return std::max(1000, static_cast<int>(std::ceil(c)));
}

// ---------------------------------------------------------------- engine

GeometricEngine::GeometricEngine(AdmissibleWeight H, std::int64_t max_mn, GeometricOptions opts)
    : H_(std::move(H)), max_mn_(max_mn), opts_(opts) {
  if (max_mn < 1) throw DomainError("GeometricEngine: max_mn must be >= 1");
  if (opts_.c_max < 1) throw DomainError("GeometricEngine: c_max must be >= 1");
  if (!(opts_.tol > 0.0)) throw DomainError("GeometricEngine: tol must be positive");
  check_even(H_);
  r_max_ = H_.support_end(1e-17);
  const double scale = H_.decay_scale();
  const bool parallel = opts_.exec == Exec::parallel;

  // Delta term: (2/pi^2) int_0^R r H tanh(pi r) dr.
  {
    AdaptiveOptions o;
    o.initial_panels = 8 + static_cast<int>(8.0 * r_max_ / scale);
    o.rel_tol = 1e-13;
    o.abs_tol = 0.0;
    o.max_subdivisions = 100000;
    const auto q = integrate_adaptive([&](double r) { return r * H_.real(r) * std::tanh(kPi * r); }, 0.0, r_max_, o);
    delta_ = 2.0 / (kPi * kPi) * q.value;
    delta_err_ = 2.0 / (kPi * kPi) * (q.abs_error + 1e-16 * q.abs_integral * scale);
  }

  const auto gl = gauss_legendre(20);
  auto build_nodes = [&](double width, std::vector<double>& r, std::vector<double>& w) {
    const int panels = std::max(4, static_cast<int>(std::ceil(r_max_ / width)));
    const double h = r_max_ / panels;
    r.resize(static_cast<std::size_t>(panels) * gl.nodes.size());
    w.resize(r.size());
    for (int p = 0; p < panels; ++p) {
      for (std::size_t i = 0; i < gl.nodes.size(); ++i) {
        const std::size_t k = static_cast<std::size_t>(p) * gl.nodes.size() + i;
        r[k] = h * (p + 0.5 + 0.5 * gl.nodes[i]);
        w[k] = 0.5 * h * gl.weights[i];
      }
    }
  };

  // Eisenstein table. The product tau(m) tau(n) oscillates at frequency up
  // to log(mn); |zeta(1+2ir)|^-2 adds the frequencies 2 log k of its leading
  // terms (a margin of 10 resolves it to ~1e-13 relative, checked against
  // finer node sets). Two cycles per 20-point panel for the rest.
  {
    const double omega = std::log(static_cast<double>(max_mn_)) + 10.0;
    const double width = std::min(2.0 * kPi / omega, scale / 2.0);
    std::vector<double> w;
    build_nodes(width, eis_r_, w);
    eis_w_.resize(eis_r_.size());
#pragma omp parallel for schedule(dynamic, 64) if (parallel)
    for (std::size_t k = 0; k < eis_r_.size(); ++k) {
      const double r = eis_r_[k];
      const double z = std::norm(specfun::zeta_right_of_one(Complex(1.0, 2.0 * r)));
      eis_w_[k] = w[k] * H_.real(r) / z;
    }
    CompensatedSum<double> abs_sum;
    for (double e : eis_w_) abs_sum.add(std::abs(e));
    eis_err_ = 2.0 / kPi * (1e-12 * abs_sum.value());
  }

  {
    const int cached = std::min(opts_.c_max, kModulusCacheMax);
    moduli_.reserve(cached);
    for (int c = 1; c <= cached; ++c) moduli_.emplace_back(c);
  }
  if (opts_.tabulate_unit_rows) {
    const int rows = std::min(opts_.c_max, kRowTableMax);
    unit_rows_.resize(rows);
#pragma omp parallel for schedule(dynamic, 8) if (parallel)
    for (int c = 1; c <= rows; ++c) unit_rows_[c - 1] = moduli_[c - 1].row(1);
  }

  // Kloosterman kernel.
  const double x_max = 4.0 * kPi * std::sqrt(static_cast<double>(max_mn_));
  if (H_.kind() == WeightKind::spectral) {
    dj_ = std::make_unique<besseltransform::DJKernel>(*H_.spectral_weight(), x_max, 1e-13);
  } else {
    // Im[J_{2ir}(x)/cosh(pi r)] oscillates in r at most like 2 log(2r/x).
    const double x_min = x_max / opts_.c_max;
    const double omega = 2.0 * std::log(2.0 * r_max_ / x_min + 2.0) + 4.0;
    double width = std::min(2.0 * kPi / omega, scale / 2.0);
    // Returns the sum and the sum of |terms| (the rounding scale).
    auto eval = [&](const std::vector<double>& r, const std::vector<double>& w, double x) {
      std::vector<double> terms(r.size());
#pragma omp parallel for schedule(static) if (parallel)
      for (std::size_t k = 0; k < r.size(); ++k) terms[k] = w[k] * specfun::scaled_bessel_j_imag(r[k], x).value.imag();
      double a = 0.0;
      for (double t : terms) a += std::abs(t);
      return std::pair{ordered_sum(terms), a};
    };
    std::vector<double> r0, w0;
    build_nodes(width, r0, w0);
    for (std::size_t k = 0; k < r0.size(); ++k) w0[k] *= r0[k] * H_.real(r0[k]);
    for (int pass = 0;; ++pass) {
      std::vector<double> r1, w1;
      build_nodes(width / 2.0, r1, w1);
      for (std::size_t k = 0; k < r1.size(); ++k) w1[k] *= r1[k] * H_.real(r1[k]);
      double diff = 0.0, floor = 0.0;
      bool ok = true;
      for (double x : {x_max, x_min}) {
        const auto [a, ascale] = eval(r0, w0, x);
        const auto [b, bscale] = eval(r1, w1, x);
        diff = std::max(diff, std::abs(a - b));
        floor = std::max(floor, 1e-15 * bscale);
        ok = ok && std::abs(a - b) <= std::max(1e-12 * std::abs(b), 10.0 * 1e-15 * bscale);
      }
      if (ok || pass == 3) {
        // Keep the coarser rule: it already agrees with the finer one.
        gl_r_ = std::move(r0);
        gl_w_ = std::move(w0);
        gl_err_ = diff + floor;
        break;
      }
      width /= 2.0;
      r0 = std::move(r1);
      w0 = std::move(w1);
    }
    gl_g_.resize(gl_r_.size());
#pragma omp parallel for schedule(static) if (parallel)
    for (std::size_t k = 0; k < gl_r_.size(); ++k) {
      const double r = gl_r_[k];
      const double log_cosh = kPi * r + std::log1p(std::exp(-2.0 * kPi * r)) - std::log(2.0);
      gl_g_[k] = std::exp(-specfun::log_gamma_complex(Complex(1.0, 2.0 * r)) - log_cosh);
    }
  }
}

namespace {

// Im[J_{2ir}(x)/cosh(pi r)] from the ascending series
//   (x/2)^{2ir} g sum_k (-x^2/4)^k / (k! (1+2ir)...(k+2ir)),  g = 1/(Gamma(1+2ir) cosh(pi r)).
// Used for x <= kSeriesX, where the terms fall at least like (x/2)^{2k}/k!^2.
constexpr double kSeriesX = 4.0;

double series_imag(double r, Complex g, double x) {
  const double q = -0.25 * x * x;
  Complex term = 1.0, sum = 1.0;
  for (int k = 1; k < 200; ++k) {
    term *= q / (static_cast<double>(k) * Complex(k, 2.0 * r));
    sum += term;
    if (std::abs(term) < 1e-17 * std::abs(sum)) break;
  }
  const double phase = 2.0 * r * std::log(0.5 * x);
  return (Complex(std::cos(phase), std::sin(phase)) * g * sum).imag();
}

}  // namespace

double GeometricEngine::eisenstein(std::int64_t m, std::int64_t n) const {
  check_mn(m, n, "eisenstein");
  if (static_cast<double>(m) * static_cast<double>(n) > static_cast<double>(max_mn_) * (1.0 + 1e-12)) {
    throw DomainError("eisenstein: m n above the engine's max_mn");
  }
  const auto fm = tau_frequencies(m), fn = tau_frequencies(n);
  std::vector<double> terms(eis_r_.size());
  for (std::size_t k = 0; k < eis_r_.size(); ++k) {
    const double r = eis_r_[k];
    terms[k] = eis_w_[k] * tau(fm, r) * tau(fn, r);
  }
  return -2.0 / kPi * ordered_sum(terms);
}

std::pair<Complex, double> GeometricEngine::kernel(double x) const {
  if (dj_) {
    const auto v = (*dj_)(x);
    return {v.value, v.error_estimate + 1e-15 * (std::abs(v.value) + 1.0)};
  }
  std::vector<double> terms(gl_r_.size());
  if (x <= kSeriesX) {
    for (std::size_t k = 0; k < gl_r_.size(); ++k) terms[k] = gl_w_[k] * series_imag(gl_r_[k], gl_g_[k], x);
  } else {
    for (std::size_t k = 0; k < gl_r_.size(); ++k) {
      terms[k] = gl_w_[k] * specfun::scaled_bessel_j_imag(gl_r_[k], x).value.imag();
    }
  }
  return {Complex(0.0, 2.0 * ordered_sum(terms)), 2.0 * gl_err_};
}

GeometricBreakdown GeometricEngine::side(std::int64_t m, std::int64_t n, double c_split) const {
  check_mn(m, n, "geometric_side");
  const double mn = static_cast<double>(m) * static_cast<double>(n);
  if (mn > static_cast<double>(max_mn_) * (1.0 + 1e-12)) throw DomainError("geometric_side: m n above max_mn");
  GeometricBreakdown g;
  g.m = m;
  g.n = n;
  g.r_max = r_max_;
  g.delta_term = (m == n) ? delta_ : 0.0;
  g.eisenstein_term = eisenstein(m, n);
  double err = (m == n ? delta_err_ : 0.0);
  err += eis_err_ * arithmetic::divisor_count(m) * arithmetic::divisor_count(n);

  // Leading small-x behaviour of the kernel: the first residue that H does
  // not kill, at r = (J + 1/2) i, gives |I(x)| <~ q |H| (x/2)^q / q!.
  int J = 0;
  if (H_.kind() == WeightKind::gaussian) {
    for (J = 0; J < 4; ++J) {
      if (std::abs(H_(Complex(0.0, J + 0.5))) > 0.0) break;
    }
  }
  const int q = 2 * J + 1;
  double analytic_K = std::abs(H_(Complex(0.0, J + 0.5))) * q;
  for (int k = 1; k <= q; ++k) analytic_K /= 2.0 * k;

  const bool parallel = opts_.exec == Exec::parallel;
  const double x0 = 4.0 * kPi * std::sqrt(mn);
  std::vector<Complex> terms;
  std::vector<double> ratio;  // |I(x_c)| / x_c^q
  std::vector<double> term_err;
  terms.reserve(opts_.c_max);
  int C = 0;
  double tail = 0.0;
  const double gcd_factor = std::sqrt(static_cast<double>(arithmetic::gcd(m, n)));
  auto tail_after = [&](int upto) {
    double K = analytic_K;
    for (int c = upto / 2; c <= upto; ++c) {
      if (c >= 1) K = std::max(K, ratio[c - 1]);
    }
    return 2.0 * (2.0 / kPi) * 2.0 * K * std::pow(x0, q) * gcd_factor * divisor_tail(upto, q + 0.5);
  };
  for (;;) {
    const int lo = C + 1;
    const int hi = opts_.stop_when_converged ? std::min(opts_.c_max, C + kBlock) : opts_.c_max;
    terms.resize(hi);
    ratio.resize(hi);
    term_err.resize(hi);
#pragma omp parallel for schedule(dynamic, 4) if (parallel)
    for (int c = lo; c <= hi; ++c) {
      double S;
      const bool tabulated = c <= static_cast<int>(unit_rows_.size());
      if (n == 1 && tabulated) {
        S = unit_rows_[c - 1][m % c];
      } else if (m == 1 && tabulated) {
        S = unit_rows_[c - 1][n % c];
      } else if (c <= static_cast<int>(moduli_.size())) {
        S = moduli_[c - 1].sum(m, n);
      } else {
        S = arithmetic::kloosterman_sum(m, n, c);
      }
      const double x = x0 / c;
      const auto [I, e] = kernel(x);
      terms[c - 1] = S / c * I;
      ratio[c - 1] = std::abs(I) / std::pow(x, q);
      term_err[c - 1] = std::abs(S) / c * e;
    }
    C = hi;
    tail = tail_after(C);
    if (C >= opts_.c_max) break;
    if (C >= 2 * kBlock) {
      const Complex partial = Complex(0.0, 2.0 / kPi) * ordered_sum(terms);
      const double mag = std::max({std::abs(delta_), std::abs(g.eisenstein_term), std::abs(partial.real())});
      if (tail <= 1e-3 * opts_.tol * (1.0 + mag)) break;
    }
  }
  g.kloosterman_term = Complex(0.0, 2.0 / kPi) * ordered_sum(terms);
  if (c_split > 0.0) {
    const auto k = std::min(terms.size(), static_cast<std::size_t>(std::floor(c_split)));
    g.kloosterman_small_c = Complex(0.0, 2.0 / kPi) * ordered_sum(std::span<const Complex>(terms.data(), k));
    g.c_split = c_split;
  }
  g.c_max = C;
  g.kloosterman_tail = tail;
  err += 2.0 / kPi * ordered_sum(term_err);
  g.error_budget = err + tail;
  // Relative to the largest of the three terms, counting the diagonal integral
  // (the mass of H) even when m != n: the sides can cancel almost completely,
  // and off-diagonal sides are only ever compared with the mass.
  const double mag = std::max({std::abs(delta_), std::abs(g.eisenstein_term), std::abs(g.kloosterman_term.real())});
  if (tail > opts_.tol * (1.0 + mag)) {
    std::ostringstream os;
    os << "geometric_side: Kloosterman tail bound " << tail << " past c = " << C << " exceeds tol";
    throw BudgetError(os.str());
  }
  return g;
}

GeometricBreakdown geometric_side(std::int64_t m, std::int64_t n, const AdmissibleWeight& H, int c_max, double tol) {
  check_mn(m, n, "geometric_side");
  GeometricOptions o;
  o.c_max = c_max;
  o.tol = tol;
  return GeometricEngine(H, m * n, o).side(m, n);
}

// ---------------------------------------------------------------- spectral side

SpectralSum spectral_side(std::int64_t m, std::int64_t n, const AdmissibleWeight& H,
                          const std::vector<maassdata::MaassFormRecord>& data) {
  check_mn(m, n, "spectral_side");
  SpectralSum s;
  s.forms = data.size();
  if (data.empty()) {
    s.tail_usable = false;
    s.tail_budget = std::numeric_limits<double>::infinity();
    return s;
  }
  std::vector<double> terms;
  double min_norm = std::numeric_limits<double>::infinity();
  double t_last = 0.0;
  for (const auto& u : data) {
    terms.push_back(H.real(u.t) / u.norm_sq * u.lambda(static_cast<int>(m)) * u.lambda(static_cast<int>(n)));
    min_norm = std::min(min_norm, u.norm_sq);
    t_last = std::max(t_last, u.t);
  }
  s.sum = ordered_sum(terms);

  const auto report = maassdata::validate_records(data);
  if (!report.fit_available || !(report.fit_a > 0.0)) {
    s.tail_usable = false;
    s.tail_budget = std::numeric_limits<double>::infinity();
    return s;
  }
  // |lambda_m lambda_n| <= d(m) d(n) (mn)^{7/64}; count density from the fit.
  const double lam = arithmetic::divisor_count(m) * arithmetic::divisor_count(n) *
                     std::pow(static_cast<double>(m) * static_cast<double>(n), 7.0 / 64.0);
  const double R = std::max(H.support_end(1e-30), t_last + 1.0);
  AdaptiveOptions o;
  o.initial_panels = 16 + static_cast<int>(4.0 * (R - t_last) / H.decay_scale());
  o.rel_tol = 1e-6;
  o.abs_tol = 0.0;
  o.max_subdivisions = 20000;
  const auto q = integrate_adaptive(
      [&](double t) { return std::abs(H.real(t)) * std::max(0.0, 2.0 * report.fit_a * t + report.fit_b); }, t_last, R,
      o);
  s.tail_budget = lam / min_norm * 2.0 * (q.value + q.abs_error);
  return s;
}

// ---------------------------------------------------------------- identity

TraceReport check_trace_identity(std::int64_t m, std::int64_t n, const AdmissibleWeight& H,
                                 const std::vector<maassdata::MaassFormRecord>& data, int c_max, double tol) {
  TraceReport rep;
  rep.m = m;
  rep.n = n;
  rep.weight = H.to_json();
  rep.spectral = spectral_side(m, n, H, data);
  rep.geometric = geometric_side(m, n, H, c_max, tol);
  rep.discrepancy = std::abs(rep.spectral.sum - rep.geometric.total());
  rep.budget = rep.spectral.tail_budget + rep.geometric.error_budget;
  // Relative to the sides themselves, not to the diagonal term: for weights
  // concentrated below the spectrum the terms cancel to a tiny total.
  const double scale = std::max(std::abs(rep.geometric.total()), std::abs(rep.spectral.sum));
  rep.relative_discrepancy = scale > 0.0 ? rep.discrepancy / scale : rep.discrepancy;
  rep.pass = rep.spectral.tail_usable && rep.discrepancy <= std::max(rep.budget, 1e-3 * scale);
  return rep;
}

TraceReport verify_trace_identity(std::int64_t m, std::int64_t n, const AdmissibleWeight& H,
                                  const std::vector<maassdata::MaassFormRecord>& data, int c_max, double tol) {
  auto rep = check_trace_identity(m, n, H, data, c_max, tol);
  if (!rep.pass) {
    std::ostringstream os;
    os.precision(6);
    os << "trace identity (" << m << ", " << n << "): discrepancy " << rep.discrepancy << " vs budget " << rep.budget
       << (rep.spectral.tail_usable ? "" : " (spectral tail budget unusable)");
    throw VerificationError(os.str());
  }
  return rep;
}

nlohmann::json to_json(const GeometricBreakdown& g) {
  return {{"delta", g.delta_term},
          {"eisenstein", g.eisenstein_term},
          {"kloosterman", {{"re", g.kloosterman_term.real()}, {"im", g.kloosterman_term.imag()}}},
          {"total", g.total()},
          {"c_max", g.c_max},
          {"r_max", g.r_max},
          {"kloosterman_tail", g.kloosterman_tail},
          {"error_budget", g.error_budget}};
}

nlohmann::json to_json(const TraceReport& r) {
  nlohmann::json j;
  j["m"] = r.m;
  j["n"] = r.n;
  j["weight"] = r.weight;
  j["spectral"] = r.spectral.sum;
  j["forms"] = r.spectral.forms;
  j["geometric"] = to_json(r.geometric);
  j["budgets"] = {{"spectral_tail", r.spectral.tail_usable ? nlohmann::json(r.spectral.tail_budget) : nlohmann::json()},
                  {"spectral_tail_usable", r.spectral.tail_usable},
                  {"geometric", r.geometric.error_budget},
                  {"combined", r.spectral.tail_usable ? nlohmann::json(r.budget) : nlohmann::json()}};
  j["discrepancy"] = r.discrepancy;
  j["relative_discrepancy"] = r.relative_discrepancy;
  j["pass"] = r.pass;
  return j;
}

// ---------------------------------------------------------------- averages

double total_mass(const weights::SpectralWeight& w, int c_max) {
  return geometric_side(1, 1, AdmissibleWeight::spectral(w), c_max).total();
}

double total_mass(int T, int c_max) { return total_mass(besseltransform::default_weight(T), c_max); }

double averaged_eigenvalue(std::int64_t m, const weights::SpectralWeight& w, int c_max) {
  if (m < 1) throw DomainError("averaged_eigenvalue: m must be >= 1");
  if (m == 1) return 1.0;
  GeometricOptions o;
  o.c_max = c_max;
  const GeometricEngine eng(AdmissibleWeight::spectral(w), m, o);
  return eng.side(m, 1).total() / eng.side(1, 1).total();
}

double averaged_eigenvalue(std::int64_t m, int T, int c_max) {
  return averaged_eigenvalue(m, besseltransform::default_weight(T), c_max);
}

}  // namespace lowlying::kuznetsov
