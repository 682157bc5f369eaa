#include "lowlying/specfun.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include "lowlying/errors.hpp"

namespace lowlying::specfun {

namespace {

constexpr Complex kI{0.0, 1.0};

// Lanczos-type rational approximation (g = 671/128, 14 terms).
constexpr double kLanczosG = 5.24218750000000000;
constexpr double kLanczosC0 = 0.999999999999997092;
constexpr std::array<double, 14> kLanczos = {
    57.1562356658629235,     -59.5979603554754912,     14.1360979747417471,     -0.491913816097620199,
    .339946499848118887e-4,  .465236289270485756e-4,   -.983744753048795646e-4, .158088703224912494e-3,
    -.210264441724104883e-3, .217439618115212643e-3,   -.164318106536763890e-3, .844182239838527433e-4,
    -.261908384015814087e-4, .368991826595316234e-5};
constexpr double kSqrt2Pi = 2.5066282746310005024157652848110453;

Complex log_gamma_right(Complex z) {
  Complex tmp = z + kLanczosG;
  tmp = (z + 0.5) * std::log(tmp) - tmp;
  Complex ser = kLanczosC0;
  Complex y = z;
  for (double c : kLanczos) {
    y += 1.0;
    ser += c / y;
  }
  return tmp + std::log(kSqrt2Pi * ser / z);
}

// log sin(pi z) for Im z >= 0 without overflow.
Complex log_sin_pi_upper(Complex z) {
  const Complex e = std::exp(2.0 * kPi * kI * z);  // |e| <= 1
  return -kI * kPi * z + std::log((1.0 - e) / Complex(0.0, -2.0));
}

// log cosh(pi r) for real r.
double log_cosh_pi(double r) {
  const double a = kPi * std::abs(r);
  return a + std::log1p(std::exp(-2.0 * a)) - std::log(2.0);
}

constexpr int kSeriesMaxTerms = 100000;
constexpr int kSeriesQuietRun = 40;
constexpr double kSeriesRelCut = 1e-18;

}  // namespace

Complex log_gamma_complex(Complex z) {
  if (!is_finite(z)) throw DomainError("log_gamma_complex: non-finite argument");
  if (z.imag() == 0.0 && z.real() <= 0.0 && z.real() == std::floor(z.real())) {
    throw PoleError("log_gamma_complex: pole at non-positive integer " + std::to_string(z.real()));
  }
  if (z.real() >= 0.5) return log_gamma_right(z);
  if (z.imag() < 0.0) return std::conj(log_gamma_complex(std::conj(z)));
  // Reflection: Gamma(z) Gamma(1-z) = pi / sin(pi z).
  return std::log(kPi) - log_sin_pi_upper(z) - log_gamma_right(1.0 - z);
}

std::vector<double> bessel_j_int_sequence(int n_max, double x) {
  if (n_max < 0) throw DomainError("bessel_j_int_sequence: n_max must be >= 0");
  if (!(x >= 0.0)) throw DomainError("bessel_j_int_sequence: x must be >= 0");
  if (x > 1e5) throw OverflowError("bessel_j_int_sequence: |x| above 1e5 guard");
  std::vector<double> out(n_max + 1, 0.0);
  if (x == 0.0) {
    out[0] = 1.0;
    return out;
  }
  // Start well above the turning point so the minimal solution dominates.
  int start = std::max(n_max, static_cast<int>(std::ceil(x))) + 30 + static_cast<int>(15.0 * std::cbrt(x));
  if (start % 2 == 1) ++start;
  std::vector<double> j(start + 2, 0.0);
  j[start + 1] = 0.0;
  j[start] = 1e-300;
  const double two_over_x = 2.0 / x;
  for (int n = start; n >= 1; --n) {
    j[n - 1] = n * two_over_x * j[n] - j[n + 1];
    if (std::abs(j[n - 1]) > 1e250) {
      for (int k = n - 1; k <= start + 1; ++k) j[k] *= 1e-250;
    }
  }
  // 1 = J_0 + 2 sum_{k>=1} J_{2k}
  CompensatedSum<double> norm(j[0]);
  for (int k = 2; k <= start; k += 2) norm.add(2.0 * j[k]);
  const double scale = 1.0 / norm.value();
  for (int n = 0; n <= n_max; ++n) out[n] = j[n] * scale;
  return out;
}

double bessel_j_int(int n, double x) {
  if (std::abs(x) > 1e5) throw OverflowError("bessel_j_int: |x| above 1e5 guard");
  double sign = 1.0;
  if (n < 0) {
    n = -n;
    if (n % 2 == 1) sign = -sign;
  }
  if (x < 0.0) {
    x = -x;
    if (n % 2 == 1) sign = -sign;
  }
  if (x == 0.0) return n == 0 ? 1.0 : 0.0;
  return sign * bessel_j_int_sequence(n, x)[n];
}

double bessel_j_int_integral_check(int k, double x) {
  if (std::abs(k) > 10000) throw DomainError("bessel_j_int_integral_check: |k| > 1e4");
  // Integrand is 1-periodic and entire, so the trapezoid rule converges
  // geometrically once the node count exceeds the oscillation count.
  auto trapezoid = [k, x](int nodes) {
    CompensatedSum<double> acc;
    for (int i = 0; i < nodes; ++i) {
      const double t = -0.5 + static_cast<double>(i) / nodes;
      acc.add(std::cos(2.0 * kPi * (k * t - x * std::sin(2.0 * kPi * t))));
    }
    return acc.value() / nodes;
  };
  int nodes = 16 * (1 + static_cast<int>(std::abs(k) + 2.0 * kPi * std::abs(x)) / 8);
  double prev = trapezoid(nodes);
  for (int iter = 0; iter < 20; ++iter) {
    nodes *= 2;
    const double cur = trapezoid(nodes);
    if (std::abs(cur - prev) <= 1e-14 * std::max(1.0, std::abs(cur))) return cur;
    prev = cur;
  }
  throw ConvergenceError("bessel_j_int_integral_check: trapezoid rule did not settle");
}

Complex scaled_bessel_series(double r, double x) {
  const Complex nu(0.0, 2.0 * r);
  const double half = 0.5 * x;
  Complex term = std::exp(nu * std::log(half) - log_gamma_complex(nu + 1.0) - log_cosh_pi(r));
  const double q = -half * half;
  CompensatedSum<Complex> acc(term);
  double max_term = std::abs(term);
  int quiet = 0;
  for (int n = 0; n < kSeriesMaxTerms; ++n) {
    term *= q / ((n + 1.0) * (nu + (n + 1.0)));
    acc.add(term);
    const double mag = std::abs(term);
    max_term = std::max(max_term, mag);
    if (mag < kSeriesRelCut * max_term) {
      if (++quiet >= kSeriesQuietRun) return acc.value();
    } else {
      quiet = 0;
    }
  }
  throw ConvergenceError("scaled_bessel_series: term cap exceeded");
}

Complex scaled_bessel_recurrence(double r, double x) {
  const Complex nu(0.0, 2.0 * r);
  int start = static_cast<int>(std::ceil(x)) + 40 + static_cast<int>(15.0 * std::cbrt(x));
  if (start % 2 == 1) ++start;
  std::vector<Complex> j(start + 2, Complex{});
  j[start] = 1e-300;
  const double two_over_x = 2.0 / x;
  for (int n = start; n >= 1; --n) {
    j[n - 1] = (nu + static_cast<double>(n)) * two_over_x * j[n] - j[n + 1];
    if (std::abs(j[n - 1]) > 1e250) {
      for (int k = n - 1; k <= start + 1; ++k) j[k] *= 1e-250;
    }
  }
  // (x/2)^nu = Gamma(nu+1) J_nu + sum_{k>=1} (nu+2k) Gamma(nu+k)/k! J_{nu+2k},
  // with every gamma factor pre-multiplied by cosh(pi r).
  Complex q = std::exp(log_gamma_complex(nu + 1.0) + log_cosh_pi(r));
  CompensatedSum<Complex> norm(q * j[0]);
  for (int k = 1; 2 * k <= start; ++k) {
    if (k > 1) q *= (nu + static_cast<double>(k - 1)) / static_cast<double>(k);
    norm.add((nu + 2.0 * k) * q * j[2 * k]);
  }
  const Complex lhs = std::exp(nu * std::log(0.5 * x));
  return j[0] * lhs / norm.value();
}

namespace {

// Coefficient polynomials U_k(p) of the large-order expansion, generated from
// U_{k+1} = p^2 (1 - p^2) U_k' / 2 + (1/8) int_0^p (1 - 5t^2) U_k(t) dt.
constexpr int kDebyeTerms = 16;

const std::vector<std::vector<double>>& debye_polynomials() {
  static const std::vector<std::vector<double>> table = [] {
    std::vector<std::vector<double>> u(kDebyeTerms);
    u[0] = {1.0};
    for (int k = 0; k + 1 < kDebyeTerms; ++k) {
      const auto& a = u[k];
      std::vector<double> next(a.size() + 3, 0.0);
      for (std::size_t i = 1; i < a.size(); ++i) {
        const double d = static_cast<double>(i) * a[i];  // coefficient of p^{i-1} in U_k'
        next[i + 1] += 0.5 * d;
        next[i + 3] -= 0.5 * d;
      }
      for (std::size_t i = 0; i < a.size(); ++i) {
        next[i + 1] += 0.125 * a[i] / static_cast<double>(i + 1);
        next[i + 3] -= 0.625 * a[i] / static_cast<double>(i + 3);
      }
      u[k + 1] = std::move(next);
    }
    return u;
  }();
  return table;
}

double eval_poly(const std::vector<double>& c, double p) {
  double v = 0.0;
  for (std::size_t i = c.size(); i-- > 0;) v = v * p + c[i];
  return v;
}

}  // namespace

Complex scaled_bessel_debye(double r, double x) {
  if (!(x > 0.0) || r == 0.0) throw DomainError("scaled_bessel_debye: need x > 0 and r != 0");
  if (r < 0.0) return std::conj(scaled_bessel_debye(-r, x));
  const double w = x / (2.0 * r);
  const double p = 1.0 / std::hypot(1.0, w);
  const Complex nu(0.0, 2.0 * r);
  const auto& u = debye_polynomials();
  CompensatedSum<Complex> series(1.0);
  Complex nu_pow = 1.0;
  for (int k = 1; k < kDebyeTerms; ++k) {
    nu_pow /= nu;
    const Complex term = eval_poly(u[k], p) * nu_pow;
    series.add(term);
    if (std::abs(term) < 1e-17) break;
  }
  const double phase = 2.0 * r * dunster_xi(w);
  const double amplitude = 2.0 / (1.0 + std::exp(-2.0 * kPi * r)) / std::pow(4.0 * r * r + x * x, 0.25);
  return dunster_constant() * amplitude * std::exp(Complex(0.0, phase)) * series.value();
}

ScaledBesselValue scaled_bessel_j_imag(double r, double x) {
  if (!(x > 0.0)) throw DomainError("scaled_bessel_j_imag: x must be > 0");
  if (!(std::abs(r) <= 1e4)) throw DomainError("scaled_bessel_j_imag: |r| must be <= 1e4");
  if (x > 1e5) throw OverflowError("scaled_bessel_j_imag: x above 1e5 guard");
  const double order = 2.0 * std::abs(r);
  Complex v;
  if (order >= 10.0) {
    v = scaled_bessel_debye(r, x);
  } else if (x <= 2.0 || 0.25 * x * x <= order) {
    v = scaled_bessel_series(r, x);
  } else {
    v = scaled_bessel_recurrence(r, x);
  }
  if (!is_finite(v)) throw OverflowError("scaled_bessel_j_imag: non-finite result");
  return {v, r, x};
}

namespace {

// B_{2j} / (2j)! for j = 1..15.
constexpr std::array<double, 15> kBernoulliOverFactorial = {
    1.0 / 6.0 / 2.0,
    -1.0 / 30.0 / 24.0,
    1.0 / 42.0 / 720.0,
    -1.0 / 30.0 / 40320.0,
    5.0 / 66.0 / 3628800.0,
    -691.0 / 2730.0 / 479001600.0,
    7.0 / 6.0 / 87178291200.0,
    -3617.0 / 510.0 / 20922789888000.0,
    43867.0 / 798.0 / 6402373705728000.0,
    -174611.0 / 330.0 / 2432902008176640000.0,
    854513.0 / 138.0 / 1.1240007277776077e21,
    -236364091.0 / 2730.0 / 6.204484017332394e23,
    8553103.0 / 6.0 / 4.0329146112660565e26,
    -23749461029.0 / 870.0 / 3.0488834461171387e29,
    8615841276005.0 / 14322.0 / 2.6525285981219107e32};

}  // namespace

Complex zeta_right_of_one(Complex s) {
  if (!(s.real() >= 1.0)) throw DomainError("zeta_right_of_one: Re(s) must be >= 1");
  const Complex sm1 = s - 1.0;
  if (std::abs(sm1) < 1e-15) throw PoleError("zeta_right_of_one: pole at s = 1");
  const int n_cut = 10 + static_cast<int>(std::ceil(0.5 * std::abs(s.imag())));
  CompensatedSum<Complex> acc;
  for (int n = 1; n < n_cut; ++n) {
    const double ln = std::log(static_cast<double>(n));
    acc.add(std::exp(-s * ln));
  }
  const double big_n = n_cut;
  const double ln_n = std::log(big_n);
  const Complex n_pow = std::exp(-s * ln_n);  // N^{-s}
  acc.add(n_pow * big_n / sm1);
  acc.add(0.5 * n_pow);
  // Tail: sum_j B_{2j}/(2j)! s(s+1)...(s+2j-2) N^{-s-2j+1}
  Complex poch = s;
  Complex npow = n_pow / big_n;
  for (std::size_t j = 0; j < kBernoulliOverFactorial.size(); ++j) {
    const Complex term = kBernoulliOverFactorial[j] * poch * npow;
    acc.add(term);
    if (std::abs(term) < 1e-18 * std::abs(acc.value())) break;
    const double m = 2.0 * static_cast<double>(j) + 1.0;
    poch *= (s + m) * (s + m + 1.0);
    npow /= big_n * big_n;
  }
  return acc.value();
}

double dunster_xi(double z) {
  if (!(z > 0.0)) throw DomainError("dunster_xi: z must be > 0");
  const double root = std::hypot(1.0, z);
  return root + std::log(z / (1.0 + root));
}

Complex dunster_constant() {
  // e^{-i pi/4} / sqrt(2 pi); reproduced by fit_dunster_constant in the tests.
  return std::exp(Complex(0.0, -0.25 * kPi)) / std::sqrt(2.0 * kPi);
}

namespace {

Complex dunster_shape(double r, double x) {
  const double phase = 2.0 * r * dunster_xi(x / (2.0 * r));
  return 2.0 * std::exp(Complex(0.0, phase)) / std::pow(4.0 * r * r + x * x, 0.25);
}

}  // namespace

Complex fit_dunster_constant(std::span<const std::pair<double, double>> points) {
  CompensatedSum<Complex> num;
  CompensatedSum<double> den;
  for (const auto& [r, x] : points) {
    const Complex shape = dunster_shape(r, x);
    num.add(std::conj(shape) * scaled_bessel_j_imag(r, x).value);
    den.add(std::norm(shape));
  }
  return num.value() / den.value();
}

DunsterApprox dunster_leading_term(double r, double x) {
  if (!(r > 0.0) || !(x > 0.0)) throw DomainError("dunster_leading_term: need r > 0 and x > 0");
  const Complex v = dunster_constant() * dunster_shape(r, x);
  // First Debye correction is bounded by 1/(12 * order) = 1/(24 r); the
  // recessive solution enters at relative size e^{-2 pi r}.
  const double rel = 1.0 / (12.0 * r) + 2.0 * std::exp(-2.0 * kPi * r);
  return {v, rel};
}

}  // namespace lowlying::specfun
