#include <cmath>
#include <sstream>
#include <vector>

#include "doctest.h"
#include "lowlying/besseltransform.hpp"
#include "lowlying/errors.hpp"

using namespace lowlying;
using namespace lowlying::besseltransform;

namespace {

// Ascending series in long double; fine for the small X used here.
double bessel_series_oracle(int n, double x) {
  long double term = 1.0L;
  for (int i = 1; i <= n; ++i) term *= (0.5L * x) / i;
  long double sum = term;
  for (int m = 1; m < 200; ++m) {
    term *= -(0.25L * x * x) / (static_cast<long double>(m) * (m + n));
    sum += term;
  }
  return static_cast<double>(sum);
}

// S_J with J_k from an independent series and h from the weights module.
double sj_oracle(double X, int T) {
  const auto w = default_weight(T);
  CompensatedSum<double> acc;
  for (int k = 0; k < 60; ++k) {
    const double x = (2.0 * k + 1.0) / (2.0 * T);
    const double J = bessel_series_oracle(2 * k + 1, X);
    const double term = J * x * x * weights::h_real(w.family, x) / std::sin(kPi * x);
    acc.add(k % 2 == 0 ? term : -term);
  }
  return T * acc.value();
}

// d^2/dx^2 [x^2 h(x)] by a five-point stencil on h_real.
double x2h_second_fd(const weights::WeightFamily& f, double x) {
  const double e = 1e-3 * std::max(x, 0.05);
  auto F = [&](double t) { return t * t * weights::h_real(f, t); };
  return (-F(x + 2 * e) + 16 * F(x + e) - 30 * F(x) + 16 * F(x - e) - F(x - 2 * e)) / (12 * e * e);
}

}  // namespace

TEST_CASE("residue calibration pins c1 = -i") {
  const auto& c = residue_constants();
  CHECK(c.c1 == Complex(0.0, -1.0));
  CHECK(c.c2 == Complex(0.0, 2.0));
  CHECK_FALSE(c.alternating);
  CHECK(c.worst_mismatch < 1e-10);
}

TEST_CASE("dj_quadrature and dj_residue_sum agree") {
  for (double X : {0.5, 1.0, 2.0, 4.0}) {
    for (int T : {5, 11}) {
      const auto q = dj_quadrature(X, T, 1e-10);
      const auto r = dj_residue_sum(X, T);
      CHECK(std::abs(q.value.real()) <= 1e-8 * (1.0 + std::abs(q.value)));
      CHECK(q.method == DJMethod::quadrature);
      CHECK(r.method == DJMethod::residue);
      CHECK_MESSAGE(std::abs(q.value - r.value) <= 1e-8 * (1.0 + std::abs(q.value)),
                    "X=" << X << " T=" << T << " quad=" << q.value << " res=" << r.value);
    }
  }
  CHECK(std::abs(dj_residue_sum(0.0, 5).value) == 0.0);
  CHECK_THROWS_AS(dj_quadrature(1.0, 5, 1e-13), DomainError);
  CHECK_THROWS_AS(dj_quadrature(0.0, 5), DomainError);
  CHECK_THROWS_AS(dj_quadrature(1.0, 4), DomainError);
}

TEST_CASE("|D_J| <= C X/T with C not growing in T") {
  std::vector<double> per_T;
  for (int T : {5, 11, 21}) {
    double worst = 0.0;
    for (double X : {0.5, 1.0, 2.0}) worst = std::max(worst, std::abs(dj_quadrature(X, T).value) * T / X);
    per_T.push_back(worst);
  }
  CHECK(std::isfinite(per_T[0]));
  CHECK(per_T[1] <= 2.0 * per_T[0]);
  CHECK(per_T[2] <= 2.0 * per_T[1]);
}

TEST_CASE("second residue family is exponentially small for X <= T") {
  double c_fit = INFINITY;
  double prev = INFINITY;
  for (int T : {5, 11, 21}) {
    double worst = 0.0;
    for (double X : {1.0, 0.5 * T, 1.0 * T}) {
      const auto f = dj_residue_families(default_weight(T), X);
      worst = std::max(worst, std::abs(f.integer_multiple) / X);
    }
    CHECK(worst < prev);
    prev = worst;
    c_fit = std::min(c_fit, -std::log(worst) / T);
  }
  CHECK(c_fit > 0.0);
}

TEST_CASE("algebraic bridge and S_J routes") {
  for (double X : {0.5, 1.0, 3.0}) {
    for (int T : {5, 11, 21}) {
      const double s = sj_direct(X, T);
      const auto f = dj_residue_families(default_weight(T), X);
      const Complex first = f.half_integer / residue_constants().c1;
      CHECK(std::abs(first.imag()) == 0.0);
      CHECK_MESSAGE(std::abs(first.real() - 2.0 * s) <= 1e-10 * std::max(1.0, std::abs(s)), "X=" << X << " T=" << T);
      CHECK_MESSAGE(std::abs(sj_alpha_expansion(X, T) - s) <= 1e-10, "X=" << X << " T=" << T);
    }
  }
  CHECK(std::abs(sj_direct(1.0, 5) - sj_oracle(1.0, 5)) <= 1e-12);
  CHECK(std::abs(sj_direct(3.0, 11) - sj_oracle(3.0, 11)) <= 1e-12);
  CHECK(sj_direct(0.0, 5) == 0.0);
  CHECK(sj_alpha_expansion(0.0, 5) == 0.0);
  CHECK_THROWS_AS(sj_alpha_expansion(1.0, 103), CostGuardError);
  SUBCASE("|S_J| <= C X/T for X <= T, C not growing") {
    double prev = INFINITY;
    for (int T : {11, 21, 41}) {
      double worst = 0.0;
      for (double X : {1.0, 0.5 * T, 1.0 * T}) worst = std::max(worst, std::abs(sj_direct(X, T)) * T / X);
      CHECK(worst <= 2.0 * prev);
      prev = worst;
    }
  }
}

TEST_CASE("dj_asymptotic") {
  CHECK_THROWS_AS(dj_asymptotic(1.0, 11), RegimeError);
  const auto a = dj_asymptotic(10.0, 11);
  const auto q = dj_quadrature(10.0, 11);
  CHECK(a.method == DJMethod::asymptotic);
  CHECK(std::abs(a.value - q.value) <= a.error_estimate + q.error_estimate);
  // The leading term already lands within a few percent.
  CHECK(std::abs(a.value - q.value) <= 0.05 * std::abs(q.value));
  SUBCASE("E_J bound grows like T^{1/2}, |N_J| <= C X/T^{1/2}") {
    std::vector<double> e_ratio, n_ratio;
    for (int T : {11, 21}) {
      double e_worst = 0.0, n_worst = 0.0;
      for (double X : {T / 4.0, 1.0 * T, 4.0 * T}) {
        const auto r = dj_asymptotic(X, T);
        e_worst = std::max(e_worst, r.error_estimate / std::sqrt(T));
        n_worst = std::max(n_worst, std::abs(r.value) * std::sqrt(T) / X);
      }
      e_ratio.push_back(e_worst);
      n_ratio.push_back(n_worst);
    }
    CHECK(e_ratio[1] <= 2.0 * e_ratio[0]);
    CHECK(e_ratio[1] >= 0.5 * e_ratio[0]);
    CHECK(n_ratio[1] <= 2.0 * n_ratio[0]);
  }
}

TEST_CASE("stationary_phase_sums") {
  CHECK_THROWS_AS(stationary_phase_sums(4.0, 21), RegimeError);
  CHECK_THROWS_AS(stationary_phase_sums(0.0, 21), DomainError);
  for (int T : {21, 41}) {
    for (double Y : {T / 10.0, T / (2.0 * kPi)}) {
      const auto s = stationary_phase_sums(Y, T);
      CHECK(std::abs(s.a_sum.imag()) <= 1e-10 * std::max(1.0, s.A));
      CHECK(std::abs(s.b_sum.real()) <= 1e-10 * std::max(1.0, s.B));
      // Independent evaluation: real forms of the paired sums, FD derivative.
      const auto w = default_weight(T);
      double a = 0.0, b = 0.0;
      for (int alpha = -(T - 1) / 2; alpha <= (T - 1) / 2; ++alpha) {
        const double ang = kPi * alpha / T;
        const double x = kPi * Y / T * std::cos(ang);
        a += std::cos(2.0 * kPi * Y * std::sin(ang)) * x * x * weights::h_real(w.family, x);
        b += std::sin(2.0 * kPi * Y * std::sin(ang)) * std::sin(ang) * x2h_second_fd(w.family, x);
      }
      a *= T;
      b *= Y / T;
      CHECK(std::abs(s.a_sum.real() - a) <= 1e-9 * std::max(s.A, 1e-12) + 1e-13);
      CHECK(std::abs(s.b_sum.imag() - b) <= 1e-5 * std::max(s.B, 1e-12));
    }
  }
}

TEST_CASE("bound_scan") {
  std::vector<GridPoint> grid;
  for (double X : {0.5, 1.0, 2.0, 4.0}) {
    for (int T : {5, 11, 21, 41}) grid.push_back({X, T});
  }
  ScanOptions serial;
  serial.exec = Exec::serial;
  const auto a = bound_scan(ScanKind::small_X, grid, serial);
  const auto b = bound_scan(ScanKind::small_X, grid);
  CHECK(a.values == b.values);
  CHECK(a.ratios == b.ratios);
  CHECK(std::isfinite(a.sup_ratio));
  CHECK(a.flagged.empty());
  double at21 = 0.0, at41 = 0.0;
  for (std::size_t i = 0; i < a.points.size(); ++i) {
    if (a.points[i].T == 21) at21 = std::max(at21, a.ratios[i]);
    if (a.points[i].T == 41) at41 = std::max(at41, a.ratios[i]);
  }
  CHECK(at41 <= 2.0 * at21);
  CHECK(a.sup_ratio > at41);

  const auto large = bound_scan(ScanKind::large_X, {{11.0 / 16.0, 11}, {11.0, 11}, {44.0, 11}});
  REQUIRE(large.flagged.size() == 1);
  CHECK(large.flagged[0].X == 11.0 / 16.0);
  CHECK(large.points.size() == 2);
  std::ostringstream csv;
  write_scan_csv(large, csv);
  const std::string text = csv.str();
  CHECK(text.rfind("which,X,T,value,bound,ratio\nlarge_X,11,11,", 0) == 0);
  CHECK(text.find("# flagged") != std::string::npos);

  const auto souped = bound_scan(ScanKind::souped_up, {{11.0, 11}, {21.0, 21}});
  CHECK(std::isfinite(souped.sup_ratio));
  CHECK(parse_scan_kind("stationary_B") == ScanKind::stationary_B);
  CHECK_THROWS_AS(parse_scan_kind("tiny"), DomainError);
  CHECK_THROWS_AS(bound_scan(ScanKind::small_X, {}), DomainError);
  CHECK_THROWS_AS(bound_scan(ScanKind::small_X, {{50.0, 11}}), DomainError);
}
