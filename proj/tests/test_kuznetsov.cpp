#include <cmath>
#include <limits>
#include <vector>

#include "doctest.h"
#include "lowlying/arithmetic.hpp"
#include "lowlying/besseltransform.hpp"
#include "lowlying/errors.hpp"
#include "lowlying/kuznetsov.hpp"
#include "lowlying/specfun.hpp"

using namespace lowlying;
using namespace lowlying::kuznetsov;

namespace {

// Two zeros remove the residues at i/2 and 3i/2, so the c-sum converges like c^{-11/2}.
AdmissibleWeight low_gaussian() { return AdmissibleWeight::gaussian(3.0, 1.5, 2); }

double eisenstein_oracle(std::int64_t m, std::int64_t n, const AdmissibleWeight& H) {
  auto tau = [](std::int64_t k, double r) {
    const Complex v = std::pow(Complex(static_cast<double>(k)), Complex(0.0, -r)) *
                      arithmetic::divisor_sigma_complex(Complex(0.0, 2.0 * r), k);
    return v.real();
  };
  AdaptiveOptions o;
  o.initial_panels = 64;
  o.rel_tol = 1e-12;
  o.abs_tol = 1e-13;
  o.max_subdivisions = 50000;
  const auto q = integrate_adaptive(
      [&](double r) {
        return tau(m, r) * tau(n, r) * H.real(r) / std::norm(specfun::zeta_right_of_one(Complex(1.0, 2.0 * r)));
      },
      1e-9, H.support_end(1e-18), o);
  return -2.0 / kPi * q.value;
}

std::vector<maassdata::MaassFormRecord> synthetic_records(double t_max) {
  // Eigenvalues placed on the Weyl curve N(t) = t^2/12, values of unit size.
  std::vector<maassdata::MaassFormRecord> out;
  for (int k = 1;; ++k) {
    const double t = std::sqrt(12.0 * k) + 3.0;
    if (t > t_max) break;
    maassdata::MaassFormRecord u;
    u.t = t;
    u.lambdas = {{1, 1.0}, {2, std::cos(t)}, {3, std::sin(t)}};
    u.norm_sq = 1.0;
    u.norm_sq_given = true;
    out.push_back(u);
  }
  return out;
}

}  // namespace

TEST_CASE("weight catalogue") {
  const auto w = besseltransform::default_weight(11);
  const auto hT = AdmissibleWeight::spectral(w);
  const auto lg = AdmissibleWeight::log_conductor(w);
  const auto g = AdmissibleWeight::gaussian(4.0, 2.0, 2);
  for (double r : {0.3, 5.0, 17.0, 40.0}) {
    CHECK(hT.real(r) == doctest::Approx(weights::h_T_real(w, r)).epsilon(1e-15));
    CHECK(lg.real(r) == doctest::Approx(std::log1p(r * r) * weights::h_T_real(w, r)).epsilon(1e-14));
    CHECK(std::abs(g(Complex(r, 0.0)).real() - g.real(r)) <= 1e-14 * std::abs(g.real(r)));
    CHECK(g.real(r) == doctest::Approx(g.real(-r)).epsilon(1e-15));
  }
  CHECK(std::abs(g(Complex(0.0, 0.5))) < 1e-15);
  CHECK(std::abs(g(Complex(0.0, 1.5))) < 1e-15);
  CHECK(std::abs(g(Complex(0.0, 2.5))) > 1.0);
  CHECK(std::abs(hT(Complex(0.0, 0.5)).real() - weights::h_T_halfint_imag(w, 0)) < 1e-15);
  CHECK_NOTHROW(check_even(hT));
  CHECK_NOTHROW(check_even(lg));
  CHECK_NOTHROW(check_even(g));
  CHECK(g.decay_scale() == 2.0);
  CHECK(hT.support_end(1e-16) > 11.0);
  CHECK(g.support_end(1e-16) > 4.0 + 2.0 * 6.0);
  CHECK_THROWS_AS(AdmissibleWeight::gaussian(1.0, 0.0), DomainError);
  CHECK_THROWS_AS(AdmissibleWeight::gaussian(1.0, 1.0, 7), DomainError);
  CHECK(g.to_json()["kind"] == "gaussian");
  CHECK(hT.to_json()["T"] == 11);
}

TEST_CASE("engine pieces against independent quadrature") {
  const auto H = low_gaussian();
  const GeometricEngine eng(H, 36);
  for (auto [m, n] : std::vector<std::pair<int, int>>{{1, 1}, {2, 3}, {4, 9}}) {
    const double o = eisenstein_oracle(m, n, H);
    CHECK(std::abs(eng.eisenstein(m, n) - o) <= 1e-10 * (1.0 + std::abs(o)));
  }
  AdaptiveOptions o;
  o.initial_panels = 64;
  o.rel_tol = 1e-12;
  o.abs_tol = 1e-13;
  o.max_subdivisions = 50000;
  for (double x : {0.05, 1.0, 7.0, 24.0}) {
    const auto q = integrate_adaptive(
        [&](double r) { return r * H.real(r) * specfun::scaled_bessel_j_imag(r, x).value.imag(); }, 0.0,
        H.support_end(1e-18), o);
    const auto [I, e] = eng.kernel(x);
    CHECK(std::abs(I.real()) == 0.0);
    CHECK(std::abs(I.imag() - 2.0 * q.value) <= 1e-11 + e);
  }
  // h_T kernel is D_J.
  const auto w = besseltransform::default_weight(11);
  const GeometricEngine ht(AdmissibleWeight::spectral(w), 4);
  for (double x : {0.5, 3.0, 25.0}) {
    const auto q = besseltransform::dj_quadrature(w, x, 1e-11);
    CHECK(std::abs(ht.kernel(x).first - q.value) < 1e-9);
  }
  // Delta term: (2/pi^2) int r H tanh(pi r).
  AdaptiveOptions od;
  od.rel_tol = 1e-13;
  od.abs_tol = 0.0;
  od.initial_panels = 32;
  const auto d = integrate_adaptive([&](double r) { return r * H.real(r) * std::tanh(kPi * r); }, 0.0, 40.0, od);
  CHECK(eng.delta_integral() == doctest::Approx(2.0 / (kPi * kPi) * d.value).epsilon(1e-11));
}

TEST_CASE("geometric side: structure, Hecke relations, vanishing below the spectrum") {
  const auto H = low_gaussian();
  const GeometricEngine eng(H, 9);
  const auto g11 = eng.side(1, 1), g12 = eng.side(1, 2), g22 = eng.side(2, 2), g41 = eng.side(4, 1);
  const auto g23 = eng.side(2, 3), g61 = eng.side(6, 1), g33 = eng.side(3, 3), g91 = eng.side(9, 1);
  CHECK(g12.delta_term == 0.0);
  CHECK(g41.delta_term == 0.0);
  for (const auto* g : {&g11, &g12, &g22, &g23, &g33}) {
    CHECK(std::abs(g->kloosterman_term.imag()) <= g->error_budget);
    CHECK(g->c_max == 1000);
  }
  // The spectral side obeys the Hecke relations, so the geometric side must.
  auto close = [](double a, double b, double budget) { return std::abs(a - b) <= budget + 1e-12 * (std::abs(a) + 1.0); };
  CHECK(close(g22.total(), g41.total() + g11.total(), g22.error_budget + g41.error_budget + g11.error_budget));
  CHECK(close(g23.total(), g61.total(), g23.error_budget + g61.error_budget));
  CHECK(close(g33.total(), g91.total() + g11.total(), g33.error_budget + g91.error_budget + g11.error_budget));
  // H is concentrated well below t_1 = 9.53..., the smallest level-1 spectral
  // parameter, so the three terms (each of size ~10^2) cancel almost exactly.
  CHECK(g11.delta_term > 300.0);
  CHECK(std::abs(g11.total()) < 1e-5 * g11.delta_term);
  CHECK(std::abs(g12.total()) < 1e-5 * std::abs(g12.eisenstein_term));

  // Same relations for h_T.
  const GeometricEngine ht(AdmissibleWeight::spectral(besseltransform::default_weight(11)), 9);
  const auto h11 = ht.side(1, 1), h22 = ht.side(2, 2), h41 = ht.side(4, 1);
  CHECK(std::abs(h22.total() - h41.total() - h11.total()) <= 1e-9 * h11.total());
}

TEST_CASE("linearity in H") {
  const auto H1 = AdmissibleWeight::gaussian(12.0, 2.0, 2);
  const auto H2 = AdmissibleWeight::gaussian(20.0, 3.0, 2);
  const auto Hs = AdmissibleWeight::gaussian_mixture({{0.7, 12.0, 2.0}, {-1.3, 20.0, 3.0}}, 2);
  for (auto [m, n] : std::vector<std::pair<int, int>>{{1, 1}, {1, 2}}) {
    const auto a = geometric_side(m, n, H1), b = geometric_side(m, n, H2), s = geometric_side(m, n, Hs);
    const double combo = 0.7 * a.total() - 1.3 * b.total();
    CHECK(std::abs(s.total() - combo) <= 1e-9 * (std::abs(a.delta_term) + std::abs(a.eisenstein_term) + 1.0));
    CHECK(std::abs(s.eisenstein_term - (0.7 * a.eisenstein_term - 1.3 * b.eisenstein_term)) <=
          1e-9 * std::abs(a.eisenstein_term));
  }
}

TEST_CASE("tail budgeting") {
  // Without zeros the first residue makes the c-sum converge like c^{-3/2}.
  CHECK_THROWS_AS(geometric_side(1, 1, AdmissibleWeight::gaussian(3.0, 1.5, 0), 1000, 1e-8), BudgetError);
  GeometricOptions o;
  o.stop_when_converged = true;
  const GeometricEngine eng(AdmissibleWeight::log_conductor(besseltransform::default_weight(11)), 1, o);
  const auto g = eng.side(1, 1);
  CHECK(g.c_max < 1000);
  CHECK(g.kloosterman_tail < 1e-11 * g.delta_term);
  const auto full = geometric_side(1, 1, AdmissibleWeight::log_conductor(besseltransform::default_weight(11)));
  CHECK(std::abs(full.total() - g.total()) <= full.error_budget + g.error_budget);
}

TEST_CASE("serial and parallel agree bitwise") {
  GeometricOptions s, p;
  s.exec = Exec::serial;
  p.exec = Exec::parallel;
  const auto H = AdmissibleWeight::spectral(besseltransform::default_weight(11));
  const auto a = GeometricEngine(H, 6, s).side(2, 3), b = GeometricEngine(H, 6, p).side(2, 3);
  CHECK(a.total() == b.total());
  CHECK(a.kloosterman_term == b.kloosterman_term);
}

TEST_CASE("total mass and averages") {
  std::vector<double> ratio;
  for (int T : {11, 21, 41}) {
    const auto g = geometric_side(1, 1, AdmissibleWeight::spectral(besseltransform::default_weight(T)));
    CHECK(g.total() > 0.0);
    ratio.push_back(g.total() / (T * T));
    CHECK(g.delta_term / (T * T) == doctest::Approx(5.3203355).epsilon(1e-6));
    CHECK(std::abs(g.eisenstein_term) <= 4.0 * T * std::log(T));
    CHECK(std::abs(g.total() / (T * T) - total_mass(T) / (T * T)) < 1e-15);
  }
  for (std::size_t i = 1; i < ratio.size(); ++i) CHECK(std::abs(ratio[i] / ratio[i - 1] - 1.0) <= 0.25);
  CHECK(averaged_eigenvalue(1, 21) == 1.0);
  for (int p : {2, 3, 5, 7}) {
    const double a = averaged_eigenvalue(p, 21);
    CHECK(std::abs(a) <= 21.0 * std::log(21.0) / std::sqrt(p) / (21.0 * 21.0));
  }
  // Kloosterman summands are O(1/c) for m = n = 1.
  const GeometricEngine eng(AdmissibleWeight::spectral(besseltransform::default_weight(21)), 1);
  double sup = 0.0;
  for (int c = 1; c <= 200; ++c) {
    const double term = std::abs(arithmetic::kloosterman_sum(1, 1, c) / c * eng.kernel(4.0 * kPi / c).first);
    sup = std::max(sup, term * c);
  }
  CHECK(sup < 1.0);
}

TEST_CASE("spectral side and identity report") {
  const auto H = AdmissibleWeight::gaussian(12.0, 2.0, 2);
  const auto empty = spectral_side(1, 1, H, {});
  CHECK(empty.sum == 0.0);
  CHECK_FALSE(empty.tail_usable);

  const auto data = synthetic_records(30.0);
  REQUIRE(data.size() > 40);
  const auto s = spectral_side(1, 1, H, data);
  CHECK(s.tail_usable);
  CHECK(s.sum > 0.0);
  CHECK(s.tail_budget < 1e-8 * s.sum);
  CHECK_THROWS_AS(spectral_side(1, 5, H, data), DomainError);

  const auto sample = maassdata::parse_records(std::string(LOWLYING_TEST_DATA) + "/sample3.csv");
  const auto w5 = AdmissibleWeight::spectral(besseltransform::default_weight(5));
  CHECK(spectral_side(1, 1, w5, sample).sum > 0.0);

  // Synthetic data is not a spectrum: the identity must fail loudly.
  const auto rep = check_trace_identity(1, 1, H, data);
  CHECK_FALSE(rep.pass);
  CHECK_THROWS_AS(verify_trace_identity(1, 1, H, data), VerificationError);
  const auto j = to_json(rep);
  CHECK(j["m"] == 1);
  CHECK(j["geometric"].contains("delta"));
  CHECK(j["geometric"].contains("eisenstein"));
  CHECK(j["geometric"].contains("kloosterman"));
  CHECK(j["budgets"].contains("geometric"));
  CHECK(j["pass"] == false);
  const auto rep0 = check_trace_identity(1, 1, H, {});
  CHECK_FALSE(rep0.pass);
  CHECK(to_json(rep0)["budgets"]["spectral_tail_usable"] == false);
}
