// Acceptance run: one PASS/FAIL line per criterion.
//
// Exit status is 0 when every failing criterion is listed in --expect-fail,
// 1 otherwise. Without the flag any failure gives 1.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "lowlying/arithmetic.hpp"
#include "lowlying/besseltransform.hpp"
#include "lowlying/cli.hpp"
#include "lowlying/density.hpp"
#include "lowlying/kuznetsov.hpp"
#include "lowlying/maassdata.hpp"
#include "lowlying/rmt.hpp"
#include "lowlying/specfun.hpp"
#include "lowlying/weights.hpp"

using namespace lowlying;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  int id;
  std::string name;
  double time_limit_s;
  std::function<Verdict()> run;
};

std::string sci(double v, int digits = 3) {
  std::ostringstream os;
  os << std::setprecision(digits) << v;
  return os.str();
}

// --------------------------------------------------------------- 1
Verdict residue_vs_quadrature() {
  double worst = 0.0;
  std::string where;
  for (int T : {5, 11, 21}) {
    for (double X : {0.5, 1.0, 2.0, 4.0}) {
      const auto q = besseltransform::dj_quadrature(X, T);
      const auto r = besseltransform::dj_residue_sum(X, T);
      const double rel = std::abs(q.value - r.value) / (1.0 + std::abs(q.value));
      if (rel > worst) {
        worst = rel;
        where = "(X=" + sci(X) + ", T=" + std::to_string(T) + ")";
      }
    }
  }
  return {worst <= 1e-7, "max |quad - residue|/(1+|v|) = " + sci(worst) + " at " + where + ", tol 1e-7"};
}

// --------------------------------------------------------------- 2
Verdict dirichlet_identity() {
  double worst = 0.0;
  for (int T : {5, 11, 21}) {
    for (double X : {0.5, 1.0, 3.0}) {
      worst = std::max(worst, std::abs(besseltransform::sj_direct(X, T) - besseltransform::sj_alpha_expansion(X, T)));
    }
  }
  return {worst <= 1e-10, "max |S_J direct - alpha expansion| = " + sci(worst) + ", tol 1e-10"};
}

// --------------------------------------------------------------- 3
// The half-integer residue family summed term by term from integer-order
// Bessel values, against twice the Dirichlet-kernel sum.
Verdict algebraic_bridge() {
  double worst = 0.0;
  for (int T : {5, 11, 21}) {
    const auto w = besseltransform::default_weight(T);
    for (double X : {0.5, 1.0, 3.0}) {
      double sum = 0.0;
      for (int k = 0;; ++k) {
        const double term = (k % 2 ? -1.0 : 1.0) * (2 * k + 1) * specfun::bessel_j_int(2 * k + 1, X) *
                            weights::h_T_halfint_imag(w, k);
        sum += term;
        if (2 * k + 1 > X + 10 && std::abs(term) < 1e-20 * std::max(1.0, std::abs(sum))) break;
      }
      const double sj = besseltransform::sj_direct(X, T);
      worst = std::max(worst, std::abs(sum - 2.0 * sj) / std::max(1.0, std::abs(sj)));
    }
  }
  return {worst <= 1e-10, "max |sum - 2 S_J|/max(1,|S_J|) = " + sci(worst) + ", tol 1e-10"};
}

// --------------------------------------------------------------- 4
std::map<int, double> sup_by_T(const besseltransform::ScanReport& r) {
  std::map<int, double> s;
  for (std::size_t i = 0; i < r.points.size(); ++i) s[r.points[i].T] = std::max(s[r.points[i].T], r.ratios[i]);
  return s;
}

std::string describe(const std::map<int, double>& s) {
  std::string out;
  for (const auto& [T, v] : s) out += (out.empty() ? "" : " ") + ("T=" + std::to_string(T) + ":" + sci(v));
  return out;
}

Verdict bound_scans() {
  using besseltransform::ScanKind;
  bool ok = true;
  std::string detail;
  // O(X/T) and O(X/T^{1/2}): the sup ratio may not grow by more than 2x from T = 21 to 41.
  for (auto kind : {ScanKind::small_X, ScanKind::large_X}) {
    const auto rep = besseltransform::bound_scan(kind, cli::default_scan_grid(kind, {21, 41}));
    const auto s = sup_by_T(rep);
    const bool pass = s.at(41) <= 2.0 * s.at(21);
    ok = ok && pass;
    detail += besseltransform::scan_kind_name(kind) + " [" + describe(s) + "] " + (pass ? "ok" : "GROWS") + "; ";
  }
  // Stationary sums for Y <= T/(2 pi): bounded means the sup is not attained at the largest T.
  for (auto kind : {ScanKind::stationary_A, ScanKind::stationary_B}) {
    const auto rep = besseltransform::bound_scan(kind, cli::default_scan_grid(kind, {21, 41, 81}));
    const auto s = sup_by_T(rep);
    const auto top = std::max_element(s.begin(), s.end(), [](auto& a, auto& b) { return a.second < b.second; });
    const bool pass = top->first != 81;
    ok = ok && pass;
    detail += besseltransform::scan_kind_name(kind) + " [" + describe(s) + "] " + (pass ? "ok" : "sup at T=81") + "; ";
  }
  detail.resize(detail.size() - 2);
  return {ok, detail};
}

// --------------------------------------------------------------- 5
Verdict kuznetsov_with_data(const std::optional<std::string>& explicit_path) {
  const auto path = maassdata::locate_data(explicit_path);
  if (!path) return {false, "no Maass form export found (--maass-data or MAASS_DATA_DIR); identity not checked"};
  const auto records = maassdata::parse_records(*path);
  if (records.size() < 50) {
    return {false, std::to_string(records.size()) + " forms in " + *path + ", need >= 50"};
  }
  const auto H = kuznetsov::AdmissibleWeight::gaussian(12.0, 2.0, 2);
  double worst = 0.0;
  int passed = 0;
  for (int m : {1, 2, 3}) {
    for (int n : {1, 2, 3}) {
      const auto rep = kuznetsov::check_trace_identity(m, n, H, records);
      passed += rep.pass ? 1 : 0;
      worst = std::max(worst, rep.relative_discrepancy);
    }
  }
  return {passed == 9, std::to_string(passed) + "/9 pairs within budget, " + std::to_string(records.size()) +
                           " forms, worst relative discrepancy " + sci(worst)};
}

// --------------------------------------------------------------- 6
Verdict total_mass_band() {
  std::vector<double> ratios;
  std::string detail;
  for (int T : {11, 21, 41, 81}) {
    const double r = kuznetsov::total_mass(T) / (static_cast<double>(T) * T);
    ratios.push_back(r);
    detail += "T=" + std::to_string(T) + ":" + sci(r, 4) + " ";
  }
  const auto [lo, hi] = std::minmax_element(ratios.begin(), ratios.end());
  return {*lo > 0.0 && *hi <= 2.0 * *lo, detail + "max/min " + sci(*hi / *lo, 4) + ", limit 2"};
}

// --------------------------------------------------------------- 7
Verdict rmt_suite() {
  using rmt::Group;
  const std::vector<Group> all = {Group::so_even, Group::so_odd, Group::o, Group::u, Group::sp};
  double route = 0.0;
  for (double eta : {0.5, 0.8, 1.2, 1.5, 1.9}) {
    const auto phi = rmt::make_test_function(eta);
    for (auto g : all) {
      const auto r = rmt::rmt_expected_value_routes(phi, g);
      route = std::max(route, std::abs(r.x_space - r.xi_space));
    }
  }
  double spread = 0.0;
  for (double eta : {0.5, 0.8, 0.95}) {
    const auto phi = rmt::make_test_function(eta);
    const double a = rmt::rmt_expected_value(phi, Group::o);
    const double b = rmt::rmt_expected_value(phi, Group::so_even);
    const double c = rmt::rmt_expected_value(phi, Group::so_odd);
    spread = std::max({spread, std::abs(a - b), std::abs(a - c), std::abs(b - c)});
  }
  const auto phi = rmt::make_test_function(1.5);
  const double gap =
      std::abs(rmt::rmt_expected_value(phi, Group::so_even) - rmt::rmt_expected_value(phi, Group::so_odd));
  const bool ok = route <= 1e-7 && spread <= 1e-8 && gap > 1e-3;
  return {ok, "route gap " + sci(route) + " (tol 1e-7), orthogonal spread eta<1 " + sci(spread) +
                  " (tol 1e-8), SO(even)-SO(odd) at 1.5 = " + sci(gap) + " (need > 1e-3)"};
}

// --------------------------------------------------------------- 8
Verdict density_convergence() {
  const auto scan = density::convergence_scan({11, 21, 41, 81}, {0.8, 1.2});
  auto mags = [&](double eta) {
    auto d = scan.deviations(eta);
    for (auto& v : d) v = std::abs(v);
    return d;
  };
  const auto d08 = mags(0.8), d12 = mags(1.2);
  const bool trend = density::deviations_converge(d08);
  bool bounded = true;
  for (double v : d12) bounded = bounded && std::isfinite(v) && v <= 2.0 * d12.front();
  auto list = [](const std::vector<double>& v) {
    std::string s;
    for (double x : v) s += (s.empty() ? "" : ",") + sci(x);
    return s;
  };
  return {trend && bounded, "|deviation| eta=0.8 [" + list(d08) + "] " + (trend ? "converging" : "NOT converging") +
                                "; eta=1.2 [" + list(d12) + "] " + (bounded ? "bounded" : "NOT bounded")};
}

// --------------------------------------------------------------- 9
// Frozen from 40-digit enumeration (tests/oracles/freeze_values.py).
const std::vector<double> kS11 = {
    1.0, 1.0, -1.0, -2.0, 0.38196601125010515, -1.0, 2.0489173395223053, 0.0, 1.0418890660015821,
    2.6180339887498948, -2.357872262870508, 2.0, 5.2595340479050087, -2.3568958678922094, -2.6180339887498948,
    5.6568542494923802, -3.9590650700996459, 4.5962666587138682, 0.89477111797117962, -0.7639320225002103,
    2.6920214716300959, 0.72472418188876778, -7.4583048464259126, 0.0, 8.7630668004386359, 2.1594037685268349,
    -4.6640578950147635, 5.3840429432601917, -5.1506928820374605, -0.38196601125010515, 0.52212502556005967, 0.0,
    0.75758743967983517, 3.6064327742510471, -6.1704334900859863, 11.276311449430901, 0.035116533851674699,
    -7.5088048155367836, 0.43329432349105249, 0.0, 4.0250211592267045, -2.0489173395223053, -1.2783936040553762,
    -6.2153764722065512, -2.1535838529765065, 7.2750607158240758, -5.4349781630224488, 5.6568542494923802,
    13.542128082546412, 9.6858316112863112};
const std::vector<double> kS12 = {
    1.0, -1.0, 2.0, 0.0, -3.2360679774997897, -2.0, -2.3568958678922094, 0.0, 0.0, -1.2360679774997897,
    4.7957547782315841, 0.0, -0.23963728473848897, 2.6920214716300959, 2.4721359549995794, 0.0,
    6.5607365496978318, 0.0, -1.6947516616223891, 0.0, 4.0978346790446106, 4.4574148302391298, 2.1453556586778921,
    0.0, 0.0, 0.87063843824170731, 0.0, 0.0, 2.328479867612537, 6.4721359549995794, -0.42346271540004855, 0.0,
    5.4911423910871688, -4.0797867708230903, -3.3275215358238201, 0.0, 6.6308964173733438, 2.3695460407285424,
    -6.6719723195515458, 0.0, 3.1124449264467045, 4.7137917357844189, 4.4247029162310045, 0.0, 0.0,
    7.4532390830193265, -3.5050752755331019, 0.0, -11.733233468485769, 0.0};
const std::vector<double> kS23 = {
    1.0, -1.0, -1.0, 0.0, 0.38196601125010515, 1.0, 1.1099162641747424, 0.0, 0.0, -2.6180339887498948,
    -4.4574148302391298, 0.0, -3.3359861597757729, -4.4939592074349341, -2.6180339887498948, 0.0,
    -2.343493642247427, 0.0, -1.8424316941448343, 0.0, 1.6038754716096765, -3.0924006989144051,
    7.2750607158240758, 0.0, -1.8738131458572463, 4.8200400968530584, 0.0, 0.0, 4.8236856302693863,
    0.38196601125010515, 7.5101434693892003, 0.0, 0.17631184245044386, 3.9500233798411772, 11.765337949120197,
    0.0, -8.0498191782924647, 4.8423996432998887, 3.0299278309497274, 0.0, 9.2146676089746089,
    1.1099162641747424, 5.9409406019089064, 0.0, 0.0, 4.4779018271058079, 7.5632786226118676, 0.0, 0.0,
    6.3742398974868971};

Verdict special_functions() {
  const double pi = 3.14159265358979323846;
  std::vector<std::pair<std::string, double>> errs;
  errs.emplace_back("J0(1)", std::abs(specfun::bessel_j_int(0, 1.0) - 0.7651976865579666));
  errs.emplace_back("log Gamma(1/2)",
                    std::abs(specfun::log_gamma_complex(Complex(0.5, 0.0)) - Complex(0.5723649429247001, 0.0)));
  errs.emplace_back("zeta(2)", std::abs(specfun::zeta_right_of_one(Complex(2.0, 0.0)) - Complex(pi * pi / 6.0, 0.0)));
  errs.emplace_back("xi(1)", std::abs(specfun::dunster_xi(1.0) - 0.5328399753535520));
  const std::vector<double> tol = {1e-15, 1e-15, 1e-14, 1e-15};
  bool ok = true;
  std::string detail;
  for (std::size_t i = 0; i < errs.size(); ++i) {
    ok = ok && errs[i].second <= tol[i];
    detail += errs[i].first + " err " + sci(errs[i].second, 2) + "; ";
  }
  double kl = 0.0;
  const std::vector<std::pair<std::pair<int, int>, const std::vector<double>*>> table = {
      {{1, 1}, &kS11}, {{1, 2}, &kS12}, {{2, 3}, &kS23}};
  for (const auto& [mn, vals] : table) {
    for (int c = 1; c <= 50; ++c) {
      kl = std::max(kl, std::abs(arithmetic::kloosterman_sum(mn.first, mn.second, c) - (*vals)[c - 1]));
    }
  }
  ok = ok && kl <= 1e-12;
  detail += "Kloosterman table c<=50 max err " + sci(kl, 2) + " (tol 1e-12)";
  return {ok, detail};
}

std::set<int> parse_ids(const std::string& s) {
  std::set<int> ids;
  std::istringstream is(s);
  for (std::string tok; std::getline(is, tok, ',');) {
    if (!tok.empty()) ids.insert(std::stoi(tok));
  }
  return ids;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance criteria, one line each"};
  std::string expect_fail, only, data;
  app.add_option("--expect-fail", expect_fail, "comma-separated criteria allowed to fail (known, documented)");
  app.add_option("--only", only, "comma-separated criteria to run");
  auto* data_opt = app.add_option("--maass-data", data, "Maass form export for criterion 5");
  CLI11_PARSE(app, argc, argv);
  const auto allowed = parse_ids(expect_fail);
  const auto selected = parse_ids(only);
  const std::optional<std::string> data_path = data_opt->count() ? std::optional<std::string>(data) : std::nullopt;

  const std::vector<Criterion> criteria = {
      {1, "residue/quadrature agreement", 120, residue_vs_quadrature},
      {2, "Dirichlet-kernel identity", 60, dirichlet_identity},
      {3, "algebraic bridge", 60, algebraic_bridge},
      {4, "bound scans", 600, bound_scans},
      {5, "trace formula with spectral data", 300, [&] { return kuznetsov_with_data(data_path); }},
      {6, "total mass ~ T^2", 300, total_mass_band},
      {7, "random-matrix kernels", 60, rmt_suite},
      {8, "density convergence", 1800, density_convergence},
      {9, "special-function regression", 60, special_functions},
  };

  std::vector<int> failed;
  for (const auto& c : criteria) {
    if (!selected.empty() && !selected.count(c.id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = c.run();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = secs <= c.time_limit_s;
    const bool pass = v.pass && in_time;
    if (!pass) failed.push_back(c.id);
    std::cout << (pass ? "PASS" : "FAIL") << "  " << c.id << ". " << c.name << ": " << v.detail << " ["
              << std::fixed << std::setprecision(1) << secs << " s" << (in_time ? "" : ", over the time limit")
              << "]" << std::defaultfloat;
    if (!pass && allowed.count(c.id)) std::cout << " (known failure)";
    std::cout << std::endl;
  }
  bool unexpected = false;
  for (int id : failed) unexpected = unexpected || !allowed.count(id);
  std::cout << (failed.empty() ? "all criteria pass" : std::to_string(failed.size()) + " criteria fail") << std::endl;
  return unexpected ? 1 : 0;
}
