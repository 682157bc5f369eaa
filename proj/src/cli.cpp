#include "lowlying/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "lowlying/density.hpp"
#include "lowlying/errors.hpp"
#include "lowlying/kuznetsov.hpp"
#include "lowlying/maassdata.hpp"
#include "lowlying/parallel.hpp"
#include "lowlying/rmt.hpp"
#include "lowlying/weights.hpp"

namespace lowlying::cli {

namespace {

class UsageError : public Error {
 public:
  using Error::Error;
};

using nlohmann::json;

const std::map<std::string, Command>& command_table() {
  static const std::map<std::string, Command> t = {
      {"bessel-int", Command::bessel_int}, {"bound-scan", Command::bound_scan},
      {"trace-verify", Command::trace_verify}, {"total-mass", Command::total_mass},
      {"avg-lambda", Command::avg_lambda}, {"density", Command::density},
      {"converge", Command::converge}, {"kernels", Command::kernels},
      {"validate-data", Command::validate_data}};
  return t;
}

// Raw command-line values plus the options, so that "given on the command
// line" can be told apart from "left at its default".
struct Flags {
  std::string config;
  int M = 8;
  double bump_halfwidth = 0.125;
  std::vector<int> T;
  std::vector<double> X, eta;
  int c_max = 1000;
  double tol = 1e-8;
  int threads = 0;
  std::string data, output;
  std::string method, which, group, split_output;
  std::vector<std::int64_t> m, n;
  double center = 0.0, width = 0.0;
  int zeros = 0;
  std::map<std::string, CLI::Option*> opts;
  bool given(const std::string& key) const {
    const auto it = opts.find(key);
    return it != opts.end() && it->second->count() > 0;
  }
};

// Which list/scalar inputs each command reads; anything else is rejected.
struct Schema {
  bool T = false, X = false, eta = false, m = false, n = false, data = false;
  bool method = false, which = false, group = false, split = false, gaussian = false;
  bool T_required = false, X_required = false, eta_required = false;
};

Schema schema_for(Command c) {
  Schema s;
  switch (c) {
    case Command::bessel_int:
      s.T = s.X = s.method = true;
      s.T_required = s.X_required = true;
      break;
    case Command::bound_scan:
      s.T = s.X = s.which = true;
      s.T_required = true;
      break;
    case Command::trace_verify:
      s.m = s.n = s.data = s.gaussian = true;
      break;
    case Command::total_mass:
      s.T = s.T_required = true;
      break;
    case Command::avg_lambda:
      s.T = s.m = true;
      s.T_required = true;
      break;
    case Command::density:
      s.T = s.eta = s.split = true;
      s.T_required = s.eta_required = true;
      break;
    case Command::converge:
      s.T = s.eta = true;
      s.T_required = s.eta_required = true;
      break;
    case Command::kernels:
      s.eta = s.group = true;
      s.eta_required = true;
      break;
    case Command::validate_data:
      s.data = true;
      break;
  }
  return s;
}

template <class V>
std::vector<V> json_list(const json& j, const std::string& key) {
  if (j.is_array()) return j.get<std::vector<V>>();
  if (j.is_number()) return {j.get<V>()};
  throw UsageError("config: '" + key + "' must be a number or an array of numbers");
}

template <class V>
V env_value(const char* name, V fallback) {
  const char* raw = std::getenv(name);
  if (raw == nullptr || *raw == '\0') return fallback;
  std::istringstream is(raw);
  V v{};
  is >> v;
  if (is.fail() || !is.eof()) throw UsageError(std::string("environment variable ") + name + " is not a valid number");
  return v;
}

void apply_env(RunConfig& cfg) {
  cfg.M = env_value("LOWLYING_M", cfg.M);
  cfg.bump_halfwidth = env_value("LOWLYING_BUMP_HALFWIDTH", cfg.bump_halfwidth);
  cfg.c_max = env_value("LOWLYING_C_MAX", cfg.c_max);
  cfg.tol = env_value("LOWLYING_TOL", cfg.tol);
  cfg.threads = env_value("LOWLYING_THREADS", cfg.threads);
}

void apply_config_file(RunConfig& cfg, const std::string& path, const Schema& s) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open config file " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw UsageError("config " + path + ": " + e.what());
  }
  if (!j.is_object()) throw UsageError("config " + path + ": top level must be an object");
  static const std::set<std::string> common = {"M", "bump_halfwidth", "c_max", "tol", "threads", "output"};
  std::set<std::string> allowed = common;
  if (s.T) allowed.insert("T");
  if (s.X) allowed.insert("X");
  if (s.eta) allowed.insert("eta");
  if (s.m) allowed.insert("m");
  if (s.n) allowed.insert("n");
  if (s.data) allowed.insert("maass_data");
  if (s.method) allowed.insert("method");
  if (s.which) allowed.insert("which");
  if (s.group) allowed.insert("group");
  if (s.split) allowed.insert("split_output");
  if (s.gaussian) allowed.insert({"center", "width", "zeros"});
  allowed.insert("weight");
  for (const auto& [key, _] : j.items()) {
    if (!allowed.count(key)) {
      throw UsageError("config " + path + ": key '" + key + "' is not valid for " + command_name(cfg.command));
    }
  }
  try {
    if (j.contains("weight")) {
      const auto& w = j["weight"];
      for (const auto& [key, _] : w.items()) {
        if (key != "M" && key != "bump_halfwidth") throw UsageError("config " + path + ": unknown weight key '" + key + "'");
      }
      if (w.contains("M")) cfg.M = w["M"].get<int>();
      if (w.contains("bump_halfwidth")) cfg.bump_halfwidth = w["bump_halfwidth"].get<double>();
    }
    if (j.contains("M")) cfg.M = j["M"].get<int>();
    if (j.contains("bump_halfwidth")) cfg.bump_halfwidth = j["bump_halfwidth"].get<double>();
    if (j.contains("c_max")) cfg.c_max = j["c_max"].get<int>();
    if (j.contains("tol")) cfg.tol = j["tol"].get<double>();
    if (j.contains("threads")) cfg.threads = j["threads"].get<int>();
    if (j.contains("output")) cfg.output_path = j["output"].get<std::string>();
    if (j.contains("T")) cfg.T_list = json_list<int>(j["T"], "T");
    if (j.contains("X")) cfg.X_list = json_list<double>(j["X"], "X");
    if (j.contains("eta")) cfg.eta_list = json_list<double>(j["eta"], "eta");
    if (j.contains("m")) cfg.m_list = json_list<std::int64_t>(j["m"], "m");
    if (j.contains("n")) cfg.n_list = json_list<std::int64_t>(j["n"], "n");
    if (j.contains("maass_data")) cfg.data_path = j["maass_data"].get<std::string>();
    if (j.contains("method")) cfg.method = j["method"].get<std::string>();
    if (j.contains("which")) cfg.which = j["which"].get<std::string>();
    if (j.contains("group")) cfg.group = j["group"].get<std::string>();
    if (j.contains("split_output")) cfg.split_output = j["split_output"].get<std::string>();
    if (j.contains("center")) cfg.center = j["center"].get<double>();
    if (j.contains("width")) cfg.width = j["width"].get<double>();
    if (j.contains("zeros")) cfg.zeros = j["zeros"].get<int>();
  } catch (const json::exception& e) {
    throw UsageError("config " + path + ": " + e.what());
  }
}

void apply_flags(RunConfig& cfg, const Flags& f) {
  if (f.given("M")) cfg.M = f.M;
  if (f.given("bump-halfwidth")) cfg.bump_halfwidth = f.bump_halfwidth;
  if (f.given("c-max")) cfg.c_max = f.c_max;
  if (f.given("tol")) cfg.tol = f.tol;
  if (f.given("threads")) cfg.threads = f.threads;
  if (f.given("output")) cfg.output_path = f.output;
  if (f.given("T")) cfg.T_list = f.T;
  if (f.given("X")) cfg.X_list = f.X;
  if (f.given("eta")) cfg.eta_list = f.eta;
  if (f.given("m")) cfg.m_list = f.m;
  if (f.given("n")) cfg.n_list = f.n;
  if (f.given("maass-data")) cfg.data_path = f.data;
  if (f.given("method")) cfg.method = f.method;
  if (f.given("which")) cfg.which = f.which;
  if (f.given("group")) cfg.group = f.group;
  if (f.given("split-output")) cfg.split_output = f.split_output;
  if (f.given("center")) cfg.center = f.center;
  if (f.given("width")) cfg.width = f.width;
  if (f.given("zeros")) cfg.zeros = f.zeros;
}

void validate(const RunConfig& cfg, const Schema& s) {
  if (cfg.M < 8 || cfg.M % 2 != 0) throw UsageError("M must be even and >= 8");
  if (!(cfg.bump_halfwidth > 0.0 && cfg.bump_halfwidth <= 0.125)) throw UsageError("bump_halfwidth must lie in (0, 1/8]");
  if (cfg.c_max < 1) throw UsageError("c_max must be >= 1");
  if (!(cfg.tol > 0.0 && cfg.tol < 1.0)) throw UsageError("tol must lie in (0, 1)");
  if (cfg.threads < 0) throw UsageError("threads must be >= 0");
  if (s.T_required && cfg.T_list.empty()) throw UsageError(command_name(cfg.command) + " needs --T");
  if (s.X_required && cfg.X_list.empty()) throw UsageError(command_name(cfg.command) + " needs --X");
  if (s.eta_required && cfg.eta_list.empty()) throw UsageError(command_name(cfg.command) + " needs --eta");
  for (int T : cfg.T_list) {
    if (T < 3 || T % 2 == 0) throw UsageError("every T must be odd and >= 3 (got " + std::to_string(T) + ")");
  }
  for (double X : cfg.X_list) {
    if (!(X > 0.0) || !std::isfinite(X)) throw UsageError("every X must be positive");
  }
  for (double e : cfg.eta_list) {
    if (!(e > 0.0 && e < 2.0)) throw UsageError("every eta must lie in (0, 2)");
  }
  if (s.m) {
    for (auto v : cfg.m_list) {
      if (v < 1) throw UsageError("m must be >= 1");
    }
  }
  if (s.n) {
    for (auto v : cfg.n_list) {
      if (v < 1) throw UsageError("n must be >= 1");
    }
  }
  if (s.method) {
    static const std::set<std::string> ok = {"quadrature", "residue", "asymptotic", "all"};
    if (!ok.count(cfg.method)) throw UsageError("method must be quadrature, residue, asymptotic or all");
  }
  if (s.which) {
    try {
      besseltransform::parse_scan_kind(cfg.which);
    } catch (const DomainError& e) {
      throw UsageError(e.what());
    }
  }
  if (s.group && cfg.group != "all") {
    try {
      rmt::parse_group(cfg.group);
    } catch (const DomainError& e) {
      throw UsageError(e.what());
    }
  }
  if (s.gaussian) {
    if (!(cfg.width > 0.0)) throw UsageError("width must be positive");
    if (cfg.zeros < 0 || cfg.zeros > 4) throw UsageError("zeros must lie in [0, 4]");
  }
}

std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

weights::SpectralWeight weight_for(const RunConfig& cfg, int T) {
  return weights::make_spectral_weight(weights::make_weight_family(cfg.M, cfg.bump_halfwidth), T);
}

// Each command writes its data to `out` and returns {exit code, summary}.
struct Outcome {
  int code = 0;
  std::string summary;
};

std::string method_name(besseltransform::DJMethod m) {
  switch (m) {
    case besseltransform::DJMethod::quadrature: return "quadrature";
    case besseltransform::DJMethod::residue: return "residue";
    case besseltransform::DJMethod::asymptotic: return "asymptotic";
  }
  return "?";
}

Outcome cmd_bessel_int(const RunConfig& cfg, std::ostream& out) {
  using namespace besseltransform;
  out << "method,X,T,value_re,value_im,error_estimate\n";
  const bool all = cfg.method == "all";
  double worst = 0.0;
  bool failed = false;
  std::size_t rows = 0;
  auto emit = [&](const DJResult& r) {
    out << method_name(r.method) << ',' << fmt(r.X) << ',' << r.T << ',' << fmt(r.value.real()) << ','
        << fmt(r.value.imag()) << ',' << fmt(r.error_estimate) << '\n';
    ++rows;
  };
  for (int T : cfg.T_list) {
    const auto w = weight_for(cfg, T);
    for (double X : cfg.X_list) {
      std::optional<DJResult> q, r, a;
      std::string asym_note;
      if (all || cfg.method == "quadrature") q = dj_quadrature(w, X);
      if (all || cfg.method == "residue") r = dj_residue_sum(w, X);
      if (all || cfg.method == "asymptotic") {
        try {
          a = dj_asymptotic(w, X);
        } catch (const RegimeError& e) {
          if (!all) throw;
          asym_note = e.what();
        }
      }
      for (const auto* p : {&q, &r, &a}) {
        if (*p) emit(**p);
      }
      if (!all) continue;
      const double d_qr = std::abs(q->value - r->value);
      const double rel = d_qr / (1.0 + std::abs(q->value));
      worst = std::max(worst, rel);
      if (d_qr > 1e-7 * (1.0 + std::abs(q->value))) failed = true;
      out << "# X=" << fmt(X) << " T=" << T << " |quadrature-residue|=" << fmt(d_qr);
      if (a) {
        out << " |quadrature-asymptotic|=" << fmt(std::abs(q->value - a->value))
            << " |residue-asymptotic|=" << fmt(std::abs(r->value - a->value));
      } else {
        out << " asymptotic: " << asym_note;
      }
      out << '\n';
    }
  }
  std::ostringstream s;
  s << "bessel-int: " << rows << " results";
  if (all) s << ", max |quadrature-residue|/(1+|v|) = " << std::setprecision(3) << worst << (failed ? " FAIL" : " ok");
  return {failed ? 1 : 0, s.str()};
}

Outcome cmd_bound_scan(const RunConfig& cfg, std::ostream& out) {
  using namespace besseltransform;
  const ScanKind kind = parse_scan_kind(cfg.which);
  std::vector<GridPoint> grid;
  if (cfg.X_list.empty()) {
    grid = default_scan_grid(kind, cfg.T_list);
  } else {
    for (int T : cfg.T_list) {
      for (double X : cfg.X_list) grid.push_back({X, T});
    }
  }
  ScanOptions opts;
  opts.M = cfg.M;
  opts.bump_halfwidth = cfg.bump_halfwidth;
  const auto report = bound_scan(kind, grid, opts);
  write_scan_csv(report, out);
  std::ostringstream s;
  s << "bound-scan " << cfg.which << ": " << report.points.size() << " points, " << report.flagged.size()
    << " outside regime, sup ratio " << std::setprecision(6) << report.sup_ratio;
  return {0, s.str()};
}

Outcome cmd_trace_verify(const RunConfig& cfg, std::ostream& out) {
  const auto path = maassdata::locate_data(cfg.data_path);
  if (!path) throw UsageError("trace-verify needs Maass form data (--maass-data or MAASS_DATA_DIR)");
  const auto records = maassdata::parse_records(*path);
  const auto H = kuznetsov::AdmissibleWeight::gaussian(cfg.center, cfg.width, cfg.zeros);
  json arr = json::array();
  std::size_t passed = 0, total = 0;
  double worst = 0.0;
  for (auto m : cfg.m_list) {
    for (auto n : cfg.n_list) {
      const auto rep = kuznetsov::check_trace_identity(m, n, H, records, cfg.c_max, cfg.tol);
      arr.push_back(kuznetsov::to_json(rep));
      ++total;
      if (rep.pass) ++passed;
      worst = std::max(worst, rep.relative_discrepancy);
    }
  }
  out << arr.dump(2) << '\n';
  std::ostringstream s;
  s << "trace-verify: " << passed << "/" << total << " pairs within budget over " << records.size()
    << " forms, worst relative discrepancy " << std::setprecision(3) << worst;
  return {passed == total ? 0 : 1, s.str()};
}

Outcome cmd_total_mass(const RunConfig& cfg, std::ostream& out) {
  out << "T,total_mass,ratio,delta,eisenstein,kloosterman,error_budget\n";
  double lo = INFINITY, hi = 0.0;
  for (int T : cfg.T_list) {
    const auto H = kuznetsov::AdmissibleWeight::spectral(weight_for(cfg, T));
    const int c_max = std::max(cfg.c_max, kuznetsov::default_c_max(1, 1, T));
    const auto g = kuznetsov::geometric_side(1, 1, H, c_max, cfg.tol);
    const double mass = g.total();
    const double ratio = mass / (static_cast<double>(T) * T);
    lo = std::min(lo, ratio);
    hi = std::max(hi, ratio);
    out << T << ',' << fmt(mass) << ',' << fmt(ratio) << ',' << fmt(g.delta_term) << ',' << fmt(g.eisenstein_term)
        << ',' << fmt(g.kloosterman_term.real()) << ',' << fmt(g.error_budget) << '\n';
  }
  const bool ok = lo > 0.0 && hi <= 2.0 * lo;
  std::ostringstream s;
  s << "total-mass: ratio/T^2 in [" << std::setprecision(6) << lo << ", " << hi << "]"
    << (ok ? " within" : " outside") << " a factor-2 band";
  return {ok ? 0 : 1, s.str()};
}

Outcome cmd_avg_lambda(const RunConfig& cfg, std::ostream& out) {
  out << "T,m,avg_lambda,error_budget\n";
  std::size_t rows = 0;
  for (int T : cfg.T_list) {
    const auto H = kuznetsov::AdmissibleWeight::spectral(weight_for(cfg, T));
    std::int64_t max_m = 1;
    for (auto m : cfg.m_list) max_m = std::max(max_m, m);
    const int c_max = std::max(cfg.c_max, kuznetsov::default_c_max(max_m, 1, T));
    kuznetsov::GeometricOptions opts;
    opts.c_max = c_max;
    opts.tol = cfg.tol;
    const kuznetsov::GeometricEngine engine(H, max_m, opts);
    const auto one = engine.side(1, 1);
    const double mass = one.total();
    for (auto m : cfg.m_list) {
      const auto g = m == 1 ? one : engine.side(m, 1);
      const double avg = g.total() / mass;
      const double budget = (g.error_budget + std::abs(avg) * one.error_budget) / mass;
      out << T << ',' << m << ',' << fmt(avg) << ',' << fmt(budget) << '\n';
      ++rows;
    }
  }
  return {0, "avg-lambda: " + std::to_string(rows) + " averages"};
}

density::DensityOptions density_options(const RunConfig& cfg) {
  density::DensityOptions o;
  o.c_max = cfg.c_max;
  o.tol = cfg.tol;
  return o;
}

Outcome cmd_density(const RunConfig& cfg, std::ostream& out) {
  const auto scan = density::convergence_scan(cfg.T_list, cfg.eta_list, cfg.M, cfg.bump_halfwidth, density_options(cfg));
  density::write_density_csv(out, scan.reports);
  if (!cfg.split_output.empty()) {
    std::ofstream os(cfg.split_output);
    if (!os) throw UsageError("cannot open " + cfg.split_output);
    density::write_split_csv(os, scan.splits);
  }
  double worst = 0.0;
  for (const auto& r : scan.reports) worst = std::max(worst, std::abs(r.deviation));
  std::ostringstream s;
  s << "density: " << scan.reports.size() << " reports, max |deviation| " << std::setprecision(4) << worst;
  return {0, s.str()};
}

Outcome cmd_converge(const RunConfig& cfg, std::ostream& out) {
  const auto scan = density::convergence_scan(cfg.T_list, cfg.eta_list, cfg.M, cfg.bump_halfwidth, density_options(cfg));
  density::write_density_csv(out, scan.reports);
  bool ok = true;
  std::size_t checked = 0;
  for (double eta : cfg.eta_list) {
    const auto dev = scan.deviations(eta);
    std::vector<double> mag(dev.size());
    std::transform(dev.begin(), dev.end(), mag.begin(), [](double d) { return std::abs(d); });
    out << "# eta=" << std::setprecision(6) << eta << " |deviation|:";
    for (double d : mag) out << ' ' << std::setprecision(6) << d;
    if (eta < density::kBasicEtaThreshold && mag.size() >= 2) {
      const bool c = density::deviations_converge(mag);
      ok = ok && c;
      ++checked;
      out << (c ? " converging" : " NOT converging");
    } else {
      out << " (not checked)";
    }
    out << '\n';
  }
  std::ostringstream s;
  s << "converge: " << checked << " eta columns checked, " << (ok ? "all converging" : "FAIL");
  return {ok ? 0 : 1, s.str()};
}

Outcome cmd_kernels(const RunConfig& cfg, std::ostream& out) {
  std::vector<rmt::Group> groups;
  if (cfg.group == "all") {
    groups = {rmt::Group::so_even, rmt::Group::so_odd, rmt::Group::o, rmt::Group::u, rmt::Group::sp};
  } else {
    groups = {rmt::parse_group(cfg.group)};
  }
  out << "group,eta,x_space,xi_space,difference,orthogonal_prediction\n";
  double worst = 0.0;
  for (double eta : cfg.eta_list) {
    const auto phi = rmt::make_test_function(eta);
    const double prediction = rmt::test_function_eval(phi, rmt::Space::xi_space, 0.0) +
                              0.5 * rmt::test_function_eval(phi, rmt::Space::x_space, 0.0);
    for (auto g : groups) {
      const auto r = rmt::rmt_expected_value_routes(phi, g);
      const double d = std::abs(r.x_space - r.xi_space);
      worst = std::max(worst, d);
      out << rmt::group_name(g) << ',' << fmt(eta) << ',' << fmt(r.x_space) << ',' << fmt(r.xi_space) << ','
          << fmt(d) << ',' << fmt(prediction) << '\n';
    }
  }
  const bool ok = worst <= 1e-7;
  std::ostringstream s;
  s << "kernels: max route difference " << std::setprecision(3) << worst << (ok ? " ok" : " FAIL");
  return {ok ? 0 : 1, s.str()};
}

std::string check_name(maassdata::Check c) {
  switch (c) {
    case maassdata::Check::pass: return "pass";
    case maassdata::Check::fail: return "fail";
    case maassdata::Check::not_applicable: return "n/a";
  }
  return "?";
}

Outcome cmd_validate_data(const RunConfig& cfg, std::ostream& out) {
  const auto path = maassdata::locate_data(cfg.data_path);
  if (!path) throw UsageError("validate-data needs a file (--maass-data or MAASS_DATA_DIR)");
  const auto records = maassdata::parse_records(*path);
  const auto rep = maassdata::validate_records(records);
  out << "t,parity,normalization,kim_sarnak,multiplicativity,spectral_parameter\n";
  for (std::size_t i = 0; i < rep.records.size(); ++i) {
    const auto& v = rep.records[i];
    out << fmt(v.t) << ',' << maassdata::parity_name(records[i].parity) << ',' << check_name(v.normalization) << ','
        << check_name(v.kim_sarnak) << ',' << check_name(v.multiplicativity) << ','
        << check_name(v.spectral_parameter) << '\n';
    for (const auto& msg : v.messages) out << "# t=" << fmt(v.t) << ": " << msg << '\n';
  }
  if (rep.fit_available) {
    out << "# count fit a=" << fmt(rep.fit_a) << " b=" << fmt(rep.fit_b) << " c=" << fmt(rep.fit_c)
        << " rms=" << fmt(rep.fit_rms_residual) << '\n';
  }
  std::size_t bad = 0;
  for (const auto& v : rep.records) bad += v.ok() ? 0 : 1;
  std::ostringstream s;
  s << "validate-data: " << records.size() << " records from " << *path << ", " << bad << " failing";
  return {rep.all_pass ? 0 : 1, s.str()};
}

Outcome dispatch(const RunConfig& cfg, std::ostream& out) {
  switch (cfg.command) {
    case Command::bessel_int: return cmd_bessel_int(cfg, out);
    case Command::bound_scan: return cmd_bound_scan(cfg, out);
    case Command::trace_verify: return cmd_trace_verify(cfg, out);
    case Command::total_mass: return cmd_total_mass(cfg, out);
    case Command::avg_lambda: return cmd_avg_lambda(cfg, out);
    case Command::density: return cmd_density(cfg, out);
    case Command::converge: return cmd_converge(cfg, out);
    case Command::kernels: return cmd_kernels(cfg, out);
    case Command::validate_data: return cmd_validate_data(cfg, out);
  }
  return {2, "unknown command"};
}

void add_options(CLI::App* sub, Flags& f, const Schema& s) {
  auto& o = f.opts;
  o["config"] = sub->add_option("--config", f.config, "JSON config file");
  o["M"] = sub->add_option("--M", f.M, "order of the zero of h at 0 (even, >= 8)");
  o["bump-halfwidth"] = sub->add_option("--bump-halfwidth", f.bump_halfwidth, "bump support half-width, <= 1/8");
  o["c-max"] = sub->add_option("--c-max", f.c_max, "minimum Kloosterman modulus cutoff");
  o["tol"] = sub->add_option("--tol", f.tol, "geometric-side tolerance");
  o["threads"] = sub->add_option("--threads", f.threads, "worker threads (0: all cores)");
  o["output"] = sub->add_option("--output,-o", f.output, "output file (default stdout)");
  if (s.T) o["T"] = sub->add_option("--T,--T-list", f.T, "odd T values")->delimiter(',');
  if (s.X) o["X"] = sub->add_option("--X,--X-list", f.X, "X (or Y) values")->delimiter(',');
  if (s.eta) o["eta"] = sub->add_option("--eta,--eta-list", f.eta, "Fourier support")->delimiter(',');
  if (s.m) o["m"] = sub->add_option("--m", f.m, "first Fourier index")->delimiter(',');
  if (s.n) o["n"] = sub->add_option("--n", f.n, "second Fourier index")->delimiter(',');
  if (s.data) o["maass-data"] = sub->add_option("--maass-data,--data", f.data, "Maass form export (csv or json)");
  if (s.method) o["method"] = sub->add_option("--method", f.method, "quadrature, residue, asymptotic or all");
  if (s.which) o["which"] = sub->add_option("--which", f.which, "small_X, large_X, souped_up, stationary_A, stationary_B");
  if (s.group) o["group"] = sub->add_option("--group", f.group, "so-even, so-odd, o, u, sp or all");
  if (s.split) o["split-output"] = sub->add_option("--split-output", f.split_output, "CSV for the Kloosterman split");
  if (s.gaussian) {
    o["center"] = sub->add_option("--center", f.center, "Gaussian centre");
    o["width"] = sub->add_option("--width", f.width, "Gaussian width");
    o["zeros"] = sub->add_option("--zeros", f.zeros, "half-integer zeros of the weight (0..4)");
  }
}

}  // namespace

std::string command_name(Command c) {
  for (const auto& [name, cmd] : command_table()) {
    if (cmd == c) return name;
  }
  return "?";
}

std::vector<besseltransform::GridPoint> default_scan_grid(besseltransform::ScanKind kind,
                                                          const std::vector<int>& T_list) {
  using besseltransform::ScanKind;
  std::vector<double> fractions;
  double unit = 1.0;
  switch (kind) {
    case ScanKind::small_X: fractions = {1.0 / 64, 1.0 / 32, 1.0 / 16, 1.0 / 8, 1.0 / 4, 1.0 / 2, 1.0}; break;
    case ScanKind::large_X:
    case ScanKind::souped_up: fractions = {1.0 / 8, 1.0 / 4, 1.0 / 2, 1.0, 2.0, 4.0}; break;
    case ScanKind::stationary_A:
    case ScanKind::stationary_B:
      fractions = {1.0 / 16, 1.0 / 8, 1.0 / 4, 1.0 / 2, 1.0};
      unit = 1.0 / (2.0 * kPi);
      break;
  }
  std::vector<besseltransform::GridPoint> grid;
  for (int T : T_list) {
    for (double f : fractions) {
      const double X = f * unit * T;
      if (besseltransform::scan_in_regime(kind, X, T)) grid.push_back({X, T});
    }
  }
  return grid;
}

int run(int argc, const char* const* argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run(args, std::cout, std::cerr);
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Low-lying zeros of Maass form L-functions: numerical checks"};
  app.name("lowlying");
  app.require_subcommand(1);
  std::map<std::string, Flags> flags;
  std::map<std::string, CLI::App*> subs;
  static const std::map<std::string, std::string> blurbs = {
      {"bessel-int", "D_J(X) by quadrature, residues and the uniform asymptotic"},
      {"bound-scan", "ratio of |D_J| (or the stationary sums) to the claimed bound"},
      {"trace-verify", "spectral vs geometric side of the trace formula for a Gaussian weight"},
      {"total-mass", "sum of h_T(t)/||u||^2 from the geometric side"},
      {"avg-lambda", "weighted average of lambda_m"},
      {"density", "explicit-formula one-level density vs the orthogonal prediction"},
      {"converge", "density deviations along T with a convergence verdict"},
      {"kernels", "random-matrix expectations by both routes"},
      {"validate-data", "consistency checks on a Maass form export"}};
  for (const auto& [name, cmd] : command_table()) {
    auto* sub = app.add_subcommand(name, blurbs.at(name));
    add_options(sub, flags[name], schema_for(cmd));
    subs[name] = sub;
  }
  try {
    app.parse(std::vector<std::string>(args.rbegin(), args.rend()));
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n" << app.help();
    return 2;
  }

  std::string name;
  for (const auto& [n, sub] : subs) {
    if (sub->parsed()) name = n;
  }
  RunConfig cfg;
  cfg.command = command_table().at(name);
  const Schema schema = schema_for(cfg.command);
  const Flags& f = flags.at(name);
  try {
    apply_env(cfg);
    if (f.given("config")) apply_config_file(cfg, f.config, schema);
    apply_flags(cfg, f);
    validate(cfg, schema);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n" << subs.at(name)->help();
    return 2;
  }
  set_thread_count(cfg.threads);

  std::ofstream file;
  if (!cfg.output_path.empty()) {
    file.open(cfg.output_path);
    if (!file) {
      err << "error: cannot open " << cfg.output_path << "\n";
      return 2;
    }
  }
  std::ostream& dest = cfg.output_path.empty() ? out : file;
  try {
    const auto res = dispatch(cfg, dest);
    dest.flush();
    err << res.summary << "\n";
    return res.code;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const DomainError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const CostGuardError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const ParseError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const VerificationError& e) {
    err << name << ": verification failed: " << e.what() << "\n";
    return 1;
  } catch (const Error& e) {
    err << name << ": " << e.what() << "\n";
    return 1;
  }
}

}  // namespace lowlying::cli
