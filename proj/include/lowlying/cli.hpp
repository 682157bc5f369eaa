#pragma once

// Batch front end. Every subcommand is deterministic: the same RunConfig gives
// byte-identical output regardless of the thread count.
//
// Exit codes: 0 success, 1 verification failure, 2 usage or domain error.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "lowlying/besseltransform.hpp"

namespace lowlying::cli {

enum class Command {
  bessel_int,
  bound_scan,
  trace_verify,
  total_mass,
  avg_lambda,
  density,
  converge,
  kernels,
  validate_data
};

std::string command_name(Command c);

struct RunConfig {
  Command command = Command::bessel_int;
  int M = 8;
  double bump_halfwidth = 0.125;
  std::vector<int> T_list;
  std::vector<double> X_list;
  std::vector<double> eta_list;
  int c_max = 1000;
  double tol = 1e-8;
  int threads = 0;  // 0: machine parallelism
  std::optional<std::string> data_path;
  std::string output_path;  // empty: stdout

  // Per-command extras.
  std::string method = "all";      // bessel-int
  std::string which = "small_X";   // bound-scan
  std::string group = "o";         // kernels
  std::string split_output;        // density
  std::vector<std::int64_t> m_list{1};
  std::vector<std::int64_t> n_list{1};
  double center = 12.0;  // trace-verify Gaussian
  double width = 2.0;
  int zeros = 2;
};

/// Default X (or Y) grid for a bound scan: a fixed set of fractions of each T,
/// restricted to the scan's regime.
std::vector<besseltransform::GridPoint> default_scan_grid(besseltransform::ScanKind kind,
                                                          const std::vector<int>& T_list);

/// argv-style entry point (argv[0] is the program name).
int run(int argc, const char* const* argv);

/// Arguments without the program name; results go to `out` unless the config
/// names an output file, diagnostics and the summary line to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace lowlying::cli
