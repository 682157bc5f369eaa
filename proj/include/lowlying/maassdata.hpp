#pragma once

// Level-1 Maass form spectral data read from external exports (CSV or JSON),
// plus the invariant checks run on it. Nothing here computes eigenvalues.

#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace lowlying::maassdata {

enum class Parity { even, odd };
enum class Format { csv, json };

struct MaassFormRecord {
  double t = 0.0;
  Parity parity = Parity::even;
  std::map<int, double> lambdas;  // index n -> lambda_n; lambda_1 = 1 unless the file says otherwise
  double norm_sq = 1.0;
  bool norm_sq_given = true;
  std::string source;

  /// lambda_n; throws DomainError if the file did not provide it.
  double lambda(int n) const;
  bool has_lambda(int n) const { return lambdas.count(n) != 0; }
};

/// Reads a file, sorts by t and rejects near-duplicate t (DuplicateError).
/// The file must declare "normalization: hecke-unit" (a "# normalization:"
/// comment in CSV, a "normalization" key in JSON); an empty file gives an
/// empty list. Missing norm_sq defaults to 1.0 with a warning on stderr.
std::vector<MaassFormRecord> parse_records(const std::string& path, Format format);
std::vector<MaassFormRecord> parse_records(const std::string& path);  // format from the extension
std::vector<MaassFormRecord> parse_csv(std::istream& in, const std::string& source);
std::vector<MaassFormRecord> parse_json(std::istream& in, const std::string& source);

void serialize_records(const std::vector<MaassFormRecord>& records, Format format, std::ostream& out);

/// Explicit path if given, else the first *.csv / *.json file (sorted by name)
/// in $MAASS_DATA_DIR. Empty when nothing is found.
std::optional<std::string> locate_data(const std::optional<std::string>& explicit_path);

enum class Check { pass, fail, not_applicable };

struct RecordValidation {
  double t = 0.0;
  Check normalization = Check::pass;   // lambda_1 = 1
  Check kim_sarnak = Check::pass;      // |lambda_p| <= 2 p^{7/64} + 1e-6
  Check multiplicativity = Check::not_applicable;  // lambda_a lambda_b = lambda_ab, lambda_p^2 - 1 = lambda_{p^2}
  Check spectral_parameter = Check::pass;          // t >= 0
  std::vector<std::string> messages;
  bool ok() const;
};

struct ValidationReport {
  std::vector<RecordValidation> records;
  bool all_pass = true;
  // Least-squares fit N(t) ~ a t^2 + b t + c of the eigenvalue count.
  double fit_a = 0.0, fit_b = 0.0, fit_c = 0.0;
  double fit_rms_residual = 0.0;
  bool fit_available = false;  // needs at least 3 records
  /// Modelled number of forms with spectral parameter in [t0, t1].
  double count_between(double t0, double t1) const;
};

/// Pure, order-independent checks. `hecke_tol` is the data precision used for
/// the multiplicativity relations.
ValidationReport validate_records(const std::vector<MaassFormRecord>& records, double hecke_tol = 1e-6);

std::string parity_name(Parity p);

}  // namespace lowlying::maassdata
