#include "lowlying/maassdata.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "lowlying/errors.hpp"

namespace lowlying::maassdata {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

std::string lower(std::string s) {
  for (auto& ch : s) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
  return s;
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream ss(line);
  while (std::getline(ss, cur, sep)) out.push_back(trim(cur));
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

double parse_number(const std::string& text, const std::string& where) {
  if (text.empty()) throw ParseError(where + ": empty numeric field");
  char* end = nullptr;
  const double v = std::strtod(text.c_str(), &end);
  if (end != text.c_str() + text.size() || !std::isfinite(v)) {
    throw ParseError(where + ": '" + text + "' is not a finite number");
  }
  return v;
}

Parity parse_parity(const std::string& text, const std::string& where) {
  const auto t = lower(text);
  if (t == "even" || t == "0") return Parity::even;
  if (t == "odd" || t == "1") return Parity::odd;
  throw ParseError(where + ": parity must be even/odd (or 0/1), got '" + text + "'");
}

int lambda_index(const std::string& column, const std::string& where) {
  const std::string prefix = "lambda_";
  if (column.rfind(prefix, 0) != 0) return 0;
  const std::string digits = column.substr(prefix.size());
  if (digits.empty() || !std::all_of(digits.begin(), digits.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); })) {
    throw ParseError(where + ": bad coefficient column '" + column + "'");
  }
  const int n = std::stoi(digits);
  if (n < 1) throw ParseError(where + ": coefficient index must be >= 1");
  return n;
}

void require_normalization(const std::optional<std::string>& declared, const std::string& source) {
  if (!declared) throw ParseError(source + ": missing 'normalization: hecke-unit' declaration");
  if (lower(*declared) != "hecke-unit") {
    throw ParseError(source + ": normalization '" + *declared + "' is not supported (only hecke-unit)");
  }
}

void finish(std::vector<MaassFormRecord>& records, const std::string& source) {
  std::stable_sort(records.begin(), records.end(), [](const auto& a, const auto& b) { return a.t < b.t; });
  for (std::size_t i = 1; i < records.size(); ++i) {
    if (std::abs(records[i].t - records[i - 1].t) < 1e-9) {
      std::ostringstream msg;
      msg << std::setprecision(17) << source << ": duplicate spectral parameter t = " << records[i].t;
      throw DuplicateError(msg.str());
    }
  }
  std::size_t missing = 0;
  for (auto& r : records) {
    if (!r.lambdas.count(1)) r.lambdas[1] = 1.0;
    if (!r.norm_sq_given) ++missing;
  }
  if (missing > 0) {
    std::cerr << "warning: " << source << ": " << missing << " record(s) without norm_sq; using ||u||^2 = 1.0\n";
  }
}

bool is_prime(int n) {
  if (n < 2) return false;
  for (int d = 2; d * d <= n; ++d) {
    if (n % d == 0) return false;
  }
  return true;
}

int gcd_int(int a, int b) {
  while (b != 0) {
    const int t = a % b;
    a = b;
    b = t;
  }
  return a;
}

}  // namespace

double MaassFormRecord::lambda(int n) const {
  const auto it = lambdas.find(n);
  if (it == lambdas.end()) {
    std::ostringstream msg;
    msg << "missing lambda_" << n << " for the form with t = " << std::setprecision(12) << t;
    throw DomainError(msg.str());
  }
  return it->second;
}

std::string parity_name(Parity p) { return p == Parity::even ? "even" : "odd"; }

std::vector<MaassFormRecord> parse_csv(std::istream& in, const std::string& source) {
  std::vector<MaassFormRecord> records;
  std::optional<std::string> normalization;
  std::vector<std::string> header;
  int col_t = -1, col_parity = -1, col_norm = -1, col_source = -1;
  std::vector<int> col_lambda;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::string stripped = trim(line);
    if (stripped.empty()) continue;
    const std::string where = source + ":" + std::to_string(line_no);
    if (stripped[0] == '#') {
      const std::string body = trim(stripped.substr(1));
      const auto colon = body.find(':');
      if (colon != std::string::npos && lower(trim(body.substr(0, colon))) == "normalization") {
        normalization = trim(body.substr(colon + 1));
      }
      continue;
    }
    if (header.empty()) {
      header = split(stripped, ',');
      col_lambda.assign(header.size(), 0);
      for (std::size_t i = 0; i < header.size(); ++i) {
        const auto name = lower(header[i]);
        if (name == "t") col_t = static_cast<int>(i);
        else if (name == "parity") col_parity = static_cast<int>(i);
        else if (name == "norm_sq") col_norm = static_cast<int>(i);
        else if (name == "source") col_source = static_cast<int>(i);
        else if ((col_lambda[i] = lambda_index(name, where)) == 0) {
          throw ParseError(where + ": unknown column '" + header[i] + "'");
        }
      }
      if (col_t < 0 || col_parity < 0) throw ParseError(where + ": header needs at least the columns t and parity");
      continue;
    }
    const auto fields = split(stripped, ',');
    if (fields.size() != header.size()) {
      throw ParseError(where + ": expected " + std::to_string(header.size()) + " fields, found " +
                       std::to_string(fields.size()));
    }
    MaassFormRecord r;
    r.source = source;
    for (std::size_t i = 0; i < fields.size(); ++i) {
      const std::string field_where = where + " field '" + header[i] + "'";
      const int idx = static_cast<int>(i);
      if (idx == col_t) {
        r.t = parse_number(fields[i], field_where);
      } else if (idx == col_parity) {
        r.parity = parse_parity(fields[i], field_where);
      } else if (idx == col_norm) {
        if (fields[i].empty()) {
          r.norm_sq_given = false;
        } else {
          r.norm_sq = parse_number(fields[i], field_where);
          if (!(r.norm_sq > 0.0)) throw ParseError(field_where + ": norm_sq must be > 0");
        }
      } else if (idx == col_source) {
        if (!fields[i].empty()) r.source = fields[i];
      } else if (!fields[i].empty()) {
        r.lambdas[col_lambda[i]] = parse_number(fields[i], field_where);
      }
    }
    if (col_norm < 0) r.norm_sq_given = false;
    records.push_back(std::move(r));
  }
  if (records.empty()) return records;
  require_normalization(normalization, source);
  finish(records, source);
  return records;
}

std::vector<MaassFormRecord> parse_json(std::istream& in, const std::string& source) {
  std::stringstream buffer;
  buffer << in.rdbuf();
  const std::string text = buffer.str();
  if (trim(text).empty()) return {};
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(source + ": " + e.what());
  }
  if (!doc.is_object() || !doc.contains("forms") || !doc["forms"].is_array()) {
    throw ParseError(source + ": expected an object with a 'forms' array");
  }
  std::vector<MaassFormRecord> records;
  std::size_t index = 0;
  for (const auto& item : doc["forms"]) {
    const std::string where = source + ": forms[" + std::to_string(index++) + "]";
    try {
      MaassFormRecord r;
      r.source = item.value("source", source);
      r.t = item.at("t").get<double>();
      const auto& par = item.at("parity");
      r.parity = parse_parity(par.is_string() ? par.get<std::string>() : std::to_string(par.get<int>()), where);
      if (item.contains("norm_sq") && !item["norm_sq"].is_null()) {
        r.norm_sq = item["norm_sq"].get<double>();
        if (!(r.norm_sq > 0.0)) throw ParseError(where + ": norm_sq must be > 0");
      } else {
        r.norm_sq_given = false;
      }
      if (item.contains("lambdas")) {
        for (const auto& [key, value] : item["lambdas"].items()) {
          const int n = lambda_index("lambda_" + key, where);
          r.lambdas[n] = value.get<double>();
        }
      }
      records.push_back(std::move(r));
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(where + ": " + e.what());
    }
  }
  if (records.empty()) return records;
  std::optional<std::string> normalization;
  if (doc.contains("normalization") && doc["normalization"].is_string()) normalization = doc["normalization"].get<std::string>();
  require_normalization(normalization, source);
  finish(records, source);
  return records;
}

std::vector<MaassFormRecord> parse_records(const std::string& path, Format format) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open '" + path + "'");
  return format == Format::csv ? parse_csv(in, path) : parse_json(in, path);
}

std::vector<MaassFormRecord> parse_records(const std::string& path) {
  const auto ext = lower(std::filesystem::path(path).extension().string());
  if (ext == ".json") return parse_records(path, Format::json);
  if (ext == ".csv") return parse_records(path, Format::csv);
  throw ParseError("'" + path + "': unknown extension (expected .csv or .json)");
}

void serialize_records(const std::vector<MaassFormRecord>& records, Format format, std::ostream& out) {
  std::set<int> indices;
  bool write_lambda1 = false;
  for (const auto& r : records) {
    for (const auto& [n, v] : r.lambdas) {
      if (n == 1 && v == 1.0) continue;
      if (n == 1) write_lambda1 = true;
      indices.insert(n);
    }
  }
  if (write_lambda1) indices.insert(1);
  if (format == Format::json) {
    nlohmann::json doc;
    doc["normalization"] = "hecke-unit";
    doc["forms"] = nlohmann::json::array();
    for (const auto& r : records) {
      nlohmann::json item;
      item["t"] = r.t;
      item["parity"] = parity_name(r.parity);
      if (r.norm_sq_given) item["norm_sq"] = r.norm_sq;
      item["source"] = r.source;
      nlohmann::json lam = nlohmann::json::object();
      for (const auto& [n, v] : r.lambdas) {
        if (indices.count(n)) lam[std::to_string(n)] = v;
      }
      item["lambdas"] = lam;
      doc["forms"].push_back(item);
    }
    out << doc.dump(2) << '\n';
    return;
  }
  const auto flags = out.flags();
  const auto prec = out.precision();
  out << std::setprecision(17);
  out << "# normalization: hecke-unit\n";
  out << "t,parity,norm_sq,source";
  for (int n : indices) out << ",lambda_" << n;
  out << '\n';
  for (const auto& r : records) {
    out << r.t << ',' << parity_name(r.parity) << ',';
    if (r.norm_sq_given) out << r.norm_sq;
    out << ',' << r.source;
    for (int n : indices) {
      out << ',';
      if (r.has_lambda(n)) out << r.lambdas.at(n);
    }
    out << '\n';
  }
  out.flags(flags);
  out.precision(prec);
}

std::optional<std::string> locate_data(const std::optional<std::string>& explicit_path) {
  if (explicit_path && !explicit_path->empty()) return explicit_path;
  const char* dir = std::getenv("MAASS_DATA_DIR");
  if (dir == nullptr || *dir == '\0') return std::nullopt;
  std::error_code ec;
  std::vector<std::string> found;
  for (const auto& entry : std::filesystem::directory_iterator(dir, ec)) {
    if (!entry.is_regular_file()) continue;
    const auto ext = lower(entry.path().extension().string());
    if (ext == ".csv" || ext == ".json") found.push_back(entry.path().string());
  }
  if (found.empty()) return std::nullopt;
  std::sort(found.begin(), found.end());
  return found.front();
}

bool RecordValidation::ok() const {
  return normalization != Check::fail && kim_sarnak != Check::fail && multiplicativity != Check::fail &&
         spectral_parameter != Check::fail;
}

double ValidationReport::count_between(double t0, double t1) const {
  if (!fit_available) return 0.0;
  const auto N = [&](double t) { return fit_a * t * t + fit_b * t + fit_c; };
  return std::max(0.0, N(t1) - N(t0));
}

ValidationReport validate_records(const std::vector<MaassFormRecord>& records, double hecke_tol) {
  ValidationReport report;
  for (const auto& r : records) {
    RecordValidation v;
    v.t = r.t;
    std::ostringstream at;
    at << std::setprecision(12) << "t=" << r.t << ": ";
    if (!(r.t >= 0.0)) {
      v.spectral_parameter = Check::fail;
      v.messages.push_back(at.str() + "negative spectral parameter");
    }
    const auto one = r.lambdas.find(1);
    if (one == r.lambdas.end() || std::abs(one->second - 1.0) > 1e-12) {
      v.normalization = Check::fail;
      v.messages.push_back(at.str() + "lambda_1 != 1");
    }
    for (const auto& [n, value] : r.lambdas) {
      if (!is_prime(n)) continue;
      const double bound = 2.0 * std::pow(static_cast<double>(n), 7.0 / 64.0) + 1e-6;
      if (std::abs(value) > bound) {
        v.kim_sarnak = Check::fail;
        std::ostringstream msg;
        msg << at.str() << "|lambda_" << n << "| = " << std::abs(value) << " exceeds 2 p^{7/64} = " << bound;
        v.messages.push_back(msg.str());
      }
    }
    for (const auto& [a, la] : r.lambdas) {
      for (const auto& [b, lb] : r.lambdas) {
        if (a < 2 || b <= a || gcd_int(a, b) != 1) continue;
        const auto ab = r.lambdas.find(a * b);
        if (ab == r.lambdas.end()) continue;
        if (v.multiplicativity == Check::not_applicable) v.multiplicativity = Check::pass;
        if (std::abs(la * lb - ab->second) > hecke_tol * (1.0 + std::abs(ab->second))) {
          v.multiplicativity = Check::fail;
          v.messages.push_back(at.str() + "lambda_" + std::to_string(a) + " lambda_" + std::to_string(b) +
                               " != lambda_" + std::to_string(a * b));
        }
      }
      if (is_prime(a)) {
        const auto sq = r.lambdas.find(a * a);
        if (sq == r.lambdas.end()) continue;
        if (v.multiplicativity == Check::not_applicable) v.multiplicativity = Check::pass;
        if (std::abs(la * la - 1.0 - sq->second) > hecke_tol * (1.0 + std::abs(sq->second))) {
          v.multiplicativity = Check::fail;
          v.messages.push_back(at.str() + "lambda_" + std::to_string(a) + "^2 - 1 != lambda_" + std::to_string(a * a));
        }
      }
    }
    report.all_pass = report.all_pass && v.ok();
    report.records.push_back(std::move(v));
  }
  // Eigenvalue count fit on the sorted t values (the input order is irrelevant).
  std::vector<double> ts;
  for (const auto& r : records) ts.push_back(r.t);
  std::sort(ts.begin(), ts.end());
  if (ts.size() >= 3) {
    long double S[5] = {0, 0, 0, 0, 0}, R[3] = {0, 0, 0};
    for (std::size_t i = 0; i < ts.size(); ++i) {
      const long double t = ts[i], N = static_cast<long double>(i + 1);
      long double p = 1;
      for (int k = 0; k < 5; ++k, p *= t) {
        S[k] += p;
        if (k < 3) R[k] += p * N;
      }
    }
    // Normal equations for (c, b, a) against the monomials 1, t, t^2.
    long double A[3][4] = {{S[0], S[1], S[2], R[0]}, {S[1], S[2], S[3], R[1]}, {S[2], S[3], S[4], R[2]}};
    bool singular = false;
    for (int col = 0; col < 3 && !singular; ++col) {
      int piv = col;
      for (int row = col + 1; row < 3; ++row) {
        if (std::fabs(A[row][col]) > std::fabs(A[piv][col])) piv = row;
      }
      if (std::fabs(A[piv][col]) < 1e-300L) {
        singular = true;
        break;
      }
      for (int k = 0; k < 4; ++k) std::swap(A[col][k], A[piv][k]);
      for (int row = 0; row < 3; ++row) {
        if (row == col) continue;
        const long double f = A[row][col] / A[col][col];
        for (int k = 0; k < 4; ++k) A[row][k] -= f * A[col][k];
      }
    }
    if (!singular) {
      report.fit_c = static_cast<double>(A[0][3] / A[0][0]);
      report.fit_b = static_cast<double>(A[1][3] / A[1][1]);
      report.fit_a = static_cast<double>(A[2][3] / A[2][2]);
      double ss = 0.0;
      for (std::size_t i = 0; i < ts.size(); ++i) {
        const double model = report.fit_a * ts[i] * ts[i] + report.fit_b * ts[i] + report.fit_c;
        ss += (model - (i + 1.0)) * (model - (i + 1.0));
      }
      report.fit_rms_residual = std::sqrt(ss / ts.size());
      report.fit_available = true;
    }
  }
  return report;
}

}  // namespace lowlying::maassdata
