#include <sys/wait.h>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "lowlying/besseltransform.hpp"
#include "lowlying/cli.hpp"
#include "lowlying/rmt.hpp"

using namespace lowlying;

namespace {

struct Result {
  int code = 0;
  std::string out, err;
};

Result run_cli(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  Result r;
  r.code = cli::run(args, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::string temp_path(const std::string& name) { return "/tmp/lowlying_test_cli_" + name; }

void write_file(const std::string& path, const std::string& text) {
  std::ofstream os(path);
  os << text;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> lines(const std::string& s) {
  std::vector<std::string> v;
  std::istringstream is(s);
  for (std::string l; std::getline(is, l);) v.push_back(l);
  return v;
}

std::vector<std::string> fields(const std::string& line) {
  std::vector<std::string> v;
  std::istringstream is(line);
  for (std::string f; std::getline(is, f, ',');) v.push_back(f);
  return v;
}

// Runs the installed binary through the shell; returns the exit status.
int run_binary(const std::string& args, std::string* out = nullptr) {
  const char* bin = std::getenv("LOWLYING_CLI");
  REQUIRE(bin != nullptr);
  const std::string cmd = std::string(bin) + " " + args + " 2>/dev/null";
  FILE* p = popen(cmd.c_str(), "r");
  REQUIRE(p != nullptr);
  std::string text;
  char buf[4096];
  while (std::fgets(buf, sizeof buf, p)) text += buf;
  const int status = pclose(p);
  if (out) *out = text;
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("bessel-int prints all three methods and the pairwise gaps") {
  const auto r = run_cli({"bessel-int", "--X", "1", "--T", "5", "--method", "all"});
  CHECK(r.code == 0);
  const auto ls = lines(r.out);
  REQUIRE(ls.size() == 5);
  CHECK(ls[0] == "method,X,T,value_re,value_im,error_estimate");
  CHECK(ls[1].rfind("quadrature,1,5,", 0) == 0);
  CHECK(ls[2].rfind("residue,1,5,", 0) == 0);
  CHECK(ls[3].rfind("asymptotic,1,5,", 0) == 0);
  CHECK(ls[4].find("|quadrature-residue|=") != std::string::npos);
  CHECK(ls[4].find("|residue-asymptotic|=") != std::string::npos);
  const double im = std::stod(fields(ls[1])[4]);
  CHECK(std::abs(im - besseltransform::dj_quadrature(1.0, 5).value.imag()) < 1e-20);
  CHECK(r.err.find("bessel-int: 3 results") != std::string::npos);

  // Outside the asymptotic regime the comparison still runs, with a note.
  const auto small = run_cli({"bessel-int", "--X", "0.5", "--T", "21"});
  CHECK(small.code == 0);
  CHECK(small.out.find("asymptotic: ") != std::string::npos);
  CHECK(run_cli({"bessel-int", "--X", "0.5", "--T", "21", "--method", "asymptotic"}).code == 2);
}

TEST_CASE("kernels reports both routes and the orthogonal prediction") {
  const auto r = run_cli({"kernels", "--group", "o", "--eta", "0.8"});
  CHECK(r.code == 0);
  const auto ls = lines(r.out);
  REQUIRE(ls.size() == 2);
  const auto f = fields(ls[1]);
  REQUIRE(f.size() == 6);
  CHECK(f[0] == "o");
  const double x_space = std::stod(f[2]);
  const double prediction = std::stod(f[5]);
  // For support below 1 the orthogonal expectation is phi-hat(0) + phi(0)/2.
  CHECK(std::abs(x_space - prediction) < 1e-7);
  const auto phi = rmt::make_test_function(0.8);
  CHECK(std::abs(prediction - rmt::rmt_expected_value(phi, rmt::Group::o)) < 1e-7);

  const auto all = run_cli({"kernels", "--group", "all", "--eta", "0.5,1.5"});
  CHECK(all.code == 0);
  CHECK(lines(all.out).size() == 11);
}

TEST_CASE("usage errors exit 2 without computing") {
  auto r = run_cli({"kernels", "--group", "o", "--eta", "0.8", "--bogus"});
  CHECK(r.code == 2);
  CHECK(r.out.empty());
  CHECK(r.err.find("--bogus") != std::string::npos);
  CHECK(run_cli({}).code == 2);
  CHECK(run_cli({"frobnicate"}).code == 2);
  CHECK(run_cli({"total-mass", "--T", "10"}).code == 2);
  CHECK(run_cli({"total-mass"}).code == 2);
  CHECK(run_cli({"bessel-int", "--T", "5"}).code == 2);
  CHECK(run_cli({"kernels", "--group", "gue", "--eta", "0.5"}).code == 2);
  CHECK(run_cli({"kernels", "--eta", "2.5"}).code == 2);
  CHECK(run_cli({"total-mass", "--T", "11", "--M", "7"}).code == 2);
  CHECK(run_cli({"total-mass", "--T", "11", "--bump-halfwidth", "0.2"}).code == 2);
  CHECK(run_cli({"bound-scan", "--T", "21", "--which", "medium_X"}).code == 2);
  const auto help = run_cli({"--help"});
  CHECK(help.code == 0);
  CHECK(help.out.find("trace-verify") != std::string::npos);
  CHECK(run_cli({"density", "--help"}).code == 0);
}

TEST_CASE("config precedence: flags > config file > environment > defaults") {
  auto value_for = [](const std::vector<std::string>& extra) {
    std::vector<std::string> args = {"bessel-int", "--X", "2", "--T", "11", "--method", "residue"};
    args.insert(args.end(), extra.begin(), extra.end());
    const auto r = run_cli(args);
    REQUIRE(r.code == 0);
    return fields(lines(r.out)[1])[4];
  };
  const auto m8 = value_for({});
  const auto m10 = value_for({"--M", "10"});
  const auto m12 = value_for({"--M", "12"});
  const auto m14 = value_for({"--M", "14"});
  CHECK(m8 != m10);
  CHECK(m10 != m12);

  const std::string cfg = temp_path("m12.json");
  write_file(cfg, R"({"weight": {"M": 12}})");
  setenv("LOWLYING_M", "10", 1);
  CHECK(value_for({}) == m10);
  CHECK(value_for({"--config", cfg}) == m12);
  CHECK(value_for({"--config", cfg, "--M", "14"}) == m14);
  setenv("LOWLYING_M", "ten", 1);
  CHECK(run_cli({"bessel-int", "--X", "2", "--T", "11"}).code == 2);
  unsetenv("LOWLYING_M");
  CHECK(value_for({}) == m8);

  // Config supplies list inputs too; unknown keys are rejected.
  const std::string lists = temp_path("lists.json");
  write_file(lists, R"({"T": 11, "X": [2], "method": "residue", "M": 12})");
  const auto r = run_cli({"bessel-int", "--config", lists});
  CHECK(r.code == 0);
  CHECK(fields(lines(r.out)[1])[4] == m12);
  const std::string bad = temp_path("bad.json");
  write_file(bad, R"({"T": 11, "X": 2, "eta": 0.5})");
  CHECK(run_cli({"bessel-int", "--config", bad}).code == 2);
  write_file(bad, R"({"T": 11, "X": 2, "weight": {"N": 3}})");
  CHECK(run_cli({"bessel-int", "--config", bad}).code == 2);
  write_file(bad, "{not json");
  CHECK(run_cli({"bessel-int", "--config", bad}).code == 2);
  CHECK(run_cli({"bessel-int", "--config", temp_path("missing.json")}).code == 2);
}

TEST_CASE("output is byte-identical across thread counts and goes to --output") {
  const std::string a = temp_path("mass_a.csv"), b = temp_path("mass_b.csv");
  const auto ra = run_cli({"total-mass", "--T", "11,21", "--threads", "1", "--output", a});
  const auto rb = run_cli({"total-mass", "--T", "11", "--T", "21", "--threads", "4", "-o", b});
  CHECK(ra.code == 0);
  CHECK(rb.code == 0);
  CHECK(ra.out.empty());
  const auto text = read_file(a);
  CHECK(text == read_file(b));
  const auto ls = lines(text);
  REQUIRE(ls.size() == 3);
  CHECK(ls[0] == "T,total_mass,ratio,delta,eisenstein,kloosterman,error_budget");
  const double ratio = std::stod(fields(ls[1])[2]);
  CHECK(ratio == doctest::Approx(4.6047).epsilon(1e-4));
  CHECK(ra.err.find("factor-2 band") != std::string::npos);
}

TEST_CASE("avg-lambda, bound-scan and density outputs") {
  const auto avg = run_cli({"avg-lambda", "--T", "11", "--m", "1,2,4"});
  CHECK(avg.code == 0);
  const auto al = lines(avg.out);
  REQUIRE(al.size() == 4);
  CHECK(std::stod(fields(al[1])[2]) == 1.0);
  CHECK(std::abs(std::stod(fields(al[2])[2])) < 1.0);

  const auto scan = run_cli({"bound-scan", "--T", "21", "--which", "small_X"});
  CHECK(scan.code == 0);
  CHECK(lines(scan.out)[0] == "which,X,T,value,bound,ratio");
  CHECK(lines(scan.out).size() == 8);

  const std::string split = temp_path("split.csv");
  const auto dens = run_cli({"density", "--T", "11", "--eta", "0.8", "--split-output", split});
  CHECK(dens.code == 0);
  CHECK(lines(dens.out)[0] == "T,eta,const,conductor,prime,prime_sq,total,prediction,deviation");
  CHECK(lines(read_file(split))[0] == "T,eta,large_p_small_c,large_p_large_c,small_p,total_mass");
}

TEST_CASE("default_scan_grid stays inside each regime") {
  using besseltransform::ScanKind;
  for (auto kind : {ScanKind::small_X, ScanKind::large_X, ScanKind::souped_up, ScanKind::stationary_A,
                    ScanKind::stationary_B}) {
    const auto grid = cli::default_scan_grid(kind, {21, 41});
    CHECK(!grid.empty());
    for (const auto& p : grid) CHECK(besseltransform::scan_in_regime(kind, p.X, p.T));
  }
  CHECK(cli::default_scan_grid(ScanKind::small_X, {21}).size() == 7);
  CHECK(cli::default_scan_grid(ScanKind::stationary_B, {41}).back().X ==
        doctest::Approx(41.0 / (2.0 * 3.141592653589793)));
}

TEST_CASE("data commands") {
  const std::string sample = std::string(LOWLYING_TEST_DATA) + "/sample3.csv";
  const auto v = run_cli({"validate-data", "--maass-data", sample});
  CHECK(v.code == 0);
  CHECK(lines(v.out).size() == 5);
  unsetenv("MAASS_DATA_DIR");
  CHECK(run_cli({"trace-verify"}).code == 2);
  CHECK(run_cli({"validate-data"}).code == 2);
  CHECK(run_cli({"validate-data", "--maass-data", temp_path("nothing.csv")}).code == 2);
  // The three-form sample is not the true spectrum: the identity must fail.
  const auto t = run_cli({"trace-verify", "--maass-data", sample, "--center", "5", "--width", "1"});
  CHECK(t.code == 1);
  CHECK(t.out.find("\"pass\": false") != std::string::npos);
}

TEST_CASE("the installed binary") {
  std::string out;
  CHECK(run_binary("kernels --group o --eta 0.8", &out) == 0);
  CHECK(out.find("orthogonal_prediction") != std::string::npos);
  CHECK(run_binary("kernels --group o --eta 0.8 --nope") == 2);
  CHECK(run_binary("bessel-int --X 1 --T 5 --method all", &out) == 0);
  CHECK(lines(out).size() == 5);
}
