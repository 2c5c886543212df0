#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>

#include "vmslod/driver.hpp"
#include "vmslod/errors.hpp"
#include "vmslod/runspec.hpp"

using namespace vmslod;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("vmslod_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int data_rows(const std::string& csv) {
  int rows = -1;  // skip header
  for (const char c : csv)
    if (c == '\n') ++rows;
  return rows;
}

}  // namespace

TEST_CASE("runspec defaults and round trip") {
  const RunSpec spec;
  CHECK(spec.cfg.epsilon == doctest::Approx(std::pow(2.0, -7)));
  CHECK(spec.cfg.b_angle == doctest::Approx(0.7));
  CHECK(spec.cfg.coarse_n == 16);
  CHECK(spec.cfg.fine_n == 256);

  SUBCASE("json round trip is exact") {
    RunSpec s;
    s.cfg.epsilon = 0.125;
    s.cfg.ell = MethodConfig::infinite_ell;
    s.cfg.f = FieldSpec::parse("x*y + 1");
    s.cfg.method = Method::supg;
    s.command = Command::compare;
    s.output_dir = "somewhere/else";
    s.threads = 3;
    s.seed = 42;
    const RunSpec back = RunSpec::from_json(s.to_json());
    CHECK(back == s);
  }
  SUBCASE("ell accepts integers and inf") {
    CHECK(parse_ell("3") == 3);
    CHECK(parse_ell("inf") == MethodConfig::infinite_ell);
    CHECK_THROWS_AS(parse_ell("three"), ConfigError);
    CHECK(ell_to_string(MethodConfig::infinite_ell) == "inf");
  }
  SUBCASE("unknown keys are rejected by name") {
    nlohmann::json j = {{"epsilon", 0.5}, {"epsilonn", 0.5}};
    CHECK_THROWS_WITH_AS(RunSpec::from_json(j), doctest::Contains("epsilonn"), ConfigError);
  }
  SUBCASE("field-precise validation messages") {
    RunSpec s;
    s.cfg.epsilon = -2.0;
    CHECK_THROWS_WITH_AS(s.validate(), doctest::Contains("epsilon"), ConfigError);
    s.cfg.epsilon = 0.5;
    s.threads = 0;
    CHECK_THROWS_WITH_AS(s.validate(), doctest::Contains("threads"), ConfigError);
  }
}

TEST_CASE("solve command writes the field and a faithful manifest") {
  RunSpec spec;
  spec.cfg.epsilon = 1.0;
  spec.cfg.b_angle = 0.0;
  spec.cfg.coarse_n = 4;
  spec.cfg.fine_n = 4;
  spec.cfg.method = Method::reference;
  spec.command = Command::solve;
  spec.output_dir = temp_dir("solve");
  std::ostringstream log;
  run(spec, log);

  const std::string csv = slurp(spec.output_dir / "field.csv");
  CHECK(data_rows(csv) == 25);
  CHECK(csv.substr(0, csv.find('\n')) == "node,x,y,value");
  CHECK(csv.find('\r') == std::string::npos);  // LF endings

  SUBCASE("values match a hand-assembled oracle") {
    // eps=1, b_angle=0 means b=(1,0). Assemble the 25-node system from
    // hand-derived local matrices of the two triangle orientations (legs h,
    // right angle at v10 resp. v01) and solve the interior block densely.
    const int n = 4;
    const double hx = 1.0 / n;
    const int N = (n + 1) * (n + 1);
    const double Klow[3][3] = {{.5, -.5, 0}, {-.5, 1, -.5}, {0, -.5, .5}};
    const double Kup[3][3] = {{.5, 0, -.5}, {0, .5, -.5}, {-.5, -.5, 1}};
    const double clow[3] = {-hx / 6, hx / 6, 0};          // b=(1,0)
    const double cup[3] = {0, hx / 6, -hx / 6};
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(N, N);
    Eigen::VectorXd F = Eigen::VectorXd::Zero(N);
    auto node = [&](int i, int j) { return j * (n + 1) + i; };
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) {
        const int v00 = node(i, j), v10 = node(i + 1, j), v01 = node(i, j + 1),
                  v11 = node(i + 1, j + 1);
        const int low[3] = {v00, v10, v11}, up[3] = {v00, v11, v01};
        for (int r = 0; r < 3; ++r) {
          F[low[r]] += hx * hx / 6;
          F[up[r]] += hx * hx / 6;
          for (int c = 0; c < 3; ++c) {
            A(low[r], low[c]) += Klow[r][c] + clow[c];
            A(up[r], up[c]) += Kup[r][c] + cup[c];
          }
        }
      }
    std::vector<int> interior;
    for (int j = 1; j < n; ++j)
      for (int i = 1; i < n; ++i) interior.push_back(node(i, j));
    Eigen::MatrixXd Ai(interior.size(), interior.size());
    Eigen::VectorXd Fi(interior.size());
    for (std::size_t r = 0; r < interior.size(); ++r) {
      Fi[r] = F[interior[r]];
      for (std::size_t c = 0; c < interior.size(); ++c) Ai(r, c) = A(interior[r], interior[c]);
    }
    const Eigen::VectorXd u = Ai.fullPivLu().solve(Fi);
    // parse the csv values and compare at the interior nodes
    std::istringstream in(csv);
    std::string line;
    std::getline(in, line);
    std::vector<double> vals;
    while (std::getline(in, line)) {
      const auto last = line.rfind(',');
      vals.push_back(std::stod(line.substr(last + 1)));
    }
    for (std::size_t r = 0; r < interior.size(); ++r)
      CHECK(vals[interior[r]] == doctest::Approx(u[r]).epsilon(2e-5));
  }

  SUBCASE("manifest config re-parses to the same spec") {
    nlohmann::json manifest;
    std::ifstream in(spec.output_dir / "manifest.json");
    in >> manifest;
    const RunSpec back = RunSpec::from_json(manifest["config"]);
    CHECK(back == spec);
    CHECK(manifest["versions"].contains("vmslod"));
    CHECK(manifest["wall_time_seconds"].get<double>() >= 0.0);
  }
}

TEST_CASE("runs are reproducible byte for byte") {
  RunSpec spec;
  spec.cfg.epsilon = 1.0 / 16;
  spec.cfg.coarse_n = 4;
  spec.cfg.fine_n = 16;
  spec.cfg.ell = 1;
  spec.cfg.method = Method::vms;
  spec.command = Command::solve;
  std::ostringstream log;

  spec.output_dir = temp_dir("repro1");
  run(spec, log);
  const std::string first = slurp(spec.output_dir / "field.csv");
  spec.output_dir = temp_dir("repro2");
  run(spec, log);
  CHECK(first == slurp(spec.output_dir / "field.csv"));

  SUBCASE("thread count does not change the result") {
    spec.output_dir = temp_dir("repro4");
    spec.threads = 4;
    run(spec, log);
    CHECK(first == slurp(spec.output_dir / "field.csv"));
  }
}

TEST_CASE("table and convergence commands emit the declared schemas") {
  RunSpec spec;
  spec.cfg.epsilon = 1.0 / 16;
  spec.cfg.coarse_n = 8;
  spec.cfg.fine_n = 64;
  spec.cfg.ell = 1;
  spec.command = Command::table1;
  spec.threads = 2;
  spec.output_dir = temp_dir("table1");
  std::ostringstream log;
  run(spec, log);
  const std::string t1 = slurp(spec.output_dir / "table1.csv");
  CHECK(t1.substr(0, t1.find('\n')) == "H,ell,h1_local_err");
  CHECK(data_rows(t1) == 4 * 6);  // coarse_n in {8,16,32,64}, ell = 1..6

  spec.command = Command::convergence;
  spec.output_dir = temp_dir("conv");
  run(spec, log);
  const std::string cv = slurp(spec.output_dir / "convergence.csv");
  CHECK(cv.substr(0, cv.find('\n')) == "H,ell,h1_local_err,l2_global_err,l2_interp_err");
  CHECK(data_rows(cv) == 4);
  nlohmann::json manifest;
  std::ifstream in(spec.output_dir / "manifest.json");
  in >> manifest;
  CHECK(manifest.contains("slopes"));
}

TEST_CASE("decay, compare and correctors commands") {
  RunSpec spec;
  spec.cfg.epsilon = 1.0 / 16;
  spec.cfg.coarse_n = 8;
  spec.cfg.fine_n = 32;
  spec.cfg.ell = 4;
  spec.threads = 2;
  std::ostringstream log;

  SUBCASE("decay.csv is a decreasing profile") {
    spec.command = Command::decay;
    spec.output_dir = temp_dir("decay");
    run(spec, log);
    const std::string csv = slurp(spec.output_dir / "decay.csv");
    CHECK(csv.substr(0, csv.find('\n')) == "ell,seminorm_outside");
    CHECK(data_rows(csv) == 4);
  }
  SUBCASE("linecut.csv carries all four methods") {
    spec.command = Command::compare;
    spec.output_dir = temp_dir("compare");
    run(spec, log);
    const std::string csv = slurp(spec.output_dir / "linecut.csv");
    CHECK(csv.substr(0, csv.find('\n')) == "x,u_ref,u_fem,u_supg,u_vms");
    CHECK(data_rows(csv) == 33);  // fine_n + 1 samples
  }
  SUBCASE("correctors command dumps corrector and test function") {
    spec.command = Command::correctors;
    spec.output_dir = temp_dir("correctors");
    run(spec, log);
    CHECK(fs::exists(spec.output_dir / "corrector.csv"));
    CHECK(fs::exists(spec.output_dir / "testfn.csv"));
    const std::string csv = slurp(spec.output_dir / "corrector.csv");
    CHECK(csv.substr(0, csv.find('\n')) == "node,x,y,value");
  }
}
