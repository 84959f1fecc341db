#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

const std::string kCli = DMIMO_CLI_PATH;
const std::string kDefaultConfig = std::string(DMIMO_CONFIG_DIR) + "/default.json";

int run(const std::string& args, std::string* out_dir = nullptr) {
  static int counter = 0;
  const fs::path dir =
      fs::temp_directory_path() / ("dmimo_cli_test_" + std::to_string(counter++));
  fs::create_directories(dir);
  if (out_dir) *out_dir = dir.string();
  const std::string cmd = kCli + " " + args + " --out " + dir.string() +
                          " > " + (dir / "stdout.txt").string() + " 2>&1";
  const int rc = std::system(cmd.c_str());
  return WEXITSTATUS(rc);
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string write_config(const std::string& name, double load_bps,
                         double delay_ms = 500.0, double xi = 0.01) {
  const fs::path p = fs::temp_directory_path() / name;
  std::ofstream out(p);
  out << R"({
    "bs_positions": [[0, 0], [80, 0]],
    "user_positions": [[40, 10]],
    "tx_antennas": 2,
    "rx_antennas": 2,
    "interference": {"grid_resolution_m": 2.0},
    "qos": [{"arrival_rate_bps": )"
      << load_bps << R"(, "delay_bound_ms": )" << delay_ms
      << R"(, "violation_prob": )" << xi << "}]}";
  return p.string();
}

const std::string kFast =
    " --train-frames 200 --cmax-frames 1000 --frames 200 --seed 3";

}  // namespace

TEST_CASE("validate accepts the shipped config and prints the priority order") {
  std::string dir;
  const int rc = run("validate --config " + kDefaultConfig, &dir);
  CHECK(rc == 0);
  const std::string out = slurp(dir + "/stdout.txt");
  CHECK(out.find("priority order:") != std::string::npos);
  CHECK(out.find("theta=") != std::string::npos);
}

TEST_CASE("validate rejects malformed configs with exit code 1") {
  const std::string bad = write_config("dmimo_bad_xi.json", 5e4, 500.0, 1.5);
  CHECK(run("validate --config " + bad) == 1);
  CHECK(run("validate --config /nonexistent/file.json") == 1);
  CHECK(run("validate") == 1);  // missing required flag
}

TEST_CASE("train-evaluate round trip with hash checking") {
  const std::string cfg = write_config("dmimo_small.json", 4e4);
  std::string dir;
  const int rc = run("train --config " + cfg + " --scheme tdma" + kFast, &dir);
  CHECK(rc == 0);
  CHECK(fs::exists(dir + "/policy_tdma.json"));
  CHECK(fs::exists(dir + "/convergence_tdma.csv"));
  CHECK(fs::exists(dir + "/train_manifest.json"));

  // Evaluate against the matching scenario.
  const std::string cmd_eval = "evaluate --config " + cfg +
                               " --scheme tdma --policy " + dir +
                               "/policy_tdma.json" + kFast;
  std::string dir2;
  CHECK(run(cmd_eval, &dir2) == 0);
  const std::string metrics = slurp(dir2 + "/metrics.csv");
  CHECK(metrics.find("tdma,") != std::string::npos);
  CHECK(metrics.find("scheme,L_bar") != std::string::npos);

  // Determinism: an identical invocation reproduces the CSV byte for byte.
  std::string dir3;
  CHECK(run(cmd_eval, &dir3) == 0);
  const std::string a = slurp(dir2 + "/metrics.csv");
  const std::string b = slurp(dir3 + "/metrics.csv");
  CHECK(a == b);

  // A different scenario is refused.
  const std::string other = write_config("dmimo_other.json", 6e4);
  CHECK(run("evaluate --config " + other + " --scheme tdma --policy " + dir +
            "/policy_tdma.json" + kFast) == 1);
}

TEST_CASE("infeasible training exits with code 2 and records the status") {
  const std::string cfg = write_config("dmimo_overload.json", 3e6);
  std::string dir;
  const int rc = run("train --config " + cfg + " --scheme ptonly" + kFast, &dir);
  CHECK(rc == 2);
  const std::string policy = slurp(dir + "/policy_ptonly.json");
  CHECK(policy.find("\"status\": \"infeasible\"") != std::string::npos);
}

TEST_CASE("one-point sweep writes a single data row") {
  const std::string cfg = write_config("dmimo_sweep.json", 4e4);
  std::string dir;
  const int rc = run("sweep --config " + cfg +
                         " --scheme tdma --sweep-param load --sweep-values 40000" +
                         kFast,
                     &dir);
  CHECK(rc == 0);
  const std::string csv = slurp(dir + "/sweep.csv");
  std::istringstream in(csv);
  std::string stamp, header, row, extra;
  REQUIRE(std::getline(in, stamp));
  REQUIRE(std::getline(in, header));
  REQUIRE(std::getline(in, row));
  CHECK_FALSE(std::getline(in, extra));
  CHECK(stamp.rfind("# config_hash=", 0) == 0);
  CHECK(header.rfind("scheme,swept_param,value", 0) == 0);
  CHECK(row.rfind("tdma,load,40000,", 0) == 0);
}

TEST_CASE("sweep without a parameter is a usage error") {
  CHECK(run("sweep --config " + kDefaultConfig + " --scheme tdma" + kFast) == 1);
}
