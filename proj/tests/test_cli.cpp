// Copyright 2026 The gsbandit Authors
// SPDX-License-Identifier: Apache-2.0
//
// End-to-end checks of the gsb command-line tool.

#include <doctest.h>
#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "gsb/config_io.hpp"

namespace fs = std::filesystem;

namespace {

struct Result {
  int code = -1;
  std::string output;
};

Result gsb_cli(const std::string& args) {
  const std::string cmd = std::string(GSB_CLI) + " " + args + " 2>&1";
  Result r;
  FILE* pipe = ::popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  char buf[4096];
  std::size_t n = 0;
  while ((n = std::fread(buf, 1, sizeof buf, pipe)) > 0) r.output.append(buf, n);
  const int status = ::pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

fs::path scratch_dir() {
  const fs::path dir = fs::temp_directory_path() / ("gsb_cli_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void spit(const fs::path& p, const std::string& s) { std::ofstream(p, std::ios::binary) << s; }

std::string asset(const char* name) { return std::string(GSB_ASSET_DIR) + "/" + name; }

double header_value(const std::string& out, const std::string& key) {
  const auto pos = out.find("# " + key + "=");
  REQUIRE(pos != std::string::npos);
  return std::stod(out.substr(pos + key.size() + 3));
}

}  // namespace

TEST_CASE("exit codes") {
  CHECK(gsb_cli("--help").code == 0);
  CHECK(gsb_cli("run --help").code == 0);
  CHECK(gsb_cli("").code == 2);
  CHECK(gsb_cli("run --no-such-flag").code == 2);
  CHECK(gsb_cli("validate --config /nonexistent.json").code == 2);
  CHECK(gsb_cli("sample --alpha 0.5 --random-weights --out /dev/null").code == 2);
  CHECK(gsb_cli("run --config " + asset("reference_5x10.json") + " --policies imed-gs2 --runs 1 --horizon 10").code == 2);
}

TEST_CASE("invalid configurations are rejected with the offending pair") {
  const auto dir = scratch_dir();
  const auto path = dir / "asym.json";
  spit(path, R"({"n_arms": 1, "n_users": 3, "means": [[0.5, 0.5, 0.5]],
                 "weights": [[0, 0.1, 0.2], [0.1, 0, 0.1], [0.3, 0.1, 0]]})");
  const auto v = gsb_cli("validate --config " + path.string());
  CHECK(v.code == 2);
  CHECK(v.output.find("w[0][2]") != std::string::npos);
  const auto lb = gsb_cli("lower-bound --config " + path.string());
  CHECK(lb.code == 2);
  CHECK(lb.output.find("w[0][2]") != std::string::npos);

  spit(path, "{ not json");
  CHECK(gsb_cli("validate --config " + path.string()).code == 2);
  fs::remove_all(dir);
}

TEST_CASE("run writes one row per step and policy") {
  const auto r = gsb_cli("run --config " + asset("reference_5x10.json") +
                         " --policies imed --runs 1 --horizon 10 --thinning 1 --out -");
  REQUIRE(r.code == 0);
  std::istringstream in(r.output);
  std::string line;
  int rows = 0;
  std::getline(in, line);
  CHECK(line.rfind("t,policy,mean_regret,std_regret,n_runs", 0) == 0);
  while (std::getline(in, line))
    if (!line.empty()) ++rows;
  CHECK(rows == 10);
}

TEST_CASE("sample is deterministic and validates") {
  const auto dir = scratch_dir();
  const auto a = dir / "a.json";
  const auto b = dir / "b.json";
  REQUIRE(gsb_cli("sample --arms 4 --users 6 --random-weights --seed 7 --out " + a.string()).code == 0);
  REQUIRE(gsb_cli("sample --arms 4 --users 6 --random-weights --seed 7 --out " + b.string()).code == 0);
  CHECK(slurp(a) == slurp(b));
  const auto v = gsb_cli("validate --config " + a.string());
  CHECK(v.code == 0);
  CHECK(v.output.find("\"valid\": true") != std::string::npos);

  REQUIRE(gsb_cli("sample --arms 3 --users 1 --alpha 0.4 --out " + a.string()).code == 0);
  const auto cfg = gsb::load_config(a.string());
  CHECK(cfg.n_users() == 1);
  CHECK(cfg.weights(0, 0) == 0.0);
  fs::remove_all(dir);
}

TEST_CASE("lower bound scales with log-frequency") {
  const auto full = gsb_cli("lower-bound --config " + asset("reference_5x10.json"));
  const auto half = gsb_cli("lower-bound --config " + asset("reference_5x10.json") + " --beta 0.5");
  REQUIRE(full.code == 0);
  REQUIRE(half.code == 0);
  const double s1 = header_value(full.output, "c_star_struct");
  const double s2 = header_value(half.output, "c_star_struct");
  const double a1 = header_value(full.output, "c_star_agnostic");
  const double a2 = header_value(half.output, "c_star_agnostic");
  CHECK(s2 == doctest::Approx(s1 / 2).epsilon(1e-12));
  CHECK(a2 == doctest::Approx(a1 / 2).epsilon(1e-12));
  CHECK(s1 == doctest::Approx(7.263567182836703).epsilon(1e-12));
  CHECK(header_value(full.output, "ratio") == doctest::Approx(s1 / a1));
}

TEST_CASE("ratio curve endpoints") {
  const auto r = gsb_cli("ratio-curve --alphas 0,1 --samples 5 --arms 3 --users 2 --seed 1 --out -");
  REQUIRE(r.code == 0);
  std::istringstream in(r.output);
  std::string header, row0, row1;
  std::getline(in, header);
  std::getline(in, row0);
  std::getline(in, row1);
  CHECK(row0.rfind("0,0.5,", 0) == 0);
  CHECK(row1.rfind("1,1,", 0) == 0);
}
