// Copyright 2026 The gsbandit Authors
// SPDX-License-Identifier: Apache-2.0
//
// gsb: lower bounds, configuration sampling and validation, and batch
// simulation of the graph-structured IMED policies.

#include <fmt/format.h>
#include <fmt/ostream.h>

#include <CLI11.hpp>
#include <cmath>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "gsb/config_io.hpp"
#include "gsb/graph.hpp"
#include "gsb/lp.hpp"
#include "gsb/policies.hpp"
#include "gsb/rng.hpp"
#include "gsb/simulator.hpp"

namespace {

constexpr int kExitInvalid = 2;
constexpr int kExitFailure = 3;

// Raised for user errors detected after parsing; maps to exit code 2.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, sep))
    if (!item.empty()) out.push_back(item);
  return out;
}

double parse_double(const std::string& s) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    throw UsageError("not a number: '" + s + "'");
  }
  if (used != s.size()) throw UsageError("not a number: '" + s + "'");
  return v;
}

std::size_t parse_index(const std::string& s) {
  const double v = parse_double(s);
  if (v < 0 || v != std::floor(v)) throw UsageError("not an index: '" + s + "'");
  return static_cast<std::size_t>(v);
}

// Writes to `path`, or stdout for "-".
template <class F>
void with_output(const std::string& path, F&& write) {
  if (path == "-") {
    write(std::cout);
    return;
  }
  std::ofstream out(path);
  if (!out) throw UsageError("cannot write " + path);
  write(out);
}

// Metric and closed-set membership; prints the violations and throws.
void require_valid(const gsb::BanditConfig& config) {
  const auto metric = gsb::validate_weights(config.weights);
  const auto member = gsb::check_membership(config, /*strict=*/false);
  if (metric.empty() && member.member) return;
  for (const auto& v : metric) std::cerr << "weights: " << gsb::to_string(v.kind) << ": " << v.message << '\n';
  for (const auto& v : member.violations) std::cerr << "membership: " << v.message << '\n';
  throw UsageError("invalid configuration");
}

gsb::BanditConfig load_valid(const std::string& path) {
  gsb::BanditConfig config;
  try {
    config = gsb::load_config(path);
  } catch (const gsb::ConfigError& e) {
    throw UsageError(e.what());
  }
  require_valid(config);
  return config;
}

std::vector<double> parse_beta(const std::string& spec, std::size_t n_users) {
  const auto items = split(spec, ',');
  std::vector<double> beta;
  for (const auto& s : items) beta.push_back(parse_double(s));
  if (beta.size() == 1) beta.assign(n_users, beta.front());
  if (beta.size() != n_users) throw UsageError(fmt::format("--beta needs 1 or {} values", n_users));
  for (double b : beta)
    if (!(b > 0.0) || !std::isfinite(b)) throw UsageError("--beta values must be positive");
  return beta;
}

// "start:step:stop" or a comma-separated list.
std::vector<double> parse_grid(const std::string& spec) {
  std::vector<double> grid;
  const auto parts = split(spec, ':');
  if (spec.find(':') != std::string::npos) {
    if (parts.size() != 3) throw UsageError("grid must be start:step:stop");
    const double start = parse_double(parts[0]);
    const double step = parse_double(parts[1]);
    const double stop = parse_double(parts[2]);
    if (!(step > 0.0) || stop < start) throw UsageError("grid step must be positive and stop >= start");
    const auto n = static_cast<std::size_t>(std::floor((stop - start) / step + 1e-9));
    for (std::size_t i = 0; i <= n; ++i)
      grid.push_back(std::round((start + static_cast<double>(i) * step) * 1e12) / 1e12);
  } else {
    for (const auto& s : split(spec, ',')) grid.push_back(parse_double(s));
  }
  if (grid.empty()) throw UsageError("empty grid");
  for (double a : grid)
    if (!(a >= 0.0 && a <= 1.0)) throw UsageError("grid values must lie in [0, 1]");
  return grid;
}

struct LowerBoundArgs {
  std::string config;
  std::string beta = "1";
};

int cmd_lower_bound(const LowerBoundArgs& args) {
  const auto config = load_valid(args.config);
  const auto beta = parse_beta(args.beta, config.n_users());
  const auto instances = gsb::build_instance(config, beta);
  double c_struct = 0.0;
  std::vector<std::string> rows;
  for (const auto& inst : instances) {
    const auto sol = gsb::solve(inst);
    c_struct += sol.objective;
    for (std::size_t j = 0; j < inst.n_vars(); ++j)
      rows.push_back(fmt::format("{},{},{},{}", inst.arm, inst.users[j], sol.allocation[j], sol.objective));
  }
  const double c_agnostic = gsb::agnostic_constant(config, beta);
  const double ratio = (c_struct == 0.0 && c_agnostic == 0.0) ? 1.0 : c_struct / c_agnostic;
  fmt::print("# c_star_struct={}\n# c_star_agnostic={}\n# ratio={}\n", c_struct, c_agnostic, ratio);
  fmt::print("arm,user,n_opt,objective\n");
  for (const auto& r : rows) fmt::print("{}\n", r);
  return 0;
}

struct RunArgs {
  std::string config;
  bool random = false;
  std::size_t arms = 5;
  std::size_t users = 10;
  std::string policies;
  std::string scenario = "controlled";
  std::string user_sequence = "round-robin";
  std::int64_t horizon = 10000;
  std::size_t runs = 100;
  std::uint64_t seed = 0;
  double thinning = 1.1;
  std::size_t threads = 0;
  bool debug_checks = false;
  std::string out = "-";
  std::string trace_out;
};

int cmd_run(const RunArgs& args) {
  gsb::BatchSpec spec;
  spec.scenario = gsb::parse_scenario(args.scenario);
  std::optional<gsb::ReferenceLines> lines;
  if (args.random) {
    if (args.arms < 1 || args.users < 1) throw UsageError("--arms and --users must be >= 1");
    spec.source = gsb::ConfigSource::random(args.arms, args.users);
  } else {
    if (args.config.empty()) throw UsageError("either --config or --random is required");
    auto config = load_valid(args.config);
    const std::vector<double> ones(config.n_users(), 1.0);
    lines = gsb::ReferenceLines{gsb::c_star(config, ones), gsb::agnostic_constant(config, ones)};
    spec.source = gsb::ConfigSource::of(std::move(config));
  }
  std::string policies = args.policies;
  if (policies.empty())
    policies = spec.scenario == gsb::Scenario::kControlled ? "imed,imed-gs,imed-gs-star" : "imed,imed-gs2,imed-gs-star2";
  for (const auto& name : split(policies, ',')) spec.policies.push_back(gsb::parse_policy(name));
  if (spec.policies.empty()) throw UsageError("no policy requested");
  for (auto id : spec.policies)
    if (!gsb::supports(id, spec.scenario))
      throw UsageError(fmt::format("policy {} does not run in the {} scenario", gsb::to_string(id), args.scenario));
  if (args.user_sequence == "round-robin") {
    spec.users = gsb::UserSequence::round_robin();
  } else {
    std::vector<std::size_t> list;
    for (const auto& s : split(args.user_sequence, ',')) list.push_back(parse_index(s));
    for (auto b : list)
      if (b >= spec.source.n_users) throw UsageError("user index out of range in --user-sequence");
    if (list.empty()) throw UsageError("empty --user-sequence");
    spec.users = gsb::UserSequence::fixed(std::move(list));
  }
  if (args.horizon < 1) throw UsageError("--horizon must be >= 1");
  if (args.runs < 1) throw UsageError("--runs must be >= 1");
  spec.horizon = args.horizon;
  spec.n_runs = args.runs;
  spec.master_seed = args.seed;
  spec.thinning = args.thinning;
  spec.threads = args.threads;
  spec.check_invariants = args.debug_checks;

  gsb::BatchResult result;
  try {
    result = gsb::batch(spec);
  } catch (const gsb::RunFailure& e) {
    std::cerr << "run failed: " << e.what() << '\n';
    return kExitFailure;
  }
  with_output(args.out, [&](std::ostream& os) { gsb::write_aggregate_csv(os, result, lines); });
  if (!args.trace_out.empty())
    with_output(args.trace_out, [&](std::ostream& os) { gsb::write_trace_csv(os, result); });
  return 0;
}

struct RatioArgs {
  std::string alphas = "0:0.1:1";
  std::size_t samples = 200;
  std::size_t arms = 5;
  std::size_t users = 10;
  std::uint64_t seed = 0;
  std::string out = "-";
};

int cmd_ratio_curve(const RatioArgs& args) {
  const auto grid = parse_grid(args.alphas);
  if (args.samples < 1 || args.arms < 1 || args.users < 1) throw UsageError("sizes must be >= 1");
  std::vector<gsb::RatioPoint> points;
  try {
    points = gsb::ratio_curve(grid, args.arms, args.users, args.samples, args.seed);
  } catch (const gsb::SamplerError& e) {
    std::cerr << "sampler failed: " << e.what() << '\n';
    return kExitFailure;
  }
  with_output(args.out, [&](std::ostream& os) {
    os << "alpha,mean_ratio,std_error,n_samples\n";
    for (const auto& p : points) fmt::print(os, "{},{},{},{}\n", p.alpha, p.mean, p.std_error, p.n_samples);
  });
  return 0;
}

struct SampleArgs {
  std::size_t arms = 5;
  std::size_t users = 10;
  std::optional<double> alpha;
  bool random_weights = false;
  std::uint64_t seed = 0;
  std::string out;
};

int cmd_sample(const SampleArgs& args) {
  if (args.arms < 1 || args.users < 1) throw UsageError("--arms and --users must be >= 1");
  if (args.alpha.has_value() == args.random_weights) throw UsageError("give exactly one of --alpha and --random-weights");
  if (args.alpha && !(*args.alpha >= 0.0 && *args.alpha <= 1.0)) throw UsageError("--alpha must lie in [0, 1]");
  gsb::BanditConfig config;
  try {
    const auto w = args.alpha ? gsb::WeightMatrix::uniform(args.users, *args.alpha)
                              : gsb::sample_weights(args.users, gsb::mix64(args.seed));
    config = gsb::sample_config(args.arms, w, args.seed);
  } catch (const gsb::SamplerError& e) {
    std::cerr << "sampler failed: " << e.what() << '\n';
    return kExitFailure;
  }
  gsb::save_config(args.out, config);
  const std::vector<double> ones(config.n_users(), 1.0);
  fmt::print("c_star={}\n", gsb::c_star(config, ones));
  return 0;
}

int cmd_validate(const std::string& path) {
  gsb::BanditConfig config;
  try {
    config = gsb::load_config(path);
  } catch (const gsb::ConfigError& e) {
    nlohmann::json err{{"valid", false}, {"error", e.what()}};
    std::cout << err.dump(2) << '\n';
    return kExitInvalid;
  }
  nlohmann::json report;
  auto metric = nlohmann::json::array();
  for (const auto& v : gsb::validate_weights(config.weights))
    metric.push_back({{"kind", gsb::to_string(v.kind)}, {"indices", v.indices}, {"message", v.message}});
  auto membership = nlohmann::json::array();
  const auto closed = gsb::check_membership(config, /*strict=*/false);
  for (const auto& v : closed.violations)
    membership.push_back({{"arm", v.arm}, {"user", v.user}, {"other_user", v.other_user}, {"message", v.message}});
  const auto strict = gsb::check_membership(config, /*strict=*/true);
  auto boundary = nlohmann::json::array();
  for (const auto& v : strict.violations)
    if (v.kind == gsb::MembershipViolationKind::kBoundary)
      boundary.push_back({{"arm", v.arm}, {"user", v.user}, {"other_user", v.other_user}, {"message", v.message}});
  const bool non_peculiar = gsb::is_non_peculiar(config);
  const bool valid = metric.empty() && closed.member && non_peculiar;
  report["metric_violations"] = metric;
  report["member"] = closed.member;
  report["membership_violations"] = membership;
  report["strict_member"] = strict.member;
  report["boundary_violations"] = boundary;
  report["non_peculiar"] = non_peculiar;
  report["valid"] = valid;
  std::cout << report.dump(2) << '\n';
  return valid ? 0 : kExitInvalid;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Graph-structured IMED bandits: lower bounds, sampling, validation and simulation"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Expand help for every subcommand");

  LowerBoundArgs lb;
  auto* lb_cmd = app.add_subcommand("lower-bound", "Structured and structure-free regret constants");
  lb_cmd->add_option("--config", lb.config, "Configuration JSON")->required()->check(CLI::ExistingFile);
  lb_cmd->add_option("--beta", lb.beta, "Log-frequencies: one value or one per user, comma-separated")
      ->capture_default_str();

  RunArgs ra;
  auto* run_cmd = app.add_subcommand("run", "Batch simulation with aggregate regret curves");
  auto* cfg_opt = run_cmd->add_option("--config", ra.config, "Fixed configuration JSON")->check(CLI::ExistingFile);
  auto* rnd_opt = run_cmd->add_flag("--random", ra.random, "Fresh random (weights, means) per run");
  cfg_opt->excludes(rnd_opt);
  run_cmd->add_option("--arms", ra.arms, "Arms in random mode")->capture_default_str();
  run_cmd->add_option("--users", ra.users, "Users in random mode")->capture_default_str();
  run_cmd->add_option("--policies", ra.policies,
                      "Comma-separated policies (default: imed,imed-gs,imed-gs-star when controlled, "
                      "imed,imed-gs2,imed-gs-star2 when uncontrolled)");
  run_cmd->add_option("--scenario", ra.scenario, "controlled or uncontrolled")
      ->check(CLI::IsMember({"controlled", "uncontrolled"}))
      ->capture_default_str();
  run_cmd->add_option("--user-sequence", ra.user_sequence, "round-robin or a comma-separated user list (cycled)")
      ->capture_default_str();
  run_cmd->add_option("--horizon", ra.horizon, "Steps per run")->capture_default_str();
  run_cmd->add_option("--runs", ra.runs, "Runs per policy")->capture_default_str();
  run_cmd->add_option("--seed", ra.seed, "Master seed; run r uses seed ^ r")->capture_default_str();
  run_cmd->add_option("--thinning", ra.thinning, "Geometric checkpoint factor (<= 1: every step)")
      ->capture_default_str();
  run_cmd->add_option("--threads", ra.threads, "Worker threads (0: hardware; GBL_THREADS caps)")
      ->capture_default_str();
  run_cmd->add_flag("--debug-checks", ra.debug_checks, "Assert step invariants");
  run_cmd->add_option("--out", ra.out, "Aggregate CSV path ('-' for stdout)")->capture_default_str();
  run_cmd->add_option("--trace-out", ra.trace_out, "Per-run trace CSV path");

  RatioArgs rc;
  auto* ratio_cmd = app.add_subcommand("ratio-curve", "Mean structured / structure-free constant ratio per alpha");
  ratio_cmd->add_option("--alphas", rc.alphas, "start:step:stop or comma list in [0, 1]")->capture_default_str();
  ratio_cmd->add_option("--samples", rc.samples, "Configurations per alpha")->capture_default_str();
  ratio_cmd->add_option("--arms", rc.arms, "Arms")->capture_default_str();
  ratio_cmd->add_option("--users", rc.users, "Users")->capture_default_str();
  ratio_cmd->add_option("--seed", rc.seed, "Seed")->capture_default_str();
  ratio_cmd->add_option("--out", rc.out, "CSV path ('-' for stdout)")->capture_default_str();

  SampleArgs sa;
  auto* sample_cmd = app.add_subcommand("sample", "Sample a configuration from the structured set");
  sample_cmd->add_option("--arms", sa.arms, "Arms")->capture_default_str();
  sample_cmd->add_option("--users", sa.users, "Users")->capture_default_str();
  auto* alpha_opt = sample_cmd->add_option("--alpha", sa.alpha, "Uniform off-diagonal weight");
  auto* rw_opt = sample_cmd->add_flag("--random-weights", sa.random_weights, "Random metric weights");
  alpha_opt->excludes(rw_opt);
  sample_cmd->add_option("--seed", sa.seed, "Seed")->capture_default_str();
  sample_cmd->add_option("--out", sa.out, "Output JSON path")->required();

  std::string validate_path;
  auto* validate_cmd = app.add_subcommand("validate", "Check metric, membership and non-peculiarity");
  validate_cmd->add_option("--config", validate_path, "Configuration JSON")->required()->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitInvalid;
  }

  try {
    if (*lb_cmd) return cmd_lower_bound(lb);
    if (*run_cmd) return cmd_run(ra);
    if (*ratio_cmd) return cmd_ratio_curve(rc);
    if (*sample_cmd) return cmd_sample(sa);
    if (*validate_cmd) return cmd_validate(validate_path);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInvalid;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInvalid;
  } catch (const std::exception& e) {
    std::cerr << "failure: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitInvalid;
}
