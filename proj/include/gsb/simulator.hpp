// Copyright 2026 The gsbandit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "gsb/graph.hpp"
#include "gsb/grid.hpp"
#include "gsb/policies.hpp"

namespace gsb {

/// Bernoulli rewards drawn from the kRewards stream of a run seed: the draw
/// at step t is independent of every other step and of the policy.
class Environment {
 public:
  Environment(BanditConfig config, std::uint64_t seed) : config_(std::move(config)), seed_(seed) {}

  [[nodiscard]] double pull(std::size_t arm, std::size_t user, std::uint64_t step) const;
  [[nodiscard]] const BanditConfig& config() const { return config_; }

 private:
  BanditConfig config_;
  std::uint64_t seed_;
};

struct UserSequence {
  enum class Kind { kRoundRobin, kFixedList, kPolicyChosen };
  Kind kind = Kind::kPolicyChosen;
  /// Cycled when shorter than the horizon.
  std::vector<std::size_t> list;

  static UserSequence round_robin() { return {Kind::kRoundRobin, {}}; }
  static UserSequence fixed(std::vector<std::size_t> users) { return {Kind::kFixedList, std::move(users)}; }
  static UserSequence policy_chosen() { return {}; }

  /// User imposed at 0-based step t.
  [[nodiscard]] std::size_t user_at(std::uint64_t t, std::size_t n_users) const;
};

/// Step-invariant failure in a checked run; the message carries the step
/// index and a dump of the policy state.
class InvariantViolation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RunOptions {
  std::int64_t horizon = 1;
  std::uint64_t seed = 0;
  Scenario scenario = Scenario::kControlled;
  /// Ignored in the controlled scenario; round-robin when unset there.
  UserSequence users = UserSequence::round_robin();
  /// Geometric checkpoint factor; <= 1 records every step.
  double thinning = 1.1;
  std::vector<std::int64_t> extra_checkpoints;
  bool check_invariants = false;
  /// Empirical LP solver of the GS* policies; empty means solve_empirical.
  LpSolver lp;
};

struct Checkpoint {
  std::int64_t t = 0;
  double pseudo_regret = 0.0;
  std::int64_t min_user_count = 0;
  /// NaN when no arm has a defined statistic; may be +inf.
  double pareto_max = 0.0;
  double realized_reward = 0.0;
};

struct RunTrace {
  PolicyId policy = PolicyId::kImed;
  std::int64_t horizon = 0;
  std::vector<Checkpoint> checkpoints;
  std::array<std::int64_t, kPhaseCount> phase_counts{};
  Grid<std::int64_t> counts;
  std::vector<std::int64_t> c;
  std::vector<std::int64_t> c_plus;
  std::vector<std::int64_t> forced_rounds;
  std::int64_t lp_solves = 0;
  std::int64_t register_overwrites = 0;
  double incremental_regret = 0.0;
  double realized_reward = 0.0;

  [[nodiscard]] std::vector<std::int64_t> user_counts() const;
  [[nodiscard]] const Checkpoint& at(std::int64_t t) const;
};

/// Sorted unique round(factor^k) <= horizon, plus the extras and the horizon.
std::vector<std::int64_t> checkpoint_grid(std::int64_t horizon, double factor,
                                          const std::vector<std::int64_t>& extra = {});

/// Sum of gap * count over all couples.
double pseudo_regret(const BanditConfig& config, const Grid<std::int64_t>& counts);

/// Per arm: min over its sub-optimal couples (a,b) with N_b >= 2 of
/// sum_{b' in B_{a,b}} kl(mu(a,b') | mu*(b) - w(b,b')) N(a,b') / log N_b.
/// nullopt for arms without such a couple; the value may be +inf.
std::vector<std::optional<double>> pareto_statistic(const BanditConfig& config, const Grid<std::int64_t>& counts);

/// Max of the defined per-arm statistics, NaN when none is defined.
double pareto_max_over_arms(const BanditConfig& config, const Grid<std::int64_t>& counts);

/// log N_b / log T per user. Requires T >= 2.
std::vector<double> log_frequency_estimate(const std::vector<std::int64_t>& user_counts, std::int64_t horizon);

RunTrace run(const BanditConfig& config, PolicyId policy, const RunOptions& options);

/// Either a fixed configuration or a fresh (w, nu) sample per run.
struct ConfigSource {
  std::optional<BanditConfig> fixed;
  std::size_t n_arms = 0;
  std::size_t n_users = 0;

  static ConfigSource of(BanditConfig config) {
    const std::size_t arms = config.n_arms();
    const std::size_t users = config.n_users();
    return {std::move(config), arms, users};
  }
  static ConfigSource random(std::size_t arms, std::size_t users) { return {std::nullopt, arms, users}; }

  /// The configuration of the run with this seed (shared by all policies).
  [[nodiscard]] BanditConfig config_for(std::uint64_t run_seed) const;
};

struct BatchSpec {
  ConfigSource source;
  std::vector<PolicyId> policies;
  Scenario scenario = Scenario::kControlled;
  UserSequence users = UserSequence::round_robin();
  std::int64_t horizon = 1;
  std::size_t n_runs = 1;
  std::uint64_t master_seed = 0;
  double thinning = 1.1;
  std::vector<std::int64_t> extra_checkpoints;
  bool check_invariants = false;
  /// 0 picks the hardware concurrency; GBL_THREADS caps either choice.
  std::size_t threads = 0;
};

class RunFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct CurvePoint {
  std::int64_t t = 0;
  double mean = 0.0;
  double std_dev = 0.0;
  std::size_t n_runs = 0;
};

struct BatchResult {
  std::vector<PolicyId> policies;
  /// traces[p][r]: policy p, run r.
  std::vector<std::vector<RunTrace>> traces;
  /// curves[p]: mean and sample standard deviation of pseudo-regret.
  std::vector<std::vector<CurvePoint>> curves;
};

/// Seed of run r: master_seed ^ r.
inline std::uint64_t run_seed(std::uint64_t master_seed, std::uint64_t run) { return master_seed ^ run; }

/// Worker count after applying the GBL_THREADS cap.
std::size_t resolve_threads(std::size_t requested);

BatchResult batch(const BatchSpec& spec);

/// Columns t,policy,run,pseudo_regret,min_Nb,pareto_max_over_arms.
void write_trace_csv(std::ostream& out, const BatchResult& result);

struct ReferenceLines {
  double c_struct = 0.0;
  double c_agnostic = 0.0;
};

/// Columns t,policy,mean_regret,std_regret,n_runs, plus LB_struct and
/// LB_agnostic (constant times ln t) when reference lines are given.
void write_aggregate_csv(std::ostream& out, const BatchResult& result,
                         const std::optional<ReferenceLines>& lines = std::nullopt);

}  // namespace gsb
