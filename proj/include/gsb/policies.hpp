// Copyright 2026 The gsbandit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "gsb/ext_real.hpp"
#include "gsb/graph.hpp"
#include "gsb/grid.hpp"
#include "gsb/lp.hpp"

namespace gsb {

enum class PolicyId { kImed, kImedGs, kImedGsStar, kImedGs2, kImedGsStar2 };
enum class Scenario { kControlled, kUncontrolled };

/// "imed", "imed-gs", "imed-gs-star", "imed-gs2", "imed-gs-star2".
std::string_view to_string(PolicyId id);
/// Throws std::invalid_argument on an unknown identifier.
PolicyId parse_policy(std::string_view name);
std::string_view to_string(Scenario s);
Scenario parse_scenario(std::string_view name);
/// imed runs in both scenarios; the *2 variants only when users are imposed.
bool supports(PolicyId id, Scenario s);

enum class Phase {
  kExploit,
  kExploreTrack,
  kExploreForced,
  kDelayedForced,
  kDelayedTrack,
  kExploreCurrent,  // sub-optimal pull chosen directly by the index
};
inline constexpr std::size_t kPhaseCount = 6;
std::string_view to_string(Phase p);

struct Decision {
  std::size_t arm = 0;
  std::optional<std::size_t> user;
  Phase phase = Phase::kExploit;
};

/// Mutable per-run statistics. `t` counts completed pulls.
struct PolicyState {
  PolicyState(std::size_t n_arms, std::size_t n_users);

  std::size_t n_arms;
  std::size_t n_users;
  Grid<std::int64_t> counts;
  Grid<double> reward_sums;
  std::vector<std::int64_t> user_counts;
  std::int64_t t = 0;

  // Exploration counters of the GS* family; c_plus doubles on forced rounds.
  std::vector<std::int64_t> c;
  std::vector<std::int64_t> c_plus;
  std::vector<std::int64_t> forced_rounds;

  // Delayed-exploration registers (uncontrolled GS*).
  std::vector<std::optional<std::size_t>> forced_register;
  std::vector<std::optional<std::size_t>> explore_register;
  std::int64_t register_overwrites = 0;

  std::int64_t lp_solves = 0;

  void record(std::size_t arm, std::size_t user, double reward);
};

/// Empirical quantities with a cache of the index matrix. After each pull,
/// update() refreshes the pulled couple's arm row and user column, the only
/// entries whose inputs changed.
class EmpiricalView {
 public:
  EmpiricalView(WeightMatrix w, std::size_t n_arms);

  void refresh(const PolicyState& state);
  void update(const PolicyState& state, std::size_t arm, std::size_t user);

  [[nodiscard]] const WeightMatrix& weights() const { return w_; }
  [[nodiscard]] const Grid<double>& mu_hat() const { return mu_hat_; }
  [[nodiscard]] const std::vector<double>& mu_hat_star() const { return mu_hat_star_; }
  [[nodiscard]] double mu_hat(std::size_t a, std::size_t b) const { return mu_hat_(a, b); }
  [[nodiscard]] double mu_hat_star(std::size_t b) const { return mu_hat_star_[b]; }
  /// (a, b) is in the empirical optimal set: mu_hat(a,b) == mu_hat_star(b).
  [[nodiscard]] bool is_optimal(std::size_t a, std::size_t b) const { return mu_hat_(a, b) == mu_hat_star_[b]; }
  [[nodiscard]] ExtReal cached_index(std::size_t a, std::size_t b) const { return index_(a, b); }

 private:
  void recompute_user(const PolicyState& state, std::size_t b);
  void recompute_index(const PolicyState& state, std::size_t a, std::size_t b);

  WeightMatrix w_;
  Grid<double> mu_hat_;
  std::vector<double> mu_hat_star_;
  Grid<ExtReal> index_;
};

/// Current informative users of (a, b): positive count and
/// mu_hat(a,b') < mu_hat_star(b) - w(b,b'). Empty for optimal couples.
std::vector<std::size_t> informative_set(const EmpiricalView& view, const PolicyState& state, std::size_t a,
                                         std::size_t b);

/// Graph-structured IMED index, computed from scratch. Unpulled couples get
/// -inf; optimal couples log N; otherwise the sum over the informative set
/// of N * kl(mu_hat(a,b') | mu_hat_star(b) - w(b,b')) + log N(a,b').
ExtReal index(const EmpiricalView& view, const PolicyState& state, std::size_t a, std::size_t b);

/// log N_b(t) / log t, floored at kBetaFloor; 1 until every user was seen.
double beta_hat(const PolicyState& state, std::size_t b);
inline constexpr double kBetaFloor = 1e-3;

/// index / beta_hat, using the cached index.
ExtReal normalized_index(const EmpiricalView& view, const PolicyState& state, std::size_t a, std::size_t b);

using LpSolver = std::function<LpSolution(const LpInstance&)>;

/// What an exploration round of the GS* family looked at; consumed by the
/// invariant checks.
struct ExplorationTrace {
  bool explored = false;
  std::size_t arm_bar = 0;
  std::size_t user_bar = 0;
  ExtReal index_bar;
  bool forced = false;
  bool lp_solved = false;
  std::size_t target_user = 0;
  /// N_opt - N over the tracked set (tracking rounds only).
  std::vector<double> tracking_gaps;
};

/// Structure-free IMED. `view` must be built over WeightMatrix::ones. With a
/// user the arm minimizing that user's index is chosen; without one the
/// couple minimizing the index overall.
Decision step_imed(const EmpiricalView& view, const PolicyState& state, std::optional<std::size_t> user);

/// Pulls the couple of minimal index.
Decision step_imed_gs(const EmpiricalView& view, const PolicyState& state);

/// Index decides exploit/explore; exploration forces the least-pulled user of
/// the arm when c == c_plus, otherwise tracks the empirical allocation.
Decision step_imed_gs_star(const EmpiricalView& view, PolicyState& state, const LpSolver& lp,
                           ExplorationTrace* trace = nullptr);

/// Arm of minimal normalized index for the imposed user.
Decision step_imed_gs2(const EmpiricalView& view, const PolicyState& state, std::size_t incoming_user);

/// Uncontrolled GS*: exploration targets are written to the forced/explore
/// registers of the target user and served when that user arrives.
Decision step_imed_gs_star2(const EmpiricalView& view, PolicyState& state, std::size_t incoming_user,
                            const LpSolver& lp, ExplorationTrace* trace = nullptr);

/// A policy with its own state and view.
class Policy {
 public:
  Policy(PolicyId id, const WeightMatrix& w, std::size_t n_arms, LpSolver lp = solve_empirical);

  /// `incoming_user` must be set exactly for the uncontrolled policies and
  /// for imed in the uncontrolled scenario.
  Decision decide(std::optional<std::size_t> incoming_user, ExplorationTrace* trace = nullptr);
  void observe(std::size_t arm, std::size_t user, double reward);

  [[nodiscard]] PolicyId id() const { return id_; }
  [[nodiscard]] const PolicyState& state() const { return state_; }
  [[nodiscard]] const EmpiricalView& view() const { return view_; }

 private:
  PolicyId id_;
  PolicyState state_;
  EmpiricalView view_;
  LpSolver lp_;
};

}  // namespace gsb
