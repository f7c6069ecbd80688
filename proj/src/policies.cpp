// Copyright 2026 The gsbandit Authors
// SPDX-License-Identifier: Apache-2.0

#include "gsb/policies.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "gsb/kl.hpp"

namespace gsb {

std::string_view to_string(PolicyId id) {
  switch (id) {
    case PolicyId::kImed: return "imed";
    case PolicyId::kImedGs: return "imed-gs";
    case PolicyId::kImedGsStar: return "imed-gs-star";
    case PolicyId::kImedGs2: return "imed-gs2";
    case PolicyId::kImedGsStar2: return "imed-gs-star2";
  }
  return "?";
}

PolicyId parse_policy(std::string_view name) {
  for (auto id : {PolicyId::kImed, PolicyId::kImedGs, PolicyId::kImedGsStar, PolicyId::kImedGs2, PolicyId::kImedGsStar2})
    if (to_string(id) == name) return id;
  throw std::invalid_argument("unknown policy '" + std::string(name) + "'");
}

std::string_view to_string(Scenario s) { return s == Scenario::kControlled ? "controlled" : "uncontrolled"; }

Scenario parse_scenario(std::string_view name) {
  if (name == "controlled") return Scenario::kControlled;
  if (name == "uncontrolled") return Scenario::kUncontrolled;
  throw std::invalid_argument("unknown scenario '" + std::string(name) + "'");
}

bool supports(PolicyId id, Scenario s) {
  switch (id) {
    case PolicyId::kImed: return true;
    case PolicyId::kImedGs:
    case PolicyId::kImedGsStar: return s == Scenario::kControlled;
    case PolicyId::kImedGs2:
    case PolicyId::kImedGsStar2: return s == Scenario::kUncontrolled;
  }
  return false;
}

std::string_view to_string(Phase p) {
  switch (p) {
    case Phase::kExploit: return "exploit";
    case Phase::kExploreTrack: return "explore-track";
    case Phase::kExploreForced: return "explore-forced";
    case Phase::kDelayedForced: return "delayed-forced";
    case Phase::kDelayedTrack: return "delayed-track";
    case Phase::kExploreCurrent: return "explore-current";
  }
  return "?";
}

PolicyState::PolicyState(std::size_t arms, std::size_t users)
    : n_arms(arms),
      n_users(users),
      counts(arms, users, 0),
      reward_sums(arms, users, 0.0),
      user_counts(users, 0),
      c(arms, 1),
      c_plus(arms, 1),
      forced_rounds(arms, 0),
      forced_register(users),
      explore_register(users) {
  if (arms == 0 || users == 0) throw DimensionError("PolicyState: need at least one arm and one user");
}

void PolicyState::record(std::size_t arm, std::size_t user, double reward) {
  if (arm >= n_arms || user >= n_users) throw std::out_of_range("PolicyState::record: couple out of range");
  ++counts(arm, user);
  reward_sums(arm, user) += reward;
  ++user_counts[user];
  ++t;
}

EmpiricalView::EmpiricalView(WeightMatrix w, std::size_t n_arms)
    : w_(std::move(w)),
      mu_hat_(n_arms, w_.n_users(), 0.0),
      mu_hat_star_(w_.n_users(), 0.0),
      index_(n_arms, w_.n_users(), ExtReal::neg_infinity()) {}

void EmpiricalView::recompute_user(const PolicyState& state, std::size_t b) {
  double best = 0.0;
  for (std::size_t a = 0; a < mu_hat_.rows(); ++a) {
    const auto n = state.counts(a, b);
    mu_hat_(a, b) = n > 0 ? state.reward_sums(a, b) / static_cast<double>(n) : 0.0;
    best = std::max(best, mu_hat_(a, b));
  }
  mu_hat_star_[b] = best;
}

void EmpiricalView::recompute_index(const PolicyState& state, std::size_t a, std::size_t b) {
  index_(a, b) = index(*this, state, a, b);
}

void EmpiricalView::refresh(const PolicyState& state) {
  for (std::size_t b = 0; b < mu_hat_.cols(); ++b) recompute_user(state, b);
  for (std::size_t a = 0; a < mu_hat_.rows(); ++a)
    for (std::size_t b = 0; b < mu_hat_.cols(); ++b) recompute_index(state, a, b);
}

void EmpiricalView::update(const PolicyState& state, std::size_t arm, std::size_t user) {
  recompute_user(state, user);
  for (std::size_t b = 0; b < mu_hat_.cols(); ++b) recompute_index(state, arm, b);
  for (std::size_t a = 0; a < mu_hat_.rows(); ++a)
    if (a != arm) recompute_index(state, a, user);
}

std::vector<std::size_t> informative_set(const EmpiricalView& view, const PolicyState& state, std::size_t a,
                                         std::size_t b) {
  std::vector<std::size_t> out;
  if (view.is_optimal(a, b)) return out;
  const double top = view.mu_hat_star(b);
  for (std::size_t c = 0; c < state.n_users; ++c)
    if (state.counts(a, c) > 0 && view.mu_hat(a, c) < top - view.weights()(b, c)) out.push_back(c);
  return out;
}

ExtReal index(const EmpiricalView& view, const PolicyState& state, std::size_t a, std::size_t b) {
  const auto n = state.counts(a, b);
  if (n == 0) return ExtReal::neg_infinity();
  if (view.is_optimal(a, b)) return ExtReal(std::log(static_cast<double>(n)));
  ExtReal sum;
  const double top = view.mu_hat_star(b);
  for (std::size_t c : informative_set(view, state, a, b)) {
    const auto nc = static_cast<double>(state.counts(a, c));
    sum += kl_plus(view.mu_hat(a, c), top - view.weights()(b, c)).scaled(nc) + ExtReal(std::log(nc));
  }
  return sum;
}

double beta_hat(const PolicyState& state, std::size_t b) {
  if (state.t <= 1) return 1.0;
  for (auto n : state.user_counts)
    if (n == 0) return 1.0;
  const double v = std::log(static_cast<double>(state.user_counts[b])) / std::log(static_cast<double>(state.t));
  return std::max(v, kBetaFloor);
}

ExtReal normalized_index(const EmpiricalView& view, const PolicyState& state, std::size_t a, std::size_t b) {
  return view.cached_index(a, b) / beta_hat(state, b);
}

namespace {

struct Couple {
  std::size_t arm;
  std::size_t user;
};

// Lexicographic tie-break on (arm, user): the first minimum wins.
template <class Score>
Couple argmin_couple(std::size_t n_arms, std::size_t n_users, Score score) {
  Couple best{0, 0};
  ExtReal best_value = score(0, 0);
  for (std::size_t a = 0; a < n_arms; ++a)
    for (std::size_t b = 0; b < n_users; ++b) {
      const ExtReal v = score(a, b);
      if (v < best_value) {
        best_value = v;
        best = {a, b};
      }
    }
  return best;
}

template <class Score>
std::size_t argmin_arm(std::size_t n_arms, Score score) {
  std::size_t best = 0;
  ExtReal best_value = score(0);
  for (std::size_t a = 1; a < n_arms; ++a) {
    const ExtReal v = score(a);
    if (v < best_value) {
      best_value = v;
      best = a;
    }
  }
  return best;
}

std::size_t least_pulled_user(const PolicyState& state, std::size_t arm) {
  std::size_t best = 0;
  for (std::size_t b = 1; b < state.n_users; ++b)
    if (state.counts(arm, b) < state.counts(arm, best)) best = b;
  return best;
}

std::vector<double> all_beta_hats(const PolicyState& state) {
  std::vector<double> out(state.n_users);
  for (std::size_t b = 0; b < state.n_users; ++b) out[b] = beta_hat(state, b);
  return out;
}

// Tracking rule: the user of B_hat(arm, user_bar) + {user_bar} furthest below
// its target N_opt = n_opt * scale. A -inf scale (unpulled couple of the arm)
// means the targets are all zero and no program needs to be solved.
std::size_t track(const EmpiricalView& view, PolicyState& state, std::size_t arm, std::size_t user_bar, ExtReal scale,
                  std::span<const double> rhs, const LpSolver& lp, ExplorationTrace* trace) {
  if (scale.is_pos_inf()) throw std::logic_error("track: infinite index scale");
  const double factor = scale.is_neg_inf() ? 0.0 : std::max(scale.value(), 0.0);

  auto tracked = informative_set(view, state, arm, user_bar);
  if (std::find(tracked.begin(), tracked.end(), user_bar) == tracked.end()) {
    tracked.push_back(user_bar);
    std::sort(tracked.begin(), tracked.end());
  }

  std::vector<double> n_opt(state.n_users, 0.0);
  if (factor > 0.0) {
    const LpInstance inst = build_empirical_instance(view.mu_hat(), view.mu_hat_star(), state.counts, view.weights(), arm, rhs);
    const LpSolution sol = lp(inst);
    ++state.lp_solves;
    for (std::size_t j = 0; j < inst.n_vars(); ++j) n_opt[inst.users[j]] = sol.allocation[j];
    if (trace) trace->lp_solved = true;
  }

  std::size_t best = tracked.front();
  double best_gap = 0.0;
  for (std::size_t i = 0; i < tracked.size(); ++i) {
    const std::size_t b = tracked[i];
    const double gap = n_opt[b] * factor - static_cast<double>(state.counts(arm, b));
    if (trace) trace->tracking_gaps.push_back(gap);
    if (i == 0 || gap > best_gap) {
      best_gap = gap;
      best = b;
    }
  }
  return best;
}

// Counter logic shared by both GS* variants. Returns the target user.
std::size_t explore_arm(const EmpiricalView& view, PolicyState& state, std::size_t arm, std::size_t user_bar,
                        ExtReal scale, std::span<const double> rhs, const LpSolver& lp, bool& forced,
                        ExplorationTrace* trace) {
  std::size_t target;
  forced = state.c[arm] == state.c_plus[arm];
  if (forced) {
    state.c_plus[arm] *= 2;
    ++state.forced_rounds[arm];
    target = least_pulled_user(state, arm);
  } else {
    target = track(view, state, arm, user_bar, scale, rhs, lp, trace);
  }
  ++state.c[arm];
  if (trace) {
    trace->explored = true;
    trace->arm_bar = arm;
    trace->user_bar = user_bar;
    trace->forced = forced;
    trace->target_user = target;
  }
  return target;
}

}  // namespace

Decision step_imed(const EmpiricalView& view, const PolicyState& state, std::optional<std::size_t> user) {
  if (user) {
    const std::size_t b = *user;
    const std::size_t a = argmin_arm(state.n_arms, [&](std::size_t x) { return view.cached_index(x, b); });
    return {a, b, view.is_optimal(a, b) ? Phase::kExploit : Phase::kExploreCurrent};
  }
  const auto [a, b] = argmin_couple(state.n_arms, state.n_users,
                                    [&](std::size_t x, std::size_t y) { return view.cached_index(x, y); });
  return {a, b, view.is_optimal(a, b) ? Phase::kExploit : Phase::kExploreCurrent};
}

Decision step_imed_gs(const EmpiricalView& view, const PolicyState& state) { return step_imed(view, state, std::nullopt); }

Decision step_imed_gs_star(const EmpiricalView& view, PolicyState& state, const LpSolver& lp, ExplorationTrace* trace) {
  const auto [arm, user_bar] = argmin_couple(state.n_arms, state.n_users,
                                             [&](std::size_t x, std::size_t y) { return view.cached_index(x, y); });
  if (trace) *trace = ExplorationTrace{};
  if (view.is_optimal(arm, user_bar)) return {arm, user_bar, Phase::kExploit};
  if (trace) trace->index_bar = view.cached_index(arm, user_bar);

  ExtReal scale = ExtReal::infinity();
  for (std::size_t b = 0; b < state.n_users; ++b) scale = std::min(scale, view.cached_index(arm, b));
  const std::vector<double> ones(state.n_users, 1.0);
  bool forced = false;
  const std::size_t target = explore_arm(view, state, arm, user_bar, scale, ones, lp, forced, trace);
  return {arm, target, forced ? Phase::kExploreForced : Phase::kExploreTrack};
}

Decision step_imed_gs2(const EmpiricalView& view, const PolicyState& state, std::size_t incoming_user) {
  const std::size_t a =
      argmin_arm(state.n_arms, [&](std::size_t x) { return normalized_index(view, state, x, incoming_user); });
  return {a, std::nullopt, view.is_optimal(a, incoming_user) ? Phase::kExploit : Phase::kExploreCurrent};
}

Decision step_imed_gs_star2(const EmpiricalView& view, PolicyState& state, std::size_t incoming_user,
                            const LpSolver& lp, ExplorationTrace* trace) {
  if (trace) *trace = ExplorationTrace{};
  const std::vector<double> beta = all_beta_hats(state);
  auto normalized = [&](std::size_t a, std::size_t b) { return view.cached_index(a, b) / beta[b]; };

  const std::size_t current = argmin_arm(state.n_arms, [&](std::size_t x) { return normalized(x, incoming_user); });
  if (view.is_optimal(current, incoming_user)) return {current, std::nullopt, Phase::kExploit};

  const auto [arm, user_bar] = argmin_couple(state.n_arms, state.n_users, normalized);
  if (!view.is_optimal(arm, user_bar)) {
    if (trace) trace->index_bar = normalized(arm, user_bar);
    ExtReal scale = ExtReal::infinity();
    for (std::size_t b = 0; b < state.n_users; ++b) scale = std::min(scale, normalized(arm, b));
    bool forced = false;
    const std::size_t target = explore_arm(view, state, arm, user_bar, scale, beta, lp, forced, trace);
    auto& slot = forced ? state.forced_register[target] : state.explore_register[target];
    if (slot) ++state.register_overwrites;
    slot = arm;
  }

  if (auto& fe = state.forced_register[incoming_user]) {
    const std::size_t a = *fe;
    fe.reset();
    return {a, std::nullopt, Phase::kDelayedForced};
  }
  if (auto& e = state.explore_register[incoming_user]) {
    const std::size_t a = *e;
    e.reset();
    return {a, std::nullopt, Phase::kDelayedTrack};
  }
  return {current, std::nullopt, Phase::kExploreCurrent};
}

Policy::Policy(PolicyId id, const WeightMatrix& w, std::size_t n_arms, LpSolver lp)
    : id_(id),
      state_(n_arms, w.n_users()),
      view_(id == PolicyId::kImed ? WeightMatrix::ones(w.n_users()) : w, n_arms),
      lp_(std::move(lp)) {
  view_.refresh(state_);
}

Decision Policy::decide(std::optional<std::size_t> incoming_user, ExplorationTrace* trace) {
  const bool imposed = incoming_user.has_value();
  if (imposed && *incoming_user >= state_.n_users) throw std::out_of_range("Policy::decide: user out of range");
  switch (id_) {
    case PolicyId::kImed: return step_imed(view_, state_, incoming_user);
    case PolicyId::kImedGs:
      if (imposed) throw std::invalid_argument("imed-gs chooses its own users");
      return step_imed_gs(view_, state_);
    case PolicyId::kImedGsStar:
      if (imposed) throw std::invalid_argument("imed-gs-star chooses its own users");
      return step_imed_gs_star(view_, state_, lp_, trace);
    case PolicyId::kImedGs2:
      if (!imposed) throw std::invalid_argument("imed-gs2 needs an incoming user");
      return step_imed_gs2(view_, state_, *incoming_user);
    case PolicyId::kImedGsStar2:
      if (!imposed) throw std::invalid_argument("imed-gs-star2 needs an incoming user");
      return step_imed_gs_star2(view_, state_, *incoming_user, lp_, trace);
  }
  throw std::logic_error("unreachable");
}

void Policy::observe(std::size_t arm, std::size_t user, double reward) {
  state_.record(arm, user, reward);
  view_.update(state_, arm, user);
}

}  // namespace gsb
