// Copyright 2026 The gsbandit Authors
// SPDX-License-Identifier: Apache-2.0

#include "gsb/simulator.hpp"

#include <fmt/format.h>
#include <fmt/ostream.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <sstream>
#include <thread>

#include "gsb/kl.hpp"
#include "gsb/rng.hpp"

namespace gsb {

double Environment::pull(std::size_t arm, std::size_t user, std::uint64_t step) const {
  return uniform_at(seed_, step, Stream::kRewards) < config_.mu(arm, user) ? 1.0 : 0.0;
}

std::size_t UserSequence::user_at(std::uint64_t t, std::size_t n_users) const {
  switch (kind) {
    case Kind::kRoundRobin: return static_cast<std::size_t>(t % n_users);
    case Kind::kFixedList:
      if (list.empty()) throw std::invalid_argument("empty user list");
      return list[static_cast<std::size_t>(t % list.size())];
    case Kind::kPolicyChosen: break;
  }
  throw std::logic_error("user sequence is chosen by the policy");
}

std::vector<std::int64_t> RunTrace::user_counts() const {
  std::vector<std::int64_t> out(counts.cols(), 0);
  for (std::size_t a = 0; a < counts.rows(); ++a)
    for (std::size_t b = 0; b < counts.cols(); ++b) out[b] += counts(a, b);
  return out;
}

const Checkpoint& RunTrace::at(std::int64_t t) const {
  auto it = std::lower_bound(checkpoints.begin(), checkpoints.end(), t,
                             [](const Checkpoint& c, std::int64_t v) { return c.t < v; });
  if (it == checkpoints.end() || it->t != t) throw std::out_of_range("no checkpoint at t = " + std::to_string(t));
  return *it;
}

std::vector<std::int64_t> checkpoint_grid(std::int64_t horizon, double factor, const std::vector<std::int64_t>& extra) {
  if (horizon < 1) throw std::invalid_argument("horizon must be >= 1");
  std::vector<std::int64_t> out;
  if (!(factor > 1.0)) {
    out.resize(static_cast<std::size_t>(horizon));
    for (std::int64_t t = 1; t <= horizon; ++t) out[static_cast<std::size_t>(t - 1)] = t;
    return out;
  }
  for (double x = 1.0; x <= static_cast<double>(horizon); x *= factor) out.push_back(std::llround(x));
  for (auto t : extra)
    if (t >= 1 && t <= horizon) out.push_back(t);
  out.push_back(horizon);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  while (!out.empty() && out.back() > horizon) out.pop_back();
  return out;
}

double pseudo_regret(const BanditConfig& config, const Grid<std::int64_t>& counts) {
  const auto d = derive(config);
  double r = 0.0;
  for (std::size_t a = 0; a < config.n_arms(); ++a)
    for (std::size_t b = 0; b < config.n_users(); ++b) r += d.gaps(a, b) * static_cast<double>(counts(a, b));
  return r;
}

namespace {

std::vector<std::int64_t> column_sums(const Grid<std::int64_t>& counts) {
  std::vector<std::int64_t> out(counts.cols(), 0);
  for (std::size_t a = 0; a < counts.rows(); ++a)
    for (std::size_t b = 0; b < counts.cols(); ++b) out[b] += counts(a, b);
  return out;
}

std::vector<std::optional<double>> pareto_with(const BanditConfig& config, const DerivedQuantities& d,
                                               const Grid<std::int64_t>& counts) {
  const auto n_b = column_sums(counts);
  std::vector<std::optional<double>> out(config.n_arms());
  for (std::size_t a = 0; a < config.n_arms(); ++a) {
    for (std::size_t b = 0; b < config.n_users(); ++b) {
      if (d.is_optimal(a, b) || n_b[b] < 2) continue;
      ExtReal sum;
      for (std::size_t c : d.info_sets(a, b))
        sum += kl_plus(config.mu(a, c), d.mu_star[b] - config.weights(b, c)).scaled(static_cast<double>(counts(a, c)));
      const double v = (sum / std::log(static_cast<double>(n_b[b]))).value();
      if (!out[a] || v < *out[a]) out[a] = v;
    }
  }
  return out;
}

double max_defined(const std::vector<std::optional<double>>& stats) {
  double best = std::numeric_limits<double>::quiet_NaN();
  for (const auto& s : stats)
    if (s && (std::isnan(best) || *s > best)) best = *s;
  return best;
}

}  // namespace

std::vector<std::optional<double>> pareto_statistic(const BanditConfig& config, const Grid<std::int64_t>& counts) {
  return pareto_with(config, derive(config), counts);
}

double pareto_max_over_arms(const BanditConfig& config, const Grid<std::int64_t>& counts) {
  return max_defined(pareto_statistic(config, counts));
}

std::vector<double> log_frequency_estimate(const std::vector<std::int64_t>& user_counts, std::int64_t horizon) {
  if (horizon < 2) throw std::invalid_argument("log_frequency_estimate: horizon must be >= 2");
  const double log_t = std::log(static_cast<double>(horizon));
  std::vector<double> out;
  out.reserve(user_counts.size());
  for (auto n : user_counts) out.push_back(std::log(static_cast<double>(n)) / log_t);
  return out;
}

namespace {

std::string dump_state(const Policy& policy) {
  const auto& s = policy.state();
  const auto& v = policy.view();
  std::ostringstream os;
  os << "policy " << to_string(policy.id()) << ", t = " << s.t << "\n";
  for (std::size_t a = 0; a < s.n_arms; ++a) {
    os << "  arm " << a << " N:";
    for (std::size_t b = 0; b < s.n_users; ++b) os << ' ' << s.counts(a, b);
    os << " | mu_hat:";
    for (std::size_t b = 0; b < s.n_users; ++b) os << ' ' << v.mu_hat(a, b);
    os << " | c=" << s.c[a] << " c+=" << s.c_plus[a] << " forced=" << s.forced_rounds[a] << "\n";
  }
  return os.str();
}

[[noreturn]] void fail(const Policy& policy, std::int64_t step, const std::string& what) {
  throw InvariantViolation(fmt::format("invariant violated at step {}: {}\n{}", step, what, dump_state(policy)));
}

constexpr double kCheckTolerance = 1e-9;

void check_counters(const Policy& policy, std::int64_t step) {
  const auto& s = policy.state();
  for (std::size_t a = 0; a < s.n_arms; ++a) {
    if (s.c[a] > s.c_plus[a]) fail(policy, step, fmt::format("c > c+ for arm {}", a));
    if (s.forced_rounds[a] >= 62 || s.c_plus[a] != (std::int64_t{1} << s.forced_rounds[a]))
      fail(policy, step, fmt::format("c+ != 2^forced for arm {}", a));
    if (static_cast<double>(s.forced_rounds[a]) > 2.0 + std::log2(static_cast<double>(s.c[a])))
      fail(policy, step, fmt::format("forced rounds exceed 2 + log2(c) for arm {}", a));
  }
}

void check_conservation(const Policy& policy, std::int64_t step) {
  const auto& s = policy.state();
  std::int64_t total = 0;
  for (std::size_t a = 0; a < s.n_arms; ++a)
    for (std::size_t b = 0; b < s.n_users; ++b) {
      total += s.counts(a, b);
      if (s.reward_sums(a, b) > static_cast<double>(s.counts(a, b)) || s.reward_sums(a, b) < 0.0)
        fail(policy, step, fmt::format("reward sum outside [0, N] at ({}, {})", a, b));
    }
  if (total != s.t) fail(policy, step, fmt::format("sum of counts {} != t {}", total, s.t));
}

// The pulled couple has the smallest count among empirically optimal
// couples and its log count sits below every sub-optimal index.
void check_lower_bound(const Policy& policy, std::size_t arm, std::size_t user, std::int64_t step) {
  const auto& s = policy.state();
  const auto& v = policy.view();
  const std::int64_t np = s.counts(arm, user);
  const ExtReal log_np = np > 0 ? ExtReal(std::log(static_cast<double>(np))) : ExtReal::neg_infinity();
  for (std::size_t a = 0; a < s.n_arms; ++a)
    for (std::size_t b = 0; b < s.n_users; ++b) {
      const ExtReal i = index(v, s, a, b);
      if (!(i == v.cached_index(a, b))) fail(policy, step, fmt::format("stale cached index at ({}, {})", a, b));
      if (v.is_optimal(a, b)) {
        if (np > s.counts(a, b))
          fail(policy, step, fmt::format("pulled count {} above optimal couple ({}, {})", np, a, b));
      } else if (i.is_finite() && log_np.is_finite()) {
        if (log_np.value() > i.value() + kCheckTolerance * std::max(1.0, std::abs(i.value())))
          fail(policy, step, fmt::format("log N of pulled couple above index of ({}, {})", a, b));
      } else if (log_np > i) {
        fail(policy, step, fmt::format("log N of pulled couple above index of ({}, {})", a, b));
      }
    }
}

void check_upper_bound(const Policy& policy, const ExplorationTrace& trace, std::int64_t step) {
  const auto& s = policy.state();
  const auto& v = policy.view();
  ExtReal sum;
  for (std::size_t c : informative_set(v, s, trace.arm_bar, trace.user_bar))
    sum += kl_plus(v.mu_hat(trace.arm_bar, c), v.mu_hat_star(trace.user_bar) - v.weights()(trace.user_bar, c))
               .scaled(static_cast<double>(s.counts(trace.arm_bar, c)));
  const double bound = std::log(static_cast<double>(s.user_counts[trace.user_bar]));
  if (!sum.is_finite() || sum.value() > bound + kCheckTolerance * std::max(1.0, bound))
    fail(policy, step, fmt::format("explored couple ({}, {}) exceeds log N_b", trace.arm_bar, trace.user_bar));
}

void check_dominance(const Policy& policy, const ExplorationTrace& trace, std::int64_t step) {
  if (trace.tracking_gaps.empty()) fail(policy, step, "tracking over an empty set");
  const double best = *std::max_element(trace.tracking_gaps.begin(), trace.tracking_gaps.end());
  const double scale = 1.0 + static_cast<double>(policy.state().t);
  if (best < -kCheckTolerance * scale) fail(policy, step, fmt::format("max N_opt - N = {} < 0", best));
}

bool is_gs_family(PolicyId id) { return id == PolicyId::kImedGs || id == PolicyId::kImedGsStar; }
bool is_star(PolicyId id) { return id == PolicyId::kImedGsStar || id == PolicyId::kImedGsStar2; }

}  // namespace

RunTrace run(const BanditConfig& config, PolicyId id, const RunOptions& options) {
  if (options.horizon < 1) throw std::invalid_argument("run: horizon must be >= 1");
  if (!supports(id, options.scenario))
    throw std::invalid_argument(fmt::format("policy {} does not run in the {} scenario", to_string(id),
                                            to_string(options.scenario)));
  const bool controlled = options.scenario == Scenario::kControlled;
  const Environment env(config, options.seed);
  const auto d = derive(config);
  const auto grid = checkpoint_grid(options.horizon, options.thinning, options.extra_checkpoints);

  Policy policy(id, config.weights, config.n_arms(), options.lp ? options.lp : LpSolver(solve_empirical));
  RunTrace trace;
  trace.policy = id;
  trace.horizon = options.horizon;
  trace.checkpoints.reserve(grid.size());
  ExplorationTrace explore;
  std::size_t next_checkpoint = 0;
  const bool checked = options.check_invariants;

  for (std::int64_t step = 0; step < options.horizon; ++step) {
    std::optional<std::size_t> incoming;
    if (!controlled) incoming = options.users.user_at(static_cast<std::uint64_t>(step), config.n_users());
    const Decision decision = policy.decide(incoming, checked ? &explore : nullptr);
    const std::size_t user = controlled ? decision.user.value() : *incoming;
    const std::size_t arm = decision.arm;

    if (checked) {
      check_conservation(policy, step);
      if (is_gs_family(id)) check_lower_bound(policy, arm, user, step);
      if (is_star(id)) {
        check_counters(policy, step);
        if (explore.explored && !explore.forced) check_dominance(policy, explore, step);
      }
      if (id == PolicyId::kImedGsStar && explore.explored && explore.index_bar.is_finite())
        check_upper_bound(policy, explore, step);
    }

    const double reward = env.pull(arm, user, static_cast<std::uint64_t>(step));
    policy.observe(arm, user, reward);
    ++trace.phase_counts[static_cast<std::size_t>(decision.phase)];
    trace.incremental_regret += d.gaps(arm, user);
    trace.realized_reward += reward;

    const std::int64_t t = step + 1;
    if (next_checkpoint < grid.size() && grid[next_checkpoint] == t) {
      const auto& s = policy.state();
      Checkpoint cp;
      cp.t = t;
      cp.pseudo_regret = 0.0;
      for (std::size_t a = 0; a < config.n_arms(); ++a)
        for (std::size_t b = 0; b < config.n_users(); ++b)
          cp.pseudo_regret += d.gaps(a, b) * static_cast<double>(s.counts(a, b));
      cp.min_user_count = *std::min_element(s.user_counts.begin(), s.user_counts.end());
      cp.pareto_max = max_defined(pareto_with(config, d, s.counts));
      cp.realized_reward = trace.realized_reward;
      if (checked && std::abs(cp.pseudo_regret - trace.incremental_regret) >
                         kCheckTolerance * std::max(1.0, cp.pseudo_regret))
        fail(policy, step, "incremental pseudo-regret differs from the count-based value");
      trace.checkpoints.push_back(cp);
      ++next_checkpoint;
    }
  }

  const auto& s = policy.state();
  if (checked) {
    check_conservation(policy, options.horizon);
    if (is_star(id)) check_counters(policy, options.horizon);
  }
  trace.counts = s.counts;
  trace.c = s.c;
  trace.c_plus = s.c_plus;
  trace.forced_rounds = s.forced_rounds;
  trace.lp_solves = s.lp_solves;
  trace.register_overwrites = s.register_overwrites;
  return trace;
}

BanditConfig ConfigSource::config_for(std::uint64_t seed) const {
  if (fixed) return *fixed;
  const std::uint64_t key = mix64(seed);
  return sample_config(n_arms, sample_weights(n_users, key), key);
}

std::size_t resolve_threads(std::size_t requested) {
  std::size_t n = requested > 0 ? requested : std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("GBL_THREADS")) {
    char* end = nullptr;
    const long cap = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && cap >= 1) n = std::min(n, static_cast<std::size_t>(cap));
  }
  return n;
}

BatchResult batch(const BatchSpec& spec) {
  if (spec.n_runs < 1) throw std::invalid_argument("batch: n_runs must be >= 1");
  if (spec.policies.empty()) throw std::invalid_argument("batch: no policy requested");
  for (auto id : spec.policies)
    if (!supports(id, spec.scenario))
      throw std::invalid_argument(fmt::format("policy {} does not run in the {} scenario", to_string(id),
                                              to_string(spec.scenario)));

  const std::size_t n_policies = spec.policies.size();
  const std::size_t n_jobs = n_policies * spec.n_runs;
  BatchResult result;
  result.policies = spec.policies;
  result.traces.assign(n_policies, std::vector<RunTrace>(spec.n_runs));
  std::vector<std::string> errors(n_jobs);

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t job = next++; job < n_jobs; job = next++) {
      const std::size_t p = job / spec.n_runs;
      const std::size_t r = job % spec.n_runs;
      try {
        const std::uint64_t seed = run_seed(spec.master_seed, r);
        RunOptions opt;
        opt.horizon = spec.horizon;
        opt.seed = seed;
        opt.scenario = spec.scenario;
        opt.users = spec.users;
        opt.thinning = spec.thinning;
        opt.extra_checkpoints = spec.extra_checkpoints;
        opt.check_invariants = spec.check_invariants;
        result.traces[p][r] = run(spec.source.config_for(seed), spec.policies[p], opt);
      } catch (const std::exception& e) {
        errors[job] = e.what();
        if (errors[job].empty()) errors[job] = "unknown error";
      }
    }
  };
  const std::size_t n_threads = std::min(resolve_threads(spec.threads), n_jobs);
  if (n_threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(n_threads);
    for (std::size_t i = 0; i < n_threads; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  for (std::size_t job = 0; job < n_jobs; ++job)
    if (!errors[job].empty())
      throw RunFailure(fmt::format("policy {} run {}: {}", to_string(spec.policies[job / spec.n_runs]),
                                   job % spec.n_runs, errors[job]));

  result.curves.resize(n_policies);
  for (std::size_t p = 0; p < n_policies; ++p) {
    const auto& runs = result.traces[p];
    const std::size_t n_points = runs.front().checkpoints.size();
    auto& curve = result.curves[p];
    curve.resize(n_points);
    for (std::size_t k = 0; k < n_points; ++k) {
      double sum = 0.0;
      for (const auto& tr : runs) sum += tr.checkpoints[k].pseudo_regret;
      const double n = static_cast<double>(runs.size());
      const double mean = sum / n;
      double sq = 0.0;
      for (const auto& tr : runs) {
        const double dev = tr.checkpoints[k].pseudo_regret - mean;
        sq += dev * dev;
      }
      curve[k] = {runs.front().checkpoints[k].t, mean, runs.size() > 1 ? std::sqrt(sq / (n - 1.0)) : 0.0, runs.size()};
    }
  }
  return result;
}

void write_trace_csv(std::ostream& out, const BatchResult& result) {
  out << "t,policy,run,pseudo_regret,min_Nb,pareto_max_over_arms\n";
  for (std::size_t p = 0; p < result.policies.size(); ++p)
    for (std::size_t r = 0; r < result.traces[p].size(); ++r)
      for (const auto& cp : result.traces[p][r].checkpoints)
        fmt::print(out, "{},{},{},{},{},{}\n", cp.t, to_string(result.policies[p]), r, cp.pseudo_regret,
                   cp.min_user_count, cp.pareto_max);
}

void write_aggregate_csv(std::ostream& out, const BatchResult& result, const std::optional<ReferenceLines>& lines) {
  out << "t,policy,mean_regret,std_regret,n_runs";
  if (lines) out << ",LB_struct,LB_agnostic";
  out << '\n';
  for (std::size_t p = 0; p < result.policies.size(); ++p)
    for (const auto& pt : result.curves[p]) {
      fmt::print(out, "{},{},{},{},{}", pt.t, to_string(result.policies[p]), pt.mean, pt.std_dev, pt.n_runs);
      if (lines) {
        const double log_t = std::log(static_cast<double>(pt.t));
        fmt::print(out, ",{},{}", lines->c_struct * log_t, lines->c_agnostic * log_t);
      }
      out << '\n';
    }
}

}  // namespace gsb
