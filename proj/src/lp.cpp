// Copyright 2026 The gsbandit Authors
// SPDX-License-Identifier: Apache-2.0

#include "gsb/lp.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "gsb/kl.hpp"
#include "gsb/rng.hpp"

namespace gsb {

namespace {

constexpr double kPivotEps = 1e-11;
constexpr double kReducedCostEps = 1e-12;

// Retained rows of an instance as a dense finite covering program.
struct DenseProgram {
  std::vector<double> cost;               // k
  std::vector<std::vector<double>> rows;  // m x k, finite, nonnegative
  std::vector<double> rhs;                // m
};

struct DenseResult {
  std::vector<double> n;  // primal allocation
  std::vector<double> y;  // dual multipliers
  bool bland_engaged = false;
  std::size_t pivots = 0;
};

// Primal simplex on   max rhs.y  s.t.  rows^T y + s = cost,  y, s >= 0.
// Column layout: [y_0 .. y_{m-1} | s_0 .. s_{k-1}]; tableau row j is dual
// constraint j and starts with s_j basic.
DenseResult simplex_on_dual(const DenseProgram& p) {
  const std::size_t k = p.cost.size();
  const std::size_t m = p.rhs.size();
  const std::size_t cols = m + k;
  std::vector<std::vector<double>> tab(k, std::vector<double>(cols + 1, 0.0));
  std::vector<double> obj(cols + 1, 0.0);
  std::vector<std::size_t> basis(k);
  for (std::size_t j = 0; j < k; ++j) {
    for (std::size_t i = 0; i < m; ++i) tab[j][i] = p.rows[i][j];
    tab[j][m + j] = 1.0;
    tab[j][cols] = p.cost[j];
    basis[j] = m + j;
  }
  for (std::size_t i = 0; i < m; ++i) obj[i] = -p.rhs[i];

  DenseResult res;
  const std::size_t max_pivots = 100 * (cols + 1);
  for (;;) {
    std::size_t enter = cols;
    if (res.bland_engaged) {
      for (std::size_t c = 0; c < cols; ++c)
        if (obj[c] < -kReducedCostEps) {
          enter = c;
          break;
        }
    } else {
      double best = -kReducedCostEps;
      for (std::size_t c = 0; c < cols; ++c)
        if (obj[c] < best) {
          best = obj[c];
          enter = c;
        }
    }
    if (enter == cols) break;

    std::size_t leave = k;
    double best_ratio = 0.0;
    for (std::size_t r = 0; r < k; ++r) {
      if (tab[r][enter] <= kPivotEps) continue;
      const double ratio = tab[r][cols] / tab[r][enter];
      if (leave == k || ratio < best_ratio || (ratio == best_ratio && basis[r] < basis[leave])) {
        leave = r;
        best_ratio = ratio;
      }
    }
    // Unbounded dual means an infeasible covering row, which callers exclude.
    if (leave == k) throw std::logic_error("simplex: dual unbounded (row without positive coefficient)");
    if (best_ratio <= 0.0) res.bland_engaged = true;

    const double piv = tab[leave][enter];
    for (double& x : tab[leave]) x /= piv;
    tab[leave][enter] = 1.0;
    for (std::size_t r = 0; r < k; ++r) {
      if (r == leave || tab[r][enter] == 0.0) continue;
      const double f = tab[r][enter];
      for (std::size_t c = 0; c <= cols; ++c) tab[r][c] -= f * tab[leave][c];
      tab[r][enter] = 0.0;
    }
    if (obj[enter] != 0.0) {
      const double f = obj[enter];
      for (std::size_t c = 0; c <= cols; ++c) obj[c] -= f * tab[leave][c];
      obj[enter] = 0.0;
    }
    basis[leave] = enter;
    if (++res.pivots > max_pivots) throw std::runtime_error("simplex: pivot limit exceeded");
  }

  res.n.assign(k, 0.0);
  for (std::size_t j = 0; j < k; ++j) res.n[j] = std::max(obj[m + j], 0.0);
  res.y.assign(m, 0.0);
  for (std::size_t r = 0; r < k; ++r)
    if (basis[r] < m) res.y[basis[r]] = std::max(tab[r][cols], 0.0);
  return res;
}

std::vector<std::size_t> visiting_order(std::size_t n, bool reverse) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  if (reverse) std::reverse(order.begin(), order.end());
  return order;
}

}  // namespace

LpSolution solve(const LpInstance& inst, const SolveOptions& options) {
  const std::size_t k = inst.n_vars();
  if (inst.cost.size() != k || inst.coeff.size() != inst.n_rows() || inst.rhs.size() != inst.n_rows())
    throw DimensionError("LpInstance: inconsistent sizes");
  if (!options.cost_perturbation.empty() && options.cost_perturbation.size() != k)
    throw DimensionError("SolveOptions: perturbation size differs from variable count");

  LpSolution sol;
  const auto var_order = visiting_order(k, options.reverse_order);
  DenseProgram prog;
  prog.cost.resize(k);
  for (std::size_t pos = 0; pos < k; ++pos) {
    const std::size_t j = var_order[pos];
    double c = inst.cost[j];
    if (!options.cost_perturbation.empty()) c = std::max(c + options.cost_perturbation[j], 0.0);
    if (!(c >= 0.0) || !std::isfinite(c)) throw std::domain_error("LpInstance: costs must be finite and >= 0");
    prog.cost[pos] = c;
  }

  std::vector<std::size_t> kept_rows;
  for (std::size_t i : visiting_order(inst.n_rows(), options.reverse_order)) {
    const auto& row = inst.coeff[i];
    if (row.size() != k) throw DimensionError("LpInstance: row length differs from variable count");
    if (std::any_of(row.begin(), row.end(), [](ExtReal x) { return x.is_pos_inf(); })) {
      ++sol.dropped_infinite;
      continue;
    }
    if (std::all_of(row.begin(), row.end(), [](ExtReal x) { return x.value() == 0.0; })) {
      ++sol.dropped_empty;
      continue;
    }
    std::vector<double> dense(k);
    for (std::size_t pos = 0; pos < k; ++pos) {
      const double v = row[var_order[pos]].value();
      if (v < 0.0) throw std::domain_error("LpInstance: negative coefficient");
      dense[pos] = v;
    }
    prog.rows.push_back(std::move(dense));
    prog.rhs.push_back(inst.rhs[i]);
    kept_rows.push_back(i);
  }

  sol.allocation.assign(k, 0.0);
  std::vector<double> y;
  if (!prog.rows.empty() && k > 0) {
    const auto res = simplex_on_dual(prog);
    for (std::size_t pos = 0; pos < k; ++pos) sol.allocation[var_order[pos]] = res.n[pos];
    y = res.y;
    sol.bland_engaged = res.bland_engaged;
    sol.pivots = res.pivots;
  }

  // Certificate against the unperturbed costs.
  double primal = 0.0;
  for (std::size_t j = 0; j < k; ++j) primal += inst.cost[j] * sol.allocation[j];
  sol.objective = primal;
  double feas = 0.0;
  double dual_obj = 0.0;
  double cs = 0.0;
  std::vector<double> reduced(k);
  for (std::size_t j = 0; j < k; ++j) reduced[j] = prog.cost.empty() ? 0.0 : prog.cost[j];
  for (std::size_t r = 0; r < prog.rows.size(); ++r) {
    double lhs = 0.0;
    for (std::size_t pos = 0; pos < k; ++pos) lhs += prog.rows[r][pos] * sol.allocation[var_order[pos]];
    feas = std::max(feas, prog.rhs[r] - lhs);
    dual_obj += prog.rhs[r] * y[r];
    cs += std::abs(y[r] * (lhs - prog.rhs[r]));
    for (std::size_t pos = 0; pos < k; ++pos) reduced[pos] -= prog.rows[r][pos] * y[r];
  }
  double perturbed_primal = 0.0;
  for (std::size_t pos = 0; pos < k; ++pos) {
    const double n = sol.allocation[var_order[pos]];
    cs += std::abs(n * reduced[pos]);
    perturbed_primal += prog.cost[pos] * n;
  }
  sol.feasibility_residual = std::max(feas, 0.0);
  sol.slackness_residual = std::abs(perturbed_primal - dual_obj) + cs;

  if (sol.bland_engaged) {
    sol.status = LpStatus::kDegenerate;
  } else if (sol.dropped_empty + sol.dropped_infinite > 0) {
    sol.status = LpStatus::kRowsDropped;
  }
  return sol;
}

LpSolution solve_empirical(const LpInstance& instance) { return solve(instance); }

namespace {

template <class Observed>
LpInstance build_arm(const Grid<double>& mu, std::span<const double> mu_star, const WeightMatrix& w, std::size_t arm,
                     std::span<const double> rhs, Observed observed, bool all_users_are_variables) {
  const std::size_t n_users = mu.cols();
  LpInstance inst;
  inst.arm = arm;

  std::vector<std::vector<std::size_t>> info(n_users);
  std::vector<bool> is_var(n_users, all_users_are_variables);
  for (std::size_t b = 0; b < n_users; ++b) {
    if (mu(arm, b) < mu_star[b]) is_var[b] = true;
    else continue;
    for (std::size_t c = 0; c < n_users; ++c)
      if (observed(c) && mu(arm, c) < mu_star[b] - w(b, c)) {
        info[b].push_back(c);
        is_var[c] = true;
      }
  }

  std::vector<std::size_t> slot(n_users, n_users);
  for (std::size_t b = 0; b < n_users; ++b)
    if (is_var[b]) {
      slot[b] = inst.users.size();
      inst.users.push_back(b);
      inst.cost.push_back(mu_star[b] - mu(arm, b));
    }
  for (std::size_t b = 0; b < n_users; ++b) {
    if (info[b].empty()) continue;
    std::vector<ExtReal> row(inst.users.size());
    for (std::size_t c : info[b]) row[slot[c]] = kl_plus(mu(arm, c), mu_star[b] - w(b, c));
    inst.row_users.push_back(b);
    inst.coeff.push_back(std::move(row));
    inst.rhs.push_back(rhs[b]);
  }
  return inst;
}

void check_beta(std::span<const double> beta, std::size_t n_users) {
  if (beta.size() != n_users) throw DimensionError("beta must have one entry per user");
  for (double x : beta)
    if (!(x > 0.0) || !std::isfinite(x)) throw std::domain_error("beta entries must be finite and > 0");
}

}  // namespace

std::vector<LpInstance> build_instance(const BanditConfig& config, std::span<const double> beta) {
  check_beta(beta, config.n_users());
  const auto d = derive(config);
  std::vector<LpInstance> out;
  for (std::size_t a = 0; a < config.n_arms(); ++a) {
    auto inst = build_arm(
        config.means, d.mu_star, config.weights, a, beta, [](std::size_t) { return true; }, false);
    if (!inst.row_users.empty()) out.push_back(std::move(inst));
  }
  return out;
}

LpInstance build_empirical_instance(const Grid<double>& mu_hat, std::span<const double> mu_hat_star,
                                    const Grid<std::int64_t>& counts, const WeightMatrix& w, std::size_t arm,
                                    std::span<const double> rhs) {
  if (mu_hat_star.size() != mu_hat.cols() || rhs.size() != mu_hat.cols() || counts.cols() != mu_hat.cols())
    throw DimensionError("build_empirical_instance: size mismatch");
  return build_arm(
      mu_hat, mu_hat_star, w, arm, rhs, [&](std::size_t c) { return counts(arm, c) > 0; }, true);
}

double c_star(const BanditConfig& config, std::span<const double> beta) {
  double total = 0.0;
  for (const auto& inst : build_instance(config, beta)) total += solve(inst).objective;
  return total;
}

double agnostic_constant(const BanditConfig& config, std::span<const double> beta) {
  check_beta(beta, config.n_users());
  const auto d = derive(config);
  double total = 0.0;
  for (std::size_t b = 0; b < config.n_users(); ++b) {
    double per_user = 0.0;
    for (std::size_t a = 0; a < config.n_arms(); ++a) {
      if (d.is_optimal(a, b)) continue;
      const ExtReal div = kl_bernoulli(config.mu(a, b), d.mu_star[b]);
      if (div.is_finite()) per_user += d.gaps(a, b) / div.value();
    }
    total += beta[b] * per_user;
  }
  return total;
}

bool lp_solution_is_unique(const BanditConfig& config, std::span<const double> beta) {
  constexpr double kPerturbation = 1e-9;
  constexpr double kAgreement = 1e-6;
  constexpr std::uint64_t kPerturbationSeed = 0x6c705f756e697175ull;
  CounterRng rng(kPerturbationSeed, Stream::kPerturbation);
  for (const auto& inst : build_instance(config, beta)) {
    const auto base = solve(inst);
    SolveOptions reversed;
    reversed.reverse_order = true;
    SolveOptions perturbed;
    for (std::size_t j = 0; j < inst.n_vars(); ++j) perturbed.cost_perturbation.push_back(kPerturbation * rng.uniform());
    for (const auto& other : {solve(inst, reversed), solve(inst, perturbed)})
      for (std::size_t j = 0; j < inst.n_vars(); ++j)
        if (std::abs(other.allocation[j] - base.allocation[j]) > kAgreement) return false;
  }
  return true;
}

std::vector<RatioPoint> ratio_curve(std::span<const double> alpha_grid, std::size_t n_arms, std::size_t n_users,
                                    std::size_t n_samples, std::uint64_t seed) {
  if (n_samples == 0) throw std::invalid_argument("ratio_curve: n_samples must be >= 1");
  const std::vector<double> ones(n_users, 1.0);
  const WeightMatrix agnostic = WeightMatrix::ones(n_users);
  std::vector<RatioPoint> out;
  for (std::size_t i = 0; i < alpha_grid.size(); ++i) {
    const double alpha = alpha_grid[i];
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw std::domain_error("ratio_curve: alpha must lie in [0, 1]");
    const WeightMatrix w = WeightMatrix::uniform(n_users, alpha);
    std::vector<double> ratios;
    ratios.reserve(n_samples);
    for (std::size_t s = 0; s < n_samples; ++s) {
      const std::uint64_t sample_seed = mix64(seed ^ mix64((std::uint64_t{i} << 32) | s));
      const BanditConfig config = sample_config(n_arms, w, sample_seed);
      const double structured = c_star(config, ones);
      const double unstructured = c_star(config.with_weights(agnostic), ones);
      ratios.push_back(unstructured > 0.0 ? structured / unstructured : 1.0);
    }
    const double mean = std::accumulate(ratios.begin(), ratios.end(), 0.0) / static_cast<double>(n_samples);
    double ss = 0.0;
    for (double r : ratios) ss += (r - mean) * (r - mean);
    const double sd = n_samples > 1 ? std::sqrt(ss / static_cast<double>(n_samples - 1)) : 0.0;
    out.push_back({alpha, mean, sd / std::sqrt(static_cast<double>(n_samples)), n_samples});
  }
  return out;
}

}  // namespace gsb
