// Copyright 2026 The gsbandit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "gsb/ext_real.hpp"
#include "gsb/graph.hpp"

namespace gsb {

inline constexpr double kFeasibilityTolerance = 1e-9;
inline constexpr double kOptimalityTolerance = 1e-7;

/// Allocation program of one arm:
///
///   minimize   sum_j cost[j] * n[j]
///   subject to sum_j coeff[i][j] * n[j] >= rhs[i]   for every row i
///              n >= 0
///
/// Variable j is the couple (arm, users[j]); row i is the constraint of the
/// couple (arm, row_users[i]). Coefficients are kl_plus values and may be
/// +inf; such rows are discharged by any positive mass and are dropped by
/// solve(). Rows whose coefficients are all zero are dropped too.
struct LpInstance {
  std::size_t arm = 0;
  std::vector<std::size_t> users;
  std::vector<double> cost;
  std::vector<std::size_t> row_users;
  std::vector<std::vector<ExtReal>> coeff;
  std::vector<double> rhs;

  [[nodiscard]] std::size_t n_vars() const { return users.size(); }
  [[nodiscard]] std::size_t n_rows() const { return row_users.size(); }
};

enum class LpStatus {
  kOptimal,
  kRowsDropped,  // optimal after dropping +inf or all-zero rows
  kDegenerate,   // optimal; Bland's rule had to take over after a degenerate pivot
};

struct LpSolution {
  std::vector<double> allocation;  // indexed like LpInstance::users
  double objective = 0.0;
  LpStatus status = LpStatus::kOptimal;
  std::size_t dropped_infinite = 0;
  std::size_t dropped_empty = 0;
  bool bland_engaged = false;
  std::size_t pivots = 0;
  /// max_i (rhs_i - (K n)_i)^+ over retained rows, and max_j (-n_j)^+.
  double feasibility_residual = 0.0;
  /// Duality gap plus both complementary-slackness sums.
  double slackness_residual = 0.0;
};

struct SolveOptions {
  /// Visit variables and rows in reverse order; used by the uniqueness test.
  bool reverse_order = false;
  /// Added to `cost` when non-empty (same length).
  std::vector<double> cost_perturbation;
};

/// Dense primal simplex on the dual program (max rhs.y s.t. K^T y <= cost,
/// y >= 0), whose slack basis is feasible because costs are nonnegative. The
/// allocation is read off the reduced costs of the dual slacks. Entering
/// variable: largest reduced cost, lowest index on ties; switches permanently
/// to Bland's rule after the first degenerate pivot. Deterministic.
LpSolution solve(const LpInstance& instance, const SolveOptions& options = {});

/// One instance per arm that has at least one sub-optimal couple. Variables
/// are the sub-optimal couples of the arm (plus any zero-gap user appearing
/// in an informative set); coefficients kl_plus(mu(a,b'), mu*(b) - w(b,b')).
std::vector<LpInstance> build_instance(const BanditConfig& config, std::span<const double> beta);

/// Empirical program of one arm from running statistics: informative users
/// must have a positive count, couples with mu_hat == mu_hat_star are not
/// constrained, rows with an empty informative set are omitted, and every
/// user of the arm is a variable with cost mu_hat_star(b) - mu_hat(arm, b).
LpInstance build_empirical_instance(const Grid<double>& mu_hat, std::span<const double> mu_hat_star,
                                    const Grid<std::int64_t>& counts, const WeightMatrix& w, std::size_t arm,
                                    std::span<const double> rhs);

/// Same contract as solve(); separated so policy code names the online use.
LpSolution solve_empirical(const LpInstance& instance);

/// Lower-bound constant: sum of the per-arm optimal values.
double c_star(const BanditConfig& config, std::span<const double> beta);

/// Closed form of the structure-free constant,
/// sum_b beta_b sum_{a suboptimal} gap(a,b) / kl(mu(a,b), mu*(b)).
double agnostic_constant(const BanditConfig& config, std::span<const double> beta);

/// Forward, reversed and cost-perturbed solves of every arm agree to 1e-6.
bool lp_solution_is_unique(const BanditConfig& config, std::span<const double> beta);

struct RatioPoint {
  double alpha = 0.0;
  double mean = 0.0;
  double std_error = 0.0;
  std::size_t n_samples = 0;
};

/// Monte-Carlo mean of c_star(w_alpha) / c_star(w_1) over configurations
/// sampled from the structured set of w_alpha, for each alpha of the grid.
std::vector<RatioPoint> ratio_curve(std::span<const double> alpha_grid, std::size_t n_arms, std::size_t n_users,
                                    std::size_t n_samples, std::uint64_t seed);

}  // namespace gsb
