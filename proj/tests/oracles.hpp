// Copyright 2026 The gsbandit Authors
// SPDX-License-Identifier: Apache-2.0
//
// Independent reference computations used by the tests. Deliberately naive:
// brute force over vertices, long double arithmetic, no code shared with the
// library beyond its data types.

#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <vector>

#include "gsb/lp.hpp"
#include "gsb/rng.hpp"

namespace oracle {

/// kl(p|q) for Bernoulli laws as an expectation over the two outcomes of the
/// log-likelihood ratio, in long double.
inline long double bernoulli_kl(long double p, long double q) {
  long double sum = 0.0L;
  const long double outcome_p[2] = {1.0L - p, p};
  const long double outcome_q[2] = {1.0L - q, q};
  for (int x = 0; x < 2; ++x) {
    if (outcome_p[x] == 0.0L) continue;
    if (outcome_q[x] == 0.0L) return std::numeric_limits<long double>::infinity();
    sum += outcome_p[x] * std::log(outcome_p[x] / outcome_q[x]);
  }
  return sum;
}

/// Solves the square system A x = b by Gaussian elimination with partial
/// pivoting; nullopt when singular.
inline std::optional<std::vector<double>> solve_square(std::vector<std::vector<double>> a, std::vector<double> b) {
  const std::size_t n = b.size();
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < n; ++r)
      if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
    if (std::abs(a[piv][col]) < 1e-12) return std::nullopt;
    std::swap(a[piv], a[col]);
    std::swap(b[piv], b[col]);
    for (std::size_t r = 0; r < n; ++r) {
      if (r == col) continue;
      const double f = a[r][col] / a[col][col];
      for (std::size_t c = col; c < n; ++c) a[r][c] -= f * a[col][c];
      b[r] -= f * b[col];
    }
  }
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = b[i] / a[i][i];
  return x;
}

struct VertexResult {
  double objective = std::numeric_limits<double>::infinity();
  std::vector<double> point;
};

/// min cost.n s.t. K n >= rhs, n >= 0 by enumerating every choice of n
/// active constraints among the rows and the nonnegativity bounds.
/// Coefficients must be finite. Returns +inf objective when infeasible.
inline VertexResult vertex_enumeration(const std::vector<double>& cost, const std::vector<std::vector<double>>& k,
                                       const std::vector<double>& rhs) {
  const std::size_t n = cost.size();
  const std::size_t m = rhs.size();
  const std::size_t total = m + n;
  VertexResult best;
  std::vector<std::size_t> pick(n);
  // Iterate over all n-subsets of the (m + n) constraints.
  auto recurse = [&](auto&& self, std::size_t start, std::size_t depth) -> void {
    if (depth == n) {
      std::vector<std::vector<double>> a(n, std::vector<double>(n, 0.0));
      std::vector<double> b(n, 0.0);
      for (std::size_t i = 0; i < n; ++i) {
        if (pick[i] < m) {
          a[i] = k[pick[i]];
          b[i] = rhs[pick[i]];
        } else {
          a[i][pick[i] - m] = 1.0;
        }
      }
      const auto x = solve_square(a, b);
      if (!x) return;
      for (double v : *x)
        if (v < -1e-9) return;
      for (std::size_t r = 0; r < m; ++r) {
        double lhs = 0.0;
        for (std::size_t j = 0; j < n; ++j) lhs += k[r][j] * (*x)[j];
        if (lhs < rhs[r] - 1e-9) return;
      }
      double obj = 0.0;
      for (std::size_t j = 0; j < n; ++j) obj += cost[j] * (*x)[j];
      if (obj < best.objective) best = {obj, *x};
      return;
    }
    for (std::size_t c = start; c < total; ++c) {
      pick[depth] = c;
      self(self, c + 1, depth + 1);
    }
  };
  if (n == 0) {
    for (double r : rhs)
      if (r > 0.0) return best;
    best.objective = 0.0;
    return best;
  }
  recurse(recurse, 0, 0);
  return best;
}

/// Vertex enumeration of an LpInstance after removing rows that contain a
/// +inf coefficient and rows that are identically zero.
inline VertexResult solve_instance(const gsb::LpInstance& inst) {
  std::vector<std::vector<double>> k;
  std::vector<double> rhs;
  for (std::size_t i = 0; i < inst.n_rows(); ++i) {
    bool infinite = false;
    bool nonzero = false;
    std::vector<double> row(inst.n_vars());
    for (std::size_t j = 0; j < inst.n_vars(); ++j) {
      if (inst.coeff[i][j].is_pos_inf()) infinite = true;
      else row[j] = inst.coeff[i][j].value();
      if (row[j] != 0.0) nonzero = true;
    }
    if (infinite || !nonzero) continue;
    k.push_back(row);
    rhs.push_back(inst.rhs[i]);
  }
  return vertex_enumeration(inst.cost, k, rhs);
}

/// Small random program: 1 to 4 variables and rows, every row non-zero.
/// Integral instances use small integers and are often degenerate.
inline gsb::LpInstance random_instance(gsb::CounterRng& rng, bool integral) {
  gsb::LpInstance inst;
  const auto n_vars = 1 + static_cast<std::size_t>(rng.uniform() * 4.0);
  const auto n_rows = 1 + static_cast<std::size_t>(rng.uniform() * 4.0);
  for (std::size_t j = 0; j < n_vars; ++j) {
    inst.users.push_back(j);
    inst.cost.push_back(integral ? 1.0 + std::floor(rng.uniform() * 3.0) : 0.05 + rng.uniform());
  }
  for (std::size_t i = 0; i < n_rows; ++i) {
    std::vector<gsb::ExtReal> row(n_vars);
    bool any = false;
    for (std::size_t j = 0; j < n_vars; ++j) {
      const double u = rng.uniform();
      double v = 0.0;
      if (integral) v = std::floor(u * 3.0);
      else if (u > 0.35) v = rng.uniform() * 2.0;
      row[j] = gsb::ExtReal(v);
      any = any || v > 0.0;
    }
    if (!any) row[i % n_vars] = gsb::ExtReal(1.0);
    inst.row_users.push_back(i);
    inst.coeff.push_back(row);
    inst.rhs.push_back(integral ? 1.0 + std::floor(rng.uniform() * 2.0) : 0.1 + rng.uniform());
  }
  return inst;
}

}  // namespace oracle
