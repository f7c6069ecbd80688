// Copyright 2026 The gsbandit Authors
// SPDX-License-Identifier: Apache-2.0

#include "gsb/graph.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "gsb/lp.hpp"
#include "gsb/rng.hpp"

namespace gsb {

WeightMatrix::WeightMatrix(Grid<double> w) : w_(std::move(w)) {
  if (w_.rows() != w_.cols()) throw DimensionError("weight matrix must be square");
  if (w_.rows() == 0) throw DimensionError("weight matrix must have at least one user");
  for (double x : w_.data())
    if (!std::isfinite(x) || x < 0.0 || x > 1.0) throw std::domain_error("weight entries must lie in [0, 1]");
}

namespace {

Grid<double> grid_from_rows(const std::vector<std::vector<double>>& rows) {
  Grid<double> g(rows.size(), rows.empty() ? 0 : rows.front().size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != g.cols()) throw DimensionError("ragged matrix rows");
    for (std::size_t j = 0; j < g.cols(); ++j) g(i, j) = rows[i][j];
  }
  return g;
}

}  // namespace

WeightMatrix::WeightMatrix(const std::vector<std::vector<double>>& rows) : WeightMatrix(grid_from_rows(rows)) {}

WeightMatrix WeightMatrix::uniform(std::size_t n_users, double alpha) {
  Grid<double> g(n_users, n_users, alpha);
  for (std::size_t b = 0; b < n_users; ++b) g(b, b) = 0.0;
  return WeightMatrix(std::move(g));
}

std::string to_string(WeightViolationKind kind) {
  switch (kind) {
    case WeightViolationKind::kDiagonal: return "diagonal";
    case WeightViolationKind::kNonPositive: return "non_positive";
    case WeightViolationKind::kAsymmetric: return "symmetry";
    case WeightViolationKind::kTriangle: return "triangle";
  }
  return "unknown";
}

std::vector<WeightViolation> validate_weights(const WeightMatrix& w, bool require_positive) {
  std::vector<WeightViolation> out;
  const std::size_t n = w.n_users();
  auto describe = [](auto&&... parts) {
    std::ostringstream os;
    (os << ... << parts);
    return os.str();
  };
  for (std::size_t b = 0; b < n; ++b)
    if (w(b, b) != 0.0)
      out.push_back({WeightViolationKind::kDiagonal, {b, b}, describe("w[", b, "][", b, "] = ", w(b, b), " != 0")});
  for (std::size_t b = 0; b < n; ++b) {
    for (std::size_t c = b + 1; c < n; ++c) {
      if (require_positive && (w(b, c) <= 0.0 || w(c, b) <= 0.0))
        out.push_back({WeightViolationKind::kNonPositive, {b, c}, describe("w[", b, "][", c, "] is not > 0")});
      if (w(b, c) != w(c, b))
        out.push_back({WeightViolationKind::kAsymmetric, {b, c},
                       describe("w[", b, "][", c, "] = ", w(b, c), " != w[", c, "][", b, "] = ", w(c, b))});
    }
  }
  for (std::size_t b = 0; b < n; ++b)
    for (std::size_t c = b + 1; c < n; ++c)
      for (std::size_t via = 0; via < n; ++via) {
        if (via == b || via == c) continue;
        const double detour = w(b, via) + w(via, c);
        if (w(b, c) > detour + kInequalityTolerance)
          out.push_back({WeightViolationKind::kTriangle, {b, c, via},
                         describe("w[", b, "][", c, "] = ", w(b, c), " > w[", b, "][", via, "] + w[", via, "][", c,
                                  "] = ", detour)});
      }
  return out;
}

BanditConfig::BanditConfig(Grid<double> m, WeightMatrix w) : means(std::move(m)), weights(std::move(w)) {
  if (means.rows() == 0 || means.cols() == 0) throw DimensionError("config needs at least one arm and one user");
  if (means.cols() != weights.n_users()) throw DimensionError("means columns and weight matrix size differ");
  for (double x : means.data())
    if (!std::isfinite(x) || x < 0.0 || x > 1.0) throw std::domain_error("means must lie in [0, 1]");
}

MembershipVerdict check_membership(const BanditConfig& config, bool strict) {
  MembershipVerdict verdict;
  const std::size_t n_arms = config.n_arms();
  const std::size_t n_users = config.n_users();
  const auto& w = config.weights;
  for (std::size_t a = 0; a < n_arms; ++a)
    for (std::size_t b = 0; b < n_users; ++b)
      for (std::size_t c = b + 1; c < n_users; ++c) {
        const double x = config.mu(a, b);
        const double y = config.mu(a, c);
        if (x > y + w(b, c) + kInequalityTolerance || y > x + w(b, c) + kInequalityTolerance) {
          std::ostringstream os;
          os << "|mu[" << a << "][" << b << "] - mu[" << a << "][" << c << "]| = " << std::abs(x - y) << " > w = " << w(b, c);
          verdict.violations.push_back({MembershipViolationKind::kOutside, a, b, c, os.str()});
        }
      }
  if (strict) {
    const auto d = derive(config);
    for (std::size_t a = 0; a < n_arms; ++a)
      for (std::size_t b = 0; b < n_users; ++b) {
        if (d.is_optimal(a, b)) continue;
        for (std::size_t c = 0; c < n_users; ++c)
          if (config.mu(a, c) == d.mu_star[b] - w(b, c)) {
            std::ostringstream os;
            os << "mu[" << a << "][" << c << "] lies on the boundary mu*[" << b << "] - w[" << b << "][" << c << "]";
            verdict.violations.push_back({MembershipViolationKind::kBoundary, a, b, c, os.str()});
          }
      }
  }
  verdict.member = verdict.violations.empty();
  return verdict;
}

DerivedQuantities derive(const BanditConfig& config) {
  const std::size_t n_arms = config.n_arms();
  const std::size_t n_users = config.n_users();
  DerivedQuantities d;
  d.mu_star.assign(n_users, 0.0);
  d.opt_arms.assign(n_users, {});
  d.gaps = Grid<double>(n_arms, n_users);
  d.info_sets = Grid<std::vector<std::size_t>>(n_arms, n_users);
  for (std::size_t b = 0; b < n_users; ++b) {
    double best = config.mu(0, b);
    for (std::size_t a = 1; a < n_arms; ++a) best = std::max(best, config.mu(a, b));
    d.mu_star[b] = best;
    for (std::size_t a = 0; a < n_arms; ++a) {
      d.gaps(a, b) = best - config.mu(a, b);
      if (config.mu(a, b) == best) d.opt_arms[b].push_back(a);
    }
  }
  for (std::size_t a = 0; a < n_arms; ++a)
    for (std::size_t b = 0; b < n_users; ++b) {
      if (d.is_optimal(a, b)) continue;
      for (std::size_t c = 0; c < n_users; ++c)
        if (config.mu(a, c) < d.mu_star[b] - config.weights(b, c)) d.info_sets(a, b).push_back(c);
    }
  return d;
}

bool is_non_peculiar(const BanditConfig& config) {
  const auto d = derive(config);
  for (const auto& arms : d.opt_arms)
    if (arms.size() != 1) return false;
  const std::vector<double> beta(config.n_users(), 1.0);
  return lp_solution_is_unique(config, beta);
}

Grid<double> shortest_path_closure(Grid<double> w) {
  const std::size_t n = w.rows();
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        const double via = w(i, k) + w(k, j);
        if (via < w(i, j)) w(i, j) = via;
      }
  return w;
}

WeightMatrix sample_weights(std::size_t n_users, std::uint64_t seed) {
  if (n_users == 0) throw DimensionError("sample_weights: n_users must be >= 1");
  CounterRng rng(seed, Stream::kWeights);
  Grid<double> raw(n_users, n_users);
  for (std::size_t i = 0; i < n_users; ++i)
    for (std::size_t j = 0; j < n_users; ++j) raw(i, j) = i == j ? 0.0 : rng.uniform();
  Grid<double> sym(n_users, n_users);
  for (std::size_t i = 0; i < n_users; ++i)
    for (std::size_t j = i + 1; j < n_users; ++j) sym(i, j) = sym(j, i) = 0.5 * (raw(i, j) + raw(j, i));
  return WeightMatrix(shortest_path_closure(std::move(sym)));
}

namespace {

void gibbs_row(std::span<double> row, const WeightMatrix& w, CounterRng& rng) {
  const std::size_t n = row.size();
  const double start = rng.uniform(kSamplerMargin, 1.0 - kSamplerMargin);
  std::fill(row.begin(), row.end(), start);
  for (int sweep = 0; sweep < kGibbsSweeps; ++sweep)
    for (std::size_t b = 0; b < n; ++b) {
      double lo = kSamplerMargin;
      double hi = 1.0 - kSamplerMargin;
      for (std::size_t c = 0; c < n; ++c) {
        if (c == b) continue;
        lo = std::max(lo, row[c] - w(b, c));
        hi = std::min(hi, row[c] + w(b, c));
      }
      // The current value is feasible, so lo <= hi up to rounding.
      if (hi < lo) hi = lo;
      row[b] = rng.uniform(lo, hi);
    }
}

}  // namespace

BanditConfig sample_config(std::size_t n_arms, const WeightMatrix& w, std::uint64_t seed) {
  if (n_arms == 0) throw DimensionError("sample_config: n_arms must be >= 1");
  if (!validate_weights(w, /*require_positive=*/false).empty())
    throw std::invalid_argument("sample_config: weights are not a (pseudo-)metric");
  CounterRng rng(seed, Stream::kConfig);
  const std::size_t n_users = w.n_users();
  for (int attempt = 0; attempt < kSamplerMaxAttempts; ++attempt) {
    Grid<double> means(n_arms, n_users);
    for (std::size_t a = 0; a < n_arms; ++a) gibbs_row(means.row(a), w, rng);
    BanditConfig config(std::move(means), w);
    if (check_membership(config, /*strict=*/true).member) return config;
  }
  throw SamplerError("sample_config: no strict member found after " + std::to_string(kSamplerMaxAttempts) + " attempts");
}

}  // namespace gsb
