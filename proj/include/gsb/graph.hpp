// Copyright 2026 The gsbandit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "gsb/grid.hpp"

namespace gsb {

/// Absolute slack for the metric and membership inequalities. Hand-entered
/// tables are rounded to a few decimals, so e.g. 0.17 <= 0.12 + 0.05 fails in
/// exact binary arithmetic. Boundary equality (strict membership) is exact.
inline constexpr double kInequalityTolerance = 1e-12;

class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class SamplerError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Known similarity bound w(b, b') between users. Entries are in [0, 1].
/// Metric properties are not enforced here; see validate_weights().
class WeightMatrix {
 public:
  WeightMatrix() = default;
  explicit WeightMatrix(Grid<double> w);
  explicit WeightMatrix(const std::vector<std::vector<double>>& rows);

  /// All off-diagonal entries equal to alpha, zero diagonal.
  static WeightMatrix uniform(std::size_t n_users, double alpha);
  /// The structure-free matrix (all off-diagonal entries 1).
  static WeightMatrix ones(std::size_t n_users) { return uniform(n_users, 1.0); }

  [[nodiscard]] std::size_t n_users() const { return w_.rows(); }
  double operator()(std::size_t b, std::size_t b2) const { return w_(b, b2); }
  [[nodiscard]] const Grid<double>& grid() const { return w_; }

  friend bool operator==(const WeightMatrix&, const WeightMatrix&) = default;

 private:
  Grid<double> w_;
};

enum class WeightViolationKind { kDiagonal, kNonPositive, kAsymmetric, kTriangle };

struct WeightViolation {
  WeightViolationKind kind;
  std::vector<std::size_t> indices;  // (b, b) | (b, b') | (b, b') | (b, b', via)
  std::string message;
};

std::string to_string(WeightViolationKind kind);

/// Checks zero diagonal, positive off-diagonal, symmetry and the triangle
/// inequality. Each unordered pair is reported at most once per property.
/// `require_positive = false` accepts pseudo-metrics (perfect clusters).
std::vector<WeightViolation> validate_weights(const WeightMatrix& w, bool require_positive = true);

/// Bernoulli means mu(arm, user) with a weight matrix over users.
struct BanditConfig {
  BanditConfig() = default;
  /// Throws DimensionError on shape mismatch and std::domain_error on means
  /// outside [0, 1].
  BanditConfig(Grid<double> means, WeightMatrix weights);

  [[nodiscard]] std::size_t n_arms() const { return means.rows(); }
  [[nodiscard]] std::size_t n_users() const { return means.cols(); }
  double mu(std::size_t a, std::size_t b) const { return means(a, b); }

  /// Same means with a different weight matrix.
  [[nodiscard]] BanditConfig with_weights(WeightMatrix w) const { return {means, std::move(w)}; }

  Grid<double> means;
  WeightMatrix weights;
};

enum class MembershipViolationKind { kOutside, kBoundary };

struct MembershipViolation {
  MembershipViolationKind kind;
  std::size_t arm;
  std::size_t user;
  std::size_t other_user;
  std::string message;
};

struct MembershipVerdict {
  bool member = true;
  std::vector<MembershipViolation> violations;
};

/// Membership in the structured set: |mu(a,b) - mu(a,b')| <= w(b,b') for all
/// arms and user pairs. In strict mode, additionally no sub-optimal couple
/// (a, b) has a user b' on the boundary mu(a,b') == mu*(b) - w(b,b').
MembershipVerdict check_membership(const BanditConfig& config, bool strict);

/// Quantities that follow from the true means.
struct DerivedQuantities {
  std::vector<double> mu_star;                       // per user
  std::vector<std::vector<std::size_t>> opt_arms;    // per user
  Grid<double> gaps;                                 // (arm, user)
  /// info_sets(a, b) = {b' : mu(a,b') < mu*(b) - w(b,b')} for sub-optimal
  /// couples, empty for optimal ones.
  Grid<std::vector<std::size_t>> info_sets;

  [[nodiscard]] bool is_optimal(std::size_t a, std::size_t b) const { return gaps(a, b) == 0.0; }
};

DerivedQuantities derive(const BanditConfig& config);

/// Unique optimal arm per user and (heuristically tested) unique solution of
/// the lower-bound program with beta = 1.
bool is_non_peculiar(const BanditConfig& config);

/// All-pairs shortest-path closure (Floyd-Warshall). Never increases an
/// entry and preserves symmetry.
Grid<double> shortest_path_closure(Grid<double> w);

/// Random metric: i.i.d. uniform off-diagonal entries, averaged with the
/// transpose, closed under shortest paths.
WeightMatrix sample_weights(std::size_t n_users, std::uint64_t seed);

/// Gibbs sweeps per arm over the polytope cut out by `w`, restricted to
/// (kSamplerMargin, 1 - kSamplerMargin). Resamples until strict membership
/// holds; throws SamplerError after kSamplerMaxAttempts failures.
BanditConfig sample_config(std::size_t n_arms, const WeightMatrix& w, std::uint64_t seed);

inline constexpr int kGibbsSweeps = 50;
inline constexpr double kSamplerMargin = 1e-3;
inline constexpr int kSamplerMaxAttempts = 100;

}  // namespace gsb
