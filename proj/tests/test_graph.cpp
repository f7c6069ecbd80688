// Copyright 2026 The gsbandit Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <algorithm>

#include "fixtures.hpp"
#include "gsb/graph.hpp"
#include "gsb/kl.hpp"
#include "gsb/rng.hpp"

using fixtures::make_config;
using namespace gsb;

TEST_CASE("weight matrix construction errors") {
  CHECK_THROWS_AS(WeightMatrix(std::vector<std::vector<double>>{{0, 0.5}}), DimensionError);
  CHECK_THROWS_AS(WeightMatrix(std::vector<std::vector<double>>{{0, 1.5}, {1.5, 0}}), std::domain_error);
  CHECK_THROWS_AS(make_config({{0.5, 0.5}}, {{0}}), DimensionError);
}

TEST_CASE("validate_weights examples") {
  CHECK(validate_weights(fixtures::reference_config().weights).empty());
  CHECK(validate_weights(WeightMatrix({{0, 0.5}, {0.5, 0}})).empty());

  const auto v = validate_weights(WeightMatrix({{0, 0.9, 0.2}, {0.9, 0, 0.1}, {0.2, 0.1, 0}}));
  REQUIRE(v.size() == 1);
  CHECK(v[0].kind == WeightViolationKind::kTriangle);
  CHECK(v[0].indices == std::vector<std::size_t>{0, 1, 2});
}

TEST_CASE("validate_weights names each broken property") {
  const auto asym = validate_weights(WeightMatrix({{0, 0.3}, {0.4, 0}}));
  REQUIRE(asym.size() == 1);
  CHECK(asym[0].kind == WeightViolationKind::kAsymmetric);
  CHECK(to_string(asym[0].kind) == "symmetry");

  const auto diag = validate_weights(WeightMatrix({{0.1, 0.3}, {0.3, 0}}));
  REQUIRE(diag.size() == 1);
  CHECK(diag[0].kind == WeightViolationKind::kDiagonal);

  const auto zero = validate_weights(WeightMatrix({{0, 0}, {0, 0}}));
  REQUIRE(zero.size() == 1);
  CHECK(zero[0].kind == WeightViolationKind::kNonPositive);
  CHECK(validate_weights(WeightMatrix({{0, 0}, {0, 0}}), /*require_positive=*/false).empty());
}

TEST_CASE("check_membership examples") {
  CHECK(check_membership(fixtures::reference_config(), false).member);
  CHECK(check_membership(make_config({{0.1}, {0.9}}, {{0}}), true).member);
  const auto out = check_membership(make_config({{0.2, 0.9}}, {{0, 0.3}, {0.3, 0}}), false);
  CHECK_FALSE(out.member);
  REQUIRE(out.violations.size() == 1);
  CHECK(out.violations[0].kind == MembershipViolationKind::kOutside);
  CHECK(out.violations[0].user == 0);
  CHECK(out.violations[0].other_user == 1);
}

TEST_CASE("strict membership flags exact boundary points only") {
  // mu*(b0) - w = 0.8 - 0.3 = 0.5 = mu(a1, b1), a boundary point of B_{a1,b0}.
  const auto boundary = make_config({{0.8, 0.7}, {0.4, 0.5}}, {{0, 0.3}, {0.3, 0}});
  CHECK(check_membership(boundary, false).member);
  const auto strict = check_membership(boundary, true);
  CHECK_FALSE(strict.member);
  REQUIRE(strict.violations.size() == 1);
  CHECK(strict.violations[0].kind == MembershipViolationKind::kBoundary);
  CHECK(check_membership(make_config({{0.8, 0.7}, {0.4, 0.51}}, {{0, 0.3}, {0.3, 0}}), true).member);
}

TEST_CASE("derive on the bundled configuration") {
  const auto& cfg = fixtures::reference_config();
  const auto d = derive(cfg);
  // arm a2 is index 1, user b1 index 0.
  CHECK(d.mu_star[0] == 0.95);
  CHECK(d.gaps(1, 0) == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(d.info_sets(1, 0).size() == 10);
  for (std::size_t b = 0; b < cfg.n_users(); ++b) {
    REQUIRE(d.opt_arms[b].size() == 1);
    CHECK(d.opt_arms[b][0] == 4);
  }
  for (std::size_t a = 0; a < cfg.n_arms(); ++a)
    for (std::size_t b = 0; b < cfg.n_users(); ++b) {
      CHECK(d.gaps(a, b) >= 0.0);
      CHECK(d.is_optimal(a, b) == (a == 4));
      if (d.is_optimal(a, b)) {
        CHECK(d.info_sets(a, b).empty());
        continue;
      }
      const auto& info = d.info_sets(a, b);
      CHECK(std::find(info.begin(), info.end(), b) != info.end());
      for (std::size_t c : info) CHECK(kl_plus(cfg.mu(a, c), d.mu_star[b] - cfg.weights(b, c)) > ExtReal(0.0));
    }
}

TEST_CASE("derive edge cases") {
  const auto tied = derive(make_config({{0.4, 0.2}, {0.4, 0.6}}, {{0, 0.5}, {0.5, 0}}));
  CHECK(tied.opt_arms[0] == std::vector<std::size_t>{0, 1});
  CHECK(tied.gaps(0, 0) == 0.0);
  CHECK(tied.gaps(1, 0) == 0.0);
  CHECK(tied.info_sets(0, 0).empty());

  const auto single = derive(make_config({{0.2}, {0.6}, {0.5}}, {{0}}));
  CHECK(single.info_sets(0, 0) == std::vector<std::size_t>{0});
  CHECK(single.info_sets(2, 0) == std::vector<std::size_t>{0});

  const auto& cfg = fixtures::reference_config();
  const auto d1 = derive(cfg);
  const auto d2 = derive(cfg);
  CHECK(d1.mu_star == d2.mu_star);
  CHECK(d1.gaps == d2.gaps);
  CHECK(d1.info_sets == d2.info_sets);
}

TEST_CASE("non-peculiarity") {
  CHECK(is_non_peculiar(fixtures::reference_config()));
  CHECK_FALSE(is_non_peculiar(make_config({{0.5, 0.3}, {0.5, 0.6}}, {{0, 0.5}, {0.5, 0}})));
  CHECK(is_non_peculiar(make_config({{0.2}, {0.6}, {0.5}}, {{0}})));
}

TEST_CASE("sample_weights") {
  CHECK(sample_weights(1, 3).grid() == Grid<double>(1, 1, 0.0));
  for (std::uint64_t seed = 0; seed < 50; ++seed) CHECK(validate_weights(sample_weights(10, seed)).empty());
  CHECK_FALSE(sample_weights(10, 1).grid() == sample_weights(10, 2).grid());
  CHECK(sample_weights(10, 5).grid() == sample_weights(10, 5).grid());
}

TEST_CASE("shortest-path closure only lowers entries and keeps symmetry") {
  CounterRng rng(99, Stream::kWeights);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 6;
    Grid<double> raw(n, n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) raw(i, j) = raw(j, i) = rng.uniform();
    const auto closed = shortest_path_closure(raw);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        CHECK(closed(i, j) <= raw(i, j));
        CHECK(closed(i, j) == closed(j, i));
      }
    CHECK(validate_weights(WeightMatrix(closed), false).empty());
  }
}

TEST_CASE("sample_config under vacuous and clustered structure") {
  const auto free = sample_config(5, WeightMatrix::ones(4), 1);
  for (double m : free.means.data()) {
    CHECK(m > 0.0);
    CHECK(m < 1.0);
  }
  CHECK(check_membership(free, true).member);

  const auto clustered = sample_config(5, WeightMatrix::uniform(4, 0.0), 2);
  for (std::size_t a = 0; a < 5; ++a)
    for (std::size_t b = 1; b < 4; ++b) CHECK(clustered.mu(a, b) == clustered.mu(a, 0));
}

TEST_CASE("sample_config returns strict members under w_0.3") {
  const auto w = WeightMatrix::uniform(10, 0.3);
  const auto first = sample_config(5, w, 7);
  CHECK(first.means == sample_config(5, w, 7).means);
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    const auto cfg = sample_config(5, w, seed);
    REQUIRE(check_membership(cfg, true).member);
  }
}

TEST_CASE("sample_config on random metrics") {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto cfg = sample_config(5, sample_weights(10, seed), seed);
    CHECK(check_membership(cfg, true).member);
  }
  CHECK_THROWS_AS(sample_config(2, WeightMatrix({{0, 0.3}, {0.4, 0}}), 1), std::invalid_argument);
}
