// Copyright 2026 The gsbandit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <vector>

#include "gsb/config_io.hpp"
#include "gsb/graph.hpp"

namespace fixtures {

inline std::string asset(const std::string& name) { return std::string(GSB_ASSET_DIR) + "/" + name; }

/// The bundled fixed configuration (5 arms, 10 users).
inline const gsb::BanditConfig& reference_config() {
  static const gsb::BanditConfig config = gsb::load_config(asset("reference_5x10.json"));
  return config;
}

inline gsb::Grid<double> grid(const std::vector<std::vector<double>>& rows) {
  gsb::Grid<double> g(rows.size(), rows.front().size());
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (std::size_t c = 0; c < rows[r].size(); ++c) g(r, c) = rows[r][c];
  return g;
}

inline gsb::BanditConfig make_config(const std::vector<std::vector<double>>& means,
                                     const std::vector<std::vector<double>>& weights) {
  return gsb::BanditConfig(grid(means), gsb::WeightMatrix(weights));
}

inline std::vector<double> ones(std::size_t n) { return std::vector<double>(n, 1.0); }

}  // namespace fixtures
