// Copyright 2026 The gsbandit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "gsb/graph.hpp"

namespace gsb {

/// Malformed configuration document (missing field, ragged table, ...).
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Document layout:
///   { "n_arms": A, "n_users": B,
///     "means":   [[mu(a, b) for b] for a],
///     "weights": [[w(b, c) for c] for b] }
/// Extra keys are ignored. Only shapes and value ranges are checked here;
/// metric and membership checks are left to the caller.
BanditConfig config_from_json(const nlohmann::json& doc);
nlohmann::json config_to_json(const BanditConfig& config);

BanditConfig load_config(const std::filesystem::path& path);
/// Writes config_to_json with two-space indentation and a trailing newline.
void save_config(const std::filesystem::path& path, const BanditConfig& config);

}  // namespace gsb
