// Copyright 2026 The gsbandit Authors
// SPDX-License-Identifier: Apache-2.0

#include "gsb/config_io.hpp"

#include <fstream>
#include <vector>

namespace gsb {

namespace {

std::size_t read_size(const nlohmann::json& doc, const char* key) {
  if (!doc.contains(key)) throw ConfigError(std::string("missing field '") + key + "'");
  const auto& v = doc.at(key);
  if (!v.is_number_integer() || v.get<long long>() < 1)
    throw ConfigError(std::string("field '") + key + "' must be a positive integer");
  return v.get<std::size_t>();
}

Grid<double> read_table(const nlohmann::json& doc, const char* key, std::size_t rows, std::size_t cols) {
  if (!doc.contains(key)) throw ConfigError(std::string("missing field '") + key + "'");
  const auto& t = doc.at(key);
  if (!t.is_array() || t.size() != rows)
    throw ConfigError(std::string("field '") + key + "' must have " + std::to_string(rows) + " rows");
  Grid<double> g(rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    const auto& row = t[r];
    if (!row.is_array() || row.size() != cols)
      throw ConfigError(std::string("row ") + std::to_string(r) + " of '" + key + "' must have " +
                        std::to_string(cols) + " entries");
    for (std::size_t c = 0; c < cols; ++c) {
      if (!row[c].is_number()) throw ConfigError(std::string("non-numeric entry in '") + key + "'");
      g(r, c) = row[c].get<double>();
    }
  }
  return g;
}

}  // namespace

BanditConfig config_from_json(const nlohmann::json& doc) {
  if (!doc.is_object()) throw ConfigError("configuration must be a JSON object");
  const std::size_t arms = read_size(doc, "n_arms");
  const std::size_t users = read_size(doc, "n_users");
  Grid<double> means = read_table(doc, "means", arms, users);
  Grid<double> weights = read_table(doc, "weights", users, users);
  try {
    return BanditConfig(std::move(means), WeightMatrix(std::move(weights)));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  } catch (const std::domain_error& e) {
    throw ConfigError(e.what());
  }
}

nlohmann::json config_to_json(const BanditConfig& config) {
  auto table = [](auto&& at, std::size_t rows, std::size_t cols) {
    nlohmann::json t = nlohmann::json::array();
    for (std::size_t r = 0; r < rows; ++r) {
      std::vector<double> row(cols);
      for (std::size_t c = 0; c < cols; ++c) row[c] = at(r, c);
      t.push_back(row);
    }
    return t;
  };
  nlohmann::json doc;
  doc["n_arms"] = config.n_arms();
  doc["n_users"] = config.n_users();
  doc["means"] = table([&](std::size_t a, std::size_t b) { return config.mu(a, b); }, config.n_arms(),
                       config.n_users());
  doc["weights"] = table([&](std::size_t b, std::size_t c) { return config.weights(b, c); }, config.n_users(),
                         config.n_users());
  return doc;
}

BanditConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path.string());
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  return config_from_json(doc);
}

void save_config(const std::filesystem::path& path, const BanditConfig& config) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << config_to_json(config).dump(2) << '\n';
}

}  // namespace gsb
