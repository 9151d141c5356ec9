/*
 * Copyright 2026 The roe-kg Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <charconv>
#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <string_view>

#include "roe/error.hpp"
#include "roe/runtime.hpp"

namespace roe {

/// Every tunable of a pipeline run. Defaults are overridden by a config
/// file, which is overridden by command-line flags.
struct RunConfig {
  std::string kg_path;
  std::string questions_path;
  std::string output_path;
  int l_max = 2;
  int d_max = 5;
  std::size_t batch_budget = 256;
  std::size_t neighbor_cap = 256;
  std::size_t max_paths = 64;
  double beta = 1.0;
  double format_reward = 1.0;
  std::uint64_t split_seed = 0;
  double split_ratio = 0.6;
  TraversalMode mode = TraversalMode::step_synchronous;
  std::string policy_spec = "oracle";
  int jobs = 1;
  int samples = 1;
  bool augment = true;
  bool strict_seeds = false;
  bool forbid_revisit = false;
  std::string inverse_suffix = ".inv";
  int timeout_ms = 30000;
  int retries = 2;
  std::uint64_t policy_seed = 0;

  EpisodeConfig episode() const {
    return {d_max, batch_budget, mode, forbid_revisit, max_paths};
  }
};

namespace detail {

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

template <class T>
T parse_number(const std::string& key, const std::string& value) {
  T out{};
  auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc{} || ptr != value.data() + value.size())
    throw ParseError("config key '" + key + "': invalid number '" + value + "'");
  return out;
}

// std::from_chars for double is missing from some toolchains still in use.
inline double parse_real(const std::string& key, const std::string& value) {
  std::istringstream in(value);
  in.imbue(std::locale::classic());
  double out = 0.0;
  if (!(in >> out) || !in.eof()) throw ParseError("config key '" + key + "': invalid number '" + value + "'");
  return out;
}

inline bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "yes" || value == "on") return true;
  if (value == "false" || value == "0" || value == "no" || value == "off") return false;
  throw ParseError("config key '" + key + "': invalid boolean '" + value + "'");
}

template <class T>
T at_least_one(const std::string& key, T v) {
  if (v < 1) throw ParseError("config key '" + key + "': must be >= 1");
  return v;
}

}  // namespace detail

/// Applies one key/value pair; unknown keys and bad values name the key.
inline void apply_config_value(RunConfig& c, const std::string& key, const std::string& value) {
  using namespace detail;
  if (key == "kg") c.kg_path = value;
  else if (key == "questions") c.questions_path = value;
  else if (key == "out") c.output_path = value;
  else if (key == "l_max") c.l_max = at_least_one(key, parse_number<int>(key, value));
  else if (key == "d_max") c.d_max = at_least_one(key, parse_number<int>(key, value));
  else if (key == "batch_budget") c.batch_budget = at_least_one(key, parse_number<std::size_t>(key, value));
  else if (key == "neighbor_cap") c.neighbor_cap = at_least_one(key, parse_number<std::size_t>(key, value));
  else if (key == "max_paths") c.max_paths = parse_number<std::size_t>(key, value);
  else if (key == "beta") {
    c.beta = parse_real(key, value);
    if (!(c.beta >= 0.0)) throw ParseError("config key 'beta': must be >= 0");
  } else if (key == "format_reward") c.format_reward = parse_real(key, value);
  else if (key == "split_seed") c.split_seed = parse_number<std::uint64_t>(key, value);
  else if (key == "split_ratio") {
    c.split_ratio = parse_real(key, value);
    if (!(c.split_ratio >= 0.0 && c.split_ratio <= 1.0)) throw ParseError("config key 'split_ratio': must lie in [0, 1]");
  } else if (key == "mode") {
    try {
      c.mode = parse_mode(value);
    } catch (const InvalidArgument& e) {
      throw ParseError("config key 'mode': " + std::string(e.what()));
    }
  } else if (key == "policy") c.policy_spec = value;
  else if (key == "jobs") c.jobs = at_least_one(key, parse_number<int>(key, value));
  else if (key == "samples") c.samples = at_least_one(key, parse_number<int>(key, value));
  else if (key == "augment") c.augment = parse_bool(key, value);
  else if (key == "strict_seeds") c.strict_seeds = parse_bool(key, value);
  else if (key == "forbid_revisit") c.forbid_revisit = parse_bool(key, value);
  else if (key == "inverse_suffix") {
    if (value.empty()) throw ParseError("config key 'inverse_suffix': must be non-empty");
    c.inverse_suffix = value;
  } else if (key == "timeout_ms") c.timeout_ms = at_least_one(key, parse_number<int>(key, value));
  else if (key == "retries") c.retries = parse_number<int>(key, value);
  else if (key == "policy_seed") c.policy_seed = parse_number<std::uint64_t>(key, value);
  else throw ParseError("unknown config key '" + key + "'");
}

/// Reads `key = value` lines; blank lines and lines starting with '#' are
/// ignored.
inline std::map<std::string, std::string> read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file '" + path + "'");
  std::map<std::string, std::string> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto t = detail::trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      throw ParseError(path + ":" + std::to_string(lineno) + ": expected key = value");
    out[detail::trim(t.substr(0, eq))] = detail::trim(t.substr(eq + 1));
  }
  return out;
}

inline RunConfig load_config(const std::string& path, const std::map<std::string, std::string>& overrides) {
  RunConfig c;
  if (!path.empty())
    for (const auto& [k, v] : read_config_file(path)) apply_config_value(c, k, v);
  for (const auto& [k, v] : overrides) apply_config_value(c, k, v);
  return c;
}

/// Single-line `key=value` rendering of every effective parameter.
inline std::string echo_config(const RunConfig& c) {
  std::ostringstream o;
  o.imbue(std::locale::classic());
  o << "kg=" << c.kg_path << " questions=" << c.questions_path << " out=" << c.output_path
    << " l_max=" << c.l_max << " d_max=" << c.d_max << " batch_budget=" << c.batch_budget
    << " neighbor_cap=" << c.neighbor_cap << " max_paths=" << c.max_paths << " beta=" << c.beta
    << " format_reward=" << c.format_reward << " split_seed=" << c.split_seed << " split_ratio=" << c.split_ratio
    << " mode=" << to_string(c.mode) << " policy=" << c.policy_spec << " jobs=" << c.jobs
    << " samples=" << c.samples << " augment=" << (c.augment ? "true" : "false")
    << " strict_seeds=" << (c.strict_seeds ? "true" : "false")
    << " forbid_revisit=" << (c.forbid_revisit ? "true" : "false") << " inverse_suffix=" << c.inverse_suffix
    << " timeout_ms=" << c.timeout_ms << " retries=" << c.retries << " policy_seed=" << c.policy_seed;
  return o.str();
}

}  // namespace roe
