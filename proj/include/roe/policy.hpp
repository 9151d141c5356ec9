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

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "roe/error.hpp"
#include "roe/kgstore.hpp"
#include "roe/miner.hpp"
#include "roe/path.hpp"

namespace roe {

inline constexpr std::string_view kPromptTemplateVersion = "roe-prompt-v1";
inline constexpr std::string_view kActionSchema = R"({"answers": [], "exploration_paths": []})";

/// One batch of the state shown to a policy. Everything is in label form.
struct PolicyRequest {
  std::string qid;
  std::string question;
  int depth = 0;
  std::vector<LabelPath> current_paths;
  std::vector<RawTriple> neighbors;
};

/// The (answers, new exploration paths) pair a policy predicts for a step.
struct StepAction {
  std::vector<std::string> answers;
  std::vector<LabelPath> paths;
  bool empty() const { return answers.empty() && paths.empty(); }
  bool operator==(const StepAction&) const = default;
};

struct RawPolicyResponse {
  std::string text;
  std::optional<StepAction> parsed;
  bool format_ok = false;
  // Set by a policy that explicitly ends the episode.
  bool stop = false;
  double latency_ms = 0.0;
  int attempts = 1;
};

inline nlohmann::ordered_json request_to_json(const PolicyRequest& req) {
  nlohmann::ordered_json j;
  j["qid"] = req.qid;
  j["question"] = req.question;
  j["depth"] = req.depth;
  j["current_paths"] = req.current_paths;
  j["neighbors"] = req.neighbors;
  return j;
}

inline PolicyRequest request_from_json(const nlohmann::json& j) {
  PolicyRequest req;
  req.qid = j.at("qid").get<std::string>();
  req.question = j.value("question", std::string{});
  req.depth = j.at("depth").get<int>();
  req.current_paths = j.at("current_paths").get<std::vector<LabelPath>>();
  req.neighbors = j.at("neighbors").get<std::vector<RawTriple>>();
  return req;
}

inline nlohmann::ordered_json action_to_json(const StepAction& a) {
  nlohmann::ordered_json j;
  j["answers"] = a.answers;
  j["exploration_paths"] = a.paths;
  return j;
}

inline std::string serialize_action(const StepAction& a) { return action_to_json(a).dump(); }

// ---------------------------------------------------------------------------
// Prompt rendering

struct RenderOptions {
  // Upper bound on the rendered length; 0 disables the bound.
  std::size_t max_chars = 0;
};

namespace detail {

inline std::string path_line(const LabelPath& p) {
  std::string s = "  ";
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (i) s += " -> ";
    s += p[i];
  }
  return s + "\n";
}

inline std::string triple_line(const RawTriple& t) {
  return "  (" + t[0] + ", " + t[1] + ", " + t[2] + ")\n";
}

// Emits as many `lines` as fit in `room`, then an omission marker.
inline std::string fit_lines(const std::vector<std::string>& lines, std::size_t room) {
  auto marker = [](std::size_t n) { return "  ... (" + std::to_string(n) + " more omitted)\n"; };
  std::string out;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::size_t rest = lines.size() - i - 1;
    const std::size_t reserve = rest ? marker(rest).size() : 0;
    if (out.size() + lines[i].size() + reserve <= room) {
      out += lines[i];
      continue;
    }
    const auto m = marker(lines.size() - i);
    if (out.size() + m.size() <= room) out += m;
    break;
  }
  return out;
}

}  // namespace detail

/// Deterministic text prompt for one request. With a character budget,
/// current paths and then neighbor triples are elided from the end so the
/// output never exceeds it; the schema line is always kept when it fits.
inline std::string render_request(const PolicyRequest& req, const RenderOptions& opts = {}) {
  const std::string head = "[" + std::string(kPromptTemplateVersion) +
                           "] Explore the knowledge graph step by step to answer the question.\n"
                           "question: " +
                           req.question + "\ndepth: " + std::to_string(req.depth) + "\n";
  const std::string tail =
      "Reply with one JSON object in exactly this form:\n" + std::string(kActionSchema) +
      "\nanswers lists entities that answer the question at this step. Each exploration path "
      "extends one current path by one neighbor triple, written as a list of labels "
      "[entity, relation, entity, ...]. Return an empty exploration_paths list to stop.\n";

  std::vector<std::string> path_lines, neighbor_lines;
  for (const auto& p : req.current_paths) path_lines.push_back(detail::path_line(p));
  for (const auto& t : req.neighbors) neighbor_lines.push_back(detail::triple_line(t));

  const std::string paths_title = req.current_paths.empty() ? "current paths: (none)\n" : "current paths:\n";
  const std::string neighbors_title = "neighbor triples:\n";

  auto join = [](const std::vector<std::string>& v) {
    std::string s;
    for (const auto& l : v) s += l;
    return s;
  };
  std::string full = head + paths_title + join(path_lines) + neighbors_title + join(neighbor_lines) + tail;
  if (opts.max_chars == 0 || full.size() <= opts.max_chars) return full;

  const std::size_t fixed = head.size() + paths_title.size() + neighbors_title.size() + tail.size();
  if (fixed > opts.max_chars) {
    // Only the question can be long enough to cause this; keep the schema.
    std::string out = head + paths_title + neighbors_title + tail;
    if (tail.size() >= opts.max_chars) return tail.substr(0, opts.max_chars);
    return out.substr(0, opts.max_chars - tail.size()) + tail;
  }
  std::size_t room = opts.max_chars - fixed;
  const auto neighbors_block = detail::fit_lines(neighbor_lines, room / 2 + room % 2);
  const auto paths_block = detail::fit_lines(path_lines, room - neighbors_block.size());
  // Hand any space the paths did not use back to the neighbors.
  const auto neighbors_final = detail::fit_lines(neighbor_lines, room - paths_block.size());
  return head + paths_title + paths_block + neighbors_title + neighbors_final + tail;
}

// ---------------------------------------------------------------------------
// Action parsing

namespace detail {

// End offset (exclusive) of the balanced {...} starting at `open`, honoring
// JSON string literals; npos when unbalanced.
inline std::size_t balanced_end(std::string_view s, std::size_t open) {
  int depth = 0;
  bool in_string = false;
  for (std::size_t i = open; i < s.size(); ++i) {
    const char c = s[i];
    if (in_string) {
      if (c == '\\')
        ++i;
      else if (c == '"')
        in_string = false;
      continue;
    }
    if (c == '"')
      in_string = true;
    else if (c == '{')
      ++depth;
    else if (c == '}' && --depth == 0)
      return i + 1;
  }
  return std::string_view::npos;
}

inline std::optional<StepAction> action_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("answers") || !j.contains("exploration_paths")) return std::nullopt;
  const auto& answers = j["answers"];
  const auto& paths = j["exploration_paths"];
  if (!answers.is_array() || !paths.is_array()) return std::nullopt;
  StepAction a;
  for (const auto& x : answers) {
    if (!x.is_string()) return std::nullopt;
    a.answers.push_back(x.get<std::string>());
  }
  for (const auto& p : paths) {
    if (!p.is_array() || p.empty() || p.size() % 2 == 0) return std::nullopt;
    LabelPath lp;
    for (const auto& x : p) {
      if (!x.is_string()) return std::nullopt;
      lp.push_back(x.get<std::string>());
    }
    a.paths.push_back(std::move(lp));
  }
  return a;
}

}  // namespace detail

/// Extracts the first JSON object embedded in `text` (surrounding prose is
/// tolerated) and checks it carries list-valued "answers" and
/// "exploration_paths". Extra keys are ignored.
inline RawPolicyResponse parse_action(std::string_view text) {
  RawPolicyResponse resp;
  resp.text = std::string(text);
  for (auto open = text.find('{'); open != std::string_view::npos; open = text.find('{', open + 1)) {
    const auto end = detail::balanced_end(text, open);
    if (end == std::string_view::npos) break;
    auto j = nlohmann::json::parse(text.substr(open, end - open), nullptr, /*allow_exceptions=*/false);
    if (j.is_discarded() || !j.is_object()) continue;
    resp.parsed = detail::action_from_json(j);
    resp.format_ok = resp.parsed.has_value();
    if (resp.format_ok && j.contains("stop") && j["stop"].is_boolean()) resp.stop = j["stop"].get<bool>();
    break;
  }
  return resp;
}

// ---------------------------------------------------------------------------
// Policies

class Policy {
 public:
  virtual ~Policy() = default;
  virtual RawPolicyResponse step(const PolicyRequest& req) = 0;
  virtual std::string name() const = 0;
};

inline RawPolicyResponse respond_with(const StepAction& a) {
  RawPolicyResponse r;
  r.text = serialize_action(a);
  r.parsed = a;
  r.format_ok = true;
  return r;
}

/// Always predicts the empty action.
class NullPolicy final : public Policy {
 public:
  RawPolicyResponse step(const PolicyRequest&) override { return respond_with({}); }
  std::string name() const override { return "null"; }
};

namespace detail {

inline std::uint64_t fnv1a(std::string_view s, std::uint64_t h = 1469598103934665603ULL) {
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

}  // namespace detail

/// Picks up to `k` one-triple extensions uniformly from the batch and answers
/// their tails. Seeded from (seed, qid, depth, batch contents), so identical
/// requests get identical responses.
class RandomPolicy final : public Policy {
 public:
  explicit RandomPolicy(std::uint64_t seed, std::size_t k = 3) : seed_(seed), k_(k) {}

  RawPolicyResponse step(const PolicyRequest& req) override {
    std::uint64_t h = detail::fnv1a(req.qid, seed_ ^ 1469598103934665603ULL);
    h = detail::fnv1a(std::to_string(req.depth), h);
    for (const auto& t : req.neighbors) h = detail::fnv1a(t[0] + '\t' + t[1] + '\t' + t[2], h);
    std::mt19937_64 rng(h);

    std::vector<LabelPath> candidates;
    for (const auto& p : req.current_paths)
      for (const auto& t : req.neighbors)
        if (!p.empty() && p.back() == t[0]) {
          auto ext = p;
          ext.push_back(t[1]);
          ext.push_back(t[2]);
          candidates.push_back(std::move(ext));
        }
    const auto take = std::min(k_, candidates.size());
    for (std::size_t i = 0; i < take; ++i) {
      const auto j = i + static_cast<std::size_t>(rng() % (candidates.size() - i));
      std::swap(candidates[i], candidates[j]);
    }
    candidates.resize(take);
    StepAction a;
    std::set<std::string> tails;
    for (const auto& c : candidates)
      if (tails.insert(c.back()).second) a.answers.push_back(c.back());
    a.paths = std::move(candidates);
    return respond_with(a);
  }
  std::string name() const override { return "random"; }

 private:
  std::uint64_t seed_;
  std::size_t k_;
};

/// Gold actions of mined step records, keyed by (qid, depth), in label form.
class OracleIndex {
 public:
  struct Gold {
    std::set<std::string> answers;
    LabelPathSet paths;
  };

  OracleIndex() = default;
  OracleIndex(const KnowledgeGraph& g, std::span<const GoldStepRecord> records) {
    for (const auto& r : records) add(g, r);
  }

  void add(const KnowledgeGraph& g, const GoldStepRecord& r) {
    auto& gold = by_qid_[r.qid][r.depth];
    for (auto e : r.gold_answers) gold.answers.insert(g.label(e));
    auto paths = to_labels(g, r.gold_paths);
    gold.paths.insert(paths.begin(), paths.end());
  }

  /// Registers a question with no records so requests for it are not errors.
  void add_question(const std::string& qid) { by_qid_[qid]; }

  const std::map<int, Gold>& depths(const std::string& qid) const {
    auto it = by_qid_.find(qid);
    if (it == by_qid_.end()) throw LookupError("oracle has no records for question '" + qid + "'");
    return it->second;
  }

 private:
  std::map<std::string, std::map<int, Gold>> by_qid_;
};

/// Gold action at the request's depth, restricted to answers that are tails
/// of this batch's triples and paths whose final triple is in this batch.
/// The union over a partition of the neighbors is the unrestricted action.
inline StepAction oracle_step(const OracleIndex& index, const PolicyRequest& req) {
  const auto& depths = index.depths(req.qid);
  auto it = depths.find(req.depth);
  if (it == depths.end()) return {};
  const std::set<RawTriple> batch(req.neighbors.begin(), req.neighbors.end());
  std::set<std::string> tails;
  for (const auto& t : batch) tails.insert(t[2]);

  StepAction a;
  for (const auto& ans : it->second.answers)
    if (tails.count(ans)) a.answers.push_back(ans);
  for (const auto& p : it->second.paths) {
    if (p.size() < 3) continue;
    RawTriple last{p[p.size() - 3], p[p.size() - 2], p[p.size() - 1]};
    if (batch.count(last)) a.paths.push_back(p);
  }
  return a;
}

class OraclePolicy final : public Policy {
 public:
  explicit OraclePolicy(OracleIndex index) : index_(std::move(index)) {}
  OraclePolicy(const KnowledgeGraph& g, std::span<const GoldStepRecord> records) : index_(g, records) {}

  RawPolicyResponse step(const PolicyRequest& req) override { return respond_with(oracle_step(index_, req)); }
  std::string name() const override { return "oracle"; }

 private:
  OracleIndex index_;
};

}  // namespace roe
