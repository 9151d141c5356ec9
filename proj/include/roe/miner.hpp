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

#include <cstdint>
#include <fstream>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "roe/corpus.hpp"
#include "roe/error.hpp"
#include "roe/kgstore.hpp"
#include "roe/path.hpp"

namespace roe {

/// One supervised step: the state at depth d and the gold action for it.
struct GoldStepRecord {
  std::string qid;
  std::string question;
  int depth = 0;
  PathSet current_paths;                       // all depth-d prefixes of gold paths
  std::vector<NeighborSet> frontier_neighbors; // per frontier node, capped
  std::set<EntityId> gold_answers;             // gold answers one hop from the frontier
  PathSet gold_paths;                          // gold extensions plus same-relation siblings
  std::set<EntityId> seed_answers;             // zero-hop answers; depth-0 record only
  std::vector<std::string> all_answers;        // the question's full gold answer labels

  bool operator==(const GoldStepRecord&) const = default;
};

namespace detail {

struct MineNode {
  std::uint32_t parent;
  RelationId relation;
  EntityId entity;
  std::uint32_t hops;
};

inline constexpr std::uint32_t kNoParent = UINT32_MAX;

inline bool chain_visits(const std::vector<MineNode>& arena, std::uint32_t node, EntityId v) {
  for (; node != kNoParent; node = arena[node].parent)
    if (arena[node].entity == v) return true;
  return false;
}

inline ReasoningPath chain_path(const std::vector<MineNode>& arena, std::uint32_t node) {
  ReasoningPath p;
  const auto hops = arena[node].hops;
  p.entities.resize(hops + 1);
  p.relations.resize(hops);
  for (std::uint32_t i = hops + 1; i-- > 0; node = arena[node].parent) {
    p.entities[i] = arena[node].entity;
    if (i > 0) p.relations[i - 1] = arena[node].relation;
  }
  return p;
}

}  // namespace detail

/// All simple paths of at most `l_max` hops that start at a seed and end at a
/// resolvable gold answer. A path that passes through an answer is emitted and
/// still expanded further. Expansion is FIFO over a parent-pointer arena, so
/// memory is one node per enumerated simple path.
inline PathSet mine_gold_paths(const KnowledgeGraph& g, const QuestionInstance& q, int l_max) {
  if (l_max < 1) throw InvalidArgument("l_max must be >= 1");
  const auto answers = resolve_answers(g, q);
  PathSet gold;
  if (answers.empty()) return gold;

  std::vector<detail::MineNode> arena;
  for (auto s : q.seeds) arena.push_back({detail::kNoParent, RelationId{}, s, 0});

  for (std::uint32_t i = 0; i < arena.size(); ++i) {
    const auto node = arena[i];
    if (answers.count(node.entity)) gold.insert(detail::chain_path(arena, i));
    if (node.hops >= static_cast<std::uint32_t>(l_max)) continue;
    for (const auto& e : g.out_edges(node.entity)) {
      if (detail::chain_visits(arena, i, e.tail)) continue;
      arena.push_back({i, e.relation, e.tail, node.hops + 1});
    }
  }
  return gold;
}

/// Step records for depths 0 .. l_max-1. A depth is skipped when it has no
/// current paths, or when it has neither a gold extension nor a gold answer.
inline std::vector<GoldStepRecord> build_step_records(const KnowledgeGraph& g, const QuestionInstance& q,
                                                      const PathSet& gold, int l_max,
                                                      std::size_t neighbor_cap = 256) {
  if (l_max < 1) throw InvalidArgument("l_max must be >= 1");
  std::vector<PathSet> pref(static_cast<std::size_t>(l_max) + 1);
  for (const auto& p : gold) {
    if (p.length() > static_cast<std::size_t>(l_max))
      throw ConsistencyError("question '" + q.qid + "': gold path of length " +
                             std::to_string(p.length()) + " exceeds l_max " + std::to_string(l_max));
    for (std::size_t d = 0; d <= p.length(); ++d) pref[d].insert(p.prefix(d));
  }

  const auto answers = resolve_answers(g, q);
  std::set<EntityId> seed_answers;
  for (auto s : q.seeds)
    if (answers.count(s)) seed_answers.insert(s);

  std::vector<GoldStepRecord> records;
  for (int d = 0; d < l_max; ++d) {
    const auto& current = pref[static_cast<std::size_t>(d)];
    const auto& next = pref[static_cast<std::size_t>(d) + 1];
    if (current.empty()) continue;

    std::set<EntityId> frontier;
    for (const auto& p : current) frontier.insert(p.frontier());

    std::set<EntityId> step_answers;
    for (auto v : frontier)
      for (const auto& e : g.out_edges(v))
        if (answers.count(e.tail)) step_answers.insert(e.tail);

    if (next.empty() && step_answers.empty()) continue;

    PathSet step_paths;
    for (const auto& ext : next) {
      const auto base = ext.prefix(static_cast<std::size_t>(d));
      const auto last = ext.last_triple();
      for (const auto& sib : g.out_edges(last.head, last.relation))
        step_paths.insert(base.extended(sib.relation, sib.tail));
    }

    GoldStepRecord rec;
    rec.qid = q.qid;
    rec.question = q.text;
    rec.depth = d;
    rec.current_paths = current;
    for (auto v : frontier) {
      auto ns = g.neighbors(v);
      if (neighbor_cap > 0 && ns.edges.size() > neighbor_cap) ns.edges.resize(neighbor_cap);
      rec.frontier_neighbors.push_back(std::move(ns));
    }
    rec.gold_answers = std::move(step_answers);
    rec.gold_paths = std::move(step_paths);
    if (d == 0) rec.seed_answers = seed_answers;
    rec.all_answers = q.answers;
    records.push_back(std::move(rec));
  }
  return records;
}

// ---------------------------------------------------------------------------
// SFT JSONL. The first line is a header; each following line is one record.

struct SftHeader {
  int format_version = 1;
  int l_max = 2;
  std::size_t neighbor_cap = 256;
  bool operator==(const SftHeader&) const = default;
};

struct SftDataset {
  SftHeader header;
  std::vector<GoldStepRecord> records;
};

namespace detail {

inline nlohmann::ordered_json label_paths_json(const KnowledgeGraph& g, const PathSet& paths) {
  auto arr = nlohmann::ordered_json::array();
  for (const auto& p : paths) arr.push_back(to_labels(g, p));
  return arr;
}

inline nlohmann::ordered_json entity_labels_json(const KnowledgeGraph& g, const std::set<EntityId>& ids) {
  auto arr = nlohmann::ordered_json::array();
  for (auto e : ids) arr.push_back(g.label(e));
  return arr;
}

inline PathSet paths_from_json(const KnowledgeGraph& g, const nlohmann::json& arr) {
  PathSet out;
  for (const auto& j : arr) {
    auto labels = j.get<LabelPath>();
    auto p = resolve_path(g, labels);
    if (!p) throw LookupError("path '" + canonical(labels) + "' does not resolve in the graph");
    out.insert(std::move(*p));
  }
  return out;
}

inline std::set<EntityId> entities_from_json(const KnowledgeGraph& g, const nlohmann::json& arr) {
  std::set<EntityId> out;
  for (const auto& j : arr) out.insert(g.entity(j.get<std::string>()));
  return out;
}

}  // namespace detail

inline nlohmann::ordered_json record_to_json(const KnowledgeGraph& g, const GoldStepRecord& r) {
  auto neighbors = nlohmann::ordered_json::array();
  for (const auto& ns : r.frontier_neighbors) {
    auto edges = nlohmann::ordered_json::array();
    for (const auto& t : ns.edges) edges.push_back(g.labels(t));
    neighbors.push_back({{"center", g.label(ns.center)}, {"edges", std::move(edges)}});
  }
  nlohmann::ordered_json j;
  j["qid"] = r.qid;
  j["depth"] = r.depth;
  j["state"] = {{"question", r.question},
                {"current_paths", detail::label_paths_json(g, r.current_paths)},
                {"frontier_neighbors", std::move(neighbors)}};
  j["gold_action"] = {{"answers", detail::entity_labels_json(g, r.gold_answers)},
                      {"exploration_paths", detail::label_paths_json(g, r.gold_paths)}};
  j["seed_answers"] = detail::entity_labels_json(g, r.seed_answers);
  j["all_answers"] = r.all_answers;
  return j;
}

inline GoldStepRecord record_from_json(const KnowledgeGraph& g, const nlohmann::json& j) {
  GoldStepRecord r;
  r.qid = j.at("qid").get<std::string>();
  r.depth = j.at("depth").get<int>();
  const auto& state = j.at("state");
  r.question = state.at("question").get<std::string>();
  r.current_paths = detail::paths_from_json(g, state.at("current_paths"));
  for (const auto& ns : state.at("frontier_neighbors")) {
    NeighborSet out{g.entity(ns.at("center").get<std::string>()), {}};
    for (const auto& e : ns.at("edges")) {
      auto t = e.get<RawTriple>();
      out.edges.push_back({g.entity(t[0]), g.relation(t[1]), g.entity(t[2])});
    }
    r.frontier_neighbors.push_back(std::move(out));
  }
  const auto& action = j.at("gold_action");
  r.gold_answers = detail::entities_from_json(g, action.at("answers"));
  r.gold_paths = detail::paths_from_json(g, action.at("exploration_paths"));
  r.seed_answers = detail::entities_from_json(g, j.value("seed_answers", nlohmann::json::array()));
  r.all_answers = j.value("all_answers", std::vector<std::string>{});
  return r;
}

/// Writes the header line followed by one line per record; returns the
/// number of records written.
inline std::size_t export_sft_dataset(const KnowledgeGraph& g, std::span<const GoldStepRecord> records,
                                      const SftHeader& header, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write '" + path + "'");
  nlohmann::ordered_json h;
  h["format_version"] = header.format_version;
  h["l_max"] = header.l_max;
  h["neighbor_cap"] = header.neighbor_cap;
  out << h.dump() << '\n';
  for (const auto& r : records) out << record_to_json(g, r).dump() << '\n';
  out.flush();
  if (!out) throw IoError("write failed on '" + path + "'");
  return records.size();
}

inline SftDataset import_sft_dataset(const KnowledgeGraph& g, const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open SFT file '" + path + "'");
  SftDataset ds;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      auto j = nlohmann::json::parse(line);
      if (lineno == 1 && j.contains("format_version")) {
        ds.header.format_version = j.at("format_version").get<int>();
        ds.header.l_max = j.at("l_max").get<int>();
        ds.header.neighbor_cap = j.at("neighbor_cap").get<std::size_t>();
        if (ds.header.format_version != 1)
          throw ParseError("unsupported format_version " + std::to_string(ds.header.format_version));
        continue;
      }
      ds.records.push_back(record_from_json(g, j));
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(path + ":" + std::to_string(lineno) + ": " + e.what());
    } catch (const LookupError& e) {
      throw LookupError(path + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return ds;
}

}  // namespace roe
