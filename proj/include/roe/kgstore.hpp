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
#include <array>
#include <compare>
#include <cstdint>
#include <fstream>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "roe/error.hpp"

namespace roe {

struct EntityId {
  std::uint32_t value = 0;
  auto operator<=>(const EntityId&) const = default;
};

struct RelationId {
  std::uint32_t value = 0;
  auto operator<=>(const RelationId&) const = default;
};

struct Triple {
  EntityId head;
  RelationId relation;
  EntityId tail;
  auto operator<=>(const Triple&) const = default;
};

// One row of the adjacency index; the head is implied by the row.
struct OutEdge {
  RelationId relation;
  EntityId tail;
  auto operator<=>(const OutEdge&) const = default;
};

struct NeighborSet {
  EntityId center;
  std::vector<Triple> edges;
  bool operator==(const NeighborSet&) const = default;
};

using RawTriple = std::array<std::string, 3>;

struct GraphOptions {
  bool augment = true;
  std::string inverse_suffix = ".inv";
};

class KnowledgeGraph;

template <class Records>
KnowledgeGraph build_graph(const Records& raw, const GraphOptions& opts = {});

/// Immutable interned triple store. Entity and relation ids are dense and
/// assigned in order of first appearance; inverse relations are interned
/// after every original relation. Out-edges of each entity are stored
/// contiguously, sorted by (relation id, tail id).
class KnowledgeGraph {
 public:
  KnowledgeGraph() = default;

  std::size_t num_entities() const { return entity_labels_.size(); }
  std::size_t num_relations() const { return relation_labels_.size(); }
  std::size_t num_edges() const { return adjacency_.size(); }
  bool augmented() const { return augmented_; }
  const std::string& inverse_suffix() const { return inverse_suffix_; }

  std::optional<EntityId> find_entity(std::string_view label) const {
    auto it = entity_ids_.find(std::string(label));
    if (it == entity_ids_.end()) return std::nullopt;
    return EntityId{it->second};
  }

  std::optional<RelationId> find_relation(std::string_view label) const {
    auto it = relation_ids_.find(std::string(label));
    if (it == relation_ids_.end()) return std::nullopt;
    return RelationId{it->second};
  }

  EntityId entity(std::string_view label) const {
    if (auto id = find_entity(label)) return *id;
    throw LookupError("unknown entity '" + std::string(label) + "'");
  }

  RelationId relation(std::string_view label) const {
    if (auto id = find_relation(label)) return *id;
    throw LookupError("unknown relation '" + std::string(label) + "'");
  }

  const std::string& label(EntityId e) const {
    check(e);
    return entity_labels_[e.value];
  }

  const std::string& label(RelationId r) const {
    if (r.value >= relation_labels_.size())
      throw LookupError("relation id " + std::to_string(r.value) + " out of range");
    return relation_labels_[r.value];
  }

  std::optional<RelationId> inverse_of(RelationId r) const {
    label(r);
    return inverse_[r.value];
  }

  bool contains(EntityId e) const { return e.value < entity_labels_.size(); }

  std::span<const OutEdge> out_edges(EntityId v) const {
    check(v);
    return {adjacency_.data() + offsets_[v.value],
            adjacency_.data() + offsets_[v.value + 1]};
  }

  /// Out-edges of `v` restricted to relation `r`.
  std::span<const OutEdge> out_edges(EntityId v, RelationId r) const {
    auto row = out_edges(v);
    auto lo = std::lower_bound(row.begin(), row.end(), OutEdge{r, EntityId{0}});
    auto hi = std::lower_bound(lo, row.end(),
                               OutEdge{RelationId{r.value + 1}, EntityId{0}});
    return {lo, hi};
  }

  bool contains(const Triple& t) const {
    if (!contains(t.head) || !contains(t.tail)) return false;
    auto row = out_edges(t.head);
    return std::binary_search(row.begin(), row.end(), OutEdge{t.relation, t.tail});
  }

  /// True iff all three labels resolve and the triple is an (augmented) edge.
  bool has_triple(std::string_view h, std::string_view r, std::string_view t) const {
    auto hi = find_entity(h);
    auto ri = find_relation(r);
    auto ti = find_entity(t);
    if (!hi || !ri || !ti) return false;
    return contains(Triple{*hi, *ri, *ti});
  }

  NeighborSet neighbors(EntityId v) const {
    NeighborSet out{v, {}};
    for (const auto& e : out_edges(v)) out.edges.push_back({v, e.relation, e.tail});
    return out;
  }

  std::vector<Triple> edges() const {
    std::vector<Triple> out;
    out.reserve(num_edges());
    for (std::uint32_t v = 0; v < num_entities(); ++v)
      for (const auto& e : out_edges(EntityId{v})) out.push_back({EntityId{v}, e.relation, e.tail});
    return out;
  }

  RawTriple labels(const Triple& t) const {
    return {label(t.head), label(t.relation), label(t.tail)};
  }

  template <class Records>
  friend KnowledgeGraph build_graph(const Records& raw, const GraphOptions& opts);

 private:
  void check(EntityId e) const {
    if (e.value >= entity_labels_.size())
      throw LookupError("entity id " + std::to_string(e.value) + " out of range");
  }

  std::vector<std::string> entity_labels_;
  std::unordered_map<std::string, std::uint32_t> entity_ids_;
  std::vector<std::string> relation_labels_;
  std::unordered_map<std::string, std::uint32_t> relation_ids_;
  std::vector<std::optional<RelationId>> inverse_;
  std::vector<std::size_t> offsets_{0};
  std::vector<OutEdge> adjacency_;
  bool augmented_ = false;
  std::string inverse_suffix_ = ".inv";
};

namespace detail {

inline std::uint32_t intern(std::string_view label, std::vector<std::string>& labels,
                            std::unordered_map<std::string, std::uint32_t>& ids) {
  auto [it, inserted] =
      ids.try_emplace(std::string(label), static_cast<std::uint32_t>(labels.size()));
  if (inserted) labels.emplace_back(label);
  return it->second;
}

// Label of the inverse of `rel`. A label already carrying the suffix maps back
// to its base, so inverse-of-inverse is the original relation.
inline std::string inverse_label(std::string_view rel, std::string_view suffix) {
  if (rel.size() > suffix.size() && rel.substr(rel.size() - suffix.size()) == suffix)
    return std::string(rel.substr(0, rel.size() - suffix.size()));
  return std::string(rel) + std::string(suffix);
}

}  // namespace detail

/// Builds a graph from raw (head, relation, tail) records. Each record is any
/// sized range of strings; records that are not exactly three non-empty labels
/// are rejected with the record index. Duplicate edges collapse.
template <class Records>
KnowledgeGraph build_graph(const Records& raw, const GraphOptions& opts) {
  if (opts.augment && opts.inverse_suffix.empty())
    throw ParseError("inverse suffix must be non-empty when augmenting");

  KnowledgeGraph g;
  g.augmented_ = opts.augment;
  g.inverse_suffix_ = opts.inverse_suffix;

  std::vector<Triple> edges;
  std::size_t index = 0;
  for (const auto& rec : raw) {
    if (std::size(rec) != 3)
      throw ParseError("triple " + std::to_string(index) + ": expected 3 fields, got " +
                       std::to_string(std::size(rec)));
    auto it = std::begin(rec);
    std::string_view h = *it++, r = *it++, t = *it;
    if (h.empty() || r.empty() || t.empty())
      throw ParseError("triple " + std::to_string(index) + ": empty label");
    auto hid = detail::intern(h, g.entity_labels_, g.entity_ids_);
    auto tid = detail::intern(t, g.entity_labels_, g.entity_ids_);
    auto rid = detail::intern(r, g.relation_labels_, g.relation_ids_);
    edges.push_back({EntityId{hid}, RelationId{rid}, EntityId{tid}});
    ++index;
  }

  g.inverse_.assign(g.relation_labels_.size(), std::nullopt);
  if (opts.augment) {
    const std::size_t n_original = g.relation_labels_.size();
    for (std::uint32_t r = 0; r < n_original; ++r) {
      auto inv = detail::intern(detail::inverse_label(g.relation_labels_[r], opts.inverse_suffix),
                                g.relation_labels_, g.relation_ids_);
      g.inverse_.resize(g.relation_labels_.size(), std::nullopt);
      g.inverse_[r] = RelationId{inv};
      g.inverse_[inv] = RelationId{r};
    }
    const std::size_t n_original_edges = edges.size();
    for (std::size_t i = 0; i < n_original_edges; ++i) {
      const auto e = edges[i];
      edges.push_back({e.tail, *g.inverse_[e.relation.value], e.head});
    }
  }

  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());

  g.offsets_.assign(g.entity_labels_.size() + 1, 0);
  for (const auto& e : edges) ++g.offsets_[e.head.value + 1];
  for (std::size_t i = 1; i < g.offsets_.size(); ++i) g.offsets_[i] += g.offsets_[i - 1];
  g.adjacency_.reserve(edges.size());
  for (const auto& e : edges) g.adjacency_.push_back({e.relation, e.tail});
  return g;
}

/// Reads `head<TAB>relation<TAB>tail` lines. A trailing CR is stripped.
inline std::vector<RawTriple> load_triples_tsv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open triple file '" + path + "'");
  std::vector<RawTriple> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    RawTriple t;
    std::size_t field = 0, start = 0;
    for (;;) {
      auto tab = line.find('\t', start);
      if (field < 3) t[field] = line.substr(start, tab == std::string::npos ? tab : tab - start);
      ++field;
      if (tab == std::string::npos) break;
      start = tab + 1;
    }
    if (field != 3)
      throw ParseError(path + ":" + std::to_string(lineno) + ": expected 3 tab-separated fields, got " +
                       std::to_string(field));
    out.push_back(std::move(t));
  }
  if (in.bad()) throw IoError("read error on '" + path + "'");
  return out;
}

}  // namespace roe
