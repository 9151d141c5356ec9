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

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "roe/kgstore.hpp"

namespace roe {

/// Alternating entity/relation sequence [v0, r1, v1, ..., rk, vk] held as two
/// parallel id vectors. Ordering is lexicographic on (entities, relations),
/// which gives path sets a deterministic iteration order.
struct ReasoningPath {
  std::vector<EntityId> entities;
  std::vector<RelationId> relations;

  static ReasoningPath seed(EntityId v) { return {{v}, {}}; }

  std::size_t length() const { return relations.size(); }
  EntityId frontier() const { return entities.back(); }

  bool visits(EntityId v) const {
    for (auto e : entities)
      if (e == v) return true;
    return false;
  }

  ReasoningPath extended(RelationId r, EntityId v) const {
    ReasoningPath p = *this;
    p.relations.push_back(r);
    p.entities.push_back(v);
    return p;
  }

  /// Leading `hops`-hop prefix; requires hops <= length().
  ReasoningPath prefix(std::size_t hops) const {
    return {{entities.begin(), entities.begin() + static_cast<std::ptrdiff_t>(hops) + 1},
            {relations.begin(), relations.begin() + static_cast<std::ptrdiff_t>(hops)}};
  }

  Triple last_triple() const {
    const auto k = length();
    return {entities[k - 1], relations[k - 1], entities[k]};
  }

  auto operator<=>(const ReasoningPath&) const = default;
};

using PathSet = std::set<ReasoningPath>;

// Label form of a path, as exchanged with policies and written to files.
using LabelPath = std::vector<std::string>;
using LabelPathSet = std::set<LabelPath>;

inline LabelPath to_labels(const KnowledgeGraph& g, const ReasoningPath& p) {
  LabelPath out;
  out.reserve(p.entities.size() + p.relations.size());
  out.push_back(g.label(p.entities[0]));
  for (std::size_t i = 0; i < p.length(); ++i) {
    out.push_back(g.label(p.relations[i]));
    out.push_back(g.label(p.entities[i + 1]));
  }
  return out;
}

inline LabelPathSet to_labels(const KnowledgeGraph& g, const PathSet& paths) {
  LabelPathSet out;
  for (const auto& p : paths) out.insert(to_labels(g, p));
  return out;
}

/// Resolves labels to ids. Returns nullopt when the sequence is not an odd
/// length alternating list or any label is unknown; edge existence is not
/// checked here.
inline std::optional<ReasoningPath> resolve_path(const KnowledgeGraph& g, const LabelPath& labels) {
  if (labels.empty() || labels.size() % 2 == 0) return std::nullopt;
  ReasoningPath p;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (i % 2 == 0) {
      auto e = g.find_entity(labels[i]);
      if (!e) return std::nullopt;
      p.entities.push_back(*e);
    } else {
      auto r = g.find_relation(labels[i]);
      if (!r) return std::nullopt;
      p.relations.push_back(*r);
    }
  }
  return p;
}

/// Every consecutive triple exists in the graph.
inline bool edge_valid(const KnowledgeGraph& g, const ReasoningPath& p) {
  if (p.entities.empty() || !g.contains(p.entities[0])) return false;
  for (std::size_t i = 0; i < p.length(); ++i)
    if (!g.contains(Triple{p.entities[i], p.relations[i], p.entities[i + 1]})) return false;
  return true;
}

inline bool edge_valid(const KnowledgeGraph& g, const LabelPath& labels) {
  auto p = resolve_path(g, labels);
  return p && edge_valid(g, *p);
}

inline bool is_simple(const ReasoningPath& p) {
  std::set<EntityId> seen(p.entities.begin(), p.entities.end());
  return seen.size() == p.entities.size();
}

/// Canonical text key: labels joined by TAB, which cannot occur in a label
/// loaded from TSV.
inline std::string canonical(const LabelPath& p) {
  std::string out;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (i) out.push_back('\t');
    out += p[i];
  }
  return out;
}

}  // namespace roe
