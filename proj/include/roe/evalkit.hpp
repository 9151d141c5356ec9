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
#include <deque>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "roe/corpus.hpp"
#include "roe/error.hpp"
#include "roe/kgstore.hpp"
#include "roe/labels.hpp"

namespace roe {

struct QuestionScore {
  std::string qid;
  int hit = 0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

// Macro averages in percent. hit_ub / recall_ub are the ceilings implied by
// which gold answers exist in the graph at all.
struct Report {
  std::size_t n = 0;
  std::size_t excluded = 0;  // questions with no gold answers
  double hit_pct = 0.0;
  double f1_pct = 0.0;
  double precision_pct = 0.0;
  double recall_pct = 0.0;
  double hit_ub = 0.0;
  double recall_ub = 0.0;
};

/// Set metrics over normalized labels. Hit is "at least one correct answer",
/// which is what the Hits@1 column reports for set-valued predictions.
inline QuestionScore answer_metrics(const std::set<std::string>& pred, const std::set<std::string>& gold,
                                    std::string qid = {}) {
  const auto p = normalized_set(pred);
  const auto gset = normalized_set(gold);
  if (gset.empty()) throw InvalidArgument("answer_metrics: empty gold set for '" + qid + "'");
  std::size_t common = 0;
  for (const auto& x : p) common += gset.count(x);
  QuestionScore s{std::move(qid)};
  s.hit = common > 0 ? 1 : 0;
  s.precision = p.empty() ? 0.0 : static_cast<double>(common) / static_cast<double>(p.size());
  s.recall = static_cast<double>(common) / static_cast<double>(gset.size());
  s.f1 = (s.precision + s.recall) > 0.0 ? 2.0 * s.precision * s.recall / (s.precision + s.recall) : 0.0;
  return s;
}

inline Report aggregate_report(std::span<const QuestionScore> scores) {
  Report r;
  r.n = scores.size();
  if (scores.empty()) return r;
  for (const auto& s : scores) {
    r.hit_pct += s.hit;
    r.f1_pct += s.f1;
    r.precision_pct += s.precision;
    r.recall_pct += s.recall;
  }
  const double scale = 100.0 / static_cast<double>(scores.size());
  r.hit_pct *= scale;
  r.f1_pct *= scale;
  r.precision_pct *= scale;
  r.recall_pct *= scale;
  return r;
}

/// Fills hit_ub / recall_ub from gold-answer membership in `g`, over the
/// questions that have gold answers.
template <class Questions>
void add_upper_bounds(Report& r, const KnowledgeGraph& g, const Questions& questions) {
  std::size_t n = 0;
  double hit = 0.0, recall = 0.0;
  for (const auto& q : questions) {
    const auto gold = normalized_set(q.answers);
    if (gold.empty()) continue;
    std::size_t present = 0;
    for (const auto& a : q.answers)
      if (g.find_entity(a)) ++present;
    present = std::min(present, gold.size());
    ++n;
    hit += present > 0 ? 1.0 : 0.0;
    recall += static_cast<double>(present) / static_cast<double>(gold.size());
  }
  r.hit_ub = n ? 100.0 * hit / static_cast<double>(n) : 0.0;
  r.recall_ub = n ? 100.0 * recall / static_cast<double>(n) : 0.0;
}

inline nlohmann::ordered_json report_to_json(const Report& r) {
  nlohmann::ordered_json j;
  j["n"] = r.n;
  j["excluded"] = r.excluded;
  j["hit_pct"] = r.hit_pct;
  j["f1_pct"] = r.f1_pct;
  j["precision_pct"] = r.precision_pct;
  j["recall_pct"] = r.recall_pct;
  j["hit_ub"] = r.hit_ub;
  j["recall_ub"] = r.recall_ub;
  j["averaging"] = "macro";
  return j;
}

/// Entities within k hops of the seeds in the augmented graph, seeds excluded.
inline std::set<EntityId> retrieve_khop(const KnowledgeGraph& g, const std::set<EntityId>& seeds, int k) {
  if (k < 1) throw InvalidArgument("k must be >= 1");
  std::vector<int> dist(g.num_entities(), -1);
  std::deque<EntityId> queue;
  for (auto s : seeds) {
    if (!g.contains(s)) throw LookupError("seed id " + std::to_string(s.value) + " out of range");
    dist[s.value] = 0;
    queue.push_back(s);
  }
  std::set<EntityId> out;
  while (!queue.empty()) {
    auto v = queue.front();
    queue.pop_front();
    if (dist[v.value] >= k) continue;
    for (const auto& e : g.out_edges(v)) {
      if (dist[e.tail.value] >= 0) continue;
      dist[e.tail.value] = dist[v.value] + 1;
      out.insert(e.tail);
      queue.push_back(e.tail);
    }
  }
  return out;
}

struct RetrievalScore {
  int hit = 0;
  double recall = 0.0;
  double precision = 0.0;
};

/// Hit: any gold answer retrieved. Recall: share of gold answers retrieved.
/// Precision: share of retrieved entities that are gold answers.
inline RetrievalScore retrieval_metrics(const KnowledgeGraph& g, const std::set<EntityId>& retrieved,
                                        const std::set<std::string>& gold) {
  const auto gset = normalized_set(gold);
  std::set<std::string> found;
  std::size_t correct = 0;
  for (auto e : retrieved) {
    auto l = normalize_label(g.label(e));
    if (gset.count(l)) {
      ++correct;
      found.insert(std::move(l));
    }
  }
  RetrievalScore s;
  s.hit = found.empty() ? 0 : 1;
  s.recall = gset.empty() ? 0.0 : static_cast<double>(found.size()) / static_cast<double>(gset.size());
  s.precision = retrieved.empty() ? 0.0 : static_cast<double>(correct) / static_cast<double>(retrieved.size());
  return s;
}

}  // namespace roe
