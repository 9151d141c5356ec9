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
#include <cmath>
#include <cstdint>
#include <deque>
#include <fstream>
#include <optional>
#include <random>
#include <set>
#include <span>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "json.hpp"
#include "roe/error.hpp"
#include "roe/kgstore.hpp"

namespace roe {

// One JSONL record before graph resolution.
struct QuestionRecord {
  std::string qid;
  std::string question;
  std::vector<std::string> seeds;
  std::vector<std::string> answers;
  bool operator==(const QuestionRecord&) const = default;
};

// Gold answers stay as labels: they need not exist in the graph.
struct QuestionInstance {
  std::string qid;
  std::string text;
  std::vector<EntityId> seeds;
  std::vector<std::string> answers;
};

struct CorpusStats {
  std::size_t n_questions = 0;
  double avg_answers = 0.0;
  std::optional<int> max_hops_observed;
};

inline nlohmann::json to_json(const QuestionRecord& r) {
  return {{"qid", r.qid}, {"question", r.question}, {"seeds", r.seeds}, {"answers", r.answers}};
}

namespace detail {

inline QuestionRecord parse_question(const nlohmann::json& j) {
  if (!j.is_object()) throw ParseError("record is not a JSON object");
  QuestionRecord r;
  r.qid = j.at("qid").get<std::string>();
  r.question = j.value("question", std::string{});
  r.seeds = j.at("seeds").get<std::vector<std::string>>();
  r.answers = j.at("answers").get<std::vector<std::string>>();
  if (r.qid.empty()) throw ParseError("empty qid");
  if (r.seeds.empty()) throw ParseError("question '" + r.qid + "' has no seeds");
  return r;
}

}  // namespace detail

/// Reads the canonical question JSONL ({qid, question, seeds, answers}).
/// Blank lines are skipped; qids must be unique.
inline std::vector<QuestionRecord> read_question_records(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open question file '" + path + "'");
  std::vector<QuestionRecord> out;
  std::unordered_set<std::string> qids;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    QuestionRecord r;
    try {
      r = detail::parse_question(nlohmann::json::parse(line));
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(path + ":" + std::to_string(lineno) + ": " + e.what());
    } catch (const ParseError& e) {
      throw ParseError(path + ":" + std::to_string(lineno) + ": " + e.what());
    }
    if (!qids.insert(r.qid).second)
      throw ParseError(path + ":" + std::to_string(lineno) + ": duplicate qid '" + r.qid + "'");
    out.push_back(std::move(r));
  }
  return out;
}

inline void write_question_records(std::span<const QuestionRecord> records, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write '" + path + "'");
  for (const auto& r : records) out << to_json(r).dump() << '\n';
}

/// Resolves records against `g`. Strict mode rejects a record with an
/// unresolvable seed; lenient mode drops it and counts it in `dropped`.
inline std::vector<QuestionInstance> resolve_questions(std::span<const QuestionRecord> records,
                                                       const KnowledgeGraph& g, bool strict,
                                                       std::size_t* dropped = nullptr) {
  std::vector<QuestionInstance> out;
  std::size_t n_dropped = 0;
  for (const auto& r : records) {
    QuestionInstance q{r.qid, r.question, {}, r.answers};
    bool ok = true;
    for (const auto& s : r.seeds) {
      auto id = g.find_entity(s);
      if (!id) {
        if (strict) throw LookupError("question '" + r.qid + "': seed '" + s + "' not in graph");
        ok = false;
        break;
      }
      if (std::find(q.seeds.begin(), q.seeds.end(), *id) == q.seeds.end()) q.seeds.push_back(*id);
    }
    if (ok)
      out.push_back(std::move(q));
    else
      ++n_dropped;
  }
  if (dropped) *dropped = n_dropped;
  return out;
}

inline std::vector<QuestionInstance> load_questions(const std::string& path, const KnowledgeGraph& g,
                                                    bool strict, std::size_t* dropped = nullptr) {
  auto records = read_question_records(path);
  return resolve_questions(records, g, strict, dropped);
}

/// Gold answers that resolve to graph entities (exact labels).
inline std::set<EntityId> resolve_answers(const KnowledgeGraph& g, const QuestionInstance& q) {
  std::set<EntityId> out;
  for (const auto& a : q.answers)
    if (auto id = g.find_entity(a)) out.insert(*id);
  return out;
}

template <class Questions>
CorpusStats corpus_stats(const Questions& questions) {
  CorpusStats s;
  std::size_t total = 0;
  for (const auto& q : questions) {
    ++s.n_questions;
    total += q.answers.size();
  }
  s.avg_answers = s.n_questions ? static_cast<double>(total) / static_cast<double>(s.n_questions) : 0.0;
  return s;
}

/// Hop distance from the seeds to the nearest resolvable answer, or nullopt
/// when no answer is reachable within `limit` hops.
inline std::optional<int> answer_distance(const KnowledgeGraph& g, const QuestionInstance& q, int limit) {
  auto answers = resolve_answers(g, q);
  if (answers.empty()) return std::nullopt;
  std::vector<int> dist(g.num_entities(), -1);
  std::deque<EntityId> queue;
  for (auto s : q.seeds) {
    if (dist[s.value] < 0) {
      dist[s.value] = 0;
      queue.push_back(s);
    }
  }
  while (!queue.empty()) {
    auto v = queue.front();
    queue.pop_front();
    if (answers.count(v)) return dist[v.value];
    if (dist[v.value] >= limit) continue;
    for (const auto& e : g.out_edges(v)) {
      if (dist[e.tail.value] < 0) {
        dist[e.tail.value] = dist[v.value] + 1;
        queue.push_back(e.tail);
      }
    }
  }
  return std::nullopt;
}

/// Stats plus the largest seed-to-nearest-answer distance over the corpus.
inline CorpusStats corpus_stats(std::span<const QuestionInstance> questions, const KnowledgeGraph& g,
                                int hop_limit) {
  auto s = corpus_stats(questions);
  for (const auto& q : questions) {
    if (auto d = answer_distance(g, q, hop_limit))
      s.max_hops_observed = std::max(s.max_hops_observed.value_or(0), *d);
  }
  return s;
}

/// Seeded shuffle, then the first round(ratio * n) items go to the first part.
template <class T>
std::pair<std::vector<T>, std::vector<T>> split_questions(std::vector<T> items, double ratio,
                                                          std::uint64_t seed) {
  if (!(ratio >= 0.0 && ratio <= 1.0)) throw InvalidArgument("split ratio must lie in [0, 1]");
  std::mt19937_64 rng(seed);
  // Fisher-Yates on raw engine output keeps the permutation identical across
  // standard library implementations.
  for (std::size_t i = items.size(); i > 1; --i) {
    auto j = static_cast<std::size_t>(rng() % i);
    std::swap(items[i - 1], items[j]);
  }
  const auto cut = static_cast<std::size_t>(std::llround(ratio * static_cast<double>(items.size())));
  std::vector<T> first(std::make_move_iterator(items.begin()),
                       std::make_move_iterator(items.begin() + static_cast<std::ptrdiff_t>(cut)));
  std::vector<T> second(std::make_move_iterator(items.begin() + static_cast<std::ptrdiff_t>(cut)),
                        std::make_move_iterator(items.end()));
  return {std::move(first), std::move(second)};
}

}  // namespace roe
