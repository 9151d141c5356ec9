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
#include <set>
#include <span>
#include <string>
#include <vector>

#include "roe/error.hpp"
#include "roe/kgstore.hpp"
#include "roe/labels.hpp"
#include "roe/miner.hpp"
#include "roe/path.hpp"
#include "roe/policy.hpp"

namespace roe {

using LabelSet = std::set<std::string>;

struct RewardConfig {
  double beta = 1.0;                 // weight of each hallucinated answer or path
  double format_reward_value = 1.0;  // granted when the response parses

  void validate() const {
    if (!(beta >= 0.0) || !std::isfinite(beta)) throw InvalidArgument("beta must be a finite value >= 0");
    if (!std::isfinite(format_reward_value)) throw InvalidArgument("format_reward_value must be finite");
  }
};

struct RewardBreakdown {
  double format = 0.0;
  double ans = 0.0;
  double ans_dis = 0.0;
  double explore = 0.0;
  double exp_dis = 0.0;
  double total = 0.0;
  bool operator==(const RewardBreakdown&) const = default;
};

/// Gold side of one step, in the label space the policy speaks.
struct StepGold {
  LabelSet answers;      // gold answers for this step
  LabelPathSet paths;    // gold exploration paths for this step
  LabelSet all_answers;  // every gold answer of the question
};

inline StepGold step_gold(const KnowledgeGraph& g, const GoldStepRecord& r) {
  StepGold s;
  for (auto e : r.gold_answers) s.answers.insert(g.label(e));
  s.paths = to_labels(g, r.gold_paths);
  s.all_answers.insert(r.all_answers.begin(), r.all_answers.end());
  return s;
}

inline double format_reward(const RawPolicyResponse& resp, const RewardConfig& cfg) {
  return resp.format_ok ? cfg.format_reward_value : 0.0;
}

// Recall of `pred` against `gold`; an empty gold set is vacuously recalled.
template <class T>
double set_recall(const std::set<T>& pred, const std::set<T>& gold) {
  if (gold.empty()) return 1.0;
  std::size_t hit = 0;
  for (const auto& x : gold) hit += pred.count(x);
  return static_cast<double>(hit) / static_cast<double>(gold.size());
}

/// |pred ∩ gold_step| / |gold_step| over normalized labels.
inline double answer_reward(const LabelSet& pred, const LabelSet& gold_step) {
  return set_recall(normalized_set(pred), normalized_set(gold_step));
}

/// New correct answers (gold, but not gold for this step) minus beta per
/// answer outside the gold set.
inline double answer_discovery_reward(const LabelSet& pred, const LabelSet& gold_step, const LabelSet& gold_all,
                                      const RewardConfig& cfg) {
  const auto p = normalized_set(pred);
  const auto step = normalized_set(gold_step);
  const auto all = normalized_set(gold_all);
  std::size_t discovered = 0, invalid = 0;
  for (const auto& a : p) {
    if (!all.count(a))
      ++invalid;
    else if (!step.count(a))
      ++discovered;
  }
  return static_cast<double>(discovered) - cfg.beta * static_cast<double>(invalid);
}

inline double exploration_reward(const LabelPathSet& pred, const LabelPathSet& gold) {
  return set_recall(pred, gold);
}

/// Predicted non-gold paths that exist edge by edge in `g`, minus beta per
/// predicted path containing a triple absent from `g`. Gold paths count for
/// neither term.
inline double exploration_discovery_reward(const KnowledgeGraph& g, const LabelPathSet& pred,
                                           const LabelPathSet& gold, const RewardConfig& cfg) {
  std::size_t fresh = 0, invalid = 0;
  for (const auto& p : pred) {
    if (gold.count(p)) continue;
    if (edge_valid(g, p))
      ++fresh;
    else
      ++invalid;
  }
  return static_cast<double>(fresh) - cfg.beta * static_cast<double>(invalid);
}

/// All five components for one step. `action` is ignored unless `format_ok`;
/// an unparsable response is scored as an empty prediction.
inline RewardBreakdown total_reward(const KnowledgeGraph& g, bool format_ok, const StepAction& action,
                                    const StepGold& gold, const RewardConfig& cfg) {
  LabelSet answers;
  LabelPathSet paths;
  if (format_ok) {
    answers.insert(action.answers.begin(), action.answers.end());
    paths.insert(action.paths.begin(), action.paths.end());
  }
  RewardBreakdown b;
  b.format = format_ok ? cfg.format_reward_value : 0.0;
  b.ans = answer_reward(answers, gold.answers);
  b.ans_dis = answer_discovery_reward(answers, gold.answers, gold.all_answers, cfg);
  b.explore = exploration_reward(paths, gold.paths);
  b.exp_dis = exploration_discovery_reward(g, paths, gold.paths, cfg);
  b.total = b.format + b.ans + b.ans_dis + b.explore + b.exp_dis;
  return b;
}

inline RewardBreakdown total_reward(const KnowledgeGraph& g, const RawPolicyResponse& resp, const StepGold& gold,
                                    const RewardConfig& cfg) {
  static const StepAction kEmpty;
  return total_reward(g, resp.format_ok, resp.parsed ? *resp.parsed : kEmpty, gold, cfg);
}

struct GroupAdvantages {
  std::vector<double> rewards;
  std::vector<double> advantages;
};

/// Group-relative advantages (R_i - mean) / std with the population standard
/// deviation. A group with zero spread gets all-zero advantages.
inline GroupAdvantages group_advantages(std::span<const double> rewards) {
  if (rewards.empty()) throw InvalidArgument("group_advantages needs at least one reward");
  GroupAdvantages out{{rewards.begin(), rewards.end()}, std::vector<double>(rewards.size(), 0.0)};
  const auto n = static_cast<double>(rewards.size());
  double mean = 0.0;
  for (double r : rewards) mean += r;
  mean /= n;
  double var = 0.0;
  for (double r : rewards) var += (r - mean) * (r - mean);
  const double sd = std::sqrt(var / n);
  // Spread at rounding-noise level counts as zero.
  if (!std::isfinite(sd) || sd <= 1e-12 * std::max(1.0, std::abs(mean))) return out;
  for (std::size_t i = 0; i < rewards.size(); ++i) out.advantages[i] = (rewards[i] - mean) / sd;
  return out;
}

}  // namespace roe
