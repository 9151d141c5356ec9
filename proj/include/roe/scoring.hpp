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

#include <map>
#include <set>
#include <span>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "json.hpp"
#include "roe/kgstore.hpp"
#include "roe/miner.hpp"
#include "roe/rewards.hpp"
#include "roe/runtime.hpp"

namespace roe {

/// Reward of one traced step, with the sum over its episode and that
/// episode's advantage within the question's sample group.
struct ScoreLine {
  std::string qid;
  int depth = 0;
  int sample = 0;
  RewardBreakdown reward;
  double episode_total = 0.0;
  double advantage = 0.0;
};

/// Scores trace steps against mined gold records. A step whose depth has no
/// record is scored against empty step gold; the question's full answer set
/// still comes from its records.
inline std::vector<ScoreLine> score_trace(const KnowledgeGraph& g, std::span<const TraceStep> trace,
                                          std::span<const GoldStepRecord> records, const RewardConfig& cfg) {
  cfg.validate();
  std::map<std::pair<std::string, int>, StepGold> gold;
  std::map<std::string, LabelSet> all_answers;
  for (const auto& r : records) {
    auto& sg = gold[{r.qid, r.depth}];
    auto s = step_gold(g, r);
    sg.answers.insert(s.answers.begin(), s.answers.end());
    sg.paths.insert(s.paths.begin(), s.paths.end());
    all_answers[r.qid].insert(r.all_answers.begin(), r.all_answers.end());
  }

  std::vector<ScoreLine> lines;
  std::map<std::pair<std::string, int>, double> episode;
  for (const auto& step : trace) {
    StepGold sg;
    if (auto it = gold.find({step.qid, step.depth}); it != gold.end()) sg = it->second;
    if (auto it = all_answers.find(step.qid); it != all_answers.end()) sg.all_answers = it->second;
    ScoreLine line{step.qid, step.depth, step.sample, total_reward(g, step.format_ok, step.action, sg, cfg)};
    episode[{step.qid, step.sample}] += line.reward.total;
    lines.push_back(std::move(line));
  }

  // Group episodes by question, in sample order.
  std::map<std::string, std::vector<std::pair<int, double>>> groups;
  for (const auto& [key, total] : episode) groups[key.first].emplace_back(key.second, total);
  std::map<std::pair<std::string, int>, double> advantage;
  for (const auto& [qid, members] : groups) {
    std::vector<double> totals;
    for (const auto& m : members) totals.push_back(m.second);
    const auto adv = group_advantages(totals);
    for (std::size_t i = 0; i < members.size(); ++i) advantage[{qid, members[i].first}] = adv.advantages[i];
  }
  for (auto& line : lines) {
    line.episode_total = episode[{line.qid, line.sample}];
    line.advantage = advantage[{line.qid, line.sample}];
  }
  return lines;
}

inline nlohmann::ordered_json score_line_to_json(const ScoreLine& s) {
  nlohmann::ordered_json j;
  j["qid"] = s.qid;
  j["depth"] = s.depth;
  j["sample"] = s.sample;
  j["format"] = s.reward.format;
  j["ans"] = s.reward.ans;
  j["ans_dis"] = s.reward.ans_dis;
  j["explore"] = s.reward.explore;
  j["exp_dis"] = s.reward.exp_dis;
  j["total"] = s.reward.total;
  j["episode_total"] = s.episode_total;
  j["advantage"] = s.advantage;
  return j;
}

}  // namespace roe
