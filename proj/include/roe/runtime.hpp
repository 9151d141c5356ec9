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
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "roe/corpus.hpp"
#include "roe/error.hpp"
#include "roe/kgstore.hpp"
#include "roe/path.hpp"
#include "roe/policy.hpp"
#include "roe/rewards.hpp"

namespace roe {

enum class TraversalMode { step_synchronous, depth_first };

enum class Termination { empty_frontier, d_max, policy_stop, transport_error };

inline std::string_view to_string(TraversalMode m) {
  return m == TraversalMode::depth_first ? "depth_first" : "step_synchronous";
}

inline TraversalMode parse_mode(std::string_view s) {
  if (s == "step_synchronous" || s == "step") return TraversalMode::step_synchronous;
  if (s == "depth_first" || s == "dfs") return TraversalMode::depth_first;
  throw InvalidArgument("unknown traversal mode '" + std::string(s) + "'");
}

inline std::string_view to_string(Termination t) {
  switch (t) {
    case Termination::empty_frontier: return "empty_frontier";
    case Termination::d_max: return "d_max";
    case Termination::policy_stop: return "policy_stop";
    case Termination::transport_error: return "transport_error";
  }
  return "unknown";
}

struct EpisodeConfig {
  int d_max = 5;
  std::size_t batch_budget = 256;
  TraversalMode mode = TraversalMode::step_synchronous;
  bool forbid_revisit = false;
  // Accepted paths kept per step; 0 disables the cap.
  std::size_t max_paths = 64;

  void validate() const {
    if (d_max < 1) throw InvalidArgument("d_max must be >= 1");
    if (batch_budget < 1) throw InvalidArgument("batch_budget must be >= 1");
  }
};

struct EpisodeState {
  std::string qid;
  std::string question;
  int depth = 0;
  PathSet current_paths;
  std::set<EntityId> frontier;  // final entities of current_paths
  std::set<std::string> answers_so_far;
};

struct ApplyOutcome {
  EpisodeState next;
  std::vector<LabelPath> dropped_paths;  // rejected predictions, verbatim
  std::size_t capped = 0;                // valid paths discarded by max_paths
};

/// One executed policy step. `action` is the union of the raw per-batch
/// predictions before validation.
struct TraceStep {
  std::string qid;
  int sample = 0;
  int depth = 0;
  std::size_t request_count = 0;
  std::vector<LabelPath> current_paths;
  bool format_ok = true;
  std::vector<std::string> format_failures;  // raw text of unparsable responses
  StepAction action;
  std::vector<LabelPath> dropped_paths;
  std::size_t capped = 0;
  std::vector<std::string> answers;  // accumulated answers after this step
  double latency_ms = 0.0;
  std::optional<RewardBreakdown> reward;
};

struct EpisodeResult {
  std::set<std::string> answers;
  std::vector<TraceStep> trace;
  int steps_taken = 0;
  Termination termination = Termination::empty_frontier;
  std::string error;
};

namespace detail {

inline std::set<EntityId> frontier_of(const PathSet& paths) {
  std::set<EntityId> out;
  for (const auto& p : paths) out.insert(p.frontier());
  return out;
}

}  // namespace detail

inline EpisodeState init_episode(const KnowledgeGraph& g, const QuestionInstance& q, const EpisodeConfig& cfg) {
  cfg.validate();
  if (q.seeds.empty()) throw LookupError("question '" + q.qid + "' has no seeds");
  EpisodeState s{q.qid, q.text, 0, {}, {}, {}};
  for (auto v : q.seeds) {
    if (!g.contains(v)) throw LookupError("question '" + q.qid + "': seed id out of range");
    s.current_paths.insert(ReasoningPath::seed(v));
  }
  s.frontier = detail::frontier_of(s.current_paths);
  return s;
}

/// Neighbor edges of the whole frontier, in (frontier id, relation id, tail
/// id) order, cut into requests of at most batch_budget edges.
inline std::vector<PolicyRequest> observe(const KnowledgeGraph& g, const EpisodeState& state,
                                          const EpisodeConfig& cfg) {
  cfg.validate();
  std::vector<RawTriple> all;
  for (auto v : state.frontier)
    for (const auto& e : g.out_edges(v)) all.push_back(g.labels(Triple{v, e.relation, e.tail}));

  std::vector<LabelPath> paths;
  for (const auto& p : state.current_paths) paths.push_back(to_labels(g, p));

  std::vector<PolicyRequest> out;
  for (std::size_t i = 0; i < all.size(); i += cfg.batch_budget) {
    PolicyRequest req{state.qid, state.question, state.depth, paths, {}};
    const auto end = std::min(all.size(), i + cfg.batch_budget);
    req.neighbors.assign(all.begin() + static_cast<std::ptrdiff_t>(i),
                         all.begin() + static_cast<std::ptrdiff_t>(end));
    out.push_back(std::move(req));
  }
  return out;
}

/// Union of per-batch actions; duplicates collapse, first occurrence wins.
inline StepAction merge_actions(std::span<const StepAction> actions) {
  StepAction out;
  std::set<std::string> seen_answers;
  LabelPathSet seen_paths;
  for (const auto& a : actions) {
    for (const auto& x : a.answers)
      if (seen_answers.insert(x).second) out.answers.push_back(x);
    for (const auto& p : a.paths)
      if (seen_paths.insert(p).second) out.paths.push_back(p);
  }
  return out;
}

/// Keeps predicted paths that extend a current path by one triple of `g` and
/// merges predicted answers. The next state sits one level deeper.
inline ApplyOutcome apply_action(const KnowledgeGraph& g, const EpisodeState& state,
                                 std::span<const StepAction> actions, const EpisodeConfig& cfg) {
  const auto merged = merge_actions(actions);
  ApplyOutcome out;
  out.next.qid = state.qid;
  out.next.question = state.question;
  out.next.depth = state.depth + 1;
  out.next.answers_so_far = state.answers_so_far;
  out.next.answers_so_far.insert(merged.answers.begin(), merged.answers.end());

  for (const auto& labels : merged.paths) {
    auto p = resolve_path(g, labels);
    bool ok = p && p->length() >= 1 && state.current_paths.count(p->prefix(p->length() - 1)) &&
              g.contains(p->last_triple());
    if (ok && cfg.forbid_revisit) ok = !p->prefix(p->length() - 1).visits(p->frontier());
    if (ok)
      out.next.current_paths.insert(std::move(*p));
    else
      out.dropped_paths.push_back(labels);
  }
  if (cfg.max_paths > 0 && out.next.current_paths.size() > cfg.max_paths) {
    out.capped = out.next.current_paths.size() - cfg.max_paths;
    auto it = std::next(out.next.current_paths.begin(), static_cast<std::ptrdiff_t>(cfg.max_paths));
    out.next.current_paths.erase(it, out.next.current_paths.end());
  }
  out.next.frontier = detail::frontier_of(out.next.current_paths);
  return out;
}

namespace detail {

struct StepRun {
  ApplyOutcome outcome;
  bool stop = false;
};

class EpisodeRunner {
 public:
  EpisodeRunner(const KnowledgeGraph& g, Policy& policy, const EpisodeConfig& cfg, int sample)
      : g_(g), policy_(policy), cfg_(cfg), sample_(sample) {}

  // Runs one policy step from `state`; nullopt when there was nothing to ask.
  std::optional<StepRun> step(const EpisodeState& state) {
    auto requests = observe(g_, state, cfg_);
    if (requests.empty()) return std::nullopt;

    TraceStep ts;
    ts.qid = state.qid;
    ts.sample = sample_;
    ts.depth = state.depth;
    ts.request_count = requests.size();
    for (const auto& p : state.current_paths) ts.current_paths.push_back(to_labels(g_, p));

    std::vector<StepAction> actions;
    bool stop = false;
    for (const auto& req : requests) {
      auto resp = policy_.step(req);
      ts.latency_ms += resp.latency_ms;
      stop = stop || resp.stop;
      if (resp.format_ok && resp.parsed) {
        actions.push_back(*resp.parsed);
      } else {
        ts.format_ok = false;
        ts.format_failures.push_back(resp.text);
      }
    }
    ts.action = merge_actions(actions);

    StepRun run{apply_action(g_, state, actions, cfg_), stop};
    run.outcome.next.answers_so_far.insert(answers_.begin(), answers_.end());
    answers_.insert(ts.action.answers.begin(), ts.action.answers.end());
    ts.dropped_paths = run.outcome.dropped_paths;
    ts.capped = run.outcome.capped;
    ts.answers.assign(answers_.begin(), answers_.end());
    trace_.push_back(std::move(ts));
    return run;
  }

  std::set<std::string> answers_;
  std::vector<TraceStep> trace_;

 private:
  const KnowledgeGraph& g_;
  Policy& policy_;
  const EpisodeConfig& cfg_;
  int sample_;
};

}  // namespace detail

/// Runs observe -> policy -> apply until no path survives, d_max steps have
/// run, or the policy asks to stop. In depth_first mode each accepted path is
/// explored as its own branch before its siblings, with the same depth cap.
/// A transport failure ends the episode with the partial trace.
inline EpisodeResult run_episode(const KnowledgeGraph& g, const QuestionInstance& q, Policy& policy,
                                 const EpisodeConfig& cfg, int sample = 0) {
  auto root = init_episode(g, q, cfg);
  detail::EpisodeRunner runner(g, policy, cfg, sample);
  EpisodeResult result;

  try {
    if (cfg.mode == TraversalMode::step_synchronous) {
      auto state = std::move(root);
      for (;;) {
        if (state.depth >= cfg.d_max) {
          result.termination = Termination::d_max;
          break;
        }
        auto run = runner.step(state);
        if (!run) {
          result.termination = Termination::empty_frontier;
          break;
        }
        if (run->stop) {
          result.termination = Termination::policy_stop;
          break;
        }
        if (run->outcome.next.current_paths.empty()) {
          result.termination = Termination::empty_frontier;
          break;
        }
        state = std::move(run->outcome.next);
      }
    } else {
      bool hit_cap = false, stopped = false;
      std::vector<EpisodeState> stack;
      for (auto it = root.current_paths.rbegin(); it != root.current_paths.rend(); ++it)
        stack.push_back({root.qid, root.question, 0, {*it}, {it->frontier()}, {}});
      while (!stack.empty() && !stopped) {
        auto state = std::move(stack.back());
        stack.pop_back();
        if (state.depth >= cfg.d_max) {
          hit_cap = true;
          continue;
        }
        auto run = runner.step(state);
        if (!run) continue;
        if (run->stop) {
          stopped = true;
          break;
        }
        const auto& next = run->outcome.next;
        for (auto it = next.current_paths.rbegin(); it != next.current_paths.rend(); ++it)
          stack.push_back({next.qid, next.question, next.depth, {*it}, {it->frontier()}, {}});
      }
      result.termination = stopped   ? Termination::policy_stop
                           : hit_cap ? Termination::d_max
                                     : Termination::empty_frontier;
    }
  } catch (const TransportError& e) {
    result.termination = Termination::transport_error;
    result.error = e.what();
  }

  result.answers = std::move(runner.answers_);
  result.trace = std::move(runner.trace_);
  result.steps_taken = static_cast<int>(result.trace.size());
  return result;
}

// ---------------------------------------------------------------------------
// Trace JSONL

inline nlohmann::ordered_json trace_step_to_json(const TraceStep& s) {
  nlohmann::ordered_json j;
  j["qid"] = s.qid;
  j["sample"] = s.sample;
  j["depth"] = s.depth;
  j["request_count"] = s.request_count;
  j["current_paths"] = s.current_paths;
  j["format_ok"] = s.format_ok;
  if (!s.format_failures.empty()) j["format_failures"] = s.format_failures;
  j["action"] = action_to_json(s.action);
  j["dropped_paths"] = s.dropped_paths;
  j["capped"] = s.capped;
  j["answers"] = s.answers;
  j["latency_ms"] = s.latency_ms;
  if (s.reward) {
    const auto& r = *s.reward;
    j["reward"] = {{"format", r.format}, {"ans", r.ans},         {"ans_dis", r.ans_dis},
                   {"explore", r.explore}, {"exp_dis", r.exp_dis}, {"total", r.total}};
  }
  return j;
}

inline TraceStep trace_step_from_json(const nlohmann::json& j) {
  TraceStep s;
  s.qid = j.at("qid").get<std::string>();
  s.sample = j.value("sample", 0);
  s.depth = j.at("depth").get<int>();
  s.request_count = j.value("request_count", std::size_t{0});
  s.current_paths = j.value("current_paths", std::vector<LabelPath>{});
  s.format_ok = j.value("format_ok", true);
  s.format_failures = j.value("format_failures", std::vector<std::string>{});
  const auto& a = j.at("action");
  s.action.answers = a.at("answers").get<std::vector<std::string>>();
  s.action.paths = a.at("exploration_paths").get<std::vector<LabelPath>>();
  s.dropped_paths = j.value("dropped_paths", std::vector<LabelPath>{});
  s.capped = j.value("capped", std::size_t{0});
  s.answers = j.value("answers", std::vector<std::string>{});
  s.latency_ms = j.value("latency_ms", 0.0);
  if (j.contains("reward")) {
    const auto& r = j["reward"];
    s.reward = RewardBreakdown{r.at("format").get<double>(),  r.at("ans").get<double>(),
                               r.at("ans_dis").get<double>(), r.at("explore").get<double>(),
                               r.at("exp_dis").get<double>(), r.at("total").get<double>()};
  }
  return s;
}

}  // namespace roe
