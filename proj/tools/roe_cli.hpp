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

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <chrono>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "roe/external_policy.hpp"
#include "roe/roe.hpp"

namespace roe::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitUsage = 2;

struct UsageError : Error {
  using Error::Error;
};

namespace detail {

inline std::shared_ptr<spdlog::logger> logger() {
  static auto log = [] {
    auto l = spdlog::stderr_color_mt("roe");
    l->set_pattern("%Y-%m-%dT%H:%M:%S.%e %^%l%$ %v");
    return l;
  }();
  return log;
}

// Registers a string flag whose value lands in `overrides[key]`.
inline CLI::Option* flag(CLI::App* app, std::map<std::string, std::string>& overrides, const std::string& name,
                         const std::string& key, const std::string& help) {
  return app->add_option_function<std::string>(
      name, [&overrides, key](const std::string& v) { overrides[key] = v; }, help);
}

inline CLI::Option* switch_flag(CLI::App* app, std::map<std::string, std::string>& overrides,
                                const std::string& name, const std::string& key, const std::string& value,
                                const std::string& help) {
  return app->add_flag_callback(name, [&overrides, key, value] { overrides[key] = value; }, help);
}

inline void require(const std::string& value, const std::string& flag_name) {
  if (value.empty()) throw UsageError("missing required flag " + flag_name);
}

inline KnowledgeGraph load_graph(const RunConfig& c) {
  require(c.kg_path, "--kg");
  auto raw = load_triples_tsv(c.kg_path);
  auto g = build_graph(raw, GraphOptions{c.augment, c.inverse_suffix});
  logger()->info("graph path={} triples={} entities={} relations={} edges={} augmented={}", c.kg_path, raw.size(),
                 g.num_entities(), g.num_relations(), g.num_edges(), g.augmented());
  return g;
}

inline std::vector<QuestionInstance> load_corpus(const RunConfig& c, const KnowledgeGraph& g) {
  require(c.questions_path, "--questions");
  std::size_t dropped = 0;
  auto qs = load_questions(c.questions_path, g, c.strict_seeds, &dropped);
  logger()->info("questions path={} loaded={} dropped_unresolved_seeds={}", c.questions_path, qs.size(), dropped);
  return qs;
}

inline std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write '" + path + "'");
  return out;
}

template <class F>
void for_each_jsonl(const std::string& path, F&& fn) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      fn(nlohmann::json::parse(line));
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(path + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
}

inline double ms_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
}

// ---------------------------------------------------------------------------

inline int cmd_build_kg(const RunConfig& c, std::ostream& out) {
  auto g = load_graph(c);
  if (!c.output_path.empty()) {
    auto f = open_out(c.output_path);
    for (const auto& t : g.edges()) {
      const auto l = g.labels(t);
      f << l[0] << '\t' << l[1] << '\t' << l[2] << '\n';
    }
  }
  nlohmann::ordered_json j;
  j["entities"] = g.num_entities();
  j["relations"] = g.num_relations();
  j["edges"] = g.num_edges();
  j["augmented"] = g.augmented();
  out << j.dump() << '\n';
  return kExitOk;
}

inline int cmd_mine(const RunConfig& c, std::ostream& out) {
  require(c.output_path, "--out");
  auto g = load_graph(c);
  auto qs = load_corpus(c, g);
  auto per_question = parallel_map(qs.size(), c.jobs, [&](std::size_t i) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto gold = mine_gold_paths(g, qs[i], c.l_max);
    auto records = build_step_records(g, qs[i], gold, c.l_max, c.neighbor_cap);
    logger()->info("mine qid={} gold_paths={} records={} ms={:.3f}", qs[i].qid, gold.size(), records.size(),
                   ms_since(t0));
    return records;
  });
  std::vector<GoldStepRecord> all;
  for (auto& rs : per_question)
    for (auto& r : rs) all.push_back(std::move(r));
  const auto n = export_sft_dataset(g, all, SftHeader{1, c.l_max, c.neighbor_cap}, c.output_path);
  out << "wrote " << n << " records to " << c.output_path << '\n';
  return kExitOk;
}

inline int cmd_export_sft(const RunConfig& c, const std::string& sft_path, std::ostream& out) {
  require(sft_path, "--sft");
  require(c.output_path, "--out");
  auto g = load_graph(c);
  auto ds = import_sft_dataset(g, sft_path);
  auto f = open_out(c.output_path);
  for (const auto& r : ds.records) {
    PolicyRequest req{r.qid, r.question, r.depth, {}, {}};
    for (const auto& p : r.current_paths) req.current_paths.push_back(to_labels(g, p));
    for (const auto& ns : r.frontier_neighbors)
      for (const auto& t : ns.edges) req.neighbors.push_back(g.labels(t));
    StepAction gold;
    for (auto e : r.gold_answers) gold.answers.push_back(g.label(e));
    for (const auto& p : r.gold_paths) gold.paths.push_back(to_labels(g, p));
    nlohmann::ordered_json j;
    j["qid"] = r.qid;
    j["depth"] = r.depth;
    j["prompt"] = render_request(req);
    j["completion"] = serialize_action(gold);
    f << j.dump() << '\n';
  }
  out << "wrote " << ds.records.size() << " prompt/completion pairs to " << c.output_path << '\n';
  return kExitOk;
}

inline std::unique_ptr<Policy> make_policy(const RunConfig& c, const KnowledgeGraph& g,
                                           const std::vector<QuestionInstance>& qs, const std::string& gold_path) {
  const auto& choice = c.policy_spec;
  if (choice == "null") return std::make_unique<NullPolicy>();
  if (choice == "random") return std::make_unique<RandomPolicy>(c.policy_seed);
  if (choice.rfind("external:", 0) == 0) {
    ExternalPolicyOptions opts;
    opts.url = choice.substr(9);
    opts.timeout = std::chrono::milliseconds(c.timeout_ms);
    opts.retries = c.retries;
    return std::make_unique<ExternalPolicy>(opts);
  }
  if (choice == "oracle") {
    OracleIndex index;
    for (const auto& q : qs) index.add_question(q.qid);
    if (!gold_path.empty()) {
      for (const auto& r : import_sft_dataset(g, gold_path).records) index.add(g, r);
    } else {
      auto per_question = parallel_map(qs.size(), c.jobs, [&](std::size_t i) {
        return build_step_records(g, qs[i], mine_gold_paths(g, qs[i], c.l_max), c.l_max, c.neighbor_cap);
      });
      for (const auto& rs : per_question)
        for (const auto& r : rs) index.add(g, r);
    }
    return std::make_unique<OraclePolicy>(std::move(index));
  }
  throw UsageError("unknown policy '" + choice + "' (expected oracle, null, random, or external:<url>)");
}

inline int cmd_explore(const RunConfig& c, const std::string& gold_path, const std::string& pred_path,
                       std::ostream& out) {
  require(c.output_path, "--out");
  auto g = load_graph(c);
  auto qs = load_corpus(c, g);
  auto policy = make_policy(c, g, qs, gold_path);
  const auto ecfg = c.episode();
  ecfg.validate();

  struct Outcome {
    std::vector<EpisodeResult> samples;
  };
  auto outcomes = parallel_map(qs.size(), c.jobs, [&](std::size_t i) {
    Outcome o;
    for (int s = 0; s < c.samples; ++s) {
      const auto t0 = std::chrono::steady_clock::now();
      auto r = run_episode(g, qs[i], *policy, ecfg, s);
      logger()->info("explore qid={} sample={} steps={} answers={} termination={} ms={:.3f}", qs[i].qid, s,
                     r.steps_taken, r.answers.size(), to_string(r.termination), ms_since(t0));
      if (r.termination == Termination::transport_error) logger()->error("qid={} {}", qs[i].qid, r.error);
      o.samples.push_back(std::move(r));
    }
    return o;
  });

  auto trace = open_out(c.output_path);
  std::ofstream preds;
  if (!pred_path.empty()) preds = open_out(pred_path);
  std::size_t errors = 0;
  for (std::size_t i = 0; i < qs.size(); ++i) {
    for (std::size_t s = 0; s < outcomes[i].samples.size(); ++s) {
      const auto& r = outcomes[i].samples[s];
      for (const auto& step : r.trace) trace << trace_step_to_json(step).dump() << '\n';
      if (r.termination == Termination::transport_error) ++errors;
      if (preds.is_open()) {
        nlohmann::ordered_json j;
        j["qid"] = qs[i].qid;
        j["sample"] = s;
        j["answers"] = r.answers;
        j["termination"] = to_string(r.termination);
        j["steps"] = r.steps_taken;
        if (!r.error.empty()) j["error"] = r.error;
        preds << j.dump() << '\n';
      }
    }
  }
  out << "explored " << qs.size() << " questions, " << errors << " transport errors\n";
  return errors ? kExitRuntime : kExitOk;
}

inline int cmd_score(const RunConfig& c, const std::string& trace_path, const std::string& gold_path,
                     std::ostream& out) {
  require(trace_path, "--trace");
  require(gold_path, "--gold");
  auto g = load_graph(c);
  std::vector<TraceStep> trace;
  for_each_jsonl(trace_path, [&](const nlohmann::json& j) { trace.push_back(trace_step_from_json(j)); });
  const auto ds = import_sft_dataset(g, gold_path);
  const auto lines = score_trace(g, trace, ds.records, RewardConfig{c.beta, c.format_reward});
  std::ofstream f;
  if (!c.output_path.empty()) f = open_out(c.output_path);
  std::ostream& dst = f.is_open() ? static_cast<std::ostream&>(f) : out;
  for (const auto& l : lines) dst << score_line_to_json(l).dump() << '\n';
  return kExitOk;
}

inline int cmd_eval(const RunConfig& c, const std::string& pred_path, int khop, std::ostream& out) {
  require(c.questions_path, "--questions");
  if (pred_path.empty() && khop <= 0) throw UsageError("eval needs --pred or --khop");
  auto g = load_graph(c);
  const auto records = read_question_records(c.questions_path);

  std::map<std::string, std::set<std::string>> preds;
  if (!pred_path.empty()) {
    for_each_jsonl(pred_path, [&](const nlohmann::json& j) {
      if (j.value("sample", 0) != 0) return;  // first sample of each group
      const auto answers = j.at("answers").get<std::vector<std::string>>();
      preds[j.at("qid").get<std::string>()].insert(answers.begin(), answers.end());
    });
  }

  std::vector<QuestionScore> scores;
  std::size_t excluded = 0;
  for (const auto& r : records) {
    const std::set<std::string> gold(r.answers.begin(), r.answers.end());
    if (normalized_set(gold).empty()) {
      ++excluded;
      continue;
    }
    std::set<std::string> pred;
    if (khop > 0) {
      std::set<EntityId> seeds;
      for (const auto& s : r.seeds)
        if (auto id = g.find_entity(s)) seeds.insert(*id);
      for (auto e : retrieve_khop(g, seeds, khop)) pred.insert(g.label(e));
    } else if (auto it = preds.find(r.qid); it != preds.end()) {
      pred = it->second;
    }
    scores.push_back(answer_metrics(pred, gold, r.qid));
  }
  auto report = aggregate_report(scores);
  report.excluded = excluded;
  add_upper_bounds(report, g, records);
  const auto text = report_to_json(report).dump(2);
  if (!c.output_path.empty()) open_out(c.output_path) << text << '\n';
  out << text << '\n';
  return kExitOk;
}

inline int cmd_split(const RunConfig& c, std::ostream& out) {
  require(c.questions_path, "--questions");
  auto records = read_question_records(c.questions_path);
  std::string prefix = c.output_path;
  if (prefix.empty()) {
    prefix = c.questions_path;
    if (prefix.size() > 6 && prefix.substr(prefix.size() - 6) == ".jsonl") prefix.resize(prefix.size() - 6);
  }
  auto [first, second] = split_questions(std::move(records), c.split_ratio, c.split_seed);
  write_question_records(first, prefix + ".sft.jsonl");
  write_question_records(second, prefix + ".rl.jsonl");
  logger()->info("split seed={} ratio={} sft={} rl={}", c.split_seed, c.split_ratio, first.size(), second.size());
  out << first.size() << " -> " << prefix << ".sft.jsonl, " << second.size() << " -> " << prefix
      << ".rl.jsonl\n";
  return kExitOk;
}

}  // namespace detail

/// Entry point shared by the binary and the tests. Exit codes: 0 success,
/// 1 runtime error, 2 usage error.
inline int dispatch(int argc, const char* const* argv, std::ostream& out = std::cout,
                    std::ostream& err = std::cerr) {
  using detail::flag;
  using detail::switch_flag;

  CLI::App app{"Knowledge-graph exploration toolkit: gold-path mining, exploration episodes, rewards, evaluation",
               "roe"};
  app.require_subcommand(1);
  std::map<std::string, std::string> overrides;
  std::string config_path, sft_path, gold_path, pred_path, trace_path;
  int khop = 0;

  auto graph_flags = [&](CLI::App* sub) {
    flag(sub, overrides, "--kg", "kg", "Triple file (head<TAB>relation<TAB>tail)");
    switch_flag(sub, overrides, "--no-augment", "augment", "false", "Do not add inverse edges");
    flag(sub, overrides, "--inverse-suffix", "inverse_suffix", "Suffix naming inverse relations");
    sub->add_option("--config", config_path, "key = value config file");
  };
  auto question_flags = [&](CLI::App* sub) {
    flag(sub, overrides, "--questions", "questions", "Question JSONL");
    switch_flag(sub, overrides, "--strict-seeds", "strict_seeds", "true", "Reject questions with unknown seeds");
  };

  auto* build = app.add_subcommand("build-kg", "Load and index a triple file; print graph statistics");
  graph_flags(build);
  flag(build, overrides, "--out", "out", "Write the augmented edge list as TSV");

  auto* mine = app.add_subcommand("mine", "Mine gold paths and write the SFT step dataset");
  graph_flags(mine);
  question_flags(mine);
  flag(mine, overrides, "--lmax", "l_max", "Maximum gold path length");
  flag(mine, overrides, "--neighbor-cap", "neighbor_cap", "Neighbor edges kept per frontier node");
  flag(mine, overrides, "--out", "out", "SFT JSONL output");
  flag(mine, overrides, "--jobs", "jobs", "Worker threads");

  auto* exp_sft = app.add_subcommand("export-sft", "Render SFT records as prompt/completion pairs");
  graph_flags(exp_sft);
  exp_sft->add_option("--sft", sft_path, "SFT JSONL written by mine");
  flag(exp_sft, overrides, "--out", "out", "Prompt/completion JSONL output");

  auto* explore = app.add_subcommand("explore", "Run exploration episodes with a policy");
  graph_flags(explore);
  question_flags(explore);
  flag(explore, overrides, "--policy", "policy", "oracle | null | random | external:<url>");
  flag(explore, overrides, "--dmax", "d_max", "Maximum number of steps");
  flag(explore, overrides, "--batch-budget", "batch_budget", "Neighbor edges per policy request");
  flag(explore, overrides, "--mode", "mode", "step_synchronous | depth_first");
  flag(explore, overrides, "--max-paths", "max_paths", "Accepted paths kept per step (0 = unlimited)");
  switch_flag(explore, overrides, "--forbid-revisit", "forbid_revisit", "true", "Reject paths that revisit entities");
  flag(explore, overrides, "--lmax", "l_max", "Mining depth for the oracle when --gold is absent");
  flag(explore, overrides, "--samples", "samples", "Episodes per question");
  flag(explore, overrides, "--timeout-ms", "timeout_ms", "External policy request timeout");
  flag(explore, overrides, "--retries", "retries", "External policy retries");
  flag(explore, overrides, "--policy-seed", "policy_seed", "Seed for the random policy");
  flag(explore, overrides, "--jobs", "jobs", "Worker threads");
  flag(explore, overrides, "--out", "out", "Trace JSONL output");
  explore->add_option("--gold", gold_path, "SFT JSONL for the oracle policy");
  explore->add_option("--pred", pred_path, "Prediction JSONL output");

  auto* score = app.add_subcommand("score", "Score a trace against gold step records");
  graph_flags(score);
  score->add_option("--trace", trace_path, "Trace JSONL written by explore");
  score->add_option("--gold", gold_path, "SFT JSONL written by mine");
  flag(score, overrides, "--beta", "beta", "Hallucination penalty weight");
  flag(score, overrides, "--format-reward", "format_reward", "Reward for a well-formed response");
  flag(score, overrides, "--out", "out", "Score JSONL output (default stdout)");

  auto* eval = app.add_subcommand("eval", "Hit/F1/precision/recall of predictions or a k-hop baseline");
  graph_flags(eval);
  question_flags(eval);
  eval->add_option("--pred", pred_path, "Prediction JSONL ({qid, answers})");
  eval->add_option("--khop", khop, "Score the k-hop retrieval baseline instead of predictions");
  flag(eval, overrides, "--out", "out", "Report JSON output");

  auto* split = app.add_subcommand("split", "Seeded split of a question file into SFT and RL parts");
  question_flags(split);
  split->add_option("--config", config_path, "key = value config file");
  flag(split, overrides, "--ratio", "split_ratio", "Share of questions in the first part");
  flag(split, overrides, "--seed", "split_seed", "Shuffle seed");
  flag(split, overrides, "--out", "out", "Output prefix (writes <prefix>.sft.jsonl and <prefix>.rl.jsonl)");

  if (argc <= 1) {
    err << app.help();
    return kExitUsage;
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n" << app.help();
    return kExitUsage;
  }

  try {
    RunConfig cfg;
    try {
      cfg = load_config(config_path, overrides);
    } catch (const ParseError& e) {
      throw UsageError(e.what());
    }
    detail::logger()->info("config {}", echo_config(cfg));
    if (build->parsed()) return detail::cmd_build_kg(cfg, out);
    if (mine->parsed()) return detail::cmd_mine(cfg, out);
    if (exp_sft->parsed()) return detail::cmd_export_sft(cfg, sft_path, out);
    if (explore->parsed()) return detail::cmd_explore(cfg, gold_path, pred_path, out);
    if (score->parsed()) return detail::cmd_score(cfg, trace_path, gold_path, out);
    if (eval->parsed()) return detail::cmd_eval(cfg, pred_path, khop, out);
    if (split->parsed()) return detail::cmd_split(cfg, out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitUsage;
}

}  // namespace roe::cli
