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

#include <gtest/gtest.h>

#include <sstream>

#include "roe_cli.hpp"
#include "test_support.hpp"

using namespace roe;
using namespace roe::testing;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "roe");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::dispatch(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

// G1 as TSV plus one question over it.
struct Fixture {
  TempDir dir;
  std::string kg, questions;
  Fixture() {
    std::string tsv;
    for (const auto& t : g1_triples()) tsv += t[0] + "\t" + t[1] + "\t" + t[2] + "\n";
    kg = dir.write("g1.tsv", tsv);
    questions = dir.write(
        "q.jsonl",
        R"({"qid":"q1","question":"children of friends of A","seeds":["A"],"answers":["C","D","F"]})"
        "\n");
  }
};

}  // namespace

TEST(Cli, NoArgumentsIsUsageError) {
  auto r = run({});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("mine"), std::string::npos);
}

TEST(Cli, UnknownSubcommandAndFlag) {
  EXPECT_EQ(run({"frobnicate"}).code, 2);
  EXPECT_EQ(run({"mine", "--bogus"}).code, 2);
  EXPECT_EQ(run({"mine", "--kg", "x.tsv"}).code, 2);  // missing --out
}

TEST(Cli, MissingInputIsRuntimeError) {
  TempDir dir;
  auto r = run({"build-kg", "--kg", dir.file("absent.tsv")});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("absent.tsv"), std::string::npos);
}

TEST(Cli, BuildKg) {
  Fixture f;
  auto r = run({"build-kg", "--kg", f.kg});
  ASSERT_EQ(r.code, 0) << r.err;
  auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j["entities"], 6);
  EXPECT_EQ(j["edges"], 10);
}

TEST(Cli, MineWritesDatasetIdempotently) {
  Fixture f;
  const auto out = f.dir.file("sft.jsonl");
  auto r = run({"mine", "--kg", f.kg, "--questions", f.questions, "--lmax", "2", "--out", out});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto first = read_file(out);
  auto g = g1();
  auto ds = import_sft_dataset(g, out);
  EXPECT_EQ(ds.header.l_max, 2);
  EXPECT_EQ(ds.records.size(), 2u);
  ASSERT_EQ(run({"mine", "--kg", f.kg, "--questions", f.questions, "--lmax", "2", "--out", out, "--jobs", "3"}).code,
            0);
  EXPECT_EQ(read_file(out), first);
}

TEST(Cli, SplitSixtyForty) {
  TempDir dir;
  std::string lines;
  for (int i = 0; i < 10; ++i)
    lines += R"({"qid":"q)" + std::to_string(i) + R"(","question":"x","seeds":["A"],"answers":["B"]})" + "\n";
  const auto qs = dir.write("qs.jsonl", lines);
  const auto prefix = dir.file("part");
  ASSERT_EQ(run({"split", "--questions", qs, "--ratio", "0.6", "--seed", "7", "--out", prefix}).code, 0);
  auto sft = read_question_records(prefix + ".sft.jsonl");
  auto rl = read_question_records(prefix + ".rl.jsonl");
  EXPECT_EQ(sft.size(), 6u);
  EXPECT_EQ(rl.size(), 4u);
  std::set<std::string> ids;
  for (const auto& r : sft) ids.insert(r.qid);
  for (const auto& r : rl) ids.insert(r.qid);
  EXPECT_EQ(ids.size(), 10u);

  const auto a = read_file(prefix + ".sft.jsonl");
  ASSERT_EQ(run({"split", "--questions", qs, "--ratio", "0.6", "--seed", "7", "--out", prefix}).code, 0);
  EXPECT_EQ(read_file(prefix + ".sft.jsonl"), a);
}

TEST(Config, Defaults) {
  auto c = load_config("", {});
  EXPECT_EQ(c.l_max, 2);
  EXPECT_EQ(c.d_max, 5);
  EXPECT_EQ(c.beta, 1.0);
  EXPECT_EQ(c.batch_budget, 256u);
}

TEST(Config, FlagsOverrideFile) {
  TempDir dir;
  const auto path = dir.write("run.conf", "# run\nd_max = 5\nbeta = 0.5\n\n");
  auto c = load_config(path, {{"d_max", "3"}});
  EXPECT_EQ(c.d_max, 3);
  EXPECT_EQ(c.beta, 0.5);
  const auto echo = echo_config(c);
  for (const char* key : {"kg=", "l_max=", "d_max=3", "batch_budget=", "neighbor_cap=", "beta=0.5", "split_seed=",
                          "mode=", "policy=", "max_paths="})
    EXPECT_NE(echo.find(key), std::string::npos) << key;
}

TEST(Config, InvalidValuesNameTheKey) {
  try {
    load_config("", {{"beta", "-1"}});
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("beta"), std::string::npos);
  }
  EXPECT_THROW(load_config("", {{"d_max", "0"}}), ParseError);
  EXPECT_THROW(load_config("", {{"mode", "sideways"}}), ParseError);
  EXPECT_THROW(load_config("", {{"colour", "red"}}), ParseError);
  auto r = run({"score", "--beta", "-1"});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("beta"), std::string::npos);
}

TEST(Cli, ExploreScoreEvalPipeline) {
  Fixture f;
  const auto sft = f.dir.file("sft.jsonl"), trace = f.dir.file("trace.jsonl"), pred = f.dir.file("pred.jsonl"),
             scores = f.dir.file("scores.jsonl"), report = f.dir.file("report.json");
  ASSERT_EQ(run({"mine", "--kg", f.kg, "--questions", f.questions, "--lmax", "2", "--out", sft}).code, 0);
  auto ex = run({"explore", "--kg", f.kg, "--questions", f.questions, "--policy", "oracle", "--gold", sft, "--dmax",
                 "2", "--batch-budget", "1", "--out", trace, "--pred", pred});
  ASSERT_EQ(ex.code, 0) << ex.err;
  auto p = nlohmann::json::parse(read_file(pred));
  EXPECT_EQ(p["answers"], (std::vector<std::string>{"C", "D", "F"}));
  EXPECT_EQ(p["termination"], "d_max");

  auto sc = run({"score", "--kg", f.kg, "--trace", trace, "--gold", sft, "--out", scores});
  ASSERT_EQ(sc.code, 0) << sc.err;
  std::istringstream lines(read_file(scores));
  std::string line;
  int n = 0;
  while (std::getline(lines, line)) {
    auto j = nlohmann::json::parse(line);
    EXPECT_EQ(j["total"], 3.0);
    EXPECT_EQ(j["episode_total"], 6.0);
    EXPECT_EQ(j["advantage"], 0.0);
    ++n;
  }
  EXPECT_EQ(n, 2);

  auto ev = run({"eval", "--kg", f.kg, "--questions", f.questions, "--pred", pred, "--out", report});
  ASSERT_EQ(ev.code, 0) << ev.err;
  auto rep = nlohmann::json::parse(read_file(report));
  EXPECT_EQ(rep["hit_pct"], 100.0);
  EXPECT_EQ(rep["f1_pct"], 100.0);
  EXPECT_EQ(rep["averaging"], "macro");

  auto kh = run({"eval", "--kg", f.kg, "--questions", f.questions, "--khop", "2"});
  ASSERT_EQ(kh.code, 0) << kh.err;
  auto k2 = nlohmann::json::parse(kh.out);
  EXPECT_DOUBLE_EQ(k2["precision_pct"].get<double>(), 60.0);
  EXPECT_DOUBLE_EQ(k2["recall_pct"].get<double>(), 100.0);
}

TEST(Cli, ExploreIsDeterministic) {
  Fixture f;
  const auto t1 = f.dir.file("t1.jsonl"), t2 = f.dir.file("t2.jsonl");
  for (const auto& out : {t1, t2})
    ASSERT_EQ(run({"explore", "--kg", f.kg, "--questions", f.questions, "--policy", "random", "--policy-seed", "5",
                   "--dmax", "3", "--out", out})
                  .code,
              0);
  EXPECT_EQ(read_file(t1), read_file(t2));
  EXPECT_FALSE(read_file(t1).empty());
}

TEST(Cli, ExportSftPromptPairs) {
  Fixture f;
  const auto sft = f.dir.file("sft.jsonl"), pairs = f.dir.file("pairs.jsonl");
  ASSERT_EQ(run({"mine", "--kg", f.kg, "--questions", f.questions, "--out", sft}).code, 0);
  ASSERT_EQ(run({"export-sft", "--kg", f.kg, "--sft", sft, "--out", pairs}).code, 0);
  std::istringstream lines(read_file(pairs));
  std::string line;
  std::getline(lines, line);
  auto j = nlohmann::json::parse(line);
  EXPECT_EQ(j["depth"], 0);
  EXPECT_NE(j["prompt"].get<std::string>().find("(A, friend, B)"), std::string::npos);
  EXPECT_TRUE(parse_action(j["completion"].get<std::string>()).format_ok);
}
