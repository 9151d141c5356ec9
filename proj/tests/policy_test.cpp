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

#include <random>

#include "roe/policy.hpp"
#include "test_support.hpp"

using namespace roe;
using namespace roe::testing;

namespace {

PolicyRequest q1_request(int depth, std::vector<LabelPath> paths, std::vector<RawTriple> neighbors) {
  return {"q1", "children of friends of A", depth, std::move(paths), std::move(neighbors)};
}

OracleIndex g1_oracle(const KnowledgeGraph& g) {
  const auto q = q1(g);
  auto records = build_step_records(g, q, mine_gold_paths(g, q, 2), 2);
  return OracleIndex(g, records);
}

std::string random_label(std::mt19937_64& rng) {
  static const std::vector<std::string> pieces{"a", "b", "c", "X", "Z", "0", "9", " ", "_", "-", ".", "\"",
                                               "\\", "/", "{", "}", "[", "]", ":", ",", "\t", "\u00e9", "\u4e2d"};
  std::string s;
  const auto n = std::uniform_int_distribution<int>(1, 8)(rng);
  for (int i = 0; i < n; ++i) s += pieces[std::uniform_int_distribution<std::size_t>(0, pieces.size() - 1)(rng)];
  return s;
}

}  // namespace

TEST(Render, ContainsSchemaAndNeighbors) {
  auto req = q1_request(0, {lp({"A"})}, {{"A", "friend", "B"}, {"A", "friend", "E"}});
  auto text = render_request(req);
  EXPECT_NE(text.find(R"({"answers": [], "exploration_paths": []})"), std::string::npos);
  EXPECT_NE(text.find("(A, friend, B)"), std::string::npos);
  EXPECT_NE(text.find("(A, friend, E)"), std::string::npos);
  EXPECT_NE(text.find("children of friends of A"), std::string::npos);
  EXPECT_EQ(text, render_request(req));
}

TEST(Render, EmptyCurrentPathsSentinel) {
  auto text = render_request(q1_request(0, {}, {{"A", "friend", "B"}}));
  EXPECT_NE(text.find("current paths: (none)"), std::string::npos);
}

TEST(Render, CharacterBudgetIsRespected) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    PolicyRequest req{"q", "question " + std::to_string(trial), trial % 4, {}, {}};
    const int n_paths = std::uniform_int_distribution<int>(0, 40)(rng);
    const int n_neighbors = std::uniform_int_distribution<int>(0, 60)(rng);
    for (int i = 0; i < n_paths; ++i) req.current_paths.push_back({random_label(rng), "r", random_label(rng)});
    for (int i = 0; i < n_neighbors; ++i) req.neighbors.push_back({random_label(rng), "rel", random_label(rng)});
    const std::size_t budget = std::uniform_int_distribution<std::size_t>(300, 3000)(rng);
    const auto text = render_request(req, {budget});
    EXPECT_LE(text.size(), budget);
    EXPECT_NE(text.find(kActionSchema), std::string::npos);
  }
}

TEST(ParseAction, ValidAction) {
  auto r = parse_action(R"({"answers":["C"],"exploration_paths":[["A","friend","B"]]})");
  ASSERT_TRUE(r.format_ok);
  ASSERT_TRUE(r.parsed);
  EXPECT_EQ(r.parsed->answers, std::vector<std::string>{"C"});
  EXPECT_EQ(r.parsed->paths, std::vector<LabelPath>{lp({"A", "friend", "B"})});
}

TEST(ParseAction, ProseFails) {
  auto r = parse_action("the answer is C");
  EXPECT_FALSE(r.format_ok);
  EXPECT_FALSE(r.parsed);
  EXPECT_EQ(r.text, "the answer is C");
}

TEST(ParseAction, MissingKeyFails) {
  EXPECT_FALSE(parse_action(R"({"answers":[]})").format_ok);
  EXPECT_FALSE(parse_action(R"({"answers":"C","exploration_paths":[]})").format_ok);
  EXPECT_FALSE(parse_action(R"({"answers":[],"exploration_paths":[["A","friend"]]})").format_ok);
  EXPECT_FALSE(parse_action(R"({"answers":[1],"exploration_paths":[]})").format_ok);
  EXPECT_FALSE(parse_action(R"({"answers":[],"exploration_paths":[)").format_ok);
}

TEST(ParseAction, ToleratesProseAndExtraKeys) {
  auto r = parse_action(
      "Sure {not json}. Here: {\"answers\": [\"C\"], \"exploration_paths\": [], \"why\": {\"x\": \"}\"}} done");
  ASSERT_TRUE(r.format_ok);
  EXPECT_EQ(r.parsed->answers, std::vector<std::string>{"C"});
  EXPECT_TRUE(parse_action(R"({"answers":[],"exploration_paths":[],"stop":true})").stop);
}

// parse_action(serialize_action(a)) == a for random well-formed actions.
TEST(ParseAction, SerializeRoundTrip) {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 1000; ++trial) {
    StepAction a;
    const int n_answers = std::uniform_int_distribution<int>(0, 4)(rng);
    const int n_paths = std::uniform_int_distribution<int>(0, 4)(rng);
    for (int i = 0; i < n_answers; ++i) a.answers.push_back(random_label(rng));
    for (int i = 0; i < n_paths; ++i) {
      LabelPath p{random_label(rng)};
      const int hops = std::uniform_int_distribution<int>(0, 3)(rng);
      for (int h = 0; h < hops; ++h) {
        p.push_back(random_label(rng));
        p.push_back(random_label(rng));
      }
      a.paths.push_back(std::move(p));
    }
    auto r = parse_action(serialize_action(a));
    ASSERT_TRUE(r.format_ok);
    ASSERT_EQ(*r.parsed, a);
  }
}

TEST(Oracle, FullBatchAtDepthOne) {
  auto g = g1();
  auto idx = g1_oracle(g);
  auto req = q1_request(1, {lp({"A", "friend", "B"}), lp({"A", "friend", "E"})},
                        {{"B", "child", "C"}, {"B", "child", "D"}, {"B", "friend.inv", "A"},
                         {"E", "child", "F"}, {"E", "friend.inv", "A"}});
  auto a = oracle_step(idx, req);
  EXPECT_EQ(std::set<std::string>(a.answers.begin(), a.answers.end()), (std::set<std::string>{"C", "D", "F"}));
  EXPECT_EQ(a.paths.size(), 3u);
}

TEST(Oracle, DepthBeyondRecordsIsEmpty) {
  auto g = g1();
  auto idx = g1_oracle(g);
  EXPECT_TRUE(oracle_step(idx, q1_request(2, {}, {{"C", "child.inv", "B"}})).empty());
}

TEST(Oracle, BatchRestriction) {
  auto g = g1();
  auto idx = g1_oracle(g);
  auto a = oracle_step(idx, q1_request(1, {lp({"A", "friend", "B"})}, {{"B", "child", "C"}}));
  EXPECT_EQ(a.answers, std::vector<std::string>{"C"});
  EXPECT_EQ(a.paths, std::vector<LabelPath>{lp({"A", "friend", "B", "child", "C"})});
}

TEST(Oracle, UnknownQuestion) {
  auto g = g1();
  auto idx = g1_oracle(g);
  auto req = q1_request(0, {}, {});
  req.qid = "nope";
  EXPECT_THROW(oracle_step(idx, req), LookupError);
  idx.add_question("nope");
  EXPECT_TRUE(oracle_step(idx, req).empty());
}

// Union of the oracle over any partition of the neighbors equals the
// unrestricted gold action.
TEST(Oracle, BatchUnionProperty) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 60; ++trial) {
    bool ok = false;
    auto inst = random_instance(rng, 20, 4, 50, 3, &ok);
    if (!ok) continue;
    auto g = build_graph(inst.raw);
    auto q = to_question(g, inst, "q");
    auto records = build_step_records(g, q, mine_gold_paths(g, q, 3), 3);
    OracleIndex idx(g, records);
    for (const auto& r : records) {
      std::vector<RawTriple> neighbors;
      for (const auto& ns : r.frontier_neighbors)
        for (const auto& t : ns.edges) neighbors.push_back(g.labels(t));
      PolicyRequest full{"q", "", r.depth, {}, neighbors};
      const auto whole = oracle_step(idx, full);
      EXPECT_EQ(std::set<std::string>(whole.answers.begin(), whole.answers.end()),
                [&] {
                  std::set<std::string> s;
                  for (auto e : r.gold_answers) s.insert(g.label(e));
                  return s;
                }());
      EXPECT_EQ(LabelPathSet(whole.paths.begin(), whole.paths.end()), to_labels(g, r.gold_paths));

      const auto budget = std::uniform_int_distribution<std::size_t>(1, 5)(rng);
      std::vector<StepAction> parts;
      for (std::size_t i = 0; i < neighbors.size(); i += budget) {
        PolicyRequest part{"q", "", r.depth, {},
                           {neighbors.begin() + static_cast<std::ptrdiff_t>(i),
                            neighbors.begin() + static_cast<std::ptrdiff_t>(std::min(neighbors.size(), i + budget))}};
        parts.push_back(oracle_step(idx, part));
      }
      std::set<std::string> answers;
      LabelPathSet paths;
      for (const auto& p : parts) {
        answers.insert(p.answers.begin(), p.answers.end());
        paths.insert(p.paths.begin(), p.paths.end());
      }
      EXPECT_EQ(answers, std::set<std::string>(whole.answers.begin(), whole.answers.end()));
      EXPECT_EQ(paths, LabelPathSet(whole.paths.begin(), whole.paths.end()));
    }
  }
}

TEST(Baselines, NullAndRandom) {
  NullPolicy null;
  auto req = q1_request(0, {lp({"A"})}, {{"A", "friend", "B"}, {"A", "friend", "E"}});
  auto r = null.step(req);
  EXPECT_TRUE(r.format_ok);
  EXPECT_TRUE(r.parsed->empty());

  RandomPolicy rnd(42, 1);
  auto a = rnd.step(req);
  auto b = rnd.step(req);
  ASSERT_TRUE(a.format_ok);
  EXPECT_EQ(a.text, b.text);
  ASSERT_EQ(a.parsed->paths.size(), 1u);
  const auto& p = a.parsed->paths[0];
  EXPECT_TRUE(p == lp({"A", "friend", "B"}) || p == lp({"A", "friend", "E"}));
  EXPECT_EQ(a.parsed->answers, std::vector<std::string>{p.back()});
}

TEST(Wire, RequestJsonRoundTrip) {
  auto req = q1_request(1, {lp({"A", "friend", "B"})}, {{"B", "child", "C"}});
  auto j = request_to_json(req);
  EXPECT_EQ(j.dump(),
            R"({"qid":"q1","question":"children of friends of A","depth":1,"current_paths":[["A","friend","B"]],)"
            R"("neighbors":[["B","child","C"]]})");
  auto back = request_from_json(nlohmann::json::parse(j.dump()));
  EXPECT_EQ(back.current_paths, req.current_paths);
  EXPECT_EQ(back.neighbors, req.neighbors);
}
