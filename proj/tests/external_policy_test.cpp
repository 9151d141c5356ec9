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

#include <cstdlib>

#include "roe/external_policy.hpp"
#include "scenarios.hpp"

using namespace roe;
using namespace roe::testing;

namespace {

PolicyRequest g1_request() {
  return {"q1", "children of friends of A", 0, {lp({"A"})}, {{"A", "friend", "B"}, {"A", "friend", "E"}}};
}

ExternalPolicyOptions fast(const std::string& url) {
  ExternalPolicyOptions o;
  o.url = url;
  o.timeout = std::chrono::milliseconds(2000);
  o.retry_backoff = std::chrono::milliseconds(1);
  return o;
}

}  // namespace

TEST(SplitUrl, Forms) {
  auto u = split_url("http://127.0.0.1:8080/v1/act");
  EXPECT_EQ(u.origin, "http://127.0.0.1:8080");
  EXPECT_EQ(u.path, "/v1/act");
  EXPECT_EQ(split_url("http://host").path, "/");
  EXPECT_THROW(split_url("host/act"), InvalidArgument);
}

TEST(ResponseText, Envelopes) {
  EXPECT_EQ(response_text(R"({"choices":[{"message":{"content":"hi"}}]})"), "hi");
  EXPECT_EQ(response_text(R"({"choices":[{"text":"yo"}]})"), "yo");
  EXPECT_EQ(response_text(R"({"text":"plain"})"), "plain");
  EXPECT_EQ(response_text("not json"), "not json");
  const std::string action = R"({"answers":[],"exploration_paths":[]})";
  EXPECT_EQ(response_text(action), action);
}

TEST(ExternalStep, ValidAction) {
  MockPolicyServer server([](const nlohmann::json&) {
    return std::pair{200, std::string(R"({"answers":["C"],"exploration_paths":[["A","friend","B"]]})")};
  });
  auto r = external_step(fast(server.url()), g1_request());
  EXPECT_TRUE(r.format_ok);
  EXPECT_EQ(r.parsed->answers, std::vector<std::string>{"C"});
  EXPECT_EQ(r.attempts, 1);
  EXPECT_GE(r.latency_ms, 0.0);

  auto reqs = server.requests();
  ASSERT_EQ(reqs.size(), 1u);
  EXPECT_EQ(reqs[0]["qid"], "q1");
  EXPECT_EQ(reqs[0]["neighbors"].size(), 2u);
  EXPECT_EQ(reqs[0]["template_version"], std::string(kPromptTemplateVersion));
  EXPECT_NE(reqs[0]["prompt"].get<std::string>().find(kActionSchema), std::string::npos);
}

TEST(ExternalStep, ProseIsFormatFailure) {
  MockPolicyServer server([](const nlohmann::json&) { return std::pair{200, std::string("the answer is C")}; });
  auto r = external_step(fast(server.url()), g1_request());
  EXPECT_FALSE(r.format_ok);
  EXPECT_FALSE(r.parsed);
}

TEST(ExternalStep, UnreachableEndpoint) {
  int port = 0;
  {
    MockPolicyServer probe([](const nlohmann::json&) { return std::pair{200, std::string()}; });
    port = std::stoi(probe.url().substr(17, probe.url().rfind('/') - 17));
  }
  auto opts = fast("http://127.0.0.1:" + std::to_string(port) + "/act");
  opts.retries = 2;
  try {
    external_step(opts, g1_request());
    FAIL() << "expected TransportError";
  } catch (const TransportError& e) {
    EXPECT_NE(std::string(e.what()).find("3 attempts"), std::string::npos);
  }
}

TEST(ExternalStep, RetriesAfterServerError) {
  std::atomic<int> calls{0};
  MockPolicyServer server([&](const nlohmann::json&) {
    if (calls++ == 0) return std::pair{500, std::string("busy")};
    return std::pair{200, std::string(R"({"answers":[],"exploration_paths":[]})")};
  });
  auto r = external_step(fast(server.url()), g1_request());
  EXPECT_TRUE(r.format_ok);
  EXPECT_EQ(r.attempts, 2);
  EXPECT_EQ(calls.load(), 2);
}

TEST(ExternalPolicy, BearerTokenFromEnvironment) {
  MockPolicyServer server([](const nlohmann::json&) {
    return std::pair{200, std::string(R"({"answers":[],"exploration_paths":[]})")};
  });
  ::setenv(kPolicyTokenEnv, "secret-token", 1);
  ExternalPolicy policy(fast(server.url()));
  ::unsetenv(kPolicyTokenEnv);
  policy.step(g1_request());
  ASSERT_EQ(server.auth_headers().size(), 1u);
  EXPECT_EQ(server.auth_headers()[0], "Bearer secret-token");
}

TEST(ExternalPolicy, EpisodeSurvivesTransportFailure) {
  auto g = g1();
  auto opts = fast("http://127.0.0.1:1/act");
  opts.retries = 0;
  ExternalPolicy policy(opts);
  auto r = run_episode(g, q1(g), policy, {});
  EXPECT_EQ(r.termination, Termination::transport_error);
  EXPECT_EQ(r.steps_taken, 0);
  EXPECT_FALSE(r.error.empty());
}

TEST(Scenarios, HandScoredTraces) {
  for (const auto& s : g1_scenarios()) {
    SCOPED_TRACE(s.name);
    auto o = run_scenario(s);
    EXPECT_EQ(scenario_mismatch(s, o), "");
  }
}

TEST(Scenarios, ProseStepRecordedAsFormatFailure) {
  auto o = run_scenario(g1_scenarios()[1]);
  ASSERT_EQ(o.episode.trace.size(), 2u);
  EXPECT_FALSE(o.episode.trace[1].format_ok);
  EXPECT_TRUE(o.episode.trace[1].action.empty());
  EXPECT_EQ(o.episode.trace[1].format_failures, std::vector<std::string>{"I think the answer is C."});
}

TEST(Scenarios, HallucinatedPathDroppedButTraced) {
  auto o = run_scenario(g1_scenarios()[2]);
  ASSERT_EQ(o.episode.trace.size(), 2u);
  EXPECT_EQ(o.episode.trace[0].dropped_paths, std::vector<LabelPath>{lp({"A", "child", "B"})});
  EXPECT_EQ(o.episode.trace[1].current_paths, std::vector<LabelPath>{lp({"A", "friend", "B"})});
}
