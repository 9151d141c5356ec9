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

#include <chrono>
#include <cstdlib>
#include <string>
#include <string_view>
#include <thread>

#include "httplib.h"
#include "json.hpp"
#include "roe/error.hpp"
#include "roe/policy.hpp"

namespace roe {

inline constexpr const char* kPolicyTokenEnv = "ROE_POLICY_TOKEN";

struct ExternalPolicyOptions {
  std::string url;  // http://host[:port]/path
  std::chrono::milliseconds timeout{30000};
  int retries = 2;  // extra attempts after the first
  std::chrono::milliseconds retry_backoff{100};
  std::string auth_token;  // sent as a bearer token when non-empty
  RenderOptions render;
};

struct ParsedUrl {
  std::string origin;  // scheme://host:port
  std::string path;
};

inline ParsedUrl split_url(std::string_view url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string_view::npos) throw InvalidArgument("policy url needs a scheme: " + std::string(url));
  const auto path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string_view::npos) return {std::string(url), "/"};
  return {std::string(url.substr(0, path_start)), std::string(url.substr(path_start))};
}

/// Pulls the model text out of a response body. Chat-completion envelopes
/// ({"choices":[{"message":{"content":...}}]}, {"choices":[{"text":...}]},
/// {"text":...}) are unwrapped; anything else is taken verbatim.
inline std::string response_text(const std::string& body) {
  auto j = nlohmann::json::parse(body, nullptr, false);
  if (j.is_discarded() || !j.is_object()) return body;
  if (j.contains("choices") && j["choices"].is_array() && !j["choices"].empty()) {
    const auto& c = j["choices"][0];
    if (c.contains("message") && c["message"].is_object() && c["message"].contains("content") &&
        c["message"]["content"].is_string())
      return c["message"]["content"].get<std::string>();
    if (c.contains("text") && c["text"].is_string()) return c["text"].get<std::string>();
  }
  if (j.contains("text") && j["text"].is_string() && !j.contains("answers")) return j["text"].get<std::string>();
  return body;
}

/// POSTs the request (wire JSON plus the rendered prompt) and parses the
/// reply. Connection failures and non-2xx statuses are retried; when every
/// attempt fails a TransportError is thrown.
inline RawPolicyResponse external_step(const ExternalPolicyOptions& opts, const PolicyRequest& req) {
  const auto url = split_url(opts.url);
  auto body = request_to_json(req);
  body["prompt"] = render_request(req, opts.render);
  body["template_version"] = std::string(kPromptTemplateVersion);
  const auto payload = body.dump();

  httplib::Headers headers;
  if (!opts.auth_token.empty()) headers.emplace("Authorization", "Bearer " + opts.auth_token);

  std::string last_error;
  const auto start = std::chrono::steady_clock::now();
  for (int attempt = 1; attempt <= opts.retries + 1; ++attempt) {
    httplib::Client cli(url.origin);
    const auto secs = std::chrono::duration_cast<std::chrono::seconds>(opts.timeout);
    const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(opts.timeout - secs);
    cli.set_connection_timeout(secs.count(), usecs.count());
    cli.set_read_timeout(secs.count(), usecs.count());
    cli.set_write_timeout(secs.count(), usecs.count());
    auto res = cli.Post(url.path, headers, payload, "application/json");
    if (res && res->status >= 200 && res->status < 300) {
      auto out = parse_action(response_text(res->body));
      out.attempts = attempt;
      out.latency_ms =
          std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
      return out;
    }
    last_error = res ? "HTTP status " + std::to_string(res->status) : httplib::to_string(res.error());
    if (attempt <= opts.retries) std::this_thread::sleep_for(opts.retry_backoff);
  }
  throw TransportError("policy endpoint " + opts.url + " failed after " + std::to_string(opts.retries + 1) +
                       " attempts: " + last_error);
}

class ExternalPolicy final : public Policy {
 public:
  explicit ExternalPolicy(ExternalPolicyOptions opts) : opts_(std::move(opts)) {
    if (opts_.auth_token.empty())
      if (const char* tok = std::getenv(kPolicyTokenEnv)) opts_.auth_token = tok;
  }

  RawPolicyResponse step(const PolicyRequest& req) override { return external_step(opts_, req); }
  std::string name() const override { return "external:" + opts_.url; }

 private:
  ExternalPolicyOptions opts_;
};

}  // namespace roe
