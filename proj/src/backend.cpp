// Copyright 2025 The GenCluster Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "gencluster/backend.hpp"

#include <chrono>
#include <cstdlib>
#include <thread>
#include <vector>

#include <httplib.h>

#include "gencluster/codeblock.hpp"
#include "gencluster/error.hpp"
#include "gencluster/util.hpp"

namespace gencluster {

using nlohmann::json;

CompletionResult normalize_completion(CompletionResult result) {
  if (result.reasoning_token_count <= 0)
    result.reasoning_token_count = estimate_token_count(result.reasoning_text);
  if (result.total_token_count <= 0)
    result.total_token_count =
        result.reasoning_token_count + estimate_token_count(result.answer_text);
  if (result.total_token_count < result.reasoning_token_count)
    result.total_token_count = result.reasoning_token_count;
  return result;
}

MockBackend::MockBackend(json script) : script_(std::move(script)) {
  if (!script_.is_object()) raise(ErrorKind::Config, "mock script must be a JSON object");
}

namespace {
json parse_script_file(const fs::path& path) {
  try {
    return json::parse(read_file(path));
  } catch (const json::exception& e) {
    raise(ErrorKind::Config, "unparseable mock script " + path.string() + ": " + e.what());
  }
}
}  // namespace

MockBackend::MockBackend(const fs::path& script_path) : MockBackend(parse_script_file(script_path)) {}

CompletionResult MockBackend::complete(const CompletionRequest& request) {
  const json* entry = nullptr;
  {
    std::lock_guard lock(mutex_);
    calls_++;
  }

  // Fallback chain: full tag, then progressively stripped ".segment"s,
  // then the bare kind, then "default".
  std::vector<std::string> keys;
  std::string tag = request.tag;
  keys.push_back(tag);
  std::string kind = tag;
  std::string rest;
  if (auto colon = tag.find(':'); colon != std::string::npos) {
    kind = tag.substr(0, colon);
    rest = tag.substr(colon + 1);
    while (true) {
      auto dot = rest.rfind('.');
      if (dot == std::string::npos) break;
      rest = rest.substr(0, dot);
      keys.push_back(kind + ":" + rest);
    }
    keys.push_back(kind);
  }

  const json& sections = script_.contains("sections") ? script_.at("sections") : json::object();
  for (const auto& key : keys) {
    if (sections.contains(key) && sections.at(key).is_array() && !sections.at(key).empty()) {
      const auto& list = sections.at(key);
      entry = &list.at(request.index % list.size());
      break;
    }
  }
  if (!entry && script_.contains("default")) entry = &script_.at("default");
  if (!entry)
    raise(ErrorKind::Config, "mock script has no entry for tag '" + request.tag + "'");

  CompletionResult result;
  if (entry->is_string()) {
    result.answer_text = entry->get<std::string>();
  } else if (entry->is_object()) {
    if (entry->contains("fail")) {
      std::lock_guard lock(mutex_);
      std::string key = request.tag + "#" + std::to_string(request.index);
      if (fail_counts_[key] < entry->at("fail").get<std::uint64_t>()) {
        fail_counts_[key]++;
        raise(ErrorKind::Environment, "mock transport failure for " + key);
      }
    }
    result.answer_text = entry->value("answer", "");
    result.reasoning_text = entry->value("reasoning", "");
    result.reasoning_token_count = entry->value("reasoning_tokens", 0L);
    result.total_token_count = entry->value("total_tokens", 0L);
    result.truncated = entry->value("truncated", false);
  } else {
    raise(ErrorKind::Config, "mock script entry must be a string or object");
  }
  return normalize_completion(std::move(result));
}

std::uint64_t MockBackend::calls() const {
  std::lock_guard lock(mutex_);
  return calls_;
}

namespace {

void parse_base_url(const std::string& url, std::string& host, int& port, std::string& prefix) {
  std::string rest = url;
  if (rest.rfind("http://", 0) == 0) {
    rest = rest.substr(7);
    port = 80;
  } else {
    raise(ErrorKind::Config, "base_url must start with http:// (got '" + url + "')");
  }
  auto slash = rest.find('/');
  std::string authority = slash == std::string::npos ? rest : rest.substr(0, slash);
  prefix = slash == std::string::npos ? "" : rest.substr(slash);
  while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
  if (auto colon = authority.find(':'); colon != std::string::npos) {
    host = authority.substr(0, colon);
    port = std::atoi(authority.c_str() + colon + 1);
  } else {
    host = authority;
  }
  if (host.empty()) raise(ErrorKind::Config, "base_url has no host: " + url);
}

}  // namespace

HttpBackend::HttpBackend(HttpBackendOptions options) : options_(std::move(options)) {
  parse_base_url(options_.base_url, host_, port_, path_prefix_);
}

CompletionResult HttpBackend::complete(const CompletionRequest& request) {
  json body;
  body["model"] = options_.model;
  body["messages"] = json::array({json{{"role", "user"}, {"content", request.prompt}}});
  body["max_tokens"] = request.max_tokens;
  if (request.temperature >= 0.0) body["temperature"] = request.temperature;
  if (request.seed) body["seed"] = *request.seed;

  httplib::Headers headers;
  if (const char* token = std::getenv(options_.auth_token_env.c_str()); token && *token)
    headers.emplace("Authorization", std::string("Bearer ") + token);

  std::string last_error;
  int backoff = options_.backoff_ms;
  for (int attempt = 1; attempt <= options_.max_attempts; attempt++) {
    if (attempt > 1) {
      std::this_thread::sleep_for(std::chrono::milliseconds(backoff));
      backoff *= 2;
    }
    httplib::Client client(host_, port_);
    client.set_read_timeout(options_.timeout_seconds, 0);
    client.set_write_timeout(options_.timeout_seconds, 0);
    auto response = client.Post(path_prefix_ + "/chat/completions", headers, body.dump(),
                                "application/json");
    if (!response) {
      last_error = "connection failure (" + httplib::to_string(response.error()) + ")";
      continue;
    }
    if (response->status == 429 || response->status >= 500) {
      last_error = "http status " + std::to_string(response->status);
      continue;
    }
    if (response->status != 200)
      raise(ErrorKind::Environment,
            "completion request rejected: http " + std::to_string(response->status) + " " +
                response->body);

    json reply;
    try {
      reply = json::parse(response->body);
      const json& message = reply.at("choices").at(0).at("message");
      CompletionResult result;
      result.answer_text = message.value("content", "");
      result.reasoning_text = message.value("reasoning_content", "");
      if (result.reasoning_text.empty()) result.reasoning_text = message.value("reasoning", "");
      if (reply.contains("usage")) {
        const json& usage = reply.at("usage");
        result.total_token_count = usage.value("completion_tokens", 0L);
        if (usage.contains("completion_tokens_details"))
          result.reasoning_token_count =
              usage.at("completion_tokens_details").value("reasoning_tokens", 0L);
      }
      result.truncated = reply.at("choices").at(0).value("finish_reason", "") == "length";
      return normalize_completion(std::move(result));
    } catch (const json::exception& e) {
      raise(ErrorKind::Environment, std::string("malformed completion response: ") + e.what());
    }
  }
  raise(ErrorKind::Environment,
        "completion request failed after " + std::to_string(options_.max_attempts) +
            " attempts: " + last_error);
}

}  // namespace gencluster
