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

#ifndef GENCLUSTER_BACKEND_HPP
#define GENCLUSTER_BACKEND_HPP

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>

#include <json.hpp>

namespace gencluster {

namespace fs = std::filesystem;

struct CompletionRequest {
  std::string prompt;
  int max_tokens = 1;
  double temperature = -1.0;  // < 0: backend default
  std::optional<std::uint64_t> seed;
  /// Logical request key: "<kind>:<problem_id>.<subtask_id>". Used by the
  /// mock backend to select a script section; ignored by live backends.
  std::string tag;
  /// Request index within the tag; results are keyed by it so completion
  /// order never affects downstream artifacts.
  std::uint64_t index = 0;
};

struct CompletionResult {
  std::string reasoning_text;
  std::string answer_text;
  long reasoning_token_count = 0;
  long total_token_count = 0;
  bool truncated = false;
};

class CompletionBackend {
 public:
  virtual ~CompletionBackend() = default;
  /// Throws Error(Environment) on transport failure.
  virtual CompletionResult complete(const CompletionRequest& request) = 0;
};

/// Applies the reasoning-length accounting rule: backend-reported token
/// counts win; otherwise counts are estimated from the texts. Guarantees
/// reasoning_token_count <= total_token_count.
CompletionResult normalize_completion(CompletionResult result);

/// Deterministic scripted backend for offline runs.
///
/// Script JSON:
///   {
///     "default": <entry>,
///     "sections": { "<tag>": [<entry>, ...], ... }
///   }
/// An entry is either a completion string or an object
///   {"answer": str, "reasoning": str, "reasoning_tokens": int,
///    "truncated": bool, "fail": int}
/// where "fail" makes the first N calls hitting that entry throw a transport
/// error (for retry testing).
///
/// Lookup for tag "solution:p1.s2" tries sections "solution:p1.s2",
/// "solution:p1", "solution", then "default"; the entry is
/// section[index % section_size].
class MockBackend : public CompletionBackend {
 public:
  explicit MockBackend(nlohmann::json script);
  explicit MockBackend(const fs::path& script_path);

  CompletionResult complete(const CompletionRequest& request) override;

  /// Total number of complete() calls (including failed ones).
  std::uint64_t calls() const;

 private:
  nlohmann::json script_;
  mutable std::mutex mutex_;
  std::map<std::string, std::uint64_t> fail_counts_;
  std::uint64_t calls_ = 0;
};

struct HttpBackendOptions {
  std::string base_url = "http://localhost:8000/v1";
  std::string model = "default";
  std::string auth_token_env = "GENCLUSTER_API_TOKEN";
  int max_attempts = 3;
  int backoff_ms = 250;  // doubled per retry
  int timeout_seconds = 600;
};

/// OpenAI-compatible chat-completions client.
class HttpBackend : public CompletionBackend {
 public:
  explicit HttpBackend(HttpBackendOptions options);
  CompletionResult complete(const CompletionRequest& request) override;

 private:
  HttpBackendOptions options_;
  std::string host_;
  int port_ = 80;
  std::string path_prefix_;
};

}  // namespace gencluster

#endif  // GENCLUSTER_BACKEND_HPP
