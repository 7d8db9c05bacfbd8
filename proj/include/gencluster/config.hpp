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

#ifndef GENCLUSTER_CONFIG_HPP
#define GENCLUSTER_CONFIG_HPP

#include <cstdint>
#include <filesystem>
#include <string>

#include <json.hpp>

namespace gencluster {

namespace fs = std::filesystem;

/// Pipeline knobs. Field initializers are the defaults a missing config key
/// falls back to; an explicitly set out-of-range value is rejected rather
/// than silently replaced.
struct RunConfig {
  int k_generations = 50;       // K: candidate solutions per subtask
  int games_per_cluster = 10;   // G_n: tournament games each cluster initiates
  int num_generators = 100;
  int num_validators = 100;
  int num_tests = 100;
  double validator_threshold = 0.75;  // fraction of validators that must approve
  int max_tokens = 120000;
  std::uint64_t rng_seed = 0;
  std::string strategy = "gencluster";

  int score_at_k_runs = 20;

  // execution
  int workers = 2;
  std::uint64_t stdout_cap_bytes = 16ull << 20;
  std::string scratch_dir;  // empty: under the system temp directory

  // completion backend
  std::string backend = "mock";  // "mock" or "live"
  std::string mock_script;       // path to the mock script (mock backend)
  std::string base_url = "http://localhost:8000/v1";
  std::string model = "default";
  double temperature = -1.0;  // < 0: leave the backend's default

  // report rendering; thresholds < 0 mean "not configured"
  double gold_threshold = -1.0;
  double silver_threshold = -1.0;
  double bronze_threshold = -1.0;

  bool operator==(const RunConfig&) const = default;
};

/// Range-checks every field and returns the config unchanged on success.
RunConfig validate_run_config(RunConfig cfg);

/// Fills a RunConfig from a (possibly partial) JSON object; missing keys keep
/// their defaults. The result is validated.
RunConfig parse_run_config(const nlohmann::json& j);
RunConfig load_run_config(const fs::path& path);

nlohmann::json run_config_to_json(const RunConfig& cfg);

}  // namespace gencluster

#endif  // GENCLUSTER_CONFIG_HPP
