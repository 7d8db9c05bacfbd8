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

#include "gencluster/config.hpp"

#include "gencluster/error.hpp"
#include "gencluster/ranking.hpp"
#include "gencluster/util.hpp"

namespace gencluster {

using nlohmann::json;

RunConfig validate_run_config(RunConfig cfg) {
  auto require_positive = [](int value, const char* field) {
    if (value < 1) raise(ErrorKind::Config, std::string(field) + " must be >= 1");
  };
  require_positive(cfg.k_generations, "k_generations");
  require_positive(cfg.games_per_cluster, "games_per_cluster");
  require_positive(cfg.num_generators, "num_generators");
  require_positive(cfg.num_validators, "num_validators");
  require_positive(cfg.num_tests, "num_tests");
  require_positive(cfg.max_tokens, "max_tokens");
  require_positive(cfg.score_at_k_runs, "score_at_k_runs");
  require_positive(cfg.workers, "workers");
  if (!(cfg.validator_threshold > 0.0 && cfg.validator_threshold <= 1.0))
    raise(ErrorKind::Config, "validator_threshold must be in (0, 1]");
  if (cfg.stdout_cap_bytes == 0) raise(ErrorKind::Config, "stdout_cap_bytes must be > 0");
  if (cfg.backend != "mock" && cfg.backend != "live")
    raise(ErrorKind::Config, "backend must be 'mock' or 'live'");
  strategy_from_name(cfg.strategy);  // throws Config on unknown names
  return cfg;
}

RunConfig parse_run_config(const json& j) {
  if (!j.is_object()) raise(ErrorKind::Config, "config must be a JSON object");
  RunConfig cfg;
  try {
    cfg.k_generations = j.value("k_generations", cfg.k_generations);
    cfg.games_per_cluster = j.value("games_per_cluster", cfg.games_per_cluster);
    cfg.num_generators = j.value("num_generators", cfg.num_generators);
    cfg.num_validators = j.value("num_validators", cfg.num_validators);
    cfg.num_tests = j.value("num_tests", cfg.num_tests);
    cfg.validator_threshold = j.value("validator_threshold", cfg.validator_threshold);
    cfg.max_tokens = j.value("max_tokens", cfg.max_tokens);
    cfg.rng_seed = j.value("rng_seed", cfg.rng_seed);
    cfg.strategy = j.value("strategy", cfg.strategy);
    cfg.score_at_k_runs = j.value("score_at_k_runs", cfg.score_at_k_runs);
    cfg.workers = j.value("workers", cfg.workers);
    cfg.stdout_cap_bytes = j.value("stdout_cap_bytes", cfg.stdout_cap_bytes);
    cfg.scratch_dir = j.value("scratch_dir", cfg.scratch_dir);
    cfg.backend = j.value("backend", cfg.backend);
    cfg.mock_script = j.value("mock_script", cfg.mock_script);
    cfg.base_url = j.value("base_url", cfg.base_url);
    cfg.model = j.value("model", cfg.model);
    cfg.temperature = j.value("temperature", cfg.temperature);
    cfg.gold_threshold = j.value("gold_threshold", cfg.gold_threshold);
    cfg.silver_threshold = j.value("silver_threshold", cfg.silver_threshold);
    cfg.bronze_threshold = j.value("bronze_threshold", cfg.bronze_threshold);
  } catch (const json::exception& e) {
    raise(ErrorKind::Config, std::string("bad config value: ") + e.what());
  }
  return validate_run_config(cfg);
}

RunConfig load_run_config(const fs::path& path) {
  json j;
  try {
    j = json::parse(read_file(path));
  } catch (const json::exception& e) {
    raise(ErrorKind::Config, "unparseable config " + path.string() + ": " + e.what());
  }
  return parse_run_config(j);
}

json run_config_to_json(const RunConfig& cfg) {
  json j;
  j["k_generations"] = cfg.k_generations;
  j["games_per_cluster"] = cfg.games_per_cluster;
  j["num_generators"] = cfg.num_generators;
  j["num_validators"] = cfg.num_validators;
  j["num_tests"] = cfg.num_tests;
  j["validator_threshold"] = cfg.validator_threshold;
  j["max_tokens"] = cfg.max_tokens;
  j["rng_seed"] = cfg.rng_seed;
  j["strategy"] = cfg.strategy;
  j["score_at_k_runs"] = cfg.score_at_k_runs;
  j["workers"] = cfg.workers;
  j["stdout_cap_bytes"] = cfg.stdout_cap_bytes;
  j["scratch_dir"] = cfg.scratch_dir;
  j["backend"] = cfg.backend;
  j["mock_script"] = cfg.mock_script;
  j["base_url"] = cfg.base_url;
  j["model"] = cfg.model;
  j["temperature"] = cfg.temperature;
  j["gold_threshold"] = cfg.gold_threshold;
  j["silver_threshold"] = cfg.silver_threshold;
  j["bronze_threshold"] = cfg.bronze_threshold;
  return j;
}

}  // namespace gencluster
