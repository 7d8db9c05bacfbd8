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

#include <doctest.h>

#include "gencluster/config.hpp"
#include "gencluster/error.hpp"

using namespace gencluster;
using nlohmann::json;

TEST_CASE("empty config takes the documented defaults") {
  RunConfig cfg = parse_run_config(json::object());
  CHECK(cfg.games_per_cluster == 10);
  CHECK(cfg.validator_threshold == doctest::Approx(0.75));
  CHECK(cfg.num_tests == 100);
  CHECK(cfg.num_generators == 100);
  CHECK(cfg.num_validators == 100);
  CHECK(cfg.k_generations == 50);
  CHECK(cfg.strategy == "gencluster");
  CHECK(cfg.score_at_k_runs == 20);
}

TEST_CASE("threshold boundary 1.0 is accepted, 0 and >1 are not") {
  RunConfig cfg;
  cfg.validator_threshold = 1.0;
  CHECK_NOTHROW(validate_run_config(cfg));
  cfg.validator_threshold = 0.0;
  CHECK_THROWS_AS(validate_run_config(cfg), Error);
  cfg.validator_threshold = 1.5;
  CHECK_THROWS_AS(validate_run_config(cfg), Error);
}

TEST_CASE("zero counts are config errors, not defaults") {
  RunConfig cfg;
  cfg.k_generations = 0;
  try {
    validate_run_config(cfg);
    FAIL("expected a config error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Config);
    CHECK(std::string(e.what()).find("k_generations") != std::string::npos);
  }
}

TEST_CASE("unknown strategy or backend is rejected") {
  RunConfig cfg;
  cfg.strategy = "alphabetical";
  CHECK_THROWS_AS(validate_run_config(cfg), Error);
  cfg.strategy = "gencluster";
  cfg.backend = "fax";
  CHECK_THROWS_AS(validate_run_config(cfg), Error);
}

TEST_CASE("partial json overrides only the named keys") {
  RunConfig cfg = parse_run_config(json{{"games_per_cluster", 3}, {"rng_seed", 99}});
  CHECK(cfg.games_per_cluster == 3);
  CHECK(cfg.rng_seed == 99);
  CHECK(cfg.num_tests == 100);
}

TEST_CASE("config json round trip") {
  RunConfig cfg;
  cfg.k_generations = 7;
  cfg.strategy = "cluster_size";
  cfg.gold_threshold = 321.5;
  RunConfig back = parse_run_config(run_config_to_json(cfg));
  CHECK(back == cfg);
}
