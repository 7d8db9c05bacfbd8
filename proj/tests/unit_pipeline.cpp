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
#include <unistd.h>

#include <json.hpp>

#include "gencluster/error.hpp"
#include "gencluster/pipeline.hpp"
#include "gencluster/problem.hpp"
#include "gencluster/util.hpp"
#include "support/fixtures.hpp"

using namespace gencluster;
using nlohmann::json;

namespace {

fs::path fresh_dir(const std::string& name) {
  fs::path dir = fs::temp_directory_path() /
                 ("gencluster-pipe-" + name + "-" + std::to_string(::getpid()));
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

/// One-problem, one-subtask pack whose sum solutions are graded 0/100.
fs::path tiny_pack(const std::string& name) {
  ProblemPack pack;
  pack.problem_id = "tiny";
  pack.title = "Tiny";
  Subtask st = fixtures::make_subtask("s1");
  st.index = 1;
  st.official_tests = {"1 2\n", "4 4\n"};
  pack.subtasks.push_back(st);
  fs::path dir = fresh_dir(name);
  write_problem_pack(pack, dir);
  return dir;
}

json tiny_script() {
  auto fenced = [](const char* source) {
    return std::string("thinking...\n```cpp\n") + source + "\n```";
  };
  json sections;
  sections["solution"] = json::array({
      json{{"answer", fenced(fixtures::kSumSolution)}, {"reasoning_tokens", 50}},
      json{{"answer", fenced(fixtures::kWrongSumSolution)}, {"reasoning_tokens", 90}},
      json{{"answer", fenced(fixtures::kSumSolution)}, {"reasoning_tokens", 20}},
  });
  sections["test_generator"] = json::array({fenced(R"(#include <cstdio>
#include <cstdlib>
int main(int argc, char** argv) {
    unsigned long long s = argc > 1 ? std::strtoull(argv[1], nullptr, 10) : 5;
    if (s == 0) s = 5;
    s ^= s << 13; s ^= s >> 7; s ^= s << 17;
    std::printf("%llu %llu\n", s % 97 + 1, (s >> 7) % 97 + 1);
    return 0;
}
)")});
  sections["validator"] = json::array({fenced(fixtures::kPassValidator)});
  sections["selection"] = json::array({"Score A: 7\nScore B: 3\nJudgment: [A]"});
  return json{{"sections", sections}};
}

RunConfig tiny_config() {
  RunConfig cfg;
  cfg.k_generations = 3;
  cfg.games_per_cluster = 2;
  cfg.num_generators = 1;
  cfg.num_validators = 1;
  cfg.num_tests = 3;
  cfg.max_tokens = 512;
  cfg.rng_seed = 77;
  cfg.workers = 2;
  return cfg;
}

std::map<std::string, std::string> tree_digest(const fs::path& root) {
  std::map<std::string, std::string> digests;
  for (const auto& entry : fs::recursive_directory_iterator(root)) {
    if (!entry.is_regular_file()) continue;
    digests[fs::relative(entry.path(), root).generic_string()] =
        digest_bytes(read_file(entry.path())).hex();
  }
  return digests;
}

}  // namespace

TEST_CASE("the generate stage persists candidates and marks itself done") {
  fs::path pack = tiny_pack("gen");
  fs::path run = fresh_dir("gen-run");
  auto backend = std::make_shared<MockBackend>(tiny_script());
  Pipeline pipeline(run, pack, tiny_config(), backend);
  pipeline.run_stage(Stage::Generate);
  CHECK(pipeline.manifest().stage_status.at("generate") == "done");
  const std::string rel = pipeline.manifest().artifact_paths.at("generate");
  json doc = json::parse(read_file(run / rel));
  CHECK(doc.at("problems").size() == 1);
  CHECK(doc.at("problems")[0].at("subtasks")[0].at("candidates").size() == 3);
}

TEST_CASE("running rank before cluster is an ordering error") {
  fs::path pack = tiny_pack("order");
  fs::path run = fresh_dir("order-run");
  auto backend = std::make_shared<MockBackend>(tiny_script());
  Pipeline pipeline(run, pack, tiny_config(), backend);
  // On a fresh run the earliest unmet stage is named.
  try {
    pipeline.run_stage(Stage::Rank);
    FAIL("expected ordering error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Ordering);
    CHECK(std::string(e.what()).find("generate") != std::string::npos);
  }
  // With generate and testgen done, the missing dependency is cluster.
  pipeline.run_stage(Stage::Generate);
  pipeline.run_stage(Stage::TestGen);
  try {
    pipeline.run_stage(Stage::Rank);
    FAIL("expected ordering error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Ordering);
    CHECK(std::string(e.what()).find("cluster") != std::string::npos);
  }
}

TEST_CASE("a done stage is a no-op unless forced") {
  fs::path pack = tiny_pack("noop");
  fs::path run = fresh_dir("noop-run");
  auto backend = std::make_shared<MockBackend>(tiny_script());
  Pipeline pipeline(run, pack, tiny_config(), backend);
  pipeline.run_stage(Stage::Generate);
  const std::uint64_t calls_after_first = backend->calls();
  pipeline.run_stage(Stage::Generate);
  CHECK(backend->calls() == calls_after_first);
  pipeline.run_stage(Stage::Generate, /*force=*/true);
  CHECK(backend->calls() == 2 * calls_after_first);
}

TEST_CASE("a failing stage is recorded in the manifest with diagnostics") {
  fs::path pack = tiny_pack("fail");
  fs::path run = fresh_dir("fail-run");
  // No sections and no default: the mock raises a config error.
  auto backend = std::make_shared<MockBackend>(json{{"sections", json::object()}});
  Pipeline pipeline(run, pack, tiny_config(), backend);
  CHECK_THROWS_AS(pipeline.run_stage(Stage::Generate), Error);
  json manifest = json::parse(read_file(run / "manifest.json"));
  CHECK(manifest.at("stage_status").at("generate") == "failed");
  CHECK(manifest.at("stage_errors").at("generate").get<std::string>().find("mock script") !=
        std::string::npos);
}

TEST_CASE("full pipeline on the tiny pack produces a report with the right totals") {
  fs::path pack = tiny_pack("full");
  fs::path run = fresh_dir("full-run");
  auto backend = std::make_shared<MockBackend>(tiny_script());
  Pipeline pipeline(run, pack, tiny_config(), backend);
  pipeline.run_all();
  for (Stage s : all_stages())
    CHECK(pipeline.manifest().stage_status.at(std::string(stage_name(s))) == "done");

  json report = json::parse(read_file(run / pipeline.manifest().artifact_paths.at("report")));
  CHECK(report.at("totals").at("grand_total").get<double>() == doctest::Approx(100.0));
  CHECK(fs::exists(run / "report.txt"));
  CHECK(fs::exists(run / "report.tsv"));
  CHECK(pipeline.report_text().find("100.00") != std::string::npos);
}

TEST_CASE("stage-by-stage resumption matches a one-shot run byte for byte") {
  fs::path pack = tiny_pack("resume");
  fs::path run_a = fresh_dir("resume-oneshot");
  fs::path run_b = fresh_dir("resume-steps");

  {
    auto backend = std::make_shared<MockBackend>(tiny_script());
    Pipeline pipeline(run_a, pack, tiny_config(), backend);
    pipeline.run_all();
  }
  // Fresh Pipeline object per stage simulates kill + re-invoke.
  for (Stage s : all_stages()) {
    auto backend = std::make_shared<MockBackend>(tiny_script());
    Pipeline pipeline(run_b, pack, tiny_config(), backend);
    pipeline.run_stage(s);
  }
  CHECK(tree_digest(run_a) == tree_digest(run_b));
}

TEST_CASE("reopening a run dir with a different config is refused") {
  fs::path pack = tiny_pack("reopen");
  fs::path run = fresh_dir("reopen-run");
  auto backend = std::make_shared<MockBackend>(tiny_script());
  Pipeline pipeline(run, pack, tiny_config(), backend);
  pipeline.run_stage(Stage::Generate);

  RunConfig other = tiny_config();
  other.rng_seed = 78;
  CHECK_THROWS_AS(Pipeline(run, pack, other, backend), Error);
}

TEST_CASE("sweeps reuse artifacts and reject values beyond the pool") {
  fs::path pack = tiny_pack("sweep");
  fs::path run = fresh_dir("sweep-run");
  auto backend = std::make_shared<MockBackend>(tiny_script());
  Pipeline pipeline(run, pack, tiny_config(), backend);
  pipeline.run_all();

  SUBCASE("k sweep emits one row per value") {
    auto rows = pipeline.sweep("k", {1, 2});
    REQUIRE(rows.size() == 2);
    CHECK(rows[0][0] == doctest::Approx(1.0));
    CHECK(rows[1][0] == doctest::Approx(2.0));
    CHECK(rows[1][1] >= rows[0][1]);  // more samples cannot hurt the best
    CHECK(fs::exists(run / "sweep_k.tsv"));
    CHECK_THROWS_AS(pipeline.sweep("k", {99}), Error);
  }
  SUBCASE("g_n sweep re-ranks the same clusters") {
    auto rows = pipeline.sweep("g_n", {1, 2});
    REQUIRE(rows.size() == 2);
    // The pool contains a correct solution and the cap is large, so any
    // ranking reaches the solve.
    CHECK(rows[0][1] == doctest::Approx(100.0));
    CHECK(rows[1][1] == doctest::Approx(100.0));
  }
  SUBCASE("num_tests sweep reuses execution-matrix prefixes") {
    auto rows = pipeline.sweep("num_tests", {1, 3});
    REQUIRE(rows.size() == 2);
    CHECK(rows[0][0] == doctest::Approx(1.0));
    CHECK(rows[1][2] >= rows[0][2]);  // cluster count cannot drop with more tests
    CHECK_THROWS_AS(pipeline.sweep("num_tests", {50}), Error);
  }
  SUBCASE("unknown parameter is a sweep error") {
    CHECK_THROWS_AS(pipeline.sweep("temperature", {1}), Error);
  }
}

TEST_CASE("stage names round trip") {
  for (Stage s : all_stages()) CHECK(stage_from_name(stage_name(s)) == s);
  CHECK_THROWS_AS(stage_from_name("deploy"), Error);
}
