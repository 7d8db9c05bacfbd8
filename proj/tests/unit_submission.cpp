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

#include <set>

#include "gencluster/error.hpp"
#include "gencluster/submission.hpp"
#include "support/fixtures.hpp"

using namespace gencluster;

namespace {

/// One-subtask problem with clusters A (2 members) and B (1 member).
struct RoundRobinFixture {
  ProblemPack problem;
  std::map<std::string, ClusterRanking> rankings;
  std::map<std::string, std::vector<Cluster>> clusters;

  explicit RoundRobinFixture(int cap = 50) {
    problem.problem_id = "prob";
    problem.title = "Prob";
    problem.submission_cap = cap;
    Subtask st = fixtures::make_subtask("s1");
    st.index = 1;
    problem.subtasks.push_back(st);

    Cluster a;
    a.cluster_id = "A";
    a.subtask_id = "s1";
    a.member_ids = {"a1", "a2"};  // reasoning-descending by construction
    a.representative_id = "a1";
    Cluster b;
    b.cluster_id = "B";
    b.subtask_id = "s1";
    b.member_ids = {"b1"};
    b.representative_id = "b1";
    clusters["s1"] = {a, b};

    ClusterRanking ranking;
    ranking.subtask_id = "s1";
    ranking.ordered_cluster_ids = {"A", "B"};
    rankings["s1"] = ranking;
  }
};

ProblemPack three_subtask_problem(int cap = 50) {
  ProblemPack problem;
  problem.problem_id = "multi";
  problem.title = "Multi";
  problem.submission_cap = cap;
  for (int i = 1; i <= 3; i++) {
    Subtask st = fixtures::make_subtask("s" + std::to_string(i));
    st.index = i;
    st.max_score = i == 3 ? 40.0 : 30.0;
    problem.subtasks.push_back(st);
  }
  return problem;
}

GradeFn zero_grader() {
  return [](const PlanEntry&) { return 0.0; };
}

}  // namespace

TEST_CASE("round robin emits A1, B1, A2 for clusters of sizes {2,1}") {
  RoundRobinFixture fx;
  auto planner = plan_round_robin(fx.problem, fx.rankings, fx.clusters, fx.problem.submission_cap);
  ExecutedPlan executed = execute_plan(*planner, zero_grader());
  REQUIRE(executed.plan.entries.size() == 3);
  CHECK(executed.plan.entries[0].candidate_id == "a1");
  CHECK(executed.plan.entries[1].candidate_id == "b1");
  CHECK(executed.plan.entries[2].candidate_id == "a2");
  CHECK(executed.plan.entries[0].cluster_id == "A");
  CHECK(executed.plan.entries[1].cluster_id == "B");
  CHECK(executed.outcome.submissions_used == 3);
  CHECK(executed.outcome.total == doctest::Approx(0.0));
}

TEST_CASE("a solve on the first submission skips the remaining clusters") {
  RoundRobinFixture fx;
  auto planner = plan_round_robin(fx.problem, fx.rankings, fx.clusters, fx.problem.submission_cap);
  GradeFn solver = [](const PlanEntry&) { return 100.0; };
  ExecutedPlan executed = execute_plan(*planner, solver);
  CHECK(executed.plan.entries.size() == 1);
  CHECK(executed.outcome.per_subtask_best.at("s1") == doctest::Approx(100.0));
  CHECK(executed.outcome.total == doctest::Approx(100.0));
}

TEST_CASE("the cap stops planning at exactly cap entries") {
  ProblemPack problem;
  problem.problem_id = "capped";
  problem.title = "Capped";
  problem.submission_cap = 50;
  Subtask st = fixtures::make_subtask("s1");
  problem.subtasks.push_back(st);

  // 60 singleton clusters.
  std::map<std::string, std::vector<Cluster>> clusters;
  ClusterRanking ranking;
  ranking.subtask_id = "s1";
  for (int i = 0; i < 60; i++) {
    Cluster c;
    char id[8];
    std::snprintf(id, sizeof(id), "K%02d", i);
    c.cluster_id = id;
    c.subtask_id = "s1";
    c.member_ids = {std::string(id) + "-m"};
    c.representative_id = c.member_ids.front();
    clusters["s1"].push_back(c);
    ranking.ordered_cluster_ids.push_back(id);
  }
  std::map<std::string, ClusterRanking> rankings{{"s1", ranking}};
  auto planner = plan_round_robin(problem, rankings, clusters, problem.submission_cap);
  ExecutedPlan executed = execute_plan(*planner, zero_grader());
  CHECK(executed.plan.entries.size() == 50);
  CHECK(executed.outcome.submissions_used == 50);
}

TEST_CASE("planning starts at the final subtask and solving it moves planning down") {
  ProblemPack problem = three_subtask_problem();
  std::map<std::string, std::vector<Cluster>> clusters;
  std::map<std::string, ClusterRanking> rankings;
  for (const auto& st : problem.subtasks) {
    for (int c = 0; c < 3; c++) {
      Cluster cl;
      cl.cluster_id = st.subtask_id + "-c" + std::to_string(c);
      cl.subtask_id = st.subtask_id;
      cl.member_ids = {cl.cluster_id + "-m"};
      cl.representative_id = cl.member_ids.front();
      clusters[st.subtask_id].push_back(cl);
      rankings[st.subtask_id].ordered_cluster_ids.push_back(cl.cluster_id);
    }
    rankings[st.subtask_id].subtask_id = st.subtask_id;
  }

  // The third graded entry solves s3; everything after must target s2 then s1.
  int calls = 0;
  GradeFn script = [&calls](const PlanEntry& entry) {
    calls++;
    if (calls == 3 && entry.subtask_id == "s3") return 40.0;
    return 0.0;
  };
  auto planner = plan_round_robin(problem, rankings, clusters, problem.submission_cap);
  ExecutedPlan executed = execute_plan(*planner, script);
  REQUIRE(executed.plan.entries.size() == 9);
  CHECK(executed.plan.entries[0].subtask_id == "s3");
  CHECK(executed.plan.entries[2].subtask_id == "s3");
  for (std::size_t i = 3; i < executed.plan.entries.size(); i++)
    CHECK(executed.plan.entries[i].subtask_id != "s3");
  CHECK(executed.outcome.per_subtask_best.at("s3") == doctest::Approx(40.0));
}

TEST_CASE("exhausting a subtask without a solve falls through to the next lower one") {
  ProblemPack problem = three_subtask_problem();
  std::map<std::string, std::vector<Cluster>> clusters;
  std::map<std::string, ClusterRanking> rankings;
  // Only s3 and s1 have candidates; s3 has a single loser.
  for (const char* sid : {"s3", "s1"}) {
    Cluster cl;
    cl.cluster_id = std::string(sid) + "-only";
    cl.subtask_id = sid;
    cl.member_ids = {cl.cluster_id + "-m"};
    cl.representative_id = cl.member_ids.front();
    clusters[sid].push_back(cl);
    rankings[sid].subtask_id = sid;
    rankings[sid].ordered_cluster_ids.push_back(cl.cluster_id);
  }
  auto planner = plan_round_robin(problem, rankings, clusters, problem.submission_cap);
  ExecutedPlan executed = execute_plan(*planner, zero_grader());
  REQUIRE(executed.plan.entries.size() == 2);
  CHECK(executed.plan.entries[0].subtask_id == "s3");
  CHECK(executed.plan.entries[1].subtask_id == "s1");
}

TEST_CASE("an empty ranking yields an empty plan") {
  ProblemPack problem = three_subtask_problem();
  auto planner = plan_round_robin(problem, {}, {}, problem.submission_cap);
  ExecutedPlan executed = execute_plan(*planner, zero_grader());
  CHECK(executed.plan.entries.empty());
  CHECK(executed.outcome.total == doctest::Approx(0.0));
  CHECK(executed.outcome.submissions_used == 0);
}

TEST_CASE("all-zero grading uses min(cap, available) submissions") {
  RoundRobinFixture fx(2);
  auto planner = plan_round_robin(fx.problem, fx.rankings, fx.clusters, 2);
  ExecutedPlan executed = execute_plan(*planner, zero_grader());
  CHECK(executed.outcome.submissions_used == 2);

  RoundRobinFixture fx2(50);
  auto planner2 = plan_round_robin(fx2.problem, fx2.rankings, fx2.clusters, 50);
  CHECK(execute_plan(*planner2, zero_grader()).outcome.submissions_used == 3);
}

TEST_CASE("flat plans honor ordering, budget and the subtask-order discipline") {
  ProblemPack problem = three_subtask_problem(4);
  std::map<std::string, std::vector<std::string>> ordered;
  ordered["s1"] = {"s1-a", "s1-b"};
  ordered["s2"] = {"s2-a"};
  ordered["s3"] = {"s3-a", "s3-b", "s3-c"};
  auto planner = plan_flat(problem, ordered, 4);
  ExecutedPlan executed = execute_plan(*planner, zero_grader());
  REQUIRE(executed.plan.entries.size() == 4);
  CHECK(executed.plan.entries[0].candidate_id == "s3-a");
  CHECK(executed.plan.entries[1].candidate_id == "s3-b");
  CHECK(executed.plan.entries[2].candidate_id == "s3-c");
  CHECK(executed.plan.entries[3].candidate_id == "s2-a");
  for (const auto& entry : executed.plan.entries) CHECK(entry.cluster_id.empty());
}

TEST_CASE("plan totals are monotone in the cap (prefix property)") {
  // Deterministic grade script keyed by candidate id.
  auto grade_of = [](const PlanEntry& entry) {
    return entry.candidate_id == "a2" ? 60.0 : entry.candidate_id == "b1" ? 30.0 : 0.0;
  };
  double last_total = -1.0;
  for (int cap = 1; cap <= 4; cap++) {
    RoundRobinFixture fx(cap);
    auto planner = plan_round_robin(fx.problem, fx.rankings, fx.clusters, cap);
    ExecutedPlan executed = execute_plan(*planner, grade_of);
    CHECK(executed.outcome.total >= last_total);
    last_total = executed.outcome.total;
  }
}

TEST_CASE("after a subtask reaches max_score nothing later targets it") {
  ProblemPack problem = three_subtask_problem();
  std::map<std::string, std::vector<Cluster>> clusters;
  std::map<std::string, ClusterRanking> rankings;
  for (const auto& st : problem.subtasks) {
    for (int c = 0; c < 2; c++) {
      Cluster cl;
      cl.cluster_id = st.subtask_id + "-c" + std::to_string(c);
      cl.subtask_id = st.subtask_id;
      cl.member_ids = {cl.cluster_id + "-m0", cl.cluster_id + "-m1"};
      cl.representative_id = cl.member_ids.front();
      clusters[st.subtask_id].push_back(cl);
      rankings[st.subtask_id].ordered_cluster_ids.push_back(cl.cluster_id);
    }
    rankings[st.subtask_id].subtask_id = st.subtask_id;
  }
  std::set<std::string> solved;
  GradeFn grader = [&](const PlanEntry& entry) {
    CHECK(!solved.count(entry.subtask_id));
    if (entry.candidate_id.ends_with("c0-m1")) {
      solved.insert(entry.subtask_id);
      return entry.subtask_id == "s3" ? 40.0 : 30.0;
    }
    return 0.0;
  };
  auto planner = plan_round_robin(problem, rankings, clusters, problem.submission_cap);
  ExecutedPlan executed = execute_plan(*planner, grader);
  CHECK(executed.outcome.total == doctest::Approx(100.0));
  CHECK(solved.size() == 3);
}

TEST_CASE("no duplicate candidate is ever planned for a subtask") {
  RoundRobinFixture fx;
  auto planner = plan_round_robin(fx.problem, fx.rankings, fx.clusters, fx.problem.submission_cap);
  std::set<std::string> seen;
  ExecutedPlan executed = execute_plan(*planner, zero_grader());
  for (const auto& entry : executed.plan.entries)
    CHECK(seen.insert(entry.subtask_id + "/" + entry.candidate_id).second);
}

TEST_CASE("ranked ids without surviving clusters are skipped") {
  RoundRobinFixture fx;
  fx.rankings["s1"].ordered_cluster_ids = {"GHOST", "A", "B"};
  auto planner = plan_round_robin(fx.problem, fx.rankings, fx.clusters, 50);
  ExecutedPlan executed = execute_plan(*planner, zero_grader());
  CHECK(executed.plan.entries.size() == 3);
  for (const auto& entry : executed.plan.entries) CHECK(entry.cluster_id != "GHOST");
}

TEST_CASE("a grader environment error aborts with the partial outcome preserved") {
  RoundRobinFixture fx;
  int calls = 0;
  GradeFn flaky = [&calls](const PlanEntry&) -> double {
    if (++calls == 2) raise(ErrorKind::Environment, "grader host went away");
    return 10.0;
  };
  auto planner = plan_round_robin(fx.problem, fx.rankings, fx.clusters, 50);
  ExecutedPlan executed = execute_plan(*planner, flaky);
  REQUIRE(executed.aborted_error.has_value());
  CHECK(executed.plan.entries.size() == 1);
  CHECK(executed.outcome.per_subtask_best.at("s1") == doctest::Approx(10.0));
}
