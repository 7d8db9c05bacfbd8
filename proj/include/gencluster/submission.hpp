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

#ifndef GENCLUSTER_SUBMISSION_HPP
#define GENCLUSTER_SUBMISSION_HPP

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "gencluster/clustering.hpp"
#include "gencluster/problem.hpp"
#include "gencluster/ranking.hpp"

namespace gencluster {

struct PlanEntry {
  std::string subtask_id;
  std::string cluster_id;  // empty for flat (non-clustering) plans
  std::string candidate_id;
  double realized_score = -1.0;  // filled by execute_plan
};

struct SubmissionPlan {
  std::string problem_id;
  int cap = 50;
  std::vector<PlanEntry> entries;  // grading order; length <= cap
};

struct ProblemOutcome {
  std::string problem_id;
  std::map<std::string, double> per_subtask_best;
  double total = 0.0;
  int submissions_used = 0;
};

/// Lazy submission planner: entries are produced one at a time and grading
/// results are fed back, so skip-on-solved is reactive.
class SubmissionPlanner {
 public:
  virtual ~SubmissionPlanner() = default;
  virtual std::optional<PlanEntry> next() = 0;
  virtual void feed_score(const PlanEntry& entry, double score) = 0;
  virtual const std::string& problem_id() const = 0;
  virtual int cap() const = 0;
};

/// The round-robin policy: subtasks from the highest index down; within the
/// active subtask, clusters in ranked order, one solution per cluster per
/// pass, members in reasoning-length-descending order. A subtask reaching
/// max_score skips its remaining clusters; an exhausted subtask falls
/// through to the next lower one.
std::unique_ptr<SubmissionPlanner> plan_round_robin(
    const ProblemPack& problem, const std::map<std::string, ClusterRanking>& rankings,
    const std::map<std::string, std::vector<Cluster>>& clusters_per_subtask, int cap);

/// Flat plans for the non-clustering baselines: same subtask-order and budget
/// discipline, candidates taken from the given per-subtask ordered lists.
std::unique_ptr<SubmissionPlanner> plan_flat(
    const ProblemPack& problem,
    const std::map<std::string, std::vector<std::string>>& ordered_candidates, int cap);

using GradeFn = std::function<double(const PlanEntry& entry)>;

struct ExecutedPlan {
  SubmissionPlan plan;
  ProblemOutcome outcome;
  /// Set when the grader raised an environment error; the plan and outcome
  /// hold everything graded before the abort.
  std::optional<std::string> aborted_error;
};

/// Grades entries in order, feeding each score back into the planner, and
/// aggregates per-subtask maxima.
ExecutedPlan execute_plan(SubmissionPlanner& planner, const GradeFn& grade_fn);

}  // namespace gencluster

#endif  // GENCLUSTER_SUBMISSION_HPP
