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

#include "gencluster/submission.hpp"

#include <algorithm>
#include <deque>

#include "gencluster/error.hpp"

namespace gencluster {

namespace {

constexpr double kScoreEpsilon = 1e-9;

/// Per-subtask iteration state shared by both planners.
struct SubtaskQueue {
  std::string subtask_id;
  double max_score = 0.0;
  bool solved = false;
  // Round-robin lanes: one deque per cluster in ranked order. Flat plans use
  // a single lane.
  std::vector<std::string> lane_ids;  // cluster_id per lane ("" for flat)
  std::vector<std::deque<std::string>> lanes;
  std::size_t cursor = 0;

  bool exhausted() const {
    for (const auto& lane : lanes)
      if (!lane.empty()) return false;
    return true;
  }

  std::optional<std::pair<std::string, std::string>> pop() {  // (cluster_id, candidate_id)
    if (lanes.empty()) return std::nullopt;
    for (std::size_t step = 0; step < lanes.size(); step++) {
      std::size_t lane = (cursor + step) % lanes.size();
      if (!lanes[lane].empty()) {
        std::string candidate = lanes[lane].front();
        lanes[lane].pop_front();
        cursor = lane + 1;
        return std::make_pair(lane_ids[lane], candidate);
      }
    }
    return std::nullopt;
  }
};

class QueuePlanner : public SubmissionPlanner {
 public:
  QueuePlanner(std::string problem_id, std::vector<SubtaskQueue> queues, int cap)
      : problem_id_(std::move(problem_id)), queues_(std::move(queues)), cap_(cap) {
    if (cap_ <= 0) raise(ErrorKind::Validation, "submission cap must be > 0");
  }

  std::optional<PlanEntry> next() override {
    if (emitted_ >= cap_) return std::nullopt;
    while (active_ < queues_.size()) {
      SubtaskQueue& q = queues_[active_];
      if (q.solved || q.exhausted()) {
        active_++;
        continue;
      }
      auto popped = q.pop();
      if (!popped) {
        active_++;
        continue;
      }
      emitted_++;
      PlanEntry entry;
      entry.subtask_id = q.subtask_id;
      entry.cluster_id = popped->first;
      entry.candidate_id = popped->second;
      return entry;
    }
    return std::nullopt;
  }

  void feed_score(const PlanEntry& entry, double score) override {
    for (auto& q : queues_) {
      if (q.subtask_id == entry.subtask_id && score + kScoreEpsilon >= q.max_score) q.solved = true;
    }
  }

  const std::string& problem_id() const override { return problem_id_; }
  int cap() const override { return cap_; }

 private:
  std::string problem_id_;
  std::vector<SubtaskQueue> queues_;  // final subtask first
  int cap_;
  std::size_t active_ = 0;
  int emitted_ = 0;
};

std::vector<const Subtask*> subtasks_final_first(const ProblemPack& problem) {
  std::vector<const Subtask*> order;
  for (const auto& st : problem.subtasks) order.push_back(&st);
  std::sort(order.begin(), order.end(),
            [](const Subtask* a, const Subtask* b) { return a->index > b->index; });
  return order;
}

}  // namespace

std::unique_ptr<SubmissionPlanner> plan_round_robin(
    const ProblemPack& problem, const std::map<std::string, ClusterRanking>& rankings,
    const std::map<std::string, std::vector<Cluster>>& clusters_per_subtask, int cap) {
  std::vector<SubtaskQueue> queues;
  for (const Subtask* st : subtasks_final_first(problem)) {
    SubtaskQueue q;
    q.subtask_id = st->subtask_id;
    q.max_score = st->max_score;
    auto ranking_it = rankings.find(st->subtask_id);
    auto clusters_it = clusters_per_subtask.find(st->subtask_id);
    if (ranking_it != rankings.end() && clusters_it != clusters_per_subtask.end()) {
      std::map<std::string, const Cluster*> by_id;
      for (const auto& cluster : clusters_it->second) by_id[cluster.cluster_id] = &cluster;
      for (const auto& cluster_id : ranking_it->second.ordered_cluster_ids) {
        auto it = by_id.find(cluster_id);
        if (it == by_id.end()) continue;  // ranked id without a surviving cluster
        q.lane_ids.push_back(cluster_id);
        q.lanes.emplace_back(it->second->member_ids.begin(), it->second->member_ids.end());
      }
    }
    queues.push_back(std::move(q));
  }
  return std::make_unique<QueuePlanner>(problem.problem_id, std::move(queues), cap);
}

std::unique_ptr<SubmissionPlanner> plan_flat(
    const ProblemPack& problem,
    const std::map<std::string, std::vector<std::string>>& ordered_candidates, int cap) {
  std::vector<SubtaskQueue> queues;
  for (const Subtask* st : subtasks_final_first(problem)) {
    SubtaskQueue q;
    q.subtask_id = st->subtask_id;
    q.max_score = st->max_score;
    auto it = ordered_candidates.find(st->subtask_id);
    if (it != ordered_candidates.end() && !it->second.empty()) {
      q.lane_ids.push_back("");
      q.lanes.emplace_back(it->second.begin(), it->second.end());
    }
    queues.push_back(std::move(q));
  }
  return std::make_unique<QueuePlanner>(problem.problem_id, std::move(queues), cap);
}

ExecutedPlan execute_plan(SubmissionPlanner& planner, const GradeFn& grade_fn) {
  ExecutedPlan executed;
  executed.plan.problem_id = planner.problem_id();
  executed.plan.cap = planner.cap();
  executed.outcome.problem_id = planner.problem_id();

  while (auto entry = planner.next()) {
    double score = 0.0;
    try {
      score = grade_fn(*entry);
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::Environment) {
        executed.aborted_error = e.what();
        break;
      }
      throw;
    }
    entry->realized_score = score;
    planner.feed_score(*entry, score);
    executed.plan.entries.push_back(*entry);
    auto [it, inserted] = executed.outcome.per_subtask_best.try_emplace(entry->subtask_id, score);
    if (!inserted) it->second = std::max(it->second, score);
  }

  executed.outcome.submissions_used = static_cast<int>(executed.plan.entries.size());
  executed.outcome.total = 0.0;
  for (const auto& [subtask_id, best] : executed.outcome.per_subtask_best)
    executed.outcome.total += best;
  return executed;
}

}  // namespace gencluster
