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

#include "gencluster/metrics.hpp"

#include <algorithm>
#include <numeric>

#include "gencluster/error.hpp"

namespace gencluster {

double score_at_k(const std::map<std::string, std::vector<double>>& pool_scores, int k, int runs,
                  std::mt19937_64& rng) {
  if (k < 1) raise(ErrorKind::Metric, "k must be >= 1");
  if (runs < 1) raise(ErrorKind::Metric, "runs must be >= 1");
  for (const auto& [subtask_id, scores] : pool_scores) {
    if (static_cast<std::size_t>(k) > scores.size())
      raise(ErrorKind::Metric, "k=" + std::to_string(k) + " exceeds pool size " +
                                   std::to_string(scores.size()) + " for subtask " + subtask_id);
  }

  bool full_pool = true;
  for (const auto& [subtask_id, scores] : pool_scores)
    if (static_cast<std::size_t>(k) != scores.size()) full_pool = false;
  if (full_pool) {
    double total = 0.0;
    for (const auto& [subtask_id, scores] : pool_scores)
      total += *std::max_element(scores.begin(), scores.end());
    return total;
  }

  double run_sum = 0.0;
  for (int run = 0; run < runs; run++) {
    double total = 0.0;
    for (const auto& [subtask_id, scores] : pool_scores) {
      // Partial Fisher-Yates draw of k indices without replacement.
      std::vector<std::size_t> idx(scores.size());
      std::iota(idx.begin(), idx.end(), 0);
      double best = 0.0;
      for (int j = 0; j < k; j++) {
        std::uniform_int_distribution<std::size_t> pick(j, idx.size() - 1);
        std::swap(idx[j], idx[pick(rng)]);
        best = std::max(best, scores[idx[j]]);
      }
      total += best;
    }
    run_sum += total;
  }
  return run_sum / runs;
}

PurityReport purity_f1(const std::vector<Cluster>& clusters,
                       const std::map<std::string, bool>& labels) {
  PurityReport report;
  report.num_clusters = static_cast<int>(clusters.size());
  if (clusters.empty()) return report;

  long tp = 0, fp = 0, fn = 0;
  std::size_t member_total = 0;
  for (const auto& cluster : clusters) {
    std::size_t positives = 0;
    for (const auto& id : cluster.member_ids) {
      auto it = labels.find(id);
      if (it == labels.end())
        raise(ErrorKind::Metric, "unlabeled candidate in purity_f1: " + id);
      positives += it->second ? 1 : 0;
    }
    member_total += cluster.size();
    // Majority prediction; exact ties predict positive.
    const bool predicted = 2 * positives >= cluster.size();
    for (const auto& id : cluster.member_ids) {
      const bool truth = labels.at(id);
      if (predicted && truth) tp++;
      else if (predicted && !truth) fp++;
      else if (!predicted && truth) fn++;
    }
  }
  report.avg_cluster_size = static_cast<double>(member_total) / clusters.size();
  report.precision = tp + fp > 0 ? static_cast<double>(tp) / (tp + fp) : 0.0;
  report.recall = tp + fn > 0 ? static_cast<double>(tp) / (tp + fn) : 0.0;
  report.f1 = report.precision + report.recall > 0.0
                  ? 2.0 * report.precision * report.recall / (report.precision + report.recall)
                  : 0.0;
  return report;
}

TopKResult top_k_inclusion(const std::map<std::string, ClusterRanking>& rankings,
                           const std::map<std::string, std::string>& best_cluster_per_subtask,
                           int k) {
  if (k < 1) raise(ErrorKind::Metric, "k must be >= 1");
  TopKResult result;
  for (const auto& [subtask_id, best_cluster] : best_cluster_per_subtask) {
    auto it = rankings.find(subtask_id);
    if (it == rankings.end())
      raise(ErrorKind::Metric, "no ranking for subtask " + subtask_id);
    const auto& order = it->second.ordered_cluster_ids;
    bool included = false;
    for (std::size_t rank = 0; rank < order.size() && rank < static_cast<std::size_t>(k); rank++) {
      if (order[rank] == best_cluster) {
        included = true;
        break;
      }
    }
    result.per_subtask[subtask_id] = included;
    result.total++;
    if (included) result.included++;
  }
  result.fraction = result.total > 0 ? static_cast<double>(result.included) / result.total : 0.0;
  return result;
}

std::vector<ClusterStatsRow> cluster_stats(
    const std::map<std::string, std::vector<Candidate>>& candidates_per_subtask,
    const std::map<std::string, bool>& labels, const std::vector<int>& test_counts) {
  std::vector<ClusterStatsRow> rows;
  for (int t : test_counts) {
    if (t < 1) raise(ErrorKind::Metric, "test count must be >= 1");
    ClusterStatsRow row;
    row.num_tests = t;
    std::vector<Cluster> pooled;
    double size_sum = 0.0;
    double count_sum = 0.0;
    int subtasks = 0;
    for (const auto& [subtask_id, candidates] : candidates_per_subtask) {
      std::vector<Candidate> prefix = candidates;
      for (auto& cand : prefix) {
        if (cand.status != CandidateStatus::Ok) continue;
        if (cand.outputs.size() < static_cast<std::size_t>(t))
          raise(ErrorKind::Metric, "candidate " + cand.candidate_id + " has only " +
                                       std::to_string(cand.outputs.size()) + " outputs, need " +
                                       std::to_string(t));
        cand.outputs.resize(t);
      }
      std::vector<Cluster> clusters = cluster_by_behavior(prefix);
      subtasks++;
      count_sum += static_cast<double>(clusters.size());
      std::size_t members = 0;
      for (const auto& c : clusters) members += c.size();
      if (!clusters.empty()) size_sum += static_cast<double>(members) / clusters.size();
      for (auto& c : clusters) pooled.push_back(std::move(c));
    }
    row.avg_count = subtasks > 0 ? count_sum / subtasks : 0.0;
    row.avg_size = subtasks > 0 ? size_sum / subtasks : 0.0;
    row.f1 = purity_f1(pooled, labels).f1;
    rows.push_back(row);
  }
  return rows;
}

}  // namespace gencluster
