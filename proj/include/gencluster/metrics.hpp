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

#ifndef GENCLUSTER_METRICS_HPP
#define GENCLUSTER_METRICS_HPP

#include <map>
#include <random>
#include <string>
#include <vector>

#include "gencluster/clustering.hpp"
#include "gencluster/ranking.hpp"

namespace gencluster {

/// Expected best score from sampling k candidates per subtask without
/// replacement, averaged over `runs` draws. k == pool size is computed
/// exactly (no sampling variance). `pool_scores` maps each subtask to the
/// grades of its candidates.
double score_at_k(const std::map<std::string, std::vector<double>>& pool_scores, int k, int runs,
                  std::mt19937_64& rng);

struct PurityReport {
  double f1 = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double avg_cluster_size = 0.0;
  int num_clusters = 0;
};

/// Cluster purity against binary labels ("achieves the maximum achieved
/// grade for its subtask"). Each cluster predicts its majority label (exact
/// half-splits predict positive); members inherit the prediction; precision,
/// recall and F1 are computed over all clustered candidates.
PurityReport purity_f1(const std::vector<Cluster>& clusters,
                       const std::map<std::string, bool>& labels);

struct TopKResult {
  int included = 0;
  int total = 0;
  double fraction = 0.0;
  std::map<std::string, bool> per_subtask;
};

/// Whether each subtask's best cluster ranks within the top k.
TopKResult top_k_inclusion(const std::map<std::string, ClusterRanking>& rankings,
                           const std::map<std::string, std::string>& best_cluster_per_subtask,
                           int k);

struct ClusterStatsRow {
  int num_tests = 0;
  double avg_size = 0.0;
  double avg_count = 0.0;
  double f1 = 0.0;
};

/// Re-clusters every subtask's candidates on output-vector prefixes of the
/// given lengths and reports mean cluster size/count (across subtasks) plus
/// pooled purity per prefix length.
std::vector<ClusterStatsRow> cluster_stats(
    const std::map<std::string, std::vector<Candidate>>& candidates_per_subtask,
    const std::map<std::string, bool>& labels, const std::vector<int>& test_counts);

}  // namespace gencluster

#endif  // GENCLUSTER_METRICS_HPP
