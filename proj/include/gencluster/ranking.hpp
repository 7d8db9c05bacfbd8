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

#ifndef GENCLUSTER_RANKING_HPP
#define GENCLUSTER_RANKING_HPP

#include <map>
#include <random>
#include <string>
#include <vector>

#include "gencluster/clustering.hpp"
#include "gencluster/gateway.hpp"

namespace gencluster {

/// The seven ranking strategies. Random and Longest are non-clustering
/// baselines: the submission stage feeds them through flat plans.
enum class Strategy {
  Random,
  Longest,
  ClusterSize,
  ClusterMajority,
  GenCluster,
  GenClusterRandomRep,
  GenClusterScoreBased,
};

Strategy strategy_from_name(std::string_view name);
std::string_view strategy_name(Strategy strategy);
bool strategy_uses_clusters(Strategy strategy);

struct GameRecord {
  int round = 0;  // slot within the initiator's schedule
  std::string initiator_id;
  std::string opponent_id;
  bool initiator_shown_first = false;
  bool cached = false;  // verdict reused from an identical presentation
  JudgeVerdict verdict;
};

struct ClusterRanking {
  std::string subtask_id;
  std::vector<std::string> ordered_cluster_ids;
  /// Tournament wins (draws count 0.5 each). For cluster_majority this map
  /// carries the vote weights instead.
  std::map<std::string, double> per_cluster_wins;
  /// Mean judge score over parsed games, in [0,10].
  std::map<std::string, double> per_cluster_avg_score;
  std::vector<GameRecord> game_log;
};

/// Partial round-robin tournament. Every cluster initiates exactly g_n games
/// against opponents drawn without replacement per scheduling pass; each
/// game updates both participants (winner +1, draws +0.5 each). Judgments
/// are cached per presentation-ordered pair; a pair shown in the other order
/// is a fresh call. Final order: wins desc, then avg judge score, then
/// cluster size, then cluster_id. Clusters' wins/games_played are updated in
/// place.
ClusterRanking run_tournament(std::vector<Cluster>& clusters,
                              const std::map<std::string, std::string>& representative_sources,
                              const OrderedJudge& judge, int g_n, std::mt19937_64& rng);

/// Dispatches to one of the seven strategies. `candidates` supplies
/// reasoning lengths, sources, and outputs; the judge and g_n are used by
/// the tournament strategies only.
ClusterRanking rank_with_strategy(Strategy strategy, std::vector<Cluster>& clusters,
                                  const std::vector<Candidate>& candidates,
                                  const OrderedJudge& judge, int g_n, std::mt19937_64& rng);

}  // namespace gencluster

#endif  // GENCLUSTER_RANKING_HPP
