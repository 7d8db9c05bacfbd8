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

#include "gencluster/ranking.hpp"

#include <algorithm>
#include <tuple>

#include "gencluster/error.hpp"

namespace gencluster {

Strategy strategy_from_name(std::string_view name) {
  if (name == "random") return Strategy::Random;
  if (name == "longest") return Strategy::Longest;
  if (name == "cluster_size") return Strategy::ClusterSize;
  if (name == "cluster_majority") return Strategy::ClusterMajority;
  if (name == "gencluster") return Strategy::GenCluster;
  if (name == "gencluster_random_rep") return Strategy::GenClusterRandomRep;
  if (name == "gencluster_score_based") return Strategy::GenClusterScoreBased;
  raise(ErrorKind::Config, "unknown strategy: '" + std::string(name) + "'");
}

std::string_view strategy_name(Strategy strategy) {
  switch (strategy) {
    case Strategy::Random: return "random";
    case Strategy::Longest: return "longest";
    case Strategy::ClusterSize: return "cluster_size";
    case Strategy::ClusterMajority: return "cluster_majority";
    case Strategy::GenCluster: return "gencluster";
    case Strategy::GenClusterRandomRep: return "gencluster_random_rep";
    case Strategy::GenClusterScoreBased: return "gencluster_score_based";
  }
  return "unknown";
}

bool strategy_uses_clusters(Strategy strategy) {
  return strategy != Strategy::Random && strategy != Strategy::Longest;
}

namespace {

struct Tally {
  double wins = 0.0;
  int games = 0;
  double score_sum = 0.0;
  int scored_games = 0;
};

/// Shared final ordering: primary key first, then the tie-break chain
/// avg score -> size -> cluster_id.
std::vector<std::string> order_clusters(const std::vector<Cluster>& clusters,
                                        const std::map<std::string, double>& primary,
                                        const std::map<std::string, double>& avg_score,
                                        bool score_primary) {
  std::map<std::string, std::size_t> sizes;
  for (const auto& c : clusters) sizes[c.cluster_id] = c.size();
  auto value = [](const std::map<std::string, double>& m, const std::string& id) {
    auto it = m.find(id);
    return it == m.end() ? 0.0 : it->second;
  };
  std::vector<std::string> ids;
  ids.reserve(clusters.size());
  for (const auto& c : clusters) ids.push_back(c.cluster_id);
  std::sort(ids.begin(), ids.end(), [&](const std::string& a, const std::string& b) {
    const double pa = value(primary, a), pb = value(primary, b);
    const double sa = value(avg_score, a), sb = value(avg_score, b);
    auto key_a = score_primary ? std::make_tuple(sa, pa, sizes[a]) : std::make_tuple(pa, sa, sizes[a]);
    auto key_b = score_primary ? std::make_tuple(sb, pb, sizes[b]) : std::make_tuple(pb, sb, sizes[b]);
    if (key_a != key_b) return key_a > key_b;
    return a < b;
  });
  return ids;
}

struct TournamentResult {
  std::map<std::string, Tally> tallies;
  std::vector<GameRecord> game_log;
};

TournamentResult play_games(std::vector<Cluster>& clusters,
                            const std::map<std::string, std::string>& representative_sources,
                            const OrderedJudge& judge, int g_n, std::mt19937_64& rng) {
  const std::size_t n = clusters.size();
  TournamentResult result;
  for (const auto& c : clusters) result.tallies[c.cluster_id];

  if (n < 2) return result;
  for (const auto& c : clusters) {
    if (!representative_sources.count(c.cluster_id))
      raise(ErrorKind::Validation, "missing representative source for " + c.cluster_id);
  }

  // Schedule first (consuming rng in deterministic cluster order), then
  // presentation coins in global game order, then judge sequentially.
  std::vector<std::vector<std::size_t>> opponents(n);
  for (std::size_t x = 0; x < n; x++) {
    auto& mine = opponents[x];
    while (mine.size() < static_cast<std::size_t>(g_n)) {
      std::vector<std::size_t> pass;
      pass.reserve(n - 1);
      for (std::size_t y = 0; y < n; y++)
        if (y != x) pass.push_back(y);
      std::shuffle(pass.begin(), pass.end(), rng);
      mine.insert(mine.end(), pass.begin(), pass.end());
    }
    mine.resize(g_n);
  }

  struct Game {
    std::size_t initiator;
    std::size_t opponent;
    int round;
    bool initiator_first;
  };
  std::vector<Game> games;
  games.reserve(n * g_n);
  std::uniform_int_distribution<int> coin(0, 1);
  for (int round = 0; round < g_n; round++) {
    for (std::size_t x = 0; x < n; x++) {
      games.push_back(Game{x, opponents[x][round], round, coin(rng) == 0});
    }
  }

  std::map<std::pair<std::string, std::string>, JudgeVerdict> cache;
  for (const auto& game : games) {
    Cluster& ini = clusters[game.initiator];
    Cluster& opp = clusters[game.opponent];
    const Cluster& first = game.initiator_first ? ini : opp;
    const Cluster& second = game.initiator_first ? opp : ini;

    const auto cache_key = std::make_pair(first.cluster_id, second.cluster_id);
    bool cached = cache.count(cache_key) > 0;
    if (!cached) {
      cache[cache_key] = judge(representative_sources.at(first.cluster_id),
                               representative_sources.at(second.cluster_id));
    }
    const JudgeVerdict& verdict = cache[cache_key];

    Tally& tally_first = result.tallies[first.cluster_id];
    Tally& tally_second = result.tallies[second.cluster_id];
    tally_first.games++;
    tally_second.games++;
    switch (verdict.winner) {
      case JudgeVerdict::Winner::ShownA: tally_first.wins += 1.0; break;
      case JudgeVerdict::Winner::ShownB: tally_second.wins += 1.0; break;
      case JudgeVerdict::Winner::Draw:
        tally_first.wins += 0.5;
        tally_second.wins += 0.5;
        break;
    }
    if (verdict.parsed) {
      tally_first.score_sum += verdict.score_a;
      tally_first.scored_games++;
      tally_second.score_sum += verdict.score_b;
      tally_second.scored_games++;
    }

    GameRecord record;
    record.round = game.round;
    record.initiator_id = ini.cluster_id;
    record.opponent_id = opp.cluster_id;
    record.initiator_shown_first = game.initiator_first;
    record.cached = cached;
    record.verdict = verdict;
    result.game_log.push_back(std::move(record));
  }

  for (auto& cluster : clusters) {
    const Tally& tally = result.tallies[cluster.cluster_id];
    cluster.wins = tally.wins;
    cluster.games_played = tally.games;
  }
  return result;
}

ClusterRanking rank_by_tournament(std::vector<Cluster>& clusters,
                                  const std::map<std::string, std::string>& reps,
                                  const OrderedJudge& judge, int g_n, std::mt19937_64& rng,
                                  bool score_primary) {
  ClusterRanking ranking;
  if (!clusters.empty()) ranking.subtask_id = clusters.front().subtask_id;

  TournamentResult played = play_games(clusters, reps, judge, g_n, rng);
  for (const auto& [id, tally] : played.tallies) {
    ranking.per_cluster_wins[id] = tally.wins;
    ranking.per_cluster_avg_score[id] =
        tally.scored_games > 0 ? tally.score_sum / tally.scored_games : 0.0;
  }
  ranking.game_log = std::move(played.game_log);
  ranking.ordered_cluster_ids =
      order_clusters(clusters, ranking.per_cluster_wins, ranking.per_cluster_avg_score, score_primary);
  return ranking;
}

std::map<std::string, std::string> longest_representatives(
    const std::vector<Cluster>& clusters, const std::map<std::string, const Candidate*>& by_id) {
  std::map<std::string, std::string> reps;
  for (const auto& cluster : clusters) {
    // member_ids are reasoning-descending; the first is the longest trace.
    reps[cluster.cluster_id] = by_id.at(cluster.representative_id)->source;
  }
  return reps;
}

}  // namespace

ClusterRanking run_tournament(std::vector<Cluster>& clusters,
                              const std::map<std::string, std::string>& representative_sources,
                              const OrderedJudge& judge, int g_n, std::mt19937_64& rng) {
  if (g_n < 1) raise(ErrorKind::Config, "g_n must be >= 1");
  return rank_by_tournament(clusters, representative_sources, judge, g_n, rng,
                            /*score_primary=*/false);
}

ClusterRanking rank_with_strategy(Strategy strategy, std::vector<Cluster>& clusters,
                                  const std::vector<Candidate>& candidates,
                                  const OrderedJudge& judge, int g_n, std::mt19937_64& rng) {
  ClusterRanking ranking;
  if (!clusters.empty()) ranking.subtask_id = clusters.front().subtask_id;

  std::map<std::string, const Candidate*> by_id;
  for (const auto& cand : candidates) by_id[cand.candidate_id] = &cand;

  switch (strategy) {
    case Strategy::Random: {
      // Baseline: the submission stage works on raw candidates; the cluster
      // ordering itself is a uniform shuffle.
      for (const auto& c : clusters) ranking.ordered_cluster_ids.push_back(c.cluster_id);
      std::shuffle(ranking.ordered_cluster_ids.begin(), ranking.ordered_cluster_ids.end(), rng);
      return ranking;
    }
    case Strategy::Longest: {
      std::map<std::string, double> longest;
      for (const auto& cluster : clusters) {
        long best = 0;
        for (const auto& id : cluster.member_ids)
          best = std::max(best, by_id.at(id)->reasoning_token_count);
        longest[cluster.cluster_id] = static_cast<double>(best);
      }
      ranking.per_cluster_wins = longest;
      ranking.ordered_cluster_ids = order_clusters(clusters, longest, {}, false);
      return ranking;
    }
    case Strategy::ClusterSize: {
      std::map<std::string, double> sizes;
      for (const auto& cluster : clusters)
        sizes[cluster.cluster_id] = static_cast<double>(cluster.size());
      ranking.per_cluster_wins = sizes;
      ranking.ordered_cluster_ids = order_clusters(clusters, sizes, {}, false);
      return ranking;
    }
    case Strategy::ClusterMajority: {
      // Vote table: per test position, how many candidates produced each
      // output. Counted over every candidate holding a full output vector.
      std::map<std::pair<std::size_t, TestOutput>, double> votes;
      auto key_of = [](std::size_t t, const TestOutput& out) { return std::make_pair(t, out); };
      for (const auto& cand : candidates) {
        if (cand.status != CandidateStatus::Ok || cand.outputs.empty()) continue;
        for (std::size_t t = 0; t < cand.outputs.size(); t++) votes[key_of(t, cand.outputs[t])] += 1.0;
      }
      std::map<std::string, double> weights;
      for (const auto& cluster : clusters) {
        const Candidate* exemplar = by_id.at(cluster.member_ids.front());
        double per_member = 0.0;
        for (std::size_t t = 0; t < exemplar->outputs.size(); t++)
          per_member += votes[key_of(t, exemplar->outputs[t])];
        weights[cluster.cluster_id] = per_member * static_cast<double>(cluster.size());
      }
      ranking.per_cluster_wins = weights;
      ranking.ordered_cluster_ids = order_clusters(clusters, weights, {}, false);
      return ranking;
    }
    case Strategy::GenCluster:
      return run_tournament(clusters, longest_representatives(clusters, by_id), judge, g_n, rng);
    case Strategy::GenClusterRandomRep: {
      std::map<std::string, std::string> reps;
      for (const auto& cluster : clusters) {
        std::uniform_int_distribution<std::size_t> pick(0, cluster.member_ids.size() - 1);
        reps[cluster.cluster_id] = by_id.at(cluster.member_ids[pick(rng)])->source;
      }
      return rank_by_tournament(clusters, reps, judge, g_n, rng, /*score_primary=*/false);
    }
    case Strategy::GenClusterScoreBased:
      return rank_by_tournament(clusters, longest_representatives(clusters, by_id), judge, g_n,
                                rng, /*score_primary=*/true);
  }
  raise(ErrorKind::Config, "unhandled strategy");
}

}  // namespace gencluster
