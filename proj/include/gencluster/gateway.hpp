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

#ifndef GENCLUSTER_GATEWAY_HPP
#define GENCLUSTER_GATEWAY_HPP

#include <functional>
#include <optional>
#include <random>
#include <string>

#include "gencluster/backend.hpp"
#include "gencluster/clustering.hpp"
#include "gencluster/config.hpp"
#include "gencluster/problem.hpp"

namespace gencluster {

/// Issues k independent completion requests for a subtask and maps each to a
/// Candidate keyed by request index. Requests retry transport failures
/// (kMaxTransportAttempts with exponential backoff); a slot that still fails
/// becomes a generation_failed candidate so k stays an upper bound.
std::vector<Candidate> generate_candidates(CompletionBackend& backend, const Subtask& subtask,
                                           int k, const RunConfig& cfg,
                                           const std::string& tag_prefix);

inline constexpr int kMaxTransportAttempts = 3;

/// Outcome of one pairwise comparison, relative to the order the solutions
/// were shown to the judge.
struct JudgeVerdict {
  enum class Winner { ShownA, ShownB, Draw };
  Winner winner = Winner::Draw;
  int score_a = 0;
  int score_b = 0;
  bool parsed = false;  // false: unparseable twice, recorded as a draw
  std::string raw_text;
};

/// A judge already bound to a subtask; arguments are the two sources in
/// presentation order. The tournament layers order randomization on top.
using OrderedJudge = std::function<JudgeVerdict(const std::string& shown_a, const std::string& shown_b)>;

/// Parses the trailing "Score A: n / Score B: n / Judgment: [A|B]" lines.
std::optional<JudgeVerdict> parse_judgment(const std::string& raw);

/// LLM-backed OrderedJudge: renders the selection prompt, asks once, re-asks
/// once on unparseable output, then records a draw.
OrderedJudge make_llm_judge(CompletionBackend& backend, const Subtask& subtask,
                            const RunConfig& cfg, const std::string& tag_prefix);

/// Pairwise judgment mapped back to the caller's inputs.
struct Judgment {
  enum class FirstLabel { AWasSolution1, AWasSolution2 };
  enum class Winner { FirstSolution, SecondSolution };
  FirstLabel first_label = FirstLabel::AWasSolution1;
  int score_a = 0;  // score of the solution shown as A
  int score_b = 0;
  Winner winner = Winner::FirstSolution;
  std::string raw_text;
};

struct PairOutcome {
  std::optional<Judgment> judgment;  // nullopt: draw (judge unparseable twice)
  double win_first = 0.0;            // 1/0, 0/1 or 0.5/0.5
  double win_second = 0.0;
};

/// Presents sol_1/sol_2 in an order drawn from rng (each first with
/// probability 1/2) and maps the judge's verdict back to the inputs.
PairOutcome judge_pair(CompletionBackend& backend, const Subtask& subtask, const std::string& sol_1,
                       const std::string& sol_2, std::mt19937_64& rng, const RunConfig& cfg,
                       const std::string& tag_prefix = "");

}  // namespace gencluster

#endif  // GENCLUSTER_GATEWAY_HPP
