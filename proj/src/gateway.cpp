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

#include "gencluster/gateway.hpp"

#include <atomic>
#include <cctype>
#include <chrono>
#include <memory>
#include <thread>
#include <vector>

#include "gencluster/codeblock.hpp"
#include "gencluster/digest.hpp"
#include "gencluster/error.hpp"
#include "gencluster/prompts.hpp"
#include "gencluster/util.hpp"

namespace gencluster {

namespace {

CompletionResult complete_with_retries(CompletionBackend& backend, CompletionRequest request) {
  int backoff_ms = 100;
  for (int attempt = 1;; attempt++) {
    try {
      return backend.complete(request);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::Environment || attempt >= kMaxTransportAttempts) throw;
      std::this_thread::sleep_for(std::chrono::milliseconds(backoff_ms));
      backoff_ms *= 2;
    }
  }
}

}  // namespace

std::vector<Candidate> generate_candidates(CompletionBackend& backend, const Subtask& subtask,
                                           int k, const RunConfig& cfg,
                                           const std::string& tag_prefix) {
  if (k < 1) raise(ErrorKind::Config, "k must be >= 1");

  const std::string prompt =
      render_prompt(PromptKind::Solution, {{"question", subtask.statement}});
  const std::string tag = "solution:" + tag_prefix;

  std::vector<Candidate> candidates(k);
  parallel_for(static_cast<std::size_t>(k), cfg.workers, [&](std::size_t i) {
    Candidate& cand = candidates[i];
    char id[16];
    std::snprintf(id, sizeof(id), "c%04zu", i);
    // Globally unique ids: pooled metrics key candidates across subtasks.
    cand.candidate_id = tag_prefix.empty() ? std::string(id) : tag_prefix + "#" + id;
    cand.subtask_id = subtask.subtask_id;

    CompletionRequest request;
    request.prompt = prompt;
    request.max_tokens = cfg.max_tokens;
    request.temperature = cfg.temperature;
    request.seed = derive_seed(cfg.rng_seed, tag + "#" + std::to_string(i));
    request.tag = tag;
    request.index = i;

    CompletionResult result;
    try {
      result = complete_with_retries(backend, request);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::Environment) throw;  // only transport failures are absorbed
      cand.status = CandidateStatus::GenerationFailed;
      return;
    }
    cand.reasoning_token_count = result.reasoning_token_count;
    auto code = extract_code_block(result.answer_text);
    if (code && !trim(*code).empty()) {
      cand.source = std::move(*code);
      cand.status = CandidateStatus::Ok;
    } else {
      cand.status = CandidateStatus::Unparsed;
    }
  });
  return candidates;
}

std::optional<JudgeVerdict> parse_judgment(const std::string& raw) {
  // Scan from the end for the three trailing lines; extra whitespace and
  // text above them is tolerated.
  std::optional<int> score_a, score_b;
  std::optional<char> winner;

  std::size_t pos = raw.size();
  int lines_seen = 0;
  while (pos > 0 && lines_seen < 50) {
    std::size_t line_start = raw.rfind('\n', pos - 1);
    std::string line = raw.substr(line_start == std::string::npos ? 0 : line_start + 1,
                                  pos - (line_start == std::string::npos ? 0 : line_start + 1));
    pos = line_start == std::string::npos ? 0 : line_start;
    lines_seen++;
    std::string t = trim(line);
    if (t.empty()) continue;

    auto parse_score = [&](const char* prefix) -> std::optional<int> {
      std::string_view sv(t);
      if (sv.rfind(prefix, 0) != 0) return std::nullopt;
      sv.remove_prefix(std::string_view(prefix).size());
      std::size_t i = 0;
      while (i < sv.size() && std::isspace(static_cast<unsigned char>(sv[i]))) i++;
      if (i >= sv.size() || !std::isdigit(static_cast<unsigned char>(sv[i]))) return std::nullopt;
      int value = 0;
      while (i < sv.size() && std::isdigit(static_cast<unsigned char>(sv[i])))
        value = value * 10 + (sv[i++] - '0');
      if (value < 0 || value > 10) return std::nullopt;
      return value;
    };

    if (!winner && t.rfind("Judgment:", 0) == 0) {
      if (t.find("[A]") != std::string::npos) winner = 'A';
      else if (t.find("[B]") != std::string::npos) winner = 'B';
    } else if (!score_b && parse_score("Score B:")) {
      score_b = parse_score("Score B:");
    } else if (!score_a && parse_score("Score A:")) {
      score_a = parse_score("Score A:");
    }
    if (winner && score_a && score_b) break;
  }

  if (!winner) return std::nullopt;
  JudgeVerdict verdict;
  verdict.parsed = true;
  verdict.raw_text = raw;
  verdict.winner = *winner == 'A' ? JudgeVerdict::Winner::ShownA : JudgeVerdict::Winner::ShownB;
  verdict.score_a = score_a.value_or(0);
  verdict.score_b = score_b.value_or(0);
  return verdict;
}

OrderedJudge make_llm_judge(CompletionBackend& backend, const Subtask& subtask,
                            const RunConfig& cfg, const std::string& tag_prefix) {
  auto counter = std::make_shared<std::atomic<std::uint64_t>>(0);
  const std::string tag = "selection:" + tag_prefix;
  const std::string statement = subtask.statement;
  return [&backend, cfg, tag, statement, counter](const std::string& shown_a,
                                                  const std::string& shown_b) -> JudgeVerdict {
    const std::string prompt = render_prompt(
        PromptKind::Selection,
        {{"problem", statement}, {"code_A", shown_a}, {"code_B", shown_b}});

    std::string last_raw;
    for (int ask = 0; ask < 2; ask++) {
      CompletionRequest request;
      request.prompt = prompt;
      request.max_tokens = cfg.max_tokens;
      request.temperature = cfg.temperature;
      request.tag = tag;
      request.index = counter->fetch_add(1);
      request.seed = derive_seed(cfg.rng_seed, tag + "#" + std::to_string(request.index));
      CompletionResult result = complete_with_retries(backend, request);
      if (auto verdict = parse_judgment(result.answer_text)) return *verdict;
      last_raw = result.answer_text;
    }
    JudgeVerdict draw;
    draw.winner = JudgeVerdict::Winner::Draw;
    draw.parsed = false;
    draw.raw_text = last_raw;
    return draw;
  };
}

PairOutcome judge_pair(CompletionBackend& backend, const Subtask& subtask, const std::string& sol_1,
                       const std::string& sol_2, std::mt19937_64& rng, const RunConfig& cfg,
                       const std::string& tag_prefix) {
  if (trim(sol_1).empty() || trim(sol_2).empty())
    raise(ErrorKind::Validation, "judge_pair needs two non-empty solutions");

  const bool first_shown_as_a = std::uniform_int_distribution<int>(0, 1)(rng) == 0;
  OrderedJudge judge = make_llm_judge(backend, subtask, cfg, tag_prefix);
  JudgeVerdict verdict =
      first_shown_as_a ? judge(sol_1, sol_2) : judge(sol_2, sol_1);

  PairOutcome outcome;
  if (verdict.winner == JudgeVerdict::Winner::Draw) {
    outcome.win_first = 0.5;
    outcome.win_second = 0.5;
    return outcome;
  }

  Judgment judgment;
  judgment.first_label = first_shown_as_a ? Judgment::FirstLabel::AWasSolution1
                                          : Judgment::FirstLabel::AWasSolution2;
  judgment.score_a = verdict.score_a;
  judgment.score_b = verdict.score_b;
  judgment.raw_text = verdict.raw_text;
  const bool a_won = verdict.winner == JudgeVerdict::Winner::ShownA;
  const bool first_won = a_won == first_shown_as_a;
  judgment.winner =
      first_won ? Judgment::Winner::FirstSolution : Judgment::Winner::SecondSolution;
  outcome.judgment = judgment;
  outcome.win_first = first_won ? 1.0 : 0.0;
  outcome.win_second = first_won ? 0.0 : 1.0;
  return outcome;
}

}  // namespace gencluster
