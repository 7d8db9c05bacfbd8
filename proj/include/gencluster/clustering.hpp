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

#ifndef GENCLUSTER_CLUSTERING_HPP
#define GENCLUSTER_CLUSTERING_HPP

#include <string>
#include <vector>

#include "gencluster/digest.hpp"
#include "gencluster/problem.hpp"
#include "gencluster/sandbox.hpp"

namespace gencluster {

enum class CandidateStatus { Ok, Unparsed, CompileFailed, GenerationFailed };

std::string_view candidate_status_name(CandidateStatus status);
CandidateStatus candidate_status_from_name(std::string_view name);

/// One executed output: digest of the bytes plus enough metadata to apply
/// the empty-output rule and to keep truncated outputs distinct from
/// untruncated ones with the same captured prefix.
struct TestOutput {
  Digest128 digest;
  std::uint64_t size = 0;
  bool truncated = false;

  auto operator<=>(const TestOutput&) const = default;
  bool empty() const { return size == 0; }
};

/// One generated solution for a subtask.
struct Candidate {
  std::string candidate_id;
  std::string subtask_id;
  std::string source;  // empty unless a code block was parsed
  long reasoning_token_count = 0;
  CandidateStatus status = CandidateStatus::GenerationFailed;
  /// One entry per test case, filled by execute_matrix (status Ok only).
  std::vector<TestOutput> outputs;
};

/// A group of behaviorally identical candidates.
struct Cluster {
  std::string cluster_id;
  std::string subtask_id;
  Digest128 signature;  // digest of the shared output vector
  /// Ordered by reasoning_token_count descending, ties by candidate_id.
  std::vector<std::string> member_ids;
  std::string representative_id;  // first member: longest thinking trace
  double wins = 0.0;              // tournament tally; draws add 0.5
  int games_played = 0;

  std::size_t size() const { return member_ids.size(); }
};

/// Builds a runnable translation unit for a candidate: the candidate source
/// followed by the subtask's harness stub (when the pack provides one).
std::string attach_harness(const Subtask& subtask, const std::string& candidate_source);

/// Compiles every status-Ok candidate (with harness attached); candidates
/// whose sources do not compile are marked CompileFailed. The returned
/// vector is parallel to `candidates`.
std::vector<CompiledProgram> compile_candidates(Sandbox& sandbox, const Subtask& subtask,
                                                std::vector<Candidate>& candidates,
                                                unsigned workers);

/// Runs every compiled candidate on every test input and fills
/// Candidate::outputs with stdout digests. Abnormal runs contribute whatever
/// bytes they flushed (possibly none).
void execute_matrix(Sandbox& sandbox, std::vector<Candidate>& candidates,
                    const std::vector<CompiledProgram>& programs,
                    const std::vector<std::string>& test_inputs, const RunLimits& limits,
                    unsigned workers);

/// Groups candidates with identical output vectors; removes every cluster
/// containing an empty output at any position. Cluster ids are assigned in
/// signature order, so the result is invariant under permutation of the
/// input. Candidates without full output vectors (status != Ok) are skipped.
std::vector<Cluster> cluster_by_behavior(const std::vector<Candidate>& candidates);

}  // namespace gencluster

#endif  // GENCLUSTER_CLUSTERING_HPP
