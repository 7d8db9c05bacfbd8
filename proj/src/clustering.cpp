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

#include "gencluster/clustering.hpp"

#include <algorithm>
#include <map>

#include "gencluster/error.hpp"
#include "gencluster/util.hpp"

namespace gencluster {

std::string_view candidate_status_name(CandidateStatus status) {
  switch (status) {
    case CandidateStatus::Ok: return "ok";
    case CandidateStatus::Unparsed: return "unparsed";
    case CandidateStatus::CompileFailed: return "compile_failed";
    case CandidateStatus::GenerationFailed: return "generation_failed";
  }
  return "unknown";
}

CandidateStatus candidate_status_from_name(std::string_view name) {
  if (name == "ok") return CandidateStatus::Ok;
  if (name == "unparsed") return CandidateStatus::Unparsed;
  if (name == "compile_failed") return CandidateStatus::CompileFailed;
  if (name == "generation_failed") return CandidateStatus::GenerationFailed;
  raise(ErrorKind::Validation, "unknown candidate status: " + std::string(name));
}

std::string attach_harness(const Subtask& subtask, const std::string& candidate_source) {
  if (subtask.harness_source.empty()) return candidate_source;
  return candidate_source + "\n" + subtask.harness_source;
}

std::vector<CompiledProgram> compile_candidates(Sandbox& sandbox, const Subtask& subtask,
                                                std::vector<Candidate>& candidates,
                                                unsigned workers) {
  std::vector<CompiledProgram> programs(candidates.size());
  parallel_for(candidates.size(), workers, [&](std::size_t i) {
    Candidate& cand = candidates[i];
    if (cand.status != CandidateStatus::Ok) return;
    programs[i] = sandbox.compile(attach_harness(subtask, cand.source), ProgramKind::Solution);
    if (!programs[i].compile_ok) cand.status = CandidateStatus::CompileFailed;
  });
  return programs;
}

void execute_matrix(Sandbox& sandbox, std::vector<Candidate>& candidates,
                    const std::vector<CompiledProgram>& programs,
                    const std::vector<std::string>& test_inputs, const RunLimits& limits,
                    unsigned workers) {
  if (programs.size() != candidates.size())
    raise(ErrorKind::Validation, "programs vector must parallel candidates");
  if (test_inputs.empty()) raise(ErrorKind::Validation, "execute_matrix needs at least one test");

  std::vector<std::size_t> eligible;
  for (std::size_t i = 0; i < candidates.size(); i++) {
    if (candidates[i].status == CandidateStatus::Ok) {
      if (!programs[i].compile_ok)
        raise(ErrorKind::Validation, "status-ok candidate without a compiled program: " +
                                         candidates[i].candidate_id);
      candidates[i].outputs.assign(test_inputs.size(), TestOutput{});
      eligible.push_back(i);
    } else {
      candidates[i].outputs.clear();
    }
  }

  const std::size_t cells = eligible.size() * test_inputs.size();
  parallel_for(cells, workers, [&](std::size_t cell) {
    const std::size_t ci = eligible[cell / test_inputs.size()];
    const std::size_t ti = cell % test_inputs.size();
    RunSpec spec;
    spec.stdin_bytes = test_inputs[ti];
    ExecutionOutcome outcome = sandbox.run(programs[ci], spec, limits);
    TestOutput out;
    out.digest = digest_bytes(outcome.stdout_bytes);
    out.size = outcome.stdout_bytes.size();
    out.truncated = outcome.stdout_truncated;
    candidates[ci].outputs[ti] = out;
  });
}

std::vector<Cluster> cluster_by_behavior(const std::vector<Candidate>& candidates) {
  std::size_t vector_len = 0;
  bool seen = false;
  for (const auto& cand : candidates) {
    if (cand.status != CandidateStatus::Ok) continue;
    if (!seen) {
      vector_len = cand.outputs.size();
      seen = true;
    } else if (cand.outputs.size() != vector_len) {
      raise(ErrorKind::Validation, "candidates have unequal output vector lengths");
    }
  }

  // Bucket by signature, then confirm with a full vector comparison so the
  // partition is exact even under digest collisions.
  struct Bucket {
    const Candidate* exemplar;
    std::vector<const Candidate*> members;
  };
  std::map<Digest128, std::vector<Bucket>> buckets;
  for (const auto& cand : candidates) {
    if (cand.status != CandidateStatus::Ok || cand.outputs.empty()) continue;
    std::vector<Digest128> parts;
    parts.reserve(cand.outputs.size());
    for (const auto& out : cand.outputs) {
      Digest128 d = out.digest;
      // Fold the truncation marker in so truncated outputs never merge with
      // untruncated ones sharing the captured prefix.
      if (out.truncated) d = digest_bytes(d.hex() + "#trunc");
      parts.push_back(d);
    }
    Digest128 signature = digest_sequence(parts);
    auto& row = buckets[signature];
    bool placed = false;
    for (auto& bucket : row) {
      if (bucket.exemplar->outputs == cand.outputs) {
        bucket.members.push_back(&cand);
        placed = true;
        break;
      }
    }
    if (!placed) row.push_back(Bucket{&cand, {&cand}});
  }

  std::vector<Cluster> clusters;
  for (auto& [signature, row] : buckets) {
    int collision = 0;
    for (auto& bucket : row) {
      // Empty-output rule: a cluster with an empty output anywhere is
      // dropped entirely.
      bool has_empty = std::any_of(bucket.exemplar->outputs.begin(), bucket.exemplar->outputs.end(),
                                   [](const TestOutput& o) { return o.empty(); });
      if (has_empty) {
        collision++;
        continue;
      }
      Cluster cluster;
      cluster.subtask_id = bucket.exemplar->subtask_id;
      cluster.signature = signature;
      cluster.cluster_id = "cl-" + signature.hex().substr(0, 16);
      if (collision > 0) cluster.cluster_id += "-" + std::to_string(collision);
      collision++;
      std::sort(bucket.members.begin(), bucket.members.end(),
                [](const Candidate* a, const Candidate* b) {
                  if (a->reasoning_token_count != b->reasoning_token_count)
                    return a->reasoning_token_count > b->reasoning_token_count;
                  return a->candidate_id < b->candidate_id;
                });
      for (const auto* m : bucket.members) cluster.member_ids.push_back(m->candidate_id);
      cluster.representative_id = cluster.member_ids.front();
      clusters.push_back(std::move(cluster));
    }
  }
  return clusters;
}

}  // namespace gencluster
