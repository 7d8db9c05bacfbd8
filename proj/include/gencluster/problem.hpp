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

#ifndef GENCLUSTER_PROBLEM_HPP
#define GENCLUSTER_PROBLEM_HPP

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace gencluster {

namespace fs = std::filesystem;

/// One independently scored fragment of a problem. The statement contains
/// only this subtask's information; candidates, generators, validators and
/// the judge all see nothing else.
struct Subtask {
  std::string subtask_id;
  int index = 0;  // 1-based, strictly increasing within a problem
  std::string statement;
  double max_score = 0.0;
  std::chrono::milliseconds time_limit{0};
  std::uint64_t memory_limit_mib = 0;
  std::string grader_source;
  /// Optional stub appended to each candidate source to form a runnable
  /// program (for packs whose candidates are grader-driven routines without
  /// a main function). Empty means candidates run standalone.
  std::string harness_source;
  std::vector<std::string> official_tests;  // raw input bytes, manifest order
  bool output_only = false;  // reserved; the pipeline treats all subtasks as executable

  bool operator==(const Subtask&) const = default;
};

struct ProblemPack {
  std::string problem_id;
  std::string title;
  int submission_cap = 50;
  std::vector<Subtask> subtasks;
  /// Expected sum of subtask max_scores. 100 unless the manifest overrides it.
  double problem_total = 100.0;
  bool total_overridden = false;

  bool operator==(const ProblemPack&) const = default;

  const Subtask& subtask(const std::string& id) const;
};

/// Checks all pack invariants; diagnostics name the offending field.
void validate_problem_pack(const ProblemPack& pack);

/// Loads a single problem directory (problem.json manifest plus statement,
/// grader, harness and official test files referenced from it).
ProblemPack load_problem_pack(const fs::path& dir);

/// Writes a pack back out in the same layout load_problem_pack reads.
void write_problem_pack(const ProblemPack& pack, const fs::path& dir);

/// Loads every problem under a pack root: either `dir` itself holds a
/// problem.json, or each immediate subdirectory with one is a problem.
/// Problems are ordered by problem_id.
std::vector<ProblemPack> load_pack_root(const fs::path& dir);

}  // namespace gencluster

#endif  // GENCLUSTER_PROBLEM_HPP
