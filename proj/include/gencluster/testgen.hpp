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

#ifndef GENCLUSTER_TESTGEN_HPP
#define GENCLUSTER_TESTGEN_HPP

#include <random>
#include <string>
#include <vector>

#include "gencluster/backend.hpp"
#include "gencluster/config.hpp"
#include "gencluster/problem.hpp"
#include "gencluster/sandbox.hpp"

namespace gencluster {

/// A generated, validator-approved test input.
struct TestCase {
  std::string subtask_id;
  std::string input_bytes;  // non-empty
  int generator_index = 0;  // which compiling generator produced it
  int approvals = 0;
  int validators_total = 0;
  std::uint64_t seed = 0;  // seed passed to the generator on argv
};

/// Result of turning n completions into compiled programs.
struct BuiltPrograms {
  std::vector<CompiledProgram> programs;  // the compiling subset
  std::vector<std::string> sources;       // parallel to programs
  int requested = 0;
  int unparsed = 0;
  int compile_failed = 0;
  int generation_failed = 0;
};

/// Asks the backend for n test-input generators / input validators and
/// compiles them; non-parsing and non-compiling ones are dropped. Raises a
/// stage error when nothing compiles.
BuiltPrograms build_generators(CompletionBackend& backend, Sandbox& sandbox,
                               const Subtask& subtask, int n, const RunConfig& cfg,
                               const std::string& tag_prefix);
BuiltPrograms build_validators(CompletionBackend& backend, Sandbox& sandbox,
                               const Subtask& subtask, int n, const RunConfig& cfg,
                               const std::string& tag_prefix);

struct TestGenReport {
  std::vector<TestCase> cases;
  std::uint64_t attempts = 0;
  std::vector<std::uint64_t> generator_invocations;  // fairness audit
  std::uint64_t rejected_below_threshold = 0;
  std::uint64_t rejected_duplicate = 0;
  std::uint64_t rejected_unusable = 0;  // generator crashed / empty output
};

/// Round-robins over the generators, runs each produced input through every
/// validator, and keeps inputs whose approval fraction reaches `threshold`
/// until `target` cases are collected. A validator approves an input iff it
/// exits cleanly and prints exactly "passed" (modulo surrounding
/// whitespace); crashes and timeouts count as non-approval. Duplicate inputs
/// are dropped before approval counting. Raises a stage error when
/// `attempt_cap_factor * target` generator invocations pass without reaching
/// the target.
TestGenReport collect_tests(Sandbox& sandbox, const std::vector<CompiledProgram>& generators,
                            const std::vector<CompiledProgram>& validators,
                            const std::string& subtask_id, int target, double threshold,
                            std::mt19937_64& rng, unsigned workers,
                            std::uint64_t attempt_cap_factor = 50);

}  // namespace gencluster

#endif  // GENCLUSTER_TESTGEN_HPP
