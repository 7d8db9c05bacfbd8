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

#ifndef GENCLUSTER_GRADING_HPP
#define GENCLUSTER_GRADING_HPP

#include <string>

#include "gencluster/problem.hpp"
#include "gencluster/sandbox.hpp"

namespace gencluster {

struct GradeResult {
  std::string subtask_id;
  double score = 0.0;  // in [0, subtask.max_score]
  std::string verdict;
};

/// Grader protocol: for each official test the solution runs under the
/// subtask's limits with the test on stdin; the grader then runs in a
/// directory containing input.txt and output.txt (passed as argv) and prints
/// a fraction in [0,1]. The subtask score is max_score times the minimum
/// fraction across tests; abnormal solution runs score 0 for that test.
GradeResult grade(Sandbox& sandbox, const CompiledProgram& solution,
                  const CompiledProgram& grader, const Subtask& subtask);

}  // namespace gencluster

#endif  // GENCLUSTER_GRADING_HPP
