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

#include "gencluster/grading.hpp"

#include <algorithm>
#include <cstdlib>

#include "gencluster/error.hpp"
#include "gencluster/util.hpp"

namespace gencluster {

namespace {

// Graders are trusted pack code but still run under generous limits so a
// buggy one cannot wedge the pipeline.
constexpr RunLimits kGraderLimits{std::chrono::milliseconds(10000), 1024};

}  // namespace

GradeResult grade(Sandbox& sandbox, const CompiledProgram& solution,
                  const CompiledProgram& grader, const Subtask& subtask) {
  if (!solution.compile_ok) raise(ErrorKind::Validation, "grade() needs a compiled solution");
  if (!grader.compile_ok) raise(ErrorKind::Validation, "grade() needs a compiled grader");
  if (subtask.official_tests.empty())
    raise(ErrorKind::Validation, "subtask " + subtask.subtask_id + " has no official tests");

  GradeResult result;
  result.subtask_id = subtask.subtask_id;

  const RunLimits solution_limits{subtask.time_limit, subtask.memory_limit_mib};
  double min_fraction = 1.0;
  std::string verdict = "accepted";

  for (std::size_t t = 0; t < subtask.official_tests.size(); t++) {
    const std::string& input = subtask.official_tests[t];
    RunSpec spec;
    spec.stdin_bytes = input;
    ExecutionOutcome run = sandbox.run(solution, spec, solution_limits);
    if (run.exit_status != ExitStatus::Ok) {
      min_fraction = 0.0;
      verdict = std::string(exit_status_name(run.exit_status)) + " on test " + std::to_string(t + 1);
      break;
    }

    RunSpec grader_spec;
    grader_spec.args = {"input.txt", "output.txt"};
    grader_spec.files = {{"input.txt", input}, {"output.txt", run.stdout_bytes}};
    ExecutionOutcome graded = sandbox.run(grader, grader_spec, kGraderLimits);
    if (graded.exit_status != ExitStatus::Ok) {
      result.score = 0.0;
      result.verdict = "grader-error on test " + std::to_string(t + 1) + " (" +
                       std::string(exit_status_name(graded.exit_status)) + ")";
      return result;
    }

    char* end = nullptr;
    const std::string text = trim(graded.stdout_bytes);
    double fraction = std::strtod(text.c_str(), &end);
    if (end == text.c_str()) {
      result.score = 0.0;
      result.verdict = "grader-error on test " + std::to_string(t + 1) + " (unparseable verdict)";
      return result;
    }
    fraction = std::clamp(fraction, 0.0, 1.0);
    if (fraction < min_fraction) {
      min_fraction = fraction;
      if (fraction <= 0.0) {
        verdict = "wrong-answer on test " + std::to_string(t + 1);
        break;
      }
      verdict = "partial (test " + std::to_string(t + 1) + ")";
    }
  }

  result.score = std::clamp(min_fraction, 0.0, 1.0) * subtask.max_score;
  result.verdict = min_fraction >= 1.0 ? "accepted" : verdict;
  return result;
}

}  // namespace gencluster
