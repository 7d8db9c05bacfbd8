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

#include "gencluster/testgen.hpp"

#include <set>

#include "gencluster/codeblock.hpp"
#include "gencluster/error.hpp"
#include "gencluster/gateway.hpp"
#include "gencluster/prompts.hpp"
#include "gencluster/util.hpp"

namespace gencluster {

namespace {

// Generators and validators get generous fixed limits; subtask limits are
// sized for solutions, not for tooling.
constexpr RunLimits kToolLimits{std::chrono::milliseconds(10000), 1024};

BuiltPrograms build_programs(CompletionBackend& backend, Sandbox& sandbox, const Subtask& subtask,
                             int n, const RunConfig& cfg, PromptKind kind, ProgramKind program_kind,
                             const std::string& tag_prefix, const char* what) {
  if (n < 1) raise(ErrorKind::Config, std::string(what) + " count must be >= 1");

  const std::string prompt = render_prompt(kind, {{"problem", subtask.statement}});
  const std::string tag = std::string(prompt_kind_name(kind)) + ":" + tag_prefix;

  struct Slot {
    std::string source;
    enum { Pending, Unparsed, Failed } state = Pending;
  };
  std::vector<Slot> slots(n);
  parallel_for(static_cast<std::size_t>(n), cfg.workers, [&](std::size_t i) {
    CompletionRequest request;
    request.prompt = prompt;
    request.max_tokens = cfg.max_tokens;
    request.temperature = cfg.temperature;
    request.tag = tag;
    request.index = i;
    request.seed = derive_seed(cfg.rng_seed, tag + "#" + std::to_string(i));
    try {
      CompletionResult result = backend.complete(request);
      auto code = extract_code_block(result.answer_text);
      if (code && !trim(*code).empty()) {
        slots[i].source = std::move(*code);
      } else {
        slots[i].state = Slot::Unparsed;
      }
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::Environment) throw;
      slots[i].state = Slot::Failed;
    }
  });

  BuiltPrograms built;
  built.requested = n;
  std::vector<std::size_t> to_compile;
  for (std::size_t i = 0; i < slots.size(); i++) {
    if (slots[i].state == Slot::Unparsed) built.unparsed++;
    else if (slots[i].state == Slot::Failed) built.generation_failed++;
    else to_compile.push_back(i);
  }

  std::vector<CompiledProgram> compiled(to_compile.size());
  parallel_for(to_compile.size(), cfg.workers, [&](std::size_t j) {
    compiled[j] = sandbox.compile(slots[to_compile[j]].source, program_kind);
  });
  for (std::size_t j = 0; j < to_compile.size(); j++) {
    if (compiled[j].compile_ok) {
      built.programs.push_back(compiled[j]);
      built.sources.push_back(slots[to_compile[j]].source);
    } else {
      built.compile_failed++;
    }
  }

  if (built.programs.empty())
    raise(ErrorKind::Stage, std::string("no ") + what + " compiled for subtask " +
                                subtask.subtask_id + " (" + std::to_string(built.unparsed) +
                                " unparsed, " + std::to_string(built.compile_failed) +
                                " compile failures)");
  return built;
}

}  // namespace

BuiltPrograms build_generators(CompletionBackend& backend, Sandbox& sandbox,
                               const Subtask& subtask, int n, const RunConfig& cfg,
                               const std::string& tag_prefix) {
  return build_programs(backend, sandbox, subtask, n, cfg, PromptKind::TestGenerator,
                        ProgramKind::Generator, tag_prefix, "test generators");
}

BuiltPrograms build_validators(CompletionBackend& backend, Sandbox& sandbox,
                               const Subtask& subtask, int n, const RunConfig& cfg,
                               const std::string& tag_prefix) {
  return build_programs(backend, sandbox, subtask, n, cfg, PromptKind::Validator,
                        ProgramKind::Validator, tag_prefix, "validators");
}

TestGenReport collect_tests(Sandbox& sandbox, const std::vector<CompiledProgram>& generators,
                            const std::vector<CompiledProgram>& validators,
                            const std::string& subtask_id, int target, double threshold,
                            std::mt19937_64& rng, unsigned workers,
                            std::uint64_t attempt_cap_factor) {
  if (generators.empty()) raise(ErrorKind::Validation, "collect_tests needs >= 1 generator");
  if (validators.empty()) raise(ErrorKind::Validation, "collect_tests needs >= 1 validator");
  if (target < 1) raise(ErrorKind::Config, "target test count must be >= 1");
  if (!(threshold > 0.0 && threshold <= 1.0))
    raise(ErrorKind::Config, "validator threshold must be in (0, 1]");

  TestGenReport report;
  report.generator_invocations.assign(generators.size(), 0);
  std::set<std::string> seen_inputs;
  const std::uint64_t attempt_cap = attempt_cap_factor * static_cast<std::uint64_t>(target);

  while (report.cases.size() < static_cast<std::size_t>(target)) {
    if (report.attempts >= attempt_cap) {
      const double rate =
          report.attempts == 0 ? 0.0 : double(report.cases.size()) / double(report.attempts);
      raise(ErrorKind::Stage,
            "test generation stalled for subtask " + subtask_id + ": " +
                std::to_string(report.cases.size()) + "/" + std::to_string(target) +
                " accepted after " + std::to_string(report.attempts) +
                " attempts (acceptance rate " + std::to_string(rate) + ")");
    }

    const std::size_t gen_index = report.attempts % generators.size();
    report.attempts++;
    report.generator_invocations[gen_index]++;

    const std::uint64_t seed = rng();
    RunSpec spec;
    spec.args = {std::to_string(seed)};
    ExecutionOutcome gen_run = sandbox.run(generators[gen_index], spec, kToolLimits);
    if (gen_run.exit_status != ExitStatus::Ok || gen_run.stdout_bytes.empty() ||
        gen_run.stdout_truncated) {
      report.rejected_unusable++;
      continue;
    }
    const std::string& input = gen_run.stdout_bytes;
    if (!seen_inputs.insert(input).second) {
      report.rejected_duplicate++;
      continue;
    }

    // All validators vote; decisions are made in generator-rotation order
    // regardless of completion order.
    std::vector<char> approved(validators.size(), 0);
    parallel_for(validators.size(), workers, [&](std::size_t v) {
      RunSpec vspec;
      vspec.stdin_bytes = input;
      ExecutionOutcome vrun = sandbox.run(validators[v], vspec, kToolLimits);
      approved[v] = vrun.exit_status == ExitStatus::Ok && trim(vrun.stdout_bytes) == "passed";
    });
    int approvals = 0;
    for (char a : approved) approvals += a;

    if (static_cast<double>(approvals) + 1e-9 >= threshold * static_cast<double>(validators.size())) {
      TestCase test;
      test.subtask_id = subtask_id;
      test.input_bytes = input;
      test.generator_index = static_cast<int>(gen_index);
      test.approvals = approvals;
      test.validators_total = static_cast<int>(validators.size());
      test.seed = seed;
      report.cases.push_back(std::move(test));
    } else {
      report.rejected_below_threshold++;
    }
  }
  return report;
}

}  // namespace gencluster
