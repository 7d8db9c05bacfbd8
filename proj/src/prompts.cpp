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

#include "gencluster/prompts.hpp"

#include "gencluster/error.hpp"

namespace gencluster {

namespace {

constexpr std::string_view kSolutionTemplate =
    R"(You are an expert competitive programmer. You will be given a problem statement, test case constraints and example test inputs and outputs. Please reason step by step about the solution, then provide a complete implementation in C++17. You should correctly implement the routine(s) described in Implementation Details, without reading or writing anything directly from stdin or to stdout, as input and output are passed through the implemented routines. Assume your code will be run on the OFFICIAL grader, and do not add a main function, a sample grader, or any other functionality unless it has been explicitly requested.

Put your final solution within a single code block:

```cpp
// your code here
```

{question})";

constexpr std::string_view kTestGeneratorTemplate =
    R"(You are an expert competitive programmer. You will be given a problem statement, its constraints, and example test cases. Your task is to write a **test case generator** in C++17 that produces valid inputs for the problem, following the constraints and reflecting the variety suggested by the examples.

First, **reason step by step** about how to design the generator.

Then, provide the **final complete implementation** inside a single code block:

```cpp
// your code here
```

### Question:

{problem}

### Answer: (use the provided format with backticks))";

constexpr std::string_view kValidatorTemplate =
    R"(You are an expert competitive programmer. You will be given a problem statement, its input format, constraints, and examples. Your task is to write an **input validator** in C++17 that reads from stdin and checks that the input fully matches the spec and all constraints.

First, reason step by step about what must be validated.

Then, provide the **final complete implementation** inside a single code block:

```cpp
// your code here
```

The program should print "passed" if the input is valid, otherwise "failed" and a short error to stderr. It must also ensure no extra tokens remain.

### Question:

{problem}

### Answer: (use the provided format with backticks))";

constexpr std::string_view kSelectionTemplate =
    R"(You are an expert competitive programmer. You will be given a problem statement, its constraints, and two solutions. Your task is to evaluate each solution's correctness based on the problem statement and its constraints and select the best solution.

First, **reason step by step** about each solution.

### Question:
{problem}

### Solution A
{code_A}

### Solution B
{code_B}

Finish your reasoning with exactly three lines, nothing else:
Score A: <0-10>
Score B: <0-10>
Judgment: [A]  or  Judgment: [B])";

}  // namespace

std::string_view prompt_kind_name(PromptKind kind) {
  switch (kind) {
    case PromptKind::Solution: return "solution";
    case PromptKind::TestGenerator: return "test_generator";
    case PromptKind::Validator: return "validator";
    case PromptKind::Selection: return "selection";
  }
  return "unknown";
}

std::string_view prompt_template(PromptKind kind) {
  switch (kind) {
    case PromptKind::Solution: return kSolutionTemplate;
    case PromptKind::TestGenerator: return kTestGeneratorTemplate;
    case PromptKind::Validator: return kValidatorTemplate;
    case PromptKind::Selection: return kSelectionTemplate;
  }
  raise(ErrorKind::Template, "unknown prompt kind");
}

std::vector<std::string> prompt_slots(PromptKind kind) {
  switch (kind) {
    case PromptKind::Solution: return {"question"};
    case PromptKind::TestGenerator: return {"problem"};
    case PromptKind::Validator: return {"problem"};
    case PromptKind::Selection: return {"problem", "code_A", "code_B"};
  }
  raise(ErrorKind::Template, "unknown prompt kind");
}

std::string render_prompt(PromptKind kind, const std::map<std::string, std::string>& slots) {
  const std::string_view tmpl = prompt_template(kind);
  const std::vector<std::string> names = prompt_slots(kind);
  for (const auto& name : names) {
    if (!slots.count(name))
      raise(ErrorKind::Template,
            "missing slot '" + name + "' for " + std::string(prompt_kind_name(kind)) + " prompt");
  }

  // One pass over the template; slot values are spliced in verbatim and
  // never re-scanned for placeholders.
  std::string out;
  out.reserve(tmpl.size());
  std::size_t pos = 0;
  while (pos < tmpl.size()) {
    std::size_t brace = tmpl.find('{', pos);
    if (brace == std::string_view::npos) {
      out.append(tmpl.substr(pos));
      break;
    }
    out.append(tmpl.substr(pos, brace - pos));
    bool matched = false;
    for (const auto& name : names) {
      const std::string placeholder = "{" + name + "}";
      if (tmpl.substr(brace, placeholder.size()) == placeholder) {
        out.append(slots.at(name));
        pos = brace + placeholder.size();
        matched = true;
        break;
      }
    }
    if (!matched) {
      out.push_back('{');
      pos = brace + 1;
    }
  }
  return out;
}

}  // namespace gencluster
