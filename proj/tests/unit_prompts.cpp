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

#include <doctest.h>

#include <random>

#include "gencluster/codeblock.hpp"
#include "gencluster/error.hpp"
#include "gencluster/prompts.hpp"

using namespace gencluster;

TEST_CASE("solution prompt carries the question and the fenced-code instruction") {
  std::string text = render_prompt(PromptKind::Solution, {{"question", "QQ-MARKER"}});
  CHECK(text.find("QQ-MARKER") != std::string::npos);
  CHECK(text.find("Put your final solution within a single code block") != std::string::npos);
  CHECK(text.find("do not add a main function") != std::string::npos);
  CHECK(text.find("{question}") == std::string::npos);
}

TEST_CASE("validator prompt instructs printing passed/failed") {
  std::string text = render_prompt(PromptKind::Validator, {{"problem", "PP-MARKER"}});
  CHECK(text.find("PP-MARKER") != std::string::npos);
  CHECK(text.find("print \"passed\"") != std::string::npos);
  CHECK(text.find("\"failed\"") != std::string::npos);
  CHECK(text.find("no extra tokens remain") != std::string::npos);
}

TEST_CASE("generator prompt keeps its question/answer scaffold") {
  std::string text = render_prompt(PromptKind::TestGenerator, {{"problem", "GEN-MARKER"}});
  CHECK(text.find("test case generator") != std::string::npos);
  CHECK(text.find("### Question:") != std::string::npos);
  CHECK(text.find("### Answer:") != std::string::npos);
}

TEST_CASE("selection prompt requires both codes and ends with the three-line format") {
  std::string text = render_prompt(
      PromptKind::Selection, {{"problem", "P"}, {"code_A", "AAA"}, {"code_B", "BBB"}});
  CHECK(text.find("### Solution A") != std::string::npos);
  CHECK(text.find("AAA") != std::string::npos);
  CHECK(text.find("BBB") != std::string::npos);
  CHECK(text.find("Score A: <0-10>") != std::string::npos);
  CHECK(text.find("Judgment: [A]") != std::string::npos);

  CHECK_THROWS_AS(render_prompt(PromptKind::Selection, {{"problem", "P"}, {"code_A", "A"}}),
                  Error);
  try {
    render_prompt(PromptKind::Selection, {{"problem", "P"}, {"code_A", "A"}});
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Template);
    CHECK(std::string(e.what()).find("code_B") != std::string::npos);
  }
}

TEST_CASE("slot values are spliced verbatim, never re-substituted") {
  std::string text = render_prompt(
      PromptKind::Selection,
      {{"problem", "uses {code_A} literally"}, {"code_A", "X"}, {"code_B", "Y"}});
  CHECK(text.find("uses {code_A} literally") != std::string::npos);
}

TEST_CASE("extract_code_block basics") {
  CHECK(extract_code_block("```cpp\nint x;\n```") == std::string("int x;"));
  CHECK(extract_code_block("no code here") == std::nullopt);
  CHECK(extract_code_block("prose\n```\nuntangled\n```\n") == std::string("untangled"));
  // Last eligible block wins.
  std::string two = "```cpp\nfirst\n```\nmore\n```cpp\nsecond\n```\n";
  CHECK(extract_code_block(two) == std::string("second"));
  // Non-C++ tags are skipped.
  CHECK(extract_code_block("```python\nprint(1)\n```") == std::nullopt);
  std::string mixed = "```cpp\nint k;\n```\n```text\nnotes\n```\n";
  CHECK(extract_code_block(mixed) == std::string("int k;"));
  // Unterminated final fence runs to end of text.
  CHECK(extract_code_block("```cpp\nint y = 1;") == std::string("int y = 1;"));
}

TEST_CASE("extract_code_block is idempotent through a fresh fence") {
  std::mt19937_64 rng(11);
  const char* bodies[] = {"int a;\nint b;", "// nothing", "for (;;) {}", "auto x = `tick`;"};
  for (const char* body : bodies) {
    std::string once = *extract_code_block("junk\n```cpp\n" + std::string(body) + "\n```\ntrail");
    std::string again = *extract_code_block("```cpp\n" + once + "\n```");
    CHECK(once == again);
    (void)rng;
  }
}

TEST_CASE("token estimate is word count times 1.3 rounded") {
  CHECK(estimate_token_count("one two three four five six seven eight nine ten") == 13);
  CHECK(estimate_token_count("") == 0);
  CHECK(estimate_token_count("word") == 1);
}
