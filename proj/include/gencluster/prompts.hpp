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

#ifndef GENCLUSTER_PROMPTS_HPP
#define GENCLUSTER_PROMPTS_HPP

#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace gencluster {

enum class PromptKind { Solution, TestGenerator, Validator, Selection };

std::string_view prompt_kind_name(PromptKind kind);

/// Raw template text with `{placeholder}` slots left in place.
std::string_view prompt_template(PromptKind kind);

/// Placeholder names the template requires, e.g. {"problem", "code_A", "code_B"}.
std::vector<std::string> prompt_slots(PromptKind kind);

/// Substitutes every required placeholder verbatim (single pass; slot values
/// are never re-scanned). Missing slots raise a template error.
std::string render_prompt(PromptKind kind, const std::map<std::string, std::string>& slots);

}  // namespace gencluster

#endif  // GENCLUSTER_PROMPTS_HPP
