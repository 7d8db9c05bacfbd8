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

#ifndef GENCLUSTER_CODEBLOCK_HPP
#define GENCLUSTER_CODEBLOCK_HPP

#include <optional>
#include <string>
#include <string_view>

namespace gencluster {

/// Returns the contents of the last fenced code block tagged for C++ (cpp,
/// c++, cxx, cc, c, or untagged). Completions often emit scratch blocks
/// first; the final block is the submitted solution. An unterminated final
/// fence is taken to end of text. Returns nullopt when no such block exists.
std::optional<std::string> extract_code_block(std::string_view answer);

/// Token estimate for text without backend-reported counts:
/// whitespace-delimited word count x 1.3, rounded.
long estimate_token_count(std::string_view text);

}  // namespace gencluster

#endif  // GENCLUSTER_CODEBLOCK_HPP
