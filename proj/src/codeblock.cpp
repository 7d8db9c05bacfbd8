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

#include "gencluster/codeblock.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "gencluster/util.hpp"

namespace gencluster {

namespace {

bool is_cpp_tag(std::string_view tag) {
  std::string lower(tag);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return lower.empty() || lower == "cpp" || lower == "c++" || lower == "cxx" || lower == "cc" ||
         lower == "c";
}

struct Line {
  std::size_t begin;  // offset of first char
  std::size_t end;    // offset past the newline (or text end)
  std::string_view text;
};

std::vector<Line> split_lines(std::string_view s) {
  std::vector<Line> lines;
  std::size_t pos = 0;
  while (pos <= s.size()) {
    std::size_t nl = s.find('\n', pos);
    std::size_t stop = nl == std::string_view::npos ? s.size() : nl;
    lines.push_back({pos, nl == std::string_view::npos ? s.size() : nl + 1, s.substr(pos, stop - pos)});
    if (nl == std::string_view::npos) break;
    pos = nl + 1;
  }
  return lines;
}

}  // namespace

std::optional<std::string> extract_code_block(std::string_view answer) {
  const auto lines = split_lines(answer);
  std::optional<std::string> last_block;

  std::size_t i = 0;
  while (i < lines.size()) {
    std::string_view line = lines[i].text;
    std::string_view stripped = line;
    while (!stripped.empty() && (stripped.back() == '\r' || stripped.back() == ' ')) stripped.remove_suffix(1);
    if (!stripped.starts_with("```")) {
      i++;
      continue;
    }
    std::string_view tag = stripped.substr(3);
    bool eligible = is_cpp_tag(tag);

    // Collect until the closing fence (or end of text for a truncated block).
    std::size_t body_begin = lines[i].end;
    std::size_t body_end = answer.size();
    std::size_t j = i + 1;
    for (; j < lines.size(); j++) {
      std::string_view cand = lines[j].text;
      while (!cand.empty() && (cand.back() == '\r' || cand.back() == ' ')) cand.remove_suffix(1);
      if (cand == "```") {
        body_end = lines[j].begin;
        break;
      }
    }
    if (eligible) {
      std::string body(answer.substr(body_begin, body_end - body_begin));
      if (!body.empty() && body.back() == '\n') body.pop_back();
      last_block = std::move(body);
    }
    i = (j < lines.size()) ? j + 1 : lines.size();
  }
  return last_block;
}

long estimate_token_count(std::string_view text) {
  long words = 0;
  bool in_word = false;
  for (char c : text) {
    bool space = std::isspace(static_cast<unsigned char>(c));
    if (!space && !in_word) words++;
    in_word = !space;
  }
  return std::lround(static_cast<double>(words) * 1.3);
}

}  // namespace gencluster
