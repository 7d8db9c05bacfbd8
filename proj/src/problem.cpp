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

#include "gencluster/problem.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include <json.hpp>

#include "gencluster/error.hpp"
#include "gencluster/util.hpp"

namespace gencluster {

using nlohmann::json;

const Subtask& ProblemPack::subtask(const std::string& id) const {
  for (const auto& st : subtasks) {
    if (st.subtask_id == id) return st;
  }
  raise(ErrorKind::Validation, "unknown subtask_id: " + id);
}

void validate_problem_pack(const ProblemPack& pack) {
  if (pack.problem_id.empty()) raise(ErrorKind::Validation, "problem_id is empty");
  if (pack.submission_cap <= 0)
    raise(ErrorKind::Validation, "submission_cap must be > 0 in problem " + pack.problem_id);
  if (pack.subtasks.empty())
    raise(ErrorKind::Validation, "subtasks is empty in problem " + pack.problem_id);

  std::set<std::string> seen_ids;
  double score_sum = 0.0;
  int expected_index = 1;
  for (const auto& st : pack.subtasks) {
    const std::string where = pack.problem_id + "/" + st.subtask_id;
    if (st.subtask_id.empty()) raise(ErrorKind::Validation, "subtask_id is empty in " + pack.problem_id);
    if (!seen_ids.insert(st.subtask_id).second)
      raise(ErrorKind::Validation, "duplicate subtask_id " + where);
    if (st.index != expected_index)
      raise(ErrorKind::Validation,
            st.index < expected_index
                ? "duplicate or non-increasing subtask index " + std::to_string(st.index) + " in " + where
                : "subtask index gap at " + where + " (expected " + std::to_string(expected_index) + ")");
    expected_index++;
    if (trim(st.statement).empty()) raise(ErrorKind::Validation, "statement is empty in " + where);
    if (st.max_score < 0) raise(ErrorKind::Validation, "max_score is negative in " + where);
    if (st.time_limit.count() <= 0) raise(ErrorKind::Validation, "time_limit must be > 0 in " + where);
    if (st.memory_limit_mib == 0) raise(ErrorKind::Validation, "memory_limit must be > 0 in " + where);
    if (trim(st.grader_source).empty()) raise(ErrorKind::Validation, "grader source is empty in " + where);
    score_sum += st.max_score;
  }
  if (std::abs(score_sum - pack.problem_total) > 1e-9) {
    raise(ErrorKind::Validation,
          "subtask max_score values sum to " + std::to_string(score_sum) + ", expected problem_total " +
              std::to_string(pack.problem_total) + " in problem " + pack.problem_id +
              (pack.total_overridden ? "" : " (set problem_total to override the default 100)"));
  }
}

namespace {

std::string read_relative(const fs::path& dir, const std::string& rel, const std::string& field,
                          const std::string& where) {
  if (rel.empty()) raise(ErrorKind::Validation, field + " path is empty in " + where);
  fs::path p = dir / rel;
  if (!fs::exists(p)) raise(ErrorKind::Ingestion, field + " file missing: " + p.string());
  return read_file(p);
}

std::vector<std::string> read_test_dir(const fs::path& dir) {
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".in") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  std::vector<std::string> tests;
  tests.reserve(files.size());
  for (const auto& f : files) tests.push_back(read_file(f));
  return tests;
}

}  // namespace

ProblemPack load_problem_pack(const fs::path& dir) {
  fs::path manifest_path = dir / "problem.json";
  if (!fs::exists(manifest_path))
    raise(ErrorKind::Ingestion, "missing manifest: " + manifest_path.string());

  json manifest;
  try {
    manifest = json::parse(read_file(manifest_path));
  } catch (const json::exception& e) {
    raise(ErrorKind::Ingestion, "unparseable manifest " + manifest_path.string() + ": " + e.what());
  }

  ProblemPack pack;
  try {
    pack.problem_id = manifest.at("problem_id").get<std::string>();
    pack.title = manifest.value("title", pack.problem_id);
    pack.submission_cap = manifest.value("submission_cap", 50);
    if (manifest.contains("problem_total")) {
      pack.problem_total = manifest.at("problem_total").get<double>();
      pack.total_overridden = true;
    }
    for (const auto& st_json : manifest.at("subtasks")) {
      Subtask st;
      st.subtask_id = st_json.at("subtask_id").get<std::string>();
      st.index = st_json.at("index").get<int>();
      const std::string where = pack.problem_id + "/" + st.subtask_id;
      st.statement = read_relative(dir, st_json.at("statement").get<std::string>(), "statement", where);
      st.max_score = st_json.at("max_score").get<double>();
      st.time_limit = std::chrono::milliseconds(st_json.at("time_limit_ms").get<std::int64_t>());
      st.memory_limit_mib = st_json.at("memory_limit_mib").get<std::uint64_t>();
      st.grader_source = read_relative(dir, st_json.at("grader").get<std::string>(), "grader", where);
      if (st_json.contains("harness"))
        st.harness_source = read_relative(dir, st_json.at("harness").get<std::string>(), "harness", where);
      st.output_only = st_json.value("output_only", false);
      if (st_json.contains("official_tests")) {
        fs::path tests_dir = dir / st_json.at("official_tests").get<std::string>();
        if (!fs::is_directory(tests_dir))
          raise(ErrorKind::Ingestion, "official_tests dir missing: " + tests_dir.string());
        st.official_tests = read_test_dir(tests_dir);
      }
      pack.subtasks.push_back(std::move(st));
    }
  } catch (const json::exception& e) {
    raise(ErrorKind::Ingestion, "bad manifest " + manifest_path.string() + ": " + e.what());
  }

  validate_problem_pack(pack);
  return pack;
}

void write_problem_pack(const ProblemPack& pack, const fs::path& dir) {
  validate_problem_pack(pack);
  json manifest;
  manifest["problem_id"] = pack.problem_id;
  manifest["title"] = pack.title;
  manifest["submission_cap"] = pack.submission_cap;
  if (pack.total_overridden) manifest["problem_total"] = pack.problem_total;
  json subtasks = json::array();
  for (const auto& st : pack.subtasks) {
    json j;
    j["subtask_id"] = st.subtask_id;
    j["index"] = st.index;
    j["max_score"] = st.max_score;
    j["time_limit_ms"] = st.time_limit.count();
    j["memory_limit_mib"] = st.memory_limit_mib;
    j["statement"] = "statements/" + st.subtask_id + ".txt";
    write_file(dir / "statements" / (st.subtask_id + ".txt"), st.statement);
    j["grader"] = "graders/" + st.subtask_id + ".cpp";
    write_file(dir / "graders" / (st.subtask_id + ".cpp"), st.grader_source);
    if (!st.harness_source.empty()) {
      j["harness"] = "harness/" + st.subtask_id + ".cpp";
      write_file(dir / "harness" / (st.subtask_id + ".cpp"), st.harness_source);
    }
    if (st.output_only) j["output_only"] = true;
    if (!st.official_tests.empty()) {
      j["official_tests"] = "tests/" + st.subtask_id;
      for (std::size_t i = 0; i < st.official_tests.size(); i++) {
        char name[16];
        std::snprintf(name, sizeof(name), "%03zu.in", i + 1);
        write_file(dir / "tests" / st.subtask_id / name, st.official_tests[i]);
      }
    }
    subtasks.push_back(std::move(j));
  }
  manifest["subtasks"] = std::move(subtasks);
  write_file(dir / "problem.json", manifest.dump(2) + "\n");
}

std::vector<ProblemPack> load_pack_root(const fs::path& dir) {
  if (!fs::is_directory(dir)) raise(ErrorKind::Ingestion, "pack directory missing: " + dir.string());
  if (fs::exists(dir / "problem.json")) return {load_problem_pack(dir)};

  std::vector<fs::path> problem_dirs;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_directory() && fs::exists(entry.path() / "problem.json"))
      problem_dirs.push_back(entry.path());
  }
  if (problem_dirs.empty())
    raise(ErrorKind::Ingestion, "no problem.json found under " + dir.string());
  std::sort(problem_dirs.begin(), problem_dirs.end());

  std::vector<ProblemPack> packs;
  packs.reserve(problem_dirs.size());
  for (const auto& p : problem_dirs) packs.push_back(load_problem_pack(p));
  std::sort(packs.begin(), packs.end(),
            [](const ProblemPack& a, const ProblemPack& b) { return a.problem_id < b.problem_id; });
  return packs;
}

}  // namespace gencluster
