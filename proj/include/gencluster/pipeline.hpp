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

#ifndef GENCLUSTER_PIPELINE_HPP
#define GENCLUSTER_PIPELINE_HPP

#include <map>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "gencluster/backend.hpp"
#include "gencluster/config.hpp"
#include "gencluster/problem.hpp"
#include "gencluster/sandbox.hpp"

namespace gencluster {

enum class Stage { Generate, TestGen, Cluster, Rank, Submit, Report };

const std::vector<Stage>& all_stages();
std::string_view stage_name(Stage stage);
Stage stage_from_name(std::string_view name);

struct RunManifest {
  std::string run_id;
  std::string pack_ref;
  RunConfig config;
  std::map<std::string, std::string> stage_status;  // stage -> pending|done|failed
  std::map<std::string, std::string> artifact_paths;  // stage -> run-dir-relative path
  std::map<std::string, std::string> stage_errors;

  nlohmann::json to_json() const;
  static RunManifest from_json(const nlohmann::json& j);
};

/// Staged, resumable orchestration over a run directory. Artifacts are
/// content-addressed JSON documents under objects/; test inputs are
/// individual files under tests/ plus an index inside the testgen artifact.
/// All randomness derives from config.rng_seed, so two runs with equal seeds
/// and mock backends produce byte-identical artifact trees.
class Pipeline {
 public:
  Pipeline(fs::path run_dir, fs::path pack_dir, RunConfig config,
           std::shared_ptr<CompletionBackend> backend);

  /// Executes one stage for every subtask in the pack. Re-running a done
  /// stage is a no-op unless force; pending upstream stages raise an
  /// ordering error; failures are recorded in the manifest and rethrown.
  void run_stage(Stage stage, bool force = false);
  void run_all(bool force = false);

  const RunManifest& manifest() const { return manifest_; }
  const fs::path& run_dir() const { return run_dir_; }
  const std::vector<ProblemPack>& problems() const { return problems_; }

  /// Parameter sweeps over persisted artifacts (no candidate regeneration).
  /// Returns the rows written to sweep_<param>.tsv.
  std::vector<std::vector<double>> sweep(const std::string& param,
                                         const std::vector<double>& values);

  std::string report_text() const;
  fs::path report_path() const { return run_dir_ / "report.txt"; }

 private:
  struct SubtaskData;

  void save_manifest();
  fs::path store_artifact(Stage stage, const nlohmann::json& doc);
  nlohmann::json load_artifact(Stage stage) const;
  void require_done(Stage stage) const;
  Sandbox& sandbox();

  void stage_generate();
  void stage_testgen();
  void stage_cluster();
  void stage_rank();
  void stage_submit();
  void stage_report();

  nlohmann::json grade_pool(nlohmann::json cluster_doc);

  fs::path run_dir_;
  fs::path pack_dir_;
  RunManifest manifest_;
  std::vector<ProblemPack> problems_;
  std::shared_ptr<CompletionBackend> backend_;
  std::unique_ptr<Sandbox> sandbox_;
};

}  // namespace gencluster

#endif  // GENCLUSTER_PIPELINE_HPP
