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

#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "gencluster/backend.hpp"
#include "gencluster/config.hpp"
#include "gencluster/error.hpp"
#include "gencluster/pipeline.hpp"
#include "gencluster/util.hpp"

namespace {

using namespace gencluster;
using nlohmann::json;

std::shared_ptr<CompletionBackend> make_backend(const RunConfig& cfg) {
  if (cfg.backend == "mock") {
    if (cfg.mock_script.empty())
      raise(ErrorKind::Config, "mock backend needs --mock-script (or mock_script in the config)");
    return std::make_shared<MockBackend>(fs::path(cfg.mock_script));
  }
  HttpBackendOptions options;
  options.base_url = cfg.base_url;
  options.model = cfg.model;
  return std::make_shared<HttpBackend>(options);
}

std::vector<double> parse_values(const std::string& csv) {
  std::vector<double> values;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) values.push_back(std::stod(item));
  }
  return values;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"GenCluster pipeline: generate, cluster, rank and submit candidate programs"};
  app.require_subcommand(1);

  // run
  auto* run_cmd = app.add_subcommand("run", "Run pipeline stages against a problem pack");
  std::string pack_dir, config_path, run_dir_opt, stage_opt, backend_opt, mock_script_opt;
  std::string scratch_opt, strategy_opt;
  bool force = false;
  std::int64_t seed_opt = -1;
  int workers_opt = 0;
  std::uint64_t stdout_cap_opt = 0;
  run_cmd->add_option("--pack", pack_dir, "Problem pack directory")->required();
  run_cmd->add_option("--config", config_path, "Run config JSON file");
  run_cmd->add_option("--run-dir", run_dir_opt, "Run directory (default runs/<run_id>)");
  run_cmd->add_option("--stage", stage_opt, "Run one stage (generate|testgen|cluster|rank|submit|report)");
  run_cmd->add_flag("--force", force, "Re-run stages that are already done");
  run_cmd->add_option("--seed", seed_opt, "Override rng_seed");
  run_cmd->add_option("--backend", backend_opt, "mock|live");
  run_cmd->add_option("--mock-script", mock_script_opt, "Mock backend script file");
  run_cmd->add_option("--workers", workers_opt, "Worker pool size");
  run_cmd->add_option("--scratch-dir", scratch_opt, "Sandbox scratch directory");
  run_cmd->add_option("--stdout-cap-bytes", stdout_cap_opt, "Per-run stdout capture cap");
  run_cmd->add_option("--strategy", strategy_opt, "Ranking strategy (Table-1 name)");

  // sweep
  auto* sweep_cmd = app.add_subcommand("sweep", "Sweep a parameter over persisted run artifacts");
  std::string sweep_run_dir, sweep_param, sweep_values;
  sweep_cmd->add_option("--run", sweep_run_dir, "Run directory")->required();
  sweep_cmd->add_option("--param", sweep_param, "k|g_n|num_tests")->required();
  sweep_cmd->add_option("--values", sweep_values, "Comma-separated values")->required();

  // report
  auto* report_cmd = app.add_subcommand("report", "Print the report for a run");
  std::string report_run_dir;
  report_cmd->add_option("--run", report_run_dir, "Run directory")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run_cmd) {
      RunConfig cfg;
      if (!config_path.empty()) cfg = load_run_config(config_path);
      if (seed_opt >= 0) cfg.rng_seed = static_cast<std::uint64_t>(seed_opt);
      if (!backend_opt.empty()) cfg.backend = backend_opt;
      if (!mock_script_opt.empty()) cfg.mock_script = mock_script_opt;
      if (workers_opt > 0) cfg.workers = workers_opt;
      if (!scratch_opt.empty()) cfg.scratch_dir = scratch_opt;
      if (stdout_cap_opt > 0) cfg.stdout_cap_bytes = stdout_cap_opt;
      if (!strategy_opt.empty()) cfg.strategy = strategy_opt;
      cfg = validate_run_config(cfg);

      fs::path run_dir = run_dir_opt;
      if (run_dir.empty()) {
        // Mirror the pipeline's run-id derivation so resumes land in the
        // same directory.
        const std::string id =
            "run-" + digest_bytes(fs::path(pack_dir).generic_string() + "\n" +
                                  run_config_to_json(cfg).dump())
                         .hex()
                         .substr(0, 12);
        run_dir = fs::path("runs") / id;
      }

      Pipeline pipeline(run_dir, pack_dir, cfg, make_backend(cfg));
      if (stage_opt.empty()) {
        pipeline.run_all(force);
        std::cout << pipeline.report_text();
      } else {
        pipeline.run_stage(stage_from_name(stage_opt), force);
      }
      std::cout << "run dir: " << pipeline.run_dir().string() << "\n";
      return 0;
    }

    if (*sweep_cmd) {
      const json manifest = json::parse(read_file(fs::path(sweep_run_dir) / "manifest.json"));
      RunConfig cfg = parse_run_config(manifest.at("config"));
      Pipeline pipeline(sweep_run_dir, manifest.at("pack_ref").get<std::string>(), cfg,
                        make_backend(cfg));
      auto rows = pipeline.sweep(sweep_param, parse_values(sweep_values));
      for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.size(); i++)
          std::cout << (i ? "\t" : "") << row[i];
        std::cout << "\n";
      }
      return 0;
    }

    if (*report_cmd) {
      std::cout << read_file(fs::path(report_run_dir) / "report.txt");
      return 0;
    }
  } catch (const Error& e) {
    std::cerr << "gencluster: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "gencluster: unexpected failure: " << e.what() << "\n";
    return 3;
  }
  return 1;
}
