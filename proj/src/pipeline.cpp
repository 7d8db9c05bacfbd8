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

#include "gencluster/pipeline.hpp"

#include <algorithm>
#include <cinttypes>
#include <cstdio>
#include <random>
#include <set>
#include <sstream>

#include "gencluster/clustering.hpp"
#include "gencluster/error.hpp"
#include "gencluster/gateway.hpp"
#include "gencluster/grading.hpp"
#include "gencluster/metrics.hpp"
#include "gencluster/ranking.hpp"
#include "gencluster/submission.hpp"
#include "gencluster/testgen.hpp"
#include "gencluster/util.hpp"

namespace gencluster {

using nlohmann::json;

namespace {

constexpr int kReportTopK = 50;
constexpr double kEps = 1e-9;

std::string subtask_prefix(const ProblemPack& problem, const Subtask& subtask) {
  return problem.problem_id + "." + subtask.subtask_id;
}

json candidate_to_json(const Candidate& c) {
  json j;
  j["id"] = c.candidate_id;
  j["status"] = std::string(candidate_status_name(c.status));
  j["reasoning_tokens"] = c.reasoning_token_count;
  if (!c.source.empty()) j["source"] = json_from_bytes(c.source);
  return j;
}

Candidate candidate_from_json(const json& j, const std::string& subtask_id) {
  Candidate c;
  c.candidate_id = j.at("id").get<std::string>();
  c.subtask_id = subtask_id;
  c.status = candidate_status_from_name(j.at("status").get<std::string>());
  c.reasoning_token_count = j.at("reasoning_tokens").get<long>();
  if (j.contains("source")) c.source = bytes_from_json(j.at("source"));
  return c;
}

json output_to_json(const TestOutput& o) {
  json j;
  j["d"] = o.digest.hex();
  j["n"] = o.size;
  if (o.truncated) j["t"] = true;
  return j;
}

TestOutput output_from_json(const json& j) {
  TestOutput o;
  o.digest = Digest128::from_hex(j.at("d").get<std::string>());
  o.size = j.at("n").get<std::uint64_t>();
  o.truncated = j.value("t", false);
  return o;
}

json cluster_to_json(const Cluster& c) {
  json j;
  j["id"] = c.cluster_id;
  j["signature"] = c.signature.hex();
  j["members"] = c.member_ids;
  j["representative"] = c.representative_id;
  return j;
}

Cluster cluster_from_json(const json& j, const std::string& subtask_id) {
  Cluster c;
  c.cluster_id = j.at("id").get<std::string>();
  c.subtask_id = subtask_id;
  c.signature = Digest128::from_hex(j.at("signature").get<std::string>());
  c.member_ids = j.at("members").get<std::vector<std::string>>();
  c.representative_id = j.at("representative").get<std::string>();
  return c;
}

const json& find_entry(const json& doc, const char* array_key, const char* id_key,
                       const std::string& id) {
  for (const auto& entry : doc.at(array_key)) {
    if (entry.at(id_key).get<std::string>() == id) return entry;
  }
  raise(ErrorKind::Stage, std::string("artifact missing ") + id_key + " '" + id + "'");
}

std::string fmt_score(double value) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", value);
  return buf;
}

}  // namespace

const std::vector<Stage>& all_stages() {
  static const std::vector<Stage> stages = {Stage::Generate, Stage::TestGen, Stage::Cluster,
                                            Stage::Rank,     Stage::Submit,  Stage::Report};
  return stages;
}

std::string_view stage_name(Stage stage) {
  switch (stage) {
    case Stage::Generate: return "generate";
    case Stage::TestGen: return "testgen";
    case Stage::Cluster: return "cluster";
    case Stage::Rank: return "rank";
    case Stage::Submit: return "submit";
    case Stage::Report: return "report";
  }
  return "unknown";
}

Stage stage_from_name(std::string_view name) {
  for (Stage s : all_stages())
    if (stage_name(s) == name) return s;
  raise(ErrorKind::Config, "unknown stage: '" + std::string(name) + "'");
}

json RunManifest::to_json() const {
  json j;
  j["run_id"] = run_id;
  j["pack_ref"] = pack_ref;
  j["config"] = run_config_to_json(config);
  j["stage_status"] = stage_status;
  j["artifact_paths"] = artifact_paths;
  j["stage_errors"] = stage_errors;
  return j;
}

RunManifest RunManifest::from_json(const json& j) {
  RunManifest m;
  m.run_id = j.at("run_id").get<std::string>();
  m.pack_ref = j.at("pack_ref").get<std::string>();
  m.config = parse_run_config(j.at("config"));
  m.stage_status = j.at("stage_status").get<std::map<std::string, std::string>>();
  m.artifact_paths = j.at("artifact_paths").get<std::map<std::string, std::string>>();
  m.stage_errors = j.value("stage_errors", std::map<std::string, std::string>{});
  return m;
}

Pipeline::Pipeline(fs::path run_dir, fs::path pack_dir, RunConfig config,
                   std::shared_ptr<CompletionBackend> backend)
    : run_dir_(std::move(run_dir)), pack_dir_(std::move(pack_dir)), backend_(std::move(backend)) {
  config = validate_run_config(std::move(config));
  problems_ = load_pack_root(pack_dir_);

  const std::string pack_ref = pack_dir_.generic_string();
  const std::string run_id =
      "run-" + digest_bytes(pack_ref + "\n" + run_config_to_json(config).dump()).hex().substr(0, 12);

  fs::create_directories(run_dir_);
  const fs::path manifest_path = run_dir_ / "manifest.json";
  if (fs::exists(manifest_path)) {
    manifest_ = RunManifest::from_json(json::parse(read_file(manifest_path)));
    if (manifest_.run_id != run_id)
      raise(ErrorKind::Config, "run dir " + run_dir_.string() +
                                   " belongs to a different run (manifest " + manifest_.run_id +
                                   ", requested " + run_id + ")");
  } else {
    manifest_.run_id = run_id;
    manifest_.pack_ref = pack_ref;
    manifest_.config = config;
    for (Stage s : all_stages()) manifest_.stage_status[std::string(stage_name(s))] = "pending";
    save_manifest();
  }
}

Sandbox& Pipeline::sandbox() {
  if (!sandbox_) {
    SandboxConfig sc;
    if (!manifest_.config.scratch_dir.empty()) sc.scratch_root = manifest_.config.scratch_dir;
    sc.stdout_cap_bytes = manifest_.config.stdout_cap_bytes;
    sandbox_ = std::make_unique<Sandbox>(sc);
  }
  return *sandbox_;
}

void Pipeline::save_manifest() {
  write_file(run_dir_ / "manifest.json", manifest_.to_json().dump(1) + "\n");
}

fs::path Pipeline::store_artifact(Stage stage, const json& doc) {
  const std::string body = doc.dump(1) + "\n";
  const std::string rel = "objects/" + digest_bytes(body).hex() + ".json";
  write_file(run_dir_ / rel, body);
  manifest_.artifact_paths[std::string(stage_name(stage))] = rel;
  return run_dir_ / rel;
}

json Pipeline::load_artifact(Stage stage) const {
  auto it = manifest_.artifact_paths.find(std::string(stage_name(stage)));
  if (it == manifest_.artifact_paths.end())
    raise(ErrorKind::Ordering, "no artifact recorded for stage '" + std::string(stage_name(stage)) + "'");
  return json::parse(read_file(run_dir_ / it->second));
}

void Pipeline::require_done(Stage stage) const {
  auto it = manifest_.stage_status.find(std::string(stage_name(stage)));
  if (it == manifest_.stage_status.end() || it->second != "done")
    raise(ErrorKind::Ordering,
          "stage '" + std::string(stage_name(stage)) + "' has not completed");
}

void Pipeline::run_stage(Stage stage, bool force) {
  const std::string name(stage_name(stage));
  for (Stage upstream : all_stages()) {
    if (upstream == stage) break;
    auto it = manifest_.stage_status.find(std::string(stage_name(upstream)));
    if (it == manifest_.stage_status.end() || it->second != "done")
      raise(ErrorKind::Ordering, "stage '" + name + "' requires '" +
                                     std::string(stage_name(upstream)) + "' to be done first");
  }
  if (manifest_.stage_status[name] == "done" && !force) return;

  try {
    switch (stage) {
      case Stage::Generate: stage_generate(); break;
      case Stage::TestGen: stage_testgen(); break;
      case Stage::Cluster: stage_cluster(); break;
      case Stage::Rank: stage_rank(); break;
      case Stage::Submit: stage_submit(); break;
      case Stage::Report: stage_report(); break;
    }
  } catch (const std::exception& e) {
    manifest_.stage_status[name] = "failed";
    manifest_.stage_errors[name] = e.what();
    save_manifest();
    const Error* known = dynamic_cast<const Error*>(&e);
    throw Error(known ? known->kind() : ErrorKind::Stage,
                "stage '" + name + "' failed: " + e.what());
  }
  manifest_.stage_status[name] = "done";
  manifest_.stage_errors.erase(name);
  save_manifest();
}

void Pipeline::run_all(bool force) {
  for (Stage s : all_stages()) run_stage(s, force);
}

void Pipeline::stage_generate() {
  const RunConfig& cfg = manifest_.config;
  json doc;
  doc["problems"] = json::array();
  for (const auto& problem : problems_) {
    json pj;
    pj["problem_id"] = problem.problem_id;
    pj["subtasks"] = json::array();
    for (const auto& subtask : problem.subtasks) {
      const std::string prefix = subtask_prefix(problem, subtask);
      std::vector<Candidate> candidates =
          generate_candidates(*backend_, subtask, cfg.k_generations, cfg, prefix);
      json sj;
      sj["subtask_id"] = subtask.subtask_id;
      sj["candidates"] = json::array();
      for (const auto& c : candidates) sj["candidates"].push_back(candidate_to_json(c));
      pj["subtasks"].push_back(std::move(sj));
    }
    doc["problems"].push_back(std::move(pj));
  }
  store_artifact(Stage::Generate, doc);
}

void Pipeline::stage_testgen() {
  const RunConfig& cfg = manifest_.config;
  json doc;
  doc["problems"] = json::array();
  for (const auto& problem : problems_) {
    json pj;
    pj["problem_id"] = problem.problem_id;
    pj["subtasks"] = json::array();
    for (const auto& subtask : problem.subtasks) {
      const std::string prefix = subtask_prefix(problem, subtask);
      BuiltPrograms generators =
          build_generators(*backend_, sandbox(), subtask, cfg.num_generators, cfg, prefix);
      BuiltPrograms validators =
          build_validators(*backend_, sandbox(), subtask, cfg.num_validators, cfg, prefix);
      std::mt19937_64 rng(derive_seed(cfg.rng_seed, "testgen/" + prefix));
      TestGenReport report =
          collect_tests(sandbox(), generators.programs, validators.programs, subtask.subtask_id,
                        cfg.num_tests, cfg.validator_threshold, rng, cfg.workers);

      json sj;
      sj["subtask_id"] = subtask.subtask_id;
      sj["generator_sources"] = json::array();
      for (const auto& s : generators.sources) sj["generator_sources"].push_back(json_from_bytes(s));
      sj["validator_sources"] = json::array();
      for (const auto& s : validators.sources) sj["validator_sources"].push_back(json_from_bytes(s));
      sj["build"] = {{"generators_requested", generators.requested},
                     {"generators_unparsed", generators.unparsed},
                     {"generators_compile_failed", generators.compile_failed},
                     {"validators_requested", validators.requested},
                     {"validators_unparsed", validators.unparsed},
                     {"validators_compile_failed", validators.compile_failed}};
      sj["attempts"] = report.attempts;
      sj["generator_invocations"] = report.generator_invocations;
      sj["tests"] = json::array();
      for (std::size_t i = 0; i < report.cases.size(); i++) {
        const TestCase& test = report.cases[i];
        char name[16];
        std::snprintf(name, sizeof(name), "%03zu.in", i + 1);
        const std::string rel = "tests/" + prefix + "/" + name;
        write_file(run_dir_ / rel, test.input_bytes);
        json tj;
        tj["file"] = rel;
        tj["digest"] = digest_bytes(test.input_bytes).hex();
        tj["generator_index"] = test.generator_index;
        tj["approvals"] = test.approvals;
        tj["validators_total"] = test.validators_total;
        tj["seed"] = test.seed;
        sj["tests"].push_back(std::move(tj));
      }
      write_file(run_dir_ / ("tests/" + prefix + "/index.json"), sj.at("tests").dump(1) + "\n");
      pj["subtasks"].push_back(std::move(sj));
    }
    doc["problems"].push_back(std::move(pj));
  }
  store_artifact(Stage::TestGen, doc);
}

void Pipeline::stage_cluster() {
  const RunConfig& cfg = manifest_.config;
  const json generated = load_artifact(Stage::Generate);
  const json testgen_doc = load_artifact(Stage::TestGen);

  json doc;
  doc["problems"] = json::array();
  for (const auto& problem : problems_) {
    const json& gen_p = find_entry(generated, "problems", "problem_id", problem.problem_id);
    const json& tg_p = find_entry(testgen_doc, "problems", "problem_id", problem.problem_id);
    json pj;
    pj["problem_id"] = problem.problem_id;
    pj["subtasks"] = json::array();
    for (const auto& subtask : problem.subtasks) {
      const json& gen_s = find_entry(gen_p, "subtasks", "subtask_id", subtask.subtask_id);
      const json& tg_s = find_entry(tg_p, "subtasks", "subtask_id", subtask.subtask_id);

      std::vector<Candidate> candidates;
      for (const auto& cj : gen_s.at("candidates"))
        candidates.push_back(candidate_from_json(cj, subtask.subtask_id));

      std::vector<std::string> tests;
      for (const auto& tj : tg_s.at("tests"))
        tests.push_back(read_file(run_dir_ / tj.at("file").get<std::string>()));

      std::vector<CompiledProgram> programs =
          compile_candidates(sandbox(), subtask, candidates, cfg.workers);
      execute_matrix(sandbox(), candidates, programs, tests,
                     RunLimits{subtask.time_limit, subtask.memory_limit_mib}, cfg.workers);
      std::vector<Cluster> clusters = cluster_by_behavior(candidates);

      json sj;
      sj["subtask_id"] = subtask.subtask_id;
      sj["compile_meta"] = sandbox().compile_metadata();
      json statuses = json::object();
      json outputs = json::object();
      for (const auto& c : candidates) {
        statuses[c.candidate_id] = std::string(candidate_status_name(c.status));
        if (!c.outputs.empty()) {
          json vec = json::array();
          for (const auto& o : c.outputs) vec.push_back(output_to_json(o));
          outputs[c.candidate_id] = std::move(vec);
        }
      }
      sj["statuses"] = std::move(statuses);
      sj["outputs"] = std::move(outputs);
      sj["clusters"] = json::array();
      for (const auto& cluster : clusters) sj["clusters"].push_back(cluster_to_json(cluster));
      pj["subtasks"].push_back(std::move(sj));
    }
    doc["problems"].push_back(std::move(pj));
  }
  store_artifact(Stage::Cluster, doc);
}

namespace {

/// Rebuilds candidates with post-cluster statuses, sources and outputs.
std::vector<Candidate> candidates_with_outputs(const json& gen_s, const json& cl_s,
                                               const std::string& subtask_id) {
  std::vector<Candidate> candidates;
  for (const auto& cj : gen_s.at("candidates")) {
    Candidate c = candidate_from_json(cj, subtask_id);
    const std::string& id = c.candidate_id;
    if (cl_s.at("statuses").contains(id))
      c.status = candidate_status_from_name(cl_s.at("statuses").at(id).get<std::string>());
    if (cl_s.at("outputs").contains(id)) {
      for (const auto& oj : cl_s.at("outputs").at(id)) c.outputs.push_back(output_from_json(oj));
    }
    candidates.push_back(std::move(c));
  }
  return candidates;
}

json game_to_json(const GameRecord& g) {
  json j;
  j["round"] = g.round;
  j["initiator"] = g.initiator_id;
  j["opponent"] = g.opponent_id;
  j["initiator_first"] = g.initiator_shown_first;
  if (g.cached) j["cached"] = true;
  switch (g.verdict.winner) {
    case JudgeVerdict::Winner::ShownA: j["winner"] = "A"; break;
    case JudgeVerdict::Winner::ShownB: j["winner"] = "B"; break;
    case JudgeVerdict::Winner::Draw: j["winner"] = "draw"; break;
  }
  j["parsed"] = g.verdict.parsed;
  if (g.verdict.parsed) {
    j["score_a"] = g.verdict.score_a;
    j["score_b"] = g.verdict.score_b;
  }
  if (!g.verdict.raw_text.empty()) j["raw"] = json_from_bytes(g.verdict.raw_text);
  return j;
}

}  // namespace

void Pipeline::stage_rank() {
  const RunConfig& cfg = manifest_.config;
  const json generated = load_artifact(Stage::Generate);
  const json clustered = load_artifact(Stage::Cluster);
  const Strategy strategy = strategy_from_name(cfg.strategy);

  json doc;
  doc["strategy"] = cfg.strategy;
  doc["problems"] = json::array();
  for (const auto& problem : problems_) {
    const json& gen_p = find_entry(generated, "problems", "problem_id", problem.problem_id);
    const json& cl_p = find_entry(clustered, "problems", "problem_id", problem.problem_id);
    json pj;
    pj["problem_id"] = problem.problem_id;
    pj["subtasks"] = json::array();
    for (const auto& subtask : problem.subtasks) {
      const std::string prefix = subtask_prefix(problem, subtask);
      const json& gen_s = find_entry(gen_p, "subtasks", "subtask_id", subtask.subtask_id);
      const json& cl_s = find_entry(cl_p, "subtasks", "subtask_id", subtask.subtask_id);

      std::vector<Candidate> candidates =
          candidates_with_outputs(gen_s, cl_s, subtask.subtask_id);
      std::vector<Cluster> clusters;
      for (const auto& cj : cl_s.at("clusters"))
        clusters.push_back(cluster_from_json(cj, subtask.subtask_id));

      OrderedJudge judge = make_llm_judge(*backend_, subtask, cfg, prefix);
      std::mt19937_64 rng(derive_seed(cfg.rng_seed, "rank/" + prefix));
      ClusterRanking ranking = rank_with_strategy(strategy, clusters, candidates, judge,
                                                  cfg.games_per_cluster, rng);

      json sj;
      sj["subtask_id"] = subtask.subtask_id;
      sj["ordered_cluster_ids"] = ranking.ordered_cluster_ids;
      sj["wins"] = ranking.per_cluster_wins;
      sj["avg_score"] = ranking.per_cluster_avg_score;
      sj["games"] = json::array();
      for (const auto& game : ranking.game_log) sj["games"].push_back(game_to_json(game));
      pj["subtasks"].push_back(std::move(sj));
    }
    doc["problems"].push_back(std::move(pj));
  }
  store_artifact(Stage::Rank, doc);
}

void Pipeline::stage_submit() {
  const RunConfig& cfg = manifest_.config;
  const json generated = load_artifact(Stage::Generate);
  const json clustered = load_artifact(Stage::Cluster);
  const json ranked = load_artifact(Stage::Rank);
  const Strategy strategy = strategy_from_name(cfg.strategy);

  json doc;
  doc["problems"] = json::array();
  double grand_total = 0.0;
  for (const auto& problem : problems_) {
    const json& gen_p = find_entry(generated, "problems", "problem_id", problem.problem_id);
    const json& cl_p = find_entry(clustered, "problems", "problem_id", problem.problem_id);
    const json& rk_p = find_entry(ranked, "problems", "problem_id", problem.problem_id);

    std::map<std::string, std::vector<Cluster>> clusters_per_subtask;
    std::map<std::string, ClusterRanking> rankings;
    std::map<std::string, std::vector<Candidate>> candidates_per_subtask;
    for (const auto& subtask : problem.subtasks) {
      const json& gen_s = find_entry(gen_p, "subtasks", "subtask_id", subtask.subtask_id);
      const json& cl_s = find_entry(cl_p, "subtasks", "subtask_id", subtask.subtask_id);
      const json& rk_s = find_entry(rk_p, "subtasks", "subtask_id", subtask.subtask_id);

      candidates_per_subtask[subtask.subtask_id] =
          candidates_with_outputs(gen_s, cl_s, subtask.subtask_id);
      std::vector<Cluster> clusters;
      for (const auto& cj : cl_s.at("clusters"))
        clusters.push_back(cluster_from_json(cj, subtask.subtask_id));
      clusters_per_subtask[subtask.subtask_id] = std::move(clusters);

      ClusterRanking ranking;
      ranking.subtask_id = subtask.subtask_id;
      ranking.ordered_cluster_ids = rk_s.at("ordered_cluster_ids").get<std::vector<std::string>>();
      rankings[subtask.subtask_id] = std::move(ranking);
    }

    std::unique_ptr<SubmissionPlanner> planner;
    if (strategy_uses_clusters(strategy)) {
      planner =
          plan_round_robin(problem, rankings, clusters_per_subtask, problem.submission_cap);
    } else {
      std::map<std::string, std::vector<std::string>> ordered;
      for (const auto& subtask : problem.subtasks) {
        std::vector<const Candidate*> pool;
        for (const auto& c : candidates_per_subtask[subtask.subtask_id])
          if (c.status == CandidateStatus::Ok) pool.push_back(&c);
        if (strategy == Strategy::Longest) {
          std::sort(pool.begin(), pool.end(), [](const Candidate* a, const Candidate* b) {
            if (a->reasoning_token_count != b->reasoning_token_count)
              return a->reasoning_token_count > b->reasoning_token_count;
            return a->candidate_id < b->candidate_id;
          });
        } else {
          std::mt19937_64 rng(derive_seed(
              cfg.rng_seed, "plan/" + subtask_prefix(problem, subtask)));
          std::shuffle(pool.begin(), pool.end(), rng);
        }
        auto& ids = ordered[subtask.subtask_id];
        for (const auto* c : pool) ids.push_back(c->candidate_id);
      }
      planner = plan_flat(problem, ordered, problem.submission_cap);
    }

    // Grading closure: compile (cached) and grade against the pack.
    std::map<std::string, const Candidate*> by_id;
    for (const auto& [subtask_id, cands] : candidates_per_subtask)
      for (const auto& c : cands) by_id[c.candidate_id] = &c;
    GradeFn grade_fn = [&](const PlanEntry& entry) -> double {
      const Subtask& subtask = problem.subtask(entry.subtask_id);
      const Candidate* candidate = by_id.at(entry.candidate_id);
      CompiledProgram solution =
          sandbox().compile(attach_harness(subtask, candidate->source), ProgramKind::Solution);
      if (!solution.compile_ok) return 0.0;
      CompiledProgram grader = sandbox().compile(subtask.grader_source, ProgramKind::Grader);
      if (!grader.compile_ok)
        raise(ErrorKind::Environment,
              "pack grader does not compile for subtask " + subtask.subtask_id);
      return grade(sandbox(), solution, grader, subtask).score;
    };

    ExecutedPlan executed = execute_plan(*planner, grade_fn);
    grand_total += executed.outcome.total;

    json pj;
    pj["problem_id"] = problem.problem_id;
    pj["cap"] = executed.plan.cap;
    pj["strategy"] = cfg.strategy;
    pj["entries"] = json::array();
    for (const auto& entry : executed.plan.entries) {
      json ej;
      ej["subtask"] = entry.subtask_id;
      if (!entry.cluster_id.empty()) ej["cluster"] = entry.cluster_id;
      ej["candidate"] = entry.candidate_id;
      ej["score"] = entry.realized_score;
      pj["entries"].push_back(std::move(ej));
    }
    pj["per_subtask_best"] = executed.outcome.per_subtask_best;
    pj["total"] = executed.outcome.total;
    pj["used"] = executed.outcome.submissions_used;
    if (executed.aborted_error) pj["aborted"] = *executed.aborted_error;
    doc["problems"].push_back(std::move(pj));

    if (executed.aborted_error)
      raise(ErrorKind::Stage, "grading aborted for problem " + problem.problem_id + ": " +
                                  *executed.aborted_error);
  }
  doc["grand_total"] = grand_total;
  store_artifact(Stage::Submit, doc);
}

json Pipeline::grade_pool(json cluster_doc) {
  // Grades every executed candidate once (deduplicated by source digest) so
  // metrics and sweeps can reuse ground truth without re-running programs.
  const json generated = load_artifact(Stage::Generate);
  json pool = json::object();
  for (const auto& problem : problems_) {
    const json& gen_p = find_entry(generated, "problems", "problem_id", problem.problem_id);
    const json& cl_p = find_entry(cluster_doc, "problems", "problem_id", problem.problem_id);
    json pj = json::object();
    for (const auto& subtask : problem.subtasks) {
      const json& gen_s = find_entry(gen_p, "subtasks", "subtask_id", subtask.subtask_id);
      const json& cl_s = find_entry(cl_p, "subtasks", "subtask_id", subtask.subtask_id);
      std::vector<Candidate> candidates =
          candidates_with_outputs(gen_s, cl_s, subtask.subtask_id);

      CompiledProgram grader = sandbox().compile(subtask.grader_source, ProgramKind::Grader);
      if (!grader.compile_ok)
        raise(ErrorKind::Environment,
              "pack grader does not compile for subtask " + subtask.subtask_id);

      std::map<std::string, double> by_source_digest;
      json sj = json::object();
      for (const auto& candidate : candidates) {
        if (candidate.status != CandidateStatus::Ok) continue;
        const std::string source = attach_harness(subtask, candidate.source);
        const std::string key = digest_bytes(source).hex();
        auto it = by_source_digest.find(key);
        double score;
        if (it != by_source_digest.end()) {
          score = it->second;
        } else {
          CompiledProgram solution = sandbox().compile(source, ProgramKind::Solution);
          score = solution.compile_ok ? grade(sandbox(), solution, grader, subtask).score : 0.0;
          by_source_digest[key] = score;
        }
        sj[candidate.candidate_id] = score;
      }
      pj[subtask.subtask_id] = std::move(sj);
    }
    pool[problem.problem_id] = std::move(pj);
  }
  return pool;
}

void Pipeline::stage_report() {
  const RunConfig& cfg = manifest_.config;
  const json generated = load_artifact(Stage::Generate);
  const json clustered = load_artifact(Stage::Cluster);
  const json ranked = load_artifact(Stage::Rank);
  const json submitted = load_artifact(Stage::Submit);

  const json pool = grade_pool(clustered);

  // Labels: a candidate is "good" when it reaches the maximum achieved grade
  // of its subtask's pool.
  std::map<std::string, bool> labels;
  std::map<std::string, std::vector<double>> pool_scores;
  for (const auto& [problem_id, subtasks] : pool.items()) {
    for (const auto& [subtask_id, grades] : subtasks.items()) {
      double best = 0.0;
      for (const auto& [candidate_id, score] : grades.items())
        best = std::max(best, score.get<double>());
      auto& scores = pool_scores[problem_id + "." + subtask_id];
      for (const auto& [candidate_id, score] : grades.items()) {
        labels[candidate_id] = score.get<double>() + kEps >= best;
        scores.push_back(score.get<double>());
      }
    }
  }

  // Pooled clusters + rankings + the best graded cluster per subtask.
  std::vector<Cluster> all_clusters;
  std::map<std::string, ClusterRanking> rankings;
  std::map<std::string, std::string> best_cluster;
  std::map<std::string, std::vector<Candidate>> candidates_per_subtask;
  for (const auto& problem : problems_) {
    const json& gen_p = find_entry(generated, "problems", "problem_id", problem.problem_id);
    const json& cl_p = find_entry(clustered, "problems", "problem_id", problem.problem_id);
    const json& rk_p = find_entry(ranked, "problems", "problem_id", problem.problem_id);
    for (const auto& subtask : problem.subtasks) {
      const std::string prefix = subtask_prefix(problem, subtask);
      const json& gen_s = find_entry(gen_p, "subtasks", "subtask_id", subtask.subtask_id);
      const json& cl_s = find_entry(cl_p, "subtasks", "subtask_id", subtask.subtask_id);
      const json& rk_s = find_entry(rk_p, "subtasks", "subtask_id", subtask.subtask_id);

      candidates_per_subtask[prefix] = candidates_with_outputs(gen_s, cl_s, subtask.subtask_id);

      ClusterRanking ranking;
      ranking.subtask_id = subtask.subtask_id;
      ranking.ordered_cluster_ids = rk_s.at("ordered_cluster_ids").get<std::vector<std::string>>();
      rankings[prefix] = ranking;

      const json& grades = pool.at(problem.problem_id).at(subtask.subtask_id);
      double best = 0.0;
      for (const auto& [candidate_id, score] : grades.items())
        best = std::max(best, score.get<double>());

      std::vector<Cluster> clusters;
      for (const auto& cj : cl_s.at("clusters"))
        clusters.push_back(cluster_from_json(cj, subtask.subtask_id));
      // The best cluster is the best-ranked one containing a top-graded member.
      std::string chosen;
      std::size_t chosen_rank = SIZE_MAX;
      for (const auto& cluster : clusters) {
        bool has_best = false;
        for (const auto& id : cluster.member_ids) {
          if (grades.contains(id) && grades.at(id).get<double>() + kEps >= best) {
            has_best = true;
            break;
          }
        }
        if (!has_best) continue;
        const auto& order = rankings[prefix].ordered_cluster_ids;
        auto pos = std::find(order.begin(), order.end(), cluster.cluster_id);
        std::size_t rank = pos == order.end() ? SIZE_MAX - 1 : std::size_t(pos - order.begin());
        if (rank < chosen_rank) {
          chosen_rank = rank;
          chosen = cluster.cluster_id;
        }
      }
      if (!chosen.empty()) best_cluster[prefix] = chosen;
      for (auto& cluster : clusters) all_clusters.push_back(std::move(cluster));
    }
  }

  const PurityReport purity = purity_f1(all_clusters, labels);
  const TopKResult topk = top_k_inclusion(rankings, best_cluster, kReportTopK);

  // Plot-ready inclusion curve: fraction of subtasks whose best cluster
  // ranks within the top k.
  std::ostringstream topk_tsv;
  topk_tsv << "k\tincluded\ttotal\tfraction\n";
  if (!best_cluster.empty()) {
    for (int k : {1, 2, 5, 10, 20, 50}) {
      TopKResult row = top_k_inclusion(rankings, best_cluster, k);
      topk_tsv << k << "\t" << row.included << "\t" << row.total << "\t" << fmt_score(row.fraction)
               << "\n";
    }
  }
  write_file(run_dir_ / "metrics_top_k.tsv", topk_tsv.str());

  std::size_t min_pool = SIZE_MAX;
  for (const auto& [prefix, scores] : pool_scores) min_pool = std::min(min_pool, scores.size());
  json score_at_k_json;
  if (!pool_scores.empty() && min_pool > 0 && min_pool != SIZE_MAX) {
    std::mt19937_64 rng(derive_seed(cfg.rng_seed, "metric/score_at_k"));
    const int k = static_cast<int>(min_pool);
    score_at_k_json = {{"k", k},
                       {"runs", cfg.score_at_k_runs},
                       {"value", score_at_k(pool_scores, k, cfg.score_at_k_runs, rng)}};
  }

  // Fig-4-style series over test-count prefixes.
  std::size_t available_tests = SIZE_MAX;
  for (const auto& [prefix, cands] : candidates_per_subtask)
    for (const auto& c : cands)
      if (c.status == CandidateStatus::Ok) available_tests = std::min(available_tests, c.outputs.size());
  std::vector<int> counts;
  for (int t : {1, 2, 5, 10, 20, 50, 100, 200, 500, 1000})
    if (available_tests != SIZE_MAX && static_cast<std::size_t>(t) <= available_tests)
      counts.push_back(t);
  if (available_tests != SIZE_MAX && available_tests > 0 &&
      (counts.empty() || counts.back() != static_cast<int>(available_tests)))
    counts.push_back(static_cast<int>(available_tests));
  json stats_json = json::array();
  std::ostringstream stats_tsv;
  stats_tsv << "num_tests\tavg_size\tavg_count\tf1\n";
  if (!counts.empty()) {
    for (const auto& row : cluster_stats(candidates_per_subtask, labels, counts)) {
      stats_json.push_back({{"num_tests", row.num_tests},
                            {"avg_size", row.avg_size},
                            {"avg_count", row.avg_count},
                            {"f1", row.f1}});
      stats_tsv << row.num_tests << "\t" << fmt_score(row.avg_size) << "\t"
                << fmt_score(row.avg_count) << "\t" << fmt_score(row.f1) << "\n";
    }
  }
  write_file(run_dir_ / "metrics_cluster_stats.tsv", stats_tsv.str());

  // Totals come from the submit stage.
  json totals = json::object();
  double grand_total = submitted.at("grand_total").get<double>();
  for (const auto& pj : submitted.at("problems"))
    totals[pj.at("problem_id").get<std::string>()] = pj.at("total").get<double>();
  std::string medal = "-";
  if (cfg.gold_threshold >= 0 && grand_total + kEps >= cfg.gold_threshold) medal = "gold";
  else if (cfg.silver_threshold >= 0 && grand_total + kEps >= cfg.silver_threshold) medal = "silver";
  else if (cfg.bronze_threshold >= 0 && grand_total + kEps >= cfg.bronze_threshold) medal = "bronze";

  json doc;
  doc["pool_grades"] = pool;
  doc["metrics"] = json::object();
  doc["metrics"]["purity"] = {{"f1", purity.f1},
                              {"precision", purity.precision},
                              {"recall", purity.recall},
                              {"avg_cluster_size", purity.avg_cluster_size},
                              {"num_clusters", purity.num_clusters}};
  doc["metrics"]["top_k"] = {{"k", kReportTopK},
                             {"included", topk.included},
                             {"total", topk.total},
                             {"fraction", topk.fraction},
                             {"per_subtask", topk.per_subtask}};
  if (!score_at_k_json.is_null()) doc["metrics"]["score_at_k"] = score_at_k_json;
  doc["metrics"]["cluster_stats"] = stats_json;
  doc["totals"] = {{"problems", totals}, {"grand_total", grand_total}, {"medal", medal}};

  // Rendered report: one row in the Appendix-B table shape.
  std::ostringstream text;
  std::ostringstream tsv;
  text << "GenCluster run report\n";
  text << "run: " << manifest_.run_id << "\npack: " << manifest_.pack_ref
       << "\nstrategy: " << cfg.strategy << "  seed: " << cfg.rng_seed
       << "  K: " << cfg.k_generations << "  G_n: " << cfg.games_per_cluster << "\n\n";
  text << "Rank  Name";
  tsv << "rank\tname";
  for (const auto& problem : problems_) {
    text << "  " << problem.problem_id;
    tsv << "\t" << problem.problem_id;
  }
  text << "  Total  Medal\n";
  tsv << "\ttotal\tmedal\n";
  text << "1     gencluster";
  tsv << "1\tgencluster";
  for (const auto& problem : problems_) {
    const double total = totals.at(problem.problem_id).get<double>();
    text << "  " << fmt_score(total);
    tsv << "\t" << fmt_score(total);
  }
  text << "  " << fmt_score(grand_total) << "  " << medal << "\n\n";
  tsv << "\t" << fmt_score(grand_total) << "\t" << medal << "\n";

  text << "Per-problem outcomes\n";
  for (const auto& pj : submitted.at("problems")) {
    text << "  " << pj.at("problem_id").get<std::string>() << ": total "
         << fmt_score(pj.at("total").get<double>()) << " with " << pj.at("used").get<int>()
         << " submissions (cap " << pj.at("cap").get<int>() << ")\n";
    for (const auto& [subtask_id, best] : pj.at("per_subtask_best").items())
      text << "    " << subtask_id << ": " << fmt_score(best.get<double>()) << "\n";
  }
  text << "\nMetrics\n";
  text << "  cluster purity F1: " << fmt_score(purity.f1) << " (precision "
       << fmt_score(purity.precision) << ", recall " << fmt_score(purity.recall) << ")\n";
  text << "  clusters: " << purity.num_clusters << " total, avg size "
       << fmt_score(purity.avg_cluster_size) << "\n";
  text << "  best-cluster top-" << kReportTopK << " inclusion: " << topk.included << "/"
       << topk.total << "\n";
  if (!score_at_k_json.is_null())
    text << "  Score@" << score_at_k_json.at("k").get<int>() << " ("
         << score_at_k_json.at("runs").get<int>()
         << " runs): " << fmt_score(score_at_k_json.at("value").get<double>()) << "\n";

  write_file(run_dir_ / "report.txt", text.str());
  write_file(run_dir_ / "report.tsv", tsv.str());
  store_artifact(Stage::Report, doc);
}

std::string Pipeline::report_text() const {
  return read_file(run_dir_ / "report.txt");
}

std::vector<std::vector<double>> Pipeline::sweep(const std::string& param,
                                                 const std::vector<double>& values) {
  const RunConfig& cfg = manifest_.config;
  if (values.empty()) raise(ErrorKind::Sweep, "sweep needs at least one value");
  std::vector<std::vector<double>> rows;
  std::ostringstream tsv;

  if (param == "k") {
    require_done(Stage::Report);
    const json report = load_artifact(Stage::Report);
    std::map<std::string, std::vector<double>> pool_scores;
    for (const auto& [problem_id, subtasks] : report.at("pool_grades").items())
      for (const auto& [subtask_id, grades] : subtasks.items()) {
        auto& scores = pool_scores[problem_id + "." + subtask_id];
        for (const auto& [candidate_id, score] : grades.items())
          scores.push_back(score.get<double>());
      }
    std::size_t min_pool = SIZE_MAX;
    for (const auto& [prefix, scores] : pool_scores) min_pool = std::min(min_pool, scores.size());
    tsv << "k\tscore\n";
    for (double value : values) {
      const int k = static_cast<int>(value);
      if (k < 1 || static_cast<std::size_t>(k) > min_pool)
        raise(ErrorKind::Sweep, "k=" + std::to_string(k) + " exceeds the graded pool size " +
                                    std::to_string(min_pool));
      std::mt19937_64 rng(derive_seed(cfg.rng_seed, "sweep/k/" + std::to_string(k)));
      const double score = score_at_k(pool_scores, k, cfg.score_at_k_runs, rng);
      rows.push_back({static_cast<double>(k), score});
      tsv << k << "\t" << fmt_score(score) << "\n";
    }
  } else if (param == "g_n") {
    require_done(Stage::Report);
    const json generated = load_artifact(Stage::Generate);
    const json clustered = load_artifact(Stage::Cluster);
    const json report = load_artifact(Stage::Report);
    tsv << "g_n\tscore\n";
    for (double value : values) {
      const int g_n = static_cast<int>(value);
      if (g_n < 1) raise(ErrorKind::Sweep, "g_n must be >= 1");
      double total = 0.0;
      for (const auto& problem : problems_) {
        const json& gen_p = find_entry(generated, "problems", "problem_id", problem.problem_id);
        const json& cl_p = find_entry(clustered, "problems", "problem_id", problem.problem_id);
        std::map<std::string, ClusterRanking> rankings;
        std::map<std::string, std::vector<Cluster>> clusters_per_subtask;
        for (const auto& subtask : problem.subtasks) {
          const std::string prefix = subtask_prefix(problem, subtask);
          const json& gen_s = find_entry(gen_p, "subtasks", "subtask_id", subtask.subtask_id);
          const json& cl_s = find_entry(cl_p, "subtasks", "subtask_id", subtask.subtask_id);
          std::vector<Candidate> candidates =
              candidates_with_outputs(gen_s, cl_s, subtask.subtask_id);
          std::vector<Cluster> clusters;
          for (const auto& cj : cl_s.at("clusters"))
            clusters.push_back(cluster_from_json(cj, subtask.subtask_id));
          OrderedJudge judge = make_llm_judge(*backend_, subtask, cfg,
                                              "g" + std::to_string(g_n) + "." + prefix);
          std::mt19937_64 rng(
              derive_seed(cfg.rng_seed, "sweep/g_n/" + std::to_string(g_n) + "/" + prefix));
          // The games-per-cluster sweep always exercises the tournament.
          ClusterRanking ranking =
              rank_with_strategy(Strategy::GenCluster, clusters, candidates, judge, g_n, rng);
          rankings[subtask.subtask_id] = std::move(ranking);
          clusters_per_subtask[subtask.subtask_id] = std::move(clusters);
        }
        auto planner =
            plan_round_robin(problem, rankings, clusters_per_subtask, problem.submission_cap);
        const json& grades = report.at("pool_grades").at(problem.problem_id);
        GradeFn lookup = [&](const PlanEntry& entry) -> double {
          const json& sj = grades.at(entry.subtask_id);
          return sj.contains(entry.candidate_id) ? sj.at(entry.candidate_id).get<double>() : 0.0;
        };
        total += execute_plan(*planner, lookup).outcome.total;
      }
      rows.push_back({static_cast<double>(g_n), total});
      tsv << g_n << "\t" << fmt_score(total) << "\n";
    }
  } else if (param == "num_tests") {
    require_done(Stage::Report);
    const json generated = load_artifact(Stage::Generate);
    const json clustered = load_artifact(Stage::Cluster);
    const json report = load_artifact(Stage::Report);

    std::map<std::string, bool> labels;
    for (const auto& [problem_id, subtasks] : report.at("pool_grades").items()) {
      for (const auto& [subtask_id, grades] : subtasks.items()) {
        double best = 0.0;
        for (const auto& [candidate_id, score] : grades.items())
          best = std::max(best, score.get<double>());
        for (const auto& [candidate_id, score] : grades.items())
          labels[candidate_id] = score.get<double>() + kEps >= best;
      }
    }
    std::map<std::string, std::vector<Candidate>> candidates_per_subtask;
    std::size_t available = SIZE_MAX;
    for (const auto& problem : problems_) {
      const json& gen_p = find_entry(generated, "problems", "problem_id", problem.problem_id);
      const json& cl_p = find_entry(clustered, "problems", "problem_id", problem.problem_id);
      for (const auto& subtask : problem.subtasks) {
        const json& gen_s = find_entry(gen_p, "subtasks", "subtask_id", subtask.subtask_id);
        const json& cl_s = find_entry(cl_p, "subtasks", "subtask_id", subtask.subtask_id);
        auto cands = candidates_with_outputs(gen_s, cl_s, subtask.subtask_id);
        for (const auto& c : cands)
          if (c.status == CandidateStatus::Ok) available = std::min(available, c.outputs.size());
        candidates_per_subtask[subtask_prefix(problem, subtask)] = std::move(cands);
      }
    }
    std::vector<int> counts;
    for (double value : values) {
      const int t = static_cast<int>(value);
      if (t < 1 || available == SIZE_MAX || static_cast<std::size_t>(t) > available)
        raise(ErrorKind::Sweep, "num_tests=" + std::to_string(t) +
                                    " exceeds the available execution matrix (" +
                                    std::to_string(available == SIZE_MAX ? 0 : available) + ")");
      counts.push_back(t);
    }
    tsv << "num_tests\tavg_size\tavg_count\tf1\n";
    for (const auto& row : cluster_stats(candidates_per_subtask, labels, counts)) {
      rows.push_back({static_cast<double>(row.num_tests), row.avg_size, row.avg_count, row.f1});
      tsv << row.num_tests << "\t" << fmt_score(row.avg_size) << "\t" << fmt_score(row.avg_count)
          << "\t" << fmt_score(row.f1) << "\n";
    }
  } else {
    raise(ErrorKind::Sweep, "unknown sweep parameter: '" + param + "' (want k, g_n or num_tests)");
  }

  write_file(run_dir_ / ("sweep_" + param + ".tsv"), tsv.str());
  return rows;
}

}  // namespace gencluster
