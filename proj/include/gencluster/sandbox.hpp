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

#ifndef GENCLUSTER_SANDBOX_HPP
#define GENCLUSTER_SANDBOX_HPP

#include <atomic>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <future>
#include <map>
#include <mutex>
#include <string>
#include <utility>
#include <vector>

#include "gencluster/digest.hpp"

namespace gencluster {

namespace fs = std::filesystem;

struct SandboxConfig {
  fs::path scratch_root;  // empty: <system temp>/gencluster-<pid>
  std::uint64_t stdout_cap_bytes = 16ull << 20;
  std::uint64_t stderr_cap_bytes = 64ull << 10;
  std::string compiler = "g++";
  std::vector<std::string> compile_flags = {"-std=c++17", "-O2", "-pipe"};
  std::chrono::milliseconds compile_time_limit{60000};
  /// When running as root, executees are switched to this uid/gid so writes
  /// outside their run directory are denied. Ignored for non-root callers.
  unsigned sandbox_uid = 65534;
  unsigned sandbox_gid = 65534;
  bool drop_privileges = true;
  bool isolate_network = true;
  bool keep_scratch = false;
};

enum class ProgramKind { Solution, Generator, Validator, Grader };

struct CompiledProgram {
  Digest128 source_hash;
  fs::path binary_ref;  // present iff compile_ok
  bool compile_ok = false;
  std::string compile_log;
};

enum class ExitStatus { Ok, Nonzero, Timeout, MemoryExceeded, Crash };

std::string_view exit_status_name(ExitStatus status);

struct ExecutionOutcome {
  std::string stdout_bytes;
  std::string stderr_bytes;
  ExitStatus exit_status = ExitStatus::Crash;
  int exit_code = 0;
  int term_signal = 0;
  std::chrono::milliseconds wall_time{0};
  std::uint64_t peak_memory_bytes = 0;
  bool stdout_truncated = false;
  bool stderr_truncated = false;
};

struct RunLimits {
  std::chrono::milliseconds time_limit{1000};
  std::uint64_t memory_limit_mib = 256;  // 0: unlimited
};

struct RunSpec {
  std::string stdin_bytes;
  std::vector<std::string> args;
  /// Extra files materialized into the run directory before exec.
  std::vector<std::pair<std::string, std::string>> files;
};

/// Compiles and executes untrusted programs under per-run scratch
/// directories and OS resource limits. Compilation results are cached by
/// source digest; all methods are safe to call from concurrent workers.
class Sandbox {
 public:
  explicit Sandbox(SandboxConfig config);
  ~Sandbox();

  Sandbox(const Sandbox&) = delete;
  Sandbox& operator=(const Sandbox&) = delete;

  CompiledProgram compile(const std::string& source, ProgramKind kind);
  ExecutionOutcome run(const CompiledProgram& program, const RunSpec& spec, const RunLimits& limits);

  const SandboxConfig& config() const { return config_; }
  /// Compiler id + flags, recorded into run artifacts for reproducibility.
  std::string compile_metadata() const;

 private:
  fs::path resolve_compiler();
  CompiledProgram compile_uncached(const std::string& source);

  SandboxConfig config_;
  fs::path compiler_path_;  // resolved lazily
  std::mutex compiler_mutex_;
  std::mutex cache_mutex_;
  std::map<Digest128, std::shared_future<CompiledProgram>> compile_cache_;
  std::atomic<std::uint64_t> run_counter_{0};
  bool owns_scratch_ = false;
};

}  // namespace gencluster

#endif  // GENCLUSTER_SANDBOX_HPP
