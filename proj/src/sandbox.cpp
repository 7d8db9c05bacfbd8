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

#include "gencluster/sandbox.hpp"

#include <fcntl.h>
#include <grp.h>
#include <poll.h>
#include <sched.h>
#include <signal.h>
#include <sys/resource.h>
#include <sys/stat.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cstring>
#include <sstream>
#include <thread>

#include "gencluster/error.hpp"
#include "gencluster/util.hpp"

namespace gencluster {

namespace {

constexpr double kMemoryAttributionFraction = 0.8;

struct Pipe {
  int read_fd = -1;
  int write_fd = -1;

  Pipe() {
    int fds[2];
    if (pipe(fds) != 0) raise(ErrorKind::Environment, "pipe() failed");
    read_fd = fds[0];
    write_fd = fds[1];
  }
  ~Pipe() {
    close_read();
    close_write();
  }
  void close_read() {
    if (read_fd >= 0) ::close(read_fd);
    read_fd = -1;
  }
  void close_write() {
    if (write_fd >= 0) ::close(write_fd);
    write_fd = -1;
  }
};

void set_limit(int resource, rlim_t value) {
  rlimit lim{value, value};
  setrlimit(resource, &lim);
}

void ignore_sigpipe_once() {
  static std::once_flag flag;
  std::call_once(flag, [] { signal(SIGPIPE, SIG_IGN); });
}

struct ChildOptions {
  fs::path cwd;
  std::vector<std::string> argv;
  std::chrono::milliseconds cpu_backstop{0};
  std::uint64_t memory_limit_bytes = 0;
  bool drop_privileges = false;
  bool isolate_network = false;
  unsigned uid = 65534;
  unsigned gid = 65534;
};

struct RawResult {
  std::string out;
  std::string err;
  bool out_truncated = false;
  bool err_truncated = false;
  bool watchdog_killed = false;
  int status = 0;  // waitpid status
  std::uint64_t max_rss_bytes = 0;
  std::chrono::milliseconds wall{0};
};

/// fork/exec with stdin fed from a buffer, stdout/stderr captured up to
/// caps, and a wall-clock watchdog that SIGKILLs the child's process group.
RawResult spawn_capture(const ChildOptions& opt, const std::string& stdin_bytes,
                        std::chrono::milliseconds wall_limit, std::uint64_t stdout_cap,
                        std::uint64_t stderr_cap) {
  ignore_sigpipe_once();

  Pipe in, out, err;
  std::vector<char*> argv;
  argv.reserve(opt.argv.size() + 1);
  for (const auto& a : opt.argv) argv.push_back(const_cast<char*>(a.c_str()));
  argv.push_back(nullptr);

  const auto start = std::chrono::steady_clock::now();
  pid_t pid = fork();
  if (pid < 0) raise(ErrorKind::Environment, "fork() failed");

  if (pid == 0) {
    // Child: async-signal-safe calls only from here to execve.
    setpgid(0, 0);
    dup2(in.read_fd, 0);
    dup2(out.write_fd, 1);
    dup2(err.write_fd, 2);
    for (int fd = 3; fd < 256; fd++) ::close(fd);
    if (chdir(opt.cwd.c_str()) != 0) _exit(126);

    if (opt.cpu_backstop.count() > 0)
      set_limit(RLIMIT_CPU, static_cast<rlim_t>(opt.cpu_backstop.count() / 1000 + 1));
    if (opt.memory_limit_bytes > 0) set_limit(RLIMIT_AS, opt.memory_limit_bytes);
    set_limit(RLIMIT_CORE, 0);
    set_limit(RLIMIT_FSIZE, 256ull << 20);

    if (opt.drop_privileges && geteuid() == 0) {
      if (opt.isolate_network) unshare(CLONE_NEWNET);
      setgroups(0, nullptr);
      if (setgid(opt.gid) != 0 || setuid(opt.uid) != 0) _exit(125);
    }

    const char* envp[] = {"PATH=/usr/bin:/bin", "HOME=.", "TMPDIR=.", nullptr};
    execve(argv[0], argv.data(), const_cast<char**>(envp));
    _exit(127);
  }

  setpgid(pid, pid);  // also done in the child; whichever wins is fine
  in.close_read();
  out.close_write();
  err.close_write();
  fcntl(in.write_fd, F_SETFL, O_NONBLOCK);
  fcntl(out.read_fd, F_SETFL, O_NONBLOCK);
  fcntl(err.read_fd, F_SETFL, O_NONBLOCK);

  RawResult result;
  std::size_t stdin_pos = 0;
  if (stdin_bytes.empty()) in.close_write();

  // Kill a bit past the limit; classification compares against the limit
  // itself, and the 2x wall-clock contract still holds.
  const auto grace = std::chrono::milliseconds(
      std::clamp<std::int64_t>(wall_limit.count() / 4, 10, 1000));
  const auto deadline = start + wall_limit + grace;

  bool reaped = false;
  rusage usage{};
  char buf[65536];

  auto drain = [&](int fd, std::string& sink, std::uint64_t cap, bool& truncated) -> bool {
    for (;;) {
      ssize_t n = ::read(fd, buf, sizeof(buf));
      if (n > 0) {
        std::uint64_t room = cap > sink.size() ? cap - sink.size() : 0;
        if (room > 0) sink.append(buf, std::min<std::uint64_t>(room, n));
        if (static_cast<std::uint64_t>(n) > room) truncated = true;
        continue;
      }
      if (n == 0) return false;  // EOF
      if (errno == EAGAIN || errno == EWOULDBLOCK) return true;
      return false;  // read error: treat as closed
    }
  };

  while (true) {
    if (!reaped) {
      int status = 0;
      pid_t done = wait4(pid, &status, WNOHANG, &usage);
      if (done == pid) {
        reaped = true;
        result.status = status;
      }
    }
    if (!result.watchdog_killed && !reaped && std::chrono::steady_clock::now() >= deadline) {
      kill(-pid, SIGKILL);
      kill(pid, SIGKILL);
      result.watchdog_killed = true;
    }

    pollfd fds[3];
    nfds_t nfds = 0;
    int in_slot = -1, out_slot = -1, err_slot = -1;
    if (in.write_fd >= 0) {
      in_slot = nfds;
      fds[nfds++] = {in.write_fd, POLLOUT, 0};
    }
    if (out.read_fd >= 0) {
      out_slot = nfds;
      fds[nfds++] = {out.read_fd, POLLIN, 0};
    }
    if (err.read_fd >= 0) {
      err_slot = nfds;
      fds[nfds++] = {err.read_fd, POLLIN, 0};
    }

    if (nfds == 0 && reaped) break;

    if (nfds > 0) {
      poll(fds, nfds, 2);
      if (in_slot >= 0 && (fds[in_slot].revents & (POLLOUT | POLLERR | POLLHUP))) {
        if (fds[in_slot].revents & (POLLERR | POLLHUP)) {
          in.close_write();
        } else {
          ssize_t n = ::write(in.write_fd, stdin_bytes.data() + stdin_pos,
                              std::min<std::size_t>(stdin_bytes.size() - stdin_pos, 65536));
          if (n > 0) stdin_pos += n;
          if (n < 0 && errno != EAGAIN && errno != EWOULDBLOCK) in.close_write();
          if (stdin_pos >= stdin_bytes.size()) in.close_write();
        }
      }
      if (out_slot >= 0 && (fds[out_slot].revents & (POLLIN | POLLHUP | POLLERR))) {
        if (!drain(out.read_fd, result.out, stdout_cap, result.out_truncated)) out.close_read();
      }
      if (err_slot >= 0 && (fds[err_slot].revents & (POLLIN | POLLHUP | POLLERR))) {
        if (!drain(err.read_fd, result.err, stderr_cap, result.err_truncated)) err.close_read();
      }
    } else {
      // Child alive with all pipes closed: wait for exit or watchdog.
      std::this_thread::sleep_for(std::chrono::milliseconds(1));
    }
  }

  result.wall = std::chrono::duration_cast<std::chrono::milliseconds>(
      std::chrono::steady_clock::now() - start);
  result.max_rss_bytes = static_cast<std::uint64_t>(usage.ru_maxrss) * 1024;
  // Sweep any forked descendants left in the group.
  kill(-pid, SIGKILL);
  return result;
}

}  // namespace

std::string_view exit_status_name(ExitStatus status) {
  switch (status) {
    case ExitStatus::Ok: return "ok";
    case ExitStatus::Nonzero: return "nonzero";
    case ExitStatus::Timeout: return "timeout";
    case ExitStatus::MemoryExceeded: return "memory_exceeded";
    case ExitStatus::Crash: return "crash";
  }
  return "unknown";
}

Sandbox::Sandbox(SandboxConfig config) : config_(std::move(config)) {
  if (config_.scratch_root.empty()) {
    static std::atomic<std::uint64_t> instance_counter{0};
    config_.scratch_root =
        fs::temp_directory_path() / ("gencluster-" + std::to_string(getpid()) + "-" +
                                     std::to_string(instance_counter.fetch_add(1)));
    owns_scratch_ = true;
  }
  std::error_code ec;
  fs::create_directories(config_.scratch_root, ec);
  if (ec) raise(ErrorKind::Environment, "cannot create scratch root: " + config_.scratch_root.string());
  fs::permissions(config_.scratch_root, fs::perms::owner_all | fs::perms::group_exec | fs::perms::others_exec,
                  ec);
}

Sandbox::~Sandbox() {
  if (!config_.keep_scratch) {
    std::error_code ec;
    fs::remove_all(config_.scratch_root, ec);
  }
}

fs::path Sandbox::resolve_compiler() {
  std::lock_guard lock(compiler_mutex_);
  if (!compiler_path_.empty()) return compiler_path_;
  fs::path candidate(config_.compiler);
  if (candidate.is_absolute()) {
    if (!fs::exists(candidate))
      raise(ErrorKind::Environment, "compiler not found: " + candidate.string());
    compiler_path_ = candidate;
    return compiler_path_;
  }
  const char* path_env = std::getenv("PATH");
  std::string paths = path_env ? path_env : "/usr/bin:/bin";
  std::stringstream ss(paths);
  std::string dir;
  while (std::getline(ss, dir, ':')) {
    if (dir.empty()) continue;
    fs::path p = fs::path(dir) / config_.compiler;
    std::error_code ec;
    if (fs::exists(p, ec) && ::access(p.c_str(), X_OK) == 0) {
      compiler_path_ = p;
      return compiler_path_;
    }
  }
  raise(ErrorKind::Environment, "compiler toolchain missing: '" + config_.compiler + "' not in PATH");
}

std::string Sandbox::compile_metadata() const {
  std::string meta = config_.compiler;
  for (const auto& f : config_.compile_flags) meta += " " + f;
  return meta;
}

CompiledProgram Sandbox::compile_uncached(const std::string& source) {
  const fs::path compiler = resolve_compiler();
  const Digest128 hash = digest_bytes(source);
  const fs::path build_dir = config_.scratch_root / "build" / hash.hex();
  fs::create_directories(build_dir);
  fs::permissions(build_dir, fs::perms::owner_all | fs::perms::group_read | fs::perms::group_exec |
                                 fs::perms::others_read | fs::perms::others_exec);
  const fs::path src = build_dir / "prog.cpp";
  const fs::path bin = build_dir / "prog";
  write_file(src, source);

  ChildOptions opt;
  opt.cwd = build_dir;
  opt.argv.push_back(compiler.string());
  for (const auto& f : config_.compile_flags) opt.argv.push_back(f);
  opt.argv.push_back("-o");
  opt.argv.push_back(bin.string());
  opt.argv.push_back(src.string());
  opt.drop_privileges = false;

  RawResult raw = spawn_capture(opt, "", config_.compile_time_limit, 1 << 20, 1 << 20);

  CompiledProgram program;
  program.source_hash = hash;
  program.compile_log = raw.err.empty() ? raw.out : raw.err;
  if (raw.watchdog_killed) {
    program.compile_ok = false;
    program.compile_log += "\n(compiler timed out)";
    return program;
  }
  program.compile_ok = WIFEXITED(raw.status) && WEXITSTATUS(raw.status) == 0 && fs::exists(bin);
  if (program.compile_ok) {
    fs::permissions(bin, fs::perms::owner_all | fs::perms::group_read | fs::perms::group_exec |
                             fs::perms::others_read | fs::perms::others_exec);
    program.binary_ref = bin;
  }
  return program;
}

CompiledProgram Sandbox::compile(const std::string& source, ProgramKind) {
  if (source.empty()) raise(ErrorKind::Validation, "cannot compile empty source");
  const Digest128 hash = digest_bytes(source);

  std::promise<CompiledProgram> promise;
  std::shared_future<CompiledProgram> future;
  bool owner = false;
  {
    std::lock_guard lock(cache_mutex_);
    auto it = compile_cache_.find(hash);
    if (it == compile_cache_.end()) {
      future = promise.get_future().share();
      compile_cache_.emplace(hash, future);
      owner = true;
    } else {
      future = it->second;
    }
  }
  // The owner compiles outside the lock; concurrent callers for the same
  // source block on the shared future.
  if (owner) {
    try {
      promise.set_value(compile_uncached(source));
    } catch (...) {
      promise.set_exception(std::current_exception());
    }
  }
  return future.get();
}

ExecutionOutcome Sandbox::run(const CompiledProgram& program, const RunSpec& spec,
                              const RunLimits& limits) {
  if (!program.compile_ok || program.binary_ref.empty())
    raise(ErrorKind::Validation, "cannot run a program that did not compile");
  if (limits.time_limit.count() <= 0) raise(ErrorKind::Validation, "time_limit must be > 0");

  const std::uint64_t run_id = run_counter_.fetch_add(1);
  const fs::path run_dir = config_.scratch_root / ("run-" + std::to_string(run_id));
  std::error_code ec;
  fs::create_directories(run_dir, ec);
  if (ec) raise(ErrorKind::Environment, "cannot create run dir: " + run_dir.string());
  fs::permissions(run_dir, fs::perms::all);  // executee may write in its own dir only

  for (const auto& [name, bytes] : spec.files) {
    write_file(run_dir / name, bytes);
    fs::permissions(run_dir / name, fs::perms::owner_all | fs::perms::group_read | fs::perms::others_read);
  }

  ChildOptions opt;
  opt.cwd = run_dir;
  opt.argv.push_back(program.binary_ref.string());
  for (const auto& a : spec.args) opt.argv.push_back(a);
  opt.cpu_backstop = limits.time_limit * 2;
  opt.memory_limit_bytes = limits.memory_limit_mib * (1ull << 20);
  opt.drop_privileges = config_.drop_privileges;
  opt.isolate_network = config_.isolate_network;
  opt.uid = config_.sandbox_uid;
  opt.gid = config_.sandbox_gid;

  RawResult raw = spawn_capture(opt, spec.stdin_bytes, limits.time_limit,
                                config_.stdout_cap_bytes, config_.stderr_cap_bytes);

  ExecutionOutcome outcome;
  outcome.stdout_bytes = std::move(raw.out);
  outcome.stderr_bytes = std::move(raw.err);
  outcome.stdout_truncated = raw.out_truncated;
  outcome.stderr_truncated = raw.err_truncated;
  outcome.wall_time = raw.wall;
  outcome.peak_memory_bytes = raw.max_rss_bytes;

  const bool cpu_limit_hit = WIFSIGNALED(raw.status) && WTERMSIG(raw.status) == SIGXCPU;
  if (raw.watchdog_killed || cpu_limit_hit) {
    outcome.exit_status = ExitStatus::Timeout;
    outcome.term_signal = WIFSIGNALED(raw.status) ? WTERMSIG(raw.status) : SIGKILL;
  } else if (WIFEXITED(raw.status)) {
    outcome.exit_code = WEXITSTATUS(raw.status);
    outcome.exit_status = outcome.exit_code == 0 ? ExitStatus::Ok : ExitStatus::Nonzero;
  } else if (WIFSIGNALED(raw.status)) {
    outcome.term_signal = WTERMSIG(raw.status);
    const std::uint64_t mem_limit = limits.memory_limit_mib * (1ull << 20);
    if (mem_limit > 0 &&
        outcome.peak_memory_bytes >= static_cast<std::uint64_t>(mem_limit * kMemoryAttributionFraction))
      outcome.exit_status = ExitStatus::MemoryExceeded;
    else
      outcome.exit_status = ExitStatus::Crash;
  } else {
    outcome.exit_status = ExitStatus::Crash;
  }

  if (!config_.keep_scratch) fs::remove_all(run_dir, ec);
  return outcome;
}

}  // namespace gencluster
