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

#ifndef GENCLUSTER_TESTS_FIXTURES_HPP
#define GENCLUSTER_TESTS_FIXTURES_HPP

#include <algorithm>
#include <cstdlib>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "gencluster/clustering.hpp"
#include "gencluster/gateway.hpp"
#include "gencluster/problem.hpp"
#include "gencluster/sandbox.hpp"

namespace fixtures {

using namespace gencluster;

// ---------------------------------------------------------------- programs

inline constexpr const char* kEmptyMain = "int main() { return 0; }\n";

inline constexpr const char* kBrokenSource = "int main( {\n";

inline constexpr const char* kEchoProgram = R"(#include <cstdio>
int main() {
    int c;
    while ((c = std::getchar()) != EOF) std::putchar(c);
    return 0;
}
)";

inline constexpr const char* kInfiniteLoop = R"(int main() {
    volatile unsigned long long x = 0;
    for (;;) x++;
    return 0;
}
)";

inline constexpr const char* kAllocLoop = R"(#include <cstdlib>
#include <cstring>
int main() {
    for (;;) {
        char* p = static_cast<char*>(std::malloc(1 << 16));
        if (!p) std::abort();
        std::memset(p, 1, 1 << 16);
    }
}
)";

inline constexpr const char* kEscapeAttempt = R"(#include <cstdio>
int main() {
    FILE* f = std::fopen("../escape.txt", "w");
    if (!f) { std::puts("denied"); return 0; }
    std::fputs("x", f);
    std::fclose(f);
    std::puts("escaped");
    return 0;
}
)";

inline constexpr const char* kSegfault = R"(int main() {
    volatile int* p = nullptr;
    return *p;
}
)";

inline constexpr const char* kExitCode3 = "int main() { return 3; }\n";

// Prints a deterministic pseudo-random line from the argv seed.
inline constexpr const char* kSeedPrinter = R"(#include <cstdio>
#include <cstdlib>
int main(int argc, char** argv) {
    unsigned long long s = argc > 1 ? std::strtoull(argv[1], nullptr, 10) : 1;
    if (s == 0) s = 77;
    s ^= s << 13; s ^= s >> 7; s ^= s << 17;
    std::printf("%llu\n", s);
    return 0;
}
)";

inline constexpr const char* kConstantGenerator = R"(#include <cstdio>
int main() { std::puts("42"); return 0; }
)";

inline constexpr const char* kEmptyOutputProgram = "int main() { return 0; }\n// quiet\n";

inline constexpr const char* kPassValidator = R"(#include <cstdio>
int main() {
    int c;
    while ((c = std::getchar()) != EOF) {}
    std::puts("passed");
    return 0;
}
)";

inline constexpr const char* kPassValidator2 = R"(#include <cstdio>
int main() {
    int c;
    while ((c = std::getchar()) != EOF) {}
    std::printf("passed\n");
    return 0;
}
)";

inline constexpr const char* kPassValidator3 = R"(#include <cstdio>
int main() {
    int c;
    while ((c = std::getchar()) != EOF) {}
    std::puts("  passed  ");
    return 0;
}
)";

inline constexpr const char* kFailValidator = R"(#include <cstdio>
int main() {
    int c;
    while ((c = std::getchar()) != EOF) {}
    std::puts("failed");
    std::fprintf(stderr, "nope\n");
    return 0;
}
)";

inline constexpr const char* kCrashValidator = R"(int main() {
    volatile int* p = nullptr;
    return *p;
}
// validator that crashes
)";

// Echo solution used with the sum grader: correct echoes a+b.
inline constexpr const char* kSumSolution = R"(#include <cstdio>
int main() {
    long long a, b;
    if (std::scanf("%lld %lld", &a, &b) != 2) return 1;
    std::printf("%lld\n", a + b);
    return 0;
}
)";

inline constexpr const char* kWrongSumSolution = R"(#include <cstdio>
int main() {
    long long a, b;
    std::scanf("%lld %lld", &a, &b);
    std::printf("%lld\n", a + b + 7);
    return 0;
}
)";

// Sleeps only when the first input number is large; used to force a timeout
// on exactly one official test.
inline constexpr const char* kSlowOnBigSolution = R"(#include <cstdio>
#include <ctime>
int main() {
    long long a, b;
    if (std::scanf("%lld %lld", &a, &b) != 2) return 1;
    if (a > 1000) {
        struct timespec ts { 2, 0 };
        nanosleep(&ts, nullptr);
    }
    std::printf("%lld\n", a + b);
    return 0;
}
)";

// Diff-style grader: recomputes a+b from input.txt and compares output.txt.
inline constexpr const char* kSumGrader = R"(#include <cstdio>
int main(int argc, char** argv) {
    if (argc < 3) { std::puts("0"); return 0; }
    FILE* fin = std::fopen(argv[1], "rb");
    FILE* fout = std::fopen(argv[2], "rb");
    if (!fin || !fout) { std::puts("0"); return 0; }
    long long a, b, got;
    if (std::fscanf(fin, "%lld %lld", &a, &b) != 2) { std::puts("0"); return 0; }
    if (std::fscanf(fout, "%lld", &got) != 1) { std::puts("0"); return 0; }
    std::puts(got == a + b ? "1" : "0");
    return 0;
}
)";

inline constexpr const char* kCrashGrader = R"(int main(int, char**) {
    volatile int* p = nullptr;
    return *p;
}
)";

inline constexpr const char* kHalfGrader = R"(#include <cstdio>
int main(int, char**) { std::puts("0.5"); return 0; }
)";

inline constexpr const char* kOverGenerousGrader = R"(#include <cstdio>
int main(int, char**) { std::puts("2.0"); return 0; }
)";

// ---------------------------------------------------------------- helpers

inline Sandbox& shared_sandbox() {
  static Sandbox sandbox{SandboxConfig{}};
  return sandbox;
}

inline Subtask make_subtask(std::string id = "s1", double max_score = 100.0) {
  Subtask st;
  st.subtask_id = std::move(id);
  st.index = 1;
  st.statement = "Read two integers and print their sum.";
  st.max_score = max_score;
  st.time_limit = std::chrono::milliseconds(2000);
  st.memory_limit_mib = 256;
  st.grader_source = kSumGrader;
  return st;
}

inline Candidate make_candidate(std::string id, long reasoning,
                                const std::vector<std::string>& outputs,
                                CandidateStatus status = CandidateStatus::Ok) {
  Candidate c;
  c.candidate_id = std::move(id);
  c.subtask_id = "s1";
  c.status = status;
  c.reasoning_token_count = reasoning;
  c.source = "// candidate " + c.candidate_id + "\n";
  for (const auto& out : outputs) {
    TestOutput t;
    t.digest = digest_bytes(out);
    t.size = out.size();
    c.outputs.push_back(t);
  }
  return c;
}

/// O(n^2) pairwise-equality partition oracle with the empty-output removal
/// rule applied; groups and members are sorted for comparison.
inline std::vector<std::vector<std::string>> brute_force_partition(
    const std::vector<Candidate>& candidates) {
  std::vector<const Candidate*> eligible;
  for (const auto& c : candidates) {
    if (c.status != CandidateStatus::Ok || c.outputs.empty()) continue;
    eligible.push_back(&c);
  }
  std::vector<bool> used(eligible.size(), false);
  std::vector<std::vector<std::string>> groups;
  for (std::size_t i = 0; i < eligible.size(); i++) {
    if (used[i]) continue;
    std::vector<std::string> group{eligible[i]->candidate_id};
    used[i] = true;
    for (std::size_t j = i + 1; j < eligible.size(); j++) {
      if (!used[j] && eligible[j]->outputs == eligible[i]->outputs) {
        group.push_back(eligible[j]->candidate_id);
        used[j] = true;
      }
    }
    bool has_empty = std::any_of(eligible[i]->outputs.begin(), eligible[i]->outputs.end(),
                                 [](const TestOutput& o) { return o.empty(); });
    if (!has_empty) {
      std::sort(group.begin(), group.end());
      groups.push_back(std::move(group));
    }
  }
  std::sort(groups.begin(), groups.end());
  return groups;
}

inline std::vector<std::vector<std::string>> canonical_partition(
    const std::vector<Cluster>& clusters) {
  std::vector<std::vector<std::string>> groups;
  for (const auto& cluster : clusters) {
    std::vector<std::string> group = cluster.member_ids;
    std::sort(group.begin(), group.end());
    groups.push_back(std::move(group));
  }
  std::sort(groups.begin(), groups.end());
  return groups;
}

// ---------------------------------------------------------------- judges

/// Representative sources for oracle tournaments carry their quality inline.
inline std::string quality_source(int quality) {
  return "// solution\n// quality=" + std::to_string(quality) + "\n";
}

inline int parse_quality(const std::string& source) {
  auto pos = source.find("quality=");
  return pos == std::string::npos ? -1 : std::atoi(source.c_str() + pos + 8);
}

/// Always picks the truly better representative and scores accordingly.
inline OrderedJudge oracle_judge() {
  return [](const std::string& a, const std::string& b) {
    JudgeVerdict v;
    v.parsed = true;
    const bool a_better = parse_quality(a) >= parse_quality(b);
    v.winner = a_better ? JudgeVerdict::Winner::ShownA : JudgeVerdict::Winner::ShownB;
    v.score_a = a_better ? 9 : 3;
    v.score_b = a_better ? 3 : 9;
    return v;
  };
}

/// Picks the truly better representative with probability p and emits noisy
/// 0-10 scores (winner ~N(8,1), loser ~N(4,1)) like an imperfect judge.
inline OrderedJudge noisy_judge(double p, std::uint64_t seed) {
  auto rng = std::make_shared<std::mt19937_64>(seed);
  return [rng, p](const std::string& a, const std::string& b) {
    JudgeVerdict v;
    v.parsed = true;
    std::bernoulli_distribution faithful(p);
    std::normal_distribution<double> high(8.0, 1.0), low(4.0, 1.0);
    const bool a_better = parse_quality(a) >= parse_quality(b);
    const bool a_wins = faithful(*rng) ? a_better : !a_better;
    v.winner = a_wins ? JudgeVerdict::Winner::ShownA : JudgeVerdict::Winner::ShownB;
    const int ws = std::clamp(static_cast<int>(std::lround(high(*rng))), 0, 10);
    const int ls = std::clamp(static_cast<int>(std::lround(low(*rng))), 0, 10);
    v.score_a = a_wins ? ws : ls;
    v.score_b = a_wins ? ls : ws;
    return v;
  };
}

inline std::vector<Cluster> quality_clusters(int n, std::string subtask_id = "s1") {
  std::vector<Cluster> clusters;
  for (int i = 0; i < n; i++) {
    Cluster c;
    char id[16];
    std::snprintf(id, sizeof(id), "cl-%03d", i);
    c.cluster_id = id;
    c.subtask_id = subtask_id;
    c.signature = digest_bytes(c.cluster_id);
    c.member_ids = {"cand-" + std::to_string(i)};
    c.representative_id = c.member_ids.front();
    clusters.push_back(std::move(c));
  }
  return clusters;
}

inline std::map<std::string, std::string> quality_reps(const std::vector<Cluster>& clusters,
                                                       const std::vector<int>& qualities) {
  std::map<std::string, std::string> reps;
  for (std::size_t i = 0; i < clusters.size(); i++)
    reps[clusters[i].cluster_id] = quality_source(qualities[i]);
  return reps;
}

}  // namespace fixtures

#endif  // GENCLUSTER_TESTS_FIXTURES_HPP
