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

#ifndef GENCLUSTER_DIGEST_HPP
#define GENCLUSTER_DIGEST_HPP

#include <compare>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>

namespace gencluster {

/// 128-bit non-cryptographic digest (MurmurHash3 x64-128).
struct Digest128 {
  std::uint64_t hi = 0;
  std::uint64_t lo = 0;

  auto operator<=>(const Digest128&) const = default;

  /// 32 lowercase hex characters, hi word first.
  std::string hex() const;
  static Digest128 from_hex(std::string_view hex);
};

Digest128 digest_bytes(std::string_view data, std::uint64_t seed = 0);

/// Digest of a sequence of digests (used for output-vector signatures).
Digest128 digest_sequence(std::span<const Digest128> parts, std::uint64_t seed = 0);

/// Deterministic sub-seed derivation: mixes a base seed with a textual tag.
std::uint64_t derive_seed(std::uint64_t base, std::string_view tag);

}  // namespace gencluster

#endif  // GENCLUSTER_DIGEST_HPP
