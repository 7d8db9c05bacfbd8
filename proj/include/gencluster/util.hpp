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

#ifndef GENCLUSTER_UTIL_HPP
#define GENCLUSTER_UTIL_HPP

#include <filesystem>
#include <functional>
#include <string>
#include <string_view>

#include <json.hpp>

namespace gencluster {

namespace fs = std::filesystem;

std::string read_file(const fs::path& path);
void write_file(const fs::path& path, std::string_view contents);

std::string trim(std::string_view text);

std::string base64_encode(std::string_view bytes);
std::string base64_decode(std::string_view text);

bool is_valid_utf8(std::string_view bytes);

/// Byte payloads inside JSON artifacts: stored as {"text": ...} when valid
/// UTF-8, otherwise {"b64": ...}.
nlohmann::json json_from_bytes(std::string_view bytes);
std::string bytes_from_json(const nlohmann::json& value);

/// Runs fn(0..n-1) on up to `workers` threads. The first exception thrown by
/// any worker is rethrown on the caller after all threads join.
void parallel_for(std::size_t n, unsigned workers, const std::function<void(std::size_t)>& fn);

}  // namespace gencluster

#endif  // GENCLUSTER_UTIL_HPP
