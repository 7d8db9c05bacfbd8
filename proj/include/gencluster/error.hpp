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

#ifndef GENCLUSTER_ERROR_HPP
#define GENCLUSTER_ERROR_HPP

#include <stdexcept>
#include <string>

namespace gencluster {

/// Failure categories surfaced by the pipeline. `Environment` means the host
/// is unusable (missing compiler, transport down), as opposed to bad input.
enum class ErrorKind {
  Ingestion,
  Validation,
  Config,
  Template,
  Stage,
  Ordering,
  Metric,
  Sweep,
  Environment,
};

const char* error_kind_name(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(error_kind_name(kind)) + " error: " + message),
        kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void raise(ErrorKind kind, const std::string& message) {
  throw Error(kind, message);
}

inline const char* error_kind_name(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Ingestion: return "ingestion";
    case ErrorKind::Validation: return "validation";
    case ErrorKind::Config: return "config";
    case ErrorKind::Template: return "template";
    case ErrorKind::Stage: return "stage";
    case ErrorKind::Ordering: return "ordering";
    case ErrorKind::Metric: return "metric";
    case ErrorKind::Sweep: return "sweep";
    case ErrorKind::Environment: return "environment";
  }
  return "unknown";
}

}  // namespace gencluster

#endif  // GENCLUSTER_ERROR_HPP
