// Copyright 2026 The mmgtune Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef MMGTUNE_ERROR_HPP_
#define MMGTUNE_ERROR_HPP_

#include <stdexcept>
#include <string>
#include <string_view>

namespace mmgtune {

enum class ErrorKind {
  kInvalidRegime,       // u <= 0, n_P <= 0 or U = 0
  kSingularMass,
  kInvalidArgument,
  kSimulationAborted,   // non-finite state or invalid regime mid-rollout
  kNonFiniteObjective,
  kDegenerateBox,
  kUnknownParameter,
  kParseError,
  kValidationError,
  kMissingManeuver,
  kIoError,
};

std::string_view to_string(ErrorKind kind);

// Single exception type for the library; callers branch on kind().
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

// Raised by simulate(); carries the 0-based step index that failed.
class SimulationAborted : public Error {
 public:
  SimulationAborted(std::size_t step, const std::string& message)
      : Error(ErrorKind::kSimulationAborted, message), step_(step) {}

  std::size_t step() const noexcept { return step_; }

 private:
  std::size_t step_;
};

}  // namespace mmgtune

#endif  // MMGTUNE_ERROR_HPP_
