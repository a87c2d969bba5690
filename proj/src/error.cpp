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

#include "mmgtune/error.hpp"

namespace mmgtune {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kInvalidRegime: return "InvalidRegime";
    case ErrorKind::kSingularMass: return "SingularMass";
    case ErrorKind::kInvalidArgument: return "InvalidArgument";
    case ErrorKind::kSimulationAborted: return "SimulationAborted";
    case ErrorKind::kNonFiniteObjective: return "NonFiniteObjective";
    case ErrorKind::kDegenerateBox: return "DegenerateBox";
    case ErrorKind::kUnknownParameter: return "UnknownParameter";
    case ErrorKind::kParseError: return "ParseError";
    case ErrorKind::kValidationError: return "ValidationError";
    case ErrorKind::kMissingManeuver: return "MissingManeuver";
    case ErrorKind::kIoError: return "IoError";
  }
  return "Unknown";
}

}  // namespace mmgtune
