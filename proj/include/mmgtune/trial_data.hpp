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

// Trial time series: CSV persistence, synthetic turning tests and
// tune/test splits.
//
// File layout:
//
//   # mmgtune-trial: 1
//   # ship: subject
//   # maneuver: turn+35
//   # dt: 1
//   # T: 601
//   # units: mariner
//   # precision: 17
//   p1,p2,psi,u,v_m,r,n_p,delta
//   0,0,0,3.086,0,0,106,0
//   ...
//
// "mariner" units are m, m, deg, m/s, m/s, deg/s, rpm, deg; "internal" units
// are m, m, rad, m/s, m/s, rad/s, rev/s, rad.

#ifndef MMGTUNE_TRIAL_DATA_HPP_
#define MMGTUNE_TRIAL_DATA_HPP_

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mmgtune/dynamics.hpp"
#include "mmgtune/mmg.hpp"

namespace mmgtune {

struct Trial {
  std::string ship_id = "subject";
  std::string label;
  Trajectory data;  // internal units, psi unwrapped

  std::size_t size() const { return data.size(); }
  // Trajectory invariants plus u > 0 and n_P > 0 on every row.
  void validate() const;
};

enum class UnitSystem { kMariner, kInternal };

struct TrialWriteOptions {
  UnitSystem units = UnitSystem::kMariner;
  int precision = 17;  // significant digits
};

inline constexpr std::string_view kTrialColumns =
    "p1,p2,psi,u,v_m,r,n_p,delta";

// Errors: kParseError with the 1-based line number, kValidationError naming
// the violated invariant and row.
Trial parse_trial(std::istream& in, std::string_view source = "<stream>");
Trial load_trial(const std::filesystem::path& path);
void write_trial(const Trial& trial, std::ostream& out,
                 const TrialWriteOptions& options = {});
void save_trial(const Trial& trial, const std::filesystem::path& path,
                const TrialWriteOptions& options = {});

// Removes 2 pi jumps between consecutive samples.
std::vector<double> unwrap_angles(std::span<const double> angles);

constexpr double rpm_to_rps(double rpm) { return rpm / 60.0; }
constexpr double knots_to_mps(double knots) { return knots * 1852.0 / 3600.0; }

// ---------------------------------------------------------------------------
// Synthetic trials

struct ManeuverSpec {
  double rudder_deg = 35.0;        // signed target; + is starboard
  double rudder_rate_deg_s = 2.34; // <= 0 means a step input
  double n_p_rpm = 106.0;
  double u0 = 3.086;               // [m/s]
  double duration = 600.0;         // [s]
  double dt = 1.0;                 // [s]

  void validate() const;
  std::size_t rows() const;        // duration / dt + 1
  std::string label() const;       // "turn+35", "turn-10", "turn+0"
};

// Rudder ramps from 0 toward the target at the rate limit, then holds.
std::vector<ControlInput> maneuver_controls(const ManeuverSpec& spec);

// Standard deviations added to the recorded states; controls stay exact.
struct NoiseModel {
  double p = 1.0;           // [m]
  double psi_deg = 0.2;     // [deg]
  double u = 0.05;          // [m/s]
  double v_m = 0.05;        // [m/s]
  double r_deg_s = 0.02;    // [deg/s]

  static NoiseModel none() { return {0.0, 0.0, 0.0, 0.0, 0.0}; }
  NoiseModel scaled(double factor) const;
  bool is_zero() const;
};

Trial generate_synthetic_trial(const MmgParams& theta_true,
                               const ManeuverSpec& spec,
                               const ShipParticulars& ship,
                               const NoiseModel& noise, std::uint64_t seed);

// Turning tests at +-10, +-20, +-35, +-40 degrees.
std::vector<ManeuverSpec> standard_turning_suite(const ManeuverSpec& base = {});

// ---------------------------------------------------------------------------
// Dataset splits

struct DatasetSplit {
  std::vector<std::string> tune;
  std::vector<std::string> test;
};

// tune = {turn+10, turn-20, turn+35, turn-40},
// test = {turn-10, turn+20, turn-35, turn+40}.
// Throws kMissingManeuver if a label is absent from `available`.
DatasetSplit paper_split(std::span<const std::string> available);

// Rejects overlapping lists, unknown labels and an empty tune list. The test
// list may be empty (tune-only runs).
DatasetSplit custom_split(std::span<const std::string> available,
                          std::vector<std::string> tune,
                          std::vector<std::string> test);

std::vector<std::string> labels_of(std::span<const Trial> trials);

// Trials with the given labels, in the order of `labels`.
std::vector<Trial> select_trials(std::span<const Trial> trials,
                                 std::span<const std::string> labels);

}  // namespace mmgtune

#endif  // MMGTUNE_TRIAL_DATA_HPP_
