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

#ifndef MMGTUNE_DYNAMICS_HPP_
#define MMGTUNE_DYNAMICS_HPP_

#include <cstddef>
#include <span>
#include <vector>

#include "mmgtune/mmg.hpp"

namespace mmgtune {

// Fixed-step time series of (state, input) rows. Row i holds the state at
// t = i * dt and the input applied from t_i to t_{i+1} (zero-order hold).
struct Trajectory {
  double dt = 1.0;
  std::vector<AugmentedState> states;
  std::vector<ControlInput> controls;

  std::size_t size() const { return states.size(); }

  // dt > 0, T >= 2, matching lengths, all values finite.
  void validate() const;
};

// One forward-Euler step: zeta + f_zeta(zeta, input) * dt.
AugmentedState euler_step(const AugmentedState& zeta, const ControlInput& input,
                          const MmgParams& params, const ShipParticulars& ship,
                          double dt);

// Rolls euler_step over `controls`; returns controls.size() rows with row 0
// equal to zeta0. Throws SimulationAborted with the failing step index on an
// invalid regime or a non-finite state.
Trajectory simulate(const AugmentedState& zeta0,
                    std::span<const ControlInput> controls,
                    const MmgParams& params, const ShipParticulars& ship,
                    double dt);

bool is_finite(const AugmentedState& zeta);

// ---------------------------------------------------------------------------
// Turning-test analysis

struct CircleFit {
  double center_x = 0.0;
  double center_y = 0.0;
  double radius = 0.0;
  double rms_residual = 0.0;
};

// Algebraic least-squares circle through >= 3 points (xs[i], ys[i]).
CircleFit fit_circle(std::span<const double> xs, std::span<const double> ys);

struct TurningMetrics {
  double heading_change = 0.0;     // psi_end - psi_0 [rad]
  bool completed_circle = false;   // |heading_change| >= 2 pi
  double steady_diameter = 0.0;    // circle fit over the last revolution [m]
  double fit_rms = 0.0;            // [m]
  double tactical_diameter = 0.0;  // lateral offset at 180 deg change [m]
  double advance = 0.0;            // forward offset at 90 deg change [m]
  double final_speed = 0.0;        // [m/s]
  double final_yaw_rate = 0.0;     // [rad/s]
};

// Requires a completed revolution for steady_diameter; otherwise the fit
// uses whatever arc is available (at least 3 rows).
TurningMetrics analyze_turning(const Trajectory& trajectory);

}  // namespace mmgtune

#endif  // MMGTUNE_DYNAMICS_HPP_
