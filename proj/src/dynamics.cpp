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

#include "mmgtune/dynamics.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include <Eigen/Dense>

#include "mmgtune/error.hpp"

namespace mmgtune {

bool is_finite(const AugmentedState& z) {
  return std::isfinite(z.p1) && std::isfinite(z.p2) && std::isfinite(z.psi) &&
         std::isfinite(z.state.u) && std::isfinite(z.state.v_m) &&
         std::isfinite(z.state.r);
}

void Trajectory::validate() const {
  if (!(dt > 0.0) || !std::isfinite(dt)) {
    throw Error(ErrorKind::kValidationError, "trajectory: dt must be positive");
  }
  if (states.size() < 2) {
    throw Error(ErrorKind::kValidationError,
                "trajectory: at least two rows are required");
  }
  if (states.size() != controls.size()) {
    throw Error(ErrorKind::kValidationError,
                "trajectory: state and control counts differ");
  }
  for (std::size_t i = 0; i < states.size(); ++i) {
    if (!is_finite(states[i]) || !std::isfinite(controls[i].n_p) ||
        !std::isfinite(controls[i].delta)) {
      throw Error(ErrorKind::kValidationError,
                  "trajectory: non-finite value at row " + std::to_string(i));
    }
  }
}

AugmentedState euler_step(const AugmentedState& zeta, const ControlInput& input,
                          const MmgParams& params, const ShipParticulars& ship,
                          double dt) {
  const AugmentedRate rate = f_zeta(zeta, input, params, ship);
  AugmentedState next;
  next.p1 = zeta.p1 + rate.dp1 * dt;
  next.p2 = zeta.p2 + rate.dp2 * dt;
  next.psi = zeta.psi + rate.dpsi * dt;
  next.state.u = zeta.state.u + rate.velocity.du * dt;
  next.state.v_m = zeta.state.v_m + rate.velocity.dv_m * dt;
  next.state.r = zeta.state.r + rate.velocity.dr * dt;
  return next;
}

Trajectory simulate(const AugmentedState& zeta0,
                    std::span<const ControlInput> controls,
                    const MmgParams& params, const ShipParticulars& ship,
                    double dt) {
  if (controls.empty()) {
    throw Error(ErrorKind::kInvalidArgument, "simulate: no control inputs");
  }
  if (!(dt > 0.0)) {
    throw Error(ErrorKind::kInvalidArgument, "simulate: dt must be positive");
  }
  if (!is_finite(zeta0)) {
    throw SimulationAborted(0, "simulate: non-finite initial state");
  }
  Trajectory traj;
  traj.dt = dt;
  traj.states.reserve(controls.size());
  traj.controls.assign(controls.begin(), controls.end());
  traj.states.push_back(zeta0);
  for (std::size_t i = 1; i < controls.size(); ++i) {
    AugmentedState next;
    try {
      next = euler_step(traj.states.back(), controls[i - 1], params, ship, dt);
    } catch (const Error& e) {
      throw SimulationAborted(
          i, "simulate: step " + std::to_string(i) + ": " + e.what());
    }
    if (!is_finite(next)) {
      throw SimulationAborted(
          i, "simulate: non-finite state at step " + std::to_string(i));
    }
    traj.states.push_back(next);
  }
  return traj;
}

CircleFit fit_circle(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size() || xs.size() < 3) {
    throw Error(ErrorKind::kInvalidArgument,
                "fit_circle: need at least three points");
  }
  // x^2 + y^2 = 2 a x + 2 b y + c, solved in a centred frame for conditioning.
  const auto n = static_cast<Eigen::Index>(xs.size());
  double mx = 0.0;
  double my = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);

  Eigen::MatrixXd a(n, 3);
  Eigen::VectorXd b(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double x = xs[i] - mx;
    const double y = ys[i] - my;
    a(i, 0) = 2.0 * x;
    a(i, 1) = 2.0 * y;
    a(i, 2) = 1.0;
    b(i) = x * x + y * y;
  }
  const Eigen::Vector3d sol = a.colPivHouseholderQr().solve(b);
  CircleFit fit;
  fit.center_x = sol(0) + mx;
  fit.center_y = sol(1) + my;
  fit.radius = std::sqrt(sol(2) + sol(0) * sol(0) + sol(1) * sol(1));
  double ss = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double d =
        std::hypot(xs[i] - fit.center_x, ys[i] - fit.center_y) - fit.radius;
    ss += d * d;
  }
  fit.rms_residual = std::sqrt(ss / static_cast<double>(n));
  return fit;
}

TurningMetrics analyze_turning(const Trajectory& traj) {
  constexpr double kTwoPi = 2.0 * std::numbers::pi;
  if (traj.size() < 3) {
    throw Error(ErrorKind::kInvalidArgument,
                "analyze_turning: need at least three rows");
  }
  TurningMetrics m;
  const AugmentedState& first = traj.states.front();
  const AugmentedState& last = traj.states.back();
  m.heading_change = last.psi - first.psi;
  m.completed_circle = std::abs(m.heading_change) >= kTwoPi;
  m.final_speed = std::hypot(last.state.u, last.state.v_m);
  m.final_yaw_rate = last.state.r;

  // Rows within one revolution of the final heading.
  std::vector<double> xs;
  std::vector<double> ys;
  for (const AugmentedState& z : traj.states) {
    if (std::abs(last.psi - z.psi) <= kTwoPi) {
      xs.push_back(z.p1);
      ys.push_back(z.p2);
    }
  }
  if (xs.size() < 3) {
    xs.clear();
    ys.clear();
    for (const AugmentedState& z : traj.states) {
      xs.push_back(z.p1);
      ys.push_back(z.p2);
    }
  }
  const CircleFit fit = fit_circle(xs, ys);
  m.steady_diameter = 2.0 * fit.radius;
  m.fit_rms = fit.rms_residual;

  // Advance/tactical diameter in the frame of the initial heading.
  const double c = std::cos(first.psi);
  const double s = std::sin(first.psi);
  for (std::size_t i = 1; i < traj.size(); ++i) {
    const double turned = std::abs(traj.states[i].psi - first.psi);
    const double dx = traj.states[i].p1 - first.p1;
    const double dy = traj.states[i].p2 - first.p2;
    if (m.advance == 0.0 && turned >= 0.5 * std::numbers::pi) {
      m.advance = c * dx + s * dy;
    }
    if (turned >= std::numbers::pi) {
      m.tactical_diameter = std::abs(-s * dx + c * dy);
      break;
    }
  }
  return m;
}

}  // namespace mmgtune
