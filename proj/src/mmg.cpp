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

#include "mmgtune/mmg.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <string>

#include "mmgtune/error.hpp"

namespace mmgtune {

namespace {

constexpr double kPi = std::numbers::pi;

void require(bool ok, const std::string& what) {
  if (!ok) throw Error(ErrorKind::kValidationError, what);
}

void require_regime(const State& state, const ControlInput& input) {
  if (!(state.u > 0.0)) {
    throw Error(ErrorKind::kInvalidRegime,
                "surge velocity must be positive, got u = " +
                    std::to_string(state.u));
  }
  if (!(input.n_p > 0.0)) {
    throw Error(ErrorKind::kInvalidRegime,
                "propeller revolution must be positive, got n_P = " +
                    std::to_string(input.n_p));
  }
}

// Forces for an already validated regime; shares the propeller inflow
// between the propeller and rudder models.
ForceTriple propeller_force_from(const PropellerInflow& inflow,
                                 const MmgParams& params,
                                 const ShipParticulars& ship) {
  const double disk_area = kPi * ship.d_p * ship.d_p / 4.0;
  const double q = 0.5 * ship.rho * disk_area * inflow.inflow_sq;
  ForceTriple f;
  f.x = q * (1.0 - params.t_p) * inflow.k_t;
  if (params.propeller_lateral_force) {
    f.y = q * propeller_sway_coefficient(inflow.advance_angle);
    f.n = q * ship.lpp * propeller_yaw_coefficient(inflow.advance_angle);
  }
  return f;
}

PropellerInflow propeller_inflow_from(const State& state,
                                      const FlowKinematics& kin,
                                      const ControlInput& input,
                                      const MmgParams& params,
                                      const ShipParticulars& ship) {
  PropellerInflow p;
  p.beta_p = kin.beta - params.l_p * kin.r_nd;
  p.w_p = params.w_p0 * std::exp(params.c_w * p.beta_p * p.beta_p);
  p.u_p = (1.0 - p.w_p) * state.u;
  p.rotational = 0.7 * kPi * input.n_p * ship.d_p;
  p.advance_angle = (180.0 / kPi) * std::atan(p.u_p / p.rotational);
  p.advance_ratio = p.u_p / (input.n_p * ship.d_p);
  p.inflow_sq = p.u_p * p.u_p + p.rotational * p.rotational;
  p.k_t = thrust_coefficient(p.advance_angle);
  return p;
}

RudderInflow rudder_inflow_from(const FlowKinematics& kin,
                                const PropellerInflow& prop,
                                const State& state, const ControlInput& input,
                                const MmgParams& params,
                                const ShipParticulars& ship) {
  RudderInflow r;
  r.beta_r = kin.beta - params.l_r * kin.r_nd;
  r.gamma_r = r.beta_r >= 0.0 ? params.gamma_rp : params.gamma_rn;
  r.v_r = r.gamma_r * (kin.speed * std::sin(kin.beta) -
                       params.l_r * ship.lpp * state.r);

  const double eta = ship.d_p / ship.h_r;
  const double j = prop.advance_ratio;
  const double slip =
      std::sqrt(1.0 + 8.0 * prop.k_t / (kPi * j * j)) - 1.0;
  r.u_r_slipstream =
      prop.u_p * params.epsilon * (eta * params.kappa * slip + 1.0);
  r.u_r_floor = prop.rotational * params.u_r0;
  r.u_r = std::max(r.u_r_slipstream, r.u_r_floor);

  r.speed_sq = r.u_r * r.u_r + r.v_r * r.v_r;
  r.alpha_r = input.delta - std::atan2(r.v_r, r.u_r);
  r.delta_f = params.flap_map(input.delta);
  return r;
}

RudderForce rudder_force_from(const RudderInflow& inflow,
                              const ControlInput& input,
                              const MmgParams& params,
                              const ShipParticulars& ship) {
  RudderForce out;
  if (inflow.speed_sq == 0.0) {
    out.degenerate_inflow = true;
    return out;
  }
  const double f_alpha = rudder_lift_slope(inflow.delta_f, params);
  const double c_l0 = rudder_zero_lift(inflow.delta_f, params);
  out.normal_force = 0.5 * ship.rho * ship.a_r_area * inflow.speed_sq *
                     (f_alpha * std::sin(inflow.alpha_r) + c_l0);

  const double x_r = params.x_r * ship.lpp;
  const double x_h = params.x_h * ship.lpp;
  const double cos_d = std::cos(input.delta);
  out.force.x = -(1.0 - params.t_r) * out.normal_force * std::sin(input.delta);
  out.force.y = -(1.0 + params.a_h) * out.normal_force * cos_d;
  out.force.n = -(x_r + params.a_h * x_h) * out.normal_force * cos_d;
  return out;
}

ForceTriple hull_force_from(const FlowKinematics& kin, const MmgParams& params,
                            const ShipParticulars& ship) {
  const ForceTriple nd = hull_force_nondim(kin.v_nd, kin.r_nd, params);
  const double q = 0.5 * ship.rho * ship.lpp * ship.draft * kin.speed * kin.speed;
  return {q * nd.x, q * nd.y, q * ship.lpp * nd.n};
}

}  // namespace

// ---------------------------------------------------------------------------

void ShipParticulars::validate() const {
  require(std::isfinite(lpp) && lpp > 0.0, "ship: lpp must be positive");
  require(std::isfinite(beam) && beam > 0.0, "ship: beam must be positive");
  require(std::isfinite(draft) && draft > 0.0, "ship: draft must be positive");
  require(cb > 0.0 && cb < 1.0, "ship: cb must lie in (0, 1)");
  require(std::isfinite(x_g), "ship: x_g must be finite");
  require(std::isfinite(d_p) && d_p > 0.0, "ship: d_p must be positive");
  require(std::isfinite(h_r) && h_r > 0.0, "ship: h_r must be positive");
  require(std::isfinite(a_r_area) && a_r_area > 0.0,
          "ship: a_r_area must be positive");
  require(std::isfinite(rho) && rho > 0.0, "ship: rho must be positive");
  require(kzz_ratio > 0.0 && kzz_ratio < 1.0,
          "ship: kzz_ratio must lie in (0, 1)");
}

FlapMap::FlapMap(std::vector<std::pair<double, double>> breakpoints)
    : breakpoints_(std::move(breakpoints)) {
  for (std::size_t i = 0; i < breakpoints_.size(); ++i) {
    require(std::isfinite(breakpoints_[i].first) &&
                std::isfinite(breakpoints_[i].second),
            "flap_map: breakpoints must be finite");
    if (i > 0) {
      require(breakpoints_[i].first > breakpoints_[i - 1].first,
              "flap_map: rudder angles must be strictly increasing");
    }
  }
}

double FlapMap::operator()(double delta) const {
  if (breakpoints_.empty()) return delta;
  if (delta <= breakpoints_.front().first) return breakpoints_.front().second;
  if (delta >= breakpoints_.back().first) return breakpoints_.back().second;
  auto hi = std::upper_bound(
      breakpoints_.begin(), breakpoints_.end(), delta,
      [](double d, const auto& bp) { return d < bp.first; });
  auto lo = hi - 1;
  const double t = (delta - lo->first) / (hi->first - lo->first);
  return lo->second + t * (hi->second - lo->second);
}

void MmgParams::validate() const {
  for (const ParamField& field : param_fields()) {
    require(std::isfinite(this->*field.member),
            "params: " + std::string(field.name) + " must be finite");
  }
  require(r0 > 0.0, "params: r0 must be positive");
  require(w_p0 > 0.0 && w_p0 < 1.0, "params: w_p0 must lie in (0, 1)");
  require(gamma_rp > 0.0, "params: gamma_rp must be positive");
  require(gamma_rn > 0.0, "params: gamma_rn must be positive");
}

namespace {

constexpr std::array kParamFields = {
    ParamField{"m_x", &MmgParams::m_x},
    ParamField{"m_y", &MmgParams::m_y},
    ParamField{"j_zz", &MmgParams::j_zz},
    ParamField{"r0", &MmgParams::r0},
    ParamField{"x_vv", &MmgParams::x_vv},
    ParamField{"x_vr_plus_my", &MmgParams::x_vr_plus_my},
    ParamField{"x_rr", &MmgParams::x_rr},
    ParamField{"x_vvvr", &MmgParams::x_vvvr},
    ParamField{"x_vvvv", &MmgParams::x_vvvv},
    ParamField{"y_v", &MmgParams::y_v},
    ParamField{"y_r_minus_mx", &MmgParams::y_r_minus_mx},
    ParamField{"y_vvv", &MmgParams::y_vvv},
    ParamField{"y_vvr", &MmgParams::y_vvr},
    ParamField{"y_vrr", &MmgParams::y_vrr},
    ParamField{"y_rrr", &MmgParams::y_rrr},
    ParamField{"n_v", &MmgParams::n_v},
    ParamField{"n_r", &MmgParams::n_r},
    ParamField{"n_vvv", &MmgParams::n_vvv},
    ParamField{"n_vvr", &MmgParams::n_vvr},
    ParamField{"n_vrr", &MmgParams::n_vrr},
    ParamField{"n_rrr", &MmgParams::n_rrr},
    ParamField{"t_p", &MmgParams::t_p},
    ParamField{"w_p0", &MmgParams::w_p0},
    ParamField{"c_w", &MmgParams::c_w},
    ParamField{"l_p", &MmgParams::l_p},
    ParamField{"t_r", &MmgParams::t_r},
    ParamField{"a_h", &MmgParams::a_h},
    ParamField{"x_h", &MmgParams::x_h},
    ParamField{"epsilon", &MmgParams::epsilon},
    ParamField{"kappa", &MmgParams::kappa},
    ParamField{"u_r0", &MmgParams::u_r0},
    ParamField{"l_r", &MmgParams::l_r},
    ParamField{"gamma_rp", &MmgParams::gamma_rp},
    ParamField{"gamma_rn", &MmgParams::gamma_rn},
    ParamField{"f_a0", &MmgParams::f_a0},
    ParamField{"f_a2", &MmgParams::f_a2},
    ParamField{"c_l01", &MmgParams::c_l01},
    ParamField{"c_l03", &MmgParams::c_l03},
    ParamField{"x_r", &MmgParams::x_r},
};

}  // namespace

std::span<const ParamField> param_fields() { return kParamFields; }

std::optional<ParamField> find_param_field(std::string_view name) {
  for (const ParamField& f : kParamFields) {
    if (f.name == name) return f;
  }
  return std::nullopt;
}

double get_param(const MmgParams& params, std::string_view name) {
  auto field = find_param_field(name);
  if (!field) {
    throw Error(ErrorKind::kUnknownParameter,
                "unknown parameter '" + std::string(name) + "'");
  }
  return params.*(field->member);
}

void set_param(MmgParams& params, std::string_view name, double value) {
  auto field = find_param_field(name);
  if (!field) {
    throw Error(ErrorKind::kUnknownParameter,
                "unknown parameter '" + std::string(name) + "'");
  }
  params.*(field->member) = value;
}

// ---------------------------------------------------------------------------

double drift_angle(const State& state) {
  if (!(state.u > 0.0)) {
    throw Error(ErrorKind::kInvalidRegime,
                "drift angle requires u > 0, got u = " + std::to_string(state.u));
  }
  return std::atan(-state.v_m / state.u);
}

FlowKinematics flow_kinematics(const State& state, const ShipParticulars& ship) {
  FlowKinematics k;
  k.speed = std::hypot(state.u, state.v_m);
  if (!(k.speed > 0.0)) {
    throw Error(ErrorKind::kInvalidRegime, "ship speed U is zero");
  }
  k.beta = drift_angle(state);
  k.v_nd = state.v_m / k.speed;
  k.r_nd = state.r * ship.lpp / k.speed;
  return k;
}

double mass_scale(const ShipParticulars& ship) {
  return 0.5 * ship.rho * ship.lpp * ship.lpp * ship.draft;
}

double inertia_scale(const ShipParticulars& ship) {
  const double l2 = ship.lpp * ship.lpp;
  return 0.5 * ship.rho * l2 * l2 * ship.draft;
}

ForceTriple hull_force_nondim(double v, double r, const MmgParams& p) {
  const double v2 = v * v;
  const double r2 = r * r;
  ForceTriple f;
  f.x = -p.r0 + p.x_vv * v2 + p.x_vr() * v * r + p.x_rr * r2 +
        p.x_vvvr * v2 * v * r + p.x_vvvv * v2 * v2;
  f.y = p.y_v * v + p.y_r() * r + p.y_vvv * v2 * v + p.y_vvr * v2 * r +
        p.y_vrr * v * r2 + p.y_rrr * r2 * r;
  f.n = p.n_v * v + p.n_r * r + p.n_vvv * v2 * v + p.n_vvr * v2 * r +
        p.n_vrr * v * r2 + p.n_rrr * r2 * r;
  return f;
}

ForceTriple hull_force(const State& state, const MmgParams& params,
                       const ShipParticulars& ship) {
  return hull_force_from(flow_kinematics(state, ship), params, ship);
}

double thrust_coefficient(double phi) {
  return ((3.31e-6 * phi - 3.72e-4) * phi - 2.60e-3) * phi + 0.167;
}

double propeller_sway_coefficient(double phi) {
  return (-2.83e-5 * phi + 6.04e-4) * phi - 1.28e-2;
}

// Discontinuous at phi = 20 with the fitted coefficients; kept as fitted.
double propeller_yaw_coefficient(double phi) {
  if (phi < 20.0) return -2.48e-4 * phi - 1.70e-3;
  return -1.86e-4 * phi + 4.03e-3;
}

PropellerInflow propeller_inflow(const State& state, const ControlInput& input,
                                 const MmgParams& params,
                                 const ShipParticulars& ship) {
  require_regime(state, input);
  return propeller_inflow_from(state, flow_kinematics(state, ship), input,
                               params, ship);
}

ForceTriple propeller_force(const State& state, const ControlInput& input,
                            const MmgParams& params,
                            const ShipParticulars& ship) {
  return propeller_force_from(propeller_inflow(state, input, params, ship),
                              params, ship);
}

double rudder_lift_slope(double delta_f, const MmgParams& params) {
  return params.f_a0 + params.f_a2 * delta_f * delta_f;
}

double rudder_zero_lift(double delta_f, const MmgParams& params) {
  return params.c_l01 * delta_f + params.c_l03 * delta_f * delta_f * delta_f;
}

RudderInflow rudder_inflow(const State& state, const ControlInput& input,
                           const MmgParams& params,
                           const ShipParticulars& ship) {
  require_regime(state, input);
  const FlowKinematics kin = flow_kinematics(state, ship);
  const PropellerInflow prop =
      propeller_inflow_from(state, kin, input, params, ship);
  return rudder_inflow_from(kin, prop, state, input, params, ship);
}

RudderForce rudder_force(const State& state, const ControlInput& input,
                         const MmgParams& params,
                         const ShipParticulars& ship) {
  return rudder_force_from(rudder_inflow(state, input, params, ship), input,
                           params, ship);
}

MassProperties mass_properties(const MmgParams& params,
                               const ShipParticulars& ship) {
  MassProperties mp;
  mp.m = ship.displacement();
  const double ms = mass_scale(ship);
  mp.m_x = params.m_x * ms;
  mp.m_y = params.m_y * ms;
  mp.j_zz = params.j_zz * inertia_scale(ship);
  const double kzz = ship.kzz_ratio * ship.lpp;
  mp.i_g = mp.m * kzz * kzz;
  mp.x_g = ship.x_g;
  return mp;
}

Eigen::Matrix3d mass_matrix(const MassProperties& mp) {
  Eigen::Matrix3d m;
  const double xgm = mp.x_g * mp.m;
  // clang-format off
  m << mp.m + mp.m_x, 0.0,           0.0,
       0.0,           mp.m + mp.m_y, xgm,
       0.0,           xgm,           mp.i_g + mp.x_g * xgm + mp.j_zz;
  // clang-format on
  return m;
}

StateRate solve_motion(const State& s, const ForceTriple& f,
                       const MassProperties& mp) {
  // M = [[m+mx, 0, 0], [0, m+my, xg m], [0, xg m, Ig + xg^2 m + Jzz]];
  // surge decouples, sway/yaw is a symmetric 2x2 system.
  const double m = mp.m;
  const double xgm = mp.x_g * m;
  const double b0 = f.x + (m + mp.m_y) * s.v_m * s.r + xgm * s.r * s.r;
  const double b1 = f.y - (m + mp.m_x) * s.u * s.r;
  const double b2 = f.n - xgm * s.u * s.r;

  const double a11 = m + mp.m_y;
  const double a22 = mp.i_g + mp.x_g * xgm + mp.j_zz;
  const double det = a11 * a22 - xgm * xgm;
  if (!(det > 0.0) || !(m + mp.m_x > 0.0)) {
    throw Error(ErrorKind::kSingularMass, "mass matrix is not invertible");
  }
  StateRate rate;
  rate.du = b0 / (m + mp.m_x);
  rate.dv_m = (a22 * b1 - xgm * b2) / det;
  rate.dr = (a11 * b2 - xgm * b1) / det;
  return rate;
}

ForceTriple total_force(const State& state, const ControlInput& input,
                        const MmgParams& params, const ShipParticulars& ship) {
  require_regime(state, input);
  const FlowKinematics kin = flow_kinematics(state, ship);
  const PropellerInflow prop =
      propeller_inflow_from(state, kin, input, params, ship);
  const RudderInflow rud =
      rudder_inflow_from(kin, prop, state, input, params, ship);
  return hull_force_from(kin, params, ship) +
         propeller_force_from(prop, params, ship) +
         rudder_force_from(rud, input, params, ship).force;
}

StateRate f_mmg(const State& state, const ControlInput& input,
                const MmgParams& params, const ShipParticulars& ship) {
  const ForceTriple f = total_force(state, input, params, ship);
  return solve_motion(state, f, mass_properties(params, ship));
}

AugmentedRate f_zeta(const AugmentedState& zeta, const ControlInput& input,
                     const MmgParams& params, const ShipParticulars& ship) {
  const State& s = zeta.state;
  const double c = std::cos(zeta.psi);
  const double sn = std::sin(zeta.psi);
  AugmentedRate rate;
  rate.dp1 = c * s.u - sn * s.v_m;
  rate.dp2 = sn * s.u + c * s.v_m;
  rate.dpsi = s.r;
  rate.velocity = f_mmg(s, input, params, ship);
  return rate;
}

}  // namespace mmgtune
