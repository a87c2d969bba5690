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

// 3-DOF MMG maneuvering model: domain types, hull/propeller/rudder force
// models and the state derivative.
//
// Frames: body-fixed O-xy with origin at midship, x forward, y to
// starboard; Earth-fixed p1/p2 with heading psi measured from p1 toward p2.
// All angles are radians except the propeller advance angle, which the
// fitted propeller polynomials take in degrees.

#ifndef MMGTUNE_MMG_HPP_
#define MMGTUNE_MMG_HPP_

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Core>

namespace mmgtune {

// Principal particulars of the subject ship. Defaults are the container
// ship used for the verification runs; rho and kzz_ratio are not part of the
// published particulars and default to seawater and 0.25 L_pp.
struct ShipParticulars {
  double lpp = 83.0;         // [m]
  double beam = 13.5;        // [m]
  double draft = 3.8;        // [m]
  double cb = 0.737;         // [-]
  double x_g = 0.93;         // [m]
  double d_p = 2.80;         // [m]
  double h_r = 3.49;         // [m]
  double a_r_area = 6.282;   // [m^2]
  double rho = 1025.0;       // [kg/m^3]
  double kzz_ratio = 0.25;   // yaw radius of gyration / lpp

  // Displacement mass rho * cb * lpp * beam * draft [kg].
  double displacement() const { return rho * cb * lpp * beam * draft; }

  // Throws Error(kValidationError) naming the first violated invariant.
  void validate() const;

  bool operator==(const ShipParticulars&) const = default;
};

// Piecewise-linear flap-angle schedule delta -> delta_f (radians). An empty
// table is the identity map. Outside the table range the end values are
// held.
class FlapMap {
 public:
  FlapMap() = default;
  // Breakpoints must have strictly increasing delta.
  explicit FlapMap(std::vector<std::pair<double, double>> breakpoints);

  double operator()(double delta) const;

  bool is_identity() const { return breakpoints_.empty(); }
  const std::vector<std::pair<double, double>>& breakpoints() const {
    return breakpoints_;
  }

  bool operator==(const FlapMap&) const = default;

 private:
  std::vector<std::pair<double, double>> breakpoints_;
};

// Every coefficient of the MMG model. Default construction yields the
// pre-determined values. Primed (nondimensional) quantities carry no suffix.
struct MmgParams {
  // Added masses and added moment of inertia.
  double m_x = 0.010;
  double m_y = 0.168;
  double j_zz = 0.010;

  // Hull hydrodynamic derivatives. x_vr and y_r are stored in the composite
  // form in which they are tabulated: (X'_vr + m'_y) and (Y'_r - m'_x).
  double r0 = 0.017;
  double x_vv = 0.009;
  double x_vr_plus_my = 0.160;
  double x_rr = -0.0164;
  double x_vvvr = -0.824;
  double x_vvvv = -0.114;
  double y_v = -0.329;
  double y_r_minus_mx = 0.090;
  double y_vvv = -0.787;
  double y_vvr = -0.022;
  double y_vrr = -0.206;
  double y_rrr = 0.001;
  double n_v = -0.106;
  double n_r = -0.057;
  double n_vvv = -0.037;
  double n_vvr = -0.105;
  double n_vrr = 0.012;
  double n_rrr = -0.008;

  // Propeller.
  double t_p = 0.080;
  double w_p0 = 0.422;
  double c_w = -2.0;
  double l_p = -0.5;

  // Rudder.
  double t_r = -0.058;
  double a_h = 0.158;
  double x_h = -0.605;
  double epsilon = 1.27;
  double kappa = 0.5;
  double u_r0 = 0.14;
  double l_r = -0.888;
  double gamma_rp = 0.483;
  double gamma_rn = 0.172;
  double f_a0 = 2.411;
  double f_a2 = -0.381;
  double c_l01 = 1.164;
  double c_l03 = -0.381;
  double x_r = -0.5;  // rudder position / lpp in N_R

  FlapMap flap_map;

  // When false, Y_P and N_P are forced to zero (straight-run studies).
  bool propeller_lateral_force = true;

  double x_vr() const { return x_vr_plus_my - m_y; }
  double y_r() const { return y_r_minus_mx + m_x; }

  // Throws Error(kValidationError) on r0 <= 0, w_p0 outside (0, 1),
  // non-positive gamma or non-finite coefficients.
  void validate() const;

  bool operator==(const MmgParams&) const = default;
};

// Named access to the scalar coefficients of MmgParams.
struct ParamField {
  std::string_view name;
  double MmgParams::*member;
};

std::span<const ParamField> param_fields();
std::optional<ParamField> find_param_field(std::string_view name);

// Throw Error(kUnknownParameter) for names not in param_fields().
double get_param(const MmgParams& params, std::string_view name);
void set_param(MmgParams& params, std::string_view name, double value);

struct State {
  double u = 0.0;    // surge [m/s]
  double v_m = 0.0;  // sway at midship [m/s]
  double r = 0.0;    // yaw rate [rad/s]

  bool operator==(const State&) const = default;
};

struct AugmentedState {
  double p1 = 0.0;   // [m]
  double p2 = 0.0;   // [m]
  double psi = 0.0;  // unwrapped heading [rad]
  State state;

  bool operator==(const AugmentedState&) const = default;
};

struct ControlInput {
  double n_p = 0.0;    // [rev/s]
  double delta = 0.0;  // [rad]

  bool operator==(const ControlInput&) const = default;
};

struct ForceTriple {
  double x = 0.0;  // [N]
  double y = 0.0;  // [N]
  double n = 0.0;  // [N m]

  ForceTriple& operator+=(const ForceTriple& o) {
    x += o.x;
    y += o.y;
    n += o.n;
    return *this;
  }
  friend ForceTriple operator+(ForceTriple a, const ForceTriple& b) {
    return a += b;
  }
};

struct StateRate {
  double du = 0.0;
  double dv_m = 0.0;
  double dr = 0.0;
};

struct AugmentedRate {
  double dp1 = 0.0;
  double dp2 = 0.0;
  double dpsi = 0.0;
  StateRate velocity;
};

// Ship speed, drift angle and the nondimensional velocities used by the
// force models.
struct FlowKinematics {
  double speed = 0.0;   // U [m/s]
  double beta = 0.0;    // drift angle [rad]
  double v_nd = 0.0;    // v_m / U
  double r_nd = 0.0;    // r * lpp / U
};

// arctan(-v_m / u). Throws kInvalidRegime for u <= 0.
double drift_angle(const State& state);
FlowKinematics flow_kinematics(const State& state, const ShipParticulars& ship);

// Scales for nondimensional masses and inertias.
double mass_scale(const ShipParticulars& ship);     // 0.5 rho lpp^2 d
double inertia_scale(const ShipParticulars& ship);  // 0.5 rho lpp^4 d

// ---------------------------------------------------------------------------
// Hull

// Nondimensional hull force polynomials (X'_H, Y'_H, N'_H).
ForceTriple hull_force_nondim(double v_nd, double r_nd, const MmgParams& params);
ForceTriple hull_force(const State& state, const MmgParams& params,
                       const ShipParticulars& ship);

// ---------------------------------------------------------------------------
// Propeller

// Fitted open-water and lateral force curves; phi in degrees.
double thrust_coefficient(double phi_deg);
double propeller_sway_coefficient(double phi_deg);
double propeller_yaw_coefficient(double phi_deg);

struct PropellerInflow {
  double beta_p = 0.0;        // geometrical inflow angle [rad]
  double w_p = 0.0;           // wake fraction
  double u_p = 0.0;           // (1 - w_p) u [m/s]
  double rotational = 0.0;    // 0.7 pi n_P D_P [m/s]
  double advance_angle = 0.0; // phi_P [deg]
  double advance_ratio = 0.0; // J_P = u_P / (n_P D_P)
  double inflow_sq = 0.0;     // V_r^2
  double k_t = 0.0;
};

PropellerInflow propeller_inflow(const State& state, const ControlInput& input,
                                 const MmgParams& params,
                                 const ShipParticulars& ship);
ForceTriple propeller_force(const State& state, const ControlInput& input,
                            const MmgParams& params,
                            const ShipParticulars& ship);

// ---------------------------------------------------------------------------
// Rudder

double rudder_lift_slope(double delta_f, const MmgParams& params);  // f_alpha
double rudder_zero_lift(double delta_f, const MmgParams& params);   // C_l0

struct RudderInflow {
  double beta_r = 0.0;
  double gamma_r = 0.0;
  double u_r_slipstream = 0.0;  // u_R*
  double u_r_floor = 0.0;       // u_R**
  double u_r = 0.0;             // max(u_R*, u_R**)
  double v_r = 0.0;
  double speed_sq = 0.0;        // U_R^2
  double alpha_r = 0.0;         // effective inflow angle [rad]
  double delta_f = 0.0;         // flap angle [rad]
};

struct RudderForce {
  ForceTriple force;
  double normal_force = 0.0;     // F_N [N]
  bool degenerate_inflow = false;  // U_R == 0; force reported as zero
};

RudderInflow rudder_inflow(const State& state, const ControlInput& input,
                           const MmgParams& params, const ShipParticulars& ship);
RudderForce rudder_force(const State& state, const ControlInput& input,
                         const MmgParams& params, const ShipParticulars& ship);

// ---------------------------------------------------------------------------
// Equations of motion

struct MassProperties {
  double m = 0.0;
  double m_x = 0.0;
  double m_y = 0.0;
  double j_zz = 0.0;
  double i_g = 0.0;
  double x_g = 0.0;
};

MassProperties mass_properties(const MmgParams& params,
                               const ShipParticulars& ship);
Eigen::Matrix3d mass_matrix(const MassProperties& mass);

// Solves M d(u, v_m, r)/dt = (X + (m + m_y) v_m r + x_G m r^2,
//                              Y - (m + m_x) u r, N - x_G m u r).
StateRate solve_motion(const State& state, const ForceTriple& force,
                       const MassProperties& mass);

// Hull + propeller + rudder.
ForceTriple total_force(const State& state, const ControlInput& input,
                        const MmgParams& params, const ShipParticulars& ship);

// d(u, v_m, r)/dt. Throws kInvalidRegime outside u > 0, n_P > 0.
StateRate f_mmg(const State& state, const ControlInput& input,
                const MmgParams& params, const ShipParticulars& ship);

// Kinematics R(psi) (u, v_m, r) stacked on f_mmg.
AugmentedRate f_zeta(const AugmentedState& zeta, const ControlInput& input,
                     const MmgParams& params, const ShipParticulars& ship);

}  // namespace mmgtune

#endif  // MMGTUNE_MMG_HPP_
