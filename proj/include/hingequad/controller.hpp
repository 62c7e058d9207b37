// Copyright 2026 The hingequad Authors
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

#pragma once

#include <array>
#include <map>
#include <optional>
#include <string_view>

#include "hingequad/hinge_bounds.hpp"
#include "hingequad/lqr_attitude.hpp"
#include "hingequad/mixer.hpp"
#include "hingequad/multibody.hpp"
#include "hingequad/types.hpp"
#include "hingequad/vehicle.hpp"

namespace hq {

enum class TransitionExit { HingeAngles, Timed };

struct ControllerParams {
  double kp = 6.0;        // 1/s^2
  double kd = 4.0;        // 1/s
  double acc_cap = 8.0;   // m/s^2, on the feedback part of the acceleration command
  double attitude_rate = 500.0;  // Hz
  double position_rate = 50.0;   // Hz

  double fold_thrust = -1.0;    // N, every propeller while all arms fold
  double unfold_thrust = 1.0;   // N, every propeller while all arms unfold
  TransitionExit exit_mode = TransitionExit::HingeAngles;
  double exit_tolerance = deg2rad(2.0);  // rad from the stop
  double exit_debounce = 0.05;           // s
  double timed_exit = 0.4;               // s, exit time for TransitionExit::Timed
  double transition_timeout = 2.0;       // s

  bool enforce_fourfold_bounds = false;
  LqrWeights lqr;

  void validate() const;
};

enum class SetpointMode { PositionHold, Trajectory, AttitudeOnly, ConstantThrust };

struct Setpoint {
  SetpointMode mode = SetpointMode::PositionHold;
  Vector3d position = Vector3d::Zero();
  Vector3d velocity = Vector3d::Zero();
  Vector3d acceleration = Vector3d::Zero();
  double yaw = 0.0;
  Matrix3d attitude = Matrix3d::Identity();  // AttitudeOnly
  double thrust = 0.0;  // AttitudeOnly: total thrust; ConstantThrust: per propeller

  static Setpoint hold(const Vector3d& p, double yaw);
  static Setpoint trajectory(const Vector3d& p, const Vector3d& v, const Vector3d& a, double yaw);
  static Setpoint attitude_only(const Matrix3d& R, double f_sigma);
  static Setpoint constant_thrust(double f);
};

struct MotorCommand {
  double speed = 0.0;   // rad/s, signed by spin direction
  double thrust = 0.0;  // N
  bool reverse = false;
};
using MotorCommands = std::array<MotorCommand, kNumArms>;

enum class FsmState { Steady, Folding24, Unfolding24, FoldingAll, UnfoldingAll, Abort };
std::string_view to_string(FsmState s);

struct TransitionFsm {
  FsmState state = FsmState::Steady;
  Configuration config = Configuration::Unfolded;  // steady configuration, or the target while transitioning
  double entry_time = 0.0;
  double settled_since = -1.0;  // start of the current in-tolerance window, < 0 if none
  std::array<bool, kNumArms> arm_done{};
  std::optional<double> yaw_des;  // post-transition yaw target
};

/// Starts a transition out of a steady configuration. Supported: Unfolded <->
/// TwoFolded24 and Unfolded <-> FourFolded. Throws std::invalid_argument otherwise.
TransitionFsm request_transition(const TransitionFsm& fsm, Configuration target, double t);

/// Advances the transition state machine. Exits a transition once every hinge is
/// within the tolerance of its target stop for the debounce window (or after the
/// timed exit), resets yaw_des to `current_yaw` after two-arm transitions, and
/// aborts when the timeout elapses first.
TransitionFsm fsm_step(const TransitionFsm& fsm, const HingeAngles& angles, double t,
                       double current_yaw, const ControllerParams& params);

/// a_ref + saturated PD on position and velocity errors.
Vector3d position_control(const SimState& state, const Setpoint& sp, const ControllerParams& params);

struct ThrustAttitude {
  double f_sigma = 0.0;
  Vector3d z_des = Vector3d::UnitZ();
  Matrix3d R_des = Matrix3d::Identity();
  bool singular = false;  // a_des = g: attitude held, no thrust
};

/// Thrust direction and magnitude for a desired acceleration. f_sigma is the
/// projection of m (a_des - g) on the current thrust axis, clamped at zero.
ThrustAttitude acc_to_wrench_attitude(const Vector3d& a_des, double yaw_des, const VehicleParams& params,
                                      const Matrix3d& R_current = Matrix3d::Identity());

struct ControlOutput {
  MotorCommands motors{};
  Wrench wrench_cmd;    // before the hierarchy
  Wrench wrench;        // sent to allocation
  Vector4d margins = Vector4d::Zero();
  bool bounds_active = false;
  HierarchyResult hierarchy;
  Configuration control_config = Configuration::Unfolded;
  FsmState fsm_state = FsmState::Steady;
  Vector3d attitude_error = Vector3d::Zero();
};

/// Cascaded position -> attitude -> allocation controller with the transition FSM.
class FlightController {
 public:
  FlightController(const VehicleParams& params, const ControllerParams& ctrl,
                   Configuration initial = Configuration::Unfolded);

  /// One attitude-rate update at time t. The position loop runs at its own
  /// (lower) rate inside.
  ControlOutput step(const SimState& state, const Setpoint& sp, double t);

  void request(Configuration target, double t);
  const TransitionFsm& fsm() const { return fsm_; }
  void clear_yaw_override() { fsm_.yaw_des.reset(); }

  const GainMatrix& gains(Configuration c) const { return gains_.at(c); }
  const MappingMatrix& mapping(Configuration c) const { return mappings_.at(c); }
  const BoundMatrix& bounds(Configuration c) const { return bounds_.at(c); }
  const ControllerParams& params() const { return ctrl_; }

 private:
  Wrench apply_bounds(const Wrench& w, Configuration config, ControlOutput& out) const;
  ThrustVector allocate(const Wrench& w, Configuration config) const;

  VehicleParams params_;
  ControllerParams ctrl_;
  TransitionFsm fsm_;
  std::map<Configuration, MappingMatrix> mappings_;
  std::map<Configuration, BoundMatrix> bounds_;
  std::map<Configuration, GainMatrix> gains_;
  Vector3d a_des_ = Vector3d::Zero();
  double next_position_time_ = -1.0;
  Matrix3d last_R_des_ = Matrix3d::Identity();
};

/// Direction-specific clamp: forward arms to [0, f_max], reverse arms to [f_min, 0].
ThrustVector clamp_thrusts(const ThrustVector& u, const std::array<bool, kNumArms>& reverse,
                           const VehicleParams& params);

/// Encodes thrusts as signed rotor speeds.
MotorCommands motor_commands(const ThrustVector& u, const std::array<bool, kNumArms>& reverse,
                             const VehicleParams& params);

/// Which propellers spin in reverse while flying a (steady or target) configuration.
std::array<bool, kNumArms> reverse_flags(Configuration config);

}  // namespace hq
