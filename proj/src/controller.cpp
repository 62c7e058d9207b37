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

#include "hingequad/controller.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "hingequad/rotation.hpp"

namespace hq {

void ControllerParams::validate() const {
  if (!(kp > 0.0) || !(kd > 0.0)) throw ConfigError("controller gains must be positive");
  if (!(acc_cap > 0.0)) throw ConfigError("acc_cap must be positive");
  if (!(attitude_rate > 0.0) || !(position_rate > 0.0) || position_rate > attitude_rate) {
    throw ConfigError("loop rates must be positive with position_rate <= attitude_rate");
  }
  if (!(fold_thrust < 0.0) || !(unfold_thrust > 0.0)) {
    throw ConfigError("fold_thrust must be negative and unfold_thrust positive");
  }
  if (!(exit_tolerance > 0.0) || !(exit_debounce >= 0.0) || !(timed_exit > 0.0) ||
      !(transition_timeout > 0.0)) {
    throw ConfigError("transition timing parameters must be positive");
  }
  lqr.validate();
}

Setpoint Setpoint::hold(const Vector3d& p, double yaw) {
  Setpoint s;
  s.mode = SetpointMode::PositionHold;
  s.position = p;
  s.yaw = yaw;
  return s;
}

Setpoint Setpoint::trajectory(const Vector3d& p, const Vector3d& v, const Vector3d& a, double yaw) {
  Setpoint s;
  s.mode = SetpointMode::Trajectory;
  s.position = p;
  s.velocity = v;
  s.acceleration = a;
  s.yaw = yaw;
  return s;
}

Setpoint Setpoint::attitude_only(const Matrix3d& R, double f_sigma) {
  Setpoint s;
  s.mode = SetpointMode::AttitudeOnly;
  s.attitude = R;
  s.thrust = f_sigma;
  s.yaw = yaw_of<double>(R);
  return s;
}

Setpoint Setpoint::constant_thrust(double f) {
  Setpoint s;
  s.mode = SetpointMode::ConstantThrust;
  s.thrust = f;
  return s;
}

std::string_view to_string(FsmState s) {
  switch (s) {
    case FsmState::Steady: return "Steady";
    case FsmState::Folding24: return "Folding24";
    case FsmState::Unfolding24: return "Unfolding24";
    case FsmState::FoldingAll: return "FoldingAll";
    case FsmState::UnfoldingAll: return "UnfoldingAll";
    case FsmState::Abort: return "Abort";
  }
  return "?";
}

TransitionFsm request_transition(const TransitionFsm& fsm, Configuration target, double t) {
  if (fsm.state != FsmState::Steady) {
    throw std::invalid_argument("transition requested while not in a steady state");
  }
  TransitionFsm out = fsm;
  const Configuration from = fsm.config;
  if (from == Configuration::Unfolded && target == Configuration::TwoFolded24) {
    out.state = FsmState::Folding24;
  } else if (from == Configuration::TwoFolded24 && target == Configuration::Unfolded) {
    out.state = FsmState::Unfolding24;
  } else if (from == Configuration::Unfolded && target == Configuration::FourFolded) {
    out.state = FsmState::FoldingAll;
  } else if (from == Configuration::FourFolded && target == Configuration::Unfolded) {
    out.state = FsmState::UnfoldingAll;
  } else {
    std::ostringstream msg;
    msg << "unsupported transition " << to_string(from) << " -> " << to_string(target);
    throw std::invalid_argument(msg.str());
  }
  out.config = target;
  out.entry_time = t;
  out.settled_since = -1.0;
  out.arm_done.fill(false);
  return out;
}

TransitionFsm fsm_step(const TransitionFsm& fsm, const HingeAngles& angles, double t,
                       double current_yaw, const ControllerParams& params) {
  if (fsm.state == FsmState::Steady || fsm.state == FsmState::Abort) return fsm;
  TransitionFsm out = fsm;
  bool all = true;
  for (int i = 0; i < kNumArms; ++i) {
    const double stop = arm_folded(fsm.config, i) ? kHalfPi : 0.0;
    out.arm_done[i] = std::abs(angles[i] - stop) <= params.exit_tolerance;
    all = all && out.arm_done[i];
  }
  const double elapsed = t - fsm.entry_time;
  bool exit = false;
  if (params.exit_mode == TransitionExit::Timed) {
    exit = elapsed >= params.timed_exit - 1e-12;
  } else {
    if (!all) {
      out.settled_since = -1.0;
    } else if (out.settled_since < 0.0) {
      out.settled_since = t;
    }
    exit = all && t - out.settled_since >= params.exit_debounce - 1e-12;
  }
  if (exit) {
    if (fsm.state == FsmState::Folding24 || fsm.state == FsmState::Unfolding24) {
      out.yaw_des = current_yaw;
    }
    out.state = FsmState::Steady;
    out.settled_since = -1.0;
    return out;
  }
  if (elapsed >= params.transition_timeout) {
    out.state = FsmState::Abort;
  }
  return out;
}

Vector3d position_control(const SimState& state, const Setpoint& sp, const ControllerParams& params) {
  if (sp.mode != SetpointMode::PositionHold && sp.mode != SetpointMode::Trajectory) {
    throw std::invalid_argument("position_control needs a position reference");
  }
  Vector3d fb = params.kp * (sp.position - state.p) + params.kd * (sp.velocity - state.v);
  const double n = fb.norm();
  if (n > params.acc_cap) fb *= params.acc_cap / n;
  return sp.acceleration + fb;
}

ThrustAttitude acc_to_wrench_attitude(const Vector3d& a_des, double yaw_des, const VehicleParams& params,
                                      const Matrix3d& R_current) {
  ThrustAttitude out;
  const Vector3d specific = a_des - params.gravity;
  const double n = specific.norm();
  if (n < 1e-9) {
    out.singular = true;
    out.f_sigma = 0.0;
    out.R_des = R_current;
    out.z_des = R_current.col(2);
    return out;
  }
  out.z_des = specific / n;
  out.R_des = attitude_from_thrust_yaw<double>(out.z_des, yaw_des);
  out.f_sigma = std::max(0.0, params.total_mass() * specific.dot(R_current.col(2)));
  return out;
}

std::array<bool, kNumArms> reverse_flags(Configuration config) {
  std::array<bool, kNumArms> r{};
  for (int i = 0; i < kNumArms; ++i) r[i] = arm_folded(config, i);
  return r;
}

ThrustVector clamp_thrusts(const ThrustVector& u, const std::array<bool, kNumArms>& reverse,
                           const VehicleParams& params) {
  ThrustVector out;
  for (int i = 0; i < kNumArms; ++i) {
    out(i) = reverse[i] ? std::clamp(u(i), params.thrust_min, 0.0)
                        : std::clamp(u(i), 0.0, params.thrust_max);
  }
  return out;
}

MotorCommands motor_commands(const ThrustVector& u, const std::array<bool, kNumArms>& reverse,
                             const VehicleParams& params) {
  MotorCommands cmds;
  for (int i = 0; i < kNumArms; ++i) {
    cmds[i].thrust = u(i);
    cmds[i].reverse = reverse[i];
    cmds[i].speed = thrust_to_speed(params, u(i));
  }
  return cmds;
}

FlightController::FlightController(const VehicleParams& params, const ControllerParams& ctrl,
                                   Configuration initial)
    : params_(params), ctrl_(ctrl) {
  params_.validate();
  ctrl_.validate();
  if (is_transitional(initial)) throw std::invalid_argument("initial configuration must be steady");
  fsm_.config = initial;
  for (Configuration c : kSteadyConfigurations) {
    mappings_.emplace(c, build_mapping(c, params_));
    bounds_.emplace(c, bound_matrix(c, params_));
    gains_.emplace(c, synthesize_gains(c, params_, ctrl_.lqr));
  }
}

void FlightController::request(Configuration target, double t) {
  fsm_ = request_transition(fsm_, target, t);
}

Wrench FlightController::apply_bounds(const Wrench& w, Configuration config, ControlOutput& out) const {
  const BoundMatrix& W = bounds_.at(config);
  if (config == Configuration::FourFolded) {
    if (!ctrl_.enforce_fourfold_bounds) return w;
    // Thrust has no effect here; the margins are linear in tau and vanish at
    // tau = 0, so scaling tau down always restores them.
    out.bounds_active = true;
    const Vector4d m = W.W.rightCols<3>() * w.tau;
    double s = 1.0;
    for (int i = 0; i < kNumArms; ++i) {
      if (m(i) < 0.0) s = std::min(s, 0.0);
    }
    Wrench adj = w;
    adj.tau *= s;
    out.hierarchy.roll_pitch_scaled = s < 1.0;
    return adj;
  }
  out.bounds_active = true;
  const auto rev = reverse_flags(config);
  Vector4d lo, hi;
  for (int i = 0; i < kNumArms; ++i) {
    lo(i) = rev[i] ? params_.thrust_min : 0.0;
    hi(i) = rev[i] ? 0.0 : params_.thrust_max;
  }
  try {
    out.hierarchy = enforce_hierarchy(w, W, mappings_.at(config), lo, hi);
  } catch (const InfeasibleError& e) {
    std::ostringstream msg;
    msg << e.what() << " [config " << to_string(config) << ", wrench (" << w.vector().transpose()
        << "), margins (" << check_bounds(W, w).margins.transpose() << ")]";
    throw InfeasibleError(msg.str());
  }
  return out.hierarchy.wrench;
}

ThrustVector FlightController::allocate(const Wrench& w, Configuration config) const {
  const MappingMatrix& M = mappings_.at(config);
  if (config != Configuration::FourFolded) return invert_mapping(M, w);
  // Minimum norm, then slide along the null space until every thrust is on the
  // reverse branch; the torque is unchanged.
  ThrustVector u = allocate_min_norm(M.torque_rows(), w.tau);
  Vector4d n = torque_null_vector(M.torque_rows());
  if (n.sum() < 0.0) n = -n;
  if ((n.array() > 0.0).all()) {
    double s = 0.0;
    for (int i = 0; i < kNumArms; ++i) s = std::min(s, -u(i) / n(i));
    u += s * n;
  }
  return u;
}

ControlOutput FlightController::step(const SimState& state, const Setpoint& sp, double t) {
  const Matrix3d R = state.rotation();
  fsm_ = fsm_step(fsm_, state.hinge_angles(), t, yaw_of<double>(R), ctrl_);

  ControlOutput out;
  out.fsm_state = fsm_.state;

  // Constant-thrust phases bypass every loop.
  const bool all_arms = fsm_.state == FsmState::FoldingAll || fsm_.state == FsmState::UnfoldingAll;
  if (sp.mode == SetpointMode::ConstantThrust || all_arms) {
    const double f = all_arms ? (fsm_.state == FsmState::FoldingAll ? ctrl_.fold_thrust
                                                                    : ctrl_.unfold_thrust)
                              : sp.thrust;
    std::array<bool, kNumArms> rev;
    rev.fill(f < 0.0);
    const ThrustVector u = clamp_thrusts(ThrustVector::Constant(f), rev, params_);
    out.motors = motor_commands(u, rev, params_);
    out.control_config = fsm_.config;
    return out;
  }

  Configuration config = fsm_.config;
  if (fsm_.state == FsmState::Abort) config = Configuration::Unfolded;
  out.control_config = config;
  const double yaw = fsm_.yaw_des ? *fsm_.yaw_des : sp.yaw;

  Matrix3d R_des;
  double f_sigma = 0.0;
  if (fsm_.state == FsmState::Abort) {
    R_des = attitude_from_thrust_yaw<double>(Vector3d::UnitZ(), yaw_of<double>(R));
    f_sigma = params_.hover_thrust();
  } else if (sp.mode == SetpointMode::AttitudeOnly || config == Configuration::FourFolded) {
    R_des = sp.mode == SetpointMode::AttitudeOnly
                ? sp.attitude
                : attitude_from_thrust_yaw<double>(Vector3d::UnitZ(), yaw);
    f_sigma = sp.mode == SetpointMode::AttitudeOnly ? sp.thrust : 0.0;
  } else {
    if (t >= next_position_time_ - 1e-9) {
      a_des_ = position_control(state, sp, ctrl_);
      next_position_time_ = (next_position_time_ < 0.0 ? t : next_position_time_) +
                            1.0 / ctrl_.position_rate;
      if (next_position_time_ <= t) next_position_time_ = t + 1.0 / ctrl_.position_rate;
    }
    const ThrustAttitude ta = acc_to_wrench_attitude(a_des_, yaw, params_, R);
    R_des = ta.singular ? last_R_des_ : ta.R_des;
    f_sigma = ta.f_sigma;
  }
  last_R_des_ = R_des;

  out.attitude_error = attitude_error(R, R_des);
  const Vector3d tau = attitude_torque(gains_.at(config), out.attitude_error, state.omega);
  out.wrench_cmd = Wrench(f_sigma, tau);

  Wrench w = out.wrench_cmd;
  // Two-arm transitions fly the target configuration and respect its bounds,
  // which push the moving arms toward their target stops.
  const bool bounded = fsm_.state == FsmState::Steady || fsm_.state == FsmState::Folding24 ||
                       fsm_.state == FsmState::Unfolding24;
  if (bounded) w = apply_bounds(w, config, out);
  out.wrench = w;
  out.margins = check_bounds(bounds_.at(config), w).margins;

  const auto rev = reverse_flags(config);
  const ThrustVector u = clamp_thrusts(allocate(w, config), rev, params_);
  out.motors = motor_commands(u, rev, params_);
  return out;
}

}  // namespace hq
