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
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

#include "hingequad/types.hpp"
#include "hingequad/vehicle.hpp"

namespace hq {

struct SimParams {
  double dt = 1e-3;                   // s, integration step
  double motor_time_constant = 0.03;  // s, first-order thrust lag
  double reversal_dead_time = 0.03;   // s, thrust held at zero when the spin direction flips
  double restitution = 0.0;           // hinge stop impacts
  Vector4d hinge_friction = Vector4d::Zero();  // viscous, N m s / rad
  double event_tolerance = 1e-6;      // s, joint-limit event localisation

  void validate() const;
};

enum class HingeLock { Free, AtZero, AtNinety };

struct HingeState {
  double angle = 0.0;  // rad, [0, pi/2]
  double rate = 0.0;   // rad/s
  HingeLock lock = HingeLock::AtZero;
};

struct MotorState {
  double thrust = 0.0;   // N, actual
  int direction = 0;     // spin direction last driven: +1, -1, or 0 before first use
  double dead_time = 0.0;  // s remaining at zero thrust during a reversal
};

struct SimState {
  double t = 0.0;
  Vector3d p = Vector3d::Zero();      // body COM, E
  Eigen::Quaterniond q = Eigen::Quaterniond::Identity();  // B -> E
  Vector3d v = Vector3d::Zero();      // body COM velocity, E
  Vector3d omega = Vector3d::Zero();  // body rate, B
  std::array<HingeState, kNumArms> hinge{};
  std::array<MotorState, kNumArms> motor{};

  Matrix3d rotation() const { return q.toRotationMatrix(); }
  HingeAngles hinge_angles() const;
  Vector4d thrusts() const;
};

/// Rest state in a steady configuration: hinges locked at their stops, motors
/// at `thrust` and spinning in the direction the configuration assigns.
SimState initial_state(Configuration config, const Vector4d& thrust = Vector4d::Zero());

/// Accelerations and constraint loads. Reaction loads are those the arm exerts
/// on the body at the hinge (the arm feels their negative), expressed in B.
struct DynamicsSolution {
  Vector3d lin_acc = Vector3d::Zero();  // body COM, E
  Vector3d ang_acc = Vector3d::Zero();  // body, B
  Vector4d hinge_acc = Vector4d::Zero();
  std::array<Vector3d, kNumArms> reaction_force{};
  std::array<Vector3d, kNumArms> reaction_torque{};
  Vector4d hinge_torque = Vector4d::Zero();  // y_Ai . tau_ri
  double residual = 0.0;  // max |A x - b| of the assembled system
};

/// y_Ai . tau_ri. Zero for a free hinge without friction, <= 0 to stay unfolded,
/// >= 0 to stay folded.
double hinge_axis_torque(const DynamicsSolution& sol, int arm);

struct ImpactEvent {
  double t = 0.0;
  int arm = 0;
  HingeLock stop = HingeLock::AtZero;
  double rate_before = 0.0;
  double energy_before = 0.0;
  double energy_after = 0.0;
};

struct StepReport {
  std::vector<ImpactEvent> impacts;
  int unlocks = 0;
};

/// Central body plus four hinged arms in maximal coordinates.
class Multibody {
 public:
  static constexpr int kUnknowns = 34;
  using SystemMatrix = Eigen::Matrix<double, kUnknowns, kUnknowns>;
  using SystemVector = Eigen::Matrix<double, kUnknowns, 1>;

  Multibody(const VehicleParams& params, const SimParams& sim);

  const VehicleParams& params() const { return kin_.params(); }
  const SimParams& sim() const { return sim_; }
  const ArmKinematics& kinematics() const { return kin_; }

  /// Solves the 34x34 Newton-Euler system for the given actual thrusts.
  DynamicsSolution dynamics(const SimState& s, const Vector4d& thrust) const;

  /// Advances by dt (<= 2 ms): motor lag (held over the step), RK4 on the
  /// mechanical state, joint-limit events and stop locking/unlocking.
  SimState step(const SimState& s, const Vector4d& command, double dt,
                StepReport* report = nullptr) const;

  /// Totals in E: linear momentum and angular momentum about the system COM.
  Vector3d linear_momentum(const SimState& s) const;
  Vector3d angular_momentum(const SimState& s) const;
  double kinetic_energy(const SimState& s) const;
  /// Kinetic plus gravitational potential energy.
  double mechanical_energy(const SimState& s) const;
  /// System COM in E.
  Vector3d system_com(const SimState& s) const;

  /// Propeller points in E.
  std::array<Vector3d, kNumArms> prop_positions(const SimState& s) const;

 private:
  void assemble(const SimState& s, SystemMatrix& A) const;
  SystemVector rhs(const SimState& s, const Vector4d& thrust) const;
  SimState integrate(const SimState& s, const Vector4d& thrust, double h) const;
  void update_locks(SimState& s, const Vector4d& thrust, StepReport* report) const;
  void apply_impacts(SimState& s, StepReport* report) const;
  void update_motors(SimState& s, const Vector4d& command, double dt) const;

  ArmKinematics kin_;
  SimParams sim_;
};

}  // namespace hq
