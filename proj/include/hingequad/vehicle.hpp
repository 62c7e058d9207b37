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
#include <optional>

#include "hingequad/types.hpp"

namespace hq {

/**
 * Physical constants of the hinged-arm vehicle.
 *
 * Frames: E is inertial (z up). B is fixed to the central body with its origin at
 * the central-body center of mass, x forward, y left, z up. Arm frames A_i have x
 * pointing from the hinge to the propeller, z along positive thrust and y along the
 * hinge axis. Positive rotation about the hinge axis folds the arm downward.
 *
 * Arm numbering follows the unfolded mixer sign pattern: arm 0 sits at
 * (+l/2, -l/2), arm 1 at (-l/2, -l/2), arm 2 at (-l/2, +l/2), arm 3 at (+l/2, +l/2).
 */
struct VehicleParams {
  double body_mass = 0.356;  // kg
  double arm_mass = 0.067;   // kg, per arm
  // Not measured; fitted once so the unfolded bound matrix reproduces the
  // flight vehicle's published coefficients, then frozen.
  Matrix3d body_inertia = Vector3d(8.535e-4, 5.510e-4, 9.007e-4).asDiagonal();  // at body COM, B
  Matrix3d arm_inertia = Vector3d(5.0e-6, 1.26e-4, 1.26e-4).asDiagonal();       // at arm COM, arm frame

  double kappa_fwd = 0.0172;  // N m / N, positive thrust
  double kappa_rev = 0.038;   // N m / N, negative thrust
  double thrust_min = -3.4;   // N
  double thrust_max = 7.8;    // N

  double arm_angle = deg2rad(11.9);  // rad
  double prop_spacing = 0.24;        // m, adjacent propellers

  Vector3d body_rel_hinge0{-0.045, 0.071, -0.002};  // central-body COM relative to hinge of arm 0, B
  Vector3d hinge_rel_arm{-0.076, 0.0, -0.014};      // hinge relative to arm COM, arm frame
  double prop_offset_x = 0.014;                     // propeller relative to arm COM along arm x

  Vector3d gravity{0.0, 0.0, -9.81};  // E frame

  double max_prop_speed = 1100.0;  // rad/s, speed at which thrust_max / |thrust_min| are reached
  double prop_radius = 0.095;      // m, effective swept radius used for footprints
  double prop_plane_height = 0.0224;  // m, propeller disc offset from P along arm z (fitted)

  double total_mass() const { return body_mass + kNumArms * arm_mass; }
  double gravity_magnitude() const { return gravity.norm(); }
  double hover_thrust() const { return total_mass() * gravity_magnitude(); }
  /// Hinge-to-propeller distance along the arm x axis.
  double prop_lever() const { return prop_offset_x - hinge_rel_arm.x(); }

  double thrust_coeff_fwd() const { return thrust_max / (max_prop_speed * max_prop_speed); }
  double thrust_coeff_rev() const { return -thrust_min / (max_prop_speed * max_prop_speed); }

  /// Throws ConfigError when an invariant is violated.
  void validate() const;
};

/// Point mass rigidly attached to the central body (grasped box).
struct Payload {
  double mass = 0.0;
  Vector3d offset = Vector3d::Zero();  // relative to central-body COM, B
};

/// Folds a payload into the central body: mass, inertia and hinge offsets are
/// re-expressed about the combined body COM. The offset must lie on the body z axis.
VehicleParams with_payload(const VehicleParams& params, const Payload& payload);

using HingeAngles = std::array<double, kNumArms>;

/// Hinge angles of a steady configuration (0 unfolded, pi/2 folded).
HingeAngles hinge_angles(Configuration config);

/// Precomputed arm geometry of one parameter set.
class ArmKinematics {
 public:
  explicit ArmKinematics(const VehicleParams& params);

  /// (-1)^i with the one-based arm number i = arm + 1.
  static double handedness(int arm) { return arm % 2 == 0 ? -1.0 : 1.0; }

  /// Outward horizontal direction of the unfolded arm, B.
  const Vector3d& outward(int arm) const { return outward_[arm]; }
  /// Hinge axis y_A in B.
  const Vector3d& hinge_axis(int arm) const { return axis_[arm]; }
  /// Hinge point relative to the central-body COM, B.
  const Vector3d& hinge(int arm) const { return hinge_[arm]; }

  /// R_BA: maps arm-frame vectors to B. Columns are the arm axes.
  Matrix3d rotation(int arm, double angle) const;
  Vector3d thrust_axis(int arm, double angle) const;
  Vector3d arm_com(int arm, double angle) const;
  Vector3d prop_point(int arm, double angle) const;
  /// Arm inertia about its COM expressed in B.
  Matrix3d arm_inertia_body(int arm, double angle) const;

  const VehicleParams& params() const { return params_; }

 private:
  VehicleParams params_;
  std::array<Vector3d, kNumArms> outward_;
  std::array<Vector3d, kNumArms> axis_;
  std::array<Vector3d, kNumArms> hinge_;
  std::array<Vector3d, kNumArms> prop_;  // unfolded propeller points
};

/// Unit thrust axis of arm `arm` in B. Throws std::invalid_argument outside [0, pi/2].
Vector3d thrust_axis(const VehicleParams& params, int arm, double angle);

/// Aerodynamic torque about the thrust axis, piecewise linear in thrust.
double prop_torque(const VehicleParams& params, double thrust, int arm);

/// Signed rotor speed for a thrust on the matching spin branch. Throws outside
/// [thrust_min, thrust_max].
double thrust_to_speed(const VehicleParams& params, double thrust);
double speed_to_thrust(const VehicleParams& params, double speed);

/// Mass-weighted COM of body and arms (and payload), relative to the central-body COM.
Vector3d center_of_mass(const VehicleParams& params, const HingeAngles& angles,
                        const std::optional<Payload>& payload = std::nullopt);
Vector3d center_of_mass(Configuration config, const VehicleParams& params,
                        const std::optional<Payload>& payload = std::nullopt);

/// COM displacement relative to the datum: the unfolded vehicle COM without payload.
Vector3d com_shift(Configuration config, const VehicleParams& params,
                   const std::optional<Payload>& payload = std::nullopt);

/// Inertia of the locked vehicle about its own COM, B frame.
Matrix3d combined_inertia(const VehicleParams& params, const HingeAngles& angles);
Matrix3d combined_inertia(Configuration config, const VehicleParams& params);

/// Largest projection of the vehicle footprint (hinge points and propeller discs)
/// onto the B-frame direction `dir`.
double support(const VehicleParams& params, const HingeAngles& angles, const Vector3d& dir);

/// Extent of the vehicle along a B-frame direction.
inline double width_along(const VehicleParams& params, const HingeAngles& angles,
                          const Vector3d& dir) {
  return support(params, angles, dir) + support(params, angles, -dir);
}

struct MinWidth {
  double width;
  Vector3d direction;  // horizontal unit vector in B achieving it
};

MinWidth min_horizontal_width(const VehicleParams& params, const HingeAngles& angles);

/// Narrowest horizontal footprint width for a steady configuration.
double min_horizontal_dimension(Configuration config, const VehicleParams& params);

}  // namespace hq
