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

#include "hingequad/vehicle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <Eigen/Cholesky>

namespace hq {

namespace {

// Azimuth of each arm's quadrant diagonal and the side the arm angle rotates it to.
constexpr std::array<double, kNumArms> kDiagonalAzimuthDeg = {-45.0, -135.0, 135.0, 45.0};
constexpr std::array<double, kNumArms> kArmAngleSide = {1.0, -1.0, 1.0, -1.0};

// Table I lists r_BH1 to the millimetre; the derived hinge must agree to this.
constexpr double kHingeTableTolerance = 2e-3;

Matrix3d parallel_axis(const Vector3d& r) {
  return r.squaredNorm() * Matrix3d::Identity() - r * r.transpose();
}

void require(bool ok, const std::string& what) {
  if (!ok) throw ConfigError("invalid vehicle parameters: " + what);
}

bool symmetric_positive_definite(const Matrix3d& m) {
  if (!m.isApprox(m.transpose(), 1e-12)) return false;
  Eigen::LLT<Matrix3d> llt(m);
  return llt.info() == Eigen::Success;
}

}  // namespace

std::string_view to_string(Configuration c) {
  switch (c) {
    case Configuration::Unfolded: return "unfolded";
    case Configuration::TwoFolded24: return "two_folded_24";
    case Configuration::TwoFolded13: return "two_folded_13";
    case Configuration::FourFolded: return "four_folded";
    case Configuration::Folding24: return "folding_24";
    case Configuration::Unfolding24: return "unfolding_24";
    case Configuration::FoldingAll: return "folding_all";
    case Configuration::UnfoldingAll: return "unfolding_all";
  }
  return "unknown";
}

Configuration configuration_from_string(std::string_view name) {
  for (auto c : {Configuration::Unfolded, Configuration::TwoFolded24, Configuration::TwoFolded13,
                 Configuration::FourFolded, Configuration::Folding24, Configuration::Unfolding24,
                 Configuration::FoldingAll, Configuration::UnfoldingAll}) {
    if (to_string(c) == name) return c;
  }
  throw ConfigError("unknown configuration '" + std::string(name) + "'");
}

void VehicleParams::validate() const {
  require(body_mass > 0.0, "body_mass must be positive");
  require(arm_mass > 0.0, "arm_mass must be positive");
  require(thrust_min < 0.0 && thrust_max > 0.0, "need thrust_min < 0 < thrust_max");
  require(kappa_fwd > 0.0 && kappa_rev > 0.0, "kappa must be positive");
  require(arm_angle >= 0.0 && arm_angle < kPi / 4.0, "arm_angle must lie in [0, 45) deg");
  require(prop_spacing > 0.0, "prop_spacing must be positive");
  require(prop_lever() > 0.0, "propeller must lie outboard of the hinge");
  require(max_prop_speed > 0.0, "max_prop_speed must be positive");
  require(prop_radius >= 0.0, "prop_radius must be non-negative");
  require(symmetric_positive_definite(body_inertia), "body_inertia must be SPD");
  require(symmetric_positive_definite(arm_inertia), "arm_inertia must be SPD");
  require(gravity.allFinite(), "gravity must be finite");

  const ArmKinematics kin(*this);
  const Vector3d table_hinge = -body_rel_hinge0;
  require((kin.hinge(0) - table_hinge).head<2>().norm() <= kHingeTableTolerance,
          "hinge position implied by prop_spacing/arm_angle/lever disagrees with body_rel_hinge");
}

VehicleParams with_payload(const VehicleParams& params, const Payload& payload) {
  if (payload.mass < 0.0) throw ConfigError("payload mass must be non-negative");
  if (payload.offset.head<2>().norm() > 1e-12) {
    throw ConfigError("payload offset must lie on the body z axis");
  }
  if (payload.mass == 0.0) return params;

  VehicleParams out = params;
  const double mass = params.body_mass + payload.mass;
  const Vector3d shift = payload.mass * payload.offset / mass;
  out.body_mass = mass;
  out.body_inertia = params.body_inertia + params.body_mass * parallel_axis(-shift) +
                     payload.mass * parallel_axis(payload.offset - shift);
  out.body_rel_hinge0 = params.body_rel_hinge0 + shift;
  return out;
}

HingeAngles hinge_angles(Configuration config) {
  if (is_transitional(config)) {
    throw std::invalid_argument("transitional configuration has no steady hinge angles");
  }
  HingeAngles angles{};
  for (int i = 0; i < kNumArms; ++i) angles[i] = arm_folded(config, i) ? kHalfPi : 0.0;
  return angles;
}

ArmKinematics::ArmKinematics(const VehicleParams& params) : params_(params) {
  const double half_diag = params.prop_spacing / std::sqrt(2.0);
  for (int i = 0; i < 2; ++i) {
    const double diag = deg2rad(kDiagonalAzimuthDeg[i]);
    const double psi = diag + kArmAngleSide[i] * params.arm_angle;
    outward_[i] = Vector3d(std::cos(psi), std::sin(psi), 0.0);
    axis_[i] = Vector3d::UnitZ().cross(outward_[i]);
    const Vector3d prop_xy(half_diag * std::cos(diag), half_diag * std::sin(diag), 0.0);
    hinge_[i] = prop_xy - params.prop_lever() * outward_[i];
    hinge_[i].z() = -params.body_rel_hinge0.z();
    prop_[i] = prop_xy;
  }
  // Opposite arms are exact mirror images through the z axis, so symmetric
  // sums cancel without rounding residue.
  const Vector3d flip(-1.0, -1.0, 1.0);
  for (int i = 2; i < kNumArms; ++i) {
    outward_[i] = outward_[i - 2].cwiseProduct(flip);
    axis_[i] = axis_[i - 2].cwiseProduct(flip);
    hinge_[i] = hinge_[i - 2].cwiseProduct(flip);
    prop_[i] = prop_[i - 2].cwiseProduct(flip);
  }
  for (int i = 0; i < kNumArms; ++i) {
    prop_[i] -= params.hinge_rel_arm.y() * axis_[i];
    prop_[i].z() = hinge_[i].z() - params.hinge_rel_arm.z();
  }
}

Matrix3d ArmKinematics::rotation(int arm, double angle) const {
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  Matrix3d r;
  r.col(0) = c * outward_[arm] - s * Vector3d::UnitZ();
  r.col(1) = axis_[arm];
  r.col(2) = s * outward_[arm] + c * Vector3d::UnitZ();
  return r;
}

Vector3d ArmKinematics::thrust_axis(int arm, double angle) const {
  return std::sin(angle) * outward_[arm] + std::cos(angle) * Vector3d::UnitZ();
}

Vector3d ArmKinematics::arm_com(int arm, double angle) const {
  return hinge_[arm] - rotation(arm, angle) * params_.hinge_rel_arm;
}

Vector3d ArmKinematics::prop_point(int arm, double angle) const {
  // Propeller relative to the hinge, in arm coordinates; written as an offset
  // from the unfolded position so angle 0 reproduces the layout exactly.
  const double dx = params_.prop_lever();
  const double dz = -params_.hinge_rel_arm.z();
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  const Vector3d& out = outward_[arm];
  return prop_[arm] + ((c - 1.0) * dx + s * dz) * out + (-s * dx + (c - 1.0) * dz) * Vector3d::UnitZ();
}

Matrix3d ArmKinematics::arm_inertia_body(int arm, double angle) const {
  const Matrix3d r = rotation(arm, angle);
  return r * params_.arm_inertia * r.transpose();
}

Vector3d thrust_axis(const VehicleParams& params, int arm, double angle) {
  if (!(angle >= 0.0 && angle <= kHalfPi)) {
    throw std::invalid_argument("hinge angle outside [0, pi/2]");
  }
  if (arm < 0 || arm >= kNumArms) throw std::invalid_argument("arm index out of range");
  return ArmKinematics(params).thrust_axis(arm, angle);
}

double prop_torque(const VehicleParams& params, double thrust, int arm) {
  const double kappa = thrust >= 0.0 ? params.kappa_fwd : params.kappa_rev;
  return ArmKinematics::handedness(arm) * kappa * thrust;
}

double thrust_to_speed(const VehicleParams& params, double thrust) {
  constexpr double kSlack = 1e-9;
  if (thrust < params.thrust_min - kSlack || thrust > params.thrust_max + kSlack) {
    throw std::out_of_range("thrust " + std::to_string(thrust) + " N outside propeller range");
  }
  if (thrust >= 0.0) return std::sqrt(thrust / params.thrust_coeff_fwd());
  return -std::sqrt(-thrust / params.thrust_coeff_rev());
}

double speed_to_thrust(const VehicleParams& params, double speed) {
  if (speed >= 0.0) return params.thrust_coeff_fwd() * speed * speed;
  return -params.thrust_coeff_rev() * speed * speed;
}

Vector3d center_of_mass(const VehicleParams& params, const HingeAngles& angles,
                        const std::optional<Payload>& payload) {
  const ArmKinematics kin(params);
  // Opposite arms first: their horizontal offsets cancel exactly when the
  // two share a hinge angle.
  Vector3d moment = Vector3d::Zero();
  for (int i = 0; i < 2; ++i) {
    moment += params.arm_mass * (kin.arm_com(i, angles[i]) + kin.arm_com(i + 2, angles[i + 2]));
  }
  double mass = params.body_mass + kNumArms * params.arm_mass;
  if (payload) {
    moment += payload->mass * payload->offset;
    mass += payload->mass;
  }
  return moment / mass;
}

Vector3d center_of_mass(Configuration config, const VehicleParams& params,
                        const std::optional<Payload>& payload) {
  return center_of_mass(params, hinge_angles(config), payload);
}

Vector3d com_shift(Configuration config, const VehicleParams& params,
                   const std::optional<Payload>& payload) {
  return center_of_mass(config, params, payload) -
         center_of_mass(Configuration::Unfolded, params, std::nullopt);
}

Matrix3d combined_inertia(const VehicleParams& params, const HingeAngles& angles) {
  const ArmKinematics kin(params);
  const Vector3d com = center_of_mass(params, angles);
  Matrix3d inertia = params.body_inertia + params.body_mass * parallel_axis(-com);
  for (int i = 0; i < kNumArms; ++i) {
    inertia += kin.arm_inertia_body(i, angles[i]) +
               params.arm_mass * parallel_axis(kin.arm_com(i, angles[i]) - com);
  }
  return inertia;
}

Matrix3d combined_inertia(Configuration config, const VehicleParams& params) {
  if (is_transitional(config)) {
    throw std::invalid_argument("combined_inertia needs a steady configuration");
  }
  return combined_inertia(params, hinge_angles(config));
}

double support(const VehicleParams& params, const HingeAngles& angles, const Vector3d& dir) {
  const ArmKinematics kin(params);
  double best = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < kNumArms; ++i) {
    best = std::max(best, kin.hinge(i).dot(dir));
    const Vector3d axis = kin.thrust_axis(i, angles[i]);
    const Vector3d disc = kin.prop_point(i, angles[i]) + params.prop_plane_height * axis;
    const Vector3d in_plane = dir - dir.dot(axis) * axis;
    best = std::max(best, disc.dot(dir) + params.prop_radius * in_plane.norm());
  }
  return best;
}

MinWidth min_horizontal_width(const VehicleParams& params, const HingeAngles& angles) {
  auto width_at = [&](double heading) {
    const Vector3d dir(std::cos(heading), std::sin(heading), 0.0);
    return width_along(params, angles, dir);
  };
  // Coarse scan over half a turn, then golden-section refinement of the best bracket.
  constexpr int kSamples = 720;
  const double step = kPi / kSamples;
  double best_heading = 0.0;
  double best_width = width_at(0.0);
  for (int k = 1; k < kSamples; ++k) {
    const double w = width_at(k * step);
    if (w < best_width) {
      best_width = w;
      best_heading = k * step;
    }
  }
  double lo = best_heading - step;
  double hi = best_heading + step;
  const double golden = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = hi - golden * (hi - lo);
  double b = lo + golden * (hi - lo);
  double wa = width_at(a);
  double wb = width_at(b);
  while (hi - lo > 1e-10) {
    if (wa < wb) {
      hi = b;
      b = a;
      wb = wa;
      a = hi - golden * (hi - lo);
      wa = width_at(a);
    } else {
      lo = a;
      a = b;
      wa = wb;
      b = lo + golden * (hi - lo);
      wb = width_at(b);
    }
  }
  const double heading = 0.5 * (lo + hi);
  const double refined = width_at(heading);
  if (refined < best_width) {
    best_width = refined;
    best_heading = heading;
  }
  return {best_width, Vector3d(std::cos(best_heading), std::sin(best_heading), 0.0)};
}

double min_horizontal_dimension(Configuration config, const VehicleParams& params) {
  return min_horizontal_width(params, hinge_angles(config)).width;
}

}  // namespace hq
