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

#include <string>
#include <vector>

#include <Eigen/Core>

#include "hingequad/mixer.hpp"
#include "hingequad/types.hpp"
#include "hingequad/vehicle.hpp"

namespace hq {

/// Stay-in-configuration bounds: W (f_sigma, tau) >= 0 element-wise. Row i holds
/// (c_f, c_x, c_y, c_z) of arm i; the first column is in metres, the rest are
/// dimensionless. A row margin is -y.tau_r for an unfolded arm and +y.tau_r for a
/// folded one, so a non-negative margin keeps the arm against its stop.
struct BoundMatrix {
  Matrix4d W = Matrix4d::Zero();
  Configuration config = Configuration::Unfolded;
};

/// Hinge-axis reaction torque y_Ai . tau_ri of every arm for the locked vehicle
/// at zero angular velocity, with thrusts allocated from `w` through the
/// configuration's mapping (minimum norm for FourFolded, which ignores f_sigma).
/// Gravity cancels out: only the proper acceleration enters. Exactly linear in w.
Vector4d hinge_reaction_torque(Configuration config, const VehicleParams& params, const Wrench& w);

/// +1 for arms that must stay folded, -1 for arms that must stay unfolded.
Vector4d margin_signs(Configuration config);

/// Extracts W by probing hinge_reaction_torque at zero and at the four unit wrenches.
BoundMatrix bound_matrix(Configuration config, const VehicleParams& params);

/// Closed-form unfolded bounds for a locked, non-rotating vehicle. Shares the
/// rigid-body model with the probed version but none of its code path.
BoundMatrix unfolded_bounds_closed_form(const VehicleParams& params);

struct BoundCheck {
  Vector4d margins = Vector4d::Zero();
  bool pass = true;
};

BoundCheck check_bounds(const BoundMatrix& bounds, const Wrench& w, double slack = 1e-12);

/// c_f f_sigma - |c_x tau_x| - |c_y tau_y| - |c_z tau_z| using the magnitudes of
/// the first row. Never larger than the smallest row margin.
double aggregate_bound_unfolded(const Wrench& w, const BoundMatrix& bounds);

/// Linear constraints G w + h >= 0 on wrenches.
struct WrenchConstraints {
  Eigen::Matrix<double, Eigen::Dynamic, 4> G;
  Eigen::VectorXd h;
  std::vector<std::string> labels;

  Eigen::VectorXd slack(const Wrench& w) const { return G * w.vector() + h; }
  bool feasible(const Wrench& w, double tol = 1e-9) const;
  /// Feasible parameter range of w0 + t d (empty when lo > hi).
  std::pair<double, double> interval(const Vector4d& w0, const Vector4d& d) const;
  void append(const Eigen::RowVector4d& g, double h0, std::string label);
};

/// Per-propeller limits lo <= M^-1 w <= hi as wrench constraints.
WrenchConstraints propeller_constraints(const MappingMatrix& mapping, const Vector4d& lo,
                                        const Vector4d& hi);
/// Appends the rows of W.
void append_bounds(WrenchConstraints& set, const BoundMatrix& bounds);

struct HierarchyResult {
  Wrench wrench;
  bool yaw_reduced = false;
  bool thrust_adjusted = false;
  bool roll_pitch_scaled = false;
};

/// Brings w into the set satisfying both W w >= 0 and lo <= M^-1 w <= hi.
/// Stage order: shrink |tau_z| toward zero, move f_sigma to the nearest thrust in
/// [0, maximum total thrust] that realises the torque, and only if none exists
/// shrink (tau_x, tau_y) by the largest feasible common factor, taking the thrust
/// nearest the command at that factor. Stages are exact (line search or a 2-D
/// LP) on the linear constraints. A feasible w is returned unchanged. Throws
/// InfeasibleError naming the binding constraint when no thrust makes
/// tau_x = tau_y = 0 feasible.
HierarchyResult enforce_hierarchy(const Wrench& w, const BoundMatrix& bounds,
                                  const MappingMatrix& mapping, const Vector4d& lo,
                                  const Vector4d& hi);
HierarchyResult enforce_hierarchy(const Wrench& w, const BoundMatrix& bounds,
                                  const MappingMatrix& mapping, double f_min, double f_max);

struct Polygon {
  std::string label;
  std::vector<Eigen::Vector2d> vertices;  // (f_sigma, tau_z), counterclockwise

  bool contains(const Eigen::Vector2d& p, double tol = 1e-9) const;
};

/// Feasible (f_sigma, tau_z) sets at fixed (tau_x, tau_y):
/// A propeller limits only, B conventional quadcopter (thrust_min = 0),
/// C propeller limits plus the folding bounds.
struct Envelope {
  Configuration config = Configuration::Unfolded;
  Vector3d tau_fixed = Vector3d::Zero();
  Polygon a, b, c;
  WrenchConstraints set_a, set_b, set_c;
};

Envelope feasible_envelope(Configuration config, const VehicleParams& params,
                           const Eigen::Vector2d& tau_xy = Eigen::Vector2d::Zero());

/// Vertices of {x : G x + h >= 0} in the plane, counterclockwise.
std::vector<Eigen::Vector2d> polygon_vertices(const Eigen::Matrix<double, Eigen::Dynamic, 2>& G,
                                              const Eigen::VectorXd& h);

struct AgilityReport {
  double hover_thrust = 0.0;
  double yaw_max_conventional = 0.0;
  double yaw_max_folding = 0.0;
  double yaw_reduction_pct = 0.0;
  double roll_max_conventional = 0.0;
  double roll_max_folding = 0.0;
  double pitch_max_conventional = 0.0;
  double pitch_max_folding = 0.0;
  double f_sigma_min_conventional = 0.0;
  double f_sigma_max_conventional = 0.0;
  double f_sigma_min_folding = 0.0;
  double f_sigma_max_folding = 0.0;
};

/// Unfolded hover-point maxima under the conventional set B and the folding set C.
AgilityReport agility_report(const VehicleParams& params);

}  // namespace hq
