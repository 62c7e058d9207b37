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

#include <iosfwd>

#include "hingequad/types.hpp"
#include "hingequad/vehicle.hpp"

namespace hq {

/// Per-propeller thrusts (N), arm order.
using ThrustVector = Vector4d;

/// Linear map from propeller thrusts to (f_sigma, tau) for one configuration.
struct MappingMatrix {
  Matrix4d M = Matrix4d::Zero();
  Configuration config = Configuration::Unfolded;
  Vector3d com_used = Vector3d::Zero();  // relative to central-body COM, B

  Eigen::RowVector4d thrust_row() const { return M.row(0); }
  Matrix34d torque_rows() const { return M.bottomRows<3>(); }
};

/// Builds M column by column from the arm geometry: column i is
/// [z_Ai . z_B ; r_PiC x z_Ai + gamma_i z_Ai], with gamma_i taken from the spin
/// direction the configuration assigns to arm i (forward unless folded).
MappingMatrix build_mapping(Configuration config, const VehicleParams& params, const Vector3d& com);

/// Same, with the COM of the configuration itself.
MappingMatrix build_mapping(Configuration config, const VehicleParams& params);

/// Solves M u = w. Throws AllocationError when cond(M) exceeds 1e12.
ThrustVector invert_mapping(const MappingMatrix& mapping, const Wrench& w);

/// Minimum-norm u with M_tau u = tau. Rank is decided by a singular-value
/// threshold of 1e-9 sigma_max; rank deficiency throws AllocationError carrying
/// the torque direction that cannot be produced.
ThrustVector allocate_min_norm(const Matrix34d& m_tau, const Vector3d& tau);

/// Moore-Penrose pseudoinverse of a rank-3 torque map (4x3).
Matrix43d torque_pseudoinverse(const Matrix34d& m_tau);

/// Unit null vector of a rank-3 torque map.
Vector4d torque_null_vector(const Matrix34d& m_tau);

/// Writes M as four CSV rows (f_sigma, tau_x, tau_y, tau_z).
void write_csv(std::ostream& os, const MappingMatrix& mapping);

}  // namespace hq
