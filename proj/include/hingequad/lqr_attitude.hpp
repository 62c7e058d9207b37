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

#include <complex>

#include <Eigen/Core>

#include "hingequad/mixer.hpp"
#include "hingequad/types.hpp"
#include "hingequad/vehicle.hpp"

namespace hq {

/// Diagonal state weights on (r, r_dot) and per-direction propeller weights.
/// Roll and pitch entries must match.
struct LqrWeights {
  Vector6d q = (Vector6d() << 40.0, 40.0, 20.0, 6.0, 6.0, 3.0).finished();
  double r_plus = 1.0;   // forward-spinning propeller
  double r_minus = 4.0;  // reverse-spinning propeller

  void validate() const;
};

/// Linearized attitude dynamics x = (r, r_dot): A = [0 I; 0 0], B = [0; J^-1].
struct LqrProblem {
  Matrix6d A = Matrix6d::Zero();
  Eigen::Matrix<double, 6, 3> B = Eigen::Matrix<double, 6, 3>::Zero();
  Matrix6d Q = Matrix6d::Zero();
  Matrix3d R = Matrix3d::Identity();
};

LqrProblem attitude_problem(const Matrix3d& inertia, const Vector6d& q_diag, const Matrix3d& r_tau);

/// R_tau = (M_tau^+)^T R_f M_tau^+ with R_f = diag(r+ or r- per arm, by the spin
/// direction the configuration assigns). Throws AllocationError for rank < 3.
Matrix3d build_input_cost(const Matrix34d& m_tau, double r_plus, double r_minus, Configuration config);

struct GainMatrix {
  Matrix36d K = Matrix36d::Zero();  // tau = -K x
  Matrix6d P = Matrix6d::Zero();
  Matrix3d R_tau = Matrix3d::Identity();
  Matrix3d inertia = Matrix3d::Identity();
  Eigen::Matrix<std::complex<double>, 6, 1> poles;
  double residual = 0.0;
  Configuration config = Configuration::Unfolded;
};

/// Infinite-horizon LQR gain for one steady configuration.
GainMatrix synthesize_gains(Configuration config, const VehicleParams& params, const LqrWeights& weights);

/// Rotation vector of R_cur^T R_des, where R_des has thrust axis z_des and heading
/// yaw_des. Zero when aligned. Throws std::invalid_argument unless |z_des| = 1.
Vector3d attitude_error(const Matrix3d& R_cur, double yaw_des, const Vector3d& z_des);
/// Same with an explicit desired attitude.
Vector3d attitude_error(const Matrix3d& R_cur, const Matrix3d& R_des);

/// Body torque tau = K (r, -omega) for attitude error r and body rate omega.
Vector3d attitude_torque(const GainMatrix& gains, const Vector3d& r, const Vector3d& omega);

}  // namespace hq
