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

#include "hingequad/lqr_attitude.hpp"

#include <cmath>
#include <stdexcept>

#include <Eigen/Eigenvalues>

#include "hingequad/care.hpp"
#include "hingequad/rotation.hpp"

namespace hq {

namespace {

// Decoupled double-integrator poles for the starting gain.
constexpr double kSeedKp = 1.0;
constexpr double kSeedKd = 2.0;

}  // namespace

void LqrWeights::validate() const {
  if (!(q.array() >= 0.0).all()) throw ConfigError("LQR state weights must be non-negative");
  if (q(0) != q(1) || q(3) != q(4)) {
    throw ConfigError("LQR roll and pitch weights must be equal");
  }
  if (!(r_plus > 0.0) || !(r_minus > 0.0)) throw ConfigError("LQR input weights must be positive");
}

LqrProblem attitude_problem(const Matrix3d& inertia, const Vector6d& q_diag, const Matrix3d& r_tau) {
  LqrProblem p;
  p.A.topRightCorner<3, 3>().setIdentity();
  p.B.bottomRows<3>() = inertia.inverse();
  p.Q = q_diag.asDiagonal();
  p.R = r_tau;
  return p;
}

Matrix3d build_input_cost(const Matrix34d& m_tau, double r_plus, double r_minus, Configuration config) {
  if (!(r_plus > 0.0) || !(r_minus > 0.0)) {
    throw std::invalid_argument("build_input_cost: weights must be positive");
  }
  const Matrix43d pinv = torque_pseudoinverse(m_tau);
  Vector4d r_f;
  for (int i = 0; i < kNumArms; ++i) r_f(i) = arm_folded(config, i) ? r_minus : r_plus;
  const Matrix3d cost = pinv.transpose() * r_f.asDiagonal() * pinv;
  return 0.5 * (cost + cost.transpose());
}

GainMatrix synthesize_gains(Configuration config, const VehicleParams& params, const LqrWeights& weights) {
  weights.validate();
  GainMatrix g;
  g.config = config;
  g.inertia = combined_inertia(config, params);
  const MappingMatrix mapping = build_mapping(config, params);
  g.R_tau = build_input_cost(mapping.torque_rows(), weights.r_plus, weights.r_minus, config);
  const LqrProblem problem = attitude_problem(g.inertia, weights.q, g.R_tau);

  Matrix36d seed;
  seed << kSeedKp * g.inertia, kSeedKd * g.inertia;
  const auto sol = solve_care<double, 6, 3>(problem.A, problem.B, problem.Q, problem.R, seed);
  g.K = sol.K;
  g.P = sol.P;
  g.residual = sol.residual;
  g.poles = Eigen::EigenSolver<Matrix6d>(problem.A - problem.B * g.K, false).eigenvalues();
  return g;
}

Vector3d attitude_error(const Matrix3d& R_cur, const Matrix3d& R_des) {
  return so3_log<double>(R_cur.transpose() * R_des);
}

Vector3d attitude_error(const Matrix3d& R_cur, double yaw_des, const Vector3d& z_des) {
  if (std::abs(z_des.norm() - 1.0) > 1e-9) {
    throw std::invalid_argument("attitude_error: z_des must be a unit vector");
  }
  return attitude_error(R_cur, attitude_from_thrust_yaw<double>(z_des, yaw_des));
}

Vector3d attitude_torque(const GainMatrix& gains, const Vector3d& r, const Vector3d& omega) {
  Vector6d x;
  x << r, -omega;
  return gains.K * x;
}

}  // namespace hq
