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

#include "hingequad/mixer.hpp"

#include <limits>
#include <ostream>
#include <sstream>

#include <Eigen/Cholesky>
#include <Eigen/LU>
#include <Eigen/SVD>

namespace hq {

namespace {

constexpr double kMaxCondition = 1e12;
constexpr double kRankTolerance = 1e-9;

}  // namespace

MappingMatrix build_mapping(Configuration config, const VehicleParams& params, const Vector3d& com) {
  if (is_transitional(config)) {
    throw std::invalid_argument("cannot build a mapping for a transitional configuration");
  }
  const ArmKinematics kin(params);
  MappingMatrix out;
  out.config = config;
  out.com_used = com;
  for (int i = 0; i < kNumArms; ++i) {
    const bool folded = arm_folded(config, i);
    const double angle = folded ? kHalfPi : 0.0;
    const Vector3d axis = kin.thrust_axis(i, angle);
    const Vector3d lever = kin.prop_point(i, angle) - com;
    const double gamma =
        ArmKinematics::handedness(i) * (folded ? params.kappa_rev : params.kappa_fwd);
    out.M(0, i) = axis.z();
    out.M.block<3, 1>(1, i) = lever.cross(axis) + gamma * axis;
  }
  // Folded thrust axes are exactly horizontal; drop the cos(pi/2) residue.
  for (int i = 0; i < kNumArms; ++i) {
    if (std::abs(out.M(0, i)) < 1e-15) out.M(0, i) = 0.0;
  }
  return out;
}

MappingMatrix build_mapping(Configuration config, const VehicleParams& params) {
  return build_mapping(config, params, center_of_mass(config, params));
}

ThrustVector invert_mapping(const MappingMatrix& mapping, const Wrench& w) {
  Eigen::JacobiSVD<Matrix4d> svd(mapping.M);
  const auto& sv = svd.singularValues();
  const double cond = sv(3) > 0.0 ? sv(0) / sv(3) : std::numeric_limits<double>::infinity();
  if (!(cond <= kMaxCondition)) {
    std::ostringstream msg;
    msg << "mapping for " << to_string(mapping.config) << " is singular (cond " << cond << ")";
    throw AllocationError(msg.str());
  }
  return mapping.M.partialPivLu().solve(w.vector());
}

namespace {

void require_full_rank(const Matrix34d& m_tau) {
  Eigen::JacobiSVD<Matrix34d> svd(m_tau, Eigen::ComputeFullU);
  const auto& sv = svd.singularValues();
  if (!(sv(2) > kRankTolerance * sv(0))) {
    const Vector3d dir = svd.matrixU().col(2);
    std::ostringstream msg;
    msg << "torque map is rank deficient; cannot produce torque along (" << dir.transpose()
        << ")";
    throw AllocationError(msg.str(), dir);
  }
}

}  // namespace

Matrix43d torque_pseudoinverse(const Matrix34d& m_tau) {
  require_full_rank(m_tau);
  const Matrix3d gram = m_tau * m_tau.transpose();
  return m_tau.transpose() * gram.ldlt().solve(Matrix3d::Identity());
}

ThrustVector allocate_min_norm(const Matrix34d& m_tau, const Vector3d& tau) {
  require_full_rank(m_tau);
  const Matrix3d gram = m_tau * m_tau.transpose();
  return m_tau.transpose() * gram.ldlt().solve(tau);
}

Vector4d torque_null_vector(const Matrix34d& m_tau) {
  require_full_rank(m_tau);
  Eigen::JacobiSVD<Eigen::Matrix4d> svd(
      (Matrix4d() << m_tau, Eigen::RowVector4d::Zero()).finished(), Eigen::ComputeFullV);
  return svd.matrixV().col(3);
}

void write_csv(std::ostream& os, const MappingMatrix& mapping) {
  static constexpr const char* kRows[] = {"f_sigma", "tau_x", "tau_y", "tau_z"};
  os << "row,arm1,arm2,arm3,arm4\n";
  for (int r = 0; r < 4; ++r) {
    os << kRows[r];
    for (int c = 0; c < 4; ++c) os << ',' << mapping.M(r, c);
    os << '\n';
  }
}

}  // namespace hq
