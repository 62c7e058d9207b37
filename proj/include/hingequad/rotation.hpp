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

#include <cmath>

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace hq {

template <typename Scalar>
Eigen::Matrix<Scalar, 3, 3> skew(const Eigen::Matrix<Scalar, 3, 1>& v) {
  Eigen::Matrix<Scalar, 3, 3> m;
  m << Scalar(0), -v.z(), v.y(),
       v.z(), Scalar(0), -v.x(),
       -v.y(), v.x(), Scalar(0);
  return m;
}

/// Rotation matrix of the rotation vector r (Rodrigues).
template <typename Scalar>
Eigen::Matrix<Scalar, 3, 3> so3_exp(const Eigen::Matrix<Scalar, 3, 1>& r) {
  using std::cos;
  using std::sin;
  using std::sqrt;
  const Scalar theta2 = r.squaredNorm();
  const Eigen::Matrix<Scalar, 3, 3> K = skew(r);
  Scalar a, b;
  if (theta2 < Scalar(1e-12)) {
    a = Scalar(1) - theta2 / Scalar(6);
    b = Scalar(0.5) - theta2 / Scalar(24);
  } else {
    const Scalar theta = sqrt(theta2);
    a = sin(theta) / theta;
    b = (Scalar(1) - cos(theta)) / theta2;
  }
  return Eigen::Matrix<Scalar, 3, 3>::Identity() + a * K + b * K * K;
}

/// Principal rotation vector of R, |r| <= pi.
///
/// At exactly pi the axis sign is ambiguous; the axis whose first non-zero
/// component is positive is returned.
template <typename Scalar>
Eigen::Matrix<Scalar, 3, 1> so3_log(const Eigen::Matrix<Scalar, 3, 3>& R) {
  using std::acos;
  using std::atan2;
  using std::sqrt;
  using Vec = Eigen::Matrix<Scalar, 3, 1>;
  const Vec w(R(2, 1) - R(1, 2), R(0, 2) - R(2, 0), R(1, 0) - R(0, 1));
  const Scalar s = Scalar(0.5) * w.norm();                // sin(theta)
  const Scalar c = Scalar(0.5) * (R.trace() - Scalar(1));  // cos(theta)
  const Scalar theta = atan2(s, c);
  if (s < Scalar(1e-7)) {
    if (c > Scalar(0)) {
      // Near identity: first-order inverse of Rodrigues.
      return Scalar(0.5) * (Scalar(1) + theta * theta / Scalar(6)) * w;
    }
    // Near pi: axis from the symmetric part, R + I = 2 n n^T (plus O(s) terms).
    const Eigen::Matrix<Scalar, 3, 3> B = Scalar(0.5) * (R + R.transpose()) +
                                          Eigen::Matrix<Scalar, 3, 3>::Identity();
    Eigen::Index k = 0;
    B.diagonal().maxCoeff(&k);
    Vec n = B.col(k) / sqrt(B(k, k) * Scalar(2));
    n.normalize();
    // Match the sign of the (tiny) antisymmetric part when it is informative.
    if (w.dot(n) < Scalar(0)) n = -n;
    if (s < Scalar(1e-12)) {
      for (int i = 0; i < 3; ++i) {
        if (std::abs(n(i)) > Scalar(1e-12)) {
          if (n(i) < Scalar(0)) n = -n;
          break;
        }
      }
    }
    return theta * n;
  }
  return theta / (Scalar(2) * s) * w;
}

/// Rotation whose z column is `z` (unit) and whose heading is `yaw`: the x axis is
/// the projection of (cos yaw, sin yaw, 0) onto the plane normal to z.
template <typename Scalar>
Eigen::Matrix<Scalar, 3, 3> attitude_from_thrust_yaw(const Eigen::Matrix<Scalar, 3, 1>& z,
                                                     Scalar yaw) {
  using std::cos;
  using std::sin;
  using Vec = Eigen::Matrix<Scalar, 3, 1>;
  const Vec heading(cos(yaw), sin(yaw), Scalar(0));
  Vec y = z.cross(heading);
  if (y.norm() < Scalar(1e-9)) {
    // Thrust horizontal along the heading; fall back to the lateral axis.
    y = z.cross(Vec(-sin(yaw), cos(yaw), Scalar(0))).cross(z);
  }
  y.normalize();
  const Vec x = y.cross(z);
  Eigen::Matrix<Scalar, 3, 3> R;
  R.col(0) = x;
  R.col(1) = y;
  R.col(2) = z;
  return R;
}

/// Yaw of a rotation, measured from the projection of its x axis.
template <typename Scalar>
Scalar yaw_of(const Eigen::Matrix<Scalar, 3, 3>& R) {
  using std::atan2;
  return atan2(R(1, 0), R(0, 0));
}

}  // namespace hq
