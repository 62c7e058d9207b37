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
#include <cmath>
#include <stdexcept>
#include <string>
#include <string_view>

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace hq {

template <typename Scalar>
using Vector3 = Eigen::Matrix<Scalar, 3, 1>;
template <typename Scalar>
using Matrix3 = Eigen::Matrix<Scalar, 3, 3>;

using Vector3d = Eigen::Vector3d;
using Vector4d = Eigen::Vector4d;
using Vector6d = Eigen::Matrix<double, 6, 1>;
using Matrix3d = Eigen::Matrix3d;
using Matrix4d = Eigen::Matrix4d;
using Matrix6d = Eigen::Matrix<double, 6, 6>;
using Matrix34d = Eigen::Matrix<double, 3, 4>;
using Matrix43d = Eigen::Matrix<double, 4, 3>;
using Matrix36d = Eigen::Matrix<double, 3, 6>;

inline constexpr int kNumArms = 4;
inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kHalfPi = kPi / 2.0;

constexpr double deg2rad(double deg) { return deg * kPi / 180.0; }
constexpr double rad2deg(double rad) { return rad * 180.0 / kPi; }

/// Which arms are folded. Transitional tags exist only for the controller state
/// machine and are rejected by every routine that builds a mixer or bound.
enum class Configuration {
  Unfolded,
  TwoFolded24,
  TwoFolded13,
  FourFolded,
  Folding24,
  Unfolding24,
  FoldingAll,
  UnfoldingAll,
};

inline constexpr std::array<Configuration, 4> kSteadyConfigurations = {
    Configuration::Unfolded, Configuration::TwoFolded24, Configuration::TwoFolded13,
    Configuration::FourFolded};

constexpr bool is_transitional(Configuration c) {
  return c == Configuration::Folding24 || c == Configuration::Unfolding24 ||
         c == Configuration::FoldingAll || c == Configuration::UnfoldingAll;
}

/// Arm indices are zero based throughout: arm 0 is the paper's arm 1.
constexpr bool arm_folded(Configuration c, int arm) {
  switch (c) {
    case Configuration::Unfolded:
      return false;
    case Configuration::TwoFolded24:
      return arm == 1 || arm == 3;
    case Configuration::TwoFolded13:
      return arm == 0 || arm == 2;
    case Configuration::FourFolded:
      return true;
    default:
      return false;
  }
}

std::string_view to_string(Configuration c);
Configuration configuration_from_string(std::string_view name);

/// Total thrust along z_B and body torque.
struct Wrench {
  double f_sigma = 0.0;
  Vector3d tau = Vector3d::Zero();

  Wrench() = default;
  Wrench(double f, const Vector3d& t) : f_sigma(f), tau(t) {}
  explicit Wrench(const Vector4d& v) : f_sigma(v(0)), tau(v.tail<3>()) {}

  Vector4d vector() const {
    Vector4d v;
    v << f_sigma, tau;
    return v;
  }
  bool finite() const { return std::isfinite(f_sigma) && tau.allFinite(); }
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class AllocationError : public std::runtime_error {
 public:
  AllocationError(const std::string& what, const Vector3d& direction = Vector3d::Zero())
      : std::runtime_error(what), direction_(direction) {}
  /// Torque direction the mapping cannot produce (zero when not applicable).
  const Vector3d& direction() const { return direction_; }

 private:
  Vector3d direction_;
};

class InfeasibleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, double residual)
      : std::runtime_error(what), residual_(residual) {}
  double residual() const { return residual_; }

 private:
  double residual_;
};

}  // namespace hq
