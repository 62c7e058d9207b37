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

#include "hingequad/controller.hpp"
#include "hingequad/multibody.hpp"
#include "hingequad/vehicle.hpp"

namespace hq {

enum class LogFormat { Csv, JsonLines };

struct TunnelSpec {
  double cross_section = 0.43;  // m, square
  double length = 1.0;          // m, along E x, centred at x = 0
  double altitude = 1.0;        // m, tunnel centre height
  double speed = 0.5;           // m/s, traverse speed
  Configuration configuration = Configuration::TwoFolded24;  // flown through the tunnel
};

struct GapSpec {
  double size = 0.43;           // m, square opening in a horizontal plane
  double altitude = 3.3;        // m
  double hover_above = 0.2;     // m, start height above the gap
  double accel = 10.0;          // m/s^2, upward
  double accel_start = 0.2;     // s
  double accel_duration = 0.26;  // s
  double unfold_below = 0.15;   // m, unfold once the body COM is this far below the gap
  double brake_time = 2.0;      // s after unfolding
};

struct ScenarioSpec {
  double duration = 6.0;  // s, hover and step scenarios
  double hover_altitude = 1.0;
  Vector3d initial_offset{0.1 / std::sqrt(3.0), 0.1 / std::sqrt(3.0), 0.1 / std::sqrt(3.0)};
  double step_size = 0.5;  // m, step_response along x
  double clearance_margin = 0.01;  // m
  double attitude_noise_deg = 0.0;  // initial attitude perturbation drawn from the seed
  LogFormat format = LogFormat::Csv;
  TunnelSpec tunnel;
  GapSpec gap;
  Payload payload{0.083, Vector3d(0.0, 0.0, -0.05)};
  double perch_contact_height = -0.019;  // m, wire contact relative to the unfolded COM
  double f_des = -1.5;  // N, nominal folded-arm hover thrust for the arm-angle design
};

struct AppConfig {
  VehicleParams vehicle;
  SimParams sim;
  ControllerParams controller;
  ScenarioSpec scenario;

  void validate() const;
};

/// Parses the YAML config. Missing keys keep their defaults; unknown keys throw
/// ConfigError naming the offending path. Angles carry a _deg suffix.
AppConfig load_config(const std::string& path);
AppConfig parse_config(const std::string& text);

/// Fully resolved configuration in the same schema.
std::string dump_config(const AppConfig& config);

}  // namespace hq
