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

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "hingequad/config.hpp"
#include "hingequad/controller.hpp"
#include "hingequad/hinge_bounds.hpp"
#include "hingequad/multibody.hpp"

namespace hq {

enum class ScenarioName {
  HoverUnfolded,
  HoverTwoFolded,
  StepResponse,
  Tunnel,
  Grasp,
  PerchStatic,
  GapTraversal,
  DesignReport,
  Envelope,
};

std::string_view to_string(ScenarioName name);
ScenarioName scenario_from_string(std::string_view name);  // throws ConfigError
const std::vector<ScenarioName>& all_scenarios();

struct LogRow {
  double t = 0.0;
  Vector3d p = Vector3d::Zero();
  Vector3d v = Vector3d::Zero();
  Eigen::Quaterniond q = Eigen::Quaterniond::Identity();
  Vector3d omega = Vector3d::Zero();
  Vector4d hinge = Vector4d::Zero();
  Vector4d wrench = Vector4d::Zero();   // commanded (f_sigma, tau)
  Vector4d margins = Vector4d::Zero();
  Vector4d thrust = Vector4d::Zero();   // actual, N
  Vector4d speed = Vector4d::Zero();    // commanded, rad/s
  FsmState fsm = FsmState::Steady;
  Configuration config = Configuration::Unfolded;
};

/// Time-stamped samples with a fixed column schema.
class TrajectoryLog {
 public:
  static const std::vector<std::string>& columns();

  /// Throws std::invalid_argument unless t strictly increases.
  void append(const LogRow& row);

  const std::vector<LogRow>& rows() const { return rows_; }
  bool empty() const { return rows_.empty(); }
  std::size_t size() const { return rows_.size(); }

  void write_csv(std::ostream& os) const;
  void write_jsonl(std::ostream& os) const;
  void write(std::ostream& os, LogFormat format) const;

 private:
  std::vector<LogRow> rows_;
};

struct Verdict {
  std::string name;
  bool pass = false;
  std::string detail;
};

struct ScenarioResult {
  ScenarioName name = ScenarioName::HoverUnfolded;
  TrajectoryLog log;
  std::vector<Verdict> verdicts;
  std::map<std::string, double> metrics;
  std::vector<std::string> notes;
  std::map<std::string, std::string> artifacts;  // file name -> contents

  bool passed() const;
  void add(std::string name, bool pass, std::string detail = {});
};

struct HoverFeasibility {
  double required_sin = 0.0;    // smallest sin(arm angle) allowing two-folded hover
  double angle_margin = 0.0;    // arm_angle - asin(required_sin), rad (-inf if > 1)
  double thrust_margin = 0.0;   // f_max - m g / 2, N
  bool feasible = false;
  std::string binding;          // first violated inequality, empty when feasible
};

/// The two hover inequalities of the two-folded configuration.
HoverFeasibility hover_feasibility(const VehicleParams& params);

/// Arm angle giving hover with folded-arm thrust f_des (< 0). Throws
/// InfeasibleError when no such angle exists.
double arm_angle_for(const VehicleParams& params, double f_des);

struct DesignReport {
  double f_des = 0.0;
  double arm_angle = 0.0;  // rad, from f_des
  HoverFeasibility feasibility;
  std::vector<std::pair<double, double>> width_curve;  // (arm angle deg, two-folded width m)
  AgilityReport agility;
  double width_unfolded = 0.0;
  double width_two_folded = 0.0;
  double width_four_folded = 0.0;
};

DesignReport design_report(const AppConfig& config);
std::string to_json(const DesignReport& report);

struct PerchReport {
  double com_shift = 0.0;      // m, FourFolded minus Unfolded system COM along body z (< 0: down)
  double contact_height = 0.0;  // m, relative to the unfolded system COM
  double below_contact = 0.0;   // m, contact height minus FourFolded COM height
  bool stable = false;          // COM strictly below the contact
};

/// Static perch on a wire touching the central body at the configured contact
/// height. `payload` optionally rides on the body.
PerchReport perch_static(const AppConfig& config, Configuration config_at_rest = Configuration::FourFolded,
                         const std::optional<Payload>& payload = std::nullopt);

/// Envelope slices at hover thrust in the given configuration as CSV rows
/// (set, f_sigma, tau_z), vertices counterclockwise.
void write_envelope_csv(std::ostream& os, const Envelope& envelope);

struct RunOptions {
  std::uint64_t seed = 0;
};

/// Runs one scenario end to end. Never throws for scenario-level failures
/// (infeasible payloads, aborts, bound violations); those become verdicts.
ScenarioResult run_scenario(ScenarioName name, const AppConfig& config, const RunOptions& options = {});

}  // namespace hq
