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

#include "hingequad/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

namespace hq {

namespace {

// A mapping node whose keys must all be consumed.
class Section {
 public:
  Section(YAML::Node node, std::string path) : node_(std::move(node)), path_(std::move(path)) {
    if (node_ && !node_.IsNull() && !node_.IsMap()) throw ConfigError(path_ + ": expected a mapping");
  }

  bool has(const std::string& key) const { return node_ && node_.IsMap() && node_[key]; }

  template <typename T>
  void get(const std::string& key, T& out) {
    if (!has(key)) return;
    used_.insert(key);
    try {
      out = node_[key].as<T>();
    } catch (const YAML::Exception&) {
      throw ConfigError(where(key) + ": wrong type");
    }
  }

  void angle(const std::string& key, double& rad) {
    double deg = rad2deg(rad);
    get(key, deg);
    rad = deg2rad(deg);
  }

  template <int N>
  void vec(const std::string& key, Eigen::Matrix<double, N, 1>& out) {
    if (!has(key)) return;
    std::vector<double> v;
    get(key, v);
    if (static_cast<int>(v.size()) != N) {
      throw ConfigError(where(key) + ": expected " + std::to_string(N) + " numbers");
    }
    for (int i = 0; i < N; ++i) out(i) = v[static_cast<std::size_t>(i)];
  }

  // Diagonal (3 numbers) or full row-major (9 numbers) inertia.
  void inertia(const std::string& key, Matrix3d& out) {
    if (!has(key)) return;
    std::vector<double> v;
    get(key, v);
    if (v.size() == 3) {
      out = Vector3d(v[0], v[1], v[2]).asDiagonal();
    } else if (v.size() == 9) {
      for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) out(r, c) = v[static_cast<std::size_t>(3 * r + c)];
    } else {
      throw ConfigError(where(key) + ": expected 3 (diagonal) or 9 numbers");
    }
  }

  Section sub(const std::string& key) {
    if (has(key)) used_.insert(key);
    return Section(has(key) ? node_[key] : YAML::Node(), where(key));
  }

  void finish() const {
    if (!node_ || !node_.IsMap()) return;
    for (const auto& kv : node_) {
      const auto key = kv.first.as<std::string>();
      if (!used_.count(key)) throw ConfigError("unknown key '" + where(key) + "'");
    }
  }

 private:
  std::string where(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  YAML::Node node_;
  std::string path_;
  std::set<std::string> used_;
};

Configuration parse_configuration(const std::string& name) {
  return configuration_from_string(name);
}

void read_vehicle(Section s, VehicleParams& v) {
  s.get("body_mass", v.body_mass);
  s.get("arm_mass", v.arm_mass);
  s.inertia("body_inertia", v.body_inertia);
  s.inertia("arm_inertia", v.arm_inertia);
  s.get("kappa_fwd", v.kappa_fwd);
  s.get("kappa_rev", v.kappa_rev);
  s.get("thrust_min", v.thrust_min);
  s.get("thrust_max", v.thrust_max);
  s.angle("arm_angle_deg", v.arm_angle);
  s.get("prop_spacing", v.prop_spacing);
  s.vec("body_rel_hinge0", v.body_rel_hinge0);
  s.vec("hinge_rel_arm", v.hinge_rel_arm);
  s.get("prop_offset_x", v.prop_offset_x);
  s.vec("gravity", v.gravity);
  s.get("max_prop_speed", v.max_prop_speed);
  s.get("prop_radius", v.prop_radius);
  s.get("prop_plane_height", v.prop_plane_height);
  // The in-plane hinge offset follows from spacing, arm angle and lever; keep
  // it in step when a file changes those without restating it.
  const bool moved = s.has("arm_angle_deg") || s.has("prop_spacing") || s.has("hinge_rel_arm") ||
                     s.has("prop_offset_x");
  if (moved && !s.has("body_rel_hinge0")) {
    v.body_rel_hinge0.head<2>() = -ArmKinematics(v).hinge(0).head<2>();
  }
  s.finish();
}

void read_sim(Section s, SimParams& p) {
  s.get("dt", p.dt);
  s.get("motor_time_constant", p.motor_time_constant);
  s.get("reversal_dead_time", p.reversal_dead_time);
  s.get("restitution", p.restitution);
  s.vec("hinge_friction", p.hinge_friction);
  s.get("event_tolerance", p.event_tolerance);
  s.finish();
}

void read_controller(Section s, ControllerParams& c) {
  s.get("kp", c.kp);
  s.get("kd", c.kd);
  s.get("acc_cap", c.acc_cap);
  s.get("attitude_rate", c.attitude_rate);
  s.get("position_rate", c.position_rate);
  s.get("fold_thrust", c.fold_thrust);
  s.get("unfold_thrust", c.unfold_thrust);
  if (s.has("exit_mode")) {
    std::string mode;
    s.get("exit_mode", mode);
    if (mode == "hinge_angles") {
      c.exit_mode = TransitionExit::HingeAngles;
    } else if (mode == "timed") {
      c.exit_mode = TransitionExit::Timed;
    } else {
      throw ConfigError("controller.exit_mode: expected hinge_angles or timed");
    }
  }
  s.angle("exit_tolerance_deg", c.exit_tolerance);
  s.get("exit_debounce", c.exit_debounce);
  s.get("timed_exit", c.timed_exit);
  s.get("transition_timeout", c.transition_timeout);
  s.get("enforce_fourfold_bounds", c.enforce_fourfold_bounds);
  Section lqr = s.sub("lqr");
  lqr.vec("q", c.lqr.q);
  lqr.get("r_plus", c.lqr.r_plus);
  lqr.get("r_minus", c.lqr.r_minus);
  lqr.finish();
  s.finish();
}

void read_scenario(Section s, ScenarioSpec& sc) {
  s.get("duration", sc.duration);
  s.get("hover_altitude", sc.hover_altitude);
  s.vec("initial_offset", sc.initial_offset);
  s.get("step_size", sc.step_size);
  s.get("clearance_margin", sc.clearance_margin);
  s.get("attitude_noise_deg", sc.attitude_noise_deg);
  if (s.has("format")) {
    std::string f;
    s.get("format", f);
    if (f == "csv") {
      sc.format = LogFormat::Csv;
    } else if (f == "jsonl") {
      sc.format = LogFormat::JsonLines;
    } else {
      throw ConfigError("scenario.format: expected csv or jsonl");
    }
  }
  Section t = s.sub("tunnel");
  t.get("cross_section", sc.tunnel.cross_section);
  t.get("length", sc.tunnel.length);
  t.get("altitude", sc.tunnel.altitude);
  t.get("speed", sc.tunnel.speed);
  if (t.has("configuration")) {
    std::string name;
    t.get("configuration", name);
    sc.tunnel.configuration = parse_configuration(name);
  }
  t.finish();
  Section g = s.sub("gap");
  g.get("size", sc.gap.size);
  g.get("altitude", sc.gap.altitude);
  g.get("hover_above", sc.gap.hover_above);
  g.get("accel", sc.gap.accel);
  g.get("accel_start", sc.gap.accel_start);
  g.get("accel_duration", sc.gap.accel_duration);
  g.get("unfold_below", sc.gap.unfold_below);
  g.get("brake_time", sc.gap.brake_time);
  g.finish();
  Section p = s.sub("payload");
  p.get("mass", sc.payload.mass);
  p.vec("offset", sc.payload.offset);
  p.finish();
  s.get("perch_contact_height", sc.perch_contact_height);
  s.get("f_des", sc.f_des);
  s.finish();
}

template <typename Derived>
std::vector<double> as_list(const Eigen::MatrixBase<Derived>& m) {
  return std::vector<double>(m.derived().data(), m.derived().data() + m.size());
}

std::vector<double> inertia_list(const Matrix3d& J) {
  if (J.isDiagonal(0.0)) return as_list(Vector3d(J.diagonal()));
  std::vector<double> v;
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) v.push_back(J(r, c));
  return v;
}

}  // namespace

void AppConfig::validate() const {
  vehicle.validate();
  sim.validate();
  controller.validate();
  if (!(scenario.duration > 0.0)) throw ConfigError("scenario.duration must be positive");
  if (!(scenario.tunnel.cross_section > 0.0) || !(scenario.gap.size > 0.0)) {
    throw ConfigError("passage sizes must be positive");
  }
  if (!(scenario.tunnel.speed > 0.0)) throw ConfigError("scenario.tunnel.speed must be positive");
  if (!(scenario.payload.mass >= 0.0)) throw ConfigError("scenario.payload.mass must be non-negative");
  if (scenario.tunnel.configuration != Configuration::Unfolded &&
      scenario.tunnel.configuration != Configuration::TwoFolded24) {
    throw ConfigError("scenario.tunnel.configuration must be unfolded or two_folded_24");
  }
}

AppConfig parse_config(const std::string& text) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::Exception& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }
  AppConfig cfg;
  Section top(root, "");
  read_vehicle(top.sub("vehicle"), cfg.vehicle);
  read_sim(top.sub("sim"), cfg.sim);
  read_controller(top.sub("controller"), cfg.controller);
  read_scenario(top.sub("scenario"), cfg.scenario);
  top.finish();
  cfg.validate();
  return cfg;
}

AppConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::string dump_config(const AppConfig& c) {
  YAML::Emitter e;
  e.SetDoublePrecision(12);
  e << YAML::BeginMap;
  const VehicleParams& v = c.vehicle;
  e << YAML::Key << "vehicle" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "body_mass" << YAML::Value << v.body_mass;
  e << YAML::Key << "arm_mass" << YAML::Value << v.arm_mass;
  e << YAML::Key << "body_inertia" << YAML::Value << YAML::Flow << inertia_list(v.body_inertia);
  e << YAML::Key << "arm_inertia" << YAML::Value << YAML::Flow << inertia_list(v.arm_inertia);
  e << YAML::Key << "kappa_fwd" << YAML::Value << v.kappa_fwd;
  e << YAML::Key << "kappa_rev" << YAML::Value << v.kappa_rev;
  e << YAML::Key << "thrust_min" << YAML::Value << v.thrust_min;
  e << YAML::Key << "thrust_max" << YAML::Value << v.thrust_max;
  e << YAML::Key << "arm_angle_deg" << YAML::Value << rad2deg(v.arm_angle);
  e << YAML::Key << "prop_spacing" << YAML::Value << v.prop_spacing;
  e << YAML::Key << "body_rel_hinge0" << YAML::Value << YAML::Flow << as_list(v.body_rel_hinge0);
  e << YAML::Key << "hinge_rel_arm" << YAML::Value << YAML::Flow << as_list(v.hinge_rel_arm);
  e << YAML::Key << "prop_offset_x" << YAML::Value << v.prop_offset_x;
  e << YAML::Key << "gravity" << YAML::Value << YAML::Flow << as_list(v.gravity);
  e << YAML::Key << "max_prop_speed" << YAML::Value << v.max_prop_speed;
  e << YAML::Key << "prop_radius" << YAML::Value << v.prop_radius;
  e << YAML::Key << "prop_plane_height" << YAML::Value << v.prop_plane_height;
  e << YAML::EndMap;

  const SimParams& s = c.sim;
  e << YAML::Key << "sim" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "dt" << YAML::Value << s.dt;
  e << YAML::Key << "motor_time_constant" << YAML::Value << s.motor_time_constant;
  e << YAML::Key << "reversal_dead_time" << YAML::Value << s.reversal_dead_time;
  e << YAML::Key << "restitution" << YAML::Value << s.restitution;
  e << YAML::Key << "hinge_friction" << YAML::Value << YAML::Flow << as_list(s.hinge_friction);
  e << YAML::Key << "event_tolerance" << YAML::Value << s.event_tolerance;
  e << YAML::EndMap;

  const ControllerParams& k = c.controller;
  e << YAML::Key << "controller" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "kp" << YAML::Value << k.kp;
  e << YAML::Key << "kd" << YAML::Value << k.kd;
  e << YAML::Key << "acc_cap" << YAML::Value << k.acc_cap;
  e << YAML::Key << "attitude_rate" << YAML::Value << k.attitude_rate;
  e << YAML::Key << "position_rate" << YAML::Value << k.position_rate;
  e << YAML::Key << "fold_thrust" << YAML::Value << k.fold_thrust;
  e << YAML::Key << "unfold_thrust" << YAML::Value << k.unfold_thrust;
  e << YAML::Key << "exit_mode" << YAML::Value
    << (k.exit_mode == TransitionExit::Timed ? "timed" : "hinge_angles");
  e << YAML::Key << "exit_tolerance_deg" << YAML::Value << rad2deg(k.exit_tolerance);
  e << YAML::Key << "exit_debounce" << YAML::Value << k.exit_debounce;
  e << YAML::Key << "timed_exit" << YAML::Value << k.timed_exit;
  e << YAML::Key << "transition_timeout" << YAML::Value << k.transition_timeout;
  e << YAML::Key << "enforce_fourfold_bounds" << YAML::Value << k.enforce_fourfold_bounds;
  e << YAML::Key << "lqr" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "q" << YAML::Value << YAML::Flow << as_list(k.lqr.q);
  e << YAML::Key << "r_plus" << YAML::Value << k.lqr.r_plus;
  e << YAML::Key << "r_minus" << YAML::Value << k.lqr.r_minus;
  e << YAML::EndMap << YAML::EndMap;

  const ScenarioSpec& sc = c.scenario;
  e << YAML::Key << "scenario" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "duration" << YAML::Value << sc.duration;
  e << YAML::Key << "hover_altitude" << YAML::Value << sc.hover_altitude;
  e << YAML::Key << "initial_offset" << YAML::Value << YAML::Flow << as_list(sc.initial_offset);
  e << YAML::Key << "step_size" << YAML::Value << sc.step_size;
  e << YAML::Key << "clearance_margin" << YAML::Value << sc.clearance_margin;
  e << YAML::Key << "attitude_noise_deg" << YAML::Value << sc.attitude_noise_deg;
  e << YAML::Key << "format" << YAML::Value << (sc.format == LogFormat::Csv ? "csv" : "jsonl");
  e << YAML::Key << "tunnel" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "cross_section" << YAML::Value << sc.tunnel.cross_section;
  e << YAML::Key << "length" << YAML::Value << sc.tunnel.length;
  e << YAML::Key << "altitude" << YAML::Value << sc.tunnel.altitude;
  e << YAML::Key << "speed" << YAML::Value << sc.tunnel.speed;
  e << YAML::Key << "configuration" << YAML::Value << std::string(to_string(sc.tunnel.configuration));
  e << YAML::EndMap;
  e << YAML::Key << "gap" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "size" << YAML::Value << sc.gap.size;
  e << YAML::Key << "altitude" << YAML::Value << sc.gap.altitude;
  e << YAML::Key << "hover_above" << YAML::Value << sc.gap.hover_above;
  e << YAML::Key << "accel" << YAML::Value << sc.gap.accel;
  e << YAML::Key << "accel_start" << YAML::Value << sc.gap.accel_start;
  e << YAML::Key << "accel_duration" << YAML::Value << sc.gap.accel_duration;
  e << YAML::Key << "unfold_below" << YAML::Value << sc.gap.unfold_below;
  e << YAML::Key << "brake_time" << YAML::Value << sc.gap.brake_time;
  e << YAML::EndMap;
  e << YAML::Key << "payload" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "mass" << YAML::Value << sc.payload.mass;
  e << YAML::Key << "offset" << YAML::Value << YAML::Flow << as_list(sc.payload.offset);
  e << YAML::EndMap;
  e << YAML::Key << "perch_contact_height" << YAML::Value << sc.perch_contact_height;
  e << YAML::Key << "f_des" << YAML::Value << sc.f_des;
  e << YAML::EndMap;
  e << YAML::EndMap;
  return std::string(e.c_str()) + "\n";
}

}  // namespace hq
