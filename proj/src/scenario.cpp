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

#include "hingequad/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "hingequad/mixer.hpp"
#include "hingequad/rotation.hpp"

namespace hq {

namespace {

using json = nlohmann::json;

constexpr double kLogPeriod = 0.01;         // s
constexpr double kHoverTolerance = 0.01;    // m
constexpr double kHoverDeadline = 5.0;      // s
constexpr double kMarginSlack = 1e-9;
constexpr double kMaxDeparture = deg2rad(1.0);

std::string num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", x);
  return buf;
}

constexpr std::array<std::pair<ScenarioName, std::string_view>, 9> kNames{{
    {ScenarioName::HoverUnfolded, "hover_unfolded"},
    {ScenarioName::HoverTwoFolded, "hover_two_folded"},
    {ScenarioName::StepResponse, "step_response"},
    {ScenarioName::Tunnel, "tunnel"},
    {ScenarioName::Grasp, "grasp"},
    {ScenarioName::PerchStatic, "perch_static"},
    {ScenarioName::GapTraversal, "gap_traversal"},
    {ScenarioName::DesignReport, "design_report"},
    {ScenarioName::Envelope, "envelope"},
}};

// Axis-aligned E-frame box around the vehicle.
struct Extent {
  Vector3d lo, hi;
};

Extent extent(const VehicleParams& params, const SimState& s) {
  const Matrix3d R = s.rotation();
  const HingeAngles angles = s.hinge_angles();
  Extent e;
  for (int k = 0; k < 3; ++k) {
    const Vector3d d = R.row(k).transpose();
    e.hi(k) = s.p(k) + support(params, angles, d);
    e.lo(k) = s.p(k) - support(params, angles, -d);
  }
  return e;
}

Matrix3d yaw_rotation(double yaw) { return Eigen::AngleAxisd(yaw, Vector3d::UnitZ()).toRotationMatrix(); }

// Yaw in [0, 90) deg minimising the larger E-frame horizontal extent, for square openings.
double square_fit_yaw(const VehicleParams& params, Configuration config) {
  const HingeAngles angles = hinge_angles(config);
  double best_yaw = 0.0;
  double best = std::numeric_limits<double>::infinity();
  for (int deg = 0; deg < 90; ++deg) {
    const Matrix3d R = yaw_rotation(deg2rad(deg));
    const double w = std::max(width_along(params, angles, R.row(0).transpose()),
                              width_along(params, angles, R.row(1).transpose()));
    if (w < best - 1e-12) {
      best = w;
      best_yaw = deg2rad(deg);
    }
  }
  return best_yaw;
}

SimState hover_state(Configuration config, const VehicleParams& params, const Vector3d& p, double yaw) {
  const Wrench hover(params.hover_thrust(), Vector3d::Zero());
  SimState s = initial_state(config, invert_mapping(build_mapping(config, params), hover));
  s.p = p;
  s.q = Eigen::Quaterniond(yaw_rotation(yaw));
  return s;
}

// Random tilt of at most `deg` about a random axis, drawn from the seed.
void perturb_attitude(SimState& s, double deg, std::uint64_t seed) {
  if (deg <= 0.0) return;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> uniform(0.0, deg2rad(deg));
  Vector3d axis(normal(rng), normal(rng), normal(rng));
  if (axis.norm() < 1e-12) axis = Vector3d::UnitX();
  s.q = (s.q * Eigen::Quaterniond(Eigen::AngleAxisd(uniform(rng), axis.normalized()))).normalized();
}

bool bounds_apply(Configuration config, const ControllerParams& ctrl) {
  return config != Configuration::FourFolded || ctrl.enforce_fourfold_bounds;
}

// Closed-loop simulation shared by the flying scenarios.
class Harness {
 public:
  using Script = std::function<Setpoint(double t)>;
  using Hook = std::function<bool(double t)>;  // true stops the run

  Harness(const AppConfig& cfg, const VehicleParams& vehicle, Configuration initial, const SimState& s0)
      : cfg_(cfg),
        vehicle_(vehicle),
        body_(vehicle, cfg.sim),
        ctrl_(vehicle, cfg.controller, initial),
        per_control_(std::max(1L, std::lround(1.0 / (cfg.controller.attitude_rate * cfg.sim.dt)))),
        per_log_(std::max(1L, std::lround(kLogPeriod / cfg.sim.dt))) {
    state = s0;
  }

  // Runs to t_end, or until the hook asks to stop. False on a controller failure.
  bool run(double t_end, const Script& script, ScenarioResult& res, const Hook& hook = {}) {
    const double dt = cfg_.sim.dt;
    while (state.t < t_end - 0.5 * dt) {
      if (step_ % per_control_ == 0) {
        try {
          out = ctrl_.step(state, script(state.t), state.t);
        } catch (const InfeasibleError& e) {
          failure = e.what();
          return false;
        }
        for (int i = 0; i < kNumArms; ++i) command_(i) = out.motors[i].thrust;
        if (out.fsm_state == FsmState::Abort) aborted = true;
        if (out.fsm_state == FsmState::Steady && bounds_apply(out.control_config, cfg_.controller) &&
            out.margins.minCoeff() < -kMarginSlack) {
          ++steady_violations;
        }
        if (hook && hook(state.t)) return true;
      }
      if (step_ % per_log_ == 0) log(res);
      StepReport report;
      state = body_.step(state, command_, dt, &report);
      if (out.fsm_state == FsmState::Steady) {
        steady_unlocks += report.unlocks;
        if (!is_transitional(out.control_config)) {
          const HingeAngles stops = hinge_angles(out.control_config);
          for (int i = 0; i < kNumArms; ++i) {
            max_departure = std::max(max_departure, std::abs(state.hinge[i].angle - stops[i]));
          }
        }
      }
      impacts.insert(impacts.end(), report.impacts.begin(), report.impacts.end());
      ++step_;
    }
    return true;
  }

  // Swaps the plant and controller for new vehicle parameters (payload release).
  // `shift` is the old body origin relative to the new one, in B.
  void replace_vehicle(const VehicleParams& vehicle, const Vector3d& shift, Configuration config) {
    const Matrix3d R = state.rotation();
    state.p += R * shift;
    state.v += R * state.omega.cross(shift);
    vehicle_ = vehicle;
    body_ = Multibody(vehicle, cfg_.sim);
    ctrl_ = FlightController(vehicle, cfg_.controller, config);
  }

  FlightController& ctrl() { return ctrl_; }
  const VehicleParams& vehicle() const { return vehicle_; }
  double control_period() const { return per_control_ * cfg_.sim.dt; }

  SimState state;
  ControlOutput out;
  int steady_violations = 0;
  int steady_unlocks = 0;
  double max_departure = 0.0;  // rad, hinge distance from its stop in steady flight
  bool aborted = false;
  std::vector<ImpactEvent> impacts;
  std::string failure;

 private:
  void log(ScenarioResult& res) const {
    LogRow row;
    row.t = state.t;
    row.p = state.p;
    row.v = state.v;
    row.q = state.q;
    row.omega = state.omega;
    const HingeAngles h = state.hinge_angles();
    row.hinge = Vector4d(h[0], h[1], h[2], h[3]);
    row.wrench = out.wrench.vector();
    row.margins = out.margins;
    row.thrust = state.thrusts();
    for (int i = 0; i < kNumArms; ++i) row.speed(i) = out.motors[i].speed;
    row.fsm = out.fsm_state;
    row.config = out.control_config;
    res.log.append(row);
  }

  const AppConfig& cfg_;
  VehicleParams vehicle_;
  Multibody body_;
  FlightController ctrl_;
  long per_control_;
  long per_log_;
  long step_ = 0;
  Vector4d command_ = Vector4d::Zero();
};

void common_verdicts(ScenarioResult& res, const Harness& h) {
  res.add("controller feasible", h.failure.empty(), h.failure);
  res.add("no abort", !h.aborted);
  res.add("steady bound margins", h.steady_violations == 0,
          std::to_string(h.steady_violations) + " violating control updates");
  res.add("hinges held in steady flight", h.max_departure <= kMaxDeparture,
          "max departure " + num(rad2deg(h.max_departure)) + " deg");
  res.metrics["steady_unlocks"] = h.steady_unlocks;
  res.metrics["max_hinge_departure_deg"] = rad2deg(h.max_departure);
  double gain = 0.0;
  for (const auto& ev : h.impacts) gain = std::max(gain, ev.energy_after - ev.energy_before);
  res.metrics["impacts"] = static_cast<double>(h.impacts.size());
  res.metrics["max_impact_energy_gain"] = gain;
}

// Tracks the last time the position error was at or above tolerance.
struct SettleTracker {
  Vector3d target = Vector3d::Zero();
  double last_out = 0.0;
  double final_error = std::numeric_limits<double>::infinity();

  void update(const SimState& s) {
    final_error = (s.p - target).norm();
    if (final_error >= kHoverTolerance) last_out = s.t;
  }
};

void run_hover(ScenarioResult& res, const AppConfig& cfg, Configuration config, std::uint64_t seed) {
  const VehicleParams& params = cfg.vehicle;
  const Vector3d target(0.0, 0.0, cfg.scenario.hover_altitude);
  SimState s0 = hover_state(config, params, target + cfg.scenario.initial_offset, 0.0);
  perturb_attitude(s0, cfg.scenario.attitude_noise_deg, seed);

  Harness h(cfg, params, config, s0);
  SettleTracker settle{target};
  h.run(cfg.scenario.duration, [&](double) { return Setpoint::hold(target, 0.0); }, res,
        [&](double) {
          settle.update(h.state);
          return false;
        });

  const double settle_time = settle.last_out + h.control_period();
  res.metrics["initial_offset"] = cfg.scenario.initial_offset.norm();
  res.metrics["settle_time"] = settle_time;
  res.metrics["final_error"] = settle.final_error;
  common_verdicts(res, h);
  res.add("settles within 5 s", settle_time <= kHoverDeadline && settle.final_error < kHoverTolerance,
          "settle " + num(settle_time) + " s, final error " + num(settle.final_error) + " m");
}

void run_step(ScenarioResult& res, const AppConfig& cfg) {
  const VehicleParams& params = cfg.vehicle;
  const Vector3d start(0.0, 0.0, cfg.scenario.hover_altitude);
  const Vector3d goal = start + Vector3d(cfg.scenario.step_size, 0.0, 0.0);
  constexpr double kStepTime = 0.5, kStepHorizon = 10.0;

  Harness h(cfg, params, Configuration::Unfolded, hover_state(Configuration::Unfolded, params, start, 0.0));
  SettleTracker settle{goal};
  double overshoot = 0.0;
  h.run(kStepTime + kStepHorizon,
        [&](double t) { return Setpoint::hold(t < kStepTime ? start : goal, 0.0); }, res,
        [&](double t) {
          if (t >= kStepTime) {
            settle.update(h.state);
            overshoot = std::max(overshoot, h.state.p.x() - goal.x());
          }
          return false;
        });
  res.metrics["overshoot"] = overshoot;
  res.metrics["settle_time"] = settle.last_out + h.control_period() - kStepTime;
  res.metrics["final_error"] = settle.final_error;
  common_verdicts(res, h);
  res.add("step settles", settle.final_error < kHoverTolerance, "final error " + num(settle.final_error) + " m");
}

// Passage check: the E-frame extent stays inside [centre - half + margin, centre + half - margin]
// along the listed axes.
struct ClearanceTracker {
  double half = 0.0;
  double margin = 0.0;
  Vector3d centre = Vector3d::Zero();
  std::vector<int> axes;
  int samples = 0;
  int violations = 0;
  double worst = std::numeric_limits<double>::infinity();  // smallest clearance seen

  void check(const Extent& e) {
    ++samples;
    for (int k : axes) {
      const double room = std::min(centre(k) + half - e.hi(k), e.lo(k) - (centre(k) - half));
      worst = std::min(worst, room);
      if (room < margin) {
        ++violations;
        return;
      }
    }
  }

  Verdict verdict() const {
    Verdict v;
    v.name = "passage clearance";
    v.pass = samples > 0 && violations == 0;
    v.detail = std::to_string(samples) + " crossing samples, " + std::to_string(violations) +
               " violations, smallest clearance " + num(samples ? worst : 0.0) + " m";
    return v;
  }
};

void run_tunnel(ScenarioResult& res, const AppConfig& cfg) {
  const VehicleParams& params = cfg.vehicle;
  const TunnelSpec& tun = cfg.scenario.tunnel;
  const Configuration flown = tun.configuration;
  if (flown != Configuration::Unfolded && flown != Configuration::TwoFolded24) {
    throw ConfigError("scenario.tunnel.configuration must be unfolded or two_folded_24");
  }
  // Point the narrowest horizontal direction along E y.
  const MinWidth narrow = min_horizontal_width(params, hinge_angles(flown));
  const double yaw = kHalfPi - std::atan2(narrow.direction.y(), narrow.direction.x());
  const double x0 = -tun.length / 2.0 - 1.0;
  const double x1 = tun.length / 2.0 + 1.0;
  const Vector3d start(x0, 0.0, tun.altitude);
  const Vector3d goal(x1, 0.0, tun.altitude);
  constexpr double kFoldAt = 1.0, kSettle = 1.0, kHoldAfter = 1.0, kYawRelease = 0.5, kTail = 1.5;

  Harness h(cfg, params, Configuration::Unfolded, hover_state(Configuration::Unfolded, params, start, yaw));
  ClearanceTracker clear{tun.cross_section / 2.0, cfg.scenario.clearance_margin,
                         Vector3d(0.0, 0.0, tun.altitude), {1, 2}};
  bool fold_requested = flown == Configuration::Unfolded;
  double ready_at = flown == Configuration::Unfolded ? kFoldAt : -1.0;
  double arrived_at = -1.0, unfold_requested_at = -1.0, done_at = -1.0;
  double yaw_clear_at = -1.0;

  auto traverse_start = [&] { return ready_at + kSettle; };
  auto script = [&](double t) {
    FlightController& c = h.ctrl();
    if (!fold_requested && t >= kFoldAt) {
      c.request(flown, t);
      fold_requested = true;
    }
    if (yaw_clear_at >= 0.0 && t >= yaw_clear_at) {
      c.clear_yaw_override();
      yaw_clear_at = -1.0;
    }
    if (ready_at < 0.0 || t < traverse_start()) return Setpoint::hold(start, yaw);
    const double x = x0 + tun.speed * (t - traverse_start());
    if (x < x1) {
      return Setpoint::trajectory(Vector3d(x, 0.0, tun.altitude), Vector3d(tun.speed, 0.0, 0.0),
                                  Vector3d::Zero(), yaw);
    }
    if (arrived_at < 0.0) arrived_at = t;
    if (flown != Configuration::Unfolded && unfold_requested_at < 0.0 && t >= arrived_at + kHoldAfter) {
      c.request(Configuration::Unfolded, t);
      unfold_requested_at = t;
    }
    return Setpoint::hold(goal, yaw);
  };
  auto hook = [&](double t) {
    const bool steady = h.out.fsm_state == FsmState::Steady;
    if (fold_requested && ready_at < 0.0 && steady && h.out.control_config == flown) {
      ready_at = t;
      yaw_clear_at = t + kYawRelease;
    }
    const Extent e = extent(h.vehicle(), h.state);
    if (e.hi.x() >= -tun.length / 2.0 && e.lo.x() <= tun.length / 2.0) clear.check(e);
    const bool finished = flown == Configuration::Unfolded
                              ? arrived_at >= 0.0
                              : unfold_requested_at >= 0.0 && steady &&
                                    h.out.control_config == Configuration::Unfolded;
    if (finished && done_at < 0.0) done_at = t;
    return done_at >= 0.0 && t >= done_at + kTail;
  };
  const double horizon = kFoldAt + 3.0 + kSettle + (x1 - x0) / tun.speed + kHoldAfter + 3.0 + kTail;
  h.run(horizon, script, res, hook);

  res.metrics["yaw"] = yaw;
  res.metrics["min_width"] = narrow.width;
  res.metrics["crossing_samples"] = clear.samples;
  res.metrics["smallest_clearance"] = clear.samples ? clear.worst : 0.0;
  common_verdicts(res, h);
  res.add("configuration reached", ready_at >= 0.0);
  res.verdicts.push_back(clear.verdict());
  res.add("traverse completed", done_at >= 0.0);
}

void run_grasp(ScenarioResult& res, const AppConfig& cfg) {
  const Payload& payload = cfg.scenario.payload;
  const VehicleParams loaded = with_payload(cfg.vehicle, payload);
  const HoverFeasibility feas = hover_feasibility(loaded);
  res.metrics["payload_mass"] = payload.mass;
  res.metrics["angle_margin_deg"] = rad2deg(feas.angle_margin);
  res.metrics["thrust_margin"] = feas.thrust_margin;
  res.add("payload feasible", feas.feasible,
          feas.feasible ? "" : "violates " + feas.binding + " (total mass " + num(loaded.total_mass()) + " kg)");
  if (!feas.feasible) return;

  const double alt = cfg.scenario.hover_altitude;
  const Vector3d start(0.0, 0.0, alt);
  const Vector3d goal(1.0, 0.0, alt);
  constexpr double kHold = 3.0, kSpeed = 0.5, kTail = 4.0, kReleaseDelay = 1.0;
  const double arrive = kHold + (goal - start).norm() / kSpeed;

  Harness h(cfg, loaded, Configuration::TwoFolded24,
            hover_state(Configuration::TwoFolded24, loaded, start, 0.0));
  double carry_error = std::numeric_limits<double>::infinity();
  bool unfold_requested = false;
  double released_at = -1.0;
  auto script = [&](double t) {
    if (t < kHold) return Setpoint::hold(start, 0.0);
    if (t < arrive) {
      const Vector3d dir = (goal - start).normalized();
      return Setpoint::trajectory(start + kSpeed * (t - kHold) * dir, kSpeed * dir, Vector3d::Zero(), 0.0);
    }
    if (!unfold_requested && t >= arrive + kHold) {
      carry_error = (h.state.p - goal).norm();
      h.ctrl().request(Configuration::Unfolded, t);
      unfold_requested = true;
    }
    return Setpoint::hold(goal, 0.0);
  };
  double opened_at = -1.0;
  auto hook = [&](double t) {
    if (unfold_requested && opened_at < 0.0 && h.out.fsm_state == FsmState::Steady &&
        h.out.control_config == Configuration::Unfolded) {
      opened_at = t;
    }
    // The box slides out once the arms have been open for a moment.
    if (opened_at >= 0.0 && released_at < 0.0 && t >= opened_at + kReleaseDelay) {
      const Vector3d shift = -payload.mass * payload.offset / (cfg.vehicle.body_mass + payload.mass);
      h.replace_vehicle(cfg.vehicle, shift, Configuration::Unfolded);
      released_at = t;
    }
    return released_at >= 0.0 && t >= released_at + kTail;
  };
  h.run(arrive + kHold + 3.0 + kReleaseDelay + kTail, script, res, hook);

  const double final_error = (h.state.p - goal).norm();
  res.metrics["carry_error"] = carry_error;
  res.metrics["final_error"] = final_error;
  common_verdicts(res, h);
  res.add("carried to drop-off", carry_error < 0.02, "error " + num(carry_error) + " m");
  res.add("payload released", released_at >= 0.0);
  res.add("hover after release", final_error < 0.05, "error " + num(final_error) + " m");
}

void run_gap(ScenarioResult& res, const AppConfig& cfg, std::uint64_t seed) {
  const VehicleParams& params = cfg.vehicle;
  const GapSpec& gap = cfg.scenario.gap;
  const Vector3d start(0.0, 0.0, gap.altitude + gap.hover_above);
  const double fold_target = kHalfPi - cfg.controller.exit_tolerance;
  constexpr double kAlignPosition = 0.01, kAlignSpeed = 0.05, kAlignTimeout = 10.0;
  constexpr double kTimeout = 3.0, kStopped = 0.1;

  const double yaw = square_fit_yaw(params, Configuration::FourFolded);
  const Matrix3d R_pass = yaw_rotation(yaw);
  SimState s0 = hover_state(Configuration::Unfolded, params, start, yaw);
  perturb_attitude(s0, cfg.scenario.attitude_noise_deg, seed);
  Harness h(cfg, params, Configuration::Unfolded, s0);
  ClearanceTracker clear{gap.size / 2.0, cfg.scenario.clearance_margin, Vector3d(0.0, 0.0, gap.altitude), {0, 1}};
  bool fold_requested = false, unfold_requested = false, stopped = false;
  double throw_at = -1.0, folded_at = -1.0, unfold_at = -1.0, unfolded_at = -1.0;
  double attitude_at_unfold = std::numeric_limits<double>::infinity();
  Vector3d stop_point = Vector3d::Zero();
  double min_z = start.z();
  auto t_fold = [&] { return throw_at + gap.accel_duration; };

  auto script = [&](double t) {
    FlightController& c = h.ctrl();
    if (throw_at < 0.0) return Setpoint::hold(start, yaw);
    if (!fold_requested && t < t_fold()) {
      const double tau = t - throw_at;
      return Setpoint::trajectory(start + Vector3d(0.0, 0.0, 0.5 * gap.accel * tau * tau),
                                  Vector3d(0.0, 0.0, gap.accel * tau), Vector3d(0.0, 0.0, gap.accel), yaw);
    }
    if (!fold_requested) {
      c.request(Configuration::FourFolded, t);
      fold_requested = true;
    }
    if (!unfold_requested && c.fsm().state == FsmState::Steady && c.fsm().config == Configuration::FourFolded &&
        h.state.p.z() < gap.altitude - gap.unfold_below) {
      c.request(Configuration::Unfolded, t);
      unfold_requested = true;
      unfold_at = t;
    }
    if (unfolded_at < 0.0) return Setpoint::attitude_only(R_pass, 0.0);
    // Brake on velocity alone, then hold where the vehicle stopped.
    if (!stopped) return Setpoint::trajectory(h.state.p, Vector3d::Zero(), Vector3d::Zero(), yaw);
    return Setpoint::hold(stop_point, yaw);
  };
  auto hook = [&](double t) {
    min_z = std::min(min_z, h.state.p.z());
    if (throw_at < 0.0 && t >= gap.accel_start && (h.state.p - start).norm() < kAlignPosition &&
        h.state.v.norm() < kAlignSpeed) {
      throw_at = t;
    }
    if (fold_requested && folded_at < 0.0) {
      const HingeAngles a = h.state.hinge_angles();
      if (std::all_of(a.begin(), a.end(), [&](double q) { return q >= fold_target; })) folded_at = t;
    }
    if (unfold_requested && unfolded_at < 0.0 && h.out.fsm_state == FsmState::Steady &&
        h.out.control_config == Configuration::Unfolded) {
      unfolded_at = t;
      attitude_at_unfold = so3_log<double>(R_pass.transpose() * h.state.rotation()).norm();
    }
    if (unfolded_at >= 0.0 && !stopped && h.state.v.norm() < kStopped) {
      stopped = true;
      stop_point = h.state.p;
    }
    const Extent e = extent(params, h.state);
    if (e.lo.z() <= gap.altitude && e.hi.z() >= gap.altitude) clear.check(e);
    if (h.aborted) return true;
    if (throw_at < 0.0) return t >= kAlignTimeout;
    return unfolded_at >= 0.0 ? t >= unfolded_at + gap.brake_time : t >= t_fold() + kTimeout;
  };
  h.run(kAlignTimeout + gap.accel_duration + kTimeout + gap.brake_time, script, res, hook);

  const double fold_duration =
      folded_at >= 0.0 ? folded_at - t_fold() : std::numeric_limits<double>::infinity();
  res.metrics["yaw_deg"] = rad2deg(yaw);
  res.metrics["t_throw"] = throw_at;
  res.metrics["t_fold_command"] = throw_at >= 0.0 ? t_fold() : -1.0;
  res.metrics["fold_duration"] = fold_duration;
  res.metrics["t_unfold_command"] = unfold_at;
  res.metrics["t_unfolded"] = unfolded_at;
  res.metrics["attitude_error_at_unfold_deg"] = rad2deg(attitude_at_unfold);
  res.metrics["min_altitude"] = min_z;
  res.metrics["final_speed"] = h.state.v.norm();
  res.metrics["crossing_samples"] = clear.samples;
  common_verdicts(res, h);
  res.add("aligned over the gap", throw_at >= 0.0);
  res.add("fold duration", fold_duration >= 0.19 && fold_duration <= 0.57, num(fold_duration) + " s");
  res.add("unfolded below the gap", unfolded_at >= 0.0);
  res.add("attitude at unfold completion", rad2deg(attitude_at_unfold) < 10.0,
          num(rad2deg(attitude_at_unfold)) + " deg");
  res.verdicts.push_back(clear.verdict());
  res.add("braked", stopped, "final speed " + num(h.state.v.norm()) + " m/s");
}

std::string envelope_csv(const Envelope& env) {
  std::ostringstream os;
  write_envelope_csv(os, env);
  return os.str();
}

// Vertex-wise inclusion of `inner` in `outer`.
bool vertices_inside(const Polygon& inner, const Polygon& outer) {
  return std::all_of(inner.vertices.begin(), inner.vertices.end(),
                     [&](const Eigen::Vector2d& v) { return outer.contains(v, 1e-9); });
}

std::string perch_json(const PerchReport& r) {
  json j;
  j["com_shift"] = r.com_shift;
  j["contact_height"] = r.contact_height;
  j["below_contact"] = r.below_contact;
  j["stable"] = r.stable;
  return j.dump(2) + "\n";
}

std::string width_curve_csv(const DesignReport& r) {
  std::ostringstream os;
  os << "arm_angle_deg,width\n";
  for (const auto& [deg, w] : r.width_curve) os << num(deg) << ',' << num(w) << '\n';
  return os.str();
}

}  // namespace

std::string_view to_string(ScenarioName name) {
  for (const auto& [n, s] : kNames) {
    if (n == name) return s;
  }
  return "unknown";
}

ScenarioName scenario_from_string(std::string_view name) {
  for (const auto& [n, s] : kNames) {
    if (s == name) return n;
  }
  throw ConfigError("unknown scenario '" + std::string(name) + "'");
}

const std::vector<ScenarioName>& all_scenarios() {
  static const std::vector<ScenarioName> names = [] {
    std::vector<ScenarioName> v;
    for (const auto& kv : kNames) v.push_back(kv.first);
    return v;
  }();
  return names;
}

const std::vector<std::string>& TrajectoryLog::columns() {
  static const std::vector<std::string> cols = [] {
    std::vector<std::string> c{"t", "px", "py", "pz", "vx", "vy", "vz", "qw", "qx", "qy", "qz", "wx", "wy", "wz"};
    for (const char* prefix : {"hinge", "margin", "thrust", "speed"}) {
      if (std::string(prefix) == "margin") {
        for (const char* w : {"f_sigma_cmd", "tau_x_cmd", "tau_y_cmd", "tau_z_cmd"}) c.emplace_back(w);
      }
      for (int i = 1; i <= kNumArms; ++i) c.push_back(prefix + std::to_string(i));
    }
    c.emplace_back("fsm");
    c.emplace_back("config");
    return c;
  }();
  return cols;
}

void TrajectoryLog::append(const LogRow& row) {
  if (!rows_.empty() && !(row.t > rows_.back().t)) {
    throw std::invalid_argument("trajectory log time must strictly increase");
  }
  rows_.push_back(row);
}

namespace {

std::vector<double> numeric_fields(const LogRow& r) {
  std::vector<double> v{r.t};
  auto put = [&](const auto& m) {
    for (Eigen::Index i = 0; i < m.size(); ++i) v.push_back(m(i));
  };
  put(r.p);
  put(r.v);
  v.insert(v.end(), {r.q.w(), r.q.x(), r.q.y(), r.q.z()});
  put(r.omega);
  put(r.hinge);
  put(r.wrench);
  put(r.margins);
  put(r.thrust);
  put(r.speed);
  return v;
}

}  // namespace

void TrajectoryLog::write_csv(std::ostream& os) const {
  const auto& cols = columns();
  for (std::size_t i = 0; i < cols.size(); ++i) os << (i ? "," : "") << cols[i];
  os << '\n';
  for (const auto& r : rows_) {
    for (double x : numeric_fields(r)) os << num(x) << ',';
    os << to_string(r.fsm) << ',' << to_string(r.config) << '\n';
  }
}

void TrajectoryLog::write_jsonl(std::ostream& os) const {
  const auto& cols = columns();
  for (const auto& r : rows_) {
    const auto values = numeric_fields(r);
    json j = json::object();
    for (std::size_t i = 0; i < values.size(); ++i) j[cols[i]] = values[i];
    j["fsm"] = std::string(to_string(r.fsm));
    j["config"] = std::string(to_string(r.config));
    os << j.dump() << '\n';
  }
}

void TrajectoryLog::write(std::ostream& os, LogFormat format) const {
  if (format == LogFormat::Csv) {
    write_csv(os);
  } else {
    write_jsonl(os);
  }
}

bool ScenarioResult::passed() const {
  return !verdicts.empty() &&
         std::all_of(verdicts.begin(), verdicts.end(), [](const Verdict& v) { return v.pass; });
}

void ScenarioResult::add(std::string n, bool pass, std::string detail) {
  verdicts.push_back(Verdict{std::move(n), pass, std::move(detail)});
}

HoverFeasibility hover_feasibility(const VehicleParams& params) {
  HoverFeasibility f;
  const double weight = params.hover_thrust();
  f.required_sin = -params.kappa_fwd * weight / (params.prop_spacing * std::sqrt(2.0) * params.thrust_min);
  f.angle_margin = f.required_sin <= 1.0 ? params.arm_angle - std::asin(f.required_sin)
                                         : -std::numeric_limits<double>::infinity();
  f.thrust_margin = params.thrust_max - weight / 2.0;
  if (f.angle_margin < 0.0) {
    f.binding = "arm angle >= asin(-kappa+ m g / (l sqrt2 f_min))";
  } else if (f.thrust_margin < 0.0) {
    f.binding = "f_max >= m g / 2";
  }
  f.feasible = f.binding.empty();
  return f;
}

double arm_angle_for(const VehicleParams& params, double f_des) {
  if (!(f_des < 0.0 && f_des > params.thrust_min)) {
    throw InfeasibleError("f_des must lie in (f_min, 0)");
  }
  const double s = -params.kappa_fwd * params.hover_thrust() / (params.prop_spacing * std::sqrt(2.0) * f_des);
  if (s > 1.0) throw InfeasibleError("no arm angle hovers with the requested folded-arm thrust");
  return std::asin(s);
}

DesignReport design_report(const AppConfig& config) {
  const VehicleParams& p = config.vehicle;
  DesignReport r;
  r.f_des = config.scenario.f_des;
  r.arm_angle = arm_angle_for(p, r.f_des);
  r.feasibility = hover_feasibility(p);
  for (int deg = 0; deg <= 30; ++deg) {
    VehicleParams q = p;
    q.arm_angle = deg2rad(deg);
    r.width_curve.emplace_back(deg, min_horizontal_dimension(Configuration::TwoFolded24, q));
  }
  r.agility = agility_report(p);
  r.width_unfolded = min_horizontal_dimension(Configuration::Unfolded, p);
  r.width_two_folded = min_horizontal_dimension(Configuration::TwoFolded24, p);
  r.width_four_folded = min_horizontal_dimension(Configuration::FourFolded, p);
  return r;
}

std::string to_json(const DesignReport& r) {
  json j;
  j["f_des"] = r.f_des;
  j["arm_angle_deg"] = rad2deg(r.arm_angle);
  j["hover"] = {{"required_sin", r.feasibility.required_sin},
                {"angle_margin_deg", rad2deg(r.feasibility.angle_margin)},
                {"thrust_margin", r.feasibility.thrust_margin},
                {"feasible", r.feasibility.feasible},
                {"binding", r.feasibility.binding}};
  json curve = json::array();
  for (const auto& [deg, w] : r.width_curve) curve.push_back({{"arm_angle_deg", deg}, {"width", w}});
  j["width_curve"] = curve;
  j["widths"] = {{"unfolded", r.width_unfolded},
                 {"two_folded_24", r.width_two_folded},
                 {"four_folded", r.width_four_folded}};
  const AgilityReport& a = r.agility;
  j["agility"] = {{"hover_thrust", a.hover_thrust},
                  {"yaw_max_conventional", a.yaw_max_conventional},
                  {"yaw_max_folding", a.yaw_max_folding},
                  {"yaw_reduction_pct", a.yaw_reduction_pct},
                  {"roll_max_conventional", a.roll_max_conventional},
                  {"roll_max_folding", a.roll_max_folding},
                  {"pitch_max_conventional", a.pitch_max_conventional},
                  {"pitch_max_folding", a.pitch_max_folding},
                  {"f_sigma_min_conventional", a.f_sigma_min_conventional},
                  {"f_sigma_max_conventional", a.f_sigma_max_conventional},
                  {"f_sigma_min_folding", a.f_sigma_min_folding},
                  {"f_sigma_max_folding", a.f_sigma_max_folding}};
  return j.dump(2) + "\n";
}

PerchReport perch_static(const AppConfig& config, Configuration at_rest, const std::optional<Payload>& payload) {
  const VehicleParams& p = config.vehicle;
  const double unfolded = center_of_mass(Configuration::Unfolded, p).z();
  PerchReport r;
  r.com_shift = center_of_mass(at_rest, p, payload).z() - unfolded;
  r.contact_height = config.scenario.perch_contact_height;
  r.below_contact = r.contact_height - r.com_shift;
  r.stable = r.below_contact > 0.0;
  return r;
}

void write_envelope_csv(std::ostream& os, const Envelope& env) {
  os << "set,f_sigma,tau_z\n";
  for (const Polygon* poly : {&env.a, &env.b, &env.c}) {
    for (const auto& v : poly->vertices) os << poly->label << ',' << num(v.x()) << ',' << num(v.y()) << '\n';
  }
}

ScenarioResult run_scenario(ScenarioName name, const AppConfig& cfg, const RunOptions& options) {
  cfg.validate();
  ScenarioResult res;
  res.name = name;
  switch (name) {
    case ScenarioName::HoverUnfolded:
      run_hover(res, cfg, Configuration::Unfolded, options.seed);
      break;
    case ScenarioName::HoverTwoFolded:
      run_hover(res, cfg, Configuration::TwoFolded24, options.seed);
      break;
    case ScenarioName::StepResponse:
      run_step(res, cfg);
      break;
    case ScenarioName::Tunnel:
      run_tunnel(res, cfg);
      break;
    case ScenarioName::Grasp:
      run_grasp(res, cfg);
      break;
    case ScenarioName::GapTraversal:
      run_gap(res, cfg, options.seed);
      break;
    case ScenarioName::PerchStatic: {
      const PerchReport r = perch_static(cfg);
      res.metrics["com_shift"] = r.com_shift;
      res.metrics["below_contact"] = r.below_contact;
      res.add("center of mass below the wire", r.stable, num(r.below_contact) + " m below contact");
      res.artifacts["perch.json"] = perch_json(r);
      break;
    }
    case ScenarioName::DesignReport: {
      DesignReport r;
      try {
        r = design_report(cfg);
      } catch (const InfeasibleError& e) {
        res.add("arm angle design", false, e.what());
        break;
      }
      res.metrics["arm_angle_deg"] = rad2deg(r.arm_angle);
      res.metrics["yaw_reduction_pct"] = r.agility.yaw_reduction_pct;
      res.add("two-folded hover feasible", r.feasibility.feasible, r.feasibility.binding);
      res.add("designed angle meets the minimum",
              r.arm_angle >= std::asin(std::min(1.0, r.feasibility.required_sin)));
      res.artifacts["design_report.json"] = to_json(r);
      res.artifacts["width_curve.csv"] = width_curve_csv(r);
      break;
    }
    case ScenarioName::Envelope: {
      const Envelope env = feasible_envelope(Configuration::Unfolded, cfg.vehicle);
      res.add("C inside B", vertices_inside(env.c, env.b));
      res.add("B inside A", vertices_inside(env.b, env.a));
      res.artifacts["envelope.csv"] = envelope_csv(env);
      break;
    }
  }
  return res;
}

}  // namespace hq
