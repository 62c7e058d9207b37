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


// Acceptance checks. Prints one PASS/FAIL line per criterion; with arguments,
// runs only the listed criterion numbers. Exit status is nonzero if any
// selected criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "hingequad/care.hpp"
#include "hingequad/config.hpp"
#include "hingequad/hinge_bounds.hpp"
#include "hingequad/lqr_attitude.hpp"
#include "hingequad/mixer.hpp"
#include "hingequad/multibody.hpp"
#include "hingequad/scenario.hpp"
#include "oracles.hpp"

using namespace hq;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  int id;
  const char* title;
  double time_limit;  // s
  std::function<Outcome()> run;
};

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0, double d = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

bool within(double x, double target, double tol) { return std::abs(x - target) <= tol; }

double tau_z_max_at(const Polygon& poly, double f) {
  double hi = -1e300;
  const auto& v = poly.vertices;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const Eigen::Vector2d a = v[i], b = v[(i + 1) % v.size()];
    if ((a.x() - f) * (b.x() - f) > 0.0) continue;
    if (std::abs(b.x() - a.x()) < 1e-15) {
      hi = std::max({hi, a.y(), b.y()});
    } else {
      hi = std::max(hi, a.y() + (f - a.x()) / (b.x() - a.x()) * (b.y() - a.y()));
    }
  }
  return hi;
}

Outcome c01() {
  const BoundMatrix W = bound_matrix(Configuration::Unfolded, VehicleParams{});
  double worst = 0.0;
  for (int i = 0; i < 4; ++i) worst = std::max(worst, std::abs(W.W(i, 0) - 0.0144));
  return {worst <= 2e-4, fmt("c_f = %.6f m (0.0144 +- 2e-4)", W.W(0, 0))};
}

Outcome c02() {
  const VehicleParams p;
  const BoundMatrix W = bound_matrix(Configuration::Unfolded, p);
  bool ok = true;
  for (int i = 0; i < 4; ++i) ok = ok && std::abs(W.W(i, 3)) >= 1.29 && std::abs(W.W(i, 3)) <= 1.31;
  const double lead = p.prop_lever() / (4.0 * p.kappa_fwd);
  ok = ok && within(lead, 1.308, 1e-3);
  return {ok, fmt("|c_z| = %.4f in [1.29, 1.31]; x_PH/(4 kappa+) = %.4f (1.308 +- 1e-3)", std::abs(W.W(0, 3)), lead)};
}

Outcome c03() {
  const VehicleParams p;
  const Envelope env = feasible_envelope(Configuration::Unfolded, p);
  const double mg = p.hover_thrust();
  const double b = tau_z_max_at(env.b, mg), c = tau_z_max_at(env.c, mg);
  const double pct = 100.0 * (1.0 - c / b);
  const AgilityReport r = agility_report(p);
  return {within(pct, 36.0, 1.0) && within(r.yaw_reduction_pct, pct, 1e-6),
          fmt("yaw reduction %.2f %% (36 +- 1); set B %.5f, set C %.5f N m", pct, b, c)};
}

Outcome c04() {
  const double deg = rad2deg(arm_angle_for(VehicleParams{}, -1.5));
  return {within(deg, 11.9, 0.1), fmt("arm angle %.3f deg from f_des = -1.5 N (11.9 +- 0.1)", deg)};
}

Outcome c05() {
  const VehicleParams p;
  const MappingMatrix M = build_mapping(Configuration::TwoFolded24, p);
  const Wrench hover(p.hover_thrust(), Vector3d::Zero());
  const Vector4d u = invert_mapping(M, hover);
  const Vector4d ref(3.06, -1.50, 3.06, -1.50);
  const bool close = (u - ref).cwiseAbs().maxCoeff() <= 0.02;
  bool limits = true;
  for (int i = 0; i < 4; ++i) {
    limits = limits && (arm_folded(Configuration::TwoFolded24, i) ? (u(i) >= p.thrust_min && u(i) <= 0.0)
                                                                  : (u(i) >= 0.0 && u(i) <= p.thrust_max));
  }
  const BoundCheck bc = check_bounds(bound_matrix(Configuration::TwoFolded24, p), hover, 0.0);
  return {close && limits && bc.pass,
          fmt("u = (%.4f, %.4f, %.4f, %.4f) N", u(0), u(1), u(2), u(3)) +
              fmt("; min W_2f margin %.4f N m", bc.margins.minCoeff())};
}

Outcome c06() {
  const VehicleParams p;
  const Envelope env = feasible_envelope(Configuration::Unfolded, p);
  int outside = 0;
  for (const auto& v : env.c.vertices) outside += !env.b.contains(v, 1e-9);
  for (const auto& v : env.b.vertices) outside += !env.a.contains(v, 1e-9);
  const double b = tau_z_max_at(env.b, p.hover_thrust());
  return {outside == 0 && within(b, 0.1053, 1e-3),
          fmt("%.0f vertices outside; set B max tau_z at hover %.5f N m (0.1053 +- 1e-3)", outside, b)};
}

Outcome c07() {
  const VehicleParams p;
  const Multibody mb(p, SimParams{});
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> f(p.thrust_min, p.thrust_max), u(-1.0, 1.0);
  double worst = 0.0;
  for (int k = 0; k < 100; ++k) {
    const Configuration c = kSteadyConfigurations[k % 4];
    const Vector4d thrust(f(rng), f(rng), f(rng), f(rng));
    SimState s = initial_state(c, thrust);
    s.q = oracle::random_attitude(rng, kPi);
    s.v = 3.0 * Vector3d(u(rng), u(rng), u(rng));
    s.omega = 5.0 * Vector3d(u(rng), u(rng), u(rng));
    const DynamicsSolution sol = mb.dynamics(s, thrust);
    const oracle::RigidAcc ref = oracle::rigid_body(p, s, thrust);
    worst = std::max({worst, (sol.lin_acc - ref.lin_acc).norm(), (sol.ang_acc - ref.ang_acc).norm()});
  }
  return {worst <= 1e-9, fmt("max acceleration mismatch %.2e over 100 states (<= 1e-9)", worst)};
}

Outcome c08() {
  VehicleParams p;
  p.gravity.setZero();
  const SimParams sim;
  const Multibody mb(p, sim);
  SimState s = initial_state(Configuration::Unfolded);
  s.v = Vector3d(0.3, -0.2, 0.1);
  s.omega = Vector3d(1.0, -2.0, 3.0);
  const double rates[4] = {2.0, -1.0, 4.0, 0.5};
  for (int i = 0; i < kNumArms; ++i) {
    s.hinge[i].lock = HingeLock::Free;
    s.hinge[i].angle = deg2rad(20.0 * (i + 1));
    s.hinge[i].rate = rates[i];
  }
  const Vector3d L0 = mb.linear_momentum(s), H0 = mb.angular_momentum(s);
  StepReport report;
  for (int k = 0; k < 1000; ++k) s = mb.step(s, Vector4d::Zero(), sim.dt, &report);
  const double dl = (mb.linear_momentum(s) - L0).norm() / L0.norm();
  const double dh = (mb.angular_momentum(s) - H0).norm() / H0.norm();

  // Folding all arms under reverse thrust with gravity on adds more impacts.
  const VehicleParams g;
  const Multibody mg(g, sim);
  SimState f = initial_state(Configuration::Unfolded, Vector4d::Constant(-1.0));
  for (auto& m : f.motor) m.direction = -1;
  for (int k = 0; k < 600; ++k) f = mg.step(f, Vector4d::Constant(-1.0), sim.dt, &report);

  double gain = -1e300;
  for (const auto& e : report.impacts) gain = std::max(gain, e.energy_after - e.energy_before);
  const bool ok = dl < 1e-6 && dh < 1e-6 && !report.impacts.empty() && gain <= 0.0;
  return {ok, fmt("relative drift linear %.1e, angular %.1e; %.0f impacts, max energy change %.2e J", dl, dh,
                  static_cast<double>(report.impacts.size()), gain)};
}

Outcome c09() {
  const auto r = oracle::bound_validity_monte_carlo(VehicleParams{}, SimParams{}, 200, 0.5, deg2rad(1.0), 2026);
  return {r.accepted == 200 && r.departures == 0,
          fmt("%.0f wrenches, %.0f departures > 1 deg, largest hinge angle %.2e deg", r.accepted, r.departures,
              rad2deg(r.max_departure)) +
              fmt("; peak body rate %.1f rad/s, smallest margin %.1e N m", r.max_rate, r.min_margin)};
}

Outcome c10() {
  const AppConfig cfg;
  std::string detail;
  bool ok = true;
  for (ScenarioName n : {ScenarioName::HoverUnfolded, ScenarioName::HoverTwoFolded}) {
    const ScenarioResult r = run_scenario(n, cfg);
    const double settle = r.metrics.at("settle_time");
    const double err = r.metrics.at("final_error");
    ok = ok && r.passed() && settle <= 5.0 && err < 0.01;
    detail += std::string(to_string(n)) + fmt(": settled at %.2f s, final error %.4f m; ", settle, err);
  }
  detail.resize(detail.size() - 2);
  return {ok, detail};
}

Outcome c11() {
  const ScenarioResult r = run_scenario(ScenarioName::GapTraversal, AppConfig{});
  const double fold = r.metrics.at("fold_duration");
  const double att = r.metrics.at("attitude_error_at_unfold_deg");
  const bool ok = r.passed() && fold >= 0.19 && fold <= 0.57 && att < 10.0;
  return {ok, fmt("fold %.3f s (0.19-0.57), attitude error at unfold %.2f deg (< 10)", fold, att) +
                  (r.passed() ? "" : "; scenario verdicts failed")};
}

Outcome c12() {
  const PerchReport r = perch_static(AppConfig{});
  const bool ok = within(-r.com_shift, 0.04, 0.01) && within(r.below_contact, 0.02, 0.01) && r.stable;
  return {ok, fmt("COM down %.2f cm (4 +- 1), %.2f cm below contact (2 +- 1)", -100.0 * r.com_shift,
                  100.0 * r.below_contact)};
}

Outcome c13() {
  Eigen::Matrix2d A;
  A << 0, 1, 0, 0;
  const auto s = solve_care<double, 2, 1>(A, Eigen::Vector2d(0, 1), Eigen::Matrix2d::Identity(),
                                          Eigen::Matrix<double, 1, 1>::Identity());
  const double dk = std::max(std::abs(s.K(0) - 1.0), std::abs(s.K(1) - std::sqrt(3.0)));
  const LqrWeights w;
  double worst = 0.0;
  bool stable = true;
  for (Configuration c : kSteadyConfigurations) {
    const GainMatrix g = synthesize_gains(c, VehicleParams{}, w);
    worst = std::max(worst, g.residual / w.q.maxCoeff());
    for (int i = 0; i < 6; ++i) stable = stable && g.poles(i).real() < -1e-9;
  }
  return {dk <= 1e-9 && worst <= 1e-9 && stable,
          fmt("|K - (1, sqrt 3)| = %.1e; worst residual / |Q| = %.1e over 4 configurations", dk, worst)};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> all = {
      {1, "unfolded c_f", 1.0, c01},
      {2, "unfolded c_z", 1.0, c02},
      {3, "yaw agility reduction", 1.0, c03},
      {4, "arm angle design", 1.0, c04},
      {5, "two-folded hover allocation", 1.0, c05},
      {6, "envelope inclusion", 1.0, c06},
      {7, "rigid-limit oracle", 10.0, c07},
      {8, "conservation and impacts", 10.0, c08},
      {9, "bound validity Monte Carlo", 60.0, c09},
      {10, "closed-loop hover", 30.0, c10},
      {11, "gap traversal", 30.0, c11},
      {12, "perch static", 1.0, c12},
      {13, "Riccati solver", 1.0, c13},
  };
  std::vector<int> selected;
  for (int i = 1; i < argc; ++i) selected.push_back(std::atoi(argv[i]));

  int failures = 0;
  for (const auto& c : all) {
    if (!selected.empty() && std::find(selected.begin(), selected.end(), c.id) == selected.end()) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = secs < c.time_limit;
    const bool pass = o.pass && in_time;
    failures += !pass;
    std::printf("%s %2d %-30s %s [%.2f s%s]\n", pass ? "PASS" : "FAIL", c.id, c.title, o.detail.c_str(), secs,
                in_time ? "" : ", over time limit");
  }
  return failures == 0 ? 0 : 1;
}
