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


#include <doctest.h>

#include <random>

#include "hingequad/hinge_bounds.hpp"
#include "hingequad/mixer.hpp"
#include "hingequad/multibody.hpp"
#include "oracles.hpp"

using namespace hq;

namespace {

SimState random_state(std::mt19937_64& rng, Configuration c, const Vector4d& thrust) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  SimState s = initial_state(c, thrust);
  s.q = oracle::random_attitude(rng, kPi);
  s.v = 3.0 * Vector3d(u(rng), u(rng), u(rng));
  s.omega = 5.0 * Vector3d(u(rng), u(rng), u(rng));
  s.p = Vector3d(u(rng), u(rng), u(rng));
  return s;
}

}  // namespace

TEST_CASE("locked hinges reproduce single rigid body accelerations") {
  const VehicleParams p;
  const Multibody mb(p, SimParams{});
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> f(p.thrust_min, p.thrust_max);
  for (Configuration c : kSteadyConfigurations) {
    CAPTURE(to_string(c));
    for (int k = 0; k < 25; ++k) {
      const Vector4d u(f(rng), f(rng), f(rng), f(rng));
      const SimState s = random_state(rng, c, u);
      const DynamicsSolution sol = mb.dynamics(s, u);
      const oracle::RigidAcc ref = oracle::rigid_body(p, s, u);
      CHECK((sol.lin_acc - ref.lin_acc).norm() < 1e-9);
      CHECK((sol.ang_acc - ref.ang_acc).norm() < 1e-9);
      CHECK(sol.hinge_acc.norm() == 0.0);
      CHECK(sol.residual < 1e-9);
    }
  }
}

TEST_CASE("central body obeys Newton-Euler with the hinge loads") {
  const VehicleParams p;
  const Multibody mb(p, SimParams{});
  const ArmKinematics kin(p);
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> f(p.thrust_min, p.thrust_max), a(0.0, kHalfPi), r(-3.0, 3.0);
  for (int k = 0; k < 50; ++k) {
    const Vector4d u(f(rng), f(rng), f(rng), f(rng));
    SimState s = random_state(rng, Configuration::Unfolded, u);
    for (auto& h : s.hinge) {
      h.lock = HingeLock::Free;
      h.angle = a(rng);
      h.rate = r(rng);
    }
    const DynamicsSolution sol = mb.dynamics(s, u);
    Vector3d force = Vector3d::Zero(), torque = Vector3d::Zero();
    for (int i = 0; i < kNumArms; ++i) {
      force += sol.reaction_force[i];
      torque += kin.hinge(i).cross(sol.reaction_force[i]) + sol.reaction_torque[i];
      CHECK(std::abs(hinge_axis_torque(sol, i)) < 1e-9);
    }
    const Matrix3d R = s.rotation();
    const Vector3d lin = p.body_mass * sol.lin_acc - p.body_mass * p.gravity - R * force;
    CHECK(lin.norm() < 1e-10 * std::max(1.0, force.norm()));
    const Vector3d& w = s.omega;
    const Vector3d rot = p.body_inertia * sol.ang_acc + w.cross(p.body_inertia * w) - torque;
    CHECK(rot.norm() < 1e-10 * std::max(1.0, torque.norm()));
  }
}

TEST_CASE("free fall with free hinges leaves the arms at rest relative to the body") {
  VehicleParams p;
  const Multibody mb(p, SimParams{});
  SimState s = initial_state(Configuration::Unfolded);
  for (int i = 0; i < kNumArms; ++i) {
    s.hinge[i].lock = HingeLock::Free;
    s.hinge[i].angle = deg2rad(10.0 * (i + 1));
  }
  const DynamicsSolution sol = mb.dynamics(s, Vector4d::Zero());
  CHECK((sol.lin_acc - p.gravity).norm() < 1e-12);
  CHECK(sol.ang_acc.norm() < 1e-12);
  CHECK(sol.hinge_acc.norm() < 1e-12);
}

TEST_CASE("ballistic flight") {
  const VehicleParams p;
  const SimParams sim;
  const Multibody mb(p, sim);
  SimState s = initial_state(Configuration::Unfolded);
  for (int k = 0; k < 1000; ++k) s = mb.step(s, Vector4d::Zero(), sim.dt);
  CHECK(s.v.z() == doctest::Approx(-9.81).epsilon(1e-6 / 9.81));
  CHECK(s.p.z() == doctest::Approx(-0.5 * 9.81).epsilon(1e-9));
  CHECK(std::abs(s.q.norm() - 1.0) < 1e-12);
  CHECK_THROWS(mb.step(s, Vector4d::Zero(), 3e-3));
}

TEST_CASE("momentum is conserved without thrust or gravity") {
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
  CHECK((mb.linear_momentum(s) - L0).norm() < 1e-6 * L0.norm());
  CHECK((mb.angular_momentum(s) - H0).norm() < 1e-6 * H0.norm());
  CHECK_FALSE(report.impacts.empty());
  for (const auto& e : report.impacts) CHECK(e.energy_after <= e.energy_before + 1e-12);
}

TEST_CASE("reverse thrust folds an arm onto its stop without rebound") {
  const VehicleParams p;
  const SimParams sim;
  const Multibody mb(p, sim);
  SimState s = initial_state(Configuration::Unfolded, Vector4d::Constant(-1.0));
  for (auto& m : s.motor) m.direction = -1;
  StepReport report;
  for (int k = 0; k < 600; ++k) s = mb.step(s, Vector4d::Constant(-1.0), sim.dt, &report);
  for (const auto& h : s.hinge) {
    CHECK(h.lock == HingeLock::AtNinety);
    CHECK(h.rate == 0.0);
    CHECK(h.angle == kHalfPi);
  }
  REQUIRE(report.impacts.size() >= 4);
  for (const auto& e : report.impacts) {
    CHECK(e.stop == HingeLock::AtNinety);
    CHECK(e.energy_after <= e.energy_before + 1e-12);
  }
}

TEST_CASE("locked hinge with a violating load unlocks within one step") {
  const VehicleParams p;
  const SimParams sim;
  const Multibody mb(p, sim);
  SimState s = initial_state(Configuration::Unfolded, Vector4d::Constant(-1.0));
  for (auto& m : s.motor) m.direction = -1;
  const DynamicsSolution sol = mb.dynamics(s, s.thrusts());
  for (int i = 0; i < kNumArms; ++i) CHECK(hinge_axis_torque(sol, i) > 0.0);
  StepReport report;
  s = mb.step(s, Vector4d::Constant(-1.0), sim.dt, &report);
  for (const auto& h : s.hinge) CHECK(h.lock == HingeLock::Free);
  CHECK(report.unlocks == 4);
}

TEST_CASE("hinge loads at hover match the bound signs") {
  const VehicleParams p;
  const Multibody mb(p, SimParams{});
  for (Configuration c : {Configuration::Unfolded, Configuration::TwoFolded24}) {
    CAPTURE(to_string(c));
    const Vector4d u = invert_mapping(build_mapping(c, p), Wrench(p.hover_thrust(), Vector3d::Zero()));
    const SimState s = initial_state(c, u);
    const DynamicsSolution sol = mb.dynamics(s, u);
    const Vector4d predicted = hinge_reaction_torque(c, p, Wrench(p.hover_thrust(), Vector3d::Zero()));
    for (int i = 0; i < kNumArms; ++i) {
      if (arm_folded(c, i)) {
        CHECK(hinge_axis_torque(sol, i) > 0.0);
      } else {
        CHECK(hinge_axis_torque(sol, i) < 0.0);
      }
      CHECK(hinge_axis_torque(sol, i) == doctest::Approx(predicted(i)).epsilon(1e-9));
    }
    CHECK((sol.lin_acc).norm() < 1e-9);
  }
}

TEST_CASE("motor lag and direction reversal dead time") {
  const VehicleParams p;
  SimParams sim;
  const Multibody mb(p, sim);
  SimState s = initial_state(Configuration::Unfolded, Vector4d::Zero());
  const Vector4d cmd = Vector4d::Constant(2.0);
  s = mb.step(s, cmd, sim.dt);
  const double expected = 2.0 * (1.0 - std::exp(-sim.dt / sim.motor_time_constant));
  CHECK(s.motor[0].thrust == doctest::Approx(expected).epsilon(1e-12));

  SimState r = initial_state(Configuration::Unfolded, Vector4d::Constant(1.0));
  int zero_steps = 0;
  for (int k = 0; k < 200; ++k) {
    r = mb.step(r, Vector4d::Constant(-1.0), sim.dt);
    if (r.motor[0].thrust == 0.0) ++zero_steps;
    CHECK(r.motor[0].thrust <= 1.0);
  }
  CHECK(zero_steps * sim.dt == doctest::Approx(sim.reversal_dead_time).epsilon(0.1));
  CHECK(r.motor[0].thrust < -0.9);
}

TEST_CASE("bound validity on a short Monte Carlo run") {
  const auto r = oracle::bound_validity_monte_carlo(VehicleParams{}, SimParams{}, 20, 0.5, deg2rad(1.0), 99);
  CHECK(r.accepted == 20);
  CHECK(r.departures == 0);
}
