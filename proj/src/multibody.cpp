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

#include "hingequad/multibody.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <Eigen/LU>

#include "hingequad/rotation.hpp"

namespace hq {

namespace {

// Unknown layout: a (B), omega_dot (B), q_ddot, f_r per arm, tau_r per arm.
constexpr int kAcc = 0;
constexpr int kAngAcc = 3;
constexpr int kHingeAcc = 6;
constexpr int kForce = 10;
constexpr int kTorque = 22;
// Equation layout: body translation, body rotation, per-arm translation and
// rotation, then one hinge condition per arm.
constexpr int kBodyTrans = 0;
constexpr int kBodyRot = 3;
constexpr int kArmRows = 6;
constexpr int kHingeRows = 30;

constexpr double kLockTol = 1e-12;

int force_col(int i) { return kForce + 3 * i; }
int torque_col(int i) { return kTorque + 3 * i; }
int arm_trans_row(int i) { return kArmRows + 6 * i; }
int arm_rot_row(int i) { return kArmRows + 6 * i + 3; }

struct Derivative {
  Vector3d p_dot, v_dot, omega_dot;
  Eigen::Vector4d q_dot;  // quaternion coefficients (x, y, z, w)
  Vector4d angle_dot, rate_dot;
};

SimState advance(const SimState& s, const Derivative& d, double h) {
  SimState out = s;
  out.p += h * d.p_dot;
  out.v += h * d.v_dot;
  out.omega += h * d.omega_dot;
  out.q.coeffs() += h * d.q_dot;
  for (int i = 0; i < kNumArms; ++i) {
    out.hinge[i].angle += h * d.angle_dot(i);
    out.hinge[i].rate += h * d.rate_dot(i);
  }
  return out;
}

bool limit_violated(const SimState& s) {
  for (const auto& h : s.hinge) {
    if (h.lock == HingeLock::Free && (h.angle < 0.0 || h.angle > kHalfPi)) return true;
  }
  return false;
}

}  // namespace

void SimParams::validate() const {
  if (!(dt > 0.0) || dt > 2e-3) throw ConfigError("dt must be in (0, 2 ms]");
  if (!(motor_time_constant > 0.0)) throw ConfigError("motor_time_constant must be positive");
  if (!(reversal_dead_time >= 0.0)) throw ConfigError("reversal_dead_time must be non-negative");
  if (!(restitution >= 0.0 && restitution <= 1.0)) throw ConfigError("restitution must be in [0, 1]");
  if (!(hinge_friction.array() >= 0.0).all()) throw ConfigError("hinge_friction must be non-negative");
  if (!(event_tolerance > 0.0)) throw ConfigError("event_tolerance must be positive");
}

HingeAngles SimState::hinge_angles() const {
  HingeAngles a{};
  for (int i = 0; i < kNumArms; ++i) a[i] = hinge[i].angle;
  return a;
}

Vector4d SimState::thrusts() const {
  Vector4d f;
  for (int i = 0; i < kNumArms; ++i) f(i) = motor[i].thrust;
  return f;
}

SimState initial_state(Configuration config, const Vector4d& thrust) {
  if (is_transitional(config)) throw std::invalid_argument("initial_state needs a steady configuration");
  SimState s;
  for (int i = 0; i < kNumArms; ++i) {
    const bool folded = arm_folded(config, i);
    s.hinge[i].angle = folded ? kHalfPi : 0.0;
    s.hinge[i].lock = folded ? HingeLock::AtNinety : HingeLock::AtZero;
    s.motor[i].thrust = thrust(i);
    s.motor[i].direction = folded ? -1 : 1;
  }
  return s;
}

double hinge_axis_torque(const DynamicsSolution& sol, int arm) { return sol.hinge_torque(arm); }

Multibody::Multibody(const VehicleParams& params, const SimParams& sim) : kin_(params), sim_(sim) {
  params.validate();
  sim_.validate();
}

void Multibody::assemble(const SimState& s, SystemMatrix& A) const {
  const VehicleParams& prm = kin_.params();
  const double mA = prm.arm_mass;
  A.setZero();

  A.block<3, 3>(kBodyTrans, kAcc) = prm.body_mass * Matrix3d::Identity();
  A.block<3, 3>(kBodyRot, kAngAcc) = prm.body_inertia;
  for (int i = 0; i < kNumArms; ++i) {
    const double q = s.hinge[i].angle;
    const Vector3d& y = kin_.hinge_axis(i);
    const Vector3d& r_h = kin_.hinge(i);
    const Vector3d c = kin_.arm_com(i, q);
    const Vector3d d = c - r_h;
    const Matrix3d J = kin_.arm_inertia_body(i, q);

    // Body: m_B a - sum f_r = m_B g;  J_B w' - sum (tau_r + r_H x f_r) = -w x J_B w.
    A.block<3, 3>(kBodyTrans, force_col(i)) = -Matrix3d::Identity();
    A.block<3, 3>(kBodyRot, force_col(i)) = -skew(r_h);
    A.block<3, 3>(kBodyRot, torque_col(i)) = -Matrix3d::Identity();

    // Arm translation.
    const int rt = arm_trans_row(i);
    A.block<3, 3>(rt, kAcc) = mA * Matrix3d::Identity();
    A.block<3, 3>(rt, kAngAcc) = -mA * skew(c);
    A.block<3, 1>(rt, kHingeAcc + i) = mA * y.cross(d);
    A.block<3, 3>(rt, force_col(i)) = Matrix3d::Identity();

    // Arm rotation about its COM.
    const int rr = arm_rot_row(i);
    A.block<3, 3>(rr, kAngAcc) = J;
    A.block<3, 1>(rr, kHingeAcc + i) = J * y;
    A.block<3, 3>(rr, torque_col(i)) = Matrix3d::Identity();
    A.block<3, 3>(rr, force_col(i)) = skew(Vector3d(r_h - c));

    // Hinge condition.
    if (s.hinge[i].lock == HingeLock::Free) {
      A.block<1, 3>(kHingeRows + i, torque_col(i)) = y.transpose();
    } else {
      A(kHingeRows + i, kHingeAcc + i) = 1.0;
    }
  }
}

Multibody::SystemVector Multibody::rhs(const SimState& s, const Vector4d& thrust) const {
  const VehicleParams& prm = kin_.params();
  const double mA = prm.arm_mass;
  const Matrix3d R = s.rotation();
  const Vector3d g_b = R.transpose() * prm.gravity;
  const Vector3d& w = s.omega;

  SystemVector b = SystemVector::Zero();
  b.segment<3>(kBodyTrans) = prm.body_mass * g_b;
  b.segment<3>(kBodyRot) = -w.cross(prm.body_inertia * w);
  for (int i = 0; i < kNumArms; ++i) {
    const double q = s.hinge[i].angle;
    const double qd = s.hinge[i].rate;
    const Vector3d& y = kin_.hinge_axis(i);
    const Vector3d c = kin_.arm_com(i, q);
    const Vector3d d = c - kin_.hinge(i);
    const Vector3d z = kin_.thrust_axis(i, q);
    const Vector3d p = kin_.prop_point(i, q);
    const Matrix3d J = kin_.arm_inertia_body(i, q);
    const Vector3d w_arm = w + qd * y;
    const Vector3d rel_vel = qd * y.cross(d);

    b.segment<3>(arm_trans_row(i)) =
        mA * g_b + thrust(i) * z -
        mA * (w.cross(w.cross(c)) + 2.0 * w.cross(rel_vel) + qd * y.cross(rel_vel));
    b.segment<3>(arm_rot_row(i)) = (p - c).cross(z) * thrust(i) +
                                   prop_torque(prm, thrust(i), i) * z -
                                   w_arm.cross(J * w_arm) - J * w.cross(qd * y);
    if (s.hinge[i].lock == HingeLock::Free) {
      b(kHingeRows + i) = sim_.hinge_friction(i) * qd;
    }
  }
  return b;
}

DynamicsSolution Multibody::dynamics(const SimState& s, const Vector4d& thrust) const {
  SystemMatrix A;
  assemble(s, A);
  const SystemVector b = rhs(s, thrust);
  const Eigen::PartialPivLU<SystemMatrix> lu(A);
  const SystemVector x = lu.solve(b);
  if (!x.allFinite()) throw std::runtime_error("multibody system is singular");

  DynamicsSolution sol;
  sol.lin_acc = s.rotation() * x.segment<3>(kAcc);
  sol.ang_acc = x.segment<3>(kAngAcc);
  sol.hinge_acc = x.segment<4>(kHingeAcc);
  for (int i = 0; i < kNumArms; ++i) {
    sol.reaction_force[i] = x.segment<3>(force_col(i));
    sol.reaction_torque[i] = x.segment<3>(torque_col(i));
    sol.hinge_torque(i) = sol.reaction_torque[i].dot(kin_.hinge_axis(i));
  }
  sol.residual = (A * x - b).lpNorm<Eigen::Infinity>();
  return sol;
}

SimState Multibody::integrate(const SimState& s, const Vector4d& thrust, double h) const {
  auto deriv = [&](const SimState& st) {
    SimState norm = st;
    norm.q.normalize();
    const DynamicsSolution sol = dynamics(norm, thrust);
    Derivative d;
    d.p_dot = st.v;
    d.v_dot = sol.lin_acc;
    d.omega_dot = sol.ang_acc;
    const Eigen::Quaterniond w(0.0, st.omega.x(), st.omega.y(), st.omega.z());
    d.q_dot = 0.5 * (st.q * w).coeffs();
    for (int i = 0; i < kNumArms; ++i) {
      d.angle_dot(i) = st.hinge[i].rate;
      d.rate_dot(i) = sol.hinge_acc(i);
    }
    return d;
  };
  const Derivative k1 = deriv(s);
  const Derivative k2 = deriv(advance(s, k1, 0.5 * h));
  const Derivative k3 = deriv(advance(s, k2, 0.5 * h));
  const Derivative k4 = deriv(advance(s, k3, h));
  Derivative sum;
  sum.p_dot = (k1.p_dot + 2.0 * k2.p_dot + 2.0 * k3.p_dot + k4.p_dot) / 6.0;
  sum.v_dot = (k1.v_dot + 2.0 * k2.v_dot + 2.0 * k3.v_dot + k4.v_dot) / 6.0;
  sum.omega_dot = (k1.omega_dot + 2.0 * k2.omega_dot + 2.0 * k3.omega_dot + k4.omega_dot) / 6.0;
  sum.q_dot = (k1.q_dot + 2.0 * k2.q_dot + 2.0 * k3.q_dot + k4.q_dot) / 6.0;
  sum.angle_dot = (k1.angle_dot + 2.0 * k2.angle_dot + 2.0 * k3.angle_dot + k4.angle_dot) / 6.0;
  sum.rate_dot = (k1.rate_dot + 2.0 * k2.rate_dot + 2.0 * k3.rate_dot + k4.rate_dot) / 6.0;
  SimState out = advance(s, sum, h);
  out.q.normalize();
  out.t = s.t + h;
  for (auto& hs : out.hinge) {
    if (hs.lock != HingeLock::Free) hs.rate = 0.0;
  }
  return out;
}

void Multibody::update_locks(SimState& s, const Vector4d& thrust, StepReport* report) const {
  for (int pass = 0; pass < 2 * kNumArms; ++pass) {
    const DynamicsSolution sol = dynamics(s, thrust);
    bool changed = false;
    for (int i = 0; i < kNumArms; ++i) {
      HingeState& h = s.hinge[i];
      const double axis_torque = sol.hinge_torque(i);
      if (h.lock == HingeLock::AtZero && axis_torque > kLockTol) {
        h.lock = HingeLock::Free;
        changed = true;
      } else if (h.lock == HingeLock::AtNinety && axis_torque < -kLockTol) {
        h.lock = HingeLock::Free;
        changed = true;
      } else if (h.lock == HingeLock::Free) {
        // Resting on a stop and pushed into it: engage.
        if (h.angle <= 0.0 && h.rate <= 0.0 && sol.hinge_acc(i) < 0.0) {
          h = HingeState{0.0, 0.0, HingeLock::AtZero};
          changed = true;
        } else if (h.angle >= kHalfPi && h.rate >= 0.0 && sol.hinge_acc(i) > 0.0) {
          h = HingeState{kHalfPi, 0.0, HingeLock::AtNinety};
          changed = true;
        }
        continue;
      } else {
        continue;
      }
      if (report && h.lock == HingeLock::Free) ++report->unlocks;
    }
    if (!changed) return;
  }
}

void Multibody::apply_impacts(SimState& s, StepReport* report) const {
  std::array<bool, kNumArms> hit{};
  bool any = false;
  for (int i = 0; i < kNumArms; ++i) {
    HingeState& h = s.hinge[i];
    if (h.lock != HingeLock::Free) continue;
    if (h.angle <= 0.0 && h.rate < 0.0) {
      h.angle = 0.0;
      hit[i] = any = true;
    } else if (h.angle >= kHalfPi && h.rate > 0.0) {
      h.angle = kHalfPi;
      hit[i] = any = true;
    } else {
      h.angle = std::clamp(h.angle, 0.0, kHalfPi);
    }
  }
  if (!any) return;

  const double energy_before = kinetic_energy(s);
  std::array<double, kNumArms> rate_before{};
  for (int i = 0; i < kNumArms; ++i) rate_before[i] = s.hinge[i].rate;

  // Impulsive form of the same system: velocity jumps replace accelerations,
  // finite forces drop out, impacted hinges get a prescribed rate jump.
  SimState locked = s;
  for (int i = 0; i < kNumArms; ++i) {
    if (hit[i]) locked.hinge[i].lock = HingeLock::AtZero;
  }
  SystemMatrix A;
  assemble(locked, A);
  SystemVector b = SystemVector::Zero();
  for (int i = 0; i < kNumArms; ++i) {
    if (hit[i]) b(kHingeRows + i) = -(1.0 + sim_.restitution) * s.hinge[i].rate;
  }
  const SystemVector x = A.partialPivLu().solve(b);
  s.v += s.rotation() * x.segment<3>(kAcc);
  s.omega += x.segment<3>(kAngAcc);
  for (int i = 0; i < kNumArms; ++i) {
    HingeState& h = s.hinge[i];
    if (h.lock != HingeLock::Free) continue;
    h.rate += x(kHingeAcc + i);
    if (hit[i] && std::abs(h.rate) < 1e-3) {
      h.rate = 0.0;
      h.lock = h.angle > 0.5 * kHalfPi ? HingeLock::AtNinety : HingeLock::AtZero;
    }
  }
  if (report) {
    const double energy_after = kinetic_energy(s);
    for (int i = 0; i < kNumArms; ++i) {
      if (!hit[i]) continue;
      report->impacts.push_back(ImpactEvent{
          s.t, i, s.hinge[i].angle > 0.5 * kHalfPi ? HingeLock::AtNinety : HingeLock::AtZero,
          rate_before[i], energy_before, energy_after});
    }
  }
}

void Multibody::update_motors(SimState& s, const Vector4d& command, double dt) const {
  const double decay = std::exp(-dt / sim_.motor_time_constant);
  for (int i = 0; i < kNumArms; ++i) {
    MotorState& m = s.motor[i];
    const double c = command(i);
    const int want = c > 0.0 ? 1 : (c < 0.0 ? -1 : m.direction);
    if (m.dead_time > 0.0) {
      m.thrust = 0.0;
      m.dead_time -= dt;
      if (m.dead_time <= 1e-12) {
        m.dead_time = 0.0;
        m.direction = want;
      }
      continue;
    }
    if (m.direction == 0) m.direction = want;
    const double next = c + (m.thrust - c) * decay;
    if (want != 0 && want != m.direction) {
      // Spinning down toward a reversal: reaching zero starts the dead time.
      if (m.thrust * m.direction <= 0.0 || next * m.direction <= 0.0) {
        m.thrust = 0.0;
        if (sim_.reversal_dead_time > 0.0) {
          m.dead_time = sim_.reversal_dead_time;
        } else {
          m.direction = want;
        }
        continue;
      }
    }
    m.thrust = next;
  }
}

SimState Multibody::step(const SimState& s, const Vector4d& command, double dt,
                         StepReport* report) const {
  if (!(dt > 0.0) || dt > 2e-3 + 1e-15) throw std::invalid_argument("step: dt must be in (0, 2 ms]");
  SimState cur = s;
  update_motors(cur, command, dt);
  const Vector4d thrust = cur.thrusts();
  update_locks(cur, thrust, report);

  double remaining = dt;
  for (int events = 0; remaining > 0.0; ++events) {
    SimState next = integrate(cur, thrust, remaining);
    if (!limit_violated(next) || events > 4 * kNumArms) {
      cur = next;
      break;
    }
    double lo = 0.0;
    double hi = remaining;
    while (hi - lo > sim_.event_tolerance) {
      const double mid = 0.5 * (lo + hi);
      if (limit_violated(integrate(cur, thrust, mid))) {
        hi = mid;
      } else {
        lo = mid;
      }
    }
    cur = integrate(cur, thrust, hi);
    apply_impacts(cur, report);
    update_locks(cur, thrust, report);
    remaining -= hi;
  }
  for (auto& h : cur.hinge) h.angle = std::clamp(h.angle, 0.0, kHalfPi);
  cur.t = s.t + dt;
  return cur;
}

Vector3d Multibody::system_com(const SimState& s) const {
  const VehicleParams& prm = kin_.params();
  Vector3d sum = Vector3d::Zero();
  for (int i = 0; i < kNumArms; ++i) sum += prm.arm_mass * kin_.arm_com(i, s.hinge[i].angle);
  return s.p + s.rotation() * (sum / prm.total_mass());
}

Vector3d Multibody::linear_momentum(const SimState& s) const {
  const VehicleParams& prm = kin_.params();
  const Matrix3d R = s.rotation();
  Vector3d L = prm.body_mass * s.v;
  for (int i = 0; i < kNumArms; ++i) {
    const double q = s.hinge[i].angle;
    const Vector3d c = kin_.arm_com(i, q);
    const Vector3d rel = s.hinge[i].rate * kin_.hinge_axis(i).cross(c - kin_.hinge(i));
    L += prm.arm_mass * (s.v + R * (s.omega.cross(c) + rel));
  }
  return L;
}

Vector3d Multibody::angular_momentum(const SimState& s) const {
  const VehicleParams& prm = kin_.params();
  const Matrix3d R = s.rotation();
  const Vector3d com = system_com(s);
  const Vector3d v_com = linear_momentum(s) / prm.total_mass();
  Vector3d H = R * (prm.body_inertia * s.omega) + prm.body_mass * (s.p - com).cross(s.v - v_com);
  for (int i = 0; i < kNumArms; ++i) {
    const double q = s.hinge[i].angle;
    const Vector3d c = kin_.arm_com(i, q);
    const Vector3d w_arm = s.omega + s.hinge[i].rate * kin_.hinge_axis(i);
    const Vector3d v_arm =
        s.v + R * (s.omega.cross(c) + s.hinge[i].rate * kin_.hinge_axis(i).cross(c - kin_.hinge(i)));
    const Vector3d x_arm = s.p + R * c;
    H += R * (kin_.arm_inertia_body(i, q) * w_arm) + prm.arm_mass * (x_arm - com).cross(v_arm - v_com);
  }
  return H;
}

double Multibody::kinetic_energy(const SimState& s) const {
  const VehicleParams& prm = kin_.params();
  const Vector3d v_b = s.rotation().transpose() * s.v;
  double T = 0.5 * prm.body_mass * s.v.squaredNorm() + 0.5 * s.omega.dot(prm.body_inertia * s.omega);
  for (int i = 0; i < kNumArms; ++i) {
    const double q = s.hinge[i].angle;
    const Vector3d c = kin_.arm_com(i, q);
    const Vector3d& y = kin_.hinge_axis(i);
    const Vector3d w_arm = s.omega + s.hinge[i].rate * y;
    const Vector3d v_arm = v_b + s.omega.cross(c) + s.hinge[i].rate * y.cross(c - kin_.hinge(i));
    T += 0.5 * prm.arm_mass * v_arm.squaredNorm() +
         0.5 * w_arm.dot(kin_.arm_inertia_body(i, q) * w_arm);
  }
  return T;
}

double Multibody::mechanical_energy(const SimState& s) const {
  const VehicleParams& prm = kin_.params();
  return kinetic_energy(s) - prm.total_mass() * prm.gravity.dot(system_com(s));
}

std::array<Vector3d, kNumArms> Multibody::prop_positions(const SimState& s) const {
  std::array<Vector3d, kNumArms> out;
  const Matrix3d R = s.rotation();
  for (int i = 0; i < kNumArms; ++i) out[i] = s.p + R * kin_.prop_point(i, s.hinge[i].angle);
  return out;
}

}  // namespace hq
