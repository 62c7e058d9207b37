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

#include "hingequad/hinge_bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <Eigen/Cholesky>
#include <Eigen/LU>

namespace hq {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kFeasTol = 1e-9;

ThrustVector allocate_for_bounds(const MappingMatrix& mapping, const Wrench& w) {
  if (mapping.config == Configuration::FourFolded) {
    return allocate_min_norm(mapping.torque_rows(), w.tau);
  }
  return invert_mapping(mapping, w);
}

}  // namespace

Vector4d hinge_reaction_torque(Configuration config, const VehicleParams& params, const Wrench& w) {
  const ArmKinematics kin(params);
  const HingeAngles angles = hinge_angles(config);
  const Vector3d com = center_of_mass(params, angles);
  const Matrix3d inertia = combined_inertia(params, angles);
  const MappingMatrix mapping = build_mapping(config, params, com);
  const ThrustVector u = allocate_for_bounds(mapping, w);

  // Rigid vehicle, omega = 0: proper acceleration of C and angular acceleration.
  Vector3d force = Vector3d::Zero();
  Vector3d torque = Vector3d::Zero();
  for (int i = 0; i < kNumArms; ++i) {
    const Vector3d axis = kin.thrust_axis(i, angles[i]);
    const double gamma = ArmKinematics::handedness(i) *
                         (arm_folded(config, i) ? params.kappa_rev : params.kappa_fwd);
    force += u(i) * axis;
    torque += (kin.prop_point(i, angles[i]) - com).cross(axis) * u(i) + gamma * u(i) * axis;
  }
  const Vector3d proper_acc = force / params.total_mass();
  const Vector3d ang_acc = inertia.ldlt().solve(torque);

  Vector4d out;
  for (int i = 0; i < kNumArms; ++i) {
    const double q = angles[i];
    const Vector3d axis = kin.thrust_axis(i, q);
    const Vector3d hinge = kin.hinge(i);
    const Vector3d arm = kin.arm_com(i, q);
    // Specific force felt by the arm COM relative to free fall.
    const Vector3d arm_specific = -proper_acc - ang_acc.cross(arm - com);
    const double gamma = ArmKinematics::handedness(i) *
                         (arm_folded(config, i) ? params.kappa_rev : params.kappa_fwd);
    const Vector3d moment = (kin.prop_point(i, q) - hinge).cross(axis) * u(i) +
                            gamma * u(i) * axis +
                            (arm - hinge).cross(params.arm_mass * arm_specific) -
                            kin.arm_inertia_body(i, q) * ang_acc;
    out(i) = kin.hinge_axis(i).dot(moment);
  }
  return out;
}

Vector4d margin_signs(Configuration config) {
  Vector4d s;
  for (int i = 0; i < kNumArms; ++i) s(i) = arm_folded(config, i) ? 1.0 : -1.0;
  return s;
}

BoundMatrix bound_matrix(Configuration config, const VehicleParams& params) {
  if (is_transitional(config)) {
    throw std::invalid_argument("bound_matrix needs a steady configuration");
  }
  BoundMatrix out;
  out.config = config;
  const Vector4d signs = margin_signs(config);
  const Vector4d base = hinge_reaction_torque(config, params, Wrench());
  for (int k = 0; k < 4; ++k) {
    const Vector4d probe =
        hinge_reaction_torque(config, params, Wrench(Vector4d::Unit(k))) - base;
    out.W.col(k) = signs.cwiseProduct(probe);
  }
  return out;
}

BoundMatrix unfolded_bounds_closed_form(const VehicleParams& params) {
  const ArmKinematics kin(params);
  const Vector3d com = center_of_mass(Configuration::Unfolded, params);
  const Matrix3d inv_inertia = combined_inertia(Configuration::Unfolded, params).inverse();
  const double lever = params.prop_lever();
  const double arm_x = -params.hinge_rel_arm.x();
  const double l = params.prop_spacing;
  // Sign pattern of the unfolded mixer rows (tau_x, tau_y, tau_z).
  const Eigen::Matrix<double, 3, 4> pattern =
      (Eigen::Matrix<double, 3, 4>() << -1, -1, 1, 1, -1, 1, 1, -1, -1, 1, -1, 1).finished();

  BoundMatrix out;
  out.config = Configuration::Unfolded;
  for (int i = 0; i < kNumArms; ++i) {
    const Vector3d y = kin.hinge_axis(i);
    const Vector3d a = kin.arm_com(i, 0.0) - kin.hinge(i);
    const Vector3d b = kin.arm_com(i, 0.0) - com;
    const Vector3d g = params.arm_mass * (a.dot(b) * y - y.dot(b) * a) +
                       kin.arm_inertia_body(i, 0.0) * y;
    const Vector3d inertial = inv_inertia * g;
    out.W(i, 0) = lever / 4.0 - arm_x * params.arm_mass / params.total_mass();
    out.W(i, 1) = lever * pattern(0, i) / (2.0 * l) + inertial.x();
    out.W(i, 2) = lever * pattern(1, i) / (2.0 * l) + inertial.y();
    out.W(i, 3) = lever * pattern(2, i) / (4.0 * params.kappa_fwd) + inertial.z();
  }
  return out;
}

BoundCheck check_bounds(const BoundMatrix& bounds, const Wrench& w, double slack) {
  BoundCheck out;
  out.margins = bounds.W * w.vector();
  out.pass = (out.margins.array() >= -slack).all();
  return out;
}

double aggregate_bound_unfolded(const Wrench& w, const BoundMatrix& bounds) {
  const auto row = bounds.W.row(0);
  return row(0) * w.f_sigma - std::abs(row(1) * w.tau.x()) - std::abs(row(2) * w.tau.y()) -
         std::abs(row(3) * w.tau.z());
}

bool WrenchConstraints::feasible(const Wrench& w, double tol) const {
  return (slack(w).array() >= -tol).all();
}

std::pair<double, double> WrenchConstraints::interval(const Vector4d& w0, const Vector4d& d) const {
  double lo = -kInf;
  double hi = kInf;
  for (Eigen::Index r = 0; r < G.rows(); ++r) {
    const double rate = G.row(r).dot(d);
    const double value = G.row(r).dot(w0) + h(r);
    if (std::abs(rate) < 1e-15) {
      if (value < -kFeasTol) return {kInf, -kInf};
      continue;
    }
    const double t = -value / rate;
    if (rate > 0.0) {
      lo = std::max(lo, t);
    } else {
      hi = std::min(hi, t);
    }
  }
  return {lo, hi};
}

void WrenchConstraints::append(const Eigen::RowVector4d& g, double h0, std::string label) {
  const Eigen::Index n = G.rows();
  G.conservativeResize(n + 1, Eigen::NoChange);
  h.conservativeResize(n + 1);
  G.row(n) = g;
  h(n) = h0;
  labels.push_back(std::move(label));
}

WrenchConstraints propeller_constraints(const MappingMatrix& mapping, const Vector4d& lo,
                                        const Vector4d& hi) {
  const Matrix4d inv = mapping.M.inverse();
  WrenchConstraints set;
  for (int i = 0; i < kNumArms; ++i) {
    set.append(inv.row(i), -lo(i), "f" + std::to_string(i + 1) + " >= lower limit");
    set.append(-inv.row(i), hi(i), "f" + std::to_string(i + 1) + " <= upper limit");
  }
  return set;
}

void append_bounds(WrenchConstraints& set, const BoundMatrix& bounds) {
  for (int i = 0; i < kNumArms; ++i) {
    set.append(bounds.W.row(i), 0.0, "hinge " + std::to_string(i + 1) + " bound");
  }
}

namespace {

// Picks the point of [lo, hi] closest to `preferred`.
double clamp_into(double preferred, double lo, double hi) {
  return std::min(std::max(preferred, lo), hi);
}

}  // namespace

HierarchyResult enforce_hierarchy(const Wrench& w, const BoundMatrix& bounds,
                                  const MappingMatrix& mapping, const Vector4d& lo,
                                  const Vector4d& hi) {
  if (!w.finite()) throw std::invalid_argument("enforce_hierarchy: non-finite wrench");
  WrenchConstraints set = propeller_constraints(mapping, lo, hi);
  append_bounds(set, bounds);

  HierarchyResult out;
  out.wrench = w;
  if (set.feasible(w)) return out;

  // Stage 1: shrink |tau_z|.
  Vector4d cur = w.vector();
  {
    Vector4d base = cur;
    base(3) = 0.0;
    const Vector4d dir = Vector4d::Unit(3) * cur(3);
    const auto [a, b] = set.interval(base, dir);
    const double s_lo = std::max(a, 0.0);
    const double s_hi = std::min(b, 1.0);
    cur = base;
    if (s_lo <= s_hi) cur += s_hi * dir;
    out.yaw_reduced = true;
  }
  if (set.feasible(Wrench(cur))) {
    out.wrench = Wrench(cur);
    return out;
  }

  // Stage 2: nearest thrust in [0, maximum total thrust] realising the torque.
  double f_ceiling = 0.0;
  for (int i = 0; i < kNumArms; ++i) {
    f_ceiling += std::max(mapping.M(0, i) * hi(i), mapping.M(0, i) * lo(i));
  }
  {
    const auto [a, b] = set.interval(cur, Vector4d::Unit(0));
    const double t_lo = std::max(a, -cur(0));
    const double t_hi = std::min(b, f_ceiling - cur(0));
    if (t_lo <= t_hi) {
      cur(0) += clamp_into(0.0, t_lo, t_hi);
      out.thrust_adjusted = true;
      out.wrench = Wrench(cur);
      return out;
    }
  }

  // Stage 3: no thrust realises (tau_x, tau_y). Maximise the common scale s over
  // (f_sigma, s) jointly, then take the thrust nearest the command at that scale.
  out.roll_pitch_scaled = true;
  const Vector4d rp(0.0, cur(1), cur(2), 0.0);
  const Eigen::Index n = set.G.rows();
  Eigen::Matrix<double, Eigen::Dynamic, 2> G(n + 4, 2);
  Eigen::VectorXd h(n + 4);
  G.topRows(n).col(0) = set.G.col(0);
  G.topRows(n).col(1) = set.G * rp;
  h.head(n) = set.h + set.G.col(3) * cur(3);
  G.bottomRows(4) << 1.0, 0.0, -1.0, 0.0, 0.0, 1.0, 0.0, -1.0;
  h.tail(4) << 0.0, f_ceiling, 0.0, 1.0;
  const auto pts = polygon_vertices(G, h);
  if (pts.empty()) {
    const Eigen::VectorXd slack = set.slack(Wrench(Vector4d(cur(0), 0.0, 0.0, cur(3))));
    Eigen::Index worst = 0;
    slack.minCoeff(&worst);
    std::ostringstream msg;
    msg << "no feasible thrust at zero roll/pitch torque for " << to_string(mapping.config)
        << "; binding constraint: " << set.labels[static_cast<std::size_t>(worst)]
        << " (slack " << slack(worst) << ")";
    throw InfeasibleError(msg.str());
  }
  double s_best = 0.0;
  for (const auto& p : pts) s_best = std::max(s_best, p.y());
  Vector4d base = cur;
  base.segment<2>(1) = s_best * cur.segment<2>(1);
  const auto [a, b] = set.interval(base, Vector4d::Unit(0));
  const double t_lo = std::max(a, -base(0));
  const double t_hi = std::min(b, f_ceiling - base(0));
  // The optimum lies on the boundary; tolerate round-off in the interval.
  base(0) += t_lo <= t_hi ? clamp_into(0.0, t_lo, t_hi) : 0.5 * (t_lo + t_hi);
  out.thrust_adjusted = true;
  out.wrench = Wrench(base);
  return out;
}

HierarchyResult enforce_hierarchy(const Wrench& w, const BoundMatrix& bounds,
                                  const MappingMatrix& mapping, double f_min, double f_max) {
  return enforce_hierarchy(w, bounds, mapping, Vector4d::Constant(f_min),
                           Vector4d::Constant(f_max));
}

bool Polygon::contains(const Eigen::Vector2d& p, double tol) const {
  const std::size_t n = vertices.size();
  if (n == 0) return false;
  if (n == 1) return (p - vertices[0]).norm() <= tol;
  if (n == 2) {
    const Eigen::Vector2d e = vertices[1] - vertices[0];
    const Eigen::Vector2d r = p - vertices[0];
    const double t = std::clamp(r.dot(e) / e.squaredNorm(), 0.0, 1.0);
    return (r - t * e).norm() <= tol;
  }
  for (std::size_t k = 0; k < n; ++k) {
    const Eigen::Vector2d e = vertices[(k + 1) % n] - vertices[k];
    const Eigen::Vector2d r = p - vertices[k];
    const double cross = e.x() * r.y() - e.y() * r.x();
    if (cross < -tol * std::max(1.0, e.norm())) return false;
  }
  return true;
}

std::vector<Eigen::Vector2d> polygon_vertices(const Eigen::Matrix<double, Eigen::Dynamic, 2>& G,
                                              const Eigen::VectorXd& h) {
  std::vector<Eigen::Vector2d> pts;
  const Eigen::Index n = G.rows();
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      Eigen::Matrix2d A;
      A.row(0) = G.row(i);
      A.row(1) = G.row(j);
      const double det = A.determinant();
      if (std::abs(det) < 1e-14 * std::max(1.0, A.norm() * A.norm())) continue;
      const Eigen::Vector2d p = A.inverse() * Eigen::Vector2d(-h(i), -h(j));
      const Eigen::VectorXd s = G * p + h;
      const double scale = std::max(1.0, p.norm());
      if ((s.array() >= -1e-9 * scale).all()) {
        bool duplicate = false;
        for (const auto& q : pts) duplicate = duplicate || (q - p).norm() < 1e-9 * scale;
        if (!duplicate) pts.push_back(p);
      }
    }
  }
  if (pts.size() < 3) return pts;
  Eigen::Vector2d centroid = Eigen::Vector2d::Zero();
  for (const auto& p : pts) centroid += p;
  centroid /= static_cast<double>(pts.size());
  std::sort(pts.begin(), pts.end(), [&](const Eigen::Vector2d& l, const Eigen::Vector2d& r) {
    return std::atan2(l.y() - centroid.y(), l.x() - centroid.x()) <
           std::atan2(r.y() - centroid.y(), r.x() - centroid.x());
  });
  return pts;
}

namespace {

Polygon slice(const WrenchConstraints& set, const Vector3d& tau_fixed, std::string label) {
  // Restrict to the (f_sigma, tau_z) plane at fixed (tau_x, tau_y).
  Eigen::Matrix<double, Eigen::Dynamic, 2> G(set.G.rows(), 2);
  G.col(0) = set.G.col(0);
  G.col(1) = set.G.col(3);
  const Eigen::VectorXd h =
      set.h + set.G.col(1) * tau_fixed.x() + set.G.col(2) * tau_fixed.y();
  return Polygon{std::move(label), polygon_vertices(G, h)};
}

}  // namespace

Envelope feasible_envelope(Configuration config, const VehicleParams& params,
                           const Eigen::Vector2d& tau_xy) {
  Envelope env;
  env.config = config;
  env.tau_fixed = Vector3d(tau_xy.x(), tau_xy.y(), 0.0);
  const MappingMatrix mapping = build_mapping(config, params);
  const BoundMatrix bounds = bound_matrix(config, params);
  env.set_a = propeller_constraints(mapping, Vector4d::Constant(params.thrust_min),
                                    Vector4d::Constant(params.thrust_max));
  env.set_b = propeller_constraints(mapping, Vector4d::Zero(), Vector4d::Constant(params.thrust_max));
  env.set_c = env.set_a;
  append_bounds(env.set_c, bounds);
  env.a = slice(env.set_a, env.tau_fixed, "A");
  env.b = slice(env.set_b, env.tau_fixed, "B");
  env.c = slice(env.set_c, env.tau_fixed, "C");
  return env;
}

AgilityReport agility_report(const VehicleParams& params) {
  const Envelope env = feasible_envelope(Configuration::Unfolded, params);
  AgilityReport r;
  r.hover_thrust = params.hover_thrust();
  const Vector4d hover(r.hover_thrust, 0.0, 0.0, 0.0);
  auto upper = [&](const WrenchConstraints& set, int axis) {
    return set.interval(hover, Vector4d::Unit(axis)).second;
  };
  r.yaw_max_conventional = upper(env.set_b, 3);
  r.yaw_max_folding = upper(env.set_c, 3);
  r.yaw_reduction_pct = 100.0 * (1.0 - r.yaw_max_folding / r.yaw_max_conventional);
  r.roll_max_conventional = upper(env.set_b, 1);
  r.roll_max_folding = upper(env.set_c, 1);
  r.pitch_max_conventional = upper(env.set_b, 2);
  r.pitch_max_folding = upper(env.set_c, 2);
  const auto fb = env.set_b.interval(Vector4d::Zero(), Vector4d::Unit(0));
  const auto fc = env.set_c.interval(Vector4d::Zero(), Vector4d::Unit(0));
  r.f_sigma_min_conventional = fb.first;
  r.f_sigma_max_conventional = fb.second;
  r.f_sigma_min_folding = fc.first;
  r.f_sigma_max_folding = fc.second;
  return r;
}

}  // namespace hq
