#include "slipstep/pd.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include <nlohmann/json.hpp>

#include "slipstep/errors.hpp"

namespace slipstep::pd {

using nlohmann::json;
using skeleton::Pose;
using skeleton::Skeleton;

void PdGains::validate() const {
  if (!(kp > 0.0)) throw ConfigError("pd gains: kp must be > 0");
  if (!(kd >= 0.0)) throw ConfigError("pd gains: kd must be >= 0");
  if (!(torque_limit_Nm > 0.0)) throw ConfigError("pd gains: torque_limit must be > 0");
}

double joint_torque(const JointState& current, const JointState& desired, const PdGains& gains) {
  const double err = gains.kp * (current.angle - desired.angle) + gains.kd * (current.velocity - desired.velocity);
  return std::clamp(-err, -gains.torque_limit_Nm, gains.torque_limit_Nm);
}

PdGains inertia_scale(const PdGains& gains, double inertia, double reference_inertia) {
  if (!(inertia > 0.0) || !(reference_inertia > 0.0)) throw DomainError("inertia_scale: inertia must be > 0");
  const double s = inertia / reference_inertia;
  return {gains.kp * s, gains.kd * s, gains.torque_limit_Nm};
}

// ---------------------------------------------------------------------------
// Gain tables

GainTable GainTable::defaults(const Skeleton& skel) {
  std::map<std::string, PdGains> m;
  for (const auto& j : skel.joints()) {
    if (j.dofs.empty()) continue;
    const auto starts = [&](const char* p) { return j.name.rfind(p, 0) == 0; };
    PdGains g;
    if (starts("hip") || starts("knee")) {
      g = {300.0, 30.0};
    } else if (starts("ankle") || starts("toe")) {
      g = {100.0, 10.0};
    } else if (starts("spine")) {
      g = {200.0, 20.0};
    } else if (starts("neck")) {
      g = {50.0, 5.0};
    } else {
      g = {150.0, 15.0};
    }
    m[j.name] = g;
  }
  return GainTable(std::move(m));
}

const PdGains& GainTable::for_joint(const std::string& name) const {
  auto it = per_joint_.find(name);
  if (it == per_joint_.end()) throw ConfigError("gain table: no entry for joint '" + name + "'");
  return it->second;
}

void GainTable::check_covers(const Skeleton& skel) const {
  for (const auto& j : skel.joints()) {
    if (!j.dofs.empty()) for_joint(j.name).validate();
  }
}

json GainTable::to_json() const {
  json joints = json::object();
  double limit = kDefaultTorqueLimitNm;
  for (const auto& [name, g] : per_joint_) {
    joints[name] = {{"kp", g.kp}, {"kd", g.kd}};
    limit = g.torque_limit_Nm;
  }
  return {{"schema_version", kGainSchemaVersion}, {"torque_limit_Nm", limit}, {"joints", joints}};
}

GainTable GainTable::from_json(const json& j) {
  try {
    const int version = j.at("schema_version").get<int>();
    if (version != kGainSchemaVersion) {
      throw VersionError("gain table: schema_version " + std::to_string(version) + " unsupported");
    }
    const double limit = j.value("torque_limit_Nm", kDefaultTorqueLimitNm);
    std::map<std::string, PdGains> m;
    for (const auto& [name, g] : j.at("joints").items()) {
      PdGains gains{g.at("kp").get<double>(), g.at("kd").get<double>(), limit};
      gains.validate();
      m[name] = gains;
    }
    return GainTable(std::move(m));
  } catch (const json::exception& e) {
    throw ConfigError(std::string("gain table: ") + e.what());
  }
}

GainTable GainTable::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("gain table: cannot open '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError("gain table: '" + path + "': " + e.what());
  }
  return from_json(j);
}

// ---------------------------------------------------------------------------
// Inertia

double dof_axis_inertia(const Pose& pose, const std::vector<skeleton::JointTransform>& fk, const Skeleton& skel,
                        int flat_dof) {
  const int j = skel.dof_joint(flat_dof);
  const auto& joint = skel.joint(j);
  const int local = flat_dof - skel.dof_offset(j);

  Mat3 R = skeleton::parent_frame_rotation(fk, skel, j);
  for (int k = 0; k < local; ++k) {
    R = R * Eigen::AngleAxisd(pose.joint_angles[static_cast<std::size_t>(skel.dof_offset(j) + k)],
                              joint.dofs[static_cast<std::size_t>(k)].axis)
                .toRotationMatrix();
  }
  const Vec3 axis = R * joint.dofs[static_cast<std::size_t>(local)].axis;
  const Vec3 origin = fk[static_cast<std::size_t>(j)].position;

  const auto& joints = skel.joints();
  std::vector<char> in_subtree(joints.size(), 0);
  double inertia = 0.0;
  for (std::size_t i = static_cast<std::size_t>(j); i < joints.size(); ++i) {
    const bool inside = static_cast<int>(i) == j ||
                        (joints[i].parent >= 0 && in_subtree[static_cast<std::size_t>(joints[i].parent)]);
    if (!inside) continue;
    in_subtree[i] = 1;
    const auto& seg = joints[i].segment;
    if (seg.mass_kg <= 0.0) continue;
    const Vec3 b = seg.box;
    const Vec3 diag = seg.mass_kg / 12.0 *
                      Vec3(b.y() * b.y() + b.z() * b.z(), b.x() * b.x() + b.z() * b.z(), b.x() * b.x() + b.y() * b.y());
    const Mat3& Ri = fk[i].rotation;
    const Mat3 Iw = Ri * diag.asDiagonal() * Ri.transpose();
    const Vec3 r = fk[i].position + Ri * seg.center - origin;
    const double along = r.dot(axis);
    inertia += axis.dot(Iw * axis) + seg.mass_kg * std::max(0.0, r.squaredNorm() - along * along);
  }
  return inertia;
}

// ---------------------------------------------------------------------------
// Servo integration

ServoResult servo_step(const JointState& state, const JointState& desired, const PdGains& gains, double inertia,
                       double external_torque_Nm, double dt) {
  if (!(inertia > 0.0)) throw DomainError("servo_step: inertia must be > 0");
  if (!(dt > 0.0)) throw DomainError("servo_step: dt must be > 0");
  ServoResult r;
  // Backward Euler: I(v' - v)/dt = -kp(q + dt v' - qd) - kd(v' - vd) + tau_ext
  const double denom = inertia + dt * gains.kd + dt * dt * gains.kp;
  const double v_next = (inertia * state.velocity +
                         dt * (-gains.kp * (state.angle - desired.angle) + gains.kd * desired.velocity + external_torque_Nm)) /
                        denom;
  double pd_torque = inertia * (v_next - state.velocity) / dt - external_torque_Nm;
  if (std::abs(pd_torque) <= gains.torque_limit_Nm) {
    r.next = {state.angle + dt * v_next, v_next};
    r.torque_Nm = pd_torque;
    return r;
  }
  pd_torque = std::clamp(pd_torque, -gains.torque_limit_Nm, gains.torque_limit_Nm);
  const double v = state.velocity + dt * (pd_torque + external_torque_Nm) / inertia;
  r.next = {state.angle + dt * v, v};
  r.torque_Nm = pd_torque;
  r.clamped = true;
  return r;
}

SingleJointRig::SingleJointRig(double mass_kg, double length_m, PdGains gains, bool gravity, double gravity_mps2)
    : mass_(mass_kg), length_(length_m), gains_(gains), gravity_(gravity), g_(gravity_mps2) {
  if (!(mass_kg > 0.0) || !(length_m > 0.0)) throw DomainError("SingleJointRig: mass and length must be > 0");
  gains_.validate();
}

double SingleJointRig::gravity_torque(double angle) const {
  return gravity_ ? -mass_ * g_ * length_ * std::sin(angle) : 0.0;
}

ServoResult SingleJointRig::step(const JointState& desired, double dt) {
  const ServoResult r = servo_step(state_, desired, gains_, inertia(), gravity_torque(state_.angle), dt);
  state_ = r.next;
  return r;
}

// ---------------------------------------------------------------------------
// Bank

TorqueStats summarize_torques(const std::vector<double>& torques, double limit_Nm) {
  TorqueStats s;
  if (torques.empty()) return s;
  double sum = 0.0;
  for (std::size_t i = 0; i < torques.size(); ++i) {
    const double a = std::abs(torques[i]);
    sum += a;
    if (a > s.max_abs_Nm || s.max_dof < 0) {
      s.max_abs_Nm = a;
      s.max_dof = static_cast<int>(i);
    }
    if (a >= limit_Nm - 1e-9) ++s.clamped_count;
  }
  s.mean_abs_Nm = sum / static_cast<double>(torques.size());
  return s;
}

ServoBank::ServoBank(const Skeleton& skel, GainTable gains) : skel_(skel), gains_(std::move(gains)) {
  gains_.check_covers(skel_);
  const int n = skel_.internal_dof_count();
  dof_gains_.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) dof_gains_[static_cast<std::size_t>(i)] = gains_.for_joint(skel_.joint(skel_.dof_joint(i)).name);

  const Pose rest = skel_.neutral_pose();
  const auto fk = skeleton::forward_kinematics(rest, skel_);
  reference_inertia_.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    reference_inertia_[static_cast<std::size_t>(i)] = dof_axis_inertia(rest, fk, skel_, i);
    if (!(reference_inertia_[static_cast<std::size_t>(i)] > 0.0)) {
      throw ConfigError("servo bank: DOF " + skel_.dof_label(i) + " has no inertia (segment mass missing)");
    }
  }
  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return reference_inertia_[static_cast<std::size_t>(a)] > reference_inertia_[static_cast<std::size_t>(b)];
  });
  live_dofs_.assign(order.begin(), order.begin() + std::min(3, n));
  std::sort(live_dofs_.begin(), live_dofs_.end());
  reset(rest);
}

void ServoBank::reset(const Pose& pose) {
  const auto n = static_cast<std::size_t>(skel_.internal_dof_count());
  if (pose.joint_angles.size() != n) throw ConfigError("servo bank: pose does not match skeleton");
  states_.assign(n, {});
  for (std::size_t i = 0; i < n; ++i) states_[i].angle = pose.joint_angles[i];
  previous_desired_ = pose.joint_angles;
  torques_.assign(n, 0.0);
  primed_ = false;
}

TorqueStats ServoBank::track(const Pose& desired, double dt) {
  const auto n = static_cast<std::size_t>(skel_.internal_dof_count());
  if (desired.joint_angles.size() != n) throw ConfigError("servo bank: pose does not match skeleton");
  std::vector<double> inertia = reference_inertia_;
  if (!live_dofs_.empty()) {
    const auto fk = skeleton::forward_kinematics(desired, skel_);
    for (int d : live_dofs_) inertia[static_cast<std::size_t>(d)] = dof_axis_inertia(desired, fk, skel_, d);
  }
  for (std::size_t i = 0; i < n; ++i) {
    const double qd = desired.joint_angles[i];
    const double vd = primed_ ? (qd - previous_desired_[i]) / dt : 0.0;
    const PdGains g = inertia_scale(dof_gains_[i], inertia[i], reference_inertia_[i]);
    const ServoResult r = servo_step(states_[i], {qd, vd}, g, inertia[i], 0.0, dt);
    states_[i] = r.next;
    torques_[i] = r.torque_Nm;
  }
  previous_desired_ = desired.joint_angles;
  primed_ = true;
  return summarize_torques(torques_, dof_gains_.empty() ? kDefaultTorqueLimitNm : dof_gains_.front().torque_limit_Nm);
}

json ServoBank::to_json() const {
  json angles = json::array(), velocities = json::array();
  for (const auto& s : states_) {
    angles.push_back(s.angle);
    velocities.push_back(s.velocity);
  }
  return {{"angles", angles}, {"velocities", velocities}, {"previous_desired", previous_desired_},
          {"torques", torques_}, {"primed", primed_}};
}

void ServoBank::from_json(const json& j) {
  const auto angles = j.at("angles").get<std::vector<double>>();
  const auto velocities = j.at("velocities").get<std::vector<double>>();
  const auto n = static_cast<std::size_t>(skel_.internal_dof_count());
  if (angles.size() != n || velocities.size() != n) throw ConfigError("servo bank snapshot: DOF count mismatch");
  for (std::size_t i = 0; i < n; ++i) states_[i] = {angles[i], velocities[i]};
  previous_desired_ = j.at("previous_desired").get<std::vector<double>>();
  torques_ = j.at("torques").get<std::vector<double>>();
  primed_ = j.at("primed").get<bool>();
}

TrackResult track_pose(const Pose& current, const std::vector<double>& current_velocity, const Pose& desired,
                       const std::vector<double>& desired_velocity, const Skeleton& skel, const GainTable& gains,
                       const std::vector<double>& reference_inertia) {
  const auto n = static_cast<std::size_t>(skel.internal_dof_count());
  if (current.joint_angles.size() != n || desired.joint_angles.size() != n || current_velocity.size() != n ||
      desired_velocity.size() != n) {
    throw ConfigError("track_pose: poses do not match the skeleton");
  }
  if (!reference_inertia.empty() && reference_inertia.size() != n) {
    throw ConfigError("track_pose: reference inertia size mismatch");
  }
  std::vector<skeleton::JointTransform> fk;
  if (!reference_inertia.empty()) fk = skeleton::forward_kinematics(current, skel);

  TrackResult out;
  out.torques_Nm.resize(n);
  double limit = kDefaultTorqueLimitNm;
  for (std::size_t i = 0; i < n; ++i) {
    PdGains g = gains.for_joint(skel.joint(skel.dof_joint(static_cast<int>(i))).name);
    limit = g.torque_limit_Nm;
    if (!reference_inertia.empty()) {
      g = inertia_scale(g, dof_axis_inertia(current, fk, skel, static_cast<int>(i)), reference_inertia[i]);
    }
    out.torques_Nm[i] = joint_torque({current.joint_angles[i], current_velocity[i]},
                                     {desired.joint_angles[i], desired_velocity[i]}, g);
  }
  out.stats = summarize_torques(out.torques_Nm, limit);
  return out;
}

}  // namespace slipstep::pd
