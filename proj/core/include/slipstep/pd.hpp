#pragma once

// PD joint servos: the torque law, inertia scaling, per-joint gain tables and an
// isolated-joint servo bank that audits the torques needed to track IK poses.
//
// Gain file schema (JSON, schema_version 1):
//   { "schema_version": 1, "torque_limit_Nm": 500,
//     "joints": { "hip_l": { "kp": 300, "kd": 30 }, ... } }
// Every joint that owns DOFs must be listed; all its DOFs share the gains.

#include <map>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "slipstep/skeleton.hpp"

namespace slipstep::pd {

inline constexpr int kGainSchemaVersion = 1;
inline constexpr double kDefaultTorqueLimitNm = 500.0;

struct PdGains {
  double kp = 300.0;  // N*m/rad
  double kd = 30.0;   // N*m*s/rad
  double torque_limit_Nm = kDefaultTorqueLimitNm;

  void validate() const;
};

struct JointState {
  double angle = 0.0;
  double velocity = 0.0;
};

/// Corrective torque -(kp(q - qd) + kd(qd' - qd'_d)), clamped to +-torque_limit.
/// Positive output accelerates the angle in the positive direction.
double joint_torque(const JointState& current, const JointState& desired, const PdGains& gains);

/// Gains multiplied by inertia / reference_inertia; the torque limit is kept.
/// Throws DomainError for non-positive inertias.
PdGains inertia_scale(const PdGains& gains, double inertia, double reference_inertia);

class GainTable {
 public:
  GainTable() = default;
  explicit GainTable(std::map<std::string, PdGains> per_joint) : per_joint_(std::move(per_joint)) {}

  /// Documented defaults: hips/knees 300/30, ankles/toes 100/10, spine 200/20,
  /// shoulders/elbows/wrists 150/15, neck 50/5.
  static GainTable defaults(const skeleton::Skeleton& skel);

  const PdGains& for_joint(const std::string& name) const;
  const std::map<std::string, PdGains>& entries() const { return per_joint_; }
  /// Throws ConfigError if a joint with DOFs has no entry.
  void check_covers(const skeleton::Skeleton& skel) const;

  nlohmann::json to_json() const;
  static GainTable from_json(const nlohmann::json& j);
  static GainTable load(const std::string& path);

 private:
  std::map<std::string, PdGains> per_joint_;
};

/// Inertia of the subtree below a DOF about that DOF's world axis through the joint,
/// from the segment boxes (parallel-axis theorem per segment).
double dof_axis_inertia(const skeleton::Pose& pose, const std::vector<skeleton::JointTransform>& fk,
                        const skeleton::Skeleton& skel, int flat_dof);

struct ServoResult {
  JointState next;
  double torque_Nm = 0.0;  // torque actually applied over the step
  bool clamped = false;
};

/// One step of a single joint with inertia `inertia` under the PD law plus an external
/// torque. Backward Euler in the PD terms (unconditionally stable); if that torque
/// exceeds the limit, the clamped torque is applied explicitly instead.
ServoResult servo_step(const JointState& state, const JointState& desired, const PdGains& gains, double inertia,
                       double external_torque_Nm, double dt);

/// Point-mass pendulum on one joint, angle measured from hanging straight down.
class SingleJointRig {
 public:
  SingleJointRig(double mass_kg, double length_m, PdGains gains, bool gravity = true, double gravity_mps2 = 9.81);

  double inertia() const { return mass_ * length_ * length_; }
  double gravity_torque(double angle) const;  // restoring torque toward hanging
  const JointState& state() const { return state_; }
  void set_state(const JointState& s) { state_ = s; }
  ServoResult step(const JointState& desired, double dt);

 private:
  double mass_, length_;
  PdGains gains_;
  bool gravity_;
  double g_;
  JointState state_{};
};

struct TorqueStats {
  double max_abs_Nm = 0.0;
  double mean_abs_Nm = 0.0;
  int max_dof = -1;
  int clamped_count = 0;
};

/// Servo bank for every internal DOF: tracks a stream of IK poses and reports the
/// torques. Reference inertias come from the rest pose; the three DOFs with the
/// largest reference inertia are re-evaluated each tick at the current pose.
class ServoBank {
 public:
  ServoBank(const skeleton::Skeleton& skel, GainTable gains);

  /// Resets joint states to `pose` at rest.
  void reset(const skeleton::Pose& pose);
  /// Advances all servos toward `desired` (desired velocity by finite difference).
  TorqueStats track(const skeleton::Pose& desired, double dt);

  const std::vector<double>& torques() const { return torques_; }
  const std::vector<JointState>& states() const { return states_; }
  const std::vector<double>& reference_inertia() const { return reference_inertia_; }
  const std::vector<int>& live_inertia_dofs() const { return live_dofs_; }
  const GainTable& gains() const { return gains_; }

  /// Full bank state for snapshots.
  nlohmann::json to_json() const;
  void from_json(const nlohmann::json& j);

 private:
  skeleton::Skeleton skel_;
  GainTable gains_;
  std::vector<PdGains> dof_gains_;
  std::vector<double> reference_inertia_;
  std::vector<int> live_dofs_;
  std::vector<JointState> states_;
  std::vector<double> previous_desired_;
  std::vector<double> torques_;
  bool primed_ = false;
};

/// Per-DOF torques for `current` tracking `desired`, with inertia scaling against
/// the given reference inertias (pass an empty vector to skip scaling).
struct TrackResult {
  std::vector<double> torques_Nm;
  TorqueStats stats;
};
TrackResult track_pose(const skeleton::Pose& current, const std::vector<double>& current_velocity,
                       const skeleton::Pose& desired, const std::vector<double>& desired_velocity,
                       const skeleton::Skeleton& skel, const GainTable& gains,
                       const std::vector<double>& reference_inertia = {});

TorqueStats summarize_torques(const std::vector<double>& torques, double limit_Nm);

}  // namespace slipstep::pd
