#pragma once

// Articulated humanoid description and forward kinematics.
//
// Skeleton file schema (JSON, schema_version 1):
//   {
//     "schema_version": 1,
//     "height_m": 1.7, "mass_kg": 89.5, "ankle_height_m": 0.0663,
//     "joints": [
//       { "name": "pelvis", "parent": null, "offset": [0,0,0], "dofs": [],
//         "segment": { "mass_kg": 12.7, "center": [0,0.05,0], "box": [0.2,0.15,0.3] } },
//       { "name": "hip_l", "parent": "pelvis", "offset": [0,0,-0.085],
//         "dofs": [ { "name": "rotation", "axis": [0,1,0], "min_deg": -45, "max_deg": 45 }, ... ],
//         "segment": { ... } },
//       ...
//     ]
//   }
// Joints are listed parent-first. DOFs compose left to right: R = R(dof0) R(dof1) ...
// `offset` and segment data are expressed in the parent joint frame / own joint frame.

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "slipstep/math.hpp"

namespace slipstep::skeleton {

inline constexpr int kSchemaVersion = 1;
inline constexpr int kRootDofs = 6;

struct DofSpec {
  std::string name;
  Vec3 axis = Vec3::UnitZ();
  double min_rad = 0.0;
  double max_rad = 0.0;
};

struct Segment {
  double mass_kg = 0.0;
  Vec3 center = Vec3::Zero();  // in joint frame
  Vec3 box = Vec3::Zero();     // full extents (x, y, z)
};

struct Joint {
  std::string name;
  int parent = -1;
  Vec3 offset = Vec3::Zero();
  std::vector<DofSpec> dofs;
  Segment segment;
};

struct Pose {
  Vec3 root_position{0.0, 0.9, 0.0};
  Quat root_orientation = Quat::Identity();
  std::vector<double> joint_angles;  // one per internal DOF, skeleton order
};

struct JointTransform {
  Vec3 position;
  Mat3 rotation;
};

class Skeleton {
 public:
  Skeleton(std::vector<Joint> joints, double height_m, double mass_kg, double ankle_height_m);

  /// Built-in 1.7 m / 89.5 kg humanoid with 30 internal DOF.
  static Skeleton humanoid(double height_m = 1.7, double mass_kg = 89.5);

  const std::vector<Joint>& joints() const { return joints_; }
  const Joint& joint(int i) const { return joints_.at(static_cast<std::size_t>(i)); }
  int find(std::string_view name) const;  // -1 if missing
  int require(std::string_view name) const;

  int internal_dof_count() const { return dof_count_; }
  int total_dof_count() const { return dof_count_ + kRootDofs; }
  int dof_offset(int joint) const { return dof_offsets_.at(static_cast<std::size_t>(joint)); }
  /// Flat index of the named DOF of a joint; throws ConfigError if absent.
  int dof_index(std::string_view joint, std::string_view dof) const;
  const DofSpec& dof(int flat_index) const;
  int dof_joint(int flat_index) const { return dof_joint_.at(static_cast<std::size_t>(flat_index)); }
  std::string dof_label(int flat_index) const;

  double height_m() const { return height_m_; }
  double mass_kg() const { return mass_kg_; }
  double ankle_height_m() const { return ankle_height_m_; }

  Pose neutral_pose() const;

  /// Copy with thigh and shank (and ankle height) scaled by `factor`.
  Skeleton with_leg_scale(double factor) const;

  /// Hip height when standing straight: ankle height + thigh + shank.
  double leg_length() const;

  nlohmann::json to_json() const;
  static Skeleton from_json(const nlohmann::json& j);
  static Skeleton load(const std::string& path);

 private:
  void index();

  std::vector<Joint> joints_;
  std::vector<int> dof_offsets_;
  std::vector<int> dof_joint_;
  int dof_count_ = 0;
  double height_m_;
  double mass_kg_;
  double ankle_height_m_;
};

/// World transform of every joint frame (after its own DOF rotations).
std::vector<JointTransform> forward_kinematics(const Pose& pose, const Skeleton& skel);

/// World rotation of a joint's frame *before* its own DOFs are applied.
Mat3 parent_frame_rotation(const std::vector<JointTransform>& fk, const Skeleton& skel, int joint);

/// True when every DOF is inside its interval (with tolerance).
bool within_limits(const Pose& pose, const Skeleton& skel, double tol = 1e-12);

void clamp_to_limits(Pose& pose, const Skeleton& skel);

}  // namespace slipstep::skeleton
