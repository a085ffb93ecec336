#pragma once

// Random reachable lower-body targets: sample a pose inside the joint limits and
// take its feet as targets. Chains that do not hang below the hip are rejected.

#include <array>
#include <optional>
#include <string>

#include "oracles.hpp"
#include "slipstep/ik.hpp"
#include "slipstep/skeleton.hpp"

namespace oracle {

struct LegChain {
  int hip, knee, ankle;
  double thigh, shank;
};

inline LegChain leg_chain(const slipstep::skeleton::Skeleton& skel, int side) {
  const std::string s = side == 0 ? "_l" : "_r";
  LegChain l{skel.require("hip" + s), skel.require("knee" + s), skel.require("ankle" + s), 0, 0};
  l.thigh = skel.joint(l.knee).offset.norm();
  l.shank = skel.joint(l.ankle).offset.norm();
  return l;
}

inline std::optional<slipstep::ik::LowerBodyTargets> sample_reachable_targets(const slipstep::skeleton::Skeleton& skel,
                                                                             Sampler& rnd) {
  using namespace slipstep;
  skeleton::Pose truth = skel.neutral_pose();
  const auto set = [&](const std::string& joint, const char* dof, double deg) {
    truth.joint_angles[static_cast<std::size_t>(skel.dof_index(joint, dof))] = deg2rad(deg);
  };
  truth.root_position = Vec3(rnd(-2, 2), rnd(0.5, 1.0), rnd(-2, 2));
  const double yaw = rnd(-kPi, kPi);
  truth.root_orientation = Quat(Eigen::AngleAxisd(yaw, Vec3::UnitY()));
  std::array<double, 2> hip_rotation{};
  for (int side = 0; side < 2; ++side) {
    const std::string s = side == 0 ? "_l" : "_r";
    hip_rotation[static_cast<std::size_t>(side)] = rnd(-40, 40);
    set("hip" + s, "rotation", hip_rotation[static_cast<std::size_t>(side)]);
    set("hip" + s, "abduction", rnd(-25, 40));
    set("hip" + s, "flexion", rnd(-25, 100));
    set("knee" + s, "flexion", rnd(2, 145));
    set("ankle" + s, "pitch", rnd(-40, 40));
    set("ankle" + s, "roll", rnd(-40, 40));
  }
  const auto fk = skeleton::forward_kinematics(truth, skel);

  ik::LowerBodyTargets t;
  t.pelvis = truth.root_position;
  t.pelvis_yaw_rad = yaw;
  for (int side = 0; side < 2; ++side) {
    const LegChain l = leg_chain(skel, side);
    const auto& ankle = fk[static_cast<std::size_t>(l.ankle)];
    const Vec3 n = ankle.rotation * Vec3::UnitY();
    const double m = side == 0 ? 1.0 : -1.0;
    const double rot = deg2rad(hip_rotation[static_cast<std::size_t>(side)]);
    auto& foot = t.feet[static_cast<std::size_t>(side)];
    foot.surface_normal = n;
    foot.ground_point = ankle.position - n * skel.ankle_height_m();
    foot.yaw_rad = yaw + m * rot;
    const Mat3 hip_frame = skeleton::parent_frame_rotation(fk, skel, l.hip) *
                           Eigen::AngleAxisd(m * rot, Vec3::UnitY()).toRotationMatrix();
    const Vec3 v = hip_frame.transpose() * (ankle.position - fk[static_cast<std::size_t>(l.hip)].position);
    if (v.y() > -0.05) return std::nullopt;
  }
  return t;
}

}  // namespace oracle
