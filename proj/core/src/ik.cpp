#include "slipstep/ik.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "slipstep/errors.hpp"

namespace slipstep::ik {

namespace {

Mat3 rot(const Vec3& axis, double angle) { return Eigen::AngleAxisd(angle, axis).toRotationMatrix(); }

struct ChainSolution {
  double yaw = 0.0;        // about +y of the parent frame
  double roll = 0.0;       // about +x after yaw
  double flex = 0.0;       // about +z after roll
  double bend = 0.0;       // middle joint, 0 = straight
  double shortfall = 0.0;  // > 0 when out of reach
};

// Two-bone chain hanging along -y of its parent frame. `bend_sign` is the sign of
// the x displacement produced by the middle joint: -1 for a knee (bends forward),
// +1 for an elbow (forearm swings forward).
ChainSolution solve_chain(const Vec3& v, double upper, double lower, double yaw, double bend_sign) {
  ChainSolution c;
  c.yaw = yaw;
  const double reach = upper + lower;
  const double dist = v.norm();
  if (dist > reach) c.shortfall = dist - reach;
  c.bend = knee_angle_for_distance(upper, lower, std::min(dist, reach));

  const Vec3 vp = rot(Vec3::UnitY(), -yaw) * v;
  c.roll = std::atan2(-vp.z(), -vp.y());
  const double ux = vp.x();
  const double uy = -std::hypot(vp.y(), vp.z());
  const double wx = bend_sign * lower * std::sin(c.bend);
  const double wy = -upper - lower * std::cos(c.bend);
  c.flex = wrap_angle(std::atan2(uy, ux) - std::atan2(wy, wx));
  return c;
}

bool set_clamped(Pose& pose, const Skeleton& skel, int flat, double value) {
  const auto& d = skel.dof(flat);
  const double v = std::clamp(value, d.min_rad, d.max_rad);
  pose.joint_angles[static_cast<std::size_t>(flat)] = v;
  return v != value;
}

double root_yaw(const Pose& pose) {
  const Vec3 fwd = pose.root_orientation * Vec3::UnitX();
  return yaw_of(ground(fwd));
}

constexpr const char* kSuffix[2] = {"_l", "_r"};

}  // namespace

double knee_angle_for_distance(double thigh_m, double shank_m, double distance_m) {
  // |w|^2 = t^2 + s^2 + 2ts cos(k)
  const double c = (distance_m * distance_m - thigh_m * thigh_m - shank_m * shank_m) / (2.0 * thigh_m * shank_m);
  return std::acos(std::clamp(c, -1.0, 1.0));
}

Vec3 ankle_target(const FootTarget& foot, const Skeleton& skel) {
  return foot.ground_point + foot.surface_normal.normalized() * skel.ankle_height_m();
}

LowerIkResult solve_lower_ik(const LowerBodyTargets& targets, const Skeleton& skel, const IkOptions& options,
                             const Pose* base) {
  LowerIkResult out;
  out.pose = base ? *base : skel.neutral_pose();
  if (static_cast<int>(out.pose.joint_angles.size()) != skel.internal_dof_count()) {
    throw ConfigError("solve_lower_ik: base pose does not match skeleton");
  }
  out.pose.root_position = targets.pelvis;
  out.pose.root_orientation = Quat(Eigen::AngleAxisd(targets.pelvis_yaw_rad, Vec3::UnitY()));
  const Mat3 Rp = out.pose.root_orientation.toRotationMatrix();

  for (int side = 0; side < 2; ++side) {
    const std::string sfx = kSuffix[side];
    const double m = side == 0 ? 1.0 : -1.0;
    const int hip = skel.require("hip" + sfx);
    const int knee = skel.require("knee" + sfx);
    const int ankle = skel.require("ankle" + sfx);
    const double thigh = skel.joint(knee).offset.norm();
    const double shank = skel.joint(ankle).offset.norm();
    const FootTarget& foot = targets.feet[static_cast<std::size_t>(side)];

    const Vec3 hip_pos = targets.pelvis + Rp * skel.joint(hip).offset;
    const Vec3 v = Rp.transpose() * (ankle_target(foot, skel) - hip_pos);

    const int i_rot = skel.dof_index("hip" + sfx, "rotation");
    const auto& rot_dof = skel.dof(i_rot);
    double gamma = wrap_angle(foot.yaw_rad - targets.pelvis_yaw_rad);
    const double gamma_clamped = m * std::clamp(m * gamma, rot_dof.min_rad, rot_dof.max_rad);
    if (gamma_clamped != gamma) out.clamped = true;
    gamma = gamma_clamped;

    const ChainSolution c = solve_chain(v, thigh, shank, gamma, -1.0);
    if (c.shortfall > 0.0) {
      if (!options.allow_unreachable) {
        throw ReachabilityError("solve_lower_ik: " + std::string(side == 0 ? "left" : "right") + " foot out of reach by " +
                                    std::to_string(c.shortfall) + " m",
                                c.shortfall);
      }
      out.shortfall_m[static_cast<std::size_t>(side)] = c.shortfall;
    }

    Pose& p = out.pose;
    p.joint_angles[static_cast<std::size_t>(i_rot)] = m * gamma;
    bool clamped = false;
    clamped |= set_clamped(p, skel, skel.dof_index("hip" + sfx, "abduction"), m * c.roll);
    clamped |= set_clamped(p, skel, skel.dof_index("hip" + sfx, "flexion"), c.flex);
    clamped |= set_clamped(p, skel, skel.dof_index("knee" + sfx, "flexion"), c.bend);

    // Sole alignment uses the angles actually applied.
    const auto angle = [&](const char* j, const char* d) {
      return p.joint_angles[static_cast<std::size_t>(skel.dof_index(j + sfx, d))];
    };
    const Mat3 Rs = Rp * rot(Vec3::UnitY(), m * angle("hip", "rotation")) * rot(Vec3::UnitX(), m * angle("hip", "abduction")) *
                    rot(Vec3::UnitZ(), angle("hip", "flexion")) * rot(-Vec3::UnitZ(), angle("knee", "flexion"));
    const Vec3 n = Rs.transpose() * foot.surface_normal.normalized();
    const double roll = std::asin(std::clamp(n.z(), -1.0, 1.0));
    const double pitch = std::atan2(-n.x(), n.y());
    clamped |= set_clamped(p, skel, skel.dof_index("ankle" + sfx, "pitch"), pitch);
    clamped |= set_clamped(p, skel, skel.dof_index("ankle" + sfx, "roll"), m * roll);
    set_clamped(p, skel, skel.dof_index("toe" + sfx, "flexion"), 0.0);
    out.clamped |= clamped;
  }
  return out;
}

UpperIkResult solve_upper_ik(const Vec2& pelvis_direction, const std::optional<std::array<Vec3, 2>>& hand_targets,
                             const Skeleton& skel, const Pose& base, const IkOptions& options) {
  UpperIkResult out;
  out.pose = base;
  Pose& p = out.pose;
  if (static_cast<int>(p.joint_angles.size()) != skel.internal_dof_count()) {
    throw ConfigError("solve_upper_ik: base pose does not match skeleton");
  }
  const double twist = wrap_angle(yaw_of(pelvis_direction) - root_yaw(p));
  out.clamped |= set_clamped(p, skel, skel.dof_index("spine", "twist"), twist);
  set_clamped(p, skel, skel.dof_index("spine", "lateral"), 0.0);
  set_clamped(p, skel, skel.dof_index("spine", "flexion"), 0.0);
  for (const char* d : {"twist", "lateral", "flexion"}) set_clamped(p, skel, skel.dof_index("neck", d), 0.0);

  for (int side = 0; side < 2; ++side) {
    const std::string sfx = kSuffix[side];
    for (const char* d : {"rotation", "abduction", "flexion"}) set_clamped(p, skel, skel.dof_index("shoulder" + sfx, d), 0.0);
    set_clamped(p, skel, skel.dof_index("elbow" + sfx, "flexion"), 0.0);
    set_clamped(p, skel, skel.dof_index("wrist" + sfx, "flexion"), 0.0);
  }
  if (!hand_targets) return out;

  const auto fk = skeleton::forward_kinematics(p, skel);
  for (int side = 0; side < 2; ++side) {
    const std::string sfx = kSuffix[side];
    const double m = side == 0 ? 1.0 : -1.0;
    const int shoulder = skel.require("shoulder" + sfx);
    const int elbow = skel.require("elbow" + sfx);
    const int wrist = skel.require("wrist" + sfx);
    const double upper = skel.joint(elbow).offset.norm();
    const double lower = skel.joint(wrist).offset.norm();
    const Mat3 R = skeleton::parent_frame_rotation(fk, skel, shoulder);
    const Vec3 v = R.transpose() * ((*hand_targets)[static_cast<std::size_t>(side)] - fk[static_cast<std::size_t>(shoulder)].position);

    const ChainSolution c = solve_chain(v, upper, lower, 0.0, 1.0);
    if (c.shortfall > 0.0 && !options.allow_unreachable) {
      throw ReachabilityError("solve_upper_ik: " + std::string(side == 0 ? "left" : "right") + " hand out of reach by " +
                                  std::to_string(c.shortfall) + " m",
                              c.shortfall);
    }
    out.clamped |= set_clamped(p, skel, skel.dof_index("shoulder" + sfx, "abduction"), m * c.roll);
    out.clamped |= set_clamped(p, skel, skel.dof_index("shoulder" + sfx, "flexion"), c.flex);
    out.clamped |= set_clamped(p, skel, skel.dof_index("elbow" + sfx, "flexion"), c.bend);
  }
  return out;
}

SwingTrajectory make_swing(const Vec3& start, const Vec3& end, double apex_height_m, double duration_s) {
  if (!(duration_s > 0.0)) throw DomainError("make_swing: duration must be > 0");
  SwingTrajectory t{start, end, apex_height_m, duration_s, {}};
  const double top = std::max(start.y(), end.y()) + apex_height_m;
  Vec3 p1 = start + (end - start) / 3.0;
  Vec3 p2 = start + 2.0 * (end - start) / 3.0;
  p1.y() = top;
  p2.y() = top;
  t.control = {start, p1, p2, end};
  return t;
}

Vec3 swing_position(const SwingTrajectory& traj, double phase) {
  if (!(phase >= 0.0 && phase <= 1.0)) throw DomainError("swing_position: phase outside [0, 1]");
  if (phase == 0.0) return traj.control[0];
  if (phase == 1.0) return traj.control[3];
  const double u = 1.0 - phase;
  const auto& c = traj.control;
  return u * u * u * c[0] + 3.0 * u * u * phase * c[1] + 3.0 * u * phase * phase * c[2] + phase * phase * phase * c[3];
}

Vec3 com_estimate(const Pose& pose, const Skeleton& skel) {
  const auto fk = skeleton::forward_kinematics(pose, skel);
  return 0.5 * (fk[static_cast<std::size_t>(skel.require("hip_l"))].position +
                fk[static_cast<std::size_t>(skel.require("hip_r"))].position);
}

Vec3 mass_weighted_com(const Pose& pose, const Skeleton& skel) {
  const auto fk = skeleton::forward_kinematics(pose, skel);
  Vec3 sum = Vec3::Zero();
  double mass = 0.0;
  for (std::size_t i = 0; i < fk.size(); ++i) {
    const auto& seg = skel.joints()[i].segment;
    sum += seg.mass_kg * (fk[i].position + fk[i].rotation * seg.center);
    mass += seg.mass_kg;
  }
  if (mass <= 0.0) throw ConfigError("mass_weighted_com: skeleton has no segment mass");
  return sum / mass;
}

}  // namespace slipstep::ik
