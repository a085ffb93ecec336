#pragma once

// Analytic lower/upper body inverse kinematics and swing-foot trajectories.

#include <array>
#include <optional>

#include "slipstep/math.hpp"
#include "slipstep/skeleton.hpp"

namespace slipstep::ik {

using skeleton::Pose;
using skeleton::Skeleton;

struct FootTarget {
  Vec3 ground_point = Vec3::Zero();  // sole contact point; the ankle goes ankle_height above it
  double yaw_rad = 0.0;
  Vec3 surface_normal = Vec3::UnitY();
};

struct LowerBodyTargets {
  Vec3 pelvis = Vec3(0.0, 0.9, 0.0);  // hip midpoint = COM estimate
  double pelvis_yaw_rad = 0.0;
  std::array<FootTarget, 2> feet{};   // left, right
};

struct IkOptions {
  /// Straighten toward unreachable targets instead of throwing ReachabilityError.
  bool allow_unreachable = false;
};

struct LowerIkResult {
  Pose pose;
  std::array<double, 2> shortfall_m{0.0, 0.0};  // > 0 only when a target was out of reach
  bool clamped = false;                         // some DOF hit a limit
};

/// Two-bone leg solve per side. Hip rotation follows the foot yaw relative to the
/// pelvis, the knee bends forward, the ankle aligns the sole with the surface normal.
/// `base` supplies upper-body angles (copied through untouched).
LowerIkResult solve_lower_ik(const LowerBodyTargets& targets, const Skeleton& skel, const IkOptions& options = {},
                             const Pose* base = nullptr);

struct UpperIkResult {
  Pose pose;
  bool clamped = false;
};

/// Twists the spine toward `pelvis_direction`; with hand targets the arms are solved
/// with a two-bone solve to the wrist. Lower-body angles of `base` are never touched.
UpperIkResult solve_upper_ik(const Vec2& pelvis_direction, const std::optional<std::array<Vec3, 2>>& hand_targets,
                             const Skeleton& skel, const Pose& base, const IkOptions& options = {});

/// Knee flexion (0 = straight) for a hip-to-ankle distance, law of cosines.
double knee_angle_for_distance(double thigh_m, double shank_m, double distance_m);

/// World ankle-joint target for a foot target.
Vec3 ankle_target(const FootTarget& foot, const Skeleton& skel);

struct SwingTrajectory {
  Vec3 start = Vec3::Zero();
  Vec3 end = Vec3::Zero();
  double apex_height_m = 0.10;
  double duration_s = 0.35;
  std::array<Vec3, 4> control{};  // cubic Bezier control points
};

/// Both inner control points sit at max(start.y, end.y) + apex, at 1/3 and 2/3 of the chord.
SwingTrajectory make_swing(const Vec3& start, const Vec3& end, double apex_height_m, double duration_s);

/// Cubic Bezier evaluation; throws DomainError when phase is outside [0, 1].
Vec3 swing_position(const SwingTrajectory& traj, double phase);

/// Hip-joint midpoint in world space.
Vec3 com_estimate(const Pose& pose, const Skeleton& skel);

/// Segment-mass weighted center of mass (brute-force sum over segments).
Vec3 mass_weighted_com(const Pose& pose, const Skeleton& skel);

}  // namespace slipstep::ik
