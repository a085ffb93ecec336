#include <gtest/gtest.h>

#include <chrono>
#include <cmath>

#include <nlohmann/json.hpp>

#include "ik_sampling.hpp"
#include "oracles.hpp"
#include "slipstep/errors.hpp"
#include "slipstep/ik.hpp"
#include "slipstep/skeleton.hpp"

using namespace slipstep;
using namespace slipstep::ik;
using skeleton::forward_kinematics;

namespace {

const char* kSfx[2] = {"_l", "_r"};

struct Leg {
  int hip, knee, ankle;
  double thigh, shank;
};

Leg leg(const Skeleton& skel, int side) {
  const std::string s = kSfx[side];
  Leg l{skel.require("hip" + s), skel.require("knee" + s), skel.require("ankle" + s), 0, 0};
  l.thigh = skel.joint(l.knee).offset.norm();
  l.shank = skel.joint(l.ankle).offset.norm();
  return l;
}

LowerBodyTargets standing_targets(const Skeleton& skel, double pelvis_y) {
  LowerBodyTargets t;
  t.pelvis = Vec3(0.0, pelvis_y, 0.0);
  for (int side = 0; side < 2; ++side) {
    const double z = skel.joint(leg(skel, side).hip).offset.z();
    t.feet[static_cast<std::size_t>(side)].ground_point = Vec3(0.0, 0.0, z);
  }
  return t;
}

}  // namespace

TEST(Skeleton, HumanoidHasThirtyInternalDofs) {
  const auto skel = Skeleton::humanoid();
  EXPECT_EQ(skel.internal_dof_count(), 30);
  EXPECT_EQ(skel.total_dof_count(), 36);
  for (int i = 0; i < skel.internal_dof_count(); ++i) {
    EXPECT_TRUE(std::isfinite(skel.dof(i).min_rad) && std::isfinite(skel.dof(i).max_rad));
    EXPECT_LT(skel.dof(i).min_rad, skel.dof(i).max_rad);
  }
}

TEST(Skeleton, JsonRoundTrip) {
  const auto skel = Skeleton::humanoid();
  const auto again = Skeleton::from_json(skel.to_json());
  EXPECT_EQ(again.to_json(), skel.to_json());
}

TEST(Skeleton, ShippedDataFileMatchesBuiltIn) {
  const auto file = Skeleton::load(std::string(SLIPSTEP_DATA_DIR) + "/humanoid.skeleton.json");
  EXPECT_EQ(file.to_json(), Skeleton::humanoid().to_json());
}

TEST(Skeleton, RejectsBadFiles) {
  auto j = Skeleton::humanoid().to_json();
  j["schema_version"] = 99;
  EXPECT_THROW(Skeleton::from_json(j), VersionError);
  EXPECT_THROW(Skeleton::load("/nonexistent/skeleton.json"), IoError);
}

TEST(LowerIk, StraightLegAtFullExtension) {
  const auto skel = Skeleton::humanoid();
  const auto t = standing_targets(skel, skel.leg_length());
  const auto r = solve_lower_ik(t, skel);
  for (int side = 0; side < 2; ++side) {
    EXPECT_NEAR(r.pose.joint_angles[static_cast<std::size_t>(skel.dof_index(std::string("knee") + kSfx[side], "flexion"))],
                0.0, 1e-6);
  }
}

TEST(LowerIk, EightyPercentReachMatchesLawOfCosines) {
  const auto skel = Skeleton::humanoid();
  const Leg l = leg(skel, 0);
  const double reach = l.thigh + l.shank;
  // Equal-segment form of the law of cosines.
  const double sym = knee_angle_for_distance(1.0, 1.0, 0.8 * 2.0);
  EXPECT_NEAR(sym, kPi - 2.0 * std::asin(0.8), 1e-12);

  auto t = standing_targets(skel, 0.8 * reach + skel.ankle_height_m());
  const auto r = solve_lower_ik(t, skel);
  const double knee = r.pose.joint_angles[static_cast<std::size_t>(skel.dof_index("knee_l", "flexion"))];
  EXPECT_NEAR(knee, oracle::knee_flexion_law_of_cosines(l.thigh, l.shank, 0.8 * reach), 1e-9);
}

TEST(LowerIk, RandomReachableTargetsAreExact) {
  const auto skel = Skeleton::humanoid();
  oracle::Sampler rnd(2024);
  const auto t0 = std::chrono::steady_clock::now();
  int solved = 0;
  double worst_foot = 0.0, worst_knee = 0.0;
  while (solved < 10000) {
    const auto sampled = oracle::sample_reachable_targets(skel, rnd);
    if (!sampled) continue;
    const LowerBodyTargets& t = *sampled;

    const auto r = solve_lower_ik(t, skel);
    ASSERT_TRUE(skeleton::within_limits(r.pose, skel)) << "sample " << solved;
    const auto got = forward_kinematics(r.pose, skel);
    for (int side = 0; side < 2; ++side) {
      const Leg l = leg(skel, side);
      const auto& foot = t.feet[static_cast<std::size_t>(side)];
      const double err = (got[static_cast<std::size_t>(l.ankle)].position - ankle_target(foot, skel)).norm();
      worst_foot = std::max(worst_foot, err);
      const double dist = (got[static_cast<std::size_t>(l.ankle)].position - got[static_cast<std::size_t>(l.hip)].position).norm();
      const double knee = r.pose.joint_angles[static_cast<std::size_t>(skel.dof_index(std::string("knee") + kSfx[side], "flexion"))];
      worst_knee = std::max(worst_knee, std::abs(knee - oracle::knee_flexion_law_of_cosines(l.thigh, l.shank, dist)));
    }
    ++solved;
  }
  EXPECT_LT(worst_foot, 1e-6);
  EXPECT_LT(worst_knee, 1e-9);
  RecordProperty("worst_foot_error_m", std::to_string(worst_foot));
  EXPECT_LT(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count(), 10.0);
}

TEST(LowerIk, UnreachableReportsShortfall) {
  const auto skel = Skeleton::humanoid();
  auto t = standing_targets(skel, skel.leg_length() + 0.2);
  try {
    solve_lower_ik(t, skel);
    FAIL() << "expected ReachabilityError";
  } catch (const ReachabilityError& e) {
    EXPECT_NEAR(e.shortfall(), 0.2, 1e-9);
  }
  const auto r = solve_lower_ik(t, skel, IkOptions{true});
  EXPECT_NEAR(r.shortfall_m[0], 0.2, 1e-9);
}

TEST(LowerIk, HalvedLegsCrouchWithFeetOnTargets) {
  const auto skel = Skeleton::humanoid();
  auto t = standing_targets(skel, 0.5 * skel.leg_length());
  t.feet[0].ground_point.x() = 0.1;
  const auto r = solve_lower_ik(t, skel);
  const auto fk = forward_kinematics(r.pose, skel);
  for (int side = 0; side < 2; ++side) {
    const Leg l = leg(skel, side);
    EXPECT_LT((fk[static_cast<std::size_t>(l.ankle)].position - ankle_target(t.feet[static_cast<std::size_t>(side)], skel)).norm(), 1e-6);
    EXPECT_GT(r.pose.joint_angles[static_cast<std::size_t>(skel.dof_index(std::string("knee") + kSfx[side], "flexion"))], 1.0);
  }
}

TEST(UpperIk, NoHandTargetsGivesNeutralAlignedPose) {
  const auto skel = Skeleton::humanoid();
  const Pose base = skel.neutral_pose();
  const auto r = solve_upper_ik(Vec2(1.0, 0.0), std::nullopt, skel, base);
  EXPECT_EQ(r.pose.joint_angles, base.joint_angles);
}

TEST(UpperIk, RotatedPelvisDirectionTwistsSpine) {
  const auto skel = Skeleton::humanoid();
  Pose base = skel.neutral_pose();
  base.root_orientation = Quat(Eigen::AngleAxisd(deg2rad(70.0), Vec3::UnitY()));
  const auto r = solve_upper_ik(direction_of(deg2rad(70.0) + deg2rad(20.0)), std::nullopt, skel, base);
  EXPECT_NEAR(r.pose.joint_angles[static_cast<std::size_t>(skel.dof_index("spine", "twist"))], deg2rad(20.0), 1e-12);
  EXPECT_TRUE(skeleton::within_limits(r.pose, skel));
}

TEST(UpperIk, BoxGripPointsAreReached) {
  const auto skel = Skeleton::humanoid();
  Pose base = skel.neutral_pose();
  base.root_position = Vec3(0.0, skel.leg_length(), 0.0);
  const double chest = skel.leg_length() + 0.3;
  const std::array<Vec3, 2> grip{Vec3(0.4, chest, -0.15), Vec3(0.4, chest, 0.15)};
  const auto r = solve_upper_ik(Vec2(1.0, 0.0), grip, skel, base);
  EXPECT_FALSE(r.clamped);
  EXPECT_TRUE(skeleton::within_limits(r.pose, skel));
  const auto fk = forward_kinematics(r.pose, skel);
  EXPECT_LT((fk[static_cast<std::size_t>(skel.require("wrist_l"))].position - grip[0]).norm(), 1e-6);
  EXPECT_LT((fk[static_cast<std::size_t>(skel.require("wrist_r"))].position - grip[1]).norm(), 1e-6);
}

TEST(UpperIk, HandTargetsNeverTouchLowerBody) {
  const auto skel = Skeleton::humanoid();
  auto t = standing_targets(skel, 0.85);
  t.feet[1].ground_point.x() = 0.2;
  const Pose lower = solve_lower_ik(t, skel).pose;
  const double chest = 0.85 + 0.3;
  const auto a = solve_upper_ik(Vec2(1.0, 0.0), std::nullopt, skel, lower).pose;
  const auto b = solve_upper_ik(Vec2(1.0, 0.0), std::array<Vec3, 2>{Vec3(0.4, chest, -0.15), Vec3(0.4, chest, 0.15)}, skel,
                                lower).pose;
  for (const char* j : {"hip_l", "hip_r", "knee_l", "knee_r", "ankle_l", "ankle_r", "toe_l", "toe_r"}) {
    const int ji = skel.require(j);
    for (std::size_t k = 0; k < skel.joint(ji).dofs.size(); ++k) {
      const auto i = static_cast<std::size_t>(skel.dof_offset(ji)) + k;
      EXPECT_EQ(a.joint_angles[i], lower.joint_angles[i]);
      EXPECT_EQ(b.joint_angles[i], lower.joint_angles[i]);
    }
  }
}

TEST(Swing, EndpointsAndMidpointHeight) {
  const auto traj = make_swing(Vec3::Zero(), Vec3(0.4, 0.0, 0.0), 0.1, 0.35);
  EXPECT_EQ(swing_position(traj, 0.0), traj.start);
  EXPECT_EQ(swing_position(traj, 1.0), traj.end);
  // (p1 + p2) 3/8 + (p0 + p3) / 8
  EXPECT_NEAR(swing_position(traj, 0.5).y(), 0.075, 1e-15);
  EXPECT_NEAR(swing_position(traj, 0.5).x(), 0.2, 1e-15);
  EXPECT_THROW(swing_position(traj, 1.5), DomainError);
  EXPECT_THROW(swing_position(traj, -0.1), DomainError);
}

TEST(Swing, FlatDegenerateCurveIsCollinear) {
  const auto traj = make_swing(Vec3::Zero(), Vec3(0.4, 0.0, 0.2), 0.0, 0.35);
  for (double u = 0.0; u <= 1.0; u += 0.05) {
    const Vec3 p = swing_position(traj, u);
    EXPECT_NEAR(p.y(), 0.0, 1e-15);
    EXPECT_NEAR(p.z() * 0.4 - p.x() * 0.2, 0.0, 1e-15);
  }
}

TEST(ComEstimate, HipMidpointAndEquivariance) {
  const auto skel = Skeleton::humanoid();
  Pose p = skel.neutral_pose();
  p.root_position = Vec3(0.0, 0.9, 0.0);
  EXPECT_LT((com_estimate(p, skel) - Vec3(0.0, 0.9, 0.0)).norm(), 1e-12);
  const Vec3 before = com_estimate(p, skel);
  p.root_position.x() += 1.0;
  EXPECT_LT((com_estimate(p, skel) - before - Vec3(1.0, 0.0, 0.0)).norm(), 1e-12);
}

TEST(ComEstimate, MassWeightedComOffsetIsBounded) {
  const auto skel = Skeleton::humanoid();
  Pose p = skel.neutral_pose();
  p.root_position = Vec3(0.0, 0.9, 0.0);
  const Vec3 offset = mass_weighted_com(p, skel) - com_estimate(p, skel);
  RecordProperty("standing_com_offset_m", std::to_string(offset.norm()));
  EXPECT_LT(offset.norm(), 0.3);
  EXPECT_NEAR(offset.z(), 0.0, 1e-9);
}
