#pragma once

// Balance decision layer: support-region classification, ankle-torque feedback,
// corrective/comfort step planning, steering and rest-length adaptation.

#include <array>
#include <optional>
#include <string_view>
#include <utility>
#include <vector>

#include "slipstep/math.hpp"
#include "slipstep/slip.hpp"
#include "slipstep/terrain.hpp"

namespace slipstep::balance {

using slip::Side;

struct FootPose {
  Vec3 position = Vec3::Zero();
  double yaw_rad = 0.0;
};

struct Circle {
  Vec2 center = Vec2::Zero();
  double radius = 0.12;
};

/// Ground-projected support set: one circle per grounded foot, plus a capsule
/// joining them in double support.
struct SupportRegion {
  std::vector<Circle> foot_circles;
  struct Capsule {
    Vec2 a, b;
    double radius;
  };
  std::optional<Capsule> bridge_capsule;

  double radius() const { return foot_circles.front().radius; }
  Vec2 centroid() const;
  /// Nearest point of the support "skeleton" (circle centers / capsule segment).
  Vec2 nearest_center(const Vec2& p) const;
};

enum class Region { kInner, kMargin, kOutside };
std::string_view to_string(Region r);

struct RegionClass {
  Region region = Region::kInner;
  Vec2 offset = Vec2::Zero();  // COM ground point minus nearest support center
  double normalized_radius = 0.0;
};

struct ComfortMargins {
  double lateral_min_m = 0.05;  // minimum left-right separation in the pelvis frame
  double lateral_max_m = 0.6;
};

struct ControllerConfig {
  double target_speed_mps = 0.0;
  Vec2 target_direction{1.0, 0.0};
  double ankle_gain_k = 2000.0;    // N/m
  double ankle_damping_c = 300.0;  // N*s/m
  double r_inner = 0.6;
  double comfort_yaw_limit_rad = deg2rad(30.0);
  ComfortMargins comfort_margins{};
  double swing_duration_s = 0.3;
  double fall_height_fraction = 0.5;

  double foot_radius_m = 0.12;
  double max_turn_per_step_rad = deg2rad(30.0);
  double nominal_slot_offset_m = 0.1;  // stance slots left/right of the pelvis axis
  double swing_apex_m = 0.10;
  double gait_lateral_offset_m = 0.03;  // alternating lateral placement while walking
  double speed_feedback_gain = 0.5;     // per-step integral gain of the gait speed trim
  double max_step_m = 0.75;             // cap on COM-to-foot placement distance
  double settle_force_N = 1.0;          // no comfort steps while external force exceeds this

  void validate() const;
  bool walking() const { return target_speed_mps > 1e-9; }
};

enum class Mode { kStandSway, kStep, kComfortStep, kFallen };
std::string_view to_string(Mode m);

struct BalanceDecision {
  Mode mode = Mode::kStandSway;
  Vec3 ankle_force_N = Vec3::Zero();
  std::optional<slip::StepPlan> step_plan;
  std::array<double, 2> new_rest_lengths_m{0.9, 0.9};
  RegionClass region{};
  bool lift_ready = false;  // comfort step: COM is over the remaining stance foot
  bool replant = false;     // released leg goes back into stance (double support)
};

/// Swing currently in flight, owned by the simulation loop and passed to decide().
struct SwingStatus {
  bool active = false;
  Side leg = Side::kLeft;
  Mode kind = Mode::kStep;
  double elapsed_s = 0.0;
  slip::StepPlan plan{};
};

/// Everything decide() reads besides the SLIP state.
struct DecisionInputs {
  const slip::SlipState& state;
  const slip::PullContext& ctx;
  const terrain::Terrain& terrain;
  const ControllerConfig& config;
  const slip::SlipParams& params;
  const SwingStatus& swing;
  std::array<double, 2> foot_yaws{0.0, 0.0};
  double speed_trim_mps = 0.0;  // added to the target speed in the gait offset
};

SupportRegion build_support_region(const std::vector<FootPose>& feet, double foot_radius_m);

RegionClass classify_com(const Vec2& com_ground, const SupportRegion& region, const ControllerConfig& config);

/// Maximum horizontal force whose torque about the foot fits inside the support radius.
double ankle_force_bound(const SupportRegion& region, const slip::SlipParams& params, double com_height_m);

/// Spring-damper pull of the COM toward `reference` (default: region centroid),
/// clamped to ankle_force_bound. Horizontal only.
Vec3 ankle_feedback(const slip::SlipState& com, const SupportRegion& region, const ControllerConfig& config,
                    const slip::SlipParams& params, std::optional<Vec2> reference = std::nullopt,
                    double com_height_m = -1.0);

/// Rest lengths for feet at the given terrain heights: the higher foot shortens by
/// the height difference, the longer leg stays at L0. Throws DomainError if the
/// difference reaches L0.
std::array<double, 2> adjust_rest_lengths(const std::array<double, 2>& stance_heights_m, double L0);

/// Composes step distance, pull bias and spring-error bias along the horizontal
/// COM velocity (see plan_corrective_step in the .cpp for the exact order).
slip::StepPlan plan_corrective_step(const slip::SlipState& state, const slip::PullContext& ctx,
                                    const terrain::Terrain& terrain, const ControllerConfig& config,
                                    const slip::SlipParams& params, std::optional<Side> forced_swing = std::nullopt,
                                    double speed_trim_mps = 0.0);

/// Walking heading for the next placement: target_direction once the travel
/// direction is within max_turn_per_step of it, else the travel direction turned
/// by max_turn_per_step toward it.
Vec2 steer_heading(const Vec2& velocity, const ControllerConfig& config);

/// Rotates the plan's target about `pivot` (the stance foot) by at most
/// max_turn_per_step toward target_direction. Distance to the pivot is preserved.
slip::StepPlan steer_adjust(const slip::StepPlan& plan, const Vec2& pivot, const ControllerConfig& config);

/// Comfort step when the feet are crossed or a foot's yaw is off the pelvis direction.
std::optional<slip::StepPlan> comfort_check(const std::array<FootPose, 2>& feet, const Vec2& pelvis_direction,
                                            const ControllerConfig& config);

BalanceDecision decide(const DecisionInputs& in);

/// Leg axis (foot to COM) of the current support, averaged over stance legs.
Vec3 support_leg_axis(const slip::SlipState& state);

}  // namespace slipstep::balance
