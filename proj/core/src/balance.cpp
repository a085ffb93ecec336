#include "slipstep/balance.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "slipstep/errors.hpp"

namespace slipstep::balance {

using slip::LegRecord;
using slip::SlipParams;
using slip::SlipState;
using slip::StepPlan;

std::string_view to_string(Region r) {
  switch (r) {
    case Region::kInner: return "INNER";
    case Region::kMargin: return "MARGIN";
    case Region::kOutside: return "OUTSIDE";
  }
  return "?";
}

std::string_view to_string(Mode m) {
  switch (m) {
    case Mode::kStandSway: return "STAND_SWAY";
    case Mode::kStep: return "STEP";
    case Mode::kComfortStep: return "COMFORT_STEP";
    case Mode::kFallen: return "FALLEN";
  }
  return "?";
}

void ControllerConfig::validate() const {
  if (!(r_inner > 0.0 && r_inner < 1.0)) throw ConfigError("controller: r_inner must be in (0, 1)");
  if (!(swing_duration_s > 0.0)) throw ConfigError("controller: swing_duration_s must be > 0");
  if (!(foot_radius_m > 0.0)) throw ConfigError("controller: foot_radius_m must be > 0");
  if (!(target_speed_mps >= 0.0)) throw ConfigError("controller: target_speed_mps must be >= 0");
  if (std::abs(target_direction.norm() - 1.0) > 1e-6) throw ConfigError("controller: target_direction must be a unit vector");
  if (!(fall_height_fraction > 0.0 && fall_height_fraction < 1.0)) throw ConfigError("controller: fall_height_fraction must be in (0, 1)");
  if (!(ankle_gain_k >= 0.0) || !(ankle_damping_c >= 0.0)) throw ConfigError("controller: ankle gains must be >= 0");
  if (!(max_turn_per_step_rad >= 0.0)) throw ConfigError("controller: max_turn_per_step_rad must be >= 0");
}

// ---------------------------------------------------------------------------
// Support region

Vec2 SupportRegion::centroid() const {
  Vec2 c = Vec2::Zero();
  for (const auto& circle : foot_circles) c += circle.center;
  return c / static_cast<double>(foot_circles.size());
}

Vec2 SupportRegion::nearest_center(const Vec2& p) const {
  if (bridge_capsule) {
    const Vec2 ab = bridge_capsule->b - bridge_capsule->a;
    const double len2 = ab.squaredNorm();
    if (len2 < 1e-18) return bridge_capsule->a;
    const double t = std::clamp((p - bridge_capsule->a).dot(ab) / len2, 0.0, 1.0);
    return bridge_capsule->a + t * ab;
  }
  Vec2 best = foot_circles.front().center;
  double best_d = std::numeric_limits<double>::infinity();
  for (const auto& circle : foot_circles) {
    const double d = (p - circle.center).norm();
    if (d < best_d) {
      best_d = d;
      best = circle.center;
    }
  }
  return best;
}

SupportRegion build_support_region(const std::vector<FootPose>& feet, double foot_radius_m) {
  if (feet.empty()) throw DomainError("build_support_region: no stance feet");
  if (!(foot_radius_m > 0.0)) throw DomainError("build_support_region: radius must be > 0");
  SupportRegion region;
  for (const auto& foot : feet) region.foot_circles.push_back({ground(foot.position), foot_radius_m});
  if (feet.size() >= 2) {
    region.bridge_capsule = SupportRegion::Capsule{region.foot_circles[0].center, region.foot_circles[1].center,
                                                   foot_radius_m};
  }
  return region;
}

RegionClass classify_com(const Vec2& com_ground, const SupportRegion& region, const ControllerConfig& config) {
  RegionClass rc;
  rc.offset = com_ground - region.nearest_center(com_ground);
  rc.normalized_radius = rc.offset.norm() / region.radius();
  if (rc.normalized_radius <= config.r_inner) {
    rc.region = Region::kInner;
  } else if (rc.normalized_radius <= 1.0) {
    rc.region = Region::kMargin;
  } else {
    rc.region = Region::kOutside;
  }
  return rc;
}

double ankle_force_bound(const SupportRegion& region, const SlipParams& params, double com_height_m) {
  if (!(com_height_m > 1e-6)) return 0.0;
  return region.radius() * params.weight() / com_height_m;
}

namespace {

double mean_stance_height(const SlipState& state) {
  double sum = 0.0;
  int n = 0;
  for (const auto& leg : state.legs) {
    if (leg.is_stance) {
      sum += leg.foot_anchor.y();
      ++n;
    }
  }
  if (n == 0) {
    for (const auto& leg : state.legs) sum += leg.foot_anchor.y();
    n = 2;
  }
  return sum / n;
}

}  // namespace

Vec3 ankle_feedback(const SlipState& com, const SupportRegion& region, const ControllerConfig& config,
                    const SlipParams& params, std::optional<Vec2> reference, double com_height_m) {
  const Vec2 ref = reference.value_or(region.centroid());
  const Vec2 offset = ground(com.com_position) - ref;
  const Vec2 v_h = ground(com.com_velocity);
  Vec2 f = -config.ankle_gain_k * offset - config.ankle_damping_c * v_h;
  const double h = com_height_m > 0.0 ? com_height_m : com.com_position.y() - mean_stance_height(com);
  const double bound = ankle_force_bound(region, params, h);
  const double mag = f.norm();
  if (mag > bound) f *= bound / mag;
  return lift(f, 0.0);
}

std::array<double, 2> adjust_rest_lengths(const std::array<double, 2>& stance_heights_m, double L0) {
  const double dh = std::abs(stance_heights_m[0] - stance_heights_m[1]);
  if (dh >= L0) throw DomainError("adjust_rest_lengths: terrain step exceeds the leg rest length");
  if (stance_heights_m[0] > stance_heights_m[1]) return {L0 - dh, L0};
  if (stance_heights_m[1] > stance_heights_m[0]) return {L0, L0 - dh};
  return {L0, L0};
}

// ---------------------------------------------------------------------------
// Step planning

Vec3 support_leg_axis(const SlipState& state) {
  Vec3 foot = Vec3::Zero();
  int n = 0;
  for (const auto& leg : state.legs) {
    if (leg.is_stance) {
      foot += leg.foot_anchor;
      ++n;
    }
  }
  if (n == 0) return Vec3::UnitY();
  const Vec3 axis = state.com_position - foot / n;
  return axis.norm() > 1e-9 ? Vec3(axis.normalized()) : Vec3::UnitY();
}

Vec2 steer_heading(const Vec2& velocity, const ControllerConfig& config) {
  if (velocity.norm() < 0.05) return config.target_direction;
  const Vec2 travel = velocity.normalized();
  const double error = signed_angle(travel, config.target_direction);
  if (std::abs(error) <= config.max_turn_per_step_rad) return config.target_direction;
  return rotate_ground(travel, std::copysign(config.max_turn_per_step_rad, error)).normalized();
}

slip::StepPlan steer_adjust(const slip::StepPlan& plan, const Vec2& pivot, const ControllerConfig& config) {
  const Vec2 arm = ground(plan.target_foot_position) - pivot;
  const double error = signed_angle(plan.direction, config.target_direction);
  const double turn = std::clamp(error, -config.max_turn_per_step_rad, config.max_turn_per_step_rad);
  slip::StepPlan out = plan;
  out.direction = rotate_ground(plan.direction, turn).normalized();
  const Vec2 moved = pivot + rotate_ground(arm, turn);
  out.target_foot_position = lift(moved, plan.target_foot_position.y());
  out.target_yaw_rad = wrap_angle(plan.target_yaw_rad + turn);
  return out;
}

namespace {

Vec2 planning_direction(const SlipState& state, const slip::PullContext& ctx, const ControllerConfig& config) {
  const Vec2 v_h = ground(state.com_velocity);
  if (v_h.norm() > 1e-6) return v_h.normalized();
  const Vec2 axis = ground(ctx.force_axis_unit);
  if (axis.norm() > 1e-9) return axis.normalized();
  return config.target_direction;
}

double plan_step_distance(double speed, double h, double s, double g) {
  try {
    return slip::step_distance(speed, h, s, g);
  } catch (const DomainError&) {
    // Terrain step too high for the current energy: use the largest reachable offset.
    const double s_max = h + speed * speed / (4.0 * g);
    return slip::step_distance(speed, h, s_max, g);
  }
}

}  // namespace

StepPlan plan_corrective_step(const SlipState& state, const slip::PullContext& ctx, const terrain::Terrain& terrain,
                              const ControllerConfig& config, const SlipParams& params, std::optional<Side> forced_swing,
                              double speed_trim_mps) {
  const double t = state.sim_time_s;
  const double g = params.gravity_mps2;
  const Vec2 com_g = ground(state.com_position);
  const Vec2 v_h = ground(state.com_velocity);
  const double speed = v_h.norm();
  const Vec2 dir = planning_direction(state, ctx, config);

  // Reference (stance) leg: the one that stays on the ground.
  Side stance_side;
  if (forced_swing) {
    stance_side = slip::other(*forced_swing);
  } else if (state.leg(Side::kLeft).is_stance != state.leg(Side::kRight).is_stance) {
    stance_side = state.leg(Side::kLeft).is_stance ? Side::kLeft : Side::kRight;
  } else {
    const double dl = (ground(state.leg(Side::kLeft).foot_anchor) - com_g).norm();
    const double dr = (ground(state.leg(Side::kRight).foot_anchor) - com_g).norm();
    stance_side = dl <= dr ? Side::kLeft : Side::kRight;
  }
  const LegRecord& stance = state.leg(stance_side);
  const double from_height = stance.foot_anchor.y();
  const double h = state.com_position.y() - from_height;

  StepPlan plan;
  plan.direction = dir;

  double s = 0.0;
  double d = plan_step_distance(speed, h, s, g);
  for (int iter = 0; iter < 3; ++iter) {
    const auto ground_h = terrain.height_at(com_g + d * dir, t);
    if (!ground_h) break;
    s = *ground_h - from_height;
    d = plan_step_distance(speed, h, s, g);
  }
  plan.base_distance_m = d;

  const slip::PullBias bias = slip::pull_bias(ctx, d, params);
  plan.bias_factor = bias.bias_factor;
  plan.biased_distance_m = std::max(0.0, bias.biased_distance_m);
  plan.final_distance_m = std::max(0.0, slip::spring_error_bias(plan, stance, state, params));

  Vec2 target = com_g + plan.final_distance_m * dir;
  const Vec2 heading = config.walking() ? steer_heading(v_h, config) : config.target_direction;
  if (config.walking()) {
    const double omega = std::sqrt(g / std::max(h, 0.05));
    const double T = config.swing_duration_s;
    const double gait_speed = std::max(0.0, config.target_speed_mps + speed_trim_mps);
    target -= gait_speed * T / std::expm1(omega * T) * heading;
  }

  // Swing leg: forced, the released leg in single support, else the farther foot.
  Side swing;
  if (forced_swing) {
    swing = *forced_swing;
  } else if (state.leg(Side::kLeft).is_stance != state.leg(Side::kRight).is_stance) {
    swing = slip::other(stance_side);
  } else {
    const double dl = (ground(state.leg(Side::kLeft).foot_anchor) - target).norm();
    const double dr = (ground(state.leg(Side::kRight).foot_anchor) - target).norm();
    swing = dl > dr ? Side::kLeft : Side::kRight;
  }
  plan.swing_leg = swing;

  if (config.walking()) {
    const double side = swing == Side::kLeft ? 1.0 : -1.0;
    target += side * config.gait_lateral_offset_m * left_of(heading);
  }

  const Vec2 reach = target - com_g;
  if (reach.norm() > config.max_step_m) target = com_g + reach.normalized() * config.max_step_m;

  Vec2 placed = target;
  if (!terrain.height_at(placed, t)) placed = terrain::nearest_ground_toward(terrain, placed, com_g, t);
  const auto y = terrain.height_at(placed, t);
  plan.target_foot_position = lift(placed, y.value_or(from_height));
  plan.target_yaw_rad = yaw_of(heading);
  return plan;
}

std::optional<StepPlan> comfort_check(const std::array<FootPose, 2>& feet, const Vec2& pelvis_direction,
                                      const ControllerConfig& config) {
  const Vec2 left_dir = left_of(pelvis_direction);
  const Vec2 pl = ground(feet[slip::index(Side::kLeft)].position);
  const Vec2 pr = ground(feet[slip::index(Side::kRight)].position);
  const double width = (pl - pr).dot(left_dir);
  const bool crossed = width < config.comfort_margins.lateral_min_m;
  const bool too_wide = width > config.comfort_margins.lateral_max_m;

  const double pelvis_yaw = yaw_of(pelvis_direction);
  const double yaw_err_l = std::abs(wrap_angle(feet[0].yaw_rad - pelvis_yaw));
  const double yaw_err_r = std::abs(wrap_angle(feet[1].yaw_rad - pelvis_yaw));
  const bool yaw_l = yaw_err_l > config.comfort_yaw_limit_rad;
  const bool yaw_r = yaw_err_r > config.comfort_yaw_limit_rad;

  if (!crossed && !too_wide && !yaw_l && !yaw_r) return std::nullopt;

  Side mover;
  if (yaw_l || yaw_r) {
    mover = (yaw_err_l >= yaw_err_r) ? Side::kLeft : Side::kRight;
  } else {
    const Vec2 slot_l = pr + 2.0 * config.nominal_slot_offset_m * left_dir;
    const Vec2 slot_r = pl - 2.0 * config.nominal_slot_offset_m * left_dir;
    mover = (pl - slot_l).norm() >= (pr - slot_r).norm() ? Side::kLeft : Side::kRight;
  }
  const Vec2 stance = mover == Side::kLeft ? pr : pl;
  const double side = mover == Side::kLeft ? 1.0 : -1.0;
  StepPlan plan;
  plan.swing_leg = mover;
  plan.direction = pelvis_direction;
  plan.target_foot_position = lift(stance + side * 2.0 * config.nominal_slot_offset_m * left_dir, 0.0);
  plan.target_yaw_rad = pelvis_yaw;
  return plan;
}

// ---------------------------------------------------------------------------
// Decision state machine

namespace {

std::array<double, 2> rest_lengths_for(const DecisionInputs& in) {
  std::array<double, 2> heights{};
  for (Side s : {Side::kLeft, Side::kRight}) {
    const bool swinging = in.swing.active && in.swing.leg == s;
    heights[slip::index(s)] =
        swinging ? in.swing.plan.target_foot_position.y() : in.state.leg(s).foot_anchor.y();
  }
  const double L0 = in.params.rest_length_m;
  try {
    return adjust_rest_lengths(heights, L0);
  } catch (const DomainError&) {
    const double lo = 0.1 * L0;
    return heights[0] > heights[1] ? std::array<double, 2>{lo, L0} : std::array<double, 2>{L0, lo};
  }
}

std::vector<FootPose> grounded_feet(const DecisionInputs& in, std::optional<Side> exclude = std::nullopt) {
  std::vector<FootPose> feet;
  for (Side s : {Side::kLeft, Side::kRight}) {
    if (in.swing.active && in.swing.leg == s) continue;
    if (exclude && *exclude == s) continue;
    feet.push_back({in.state.leg(s).foot_anchor, in.foot_yaws[slip::index(s)]});
  }
  return feet;
}

double ground_reference_height(const std::vector<FootPose>& feet) {
  double sum = 0.0;
  for (const auto& f : feet) sum += f.position.y();
  return sum / static_cast<double>(feet.size());
}

}  // namespace

BalanceDecision decide(const DecisionInputs& in) {
  const SlipState& state = in.state;
  const ControllerConfig& cfg = in.config;
  BalanceDecision out;
  out.new_rest_lengths_m = rest_lengths_for(in);

  const auto feet = grounded_feet(in);
  const double ground_h = ground_reference_height(feet);
  const double com_height = state.com_position.y() - ground_h;
  if (com_height < cfg.fall_height_fraction * in.params.rest_length_m) {
    out.mode = Mode::kFallen;
    return out;
  }

  const SupportRegion region = build_support_region(feet, cfg.foot_radius_m);
  out.region = classify_com(ground(state.com_position), region, cfg);
  const bool outside = out.region.region == Region::kOutside;

  if (in.swing.active) {
    if (in.swing.kind == Mode::kStep || outside) {
      out.mode = Mode::kStep;
      out.step_plan = plan_corrective_step(state, in.ctx, in.terrain, cfg, in.params, in.swing.leg, in.speed_trim_mps);
      return out;
    }
    out.mode = Mode::kComfortStep;
    out.step_plan = in.swing.plan;
    out.ankle_force_N = ankle_feedback(state, region, cfg, in.params, region.centroid(), com_height);
    return out;
  }

  out.replant = !state.leg(Side::kLeft).is_stance || !state.leg(Side::kRight).is_stance;

  if (outside || cfg.walking() || !slip::halt_condition(in.ctx)) {
    out.mode = Mode::kStep;
    out.step_plan = plan_corrective_step(state, in.ctx, in.terrain, cfg, in.params, std::nullopt, in.speed_trim_mps);
    out.replant = false;
    return out;
  }

  if (in.ctx.external_force_N.norm() <= cfg.settle_force_N) {
    std::array<FootPose, 2> both{FootPose{state.leg(Side::kLeft).foot_anchor, in.foot_yaws[0]},
                                 FootPose{state.leg(Side::kRight).foot_anchor, in.foot_yaws[1]}};
    if (auto comfort = comfort_check(both, cfg.target_direction, cfg)) {
      const Side stance_side = slip::other(comfort->swing_leg);
      const Vec2 stance_center = ground(state.leg(stance_side).foot_anchor);
      const Vec2 placed = ground(comfort->target_foot_position);
      const auto y = in.terrain.height_at(placed, state.sim_time_s);
      if (y) {
        comfort->target_foot_position = lift(placed, *y);
        out.mode = Mode::kComfortStep;
        out.step_plan = comfort;
        // Shift weight over the foot that stays down before lifting the other one.
        const SupportRegion single = build_support_region(grounded_feet(in, comfort->swing_leg), cfg.foot_radius_m);
        out.ankle_force_N = ankle_feedback(state, single, cfg, in.params, stance_center, com_height);
        const double off = (ground(state.com_position) - stance_center).norm() / cfg.foot_radius_m;
        out.lift_ready = off <= 0.5 * cfg.r_inner && ground(state.com_velocity).norm() < 0.05;
        return out;
      }
    }
  }

  out.mode = Mode::kStandSway;
  out.ankle_force_N = ankle_feedback(state, region, cfg, in.params, region.centroid(), com_height);
  return out;
}

}  // namespace slipstep::balance
