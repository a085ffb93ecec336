#include "slipstep/slip.hpp"

#include <cmath>
#include <string>

#include "slipstep/errors.hpp"

namespace slipstep::slip {

void SlipParams::validate() const {
  if (!(mass_kg > 0.0)) throw ConfigError("slip params: mass_kg must be > 0");
  if (!(gravity_mps2 > 0.0)) throw ConfigError("slip params: gravity_mps2 must be > 0");
  if (!(rest_length_m > 0.0)) throw ConfigError("slip params: rest_length_m must be > 0");
  if (!(spring_k > 0.0)) throw ConfigError("slip params: spring_k must be > 0");
  if (!(damping_k >= 0.0)) throw ConfigError("slip params: damping_k must be >= 0");
}

std::size_t SlipState::stance_count() const {
  return static_cast<std::size_t>(legs[0].is_stance) + static_cast<std::size_t>(legs[1].is_stance);
}

PullContext PullContext::make(const Vec3& external, const SlipParams& params, const Vec3& leg_axis,
                              const Vec3& force_axis) {
  PullContext ctx;
  ctx.external_force_N = external;
  ctx.gravity_force_N = Vec3(0.0, -params.weight(), 0.0);
  ctx.up_unit = Vec3::UnitY();
  ctx.leg_axis_unit = leg_axis.norm() > 0.0 ? Vec3(leg_axis.normalized()) : Vec3::UnitY();
  ctx.force_axis_unit = force_axis.norm() > 0.0 ? Vec3(force_axis.normalized()) : Vec3::UnitX();
  return ctx;
}

double total_energy(const SlipState& state, const SlipParams& params, double datum_height_m) {
  const double h = state.com_position.y() - datum_height_m;
  return params.mass_kg * params.gravity_mps2 * h +
         0.5 * params.mass_kg * state.com_velocity.squaredNorm();
}

double leg_length(const LegRecord& leg, const SlipState& state) {
  return (state.com_position - leg.foot_anchor).norm();
}

double spring_energy(const SlipState& state, const SlipParams& params) {
  double e = 0.0;
  for (const auto& leg : state.legs) {
    if (!leg.is_stance) continue;
    const double x = leg_length(leg, state) - leg.current_rest_length_m;
    if (x < 0.0) e += 0.5 * params.spring_k * x * x;
  }
  return e;
}

double step_distance(double speed_mps, double com_height_m, double terrain_offset_m,
                     double gravity) {
  if (!(gravity > 0.0)) throw DomainError("step_distance: gravity must be > 0");
  if (!(speed_mps >= 0.0)) throw DomainError("step_distance: speed must be >= 0");
  const double disc = speed_mps * speed_mps + 4.0 * gravity * (com_height_m - terrain_offset_m);
  if (disc < 0.0) {
    throw DomainError("step_distance: terrain step of " + std::to_string(terrain_offset_m) +
                      " m is out of reach at " + std::to_string(speed_mps) + " m/s");
  }
  return speed_mps / (2.0 * gravity) * std::sqrt(disc);
}

bool halt_condition(const PullContext& ctx) {
  const double support = ctx.up_unit.dot(ctx.leg_axis_unit) * ctx.gravity_force_N.norm();
  return support >= ctx.force_axis_unit.dot(ctx.external_force_N);
}

PullBias pull_bias(const PullContext& ctx, double base_distance_m, const SlipParams& params) {
  const double alignment = ctx.up_unit.dot(ctx.leg_axis_unit);
  if (std::abs(alignment) < 1e-12) {
    throw DomainError("pull_bias: leg axis is perpendicular to gravity");
  }
  const double support = alignment * ctx.gravity_force_N.norm();
  if (!(support > 0.0)) throw DomainError("pull_bias: no gravity support along the leg");
  const double beta = ctx.force_axis_unit.dot(ctx.external_force_N) / support;
  return {beta, base_distance_m + beta * params.step_bias_gain};
}

Vec3 spring_leg_force(const LegRecord& leg, const SlipState& state, const SlipParams& params) {
  const Vec3 axis = state.com_position - leg.foot_anchor;
  const double length = axis.norm();
  if (length < 1e-9) throw DomainError("spring_leg_force: zero-length leg");
  const Vec3 unit = axis / length;
  const double x = length - leg.current_rest_length_m;
  const double v_rel = state.com_velocity.dot(unit);
  return (-params.spring_k * x - params.damping_k * v_rel) * unit;
}

double spring_error_bias(const StepPlan& plan, const LegRecord& stance_leg, const SlipState& state,
                         const SlipParams& params) {
  const double error = stance_leg.current_rest_length_m - leg_length(stance_leg, state);
  return plan.biased_distance_m + params.spring_error_gain * error;
}

Vec3 net_force(const SlipState& state, const Vec3& external_force_N, const Vec3& ankle_force_N,
               const SlipParams& params) {
  Vec3 force(0.0, -params.weight(), 0.0);
  for (const auto& leg : state.legs) {
    if (!leg.is_stance) continue;
    const Vec3 f = spring_leg_force(leg, state, params);
    const Vec3 axis = (state.com_position - leg.foot_anchor).normalized();
    // A foot can push on the ground but never pull on it.
    if (f.dot(axis) > 0.0) force += f;
  }
  force += external_force_N;
  force += ankle_force_N;
  return force;
}

SlipState integrate(const SlipState& state, const Vec3& external_force_N, const Vec3& ankle_force_N,
                    const SlipParams& params, double dt) {
  if (!(dt > 0.0)) throw DomainError("integrate: dt must be > 0");
  if (!all_finite(external_force_N) || !all_finite(ankle_force_N)) {
    throw NumericError("integrate: non-finite force input");
  }
  const Vec3 accel = net_force(state, external_force_N, ankle_force_N, params) / params.mass_kg;
  if (!all_finite(accel)) throw NumericError("integrate: non-finite acceleration");
  SlipState next = state;
  next.com_velocity = state.com_velocity + dt * accel;
  next.com_position = state.com_position + dt * next.com_velocity;
  next.sim_time_s = state.sim_time_s + dt;
  return next;
}

SlipState exchange_support(const SlipState& state, const StepPlan& plan,
                           double terrain_height_at_target) {
  if (plan.target_foot_position.y() < terrain_height_at_target - 1e-9) {
    throw PlacementError("exchange_support: target is below the terrain surface");
  }
  SlipState next = state;
  LegRecord& landing = next.leg(plan.swing_leg);
  LegRecord& released = next.leg(other(plan.swing_leg));
  landing.foot_anchor = plan.target_foot_position;
  landing.is_stance = true;
  released.is_stance = false;
  return next;
}

}  // namespace slipstep::slip
