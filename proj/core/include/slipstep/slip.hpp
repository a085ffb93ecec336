#pragma once

// Spring-loaded inverted pendulum: state, closed-form foot placement and the
// fixed-step integrator.

#include <array>
#include <cstddef>

#include "slipstep/math.hpp"

namespace slipstep::slip {

struct SlipParams {
  double mass_kg = 89.5;
  double gravity_mps2 = 9.81;
  double rest_length_m = 0.9;   // L0
  double spring_k = 12000.0;    // N/m
  double damping_k = 700.0;     // N*s/m
  double step_bias_gain = 0.4;  // pull/push bias scale
  double spring_error_gain = 0.5;

  void validate() const;
  double weight() const { return mass_kg * gravity_mps2; }
};

enum class Side : std::size_t { kLeft = 0, kRight = 1 };

inline constexpr std::size_t index(Side s) { return static_cast<std::size_t>(s); }
inline constexpr Side other(Side s) { return s == Side::kLeft ? Side::kRight : Side::kLeft; }
inline constexpr const char* name(Side s) { return s == Side::kLeft ? "left" : "right"; }

struct LegRecord {
  Vec3 foot_anchor = Vec3::Zero();
  double current_rest_length_m = 0.9;
  bool is_stance = true;
};

struct SlipState {
  Vec3 com_position{0.0, 0.9, 0.0};
  Vec3 com_velocity = Vec3::Zero();
  std::array<LegRecord, 2> legs{};
  double sim_time_s = 0.0;

  LegRecord& leg(Side s) { return legs[index(s)]; }
  const LegRecord& leg(Side s) const { return legs[index(s)]; }
  std::size_t stance_count() const;
};

/// Forces and axes entering the halt condition and the pull/push bias.
struct PullContext {
  Vec3 external_force_N = Vec3::Zero();
  Vec3 gravity_force_N = Vec3::Zero();
  Vec3 up_unit = Vec3::UnitY();
  Vec3 leg_axis_unit = Vec3::UnitY();
  Vec3 force_axis_unit = Vec3::UnitX();

  /// Builds a context with gravity = m*g downward; axes are normalized.
  static PullContext make(const Vec3& external, const SlipParams& params, const Vec3& leg_axis,
                          const Vec3& force_axis);
};

struct StepPlan {
  double base_distance_m = 0.0;    // d
  double biased_distance_m = 0.0;  // d' (pull/push)
  double final_distance_m = 0.0;   // d'' (spring-length error)
  double bias_factor = 0.0;        // beta
  Vec2 direction{1.0, 0.0};        // unit ground direction the distance is measured along
  Vec3 target_foot_position = Vec3::Zero();
  double target_yaw_rad = 0.0;
  Side swing_leg = Side::kLeft;
};

struct PullBias {
  double bias_factor;
  double biased_distance_m;
};

/// m*g*h + m*|v|^2/2 with h measured above `datum_height_m`.
double total_energy(const SlipState& state, const SlipParams& params, double datum_height_m = 0.0);

/// Potential energy stored in the compressed stance springs (unilateral legs).
double spring_energy(const SlipState& state, const SlipParams& params);

/// Horizontal distance from the COM to the next foot that brings the vault to rest
/// at apex: d = v/(2g) * sqrt(v^2 + 4g(h - s)). Throws DomainError on a negative
/// discriminant.
double step_distance(double speed_mps, double com_height_m, double terrain_offset_m,
                     double gravity);

/// (u.a)|F_g| >= (b.F_p); inclusive.
bool halt_condition(const PullContext& ctx);

PullBias pull_bias(const PullContext& ctx, double base_distance_m, const SlipParams& params);

/// Spring-damper leg force acting on the COM. Bilateral; the integrator
/// only lets stance legs push.
Vec3 spring_leg_force(const LegRecord& leg, const SlipState& state, const SlipParams& params);

double leg_length(const LegRecord& leg, const SlipState& state);

/// d'' = d' + k_e * (rest - current) of the stance leg.
double spring_error_bias(const StepPlan& plan, const LegRecord& stance_leg, const SlipState& state,
                         const SlipParams& params);

/// Semi-implicit Euler: velocity first, then position. Stance legs push only.
SlipState integrate(const SlipState& state, const Vec3& external_force_N, const Vec3& ankle_force_N,
                    const SlipParams& params, double dt);

/// Net force on the COM that integrate() uses (gravity + legs + external + ankle).
Vec3 net_force(const SlipState& state, const Vec3& external_force_N, const Vec3& ankle_force_N,
               const SlipParams& params);

/// Instantaneous support swap: the planned swing leg becomes the stance leg at the
/// target, the previous stance leg is released. COM state is untouched.
/// Throws PlacementError when the target lies below `terrain_height_at_target`.
SlipState exchange_support(const SlipState& state, const StepPlan& plan,
                           double terrain_height_at_target);

}  // namespace slipstep::slip
