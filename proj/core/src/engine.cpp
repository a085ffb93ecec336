#include "slipstep/engine.hpp"

#include <algorithm>
#include <cmath>

#include <nlohmann/json.hpp>

#include "slipstep/errors.hpp"

namespace slipstep::engine {

using balance::Mode;
using nlohmann::json;
using slip::Side;

// ---------------------------------------------------------------------------
// Ball impacts

TorsoCapsule torso_capsule(const Vec3& com) { return {com + Vec3(0.0, 0.1, 0.0), com + Vec3(0.0, 0.6, 0.0), 0.17}; }

namespace {

// Closest points between segments p1-q1 and p2-q2 (s, t parameters in [0, 1]).
std::pair<Vec3, Vec3> closest_points(const Vec3& p1, const Vec3& q1, const Vec3& p2, const Vec3& q2) {
  const Vec3 d1 = q1 - p1, d2 = q2 - p2, r = p1 - p2;
  const double a = d1.squaredNorm(), e = d2.squaredNorm(), f = d2.dot(r);
  double s = 0.0, t = 0.0;
  if (a <= 1e-18 && e <= 1e-18) return {p1, p2};
  if (a <= 1e-18) {
    t = std::clamp(f / e, 0.0, 1.0);
  } else {
    const double c = d1.dot(r);
    if (e <= 1e-18) {
      s = std::clamp(-c / a, 0.0, 1.0);
    } else {
      const double b = d1.dot(d2);
      const double denom = a * e - b * b;
      s = denom > 1e-18 ? std::clamp((b * f - c * e) / denom, 0.0, 1.0) : 0.0;
      t = (b * s + f) / e;
      if (t < 0.0) {
        t = 0.0;
        s = std::clamp(-c / a, 0.0, 1.0);
      } else if (t > 1.0) {
        t = 1.0;
        s = std::clamp((b - c) / a, 0.0, 1.0);
      }
    }
  }
  return {p1 + s * d1, p2 + t * d2};
}

}  // namespace

BallImpact ball_to_impulse(const scenario::Ball& ball, const Vec3& com, const Vec3& com_velocity) {
  BallImpact out;
  const TorsoCapsule torso = torso_capsule(com);
  const Vec3 rel_v = ball.velocity - com_velocity;
  const double speed = rel_v.norm();
  if (speed < 1e-9) return out;
  // Follow the path far enough to pass the torso.
  const double reach = (ball.origin - com).norm() + 2.0;
  const Vec3 end = ball.origin + rel_v / speed * reach;
  const auto [on_path, on_axis] = closest_points(ball.origin, end, torso.bottom, torso.top);
  const double touch = torso.radius_m + ball.radius_m;
  if ((on_path - on_axis).norm() > touch) return out;
  // Distance to the axis is convex along the path: bisect back to first contact.
  const auto axis_gap = [&](const Vec3& p) { return p - closest_points(p, p, torso.bottom, torso.top).second; };
  Vec3 lo = ball.origin, hi = on_path;
  if (axis_gap(lo).norm() <= touch) hi = lo;
  for (int i = 0; i < 80 && (hi - lo).norm() > 1e-12; ++i) {
    const Vec3 mid = 0.5 * (lo + hi);
    (axis_gap(mid).norm() > touch ? lo : hi) = mid;
  }
  const Vec3 gap = axis_gap(hi);
  const double dist = gap.norm();
  const Vec3 normal = dist > 1e-9 ? Vec3(gap / dist) : Vec3(-rel_v / speed);  // torso -> ball
  const double approach = -rel_v.dot(normal);
  if (approach <= 0.0) return out;
  const Vec3 on_axis_contact = hi - gap;
  out.hit = true;
  out.impulse_Ns = ball.mass_kg() * (1.0 + kBallRestitution) * approach;
  out.force_N = -normal * (out.impulse_Ns / kBallContactWindowS);
  out.contact_point = on_axis_contact + normal * torso.radius_m;
  return out;
}

// ---------------------------------------------------------------------------
// Engine

namespace {

double standing_height(const slip::SlipParams& p, double half_width) {
  // Two springs at +-half_width carrying the weight: 2k(L - l)h/l = mg.
  double lo = 0.3 * p.rest_length_m, hi = std::sqrt(p.rest_length_m * p.rest_length_m - half_width * half_width);
  for (int i = 0; i < 100; ++i) {
    const double h = 0.5 * (lo + hi);
    const double l = std::hypot(h, half_width);
    const double f = 2.0 * p.spring_k * (p.rest_length_m - l) * h / l - p.weight();
    (f > 0.0 ? lo : hi) = h;
  }
  return 0.5 * (lo + hi);
}

skeleton::Skeleton load_skeleton(const scenario::Scenario& s) {
  return s.skeleton_file.empty() ? skeleton::Skeleton::humanoid() : skeleton::Skeleton::load(s.skeleton_file);
}

pd::GainTable load_gains(const scenario::Scenario& s, const skeleton::Skeleton& skel) {
  return s.gains_file.empty() ? pd::GainTable::defaults(skel) : pd::GainTable::load(s.gains_file);
}

json vec(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }
Vec3 vec3(const json& j) { return {j.at(0).get<double>(), j.at(1).get<double>(), j.at(2).get<double>()}; }
json vec(const Vec2& v) { return json::array({v.x(), v.y()}); }
Vec2 vec2(const json& j) { return {j.at(0).get<double>(), j.at(1).get<double>()}; }

json plan_json(const slip::StepPlan& p) {
  return {{"d", p.base_distance_m},         {"d_biased", p.biased_distance_m}, {"d_final", p.final_distance_m},
          {"beta", p.bias_factor},          {"direction", vec(p.direction)},   {"target", vec(p.target_foot_position)},
          {"yaw", p.target_yaw_rad},        {"swing_leg", static_cast<int>(slip::index(p.swing_leg))}};
}

slip::StepPlan plan_from(const json& j) {
  slip::StepPlan p;
  p.base_distance_m = j.at("d").get<double>();
  p.biased_distance_m = j.at("d_biased").get<double>();
  p.final_distance_m = j.at("d_final").get<double>();
  p.bias_factor = j.at("beta").get<double>();
  p.direction = vec2(j.at("direction"));
  p.target_foot_position = vec3(j.at("target"));
  p.target_yaw_rad = j.at("yaw").get<double>();
  p.swing_leg = j.at("swing_leg").get<int>() == 0 ? Side::kLeft : Side::kRight;
  return p;
}

Mode mode_from_int(int m) {
  switch (m) {
    case 0: return Mode::kStandSway;
    case 1: return Mode::kStep;
    case 2: return Mode::kComfortStep;
    default: return Mode::kFallen;
  }
}

}  // namespace

Engine::Engine(const scenario::Scenario& scenario) : Engine(scenario, true) {}

Engine::Engine(const scenario::Scenario& scenario, bool build_schedule)
    : scenario_(scenario),
      dt_(scenario.dt_s),
      end_tick_(scenario.tick_count()),
      base_params_(scenario.params),
      params_(scenario.params),
      config_(scenario.controller),
      terrain_(scenario.terrain),
      base_skeleton_(load_skeleton(scenario)),
      skeleton_(base_skeleton_),
      gains_(load_gains(scenario, base_skeleton_)),
      servos_(skeleton_, gains_) {
  scenario_.validate();
  if (build_schedule) schedule_ = scenario::expanded_schedule(scenario_);

  const Vec2 heading = config_.target_direction;
  const Vec2 left = left_of(heading);
  const double w = config_.nominal_slot_offset_m;
  const double yaw = yaw_of(heading);
  for (Side s : {Side::kLeft, Side::kRight}) {
    const Vec2 p = (s == Side::kLeft ? 1.0 : -1.0) * w * left;
    const auto y = terrain_.height_at(p, 0.0);
    if (!y) throw ConfigError("scenario: start position is over a gap");
    auto& leg = state_.leg(s);
    leg.foot_anchor = lift(p, *y);
    leg.current_rest_length_m = params_.rest_length_m;
    leg.is_stance = true;
    yaws_[slip::index(s)] = yaw;
  }
  const double ground_y = 0.5 * (state_.legs[0].foot_anchor.y() + state_.legs[1].foot_anchor.y());
  state_.com_position = Vec3(0.0, ground_y + standing_height(params_, w), 0.0);
  state_.com_velocity = Vec3::Zero();
  state_.sim_time_s = 0.0;

  solve_pose();
  servos_.reset(pose_);
}

bool Engine::finished() const { return fallen_ || tick_ >= end_tick_; }

void Engine::inject(scenario::Event e) { injected_.push_back(std::move(e)); }

void Engine::refresh_params() {
  params_ = base_params_;
  params_.mass_kg = base_params_.mass_kg + box_mass_;
  params_.rest_length_m = base_params_.rest_length_m * leg_scale_;
  if (scenario_.stiffness_mode == scenario::StiffnessMode::kMassScaled) {
    const double s = params_.mass_kg / base_params_.mass_kg;
    params_.spring_k *= s;
    params_.damping_k *= s;
  }
}

void Engine::rebuild_skeleton() {
  skeleton_ = leg_scale_ == 1.0 ? base_skeleton_ : base_skeleton_.with_leg_scale(leg_scale_);
  servos_ = pd::ServoBank(skeleton_, gains_);
  servos_.reset(pose_);
}

void Engine::apply_event(const scenario::Event& e) {
  trace::TraceEvent te;
  te.type = std::string(scenario::to_string(e.kind));
  switch (e.kind) {
    case scenario::EventKind::kPush:
      pushes_.push_back({e.force_N, e.duration_s});
      te.vector = e.force_N;
      te.value = e.duration_s;
      break;
    case scenario::EventKind::kBall: {
      scenario::Ball ball = e.ball;
      if (ball.relative) ball.origin += state_.com_position;
      const BallImpact hit = ball_to_impulse(ball, state_.com_position, state_.com_velocity);
      te.type = hit.hit ? "BALL_HIT" : "BALL_MISS";
      te.position = hit.hit ? hit.contact_point : ball.origin;
      te.vector = hit.force_N;
      te.value = hit.impulse_Ns;
      if (hit.hit) pushes_.push_back({hit.force_N, hit.duration_s});
      break;
    }
    case scenario::EventKind::kSetTarget:
      if (e.speed_mps) config_.target_speed_mps = *e.speed_mps;
      if (e.yaw_rad) config_.target_direction = direction_of(*e.yaw_rad);
      te.value = config_.target_speed_mps;
      te.vector = lift(config_.target_direction, 0.0);
      break;
    case scenario::EventKind::kSetBoxMass:
      box_mass_ = e.value;
      te.value = e.value;
      refresh_params();
      break;
    case scenario::EventKind::kSetLegScale:
      leg_scale_ = e.value;
      te.value = e.value;
      refresh_params();
      rebuild_skeleton();
      break;
    case scenario::EventKind::kTiltPlatform: {
      auto* platform = std::get_if<terrain::RotatingPlatform>(&terrain_.kind());
      if (!platform) throw ConfigError("TILT_PLATFORM needs rotating_platform terrain");
      platform->manual = terrain::RotatingPlatform::Manual{e.tilt_axis, e.tilt_rad};
      te.value = e.tilt_rad;
      break;
    }
  }
  pending_events_.push_back(te);
}

void Engine::update_speed_trim() {
  if (config_.walking() && step_speed_ticks_ > 0) {
    const double v = config_.target_speed_mps;
    const double error = v - step_speed_sum_ / static_cast<double>(step_speed_ticks_);
    speed_trim_ = std::clamp(speed_trim_ + config_.speed_feedback_gain * error, -v, v);
  } else {
    speed_trim_ = 0.0;
  }
  step_speed_sum_ = 0.0;
  step_speed_ticks_ = 0;
}

void Engine::update_stance_heights() {
  if (!terrain_.time_varying()) return;
  for (Side s : {Side::kLeft, Side::kRight}) {
    if (swing_.status.active && swing_.status.leg == s) continue;
    auto& leg = state_.leg(s);
    if (const auto y = terrain_.height_at(ground(leg.foot_anchor), time())) leg.foot_anchor.y() = *y;
  }
}

Vec3 Engine::external_force() const {
  Vec3 f = Vec3::Zero();
  for (const auto& p : pushes_) f += p.force_N;
  return f;
}

std::array<double, 2> Engine::foot_yaws() const { return yaws_; }

Vec3 Engine::swing_foot_position() const {
  const auto& st = swing_.status;
  const auto traj = ik::make_swing(swing_.start, st.plan.target_foot_position, config_.swing_apex_m, config_.swing_duration_s);
  return ik::swing_position(traj, std::clamp(st.elapsed_s / config_.swing_duration_s, 0.0, 1.0));
}

void Engine::solve_pose() {
  ik::LowerBodyTargets targets;
  targets.pelvis = state_.com_position;
  const Vec2 mean_dir = direction_of(yaws_[0]) + direction_of(yaws_[1]);
  targets.pelvis_yaw_rad = mean_dir.norm() > 1e-9 ? yaw_of(mean_dir) : yaws_[0];
  for (Side s : {Side::kLeft, Side::kRight}) {
    auto& foot = targets.feet[slip::index(s)];
    const bool swinging = swing_.status.active && swing_.status.leg == s;
    foot.ground_point = swinging ? swing_foot_position() : state_.leg(s).foot_anchor;
    if (swinging) {
      const double phase = std::clamp(swing_.status.elapsed_s / config_.swing_duration_s, 0.0, 1.0);
      foot.yaw_rad = swing_.start_yaw_rad + phase * wrap_angle(swing_.status.plan.target_yaw_rad - swing_.start_yaw_rad);
      foot.surface_normal = Vec3::UnitY();
    } else {
      foot.yaw_rad = yaws_[slip::index(s)];
      foot.surface_normal = terrain_.normal_at(ground(foot.ground_point), time());
    }
  }
  ik::IkOptions options;
  options.allow_unreachable = true;
  const ik::LowerIkResult lower = ik::solve_lower_ik(targets, skeleton_, options, pose_.joint_angles.empty() ? nullptr : &pose_);
  ik_shortfall_ = std::max(lower.shortfall_m[0], lower.shortfall_m[1]);

  std::optional<std::array<Vec3, 2>> hands;
  if (box_mass_ > 0.0) {
    const Mat3 R = yaw_matrix(targets.pelvis_yaw_rad);
    const Vec3 base = targets.pelvis;
    hands = std::array<Vec3, 2>{base + R * Vec3(0.4, 0.35, -0.15), base + R * Vec3(0.4, 0.35, 0.15)};
  }
  pose_ = ik::solve_upper_ik(config_.target_direction, hands, skeleton_, lower.pose, options).pose;
}

const trace::TraceRecord& Engine::step() {
  if (finished()) throw Error("Engine::step called after the run finished");
  const double t = time();

  // 1. Events due this tick: schedule order first, then injected commands.
  std::vector<scenario::Event> due;
  while (next_event_ < schedule_.size() && std::llround(schedule_[next_event_].time_s / dt_) <= tick_) {
    due.push_back(schedule_[next_event_++]);
  }
  for (auto& e : injected_) {
    e.time_s = t;
    due.push_back(e);
  }
  injected_.clear();
  std::stable_sort(due.begin(), due.end(), [](const auto& a, const auto& b) { return a.time_s < b.time_s; });
  for (const auto& e : due) apply_event(e);

  update_stance_heights();

  // 2. Support context.
  const Vec3 external = external_force();
  const Vec2 v_h = ground(state_.com_velocity);
  Vec2 force_axis = config_.target_direction;
  if (v_h.norm() > 1e-3) {
    force_axis = v_h.normalized();
  } else if (ground(external).norm() > 1e-9) {
    force_axis = ground(external).normalized();
  }
  const slip::PullContext ctx =
      slip::PullContext::make(external, params_, balance::support_leg_axis(state_), lift(force_axis, 0.0));

  // 3. Decide.
  const balance::DecisionInputs inputs{state_, ctx, terrain_, config_, params_, swing_.status, yaws_, speed_trim_};
  const balance::BalanceDecision decision = balance::decide(inputs);

  if (decision.mode == Mode::kFallen) {
    fallen_ = true;
    pending_events_.push_back({"FALLEN"});
    ++tick_;
    solve_pose();
    fill_record(decision, external, Vec3::Zero());
    return record_;
  }

  Vec3 ankle = decision.ankle_force_N;
  auto& sw = swing_.status;
  const auto start_swing = [&](const slip::StepPlan& plan, Mode kind) {
    sw.active = true;
    sw.leg = plan.swing_leg;
    sw.kind = kind;
    sw.elapsed_s = 0.0;
    sw.plan = plan;
    auto& leg = state_.leg(plan.swing_leg);
    swing_.start = leg.foot_anchor;
    swing_.start_yaw_rad = yaws_[slip::index(plan.swing_leg)];
    leg.is_stance = false;
    trace::TraceEvent te;
    te.type = kind == Mode::kStep ? "STEP" : "COMFORT_STEP";
    te.leg = static_cast<int>(slip::index(plan.swing_leg));
    te.base_distance_m = plan.base_distance_m;
    te.biased_distance_m = plan.biased_distance_m;
    te.final_distance_m = plan.final_distance_m;
    te.position = plan.target_foot_position;
    pending_events_.push_back(te);
  };

  if (sw.active) {
    if (decision.step_plan) {
      const Side leg = sw.leg;
      sw.plan = *decision.step_plan;
      sw.plan.swing_leg = leg;
      if (decision.mode == Mode::kStep) sw.kind = Mode::kStep;
    }
  } else if (decision.mode == Mode::kStep && decision.step_plan) {
    start_swing(*decision.step_plan, Mode::kStep);
  } else if (decision.mode == Mode::kComfortStep && decision.step_plan && decision.lift_ready) {
    start_swing(*decision.step_plan, Mode::kComfortStep);
  } else if (decision.replant) {
    for (Side s : {Side::kLeft, Side::kRight}) {
      auto& leg = state_.leg(s);
      if (!leg.is_stance) {
        leg.is_stance = true;
        trace::TraceEvent te;
        te.type = "REPLANT";
        te.leg = static_cast<int>(slip::index(s));
        te.position = leg.foot_anchor;
        pending_events_.push_back(te);
      }
    }
  }

  // 4. Rest lengths, then dynamics.
  for (Side s : {Side::kLeft, Side::kRight}) {
    state_.leg(s).current_rest_length_m = decision.new_rest_lengths_m[slip::index(s)];
  }
  state_ = slip::integrate(state_, external, ankle, params_, dt_);
  step_speed_sum_ += ground(state_.com_velocity).dot(config_.target_direction);
  ++step_speed_ticks_;
  for (auto& p : pushes_) p.remaining_s -= dt_;
  std::erase_if(pushes_, [](const ActivePush& p) { return p.remaining_s <= 1e-9; });

  // 5. Swing advance and support exchange.
  if (sw.active) {
    sw.elapsed_s += dt_;
    if (sw.elapsed_s >= config_.swing_duration_s - 1e-9) {
      slip::StepPlan plan = sw.plan;
      Vec2 target = ground(plan.target_foot_position);
      const double t_next = time() + dt_;
      if (!terrain_.height_at(target, t_next)) {
        target = terrain::nearest_ground_toward(terrain_, target, ground(state_.com_position), t_next);
      }
      const double y = terrain_.height_at(target, t_next).value_or(plan.target_foot_position.y());
      plan.target_foot_position = lift(target, y);
      state_ = slip::exchange_support(state_, plan, y);
      yaws_[slip::index(plan.swing_leg)] = plan.target_yaw_rad;
      update_speed_trim();
      trace::TraceEvent te;
      te.type = "EXCHANGE";
      te.leg = static_cast<int>(slip::index(plan.swing_leg));
      te.position = plan.target_foot_position;
      pending_events_.push_back(te);
      sw = {};
    }
  }

  ++tick_;

  // 6. Kinematics and torque audit.
  solve_pose();
  fill_record(decision, external, ankle);
  return record_;
}

void Engine::fill_record(const balance::BalanceDecision& decision, const Vec3& external, const Vec3& ankle) {
  const pd::TorqueStats torques = servos_.track(pose_, dt_);

  std::vector<balance::FootPose> grounded;
  for (Side s : {Side::kLeft, Side::kRight}) {
    if (swing_.status.active && swing_.status.leg == s) continue;
    grounded.push_back({state_.leg(s).foot_anchor, yaws_[slip::index(s)]});
  }
  region_ = balance::build_support_region(grounded, config_.foot_radius_m);
  const balance::RegionClass rc = balance::classify_com(ground(state_.com_position), region_, config_);

  trace::TraceRecord r;
  r.tick = tick_ - 1;
  r.time_s = state_.sim_time_s;
  r.com_position = state_.com_position;
  r.com_velocity = state_.com_velocity;
  for (Side s : {Side::kLeft, Side::kRight}) {
    auto& f = r.feet[slip::index(s)];
    const bool swinging = swing_.status.active && swing_.status.leg == s;
    f.position = swinging ? swing_foot_position() : state_.leg(s).foot_anchor;
    f.yaw_rad = yaws_[slip::index(s)];
    f.stance = state_.leg(s).is_stance;
    f.swing = swinging;
  }
  r.region = rc.region;
  r.normalized_radius = rc.normalized_radius;
  r.mode = decision.mode;
  r.ankle_force_N = ankle;
  r.external_force_N = external;
  r.rest_lengths_m = {state_.legs[0].current_rest_length_m, state_.legs[1].current_rest_length_m};
  r.nominal_rest_length_m = params_.rest_length_m;
  r.events = std::move(pending_events_);
  pending_events_.clear();
  r.torque_max_Nm = torques.max_abs_Nm;
  r.torque_mean_Nm = torques.mean_abs_Nm;
  r.torque_max_dof = torques.max_dof;
  r.energy_J = slip::total_energy(state_, params_);
  r.spring_energy_J = slip::spring_energy(state_, params_);
  r.ik_shortfall_m = ik_shortfall_;
  r.target_speed_mps = config_.target_speed_mps;
  r.box_mass_kg = box_mass_;
  r.leg_scale = leg_scale_;
  r.platform_tilt_rad = terrain_.platform_tilt(state_.sim_time_s).angle_rad;
  r.fallen = fallen_;
  record_ = std::move(r);
}

// ---------------------------------------------------------------------------
// Snapshots

json Engine::snapshot() const {
  json legs = json::array();
  for (const auto& leg : state_.legs) {
    legs.push_back({{"anchor", vec(leg.foot_anchor)}, {"rest_length", leg.current_rest_length_m}, {"stance", leg.is_stance}});
  }
  json schedule = json::array();
  for (const auto& e : schedule_) schedule.push_back(scenario::to_json(e));
  json injected = json::array();
  for (const auto& e : injected_) injected.push_back(scenario::to_json(e));
  json pushes = json::array();
  for (const auto& p : pushes_) pushes.push_back({{"force", vec(p.force_N)}, {"remaining", p.remaining_s}});
  const auto& st = swing_.status;
  return {{"schema_version", kSnapshotSchemaVersion},
          {"scenario", scenario::to_json(scenario_)},
          {"tick", tick_},
          {"schedule", schedule},
          {"next_event", next_event_},
          {"injected", injected},
          {"state",
           {{"com", vec(state_.com_position)}, {"vel", vec(state_.com_velocity)}, {"legs", legs}, {"t", state_.sim_time_s}}},
          {"yaws", {yaws_[0], yaws_[1]}},
          {"swing",
           {{"active", st.active},
            {"leg", static_cast<int>(slip::index(st.leg))},
            {"kind", static_cast<int>(st.kind)},
            {"elapsed", st.elapsed_s},
            {"plan", plan_json(st.plan)},
            {"start", vec(swing_.start)},
            {"start_yaw", swing_.start_yaw_rad}}},
          {"pushes", pushes},
          {"box_mass", box_mass_},
          {"leg_scale", leg_scale_},
          {"fallen", fallen_},
          {"speed_trim", {speed_trim_, step_speed_sum_, step_speed_ticks_}},
          {"controller", scenario::to_json(config_)},
          {"target_direction", vec(config_.target_direction)},
          {"terrain", terrain::to_json(terrain_)},
          {"servos", servos_.to_json()},
          {"pose", pose_.joint_angles}};
}

Engine Engine::from_snapshot(const json& j) {
  try {
    const int version = j.at("schema_version").get<int>();
    if (version != kSnapshotSchemaVersion) {
      throw VersionError("snapshot: schema_version " + std::to_string(version) + " unsupported (expected " +
                         std::to_string(kSnapshotSchemaVersion) + ")");
    }
    Engine e(scenario::from_json(j.at("scenario")), false);
    e.tick_ = j.at("tick").get<long>();
    for (const auto& ev : j.at("schedule")) e.schedule_.push_back(scenario::event_from_json(ev));
    e.next_event_ = j.at("next_event").get<std::size_t>();
    for (const auto& ev : j.at("injected")) e.injected_.push_back(scenario::event_from_json(ev));
    const auto& s = j.at("state");
    e.state_.com_position = vec3(s.at("com"));
    e.state_.com_velocity = vec3(s.at("vel"));
    e.state_.sim_time_s = s.at("t").get<double>();
    for (std::size_t i = 0; i < 2; ++i) {
      const auto& leg = s.at("legs").at(i);
      e.state_.legs[i].foot_anchor = vec3(leg.at("anchor"));
      e.state_.legs[i].current_rest_length_m = leg.at("rest_length").get<double>();
      e.state_.legs[i].is_stance = leg.at("stance").get<bool>();
    }
    e.yaws_ = {j.at("yaws").at(0).get<double>(), j.at("yaws").at(1).get<double>()};
    const auto& sw = j.at("swing");
    e.swing_.status.active = sw.at("active").get<bool>();
    e.swing_.status.leg = sw.at("leg").get<int>() == 0 ? Side::kLeft : Side::kRight;
    e.swing_.status.kind = mode_from_int(sw.at("kind").get<int>());
    e.swing_.status.elapsed_s = sw.at("elapsed").get<double>();
    e.swing_.status.plan = plan_from(sw.at("plan"));
    e.swing_.start = vec3(sw.at("start"));
    e.swing_.start_yaw_rad = sw.at("start_yaw").get<double>();
    for (const auto& p : j.at("pushes")) e.pushes_.push_back({vec3(p.at("force")), p.at("remaining").get<double>()});
    e.box_mass_ = j.at("box_mass").get<double>();
    e.leg_scale_ = j.at("leg_scale").get<double>();
    e.fallen_ = j.at("fallen").get<bool>();
    const auto& trim = j.at("speed_trim");
    e.speed_trim_ = trim.at(0).get<double>();
    e.step_speed_sum_ = trim.at(1).get<double>();
    e.step_speed_ticks_ = trim.at(2).get<long>();
    e.config_ = scenario::controller_from_json(j.at("controller"));
    e.config_.target_direction = vec2(j.at("target_direction"));
    e.terrain_ = terrain::terrain_from_json(j.at("terrain"));
    e.refresh_params();
    e.pose_.joint_angles = j.at("pose").get<std::vector<double>>();
    if (e.leg_scale_ != 1.0) e.rebuild_skeleton();
    e.servos_.from_json(j.at("servos"));
    e.solve_pose();
    return e;
  } catch (const json::exception& ex) {
    throw ConfigError(std::string("snapshot: ") + ex.what());
  }
}

}  // namespace slipstep::engine
