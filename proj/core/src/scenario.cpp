#include "slipstep/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <initializer_list>

#include <nlohmann/json.hpp>

#include "slipstep/errors.hpp"

namespace slipstep::scenario {

using nlohmann::json;

std::string_view to_string(EventKind k) {
  switch (k) {
    case EventKind::kPush: return "PUSH";
    case EventKind::kBall: return "BALL";
    case EventKind::kSetTarget: return "SET_TARGET";
    case EventKind::kSetBoxMass: return "SET_BOX_MASS";
    case EventKind::kSetLegScale: return "SET_LEG_SCALE";
    case EventKind::kTiltPlatform: return "TILT_PLATFORM";
  }
  return "?";
}

double Ball::mass_kg() const { return density_kgpm3 * 4.0 / 3.0 * kPi * radius_m * radius_m * radius_m; }

long Scenario::tick_count() const { return std::lround(duration_s / dt_s); }

void validate_event(const Event& e, const terrain::Terrain& t) {
  switch (e.kind) {
    case EventKind::kPush:
      if (!e.force_N.allFinite() || e.force_N.norm() > kMaxPushN) {
        throw ConfigError("scenario: push magnitude outside [0, 2000] N");
      }
      if (!(e.duration_s > 0.0)) throw ConfigError("scenario: push duration must be > 0");
      break;
    case EventKind::kBall:
      if (!(e.ball.radius_m > 0.0) || !(e.ball.density_kgpm3 > 0.0)) throw ConfigError("scenario: ball radius and density must be > 0");
      if (!e.ball.velocity.allFinite() || !e.ball.origin.allFinite()) throw ConfigError("scenario: ball vectors must be finite");
      break;
    case EventKind::kSetTarget:
      if (e.speed_mps && !(*e.speed_mps >= 0.0 && *e.speed_mps <= 5.0)) throw ConfigError("scenario: target speed outside [0, 5]");
      if (e.yaw_rad && !std::isfinite(*e.yaw_rad)) throw ConfigError("scenario: target yaw must be finite");
      break;
    case EventKind::kSetBoxMass:
      if (!(e.value >= 0.0 && e.value <= 200.0)) throw ConfigError("scenario: box mass outside [0, 200] kg");
      break;
    case EventKind::kSetLegScale:
      if (!(e.value >= 0.5 && e.value <= 1.5)) throw ConfigError("scenario: leg scale outside [0.5, 1.5]");
      break;
    case EventKind::kTiltPlatform:
      if (!std::holds_alternative<terrain::RotatingPlatform>(t.kind())) {
        throw ConfigError("scenario: TILT_PLATFORM needs rotating_platform terrain");
      }
      if (!(std::abs(e.tilt_rad) <= deg2rad(45.0) + 1e-12)) throw ConfigError("scenario: platform tilt above 45 degrees");
      break;
  }
}

void Scenario::validate() const {
  if (name.empty()) throw ConfigError("scenario: name is required");
  if (!(duration_s >= 0.0) || !std::isfinite(duration_s)) throw ConfigError("scenario: duration_s must be >= 0");
  if (!(dt_s > 0.0 && dt_s <= 0.1)) throw ConfigError("scenario: dt_s must be in (0, 0.1]");
  params.validate();
  controller.validate();
  terrain.validate();
  double last = -1e300;
  for (const auto& e : schedule) {
    if (!std::isfinite(e.time_s) || e.time_s < 0.0) throw ConfigError("scenario: event time must be >= 0");
    if (e.time_s < last) throw ConfigError("scenario: schedule must be sorted by time");
    last = e.time_s;
    validate_event(e, terrain);
  }
  const auto window = [](double a, double b, const char* what) {
    if (!(a >= 0.0 && b >= a)) throw ConfigError(std::string("scenario: ") + what + " window invalid");
  };
  if (random_pushes.count < 0 || random_balls.count < 0) throw ConfigError("scenario: random counts must be >= 0");
  if (random_pushes.count > 0) {
    window(random_pushes.start_s, random_pushes.end_s, "random_pushes");
    if (!(random_pushes.min_N >= 0.0 && random_pushes.max_N >= random_pushes.min_N && random_pushes.max_N <= kMaxPushN)) {
      throw ConfigError("scenario: random push magnitudes invalid");
    }
    if (!(random_pushes.min_s > 0.0 && random_pushes.max_s >= random_pushes.min_s)) {
      throw ConfigError("scenario: random push durations invalid");
    }
  }
  if (random_balls.count > 0) {
    window(random_balls.start_s, random_balls.end_s, "random_balls");
    if (!(random_balls.min_radius_m > 0.0 && random_balls.max_radius_m >= random_balls.min_radius_m)) {
      throw ConfigError("scenario: random ball radii invalid");
    }
    if (!(random_balls.min_speed_mps > 0.0 && random_balls.max_speed_mps >= random_balls.min_speed_mps)) {
      throw ConfigError("scenario: random ball speeds invalid");
    }
  }
}

std::vector<Event> expanded_schedule(const Scenario& s) {
  std::vector<Event> out = s.schedule;
  Rng rng(s.rng_seed);
  const auto& rp = s.random_pushes;
  for (int i = 0; i < rp.count; ++i) {
    Event e;
    e.kind = EventKind::kPush;
    e.time_s = rng.uniform(rp.start_s, rp.end_s);
    const double angle = rng.uniform(0.0, 2.0 * kPi);
    const double magnitude = rng.uniform(rp.min_N, rp.max_N);
    e.duration_s = rng.uniform(rp.min_s, rp.max_s);
    e.force_N = lift(magnitude * direction_of(angle), 0.0);
    out.push_back(e);
  }
  const auto& rb = s.random_balls;
  for (int i = 0; i < rb.count; ++i) {
    Event e;
    e.kind = EventKind::kBall;
    e.time_s = rng.uniform(rb.start_s, rb.end_s);
    const double angle = rng.uniform(0.0, 2.0 * kPi);
    const double height = rng.uniform(0.1, 0.6);
    const double miss = rng.uniform(-rb.miss_m, rb.miss_m);
    const double speed = rng.uniform(rb.min_speed_mps, rb.max_speed_mps);
    e.ball.radius_m = rng.uniform(rb.min_radius_m, rb.max_radius_m);
    e.ball.density_kgpm3 = rb.density_kgpm3;
    const Vec2 from = direction_of(angle);
    e.ball.origin = lift(rb.distance_m * from + miss * left_of(from), height);
    e.ball.velocity = lift(-speed * from, 0.0);
    e.ball.relative = true;
    out.push_back(e);
  }
  std::stable_sort(out.begin(), out.end(), [](const Event& a, const Event& b) { return a.time_s < b.time_s; });
  return out;
}

// ---------------------------------------------------------------------------
// JSON

namespace {

void check_keys(const json& j, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + ": expected an object");
  for (const auto& [key, value] : j.items()) {
    if (std::find_if(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; }) == allowed.end()) {
      throw ConfigError(where + ": unknown key '" + key + "'");
    }
  }
}

Vec3 vec3(const json& j, const std::string& what) {
  if (!j.is_array() || j.size() != 3) throw ConfigError("scenario: '" + what + "' must be [x, y, z]");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

json vec3_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

template <typename T>
void read(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace

json to_json(const slip::SlipParams& p) {
  return {{"mass_kg", p.mass_kg},         {"gravity_mps2", p.gravity_mps2}, {"rest_length_m", p.rest_length_m},
          {"spring_k", p.spring_k},       {"damping_k", p.damping_k},       {"step_bias_gain", p.step_bias_gain},
          {"spring_error_gain", p.spring_error_gain}};
}

slip::SlipParams params_from_json(const json& j, slip::SlipParams p) {
  check_keys(j, {"mass_kg", "gravity_mps2", "rest_length_m", "spring_k", "damping_k", "step_bias_gain", "spring_error_gain"},
             "params");
  read(j, "mass_kg", p.mass_kg);
  read(j, "gravity_mps2", p.gravity_mps2);
  read(j, "rest_length_m", p.rest_length_m);
  read(j, "spring_k", p.spring_k);
  read(j, "damping_k", p.damping_k);
  read(j, "step_bias_gain", p.step_bias_gain);
  read(j, "spring_error_gain", p.spring_error_gain);
  return p;
}

json to_json(const balance::ControllerConfig& c) {
  return {{"target_speed_mps", c.target_speed_mps},
          {"target_yaw_deg", rad2deg(yaw_of(c.target_direction))},
          {"ankle_gain_k", c.ankle_gain_k},
          {"ankle_damping_c", c.ankle_damping_c},
          {"r_inner", c.r_inner},
          {"comfort_yaw_limit_deg", rad2deg(c.comfort_yaw_limit_rad)},
          {"comfort_lateral_min_m", c.comfort_margins.lateral_min_m},
          {"comfort_lateral_max_m", c.comfort_margins.lateral_max_m},
          {"swing_duration_s", c.swing_duration_s},
          {"fall_height_fraction", c.fall_height_fraction},
          {"foot_radius_m", c.foot_radius_m},
          {"max_turn_per_step_deg", rad2deg(c.max_turn_per_step_rad)},
          {"nominal_slot_offset_m", c.nominal_slot_offset_m},
          {"swing_apex_m", c.swing_apex_m},
          {"gait_lateral_offset_m", c.gait_lateral_offset_m},
          {"speed_feedback_gain", c.speed_feedback_gain},
          {"max_step_m", c.max_step_m},
          {"settle_force_N", c.settle_force_N}};
}

balance::ControllerConfig controller_from_json(const json& j, balance::ControllerConfig c) {
  check_keys(j,
             {"target_speed_mps", "target_yaw_deg", "ankle_gain_k", "ankle_damping_c", "r_inner", "comfort_yaw_limit_deg",
              "comfort_lateral_min_m", "comfort_lateral_max_m", "swing_duration_s", "fall_height_fraction",
              "foot_radius_m", "max_turn_per_step_deg", "nominal_slot_offset_m", "swing_apex_m",
              "gait_lateral_offset_m", "speed_feedback_gain", "max_step_m", "settle_force_N"},
             "controller");
  read(j, "target_speed_mps", c.target_speed_mps);
  if (j.contains("target_yaw_deg")) c.target_direction = direction_of(deg2rad(j.at("target_yaw_deg").get<double>()));
  read(j, "ankle_gain_k", c.ankle_gain_k);
  read(j, "ankle_damping_c", c.ankle_damping_c);
  read(j, "r_inner", c.r_inner);
  if (j.contains("comfort_yaw_limit_deg")) c.comfort_yaw_limit_rad = deg2rad(j.at("comfort_yaw_limit_deg").get<double>());
  read(j, "comfort_lateral_min_m", c.comfort_margins.lateral_min_m);
  read(j, "comfort_lateral_max_m", c.comfort_margins.lateral_max_m);
  read(j, "swing_duration_s", c.swing_duration_s);
  read(j, "fall_height_fraction", c.fall_height_fraction);
  read(j, "foot_radius_m", c.foot_radius_m);
  if (j.contains("max_turn_per_step_deg")) c.max_turn_per_step_rad = deg2rad(j.at("max_turn_per_step_deg").get<double>());
  read(j, "nominal_slot_offset_m", c.nominal_slot_offset_m);
  read(j, "swing_apex_m", c.swing_apex_m);
  read(j, "gait_lateral_offset_m", c.gait_lateral_offset_m);
  read(j, "speed_feedback_gain", c.speed_feedback_gain);
  read(j, "max_step_m", c.max_step_m);
  read(j, "settle_force_N", c.settle_force_N);
  return c;
}

json to_json(const Event& e) {
  json j{{"t", e.time_s}, {"kind", std::string(to_string(e.kind))}};
  switch (e.kind) {
    case EventKind::kPush:
      j["force"] = vec3_json(e.force_N);
      j["duration"] = e.duration_s;
      break;
    case EventKind::kBall:
      j["radius"] = e.ball.radius_m;
      j["density"] = e.ball.density_kgpm3;
      j["velocity"] = vec3_json(e.ball.velocity);
      j["origin"] = vec3_json(e.ball.origin);
      j["relative"] = e.ball.relative;
      break;
    case EventKind::kSetTarget:
      if (e.speed_mps) j["speed"] = *e.speed_mps;
      if (e.yaw_rad) j["yaw_deg"] = rad2deg(*e.yaw_rad);
      break;
    case EventKind::kSetBoxMass: j["mass"] = e.value; break;
    case EventKind::kSetLegScale: j["factor"] = e.value; break;
    case EventKind::kTiltPlatform:
      j["axis"] = e.tilt_axis == terrain::TiltAxis::kX ? "x" : "z";
      j["angle_deg"] = rad2deg(e.tilt_rad);
      break;
  }
  return j;
}

Event event_from_json(const json& j) {
  Event e;
  const std::string kind = j.at("kind").get<std::string>();
  e.time_s = j.at("t").get<double>();
  if (kind == "PUSH") {
    check_keys(j, {"t", "kind", "force", "duration"}, "PUSH event");
    e.kind = EventKind::kPush;
    e.force_N = vec3(j.at("force"), "force");
    e.duration_s = j.at("duration").get<double>();
  } else if (kind == "BALL") {
    check_keys(j, {"t", "kind", "radius", "density", "velocity", "origin", "relative"}, "BALL event");
    e.kind = EventKind::kBall;
    e.ball.radius_m = j.at("radius").get<double>();
    e.ball.density_kgpm3 = j.value("density", 50.0);
    e.ball.velocity = vec3(j.at("velocity"), "velocity");
    e.ball.origin = vec3(j.at("origin"), "origin");
    e.ball.relative = j.value("relative", true);
  } else if (kind == "SET_TARGET") {
    check_keys(j, {"t", "kind", "speed", "yaw_deg"}, "SET_TARGET event");
    e.kind = EventKind::kSetTarget;
    if (j.contains("speed")) e.speed_mps = j.at("speed").get<double>();
    if (j.contains("yaw_deg")) e.yaw_rad = deg2rad(j.at("yaw_deg").get<double>());
    if (!e.speed_mps && !e.yaw_rad) throw ConfigError("SET_TARGET event: needs speed and/or yaw_deg");
  } else if (kind == "SET_BOX_MASS") {
    check_keys(j, {"t", "kind", "mass"}, "SET_BOX_MASS event");
    e.kind = EventKind::kSetBoxMass;
    e.value = j.at("mass").get<double>();
  } else if (kind == "SET_LEG_SCALE") {
    check_keys(j, {"t", "kind", "factor"}, "SET_LEG_SCALE event");
    e.kind = EventKind::kSetLegScale;
    e.value = j.at("factor").get<double>();
  } else if (kind == "TILT_PLATFORM") {
    check_keys(j, {"t", "kind", "axis", "angle_deg"}, "TILT_PLATFORM event");
    e.kind = EventKind::kTiltPlatform;
    const std::string axis = j.at("axis").get<std::string>();
    if (axis != "x" && axis != "z") throw ConfigError("TILT_PLATFORM event: axis must be 'x' or 'z'");
    e.tilt_axis = axis == "x" ? terrain::TiltAxis::kX : terrain::TiltAxis::kZ;
    e.tilt_rad = deg2rad(j.at("angle_deg").get<double>());
  } else {
    throw ConfigError("scenario: unknown event kind '" + kind + "'");
  }
  return e;
}

json to_json(const Scenario& s) {
  json schedule = json::array();
  for (const auto& e : s.schedule) schedule.push_back(to_json(e));
  json j{{"schema_version", kSchemaVersion},
         {"name", s.name},
         {"description", s.description},
         {"duration_s", s.duration_s},
         {"dt_s", s.dt_s},
         {"rng_seed", s.rng_seed},
         {"terrain", terrain::to_json(s.terrain)},
         {"params", to_json(s.params)},
         {"controller", to_json(s.controller)},
         {"stiffness_mode", s.stiffness_mode == StiffnessMode::kFixed ? "fixed" : "mass_scaled"},
         {"push_height_offset_m", s.push_height_offset_m},
         {"schedule", schedule}};
  if (!s.skeleton_file.empty()) j["skeleton_file"] = s.skeleton_file;
  if (!s.gains_file.empty()) j["gains_file"] = s.gains_file;
  if (s.random_pushes.count > 0) {
    const auto& r = s.random_pushes;
    j["random_pushes"] = {{"count", r.count}, {"start_s", r.start_s}, {"end_s", r.end_s}, {"min_N", r.min_N},
                          {"max_N", r.max_N}, {"min_s", r.min_s},     {"max_s", r.max_s}};
  }
  if (s.random_balls.count > 0) {
    const auto& r = s.random_balls;
    j["random_balls"] = {{"count", r.count},
                         {"start_s", r.start_s},
                         {"end_s", r.end_s},
                         {"min_radius_m", r.min_radius_m},
                         {"max_radius_m", r.max_radius_m},
                         {"density", r.density_kgpm3},
                         {"min_speed_mps", r.min_speed_mps},
                         {"max_speed_mps", r.max_speed_mps},
                         {"distance_m", r.distance_m},
                         {"miss_m", r.miss_m}};
  }
  return j;
}

Scenario from_json(const json& j) {
  try {
    check_keys(j,
               {"schema_version", "name", "description", "duration_s", "dt_s", "rng_seed", "terrain", "params",
                "controller", "stiffness_mode", "push_height_offset_m", "skeleton_file", "gains_file", "schedule",
                "random_pushes", "random_balls"},
               "scenario");
    const int version = j.value("schema_version", kSchemaVersion);
    if (version != kSchemaVersion) {
      throw VersionError("scenario: schema_version " + std::to_string(version) + " unsupported (expected " +
                         std::to_string(kSchemaVersion) + ")");
    }
    Scenario s;
    s.name = j.at("name").get<std::string>();
    read(j, "description", s.description);
    read(j, "duration_s", s.duration_s);
    read(j, "dt_s", s.dt_s);
    read(j, "rng_seed", s.rng_seed);
    if (j.contains("terrain")) s.terrain = terrain::terrain_from_json(j.at("terrain"));
    if (j.contains("params")) s.params = params_from_json(j.at("params"));
    if (j.contains("controller")) s.controller = controller_from_json(j.at("controller"));
    if (j.contains("stiffness_mode")) {
      const std::string mode = j.at("stiffness_mode").get<std::string>();
      if (mode == "fixed") {
        s.stiffness_mode = StiffnessMode::kFixed;
      } else if (mode == "mass_scaled") {
        s.stiffness_mode = StiffnessMode::kMassScaled;
      } else {
        throw ConfigError("scenario: stiffness_mode must be 'fixed' or 'mass_scaled'");
      }
    }
    read(j, "push_height_offset_m", s.push_height_offset_m);
    read(j, "skeleton_file", s.skeleton_file);
    read(j, "gains_file", s.gains_file);
    if (j.contains("schedule")) {
      for (const auto& e : j.at("schedule")) s.schedule.push_back(event_from_json(e));
    }
    if (j.contains("random_pushes")) {
      const auto& r = j.at("random_pushes");
      check_keys(r, {"count", "start_s", "end_s", "min_N", "max_N", "min_s", "max_s"}, "random_pushes");
      auto& o = s.random_pushes;
      read(r, "count", o.count);
      read(r, "start_s", o.start_s);
      o.end_s = r.value("end_s", s.duration_s);
      read(r, "min_N", o.min_N);
      read(r, "max_N", o.max_N);
      read(r, "min_s", o.min_s);
      read(r, "max_s", o.max_s);
    }
    if (j.contains("random_balls")) {
      const auto& r = j.at("random_balls");
      check_keys(r,
                 {"count", "start_s", "end_s", "min_radius_m", "max_radius_m", "density", "min_speed_mps",
                  "max_speed_mps", "distance_m", "miss_m"},
                 "random_balls");
      auto& o = s.random_balls;
      read(r, "count", o.count);
      read(r, "start_s", o.start_s);
      o.end_s = r.value("end_s", s.duration_s);
      read(r, "min_radius_m", o.min_radius_m);
      read(r, "max_radius_m", o.max_radius_m);
      read(r, "density", o.density_kgpm3);
      read(r, "min_speed_mps", o.min_speed_mps);
      read(r, "max_speed_mps", o.max_speed_mps);
      read(r, "distance_m", o.distance_m);
      read(r, "miss_m", o.miss_m);
    }
    s.validate();
    return s;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("scenario: ") + e.what());
  }
}

Scenario load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open scenario file '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError("scenario '" + path + "': " + e.what());
  }
  return from_json(j);
}

// ---------------------------------------------------------------------------
// Built-in pack

namespace {

Scenario walk_base(std::string name, std::string description, double speed, double duration) {
  Scenario s;
  s.name = std::move(name);
  s.description = std::move(description);
  s.duration_s = duration;
  s.rng_seed = 42;
  s.controller.target_speed_mps = speed;
  return s;
}

Event push(double t, Vec3 force, double duration) {
  Event e;
  e.time_s = t;
  e.kind = EventKind::kPush;
  e.force_N = force;
  e.duration_s = duration;
  return e;
}

Event scalar_event(double t, EventKind kind, double value) {
  Event e;
  e.time_s = t;
  e.kind = kind;
  e.value = value;
  return e;
}

}  // namespace

std::vector<std::string> builtin_names() {
  return {"flat-walk", "slope-25", "stairs",   "gaps-0.2",  "push-storm",
          "ball-storm", "rotating-platform-45", "box-hold", "leg-morph", "crouch-walk"};
}

Scenario builtin(const std::string& name) {
  Scenario s;
  if (name == "flat-walk") {
    s = walk_base(name, "Steady walking on flat ground at 1 m/s", 1.0, 20.0);
  } else if (name == "slope-25") {
    s = walk_base(name, "Walking up a 25 degree incline", 0.8, 20.0);
    s.terrain = terrain::Terrain(terrain::Slope{deg2rad(25.0), {1.0, 0.0}});
  } else if (name == "stairs") {
    s = walk_base(name, "Climbing stairs (0.17 m rise, 0.28 m run)", 0.6, 20.0);
    s.terrain = terrain::Terrain(terrain::Stairs{});
  } else if (name == "gaps-0.2") {
    s = walk_base(name, "Walking over 0.2 m wide gaps", 1.0, 20.0);
    s.terrain = terrain::Terrain(terrain::Gaps{});
  } else if (name == "push-storm") {
    s = walk_base(name, "Walking under random upper-body pushes (10-500 N, 0.1-0.5 s)", 1.0, 30.0);
    s.random_pushes = {20, 2.0, 28.0, 10.0, 500.0, 0.1, 0.5};
  } else if (name == "ball-storm") {
    s = walk_base(name, "Standing under a volley of light balls (50 kg/m^3)", 0.0, 30.0);
    s.random_balls.count = 40;
    s.random_balls.start_s = 2.0;
    s.random_balls.end_s = 28.0;
  } else if (name == "rotating-platform-45") {
    s = walk_base(name, "Standing on a platform gyrating up to 45 degrees with 100 N pushes", 0.0, 60.0);
    s.terrain = terrain::Terrain(terrain::RotatingPlatform{});
    for (int i = 0; i < 11; ++i) {
      s.schedule.push_back(push(5.0 + 5.0 * i, lift(100.0 * direction_of(deg2rad(67.0 * i)), 0.0), 0.2));
    }
  } else if (name == "box-hold") {
    s = walk_base(name, "Walking while carrying a box whose mass changes", 0.8, 20.0);
    s.schedule.push_back(scalar_event(2.0, EventKind::kSetBoxMass, 10.0));
    s.schedule.push_back(scalar_event(8.0, EventKind::kSetBoxMass, 25.0));
    s.schedule.push_back(scalar_event(14.0, EventKind::kSetBoxMass, 0.0));
  } else if (name == "leg-morph") {
    s = walk_base(name, "Walking while the leg length morphs between 0.8x and 1.2x", 0.8, 20.0);
    s.schedule.push_back(scalar_event(4.0, EventKind::kSetLegScale, 0.8));
    s.schedule.push_back(scalar_event(9.0, EventKind::kSetLegScale, 1.2));
    s.schedule.push_back(scalar_event(14.0, EventKind::kSetLegScale, 1.0));
  } else if (name == "crouch-walk") {
    s = walk_base(name, "Crouched walking with the default leg rest length halved", 0.5, 20.0);
    s.params.rest_length_m = 0.45;
  } else {
    throw ConfigError("unknown built-in scenario '" + name + "'");
  }
  s.validate();
  return s;
}

Scenario resolve(const std::string& name_or_path) {
  std::error_code ec;
  if (std::filesystem::is_regular_file(name_or_path, ec)) return load(name_or_path);
  const auto names = builtin_names();
  if (std::find(names.begin(), names.end(), name_or_path) != names.end()) return builtin(name_or_path);
  throw IoError("no scenario file or built-in named '" + name_or_path + "'");
}

}  // namespace slipstep::scenario
