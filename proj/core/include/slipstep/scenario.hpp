#pragma once

// Scenario description: terrain, model/controller settings and a disturbance schedule.
//
// Scenario file schema (JSON, schema_version 1). Every key except "name" is optional.
//   {
//     "schema_version": 1,
//     "name": "flat-walk",
//     "description": "...",
//     "duration_s": 20.0,
//     "dt_s": 0.01,
//     "rng_seed": 42,
//     "terrain": { "kind": "flat" },                       // see terrain::to_json
//     "params": { "mass_kg": 89.5, "gravity_mps2": 9.81, "rest_length_m": 0.9,
//                 "spring_k": 12000, "damping_k": 700, "step_bias_gain": 0.4,
//                 "spring_error_gain": 0.5 },
//     "controller": { "target_speed_mps": 1.0, "target_yaw_deg": 0, "ankle_gain_k": 2000, ... },
//     "stiffness_mode": "fixed" | "mass_scaled",
//     "push_height_offset_m": 0.3,
//     "skeleton_file": "path.json", "gains_file": "path.json",
//     "schedule": [
//       { "t": 5.0, "kind": "PUSH", "force": [400, 0, 0], "duration": 0.2 },
//       { "t": 6.0, "kind": "BALL", "radius": 0.1, "density": 50, "velocity": [-10, 0, 0],
//         "origin": [3, 0.3, 0], "relative": true },
//       { "t": 7.0, "kind": "SET_TARGET", "speed": 1.0, "yaw_deg": 90 },
//       { "t": 8.0, "kind": "SET_BOX_MASS", "mass": 20 },
//       { "t": 9.0, "kind": "SET_LEG_SCALE", "factor": 1.2 },
//       { "t": 9.5, "kind": "TILT_PLATFORM", "axis": "x", "angle_deg": 10 }
//     ],
//     "random_pushes": { "count": 20, "start_s": 2, "end_s": 28, "min_N": 10, "max_N": 500,
//                        "min_s": 0.1, "max_s": 0.5 },
//     "random_balls": { "count": 30, "start_s": 2, "end_s": 28, "min_radius_m": 0.08,
//                       "max_radius_m": 0.15, "density": 50, "min_speed_mps": 6,
//                       "max_speed_mps": 14, "distance_m": 3.0, "miss_m": 0.4 }
//   }
// Random blocks are expanded into ordinary PUSH / BALL events from rng_seed.
// BALL origins with "relative": true are offsets from the COM at impact time.

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "slipstep/balance.hpp"
#include "slipstep/slip.hpp"
#include "slipstep/terrain.hpp"

namespace slipstep::scenario {

inline constexpr int kSchemaVersion = 1;
inline constexpr double kMaxPushN = 2000.0;

enum class EventKind { kPush, kBall, kSetTarget, kSetBoxMass, kSetLegScale, kTiltPlatform };
std::string_view to_string(EventKind k);

struct Ball {
  double radius_m = 0.1;
  double density_kgpm3 = 50.0;
  Vec3 velocity = Vec3::Zero();
  Vec3 origin = Vec3::Zero();
  bool relative = true;

  double mass_kg() const;
};

struct Event {
  double time_s = 0.0;
  EventKind kind = EventKind::kPush;
  // PUSH
  Vec3 force_N = Vec3::Zero();
  double duration_s = 0.0;
  // BALL
  Ball ball{};
  // SET_TARGET (either may be absent)
  std::optional<double> speed_mps;
  std::optional<double> yaw_rad;
  // SET_BOX_MASS / SET_LEG_SCALE
  double value = 0.0;
  // TILT_PLATFORM
  terrain::TiltAxis tilt_axis = terrain::TiltAxis::kX;
  double tilt_rad = 0.0;
};

struct RandomPushes {
  int count = 0;
  double start_s = 0.0, end_s = 0.0;
  double min_N = 10.0, max_N = 500.0;
  double min_s = 0.1, max_s = 0.5;
};

struct RandomBalls {
  int count = 0;
  double start_s = 0.0, end_s = 0.0;
  double min_radius_m = 0.08, max_radius_m = 0.15;
  double density_kgpm3 = 50.0;
  double min_speed_mps = 6.0, max_speed_mps = 14.0;
  double distance_m = 3.0;
  double miss_m = 0.4;  // lateral aim scatter; large values produce misses
};

enum class StiffnessMode { kFixed, kMassScaled };

struct Scenario {
  std::string name;
  std::string description;
  double duration_s = 10.0;
  double dt_s = 0.01;
  std::uint64_t rng_seed = 1;
  terrain::Terrain terrain{};
  slip::SlipParams params{};
  balance::ControllerConfig controller{};
  StiffnessMode stiffness_mode = StiffnessMode::kFixed;
  double push_height_offset_m = 0.3;
  std::string skeleton_file;
  std::string gains_file;
  std::vector<Event> schedule;  // sorted by time
  RandomPushes random_pushes{};
  RandomBalls random_balls{};

  /// Throws ConfigError on any invariant violation.
  void validate() const;
  long tick_count() const;
};

/// Schedule with random blocks expanded (deterministic in rng_seed) and sorted by
/// time; ties keep file order.
/// Range checks of a single event against the terrain it will act on.
void validate_event(const Event& e, const terrain::Terrain& t);

std::vector<Event> expanded_schedule(const Scenario& s);

nlohmann::json to_json(const Event& e);
Event event_from_json(const nlohmann::json& j);
nlohmann::json to_json(const Scenario& s);
/// Parses and validates. Throws ConfigError (VersionError on schema mismatch).
Scenario from_json(const nlohmann::json& j);
Scenario load(const std::string& path);

nlohmann::json to_json(const slip::SlipParams& p);
slip::SlipParams params_from_json(const nlohmann::json& j, slip::SlipParams base = {});
nlohmann::json to_json(const balance::ControllerConfig& c);
balance::ControllerConfig controller_from_json(const nlohmann::json& j, balance::ControllerConfig base = {});

/// The built-in pack: flat-walk, slope-25, stairs, gaps-0.2, push-storm, ball-storm,
/// rotating-platform-45, box-hold, leg-morph, crouch-walk.
std::vector<std::string> builtin_names();
/// Throws ConfigError for an unknown name.
Scenario builtin(const std::string& name);

/// Scenario from a path, or a built-in when no such file exists and the name matches.
Scenario resolve(const std::string& name_or_path);

/// Uniform doubles from std::mt19937_64. The engine output is standardized; the
/// conversion to [0, 1) is done here because std distributions are not portable.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

 private:
  std::mt19937_64 engine_;
};

}  // namespace slipstep::scenario
