#pragma once

// One interactive simulation session, independent of the transport.
//
// Wire messages are JSON text objects. Every message carries
//   "type", "session", "schema_version" (= kWireSchemaVersion) and "seq".
// Server seq numbers increase by one per message sent by the session; each
// client keeps its own increasing seq.
//
// Server -> client
//   HELLO    {tick, dt_s, decimation, scenario}
//   FRAME    {tick, time_s, paused, com, com_velocity, speed_mps, target_speed_mps,
//             joints: [{name, position}], feet: [{side, anchor, yaw_rad, stance, swing}],
//             support: {circles: [{center, radius}], capsule: {a, b, radius} | null},
//             region, normalized_radius, mode, events: [...], swing_target: [x,y,z] | null,
//             tick_us, overload, echo: [{seq, kind}]}
//   SNAPSHOT {snapshot}        reply to SNAPSHOT_REQUEST
//   TAPE     {scenario}        reply to TAPE_REQUEST; the session replayed as a scenario
//   ERROR    {message, reply_to}  malformed or rejected client message
//
// Client -> server
//   COMMAND  {command: {kind, ...}}
//     PUSH          {direction: [x, z], magnitude_N, duration_s}
//     SET_SPEED     {speed_mps}
//     SET_DIRECTION {yaw_rad}
//     TILT_PLATFORM {axis: "x" | "z", angle_rad}
//     SET_BOX_MASS  {mass_kg}
//     SET_LEG_SCALE {factor}
//     PAUSE | RESUME | RESET {seed}
//   SNAPSHOT_REQUEST, TAPE_REQUEST
//
// Vectors are [x, y, z] in metres, y up. Commands apply at the next tick boundary,
// in arrival order, and appear in the echo list of the next FRAME.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "slipstep/engine.hpp"
#include "slipstep/scenario.hpp"

namespace slipstep::live {

inline constexpr int kWireSchemaVersion = 1;
inline constexpr int kSessionSnapshotVersion = 1;

struct SessionOptions {
  std::string session_id = "session-1";
  int decimation = 2;  // broadcast every n-th tick
  double overload_us = 5000.0;
};

/// Commands applied at one tick, in order.
struct TapeEntry {
  long tick;
  nlohmann::json command;  // the client's command object
};

class Session {
 public:
  explicit Session(scenario::Scenario s, SessionOptions options = {});

  const std::string& id() const { return options_.session_id; }
  const SessionOptions& options() const { return options_; }
  const engine::Engine& engine() const { return engine_; }
  bool paused() const { return paused_; }
  long tick() const { return engine_.tick(); }
  bool finished() const { return engine_.finished(); }

  nlohmann::json hello();

  /// Parses one client message. Returns immediate replies (ERROR, SNAPSHOT, TAPE).
  /// Commands are queued for the next tick; PAUSE and RESUME queue like the rest.
  std::vector<nlohmann::json> receive(const std::string& text, int client_id = 0);

  /// Applies queued commands, then advances one tick unless paused or finished.
  /// Returns a FRAME when one is due: every `decimation` ticks, on FALLEN, and
  /// when commands were applied while paused.
  std::optional<nlohmann::json> advance(double tick_us = 0.0);

  /// Current state as a FRAME (consumes pending echoes).
  nlohmann::json frame(double tick_us = 0.0);

  /// Engine snapshot plus session fields.
  nlohmann::json snapshot() const;
  /// Throws VersionError on schema mismatch, ConfigError otherwise.
  static Session from_snapshot(const nlohmann::json& j);

  const std::vector<TapeEntry>& tape() const { return tape_; }
  /// The base scenario (after the last RESET) with the tape appended to its schedule.
  scenario::Scenario tape_scenario() const;

 private:
  nlohmann::json envelope(const char* type);
  nlohmann::json error(const std::string& message, const nlohmann::json& reply_to);
  /// Validates and converts; throws ConfigError.
  void check_command(const nlohmann::json& cmd) const;
  void apply(const nlohmann::json& cmd);

  scenario::Scenario base_;
  SessionOptions options_;
  engine::Engine engine_;
  bool paused_ = false;
  std::uint64_t seq_ = 0;
  std::map<int, std::int64_t> client_seq_;
  std::vector<nlohmann::json> queue_;
  std::vector<nlohmann::json> echo_;
  std::vector<trace::TraceEvent> events_;
  std::vector<TapeEntry> tape_;
  long ticks_since_frame_ = 0;
};

/// Converts a command object into the engine event it stands for (none for
/// PAUSE, RESUME and RESET). Throws ConfigError when malformed.
std::optional<scenario::Event> command_to_event(const nlohmann::json& cmd, const terrain::Terrain& terrain);

}  // namespace slipstep::live
