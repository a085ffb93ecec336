#pragma once

// Per-tick trace records, their NDJSON / CSV encodings and run summaries.
//
// NDJSON trace: the first line is a header
//   {"type":"header","schema_version":1,"scenario":{...},"columns":[...]}
// followed by one {"type":"tick", ...} object per tick (fields as in to_json).
// CSV trace: fixed column order csv_columns(), one row per tick.
// Neither encoding contains wall-clock timings, so identical runs give identical bytes.

#include <array>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "slipstep/balance.hpp"
#include "slipstep/math.hpp"

namespace slipstep::trace {

inline constexpr int kSchemaVersion = 1;

struct TraceEvent {
  std::string type;  // STEP, COMFORT_STEP, EXCHANGE, REPLANT, PUSH, BALL_HIT, BALL_MISS, SET_TARGET, ...
  int leg = -1;      // 0 left, 1 right
  double base_distance_m = 0.0;
  double biased_distance_m = 0.0;
  double final_distance_m = 0.0;
  Vec3 position = Vec3::Zero();
  Vec3 vector = Vec3::Zero();
  double value = 0.0;
};

struct FootRecord {
  Vec3 position = Vec3::Zero();
  double yaw_rad = 0.0;
  bool stance = true;
  bool swing = false;
};

struct TraceRecord {
  long tick = 0;
  double time_s = 0.0;
  Vec3 com_position = Vec3::Zero();
  Vec3 com_velocity = Vec3::Zero();
  std::array<FootRecord, 2> feet{};
  balance::Region region = balance::Region::kInner;
  double normalized_radius = 0.0;
  balance::Mode mode = balance::Mode::kStandSway;
  Vec3 ankle_force_N = Vec3::Zero();
  Vec3 external_force_N = Vec3::Zero();
  std::array<double, 2> rest_lengths_m{0.9, 0.9};
  double nominal_rest_length_m = 0.9;
  std::vector<TraceEvent> events;
  double torque_max_Nm = 0.0;
  double torque_mean_Nm = 0.0;
  int torque_max_dof = -1;
  double energy_J = 0.0;
  double spring_energy_J = 0.0;
  double ik_shortfall_m = 0.0;
  double target_speed_mps = 0.0;
  double box_mass_kg = 0.0;
  double leg_scale = 1.0;
  double platform_tilt_rad = 0.0;
  bool fallen = false;

  double horizontal_speed() const { return ground(com_velocity).norm(); }
  bool has_event(std::string_view type) const;
};

nlohmann::json to_json(const TraceEvent& e);
TraceEvent event_from_json(const nlohmann::json& j);
nlohmann::json to_json(const TraceRecord& r);
TraceRecord record_from_json(const nlohmann::json& j);

/// Column names of the CSV encoding, in order.
const std::vector<std::string>& csv_columns();
void write_csv_header(std::ostream& out);
void write_csv_row(std::ostream& out, const TraceRecord& r);

/// Shortest round-trip decimal form, used by the CSV writer.
std::string format_double(double v);

nlohmann::json header_json(const nlohmann::json& scenario);
void write_ndjson(std::ostream& out, const nlohmann::json& header, const std::vector<TraceRecord>& records);

struct LoadedTrace {
  nlohmann::json header;
  std::vector<TraceRecord> records;
};
/// Throws IoError if unreadable, ConfigError if malformed or of another schema version.
LoadedTrace read_ndjson(const std::string& path);

/// Plot-ready export columns: time_s, speed_mps, step_events, ankle_force_N and the
/// other names accepted by export_columns.
const std::vector<std::string>& export_column_names();
/// Writes the requested columns (default set when empty). Throws ConfigError for
/// an unknown column.
void export_columns(std::ostream& out, const std::vector<TraceRecord>& records, const std::vector<std::string>& columns);

struct ComputeStats {
  double p50_us = 0.0;
  double p99_us = 0.0;
  double max_us = 0.0;
  double mean_us = 0.0;
};
ComputeStats compute_stats(std::vector<double> tick_us);

struct Summary {
  bool empty = true;
  long ticks = 0;
  double duration_s = 0.0;
  double window_start_s = 3.0;
  double mean_speed_mps = 0.0;
  double min_speed_mps = 0.0;
  double max_speed_mps = 0.0;
  int step_count = 0;          // corrective/gait steps started
  int comfort_step_count = 0;
  int exchange_count = 0;
  int sway_recoveries = 0;     // MARGIN/OUTSIDE excursions that returned to INNER without a step
  bool fallen = false;
  std::optional<double> fall_time_s;
  double max_torque_Nm = 0.0;
  bool rest_length_invariant = true;  // max(rest lengths) == nominal every tick
  ComputeStats compute{};
};

/// Metrics over a trace; speed statistics use ticks with time >= transient_s.
Summary summarize(const std::vector<TraceRecord>& records, const std::vector<double>& tick_us = {},
                  double transient_s = 3.0);
nlohmann::json to_json(const Summary& s);

}  // namespace slipstep::trace
