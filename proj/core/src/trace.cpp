#include "slipstep/trace.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <ostream>

#include <nlohmann/json.hpp>

#include "slipstep/errors.hpp"

namespace slipstep::trace {

using nlohmann::json;

bool TraceRecord::has_event(std::string_view type) const {
  return std::any_of(events.begin(), events.end(), [&](const TraceEvent& e) { return e.type == type; });
}

namespace {

json vec(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }
Vec3 vec(const json& j) { return {j.at(0).get<double>(), j.at(1).get<double>(), j.at(2).get<double>()}; }

balance::Region region_from(const std::string& s) {
  if (s == "INNER") return balance::Region::kInner;
  if (s == "MARGIN") return balance::Region::kMargin;
  if (s == "OUTSIDE") return balance::Region::kOutside;
  throw ConfigError("trace: unknown region '" + s + "'");
}

balance::Mode mode_from(const std::string& s) {
  if (s == "STAND_SWAY") return balance::Mode::kStandSway;
  if (s == "STEP") return balance::Mode::kStep;
  if (s == "COMFORT_STEP") return balance::Mode::kComfortStep;
  if (s == "FALLEN") return balance::Mode::kFallen;
  throw ConfigError("trace: unknown mode '" + s + "'");
}

}  // namespace

json to_json(const TraceEvent& e) {
  json je{{"type", e.type}};
  if (e.leg >= 0) je["leg"] = e.leg;
  if (e.type == "STEP" || e.type == "COMFORT_STEP") {
    je["d"] = e.base_distance_m;
    je["d_biased"] = e.biased_distance_m;
    je["d_final"] = e.final_distance_m;
  }
  if (!e.position.isZero(0.0)) je["position"] = vec(e.position);
  if (!e.vector.isZero(0.0)) je["vector"] = vec(e.vector);
  if (e.value != 0.0) je["value"] = e.value;
  return je;
}

TraceEvent event_from_json(const json& je) {
  TraceEvent e;
  e.type = je.at("type").get<std::string>();
  e.leg = je.value("leg", -1);
  e.base_distance_m = je.value("d", 0.0);
  e.biased_distance_m = je.value("d_biased", 0.0);
  e.final_distance_m = je.value("d_final", 0.0);
  if (je.contains("position")) e.position = vec(je.at("position"));
  if (je.contains("vector")) e.vector = vec(je.at("vector"));
  e.value = je.value("value", 0.0);
  return e;
}

json to_json(const TraceRecord& r) {
  json events = json::array();
  for (const auto& e : r.events) events.push_back(to_json(e));
  json feet = json::array();
  for (const auto& f : r.feet) {
    feet.push_back({{"position", vec(f.position)}, {"yaw", f.yaw_rad}, {"stance", f.stance}, {"swing", f.swing}});
  }
  return {{"type", "tick"},
          {"tick", r.tick},
          {"t", r.time_s},
          {"com", vec(r.com_position)},
          {"vel", vec(r.com_velocity)},
          {"feet", feet},
          {"region", std::string(balance::to_string(r.region))},
          {"normalized_radius", r.normalized_radius},
          {"mode", std::string(balance::to_string(r.mode))},
          {"ankle_force", vec(r.ankle_force_N)},
          {"external_force", vec(r.external_force_N)},
          {"rest_lengths", {r.rest_lengths_m[0], r.rest_lengths_m[1]}},
          {"nominal_rest_length", r.nominal_rest_length_m},
          {"events", events},
          {"torque_max", r.torque_max_Nm},
          {"torque_mean", r.torque_mean_Nm},
          {"torque_max_dof", r.torque_max_dof},
          {"energy", r.energy_J},
          {"spring_energy", r.spring_energy_J},
          {"ik_shortfall", r.ik_shortfall_m},
          {"target_speed", r.target_speed_mps},
          {"box_mass", r.box_mass_kg},
          {"leg_scale", r.leg_scale},
          {"platform_tilt", r.platform_tilt_rad},
          {"fallen", r.fallen}};
}

TraceRecord record_from_json(const json& j) {
  try {
    TraceRecord r;
    r.tick = j.at("tick").get<long>();
    r.time_s = j.at("t").get<double>();
    r.com_position = vec(j.at("com"));
    r.com_velocity = vec(j.at("vel"));
    const auto& feet = j.at("feet");
    for (std::size_t i = 0; i < 2; ++i) {
      r.feet[i].position = vec(feet.at(i).at("position"));
      r.feet[i].yaw_rad = feet.at(i).at("yaw").get<double>();
      r.feet[i].stance = feet.at(i).at("stance").get<bool>();
      r.feet[i].swing = feet.at(i).at("swing").get<bool>();
    }
    r.region = region_from(j.at("region").get<std::string>());
    r.normalized_radius = j.at("normalized_radius").get<double>();
    r.mode = mode_from(j.at("mode").get<std::string>());
    r.ankle_force_N = vec(j.at("ankle_force"));
    r.external_force_N = vec(j.at("external_force"));
    r.rest_lengths_m = {j.at("rest_lengths").at(0).get<double>(), j.at("rest_lengths").at(1).get<double>()};
    r.nominal_rest_length_m = j.at("nominal_rest_length").get<double>();
    for (const auto& je : j.at("events")) r.events.push_back(event_from_json(je));
    r.torque_max_Nm = j.at("torque_max").get<double>();
    r.torque_mean_Nm = j.at("torque_mean").get<double>();
    r.torque_max_dof = j.at("torque_max_dof").get<int>();
    r.energy_J = j.at("energy").get<double>();
    r.spring_energy_J = j.at("spring_energy").get<double>();
    r.ik_shortfall_m = j.at("ik_shortfall").get<double>();
    r.target_speed_mps = j.at("target_speed").get<double>();
    r.box_mass_kg = j.at("box_mass").get<double>();
    r.leg_scale = j.at("leg_scale").get<double>();
    r.platform_tilt_rad = j.at("platform_tilt").get<double>();
    r.fallen = j.at("fallen").get<bool>();
    return r;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("trace record: ") + e.what());
  }
}

// ---------------------------------------------------------------------------
// CSV

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

const std::vector<std::string>& csv_columns() {
  static const std::vector<std::string> cols{
      "tick",        "time_s",       "com_x",        "com_y",        "com_z",        "vel_x",
      "vel_y",       "vel_z",        "speed_mps",    "foot_l_x",     "foot_l_y",     "foot_l_z",
      "foot_l_stance", "foot_l_swing", "foot_r_x",   "foot_r_y",     "foot_r_z",     "foot_r_stance",
      "foot_r_swing", "region",      "normalized_radius", "mode",    "ankle_fx",     "ankle_fy",
      "ankle_fz",    "ext_fx",       "ext_fy",       "ext_fz",       "rest_l",       "rest_r",
      "rest_nominal", "torque_max_Nm", "torque_mean_Nm", "energy_J", "spring_energy_J", "step_events",
      "events",      "fallen"};
  return cols;
}

void write_csv_header(std::ostream& out) {
  const auto& cols = csv_columns();
  for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << cols[i];
  out << '\n';
}

void write_csv_row(std::ostream& out, const TraceRecord& r) {
  const auto f = [](double v) { return format_double(v); };
  int steps = 0;
  std::string names;
  for (const auto& e : r.events) {
    if (e.type == "STEP" || e.type == "COMFORT_STEP") ++steps;
    if (!names.empty()) names += ';';
    names += e.type;
  }
  out << r.tick << ',' << f(r.time_s) << ',' << f(r.com_position.x()) << ',' << f(r.com_position.y()) << ','
      << f(r.com_position.z()) << ',' << f(r.com_velocity.x()) << ',' << f(r.com_velocity.y()) << ','
      << f(r.com_velocity.z()) << ',' << f(r.horizontal_speed());
  for (const auto& foot : r.feet) {
    out << ',' << f(foot.position.x()) << ',' << f(foot.position.y()) << ',' << f(foot.position.z()) << ','
        << (foot.stance ? 1 : 0) << ',' << (foot.swing ? 1 : 0);
  }
  out << ',' << balance::to_string(r.region) << ',' << f(r.normalized_radius) << ',' << balance::to_string(r.mode) << ','
      << f(r.ankle_force_N.x()) << ',' << f(r.ankle_force_N.y()) << ',' << f(r.ankle_force_N.z()) << ','
      << f(r.external_force_N.x()) << ',' << f(r.external_force_N.y()) << ',' << f(r.external_force_N.z()) << ','
      << f(r.rest_lengths_m[0]) << ',' << f(r.rest_lengths_m[1]) << ',' << f(r.nominal_rest_length_m) << ','
      << f(r.torque_max_Nm) << ',' << f(r.torque_mean_Nm) << ',' << f(r.energy_J) << ',' << f(r.spring_energy_J) << ','
      << steps << ',' << names << ',' << (r.fallen ? 1 : 0) << '\n';
}

// ---------------------------------------------------------------------------
// NDJSON

json header_json(const json& scenario) {
  json cols = csv_columns();
  return {{"type", "header"}, {"schema_version", kSchemaVersion}, {"scenario", scenario}, {"columns", cols}};
}

void write_ndjson(std::ostream& out, const json& header, const std::vector<TraceRecord>& records) {
  out << header.dump() << '\n';
  for (const auto& r : records) out << to_json(r).dump() << '\n';
}

LoadedTrace read_ndjson(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open trace '" + path + "'");
  LoadedTrace t;
  std::string line;
  long lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw ConfigError("trace '" + path + "' line " + std::to_string(lineno) + ": " + e.what());
    }
    const std::string type = j.value("type", "");
    if (lineno == 1) {
      if (type != "header") throw ConfigError("trace '" + path + "': missing header line");
      const int version = j.value("schema_version", -1);
      if (version != kSchemaVersion) {
        throw VersionError("trace '" + path + "': schema_version " + std::to_string(version) + " unsupported");
      }
      t.header = j;
      continue;
    }
    if (type != "tick") throw ConfigError("trace '" + path + "' line " + std::to_string(lineno) + ": unexpected record");
    t.records.push_back(record_from_json(j));
  }
  if (t.header.is_null()) throw ConfigError("trace '" + path + "': empty file");
  return t;
}

const std::vector<std::string>& export_column_names() {
  static const std::vector<std::string> names{
      "time_s",   "speed_mps", "step_events", "ankle_force_N", "external_force_N", "com_x",
      "com_y",    "com_z",     "mode",        "region",        "energy_J",         "torque_max_Nm",
      "target_speed_mps", "rest_l", "rest_r"};
  return names;
}

void export_columns(std::ostream& out, const std::vector<TraceRecord>& records, const std::vector<std::string>& columns) {
  std::vector<std::string> cols = columns;
  if (cols.empty()) cols = {"time_s", "speed_mps", "step_events", "ankle_force_N"};
  const auto& known = export_column_names();
  for (const auto& c : cols) {
    if (std::find(known.begin(), known.end(), c) == known.end()) throw ConfigError("export: unknown column '" + c + "'");
  }
  for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << cols[i];
  out << '\n';
  const auto f = [](double v) { return format_double(v); };
  for (const auto& r : records) {
    for (std::size_t i = 0; i < cols.size(); ++i) {
      const std::string& c = cols[i];
      if (i) out << ',';
      if (c == "time_s") out << f(r.time_s);
      else if (c == "speed_mps") out << f(r.horizontal_speed());
      else if (c == "step_events") out << std::count_if(r.events.begin(), r.events.end(), [](const TraceEvent& e) { return e.type == "STEP" || e.type == "COMFORT_STEP"; });
      else if (c == "ankle_force_N") out << f(r.ankle_force_N.norm());
      else if (c == "external_force_N") out << f(r.external_force_N.norm());
      else if (c == "com_x") out << f(r.com_position.x());
      else if (c == "com_y") out << f(r.com_position.y());
      else if (c == "com_z") out << f(r.com_position.z());
      else if (c == "mode") out << balance::to_string(r.mode);
      else if (c == "region") out << balance::to_string(r.region);
      else if (c == "energy_J") out << f(r.energy_J);
      else if (c == "torque_max_Nm") out << f(r.torque_max_Nm);
      else if (c == "target_speed_mps") out << f(r.target_speed_mps);
      else if (c == "rest_l") out << f(r.rest_lengths_m[0]);
      else if (c == "rest_r") out << f(r.rest_lengths_m[1]);
    }
    out << '\n';
  }
}

// ---------------------------------------------------------------------------
// Summary

ComputeStats compute_stats(std::vector<double> us) {
  ComputeStats s;
  if (us.empty()) return s;
  std::sort(us.begin(), us.end());
  const auto pct = [&](double p) {
    const auto idx = static_cast<std::size_t>(std::ceil(p * static_cast<double>(us.size()))) - 1;
    return us[std::min(idx, us.size() - 1)];
  };
  s.p50_us = pct(0.50);
  s.p99_us = pct(0.99);
  s.max_us = us.back();
  s.mean_us = std::accumulate(us.begin(), us.end(), 0.0) / static_cast<double>(us.size());
  return s;
}

Summary summarize(const std::vector<TraceRecord>& records, const std::vector<double>& tick_us, double transient_s) {
  Summary s;
  s.window_start_s = transient_s;
  s.compute = compute_stats(tick_us);
  if (records.empty()) return s;
  s.empty = false;
  s.ticks = static_cast<long>(records.size());
  s.duration_s = records.back().time_s;

  double sum = 0.0;
  long n = 0;
  s.min_speed_mps = std::numeric_limits<double>::infinity();
  bool in_excursion = false, stepped = false;
  for (const auto& r : records) {
    for (const auto& e : r.events) {
      if (e.type == "STEP") ++s.step_count;
      if (e.type == "COMFORT_STEP") ++s.comfort_step_count;
      if (e.type == "EXCHANGE") ++s.exchange_count;
      if (e.type == "STEP" || e.type == "COMFORT_STEP") stepped = true;
    }
    if (r.region != balance::Region::kInner) {
      if (!in_excursion) {
        in_excursion = true;
        stepped = r.has_event("STEP") || r.has_event("COMFORT_STEP");
      }
    } else if (in_excursion) {
      if (!stepped) ++s.sway_recoveries;
      in_excursion = false;
    }
    s.max_torque_Nm = std::max(s.max_torque_Nm, r.torque_max_Nm);
    const double longest = std::max(r.rest_lengths_m[0], r.rest_lengths_m[1]);
    if (longest != r.nominal_rest_length_m) s.rest_length_invariant = false;
    if (r.fallen && !s.fallen) {
      s.fallen = true;
      s.fall_time_s = r.time_s;
    }
    if (r.time_s + 1e-9 >= transient_s) {
      const double v = r.horizontal_speed();
      sum += v;
      ++n;
      s.min_speed_mps = std::min(s.min_speed_mps, v);
      s.max_speed_mps = std::max(s.max_speed_mps, v);
    }
  }
  if (n > 0) {
    s.mean_speed_mps = sum / static_cast<double>(n);
  } else {
    s.min_speed_mps = 0.0;
  }
  return s;
}

json to_json(const Summary& s) {
  json j{{"schema_version", kSchemaVersion},
         {"empty", s.empty},
         {"ticks", s.ticks},
         {"duration_s", s.duration_s},
         {"window_start_s", s.window_start_s},
         {"mean_speed_mps", s.mean_speed_mps},
         {"min_speed_mps", s.min_speed_mps},
         {"max_speed_mps", s.max_speed_mps},
         {"step_count", s.step_count},
         {"comfort_step_count", s.comfort_step_count},
         {"exchange_count", s.exchange_count},
         {"sway_recoveries", s.sway_recoveries},
         {"fallen", s.fallen},
         {"fall_time_s", s.fall_time_s ? json(*s.fall_time_s) : json(nullptr)},
         {"max_torque_Nm", s.max_torque_Nm},
         {"rest_length_invariant", s.rest_length_invariant},
         {"compute_us", {{"p50", s.compute.p50_us}, {"p99", s.compute.p99_us}, {"max", s.compute.max_us}, {"mean", s.compute.mean_us}}}};
  return j;
}

}  // namespace slipstep::trace
