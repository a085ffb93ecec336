#include "slipstep/live/session.hpp"

#include <algorithm>
#include <cmath>

#include "slipstep/errors.hpp"
#include "slipstep/skeleton.hpp"

namespace slipstep::live {

using nlohmann::json;

namespace {

json vec(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }
json vec(const Vec2& v) { return json::array({v.x(), v.y()}); }

double number(const json& cmd, const char* key) {
  const auto it = cmd.find(key);
  if (it == cmd.end() || !it->is_number()) throw ConfigError(std::string("command: number field '") + key + "' required");
  const double v = it->get<double>();
  if (!std::isfinite(v)) throw ConfigError(std::string("command: '") + key + "' must be finite");
  return v;
}

void only_keys(const json& cmd, std::initializer_list<const char*> keys) {
  for (const auto& [k, _] : cmd.items()) {
    if (k == "kind") continue;
    if (std::none_of(keys.begin(), keys.end(), [&](const char* a) { return k == a; })) {
      throw ConfigError("command: unknown field '" + k + "'");
    }
  }
}

}  // namespace

std::optional<scenario::Event> command_to_event(const json& cmd, const terrain::Terrain& terrain) {
  if (!cmd.is_object() || !cmd.contains("kind") || !cmd.at("kind").is_string()) {
    throw ConfigError("command: object with string 'kind' required");
  }
  const std::string kind = cmd.at("kind").get<std::string>();
  scenario::Event e;
  if (kind == "PUSH") {
    only_keys(cmd, {"direction", "magnitude_N", "duration_s"});
    const auto& d = cmd.value("direction", json());
    if (!d.is_array() || d.size() != 2 || !d.at(0).is_number() || !d.at(1).is_number()) {
      throw ConfigError("command: PUSH direction must be [x, z]");
    }
    Vec2 dir(d.at(0).get<double>(), d.at(1).get<double>());
    if (!dir.allFinite() || dir.norm() < 1e-9) throw ConfigError("command: PUSH direction must be non-zero");
    const double magnitude = number(cmd, "magnitude_N");
    if (magnitude < 0.0) throw ConfigError("command: PUSH magnitude must be >= 0");
    e.kind = scenario::EventKind::kPush;
    e.force_N = lift(dir.normalized() * magnitude, 0.0);
    e.duration_s = number(cmd, "duration_s");
  } else if (kind == "SET_SPEED") {
    only_keys(cmd, {"speed_mps"});
    e.kind = scenario::EventKind::kSetTarget;
    e.speed_mps = number(cmd, "speed_mps");
  } else if (kind == "SET_DIRECTION") {
    only_keys(cmd, {"yaw_rad"});
    e.kind = scenario::EventKind::kSetTarget;
    e.yaw_rad = number(cmd, "yaw_rad");
  } else if (kind == "TILT_PLATFORM") {
    only_keys(cmd, {"axis", "angle_rad"});
    const std::string axis = cmd.value("axis", "");
    if (axis != "x" && axis != "z") throw ConfigError("command: TILT_PLATFORM axis must be \"x\" or \"z\"");
    e.kind = scenario::EventKind::kTiltPlatform;
    e.tilt_axis = axis == "x" ? terrain::TiltAxis::kX : terrain::TiltAxis::kZ;
    e.tilt_rad = number(cmd, "angle_rad");
  } else if (kind == "SET_BOX_MASS") {
    only_keys(cmd, {"mass_kg"});
    e.kind = scenario::EventKind::kSetBoxMass;
    e.value = number(cmd, "mass_kg");
  } else if (kind == "SET_LEG_SCALE") {
    only_keys(cmd, {"factor"});
    e.kind = scenario::EventKind::kSetLegScale;
    e.value = number(cmd, "factor");
  } else if (kind == "PAUSE" || kind == "RESUME") {
    only_keys(cmd, {});
    return std::nullopt;
  } else if (kind == "RESET") {
    only_keys(cmd, {"seed"});
    if (!cmd.contains("seed") || !cmd.at("seed").is_number_integer()) throw ConfigError("command: RESET seed must be an integer");
    return std::nullopt;
  } else {
    throw ConfigError("command: unknown kind '" + kind + "'");
  }
  scenario::validate_event(e, terrain);
  return e;
}

Session::Session(scenario::Scenario s, SessionOptions options)
    : base_(std::move(s)), options_(std::move(options)), engine_(base_) {
  if (options_.decimation < 1) throw ConfigError("session: decimation must be >= 1");
}

json Session::envelope(const char* type) {
  return {{"type", type}, {"session", options_.session_id}, {"schema_version", kWireSchemaVersion}, {"seq", ++seq_}};
}

json Session::error(const std::string& message, const json& reply_to) {
  json j = envelope("ERROR");
  j["message"] = message;
  j["reply_to"] = reply_to;
  return j;
}

json Session::hello() {
  json j = envelope("HELLO");
  j["tick"] = engine_.tick();
  j["dt_s"] = engine_.dt();
  j["decimation"] = options_.decimation;
  j["scenario"] = scenario::to_json(base_);
  return j;
}

void Session::check_command(const json& cmd) const { command_to_event(cmd, engine_.terrain()); }

std::vector<json> Session::receive(const std::string& text, int client_id) {
  json msg;
  try {
    msg = json::parse(text);
  } catch (const json::exception& e) {
    return {error(std::string("malformed JSON: ") + e.what(), nullptr)};
  }
  if (!msg.is_object()) return {error("message must be an object", nullptr)};
  const json reply_to = msg.contains("seq") ? msg.at("seq") : json(nullptr);
  if (!msg.contains("type") || !msg.at("type").is_string()) return {error("missing message type", reply_to)};
  if (msg.value("schema_version", -1) != kWireSchemaVersion) {
    return {error("schema_version must be " + std::to_string(kWireSchemaVersion), reply_to)};
  }
  if (msg.value("session", "") != options_.session_id) return {error("unknown session", reply_to)};
  if (!msg.contains("seq") || !msg.at("seq").is_number_integer()) return {error("integer seq required", reply_to)};
  const auto seq = msg.at("seq").get<std::int64_t>();
  const auto last = client_seq_.find(client_id);
  if (last != client_seq_.end() && seq <= last->second) return {error("seq must increase", reply_to)};
  client_seq_[client_id] = seq;

  const std::string type = msg.at("type").get<std::string>();
  if (type == "COMMAND") {
    if (!msg.contains("command")) return {error("COMMAND without command", reply_to)};
    try {
      check_command(msg.at("command"));
    } catch (const Error& e) {
      return {error(e.what(), reply_to)};
    }
    json queued = msg.at("command");
    queued["_seq"] = seq;
    queue_.push_back(std::move(queued));
    return {};
  }
  if (type == "SNAPSHOT_REQUEST") {
    json j = envelope("SNAPSHOT");
    j["snapshot"] = snapshot();
    return {j};
  }
  if (type == "TAPE_REQUEST") {
    json j = envelope("TAPE");
    j["scenario"] = scenario::to_json(tape_scenario());
    return {j};
  }
  return {error("unknown message type '" + type + "'", reply_to)};
}

void Session::apply(const json& queued) {
  json cmd = queued;
  const json seq = cmd.at("_seq");
  cmd.erase("_seq");
  const std::string kind = cmd.at("kind").get<std::string>();
  if (kind == "PAUSE") {
    paused_ = true;
  } else if (kind == "RESUME") {
    paused_ = false;
  } else if (kind == "RESET") {
    base_.rng_seed = cmd.at("seed").get<std::uint64_t>();
    engine_ = engine::Engine(base_);
    tape_.clear();
    events_.clear();
  } else if (const auto e = command_to_event(cmd, engine_.terrain())) {
    engine_.inject(*e);
  }
  if (kind != "RESET" && kind != "PAUSE" && kind != "RESUME") tape_.push_back({engine_.tick(), cmd});
  echo_.push_back({{"seq", seq}, {"kind", kind}});
}

std::optional<json> Session::advance(double tick_us) {
  const bool had_commands = !queue_.empty();
  for (const auto& cmd : queue_) apply(cmd);
  queue_.clear();
  if (paused_ || engine_.finished()) {
    if (had_commands) return frame(tick_us);
    return std::nullopt;
  }
  const auto& rec = engine_.step();
  events_.insert(events_.end(), rec.events.begin(), rec.events.end());
  ++ticks_since_frame_;
  if (ticks_since_frame_ >= options_.decimation || engine_.fallen() || had_commands) return frame(tick_us);
  return std::nullopt;
}

json Session::frame(double tick_us) {
  json j = envelope("FRAME");
  const auto& st = engine_.state();
  j["tick"] = engine_.tick();
  j["time_s"] = engine_.time();
  j["paused"] = paused_;
  j["com"] = vec(st.com_position);
  j["com_velocity"] = vec(st.com_velocity);
  j["speed_mps"] = ground(st.com_velocity).norm();
  j["target_speed_mps"] = engine_.controller().target_speed_mps;

  const auto& skel = engine_.skeleton();
  const auto fk = skeleton::forward_kinematics(engine_.pose(), skel);
  json joints = json::array();
  for (std::size_t i = 0; i < fk.size(); ++i) {
    joints.push_back({{"name", skel.joints()[i].name}, {"position", vec(fk[i].position)}});
  }
  j["joints"] = joints;

  const auto& swing = engine_.swing().status;
  json feet = json::array();
  for (slip::Side s : {slip::Side::kLeft, slip::Side::kRight}) {
    const auto& leg = st.leg(s);
    const auto& rec_foot = engine_.last_record().feet[slip::index(s)];
    feet.push_back({{"side", slip::name(s)},
                    {"anchor", vec(leg.foot_anchor)},
                    {"position", vec(engine_.tick() > 0 ? rec_foot.position : leg.foot_anchor)},
                    {"yaw_rad", rec_foot.yaw_rad},
                    {"stance", leg.is_stance},
                    {"swing", swing.active && swing.leg == s}});
  }
  j["feet"] = feet;

  const auto& region = engine_.support_region();
  json circles = json::array();
  for (const auto& c : region.foot_circles) circles.push_back({{"center", vec(c.center)}, {"radius", c.radius}});
  json support{{"circles", circles}, {"capsule", nullptr}};
  if (region.bridge_capsule) {
    support["capsule"] = {{"a", vec(region.bridge_capsule->a)},
                          {"b", vec(region.bridge_capsule->b)},
                          {"radius", region.bridge_capsule->radius}};
  }
  j["support"] = support;
  const auto& rec = engine_.last_record();
  j["region"] = std::string(balance::to_string(rec.region));
  j["normalized_radius"] = rec.normalized_radius;
  j["mode"] = std::string(balance::to_string(rec.mode));
  j["swing_target"] = swing.active ? vec(swing.plan.target_foot_position) : json(nullptr);

  json events = json::array();
  for (const auto& e : events_) events.push_back(trace::to_json(e));
  j["events"] = events;
  j["tick_us"] = tick_us;
  j["overload"] = tick_us > options_.overload_us;
  j["echo"] = echo_;
  events_.clear();
  echo_.clear();
  ticks_since_frame_ = 0;
  return j;
}

json Session::snapshot() const {
  json tape = json::array();
  for (const auto& t : tape_) tape.push_back({{"tick", t.tick}, {"command", t.command}});
  json events = json::array();
  for (const auto& e : events_) events.push_back(trace::to_json(e));
  json clients = json::array();
  for (const auto& [id, seq] : client_seq_) clients.push_back({id, seq});
  return {{"schema_version", kSessionSnapshotVersion},
          {"session", options_.session_id},
          {"decimation", options_.decimation},
          {"overload_us", options_.overload_us},
          {"base_scenario", scenario::to_json(base_)},
          {"engine", engine_.snapshot()},
          {"paused", paused_},
          {"seq", seq_},
          {"clients", clients},
          {"queue", queue_},
          {"echo", echo_},
          {"events", events},
          {"tape", tape},
          {"ticks_since_frame", ticks_since_frame_}};
}

Session Session::from_snapshot(const json& j) {
  try {
    const int version = j.at("schema_version").get<int>();
    if (version != kSessionSnapshotVersion) {
      throw VersionError("session snapshot: schema_version " + std::to_string(version) + " unsupported (expected " +
                         std::to_string(kSessionSnapshotVersion) + ")");
    }
    SessionOptions options;
    options.session_id = j.at("session").get<std::string>();
    options.decimation = j.at("decimation").get<int>();
    options.overload_us = j.at("overload_us").get<double>();
    Session s(scenario::from_json(j.at("base_scenario")), options);
    s.engine_ = engine::Engine::from_snapshot(j.at("engine"));
    s.paused_ = j.at("paused").get<bool>();
    s.seq_ = j.at("seq").get<std::uint64_t>();
    for (const auto& c : j.at("clients")) s.client_seq_[c.at(0).get<int>()] = c.at(1).get<std::int64_t>();
    s.queue_ = j.at("queue").get<std::vector<json>>();
    s.echo_ = j.at("echo").get<std::vector<json>>();
    for (const auto& e : j.at("events")) s.events_.push_back(trace::event_from_json(e));
    for (const auto& t : j.at("tape")) s.tape_.push_back({t.at("tick").get<long>(), t.at("command")});
    s.ticks_since_frame_ = j.at("ticks_since_frame").get<long>();
    return s;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("session snapshot: ") + e.what());
  }
}

scenario::Scenario Session::tape_scenario() const {
  scenario::Scenario s = base_;
  s.name = base_.name + "-tape";
  for (const auto& t : tape_) {
    if (auto e = command_to_event(t.command, engine_.terrain())) {
      e->time_s = static_cast<double>(t.tick) * engine_.dt();
      s.schedule.push_back(*e);
    }
  }
  std::stable_sort(s.schedule.begin(), s.schedule.end(),
                   [](const auto& a, const auto& b) { return a.time_s < b.time_s; });
  return s;
}

}  // namespace slipstep::live
