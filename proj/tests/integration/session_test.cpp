#include <gtest/gtest.h>

#include <nlohmann/json.hpp>

#include "slipstep/errors.hpp"
#include "slipstep/harness.hpp"
#include "slipstep/live/session.hpp"
#include "slipstep/trace.hpp"

using namespace slipstep;
using nlohmann::json;

namespace {

class Client {
 public:
  explicit Client(live::Session& s) : s_(s) {}

  std::vector<json> send(const std::string& type, json body = json::object()) {
    body["type"] = type;
    body["session"] = s_.id();
    body["schema_version"] = live::kWireSchemaVersion;
    body["seq"] = ++seq_;
    return s_.receive(body.dump());
  }
  std::vector<json> command(json cmd) { return send("COMMAND", {{"command", std::move(cmd)}}); }
  std::int64_t last_seq() const { return seq_; }

 private:
  live::Session& s_;
  std::int64_t seq_ = 0;
};

scenario::Scenario standing(double duration = 20.0) {
  scenario::Scenario s;
  s.name = "live";
  s.duration_s = duration;
  return s;
}

bool echoes(const json& frame, std::int64_t seq) {
  for (const auto& e : frame.at("echo")) {
    if (e.at("seq") == seq) return true;
  }
  return false;
}

bool has_event(const json& frame, const std::string& type) {
  for (const auto& e : frame.at("events")) {
    if (e.at("type") == type) return true;
  }
  return false;
}

}  // namespace

TEST(Session, HelloCarriesEnvelope) {
  live::Session s(standing());
  const auto h = s.hello();
  EXPECT_EQ(h.at("type"), "HELLO");
  EXPECT_EQ(h.at("session"), "session-1");
  EXPECT_EQ(h.at("schema_version"), live::kWireSchemaVersion);
  EXPECT_TRUE(h.contains("seq"));
  EXPECT_EQ(h.at("decimation"), 2);
}

TEST(Session, CommandsEchoAndPushCausesStep) {
  live::Session s(standing());
  Client c(s);
  for (int i = 0; i < 50; ++i) s.advance();

  ASSERT_TRUE(c.command({{"kind", "SET_SPEED"}, {"speed_mps", 1.0}}).empty());
  const auto speed_seq = c.last_seq();
  int frames = 0;
  bool echoed = false;
  std::int64_t last_frame_seq = -1;
  while (frames < 10 && !echoed) {
    if (const auto f = s.advance()) {
      ++frames;
      EXPECT_GT(f->at("seq").get<std::int64_t>(), last_frame_seq);
      last_frame_seq = f->at("seq");
      echoed = echoes(*f, speed_seq);
    }
  }
  EXPECT_TRUE(echoed);

  ASSERT_TRUE(c.command({{"kind", "PUSH"}, {"direction", {0.0, 1.0}}, {"magnitude_N", 400.0}, {"duration_s", 0.2}})
                  .empty());
  const auto push_seq = c.last_seq();
  const long pushed_at = s.tick();
  frames = 0;
  echoed = false;
  bool stepped = false;
  while (s.tick() - pushed_at <= 100) {
    if (const auto f = s.advance()) {
      ++frames;
      if (echoes(*f, push_seq)) {
        echoed = true;
        EXPECT_LE(frames, 10);
      }
      stepped = stepped || has_event(*f, "STEP");
    }
  }
  EXPECT_TRUE(echoed);
  EXPECT_TRUE(stepped);
}

TEST(Session, PauseResumeIsGapFree) {
  live::Session s(standing());
  Client c(s);
  for (int i = 0; i < 30; ++i) s.advance();
  c.command({{"kind", "PAUSE"}});
  const auto paused_frame = s.advance();
  ASSERT_TRUE(paused_frame.has_value());
  EXPECT_TRUE(paused_frame->at("paused").get<bool>());
  const long tick = s.tick();
  for (int i = 0; i < 20; ++i) EXPECT_FALSE(s.advance().has_value());
  EXPECT_EQ(s.tick(), tick);
  const auto snap_paused = s.snapshot();
  c.command({{"kind", "RESUME"}});
  const auto resumed = s.advance();
  ASSERT_TRUE(resumed.has_value());
  EXPECT_EQ(resumed->at("tick").get<long>(), tick + 1);

  // The same engine state continues as if the pause never happened.
  live::Session ref(standing());
  for (int i = 0; i < 31; ++i) ref.advance();
  EXPECT_EQ(ref.engine().snapshot(), s.engine().snapshot());
  EXPECT_EQ(snap_paused.at("engine").at("tick"), tick);
}

TEST(Session, SnapshotRestoresNextFrame) {
  live::Session s(standing());
  Client c(s);
  for (int i = 0; i < 40; ++i) s.advance();
  c.command({{"kind", "PUSH"}, {"direction", {1.0, 0.0}}, {"magnitude_N", 200.0}, {"duration_s", 0.3}});
  const auto snap = s.snapshot();
  auto copy = live::Session::from_snapshot(json::parse(snap.dump()));
  for (int i = 0; i < 60; ++i) {
    const auto a = s.advance(), b = copy.advance();
    ASSERT_EQ(a.has_value(), b.has_value());
    if (a) {
      EXPECT_EQ(*a, *b);
    }
  }
  auto bad = snap;
  bad["schema_version"] = 99;
  EXPECT_THROW(live::Session::from_snapshot(bad), VersionError);
}

TEST(Session, RejectsBadMessages) {
  live::Session s(standing());
  Client c(s);
  const auto unknown = c.send("TELEPORT");
  ASSERT_EQ(unknown.size(), 1u);
  EXPECT_EQ(unknown[0].at("type"), "ERROR");
  EXPECT_EQ(unknown[0].at("reply_to"), c.last_seq());

  const auto malformed = s.receive("{not json");
  ASSERT_EQ(malformed.size(), 1u);
  EXPECT_EQ(malformed[0].at("type"), "ERROR");

  const auto version = s.receive(json{{"type", "COMMAND"}, {"session", s.id()}, {"schema_version", 2}, {"seq", 100}}.dump());
  EXPECT_EQ(version.at(0).at("type"), "ERROR");

  const auto stale = s.receive(json{{"type", "TAPE_REQUEST"}, {"session", s.id()}, {"schema_version", 1}, {"seq", 1}}.dump());
  EXPECT_EQ(stale.at(0).at("type"), "ERROR");

  const auto bad_cmd = c.command({{"kind", "PUSH"}, {"direction", {1.0, 0.0}}, {"magnitude_N", 1e6}, {"duration_s", 0.2}});
  EXPECT_EQ(bad_cmd.at(0).at("type"), "ERROR");
  const auto bad_kind = c.command({{"kind", "FLY"}});
  EXPECT_EQ(bad_kind.at(0).at("type"), "ERROR");
}

TEST(Session, TapeReplaysBitIdentically) {
  auto base = standing(6.0);
  live::Session s(base);
  Client c(s);
  std::vector<json> live_records;
  const auto tick_record = [&] {
    const long before = s.tick();
    s.advance();
    if (s.tick() > before) live_records.push_back(trace::to_json(s.engine().last_record()));
  };
  for (int i = 0; i < 50; ++i) tick_record();
  c.command({{"kind", "SET_SPEED"}, {"speed_mps", 0.8}});
  for (int i = 0; i < 120; ++i) tick_record();
  c.command({{"kind", "PUSH"}, {"direction", {0.0, -1.0}}, {"magnitude_N", 300.0}, {"duration_s", 0.2}});
  c.command({{"kind", "SET_DIRECTION"}, {"yaw_rad", 0.5}});
  for (int i = 0; i < 100; ++i) tick_record();
  c.command({{"kind", "PAUSE"}});
  for (int i = 0; i < 10; ++i) tick_record();
  c.command({{"kind", "RESUME"}});
  c.command({{"kind", "SET_BOX_MASS"}, {"mass_kg", 10.0}});
  while (!s.finished()) tick_record();

  const auto tape = c.send("TAPE_REQUEST");
  ASSERT_EQ(tape.size(), 1u);
  const auto replay = harness::run_scenario(scenario::from_json(tape[0].at("scenario")), {false});
  ASSERT_EQ(replay.records.size(), live_records.size());
  for (std::size_t i = 0; i < live_records.size(); ++i) {
    ASSERT_EQ(trace::to_json(replay.records[i]).dump(), live_records[i].dump()) << "tick " << i;
  }
}

TEST(Session, SetSpeedZeroHalts) {
  live::Session s(standing(30.0));
  Client c(s);
  c.command({{"kind", "SET_SPEED"}, {"speed_mps", 1.0}});
  for (int i = 0; i < 500; ++i) s.advance();
  EXPECT_GT(ground(s.engine().state().com_velocity).norm(), 0.5);
  c.command({{"kind", "SET_SPEED"}, {"speed_mps", 0.0}});
  for (int i = 0; i < 500; ++i) s.advance();
  int steps = 0;
  for (int i = 0; i < 500; ++i) {
    s.advance();
    steps += s.engine().last_record().has_event("STEP") ? 1 : 0;
  }
  EXPECT_LT(ground(s.engine().state().com_velocity).norm(), 0.05);
  EXPECT_EQ(steps, 0);
  EXPECT_FALSE(s.engine().fallen());
}

TEST(Session, ResetRestartsFromTheBaseScenario) {
  live::Session s(standing());
  Client c(s);
  for (int i = 0; i < 100; ++i) s.advance();
  c.command({{"kind", "RESET"}, {"seed", 5}});
  s.advance();
  EXPECT_EQ(s.tick(), 1);
  EXPECT_TRUE(s.tape().empty());
}

TEST(CommandToEvent, Conversions) {
  const auto flat = terrain::Terrain::flat();
  const auto push = live::command_to_event({{"kind", "PUSH"}, {"direction", {0.0, 2.0}}, {"magnitude_N", 100.0}, {"duration_s", 0.2}}, flat);
  ASSERT_TRUE(push.has_value());
  EXPECT_TRUE(push->force_N.isApprox(Vec3(0.0, 0.0, 100.0)));
  EXPECT_FALSE(live::command_to_event({{"kind", "PAUSE"}}, flat).has_value());
  const terrain::Terrain platform(terrain::RotatingPlatform{});
  const auto tilt = live::command_to_event({{"kind", "TILT_PLATFORM"}, {"axis", "z"}, {"angle_rad", 0.3}}, platform);
  ASSERT_TRUE(tilt.has_value());
  EXPECT_EQ(tilt->tilt_axis, terrain::TiltAxis::kZ);
  EXPECT_THROW(live::command_to_event({{"kind", "TILT_PLATFORM"}, {"axis", "z"}, {"angle_rad", 0.3}}, flat), ConfigError);
}
