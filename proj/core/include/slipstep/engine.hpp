#pragma once

// The fixed-timestep simulation loop shared by the scenario harness and the live
// service. One tick:
//   scheduled events -> support context -> decide -> swing start / replant
//   -> rest lengths -> integrate -> swing advance / support exchange
//   -> lower + upper IK -> PD torque audit -> record.

#include <array>
#include <optional>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "slipstep/balance.hpp"
#include "slipstep/ik.hpp"
#include "slipstep/pd.hpp"
#include "slipstep/scenario.hpp"
#include "slipstep/skeleton.hpp"
#include "slipstep/slip.hpp"
#include "slipstep/terrain.hpp"
#include "slipstep/trace.hpp"

namespace slipstep::engine {

inline constexpr int kSnapshotSchemaVersion = 1;
inline constexpr double kBallContactWindowS = 0.05;
inline constexpr double kBallRestitution = 0.3;

/// Torso bounding capsule: vertical segment above the COM.
struct TorsoCapsule {
  Vec3 bottom;
  Vec3 top;
  double radius_m;
};
TorsoCapsule torso_capsule(const Vec3& com);

struct BallImpact {
  bool hit = false;
  double impulse_Ns = 0.0;
  Vec3 force_N = Vec3::Zero();  // average over the contact window
  double duration_s = kBallContactWindowS;
  Vec3 contact_point = Vec3::Zero();
};

/// Straight-line ball path against the torso capsule. A hit yields the impulse
/// m(1 + e)v_n along the contact normal spread over the contact window.
BallImpact ball_to_impulse(const scenario::Ball& ball, const Vec3& com, const Vec3& com_velocity);

struct ActivePush {
  Vec3 force_N;
  double remaining_s;
};

struct SwingState {
  balance::SwingStatus status{};
  Vec3 start = Vec3::Zero();
  double start_yaw_rad = 0.0;
};

class Engine {
 public:
  explicit Engine(const scenario::Scenario& scenario);

  /// Advances one tick and returns its record. Must not be called once finished().
  const trace::TraceRecord& step();

  /// Queues an event for the start of the next tick (live commands).
  void inject(scenario::Event e);

  bool fallen() const { return fallen_; }
  /// Fallen, or the scenario duration has elapsed.
  bool finished() const;
  long tick() const { return tick_; }
  double time() const { return static_cast<double>(tick_) * dt_; }
  double dt() const { return dt_; }

  const scenario::Scenario& scenario() const { return scenario_; }
  const slip::SlipState& state() const { return state_; }
  const slip::SlipParams& params() const { return params_; }
  const balance::ControllerConfig& controller() const { return config_; }
  const terrain::Terrain& terrain() const { return terrain_; }
  const skeleton::Skeleton& skeleton() const { return skeleton_; }
  const skeleton::Pose& pose() const { return pose_; }
  const balance::SupportRegion& support_region() const { return region_; }
  const SwingState& swing() const { return swing_; }
  const trace::TraceRecord& last_record() const { return record_; }
  const pd::ServoBank& servos() const { return servos_; }
  double box_mass() const { return box_mass_; }
  double leg_scale() const { return leg_scale_; }
  double speed_trim() const { return speed_trim_; }

  /// Complete state; from_snapshot(snapshot()) continues bit-identically.
  nlohmann::json snapshot() const;
  /// Throws VersionError on schema mismatch, ConfigError when malformed.
  static Engine from_snapshot(const nlohmann::json& j);

 private:
  Engine(const scenario::Scenario& scenario, bool build_schedule);

  void apply_event(const scenario::Event& e);
  void refresh_params();
  void rebuild_skeleton();
  void update_speed_trim();
  void update_stance_heights();
  Vec3 external_force() const;
  std::array<double, 2> foot_yaws() const;
  Vec3 swing_foot_position() const;
  void solve_pose();
  void fill_record(const balance::BalanceDecision& decision, const Vec3& external, const Vec3& ankle);

  scenario::Scenario scenario_;
  double dt_;
  long tick_ = 0;
  long end_tick_;
  std::vector<scenario::Event> schedule_;
  std::size_t next_event_ = 0;
  std::vector<scenario::Event> injected_;

  slip::SlipParams base_params_;
  slip::SlipParams params_;
  balance::ControllerConfig config_;
  terrain::Terrain terrain_;
  skeleton::Skeleton base_skeleton_;
  skeleton::Skeleton skeleton_;
  pd::GainTable gains_;
  pd::ServoBank servos_;

  slip::SlipState state_{};
  std::array<double, 2> yaws_{0.0, 0.0};
  SwingState swing_{};
  std::vector<ActivePush> pushes_;
  double box_mass_ = 0.0;
  double leg_scale_ = 1.0;
  bool fallen_ = false;
  double speed_trim_ = 0.0;
  double step_speed_sum_ = 0.0;
  long step_speed_ticks_ = 0;

  skeleton::Pose pose_;
  double ik_shortfall_ = 0.0;
  balance::SupportRegion region_;
  trace::TraceRecord record_;
  std::vector<trace::TraceEvent> pending_events_;
};

}  // namespace slipstep::engine
