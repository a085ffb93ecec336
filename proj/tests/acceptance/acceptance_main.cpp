// Acceptance report: one PASS/FAIL line per primary criterion. Exit status is the
// number of failed criteria (0 when everything passes).

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ik_sampling.hpp"
#include "oracles.hpp"
#include "slipstep/harness.hpp"
#include "slipstep/ik.hpp"
#include "slipstep/pd.hpp"
#include "slipstep/scenario.hpp"
#include "slipstep/slip.hpp"
#include "slipstep/trace.hpp"

using namespace slipstep;

namespace {

namespace tol {
constexpr double kStepDistanceRel = 1e-9;
constexpr double kStepDistanceSeconds = 1.0;
constexpr double kPullExact = 1e-12;
constexpr double kPullWorkedExample = 0.0228;
constexpr double kPullWorkedDigits = 5e-5;
constexpr double kEnergyDrift = 0.01;
constexpr double kVelocityBand = 0.10;
constexpr double kVelocitySeconds = 5.0;
constexpr double kSlopePullBand = 0.15;
constexpr double kSwaySeconds = 10.0;
constexpr double kTorqueLimit = 500.0;
constexpr double kOvershoot = 0.01;
constexpr double kGravityHold = 0.05;
constexpr double kIkFoot = 1e-6;
constexpr double kIkKnee = 1e-9;
constexpr double kP99Us = 5000.0;
}  // namespace tol

using Clock = std::chrono::steady_clock;
double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Outcome {
  bool pass;
  std::string detail;
};

int failures = 0;

void report(const char* id, const std::function<Outcome()>& check) {
  Outcome o;
  try {
    o = check();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  std::printf("%s  %-22s %s\n", o.pass ? "PASS" : "FAIL", id, o.detail.c_str());
  std::fflush(stdout);
  if (!o.pass) ++failures;
}

template <typename... A>
std::string fmt(const char* f, A... a) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, a...);
  return buf;
}

scenario::Event push(double t, const Vec3& f, double duration) {
  scenario::Event e;
  e.time_s = t;
  e.kind = scenario::EventKind::kPush;
  e.force_N = f;
  e.duration_s = duration;
  return e;
}

scenario::Scenario walk(double speed, double duration) {
  auto s = scenario::builtin("flat-walk");
  s.controller.target_speed_mps = speed;
  s.duration_s = duration;
  return s;
}

std::string serialize(const scenario::Scenario& s, const harness::RunResult& r) {
  std::ostringstream out;
  trace::write_ndjson(out, trace::header_json(scenario::to_json(s)), r.records);
  trace::write_csv_header(out);
  for (const auto& rec : r.records) trace::write_csv_row(out, rec);
  return out.str();
}

int count_events(const harness::RunResult& r, const char* type) {
  int n = 0;
  for (const auto& rec : r.records) {
    for (const auto& e : rec.events) n += e.type == type ? 1 : 0;
  }
  return n;
}

double energy_drift(double dt, double span_s) {
  slip::SlipParams p;
  p.damping_k = 0.0;
  slip::SlipState s;
  s.com_position = Vec3(-0.15, 0.88, 0.0);
  s.com_velocity = Vec3(1.2, 0.0, 0.0);
  s.legs[0] = {Vec3::Zero(), 0.9, true};
  s.legs[1] = {Vec3(0.0, 0.0, 0.2), 0.9, false};
  const auto energy = [&](const slip::SlipState& st) { return slip::total_energy(st, p) + slip::spring_energy(st, p); };
  const double e0 = energy(s);
  double worst = 0.0;
  for (long i = 0, n = std::lround(span_s / dt); i < n; ++i) {
    s = slip::integrate(s, Vec3::Zero(), Vec3::Zero(), p, dt);
    worst = std::max(worst, std::abs(energy(s) - e0) / e0);
  }
  return worst;
}

}  // namespace

int main() {
  report("step-distance-oracle", [] {
    oracle::Sampler rnd(1);
    std::vector<std::array<double, 3>> tuples;
    for (int i = 0; i < 1000; ++i) tuples.push_back({rnd(0.0, 3.0), rnd(0.5, 1.2), rnd(1.0, 25.0)});
    const auto t0 = Clock::now();
    double worst = 0.0;
    for (const auto& [v, H, g] : tuples) {
      const double d = slip::step_distance(v, H, 0.0, g);
      const double ref = oracle::vault_length_by_bisection(v, H, g);
      worst = std::max(worst, ref > 0 ? std::abs(d - ref) / ref : std::abs(d));
    }
    const double secs = seconds_since(t0);
    return Outcome{worst <= tol::kStepDistanceRel && secs < tol::kStepDistanceSeconds,
                   fmt("max rel err %.2e (<= %.0e), %.3f s (< %.0f s)", worst, tol::kStepDistanceRel, secs,
                       tol::kStepDistanceSeconds)};
  });

  report("pull-bias-identity", [] {
    const slip::SlipParams p;
    const Vec3 up = Vec3::UnitY(), fwd = Vec3::UnitX();
    const double d = slip::step_distance(1.0, 0.9, 0.0, p.gravity_mps2);
    const auto zero = slip::pull_bias(slip::PullContext::make(Vec3::Zero(), p, up, fwd), d, p);
    const auto pull = slip::pull_bias(slip::PullContext::make(50.0 * fwd, p, up, fwd), d, p);
    const double expected = p.step_bias_gain * 50.0 / (p.mass_kg * p.gravity_mps2);
    const bool at_boundary = slip::halt_condition(slip::PullContext::make(p.weight() * fwd, p, up, fwd));
    const bool past_boundary =
        slip::halt_condition(slip::PullContext::make(std::nextafter(p.weight(), 1e9) * fwd, p, up, fwd));
    const double delta = pull.biased_distance_m - d;
    const bool ok = zero.bias_factor == 0.0 && zero.biased_distance_m == d && at_boundary && !past_boundary &&
                    std::abs(delta - expected) <= tol::kPullExact &&
                    std::abs(delta - tol::kPullWorkedExample) <= tol::kPullWorkedDigits;
    return Outcome{ok, fmt("beta(0)=%g, halt at |Fg|=%d past=%d, 50 N: d'-d=%.6f (closed form %.6f, expected %.4f)",
                           zero.bias_factor, at_boundary, past_boundary, delta, expected, tol::kPullWorkedExample)};
  });

  report("energy-conservation", [] {
    const double span = 0.3;  // one step cycle
    const double d2 = energy_drift(1e-2, span), d3 = energy_drift(1e-3, span), d4 = energy_drift(1e-4, span);
    return Outcome{d4 < tol::kEnergyDrift && d2 > d3 && d3 > d4,
                   fmt("drift per cycle dt=1e-2: %.2e, 1e-3: %.2e, 1e-4: %.2e (< %.0e, decreasing)", d2, d3, d4,
                       tol::kEnergyDrift)};
  });

  report("velocity-regulation", [] {
    bool ok = true;
    std::string detail;
    for (double v : {0.5, 1.0, 1.5}) {
      const auto s = walk(v, 18.0);
      const auto t0 = Clock::now();
      const auto r = harness::run_scenario(s);
      const double secs = seconds_since(t0);
      const double err = std::abs(r.summary.mean_speed_mps - v) / v;
      ok = ok && err <= tol::kVelocityBand && secs < tol::kVelocitySeconds && !r.summary.fallen;
      detail += fmt("%.1f->%.3f (%.1f%%, %.2f s) ", v, r.summary.mean_speed_mps, 100 * err, secs);
    }
    return Outcome{ok, detail + fmt("band +-%.0f%%", 100 * tol::kVelocityBand)};
  });

  report("slope-and-pull", [] {
    bool ok = true;
    std::string detail;
    const double v = 1.0;
    const auto check = [&](const std::string& label, scenario::Scenario s) {
      const auto r = harness::run_scenario(s, {false});
      const double err = std::abs(r.summary.mean_speed_mps - v) / v;
      ok = ok && err <= tol::kSlopePullBand && !r.summary.fallen;
      detail += fmt("%s %.3f%s ", label.c_str(), r.summary.mean_speed_mps, r.summary.fallen ? " FELL" : "");
    };
    for (double dir : {1.0, -1.0}) {
      auto s = walk(v, 18.0);
      s.terrain = terrain::Terrain(terrain::Slope{deg2rad(25.0), Vec2(dir, 0.0)});
      check(dir > 0 ? "up25" : "down25", s);
    }
    for (double f : {50.0, -50.0}) {
      auto s = walk(v, 18.0);
      s.schedule = {push(0.0, Vec3(f, 0.0, 0.0), s.duration_s)};
      check(f > 0 ? "pull50" : "push50", s);
    }
    return Outcome{ok, detail + fmt("band +-%.0f%%", 100 * tol::kSlopePullBand)};
  });

  report("sway-vs-step", [] {
    const auto t0 = Clock::now();
    int small_steps = 0, large_without_step = 0, falls = 0;
    for (double mag : {30.0, 400.0}) {
      for (int k = 0; k < 8; ++k) {
        auto s = walk(0.0, 5.0);
        s.rng_seed = 7;
        const double a = k * kPi / 4.0;
        s.schedule = {push(1.0, mag * Vec3(std::cos(a), 0.0, std::sin(a)), 0.2)};
        const auto r = harness::run_scenario(s, {false});
        const int steps = r.summary.step_count + r.summary.comfort_step_count;
        falls += r.summary.fallen ? 1 : 0;
        if (mag < 100.0) small_steps += steps;
        if (mag > 100.0 && r.summary.step_count < 1) ++large_without_step;
      }
    }
    const double secs = seconds_since(t0);
    return Outcome{small_steps == 0 && large_without_step == 0 && falls == 0 && secs < tol::kSwaySeconds,
                   fmt("30 N: %d steps; 400 N: %d/8 without a step; %d falls; %.2f s", small_steps,
                       large_without_step, falls, secs)};
  });

  report("stand-on-slope", [] {
    bool ok = true;
    std::string detail;
    for (const Vec2& uphill : {Vec2(0.0, 1.0), Vec2(1.0, 0.0)}) {
      auto s = walk(0.0, 10.0);
      s.terrain = terrain::Terrain(terrain::Slope{deg2rad(20.0), uphill});
      const auto r = harness::run_scenario(s, {false});
      double spread = 0.0;
      for (const auto& rec : r.records) spread = std::max(spread, std::abs(rec.rest_lengths_m[0] - rec.rest_lengths_m[1]));
      const int steps = r.summary.step_count + r.summary.comfort_step_count;
      ok = ok && steps == 0 && r.summary.rest_length_invariant && !r.summary.fallen;
      detail += fmt("%s: %d steps, max(L)=L0 %s, leg spread %.3f m; ", uphill.x() > 0 ? "fore-aft" : "lateral", steps,
                    r.summary.rest_length_invariant ? "yes" : "no", spread);
    }
    return Outcome{ok, detail};
  });

  report("rotating-platform", [] {
    const auto s = scenario::builtin("rotating-platform-45");
    const auto r = harness::run_scenario(s, {false});
    double max_tilt = 0.0;
    for (const auto& rec : r.records) max_tilt = std::max(max_tilt, std::abs(rec.platform_tilt_rad));
    const int pushes = count_events(r, "PUSH");
    return Outcome{!r.summary.fallen && r.summary.rest_length_invariant && r.summary.duration_s >= 60.0 - 1e-9,
                   fmt("%.0f s, peak tilt %.1f deg, %d pushes of 100 N, fallen=%d, rest-length invariant=%d",
                       r.summary.duration_s, rad2deg(max_tilt), pushes, r.summary.fallen,
                       r.summary.rest_length_invariant)};
  });

  report("torque-clamp", [] {
    double worst = 0.0;
    long ticks = 0;
    for (const auto& n : scenario::builtin_names()) {
      const auto r = harness::run_scenario(scenario::builtin(n), {false});
      for (const auto& rec : r.records) worst = std::max(worst, rec.torque_max_Nm);
      ticks += static_cast<long>(r.records.size());
    }
    return Outcome{worst <= tol::kTorqueLimit, fmt("max |tau| %.1f N*m over %ld ticks of the pack (<= %.0f)", worst,
                                                   ticks, tol::kTorqueLimit)};
  });

  report("pd-single-joint", [] {
    const double m = 5.0, L = 0.4, I = m * L * L;
    // Step response at the default hip gain, critically damped.
    const double kp = 300.0;
    pd::SingleJointRig step_rig(m, L, pd::PdGains{kp, 2.0 * std::sqrt(kp * I), 500.0}, false);
    double peak = 0.0;
    for (int i = 0; i < 5000; ++i) peak = std::max(peak, step_rig.step({0.5, 0.0}, 1e-3).next.angle);
    const double overshoot = (peak - 0.5) / 0.5;
    // Gravity hold at 30 degrees under a stiff rig servo.
    const double theta = deg2rad(30.0), hold_kp = 2000.0;
    pd::SingleJointRig hold(m, L, pd::PdGains{hold_kp, 2.0 * std::sqrt(hold_kp * I), 500.0}, true);
    pd::ServoResult last{};
    for (int i = 0; i < 10000; ++i) last = hold.step({theta, 0.0}, 1e-3);
    const double analytic = m * 9.81 * L * std::sin(theta);
    const double hold_err = std::abs(last.torque_Nm - analytic) / analytic;
    return Outcome{overshoot < tol::kOvershoot && hold_err <= tol::kGravityHold,
                   fmt("overshoot %.3f%% (< %.0f%%); hold torque %.3f vs %.3f N*m (%.2f%%, kp=%.0f)", 100 * overshoot,
                       100 * tol::kOvershoot, last.torque_Nm, analytic, 100 * hold_err, hold_kp)};
  });

  report("ik-exactness", [] {
    const auto skel = skeleton::Skeleton::humanoid();
    oracle::Sampler rnd(99);
    int solved = 0, limit_violations = 0;
    double worst_foot = 0.0, worst_knee = 0.0;
    while (solved < 10000) {
      const auto t = oracle::sample_reachable_targets(skel, rnd);
      if (!t) continue;
      const auto r = ik::solve_lower_ik(*t, skel);
      if (!skeleton::within_limits(r.pose, skel)) ++limit_violations;
      const auto fk = skeleton::forward_kinematics(r.pose, skel);
      for (int side = 0; side < 2; ++side) {
        const auto l = oracle::leg_chain(skel, side);
        const Vec3 ankle = fk[static_cast<std::size_t>(l.ankle)].position;
        worst_foot = std::max(worst_foot, (ankle - ik::ankle_target(t->feet[static_cast<std::size_t>(side)], skel)).norm());
        const double dist = (ankle - fk[static_cast<std::size_t>(l.hip)].position).norm();
        const double knee =
            r.pose.joint_angles[static_cast<std::size_t>(skel.dof_index(side == 0 ? "knee_l" : "knee_r", "flexion"))];
        worst_knee = std::max(worst_knee, std::abs(knee - oracle::knee_flexion_law_of_cosines(l.thigh, l.shank, dist)));
      }
      ++solved;
    }
    return Outcome{worst_foot < tol::kIkFoot && worst_knee < tol::kIkKnee && limit_violations == 0,
                   fmt("%d targets: foot err %.2e m, knee err %.2e rad, %d limit violations", solved, worst_foot,
                       worst_knee, limit_violations)};
  });

  report("determinism", [] {
    int mismatched = 0;
    std::size_t bytes = 0;
    for (const auto& n : scenario::builtin_names()) {
      const auto s = scenario::builtin(n);
      const auto a = serialize(s, harness::run_scenario(s, {false}));
      const auto b = serialize(s, harness::run_scenario(s, {false}));
      if (a != b) ++mismatched;
      bytes += a.size();
    }
    return Outcome{mismatched == 0, fmt("%d/%zu built-ins differ between runs (%.1f MB compared)", mismatched,
                                        scenario::builtin_names().size(), bytes / 1e6)};
  });

  report("performance-budget", [] {
    const auto r = harness::run_scenario(scenario::builtin("push-storm"));
    return Outcome{r.summary.compute.p99_us < tol::kP99Us,
                   fmt("push-storm p99 %.0f us, max %.0f us, mean %.0f us (< %.0f us)", r.summary.compute.p99_us,
                       r.summary.compute.max_us, r.summary.compute.mean_us, tol::kP99Us)};
  });

  std::printf("%d criteria failed\n", failures);
  return failures;
}
