#include <benchmark/benchmark.h>

#include "slipstep/balance.hpp"
#include "slipstep/engine.hpp"
#include "slipstep/ik.hpp"
#include "slipstep/scenario.hpp"
#include "slipstep/slip.hpp"

using namespace slipstep;

static void BM_PushStormTick(benchmark::State& state) {
  const auto s = scenario::builtin("push-storm");
  auto eng = std::make_unique<engine::Engine>(s);
  for (auto _ : state) {
    if (eng->finished()) {
      state.PauseTiming();
      eng = std::make_unique<engine::Engine>(s);
      state.ResumeTiming();
    }
    benchmark::DoNotOptimize(eng->step());
  }
}
BENCHMARK(BM_PushStormTick)->Unit(benchmark::kMicrosecond);

static void BM_StepDistance(benchmark::State& state) {
  double v = 0.1;
  for (auto _ : state) {
    benchmark::DoNotOptimize(slip::step_distance(v, 0.88, 0.02, 9.81));
    v = v > 3.0 ? 0.1 : v + 1e-3;
  }
}
BENCHMARK(BM_StepDistance);

static void BM_LowerIk(benchmark::State& state) {
  const auto skel = skeleton::Skeleton::humanoid();
  ik::LowerBodyTargets t;
  t.pelvis = Vec3(0.05, 0.85, 0.0);
  t.pelvis_yaw_rad = 0.2;
  t.feet[0].ground_point = Vec3(0.25, 0.0, -0.12);
  t.feet[1].ground_point = Vec3(-0.15, 0.0, 0.1);
  for (auto _ : state) benchmark::DoNotOptimize(ik::solve_lower_ik(t, skel));
}
BENCHMARK(BM_LowerIk);

static void BM_Decide(benchmark::State& state) {
  slip::SlipState s;
  s.com_position = Vec3(0.05, 0.88, 0.02);
  s.com_velocity = Vec3(0.8, 0.0, 0.05);
  s.legs[0] = {Vec3(0.0, 0.0, -0.1), 0.9, true};
  s.legs[1] = {Vec3(0.1, 0.0, 0.1), 0.9, true};
  const slip::SlipParams p;
  balance::ControllerConfig cfg;
  cfg.target_speed_mps = 1.0;
  const auto flat = terrain::Terrain::flat();
  const auto ctx = slip::PullContext::make(Vec3(40.0, 0.0, 0.0), p, balance::support_leg_axis(s), Vec3::UnitX());
  const balance::SwingStatus swing{};
  for (auto _ : state) benchmark::DoNotOptimize(balance::decide({s, ctx, flat, cfg, p, swing}));
}
BENCHMARK(BM_Decide);
BENCHMARK_MAIN();
