#include <gtest/gtest.h>

#include <cmath>

#include <nlohmann/json.hpp>

#include "slipstep/errors.hpp"
#include "slipstep/terrain.hpp"

using namespace slipstep;
using namespace slipstep::terrain;

TEST(Terrain, FlatIsZeroEverywhere) {
  const auto t = Terrain::flat();
  for (double x : {-100.0, 0.0, 3.7}) {
    for (double z : {-2.0, 0.0, 50.0}) EXPECT_EQ(*t.height_at(x, z, 12.0), 0.0);
  }
  EXPECT_TRUE(t.normal_at({1.0, 2.0}, 0.0).isApprox(Vec3::UnitY()));
}

TEST(Terrain, SlopeExample) {
  const Terrain t(Slope{deg2rad(25.0), {1.0, 0.0}});
  EXPECT_NEAR(*t.height_at(1.0, 0.0, 0.0), 0.4663, 1e-4);
  EXPECT_NEAR(*t.height_at(1.0, 0.0, 0.0), std::tan(deg2rad(25.0)), 1e-15);
  EXPECT_NEAR(*t.height_at(1.0, 5.0, 0.0), *t.height_at(1.0, 0.0, 0.0), 1e-15);
  const Vec3 n = t.normal_at({1.0, 0.0}, 0.0);
  EXPECT_NEAR(std::acos(n.dot(Vec3::UnitY())), deg2rad(25.0), 1e-6);
  EXPECT_LT(n.x(), 0.0);
}

TEST(Terrain, StairsTreads) {
  const Terrain t(Stairs{0.17, 0.28, 1.0, {1.0, 0.0}, 3});
  EXPECT_EQ(*t.height_at(0.99, 0.0, 0.0), 0.0);
  EXPECT_NEAR(*t.height_at(1.0, 0.0, 0.0), 0.17, 1e-15);
  EXPECT_NEAR(*t.height_at(1.27, 0.0, 0.0), 0.17, 1e-15);
  EXPECT_NEAR(*t.height_at(1.29, 0.0, 0.0), 0.34, 1e-15);
  EXPECT_NEAR(*t.height_at(10.0, 0.0, 0.0), 0.51, 1e-15);
  EXPECT_TRUE(t.normal_at({1.1, 0.0}, 0.0).isApprox(Vec3::UnitY()));
}

TEST(Terrain, RotatingPlatformManualTilt) {
  RotatingPlatform p;
  p.manual = RotatingPlatform::Manual{TiltAxis::kZ, deg2rad(10.0)};
  const Terrain t(p);
  for (double x : {-1.0, 0.5, 2.0}) EXPECT_NEAR(*t.height_at(x, 0.3, 7.0), x * std::tan(deg2rad(10.0)), 1e-15);
  p.manual = RotatingPlatform::Manual{TiltAxis::kX, deg2rad(10.0)};
  const Terrain tx(p);
  EXPECT_NEAR(*tx.height_at(0.7, 2.0, 0.0), 2.0 * std::tan(deg2rad(10.0)), 1e-15);
}

TEST(Terrain, RotatingPlatformScheduledTilt) {
  const Terrain t(RotatingPlatform{});
  // Tilt of 10 degrees on the first (x) segment.
  const double t10 = std::asin(10.0 / 45.0) * 20.0 / (2.0 * kPi);
  const Tilt tilt = t.platform_tilt(t10);
  EXPECT_EQ(tilt.axis, TiltAxis::kX);
  EXPECT_NEAR(tilt.angle_rad, deg2rad(10.0), 1e-12);
  EXPECT_NEAR(*t.height_at(0.4, 1.5, t10), 1.5 * std::tan(deg2rad(10.0)), 1e-12);
  EXPECT_EQ(t.platform_tilt(25.0).axis, TiltAxis::kZ);
  EXPECT_TRUE(t.time_varying());
  EXPECT_FALSE(Terrain::flat().time_varying());
}

TEST(Terrain, OffsetForStep) {
  const Terrain t(Slope{deg2rad(25.0), {1.0, 0.0}});
  const double up = terrain_offset_for_step(t, {0.0, 0.0}, {0.5, 0.0}, 0.0);
  EXPECT_NEAR(up, 0.5 * std::tan(deg2rad(25.0)), 1e-15);
  EXPECT_GT(up, 0.0);
  EXPECT_NEAR(terrain_offset_for_step(t, {0.5, 0.0}, {0.0, 0.0}, 0.0), -up, 1e-15);
  EXPECT_EQ(terrain_offset_for_step(Terrain::flat(), {0.0, 0.0}, {0.5, 0.3}, 0.0), 0.0);
}

TEST(Terrain, GapsReportNoGround) {
  const Terrain t(Gaps{});
  EXPECT_TRUE(t.height_at(1.5, 0.0, 0.0).has_value());
  EXPECT_FALSE(t.height_at(1.9, 0.0, 0.0).has_value());
  EXPECT_FALSE(t.height_at(2.85, 0.0, 0.0).has_value());
  EXPECT_TRUE(t.height_at(0.5, 0.0, 0.0).has_value());
  EXPECT_THROW(t.height_or_throw({1.9, 0.0}, 0.0), RetargetError);
  EXPECT_THROW(terrain_offset_for_step(t, {1.5, 0.0}, {1.9, 0.0}, 0.0), RetargetError);
  EXPECT_TRUE(t.normal_at({1.9, 0.0}, 0.0).isApprox(Vec3::UnitY()));
}

TEST(Terrain, NearestGroundWalksBackToTheEdge) {
  const Terrain t(Gaps{});
  const Vec2 p = nearest_ground_toward(t, {1.95, 0.0}, {1.0, 0.0}, 0.0, 0.01);
  EXPECT_TRUE(t.height_at(p, 0.0).has_value());
  EXPECT_LT(p.x(), 1.8);
  EXPECT_GT(p.x(), 1.78);
  EXPECT_EQ(nearest_ground_toward(t, {1.5, 0.0}, {1.0, 0.0}, 0.0), Vec2(1.5, 0.0));
}

TEST(Terrain, HeightfieldBilinear) {
  Heightfield f;
  f.spacing_m = 1.0;
  f.cols = 2;
  f.rows = 2;
  f.heights = {0.0, 1.0, 2.0, 3.0};
  const Terrain t(f);
  EXPECT_NEAR(*t.height_at(0.5, 0.5, 0.0), 1.5, 1e-15);
  EXPECT_NEAR(*t.height_at(1.0, 0.0, 0.0), 1.0, 1e-15);
  EXPECT_NEAR(*t.height_at(0.0, 1.0, 0.0), 2.0, 1e-15);
  // Outside the grid clamps to the border.
  EXPECT_NEAR(*t.height_at(5.0, 5.0, 0.0), 3.0, 1e-15);
}

TEST(Terrain, JsonRoundTrip) {
  RotatingPlatform p;
  p.phase_s = 3.0;
  p.manual = RotatingPlatform::Manual{TiltAxis::kZ, deg2rad(12.0)};
  const std::vector<Terrain> all = {Terrain::flat(),
                                    Terrain(Slope{deg2rad(10.0), Vec2(0.6, 0.8)}),
                                    Terrain(Stairs{}),
                                    Terrain(rolling_field(8, 6, 0.5, 0.1, {-1.0, -1.5})),
                                    Terrain(Gaps{}),
                                    Terrain(p)};
  for (const auto& t : all) {
    const auto j = to_json(t);
    const auto back = terrain_from_json(j);
    EXPECT_EQ(to_json(back), j) << t.kind_name();
    for (double x : {-0.3, 0.7, 1.9, 2.4}) {
      const auto a = t.height_at(x, 0.25, 4.0), b = back.height_at(x, 0.25, 4.0);
      ASSERT_EQ(a.has_value(), b.has_value());
      if (a) {
        EXPECT_NEAR(*a, *b, 1e-12);
      }
    }
  }
}

TEST(Terrain, ValidateRejectsBadParameters) {
  EXPECT_THROW(Terrain(Gaps{1.0, 1.0, 1.0, {1.0, 0.0}}).validate(), ConfigError);
  RotatingPlatform p;
  p.max_tilt_rad = deg2rad(50.0);
  EXPECT_THROW(Terrain(p).validate(), ConfigError);
  EXPECT_THROW(terrain_from_json(nlohmann::json{{"kind", "lava"}}), ConfigError);
  EXPECT_NO_THROW(Terrain(Slope{}).validate());
}
