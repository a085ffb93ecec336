#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "slipstep/math.hpp"

namespace slipstep::terrain {

struct Flat {};

/// Incline rising along `uphill` (unit ground direction) by tan(angle).
struct Slope {
  double angle_rad = deg2rad(25.0);
  Vec2 uphill{1.0, 0.0};
};

/// Flat up to `start_m` along `uphill`, then treads of depth `run_m` each `rise_m` higher.
struct Stairs {
  double rise_m = 0.17;
  double run_m = 0.28;
  double start_m = 1.0;
  Vec2 uphill{1.0, 0.0};
  int count = 1000;  // steps after which the top landing continues flat
};

/// Regular grid with bilinear interpolation; rows run along z, columns along x.
struct Heightfield {
  double spacing_m = 0.25;
  Vec2 origin{0.0, 0.0};
  int cols = 0;  // along x
  int rows = 0;  // along z
  std::vector<double> heights;  // row-major, rows*cols
};

/// Flat ground cut by trenches `gap_width_m` wide every `period_m` along `axis`,
/// starting after `start_m`.
struct Gaps {
  double period_m = 1.0;
  double gap_width_m = 0.2;
  double start_m = 1.0;
  Vec2 axis{1.0, 0.0};
};

enum class TiltAxis { kX, kZ };

/// Plane through the origin whose tilt follows a sinusoid, alternating between the
/// x and z axes every `period_s`. A manual tilt replaces the schedule entirely.
struct RotatingPlatform {
  double max_tilt_rad = deg2rad(45.0);
  double period_s = 20.0;
  double phase_s = 0.0;
  struct Manual {
    TiltAxis axis = TiltAxis::kX;
    double angle_rad = 0.0;
  };
  std::optional<Manual> manual;
};

using Kind = std::variant<Flat, Slope, Stairs, Heightfield, Gaps, RotatingPlatform>;

struct Tilt {
  TiltAxis axis;
  double angle_rad;
};

class Terrain {
 public:
  Terrain() = default;
  explicit Terrain(Kind kind);

  static Terrain flat() { return Terrain(Flat{}); }

  const Kind& kind() const { return kind_; }
  Kind& kind() { return kind_; }
  std::string kind_name() const;
  bool time_varying() const;

  /// Surface height, or nullopt inside a gap.
  std::optional<double> height_at(double x, double z, double t) const;
  std::optional<double> height_at(const Vec2& p, double t) const { return height_at(p.x(), p.y(), t); }

  /// Height with gaps reported as RetargetError.
  double height_or_throw(const Vec2& p, double t) const;

  /// Upward unit normal of the surface (finite differences; vertical in gaps).
  Vec3 normal_at(const Vec2& p, double t) const;

  /// Current platform tilt (zero angle for non-platform terrain).
  Tilt platform_tilt(double t) const;

  void validate() const;

 private:
  Kind kind_ = Flat{};
};

/// s = height(to) - height(from). Throws RetargetError if either point is over a gap.
double terrain_offset_for_step(const Terrain& terrain, const Vec2& from, const Vec2& to, double t);

/// Walks from `target` back toward `origin` (in `step_m` increments) until ground is
/// found. Returns the origin if nothing closer has ground.
Vec2 nearest_ground_toward(const Terrain& terrain, const Vec2& target, const Vec2& origin, double t,
                           double step_m = 0.01);

/// Deterministic rolling heightfield (sum of sinusoids) used by the built-in scenarios.
Heightfield rolling_field(int cols, int rows, double spacing_m, double amplitude_m, Vec2 origin);

nlohmann::json to_json(const Terrain& terrain);
Terrain terrain_from_json(const nlohmann::json& j);

}  // namespace slipstep::terrain
