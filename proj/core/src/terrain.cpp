#include "slipstep/terrain.hpp"

#include <algorithm>
#include <cmath>

#include <nlohmann/json.hpp>

#include "slipstep/errors.hpp"

namespace slipstep::terrain {

using nlohmann::json;

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

double along(const Vec2& axis, double x, double z) { return axis.x() * x + axis.y() * z; }

Vec2 unit_or_throw(const Vec2& v, const char* what) {
  if (!(v.norm() > 1e-12)) throw ConfigError(std::string("terrain: ") + what + " must be non-zero");
  return v.normalized();
}

double stairs_height(const Stairs& s, double u) {
  if (u < s.start_m) return 0.0;
  const double k = std::floor((u - s.start_m) / s.run_m) + 1.0;
  return std::min(k, static_cast<double>(s.count)) * s.rise_m;
}

double field_height(const Heightfield& f, double x, double z) {
  const double gx = std::clamp((x - f.origin.x()) / f.spacing_m, 0.0, static_cast<double>(f.cols - 1));
  const double gz = std::clamp((z - f.origin.y()) / f.spacing_m, 0.0, static_cast<double>(f.rows - 1));
  const int i0 = std::min(static_cast<int>(gx), f.cols - 2 < 0 ? 0 : f.cols - 2);
  const int j0 = std::min(static_cast<int>(gz), f.rows - 2 < 0 ? 0 : f.rows - 2);
  const int i1 = std::min(i0 + 1, f.cols - 1);
  const int j1 = std::min(j0 + 1, f.rows - 1);
  const double tx = gx - i0, tz = gz - j0;
  auto at = [&](int i, int j) { return f.heights[static_cast<std::size_t>(j * f.cols + i)]; };
  const double h0 = at(i0, j0) * (1.0 - tx) + at(i1, j0) * tx;
  const double h1 = at(i0, j1) * (1.0 - tx) + at(i1, j1) * tx;
  return h0 * (1.0 - tz) + h1 * tz;
}

bool in_gap(const Gaps& g, double u) {
  if (u < g.start_m) return false;
  const double m = std::fmod(u - g.start_m, g.period_m);
  return m >= g.period_m - g.gap_width_m;
}

Tilt scheduled_tilt(const RotatingPlatform& p, double t) {
  if (p.manual) return {p.manual->axis, p.manual->angle_rad};
  const double tt = t + p.phase_s;
  const double segment = std::floor(tt / p.period_s);
  const auto axis = (static_cast<long long>(segment) % 2 == 0) ? TiltAxis::kX : TiltAxis::kZ;
  return {axis, p.max_tilt_rad * std::sin(2.0 * kPi * tt / p.period_s)};
}

}  // namespace

Terrain::Terrain(Kind kind) : kind_(std::move(kind)) { validate(); }

std::string Terrain::kind_name() const {
  return std::visit(Overloaded{[](const Flat&) { return std::string("flat"); },
                               [](const Slope&) { return std::string("slope"); },
                               [](const Stairs&) { return std::string("stairs"); },
                               [](const Heightfield&) { return std::string("heightfield"); },
                               [](const Gaps&) { return std::string("gaps"); },
                               [](const RotatingPlatform&) { return std::string("rotating_platform"); }},
                    kind_);
}

bool Terrain::time_varying() const { return std::holds_alternative<RotatingPlatform>(kind_); }

void Terrain::validate() const {
  std::visit(Overloaded{
                 [](const Flat&) {},
                 [](const Slope& s) {
                   if (!(std::abs(s.angle_rad) < deg2rad(80.0))) throw ConfigError("terrain: slope angle out of range");
                   unit_or_throw(s.uphill, "slope uphill");
                 },
                 [](const Stairs& s) {
                   if (!(s.rise_m >= 0.0) || !(s.run_m > 0.0)) throw ConfigError("terrain: stairs need rise >= 0, run > 0");
                   unit_or_throw(s.uphill, "stairs uphill");
                 },
                 [](const Heightfield& f) {
                   if (f.cols < 2 || f.rows < 2 || !(f.spacing_m > 0.0)) throw ConfigError("terrain: heightfield needs >= 2x2 cells and spacing > 0");
                   if (f.heights.size() != static_cast<std::size_t>(f.cols * f.rows)) throw ConfigError("terrain: heightfield size mismatch");
                   for (double h : f.heights) {
                     if (!std::isfinite(h)) throw ConfigError("terrain: non-finite height");
                   }
                 },
                 [](const Gaps& g) {
                   if (!(g.period_m > 0.0) || !(g.gap_width_m >= 0.0) || !(g.gap_width_m < g.period_m)) {
                     throw ConfigError("terrain: gaps need 0 <= width < period");
                   }
                   unit_or_throw(g.axis, "gaps axis");
                 },
                 [](const RotatingPlatform& p) {
                   if (!(std::abs(p.max_tilt_rad) <= deg2rad(45.0) + 1e-12)) throw ConfigError("terrain: platform tilt above 45 degrees");
                   if (!(p.period_s > 0.0)) throw ConfigError("terrain: platform period must be > 0");
                   if (p.manual && !(std::abs(p.manual->angle_rad) <= deg2rad(45.0) + 1e-12)) {
                     throw ConfigError("terrain: manual platform tilt above 45 degrees");
                   }
                 }},
             kind_);
}

std::optional<double> Terrain::height_at(double x, double z, double t) const {
  return std::visit(
      Overloaded{
          [](const Flat&) -> std::optional<double> { return 0.0; },
          [&](const Slope& s) -> std::optional<double> {
            return along(s.uphill.normalized(), x, z) * std::tan(s.angle_rad);
          },
          [&](const Stairs& s) -> std::optional<double> {
            return stairs_height(s, along(s.uphill.normalized(), x, z));
          },
          [&](const Heightfield& f) -> std::optional<double> { return field_height(f, x, z); },
          [&](const Gaps& g) -> std::optional<double> {
            if (in_gap(g, along(g.axis.normalized(), x, z))) return std::nullopt;
            return 0.0;
          },
          [&](const RotatingPlatform& p) -> std::optional<double> {
            const Tilt tilt = scheduled_tilt(p, t);
            const double coord = tilt.axis == TiltAxis::kX ? z : x;
            return coord * std::tan(tilt.angle_rad);
          }},
      kind_);
}

double Terrain::height_or_throw(const Vec2& p, double t) const {
  const auto h = height_at(p, t);
  if (!h) throw RetargetError("terrain: no ground at (" + std::to_string(p.x()) + ", " + std::to_string(p.y()) + ")");
  return *h;
}

Vec3 Terrain::normal_at(const Vec2& p, double t) const {
  constexpr double e = 1e-4;
  const auto hx0 = height_at(p.x() - e, p.y(), t), hx1 = height_at(p.x() + e, p.y(), t);
  const auto hz0 = height_at(p.x(), p.y() - e, t), hz1 = height_at(p.x(), p.y() + e, t);
  if (!hx0 || !hx1 || !hz0 || !hz1) return Vec3::UnitY();
  const double dx = (*hx1 - *hx0) / (2.0 * e);
  const double dz = (*hz1 - *hz0) / (2.0 * e);
  // Stairs risers produce huge finite differences; treat them as flat treads.
  if (std::abs(dx) > 10.0 || std::abs(dz) > 10.0) return Vec3::UnitY();
  return Vec3(-dx, 1.0, -dz).normalized();
}

Tilt Terrain::platform_tilt(double t) const {
  if (const auto* p = std::get_if<RotatingPlatform>(&kind_)) return scheduled_tilt(*p, t);
  return {TiltAxis::kX, 0.0};
}

double terrain_offset_for_step(const Terrain& terrain, const Vec2& from, const Vec2& to, double t) {
  return terrain.height_or_throw(to, t) - terrain.height_or_throw(from, t);
}

Vec2 nearest_ground_toward(const Terrain& terrain, const Vec2& target, const Vec2& origin, double t,
                           double step_m) {
  const Vec2 delta = origin - target;
  const double dist = delta.norm();
  if (dist < 1e-12) return origin;
  const Vec2 dir = delta / dist;
  for (double s = 0.0; s <= dist; s += step_m) {
    const Vec2 p = target + s * dir;
    if (terrain.height_at(p, t)) return p;
  }
  return origin;
}

Heightfield rolling_field(int cols, int rows, double spacing_m, double amplitude_m, Vec2 origin) {
  Heightfield f;
  f.cols = cols;
  f.rows = rows;
  f.spacing_m = spacing_m;
  f.origin = origin;
  f.heights.resize(static_cast<std::size_t>(cols * rows));
  for (int j = 0; j < rows; ++j) {
    for (int i = 0; i < cols; ++i) {
      const double x = origin.x() + i * spacing_m, z = origin.y() + j * spacing_m;
      // Ramp in over the first 1.5 m so the start pose is level.
      const double ramp = std::clamp((x - origin.x() - 1.0) / 1.5, 0.0, 1.0);
      const double h = 0.6 * std::sin(0.9 * x) * std::cos(0.7 * z) + 0.4 * std::sin(1.7 * x + 0.3);
      f.heights[static_cast<std::size_t>(j * cols + i)] = ramp * amplitude_m * h;
    }
  }
  return f;
}

json to_json(const Terrain& terrain) {
  return std::visit(
      Overloaded{
          [](const Flat&) { return json{{"kind", "flat"}}; },
          [](const Slope& s) {
            return json{{"kind", "slope"}, {"angle_deg", rad2deg(s.angle_rad)}, {"uphill", {s.uphill.x(), s.uphill.y()}}};
          },
          [](const Stairs& s) {
            return json{{"kind", "stairs"}, {"rise_m", s.rise_m}, {"run_m", s.run_m}, {"start_m", s.start_m},
                        {"count", s.count}, {"uphill", {s.uphill.x(), s.uphill.y()}}};
          },
          [](const Heightfield& f) {
            return json{{"kind", "heightfield"}, {"spacing_m", f.spacing_m}, {"origin", {f.origin.x(), f.origin.y()}},
                        {"cols", f.cols}, {"rows", f.rows}, {"heights", f.heights}};
          },
          [](const Gaps& g) {
            return json{{"kind", "gaps"}, {"period_m", g.period_m}, {"gap_width_m", g.gap_width_m},
                        {"start_m", g.start_m}, {"axis", {g.axis.x(), g.axis.y()}}};
          },
          [](const RotatingPlatform& p) {
            json j{{"kind", "rotating_platform"}, {"max_tilt_deg", rad2deg(p.max_tilt_rad)}, {"period_s", p.period_s},
                   {"phase_s", p.phase_s}};
            if (p.manual) {
              j["manual"] = {{"axis", p.manual->axis == TiltAxis::kX ? "x" : "z"},
                             {"angle_deg", rad2deg(p.manual->angle_rad)}};
            }
            return j;
          }},
      terrain.kind());
}

namespace {

Vec2 vec2_field(const json& j, const char* key, Vec2 fallback) {
  if (!j.contains(key)) return fallback;
  const auto& a = j.at(key);
  if (!a.is_array() || a.size() != 2) throw ConfigError(std::string("terrain: '") + key + "' must be [x, z]");
  return {a[0].get<double>(), a[1].get<double>()};
}

}  // namespace

Terrain terrain_from_json(const json& j) {
  if (!j.is_object() || !j.contains("kind")) throw ConfigError("terrain: object with 'kind' required");
  const std::string kind = j.at("kind").get<std::string>();
  try {
    if (kind == "flat") return Terrain(Flat{});
    if (kind == "slope") {
      Slope s;
      s.angle_rad = deg2rad(j.value("angle_deg", 25.0));
      s.uphill = vec2_field(j, "uphill", s.uphill);
      return Terrain(s);
    }
    if (kind == "stairs") {
      Stairs s;
      s.rise_m = j.value("rise_m", s.rise_m);
      s.run_m = j.value("run_m", s.run_m);
      s.start_m = j.value("start_m", s.start_m);
      s.count = j.value("count", s.count);
      s.uphill = vec2_field(j, "uphill", s.uphill);
      return Terrain(s);
    }
    if (kind == "heightfield") {
      if (j.contains("generator")) {
        const auto& g = j.at("generator");
        return Terrain(rolling_field(g.value("cols", 80), g.value("rows", 24), g.value("spacing_m", 0.25),
                                     g.value("amplitude_m", 0.08), vec2_field(g, "origin", Vec2(-2.0, -3.0))));
      }
      Heightfield f;
      f.spacing_m = j.at("spacing_m").get<double>();
      f.origin = vec2_field(j, "origin", f.origin);
      f.cols = j.at("cols").get<int>();
      f.rows = j.at("rows").get<int>();
      f.heights = j.at("heights").get<std::vector<double>>();
      return Terrain(f);
    }
    if (kind == "gaps") {
      Gaps g;
      g.period_m = j.value("period_m", g.period_m);
      g.gap_width_m = j.value("gap_width_m", g.gap_width_m);
      g.start_m = j.value("start_m", g.start_m);
      g.axis = vec2_field(j, "axis", g.axis);
      return Terrain(g);
    }
    if (kind == "rotating_platform") {
      RotatingPlatform p;
      p.max_tilt_rad = deg2rad(j.value("max_tilt_deg", 45.0));
      p.period_s = j.value("period_s", p.period_s);
      p.phase_s = j.value("phase_s", p.phase_s);
      if (j.contains("manual")) {
        const auto& m = j.at("manual");
        RotatingPlatform::Manual manual;
        const std::string axis = m.value("axis", "x");
        if (axis != "x" && axis != "z") throw ConfigError("terrain: manual axis must be 'x' or 'z'");
        manual.axis = axis == "x" ? TiltAxis::kX : TiltAxis::kZ;
        manual.angle_rad = deg2rad(m.value("angle_deg", 0.0));
        p.manual = manual;
      }
      return Terrain(p);
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("terrain: ") + e.what());
  }
  throw ConfigError("terrain: unknown kind '" + kind + "'");
}

}  // namespace slipstep::terrain
