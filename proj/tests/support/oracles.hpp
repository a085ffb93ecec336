#pragma once

// Reference computations used by the tests. Each one is derived directly from
// first principles and shares no code with the library.

#include <cmath>
#include <numbers>
#include <random>

namespace oracle {

/// Vault length d that balances 1/2 v^2 + g H = g sqrt(H^2 + d^2) (rest at apex),
/// found by bisection on the energy residual.
inline double vault_length_by_bisection(double v, double H, double g) {
  const auto residual = [&](double d) { return g * std::sqrt(H * H + d * d) - (0.5 * v * v + g * H); };
  double lo = 0.0, hi = 1.0;
  while (residual(hi) < 0.0) hi *= 2.0;
  for (int i = 0; i < 200 && hi - lo > 0.0; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    (residual(mid) < 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

/// Interior knee angle of a hip-knee-ankle triangle, turned into flexion (0 = straight).
inline double knee_flexion_law_of_cosines(double thigh, double shank, double dist) {
  const double interior = std::acos((thigh * thigh + shank * shank - dist * dist) / (2.0 * thigh * shank));
  return std::numbers::pi - interior;
}

/// Underdamped free response envelope of I q'' + c q' + k q = 0 from q(0) = a, q'(0) = 0.
struct DampedOscillator {
  double inertia, kp, kd;
  double omega_n() const { return std::sqrt(kp / inertia); }
  double zeta() const { return kd / (2.0 * std::sqrt(kp * inertia)); }
  double omega_d() const { return omega_n() * std::sqrt(1.0 - zeta() * zeta()); }
  double response(double a, double t) const {
    const double z = zeta(), wn = omega_n(), wd = omega_d();
    return a * std::exp(-z * wn * t) * (std::cos(wd * t) + z * wn / wd * std::sin(wd * t));
  }
  double envelope(double a, double t) const {
    return a * std::exp(-zeta() * omega_n() * t) / std::sqrt(1.0 - zeta() * zeta());
  }
};

/// Sphere mass from radius and density.
inline double sphere_mass(double radius, double density) {
  return density * 4.0 / 3.0 * std::numbers::pi * radius * radius * radius;
}

class Sampler {
 public:
  explicit Sampler(unsigned seed) : rng_(seed) {}
  double operator()(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }

 private:
  std::mt19937_64 rng_;
};

}  // namespace oracle
