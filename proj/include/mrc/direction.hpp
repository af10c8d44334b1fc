#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace mrc {

using Vec3 = std::array<double, 3>;

inline double dot(const Vec3& a, const Vec3& b) noexcept { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }
inline double norm(const Vec3& a) noexcept { return std::sqrt(dot(a, a)); }
inline Vec3 operator*(double s, const Vec3& a) noexcept { return {s * a[0], s * a[1], s * a[2]}; }
inline Vec3 operator+(const Vec3& a, const Vec3& b) noexcept { return {a[0] + b[0], a[1] + b[1], a[2] + b[2]}; }
inline Vec3 operator-(const Vec3& a, const Vec3& b) noexcept { return {a[0] - b[0], a[1] - b[1], a[2] - b[2]}; }

/// A point of the unit sphere, kept both as (theta, phi) and as a unit vector.
class Direction {
 public:
  Direction() : Direction(0.0, 0.0) {}

  Direction(double theta, double phi) : theta_(theta), phi_(wrap(phi)) {
    if (!(theta >= 0.0 && theta <= std::numbers::pi))
      throw std::domain_error("mrc: polar angle must lie in [0, pi]");
    const double s = std::sin(theta_);
    unit_ = {s * std::cos(phi_), s * std::sin(phi_), std::cos(theta_)};
  }

  static Direction from_vector(const Vec3& v) {
    const double n = norm(v);
    if (!(n > 0.0)) throw std::domain_error("mrc: cannot take the direction of a zero vector");
    const double z = std::clamp(v[2] / n, -1.0, 1.0);
    Direction d(std::acos(z), std::atan2(v[1], v[0]));
    d.unit_ = (1.0 / n) * v;
    return d;
  }

  static Direction z_axis() { return {0.0, 0.0}; }
  static Direction x_axis() { return {std::numbers::pi / 2, 0.0}; }

  double theta() const noexcept { return theta_; }
  double phi() const noexcept { return phi_; }
  const Vec3& unit() const noexcept { return unit_; }

  /// Unit vector of increasing theta.
  Vec3 e_theta() const noexcept {
    const double c = std::cos(theta_);
    return {c * std::cos(phi_), c * std::sin(phi_), -std::sin(theta_)};
  }
  /// Unit vector of increasing phi.
  Vec3 e_phi() const noexcept { return {-std::sin(phi_), std::cos(phi_), 0.0}; }

 private:
  static double wrap(double phi) {
    constexpr double two_pi = 2.0 * std::numbers::pi;
    double p = std::fmod(phi, two_pi);
    if (p < 0.0) p += two_pi;
    if (p >= two_pi) p = 0.0;
    return p;
  }

  double theta_;
  double phi_;
  Vec3 unit_;
};

}  // namespace mrc
