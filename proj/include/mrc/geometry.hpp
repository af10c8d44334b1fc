#pragma once

/// \file geometry.hpp
/// Star-shaped surfaces r = f(alpha), their surface element and normals,
/// and tensor-product quadrature on the unit sphere.

#include <cmath>
#include <functional>
#include <numbers>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "mrc/direction.hpp"
#include "mrc/specfun.hpp"

namespace mrc {

struct SphereShape {
  double a = 1.0;
};

/// One real harmonic bump: amplitude * S_lm(alpha), where S_lm is the
/// Schmidt semi-normalized real harmonic (cos(m phi) for m >= 0,
/// sin(|m| phi) for m < 0), bounded by 1 in magnitude.
struct HarmonicBump {
  int ell = 0;
  int m = 0;
  double amplitude = 0.0;
};

struct PerturbedSphereShape {
  double a = 1.0;
  std::vector<HarmonicBump> bumps;
};

/// Ellipsoid x^2/a^2 + y^2/b^2 + z^2/c^2 = 1 through its exact radial map.
struct EllipsoidShape {
  double a = 1.0;
  double b = 1.0;
  double c = 1.0;
};

/// User-supplied radial map. The partials must be analytic.
struct CustomShape {
  std::function<double(const Direction&)> f;
  std::function<double(const Direction&)> f_theta;
  std::function<double(const Direction&)> f_phi;
  double max_radius = 0.0;
  double min_radius = 0.0;
};

using SurfaceDescriptor = std::variant<SphereShape, PerturbedSphereShape, EllipsoidShape, CustomShape>;

namespace detail {

/// S_lm and its derivatives; see HarmonicBump.
struct RealHarmonic {
  double value;
  double d_theta;
  double d_phi;
  double d_phi_sin;  ///< (1/sin theta) d/dphi, pole-safe
};

inline RealHarmonic real_harmonic(int ell, int m, const Direction& dir) {
  const int am = std::abs(m);
  const LegendreTable leg(ell, dir.theta());
  // Undo the Condon-Shortley sign and the 4pi normalization; the Schmidt
  // functions carry an extra sqrt(2) for m > 0.
  const double scale = (am % 2 == 0 ? 1.0 : -1.0) * std::sqrt(4.0 * std::numbers::pi / (2.0 * ell + 1.0)) *
                       (am > 0 ? std::numbers::sqrt2 : 1.0);
  const double p = scale * leg.p(ell, am);
  const double dp = scale * leg.dp_dtheta(ell, am);
  const double mp_sin = scale * leg.m_p_over_sin(ell, am);  // |m| P / sin
  const double phi = dir.phi();
  if (m >= 0) {
    const double c = std::cos(am * phi);
    const double s = std::sin(am * phi);
    return {p * c, dp * c, -am * s * p, -s * mp_sin};
  }
  const double c = std::cos(am * phi);
  const double s = std::sin(am * phi);
  return {p * s, dp * s, am * c * p, c * mp_sin};
}

inline double ellipsoid_quadric(const EllipsoidShape& e, const Direction& d) {
  const auto& u = d.unit();
  return u[0] * u[0] / (e.a * e.a) + u[1] * u[1] / (e.b * e.b) + u[2] * u[2] / (e.c * e.c);
}

}  // namespace detail

/// Closed star-shaped surface r = f(alpha) with analytic angular partials.
class StarSurface {
 public:
  explicit StarSurface(SurfaceDescriptor desc) : desc_(std::move(desc)) { validate(); }

  static StarSurface sphere(double a) { return StarSurface(SphereShape{a}); }

  const SurfaceDescriptor& descriptor() const noexcept { return desc_; }

  std::string type_name() const {
    return std::visit(
        [](const auto& s) -> std::string {
          using T = std::decay_t<decltype(s)>;
          if constexpr (std::is_same_v<T, SphereShape>) return "sphere";
          else if constexpr (std::is_same_v<T, PerturbedSphereShape>) return "perturbed_sphere";
          else if constexpr (std::is_same_v<T, EllipsoidShape>) return "ellipsoid";
          else return "custom";
        },
        desc_);
  }

  double radius(const Direction& d) const {
    return std::visit(
        [&](const auto& s) -> double {
          using T = std::decay_t<decltype(s)>;
          if constexpr (std::is_same_v<T, SphereShape>) {
            return s.a;
          } else if constexpr (std::is_same_v<T, PerturbedSphereShape>) {
            double f = s.a;
            for (const auto& b : s.bumps) f += b.amplitude * detail::real_harmonic(b.ell, b.m, d).value;
            return f;
          } else if constexpr (std::is_same_v<T, EllipsoidShape>) {
            return 1.0 / std::sqrt(detail::ellipsoid_quadric(s, d));
          } else {
            return s.f(d);
          }
        },
        desc_);
  }

  double d_theta(const Direction& d) const {
    return std::visit(
        [&](const auto& s) -> double {
          using T = std::decay_t<decltype(s)>;
          if constexpr (std::is_same_v<T, SphereShape>) {
            return 0.0;
          } else if constexpr (std::is_same_v<T, PerturbedSphereShape>) {
            double v = 0.0;
            for (const auto& b : s.bumps) v += b.amplitude * detail::real_harmonic(b.ell, b.m, d).d_theta;
            return v;
          } else if constexpr (std::is_same_v<T, EllipsoidShape>) {
            const double g = detail::ellipsoid_quadric(s, d);
            const double ph = d.phi();
            const double st = std::sin(d.theta()), ct = std::cos(d.theta());
            const double g_t = 2.0 * st * ct *
                               (std::cos(ph) * std::cos(ph) / (s.a * s.a) +
                                std::sin(ph) * std::sin(ph) / (s.b * s.b) - 1.0 / (s.c * s.c));
            return -0.5 * g_t / (g * std::sqrt(g));
          } else {
            return s.f_theta(d);
          }
        },
        desc_);
  }

  double d_phi(const Direction& d) const {
    return d_phi_impl(d, false);
  }

  /// f_phi / sin(theta), continued to the poles. Throws std::domain_error
  /// at a pole where f_phi does not vanish (non-smooth parametrization).
  double d_phi_over_sin(const Direction& d) const { return d_phi_impl(d, true); }

  /// Upper bound of f over the sphere.
  double max_radius() const {
    return std::visit(
        [](const auto& s) -> double {
          using T = std::decay_t<decltype(s)>;
          if constexpr (std::is_same_v<T, SphereShape>) return s.a;
          else if constexpr (std::is_same_v<T, PerturbedSphereShape>) return s.a + bump_total(s);
          else if constexpr (std::is_same_v<T, EllipsoidShape>) return std::max({s.a, s.b, s.c});
          else return s.max_radius;
        },
        desc_);
  }

  /// Lower bound of f over the sphere.
  double min_radius() const {
    return std::visit(
        [](const auto& s) -> double {
          using T = std::decay_t<decltype(s)>;
          if constexpr (std::is_same_v<T, SphereShape>) return s.a;
          else if constexpr (std::is_same_v<T, PerturbedSphereShape>) return s.a - bump_total(s);
          else if constexpr (std::is_same_v<T, EllipsoidShape>) return std::min({s.a, s.b, s.c});
          else return s.min_radius;
        },
        desc_);
  }

  Vec3 point(const Direction& d) const { return radius(d) * d.unit(); }

 private:
  static double bump_total(const PerturbedSphereShape& s) {
    double t = 0.0;
    for (const auto& b : s.bumps) t += std::abs(b.amplitude);
    return t;
  }

  double d_phi_impl(const Direction& d, bool over_sin) const {
    constexpr double pole_eps = 1e-12;
    return std::visit(
        [&](const auto& s) -> double {
          using T = std::decay_t<decltype(s)>;
          if constexpr (std::is_same_v<T, SphereShape>) {
            return 0.0;
          } else if constexpr (std::is_same_v<T, PerturbedSphereShape>) {
            double v = 0.0;
            for (const auto& b : s.bumps) {
              const auto h = detail::real_harmonic(b.ell, b.m, d);
              v += b.amplitude * (over_sin ? h.d_phi_sin : h.d_phi);
            }
            return v;
          } else if constexpr (std::is_same_v<T, EllipsoidShape>) {
            const double g = detail::ellipsoid_quadric(s, d);
            const double st = std::sin(d.theta());
            const double ph = d.phi();
            // g_phi = 2 sin^2(theta) cos(phi) sin(phi) (1/b^2 - 1/a^2)
            const double g_phi_sin =
                2.0 * st * std::cos(ph) * std::sin(ph) * (1.0 / (s.b * s.b) - 1.0 / (s.a * s.a));
            const double v = -0.5 * g_phi_sin / (g * std::sqrt(g));
            return over_sin ? v : v * st;
          } else {
            const double fp = s.f_phi(d);
            if (!over_sin) return fp;
            const double st = std::sin(d.theta());
            if (std::abs(st) > pole_eps) return fp / st;
            if (fp != 0.0)
              throw std::domain_error("mrc: surface has a nonzero phi-derivative at a pole (non-smooth parametrization)");
            return 0.0;
          }
        },
        desc_);
  }

  void validate() const {
    std::visit(
        [](const auto& s) {
          using T = std::decay_t<decltype(s)>;
          if constexpr (std::is_same_v<T, SphereShape>) {
            if (!(s.a > 0.0)) throw std::invalid_argument("mrc: sphere radius must be positive");
          } else if constexpr (std::is_same_v<T, PerturbedSphereShape>) {
            if (!(s.a > 0.0)) throw std::invalid_argument("mrc: perturbed sphere base radius must be positive");
            for (const auto& b : s.bumps)
              if (!ModeIndex{b.ell, b.m}.valid() || !std::isfinite(b.amplitude))
                throw std::invalid_argument("mrc: invalid harmonic bump");
            if (!(bump_total(s) < s.a))
              throw std::invalid_argument("mrc: sum of |amplitudes| must stay below the base radius");
          } else if constexpr (std::is_same_v<T, EllipsoidShape>) {
            if (!(s.a > 0.0 && s.b > 0.0 && s.c > 0.0))
              throw std::invalid_argument("mrc: ellipsoid semi-axes must be positive");
          } else {
            if (!s.f || !s.f_theta || !s.f_phi) throw std::invalid_argument("mrc: custom surface needs f and partials");
            if (!(s.min_radius > 0.0 && s.max_radius >= s.min_radius))
              throw std::invalid_argument("mrc: custom surface needs positive radius bounds");
          }
        },
        desc_);
  }

  SurfaceDescriptor desc_;
};

/// w = dS/dalpha = f sqrt(f^2 + f_theta^2 + (f_phi / sin theta)^2).
inline double surface_element(const StarSurface& s, const Direction& d) {
  const double f = s.radius(d);
  const double ft = s.d_theta(d);
  const double fp = s.d_phi_over_sin(d);
  return f * std::sqrt(f * f + ft * ft + fp * fp);
}

/// Unit normal pointing into the exterior, from grad(|x| - f(x/|x|)).
/// Returned as (radial, theta, phi) components in the local frame.
inline Vec3 outward_normal_local(const StarSurface& s, const Direction& d) {
  const double f = s.radius(d);
  Vec3 n{1.0, -s.d_theta(d) / f, -s.d_phi_over_sin(d) / f};
  return (1.0 / norm(n)) * n;
}

/// Outward unit normal at the surface point in direction d (Cartesian).
inline Vec3 outward_normal(const StarSurface& s, const Direction& d) {
  const Vec3 loc = outward_normal_local(s, d);
  return loc[0] * d.unit() + loc[1] * d.e_theta() + loc[2] * d.e_phi();
}

/// Gauss-Legendre nodes and weights on [-1, 1], nodes descending.
inline void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
  x.assign(static_cast<std::size_t>(n), 0.0);
  w.assign(static_cast<std::size_t>(n), 0.0);
  const int half = (n + 1) / 2;
  for (int i = 0; i < half; ++i) {
    double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p1 = 1.0, p2 = 0.0;
      for (int j = 1; j <= n; ++j) {
        const double p3 = p2;
        p2 = p1;
        p1 = ((2.0 * j - 1.0) * z * p2 - (j - 1.0) * p3) / j;
      }
      dp = n * (z * p1 - p2) / (z * z - 1.0);
      const double dz = p1 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    // refresh derivative at the converged node
    {
      double p1 = 1.0, p2 = 0.0;
      for (int j = 1; j <= n; ++j) {
        const double p3 = p2;
        p2 = p1;
        p1 = ((2.0 * j - 1.0) * z * p2 - (j - 1.0) * p3) / j;
      }
      dp = n * (z * p1 - p2) / (z * z - 1.0);
    }
    x[i] = z;
    x[n - 1 - i] = -z;
    w[i] = w[n - 1 - i] = 2.0 / ((1.0 - z * z) * dp * dp);
  }
}

/// Gauss-Legendre in cos(theta) times a uniform phi grid.
class SphereQuadrature {
 public:
  SphereQuadrature(int n_theta, int n_phi) : n_theta_(n_theta), n_phi_(n_phi) {
    if (n_theta < 2 || n_phi < 4) throw std::invalid_argument("mrc: quadrature needs n_theta >= 2 and n_phi >= 4");
    std::vector<double> x, w;
    gauss_legendre(n_theta, x, w);
    const double dphi = 2.0 * std::numbers::pi / n_phi;
    nodes_.reserve(static_cast<std::size_t>(n_theta * n_phi));
    weights_.reserve(nodes_.capacity());
    for (int i = 0; i < n_theta; ++i) {
      const double theta = std::acos(x[i]);
      for (int j = 0; j < n_phi; ++j) {
        nodes_.emplace_back(theta, j * dphi);
        weights_.push_back(w[i] * dphi);
      }
    }
  }

  /// Smallest tensor rule integrating harmonic degree `degree` exactly.
  static SphereQuadrature for_degree(int degree) {
    const int d = std::max(degree, 3);
    return {std::max(2, (d + 2) / 2), std::max(4, d + 1)};
  }

  int n_theta() const noexcept { return n_theta_; }
  int n_phi() const noexcept { return n_phi_; }
  std::size_t size() const noexcept { return nodes_.size(); }
  /// Harmonic degree integrated exactly.
  int degree() const noexcept { return std::min(2 * n_theta_ - 1, n_phi_ - 1); }

  const std::vector<Direction>& nodes() const noexcept { return nodes_; }
  const std::vector<double>& weights() const noexcept { return weights_; }

  template <typename F>
  auto integrate(F&& fn) const {
    using R = decltype(fn(nodes_.front()));
    R acc{};
    for (std::size_t p = 0; p < nodes_.size(); ++p) acc += weights_[p] * fn(nodes_[p]);
    return acc;
  }

 private:
  int n_theta_;
  int n_phi_;
  std::vector<Direction> nodes_;
  std::vector<double> weights_;
};

inline SphereQuadrature make_quadrature(int n_theta, int n_phi) { return {n_theta, n_phi}; }

/// Near-uniform point set on the sphere (golden-angle spiral).
inline std::vector<Direction> fibonacci_directions(int n) {
  if (n < 1) throw std::invalid_argument("mrc: need at least one direction");
  std::vector<Direction> out;
  out.reserve(static_cast<std::size_t>(n));
  const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
  for (int i = 0; i < n; ++i) {
    const double z = 1.0 - (2.0 * i + 1.0) / n;
    out.emplace_back(std::acos(z), golden * i);
  }
  return out;
}

}  // namespace mrc
