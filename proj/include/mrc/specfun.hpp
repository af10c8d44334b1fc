#pragma once

/// \file specfun.hpp
/// Spherical Bessel and outgoing Hankel functions, fully normalized
/// associated Legendre functions and orthonormal spherical harmonics.
///
/// Outgoing radial functions follow the far-field normalization
/// h_l(r) ~ e^{ikr}/r, i.e. h_l(r) = i^{l+1} k h1_l(kr) with h1_l the
/// standard first-kind spherical Hankel function. The conversion factor
/// never leaves this header.

#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "mrc/direction.hpp"

namespace mrc {

using cplx = std::complex<double>;

/// Degree/order pair of a spherical harmonic.
struct ModeIndex {
  int ell = 0;
  int m = 0;

  constexpr bool valid() const noexcept { return ell >= 0 && m >= -ell && m <= ell; }

  /// Position in the ell^2 + ell + m enumeration.
  constexpr int flat() const noexcept { return ell * ell + ell + m; }

  static ModeIndex from_flat(int index) {
    if (index < 0) throw std::domain_error("mrc: negative flat mode index");
    int ell = static_cast<int>(std::sqrt(static_cast<double>(index)));
    while (ell * ell > index) --ell;
    while ((ell + 1) * (ell + 1) <= index) ++ell;
    return {ell, index - ell * ell - ell};
  }

  friend constexpr bool operator==(ModeIndex, ModeIndex) = default;
};

/// Number of (ell, m) modes with ell <= L.
constexpr int mode_count(int L) noexcept { return (L + 1) * (L + 1); }

namespace detail {

inline void require_order(int ell) {
  if (ell < 0) throw std::domain_error("mrc: negative spherical Bessel order " + std::to_string(ell));
}

inline void require_positive_arg(double x, const char* what) {
  if (!(x > 0.0) || !std::isfinite(x))
    throw std::domain_error(std::string("mrc: ") + what + " must be positive and finite");
}

/// i^n for integer n >= 0.
inline cplx ipow(int n) {
  switch (((n % 4) + 4) % 4) {
    case 0: return {1.0, 0.0};
    case 1: return {0.0, 1.0};
    case 2: return {-1.0, 0.0};
    default: return {0.0, -1.0};
  }
}

}  // namespace detail

/// j_0(x) .. j_L(x).
///
/// Upward recurrence when every requested order lies below x; otherwise
/// Miller's downward recurrence started at L + max(20, ceil(1.5 x)) and
/// normalized against the closed form of j_0 or j_1, whichever is larger.
inline std::vector<double> spherical_bessel_j_array(int L, double x) {
  detail::require_order(L);
  detail::require_positive_arg(x, "spherical Bessel argument");

  std::vector<double> j(static_cast<std::size_t>(L) + 1, 0.0);
  const double s = std::sin(x);
  const double c = std::cos(x);
  const double j0 = s / x;

  if (L == 0) {
    j[0] = j0;
    return j;
  }

  if (static_cast<double>(L) <= x) {
    j[0] = j0;
    j[1] = s / (x * x) - c / x;
    for (int l = 1; l < L; ++l) j[l + 1] = (2.0 * l + 1.0) / x * j[l] - j[l - 1];
    return j;
  }

  const int start = L + std::max(20, static_cast<int>(std::ceil(1.5 * x)));
  constexpr double big = 1e250;
  double above = 0.0;  // j_{l+1}
  double cur = 1e-300;  // j_l
  for (int l = start; l > 0; --l) {
    const double below = (2.0 * l + 1.0) / x * cur - above;
    above = cur;
    cur = below;
    if (l - 1 <= L) j[l - 1] = cur;
    if (std::abs(cur) > big) {
      cur /= big;
      above /= big;
      for (int q = l - 1; q <= L; ++q) j[q] /= big;
    }
  }

  // j_1 is only taken from the closed form when it dominates, i.e. away
  // from the small-x cancellation regime.
  const double j1 = s / (x * x) - c / x;
  const double scale = std::abs(j0) >= std::abs(j1) ? j0 / j[0] : j1 / j[1];
  for (auto& v : j) v *= scale;
  return j;
}

inline double spherical_bessel_j(int ell, double x) {
  detail::require_order(ell);
  return spherical_bessel_j_array(ell, x)[static_cast<std::size_t>(ell)];
}

/// y_0(x) .. y_L(x) by upward recurrence (stable for the dominant solution).
inline std::vector<double> spherical_bessel_y_array(int L, double x) {
  detail::require_order(L);
  detail::require_positive_arg(x, "spherical Bessel argument");
  std::vector<double> y(static_cast<std::size_t>(L) + 1, 0.0);
  const double s = std::sin(x);
  const double c = std::cos(x);
  y[0] = -c / x;
  if (L >= 1) y[1] = -c / (x * x) - s / x;
  for (int l = 1; l < L; ++l) y[l + 1] = (2.0 * l + 1.0) / x * y[l] - y[l - 1];
  return y;
}

inline double spherical_bessel_y(int ell, double x) {
  detail::require_order(ell);
  return spherical_bessel_y_array(ell, x)[static_cast<std::size_t>(ell)];
}

/// Derivatives f'_l from the values f_0..f_{L+1} of any spherical
/// cylinder function: f'_0 = -f_1, f'_l = f_{l-1} - (l+1)/x f_l.
template <typename T>
std::vector<T> spherical_derivatives(const std::vector<T>& f, double x) {
  const std::size_t n = f.size() - 1;
  std::vector<T> d(n);
  if (n == 0) return d;
  d[0] = -f[1];
  for (std::size_t l = 1; l < n; ++l) d[l] = f[l - 1] - (static_cast<double>(l) + 1.0) / x * f[l];
  return d;
}

/// Outgoing radial functions h_l(r), l = 0..L, and their r-derivatives.
struct RadialTable {
  std::vector<cplx> value;
  std::vector<cplx> dr;
};

inline RadialTable hankel_out_table(int L, double k, double r) {
  detail::require_order(L);
  detail::require_positive_arg(k, "wavenumber");
  detail::require_positive_arg(r, "radius");
  const double z = k * r;
  const auto j = spherical_bessel_j_array(L + 1, z);
  const auto y = spherical_bessel_y_array(L + 1, z);
  std::vector<cplx> h1(j.size());
  for (std::size_t l = 0; l < j.size(); ++l) h1[l] = {j[l], y[l]};
  const auto dh1 = spherical_derivatives(h1, z);

  RadialTable out;
  out.value.resize(static_cast<std::size_t>(L) + 1);
  out.dr.resize(static_cast<std::size_t>(L) + 1);
  for (int l = 0; l <= L; ++l) {
    const cplx norm = detail::ipow(l + 1) * k;
    out.value[l] = norm * h1[l];
    out.dr[l] = norm * k * dh1[l];
  }
  return out;
}

/// Outgoing radial function normalized so that h_l(r) ~ e^{ikr}/r.
inline cplx hankel_out(int ell, double k, double r) {
  detail::require_order(ell);
  return hankel_out_table(ell, k, r).value[static_cast<std::size_t>(ell)];
}

/// d/dr of hankel_out.
inline cplx hankel_out_dr(int ell, double k, double r) {
  detail::require_order(ell);
  return hankel_out_table(ell, k, r).dr[static_cast<std::size_t>(ell)];
}

/// Fully normalized associated Legendre functions with Condon-Shortley
/// phase, scaled so that Y_lm = P_lm(cos theta) e^{i m phi} is orthonormal
/// on the unit sphere. Stores 0 <= m <= l <= L together with d/dtheta and
/// the pole-safe quotient m P_lm / sin(theta).
class LegendreTable {
 public:
  LegendreTable(int L, double theta) : L_(L) {
    if (L < 0) throw std::domain_error("mrc: negative Legendre degree");
    const std::size_t n = static_cast<std::size_t>((L + 1) * (L + 2) / 2);
    p_.assign(n, 0.0);
    dp_.assign(n, 0.0);
    mp_sin_.assign(n, 0.0);

    const double x = std::cos(theta);
    const double s = std::sin(theta);

    // Sectoral seeds, then the three-term recurrence in l for fixed m.
    p_[idx(0, 0)] = 0.5 / std::sqrt(std::numbers::pi);
    for (int m = 1; m <= L; ++m)
      p_[idx(m, m)] = -std::sqrt((2.0 * m + 1.0) / (2.0 * m)) * s * p_[idx(m - 1, m - 1)];
    for (int m = 0; m < L; ++m) {
      p_[idx(m + 1, m)] = std::sqrt(2.0 * m + 3.0) * x * p_[idx(m, m)];
      for (int l = m + 2; l <= L; ++l) {
        const double l2 = static_cast<double>(l) * l;
        const double m2 = static_cast<double>(m) * m;
        const double a = std::sqrt((4.0 * l2 - 1.0) / (l2 - m2));
        const double b = std::sqrt(((l - 1.0) * (l - 1.0) - m2) / (4.0 * (l - 1.0) * (l - 1.0) - 1.0));
        p_[idx(l, m)] = a * (x * p_[idx(l - 1, m)] - b * p_[idx(l - 2, m)]);
      }
    }

    for (int l = 0; l <= L; ++l) {
      for (int m = 0; m <= l; ++m) {
        const double up = m < l ? std::sqrt((l - m) * (l + m + 1.0)) * p_[idx(l, m + 1)] : 0.0;
        double down = 0.0;
        if (m > 0)
          down = std::sqrt((l + m) * (l - m + 1.0)) * p_[idx(l, m - 1)];
        else if (l > 0)
          down = -std::sqrt(l * (l + 1.0)) * p_[idx(l, 1)];  // P_{l,-1} = -P_{l,1}
        dp_[idx(l, m)] = 0.5 * (up - down);
      }
    }

    constexpr double pole_eps = 1e-12;
    for (int l = 0; l <= L; ++l) {
      for (int m = 1; m <= l; ++m) {
        if (std::abs(s) > pole_eps)
          mp_sin_[idx(l, m)] = m * p_[idx(l, m)] / s;
        else if (m == 1)
          mp_sin_[idx(l, m)] = dp_[idx(l, m)] / x;  // l'Hopital; x = +-1 here
      }
    }
  }

  int degree() const noexcept { return L_; }
  double p(int l, int m) const { return p_[idx(l, m)]; }
  double dp_dtheta(int l, int m) const { return dp_[idx(l, m)]; }
  double m_p_over_sin(int l, int m) const { return mp_sin_[idx(l, m)]; }

 private:
  static std::size_t idx(int l, int m) noexcept { return static_cast<std::size_t>(l * (l + 1) / 2 + m); }

  int L_;
  std::vector<double> p_;
  std::vector<double> dp_;
  std::vector<double> mp_sin_;
};

/// Orthonormal spherical harmonic Y_lm (Condon-Shortley phase).
inline cplx sph_harm(ModeIndex mode, const Direction& dir) {
  if (!mode.valid())
    throw std::domain_error("mrc: invalid spherical harmonic mode (" + std::to_string(mode.ell) + ", " +
                            std::to_string(mode.m) + ")");
  const LegendreTable leg(mode.ell, dir.theta());
  const int am = std::abs(mode.m);
  const cplx y = leg.p(mode.ell, am) * std::polar(1.0, am * dir.phi());
  if (mode.m >= 0) return y;
  return (am % 2 == 0 ? 1.0 : -1.0) * std::conj(y);
}

/// Y_lm together with its tangential derivatives at one direction.
struct HarmonicSample {
  std::vector<cplx> value;      ///< Y_lm, flat index
  std::vector<cplx> d_theta;    ///< dY_lm/dtheta
  std::vector<cplx> d_phi_sin;  ///< (1/sin theta) dY_lm/dphi, finite at the poles
};

/// All Y_lm, l <= L, in flat order.
inline std::vector<cplx> sph_harm_all(int L, const Direction& dir) {
  const LegendreTable leg(L, dir.theta());
  std::vector<cplx> out(static_cast<std::size_t>(mode_count(L)));
  for (int l = 0; l <= L; ++l) {
    for (int m = 0; m <= l; ++m) {
      const cplx y = leg.p(l, m) * std::polar(1.0, m * dir.phi());
      out[ModeIndex{l, m}.flat()] = y;
      if (m > 0) out[ModeIndex{l, -m}.flat()] = (m % 2 == 0 ? 1.0 : -1.0) * std::conj(y);
    }
  }
  return out;
}

inline HarmonicSample sph_harm_with_gradient(int L, const Direction& dir) {
  const LegendreTable leg(L, dir.theta());
  const auto n = static_cast<std::size_t>(mode_count(L));
  HarmonicSample out{std::vector<cplx>(n), std::vector<cplx>(n), std::vector<cplx>(n)};
  const cplx i{0.0, 1.0};
  for (int l = 0; l <= L; ++l) {
    for (int m = -l; m <= l; ++m) {
      const int am = std::abs(m);
      // Y_{l,-|m|} = (-1)^m conj(Y_{l,|m|}) = (-1)^m P_{l|m|} e^{-i|m|phi}
      const double sign = (m < 0 && am % 2 == 1) ? -1.0 : 1.0;
      const cplx e = std::polar(1.0, m * dir.phi());
      const auto f = static_cast<std::size_t>(ModeIndex{l, m}.flat());
      out.value[f] = sign * leg.p(l, am) * e;
      out.d_theta[f] = sign * leg.dp_dtheta(l, am) * e;
      // i m P e^{i m phi} / sin, with sign(m) carried by m
      out.d_phi_sin[f] = (m < 0 ? -1.0 : 1.0) * sign * i * leg.m_p_over_sin(l, am) * e;
    }
  }
  return out;
}

}  // namespace mrc
