#pragma once

/// \file sphere_oracle.hpp
/// Separated-variables solution for plane-wave scattering by a sphere.
///
/// With e^{ik alpha.x} = sum_lm b_lm j_l(kr) Y_lm(x^), b_lm = 4 pi i^l conj(Y_lm(alpha)),
/// the outgoing coefficients are
///   soft: A_lm = -b_lm j_l(ka)    / h_l(a)
///   hard: A_lm = -b_lm k j_l'(ka) / h_l'(a)
/// where h_l is the far-field normalized radial function of specfun.hpp.

#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>

#include "mrc/coefficients.hpp"
#include "mrc/direct_solver.hpp"
#include "mrc/specfun.hpp"

namespace mrc {

/// b_lm of the regular-wave expansion of the incident plane wave.
inline CoefficientSet plane_wave_coeffs(const WaveContext& ctx, int L) {
  auto out = CoefficientSet::zeros(L);
  const auto Y = sph_harm_all(L, ctx.alpha);
  for (std::size_t i = 0; i < out.values.size(); ++i) {
    const int l = ModeIndex::from_flat(static_cast<int>(i)).ell;
    out.values[i] = 4.0 * std::numbers::pi * detail::ipow(l) * std::conj(Y[i]);
  }
  return out;
}

/// sum b_lm j_l(k|x|) Y_lm(x^), the truncated regular-wave series of u0.
inline cplx regular_wave_sum(const CoefficientSet& b, double k, const Vec3& x) {
  const double r = norm(x);
  if (!(r > 0.0)) return b.values.empty() ? 0.0 : b.values[0] * (0.5 / std::sqrt(std::numbers::pi));
  const auto j = spherical_bessel_j_array(b.L, k * r);
  const auto Y = sph_harm_all(b.L, Direction::from_vector(x));
  cplx acc = 0.0;
  for (std::size_t i = 0; i < b.values.size(); ++i)
    acc += b.values[i] * j[static_cast<std::size_t>(ModeIndex::from_flat(static_cast<int>(i)).ell)] * Y[i];
  return acc;
}

/// Exact outgoing coefficients for a sphere of radius a centered at the origin.
inline CoefficientSet sphere_scattering_coeffs(double a, const WaveContext& ctx, int L, BoundaryCondition bc) {
  if (!(a > 0.0)) throw std::invalid_argument("mrc: sphere radius must be positive");
  const auto b = plane_wave_coeffs(ctx, L);
  const auto j = spherical_bessel_j_array(L + 1, ctx.k * a);
  const auto dj = spherical_derivatives(j, ctx.k * a);
  const auto h = hankel_out_table(L, ctx.k, a);

  auto out = CoefficientSet::zeros(L);
  for (std::size_t i = 0; i < out.values.size(); ++i) {
    const auto l = static_cast<std::size_t>(ModeIndex::from_flat(static_cast<int>(i)).ell);
    const cplx num = bc == BoundaryCondition::Dirichlet ? cplx(j[l]) : cplx(ctx.k * dj[l]);
    const cplx den = bc == BoundaryCondition::Dirichlet ? h.value[l] : h.dr[l];
    if (std::abs(den) < 1e-300) throw std::runtime_error("mrc: vanishing radial denominator in sphere oracle");
    out.values[i] = -b.values[i] * num / den;
  }
  return out;
}

}  // namespace mrc
