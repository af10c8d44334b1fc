#pragma once

/// \file fields.hpp
/// Scattered, total and far fields of an outgoing expansion
/// v(x) = sum c_lm Y_lm(x/|x|) h_l(|x|).
///
/// The expansion is only guaranteed outside the smallest ball containing
/// the obstacle. Evaluating closer to the boundary is allowed (the ray
/// search of the inverse solver depends on it) but the result carries the
/// O(eps) error of the boundary fit, not pointwise convergence.

#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

#include "mrc/coefficients.hpp"
#include "mrc/direct_solver.hpp"
#include "mrc/geometry.hpp"
#include "mrc/specfun.hpp"

namespace mrc {

inline double require_nonzero_point(const Vec3& x) {
  const double r = norm(x);
  if (!(r > 0.0)) throw std::domain_error("mrc: field evaluation at the origin");
  return r;
}

inline cplx scattered_field(const CoefficientSet& coeffs, const WaveContext& ctx, const Vec3& x) {
  const double r = require_nonzero_point(x);
  const auto dir = Direction::from_vector(x);
  const auto Y = sph_harm_all(coeffs.L, dir);
  const auto h = hankel_out_table(coeffs.L, ctx.k, r);
  cplx v = 0.0;
  for (std::size_t i = 0; i < coeffs.values.size(); ++i)
    v += coeffs.values[i] * Y[i] * h.value[static_cast<std::size_t>(ModeIndex::from_flat(static_cast<int>(i)).ell)];
  return v;
}

inline cplx total_field(const CoefficientSet& coeffs, const WaveContext& ctx, const Vec3& x) {
  return ctx.incident(x) + scattered_field(coeffs, ctx, x);
}

/// Cartesian gradient of the scattered field.
inline std::array<cplx, 3> scattered_gradient(const CoefficientSet& coeffs, const WaveContext& ctx, const Vec3& x) {
  const double r = require_nonzero_point(x);
  const auto dir = Direction::from_vector(x);
  const auto Y = sph_harm_with_gradient(coeffs.L, dir);
  const auto h = hankel_out_table(coeffs.L, ctx.k, r);
  cplx gr = 0.0, gt = 0.0, gp = 0.0;
  for (std::size_t i = 0; i < coeffs.values.size(); ++i) {
    const auto l = static_cast<std::size_t>(ModeIndex::from_flat(static_cast<int>(i)).ell);
    gr += coeffs.values[i] * Y.value[i] * h.dr[l];
    gt += coeffs.values[i] * Y.d_theta[i] * h.value[l] / r;
    gp += coeffs.values[i] * Y.d_phi_sin[i] * h.value[l] / r;
  }
  const Vec3 er = dir.unit(), et = dir.e_theta(), ep = dir.e_phi();
  std::array<cplx, 3> g{};
  for (int c = 0; c < 3; ++c) g[c] = gr * er[c] + gt * et[c] + gp * ep[c];
  return g;
}

/// d/dr of the scattered field along the ray through x.
inline cplx scattered_field_dr(const CoefficientSet& coeffs, const WaveContext& ctx, const Vec3& x) {
  const double r = require_nonzero_point(x);
  const auto dir = Direction::from_vector(x);
  const auto Y = sph_harm_all(coeffs.L, dir);
  const auto h = hankel_out_table(coeffs.L, ctx.k, r);
  cplx v = 0.0;
  for (std::size_t i = 0; i < coeffs.values.size(); ++i)
    v += coeffs.values[i] * Y[i] * h.dr[static_cast<std::size_t>(ModeIndex::from_flat(static_cast<int>(i)).ell)];
  return v;
}

/// A(alpha') = sum c_lm Y_lm(alpha'), since h_l(r) ~ e^{ikr}/r.
inline cplx far_field_amplitude(const CoefficientSet& coeffs, const Direction& dir_out) {
  const auto Y = sph_harm_all(coeffs.L, dir_out);
  cplx a = 0.0;
  for (std::size_t i = 0; i < coeffs.values.size(); ++i) a += coeffs.values[i] * Y[i];
  return a;
}

/// Projects samples on the unit sphere onto Y_lm, l <= L.
inline CoefficientSet project_onto_harmonics(const std::vector<cplx>& samples, const SphereQuadrature& quad, int L) {
  if (samples.size() != quad.size()) throw std::invalid_argument("mrc: sample count does not match quadrature");
  auto out = CoefficientSet::zeros(L);
  for (std::size_t p = 0; p < quad.size(); ++p) {
    const auto Y = sph_harm_all(L, quad.nodes()[p]);
    const cplx wv = quad.weights()[p] * samples[p];
    for (std::size_t i = 0; i < out.values.size(); ++i) out.values[i] += wv * std::conj(Y[i]);
  }
  return out;
}

/// Scattered field at R * (quadrature nodes).
inline std::vector<cplx> field_on_sphere(const CoefficientSet& coeffs, const WaveContext& ctx, double R,
                                         const SphereQuadrature& quad) {
  if (!(R > 0.0)) throw std::invalid_argument("mrc: measurement radius must be positive");
  const auto h = hankel_out_table(coeffs.L, ctx.k, R);
  std::vector<cplx> out(quad.size());
  for (std::size_t p = 0; p < quad.size(); ++p) {
    const auto Y = sph_harm_all(coeffs.L, quad.nodes()[p]);
    cplx v = 0.0;
    for (std::size_t i = 0; i < coeffs.values.size(); ++i)
      v += coeffs.values[i] * Y[i] * h.value[static_cast<std::size_t>(ModeIndex::from_flat(static_cast<int>(i)).ell)];
    out[p] = v;
  }
  return out;
}

/// Discrete L2 norm over the sphere of radius R (surface measure R^2 dalpha).
inline double l2_norm_on_sphere(const std::vector<cplx>& values, const SphereQuadrature& quad, double R) {
  if (values.size() != quad.size()) throw std::invalid_argument("mrc: sample count does not match quadrature");
  double acc = 0.0;
  for (std::size_t p = 0; p < quad.size(); ++p) acc += quad.weights()[p] * std::norm(values[p]);
  return R * std::sqrt(acc);
}

/// Parseval form of the integral of |A|^2 over the unit sphere.
inline double far_field_energy(const CoefficientSet& coeffs) {
  double acc = 0.0;
  for (const auto& c : coeffs.values) acc += std::norm(c);
  return acc;
}

}  // namespace mrc
