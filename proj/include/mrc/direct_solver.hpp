#pragma once

/// \file direct_solver.hpp
/// Direct scattering by boundary-residual minimization over outgoing
/// spherical waves psi_lm = Y_lm(alpha') h_l(kr).
///
/// For a trial degree L the coefficients minimize the discretized
/// L2(S) norm of u0 + sum c_lm psi_lm (soft obstacle) or of its normal
/// derivative (hard obstacle). L is raised one step at a time and the
/// first L whose relative residual meets the target is kept.

#include <Eigen/Dense>
#include <Eigen/SVD>

#include <cmath>
#include <complex>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "mrc/coefficients.hpp"
#include "mrc/geometry.hpp"
#include "mrc/parallel.hpp"
#include "mrc/specfun.hpp"

namespace mrc {

using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;

enum class BoundaryCondition { Dirichlet, Neumann };

inline const char* to_string(BoundaryCondition bc) noexcept {
  return bc == BoundaryCondition::Dirichlet ? "dirichlet" : "neumann";
}

inline BoundaryCondition boundary_condition_from_string(const std::string& s) {
  if (s == "dirichlet" || s == "soft") return BoundaryCondition::Dirichlet;
  if (s == "neumann" || s == "hard") return BoundaryCondition::Neumann;
  throw std::invalid_argument("mrc: unknown boundary condition '" + s + "'");
}

/// Wavenumber and incidence direction of the plane wave u0 = exp(i k alpha.x).
struct WaveContext {
  double k = 1.0;
  Direction alpha = Direction::z_axis();

  WaveContext() = default;
  WaveContext(double k_, Direction alpha_) : k(k_), alpha(alpha_) {
    if (!(k > 0.0) || !std::isfinite(k)) throw std::invalid_argument("mrc: wavenumber must be positive");
  }

  cplx incident(const Vec3& x) const { return std::polar(1.0, k * dot(alpha.unit(), x)); }
};

/// sqrt(omega_p * w_p): turns Euclidean norms over nodes into L2(S) norms.
inline std::vector<double> boundary_weights(const StarSurface& surface, const SphereQuadrature& quad) {
  std::vector<double> out(quad.size());
  for (std::size_t p = 0; p < quad.size(); ++p)
    out[p] = std::sqrt(quad.weights()[p] * surface_element(surface, quad.nodes()[p]));
  return out;
}

/// Unweighted boundary data of the incident wave at x_p = f(alpha_p) alpha_p:
/// u0 for Dirichlet, N.grad(u0) = i k (alpha.N) u0 for Neumann.
inline ComplexVector incident_trace(const StarSurface& surface, const SphereQuadrature& quad, const WaveContext& ctx,
                                    BoundaryCondition bc) {
  ComplexVector out(static_cast<Eigen::Index>(quad.size()));
  for (std::size_t p = 0; p < quad.size(); ++p) {
    const Direction& d = quad.nodes()[p];
    const cplx u0 = ctx.incident(surface.point(d));
    if (bc == BoundaryCondition::Dirichlet) {
      out[static_cast<Eigen::Index>(p)] = u0;
    } else {
      const Vec3 n = outward_normal(surface, d);
      out[static_cast<Eigen::Index>(p)] = cplx{0.0, ctx.k * dot(ctx.alpha.unit(), n)} * u0;
    }
  }
  return out;
}

/// Weighted collocation matrix, rows = quadrature nodes, columns = modes
/// l <= L in flat order. Neumann rows hold N.grad(psi_lm).
inline ComplexMatrix assemble_basis_matrix(const StarSurface& surface, const SphereQuadrature& quad,
                                           const WaveContext& ctx, int L, BoundaryCondition bc, int threads = 1) {
  if (L < 0) throw std::invalid_argument("mrc: truncation degree must be non-negative");
  if (quad.degree() < 2 * L)
    throw std::invalid_argument("mrc: quadrature degree " + std::to_string(quad.degree()) +
                                " below 2L = " + std::to_string(2 * L) + " (aliasing)");
  const auto rows = static_cast<Eigen::Index>(quad.size());
  const auto cols = static_cast<Eigen::Index>(mode_count(L));
  ComplexMatrix A(rows, cols);

  parallel_for(quad.size(), threads, [&](std::size_t p) {
    const Direction& d = quad.nodes()[p];
    const double f = surface.radius(d);
    const double weight = std::sqrt(quad.weights()[p] * surface_element(surface, d));
    const auto radial = hankel_out_table(L, ctx.k, f);
    const auto row = static_cast<Eigen::Index>(p);
    if (bc == BoundaryCondition::Dirichlet) {
      const auto Y = sph_harm_all(L, d);
      for (Eigen::Index c = 0; c < cols; ++c) {
        const int l = ModeIndex::from_flat(static_cast<int>(c)).ell;
        A(row, c) = weight * Y[static_cast<std::size_t>(c)] * radial.value[static_cast<std::size_t>(l)];
      }
    } else {
      const auto Y = sph_harm_with_gradient(L, d);
      const Vec3 n = outward_normal_local(surface, d);
      for (Eigen::Index c = 0; c < cols; ++c) {
        const auto ci = static_cast<std::size_t>(c);
        const auto l = static_cast<std::size_t>(ModeIndex::from_flat(static_cast<int>(c)).ell);
        const cplx grad_r = radial.dr[l] * Y.value[ci];
        const cplx tangential = radial.value[l] / f;
        const cplx grad_t = tangential * Y.d_theta[ci];
        const cplx grad_p = tangential * Y.d_phi_sin[ci];
        A(row, c) = weight * (n[0] * grad_r + n[1] * grad_t + n[2] * grad_p);
      }
    }
  });
  return A;
}

struct LeastSquaresResult {
  ComplexVector coefficients;
  double residual = 0.0;   ///< ||A c + b||
  int rank = 0;            ///< retained singular values
  double condition = 0.0;  ///< sigma_max / sigma_min of the column-scaled matrix
};

/// Minimizes ||A c + b|| by truncated SVD of the column-equilibrated matrix.
/// Singular values below cutoff * sigma_max are discarded, which selects
/// the minimum-norm solution in the scaled variables.
inline LeastSquaresResult solve_least_squares(const ComplexMatrix& A, const ComplexVector& b, double cutoff = 1e-12) {
  if (A.rows() == 0 || A.cols() == 0) throw std::invalid_argument("mrc: empty least-squares system");
  if (A.rows() != b.size()) throw std::invalid_argument("mrc: right-hand side length mismatch");
  if (!(cutoff > 0.0 && cutoff < 1.0)) throw std::invalid_argument("mrc: SVD cutoff must lie in (0, 1)");

  Eigen::VectorXd scale = A.colwise().norm().transpose();
  for (Eigen::Index c = 0; c < scale.size(); ++c)
    if (!(scale[c] > 0.0)) scale[c] = 1.0;
  const ComplexMatrix As = A * scale.cwiseInverse().asDiagonal();

  // Tall systems are reduced to their triangular factor first (A = Q R);
  // the SVD then runs on the square R.
  ComplexVector qb;
  ComplexMatrix core;
  if (As.rows() > As.cols()) {
    Eigen::HouseholderQR<ComplexMatrix> qr(As);
    core = qr.matrixQR().topRows(As.cols()).triangularView<Eigen::Upper>();
    qb = (qr.householderQ().adjoint() * b).head(As.cols());
  } else {
    core = As;
    qb = b;
  }

  Eigen::BDCSVD<ComplexMatrix> svd(core, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::VectorXd& sigma = svd.singularValues();
  const double smax = sigma.size() > 0 ? sigma[0] : 0.0;

  LeastSquaresResult out;
  ComplexVector proj = svd.matrixU().adjoint() * qb;
  for (Eigen::Index i = 0; i < sigma.size(); ++i) {
    if (smax > 0.0 && sigma[i] >= cutoff * smax) {
      proj[i] /= sigma[i];
      ++out.rank;
    } else {
      proj[i] = 0.0;
    }
  }
  const ComplexVector y = -(svd.matrixV() * proj);
  out.coefficients = y.cwiseQuotient(scale.cast<cplx>());
  out.residual = (A * out.coefficients + b).norm();
  const double smin = sigma.size() > 0 ? sigma[sigma.size() - 1] : 0.0;
  out.condition = smin > 0.0 ? smax / smin : std::numeric_limits<double>::infinity();
  return out;
}

struct MrcOptions {
  double eps_target = 1e-8;        ///< relative to ||u0||_{L2(S)} (or its normal derivative)
  int L_start = 0;
  int L_max = 30;
  double quad_degree_factor = 2.5;
  /// Floor on the quadrature degree; 0 picks 2 (ceil(k max f) + 10) so that
  /// the incident trace is resolved even at small L.
  int min_quad_degree = 0;
  double svd_cutoff = 1e-12;
  /// Fit every L on the quadrature of L_max instead of regenerating it.
  /// The escalation history is then monotone by construction.
  bool shared_quadrature = false;
  int threads = 1;
};

struct EscalationStep {
  int L = 0;
  double residual = 0.0;
  int quad_degree = 0;
  int rank = 0;
  double condition = 0.0;
};

struct DirectSolution {
  CoefficientSet coefficients;
  double residual = 0.0;  ///< relative boundary residual at the selected L
  BoundaryCondition boundary_condition = BoundaryCondition::Dirichlet;
  bool converged = false;
  double condition = 0.0;
  int rank = 0;
  int quad_degree = 0;
  std::vector<EscalationStep> history;
};

inline int default_min_quad_degree(const StarSurface& surface, double k) {
  return 2 * (static_cast<int>(std::ceil(k * surface.max_radius())) + 10);
}

/// Quadrature degree used for truncation degree L.
inline int quad_degree_for(const StarSurface& surface, const WaveContext& ctx, int L, const MrcOptions& opt) {
  const int floor_deg = opt.min_quad_degree > 0 ? opt.min_quad_degree : default_min_quad_degree(surface, ctx.k);
  return std::max({static_cast<int>(std::ceil(opt.quad_degree_factor * L)), 2 * L, floor_deg});
}

/// One least-squares fit at fixed L; the residual is relative.
inline std::pair<LeastSquaresResult, double> fit_at_degree(const StarSurface& surface, const SphereQuadrature& quad,
                                                           const WaveContext& ctx, BoundaryCondition bc, int L,
                                                           double svd_cutoff, int threads = 1) {
  const auto A = assemble_basis_matrix(surface, quad, ctx, L, bc, threads);
  const auto wts = boundary_weights(surface, quad);
  ComplexVector b = incident_trace(surface, quad, ctx, bc);
  for (Eigen::Index p = 0; p < b.size(); ++p) b[p] *= wts[static_cast<std::size_t>(p)];
  auto ls = solve_least_squares(A, b, svd_cutoff);
  const double bn = b.norm();
  const double rel = bn > 0.0 ? ls.residual / bn : ls.residual;
  return {std::move(ls), rel};
}

/// Adaptive solve: smallest L in [L_start, L_max] meeting eps_target.
/// When L_max is exhausted the best-residual iterate is returned with
/// converged = false.
inline DirectSolution mrc_solve(const StarSurface& surface, const WaveContext& ctx, BoundaryCondition bc,
                                const MrcOptions& opt = {}) {
  if (!(opt.eps_target > 0.0)) throw std::invalid_argument("mrc: eps_target must be positive");
  if (opt.L_start < 0 || opt.L_start > opt.L_max) throw std::invalid_argument("mrc: need 0 <= L_start <= L_max");
  if (!(opt.quad_degree_factor >= 2.0)) throw std::invalid_argument("mrc: quad_degree_factor must be >= 2");

  DirectSolution best;
  best.boundary_condition = bc;
  best.residual = std::numeric_limits<double>::infinity();

  std::optional<SphereQuadrature> shared;
  if (opt.shared_quadrature) shared = SphereQuadrature::for_degree(quad_degree_for(surface, ctx, opt.L_max, opt));

  for (int L = opt.L_start; L <= opt.L_max; ++L) {
    const auto quad = shared ? *shared : SphereQuadrature::for_degree(quad_degree_for(surface, ctx, L, opt));
    auto [ls, rel] = fit_at_degree(surface, quad, ctx, bc, L, opt.svd_cutoff, opt.threads);
    best.history.push_back({L, rel, quad.degree(), ls.rank, ls.condition});

    if (rel < best.residual) {
      best.coefficients = CoefficientSet{L, std::vector<cplx>(ls.coefficients.begin(), ls.coefficients.end())};
      best.residual = rel;
      best.condition = ls.condition;
      best.rank = ls.rank;
      best.quad_degree = quad.degree();
    }
    if (rel <= opt.eps_target) {
      best.converged = true;
      break;
    }
  }
  return best;
}

}  // namespace mrc
