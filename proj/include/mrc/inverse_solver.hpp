#pragma once

/// \file inverse_solver.hpp
/// Shape reconstruction of a soft star-shaped obstacle from scattered-field
/// samples on a measurement sphere S_R.
///
/// 1. c_lm = (v, Y_lm)_{L2(S^2)} / h_l(kR) for every (k, alpha) entry.
/// 2. Along each observation ray alpha', p(r) = exp(i k alpha.alpha' r)
///    + sum c_lm Y_lm(alpha') h_l(kr) is searched for deep minima of |p|.
/// 3. A radius is accepted when every entry produces a minimum there and the
///    minima agree across entries; the smallest L in the schedule that
///    resolves a quorum of directions is kept.

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "mrc/coefficients.hpp"
#include "mrc/direct_solver.hpp"
#include "mrc/fields.hpp"
#include "mrc/geometry.hpp"
#include "mrc/optimize.hpp"
#include "mrc/parallel.hpp"
#include "mrc/specfun.hpp"

namespace mrc {

struct NearFieldEntry {
  WaveContext ctx;
  std::vector<cplx> samples;  ///< scattered field at R * (quadrature nodes)
  double noise_level = 0.0;
};

/// Scattered-field samples on S_R for one or more (k, alpha) pairs, all on
/// the same tensor quadrature.
struct NearFieldData {
  double R = 1.0;
  int n_theta = 2;
  int n_phi = 4;
  std::vector<NearFieldEntry> entries;

  SphereQuadrature quadrature() const { return {n_theta, n_phi}; }

  void validate() const {
    if (!(R > 0.0)) throw std::invalid_argument("mrc: measurement radius must be positive");
    const auto n = static_cast<std::size_t>(n_theta) * static_cast<std::size_t>(n_phi);
    if (n_theta < 2 || n_phi < 4) throw std::invalid_argument("mrc: invalid measurement quadrature");
    for (const auto& e : entries) {
      if (e.samples.size() != n) throw std::invalid_argument("mrc: entry sample count does not match quadrature");
      if (!(e.noise_level >= 0.0)) throw std::invalid_argument("mrc: noise level must be non-negative");
    }
  }
};

/// Samples the scattered field of `coeffs` on S_R.
inline NearFieldEntry synthesize_entry(const CoefficientSet& coeffs, const WaveContext& ctx, double R,
                                       const SphereQuadrature& quad) {
  return {ctx, field_on_sphere(coeffs, ctx, R, quad), 0.0};
}

/// Adds complex Gaussian noise whose discrete L2(S_R) norm is exactly
/// delta * ||v||_{L2(S_R)} for every entry (relative convention).
inline NearFieldData add_noise(const NearFieldData& data, double delta, std::uint64_t seed) {
  if (!(delta >= 0.0)) throw std::invalid_argument("mrc: noise level must be non-negative");
  NearFieldData out = data;
  if (delta == 0.0) return out;
  const auto quad = data.quadrature();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (auto& e : out.entries) {
    std::vector<cplx> z(e.samples.size());
    for (auto& v : z) {
      const double re = gauss(rng);
      const double im = gauss(rng);
      v = {re, im};
    }
    const double vn = l2_norm_on_sphere(e.samples, quad, data.R);
    const double zn = l2_norm_on_sphere(z, quad, data.R);
    const double scale = zn > 0.0 ? delta * vn / zn : 0.0;
    for (std::size_t p = 0; p < z.size(); ++p) e.samples[p] += scale * z[p];
    e.noise_level = delta;
  }
  return out;
}

struct ExtractedCoefficients {
  CoefficientSet coefficients;
  std::vector<int> dropped_degrees;  ///< degrees whose |h_l(kR)| fell below the floor
};

/// c_lm = (v, Y_lm)_{L2(S^2)} / h_l(kR). Degrees with |h_l(kR)| below
/// floor_rel * |h_0(kR)| are zeroed and reported rather than amplified.
inline ExtractedCoefficients extract_coeffs(const NearFieldEntry& entry, const SphereQuadrature& quad, double R, int L,
                                            double floor_rel = 1e-13) {
  if (quad.degree() < 2 * L)
    throw std::invalid_argument("mrc: measurement quadrature degree " + std::to_string(quad.degree()) +
                                " below 2L = " + std::to_string(2 * L));
  ExtractedCoefficients out{project_onto_harmonics(entry.samples, quad, L), {}};
  const auto h = hankel_out_table(L, entry.ctx.k, R);
  const double floor_abs = floor_rel * std::abs(h.value[0]);
  for (int l = 0; l <= L; ++l) {
    const bool drop = !(std::abs(h.value[static_cast<std::size_t>(l)]) >= floor_abs);
    if (drop) out.dropped_degrees.push_back(l);
    for (int m = -l; m <= l; ++m) {
      auto& c = out.coefficients.at({l, m});
      c = drop ? cplx{} : c / h.value[static_cast<std::size_t>(l)];
    }
  }
  return out;
}

/// p(r) restricted to one observation ray. The angular sums are collapsed
/// to one coefficient per degree so that each evaluation costs a single
/// radial table.
class RayFunction {
 public:
  RayFunction(const CoefficientSet& coeffs, const WaveContext& ctx, const Direction& dir_out)
      : k_(ctx.k), cos_angle_(dot(ctx.alpha.unit(), dir_out.unit())), radial_(static_cast<std::size_t>(coeffs.L) + 1) {
    const auto Y = sph_harm_all(coeffs.L, dir_out);
    for (std::size_t i = 0; i < coeffs.values.size(); ++i)
      radial_[static_cast<std::size_t>(ModeIndex::from_flat(static_cast<int>(i)).ell)] += coeffs.values[i] * Y[i];
  }

  cplx operator()(double r) const {
    if (!(r > 0.0)) throw std::domain_error("mrc: ray function needs r > 0");
    const auto h = hankel_out_table(static_cast<int>(radial_.size()) - 1, k_, r);
    cplx p = std::polar(1.0, k_ * cos_angle_ * r);
    for (std::size_t l = 0; l < radial_.size(); ++l) p += radial_[l] * h.value[l];
    return p;
  }

 private:
  double k_;
  double cos_angle_;
  std::vector<cplx> radial_;
};

/// u0(r alpha') + sum c_lm Y_lm(alpha') h_l(kr).
inline cplx ray_function(const CoefficientSet& coeffs, const WaveContext& ctx, const Direction& dir_out, double r) {
  return RayFunction(coeffs, ctx, dir_out)(r);
}

struct RayRoot {
  Direction dir_out;
  double r = 0.0;
  double residual = 0.0;    ///< |p(r)|
  double imag_score = 0.0;  ///< residual / max |p| over the search grid
  double spread = 0.0;      ///< relative dispersion of r across (k, alpha) entries
};

struct RootSearchOptions {
  double r_lo = 0.0;
  double r_hi = 0.0;
  int grid_n = 256;
  double residual_threshold = 0.25;
  double rel_tol = 1e-10;
};

/// Local minima of |p| on a uniform grid over [r_lo, r_hi], each refined by
/// golden-section search; minima deeper than residual_threshold are kept,
/// sorted by residual. An empty result means no acceptable root.
inline std::vector<RayRoot> find_ray_root(const CoefficientSet& coeffs, const WaveContext& ctx,
                                          const Direction& dir_out, const RootSearchOptions& opt) {
  if (!(opt.r_lo > 0.0 && opt.r_lo < opt.r_hi)) throw std::invalid_argument("mrc: need 0 < r_lo < r_hi");
  if (opt.grid_n < 16) throw std::invalid_argument("mrc: root search grid needs at least 16 points");

  const RayFunction p(coeffs, ctx, dir_out);
  const auto n = static_cast<std::size_t>(opt.grid_n);
  const double step = (opt.r_hi - opt.r_lo) / static_cast<double>(n - 1);
  std::vector<double> r(n), mag(n);
  for (std::size_t i = 0; i < n; ++i) {
    r[i] = i + 1 == n ? opt.r_hi : opt.r_lo + static_cast<double>(i) * step;
    mag[i] = std::abs(p(r[i]));
  }
  const double peak = *std::max_element(mag.begin(), mag.end());

  std::vector<RayRoot> out;
  for (std::size_t i = 1; i + 1 < n; ++i) {
    if (!(mag[i] <= mag[i - 1] && mag[i] < mag[i + 1])) continue;
    const auto best = golden_section_minimize([&](double x) { return std::abs(p(x)); }, r[i - 1], r[i + 1],
                                              opt.rel_tol);
    if (best.value > opt.residual_threshold) continue;
    out.push_back({dir_out, best.x, best.value, peak > 0.0 ? best.value / peak : 0.0, 0.0});
  }
  std::sort(out.begin(), out.end(), [](const RayRoot& a, const RayRoot& b) { return a.residual < b.residual; });
  return out;
}

struct ReconstructionOptions {
  std::vector<int> L_schedule{3, 4, 5, 6, 8, 10};
  std::vector<Direction> directions;
  double r_lo = 0.0;  ///< 0 selects 0.2 R
  double r_hi = 0.0;  ///< 0 selects 0.9 R
  int grid_n = 256;
  double residual_threshold = 0.25;
  double stability_tol = 0.05;
  double quorum = 0.95;
  int harmonic_degree = 4;
  double mode_floor = 1e-13;
  int threads = 1;
};

struct ScheduleStep {
  int L = 0;
  double resolved_fraction = 0.0;
};

struct ReconstructedSurface {
  std::vector<RayRoot> roots;  ///< one per requested direction, input order
  std::vector<bool> resolved;
  int L = 0;
  bool converged = false;
  double resolved_fraction = 0.0;
  double r_lo = 0.0;
  double r_hi = 0.0;
  /// Least-squares fit r(alpha') ~ Re sum d_lm Y_lm(alpha') over resolved
  /// directions; fills the unresolved ones.
  CoefficientSet harmonic_model = CoefficientSet::zeros(0);
  int harmonic_degree = -1;
  std::vector<ScheduleStep> schedule;
  std::vector<int> dropped_degrees;

  double model_radius(const Direction& d) const {
    if (harmonic_degree < 0) return std::numeric_limits<double>::quiet_NaN();
    return far_field_amplitude(harmonic_model, d).real();
  }
};

namespace detail {

struct DirectionOutcome {
  RayRoot root;
  bool resolved = false;
};

inline double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

/// Picks one candidate per entry so that the radii agree best. Anchors are
/// taken from every entry in turn; for each anchor the closest candidate of
/// each other entry is chosen.
inline DirectionOutcome combine_candidates(const Direction& dir, const std::vector<std::vector<RayRoot>>& per_entry,
                                           double stability_tol) {
  DirectionOutcome out;
  out.root.dir_out = dir;
  for (const auto& c : per_entry)
    if (c.empty()) {
      out.root.residual = std::numeric_limits<double>::infinity();
      return out;
    }

  if (per_entry.size() == 1) {
    out.root = per_entry[0].front();
    out.root.spread = 0.0;
    out.resolved = true;
    return out;
  }

  double best_spread = std::numeric_limits<double>::infinity();
  double best_res = std::numeric_limits<double>::infinity();
  for (std::size_t anchor_entry = 0; anchor_entry < per_entry.size(); ++anchor_entry) {
    for (const auto& anchor : per_entry[anchor_entry]) {
      std::vector<double> radii;
      double worst_res = 0.0, worst_score = 0.0;
      for (const auto& cands : per_entry) {
        const auto it = std::min_element(cands.begin(), cands.end(), [&](const RayRoot& a, const RayRoot& b) {
          return std::abs(a.r - anchor.r) < std::abs(b.r - anchor.r);
        });
        radii.push_back(it->r);
        worst_res = std::max(worst_res, it->residual);
        worst_score = std::max(worst_score, it->imag_score);
      }
      const double med = median(radii);
      const auto [mn, mx] = std::minmax_element(radii.begin(), radii.end());
      const double spread = (*mx - *mn) / med;
      if (spread < best_spread || (spread == best_spread && worst_res < best_res)) {
        best_spread = spread;
        best_res = worst_res;
        out.root = {dir, med, worst_res, worst_score, spread};
      }
    }
  }
  out.resolved = best_spread <= stability_tol;
  return out;
}

}  // namespace detail

/// Reconstructs r = f(alpha') on the requested directions.
inline ReconstructedSurface stable_reconstruct(const NearFieldData& data, const ReconstructionOptions& opt) {
  data.validate();
  if (data.entries.empty()) throw std::invalid_argument("mrc: reconstruction needs at least one data entry");
  if (opt.directions.empty()) throw std::invalid_argument("mrc: reconstruction needs directions");
  if (opt.L_schedule.empty()) throw std::invalid_argument("mrc: empty L schedule");
  if (!(opt.stability_tol > 0.0)) throw std::invalid_argument("mrc: stability_tol must be positive");

  std::vector<int> schedule = opt.L_schedule;
  std::sort(schedule.begin(), schedule.end());
  schedule.erase(std::unique(schedule.begin(), schedule.end()), schedule.end());
  if (schedule.front() < 0) throw std::invalid_argument("mrc: negative L in schedule");

  RootSearchOptions search;
  search.r_lo = opt.r_lo > 0.0 ? opt.r_lo : 0.2 * data.R;
  search.r_hi = opt.r_hi > 0.0 ? opt.r_hi : 0.9 * data.R;
  search.grid_n = opt.grid_n;
  search.residual_threshold = opt.residual_threshold;

  ReconstructedSurface result;
  result.r_lo = search.r_lo;
  result.r_hi = search.r_hi;

  // One extraction at the largest degree; lower L truncate it.
  const auto quad = data.quadrature();
  const int L_top = schedule.back();
  std::vector<CoefficientSet> full;
  for (const auto& e : data.entries) {
    auto ex = extract_coeffs(e, quad, data.R, L_top, opt.mode_floor);
    for (int l : ex.dropped_degrees)
      if (std::find(result.dropped_degrees.begin(), result.dropped_degrees.end(), l) == result.dropped_degrees.end())
        result.dropped_degrees.push_back(l);
    full.push_back(std::move(ex.coefficients));
  }

  const std::size_t n_dirs = opt.directions.size();
  std::vector<detail::DirectionOutcome> best_outcomes;
  double best_fraction = -1.0;

  for (int L : schedule) {
    std::vector<CoefficientSet> coeffs;
    for (const auto& c : full) coeffs.push_back(c.truncated(L));

    std::vector<detail::DirectionOutcome> outcomes(n_dirs);
    parallel_for(n_dirs, opt.threads, [&](std::size_t i) {
      std::vector<std::vector<RayRoot>> per_entry;
      for (std::size_t e = 0; e < data.entries.size(); ++e)
        per_entry.push_back(find_ray_root(coeffs[e], data.entries[e].ctx, opt.directions[i], search));
      outcomes[i] = detail::combine_candidates(opt.directions[i], per_entry, opt.stability_tol);
    });

    const auto n_res = std::count_if(outcomes.begin(), outcomes.end(), [](const auto& o) { return o.resolved; });
    const double fraction = static_cast<double>(n_res) / static_cast<double>(n_dirs);
    result.schedule.push_back({L, fraction});
    if (fraction > best_fraction) {
      best_fraction = fraction;
      best_outcomes = std::move(outcomes);
      result.L = L;
    }
    if (fraction >= opt.quorum) {
      result.converged = true;
      break;
    }
  }
  result.resolved_fraction = best_fraction;

  // Harmonic model over the resolved directions.
  std::vector<std::size_t> good;
  for (std::size_t i = 0; i < n_dirs; ++i)
    if (best_outcomes[i].resolved) good.push_back(i);
  int Lf = std::min(opt.harmonic_degree, static_cast<int>(std::sqrt(static_cast<double>(good.size()))) - 1);
  if (!good.empty() && Lf >= 0) {
    ComplexMatrix A(static_cast<Eigen::Index>(good.size()), mode_count(Lf));
    ComplexVector b(static_cast<Eigen::Index>(good.size()));
    for (std::size_t g = 0; g < good.size(); ++g) {
      const auto Y = sph_harm_all(Lf, opt.directions[good[g]]);
      for (std::size_t c = 0; c < Y.size(); ++c) A(static_cast<Eigen::Index>(g), static_cast<Eigen::Index>(c)) = Y[c];
      b[static_cast<Eigen::Index>(g)] = -best_outcomes[good[g]].root.r;
    }
    const auto fit = solve_least_squares(A, b, 1e-10);
    result.harmonic_model = CoefficientSet{Lf, std::vector<cplx>(fit.coefficients.begin(), fit.coefficients.end())};
    result.harmonic_degree = Lf;
  }

  result.roots.reserve(n_dirs);
  result.resolved.reserve(n_dirs);
  for (std::size_t i = 0; i < n_dirs; ++i) {
    RayRoot root = best_outcomes[i].root;
    if (!best_outcomes[i].resolved) {
      if (result.harmonic_degree >= 0)
        root.r = result.model_radius(opt.directions[i]);
      else if (!(root.r > 0.0))
        root.r = 0.5 * (search.r_lo + search.r_hi);
    }
    root.r = std::clamp(root.r, search.r_lo, search.r_hi);
    result.roots.push_back(root);
    result.resolved.push_back(best_outcomes[i].resolved);
  }
  return result;
}

}  // namespace mrc
