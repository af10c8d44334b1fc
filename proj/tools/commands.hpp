#pragma once

// Subcommand implementations for the `mrc` command-line tool. Each command
// reads a JSON config, runs one pipeline and writes its result files into
// the output directory. Return values are process exit codes.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <spdlog/spdlog.h>

#include "mrc/direct_solver.hpp"
#include "mrc/fields.hpp"
#include "mrc/inverse_solver.hpp"
#include "mrc/io.hpp"
#include "mrc/sphere_oracle.hpp"

namespace mrc::cli {

using io::json;
using io::ValidationError;

inline constexpr int exit_ok = 0;
inline constexpr int exit_error = 1;
inline constexpr int exit_unconverged = 2;

struct CommonOptions {
  std::string config;
  std::string data;
  std::string out = ".";
  std::uint64_t seed = 0;
  int threads = 1;
};

inline std::string output_path(const CommonOptions& opt, const std::string& name) {
  std::filesystem::create_directories(opt.out);
  return (std::filesystem::path(opt.out) / name).string();
}

inline BoundaryCondition read_bc(const json& cfg) {
  const auto name = io::value_or<std::string>(cfg, "boundary_condition", "dirichlet");
  try {
    return boundary_condition_from_string(name);
  } catch (const std::invalid_argument& e) {
    throw ValidationError(e.what());
  }
}

inline WaveContext read_context(const json& cfg) {
  const double k = io::require_positive(cfg, "k");
  const Direction alpha = cfg.contains("alpha") ? io::direction_from_json(cfg.at("alpha")) : Direction::z_axis();
  return {k, alpha};
}

inline MrcOptions read_solver_options(const json& cfg, int threads) {
  MrcOptions o;
  const json solver = cfg.contains("solver") ? cfg.at("solver") : json::object();
  if (!solver.is_object()) throw ValidationError("'solver' must be an object");
  o.eps_target = io::value_or<double>(solver, "eps_target", o.eps_target);
  o.L_start = io::value_or<int>(solver, "L_start", o.L_start);
  o.L_max = io::value_or<int>(solver, "L_max", o.L_max);
  o.quad_degree_factor = io::value_or<double>(solver, "quad_degree_factor", o.quad_degree_factor);
  o.min_quad_degree = io::value_or<int>(solver, "min_quad_degree", o.min_quad_degree);
  o.svd_cutoff = io::value_or<double>(solver, "svd_cutoff", o.svd_cutoff);
  o.shared_quadrature = io::value_or<bool>(solver, "shared_quadrature", o.shared_quadrature);
  o.threads = threads;
  if (!(o.eps_target > 0.0)) throw ValidationError("solver.eps_target must be positive");
  if (o.L_start < 0 || o.L_max < o.L_start) throw ValidationError("solver needs 0 <= L_start <= L_max");
  if (!(o.quad_degree_factor >= 2.0)) throw ValidationError("solver.quad_degree_factor must be >= 2");
  if (!(o.svd_cutoff > 0.0 && o.svd_cutoff < 1.0)) throw ValidationError("solver.svd_cutoff must lie in (0, 1)");
  if (o.min_quad_degree < 0) throw ValidationError("solver.min_quad_degree must be non-negative");
  return o;
}

inline json solver_options_to_json(const MrcOptions& o) {
  return {{"eps_target", o.eps_target},         {"L_start", o.L_start},
          {"L_max", o.L_max},                   {"quad_degree_factor", o.quad_degree_factor},
          {"min_quad_degree", o.min_quad_degree}, {"svd_cutoff", o.svd_cutoff},
          {"shared_quadrature", o.shared_quadrature}};
}

/// `solve`: adaptive direct solve, writes solution.json.
inline int cmd_solve(const CommonOptions& opt) {
  const json cfg = io::read_json_file(opt.config);
  io::check_schema_version(cfg);
  const auto surface = io::surface_from_json(io::require(cfg, "surface"));
  const auto ctx = read_context(cfg);
  const auto bc = read_bc(cfg);
  const auto solver = read_solver_options(cfg, opt.threads);

  spdlog::info("solve: {} surface, k = {}, bc = {}, eps_target = {}", surface.type_name(), ctx.k, to_string(bc),
               solver.eps_target);
  const auto sol = mrc_solve(surface, ctx, bc, solver);
  for (const auto& h : sol.history) spdlog::debug("  L = {:3d}  residual = {:.3e}  cond = {:.3e}", h.L, h.residual, h.condition);

  json doc = io::solution_to_json(sol);
  doc["surface"] = io::surface_to_json(surface);
  doc["k"] = ctx.k;
  doc["alpha"] = io::direction_to_json(ctx.alpha);
  doc["solver"] = solver_options_to_json(solver);
  const auto path = output_path(opt, "solution.json");
  io::write_json_file(path, doc);
  spdlog::info("solve: L = {}, residual = {:.3e}, converged = {} -> {}", sol.coefficients.L, sol.residual,
               sol.converged, path);
  return sol.converged ? exit_ok : exit_unconverged;
}

/// `synthesize`: forward solves on each (k, alpha) entry, field on S_R,
/// optional noise; writes near_field.json.
inline int cmd_synthesize(const CommonOptions& opt) {
  const json cfg = io::read_json_file(opt.config);
  io::check_schema_version(cfg);
  const auto surface = io::surface_from_json(io::require(cfg, "surface"));
  const auto bc = read_bc(cfg);
  const auto solver = read_solver_options(cfg, opt.threads);
  const auto model = io::value_or<std::string>(cfg, "forward_model", "mrc");
  if (model != "mrc" && model != "oracle") throw ValidationError("forward_model must be 'mrc' or 'oracle'");
  if (model == "oracle" && !std::holds_alternative<SphereShape>(surface.descriptor()))
    throw ValidationError("forward_model 'oracle' requires a sphere surface");

  const auto& meas = io::require(cfg, "measurement");
  NearFieldData data;
  data.R = io::require_positive(meas, "R");
  data.n_theta = io::require_int(meas, "n_theta");
  data.n_phi = io::require_int(meas, "n_phi");
  if (data.n_theta < 2 || data.n_phi < 4) throw ValidationError("measurement needs n_theta >= 2 and n_phi >= 4");
  if (!(data.R > surface.max_radius())) throw ValidationError("measurement radius must enclose the obstacle");
  const double delta = io::value_or<double>(cfg, "delta", 0.0);
  if (!(delta >= 0.0)) throw ValidationError("delta must be non-negative");
  const int oracle_L = io::value_or<int>(cfg, "oracle_L", 30);

  const auto& entries = io::require(cfg, "entries");
  if (!entries.is_array() || entries.empty()) throw ValidationError("entries must be a non-empty array");

  const auto quad = data.quadrature();
  json forward = json::array();
  bool all_converged = true;
  for (const auto& e : entries) {
    const auto ctx = read_context(e);
    CoefficientSet coeffs;
    if (model == "oracle") {
      coeffs = sphere_scattering_coeffs(std::get<SphereShape>(surface.descriptor()).a, ctx, oracle_L, bc);
      forward.push_back({{"k", ctx.k}, {"alpha", io::direction_to_json(ctx.alpha)}, {"L", oracle_L}});
    } else {
      const auto sol = mrc_solve(surface, ctx, bc, solver);
      all_converged = all_converged && sol.converged;
      coeffs = sol.coefficients;
      forward.push_back({{"k", ctx.k},
                         {"alpha", io::direction_to_json(ctx.alpha)},
                         {"L", sol.coefficients.L},
                         {"residual", sol.residual},
                         {"converged", sol.converged}});
      spdlog::info("synthesize: k = {}, L = {}, residual = {:.3e}", ctx.k, sol.coefficients.L, sol.residual);
    }
    data.entries.push_back(synthesize_entry(coeffs, ctx, data.R, quad));
  }
  data = add_noise(data, delta, opt.seed);

  const json provenance = {{"surface", io::surface_to_json(surface)},
                           {"boundary_condition", to_string(bc)},
                           {"forward_model", model},
                           {"forward_eps", solver.eps_target},
                           {"forward", forward},
                           {"delta", delta},
                           {"noise_convention", "relative_l2"},
                           {"seed", opt.seed}};
  const auto path = output_path(opt, "near_field.json");
  io::write_json_file(path, io::near_field_to_json(data, provenance));
  spdlog::info("synthesize: {} entries, delta = {} -> {}", data.entries.size(), delta, path);
  return all_converged ? exit_ok : exit_unconverged;
}

inline ReconstructionOptions read_reconstruction_options(const json& cfg, int threads) {
  ReconstructionOptions o;
  o.threads = threads;
  if (cfg.contains("L_schedule")) {
    o.L_schedule = io::value_or<std::vector<int>>(cfg, "L_schedule", {});
    if (o.L_schedule.empty()) throw ValidationError("L_schedule must not be empty");
    for (int L : o.L_schedule)
      if (L < 0) throw ValidationError("L_schedule entries must be non-negative");
  }
  const json dirs = cfg.contains("directions") ? cfg.at("directions") : json{{"fibonacci", 50}};
  if (dirs.is_object() && dirs.contains("fibonacci")) {
    const int n = io::require_int(dirs, "fibonacci");
    if (n < 1) throw ValidationError("directions.fibonacci must be positive");
    o.directions = fibonacci_directions(n);
  } else if (dirs.is_object() && dirs.contains("list")) {
    for (const auto& d : dirs.at("list")) o.directions.push_back(io::direction_from_json(d));
    if (o.directions.empty()) throw ValidationError("directions.list must not be empty");
  } else {
    throw ValidationError("directions must be {\"fibonacci\": n} or {\"list\": [[theta, phi], ...]}");
  }
  if (cfg.contains("bracket")) {
    const auto br = io::value_or<std::vector<double>>(cfg, "bracket", {});
    if (br.size() != 2 || !(br[0] > 0.0 && br[0] < br[1])) throw ValidationError("bracket must be [r_lo, r_hi]");
    o.r_lo = br[0];
    o.r_hi = br[1];
  }
  o.grid_n = io::value_or<int>(cfg, "grid_n", o.grid_n);
  o.residual_threshold = io::value_or<double>(cfg, "residual_threshold", o.residual_threshold);
  o.stability_tol = io::value_or<double>(cfg, "stability_tol", o.stability_tol);
  o.quorum = io::value_or<double>(cfg, "quorum", o.quorum);
  o.harmonic_degree = io::value_or<int>(cfg, "harmonic_degree", o.harmonic_degree);
  o.mode_floor = io::value_or<double>(cfg, "mode_floor", o.mode_floor);
  if (o.grid_n < 16) throw ValidationError("grid_n must be >= 16");
  if (!(o.stability_tol > 0.0)) throw ValidationError("stability_tol must be positive");
  if (!(o.residual_threshold > 0.0)) throw ValidationError("residual_threshold must be positive");
  if (!(o.quorum > 0.0 && o.quorum <= 1.0)) throw ValidationError("quorum must lie in (0, 1]");
  return o;
}

/// `invert`: shape reconstruction; writes reconstruction.json and .csv.
inline int cmd_invert(const CommonOptions& opt) {
  if (opt.data.empty()) throw ValidationError("invert needs --data <near_field.json>");
  const auto data = io::near_field_from_json(io::read_json_file(opt.data));
  json cfg = json::object();
  if (!opt.config.empty()) {
    cfg = io::read_json_file(opt.config);
    io::check_schema_version(cfg);
  }
  const auto ro = read_reconstruction_options(cfg, opt.threads);
  spdlog::info("invert: {} entries, {} directions, R = {}", data.entries.size(), ro.directions.size(), data.R);
  const auto rs = stable_reconstruct(data, ro);
  io::write_json_file(output_path(opt, "reconstruction.json"), io::reconstruction_to_json(rs));
  io::write_text_file(output_path(opt, "reconstruction.csv"), io::reconstruction_csv(rs));
  spdlog::info("invert: L = {}, resolved = {:.1f}%, converged = {}", rs.L, 100.0 * rs.resolved_fraction, rs.converged);
  return rs.converged ? exit_ok : exit_unconverged;
}

/// `oracle`: exact sphere coefficients; writes oracle.json.
inline int cmd_oracle(const CommonOptions& opt) {
  const json cfg = io::read_json_file(opt.config);
  io::check_schema_version(cfg);
  const double a = io::require_positive(cfg, "a");
  const auto ctx = read_context(cfg);
  const auto bc = read_bc(cfg);
  const int L = io::require_int(cfg, "L");
  if (L < 0) throw ValidationError("L must be non-negative");
  const auto coeffs = sphere_scattering_coeffs(a, ctx, L, bc);
  const json doc = {{"schema_version", io::schema_version},
                    {"kind", "sphere_oracle"},
                    {"a", a},
                    {"k", ctx.k},
                    {"alpha", io::direction_to_json(ctx.alpha)},
                    {"boundary_condition", to_string(bc)},
                    {"L", L},
                    {"coefficients", io::coefficients_to_json(coeffs)}};
  const auto path = output_path(opt, "oracle.json");
  io::write_json_file(path, doc);
  spdlog::info("oracle: a = {}, k = {}, L = {} -> {}", a, ctx.k, L, path);
  return exit_ok;
}

inline std::vector<Vec3> read_grid(const json& grid) {
  const auto type = io::value_or<std::string>(grid, "type", "");
  std::vector<Vec3> pts;
  if (type == "ray") {
    const auto dir = io::direction_from_json(io::require(grid, "direction"));
    const double r0 = io::require_positive(grid, "r_min");
    const double r1 = io::require_positive(grid, "r_max");
    const int n = io::require_int(grid, "n");
    if (n < 2 || !(r1 > r0)) throw ValidationError("ray grid needs r_max > r_min and n >= 2");
    for (int i = 0; i < n; ++i) pts.push_back((r0 + (r1 - r0) * i / (n - 1)) * dir.unit());
  } else if (type == "plane_xz") {
    const auto xr = io::value_or<std::vector<double>>(grid, "x_range", {});
    const auto zr = io::value_or<std::vector<double>>(grid, "z_range", {});
    const int nx = io::require_int(grid, "nx");
    const int nz = io::require_int(grid, "nz");
    if (xr.size() != 2 || zr.size() != 2 || nx < 2 || nz < 2) throw ValidationError("plane_xz grid needs ranges and nx, nz >= 2");
    for (int iz = 0; iz < nz; ++iz)
      for (int ix = 0; ix < nx; ++ix)
        pts.push_back({xr[0] + (xr[1] - xr[0]) * ix / (nx - 1), 0.0, zr[0] + (zr[1] - zr[0]) * iz / (nz - 1)});
  } else if (type == "points") {
    for (const auto& p : io::require(grid, "points")) {
      if (!p.is_array() || p.size() != 3) throw ValidationError("points must be [x, y, z] triples");
      pts.push_back({p[0].get<double>(), p[1].get<double>(), p[2].get<double>()});
    }
  } else {
    throw ValidationError("grid.type must be 'ray', 'plane_xz' or 'points'");
  }
  return pts;
}

/// `fieldmap`: total and scattered field on a user grid, CSV.
inline int cmd_fieldmap(const CommonOptions& opt) {
  const json cfg = io::read_json_file(opt.config);
  io::check_schema_version(cfg);
  const auto ctx = read_context(cfg);
  CoefficientSet coeffs;
  if (cfg.contains("coefficients_file")) {
    const auto src = io::read_json_file(cfg.at("coefficients_file").get<std::string>());
    coeffs = io::coefficients_from_json(io::require(src, "coefficients"));
  } else {
    const auto surface = io::surface_from_json(io::require(cfg, "surface"));
    coeffs = mrc_solve(surface, ctx, read_bc(cfg), read_solver_options(cfg, opt.threads)).coefficients;
  }
  const auto pts = read_grid(io::require(cfg, "grid"));

  std::string csv = "x,y,z,re_total,im_total,re_scattered,im_scattered\n";
  for (const auto& x : pts) {
    std::string row = io::format_double(x[0]) + ',' + io::format_double(x[1]) + ',' + io::format_double(x[2]);
    if (norm(x) > 0.0) {
      const cplx v = scattered_field(coeffs, ctx, x);
      const cplx u = ctx.incident(x) + v;
      row += ',' + io::format_double(u.real()) + ',' + io::format_double(u.imag()) + ',' +
             io::format_double(v.real()) + ',' + io::format_double(v.imag());
    } else {
      row += ",nan,nan,nan,nan";
    }
    csv += row + '\n';
  }
  const auto path = output_path(opt, "fieldmap.csv");
  io::write_text_file(path, csv);
  spdlog::info("fieldmap: {} points -> {}", pts.size(), path);
  return exit_ok;
}

}  // namespace mrc::cli
