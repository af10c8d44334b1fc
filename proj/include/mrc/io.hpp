#pragma once

/// \file io.hpp
/// JSON and CSV (de)serialization of surfaces, coefficient sets, direct
/// solutions, near-field data and reconstructions.
///
/// Doubles are written by nlohmann::json in shortest round-trip form, so a
/// write/read cycle is bit exact. CSV output uses 17 significant digits.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "mrc/coefficients.hpp"
#include "mrc/direct_solver.hpp"
#include "mrc/geometry.hpp"
#include "mrc/inverse_solver.hpp"

namespace mrc::io {

using json = nlohmann::json;

inline constexpr int schema_version = 1;

/// Raised for any malformed or out-of-range input document.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// ---- field access helpers ------------------------------------------------

inline const json& require(const json& obj, const char* key) {
  if (!obj.is_object() || !obj.contains(key)) throw ValidationError(std::string("missing field '") + key + "'");
  return obj.at(key);
}

inline double require_number(const json& obj, const char* key) {
  const auto& v = require(obj, key);
  if (!v.is_number()) throw ValidationError(std::string("field '") + key + "' must be a number");
  return v.get<double>();
}

inline double require_positive(const json& obj, const char* key) {
  const double v = require_number(obj, key);
  if (!(v > 0.0) || !std::isfinite(v)) throw ValidationError(std::string("field '") + key + "' must be positive");
  return v;
}

inline int require_int(const json& obj, const char* key) {
  const auto& v = require(obj, key);
  if (!v.is_number_integer()) throw ValidationError(std::string("field '") + key + "' must be an integer");
  return v.get<int>();
}

template <typename T>
T value_or(const json& obj, const char* key, T fallback) {
  if (!obj.is_object() || !obj.contains(key)) return fallback;
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw ValidationError(std::string("field '") + key + "' has the wrong type");
  }
}

inline void check_schema_version(const json& doc) {
  const int v = require_int(doc, "schema_version");
  if (v != schema_version) throw ValidationError("unsupported schema_version " + std::to_string(v));
}

// ---- directions ----------------------------------------------------------

inline json direction_to_json(const Direction& d) { return json::array({d.theta(), d.phi()}); }

inline Direction direction_from_json(const json& j) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
    throw ValidationError("direction must be [theta, phi]");
  try {
    return {j[0].get<double>(), j[1].get<double>()};
  } catch (const std::domain_error& e) {
    throw ValidationError(e.what());
  }
}

// ---- surfaces ------------------------------------------------------------

inline json surface_to_json(const StarSurface& s) {
  return std::visit(
      [](const auto& d) -> json {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, SphereShape>) {
          return {{"type", "sphere"}, {"a", d.a}};
        } else if constexpr (std::is_same_v<T, PerturbedSphereShape>) {
          json bumps = json::array();
          for (const auto& b : d.bumps) bumps.push_back(json::array({b.ell, b.m, b.amplitude}));
          return {{"type", "perturbed_sphere"}, {"a", d.a}, {"perturbations", bumps}};
        } else if constexpr (std::is_same_v<T, EllipsoidShape>) {
          return {{"type", "ellipsoid"}, {"a", d.a}, {"b", d.b}, {"c", d.c}};
        } else {
          return {{"type", "custom"}};
        }
      },
      s.descriptor());
}

inline StarSurface surface_from_json(const json& j) {
  const auto& type_field = require(j, "type");
  if (!type_field.is_string()) throw ValidationError("surface type must be a string");
  const auto type = type_field.get<std::string>();
  try {
    if (type == "sphere") return StarSurface(SphereShape{require_number(j, "a")});
    if (type == "ellipsoid")
      return StarSurface(EllipsoidShape{require_number(j, "a"), require_number(j, "b"), require_number(j, "c")});
    if (type == "perturbed_sphere") {
      PerturbedSphereShape p{require_number(j, "a"), {}};
      const auto& list = require(j, "perturbations");
      if (!list.is_array()) throw ValidationError("perturbations must be an array of [ell, m, amplitude]");
      for (const auto& row : list) {
        if (!row.is_array() || row.size() != 3 || !row[0].is_number_integer() || !row[1].is_number_integer() ||
            !row[2].is_number())
          throw ValidationError("perturbation rows must be [ell, m, amplitude]");
        p.bumps.push_back({row[0].get<int>(), row[1].get<int>(), row[2].get<double>()});
      }
      return StarSurface(std::move(p));
    }
  } catch (const std::invalid_argument& e) {
    throw ValidationError(e.what());
  }
  throw ValidationError("unknown surface type '" + type + "'");
}

// ---- coefficients --------------------------------------------------------

inline json coefficients_to_json(const CoefficientSet& c) {
  json rows = json::array();
  for (std::size_t i = 0; i < c.values.size(); ++i) {
    const auto mode = ModeIndex::from_flat(static_cast<int>(i));
    rows.push_back(json::array({mode.ell, mode.m, c.values[i].real(), c.values[i].imag()}));
  }
  return rows;
}

inline CoefficientSet coefficients_from_json(const json& rows) {
  if (!rows.is_array()) throw ValidationError("coefficients must be an array of [ell, m, re, im]");
  int L = 0;
  for (const auto& r : rows) {
    if (!r.is_array() || r.size() != 4 || !r[0].is_number_integer() || !r[1].is_number_integer())
      throw ValidationError("coefficient rows must be [ell, m, re, im]");
    L = std::max(L, r[0].get<int>());
  }
  auto out = CoefficientSet::zeros(L);
  for (const auto& r : rows) {
    const ModeIndex mode{r[0].get<int>(), r[1].get<int>()};
    if (!mode.valid()) throw ValidationError("invalid coefficient mode");
    out.at(mode) = {r[2].get<double>(), r[3].get<double>()};
  }
  return out;
}

// ---- direct solutions ----------------------------------------------------

inline json solution_to_json(const DirectSolution& s) {
  json hist = json::array();
  for (const auto& h : s.history)
    hist.push_back({{"L", h.L},
                    {"residual", h.residual},
                    {"quad_degree", h.quad_degree},
                    {"rank", h.rank},
                    {"condition", number_or_null(h.condition)}});
  return {{"schema_version", schema_version},
          {"kind", "direct_solution"},
          {"boundary_condition", to_string(s.boundary_condition)},
          {"converged", s.converged},
          {"residual", s.residual},
          {"L", s.coefficients.L},
          {"condition", number_or_null(s.condition)},
          {"rank", s.rank},
          {"quad_degree", s.quad_degree},
          {"coefficients", coefficients_to_json(s.coefficients)},
          {"history", hist}};
}

// ---- near-field data -----------------------------------------------------

inline json near_field_to_json(const NearFieldData& d, const json& provenance = json::object()) {
  json entries = json::array();
  for (const auto& e : d.entries) {
    json samples = json::array();
    for (const auto& v : e.samples) samples.push_back(json::array({v.real(), v.imag()}));
    entries.push_back({{"k", e.ctx.k},
                       {"alpha", direction_to_json(e.ctx.alpha)},
                       {"delta", e.noise_level},
                       {"samples", samples}});
  }
  return {{"schema_version", schema_version},
          {"kind", "near_field_data"},
          {"provenance", provenance},
          {"R", d.R},
          {"quadrature", {{"type", "gauss_legendre_x_uniform"}, {"n_theta", d.n_theta}, {"n_phi", d.n_phi}}},
          {"entries", entries}};
}

inline NearFieldData near_field_from_json(const json& j) {
  check_schema_version(j);
  NearFieldData d;
  d.R = require_positive(j, "R");
  const auto& q = require(j, "quadrature");
  d.n_theta = require_int(q, "n_theta");
  d.n_phi = require_int(q, "n_phi");
  const auto& entries = require(j, "entries");
  if (!entries.is_array()) throw ValidationError("entries must be an array");
  for (const auto& e : entries) {
    NearFieldEntry entry;
    try {
      entry.ctx = WaveContext(require_positive(e, "k"), direction_from_json(require(e, "alpha")));
    } catch (const std::invalid_argument& ex) {
      throw ValidationError(ex.what());
    }
    entry.noise_level = value_or<double>(e, "delta", 0.0);
    const auto& samples = require(e, "samples");
    if (!samples.is_array()) throw ValidationError("samples must be an array of [re, im]");
    entry.samples.reserve(samples.size());
    for (const auto& s : samples) {
      if (!s.is_array() || s.size() != 2 || !s[0].is_number() || !s[1].is_number())
        throw ValidationError("samples must be [re, im] pairs");
      entry.samples.emplace_back(s[0].get<double>(), s[1].get<double>());
    }
    d.entries.push_back(std::move(entry));
  }
  try {
    d.validate();
  } catch (const std::invalid_argument& ex) {
    throw ValidationError(ex.what());
  }
  return d;
}

// ---- reconstructions -----------------------------------------------------

inline json reconstruction_to_json(const ReconstructedSurface& rs) {
  json dirs = json::array();
  for (std::size_t i = 0; i < rs.roots.size(); ++i) {
    const auto& r = rs.roots[i];
    dirs.push_back({{"theta", r.dir_out.theta()},
                    {"phi", r.dir_out.phi()},
                    {"r", r.r},
                    {"residual", number_or_null(r.residual)},
                    {"spread", number_or_null(r.spread)},
                    {"imag_score", number_or_null(r.imag_score)},
                    {"resolved", static_cast<bool>(rs.resolved[i])}});
  }
  json sched = json::array();
  for (const auto& s : rs.schedule) sched.push_back({{"L", s.L}, {"resolved_fraction", s.resolved_fraction}});
  return {{"schema_version", schema_version},
          {"kind", "reconstructed_surface"},
          {"L", rs.L},
          {"converged", rs.converged},
          {"resolved_fraction", rs.resolved_fraction},
          {"bracket", json::array({rs.r_lo, rs.r_hi})},
          {"directions", dirs},
          {"harmonic_model",
           {{"degree", rs.harmonic_degree},
            {"coefficients", rs.harmonic_degree >= 0 ? coefficients_to_json(rs.harmonic_model) : json::array()}}},
          {"schedule", sched},
          {"dropped_degrees", rs.dropped_degrees}};
}

inline std::string reconstruction_csv(const ReconstructedSurface& rs) {
  std::ostringstream out;
  out << "theta,phi,r\n";
  for (const auto& r : rs.roots)
    out << format_double(r.dir_out.theta()) << ',' << format_double(r.dir_out.phi()) << ',' << format_double(r.r)
        << '\n';
  return out.str();
}

// ---- files ---------------------------------------------------------------

inline json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ValidationError("malformed JSON in '" + path + "': " + e.what());
  }
}

inline void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << text;
}

inline void write_json_file(const std::string& path, const json& j) { write_text_file(path, j.dump(2) + "\n"); }

}  // namespace mrc::io
