// SPDX-License-Identifier: Apache-2.0
//
// JSON and CSV formats:
//   matrix    {"dim": n, "entries": [[re, im], ...]}   n^2 pairs, row-major
//   schedule  {"n": N, "weights": [a_1, ..., a_N]}
//   density   {"density": [f(0), ..., f(1)]}          equally spaced samples
//   family    {"rows": [schedule, ...]}               one schedule per N
//   system    {"u": matrix|path, "generator"|"hamiltonian": matrix|path, "t": re | [re, im]}
#pragma once

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "bangbang/evolution.hpp"
#include "bangbang/matrix.hpp"
#include "bangbang/optimizer.hpp"
#include "bangbang/schedule.hpp"

namespace bangbang::io {

using nlohmann::json;

inline json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::parse, "cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    fail(ErrorKind::parse, path.string() + ": " + e.what());
  }
}

namespace detail {

inline double finite_number(const json& v, const std::string& field) {
  if (!v.is_number()) fail(ErrorKind::parse, field + " must be a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) fail(ErrorKind::parse, field + " is not finite");
  return x;
}

}  // namespace detail

inline CMatrix matrix_from_json(const json& j) {
  if (!j.is_object() || !j.contains("dim") || !j.contains("entries"))
    fail(ErrorKind::parse, "matrix needs fields \"dim\" and \"entries\"");
  if (!j["dim"].is_number_integer() || j["dim"].get<long long>() < 1)
    fail(ErrorKind::parse, "\"dim\" must be a positive integer");
  const auto dim = j["dim"].get<long long>();
  const auto& entries = j["entries"];
  if (!entries.is_array() || static_cast<long long>(entries.size()) != dim * dim)
    fail(ErrorKind::parse, "\"entries\" must hold exactly dim^2 = " + std::to_string(dim * dim) +
                               " [re, im] pairs, got " + std::to_string(entries.size()));
  CMatrix m(dim, dim);
  for (long long k = 0; k < dim * dim; ++k) {
    const auto& e = entries[static_cast<std::size_t>(k)];
    const std::string where = "entries[" + std::to_string(k) + "]";
    if (!e.is_array() || e.size() != 2) fail(ErrorKind::parse, where + " must be a [re, im] pair");
    m(k / dim, k % dim) = Complex(detail::finite_number(e[0], where + "[0]"),
                                  detail::finite_number(e[1], where + "[1]"));
  }
  return m;
}

inline json matrix_to_json(const CMatrix& m) {
  json entries = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) entries.push_back({m(i, j).real(), m(i, j).imag()});
  return {{"dim", m.rows()}, {"entries", entries}};
}

inline Schedule schedule_from_json(const json& j) {
  if (!j.is_object() || !j.contains("n") || !j.contains("weights"))
    fail(ErrorKind::parse, "schedule needs fields \"n\" and \"weights\"");
  if (!j["n"].is_number_integer() || j["n"].get<long long>() < 1)
    fail(ErrorKind::parse, "\"n\" must be a positive integer");
  const auto& w = j["weights"];
  if (!w.is_array() || w.size() != j["n"].get<std::size_t>())
    fail(ErrorKind::parse, "\"weights\" must hold exactly n numbers");
  std::vector<double> a;
  a.reserve(w.size());
  for (std::size_t i = 0; i < w.size(); ++i)
    a.push_back(detail::finite_number(w[i], "weights[" + std::to_string(i) + "]"));
  return Schedule(std::move(a));
}

inline json schedule_to_json(const Schedule& s) {
  return {{"n", s.n()}, {"weights", s.weights()}};
}

inline Density density_from_json(const json& j) {
  if (!j.is_object() || !j.contains("density") || !j["density"].is_array())
    fail(ErrorKind::parse, "density file needs an array field \"density\"");
  std::vector<double> samples;
  for (std::size_t i = 0; i < j["density"].size(); ++i)
    samples.push_back(detail::finite_number(j["density"][i], "density[" + std::to_string(i) + "]"));
  return tabulated_density(std::move(samples));
}

/// Named family ("uniform", "equidistant", "uhrig", "pathological") or a
/// JSON file holding a density table, a "rows" table, or a single schedule.
inline ScheduleFamily family_from_spec(const std::string& spec) {
  if (spec == "uniform" || spec == "equidistant") return ScheduleFamily::make_equidistant();
  if (spec == "uhrig") return ScheduleFamily::make_uhrig();
  if (spec == "pathological") return ScheduleFamily::make_pathological();
  const std::filesystem::path path(spec);
  if (!std::filesystem::exists(path))
    fail(ErrorKind::parse, "unknown family '" + spec + "' (not a preset name and no such file)");
  const json j = read_json_file(path);
  if (j.contains("density"))
    return ScheduleFamily::make_density(density_from_json(j), path.stem().string());
  std::map<std::size_t, Schedule> table;
  if (j.contains("rows")) {
    if (!j["rows"].is_array()) fail(ErrorKind::parse, "\"rows\" must be an array of schedules");
    for (const auto& row : j["rows"]) {
      Schedule s = schedule_from_json(row);
      table.insert_or_assign(s.n(), std::move(s));
    }
  } else {
    Schedule s = schedule_from_json(j);
    table.insert_or_assign(s.n(), std::move(s));
  }
  return ScheduleFamily::make_custom(std::move(table), path.stem().string());
}

inline Complex complex_from_json(const json& v, const std::string& field) {
  if (v.is_number()) return {detail::finite_number(v, field), 0.0};
  if (v.is_array() && v.size() == 2)
    return {detail::finite_number(v[0], field + "[0]"), detail::finite_number(v[1], field + "[1]")};
  fail(ErrorKind::parse, field + " must be a number or a [re, im] pair");
}

namespace detail {

inline CMatrix matrix_field(const json& j, const std::string& field, const std::filesystem::path& base) {
  const auto& v = j[field];
  if (v.is_string()) {
    std::filesystem::path p(v.get<std::string>());
    if (p.is_relative()) p = base / p;
    if (!std::filesystem::exists(p)) fail(ErrorKind::parse, "matrix file not found: " + p.string());
    return matrix_from_json(read_json_file(p));
  }
  return matrix_from_json(v);
}

}  // namespace detail

/// Reads a system file. Relative matrix paths resolve against the file's directory.
inline PulseSystem system_from_file(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) fail(ErrorKind::parse, "system file not found: " + path.string());
  const json j = read_json_file(path);
  const auto base = path.parent_path();
  if (!j.is_object() || !j.contains("u")) fail(ErrorKind::parse, path.string() + ": missing field \"u\"");
  PulseSystem sys;
  sys.u = detail::matrix_field(j, "u", base);
  if (j.contains("generator"))
    sys.generator = detail::matrix_field(j, "generator", base);
  else if (j.contains("hamiltonian"))
    sys.generator = Complex(0.0, -1.0) * detail::matrix_field(j, "hamiltonian", base);
  else
    fail(ErrorKind::parse, path.string() + ": needs \"generator\" or \"hamiltonian\"");
  if (j.contains("t")) sys.t = complex_from_json(j["t"], "t");
  return sys;
}

/// 17 significant digits, enough to round-trip a double.
inline std::string format_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline void write_report_csv(std::ostream& out, const ConvergenceReport& r) {
  out << "N,error,slope_window_flag,m_const,m_prime_const,tv_term,c_series_sum,total_rhs\n";
  for (std::size_t k = 0; k < r.n_values.size(); ++k) {
    out << r.n_values[k] << ',' << format_double(r.errors[k]) << ',' << (r.in_slope_window[k] ? 1 : 0);
    const auto& b = r.bounds[k];
    if (!b) {
      out << ",,,,,\n";
      continue;
    }
    out << ',' << format_double(b->m_const) << ',' << format_double(b->m_prime_const);
    if (r.coboundary)
      out << ',' << format_double(b->tv_term) << ',' << format_double(b->c_series_sum) << ','
          << format_double(b->total_rhs) << '\n';
    else
      out << ",,,\n";
  }
}

inline json report_to_json(const ConvergenceReport& r) {
  json rows = json::array();
  for (std::size_t k = 0; k < r.n_values.size(); ++k) {
    json row = {{"N", r.n_values[k]}, {"error", r.errors[k]}, {"slope_window", r.in_slope_window[k]}};
    if (const auto& b = r.bounds[k]) {
      row["m_const"] = b->m_const;
      row["m_prime_const"] = b->m_prime_const;
      row["y_norm"] = b->y_norm;
      row["y_convention"] = b->y_convention;
      if (r.coboundary) {
        row["tv_term"] = b->tv_term;
        row["c_series_sum"] = b->c_series_sum;
        row["total_rhs"] = b->total_rhs;
      }
    }
    rows.push_back(row);
  }
  json out = {{"rows", rows}, {"coboundary", r.coboundary}};
  out["fitted_slope"] = r.fitted_slope ? json(*r.fitted_slope) : json(nullptr);
  return out;
}

inline json result_to_json(const OptimizationResult& r) {
  json out = {{"minimizer", schedule_to_json(r.minimizer)},
              {"value", r.value},
              {"iterations_used", r.iterations_used},
              {"improving_steps", r.improving_steps},
              {"certified_by_grid", r.certified_by_grid}};
  out["near_uniform"] = r.near_uniform ? json(*r.near_uniform) : json(nullptr);
  if (r.mirrored_minimizer) out["mirrored_minimizer"] = schedule_to_json(*r.mirrored_minimizer);
  return out;
}

}  // namespace bangbang::io
