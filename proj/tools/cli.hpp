// SPDX-License-Identifier: Apache-2.0
//
// Command dispatch for the bangbang tool. Exit codes: 0 success, 2 input or
// configuration error, 3 numerical-domain error.
#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "bangbang/bangbang.hpp"
#include "bangbang/io.hpp"

namespace bangbang::cli {

enum ExitCode : int { kOk = 0, kInputError = 2, kDomainError = 3 };

inline int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::domain:
    case ErrorKind::not_a_coboundary:
    case ErrorKind::clustering_ambiguity:
      return kDomainError;
    default:
      return kInputError;
  }
}

inline CMatrix pauli_x() {
  CMatrix m(2, 2);
  m << 0, 1, 1, 0;
  return m;
}

inline CMatrix pauli_z() {
  CMatrix m(2, 2);
  m << 1, 0, 0, -1;
  return m;
}

/// Presets. The qubit examples are chosen for this tool: Z pulses acting on
///   qubit-z-x   H = X        (pure coboundary, P(X) = 0)
///   qubit-z-z   H = Z        (commutes with the pulse)
///   qubit-z-xz  H = X + Z    (mixed: commutant part Z, coboundary part X)
inline std::optional<PulseSystem> preset_system(const std::string& name) {
  if (name == "qubit-z-x") return hamiltonian_system(pauli_z(), pauli_x(), 1.0);
  if (name == "qubit-z-z") return hamiltonian_system(pauli_z(), pauli_z(), 1.0);
  if (name == "qubit-z-xz") return hamiltonian_system(pauli_z(), pauli_x() + pauli_z(), 1.0);
  return std::nullopt;
}

inline PulseSystem load_system(const std::string& spec) {
  if (auto preset = preset_system(spec)) return *preset;
  return io::system_from_file(spec);
}

/// "re", "re,im", or "inv-y" (|t| = 1/||Y|| for the minimal-norm Y).
inline void apply_time(PulseSystem& sys, const std::string& spec) {
  if (spec.empty()) return;
  if (spec == "inv-y") {
    sys.validate();
    const auto spec_u = spectrum(sys.u, sys.cluster_tol);
    const double y = op_norm(yosida_split(spec_u, sys.generator).potential);
    if (y == 0.0) fail(ErrorKind::domain, "--t inv-y needs a generator with a nonzero coboundary part");
    sys.t = 1.0 / y;
    return;
  }
  std::istringstream in(spec);
  double re = 0, im = 0;
  char comma = 0;
  if (!(in >> re)) fail(ErrorKind::parse, "--t: expected re[,im] or inv-y, got '" + spec + "'");
  if (in >> comma) {
    if (comma != ',' || !(in >> im)) fail(ErrorKind::parse, "--t: expected re[,im], got '" + spec + "'");
  }
  if (!in.eof() && in.peek() != EOF) fail(ErrorKind::parse, "--t: trailing characters in '" + spec + "'");
  sys.t = Complex(re, im);
}

/// "16,32,64" or "a:b:geometric" (a, 2a, 4a, ... up to and including b).
inline std::vector<std::size_t> parse_n_values(const std::string& spec) {
  std::vector<std::size_t> out;
  auto parse_int = [&](const std::string& tok) -> std::size_t {
    std::size_t pos = 0;
    long long v = 0;
    try {
      v = std::stoll(tok, &pos);
    } catch (const std::exception&) {
      fail(ErrorKind::parse, "--n: '" + tok + "' is not an integer");
    }
    if (pos != tok.size() || v < 1) fail(ErrorKind::parse, "--n: '" + tok + "' is not a positive integer");
    return static_cast<std::size_t>(v);
  };
  if (spec.find(':') != std::string::npos) {
    std::vector<std::string> parts;
    std::stringstream ss(spec);
    for (std::string tok; std::getline(ss, tok, ':');) parts.push_back(tok);
    if (parts.size() != 3 || parts[2] != "geometric")
      fail(ErrorKind::parse, "--n: range must look like a:b:geometric, got '" + spec + "'");
    const std::size_t lo = parse_int(parts[0]);
    const std::size_t hi = parse_int(parts[1]);
    if (hi < lo) fail(ErrorKind::parse, "--n: range end below start");
    return geometric_grid(lo, hi);
  }
  std::stringstream ss(spec);
  for (std::string tok; std::getline(ss, tok, ',');) out.push_back(parse_int(tok));
  if (out.empty()) fail(ErrorKind::parse, "--n: empty list");
  return out;
}

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) fail(ErrorKind::parse, "cannot write " + path);
  f << text;
}

struct SweepOptions {
  std::string system = "qubit-z-x";
  std::string family = "uniform";
  std::string n_values = "16:4096:geometric";
  std::string t;
  int imax = kDefaultIMax;
  std::string out;
  std::string format = "csv";
  std::uint64_t seed = 0;
};

inline int cmd_sweep(const SweepOptions& opt, std::ostream& out) {
  PulseSystem sys = load_system(opt.system);
  apply_time(sys, opt.t);
  const ScheduleFamily family = io::family_from_spec(opt.family);
  const auto n_values = parse_n_values(opt.n_values);
  const ConvergenceReport report = convergence_sweep(sys, family, n_values, opt.imax);
  if (!opt.out.empty()) {
    std::ostringstream body;
    if (opt.format == "json")
      body << io::report_to_json(report).dump(2) << '\n';
    else
      io::write_report_csv(body, report);
    write_text(opt.out, body.str());
  }
  out << "slope: " << (report.fitted_slope ? io::format_double(*report.fitted_slope) : "n/a")
      << "\nfinal_error: " << io::format_double(report.errors.back()) << '\n';
  return kOk;
}

struct ScheduleOptions {
  std::string kind = "uniform";
  std::size_t n = 4;
  std::string density;
  std::string out;
};

inline int cmd_schedule(const ScheduleOptions& opt, std::ostream& out) {
  std::optional<Schedule> s;
  if (opt.kind == "uniform")
    s = equidistant(opt.n);
  else if (opt.kind == "uhrig")
    s = from_density(uhrig_density, opt.n);
  else if (opt.kind == "pathological")
    s = pathological(opt.n);
  else if (opt.kind == "density-file") {
    if (opt.density.empty()) fail(ErrorKind::parse, "--kind density-file needs --density <path>");
    if (!std::filesystem::exists(opt.density)) fail(ErrorKind::parse, "density file not found: " + opt.density);
    s = from_density(io::density_from_json(io::read_json_file(opt.density)), opt.n);
  } else {
    fail(ErrorKind::parse, "unknown schedule kind '" + opt.kind + "'");
  }
  if (!opt.out.empty()) write_text(opt.out, io::schedule_to_json(*s).dump() + "\n");
  char buf[64];
  std::snprintf(buf, sizeof buf, "V = %.12g\n", tv_functional(*s));
  out << buf;
  return kOk;
}

struct OptimizeOptions {
  std::string mode = "tv";
  std::size_t n = 5;
  std::string system = "qubit-z-x";
  std::string t = "inv-y";
  int imax = kDefaultIMax;
  std::optional<int> restarts;
  int max_iters = 2000;
  double grid_res = 0.02;
  bool certify = false;
  std::uint64_t seed = 0;
  std::string out;
};

inline int cmd_optimize(const OptimizeOptions& opt, std::ostream& out) {
  OptimizerConfig cfg;
  cfg.max_iters = opt.max_iters;
  cfg.grid_resolution = opt.grid_res;
  cfg.seed = opt.seed;
  std::optional<OptimizationResult> result;
  ScheduleObjective objective;
  double granularity = 4.0 * opt.grid_res;
  if (opt.mode == "tv") {
    cfg.restarts = opt.restarts.value_or(100);
    result = minimize_tv(opt.n, cfg);
    objective = [](const Schedule& s) { return tv_functional(s); };
  } else if (opt.mode == "bound") {
    cfg.restarts = opt.restarts.value_or(20);
    PulseSystem sys = load_system(opt.system);
    apply_time(sys, opt.t);
    result = minimize_bound_rhs(sys, opt.n, opt.imax, cfg);
    objective = [sys, imax = opt.imax](const Schedule& s) {
      return theorem4_bound_rhs(sys, s, imax).total_rhs;
    };
    granularity = std::numeric_limits<double>::infinity();
  } else {
    fail(ErrorKind::parse, "unknown optimize mode '" + opt.mode + "' (tv or bound)");
  }
  if (opt.certify) certify_with_grid(*result, objective, opt.grid_res, granularity);

  out << "minimizer:";
  for (double w : result->minimizer.weights()) out << ' ' << io::format_double(w);
  out << "\nvalue: " << io::format_double(result->value)
      << "\nnear_uniform: " << (result->near_uniform.value_or(false) ? "true" : "false")
      << "\ncertified_by_grid: " << (opt.certify ? (result->certified_by_grid ? "true" : "false") : "not-run")
      << '\n';
  if (!opt.out.empty()) write_text(opt.out, io::result_to_json(*result).dump(2) + "\n");
  return kOk;
}

struct ProbeOptions {
  std::string family = "uniform";
  std::size_t n_max = 4096;
  std::vector<std::size_t> k_grid = {1, 2, 4, 8, 16};
  std::string out;
};

inline int cmd_probe(const ProbeOptions& opt, std::ostream& out) {
  const ScheduleFamily family = io::family_from_spec(opt.family);
  std::vector<std::size_t> k_grid;
  for (auto k : opt.k_grid)
    if (k <= opt.n_max) k_grid.push_back(k);
  const UniformityReport r = cohen_uniformity_probe(family, opt.n_max, k_grid);
  out << "N,V_N\n";
  for (std::size_t k = 0; k < r.n_grid.size(); ++k)
    out << r.n_grid[k] << ',' << io::format_double(r.tv_sequence[k]) << '\n';
  out << "verdict: " << verdict_name(r) << " (final V_N " << io::format_double(r.tv_sequence.back())
      << ", cutoff " << r.cutoff << ", geometric N grid ending at " << opt.n_max << ")\n";
  if (!opt.out.empty()) {
    std::ostringstream body;
    body << "k,tail_sup\n";
    for (std::size_t g = 0; g < r.k_grid.size(); ++g)
      body << r.k_grid[g] << ',' << io::format_double(r.tail_sup[g]) << '\n';
    write_text(opt.out, body.str());
  }
  return kOk;
}

/// Parses argv and runs one subcommand. Never throws.
inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Bang-bang control product formulas: sweeps, schedules, optimization, probes"};
  app.require_subcommand(1);

  SweepOptions sweep;
  auto* sweep_cmd = app.add_subcommand("sweep", "Measure control error against the projected limit over N");
  sweep_cmd->add_option("--system", sweep.system, "System JSON path or preset (qubit-z-x, qubit-z-z, qubit-z-xz)");
  sweep_cmd->add_option("--family", sweep.family, "uniform | uhrig | pathological | family JSON path");
  sweep_cmd->add_option("--n", sweep.n_values, "Comma list or a:b:geometric");
  sweep_cmd->add_option("--t", sweep.t, "Total time re[,im] or inv-y");
  sweep_cmd->add_option("--imax", sweep.imax, "Series truncation order")->check(CLI::Range(2, 170));
  sweep_cmd->add_option("--out", sweep.out, "Report path");
  sweep_cmd->add_option("--format", sweep.format, "csv | json")->check(CLI::IsMember({"csv", "json"}));
  sweep_cmd->add_option("--seed", sweep.seed, "Seed (recorded; sweeps are deterministic)");

  ScheduleOptions sched;
  auto* sched_cmd = app.add_subcommand("schedule", "Write a schedule JSON and print its total variation V_N");
  sched_cmd->add_option("--kind", sched.kind, "uniform | uhrig | pathological | density-file");
  sched_cmd->add_option("--n", sched.n, "Pulse count")->required();
  sched_cmd->add_option("--density", sched.density, "Density table JSON for --kind density-file");
  sched_cmd->add_option("--out", sched.out, "Output path");

  OptimizeOptions optim;
  auto* opt_cmd = app.add_subcommand("optimize", "Minimize V_N or the weighted bound over the simplex");
  opt_cmd->add_option("--mode", optim.mode, "tv | bound");
  opt_cmd->add_option("--n", optim.n, "Pulse count")->required();
  opt_cmd->add_option("--system", optim.system, "System for bound mode");
  opt_cmd->add_option("--t", optim.t, "Total time re[,im] or inv-y (bound mode)");
  opt_cmd->add_option("--imax", optim.imax, "Series truncation order")->check(CLI::Range(2, 170));
  opt_cmd->add_option("--restarts", optim.restarts, "Random restarts");
  opt_cmd->add_option("--max-iters", optim.max_iters, "Iterations per restart");
  opt_cmd->add_option("--grid-res", optim.grid_res, "Lattice spacing for certification");
  opt_cmd->add_flag("--certify", optim.certify, "Certify against the exhaustive lattice search");
  opt_cmd->add_option("--seed", optim.seed, "Seed");
  opt_cmd->add_option("--out", optim.out, "Result JSON path");

  ProbeOptions probe;
  auto* probe_cmd = app.add_subcommand("probe", "Numerical probe of the uniform tail-variation condition");
  probe_cmd->add_option("--family", probe.family, "uniform | uhrig | pathological | family JSON path");
  probe_cmd->add_option("--n-max", probe.n_max, "Largest N");
  probe_cmd->add_option("--k", probe.k_grid, "Tail start indices")->delimiter(',');
  probe_cmd->add_option("--out", probe.out, "Tail-sup CSV path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kInputError;
  }

  try {
    if (*sweep_cmd) return cmd_sweep(sweep, out);
    if (*sched_cmd) return cmd_schedule(sched, out);
    if (*opt_cmd) return cmd_optimize(optim, out);
    if (*probe_cmd) return cmd_probe(probe, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kDomainError;
  }
  return kInputError;
}

}  // namespace bangbang::cli
