// SPDX-License-Identifier: Apache-2.0
//
// Minimization over the probability simplex of the total-variation functional
// V_N and of the weighted-schedule bound, by projected subgradient descent
// with random restarts, plus an exhaustive lattice search used as an
// independent oracle on small instances.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <optional>
#include <random>
#include <stdexcept>
#include <vector>

#include "bangbang/evolution.hpp"
#include "bangbang/schedule.hpp"

namespace bangbang {

struct OptimizerConfig {
  int restarts = 100;
  int max_iters = 2000;
  double step_tol = 1e-12;
  double grid_resolution = 0.02;
  std::uint64_t seed = 0;
  /// Starting point of the first restart; random when empty.
  std::optional<std::vector<double>> initial;

  void validate() const {
    if (restarts < 1) fail(ErrorKind::invalid_input, "restarts must be >= 1");
    if (max_iters < 1) fail(ErrorKind::invalid_input, "max_iters must be >= 1");
    if (!(step_tol > 0)) fail(ErrorKind::invalid_input, "step_tol must be > 0");
    if (!(grid_resolution > 0) || grid_resolution > 1)
      fail(ErrorKind::invalid_input, "grid_resolution must lie in (0, 1]");
    const double steps = 1.0 / grid_resolution;
    if (std::abs(steps - std::round(steps)) > 1e-12 * steps)
      fail(ErrorKind::invalid_input, "grid_resolution must divide 1");
  }
};

struct OptimizationResult {
  Schedule minimizer;
  double value;
  int iterations_used = 0;  // subgradient steps (or lattice points for the grid search)
  int improving_steps = 0;  // steps that lowered the best value found
  bool certified_by_grid = false;
  std::optional<bool> near_uniform;  // within 1e-4 of 1/n in every weight
  std::optional<Schedule> mirrored_minimizer;  // reversed optimum when distinct but tied
};

using WeightObjective = std::function<double(const std::vector<double>&)>;
using ScheduleObjective = std::function<double(const Schedule&)>;

/// Euclidean projection onto {a : a_i >= 0, sum a_i = 1} by sort and
/// threshold, then clipped below 1 so that every weight stays < 1.
inline std::vector<double> project_to_simplex(const std::vector<double>& v) {
  const std::size_t n = v.size();
  std::vector<double> sorted(v);
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  double cumulative = 0.0;
  double theta = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    cumulative += sorted[k];
    const double candidate = (cumulative - 1.0) / static_cast<double>(k + 1);
    if (sorted[k] - candidate > 0) theta = candidate;
  }
  std::vector<double> out(n);
  for (std::size_t k = 0; k < n; ++k) out[k] = std::max(v[k] - theta, 0.0);
  if (n >= 2) {
    auto top = std::max_element(out.begin(), out.end());
    if (*top > kMaxWeight) *top = kMaxWeight;
  }
  // Put the rounding residue on the largest entry that can absorb it.
  const double residue = 1.0 - detail::compensated_sum(out);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return out[a] > out[b]; });
  for (auto k : order) {
    const double next = out[k] + residue;
    if (next >= 0.0 && next <= kMaxWeight) {
      out[k] = next;
      break;
    }
  }
  return out;
}

namespace detail {

inline std::vector<double> random_simplex_point(std::size_t n, std::mt19937_64& rng) {
  std::exponential_distribution<double> expo(1.0);
  std::vector<double> x(n);
  for (auto& xi : x) xi = expo(rng);
  const double total = std::accumulate(x.begin(), x.end(), 0.0);
  for (auto& xi : x) xi /= total;
  return project_to_simplex(x);
}

inline double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
  return d;
}

inline bool is_near_uniform(const std::vector<double>& a, double tol) {
  const double u = 1.0 / static_cast<double>(a.size());
  return std::all_of(a.begin(), a.end(), [&](double w) { return std::abs(w - u) <= tol; });
}

using Subgradient = std::function<std::vector<double>(const std::vector<double>&)>;
using VisitCheck = std::function<void(const std::vector<double>&, double)>;

inline constexpr int kEpochLength = 50;
inline constexpr double kEpochShrink = 0.5;

// Projected subgradient descent with normalized steps c/k inside epochs of
// kEpochLength iterations. Each epoch restarts from the best point with c
// halved. A restart ends at max_iters or when the step drops below step_tol.
inline OptimizationResult projected_subgradient(std::size_t n, const WeightObjective& f,
                                                const Subgradient& grad, const OptimizerConfig& cfg,
                                                const VisitCheck& on_visit) {
  cfg.validate();
  std::mt19937_64 rng(cfg.seed);
  std::vector<double> best;
  double best_value = std::numeric_limits<double>::infinity();
  int iterations = 0;
  int improvements = 0;

  for (int r = 0; r < cfg.restarts; ++r) {
    std::vector<double> x;
    if (r == 0 && cfg.initial) {
      if (cfg.initial->size() != n) fail(ErrorKind::invalid_input, "initial point has the wrong length");
      x = project_to_simplex(*cfg.initial);
    } else {
      x = random_simplex_point(n, rng);
    }
    double fx = f(x);
    on_visit(x, fx);
    if (fx < best_value) {
      // Starting points are not counted as improvements.
      best_value = fx;
      best = x;
    }
    std::vector<double> run_best = x;
    double run_best_value = fx;
    double c = 0.5;
    int k = 0;
    for (int it = 0; it < cfg.max_iters; ++it) {
      ++k;
      if (k > kEpochLength) {
        k = 1;
        c *= kEpochShrink;
        x = run_best;
      }
      const double step = c / k;
      if (step < cfg.step_tol) break;
      std::vector<double> g = grad(x);
      const double mean = std::accumulate(g.begin(), g.end(), 0.0) / static_cast<double>(n);
      double norm = 0.0;
      for (auto& gi : g) {
        gi -= mean;
        norm += gi * gi;
      }
      norm = std::sqrt(norm);
      if (norm == 0.0) break;
      for (std::size_t i = 0; i < n; ++i) x[i] -= step * g[i] / norm;
      x = project_to_simplex(x);
      fx = f(x);
      ++iterations;
      on_visit(x, fx);
      if (fx < run_best_value) {
        run_best_value = fx;
        run_best = x;
      }
      if (fx < best_value) {
        best_value = fx;
        best = x;
        ++improvements;
      }
    }
  }

  OptimizationResult result{Schedule(best), best_value};
  result.iterations_used = iterations;
  result.improving_steps = improvements;
  const std::vector<double> mirrored(best.rbegin(), best.rend());
  if (max_abs_diff(mirrored, best) > 1e-9 && std::abs(f(mirrored) - best_value) < cfg.step_tol)
    result.mirrored_minimizer = Schedule(mirrored);
  return result;
}

}  // namespace detail

/// |x - a| + |x - b| >= |b - a|, the scalar step behind the 2/n lower bound,
/// up to the rounding of the three subtractions (equality holds for x between a and b).
inline bool triangle_kernel_holds(double x, double a, double b) {
  const double scale = std::max({std::abs(x), std::abs(a), std::abs(b)});
  return std::abs(x - a) + std::abs(x - b) >= std::abs(b - a) - 8 * std::numeric_limits<double>::epsilon() * scale;
}

/// Minimizes V_N over schedules of length n. The optimum is the uniform
/// schedule with value 2/n; every visited point is checked against that
/// lower bound.
inline OptimizationResult minimize_tv(std::size_t n, const OptimizerConfig& cfg = {}) {
  if (n < 2) fail(ErrorKind::invalid_input, "minimize_tv needs n >= 2");
  const double lower = 2.0 / static_cast<double>(n);
  const WeightObjective f = [n](const std::vector<double>& a) { return partial_variation(a, n); };
  // Subgradient with sign(0) = 0 at the kinks.
  const detail::Subgradient grad = [n](const std::vector<double>& a) {
    auto sign = [](double v) { return static_cast<double>((v > 0) - (v < 0)); };
    std::vector<double> g(n, 0.0);
    g[0] += 1.0;
    g[n - 1] += 1.0;
    for (std::size_t i = 0; i + 1 < n; ++i) {
      const double sgn = sign(a[i + 1] - a[i]);
      g[i + 1] += sgn;
      g[i] -= sgn;
    }
    return g;
  };
  const detail::VisitCheck check = [lower](const std::vector<double>&, double value) {
    if (value < lower - 1e-12)
      throw std::logic_error("total variation " + std::to_string(value) + " below 2/n = " +
                             std::to_string(lower));
  };
  auto result = detail::projected_subgradient(n, f, grad, cfg, check);
  result.near_uniform = detail::is_near_uniform(result.minimizer.weights(), 1e-4);
  return result;
}

/// Minimizes the weighted-schedule bound (total_rhs) over schedules of
/// length n for a coboundary generator. Subgradients are central
/// differences (one-sided next to the simplex boundary).
inline OptimizationResult minimize_bound_rhs(const PulseSystem& sys, std::size_t n,
                                             int i_max = kDefaultIMax, const OptimizerConfig& cfg = {}) {
  if (n < 2) fail(ErrorKind::invalid_input, "minimize_bound_rhs needs n >= 2");
  sys.validate();
  const UnitarySpectrum spec = spectrum(sys.u, sys.cluster_tol);
  detail::require_coboundary(spec, sys.generator);
  const double ty = std::abs(sys.t) * op_norm(yosida_split(spec, sys.generator).potential);
  const WeightObjective f = [ty, i_max](const std::vector<double>& a) {
    const auto s = detail::weighted_series(a, ty, i_max);
    return s.c_series_sum + s.tv_term;
  };
  constexpr double h = 1e-7;
  const detail::Subgradient grad = [&f, n](const std::vector<double>& a) {
    std::vector<double> g(n);
    std::vector<double> probe = a;
    const double f0 = f(a);
    for (std::size_t i = 0; i < n; ++i) {
      probe[i] = a[i] + h;
      const double up = f(probe);
      if (a[i] >= h) {
        probe[i] = a[i] - h;
        g[i] = (up - f(probe)) / (2 * h);
      } else {
        g[i] = (up - f0) / h;
      }
      probe[i] = a[i];
    }
    return g;
  };
  auto result = detail::projected_subgradient(n, f, grad, cfg, [](const auto&, double) {});
  result.near_uniform = detail::is_near_uniform(result.minimizer.weights(), 1e-4);
  return result;
}

/// Number of lattice points with spacing 1/k on the n-simplex, C(k + n - 1, n - 1).
inline double simplex_lattice_size(std::size_t n, std::size_t k) {
  double size = 1.0;
  for (std::size_t i = 1; i < n; ++i) size = size * static_cast<double>(k + i) / static_cast<double>(i);
  return size;
}

inline constexpr double kMaxLatticePoints = 5e6;

/// Exhaustive search over the lattice {k_i * resolution} of the simplex.
/// Vertices (a single weight equal to 1) are skipped. Ties keep the first
/// point in lexicographic order of (k_1, ..., k_n).
inline OptimizationResult brute_force_simplex_grid(std::size_t n, double resolution,
                                                   const ScheduleObjective& objective) {
  if (n < 2) fail(ErrorKind::invalid_input, "grid search needs n >= 2");
  OptimizerConfig probe_cfg;
  probe_cfg.grid_resolution = resolution;
  probe_cfg.validate();
  const auto k_total = static_cast<std::size_t>(std::llround(1.0 / resolution));
  const double size = simplex_lattice_size(n, k_total);
  if (size > kMaxLatticePoints)
    fail(ErrorKind::too_large_instance,
         "simplex lattice has " + std::to_string(static_cast<long long>(size)) + " points");

  std::vector<std::size_t> parts(n, 0);
  std::optional<Schedule> best;
  double best_value = std::numeric_limits<double>::infinity();
  int visited = 0;
  // Enumerate compositions of k_total into n parts recursively.
  std::function<void(std::size_t, std::size_t)> walk = [&](std::size_t pos, std::size_t remaining) {
    if (pos + 1 == n) {
      parts[pos] = remaining;
      if (std::any_of(parts.begin(), parts.end(), [&](auto p) { return p == k_total; })) return;
      std::vector<double> a(n);
      for (std::size_t i = 0; i < n; ++i)
        a[i] = static_cast<double>(parts[i]) / static_cast<double>(k_total);
      Schedule s(std::move(a));
      const double v = objective(s);
      ++visited;
      if (v < best_value) {
        best_value = v;
        best = std::move(s);
      }
      return;
    }
    for (std::size_t p = 0; p <= remaining; ++p) {
      parts[pos] = p;
      walk(pos + 1, remaining - p);
    }
  };
  walk(0, k_total);
  OptimizationResult result{*best, best_value};
  result.iterations_used = visited;
  result.near_uniform = detail::is_near_uniform(best->weights(), 1e-4);
  return result;
}

/// Marks `result` certified when its value is no worse than the best lattice
/// point and within `granularity` of it. Returns the lattice optimum.
inline OptimizationResult certify_with_grid(OptimizationResult& result, const ScheduleObjective& objective,
                                            double resolution, double granularity) {
  auto grid = brute_force_simplex_grid(result.minimizer.n(), resolution, objective);
  result.certified_by_grid =
      result.value <= grid.value + 1e-12 && grid.value - result.value <= granularity;
  return grid;
}

}  // namespace bangbang
