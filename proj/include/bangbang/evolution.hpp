// SPDX-License-Identifier: Apache-2.0
//
// Controlled evolutions u e^{a_1 X t} u e^{a_2 X t} ... u e^{a_N X t}, their
// distance to the projected limit e^{P(X) t} u^N, and the explicit error-bound
// constants for the equidistant (M, M') and weighted (C^(i,n) series) cases.
//
// Factors are written left to right exactly as in the product: u first, then
// e^{a_1 X t}, then u, ... When the product acts on a state the rightmost
// factor e^{a_N X t} is applied first.
#pragma once

#include <cmath>
#include <complex>
#include <optional>
#include <string>
#include <vector>

#include "bangbang/ergodic.hpp"
#include "bangbang/matrix.hpp"
#include "bangbang/schedule.hpp"

namespace bangbang {

inline constexpr int kDefaultIMax = 40;

/// Pulse unitary u, generator X (X = -iH for Hamiltonian control) and total
/// time t, which may be complex.
struct PulseSystem {
  CMatrix u;
  CMatrix generator;
  Complex t{1.0, 0.0};
  double cluster_tol = kDefaultClusterTol;

  void validate() const {
    require_valid(u, "u");
    require_valid(generator, "generator");
    require_same_dim(u, generator, "pulse system");
    if (!std::isfinite(t.real()) || !std::isfinite(t.imag()))
      fail(ErrorKind::invalid_input, "t must be finite");
    const double defect = unitarity_defect(u);
    if (!(defect < kUnitarityTol))
      fail(ErrorKind::invalid_input, "u is not unitary: ||u u^+ - I|| = " + std::to_string(defect));
  }
};

/// Builds X = -iH.
inline PulseSystem hamiltonian_system(CMatrix u, const CMatrix& h, Complex t) {
  return PulseSystem{std::move(u), Complex(0.0, -1.0) * h, t};
}

/// The ordered product u e^{a_1 X t} u e^{a_2 X t} ... u e^{a_N X t}.
inline CMatrix pulse_product(const PulseSystem& sys, const Schedule& s) {
  sys.validate();
  const auto& a = s.weights();
  CMatrix product = identity(sys.u.rows());
  std::optional<double> cached_weight;
  CMatrix cached_step;
  for (double w : a) {
    if (!cached_weight || *cached_weight != w) {
      cached_step = sys.u * expm(sys.generator * (w * sys.t));
      cached_weight = w;
    }
    product = product * cached_step;
  }
  return product;
}

/// e^{P(X) t} u^n.
inline CMatrix limit_evolution(const PulseSystem& sys, std::size_t n) {
  sys.validate();
  const UnitarySpectrum spec = spectrum(sys.u, sys.cluster_tol);
  const CMatrix px = commutant_project(spec, sys.generator);
  return expm(px * sys.t) * matrix_power(sys.u, n);
}

/// ||pulse_product - limit_evolution||_op.
inline double control_error(const PulseSystem& sys, const Schedule& s) {
  return op_norm(pulse_product(sys, s) - limit_evolution(sys, s.n()));
}

/// Constants of the explicit bounds. Fields not produced by a given routine
/// stay zero.
struct BoundBreakdown {
  double m_const = 0.0;        // M = 4|t|^2 e^{2|t| ||Y||} ||Y||^2 + 2 ||Y|| |t|
  double m_prime_const = 0.0;  // M' = e^{||X|| |t|} [M + 2|t|^2 ||Y|| (2||Y|| + 3||X_0||)]
  double tv_term = 0.0;        // e^{||Y|| V_N |t|} - 1
  double c_series_sum = 0.0;   // C^(i,n) double sum
  double total_rhs = 0.0;      // c_series_sum + tv_term
  double y_norm = 0.0;
  double x0_norm = 0.0;
  double x_norm = 0.0;
  std::string y_convention = "minimal-norm";  // commutant component of Y set to zero
};

namespace detail {

inline BoundBreakdown equidistant_constants(const YosidaSplit& split, const CMatrix& x, Complex t) {
  BoundBreakdown b;
  b.y_norm = op_norm(split.potential);
  b.x0_norm = op_norm(split.fixed_part);
  b.x_norm = op_norm(x);
  const double at = std::abs(t);
  const double y = b.y_norm;
  b.m_const = 4.0 * at * at * std::exp(2.0 * at * y) * y * y + 2.0 * y * at;
  b.m_prime_const =
      std::exp(b.x_norm * at) * (b.m_const + 2.0 * at * at * y * (2.0 * y + 3.0 * b.x0_norm));
  return b;
}

}  // namespace detail

/// M and M' for the equidistant bound, from the minimal-norm potential Y of
/// the coboundary part of X.
inline BoundBreakdown theorem2_constants(const PulseSystem& sys) {
  sys.validate();
  const UnitarySpectrum spec = spectrum(sys.u, sys.cluster_tol);
  return detail::equidistant_constants(yosida_split(spec, sys.generator), sys.generator, sys.t);
}

namespace detail {

// C^(i,n) given the partial variation V_n = a_1 + sum_{k<n} |a_{k+1} - a_k| + a_n.
inline double c_coefficient_with(const std::vector<double>& a, int i, std::size_t n, double partial_v,
                                 const std::vector<std::vector<double>>& binom) {
  double acc = 0.0;
  if (n == 1) {
    for (int j = 1; j < i; ++j)
      acc += (binom[i][j] - 1.0) * std::pow(a[0], j) * std::pow(a[1], i - j);
    return std::ldexp(acc, i);
  }
  const double next = a[n];  // a_{n+1}
  for (int j = 1; j < i; ++j)
    acc += (binom[i][j] - 1.0) * std::ldexp(std::pow(next, i - j), i - j) * std::pow(partial_v, j);
  return acc;
}

}  // namespace detail

/// C^(i,n) for i >= 2 and 1 <= n <= N - 1:
///   n = 1: 2^i sum_{j=1}^{i-1} [C(i,j) - 1] a_1^j a_2^{i-j}
///   n > 1: sum_{j=1}^{i-1} [C(i,j) - 1] 2^{i-j} a_{n+1}^{i-j} V_n^j
inline double c_coefficient(const Schedule& s, int i, std::size_t n) {
  if (i < 2) fail(ErrorKind::invalid_input, "C^(i,n) needs i >= 2");
  if (n < 1 || n + 1 > s.n())
    fail(ErrorKind::invalid_input, "C^(i,n) needs 1 <= n <= N-1, got n = " + std::to_string(n));
  const auto& binom = detail::binomials(i);
  const auto& a = s.weights();
  const double v = (n > 1) ? partial_variation(a, n) : 0.0;
  return detail::c_coefficient_with(a, i, n, v, binom);
}

namespace detail {

struct WeightedSeries {
  double c_series_sum;
  double tv_term;
};

// The C^(i,n) double sum and the closed-form V_N term for raw weights `a`
// (N = a.size() >= 2) and ty = |t| ||Y||.
inline WeightedSeries weighted_series(const std::vector<double>& a, double ty, int i_max) {
  const auto& binom = binomials(i_max);
  const std::size_t big_n = a.size();
  double inner_sum = 0.0;  // sum_{k=1}^{N-2} S_k
  double last = 0.0;       // S_{N-1}
  double partial_v = a[0] + a[0];  // V_1, updated incrementally
  for (std::size_t n = 1; n + 1 <= big_n; ++n) {
    if (n > 1) partial_v = partial_v - a[n - 2] + std::abs(a[n - 1] - a[n - 2]) + a[n - 1];
    double series = 0.0;
    double coeff = ty * ty / 2.0;  // (|t| ||Y||)^i / i!
    for (int i = 2; i <= i_max; ++i) {
      if (i > 2) coeff *= ty / i;
      series += 2.0 * coeff * c_coefficient_with(a, i, n, partial_v, binom);
    }
    // The terms of S_n are (2/i!) sum_j [C(i,j)-1] x^j y^{i-j} with these norms.
    const double x = (n == 1) ? 2.0 * a[0] * ty : partial_v * ty;
    const double y = 2.0 * a[n] * ty;
    series += defect_tail(x, y, i_max);
    if (n + 1 < big_n)
      inner_sum += series;
    else
      last = series;
  }
  return {std::exp(2.0 * ty) * inner_sum + last, std::expm1(ty * partial_variation(a, big_n))};
}

inline void require_coboundary(const UnitarySpectrum& spec, const CMatrix& x) {
  const double p_norm = op_norm(commutant_project(spec, x));
  if (p_norm > 1e-8 * std::max(1.0, op_norm(x)))
    fail(ErrorKind::domain, "the weighted bound applies to coboundary generators only; ||P(X)|| = " +
                                std::to_string(p_norm) + " (split X with yosida_split first)");
}

}  // namespace detail

/// Right-hand side of the weighted-schedule bound for a coboundary X = Y - uYu^+:
///   e^{2|t| ||Y||} sum_{k=1}^{N-2} S_k + S_{N-1} + (e^{||Y|| V_N |t|} - 1),
///   S_k = sum_{i>=2} (2 |t|^i / i!) C^(i,k) ||Y||^i,
/// with each S_k truncated at i_max and closed by a tail majorant.
/// M and M' are filled in as well.
inline BoundBreakdown theorem4_bound_rhs(const PulseSystem& sys, const Schedule& s,
                                         int i_max = kDefaultIMax) {
  sys.validate();
  if (i_max < 2) fail(ErrorKind::invalid_input, "i_max must be >= 2");
  if (s.n() < 2) fail(ErrorKind::invalid_input, "schedule needs N >= 2");
  const UnitarySpectrum spec = spectrum(sys.u, sys.cluster_tol);
  detail::require_coboundary(spec, sys.generator);
  BoundBreakdown b =
      detail::equidistant_constants(yosida_split(spec, sys.generator), sys.generator, sys.t);
  const auto series = detail::weighted_series(s.weights(), std::abs(sys.t) * b.y_norm, i_max);
  b.c_series_sum = series.c_series_sum;
  b.tv_term = series.tv_term;
  b.total_rhs = b.c_series_sum + b.tv_term;
  return b;
}

/// Least-squares slope of log(error) against log(N).
inline std::optional<double> loglog_slope(const std::vector<std::size_t>& n_values,
                                          const std::vector<double>& errors) {
  if (n_values.size() < 2 || n_values.size() != errors.size()) return std::nullopt;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double m = static_cast<double>(n_values.size());
  for (std::size_t k = 0; k < n_values.size(); ++k) {
    if (!(errors[k] > 0.0) || !std::isfinite(errors[k])) return std::nullopt;
    const double x = std::log(static_cast<double>(n_values[k]));
    const double y = std::log(errors[k]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double denom = m * sxx - sx * sx;
  if (denom == 0.0) return std::nullopt;
  return (m * sxy - sx * sy) / denom;
}

struct ConvergenceReport {
  std::vector<std::size_t> n_values;
  std::vector<double> errors;
  std::vector<bool> in_slope_window;
  std::optional<double> fitted_slope;  // empty when X commutes with u or an error is zero
  std::vector<std::optional<BoundBreakdown>> bounds;  // per N; empty entries when not applicable
  bool coboundary = false;
};

/// control_error over a grid of N, a log-log slope fitted over the upper half
/// of the grid, and bound breakdowns: the full weighted bound when X is a
/// coboundary, otherwise M and M' alone for the equidistant family.
inline ConvergenceReport convergence_sweep(const PulseSystem& sys, const ScheduleFamily& family,
                                           const std::vector<std::size_t>& n_values,
                                           int i_max = kDefaultIMax) {
  sys.validate();
  if (n_values.size() < 3)
    fail(ErrorKind::invalid_input, "a sweep needs at least 3 values of N to fit a slope");
  for (std::size_t k = 0; k < n_values.size(); ++k) {
    if (n_values[k] < 2) fail(ErrorKind::invalid_input, "every N must be >= 2");
    if (k > 0 && n_values[k] <= n_values[k - 1])
      fail(ErrorKind::invalid_input, "N values must be strictly increasing");
  }
  const UnitarySpectrum spec = spectrum(sys.u, sys.cluster_tol);
  const double p_norm = op_norm(commutant_project(spec, sys.generator));
  const bool coboundary = p_norm <= 1e-8 * std::max(1.0, op_norm(sys.generator));
  const bool equidistant_family = family.kind() == ScheduleFamily::Kind::equidistant;
  const bool commuting = op_norm(commutator(sys.u, sys.generator)) <=
                         1e-12 * std::max(1.0, op_norm(sys.generator));

  ConvergenceReport r;
  r.coboundary = coboundary;
  r.n_values = n_values;
  const std::size_t window_start = n_values.size() / 2;
  for (std::size_t k = 0; k < n_values.size(); ++k) {
    const Schedule s = family.at(n_values[k]);
    r.errors.push_back(control_error(sys, s));
    r.in_slope_window.push_back(k >= window_start);
    if (coboundary)
      r.bounds.emplace_back(theorem4_bound_rhs(sys, s, i_max));
    else if (equidistant_family)
      r.bounds.emplace_back(theorem2_constants(sys));
    else
      r.bounds.emplace_back(std::nullopt);
  }
  if (commuting) return r;
  r.fitted_slope = loglog_slope(
      std::vector<std::size_t>(n_values.begin() + static_cast<std::ptrdiff_t>(window_start), n_values.end()),
      std::vector<double>(r.errors.begin() + static_cast<std::ptrdiff_t>(window_start), r.errors.end()));
  return r;
}

}  // namespace bangbang
