// SPDX-License-Identifier: Apache-2.0
//
// Pulse schedules: rows a_{N,1..N} of the weight matrix used for
// non-equidistant control, their generators, and the total-variation
// functional V_N = a_1 + sum |a_{i+1} - a_i| + a_N.
//
// Rows are truncated at i = N (a_{N,i} = 0 for i > N).
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "bangbang/error.hpp"

namespace bangbang {

inline constexpr double kWeightSumTol = 1e-12;
inline constexpr double kMaxWeight = 1.0 - 1e-12;

namespace detail {

// Neumaier compensated sum.
inline double compensated_sum(const std::vector<double>& v) {
  double sum = 0.0;
  double comp = 0.0;
  for (double x : v) {
    const double t = sum + x;
    if (std::abs(sum) >= std::abs(x))
      comp += (sum - t) + x;
    else
      comp += (x - t) + sum;
    sum = t;
  }
  return sum + comp;
}

}  // namespace detail

/// One row of the weight matrix: 0 <= a_i < 1 and sum a_i = 1.
class Schedule {
 public:
  explicit Schedule(std::vector<double> weights) : weights_(std::move(weights)) {
    if (weights_.empty()) fail(ErrorKind::invalid_input, "schedule needs at least one weight");
    for (std::size_t i = 0; i < weights_.size(); ++i) {
      const double a = weights_[i];
      if (!std::isfinite(a) || a < 0.0)
        fail(ErrorKind::invalid_input,
             "weight a_" + std::to_string(i + 1) + " = " + std::to_string(a) + " is not >= 0");
      if (a >= 1.0)
        fail(weights_.size() == 1 ? ErrorKind::boundary_case : ErrorKind::invalid_input,
             "weight a_" + std::to_string(i + 1) + " = " + std::to_string(a) +
                 " violates a < 1 (a single-pulse schedule is excluded)");
    }
    const double sum = detail::compensated_sum(weights_);
    if (std::abs(sum - 1.0) > kWeightSumTol)
      fail(ErrorKind::invalid_input, "weights sum to " + std::to_string(sum) + ", not 1");
  }

  std::size_t n() const { return weights_.size(); }
  const std::vector<double>& weights() const { return weights_; }
  double operator[](std::size_t i) const { return weights_[i]; }

  Schedule reversed() const { return Schedule(std::vector<double>(weights_.rbegin(), weights_.rend())); }

  friend bool operator==(const Schedule&, const Schedule&) = default;

 private:
  std::vector<double> weights_;
};

/// Equal weights 1/n. n = 1 is rejected (the single weight would be 1).
inline Schedule equidistant(std::size_t n) {
  if (n == 0) fail(ErrorKind::invalid_input, "n must be >= 1");
  if (n == 1) fail(ErrorKind::boundary_case, "n = 1 gives weight 1, which violates a < 1");
  return Schedule(std::vector<double>(n, 1.0 / static_cast<double>(n)));
}

/// Gauss-Legendre nodes and weights on [-1, 1].
inline std::pair<std::vector<double>, std::vector<double>> gauss_legendre(int points) {
  if (points < 1) fail(ErrorKind::invalid_input, "quadrature needs at least one node");
  std::vector<double> nodes(points), weights(points);
  for (int k = 0; k < (points + 1) / 2; ++k) {
    double z = std::cos(std::numbers::pi * (k + 0.75) / (points + 0.5));
    double deriv = 1.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p1 = 1.0, p2 = 0.0;
      for (int j = 1; j <= points; ++j) {
        const double p3 = p2;
        p2 = p1;
        p1 = ((2.0 * j - 1.0) * z * p2 - (j - 1.0) * p3) / j;
      }
      deriv = points * (z * p1 - p2) / (z * z - 1.0);
      const double step = p1 / deriv;
      z -= step;
      if (std::abs(step) < 1e-15) break;
    }
    nodes[k] = -z;
    nodes[points - 1 - k] = z;
    weights[k] = weights[points - 1 - k] = 2.0 / ((1.0 - z * z) * deriv * deriv);
  }
  return {nodes, weights};
}

using Density = std::function<double(double)>;

inline constexpr int kDefaultQuadPoints = 64;

/// a_i = integral of f over [(i-1)/n, i/n], by composite Gauss-Legendre with
/// `quad_points` nodes per panel, renormalized to sum exactly to 1.
inline Schedule from_density(const Density& f, std::size_t n, int quad_points = kDefaultQuadPoints) {
  if (n == 0) fail(ErrorKind::invalid_input, "n must be >= 1");
  const auto [nodes, qw] = gauss_legendre(quad_points);
  const double h = 1.0 / static_cast<double>(n);
  std::vector<double> a(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double lo = static_cast<double>(i) * h;
    double panel = 0.0;
    for (int q = 0; q < quad_points; ++q) {
      const double x = lo + 0.5 * h * (nodes[q] + 1.0);
      const double fx = f(x);
      if (!std::isfinite(fx) || fx < 0.0)
        fail(ErrorKind::invalid_density,
             "density is negative or non-finite at x = " + std::to_string(x));
      panel += qw[q] * fx;
    }
    a[i] = 0.5 * h * panel;
  }
  const double total = detail::compensated_sum(a);
  if (std::abs(total - 1.0) > 1e-6)
    fail(ErrorKind::invalid_density, "density integrates to " + std::to_string(total) + ", not 1");
  for (auto& w : a) w /= total;
  // Fold the last rounding residue into the largest weight.
  const double residue = 1.0 - detail::compensated_sum(a);
  auto largest = std::max_element(a.begin(), a.end());
  *largest += residue;
  if (n == 1) fail(ErrorKind::boundary_case, "n = 1 gives weight 1, which violates a < 1");
  return Schedule(std::move(a));
}

/// f(x) = (pi/2) sin(pi x).
inline double uhrig_density(double x) { return 0.5 * std::numbers::pi * std::sin(std::numbers::pi * x); }

inline double uniform_density(double) { return 1.0; }

/// Piecewise-linear density through equally spaced samples on [0, 1].
inline Density tabulated_density(std::vector<double> samples) {
  if (samples.size() < 2) fail(ErrorKind::invalid_density, "density table needs >= 2 samples");
  for (double s : samples)
    if (!std::isfinite(s) || s < 0.0) fail(ErrorKind::invalid_density, "density table has a negative sample");
  auto table = std::make_shared<const std::vector<double>>(std::move(samples));
  return [table](double x) {
    const auto& t = *table;
    const double pos = std::clamp(x, 0.0, 1.0) * static_cast<double>(t.size() - 1);
    const auto k = std::min(static_cast<std::size_t>(pos), t.size() - 2);
    const double frac = pos - static_cast<double>(k);
    return t[k] * (1.0 - frac) + t[k + 1] * frac;
  };
}

namespace detail {

// Numerators k_i of a_i = k_i / n^2 for the pathological rows.
inline std::vector<std::int64_t> pathological_numerators(std::int64_t n) {
  std::vector<std::int64_t> k(static_cast<std::size_t>(n));
  const bool even = n % 2 == 0;
  const std::int64_t alternating = even ? n : n - 1;
  for (std::int64_t i = 0; i < alternating; ++i) k[i] = (i % 2 == 0) ? 2 * n - 1 : 1;
  if (!even) k[n - 1] = n;
  return k;
}

}  // namespace detail

/// Rows that satisfy every Cohen hypothesis except uniform tail decay:
/// even n: (2n-1)/n^2, 1/n^2, ..., (2n-1)/n^2, 1/n^2;
/// odd n:  (2n-1)/n^2, 1/n^2, ..., 1/n^2, 1/n.
inline Schedule pathological(std::size_t n) {
  if (n < 2) fail(ErrorKind::invalid_input, "pathological schedule needs n >= 2");
  const auto nn = static_cast<std::int64_t>(n);
  const auto k = detail::pathological_numerators(nn);
  const double denom = static_cast<double>(nn * nn);
  std::vector<double> a(n);
  for (std::size_t i = 0; i < n; ++i) a[i] = static_cast<double>(k[i]) / denom;
  return Schedule(std::move(a));
}

struct Rational {
  std::int64_t num;
  std::int64_t den;
};

/// V_N of pathological(n), in exact integer arithmetic (denominator n^2).
inline Rational pathological_tv_exact(std::size_t n) {
  if (n < 2) fail(ErrorKind::invalid_input, "pathological schedule needs n >= 2");
  const auto nn = static_cast<std::int64_t>(n);
  const auto k = detail::pathological_numerators(nn);
  std::int64_t v = k.front() + k.back();
  for (std::size_t i = 0; i + 1 < k.size(); ++i) v += std::abs(k[i + 1] - k[i]);
  return {v, nn * nn};
}

/// a_1 + sum_{k=1}^{m-1} |a_{k+1} - a_k| + a_m over the first m weights.
inline double partial_variation(const std::vector<double>& a, std::size_t m) {
  if (m == 0 || m > a.size()) fail(ErrorKind::invalid_input, "partial variation index out of range");
  double v = a[0] + a[m - 1];
  for (std::size_t k = 0; k + 1 < m; ++k) v += std::abs(a[k + 1] - a[k]);
  return v;
}

/// V_N = a_1 + sum_{i=1}^{N-1} |a_{i+1} - a_i| + a_N.
inline double tv_functional(const Schedule& s) { return partial_variation(s.weights(), s.n()); }

/// A rule producing one schedule per pulse count N.
class ScheduleFamily {
 public:
  enum class Kind { equidistant, density, pathological, custom };

  static ScheduleFamily make_equidistant() { return ScheduleFamily(Kind::equidistant, "uniform"); }
  static ScheduleFamily make_pathological() { return ScheduleFamily(Kind::pathological, "pathological"); }
  static ScheduleFamily make_density(Density f, std::string name, int quad_points = kDefaultQuadPoints) {
    ScheduleFamily fam(Kind::density, std::move(name));
    fam.density_ = std::move(f);
    fam.quad_points_ = quad_points;
    return fam;
  }
  static ScheduleFamily make_uhrig() { return make_density(uhrig_density, "uhrig"); }
  static ScheduleFamily make_custom(std::map<std::size_t, Schedule> table, std::string name = "custom") {
    ScheduleFamily fam(Kind::custom, std::move(name));
    fam.table_ = std::make_shared<const std::map<std::size_t, Schedule>>(std::move(table));
    return fam;
  }

  Kind kind() const { return kind_; }
  const std::string& name() const { return name_; }

  Schedule at(std::size_t n) const {
    switch (kind_) {
      case Kind::equidistant: return equidistant(n);
      case Kind::pathological: return pathological(n);
      case Kind::density: return from_density(density_, n, quad_points_);
      case Kind::custom: {
        const auto it = table_->find(n);
        if (it == table_->end())
          fail(ErrorKind::invalid_input, "custom family has no row for N = " + std::to_string(n));
        return it->second;
      }
    }
    fail(ErrorKind::invalid_input, "unknown family kind");
  }

 private:
  ScheduleFamily(Kind kind, std::string name) : kind_(kind), name_(std::move(name)) {}

  Kind kind_;
  std::string name_;
  Density density_;
  int quad_points_ = kDefaultQuadPoints;
  std::shared_ptr<const std::map<std::size_t, Schedule>> table_;
};

/// Cutoff on the final V_N above which the probe reports a violation.
inline constexpr double kUniformityCutoff = 0.5;

struct UniformityReport {
  std::vector<std::size_t> k_grid;
  std::vector<double> tail_sup;  // sup_N sum_{i>=k} |a_{N,i+1} - a_{N,i}|, per k
  std::vector<std::size_t> n_grid;
  std::vector<double> tv_sequence;  // V_N per N in n_grid
  bool violates_uniform = false;
  double cutoff = kUniformityCutoff;
};

inline const char* verdict_name(const UniformityReport& r) {
  return r.violates_uniform ? "violates-uniform" : "consistent-with-uniform";
}

/// Geometric grid 2, 4, 8, ... capped by and ending at n_max.
inline std::vector<std::size_t> geometric_grid(std::size_t n_min, std::size_t n_max) {
  std::vector<std::size_t> grid;
  for (std::size_t n = n_min; n < n_max; n *= 2) grid.push_back(n);
  grid.push_back(n_max);
  return grid;
}

/// Numerical evidence for the uniform tail-variation condition. Tail sums use
/// the truncated row (a_{N,N+1} = 0), so the i = N term contributes a_N. The
/// supremum and the V_N sequence run over the geometric grid 2, 4, ..., n_max;
/// the verdict is a violation when the final V_N exceeds `cutoff`.
inline UniformityReport cohen_uniformity_probe(const ScheduleFamily& family, std::size_t n_max,
                                               const std::vector<std::size_t>& k_grid) {
  if (n_max < 2) fail(ErrorKind::invalid_input, "n_max must be >= 2");
  for (std::size_t k : k_grid)
    if (k == 0 || k > n_max)
      fail(ErrorKind::invalid_input, "k_grid entries must lie in [1, n_max]");
  UniformityReport r;
  r.k_grid = k_grid;
  r.tail_sup.assign(k_grid.size(), 0.0);
  r.n_grid = geometric_grid(2, n_max);
  for (std::size_t n : r.n_grid) {
    const Schedule s = family.at(n);
    const auto& a = s.weights();
    r.tv_sequence.push_back(tv_functional(s));
    // suffix[i] = sum_{m >= i} |a_{m+1} - a_m| with a_{n} (0-based) = 0.
    std::vector<double> suffix(n + 1, 0.0);
    for (std::size_t i = n; i-- > 0;) {
      const double next = (i + 1 < n) ? a[i + 1] : 0.0;
      suffix[i] = suffix[i + 1] + std::abs(next - a[i]);
    }
    for (std::size_t g = 0; g < k_grid.size(); ++g) {
      const std::size_t k = k_grid[g];
      const double tail = (k <= n) ? suffix[k - 1] : 0.0;
      r.tail_sup[g] = std::max(r.tail_sup[g], tail);
    }
  }
  r.violates_uniform = r.tv_sequence.back() > r.cutoff;
  return r;
}

}  // namespace bangbang
