// SPDX-License-Identifier: Apache-2.0
//
// Mean-ergodic machinery for the conjugation map T(X) = u X u^+ on the full
// matrix space: spectral clustering of u, the projection P onto the
// commutant {X : [u, X] = 0}, plain and weighted Cesaro means, the splitting
// X = X_0 + W with W = Y - u Y u^+, and the coboundary solver.
//
// In finite dimension the mean-ergodic subspace is the whole matrix space,
// so every X is accepted.
#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <vector>

#include "bangbang/matrix.hpp"
#include "bangbang/schedule.hpp"

namespace bangbang {

inline constexpr double kDefaultClusterTol = 1e-8;
inline constexpr double kUnitarityTol = 1e-10;

struct SpectralCluster {
  double phase;  // representative eigenphase in [0, 2pi)
  CMatrix projector;
};

/// Clustered eigenphases of a unitary together with the orthogonal projectors
/// onto the corresponding invariant subspaces. Immutable once built.
class UnitarySpectrum {
 public:
  const std::vector<SpectralCluster>& clusters() const { return clusters_; }
  double cluster_tol() const { return cluster_tol_; }
  Eigen::Index dim() const { return basis_.rows(); }
  const CMatrix& unitary() const { return u_; }

  /// Orthonormal eigenbasis (columns) and the eigenvalue / cluster index of each column.
  const CMatrix& basis() const { return basis_; }
  const Eigen::VectorXcd& eigenvalues() const { return eigenvalues_; }
  const std::vector<std::size_t>& cluster_of() const { return cluster_of_; }

  /// Smallest |1 - l_j conj(l_k)| over eigenvalue pairs in different clusters
  /// (infinity when there is a single cluster).
  double min_cross_divisor() const {
    double g = std::numeric_limits<double>::infinity();
    for (Eigen::Index j = 0; j < dim(); ++j)
      for (Eigen::Index k = 0; k < dim(); ++k)
        if (cluster_of_[j] != cluster_of_[k])
          g = std::min(g, std::abs(1.0 - eigenvalues_(j) * std::conj(eigenvalues_(k))));
    return g;
  }

 private:
  friend UnitarySpectrum spectrum(const CMatrix& u, double cluster_tol);

  CMatrix u_;
  CMatrix basis_;
  Eigen::VectorXcd eigenvalues_;
  std::vector<std::size_t> cluster_of_;
  std::vector<SpectralCluster> clusters_;
  double cluster_tol_ = kDefaultClusterTol;
};

namespace detail {

inline double circular_distance(double a, double b) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  const double d = std::fmod(std::abs(a - b), two_pi);
  return std::min(d, two_pi - d);
}

inline double wrap_phase(double p) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  p = std::fmod(p, two_pi);
  if (p < 0) p += two_pi;
  if (p >= two_pi) p = 0.0;
  return p;
}

}  // namespace detail

/// Eigen-decomposes a unitary and groups eigenphases that lie within
/// `cluster_tol` of a neighbour. A linked chain whose total span exceeds
/// `cluster_tol` is rejected as ambiguous.
inline UnitarySpectrum spectrum(const CMatrix& u, double cluster_tol = kDefaultClusterTol) {
  require_valid(u, "u");
  if (!(cluster_tol >= 0) || !std::isfinite(cluster_tol))
    fail(ErrorKind::invalid_input, "cluster_tol must be finite and nonnegative");
  const double defect = unitarity_defect(u);
  if (!(defect < kUnitarityTol))
    fail(ErrorKind::invalid_input, "u is not unitary: ||u u^+ - I|| = " + std::to_string(defect));

  constexpr double two_pi = 2.0 * std::numbers::pi;
  const Eigen::Index n = u.rows();

  // A unitary is normal, so its complex Schur form is diagonal and the Schur
  // vectors are an orthonormal eigenbasis even for (nearly) repeated eigenvalues.
  Eigen::ComplexSchur<CMatrix> schur(u);
  UnitarySpectrum out;
  out.u_ = u;
  out.cluster_tol_ = cluster_tol;
  out.basis_ = schur.matrixU();
  out.eigenvalues_.resize(n);
  std::vector<double> phases(static_cast<std::size_t>(n));
  for (Eigen::Index k = 0; k < n; ++k) {
    const Complex lambda = schur.matrixT()(k, k);
    out.eigenvalues_(k) = lambda / std::abs(lambda);
    phases[k] = detail::wrap_phase(std::arg(lambda));
  }

  std::vector<std::size_t> order(phases.size());
  for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return phases[a] < phases[b]; });

  // Start the circular walk just after the widest gap so that no cluster
  // straddles the cut.
  std::size_t start = 0;
  double widest = -1.0;
  for (std::size_t k = 0; k < order.size(); ++k) {
    const double next = (k + 1 < order.size()) ? phases[order[k + 1]] : phases[order[0]] + two_pi;
    const double gap = next - phases[order[k]];
    if (gap > widest) {
      widest = gap;
      start = (k + 1) % order.size();
    }
  }

  std::vector<std::vector<std::size_t>> groups;
  double prev = 0.0;
  for (std::size_t step = 0; step < order.size(); ++step) {
    const std::size_t idx = order[(start + step) % order.size()];
    double p = phases[idx];
    if (step > 0 && p < prev) p += two_pi;
    if (step == 0 || p - prev > cluster_tol) groups.emplace_back();
    groups.back().push_back(idx);
    prev = p;
  }

  out.cluster_of_.assign(phases.size(), 0);
  for (std::size_t g = 0; g < groups.size(); ++g) {
    const auto& members = groups[g];
    double span = 0.0;
    for (auto a : members)
      for (auto b : members) span = std::max(span, detail::circular_distance(phases[a], phases[b]));
    if (span > cluster_tol) {
      std::ostringstream msg;
      msg.precision(17);
      msg << "phases linked within tol " << cluster_tol << " span " << span << ":";
      for (auto a : members) msg << ' ' << phases[a];
      fail(ErrorKind::clustering_ambiguity, msg.str());
    }
    Complex mean_direction = 0.0;
    CMatrix basis_block(n, static_cast<Eigen::Index>(members.size()));
    for (std::size_t c = 0; c < members.size(); ++c) {
      mean_direction += out.eigenvalues_(members[c]);
      basis_block.col(static_cast<Eigen::Index>(c)) = out.basis_.col(members[c]);
      out.cluster_of_[members[c]] = g;
    }
    out.clusters_.push_back({detail::wrap_phase(std::arg(mean_direction)),
                             basis_block * basis_block.adjoint()});
  }
  return out;
}

/// P(x) = sum_j Pi_j x Pi_j over the spectral clusters of u.
inline CMatrix commutant_project(const UnitarySpectrum& spec, const CMatrix& x) {
  require_valid(x, "x");
  require_same_dim(spec.unitary(), x, "commutant_project");
  CMatrix out = CMatrix::Zero(x.rows(), x.cols());
  for (const auto& c : spec.clusters()) out += c.projector * x * c.projector;
  return out;
}

namespace detail {

inline void require_cesaro_inputs(const CMatrix& u, const CMatrix& x) {
  require_valid(u, "u");
  require_valid(x, "x");
  require_same_dim(u, x, "Cesaro mean");
  const double defect = unitarity_defect(u);
  if (!(defect < kUnitarityTol))
    fail(ErrorKind::invalid_input, "u is not unitary: ||u u^+ - I|| = " + std::to_string(defect));
}

// Nearest unitary (polar factor).
inline CMatrix polar_unitary(const CMatrix& v) {
  Eigen::JacobiSVD<CMatrix> svd(v, Eigen::ComputeFullU | Eigen::ComputeFullV);
  return svd.matrixU() * svd.matrixV().adjoint();
}

inline constexpr std::size_t kReunitarizeEvery = 1024;

// Calls visit(i, u^i x u^{-i}) for i = 1..n, with the running power of u
// re-unitarized periodically.
template <class Visit>
void for_each_conjugate(const CMatrix& u, const CMatrix& x, std::size_t n, Visit&& visit) {
  CMatrix power = identity(u.rows());
  for (std::size_t i = 1; i <= n; ++i) {
    power = u * power;
    if (i % kReunitarizeEvery == 0) power = polar_unitary(power);
    const CMatrix term = power * x * power.adjoint();
    visit(i, term);
  }
}

}  // namespace detail

/// (1/n) sum_{k=1}^{n} u^k x u^{-k}.
inline CMatrix cesaro_mean(const CMatrix& u, const CMatrix& x, std::size_t n) {
  if (n == 0) fail(ErrorKind::invalid_input, "Cesaro mean needs n >= 1");
  detail::require_cesaro_inputs(u, x);
  CMatrix sum = CMatrix::Zero(x.rows(), x.cols());
  detail::for_each_conjugate(u, x, n, [&](std::size_t, const CMatrix& term) { sum += term; });
  return sum / static_cast<double>(n);
}

/// sum_{i=1}^{N} a_i u^i x u^{-i} for the weights a of `s`.
inline CMatrix weighted_cesaro_mean(const CMatrix& u, const CMatrix& x, const Schedule& s) {
  detail::require_cesaro_inputs(u, x);
  const auto& a = s.weights();
  CMatrix sum = CMatrix::Zero(x.rows(), x.cols());
  detail::for_each_conjugate(u, x, a.size(),
                             [&](std::size_t i, const CMatrix& term) { sum += a[i - 1] * term; });
  return sum;
}

struct YosidaSplit {
  CMatrix fixed_part;       // X_0, commutes with u
  CMatrix coboundary_part;  // W = X - X_0
  CMatrix potential;        // Y with W = Y - u Y u^+, no commutant component
};

/// Solves w = Y - u Y u^+ for Y. In the eigenbasis of u this is
/// Y_jk = w_jk / (1 - l_j conj(l_k)) on cross-cluster entries; the commutant
/// component of Y (the gauge freedom) is set to zero.
inline CMatrix solve_coboundary(const UnitarySpectrum& spec, const CMatrix& w) {
  require_valid(w, "w");
  require_same_dim(spec.unitary(), w, "solve_coboundary");
  const double residual = op_norm(commutant_project(spec, w));
  if (residual > 1e-8 * std::max(1.0, op_norm(w)))
    fail(ErrorKind::not_a_coboundary,
         "w has a commutant component of norm " + std::to_string(residual));
  const CMatrix& q = spec.basis();
  const auto& lambda = spec.eigenvalues();
  const auto& label = spec.cluster_of();
  CMatrix y = q.adjoint() * w * q;
  for (Eigen::Index k = 0; k < y.cols(); ++k)
    for (Eigen::Index j = 0; j < y.rows(); ++j) {
      if (label[j] == label[k])
        y(j, k) = 0.0;
      else
        y(j, k) /= (1.0 - lambda(j) * std::conj(lambda(k)));
    }
  return q * y * q.adjoint();
}

inline YosidaSplit yosida_split(const UnitarySpectrum& spec, const CMatrix& x) {
  YosidaSplit out;
  out.fixed_part = commutant_project(spec, x);
  out.coboundary_part = x - out.fixed_part;
  out.potential = solve_coboundary(spec, out.coboundary_part);
  return out;
}

}  // namespace bangbang
