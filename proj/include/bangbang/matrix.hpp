// SPDX-License-Identifier: Apache-2.0
//
// Dense complex matrix substrate: operator norm, matrix exponential, the
// Taylor-series defect bound for e^A e^B against e^{A+B}, and seeded test
// fixtures (random unitaries with separated spectra).
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "bangbang/error.hpp"

namespace bangbang {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;

inline bool all_finite(const CMatrix& m) {
  for (Eigen::Index j = 0; j < m.cols(); ++j)
    for (Eigen::Index i = 0; i < m.rows(); ++i)
      if (!std::isfinite(m(i, j).real()) || !std::isfinite(m(i, j).imag())) return false;
  return true;
}

/// Throws invalid-input unless `m` is a nonempty square matrix of finite entries.
inline void require_valid(const CMatrix& m, const char* what = "matrix") {
  if (m.rows() == 0 || m.rows() != m.cols())
    fail(ErrorKind::invalid_input, std::string(what) + " must be a nonempty square matrix, got " +
                                       std::to_string(m.rows()) + "x" + std::to_string(m.cols()));
  if (!all_finite(m)) fail(ErrorKind::invalid_input, std::string(what) + " has non-finite entries");
}

inline void require_same_dim(const CMatrix& a, const CMatrix& b, const char* what) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    fail(ErrorKind::invalid_input, std::string("dimension mismatch in ") + what + ": " +
                                       std::to_string(a.rows()) + " vs " + std::to_string(b.rows()));
}

inline CMatrix identity(Eigen::Index dim) { return CMatrix::Identity(dim, dim); }

/// Largest singular value.
inline double op_norm(const CMatrix& m) {
  require_valid(m);
  Eigen::JacobiSVD<CMatrix> svd(m);
  return svd.singularValues()(0);
}

inline CMatrix commutator(const CMatrix& a, const CMatrix& b) { return a * b - b * a; }

/// Distance of u from the unitary group, measured as ||u u^+ - I||_op.
inline double unitarity_defect(const CMatrix& u) {
  return op_norm(u * u.adjoint() - identity(u.rows()));
}

/// Integer power by repeated squaring.
inline CMatrix matrix_power(const CMatrix& m, std::uint64_t n) {
  CMatrix result = identity(m.rows());
  CMatrix base = m;
  while (n > 0) {
    if (n & 1u) result = result * base;
    n >>= 1u;
    if (n > 0) base = base * base;
  }
  return result;
}

namespace detail {

// Coefficients of the degree-13 diagonal Pade approximant to exp.
inline constexpr std::array<double, 14> kPade13 = {
    64764752532480000.0, 32382376266240000.0, 7771770303897600.0, 1187353796428800.0,
    129060195264000.0,   10559470521600.0,    670442572800.0,     33522128640.0,
    1323241920.0,        40840800.0,          960960.0,           16380.0,
    182.0,               1.0};

inline constexpr double kTheta13 = 5.371920351148152;

inline double one_norm(const CMatrix& m) { return m.cwiseAbs().colwise().sum().maxCoeff(); }

inline CMatrix expm_pade13(const CMatrix& a) {
  const Eigen::Index n = a.rows();
  const double norm1 = one_norm(a);
  int squarings = 0;
  if (norm1 > kTheta13) squarings = static_cast<int>(std::ceil(std::log2(norm1 / kTheta13)));
  const CMatrix s = a / std::ldexp(1.0, squarings);

  const auto& b = kPade13;
  const CMatrix id = identity(n);
  const CMatrix s2 = s * s;
  const CMatrix s4 = s2 * s2;
  const CMatrix s6 = s4 * s2;
  const CMatrix u_inner = s6 * (b[13] * s6 + b[11] * s4 + b[9] * s2) + b[7] * s6 + b[5] * s4 +
                          b[3] * s2 + b[1] * id;
  const CMatrix u = s * u_inner;
  const CMatrix v =
      s6 * (b[12] * s6 + b[10] * s4 + b[8] * s2) + b[6] * s6 + b[4] * s4 + b[2] * s2 + b[0] * id;
  CMatrix r = (v - u).partialPivLu().solve(v + u);
  for (int k = 0; k < squarings; ++k) r = r * r;
  return r;
}

// Returns false when the Schur form is not numerically diagonal, in which
// case the caller falls back to the rational approximant.
inline bool expm_normal(const CMatrix& a, CMatrix& out) {
  Eigen::ComplexSchur<CMatrix> schur(a);
  const CMatrix& t = schur.matrixT();
  const double scale = std::max(1.0, t.cwiseAbs().maxCoeff());
  for (Eigen::Index j = 0; j < t.cols(); ++j)
    for (Eigen::Index i = 0; i < j; ++i)
      if (std::abs(t(i, j)) > 1e-14 * scale) return false;
  const CMatrix& q = schur.matrixU();
  Eigen::VectorXcd d(t.rows());
  for (Eigen::Index i = 0; i < t.rows(); ++i) d(i) = std::exp(t(i, i));
  out = q * d.asDiagonal() * q.adjoint();
  return true;
}

}  // namespace detail

/// True when ||m m^+ - m^+ m||_op < 1e-12 (relative to ||m||^2 for large m).
inline bool is_normal(const CMatrix& m) {
  const CMatrix c = m * m.adjoint() - m.adjoint() * m;
  const double scale = std::max(1.0, m.squaredNorm());
  Eigen::JacobiSVD<CMatrix> svd(c);
  return svd.singularValues()(0) < 1e-12 * scale;
}

/// Matrix exponential. Normal inputs go through a Schur (eigen) decomposition,
/// everything else through scaling and squaring with the degree-13 Pade
/// approximant.
inline CMatrix expm(const CMatrix& m) {
  require_valid(m);
  if (m.isZero(0.0)) return identity(m.rows());
  if (is_normal(m)) {
    CMatrix out;
    if (detail::expm_normal(m, out)) return out;
  }
  return detail::expm_pade13(m);
}

/// Majorant for sum_{i > i_max} s^i / i!, inflated by e^s:
///   e^s * s^{i_max+1} / (i_max+1)! * (i_max+2) / (i_max+2-s).
/// Requires s < i_max + 2.
inline double exp_tail_majorant(double s, int i_max) {
  if (s < 0 || !std::isfinite(s)) fail(ErrorKind::invalid_input, "tail majorant needs finite s >= 0");
  if (s == 0.0) return 0.0;
  if (s >= i_max + 2.0)
    fail(ErrorKind::invalid_input, "tail majorant needs s < i_max + 2 (s = " + std::to_string(s) +
                                       ", i_max = " + std::to_string(i_max) + ")");
  const double m1 = i_max + 1.0;
  const double log_term = m1 * std::log(s) - std::lgamma(m1 + 1.0) + s;
  return std::exp(log_term) * (i_max + 2.0) / (i_max + 2.0 - s);
}

namespace detail {

// Binomial coefficients C(i, j) for 0 <= j <= i <= i_max, as doubles.
inline std::vector<std::vector<double>> binomial_table(int i_max) {
  std::vector<std::vector<double>> c(static_cast<std::size_t>(i_max) + 1);
  for (int i = 0; i <= i_max; ++i) {
    c[i].assign(static_cast<std::size_t>(i) + 1, 1.0);
    for (int j = 1; j < i; ++j) c[i][j] = c[i - 1][j - 1] + c[i - 1][j];
  }
  return c;
}

inline const std::vector<std::vector<double>>& binomials(int i_max) {
  static const std::vector<std::vector<double>> table = binomial_table(170);
  if (i_max > 170) fail(ErrorKind::invalid_input, "series truncation above 170 terms is unsupported");
  return table;
}

// Tail of sum_{i > i_max} (2/i!) sum_{j=1}^{i-1} [C(i,j) - 1] a^j b^{i-j}.
// Two majorants, both valid; the smaller one is returned:
//   * 2 * exp_tail_majorant(a + b, i_max), from C(i,j) - 1 <= C(i,j);
//   * (2ab/s) * s^m/m! * (m+1)/(m+1-s) with s = a + b and m = i_max, from
//     sum_j C(i,j) a^j b^{i-j} <= i a b s^{i-2}. This one vanishes when a or b does.
inline double defect_tail(double a, double b, int i_max) {
  const double s = a + b;
  if (a == 0.0 || b == 0.0) return 0.0;
  double best = 2.0 * exp_tail_majorant(s, i_max);
  if (s < i_max + 1.0) {
    const double m = i_max;
    const double head = std::exp(m * std::log(s) - std::lgamma(m + 1.0));
    best = std::min(best, 2.0 * a * b / s * head * (m + 1.0) / (m + 1.0 - s));
  }
  return best;
}

// sum_{j=1}^{i-1} [C(i,j) - 1] x^j y^{i-j}
inline double defect_inner(const std::vector<double>& binom_row, int i, double x, double y) {
  double acc = 0.0;
  for (int j = 1; j < i; ++j) acc += (binom_row[j] - 1.0) * std::pow(x, j) * std::pow(y, i - j);
  return acc;
}

}  // namespace detail

/// Upper bound on ||e^A e^B - e^{A+B}||_op in terms of ||A|| and ||B||:
///   sum_{i>=2} (2/i!) sum_{j=1}^{i-1} [C(i,j) - 1] ||A||^j ||B||^{i-j},
/// truncated at i_max with a rigorous tail majorant added.
inline double exp_product_defect_bound(double a_norm, double b_norm, int i_max) {
  if (!(a_norm >= 0) || !(b_norm >= 0) || !std::isfinite(a_norm) || !std::isfinite(b_norm))
    fail(ErrorKind::invalid_input, "norms must be finite and nonnegative");
  if (i_max < 2) fail(ErrorKind::invalid_input, "i_max must be >= 2");
  if (a_norm == 0.0 || b_norm == 0.0) return 0.0;
  const auto& binom = detail::binomials(i_max);
  double sum = 0.0;
  double inv_fact = 0.5;  // 1/2!
  for (int i = 2; i <= i_max; ++i) {
    if (i > 2) inv_fact /= i;
    sum += 2.0 * inv_fact * detail::defect_inner(binom[i], i, a_norm, b_norm);
  }
  return sum + detail::defect_tail(a_norm, b_norm, i_max);
}

/// Matrix with independent standard complex Gaussian entries.
inline CMatrix random_gaussian(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  CMatrix m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) {
      const double re = normal(rng);
      const double im = normal(rng);
      m(i, j) = Complex(re, im) / std::sqrt(2.0);
    }
  return m;
}

/// Haar-distributed unitary (QR of a Gaussian matrix with the phase fix).
inline CMatrix random_haar_unitary(Eigen::Index dim, std::mt19937_64& rng) {
  const CMatrix g = random_gaussian(dim, dim, rng);
  Eigen::HouseholderQR<CMatrix> qr(g);
  CMatrix q = qr.householderQ();
  const CMatrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Eigen::Index k = 0; k < dim; ++k) {
    const double mag = std::abs(r(k, k));
    if (mag > 0) q.col(k) *= r(k, k) / mag;
  }
  return q;
}

/// Eigenphases in [0, 2pi) with pairwise circular separation >= min_gap.
inline std::vector<double> random_separated_phases(Eigen::Index dim, double min_gap,
                                                   std::mt19937_64& rng) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  const double free_length = two_pi - static_cast<double>(dim) * min_gap;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<double> offsets(static_cast<std::size_t>(dim));
  for (auto& o : offsets) o = unit(rng) * free_length;
  std::sort(offsets.begin(), offsets.end());
  const double rotation = unit(rng) * two_pi;
  std::vector<double> phases(offsets.size());
  for (std::size_t k = 0; k < offsets.size(); ++k)
    phases[k] = std::fmod(offsets[k] + static_cast<double>(k) * min_gap + rotation, two_pi);
  return phases;
}

/// Random unitary whose eigenphases are pairwise at least `min_phase_gap`
/// apart on the circle. Deterministic for a fixed seed.
inline CMatrix random_unitary(Eigen::Index dim, double min_phase_gap, std::uint64_t seed) {
  if (dim < 1) fail(ErrorKind::invalid_input, "dim must be >= 1");
  if (!(min_phase_gap >= 0) || !std::isfinite(min_phase_gap))
    fail(ErrorKind::invalid_input, "min_phase_gap must be finite and nonnegative");
  if (min_phase_gap * static_cast<double>(dim) >= 2.0 * std::numbers::pi)
    fail(ErrorKind::invalid_input, "infeasible phase gap: " + std::to_string(min_phase_gap) +
                                       " * " + std::to_string(dim) + " >= 2pi");
  std::mt19937_64 rng(seed);
  const CMatrix q = random_haar_unitary(dim, rng);
  const auto phases = random_separated_phases(dim, min_phase_gap, rng);
  Eigen::VectorXcd d(dim);
  for (Eigen::Index k = 0; k < dim; ++k) d(k) = std::polar(1.0, phases[static_cast<std::size_t>(k)]);
  return q * d.asDiagonal() * q.adjoint();
}

}  // namespace bangbang
