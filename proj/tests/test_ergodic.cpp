// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <cmath>
#include <complex>
#include <random>

#include "bangbang/ergodic.hpp"
#include "oracles.hpp"

using namespace bangbang;

namespace {

CMatrix diag(std::initializer_list<Complex> d) {
  CMatrix m = CMatrix::Zero(static_cast<Eigen::Index>(d.size()), static_cast<Eigen::Index>(d.size()));
  Eigen::Index k = 0;
  for (Complex v : d) {
    m(k, k) = v;
    ++k;
  }
  return m;
}

CMatrix pauli_x() {
  CMatrix m(2, 2);
  m << 0, 1, 1, 0;
  return m;
}

Complex phase(double p) { return std::polar(1.0, p); }

ErrorKind kind_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no bangbang::Error thrown";
  return ErrorKind::parse;
}

}  // namespace

TEST(Spectrum, IdentityHasOneCluster) {
  const auto spec = spectrum(identity(3));
  ASSERT_EQ(spec.clusters().size(), 1u);
  EXPECT_LT(op_norm(spec.clusters()[0].projector - identity(3)), 1e-12);
}

TEST(Spectrum, SignDiagonalSplitsInTwo) {
  const auto spec = spectrum(diag({1.0, -1.0}));
  ASSERT_EQ(spec.clusters().size(), 2u);
  bool saw_plus = false, saw_minus = false;
  for (const auto& c : spec.clusters()) {
    if (op_norm(c.projector - diag({1.0, 0.0})) < 1e-12) saw_plus = true;
    if (op_norm(c.projector - diag({0.0, 1.0})) < 1e-12) saw_minus = true;
  }
  EXPECT_TRUE(saw_plus && saw_minus);
}

TEST(Spectrum, NearDegeneratePairMerges) {
  const CMatrix u = diag({phase(0.3), phase(0.3000000001), phase(1.1)});
  const auto spec = spectrum(u, 1e-6);
  ASSERT_EQ(spec.clusters().size(), 2u);
  std::vector<double> ranks;
  for (const auto& c : spec.clusters()) ranks.push_back(std::round(c.projector.trace().real()));
  std::sort(ranks.begin(), ranks.end());
  EXPECT_EQ(ranks, (std::vector<double>{1.0, 2.0}));
  // Oracle: eigenphases from a general eigensolver.
  const auto phases = oracle::eigenphases(u);
  EXPECT_NEAR(phases[1] - phases[0], 1e-10, 1e-12);
}

TEST(Spectrum, ProjectorsResolveTheIdentityAndU) {
  for (int dim : {2, 5, 8}) {
    const CMatrix u = random_unitary(dim, 0.1, 900 + dim);
    const auto spec = spectrum(u);
    CMatrix sum = CMatrix::Zero(dim, dim);
    CMatrix rebuilt = CMatrix::Zero(dim, dim);
    for (const auto& c : spec.clusters()) {
      sum += c.projector;
      rebuilt += phase(c.phase) * c.projector;
      EXPECT_LT(op_norm(c.projector * c.projector - c.projector), 1e-10);
    }
    EXPECT_LT(op_norm(sum - identity(dim)), 1e-10);
    EXPECT_LT(op_norm(rebuilt - u), 1e-10);
  }
}

TEST(Spectrum, RejectsNonUnitary) {
  EXPECT_EQ(kind_of([] { spectrum(diag({1.0, 2.0})); }), ErrorKind::invalid_input);
}

TEST(Spectrum, ChainSpanningMoreThanToleranceIsAmbiguous) {
  const CMatrix u = diag({phase(0.0), phase(0.8e-6), phase(1.6e-6), phase(2.0)});
  EXPECT_EQ(kind_of([&] { spectrum(u, 1e-6); }), ErrorKind::clustering_ambiguity);
}

TEST(CommutantProject, NondegenerateGivesDiagonalInEigenbasis) {
  const CMatrix u = random_unitary(4, 0.2, 31);
  const auto spec = spectrum(u);
  std::mt19937_64 rng(32);
  const CMatrix x = oracle::random_matrix(4, rng);
  const CMatrix q = spec.basis();
  const CMatrix in_basis = q.adjoint() * x * q;
  const CMatrix expected = q * CMatrix(in_basis.diagonal().asDiagonal()) * q.adjoint();
  EXPECT_LT(op_norm(commutant_project(spec, x) - expected), 1e-10);
}

TEST(CommutantProject, IdentityIsFixed) {
  const auto spec = spectrum(random_unitary(3, 0.1, 4));
  EXPECT_LT(op_norm(commutant_project(spec, identity(3)) - identity(3)), 1e-12);
}

TEST(CommutantProject, DegenerateBlockMatchesCesaroOracle) {
  const CMatrix u = diag({1.0, 1.0, -1.0});
  std::mt19937_64 rng(33);
  const CMatrix x = oracle::random_matrix(3, rng);
  const CMatrix p = commutant_project(spectrum(u), x);
  CMatrix block = x;
  block(0, 2) = block(1, 2) = block(2, 0) = block(2, 1) = 0.0;
  EXPECT_LT(op_norm(p - block), 1e-12);
  EXPECT_LT(op_norm(p - cesaro_mean(u, x, 100000)), 1e-3 * op_norm(x));
}

TEST(CommutantProject, RejectsDimensionMismatch) {
  const auto spec = spectrum(identity(2));
  EXPECT_EQ(kind_of([&] { commutant_project(spec, identity(3)); }), ErrorKind::invalid_input);
}

TEST(CesaroMean, SingleTerm) {
  const CMatrix u = random_unitary(3, 0.1, 8);
  std::mt19937_64 rng(34);
  const CMatrix x = oracle::random_matrix(3, rng);
  EXPECT_LT(op_norm(cesaro_mean(u, x, 1) - u * x * u.adjoint()), 1e-13);
}

TEST(CesaroMean, FullPeriodOfFourthRootsVanishes) {
  EXPECT_LT(op_norm(cesaro_mean(diag({1.0, Complex(0, 1)}), pauli_x(), 4)), 1e-15);
}

TEST(CesaroMean, CommutingInputIsFixed) {
  const CMatrix u = diag({phase(0.4), phase(2.0)});
  const CMatrix x = diag({Complex(1, 2), -3.0});
  for (std::size_t n : {1u, 7u, 1000u}) EXPECT_LT(op_norm(cesaro_mean(u, x, n) - x), 1e-12);
}

TEST(CesaroMean, RejectsZeroTerms) {
  EXPECT_EQ(kind_of([] { cesaro_mean(identity(2), identity(2), 0); }), ErrorKind::invalid_input);
}

TEST(WeightedCesaroMean, EquidistantMatchesPlainMean) {
  const CMatrix u = random_unitary(3, 0.1, 9);
  std::mt19937_64 rng(35);
  const CMatrix x = oracle::random_matrix(3, rng);
  EXPECT_LT(op_norm(weighted_cesaro_mean(u, x, equidistant(37)) - cesaro_mean(u, x, 37)), 1e-12);
}

TEST(WeightedCesaroMean, NearDeltaApproachesFirstTerm) {
  const CMatrix u = random_unitary(3, 0.1, 10);
  std::mt19937_64 rng(36);
  const CMatrix x = oracle::random_matrix(3, rng);
  const Schedule s({0.999, 0.0005, 0.0005});
  const CMatrix direct = 0.999 * u * x * u.adjoint() + 0.0005 * u * u * x * u.adjoint() * u.adjoint() +
                         0.0005 * u * u * u * x * u.adjoint() * u.adjoint() * u.adjoint();
  const CMatrix got = weighted_cesaro_mean(u, x, s);
  EXPECT_LT(op_norm(got - direct), 1e-12);
  EXPECT_LT(op_norm(got - u * x * u.adjoint()), 2e-3 * op_norm(x));
}

TEST(WeightedCesaroMean, CommutingInputIsFixed) {
  const CMatrix u = diag({phase(0.4), phase(2.0)});
  const CMatrix x = diag({2.0, Complex(0, 1)});
  EXPECT_LT(op_norm(weighted_cesaro_mean(u, x, pathological(5)) - x), 1e-12);
}

TEST(WeightedCesaroMean, RejectsDimensionMismatch) {
  EXPECT_EQ(kind_of([] { weighted_cesaro_mean(identity(2), identity(3), equidistant(2)); }),
            ErrorKind::invalid_input);
}

TEST(WeightedCesaroMean, UhrigMeansTrendToProjection) {
  const CMatrix u = random_unitary(4, 0.2, 12);
  const auto spec = spectrum(u);
  std::mt19937_64 rng(37);
  const CMatrix x = oracle::random_matrix(4, rng);
  const CMatrix p = commutant_project(spec, x);
  double previous = std::numeric_limits<double>::infinity();
  for (std::size_t n : {16u, 64u, 256u, 1024u}) {
    const double d = op_norm(weighted_cesaro_mean(u, x, from_density(uhrig_density, n)) - p);
    EXPECT_LT(d, previous);
    previous = d;
  }
  EXPECT_LT(previous, 1e-2);
}

TEST(YosidaSplit, CommutingInput) {
  const CMatrix u = diag({phase(0.4), phase(2.0)});
  const CMatrix x = diag({Complex(1, 2), -3.0});
  const auto split = yosida_split(spectrum(u), x);
  EXPECT_LT(op_norm(split.fixed_part - x), 1e-12);
  EXPECT_LT(op_norm(split.coboundary_part), 1e-12);
  EXPECT_LT(op_norm(split.potential), 1e-12);
}

TEST(YosidaSplit, QubitFlip) {
  const CMatrix u = diag({1.0, -1.0});
  const auto split = yosida_split(spectrum(u), pauli_x());
  EXPECT_LT(op_norm(split.fixed_part), 1e-15);
  EXPECT_LT(op_norm(split.coboundary_part - pauli_x()), 1e-15);
  EXPECT_LT(op_norm(split.potential - 0.5 * pauli_x()), 1e-15);
}

TEST(YosidaSplit, ReconstructsRandomInput) {
  for (int trial = 0; trial < 10; ++trial) {
    const int dim = 2 + trial % 5;
    const CMatrix u = random_unitary(dim, 0.1, 500 + trial);
    const auto spec = spectrum(u);
    std::mt19937_64 rng(600 + trial);
    const CMatrix x = oracle::random_matrix(dim, rng);
    const auto split = yosida_split(spec, x);
    EXPECT_LT(op_norm(split.fixed_part + split.coboundary_part - x), 1e-12);
    const CMatrix& y = split.potential;
    EXPECT_LT(op_norm(y - u * y * u.adjoint() - split.coboundary_part), 1e-10);
    EXPECT_LT(op_norm(commutant_project(spec, y)), 1e-12);
    // Bound on the minimal-norm potential through the smallest divisor.
    EXPECT_LE(op_norm(y), dim * op_norm(split.coboundary_part) / spec.min_cross_divisor() + 1e-12);
  }
}

TEST(SolveCoboundary, ZeroAndQubitExamples) {
  const auto spec = spectrum(diag({1.0, -1.0}));
  EXPECT_LT(op_norm(solve_coboundary(spec, CMatrix::Zero(2, 2))), 1e-15);
  EXPECT_LT(op_norm(solve_coboundary(spec, 2.0 * pauli_x()) - pauli_x()), 1e-15);
}

TEST(SolveCoboundary, RejectsCommutantComponent) {
  const auto spec = spectrum(diag({1.0, -1.0}));
  try {
    solve_coboundary(spec, diag({1.0, 0.0}));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::not_a_coboundary);
    EXPECT_NE(std::string(e.what()).find("norm"), std::string::npos);
  }
}

// ---- properties -------------------------------------------------------------

TEST(Properties, ConjugationIsAnIsometry) {
  std::mt19937_64 rng(40);
  for (int trial = 0; trial < 50; ++trial) {
    const int dim = 2 + trial % 6;
    const CMatrix u = oracle::random_unitary_via_hermitian(dim, rng);
    const CMatrix x = oracle::random_matrix(dim, rng);
    EXPECT_NEAR(op_norm(u * x * u.adjoint()), op_norm(x), 1e-10);
  }
}

TEST(Properties, ProjectionAlgebra) {
  std::mt19937_64 rng(41);
  for (int trial = 0; trial < 30; ++trial) {
    const int dim = 2 + trial % 6;
    const CMatrix u = random_unitary(dim, 0.1, 700 + trial);
    const auto spec = spectrum(u);
    const CMatrix x = oracle::random_matrix(dim, rng);
    const CMatrix p = commutant_project(spec, x);
    EXPECT_LT(op_norm(commutant_project(spec, p) - p), 1e-10);
    EXPECT_LT(op_norm(u * p * u.adjoint() - p), 1e-10);
    EXPECT_LT(op_norm(commutant_project(spec, u * x * u.adjoint()) - p), 1e-10);
  }
}

TEST(Properties, HermiticityPreserved) {
  std::mt19937_64 rng(42);
  for (int trial = 0; trial < 20; ++trial) {
    const int dim = 2 + trial % 5;
    const auto spec = spectrum(random_unitary(dim, 0.1, 800 + trial));
    const CMatrix h = oracle::random_hermitian(dim, rng);
    const CMatrix p = commutant_project(spec, h);
    EXPECT_LT(op_norm(p - p.adjoint()), 1e-12);
  }
}

TEST(Properties, MeanKillsCoboundaries) {
  std::mt19937_64 rng(43);
  for (int trial = 0; trial < 20; ++trial) {
    const int dim = 2 + trial % 4;
    const CMatrix u = oracle::random_unitary_via_hermitian(dim, rng);
    const CMatrix y = oracle::random_matrix(dim, rng);
    const CMatrix w = y - u * y * u.adjoint();
    for (std::size_t n : {1u, 2u, 5u, 33u, 200u})
      EXPECT_LE(op_norm(cesaro_mean(u, w, n)), 2 * op_norm(y) / static_cast<double>(n) + 1e-12);
  }
}

TEST(Properties, HilbertSchmidtAdjoint) {
  std::mt19937_64 rng(44);
  for (int trial = 0; trial < 20; ++trial) {
    const int dim = 2 + trial % 5;
    const CMatrix u = oracle::random_unitary_via_hermitian(dim, rng);
    const CMatrix a = oracle::random_matrix(dim, rng);
    const CMatrix b = oracle::random_matrix(dim, rng);
    const Complex lhs = (a.adjoint() * u * b * u.adjoint()).trace();
    const Complex rhs = ((u.adjoint() * a * u).adjoint() * b).trace();
    EXPECT_LT(std::abs(lhs - rhs), 1e-10);
  }
}

TEST(Properties, CesaroConvergesAtTheDivisorRate) {
  std::mt19937_64 rng(45);
  for (int trial = 0; trial < 10; ++trial) {
    const int dim = 2 + trial % 5;
    const CMatrix u = random_unitary(dim, 0.1, 1000 + trial);
    const auto spec = spectrum(u);
    const CMatrix x = oracle::random_matrix(dim, rng);
    const double g = spec.min_cross_divisor();
    const double max_entry = x.cwiseAbs().maxCoeff();
    for (std::size_t n : {10u, 100u, 2000u}) {
      const double bound = 2.0 * dim * dim * max_entry / g / static_cast<double>(n);
      EXPECT_LE(op_norm(commutant_project(spec, x) - cesaro_mean(u, x, n)), bound);
    }
  }
}
