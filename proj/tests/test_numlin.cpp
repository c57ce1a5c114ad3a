#include "dwellkit/numlin.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <complex>
#include <random>

namespace {

using dwellkit::ComplexMatrix;
using dwellkit::ComplexVector;
using dwellkit::NormSpec;
using dwellkit::RealMatrix;

constexpr double kSqrt2 = 1.4142135623730951;
constexpr double kSqrt3 = 1.7320508075688772;

RealMatrix a1() {
  RealMatrix A(2, 2);
  A << -0.1, 2.0, -1.0, -0.1;
  return A;
}

RealMatrix a6() {
  RealMatrix A(3, 3);
  A << -2, 1, 0, 1, -2, 0, 0, 0, -3;
  return A;
}

// Taylor-series exponential with power-of-two scaling: an oracle independent
// of both production routes (no Pade rational form, no eigenbasis).
RealMatrix seriesExp(const RealMatrix& A, double t) {
  RealMatrix B = A * t;
  int squarings = 0;
  while (dwellkit::spectralNorm(B) > 0.5) {
    B /= 2.0;
    ++squarings;
  }
  const Eigen::Index n = A.rows();
  RealMatrix term = RealMatrix::Identity(n, n);
  RealMatrix sum = term;
  for (int k = 1; k < 40; ++k) {
    term = term * B / static_cast<double>(k);
    sum += term;
    if (term.cwiseAbs().maxCoeff() < 1e-18) break;
  }
  for (int s = 0; s < squarings; ++s) sum = sum * sum;
  return sum;
}

RealMatrix randomMatrix(std::mt19937& rng, Eigen::Index n) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  RealMatrix A(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) A(i, j) = gauss(rng);
  return A;
}

double relErr(const RealMatrix& got, const RealMatrix& want) {
  return (got - want).norm() / std::max(1.0, want.norm());
}

}  // namespace

// ---------------------------------------------------------------------------
// eigendecompose
// ---------------------------------------------------------------------------

TEST(Eigendecompose, IdentityIsItsOwnBasis) {
  const auto eig = dwellkit::eigendecompose(RealMatrix::Identity(3, 3));
  ASSERT_EQ(eig.eigenvalues.size(), 3);
  for (int i = 0; i < 3; ++i) {
    EXPECT_NEAR(eig.eigenvalues(i).real(), 1.0, 1e-14);
    EXPECT_NEAR(eig.eigenvalues(i).imag(), 0.0, 1e-14);
    EXPECT_EQ(eig.blockSizes[static_cast<size_t>(i)], 1);
  }
  EXPECT_FALSE(eig.defective);
  EXPECT_LT((eig.basis - ComplexMatrix::Identity(3, 3)).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Eigendecompose, ScaledRotationMatchesTabulatedBasis) {
  const auto eig = dwellkit::eigendecompose(a1());
  ASSERT_EQ(eig.eigenvalues.size(), 2);
  // Sorted by (Re, Im): -0.1 - i*sqrt(2) first.
  EXPECT_NEAR(eig.eigenvalues(0).real(), -0.1, 1e-12);
  EXPECT_NEAR(eig.eigenvalues(0).imag(), -kSqrt2, 1e-12);
  EXPECT_NEAR(eig.eigenvalues(1).real(), -0.1, 1e-12);
  EXPECT_NEAR(eig.eigenvalues(1).imag(), kSqrt2, 1e-12);
  EXPECT_FALSE(eig.defective);

  // Reference eigenvectors (i*sqrt(2), 1)/sqrt(3) and (-i*sqrt(2), 1)/sqrt(3):
  // returned columns must span the same lines (equal up to unit phase).
  ComplexVector ref0(2), ref1(2);
  ref0 << std::complex<double>(0, kSqrt2 / kSqrt3), std::complex<double>(1.0 / kSqrt3, 0);
  ref1 = ref0.conjugate();
  EXPECT_NEAR(std::abs(ref0.dot(eig.basis.col(0))), 1.0, 1e-10);
  EXPECT_NEAR(std::abs(ref1.dot(eig.basis.col(1))), 1.0, 1e-10);

  // Column convention: unit norm, largest-magnitude component real positive,
  // and the conjugate eigenvalue gets the conjugate column.
  EXPECT_NEAR(eig.basis.col(0).norm(), 1.0, 1e-12);
  EXPECT_NEAR(eig.basis(0, 0).real(), kSqrt2 / kSqrt3, 1e-10);
  EXPECT_NEAR(eig.basis(0, 0).imag(), 0.0, 1e-10);
  EXPECT_LT((eig.basis.col(1) - eig.basis.col(0).conjugate()).norm(), 1e-10);
}

TEST(Eigendecompose, SymmetricRepeatedEigenvalueIsDiagonalizable) {
  const auto eig = dwellkit::eigendecompose(a6());
  ASSERT_EQ(eig.eigenvalues.size(), 3);
  EXPECT_NEAR(eig.eigenvalues(0).real(), -3.0, 1e-10);
  EXPECT_NEAR(eig.eigenvalues(1).real(), -3.0, 1e-10);
  EXPECT_NEAR(eig.eigenvalues(2).real(), -1.0, 1e-10);
  EXPECT_FALSE(eig.defective);
  EXPECT_EQ(eig.blockSizes, (std::vector<int>{1, 1, 1}));
  for (int c = 0; c < 3; ++c) EXPECT_NEAR(eig.basis.col(c).norm(), 1.0, 1e-12);

  const ComplexMatrix recon = eig.basis * eig.jordanForm() * eig.basis.inverse();
  EXPECT_LT(dwellkit::spectralNorm(ComplexMatrix(recon - a6().cast<std::complex<double>>())),
            1e-9 * dwellkit::spectralNorm(a6()));
}

TEST(Eigendecompose, NonNormalRepeatedEigenvalueStaysDiagonalizable) {
  RealMatrix A4(3, 3);
  A4 << -5, -3, -4, 4, 2, 4, 0, 0, -1;
  const auto eig = dwellkit::eigendecompose(A4);
  EXPECT_NEAR(eig.eigenvalues(0).real(), -2.0, 1e-8);
  EXPECT_NEAR(eig.eigenvalues(1).real(), -1.0, 1e-8);
  EXPECT_NEAR(eig.eigenvalues(2).real(), -1.0, 1e-8);
  EXPECT_FALSE(eig.defective);
}

TEST(Eigendecompose, SortsComplexTripleByRealThenImaginary) {
  RealMatrix A5(3, 3);
  A5 << 0, 2, 1, -2, 1, 0, 1, -2, 0;
  const auto eig = dwellkit::eigendecompose(A5);
  EXPECT_NEAR(eig.eigenvalues(0).real(), 0.0, 1e-10);
  EXPECT_NEAR(eig.eigenvalues(0).imag(), -kSqrt3, 1e-10);
  EXPECT_NEAR(eig.eigenvalues(1).real(), 0.0, 1e-10);
  EXPECT_NEAR(eig.eigenvalues(1).imag(), kSqrt3, 1e-10);
  EXPECT_NEAR(eig.eigenvalues(2).real(), 1.0, 1e-10);
  EXPECT_NEAR(eig.eigenvalues(2).imag(), 0.0, 1e-10);
}

TEST(Eigendecompose, JordanBlockDetectedAndChained) {
  RealMatrix B(2, 2);
  B << -1, 1, 0, -1;
  const auto eig = dwellkit::eigendecompose(B);
  EXPECT_TRUE(eig.defective);
  EXPECT_EQ(eig.blockSizes, (std::vector<int>{2}));
  EXPECT_NEAR(eig.eigenvalues(0).real(), -1.0, 1e-12);
  // Chain relation (B - lambda I) v2 = v1 with v1 the unit eigenvector.
  const ComplexMatrix shifted =
      B.cast<std::complex<double>>() + ComplexMatrix::Identity(2, 2);
  EXPECT_LT((shifted * eig.basis.col(1) - eig.basis.col(0)).norm(), 1e-12);
  EXPECT_NEAR(eig.basis.col(0).norm(), 1.0, 1e-12);

  const ComplexMatrix recon = eig.basis * eig.jordanForm() * eig.basis.inverse();
  EXPECT_LT((recon - B.cast<std::complex<double>>()).norm(), 1e-12);
}

TEST(Eigendecompose, TriangularMixedBlockStructure) {
  RealMatrix C(3, 3);
  C << 2, 1, 5, 0, 2, 3, 0, 0, 3;
  const auto eig = dwellkit::eigendecompose(C);
  EXPECT_TRUE(eig.defective);
  std::vector<int> sizes = eig.blockSizes;
  std::sort(sizes.begin(), sizes.end());
  EXPECT_EQ(sizes, (std::vector<int>{1, 2}));
  const ComplexMatrix recon = eig.basis * eig.jordanForm() * eig.basis.inverse();
  EXPECT_LT(dwellkit::spectralNorm(ComplexMatrix(recon - C.cast<std::complex<double>>())),
            1e-9 * dwellkit::spectralNorm(C));
}

TEST(Eigendecompose, ConjugatedJordanBlockReconstructs) {
  // T [[2,1,0],[0,2,0],[0,0,3]] T^{-1} with an integer T.  Rounding splits a
  // Jordan pair by about sqrt(machine eps), which sits at the coincidence
  // tolerance, so only the eigenvalues and the reconstruction are asserted.
  RealMatrix C(3, 3);
  C << 2.5, 0.5, -0.5, -0.5, 2.5, 0.5, 0.0, 1.0, 2.0;
  const auto eig = dwellkit::eigendecompose(C);
  std::vector<double> re;
  for (Eigen::Index i = 0; i < 3; ++i) re.push_back(eig.eigenvalues(i).real());
  std::sort(re.begin(), re.end());
  EXPECT_NEAR(re[0], 2.0, 1e-6);
  EXPECT_NEAR(re[1], 2.0, 1e-6);
  EXPECT_NEAR(re[2], 3.0, 1e-6);
  const ComplexMatrix recon = eig.basis * eig.jordanForm() * eig.basis.inverse();
  EXPECT_LT(dwellkit::spectralNorm(ComplexMatrix(recon - C.cast<std::complex<double>>())),
            1e-8 * dwellkit::spectralNorm(C));
}

TEST(Eigendecompose, ThrowsOnIllConditionedBasis) {
  // Eigenvalues separated well above the coincidence tolerance but with an
  // eigenvector basis of condition ~5e13.
  RealMatrix A(3, 3);
  A << 1.0, 1.0, 1.0, 0.0, 1.0 + 2e-7, 1.0, 0.0, 0.0, 1.0 + 4e-7;
  EXPECT_THROW(dwellkit::eigendecompose(A), dwellkit::IllConditionedBasis);
}

TEST(Eigendecompose, RejectsNonSquare) {
  RealMatrix A(2, 3);
  A.setZero();
  EXPECT_THROW(dwellkit::eigendecompose(A), dwellkit::DimensionMismatch);
}

TEST(Eigendecompose, RandomReconstructionProperty) {
  std::mt19937 rng(2024u);
  for (int trial = 0; trial < 1000; ++trial) {
    for (Eigen::Index n : {2, 3}) {
      const RealMatrix A = randomMatrix(rng, n);
      const auto eig = dwellkit::eigendecompose(A);
      const ComplexMatrix recon = eig.basis * eig.jordanForm() * eig.basis.inverse();
      const double resid =
          dwellkit::spectralNorm(ComplexMatrix(recon - A.cast<std::complex<double>>()));
      EXPECT_LE(resid, 1e-9 * dwellkit::spectralNorm(A))
          << "trial " << trial << " n " << n;
    }
  }
}

// ---------------------------------------------------------------------------
// matrixExp
// ---------------------------------------------------------------------------

TEST(MatrixExp, ZeroMatrixGivesIdentity) {
  const RealMatrix E = dwellkit::matrixExp(RealMatrix::Zero(3, 3), 7.5);
  EXPECT_LT((E - RealMatrix::Identity(3, 3)).norm(), 1e-14);
}

TEST(MatrixExp, DiagonalCase) {
  RealMatrix D = RealMatrix::Zero(2, 2);
  D(0, 0) = -1.0;
  D(1, 1) = -2.0;
  const RealMatrix E = dwellkit::matrixExp(D, 1.0);
  EXPECT_NEAR(E(0, 0), std::exp(-1.0), 1e-14);
  EXPECT_NEAR(E(1, 1), std::exp(-2.0), 1e-14);
  EXPECT_NEAR(E(0, 1), 0.0, 1e-14);
  EXPECT_NEAR(E(1, 0), 0.0, 1e-14);
}

TEST(MatrixExp, ScaledRotationClosedForm) {
  // A_1 = -0.1 I + S with S^2 = -2 I, so
  // e^{A_1 t} = e^{-0.1 t} (cos(sqrt2 t) I + sin(sqrt2 t)/sqrt2 * S).
  const double T = M_PI / (2.0 * kSqrt2);
  const RealMatrix E = dwellkit::matrixExp(a1(), T);

  RealMatrix closed(2, 2);
  const double c = std::cos(kSqrt2 * T), s = std::sin(kSqrt2 * T);
  closed << c, 2.0 * s / kSqrt2, -s / kSqrt2, c;
  closed *= std::exp(-0.1 * T);
  EXPECT_LT(relErr(E, closed), 1e-12);
  EXPECT_LT(relErr(E, seriesExp(a1(), T)), 1e-10);

  // At the quarter period the flow maps the unit disk to an ellipse with
  // semi-axes sqrt2 and 1/sqrt2 (times the decay factor): the spectral norm
  // is sqrt2 * e^{-0.1 T} ~ 1.2655, not e^{-0.1 T}.
  EXPECT_NEAR(dwellkit::operatorNorm(E, NormSpec::spectral()),
              kSqrt2 * std::exp(-0.1 * T), 1e-9);
}

TEST(MatrixExp, DefectiveBlockClosedForm) {
  RealMatrix B(2, 2);
  B << -1, 1, 0, -1;
  const RealMatrix E = dwellkit::matrixExp(B, 0.7);
  RealMatrix closed(2, 2);
  closed << 1.0, 0.7, 0.0, 1.0;
  closed *= std::exp(-0.7);
  EXPECT_LT(relErr(E, closed), 1e-12);
}

TEST(MatrixExp, NegativeTimeInvertsFlow) {
  std::mt19937 rng(7u);
  const RealMatrix A = randomMatrix(rng, 3);
  const RealMatrix fwd = dwellkit::matrixExp(A, 1.3);
  const RealMatrix bwd = dwellkit::matrixExp(A, -1.3);
  EXPECT_LT((fwd * bwd - RealMatrix::Identity(3, 3)).norm(), 1e-10);
}

TEST(MatrixExp, TwoRoutesAgree) {
  std::mt19937 rng(99u);
  for (int trial = 0; trial < 200; ++trial) {
    const RealMatrix A = randomMatrix(rng, 3);
    const double t = 0.1 + 2.9 * (trial / 200.0);
    const RealMatrix viaDefault = dwellkit::matrixExp(A, t);
    const RealMatrix viaPade = dwellkit::detail::expmPade(A * t);
    EXPECT_LT(relErr(viaDefault, viaPade), 1e-10) << "trial " << trial;
  }
}

TEST(MatrixExp, SemigroupProperty) {
  std::mt19937 rng(4242u);
  std::uniform_real_distribution<double> uni(0.0, 5.0);
  for (int trial = 0; trial < 200; ++trial) {
    RealMatrix A = randomMatrix(rng, 3);
    A /= std::max(1.0, dwellkit::spectralNorm(A));  // keep e^{At} in range
    const double s = uni(rng), t = uni(rng);
    const RealMatrix whole = dwellkit::matrixExp(A, s + t);
    const RealMatrix split = dwellkit::matrixExp(A, s) * dwellkit::matrixExp(A, t);
    EXPECT_LT((whole - split).norm() / std::max(1.0, whole.norm()), 1e-9)
        << "trial " << trial;
  }
}

TEST(MatrixExp, SeriesOracleOnRandomInputs) {
  std::mt19937 rng(31u);
  for (int trial = 0; trial < 100; ++trial) {
    const RealMatrix A = randomMatrix(rng, 3);
    const RealMatrix E = dwellkit::matrixExp(A, 0.8);
    EXPECT_LT(relErr(E, seriesExp(A, 0.8)), 1e-10) << "trial " << trial;
  }
}

// ---------------------------------------------------------------------------
// operatorNorm / spectralRadius / isPositiveDefinite
// ---------------------------------------------------------------------------

TEST(OperatorNorm, RotationHasUnitSpectralNorm) {
  RealMatrix R(2, 2);
  R << 0, 1, -1, 0;
  EXPECT_NEAR(dwellkit::operatorNorm(R, NormSpec::spectral()), 1.0, 1e-14);
}

TEST(OperatorNorm, DiagonalSingularValues) {
  RealMatrix K = RealMatrix::Zero(2, 2);
  K(0, 0) = 2.0;
  EXPECT_NEAR(dwellkit::operatorNorm(K, NormSpec::spectral()), 2.0, 1e-14);
}

TEST(OperatorNorm, IdentityHasUnitEllipsoidalNorm) {
  RealMatrix W = RealMatrix::Zero(3, 3);
  W.diagonal() << 2.0, 0.5, 1.0;
  EXPECT_NEAR(dwellkit::operatorNorm(RealMatrix(RealMatrix::Identity(3, 3)),
                                     NormSpec::ellipsoidal(W)),
              1.0, 1e-12);
}

TEST(OperatorNorm, PermutationUnderDiagonalWeight) {
  // ||K||_A = sqrt(lambda_max(A^{-1} K^T A K)); for the cyclic permutation
  // under A = diag(2, 1/2, 1) that is sqrt(max(1/2, 4, 1/2)) = 2.
  RealMatrix K(3, 3);
  K << 0, 1, 0, 0, 0, 1, 1, 0, 0;
  RealMatrix W = RealMatrix::Zero(3, 3);
  W.diagonal() << 2.0, 0.5, 1.0;
  EXPECT_NEAR(dwellkit::operatorNorm(K, NormSpec::ellipsoidal(W)), 2.0, 1e-12);
}

TEST(OperatorNorm, EllipsoidalMatchesPencilOracle) {
  std::mt19937 rng(555u);
  for (int trial = 0; trial < 100; ++trial) {
    const RealMatrix K = randomMatrix(rng, 3);
    RealMatrix W = randomMatrix(rng, 3);
    W = dwellkit::symmetrize(RealMatrix(W * W.transpose())) +
        0.2 * RealMatrix::Identity(3, 3);
    // Independent route: lambda_max of the pencil (K^T W K, W).
    Eigen::GeneralizedSelfAdjointEigenSolver<RealMatrix> ges(
        dwellkit::symmetrize(RealMatrix(K.transpose() * W * K)), W);
    const double oracle = std::sqrt(ges.eigenvalues().maxCoeff());
    const double got = dwellkit::operatorNorm(K, NormSpec::ellipsoidal(W));
    EXPECT_NEAR(got, oracle, 1e-10 * std::max(1.0, oracle)) << "trial " << trial;
  }
}

TEST(OperatorNorm, SubmultiplicativeBothKinds) {
  std::mt19937 rng(808u);
  RealMatrix W = RealMatrix::Zero(3, 3);
  W.diagonal() << 2.0, 0.5, 1.0;
  const NormSpec ell = NormSpec::ellipsoidal(W);
  const NormSpec spec2 = NormSpec::spectral();
  for (int trial = 0; trial < 200; ++trial) {
    const RealMatrix K = randomMatrix(rng, 3), L = randomMatrix(rng, 3);
    const RealMatrix KL = K * L;
    for (const auto& ns : {spec2, ell}) {
      EXPECT_LE(dwellkit::operatorNorm(KL, ns),
                dwellkit::operatorNorm(K, ns) * dwellkit::operatorNorm(L, ns) *
                    (1.0 + 1e-10))
          << "trial " << trial;
    }
  }
}

TEST(SpectralRadius, KnownCases) {
  RealMatrix R(2, 2);
  R << 0, 1, -1, 0;
  EXPECT_NEAR(dwellkit::spectralRadius(RealMatrix(RealMatrix::Identity(2, 2))), 1.0, 1e-14);
  RealMatrix N(2, 2);
  N << 0, 1, 0, 0;
  EXPECT_NEAR(dwellkit::spectralRadius(N), 0.0, 1e-14);

  // Reset composed with the quarter-period flow of the scaled rotation: the
  // monodromy matrix is diagonal with entries -e^{-0.1T}/sqrt2, -sqrt2 e^{-0.1T}.
  const double T = M_PI / (2.0 * kSqrt2);
  const RealMatrix M = R * dwellkit::matrixExp(a1(), T);
  EXPECT_NEAR(dwellkit::spectralRadius(M), kSqrt2 * std::exp(-0.1 * T), 1e-10);
  EXPECT_NEAR(dwellkit::spectralRadius(M), 1.26, 0.01);
}

TEST(SpectralRadius, BoundedBySpectralNorm) {
  std::mt19937 rng(17u);
  for (int trial = 0; trial < 200; ++trial) {
    const RealMatrix K = randomMatrix(rng, 3);
    EXPECT_LE(dwellkit::spectralRadius(K),
              dwellkit::operatorNorm(K, NormSpec::spectral()) * (1.0 + 1e-10));
  }
}

TEST(IsPositiveDefinite, MarginSemantics) {
  const RealMatrix I2 = RealMatrix::Identity(2, 2);
  EXPECT_TRUE(dwellkit::isPositiveDefinite(I2, 0.0));
  EXPECT_TRUE(dwellkit::isPositiveDefinite(I2, 0.99));
  EXPECT_FALSE(dwellkit::isPositiveDefinite(I2, 1.0));  // strict

  RealMatrix D = RealMatrix::Zero(2, 2);
  D.diagonal() << 1.0, -1e-3;
  EXPECT_FALSE(dwellkit::isPositiveDefinite(D, 0.0));
  EXPECT_TRUE(dwellkit::isPositiveDefinite(RealMatrix(-a6()), 0.0));

  RealMatrix tiny = RealMatrix::Zero(1, 1);
  tiny(0, 0) = -1e-4;
  EXPECT_TRUE(dwellkit::isPositiveDefinite(tiny, -1e-3));
}
