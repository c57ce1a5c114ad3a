#pragma once

// Dense complex linear-algebra kernels the rest of the library builds on:
// eigendecomposition with a deterministic column convention, matrix
// exponentials (two independent routes), operator norms (spectral and
// ellipsoidal), spectral radius and positive-definiteness tests.
//
// Everything here is desk scale (n <= ~50), dense, and pure.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace dwellkit {

using RealMatrix = Eigen::MatrixXd;
using ComplexMatrix = Eigen::MatrixXcd;
using RealVector = Eigen::VectorXd;
using ComplexVector = Eigen::VectorXcd;

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

struct Error : std::runtime_error {
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

struct NonConvergence : Error {
  explicit NonConvergence(const std::string& what) : Error(what) {}
};

struct IllConditionedBasis : Error {
  explicit IllConditionedBasis(const std::string& what) : Error(what) {}
};

struct DimensionMismatch : Error {
  explicit DimensionMismatch(const std::string& what) : Error(what) {}
};

// ---------------------------------------------------------------------------
// NormSpec
// ---------------------------------------------------------------------------

enum class NormKind { spectral, ellipsoidal };

/// Which operator norm to analyze the flow in.  The ellipsoidal norm
/// ||x||_A = sqrt(x^T A x) induces ||K||_A = sqrt(lambda_max(A^{-1} K^T A K))
/// on matrices; the weight A must be symmetric positive definite.
struct NormSpec {
  NormKind kind = NormKind::spectral;
  std::optional<RealMatrix> weight;  // present iff kind == ellipsoidal

  static NormSpec spectral() { return NormSpec{}; }

  static NormSpec ellipsoidal(const RealMatrix& weight) {
    NormSpec spec;
    spec.kind = NormKind::ellipsoidal;
    spec.weight = weight;
    return spec;
  }
};

// ---------------------------------------------------------------------------
// Small helpers
// ---------------------------------------------------------------------------

inline RealMatrix symmetrize(const RealMatrix& Q) {
  return 0.5 * (Q + Q.transpose());
}

/// Largest singular value of a complex matrix.
inline double spectralNorm(const ComplexMatrix& K) {
  if (K.rows() == 0) return 0.0;
  return K.jacobiSvd().singularValues()(0);
}

inline double spectralNorm(const RealMatrix& K) {
  if (K.rows() == 0) return 0.0;
  return K.jacobiSvd().singularValues()(0);
}

/// 2-norm condition number via SVD; infinity when singular to machine level.
inline double conditionNumber(const ComplexMatrix& P) {
  const auto sv = P.jacobiSvd().singularValues();
  const double smin = sv(sv.size() - 1);
  if (smin <= 0.0) return std::numeric_limits<double>::infinity();
  return sv(0) / smin;
}

// ---------------------------------------------------------------------------
// EigenStructure
// ---------------------------------------------------------------------------

/// Complex Jordan data of a real square matrix: eigenvalues (repeated with
/// algebraic multiplicity, sorted by real part then imaginary part), the
/// (generalized) eigenvector basis P, and the Jordan block sizes.  For
/// diagonalizable matrices every block has size 1 and the basis columns have
/// unit Euclidean norm with a fixed phase (largest-magnitude component real
/// positive).  For defective matrices the chains are kept intact and only the
/// chain's eigenvector is normalized, so A P = P J still holds exactly.
struct EigenStructure {
  ComplexVector eigenvalues;      // length n, block-ordered
  ComplexMatrix basis;            // P, columns follow eigenvalue order
  std::vector<int> blockSizes;    // Jordan block sizes, sum = n
  bool defective = false;

  [[nodiscard]] Eigen::Index dimension() const { return basis.rows(); }

  /// Assemble the Jordan matrix J implied by eigenvalues/blockSizes.
  [[nodiscard]] ComplexMatrix jordanForm() const {
    const Eigen::Index n = dimension();
    ComplexMatrix J = ComplexMatrix::Zero(n, n);
    Eigen::Index col = 0;
    for (int size : blockSizes) {
      for (int i = 0; i < size; ++i) {
        J(col + i, col + i) = eigenvalues(col + i);
        if (i + 1 < size) J(col + i, col + i + 1) = 1.0;
      }
      col += size;
    }
    return J;
  }

  /// e^{J t} assembled block by block: each k x k block is
  /// e^{lambda t} * [t^j / j!] on the j-th superdiagonal.  Exact up to
  /// rounding, which is what makes the flow simulator segment-exact.
  [[nodiscard]] ComplexMatrix expJordan(double t) const {
    const Eigen::Index n = dimension();
    ComplexMatrix E = ComplexMatrix::Zero(n, n);
    Eigen::Index col = 0;
    for (int size : blockSizes) {
      const std::complex<double> scale = std::exp(eigenvalues(col) * t);
      double power = 1.0;  // t^j / j!
      for (int j = 0; j < size; ++j) {
        if (j > 0) power *= t / static_cast<double>(j);
        for (int i = 0; i + j < size; ++i) E(col + i, col + i + j) = scale * power;
      }
      col += size;
    }
    return E;
  }

  [[nodiscard]] double basisCondition() const { return conditionNumber(basis); }

  [[nodiscard]] int largestBlock() const {
    return blockSizes.empty() ? 0 : *std::max_element(blockSizes.begin(), blockSizes.end());
  }
};

namespace detail {

/// Fix the free unit-modulus phase of an eigenvector (or of a whole Jordan
/// chain, phasing by its eigenvector) so its largest-magnitude component is
/// real positive.  Ties broken by the first maximal index.
inline std::complex<double> phaseFor(const ComplexVector& v) {
  Eigen::Index imax = 0;
  double best = -1.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const double a = std::abs(v(i));
    if (a > best * (1.0 + 1e-12)) {
      best = a;
      imax = i;
    }
  }
  if (best <= 0.0) return {1.0, 0.0};
  return std::conj(v(imax)) / best;  // unit modulus, rotates v(imax) to |v(imax)|
}

/// Orthonormal kernel basis of M (columns), cut at singular values below tol.
inline ComplexMatrix kernelBasis(const ComplexMatrix& M, double tol) {
  Eigen::JacobiSVD<ComplexMatrix> svd(M, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  Eigen::Index rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv(i) > tol) ++rank;
  return svd.matrixV().rightCols(M.cols() - rank);
}

}  // namespace detail

/// Complex eigendecomposition with the library's deterministic conventions:
/// eigenvalues sorted by (Re, Im) ascending; diagonalizable clusters get
/// unit-norm, phase-fixed eigenvector columns; clusters whose geometric
/// multiplicity falls short of the algebraic one (within a relative
/// coincidence tolerance of 1e-8) get Jordan chains and defective = true.
///
/// Throws NonConvergence if the underlying solver fails or the reconstruction
/// residual exceeds 1e-9 * ||A||, and IllConditionedBasis when cond(P) > 1e12.
inline EigenStructure eigendecompose(const RealMatrix& A) {
  if (A.rows() != A.cols() || A.rows() < 1)
    throw DimensionMismatch("eigendecompose: matrix must be square, n >= 1");
  const Eigen::Index n = A.rows();
  const double normA = spectralNorm(A);

  Eigen::EigenSolver<RealMatrix> solver(A);
  if (solver.info() != Eigen::Success)
    throw NonConvergence("eigendecompose: QR iteration failed");

  // Sort eigenvalues (and their raw vectors) by real part, then imaginary.
  std::vector<Eigen::Index> order(static_cast<size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  const ComplexVector raw = solver.eigenvalues();
  std::sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    if (raw(a).real() != raw(b).real()) return raw(a).real() < raw(b).real();
    return raw(a).imag() < raw(b).imag();
  });

  const double clusterTol = 1e-8 * std::max(normA, 1e-300);

  EigenStructure out;
  out.eigenvalues = ComplexVector(n);
  out.basis = ComplexMatrix(n, n);

  // Walk the sorted eigenvalues, grouping coincident ones into clusters.
  Eigen::Index pos = 0;  // next output column
  Eigen::Index i = 0;
  while (i < n) {
    Eigen::Index j = i + 1;
    while (j < n && std::abs(raw(order[j]) - raw(order[j - 1])) <= clusterTol) ++j;
    const Eigen::Index mult = j - i;  // algebraic multiplicity of the cluster

    // Cluster mean is the representative eigenvalue.
    std::complex<double> lambda{0.0, 0.0};
    for (Eigen::Index k = i; k < j; ++k) lambda += raw(order[k]);
    lambda /= static_cast<double>(mult);

    ComplexMatrix shifted = A.cast<std::complex<double>>();
    shifted.diagonal().array() -= lambda;
    // Rank cut relative to the scale of the matrix whose kernel is sought.
    const auto kerTol = [n](const ComplexMatrix& M) {
      return 1e-10 * static_cast<double>(n) * std::max(spectralNorm(M), 1e-300);
    };
    const ComplexMatrix kernel = detail::kernelBasis(shifted, kerTol(shifted));
    const Eigen::Index geo = std::min<Eigen::Index>(kernel.cols(), mult);

    if (geo >= mult) {
      // Diagonalizable cluster: for a simple eigenvalue keep the solver's
      // eigenvector; for a repeated one use the orthonormal kernel basis
      // (which is exactly the eigenspace).  Both get unit norm + fixed phase.
      for (Eigen::Index k = 0; k < mult; ++k) {
        ComplexVector v = (mult == 1) ? ComplexVector(solver.eigenvectors().col(order[i]))
                                      : ComplexVector(kernel.col(k));
        v /= v.norm();
        v *= detail::phaseFor(v);
        out.basis.col(pos) = v;
        out.eigenvalues(pos) = lambda;
        out.blockSizes.push_back(1);
        ++pos;
      }
    } else {
      // Defective cluster: build Jordan chains from the nullspace ladder
      // N_1 c N_2 c ... of (A - lambda I)^k.  Chain tops are chosen in
      // N_m \ N_{m-1}; applying (A - lambda I) walks a chain down to the
      // eigenvector, which fixes J's superdiagonal to exact ones.
      std::vector<ComplexMatrix> ladders;  // ladders[k] spans N_{k+1}
      ComplexMatrix powerM = shifted;
      ladders.push_back(detail::kernelBasis(powerM, kerTol(powerM)));
      while (ladders.back().cols() < mult &&
             static_cast<Eigen::Index>(ladders.size()) < mult) {
        powerM = shifted * powerM;
        ladders.push_back(detail::kernelBasis(powerM, kerTol(powerM)));
      }
      const int height = static_cast<int>(ladders.size());

      // Number of blocks of size >= k is dim N_k - dim N_{k-1}.
      std::vector<int> blocksAtLeast(static_cast<size_t>(height) + 2, 0);
      for (int k = 1; k <= height; ++k) {
        const Eigen::Index nk = ladders[static_cast<size_t>(k - 1)].cols();
        const Eigen::Index nkm1 = (k == 1) ? 0 : ladders[static_cast<size_t>(k - 2)].cols();
        blocksAtLeast[static_cast<size_t>(k)] = static_cast<int>(nk - nkm1);
      }

      ComplexMatrix used(n, 0);  // accumulates chosen chain vectors
      for (int size = height; size >= 1; --size) {
        const int count = blocksAtLeast[static_cast<size_t>(size)] -
                          blocksAtLeast[static_cast<size_t>(size) + 1];
        for (int b = 0; b < count; ++b) {
          // Pick a top vector in N_size independent of everything chosen so
          // far and of N_{size-1}: project the candidate pool away from both.
          ComplexMatrix avoid(n, used.cols() + (size > 1 ? ladders[static_cast<size_t>(size - 2)].cols() : 0));
          avoid.leftCols(used.cols()) = used;
          if (size > 1)
            avoid.rightCols(ladders[static_cast<size_t>(size - 2)].cols()) =
                ladders[static_cast<size_t>(size - 2)];
          const ComplexMatrix& pool = ladders[static_cast<size_t>(size - 1)];
          ComplexVector top = ComplexVector::Zero(n);
          double bestResid = -1.0;
          for (Eigen::Index c = 0; c < pool.cols(); ++c) {
            ComplexVector cand = pool.col(c);
            if (avoid.cols() > 0) {
              Eigen::JacobiSVD<ComplexMatrix> svd(avoid, Eigen::ComputeThinU);
              const ComplexMatrix U = svd.matrixU();
              cand -= U * (U.adjoint() * cand);
            }
            const double r = cand.norm();
            if (r > bestResid) {
              bestResid = r;
              top = cand;
            }
          }
          if (bestResid <= 1e-8)  // pool columns are unit vectors
            throw NonConvergence("eigendecompose: Jordan chain construction stalled");

          // Walk the chain down; store bottom-up so (A - lambda I) v_{k+1} = v_k.
          std::vector<ComplexVector> chain(static_cast<size_t>(size));
          chain[static_cast<size_t>(size - 1)] = top;
          for (int k = size - 1; k >= 1; --k)
            chain[static_cast<size_t>(k - 1)] = shifted * chain[static_cast<size_t>(k)];
          // Normalize the whole chain so the eigenvector has unit norm, then
          // phase-fix by the eigenvector (scaling a chain preserves it).
          std::complex<double> scale = detail::phaseFor(chain[0]) / chain[0].norm();
          for (auto& v : chain) v *= scale;
          for (int k = 0; k < size; ++k) {
            out.basis.col(pos + k) = chain[static_cast<size_t>(k)];
            out.eigenvalues(pos + k) = lambda;
          }
          ComplexMatrix grown(n, used.cols() + size);
          grown.leftCols(used.cols()) = used;
          for (int k = 0; k < size; ++k) grown.col(used.cols() + k) = chain[static_cast<size_t>(k)];
          used = grown;
          out.blockSizes.push_back(size);
          pos += size;
          out.defective = true;
        }
      }
    }
    i = j;
  }

  const double cond = out.basisCondition();
  if (!std::isfinite(cond) || cond > 1e12)
    throw IllConditionedBasis("eigendecompose: basis condition number " + std::to_string(cond));

  const ComplexMatrix recon = out.basis * out.jordanForm() *
                              out.basis.inverse();
  const double resid = spectralNorm(ComplexMatrix(recon - A.cast<std::complex<double>>()));
  if (resid > 1e-9 * std::max(normA, 1e-300) * std::max(1.0, cond))
    throw NonConvergence("eigendecompose: reconstruction residual " + std::to_string(resid));

  return out;
}

namespace detail {

/// Scaling-and-squaring Pade approximant of e^A (Higham's degree-13 form).
/// Independent of the eigendecomposition route on purpose: the two paths
/// cross-check each other in the tests.
inline RealMatrix expmPade(const RealMatrix& A) {
  static const double b[] = {64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
                             1187353796428800.0,  129060195264000.0,   10559470521600.0,
                             670442572800.0,      33522128640.0,       1323241920.0,
                             40840800.0,          960960.0,            16380.0,
                             182.0,               1.0};
  const Eigen::Index n = A.rows();
  const double mu = A.trace() / static_cast<double>(n);  // shift for accuracy
  RealMatrix As = A - mu * RealMatrix::Identity(n, n);

  const double norm1 = As.cwiseAbs().colwise().sum().maxCoeff();
  int squarings = 0;
  const double theta13 = 5.371920351148152;
  if (norm1 > theta13) {
    squarings = static_cast<int>(std::ceil(std::log2(norm1 / theta13)));
    As /= std::pow(2.0, squarings);
  }

  const RealMatrix I = RealMatrix::Identity(n, n);
  const RealMatrix A2 = As * As;
  const RealMatrix A4 = A2 * A2;
  const RealMatrix A6 = A2 * A4;
  const RealMatrix U = As * (A6 * (b[13] * A6 + b[11] * A4 + b[9] * A2) +
                             b[7] * A6 + b[5] * A4 + b[3] * A2 + b[1] * I);
  const RealMatrix V = A6 * (b[12] * A6 + b[10] * A4 + b[8] * A2) +
                       b[6] * A6 + b[4] * A4 + b[2] * A2 + b[0] * I;
  RealMatrix F = (V - U).partialPivLu().solve(V + U);
  for (int s = 0; s < squarings; ++s) F = F * F;
  return std::exp(mu) * F;
}

}  // namespace detail

/// e^{A t}.  Uses the eigendecomposition route P e^{Jt} P^{-1} (real part,
/// with the imaginary residual discarded after a magnitude check) when the
/// basis is well conditioned (cond <= 1e8), otherwise falls back to
/// scaling-and-squaring.  Both routes agree to ~1e-10 relative on desk-scale
/// inputs, which the test suite pins.
inline RealMatrix matrixExp(const RealMatrix& A, double t) {
  if (A.rows() != A.cols()) throw DimensionMismatch("matrixExp: square matrices only");
  if (!std::isfinite(t)) throw Error("matrixExp: t must be finite");

  std::optional<EigenStructure> eig;
  try {
    eig = eigendecompose(A);
  } catch (const Error&) {
    eig.reset();
  }
  if (eig && eig->basisCondition() <= 1e8) {
    const ComplexMatrix E = eig->basis * eig->expJordan(t) * eig->basis.inverse();
    const double imagNorm = E.imag().cwiseAbs().maxCoeff();
    const double realNorm = std::max(E.real().cwiseAbs().maxCoeff(), 1e-300);
    if (imagNorm <= 1e-8 * realNorm) return E.real();
    // Imaginary residual too large for comfort: fall through to Pade.
  }
  return detail::expmPade(A * t);
}

/// Operator norm of K under the requested vector norm.
inline double operatorNorm(const ComplexMatrix& K, const NormSpec& norm) {
  if (norm.kind == NormKind::spectral) return spectralNorm(K);

  if (!norm.weight) throw Error("operatorNorm: ellipsoidal norm needs a weight");
  if (K.imag().cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, K.real().cwiseAbs().maxCoeff()))
    throw Error("operatorNorm: ellipsoidal norm is defined for real matrices");
  const RealMatrix A = symmetrize(*norm.weight);
  Eigen::SelfAdjointEigenSolver<RealMatrix> es(A);
  if (es.info() != Eigen::Success) throw NonConvergence("operatorNorm: weight eigensolve failed");
  if (es.eigenvalues()(0) <= 0.0) throw Error("operatorNorm: weight must be positive definite");
  // sqrt(lambda_max(A^{-1} K^T A K)) computed stably as ||A^{1/2} K A^{-1/2}||.
  const RealVector sqrtEv = es.eigenvalues().cwiseSqrt();
  const RealMatrix S = es.eigenvectors() * sqrtEv.asDiagonal() * es.eigenvectors().transpose();
  const RealMatrix Sinv = es.eigenvectors() * sqrtEv.cwiseInverse().asDiagonal() *
                          es.eigenvectors().transpose();
  return spectralNorm(RealMatrix(S * K.real() * Sinv));
}

inline double operatorNorm(const RealMatrix& K, const NormSpec& norm) {
  return operatorNorm(ComplexMatrix(K.cast<std::complex<double>>()), norm);
}

/// Vector norm inducing operatorNorm: Euclidean, or sqrt(x^T W x).
inline double stateNorm(const RealVector& x, const NormSpec& norm) {
  if (norm.kind == NormKind::spectral) return x.norm();
  if (!norm.weight) throw Error("stateNorm: ellipsoidal norm needs a weight");
  if (norm.weight->rows() != x.size())
    throw DimensionMismatch("stateNorm: weight and vector sizes disagree");
  return std::sqrt(x.dot(symmetrize(*norm.weight) * x));
}

/// Largest |eigenvalue| of a real square matrix.
inline double spectralRadius(const RealMatrix& K) {
  if (K.rows() != K.cols()) throw DimensionMismatch("spectralRadius: square matrices only");
  Eigen::EigenSolver<RealMatrix> solver(K, /*computeEigenvectors=*/false);
  if (solver.info() != Eigen::Success) throw NonConvergence("spectralRadius: solver failed");
  return solver.eigenvalues().cwiseAbs().maxCoeff();
}

/// True iff lambda_min(sym(Q)) > margin.  Q is symmetrized first; inputs are
/// expected symmetric to ~1e-10 anyway.
inline bool isPositiveDefinite(const RealMatrix& Q, double margin) {
  if (Q.rows() != Q.cols()) throw DimensionMismatch("isPositiveDefinite: square matrices only");
  Eigen::SelfAdjointEigenSolver<RealMatrix> es(symmetrize(Q), Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw NonConvergence("isPositiveDefinite: eigensolve failed");
  return es.eigenvalues()(0) > margin;
}

}  // namespace dwellkit
