#pragma once

// Flow-based dwell/flee time computation and stabilizing jump-set
// construction.  Everything here works off the subsystems' Jordan data: an
// edge (p,q) taken after dwelling t in mode p contributes the factor
// P_q^{-1} M P_p e^{J_p t} to the evolution in Jordan coordinates, and the
// dwell/flee bounds are exactly the times that make every such factor a
// contraction.

#include "dwellkit/model.hpp"

#include <random>

namespace dwellkit {

struct MarginRequired : Error {
  explicit MarginRequired(const std::string& what) : Error(what) {}
};
struct FleeUndefined : Error {
  explicit FleeUndefined(const std::string& what) : Error(what) {}
};
struct EmptyEdgeSet : Error {
  explicit EmptyEdgeSet(const std::string& what) : Error(what) {}
};
struct NotAllStable : Error {
  explicit NotAllStable(const std::string& what) : Error(what) {}
};
struct ZeroInSet : Error {
  explicit ZeroInSet(const std::string& what) : Error(what) {}
};

// ---------------------------------------------------------------------------
// Decay constants
// ---------------------------------------------------------------------------

struct DecayConstants {
  double c = 1.0;
  double rate = 0.0;
};

/// |Re| of the critical eigenvalue: the closest-to-axis one on the left for
/// stable modes (lambda_p), the farthest-right one for unstable modes (mu_p).
/// In both cases this is the growth exponent of ||e^{J t}||.
inline double criticalRate(const SubsystemSpec& sub) {
  if (sub.stabilityClass == StabilityClass::marginal)
    throw Error("criticalRate: marginal modes have no decay/growth rate");
  double maxRe = -std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < sub.eig.eigenvalues.size(); ++i)
    maxRe = std::max(maxRe, sub.eig.eigenvalues(i).real());
  return std::abs(maxRe);
}

/// Default margin for defective modes: 10% of the critical rate.
inline double defaultDecayMargin(const SubsystemSpec& sub) { return 0.1 * criticalRate(sub); }

namespace detail {

/// sup_{t >= 0} of p(t) e^{-margin t} with p(t) = sum_{j<m} t^j/j!, the
/// polynomial envelope of a size-m Jordan block.  Coarse grid plus golden-
/// section refinement; the maximizer sits near (m-1)/margin.
inline double polyEnvelopeSup(int m, double margin) {
  const auto value = [m, margin](double t) {
    double term = 1.0, sum = 1.0;
    for (int j = 1; j < m; ++j) {
      term *= t / static_cast<double>(j);
      sum += term;
    }
    return sum * std::exp(-margin * t);
  };
  const double tMax = 10.0 * (static_cast<double>(m) / margin + 1.0);
  double bestT = 0.0, best = value(0.0);
  const int samples = 20000;
  for (int i = 1; i <= samples; ++i) {
    const double t = tMax * i / samples;
    const double v = value(t);
    if (v > best) {
      best = v;
      bestT = t;
    }
  }
  // Golden-section polish around the grid winner.
  double lo = std::max(0.0, bestT - tMax / samples), hi = bestT + tMax / samples;
  const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
  for (int it = 0; it < 200; ++it) {
    const double a = hi - phi * (hi - lo), b = lo + phi * (hi - lo);
    if (value(a) < value(b))
      lo = a;
    else
      hi = b;
  }
  return std::max(best, value(0.5 * (lo + hi)));
}

}  // namespace detail

/// Envelope constants (c, rate) with ||e^{J t}|| <= c e^{-rate t} for stable
/// modes and <= c e^{+rate t} for unstable ones, t >= 0.  Diagonalizable
/// modes get the exact envelope c = 1, rate = criticalRate.  Defective modes
/// trade eps of rate for a finite constant: rate = criticalRate -/+ margin
/// and c = sup_t p(t) e^{-margin t} over the largest block's polynomial.
inline DecayConstants decayConstants(const SubsystemSpec& sub,
                                     std::optional<double> margin = {}) {
  if (sub.stabilityClass == StabilityClass::marginal)
    throw Error("decayConstants: mode " + std::to_string(sub.modeId) + " is marginal");
  const double critical = criticalRate(sub);
  if (!sub.eig.defective) return {1.0, critical};

  if (!margin)
    throw MarginRequired("decayConstants: mode " + std::to_string(sub.modeId) +
                         " is defective; an explicit decay margin is required");
  const double m = *margin;
  if (!(m > 0.0)) throw Error("decayConstants: margin must be positive");
  if (sub.stabilityClass == StabilityClass::stable && !(m < critical))
    throw Error("decayConstants: margin must stay below the critical rate " +
                std::to_string(critical));
  DecayConstants out;
  out.rate = (sub.stabilityClass == StabilityClass::stable) ? critical - m : critical + m;
  out.c = detail::polyEnvelopeSup(sub.eig.largestBlock(), m);
  return out;
}

/// Copy of the spec with every subsystem's (c, rate) filled in.  Margins for
/// defective modes come from `margins` when present, otherwise the 10%
/// default is applied (decayConstants itself never defaults).
inline SwitchedSystemSpec withDecayConstants(const SwitchedSystemSpec& spec,
                                             const std::map<ModeId, double>& margins = {}) {
  SwitchedSystemSpec out = spec;
  for (auto& sub : out.subsystems) {
    std::optional<double> margin;
    if (const auto it = margins.find(sub.modeId); it != margins.end()) margin = it->second;
    if (!margin && sub.eig.defective) margin = defaultDecayMargin(sub);
    const DecayConstants dc = decayConstants(sub, margin);
    sub.c = dc.c;
    sub.rate = dc.rate;
  }
  return out;
}

namespace detail {

inline const SubsystemSpec& requireConstants(const SwitchedSystemSpec& spec, ModeId p) {
  const SubsystemSpec& sub = spec.subsystem(p);
  if (!(sub.c > 0.0) || !(sub.rate > 0.0))
    throw Error("mode " + std::to_string(p) +
                " has no decay constants; run withDecayConstants first");
  return sub;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Time constraints
// ---------------------------------------------------------------------------

struct TimeConstraints {
  enum class Kind { uniform, modeDependent };
  Kind kind = Kind::uniform;
  std::optional<double> dwell;            // tau   (uniform)
  std::optional<double> flee;             // eta   (uniform)
  std::map<ModeId, double> dwellByMode;   // tau_p (mode-dependent)
  std::map<ModeId, double> fleeByMode;    // eta_p (mode-dependent)

  [[nodiscard]] double dwellFor(ModeId p) const {
    if (kind == Kind::uniform) {
      if (!dwell) throw Error("no dwell bound available");
      return *dwell;
    }
    const auto it = dwellByMode.find(p);
    if (it == dwellByMode.end())
      throw Error("no dwell bound for mode " + std::to_string(p));
    return it->second;
  }
  [[nodiscard]] double fleeFor(ModeId p) const {
    if (kind == Kind::uniform) {
      if (!flee) throw Error("no flee bound available");
      return *flee;
    }
    const auto it = fleeByMode.find(p);
    if (it == fleeByMode.end()) throw Error("no flee bound for mode " + std::to_string(p));
    return it->second;
  }
};

namespace detail {

/// ln(c_p ||P_q^{-1} M P_p||) / rate_p — the edge's raw dwell (stable p) or
/// negated flee (unstable p) contribution.
inline double edgeTerm(const SwitchedSystemSpec& spec, ModeId p, ModeId q,
                       const RealMatrix& M) {
  const SubsystemSpec& src = requireConstants(spec, p);
  const SubsystemSpec& dst = spec.subsystem(q);
  const double norm =
      operatorNorm(ComplexMatrix(dst.eig.basis.inverse() * M * src.eig.basis), spec.norm);
  if (norm <= 0.0) throw ZeroInSet("zero jump matrix on edge (" + std::to_string(p) + "," +
                                   std::to_string(q) + ")");
  return std::log(src.c * norm) / src.rate;
}

/// Core of the flow theorems, uniform and mode-dependent in one pass.  For
/// every graph edge the inner maximum runs over the applicable jump matrices
/// (a single reset, or all impulse members/vertices — the norm is convex, so
/// hull maxima sit at vertices).  Stable sources feed the dwell side
/// (clamped at 0: a negative formula value means arbitrary switching is
/// fine); unstable sources feed the flee side, which must come out positive
/// or the flee time does not exist.
inline TimeConstraints flowBounds(const SwitchedSystemSpec& spec, bool modeDependent) {
  if (spec.graph.edges.empty()) throw EmptyEdgeSet("the mode graph has no edges");

  std::map<ModeId, double> dwellTerms, fleeTerms;
  for (const auto& [p, q] : spec.graph.edges) {
    const auto matrices = jumpMatricesForEdge(spec.jumps, p, q);
    if (matrices.empty())
      throw Error("edge (" + std::to_string(p) + "," + std::to_string(q) +
                  ") has no jump matrix");
    double inner = -std::numeric_limits<double>::infinity();
    for (const RealMatrix& M : matrices) inner = std::max(inner, edgeTerm(spec, p, q, M));

    const auto sc = spec.subsystem(p).stabilityClass;
    auto& slot = (sc == StabilityClass::stable) ? dwellTerms : fleeTerms;
    const auto it = slot.find(p);
    if (it == slot.end())
      slot[p] = inner;
    else
      it->second = std::max(it->second, inner);
  }

  TimeConstraints out;
  out.kind = modeDependent ? TimeConstraints::Kind::modeDependent
                           : TimeConstraints::Kind::uniform;
  for (auto& [p, term] : dwellTerms) out.dwellByMode[p] = std::max(0.0, term);
  for (auto& [p, term] : fleeTerms) {
    if (term >= 0.0)
      throw FleeUndefined("mode " + std::to_string(p) +
                          " admits no flee time: some outgoing jump has c ||P_q^{-1} M P_p|| >= 1"
                          " (rescale the bases first)");
    out.fleeByMode[p] = -term;
  }
  if (!modeDependent) {
    if (!out.dwellByMode.empty()) {
      double tau = 0.0;
      for (const auto& [p, v] : out.dwellByMode) tau = std::max(tau, v);
      out.dwell = tau;
    }
    if (!out.fleeByMode.empty()) {
      double eta = std::numeric_limits<double>::infinity();
      for (const auto& [p, v] : out.fleeByMode) eta = std::min(eta, v);
      out.flee = eta;
    }
    out.dwellByMode.clear();
    out.fleeByMode.clear();
  }
  return out;
}

}  // namespace detail

/// Uniform dwell/flee bounds for a reset system: tau_R over edges with a
/// stable source, eta_R over edges with an unstable source.  Absent edge
/// classes simply leave that bound unset.
inline TimeConstraints flowDwellFlee(const SwitchedSystemSpec& spec) {
  if (!std::holds_alternative<ResetCollection>(spec.jumps))
    throw Error("flowDwellFlee: spec carries impulses; use flowDwellFleeImpulsive");
  return detail::flowBounds(spec, false);
}

/// Per-mode bounds: tau_p / eta_p maximize over mode p's outgoing edges only.
inline TimeConstraints flowDwellFleeModeDependent(const SwitchedSystemSpec& spec) {
  if (!std::holds_alternative<ResetCollection>(spec.jumps))
    throw Error("flowDwellFleeModeDependent: spec carries impulses");
  return detail::flowBounds(spec, true);
}

/// Impulsive variants: the inner maximum additionally runs over the impulse
/// set (vertices for hulls).
inline TimeConstraints flowDwellFleeImpulsive(const SwitchedSystemSpec& spec) {
  if (!std::holds_alternative<ImpulseSet>(spec.jumps))
    throw Error("flowDwellFleeImpulsive: spec carries resets; use flowDwellFlee");
  return detail::flowBounds(spec, false);
}

inline TimeConstraints flowDwellFleeImpulsiveModeDependent(const SwitchedSystemSpec& spec) {
  if (!std::holds_alternative<ImpulseSet>(spec.jumps))
    throw Error("flowDwellFleeImpulsiveModeDependent: spec carries resets");
  return detail::flowBounds(spec, true);
}

// ---------------------------------------------------------------------------
// Admissible jump balls
// ---------------------------------------------------------------------------

/// The norm ball of jump matrices admissible on edge (p,q) at the given time
/// constraints: ||P_q^{-1} M P_p|| <= B with B = c_p^{-1} e^{lambda_p tau}
/// (stable source) or c_p^{-1} e^{-mu_p eta} (unstable source), zero matrix
/// excluded.
struct AdmissibleJumpBall {
  ModeId source = 0, target = 0;
  bool stableSource = true;
  double bound = 0.0;
  ComplexMatrix sourceBasis, targetBasisInverse;
  NormSpec norm;

  [[nodiscard]] double transformedNorm(const RealMatrix& M) const {
    return operatorNorm(ComplexMatrix(targetBasisInverse * M * sourceBasis), norm);
  }
  [[nodiscard]] bool contains(const RealMatrix& M) const {
    const double n = transformedNorm(M);
    return n > 0.0 && n <= bound;
  }
};

inline AdmissibleJumpBall admissibleJumpBall(const SwitchedSystemSpec& spec, ModeId p, ModeId q,
                                             const TimeConstraints& constraints) {
  const SubsystemSpec& src = detail::requireConstants(spec, p);
  const SubsystemSpec& dst = spec.subsystem(q);
  AdmissibleJumpBall ball;
  ball.source = p;
  ball.target = q;
  ball.stableSource = (src.stabilityClass == StabilityClass::stable);
  if (src.stabilityClass == StabilityClass::stable)
    ball.bound = std::exp(src.rate * constraints.dwellFor(p)) / src.c;
  else if (src.stabilityClass == StabilityClass::unstable)
    ball.bound = std::exp(-src.rate * constraints.fleeFor(p)) / src.c;
  else
    throw Error("admissibleJumpBall: marginal source mode");
  ball.sourceBasis = src.eig.basis;
  ball.targetBasisInverse = dst.eig.basis.inverse();
  ball.norm = spec.norm;
  return ball;
}

// ---------------------------------------------------------------------------
// Stabilizing resets
// ---------------------------------------------------------------------------

/// Resets R_{(p,q)} = d_p^{-1} P_q P_p^{-1} (real part, renormalized) with
/// d_p > c_p make the flow bound vanish: the transformed norm is exactly
/// 1/d_p < 1/c_p, so every edge term is negative and tau_R clamps to 0.
inline ResetCollection stabilizingResets(const SwitchedSystemSpec& spec,
                                         const std::map<ModeId, double>& d) {
  for (const auto& sub : spec.subsystems)
    if (sub.stabilityClass != StabilityClass::stable)
      throw NotAllStable("stabilizingResets: mode " + std::to_string(sub.modeId) +
                         " is not stable");
  ResetCollection out;
  for (const auto& [p, q] : spec.graph.edges) {
    const SubsystemSpec& src = detail::requireConstants(spec, p);
    const SubsystemSpec& dst = spec.subsystem(q);
    const auto it = d.find(p);
    if (it == d.end()) throw Error("stabilizingResets: no scale d for mode " + std::to_string(p));
    const double dp = it->second;
    if (!(dp > src.c))
      throw Error("stabilizingResets: need d > c = " + std::to_string(src.c) + " for mode " +
                  std::to_string(p));
    // Re(P_q P_p^{-1}) normalized so the transformed norm is exactly 1/d_p.
    // When the product is already real this reduces to d_p^{-1} P_q P_p^{-1}
    // because ||P_q^{-1} (P_q P_p^{-1}) P_p|| = 1.
    const RealMatrix G = (dst.eig.basis * src.eig.basis.inverse()).real();
    const double gNorm = operatorNorm(
        ComplexMatrix(dst.eig.basis.inverse() * G * src.eig.basis), spec.norm);
    if (gNorm <= 1e-12)
      throw Error("stabilizingResets: real part of P_q P_p^{-1} degenerates on edge (" +
                  std::to_string(p) + "," + std::to_string(q) + ")");
    out.resets[{p, q}] = G / (dp * gNorm);
  }
  return out;
}

inline ResetCollection stabilizingResets(const SwitchedSystemSpec& spec, double dUniform) {
  std::map<ModeId, double> d;
  for (const auto& sub : spec.subsystems) d[sub.modeId] = dUniform;
  return stabilizingResets(spec, d);
}

// ---------------------------------------------------------------------------
// Constrained jump selection
// ---------------------------------------------------------------------------

enum class SelectionMode { resets, impulses };

struct EdgeSelection {
  ModePair edge;
  RealMatrix matrix;        // the selected jump
  int memberIndex = -1;     // index into the candidate set (-1 for hull mixtures)
  RealVector hullCoefficients;  // simplex weights when the set is a hull
  double transformedNorm = 0.0;
};

struct SelectionResult {
  std::optional<double> tau;  // tau*
  std::optional<double> eta;  // eta*
  std::vector<EdgeSelection> perEdge;      // resets mode: one per graph edge
  std::vector<EdgeSelection> shared;       // impulses mode: one per edge class
  std::map<ModeId, double> rescaleFactors; // basis scaling applied up front
};

namespace detail {

/// Euclidean projection onto the probability simplex (sort-based).
inline RealVector projectSimplex(RealVector y) {
  const Eigen::Index k = y.size();
  std::vector<double> u(y.data(), y.data() + k);
  std::sort(u.begin(), u.end(), std::greater<double>());
  double cumulative = 0.0, thresholdValue = 0.0;
  int support = 0;
  for (int j = 0; j < k; ++j) {
    cumulative += u[static_cast<size_t>(j)];
    const double candidate = (cumulative - 1.0) / (j + 1);
    if (u[static_cast<size_t>(j)] - candidate > 0) {
      support = j + 1;
      thresholdValue = candidate;
    }
  }
  (void)support;
  for (Eigen::Index i = 0; i < k; ++i) y(i) = std::max(0.0, y(i) - thresholdValue);
  return y;
}

/// Minimize a convex function of a simplex-constrained mixture by projected
/// (sub)gradient descent with random restarts.  `objective` returns the value
/// and writes the (sub)gradient.  Tolerance 1e-10 on the objective, 50
/// restarts seeded deterministically.
template <typename Objective>
std::pair<double, RealVector> minimizeOverSimplex(Eigen::Index k, const Objective& objective) {
  std::mt19937 rng(12345u);
  std::gamma_distribution<double> gamma(1.0, 1.0);
  double bestValue = std::numeric_limits<double>::infinity();
  RealVector bestAlpha = RealVector::Constant(k, 1.0 / static_cast<double>(k));

  for (int restart = 0; restart < 50; ++restart) {
    RealVector alpha(k);
    if (restart == 0) {
      alpha.setConstant(1.0 / static_cast<double>(k));
    } else if (restart <= static_cast<int>(k)) {
      alpha.setZero();
      alpha((restart - 1) % k) = 1.0;  // vertices as starts
    } else {
      for (Eigen::Index i = 0; i < k; ++i) alpha(i) = gamma(rng);
      alpha /= alpha.sum();
    }

    RealVector grad(k);
    double value = objective(alpha, grad);
    double step = 0.5;
    for (int iter = 0; iter < 400; ++iter) {
      RealVector trial = projectSimplex(alpha - step * grad);
      RealVector trialGrad(k);
      const double trialValue = objective(trial, trialGrad);
      if (trialValue < value - 1e-14) {
        const double improvement = value - trialValue;
        alpha = trial;
        grad = trialGrad;
        value = trialValue;
        step *= 1.2;
        if (improvement < 1e-10 && iter > 20) break;
      } else {
        step *= 0.5;
        if (step < 1e-14) break;
      }
    }
    if (value < bestValue) {
      bestValue = value;
      bestAlpha = alpha;
    }
  }
  return {bestValue, bestAlpha};
}

/// Norm of the transformed mixture and its gradient in the mixture weights,
/// via the top singular pair: d||K(alpha)||/d alpha_i = Re(u^* K_i v).
struct TransformedMixture {
  std::vector<ComplexMatrix> transformed;  // K_i = P_q^{-1} M_i P_p

  double normAndGradient(const RealVector& alpha, RealVector& grad, const NormSpec& norm) const {
    ComplexMatrix K = ComplexMatrix::Zero(transformed.front().rows(), transformed.front().cols());
    for (size_t i = 0; i < transformed.size(); ++i) K += alpha(static_cast<Eigen::Index>(i)) * transformed[i];
    if (norm.kind == NormKind::spectral) {
      Eigen::JacobiSVD<ComplexMatrix> svd(K, Eigen::ComputeThinU | Eigen::ComputeThinV);
      const ComplexVector u = svd.matrixU().col(0), v = svd.matrixV().col(0);
      for (size_t i = 0; i < transformed.size(); ++i)
        grad(static_cast<Eigen::Index>(i)) = (u.adjoint() * transformed[i] * v)(0, 0).real();
      return svd.singularValues()(0);
    }
    // Ellipsoidal norm: evaluate through operatorNorm and differentiate by
    // the equivalent weighted-spectral form S K S^{-1}.
    Eigen::SelfAdjointEigenSolver<RealMatrix> es(symmetrize(*norm.weight));
    const RealVector sq = es.eigenvalues().cwiseSqrt();
    const RealMatrix S = es.eigenvectors() * sq.asDiagonal() * es.eigenvectors().transpose();
    const RealMatrix Sinv = es.eigenvectors() * sq.cwiseInverse().asDiagonal() *
                            es.eigenvectors().transpose();
    const ComplexMatrix W = S.cast<std::complex<double>>() * K * Sinv.cast<std::complex<double>>();
    Eigen::JacobiSVD<ComplexMatrix> svd(W, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const ComplexVector u = svd.matrixU().col(0), v = svd.matrixV().col(0);
    for (size_t i = 0; i < transformed.size(); ++i) {
      const ComplexMatrix Wi = S.cast<std::complex<double>>() * transformed[i] *
                               Sinv.cast<std::complex<double>>();
      grad(static_cast<Eigen::Index>(i)) = (u.adjoint() * Wi * v)(0, 0).real();
    }
    return svd.singularValues()(0);
  }
};

inline TransformedMixture transformCandidates(const SwitchedSystemSpec& spec, ModeId p, ModeId q,
                                              const std::vector<RealMatrix>& candidates) {
  TransformedMixture mix;
  const ComplexMatrix Pqi = spec.subsystem(q).eig.basis.inverse();
  const ComplexMatrix& Pp = spec.subsystem(p).eig.basis;
  for (const auto& M : candidates) mix.transformed.push_back(Pqi * M * Pp);
  return mix;
}

inline RealMatrix mixtureMatrix(const std::vector<RealMatrix>& candidates, const RealVector& alpha) {
  RealMatrix M = RealMatrix::Zero(candidates.front().rows(), candidates.front().cols());
  for (size_t i = 0; i < candidates.size(); ++i) M += alpha(static_cast<Eigen::Index>(i)) * candidates[i];
  return M;
}

}  // namespace detail

/// Best jump choice from a candidate set, and the time constraints the
/// selection certifies.
///
/// resets mode: each edge independently takes the candidate (or hull point)
/// of least transformed norm; tau* / eta* then follow the flow formulas with
/// those minima.  Ties go to the first index.
///
/// impulses mode: one shared choice per edge class (the impulse rule cannot
/// see which edge fired), picked to minimize the worst edge term of that
/// class — the min-max counterpart of the per-edge selection.
///
/// When unstable modes are present the caller must pass etaMin; the bases are
/// first rescaled with epsilon = min_{p unstable} e^{-mu_p etaMin}, which is
/// precisely what makes every unstable edge term negative at flee times up
/// to etaMin.
inline SelectionResult constrainedJumpSelection(const SwitchedSystemSpec& specIn,
                                                const ImpulseSet& candidates, SelectionMode mode,
                                                std::optional<double> etaMin = {},
                                                double xi = 0.5) {
  if (candidates.matrices.empty()) throw ZeroInSet("empty candidate set");
  for (const auto& M : candidates.matrices)
    if (M.norm() == 0.0) throw ZeroInSet("candidate set contains the zero matrix");
  if (candidates.kind == ImpulseSet::Kind::convexHull && hullContainsZero(candidates))
    throw ZeroInSet("candidate hull contains the zero matrix");

  SwitchedSystemSpec spec = specIn;
  if (spec.graph.edges.empty()) throw EmptyEdgeSet("the mode graph has no edges");
  SelectionResult result;
  for (const auto& sub : spec.subsystems) result.rescaleFactors[sub.modeId] = 1.0;

  bool anyUnstable = false;
  for (const auto& sub : spec.subsystems)
    anyUnstable |= (sub.stabilityClass == StabilityClass::unstable);
  if (anyUnstable) {
    if (!etaMin) throw Error("constrainedJumpSelection: etaMin required with unstable modes");
    double epsilon = 1.0;
    for (const auto& sub : spec.subsystems)
      if (sub.stabilityClass == StabilityClass::unstable)
        epsilon = std::min(epsilon, std::exp(-detail::requireConstants(spec, sub.modeId).rate *
                                             *etaMin));
    JumpRule candidateRule = candidates;
    const RescaleResult rescale = rescaleBases(spec, candidateRule, epsilon, xi);
    for (auto& sub : spec.subsystems) sub.eig.basis = rescale.bases.at(sub.modeId);
    result.rescaleFactors = rescale.scales;
  }

  const bool hull = candidates.kind == ImpulseSet::Kind::convexHull;
  const auto minimizeEdge = [&](ModeId p, ModeId q) {
    EdgeSelection sel;
    sel.edge = {p, q};
    const auto mix = detail::transformCandidates(spec, p, q, candidates.matrices);
    if (!hull) {
      double best = std::numeric_limits<double>::infinity();
      for (size_t i = 0; i < mix.transformed.size(); ++i) {
        const double n = operatorNorm(mix.transformed[i], spec.norm);
        if (n < best - 1e-15) {  // strict improvement => first index wins ties
          best = n;
          sel.memberIndex = static_cast<int>(i);
        }
      }
      sel.matrix = candidates.matrices[static_cast<size_t>(sel.memberIndex)];
      sel.transformedNorm = best;
    } else {
      const auto k = static_cast<Eigen::Index>(candidates.matrices.size());
      const auto [value, alpha] = detail::minimizeOverSimplex(
          k, [&](const RealVector& a, RealVector& g) {
            return mix.normAndGradient(a, g, spec.norm);
          });
      sel.hullCoefficients = alpha;
      sel.matrix = detail::mixtureMatrix(candidates.matrices, alpha);
      sel.transformedNorm = value;
    }
    return sel;
  };

  std::map<ModeId, double> dwellTerms, fleeTerms;
  const auto fold = [&](ModeId p, double term) {
    const bool stable = spec.subsystem(p).stabilityClass == StabilityClass::stable;
    auto& slot = stable ? dwellTerms : fleeTerms;
    const auto it = slot.find(p);
    if (it == slot.end())
      slot[p] = term;
    else
      it->second = std::max(it->second, term);
  };

  if (mode == SelectionMode::resets) {
    for (const auto& [p, q] : spec.graph.edges) {
      EdgeSelection sel = minimizeEdge(p, q);
      if (sel.transformedNorm <= 0.0) throw ZeroInSet("selection degenerated to zero");
      const SubsystemSpec& src = detail::requireConstants(spec, p);
      fold(p, std::log(src.c * sel.transformedNorm) / src.rate);
      result.perEdge.push_back(std::move(sel));
    }
  } else {
    // One shared choice per edge class: minimize the class's worst edge term.
    for (const bool stableClass : {true, false}) {
      std::vector<ModePair> edges;
      for (const auto& [p, q] : spec.graph.edges)
        if ((spec.subsystem(p).stabilityClass == StabilityClass::stable) == stableClass)
          edges.push_back({p, q});
      if (edges.empty()) continue;

      std::vector<detail::TransformedMixture> mixes;
      mixes.reserve(edges.size());
      for (const auto& [p, q] : edges)
        mixes.push_back(detail::transformCandidates(spec, p, q, candidates.matrices));
      const auto classTerm = [&](size_t e, double norm) {
        const SubsystemSpec& src = detail::requireConstants(spec, edges[e].first);
        return std::log(src.c * norm) / src.rate;
      };

      EdgeSelection sel;
      sel.edge = edges.front();
      double bestWorst = std::numeric_limits<double>::infinity();
      if (!hull) {
        for (size_t i = 0; i < candidates.matrices.size(); ++i) {
          double worst = -std::numeric_limits<double>::infinity();
          for (size_t e = 0; e < edges.size(); ++e)
            worst = std::max(worst, classTerm(e, operatorNorm(mixes[e].transformed[i], spec.norm)));
          if (worst < bestWorst - 1e-15) {
            bestWorst = worst;
            sel.memberIndex = static_cast<int>(i);
          }
        }
        sel.matrix = candidates.matrices[static_cast<size_t>(sel.memberIndex)];
      } else {
        const auto k = static_cast<Eigen::Index>(candidates.matrices.size());
        const auto [value, alpha] = detail::minimizeOverSimplex(
            k, [&](const RealVector& a, RealVector& g) {
              // Subgradient of the max: gradient of the active edge term.
              double worst = -std::numeric_limits<double>::infinity();
              RealVector gActive(k);
              for (size_t e = 0; e < edges.size(); ++e) {
                RealVector ge(k);
                const double n = mixes[e].normAndGradient(a, ge, spec.norm);
                const SubsystemSpec& src = spec.subsystem(edges[e].first);
                const double term = std::log(src.c * std::max(n, 1e-300)) / src.rate;
                if (term > worst) {
                  worst = term;
                  gActive = ge / (std::max(n, 1e-300) * src.rate);
                }
              }
              g = gActive;
              return worst;
            });
        bestWorst = value;
        sel.hullCoefficients = alpha;
        sel.matrix = detail::mixtureMatrix(candidates.matrices, alpha);
      }
      for (size_t e = 0; e < edges.size(); ++e) {
        const auto mixNorm = operatorNorm(
            ComplexMatrix(spec.subsystem(edges[e].second).eig.basis.inverse() * sel.matrix *
                          spec.subsystem(edges[e].first).eig.basis),
            spec.norm);
        sel.transformedNorm = std::max(sel.transformedNorm, mixNorm);
        fold(edges[e].first, classTerm(e, mixNorm));
      }
      result.shared.push_back(std::move(sel));
    }
  }

  if (!dwellTerms.empty()) {
    double tau = 0.0;
    for (const auto& [p, v] : dwellTerms) tau = std::max(tau, v);
    result.tau = tau;
  }
  if (!fleeTerms.empty()) {
    double worst = -std::numeric_limits<double>::infinity();
    for (const auto& [p, v] : fleeTerms) worst = std::max(worst, v);
    if (worst >= 0.0)
      throw FleeUndefined("constrainedJumpSelection: no positive flee time exists");
    result.eta = -worst;
  }
  return result;
}

// ---------------------------------------------------------------------------
// Sampled-flow certification
// ---------------------------------------------------------------------------

/// Grid evaluation of K_{p,q}(t) = ||P_q^{-1} M P_p e^{J_p t}||: for stable p
/// over {tau_p, tau_p + 0.1, ..., tau_p + 20}, for unstable p over
/// {0.01, 0.11, ...} up to and including eta_p.  The flow theorems promise
/// K <= 1 everywhere on these grids.
struct GridReport {
  std::map<ModePair, double> maxPerEdge;
  double worst = 0.0;
};

inline GridReport sampledFlowGrids(const SwitchedSystemSpec& spec,
                                   const TimeConstraints& constraints) {
  GridReport report;
  for (const auto& [p, q] : spec.graph.edges) {
    const SubsystemSpec& src = detail::requireConstants(spec, p);
    const ComplexMatrix Pqi = spec.subsystem(q).eig.basis.inverse();

    std::vector<double> grid;
    if (src.stabilityClass == StabilityClass::stable) {
      const double tau = constraints.dwellFor(p);
      for (int i = 0; i <= 200; ++i) grid.push_back(tau + 0.1 * i);
    } else {
      const double eta = constraints.fleeFor(p);
      for (double t = 0.01; t < eta; t += 0.1) grid.push_back(t);
      grid.push_back(eta);
    }

    double edgeMax = 0.0;
    for (const RealMatrix& M : jumpMatricesForEdge(spec.jumps, p, q)) {
      const ComplexMatrix KM = Pqi * M * src.eig.basis;
      for (const double t : grid)
        edgeMax = std::max(edgeMax,
                           operatorNorm(ComplexMatrix(KM * src.eig.expJordan(t)), spec.norm));
    }
    report.maxPerEdge[{p, q}] = edgeMax;
    report.worst = std::max(report.worst, edgeMax);
  }
  return report;
}

}  // namespace dwellkit
