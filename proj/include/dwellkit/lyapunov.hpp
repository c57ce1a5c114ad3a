#pragma once

// Multiple-Lyapunov-function machinery: LMI template instantiation,
// certificate verification by direct eigenvalue slack, a small alternating-
// projection feasibility search (the problem sizes here are 2–3 dimensional
// with at most a couple dozen constraints), dwell-time bisection, and the
// mixed stable/unstable rate condition.

#include "dwellkit/bounds.hpp"
#include "dwellkit/model.hpp"

namespace dwellkit {

struct RatioInvalid : Error {
  explicit RatioInvalid(const std::string& what) : Error(what) {}
};
struct InfeasibleAtUpperBound : Error {
  explicit InfeasibleAtUpperBound(const std::string& what) : Error(what) {}
};

// ---------------------------------------------------------------------------
// Certificates
// ---------------------------------------------------------------------------

struct LyapunovCertificate {
  std::map<ModeId, RealMatrix> Q;       // V_p(x) = x^T Q_p x
  std::map<ModeId, double> lambda;      // decay rates of stable modes
  std::map<ModeId, double> mu;          // growth rates of unstable modes
  std::map<ModePair, double> gamma;     // jump growth factors

  /// lambda = min_p lambda_p (0 when no stable modes carry a rate).
  [[nodiscard]] double minLambda() const {
    double v = std::numeric_limits<double>::infinity();
    for (const auto& [p, l] : lambda) v = std::min(v, l);
    return lambda.empty() ? 0.0 : v;
  }
  /// mu = max_p mu_p (0 when no unstable modes carry a rate).
  [[nodiscard]] double maxMu() const {
    double v = 0.0;
    for (const auto& [p, m] : mu) v = std::max(v, m);
    return v;
  }
  /// gamma = max over pairs (1 when no jump factors are recorded).
  [[nodiscard]] double maxGamma() const {
    double v = 0.0;
    for (const auto& [e, g] : gamma) v = std::max(v, g);
    return gamma.empty() ? 1.0 : v;
  }

  [[nodiscard]] double value(ModeId p, const RealVector& x) const {
    const auto it = Q.find(p);
    if (it == Q.end()) throw Error("certificate has no Q for mode " + std::to_string(p));
    return x.dot(it->second * x);
  }
};

// ---------------------------------------------------------------------------
// LMI systems
// ---------------------------------------------------------------------------

/// One semidefinite constraint S(Q) ≼ -margin·I, with
///   S(Q) = constant + sum_t coef_t (T_t^T Q_{m_t} U_t + U_t^T Q_{m_t} T_t),
/// which covers every template in use: decay (T = I, U = A), jumps
/// (T = U = G, coef 1/2), rate shifts (T = U = I), and the Q ≽ I
/// normalization (coef -1/2, constant I).
struct LmiConstraint {
  enum class Kind { decay, jumpDwell, jumpRate, rateStable, rateUnstable, positivity };
  struct Term {
    ModeId mode;
    double coefficient;
    RealMatrix T, U;
  };
  Kind kind;
  std::string label;
  std::vector<Term> terms;
  RealMatrix constant;
  double margin = 0.0;

  [[nodiscard]] RealMatrix evaluate(const std::map<ModeId, RealMatrix>& Q) const {
    RealMatrix S = constant;
    for (const auto& term : terms) {
      const auto it = Q.find(term.mode);
      if (it == Q.end())
        throw DimensionMismatch("constraint " + label + ": no Q for mode " +
                                std::to_string(term.mode));
      if (it->second.rows() != term.T.rows())
        throw DimensionMismatch("constraint " + label + ": Q dimension mismatch");
      S += term.coefficient *
           (term.T.transpose() * it->second * term.U + term.U.transpose() * it->second * term.T);
    }
    return symmetrize(S);
  }
};

struct LmiSystem {
  std::vector<LmiConstraint> constraints;
  std::map<ModeId, Eigen::Index> dims;  // Q variables and their sizes
  // Rate metadata stamped into certificates produced from this system.
  std::map<ModeId, double> lambda, mu;
  std::map<ModePair, double> gamma;

  [[nodiscard]] size_t countOf(LmiConstraint::Kind kind) const {
    size_t n = 0;
    for (const auto& c : constraints) n += (c.kind == kind) ? 1 : 0;
    return n;
  }
};

enum class LmiTemplate { resetDwell, impulseDwell, geromelColaneri, hespanhaMorse, mixedRate };

struct LmiParameters {
  std::optional<double> tau;           // uniform dwell
  std::map<ModeId, double> tauByMode;  // mode-dependent dwell (used when tau is absent)
  // Rate constants for the mixedRate template.
  std::map<ModeId, double> lambda;
  std::map<ModeId, double> mu;
  std::map<ModePair, double> gamma;
  double gammaUniform = 1.0;
};

namespace detail {

inline double dwellParameterFor(const LmiParameters& params, ModeId q) {
  if (params.tau) return *params.tau;
  const auto it = params.tauByMode.find(q);
  if (it == params.tauByMode.end())
    throw Error("no dwell parameter for mode " + std::to_string(q));
  return it->second;
}

inline std::string edgeLabel(const char* stem, ModeId p, ModeId q) {
  return std::string(stem) + "(" + std::to_string(p) + "->" + std::to_string(q) + ")";
}

inline LmiConstraint decayConstraint(const SubsystemSpec& sub) {
  LmiConstraint c;
  c.kind = LmiConstraint::Kind::decay;
  c.label = "decay(" + std::to_string(sub.modeId) + ")";
  const Eigen::Index n = sub.A.rows();
  c.terms = {{sub.modeId, 1.0, RealMatrix::Identity(n, n), sub.A}};
  c.constant = RealMatrix::Zero(n, n);
  c.margin = 1e-6 * spectralNorm(sub.A);
  return c;
}

inline LmiConstraint positivityConstraint(ModeId p, Eigen::Index n) {
  LmiConstraint c;
  c.kind = LmiConstraint::Kind::positivity;
  c.label = "posdef(" + std::to_string(p) + ")";
  c.terms = {{p, -0.5, RealMatrix::Identity(n, n), RealMatrix::Identity(n, n)}};
  c.constant = RealMatrix::Identity(n, n);  // I - Q ≼ 0, the Q ≽ I normalization
  return c;
}

/// G^T Q_to G - Q_from ≼ 0 (jump-dwell and arbitrary-switching shapes).
inline LmiConstraint sandwichConstraint(ModeId from, ModeId to, const RealMatrix& G,
                                        Eigen::Index n, std::string label) {
  LmiConstraint c;
  c.kind = LmiConstraint::Kind::jumpDwell;
  c.label = std::move(label);
  c.terms = {{to, 0.5, G, G},
             {from, -0.5, RealMatrix::Identity(n, n), RealMatrix::Identity(n, n)}};
  c.constant = RealMatrix::Zero(n, n);
  return c;
}

}  // namespace detail

/// Instantiate one of the certificate templates over a validated spec.
///
/// resetDwell        decay + e^{A_p^T tau_p} R_{(p,q)}^T Q_q R_{(p,q)} e^{A_p tau_p} ≼ Q_p
/// impulseDwell      the same with the inner matrix running over the impulse
///                   set (hull vertices only — the §-style convexity reduction),
///                   k·|P|·(|P|-1) jump constraints on a complete graph
/// geromelColaneri   decay + e^{A_p^T tau_p} Q_q e^{A_p tau_p} ≼ Q_p (no jumps)
/// hespanhaMorse     decay + R_{(p,q)}^T Q_q R_{(p,q)} ≼ Q_p (arbitrary switching)
/// mixedRate         Q_pA_p + A_p^TQ_p ≼ -lambda_p Q_p (stable) / ≼ mu_p Q_p
///                   (unstable) + R_{(p,q)}^T Q_q R_{(p,q)} ≼ gamma_{(p,q)} Q_p
///
/// Every template additionally emits one Q_p ≽ I normalization per mode (the
/// constraints above are homogeneous in Q, so this costs no generality).
inline LmiSystem buildLmiSystem(const SwitchedSystemSpec& spec, LmiTemplate tmpl,
                                const LmiParameters& params = {}) {
  LmiSystem sys;
  for (const auto& sub : spec.subsystems) sys.dims[sub.modeId] = sub.A.rows();

  const bool wantsResets = tmpl == LmiTemplate::resetDwell || tmpl == LmiTemplate::hespanhaMorse ||
                           tmpl == LmiTemplate::mixedRate;
  if (wantsResets && !std::holds_alternative<ResetCollection>(spec.jumps))
    throw Error("buildLmiSystem: this template needs reset jump matrices");
  if (tmpl == LmiTemplate::impulseDwell && !std::holds_alternative<ImpulseSet>(spec.jumps))
    throw Error("buildLmiSystem: impulseDwell needs an impulse set");

  // Per-mode constraints.
  for (const auto& sub : spec.subsystems) {
    const Eigen::Index n = sub.A.rows();
    if (tmpl == LmiTemplate::mixedRate) {
      LmiConstraint c;
      c.terms = {{sub.modeId, 1.0, RealMatrix::Identity(n, n), sub.A},
                 {sub.modeId, 0.0, RealMatrix::Identity(n, n), RealMatrix::Identity(n, n)}};
      c.constant = RealMatrix::Zero(n, n);
      if (sub.stabilityClass == StabilityClass::stable) {
        const auto it = params.lambda.find(sub.modeId);
        if (it == params.lambda.end())
          throw Error("mixedRate: no lambda for stable mode " + std::to_string(sub.modeId));
        c.kind = LmiConstraint::Kind::rateStable;
        c.label = "rate-(" + std::to_string(sub.modeId) + ")";
        c.terms[1].coefficient = 0.5 * it->second;  // + lambda_p Q_p on the left side
        sys.lambda[sub.modeId] = it->second;
      } else if (sub.stabilityClass == StabilityClass::unstable) {
        const auto it = params.mu.find(sub.modeId);
        if (it == params.mu.end())
          throw Error("mixedRate: no mu for unstable mode " + std::to_string(sub.modeId));
        c.kind = LmiConstraint::Kind::rateUnstable;
        c.label = "rate+(" + std::to_string(sub.modeId) + ")";
        c.terms[1].coefficient = -0.5 * it->second;  // - mu_p Q_p
        sys.mu[sub.modeId] = it->second;
      } else {
        throw Error("mixedRate: mode " + std::to_string(sub.modeId) + " is marginal");
      }
      sys.constraints.push_back(std::move(c));
    } else {
      sys.constraints.push_back(detail::decayConstraint(sub));
    }
    sys.constraints.push_back(detail::positivityConstraint(sub.modeId, n));
  }

  // Per-edge constraints.
  for (const auto& [p, q] : spec.graph.edges) {
    const Eigen::Index n = spec.subsystem(p).A.rows();
    switch (tmpl) {
      case LmiTemplate::resetDwell: {
        const auto Ms = jumpMatricesForEdge(spec.jumps, p, q);
        if (Ms.empty()) throw Error("resetDwell: no reset on edge " + detail::edgeLabel("", p, q));
        const RealMatrix E = matrixExp(spec.subsystem(p).A, detail::dwellParameterFor(params, p));
        sys.constraints.push_back(
            detail::sandwichConstraint(p, q, Ms.front() * E, n, detail::edgeLabel("jump", p, q)));
        break;
      }
      case LmiTemplate::impulseDwell: {
        const auto& impulses = std::get<ImpulseSet>(spec.jumps);
        const RealMatrix E = matrixExp(spec.subsystem(p).A, detail::dwellParameterFor(params, p));
        for (size_t i = 0; i < impulses.matrices.size(); ++i)
          sys.constraints.push_back(detail::sandwichConstraint(
              p, q, impulses.matrices[i] * E, n,
              detail::edgeLabel("jump", p, q) + "[vertex " + std::to_string(i) + "]"));
        break;
      }
      case LmiTemplate::geromelColaneri: {
        const RealMatrix E = matrixExp(spec.subsystem(p).A, detail::dwellParameterFor(params, p));
        sys.constraints.push_back(
            detail::sandwichConstraint(p, q, E, n, detail::edgeLabel("flow", p, q)));
        break;
      }
      case LmiTemplate::hespanhaMorse: {
        const auto Ms = jumpMatricesForEdge(spec.jumps, p, q);
        if (Ms.empty())
          throw Error("hespanhaMorse: no reset on edge " + detail::edgeLabel("", p, q));
        sys.constraints.push_back(
            detail::sandwichConstraint(p, q, Ms.front(), n, detail::edgeLabel("jump", p, q)));
        break;
      }
      case LmiTemplate::mixedRate: {
        const auto Ms = jumpMatricesForEdge(spec.jumps, p, q);
        if (Ms.empty()) throw Error("mixedRate: no reset on edge " + detail::edgeLabel("", p, q));
        const auto it = params.gamma.find({p, q});
        const double g = (it != params.gamma.end()) ? it->second : params.gammaUniform;
        if (!(g > 0.0)) throw Error("mixedRate: gamma must be positive");
        LmiConstraint c;
        c.kind = LmiConstraint::Kind::jumpRate;
        c.label = detail::edgeLabel("jump-rate", p, q);
        c.terms = {{q, 0.5, Ms.front(), Ms.front()},
                   {p, -0.5 * g, RealMatrix::Identity(n, n), RealMatrix::Identity(n, n)}};
        c.constant = RealMatrix::Zero(n, n);
        sys.constraints.push_back(std::move(c));
        sys.gamma[{p, q}] = g;
        break;
      }
    }
  }
  return sys;
}

// ---------------------------------------------------------------------------
// Verification
// ---------------------------------------------------------------------------

struct ConstraintSlack {
  std::string label;
  LmiConstraint::Kind kind;
  double slack = 0.0;  // lambda_max(S) + margin; ≤ tolerance passes
  bool satisfied = false;
};

struct VerificationReport {
  bool satisfied = false;
  double worstSlack = -std::numeric_limits<double>::infinity();
  std::string worstLabel;
  std::vector<ConstraintSlack> slacks;
};

inline VerificationReport verifyCertificate(const LyapunovCertificate& cert,
                                            const LmiSystem& lmis, double tolerance = 1e-8) {
  for (const auto& [p, n] : lmis.dims) {
    const auto it = cert.Q.find(p);
    if (it == cert.Q.end())
      throw DimensionMismatch("verifyCertificate: certificate lacks Q for mode " +
                              std::to_string(p));
    if (it->second.rows() != n || it->second.cols() != n)
      throw DimensionMismatch("verifyCertificate: Q dimension mismatch for mode " +
                              std::to_string(p));
  }

  VerificationReport report;
  report.satisfied = true;
  for (const auto& c : lmis.constraints) {
    Eigen::SelfAdjointEigenSolver<RealMatrix> es(c.evaluate(cert.Q), Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success)
      throw NonConvergence("verifyCertificate: eigensolve failed on " + c.label);
    ConstraintSlack entry;
    entry.label = c.label;
    entry.kind = c.kind;
    entry.slack = es.eigenvalues().maxCoeff() + c.margin;
    entry.satisfied = entry.slack <= tolerance;
    report.satisfied = report.satisfied && entry.satisfied;
    if (entry.slack > report.worstSlack) {
      report.worstSlack = entry.slack;
      report.worstLabel = entry.label;
    }
    report.slacks.push_back(std::move(entry));
  }
  return report;
}

// ---------------------------------------------------------------------------
// Feasibility search
// ---------------------------------------------------------------------------

inline constexpr int kDefaultSearchBudget = 20000;  // iterations; see minDwellBisection

namespace detail {

/// Orthonormal basis of n×n symmetric matrices.
inline std::vector<RealMatrix> symmetricBasis(Eigen::Index n) {
  std::vector<RealMatrix> basis;
  const double invSqrt2 = 1.0 / std::sqrt(2.0);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i; j < n; ++j) {
      RealMatrix E = RealMatrix::Zero(n, n);
      if (i == j)
        E(i, i) = 1.0;
      else
        E(i, j) = E(j, i) = invSqrt2;
      basis.push_back(E);
    }
  return basis;
}

/// The whole system flattened to one affine map: stacking every constraint
/// gives S(q) = A·q + b over the coordinates q of (Q_p)_p in the orthonormal
/// symmetric bases.  N restricts q to the facially reduced subspace (q = N·y).
struct StackedLmis {
  RealMatrix A;
  RealVector b;
  RealMatrix N;
  Eigen::CompleteOrthogonalDecomposition<RealMatrix> affine;  // of A·N
  std::map<ModeId, std::vector<RealMatrix>> bases;
  std::map<ModeId, Eigen::Index> offset;
  Eigen::Index rows = 0;
  Eigen::Index cols = 0;

  /// P_L: least-squares projection onto the affine image, via q(x).
  RealVector coordinates(const RealVector& x) const { return N * affine.solve(x - b); }
};

inline StackedLmis stackLmis(const LmiSystem& lmis) {
  StackedLmis st;
  for (const auto& [p, n] : lmis.dims) {
    st.bases[p] = symmetricBasis(n);
    st.offset[p] = st.cols;
    st.cols += static_cast<Eigen::Index>(st.bases[p].size());
  }
  for (const auto& c : lmis.constraints) st.rows += c.constant.rows() * c.constant.rows();
  st.A = RealMatrix::Zero(st.rows, st.cols);
  st.b.resize(st.rows);
  Eigen::Index row = 0;
  for (const auto& c : lmis.constraints) {
    const Eigen::Index n = c.constant.rows(), n2 = n * n;
    st.b.segment(row, n2) = Eigen::Map<const RealVector>(c.constant.data(), n2);
    for (const auto& term : c.terms)
      for (std::size_t bi = 0; bi < st.bases[term.mode].size(); ++bi) {
        const RealMatrix D =
            term.coefficient * (term.T.transpose() * st.bases[term.mode][bi] * term.U +
                                term.U.transpose() * st.bases[term.mode][bi] * term.T);
        st.A.block(row, st.offset[term.mode] + static_cast<Eigen::Index>(bi), n2, 1) +=
            Eigen::Map<const RealVector>(D.data(), n2);
      }
    row += n2;
  }

  // Facial reduction.  A rate constraint S = Q·A + Aᵀ·Q ∓ rate·Q with a mode
  // whose matrix has an eigenvalue exactly on the shifted boundary satisfies
  // vᵀS v = 0 identically on ker(A ∓ (rate/2)·I), so S ≼ 0 forces S·v = 0 and
  // hence Q·v into the matching left kernel.  Those are valid linear cuts;
  // without them the feasible set has empty interior and projection methods
  // crawl along the face instead of converging.
  std::vector<Eigen::RowVectorXd> cuts;
  for (const auto& c : lmis.constraints) {
    if (c.kind != LmiConstraint::Kind::rateStable && c.kind != LmiConstraint::Kind::rateUnstable)
      continue;
    if (c.terms.size() != 2) continue;
    const ModeId mode = c.terms[0].mode;
    const RealMatrix& M = c.terms[0].U;                 // the subsystem matrix
    const double shift = c.terms[1].coefficient;        // ±rate/2
    const Eigen::Index n = M.rows();
    const RealMatrix B = M + shift * RealMatrix::Identity(n, n);
    Eigen::FullPivLU<RealMatrix> lu(B);
    lu.setThreshold(1e-9);
    if (lu.rank() == n) continue;
    const RealMatrix V = lu.kernel();
    Eigen::FullPivLU<RealMatrix> luLeft{RealMatrix(B.transpose())};
    luLeft.setThreshold(1e-9);
    const RealMatrix U = luLeft.kernel();
    Eigen::FullPivLU<RealMatrix> luPerp{RealMatrix(U.transpose())};
    luPerp.setThreshold(1e-9);
    const RealMatrix W = luPerp.kernel();               // directions Q·v must avoid
    for (Eigen::Index vi = 0; vi < V.cols(); ++vi)
      for (Eigen::Index wi = 0; wi < W.cols(); ++wi) {
        Eigen::RowVectorXd cut = Eigen::RowVectorXd::Zero(st.cols);
        for (std::size_t bi = 0; bi < st.bases[mode].size(); ++bi)
          cut(st.offset[mode] + static_cast<Eigen::Index>(bi)) =
              W.col(wi).dot(st.bases[mode][bi] * V.col(vi));
        cuts.push_back(std::move(cut));
      }
  }
  if (cuts.empty()) {
    st.N = RealMatrix::Identity(st.cols, st.cols);
  } else {
    RealMatrix E(static_cast<Eigen::Index>(cuts.size()), st.cols);
    for (std::size_t i = 0; i < cuts.size(); ++i) E.row(static_cast<Eigen::Index>(i)) = cuts[i];
    Eigen::FullPivLU<RealMatrix> lu(E);
    lu.setThreshold(1e-9);
    st.N = lu.kernel();
  }
  st.affine.compute(st.A * st.N);
  return st;
}

/// P_K: project the stacked S onto the product of shifted cones
/// {Z ≼ -margin·I}; returns the worst slack max λ_max(S_c) + margin_c.
inline double coneProject(const LmiSystem& lmis, const RealVector& s, RealVector& z) {
  double maxSlack = -std::numeric_limits<double>::infinity();
  z.resize(s.size());
  Eigen::Index row = 0;
  for (const auto& c : lmis.constraints) {
    const Eigen::Index n = c.constant.rows(), n2 = n * n;
    const Eigen::Map<const RealMatrix> S(s.data() + row, n, n);
    Eigen::SelfAdjointEigenSolver<RealMatrix> es(S);
    if (es.info() != Eigen::Success) return std::numeric_limits<double>::infinity();
    maxSlack = std::max(maxSlack, es.eigenvalues().maxCoeff() + c.margin);
    const RealMatrix Z = es.eigenvectors() * es.eigenvalues().cwiseMin(-c.margin).asDiagonal() *
                         es.eigenvectors().transpose();
    z.segment(row, n2) = Eigen::Map<const RealVector>(Z.data(), n2);
    row += n2;
  }
  return maxSlack;
}

}  // namespace detail

/// Douglas–Rachford feasibility search between the affine image of
/// q ↦ (S_c(q))_c and the product of (margin-shifted) negative semidefinite
/// cones, after facial reduction of boundary rate constraints.  On feasible
/// systems the shadow point P_L(P_K(z)) reaches the intersection; on
/// infeasible ones the iterate drifts at constant speed, which is detected
/// and reported as failure.  Deterministic: starts from Q_p = I.
///
/// Success means the returned certificate passes verifyCertificate at 1e-8 —
/// the search re-verifies before returning.  Failure (nullopt) is
/// inconclusive, never a proof of infeasibility.
inline std::optional<LyapunovCertificate> feasibilitySearch(const LmiSystem& lmis,
                                                            int budget = kDefaultSearchBudget) {
  constexpr double kSlackTarget = 1e-9;
  const detail::StackedLmis st = detail::stackLmis(lmis);

  RealVector q = RealVector::Zero(st.cols);
  for (const auto& [p, B] : st.bases)
    for (std::size_t bi = 0; bi < B.size(); ++bi)
      if (B[bi].diagonal().sum() > 0.5)  // diagonal elements of the basis
        q(st.offset.at(p) + static_cast<Eigen::Index>(bi)) = 1.0;
  RealVector z = st.A * q + st.b;

  RealVector zK, scratch, best;
  double bestSlack = std::numeric_limits<double>::infinity();
  double prevStep = std::numeric_limits<double>::infinity();
  int flat = 0;
  for (int it = 0; it < budget; ++it) {
    if (detail::coneProject(lmis, z, zK) == std::numeric_limits<double>::infinity())
      return std::nullopt;

    // Candidate certificate: project the cone point back onto the affine set.
    const RealVector y = st.coordinates(zK);
    const double slack = detail::coneProject(lmis, RealVector(st.A * y + st.b), scratch);
    if (slack < bestSlack) {
      bestSlack = slack;
      best = y;
    }
    if (slack <= kSlackTarget) break;

    const RealVector reflected = 2.0 * zK - z;
    const RealVector step = st.A * st.coordinates(reflected) + st.b - zK;
    z += step;
    if (!z.allFinite()) return std::nullopt;

    // Constant drift with a non-vanishing step is the DR signature of an
    // empty intersection; stop early instead of burning the budget.
    const double stepNorm = step.norm();
    if (std::abs(stepNorm - prevStep) <= 1e-14 * std::max(1.0, stepNorm)) {
      if (++flat >= 200 && stepNorm > 1e-12) break;
    } else {
      flat = 0;
    }
    prevStep = stepNorm;
  }
  if (bestSlack > kSlackTarget) return std::nullopt;

  LyapunovCertificate cert;
  cert.lambda = lmis.lambda;
  cert.mu = lmis.mu;
  cert.gamma = lmis.gamma;
  for (const auto& [p, n] : lmis.dims) {
    RealMatrix Q = RealMatrix::Zero(n, n);
    for (std::size_t bi = 0; bi < st.bases.at(p).size(); ++bi)
      Q += best(st.offset.at(p) + static_cast<Eigen::Index>(bi)) * st.bases.at(p)[bi];
    cert.Q[p] = Q;
  }
  if (!verifyCertificate(cert, lmis, 1e-8).satisfied) return std::nullopt;
  return cert;
}

// ---------------------------------------------------------------------------
// Dwell-time bisection
// ---------------------------------------------------------------------------

struct BisectionProbe {
  double tau = 0.0;
  bool feasible = false;
};

struct BisectionResult {
  double tauHat = 0.0;                  // smallest feasible lattice point found
  LyapunovCertificate certificate;      // certificate at tauHat
  std::vector<BisectionProbe> profile;  // every probe, in search order
};

/// Bisect the dwell parameter over [lo, hi] for one of the dwell-form
/// templates.  Feasibility is probed by feasibilitySearch; monotonicity in
/// tau is a search heuristic, not a theorem, which is why the full probe
/// profile ships with the result.  The returned tauHat is the smallest
/// lattice point at which the search produced a certificate.
inline BisectionResult minDwellBisection(const SwitchedSystemSpec& spec, LmiTemplate tmpl,
                                         std::pair<double, double> range, int steps = 4,
                                         int budget = kDefaultSearchBudget) {
  if (tmpl != LmiTemplate::resetDwell && tmpl != LmiTemplate::impulseDwell &&
      tmpl != LmiTemplate::geromelColaneri)
    throw Error("minDwellBisection: dwell-form templates only");
  for (const auto& sub : spec.subsystems)
    if (sub.stabilityClass != StabilityClass::stable)
      throw NotAllStable("minDwellBisection: mode " + std::to_string(sub.modeId) +
                         " is not stable");
  if (!(range.first >= 0.0 && range.second > range.first))
    throw Error("minDwellBisection: need 0 ≤ lo < hi");

  BisectionResult result;
  const auto probe = [&](double tau) -> std::optional<LyapunovCertificate> {
    LmiParameters params;
    params.tau = tau;
    auto cert = feasibilitySearch(buildLmiSystem(spec, tmpl, params), budget);
    result.profile.push_back({tau, cert.has_value()});
    return cert;
  };

  auto atHi = probe(range.second);
  if (!atHi)
    throw InfeasibleAtUpperBound("minDwellBisection: no certificate at tau = " +
                                 std::to_string(range.second));
  result.tauHat = range.second;
  result.certificate = *atHi;

  double lo = range.first, hi = range.second;
  for (int step = 0; step < steps; ++step) {
    const double mid = 0.5 * (lo + hi);
    if (auto cert = probe(mid)) {
      hi = mid;
      result.tauHat = mid;
      result.certificate = *cert;
    } else {
      lo = mid;
    }
  }
  return result;
}

// ---------------------------------------------------------------------------
// Mixed-rate condition
// ---------------------------------------------------------------------------

/// The asymptotic rate condition for signals whose switch-type frequencies
/// converge: -lambda r_s tau + mu r_u eta + ln gamma < 0, with lambda, mu,
/// gamma the certificate's aggregate constants.
inline bool mixedRateCheck(const LyapunovCertificate& cert, double rStable, double rUnstable,
                           double tau, double eta) {
  if (!(rStable >= 0.0 && rStable <= 1.0 && rUnstable >= 0.0 && rUnstable <= 1.0) ||
      std::abs(rStable + rUnstable - 1.0) > 1e-9)
    throw RatioInvalid("mixedRateCheck: ratios must lie in [0,1] and sum to 1");
  return -cert.minLambda() * rStable * tau + cert.maxMu() * rUnstable * eta +
             std::log(cert.maxGamma()) <
         0.0;
}

/// Mode-dependent form: -sum_p lambda_p r_p tau_p + sum_p mu_p r_p eta_p
/// + ln gamma < 0 over per-mode visit frequencies.
inline bool mixedRateCheckModeDependent(const LyapunovCertificate& cert,
                                        const std::map<ModeId, double>& frequency,
                                        const std::map<ModeId, double>& tauByMode,
                                        const std::map<ModeId, double>& etaByMode) {
  double total = 0.0;
  for (const auto& [p, r] : frequency) {
    if (!(r >= 0.0 && r <= 1.0))
      throw RatioInvalid("mixedRateCheckModeDependent: frequency outside [0,1]");
    total += r;
  }
  if (std::abs(total - 1.0) > 1e-9)
    throw RatioInvalid("mixedRateCheckModeDependent: frequencies must sum to 1");

  double acc = std::log(cert.maxGamma());
  for (const auto& [p, r] : frequency) {
    if (const auto it = cert.lambda.find(p); it != cert.lambda.end())
      acc -= it->second * r * tauByMode.at(p);
    else if (const auto iu = cert.mu.find(p); iu != cert.mu.end())
      acc += iu->second * r * etaByMode.at(p);
    else
      throw Error("mixedRateCheckModeDependent: mode " + std::to_string(p) +
                  " carries no rate constant");
  }
  return acc < 0.0;
}

/// For alternating signals (r_s = r_u = 1/2) the rate condition reduces to
/// tau > (mu/lambda) eta + (2/lambda) ln gamma; this returns those reduced
/// coefficients symbolically.
struct ReducedDwellCondition {
  double etaSlope = 0.0;
  double offset = 0.0;
  [[nodiscard]] bool holds(double tau, double eta) const {
    return tau > etaSlope * eta + offset;
  }
};

inline ReducedDwellCondition alternatingRateCondition(double lambda, double mu, double gamma) {
  if (!(lambda > 0.0) || !(mu > 0.0) || !(gamma > 0.0))
    throw Error("alternatingRateCondition: constants must be positive");
  return {mu / lambda, 2.0 * std::log(gamma) / lambda};
}

// ---------------------------------------------------------------------------
// Convenience searches
// ---------------------------------------------------------------------------

/// Arbitrary-switching certificate (no dwell requirement).  Absence is
/// inconclusive; destabilizing resets simply have no such certificate.
inline std::optional<LyapunovCertificate> hespanhaMorseCheck(const SwitchedSystemSpec& spec,
                                                             int budget = kDefaultSearchBudget) {
  for (const auto& sub : spec.subsystems)
    if (sub.stabilityClass != StabilityClass::stable)
      throw NotAllStable("hespanhaMorseCheck: mode " + std::to_string(sub.modeId) +
                         " is not stable");
  return feasibilitySearch(buildLmiSystem(spec, LmiTemplate::hespanhaMorse), budget);
}

struct RateConstants {
  double lambda = 1.0;
  double mu = 2.0;
  double gamma = 75.0;
};

/// Outer grid over uniform (lambda, mu, gamma) with a Q-feasibility inner
/// loop; returns the first feasible triple in documented order.  The grid is
/// seeded by (1, 2, 75) and expands logarithmically from there.
inline std::optional<std::pair<LyapunovCertificate, RateConstants>> mixedRateSearch(
    const SwitchedSystemSpec& spec, int budget = kDefaultSearchBudget) {
  const std::vector<double> lambdas = {1.0, 0.5, 2.0, 0.25};
  const std::vector<double> mus = {2.0, 4.0, 1.0, 8.0};
  const std::vector<double> gammas = {75.0, 150.0, 300.0, 1000.0};
  for (const double gamma : gammas)
    for (const double lambda : lambdas)
      for (const double mu : mus) {
        LmiParameters params;
        params.gammaUniform = gamma;
        for (const auto& sub : spec.subsystems) {
          if (sub.stabilityClass == StabilityClass::stable)
            params.lambda[sub.modeId] = lambda;
          else if (sub.stabilityClass == StabilityClass::unstable)
            params.mu[sub.modeId] = mu;
        }
        if (auto cert = feasibilitySearch(buildLmiSystem(spec, LmiTemplate::mixedRate, params),
                                          budget))
          return std::make_pair(*cert, RateConstants{lambda, mu, gamma});
      }
  return std::nullopt;
}

}  // namespace dwellkit
