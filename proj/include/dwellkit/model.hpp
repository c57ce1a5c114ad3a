#pragma once

// Declarative description of a switched linear system: subsystem matrices
// with their Jordan data and stability classes, the jump rule applied at
// switching instants (per-edge resets or a set of impulse matrices), the mode
// graph constraining admissible switches, plus switching signals and the
// graph algorithms the theory leans on (acyclicity of the unstable-source
// subgraph, topological order, Jordan-basis rescaling, switch counting).

#include "dwellkit/numlin.hpp"

#include <functional>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <utility>
#include <variant>
#include <vector>

namespace dwellkit {

using ModeId = int;
using ModePair = std::pair<ModeId, ModeId>;

struct CyclicGraph : Error {
  explicit CyclicGraph(const std::string& what) : Error(what) {}
};

struct HypothesisViolated : Error {
  explicit HypothesisViolated(const std::string& what) : Error(what) {}
};

// ---------------------------------------------------------------------------
// Subsystems
// ---------------------------------------------------------------------------

enum class StabilityClass { stable, unstable, marginal };

inline const char* toString(StabilityClass sc) {
  switch (sc) {
    case StabilityClass::stable: return "stable";
    case StabilityClass::unstable: return "unstable";
    default: return "marginal";
  }
}

/// One mode of the switched system.  c and rate are the exponential envelope
/// constants (||e^{J t}|| <= c e^{-rate t} for stable modes, <= c e^{+rate t}
/// for unstable ones); they start at 0 ("not yet computed") and are filled in
/// by the bounds module, which owns their derivation.
struct SubsystemSpec {
  ModeId modeId = 0;
  RealMatrix A;
  EigenStructure eig;
  StabilityClass stabilityClass = StabilityClass::marginal;
  double c = 0.0;
  double rate = 0.0;
};

/// Classify by eigenvalue real parts with a relative dead zone around zero:
/// anything within 1e-10 * ||A|| of the imaginary axis counts as "on" it.
/// A single real part above the dead zone makes the mode unstable regardless
/// of marginal companions (growth dominates); stable requires every real
/// part strictly below it.
inline StabilityClass classify(const EigenStructure& eig, double normA) {
  const double tol = 1e-10 * std::max(normA, 1.0);
  bool anyPositive = false, allNegative = true;
  for (Eigen::Index i = 0; i < eig.eigenvalues.size(); ++i) {
    const double re = eig.eigenvalues(i).real();
    if (re > tol) anyPositive = true;
    if (re >= -tol) allNegative = false;
  }
  if (anyPositive) return StabilityClass::unstable;
  return allNegative ? StabilityClass::stable : StabilityClass::marginal;
}

inline SubsystemSpec makeSubsystem(ModeId id, const RealMatrix& A) {
  SubsystemSpec sub;
  sub.modeId = id;
  sub.A = A;
  sub.eig = eigendecompose(A);
  sub.stabilityClass = classify(sub.eig, spectralNorm(A));
  return sub;
}

// ---------------------------------------------------------------------------
// Jump rules
// ---------------------------------------------------------------------------

/// Edge-indexed reset family: x(t_k) = R_{(p,q)} x(t_k^-) when the signal
/// switches from p to q.
struct ResetCollection {
  std::map<ModePair, RealMatrix> resets;

  [[nodiscard]] const RealMatrix* find(ModeId from, ModeId to) const {
    const auto it = resets.find({from, to});
    return it == resets.end() ? nullptr : &it->second;
  }
};

/// Impulse family applied independently of the edge taken: either a finite
/// set of matrices or the convex hull of finitely many vertices.
struct ImpulseSet {
  enum class Kind { finite, convexHull };
  Kind kind = Kind::finite;
  std::vector<RealMatrix> matrices;
};

using JumpRule = std::variant<ResetCollection, ImpulseSet>;

// ---------------------------------------------------------------------------
// Mode graph
// ---------------------------------------------------------------------------

struct ModeGraph {
  std::vector<ModeId> vertices;
  std::set<ModePair> edges;

  [[nodiscard]] bool hasVertex(ModeId v) const {
    return std::find(vertices.begin(), vertices.end(), v) != vertices.end();
  }
  [[nodiscard]] bool hasEdge(ModeId p, ModeId q) const {
    return edges.count({p, q}) > 0;
  }
  [[nodiscard]] std::vector<ModeId> successors(ModeId p) const {
    std::vector<ModeId> out;
    for (const auto& [a, b] : edges)
      if (a == p) out.push_back(b);
    return out;
  }
  [[nodiscard]] int outDegree(ModeId p) const {
    int d = 0;
    for (const auto& e : edges) d += (e.first == p);
    return d;
  }

  /// Complete directed graph (all ordered pairs, no self-loops).
  static ModeGraph complete(const std::vector<ModeId>& ids) {
    ModeGraph g;
    g.vertices = ids;
    for (ModeId p : ids)
      for (ModeId q : ids)
        if (p != q) g.edges.insert({p, q});
    return g;
  }
};

// ---------------------------------------------------------------------------
// The system spec and signals
// ---------------------------------------------------------------------------

struct SwitchedSystemSpec {
  std::vector<SubsystemSpec> subsystems;
  ModeGraph graph;
  JumpRule jumps;
  NormSpec norm;

  [[nodiscard]] const SubsystemSpec* find(ModeId id) const {
    for (const auto& s : subsystems)
      if (s.modeId == id) return &s;
    return nullptr;
  }
  [[nodiscard]] const SubsystemSpec& subsystem(ModeId id) const {
    const SubsystemSpec* s = find(id);
    if (!s) throw Error("unknown mode id " + std::to_string(id));
    return *s;
  }
  [[nodiscard]] Eigen::Index dimension() const {
    return subsystems.empty() ? 0 : subsystems.front().A.rows();
  }
};

/// Finite realization of a right-continuous switching signal: events are
/// (activation time, mode), the first at t_0 = 0, truncated at `horizon`.
struct SwitchingSignal {
  struct Event {
    double time = 0.0;
    ModeId mode = 0;
  };
  std::vector<Event> events;
  double horizon = 0.0;

  /// sigma(t): the mode whose interval contains t (right-continuous).
  [[nodiscard]] ModeId modeAt(double t) const {
    if (events.empty()) throw Error("signal has no events");
    ModeId mode = events.front().mode;
    for (const auto& e : events) {
      if (e.time <= t)
        mode = e.mode;
      else
        break;
    }
    return mode;
  }

  /// Switch instants t_1, t_2, ... (everything after the initial event).
  [[nodiscard]] std::vector<double> switchTimes() const {
    std::vector<double> out;
    for (size_t i = 1; i < events.size(); ++i) out.push_back(events[i].time);
    return out;
  }
};

/// Impulse choice at each switch instant, aligned with switchTimes().
struct ImpulseSchedule {
  std::vector<double> times;
  std::vector<RealMatrix> matrices;
};

struct SwitchCounts {
  int toStable = 0;
  int toUnstable = 0;
  int total = 0;
};

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

enum class DiagCode {
  DuplicateModeId,
  UnknownMode,
  SelfLoop,
  DanglingMode,
  MarginalMode,
  ZeroJumpMatrix,
  MissingJumpMatrix,
  HullContainsZero,
  EmptyImpulseSet,
  InconsistentDimension,
  SignalStart,
  SignalOrder,
  SignalRepeatedMode,
  SignalEdge,
  SignalHorizon,
};

inline const char* toString(DiagCode code) {
  switch (code) {
    case DiagCode::DuplicateModeId: return "DuplicateModeId";
    case DiagCode::UnknownMode: return "UnknownMode";
    case DiagCode::SelfLoop: return "SelfLoop";
    case DiagCode::DanglingMode: return "DanglingMode";
    case DiagCode::MarginalMode: return "MarginalMode";
    case DiagCode::ZeroJumpMatrix: return "ZeroJumpMatrix";
    case DiagCode::MissingJumpMatrix: return "MissingJumpMatrix";
    case DiagCode::HullContainsZero: return "HullContainsZero";
    case DiagCode::EmptyImpulseSet: return "EmptyImpulseSet";
    case DiagCode::InconsistentDimension: return "InconsistentDimension";
    case DiagCode::SignalStart: return "SignalStart";
    case DiagCode::SignalOrder: return "SignalOrder";
    case DiagCode::SignalRepeatedMode: return "SignalRepeatedMode";
    case DiagCode::SignalEdge: return "SignalEdge";
    case DiagCode::SignalHorizon: return "SignalHorizon";
  }
  return "Unknown";
}

struct Diagnostic {
  DiagCode code;
  std::string message;
};

namespace detail {

/// Least-norm point of conv{v_1..v_k}: minimize ||V alpha|| over the simplex
/// via Lawson-Hanson NNLS on the augmented system [V; w 1^T] alpha = [0; w].
/// The weight w is large relative to the column scale, so the simplex
/// constraint holds to ~1e-12 at the solution.  Finite termination, desk
/// scale only.
inline double simplexLeastNorm(const RealMatrix& V) {
  const Eigen::Index m = V.rows(), k = V.cols();
  const double scale = std::max(V.cwiseAbs().maxCoeff(), 1.0);
  const double w = 1e4 * scale;
  RealMatrix G(m + 1, k);
  G.topRows(m) = V;
  G.bottomRows(1).setConstant(w);
  RealVector b = RealVector::Zero(m + 1);
  b(m) = w;

  // Lawson-Hanson: grow a passive set P greedily by the most positive
  // gradient of the residual, solve the restricted least squares, and step
  // back toward feasibility whenever a passive coordinate would go negative.
  RealVector x = RealVector::Zero(k);
  std::vector<bool> passive(static_cast<size_t>(k), false);
  RealVector resid = b;
  for (int outer = 0; outer < 3 * static_cast<int>(k) + 10; ++outer) {
    const RealVector grad = G.transpose() * resid;
    Eigen::Index best = -1;
    double bestVal = 1e-12 * scale * w;
    for (Eigen::Index j = 0; j < k; ++j)
      if (!passive[static_cast<size_t>(j)] && grad(j) > bestVal) {
        bestVal = grad(j);
        best = j;
      }
    if (best < 0) break;  // KKT satisfied
    passive[static_cast<size_t>(best)] = true;

    for (int inner = 0; inner < 3 * static_cast<int>(k) + 10; ++inner) {
      std::vector<Eigen::Index> idx;
      for (Eigen::Index j = 0; j < k; ++j)
        if (passive[static_cast<size_t>(j)]) idx.push_back(j);
      RealMatrix Gp(m + 1, static_cast<Eigen::Index>(idx.size()));
      for (size_t c = 0; c < idx.size(); ++c) Gp.col(static_cast<Eigen::Index>(c)) = G.col(idx[c]);
      const RealVector z =
          Gp.completeOrthogonalDecomposition().solve(b);
      bool allPositive = true;
      for (Eigen::Index c = 0; c < z.size(); ++c)
        if (z(c) <= 1e-14) allPositive = false;
      if (allPositive) {
        x.setZero();
        for (size_t c = 0; c < idx.size(); ++c) x(idx[c]) = z(static_cast<Eigen::Index>(c));
        break;
      }
      // Back-step: move x toward z until the first passive coordinate hits 0.
      double alpha = 1.0;
      for (size_t c = 0; c < idx.size(); ++c) {
        const double xi = x(idx[c]), zi = z(static_cast<Eigen::Index>(c));
        if (zi <= 1e-14 && xi - zi > 0) alpha = std::min(alpha, xi / (xi - zi));
      }
      for (size_t c = 0; c < idx.size(); ++c) {
        x(idx[c]) += alpha * (z(static_cast<Eigen::Index>(c)) - x(idx[c]));
        if (x(idx[c]) <= 1e-14) {
          x(idx[c]) = 0.0;
          passive[static_cast<size_t>(idx[c])] = false;
        }
      }
    }
    resid = b - G * x;
  }

  // Renormalize onto the simplex exactly and report the attained norm.
  const double total = x.sum();
  if (total <= 1e-12) return std::numeric_limits<double>::infinity();
  x /= total;
  return (V * x).norm();
}

}  // namespace detail

/// True iff the zero matrix lies in conv{M_1..M_k} (vectorized), to a scale-
/// relative tolerance of 1e-10.
inline bool hullContainsZero(const ImpulseSet& set) {
  if (set.matrices.empty()) return false;
  const Eigen::Index n2 = set.matrices.front().size();
  RealMatrix V(n2, static_cast<Eigen::Index>(set.matrices.size()));
  double scale = 0.0;
  for (size_t i = 0; i < set.matrices.size(); ++i) {
    V.col(static_cast<Eigen::Index>(i)) =
        Eigen::Map<const RealVector>(set.matrices[i].data(), n2);
    scale = std::max(scale, set.matrices[i].norm());
  }
  return detail::simplexLeastNorm(V) <= 1e-10 * std::max(scale, 1.0);
}

inline std::vector<Diagnostic> validate(const SwitchedSystemSpec& spec) {
  std::vector<Diagnostic> out;
  const auto emit = [&out](DiagCode code, const std::string& msg) {
    out.push_back({code, msg});
  };

  std::set<ModeId> ids;
  const Eigen::Index n = spec.dimension();
  for (const auto& sub : spec.subsystems) {
    if (!ids.insert(sub.modeId).second)
      emit(DiagCode::DuplicateModeId, "mode " + std::to_string(sub.modeId) + " declared twice");
    if (sub.A.rows() != n || sub.A.cols() != n)
      emit(DiagCode::InconsistentDimension,
           "mode " + std::to_string(sub.modeId) + " has a different dimension");
    if (sub.stabilityClass == StabilityClass::marginal)
      emit(DiagCode::MarginalMode,
           "mode " + std::to_string(sub.modeId) +
               " is marginal (eigenvalues on the imaginary axis); bounds are undefined for it");
  }

  // Graph vertices must coincide with subsystem ids; every vertex needs an
  // outgoing edge for signals to be extendable; self-loops contradict the
  // "consecutive modes differ" signal invariant.
  for (ModeId v : spec.graph.vertices)
    if (!ids.count(v))
      emit(DiagCode::UnknownMode, "graph vertex " + std::to_string(v) + " has no subsystem");
  for (ModeId id : ids)
    if (!spec.graph.hasVertex(id))
      emit(DiagCode::UnknownMode, "mode " + std::to_string(id) + " missing from graph");
  for (const auto& [p, q] : spec.graph.edges) {
    if (p == q) emit(DiagCode::SelfLoop, "self-loop at mode " + std::to_string(p));
    if (!spec.graph.hasVertex(p) || !spec.graph.hasVertex(q))
      emit(DiagCode::UnknownMode,
           "edge (" + std::to_string(p) + "," + std::to_string(q) + ") references unknown mode");
  }
  for (ModeId v : spec.graph.vertices)
    if (spec.graph.outDegree(v) == 0)
      emit(DiagCode::DanglingMode, "mode " + std::to_string(v) + " has out-degree 0");

  if (const auto* resets = std::get_if<ResetCollection>(&spec.jumps)) {
    for (const auto& [pair, R] : resets->resets) {
      if (R.rows() != n || R.cols() != n)
        emit(DiagCode::InconsistentDimension,
             "reset (" + std::to_string(pair.first) + "," + std::to_string(pair.second) +
                 ") has wrong dimensions");
      if (R.norm() == 0.0)
        emit(DiagCode::ZeroJumpMatrix,
             "reset (" + std::to_string(pair.first) + "," + std::to_string(pair.second) +
                 ") is the zero matrix");
    }
    for (const auto& [p, q] : spec.graph.edges)
      if (p != q && !resets->find(p, q))
        emit(DiagCode::MissingJumpMatrix,
             "graph edge (" + std::to_string(p) + "," + std::to_string(q) +
                 ") has no reset matrix");
  } else {
    const auto& imp = std::get<ImpulseSet>(spec.jumps);
    if (imp.matrices.empty()) emit(DiagCode::EmptyImpulseSet, "impulse set is empty");
    for (size_t i = 0; i < imp.matrices.size(); ++i) {
      const auto& M = imp.matrices[i];
      if (M.rows() != n || M.cols() != n)
        emit(DiagCode::InconsistentDimension,
             "impulse matrix " + std::to_string(i) + " has wrong dimensions");
      if (M.size() > 0 && M.norm() == 0.0)
        emit(DiagCode::ZeroJumpMatrix, "impulse matrix " + std::to_string(i) + " is zero");
    }
    if (imp.kind == ImpulseSet::Kind::convexHull && !imp.matrices.empty() &&
        hullContainsZero(imp))
      emit(DiagCode::HullContainsZero, "the zero matrix lies in the impulse hull");
  }

  return out;
}

/// Diagnostics for a switching signal, optionally against a graph.
inline std::vector<Diagnostic> checkSignal(const SwitchingSignal& signal,
                                           const ModeGraph* graph = nullptr) {
  std::vector<Diagnostic> out;
  if (signal.events.empty()) {
    out.push_back({DiagCode::SignalStart, "signal has no events"});
    return out;
  }
  if (signal.events.front().time != 0.0)
    out.push_back({DiagCode::SignalStart, "first event must be at t = 0"});
  for (size_t i = 1; i < signal.events.size(); ++i) {
    if (signal.events[i].time <= signal.events[i - 1].time)
      out.push_back({DiagCode::SignalOrder,
                     "event times must be strictly increasing (index " + std::to_string(i) + ")"});
    if (signal.events[i].mode == signal.events[i - 1].mode)
      out.push_back({DiagCode::SignalRepeatedMode,
                     "consecutive modes equal at index " + std::to_string(i)});
    if (graph && !graph->hasEdge(signal.events[i - 1].mode, signal.events[i].mode))
      out.push_back({DiagCode::SignalEdge,
                     "switch (" + std::to_string(signal.events[i - 1].mode) + "→" +
                         std::to_string(signal.events[i].mode) + ") is not a graph edge"});
  }
  if (signal.horizon < signal.events.back().time)
    out.push_back({DiagCode::SignalHorizon, "horizon precedes the last event"});
  return out;
}

// ---------------------------------------------------------------------------
// Graph algorithms
// ---------------------------------------------------------------------------

/// Edges of G_u: those originating from unstable modes.
inline std::set<ModePair> unstableEdges(const SwitchedSystemSpec& spec) {
  std::set<ModePair> out;
  for (const auto& [p, q] : spec.graph.edges)
    if (spec.subsystem(p).stabilityClass == StabilityClass::unstable) out.insert({p, q});
  return out;
}

/// Edges of G_s: those originating from stable modes.
inline std::set<ModePair> stableEdges(const SwitchedSystemSpec& spec) {
  std::set<ModePair> out;
  for (const auto& [p, q] : spec.graph.edges)
    if (spec.subsystem(p).stabilityClass == StabilityClass::stable) out.insert({p, q});
  return out;
}

struct AcyclicityReport {
  bool acyclic = true;
  std::vector<ModeId> cycle;  // one directed cycle (first vertex repeated last) when !acyclic
};

/// Does the unstable-source subgraph have a directed cycle?  DFS with a
/// three-color scheme; the witness is read off the recursion stack.
inline AcyclicityReport unstableSubgraphAcyclic(const SwitchedSystemSpec& spec) {
  const std::set<ModePair> edges = unstableEdges(spec);
  std::map<ModeId, std::vector<ModeId>> adj;
  for (const auto& [p, q] : edges) adj[p].push_back(q);

  enum class Color { white, gray, black };
  std::map<ModeId, Color> color;
  for (ModeId v : spec.graph.vertices) color[v] = Color::white;

  AcyclicityReport report;
  std::vector<ModeId> stack;
  const std::function<bool(ModeId)> dfs = [&](ModeId v) -> bool {
    color[v] = Color::gray;
    stack.push_back(v);
    for (ModeId w : adj[v]) {
      if (color[w] == Color::gray) {
        // Close the cycle: suffix of the stack from w, plus w again.
        const auto it = std::find(stack.begin(), stack.end(), w);
        report.cycle.assign(it, stack.end());
        report.cycle.push_back(w);
        return true;
      }
      if (color[w] == Color::white && dfs(w)) return true;
    }
    stack.pop_back();
    color[v] = Color::black;
    return false;
  };
  for (ModeId v : spec.graph.vertices)
    if (color[v] == Color::white && dfs(v)) {
      report.acyclic = false;
      return report;
    }
  return report;
}

/// Kahn's algorithm with a smallest-id-first tie-break, so the order is
/// deterministic and edgeless graphs come out sorted by id.
inline std::vector<ModeId> topologicalOrder(const ModeGraph& graph) {
  std::map<ModeId, int> indegree;
  for (ModeId v : graph.vertices) indegree[v] = 0;
  for (const auto& [p, q] : graph.edges) {
    (void)p;
    ++indegree[q];
  }
  std::set<ModeId> ready;  // ordered => min-id extraction
  for (const auto& [v, d] : indegree)
    if (d == 0) ready.insert(v);

  std::vector<ModeId> order;
  while (!ready.empty()) {
    const ModeId v = *ready.begin();
    ready.erase(ready.begin());
    order.push_back(v);
    for (const auto& [p, q] : graph.edges)
      if (p == v && --indegree[q] == 0) ready.insert(q);
  }
  if (order.size() != graph.vertices.size())
    throw CyclicGraph("topologicalOrder: graph has a directed cycle");
  return order;
}

// ---------------------------------------------------------------------------
// Jordan-basis rescaling
// ---------------------------------------------------------------------------

/// The jump matrices that can act on a given graph edge: a per-edge reset, or
/// every member/vertex of the impulse set (impulses ignore the edge taken; a
/// hull is represented by its vertices, which carry the maximum of the norm).
inline std::vector<RealMatrix> jumpMatricesForEdge(const JumpRule& jumps, ModeId p, ModeId q) {
  if (const auto* resets = std::get_if<ResetCollection>(&jumps)) {
    if (const RealMatrix* R = resets->find(p, q)) return {*R};
    return {};
  }
  return std::get<ImpulseSet>(jumps).matrices;
}

struct RescaleResult {
  std::map<ModeId, ComplexMatrix> bases;   // scaled P_p for every mode
  std::map<ModeId, double> scales;         // the per-mode factors applied
  double rhoBefore = 0.0;                  // max c_p ||P_q^{-1} M P_p|| over G_u, input bases
  double rhoAfter = 0.0;                   // same quantity over the returned bases
  double theta = 1.0;                      // ladder base (1 when no scaling was needed)
  bool changed = false;
};

namespace detail {

inline double unstableEdgeMax(const SwitchedSystemSpec& spec,
                              const JumpRule& jumps,
                              const std::map<ModeId, ComplexMatrix>& bases) {
  double rho = 0.0;
  for (const auto& [p, q] : unstableEdges(spec)) {
    const auto& sub = spec.subsystem(p);
    const double cp = sub.c > 0.0 ? sub.c : 1.0;
    const ComplexMatrix& Pp = bases.at(p);
    const ComplexMatrix Pqinv = bases.at(q).inverse();
    for (const RealMatrix& M : jumpMatricesForEdge(jumps, p, q))
      rho = std::max(rho, cp * operatorNorm(ComplexMatrix(Pqinv * M * Pp), spec.norm));
  }
  return rho;
}

}  // namespace detail

/// Scale the Jordan bases so that max c_p ||P_q^{-1} M P_p|| over the edges
/// of G_u (and all applicable jump matrices) drops strictly below epsilon.
///
/// Construction: with rho the maximum over the input bases, theta =
/// rho/(epsilon*xi) > 1, arrange the modes as [unstable without incoming G_u
/// edges | remaining unstable, topologically | stable, by id] and scale mode
/// j by theta^{e_j} with the ladder e_j = max(0, j - k), k the number of
/// sources.  Every G_u edge then gains at least one theta^{-1} factor, so the
/// post-scaling maximum is at most epsilon*xi < epsilon.  (Continuing the
/// ladder across the stable tail — rather than restarting it — is what
/// guarantees the gap on edges from late unstable modes into the first
/// stable one.)  A common factor theta^{-e_max} normalizes the last mode's
/// scale to 1; every bound in the theory uses P_q^{-1} (...) P_p pairs, so a
/// global factor is inert.
inline RescaleResult rescaleBases(const SwitchedSystemSpec& spec, const JumpRule& jumps,
                                  double epsilon, double xi = 0.5) {
  // epsilon = 1 is admitted: the bound requested is then simply "< 1".
  if (!(epsilon > 0.0 && epsilon <= 1.0))
    throw Error("rescaleBases: epsilon must lie in (0, 1]");
  if (!(xi > 0.0 && xi < 1.0)) throw Error("rescaleBases: xi must lie in (0, 1)");

  const auto acyclicity = unstableSubgraphAcyclic(spec);
  if (!acyclicity.acyclic) {
    std::ostringstream oss;
    oss << "rescaleBases: unstable-source subgraph has the cycle ";
    for (size_t i = 0; i < acyclicity.cycle.size(); ++i)
      oss << (i ? "→" : "") << acyclicity.cycle[i];
    throw HypothesisViolated(oss.str());
  }

  RescaleResult result;
  for (const auto& sub : spec.subsystems) {
    result.bases[sub.modeId] = sub.eig.basis;
    result.scales[sub.modeId] = 1.0;
  }
  result.rhoBefore = detail::unstableEdgeMax(spec, jumps, result.bases);
  result.rhoAfter = result.rhoBefore;
  if (result.rhoBefore < epsilon) return result;  // nothing to do

  const double theta = result.rhoBefore / (epsilon * xi);
  result.theta = theta;

  // Arrange the modes: G_u sources (unstable, no incoming G_u edge) by id,
  // remaining unstable modes topologically within G_u, stable modes by id.
  const std::set<ModePair> eu = unstableEdges(spec);
  std::set<ModeId> unstable;
  for (const auto& sub : spec.subsystems)
    if (sub.stabilityClass == StabilityClass::unstable) unstable.insert(sub.modeId);
  std::set<ModeId> hasIncoming;
  for (const auto& [p, q] : eu) {
    (void)p;
    if (unstable.count(q)) hasIncoming.insert(q);
  }

  std::vector<ModeId> arranged;
  for (ModeId u : unstable)
    if (!hasIncoming.count(u)) arranged.push_back(u);
  const size_t k = arranged.size();

  ModeGraph unstableGraph;
  for (ModeId u : unstable)
    if (hasIncoming.count(u)) unstableGraph.vertices.push_back(u);
  for (const auto& [p, q] : eu)
    if (unstable.count(q) && hasIncoming.count(q) && hasIncoming.count(p))
      unstableGraph.edges.insert({p, q});
  for (ModeId u : topologicalOrder(unstableGraph)) arranged.push_back(u);

  std::vector<ModeId> stableTail;
  for (const auto& sub : spec.subsystems)
    if (!unstable.count(sub.modeId)) stableTail.push_back(sub.modeId);
  std::sort(stableTail.begin(), stableTail.end());
  arranged.insert(arranged.end(), stableTail.begin(), stableTail.end());

  // Ladder exponents, normalized so the largest is 0 (scales <= 1).
  const double eMax = static_cast<double>(arranged.size() > k ? arranged.size() - k : 0);
  for (size_t j = 0; j < arranged.size(); ++j) {
    const double ej = std::max(0.0, static_cast<double>(j + 1) - static_cast<double>(k));
    const double scale = std::pow(theta, ej - eMax);
    result.scales[arranged[j]] = scale;
    result.bases[arranged[j]] *= scale;
  }
  result.changed = true;
  result.rhoAfter = detail::unstableEdgeMax(spec, jumps, result.bases);
  if (!(result.rhoAfter < epsilon))
    throw Error("rescaleBases: post-scaling bound failed; this should be unreachable");
  return result;
}

// ---------------------------------------------------------------------------
// Basis overrides
// ---------------------------------------------------------------------------

/// Replace a mode's Jordan basis with a caller-supplied one (tabulated in a
/// reference, or chosen to improve the bounds — any valid eigenvector basis
/// works, including non-unit columns).  Columns are checked to be honest
/// eigenvectors, then reordered to the library's (Re, Im)-ascending
/// convention with their eigenvalues snapped to the mode's spectrum.  Only
/// diagonalizable modes support overrides.
inline void applyBasisOverride(SwitchedSystemSpec& spec, ModeId id, const ComplexMatrix& P) {
  SubsystemSpec* sub = nullptr;
  for (auto& s : spec.subsystems)
    if (s.modeId == id) sub = &s;
  if (!sub) throw Error("applyBasisOverride: unknown mode " + std::to_string(id));
  if (sub->eig.defective)
    throw Error("applyBasisOverride: mode " + std::to_string(id) +
                " is defective; overrides support diagonalizable modes only");
  const Eigen::Index n = sub->A.rows();
  if (P.rows() != n || P.cols() != n)
    throw DimensionMismatch("applyBasisOverride: basis has wrong dimensions");

  const ComplexMatrix Ac = sub->A.cast<std::complex<double>>();
  const double normA = spectralNorm(sub->A);
  struct Column {
    ComplexVector v;
    std::complex<double> lambda;
  };
  std::vector<Column> cols;
  for (Eigen::Index j = 0; j < n; ++j) {
    const ComplexVector v = P.col(j);
    const double vn = v.norm();
    if (vn == 0.0) throw Error("applyBasisOverride: zero column");
    const std::complex<double> rayleigh = v.dot(Ac * v) / (vn * vn);
    // Snap to the nearest eigenvalue of the mode; then verify.
    std::complex<double> lambda = sub->eig.eigenvalues(0);
    for (Eigen::Index k = 1; k < n; ++k)
      if (std::abs(sub->eig.eigenvalues(k) - rayleigh) < std::abs(lambda - rayleigh))
        lambda = sub->eig.eigenvalues(k);
    if ((Ac * v - lambda * v).norm() > 1e-8 * std::max(normA, 1.0) * vn)
      throw Error("applyBasisOverride: column " + std::to_string(j) +
                  " is not an eigenvector of mode " + std::to_string(id));
    cols.push_back({v, lambda});
  }
  std::stable_sort(cols.begin(), cols.end(), [](const Column& a, const Column& b) {
    if (a.lambda.real() != b.lambda.real()) return a.lambda.real() < b.lambda.real();
    return a.lambda.imag() < b.lambda.imag();
  });

  EigenStructure eig;
  eig.eigenvalues = ComplexVector(n);
  eig.basis = ComplexMatrix(n, n);
  eig.blockSizes.assign(static_cast<size_t>(n), 1);
  for (Eigen::Index j = 0; j < n; ++j) {
    eig.basis.col(j) = cols[static_cast<size_t>(j)].v;
    eig.eigenvalues(j) = cols[static_cast<size_t>(j)].lambda;
  }
  const double cond = eig.basisCondition();
  if (!std::isfinite(cond) || cond > 1e12)
    throw IllConditionedBasis("applyBasisOverride: condition number " + std::to_string(cond));
  sub->eig = eig;
}

/// Multiply a mode's basis by a scalar (the rescaling lemma's theta powers,
/// or an explicit factor such as 1e-3).  Jordan validity is untouched.
inline void applyBasisScale(SwitchedSystemSpec& spec, ModeId id, double scale) {
  if (!(scale > 0.0) || !std::isfinite(scale))
    throw Error("applyBasisScale: scale must be positive and finite");
  for (auto& s : spec.subsystems)
    if (s.modeId == id) {
      s.eig.basis *= scale;
      return;
    }
  throw Error("applyBasisScale: unknown mode " + std::to_string(id));
}

// ---------------------------------------------------------------------------
// Switch counting
// ---------------------------------------------------------------------------

/// Counts of switch instants t_i (i >= 1) with t_i in [0, t), classified by
/// the stability class of sigma(t_i) — the mode governing [t_i, t_{i+1}).
inline SwitchCounts countSwitches(const SwitchingSignal& signal,
                                  const SwitchedSystemSpec& spec, double t) {
  SwitchCounts counts;
  for (size_t i = 1; i < signal.events.size(); ++i) {
    if (!(signal.events[i].time < t)) break;
    const auto sc = spec.subsystem(signal.events[i].mode).stabilityClass;
    if (sc == StabilityClass::stable) ++counts.toStable;
    if (sc == StabilityClass::unstable) ++counts.toUnstable;
    ++counts.total;
  }
  return counts;
}

/// Per-mode refinement: N^p counts switch instants whose entered mode is p.
inline std::map<ModeId, SwitchCounts> countSwitchesPerMode(const SwitchingSignal& signal,
                                                           const SwitchedSystemSpec& spec,
                                                           double t) {
  std::map<ModeId, SwitchCounts> out;
  for (const auto& sub : spec.subsystems) out[sub.modeId] = SwitchCounts{};
  for (size_t i = 1; i < signal.events.size(); ++i) {
    if (!(signal.events[i].time < t)) break;
    const ModeId m = signal.events[i].mode;
    auto& counts = out[m];
    const auto sc = spec.subsystem(m).stabilityClass;
    if (sc == StabilityClass::stable) ++counts.toStable;
    if (sc == StabilityClass::unstable) ++counts.toUnstable;
    ++counts.total;
  }
  return out;
}

}  // namespace dwellkit
