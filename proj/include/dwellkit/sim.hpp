#pragma once

// Piecewise-exact simulation of reset/impulsive switched flows, admissible
// signal generation, and trajectory export.  The flows are closed-form, so
// "simulation" means evaluating x(t) = e^{A(t - t_k)} x(t_k) on each segment
// and applying the jump rule at the switch instants; sampling only adds
// points, it never integrates.

#include "dwellkit/bounds.hpp"

#include <algorithm>
#include <iomanip>
#include <ostream>
#include <random>
#include <utility>

namespace dwellkit {

struct InadmissibleSignal : Error {
  explicit InadmissibleSignal(const std::string& what) : Error(what) {}
};
struct ScheduleMismatch : Error {
  explicit ScheduleMismatch(const std::string& what) : Error(what) {}
};
struct UnsatisfiableClass : Error {
  explicit UnsatisfiableClass(const std::string& what) : Error(what) {}
};

// ---------------------------------------------------------------------------
// Trajectory
// ---------------------------------------------------------------------------

/// A sampled flow.  The state is right-continuous: the sample stored at a
/// switch instant is the post-jump value, and the pre-jump limit lives in the
/// matching JumpEvent.
struct Trajectory {
  struct Sample {
    double time = 0.0;
    RealVector state;
    ModeId mode = 0;
  };
  struct JumpEvent {
    double time = 0.0;
    RealVector pre;    // x(t_k^-)
    RealVector post;   // x(t_k) = J x(t_k^-)
    ModeId fromMode = 0;
    ModeId toMode = 0;
    std::string jumpId;  // "R(p,q)", "I[j]", or "hull" for a strict hull member
  };

  std::vector<Sample> samples;
  std::vector<JumpEvent> jumpEvents;
  std::vector<std::pair<double, double>> normTrace;  // (t, ||x(t)||), aligned with samples
  NormSpec norm;                                     // the norm the trace was recorded under

  [[nodiscard]] const RealVector& finalState() const {
    if (samples.empty()) throw Error("trajectory has no samples");
    return samples.back().state;
  }
};

namespace detail {

/// min segment length / 20, so every sojourn resolves into a plottable arc.
inline double defaultSampleStep(const SwitchingSignal& signal) {
  double minGap = std::numeric_limits<double>::infinity();
  for (size_t i = 1; i < signal.events.size(); ++i)
    minGap = std::min(minGap, signal.events[i].time - signal.events[i - 1].time);
  const double tail = signal.horizon - signal.events.back().time;
  if (tail > 0.0) minGap = std::min(minGap, tail);
  if (!std::isfinite(minGap)) return 1.0;  // single event, zero-length horizon
  return minGap / 20.0;
}

/// Name a schedule entry within the impulse family: the index of the matching
/// member/vertex, or "hull" when it is a strict convex combination.  Entries
/// outside the family are a schedule defect.
inline std::string impulseId(const ImpulseSet& family, const RealMatrix& M, size_t slot) {
  for (size_t i = 0; i < family.matrices.size(); ++i) {
    const RealMatrix& V = family.matrices[i];
    if ((M - V).norm() <= 1e-12 * std::max(1.0, V.norm()))
      return "I[" + std::to_string(i) + "]";
  }
  if (family.kind == ImpulseSet::Kind::convexHull) {
    // M in conv{V_i}  <=>  0 in conv{V_i - M}.
    ImpulseSet shifted;
    shifted.matrices.reserve(family.matrices.size());
    for (const auto& V : family.matrices) shifted.matrices.push_back(V - M);
    if (hullContainsZero(shifted)) return "hull";
  }
  throw ScheduleMismatch("schedule entry " + std::to_string(slot) +
                         " is not a member of the impulse family");
}

}  // namespace detail

// ---------------------------------------------------------------------------
// simulate
// ---------------------------------------------------------------------------

/// Flow the system along a signal.  Each segment is evaluated exactly from
/// its own start state (one matrix exponential per sample, never compounded
/// within a segment), jumps follow the edge reset or the supplied schedule.
/// A schedule is required exactly when the spec carries impulses; its times
/// must match the switch instants and every matrix must belong to the
/// impulse family (hull membership for convexHull kinds).  sampleStep <= 0
/// requests the default (min segment / 20).
inline Trajectory simulate(const SwitchedSystemSpec& spec, const SwitchingSignal& signal,
                           const ImpulseSchedule* schedule, const RealVector& x0,
                           double sampleStep = 0.0) {
  const auto diags = checkSignal(signal, &spec.graph);
  if (!diags.empty()) {
    std::string what = "inadmissible signal:";
    for (const auto& d : diags) what += " " + d.message + ";";
    what.pop_back();
    throw InadmissibleSignal(what);
  }
  for (const auto& e : signal.events)
    if (!spec.find(e.mode))
      throw InadmissibleSignal("mode " + std::to_string(e.mode) + " is not in the spec");
  if (x0.size() != spec.dimension())
    throw DimensionMismatch("simulate: x0 has dimension " + std::to_string(x0.size()) +
                            " but the spec is " + std::to_string(spec.dimension()) +
                            "-dimensional");
  if (std::isnan(sampleStep)) throw Error("simulate: sampleStep must be a number");

  const auto switchTimes = signal.switchTimes();
  const bool impulsive = std::holds_alternative<ImpulseSet>(spec.jumps);
  if (impulsive && !schedule)
    throw ScheduleMismatch("impulsive systems need a schedule (one matrix per switch)");
  if (!impulsive && schedule)
    throw ScheduleMismatch("reset systems take no schedule; the edge fixes the jump");
  if (impulsive) {
    if (schedule->times.size() != switchTimes.size() ||
        schedule->matrices.size() != switchTimes.size())
      throw ScheduleMismatch("schedule must carry exactly one entry per switch (" +
                             std::to_string(switchTimes.size()) + " expected)");
    for (size_t i = 0; i < switchTimes.size(); ++i) {
      if (std::abs(schedule->times[i] - switchTimes[i]) >
          1e-12 * std::max(1.0, std::abs(switchTimes[i])))
        throw ScheduleMismatch("schedule time " + std::to_string(i) +
                               " does not match the switch instant");
      if (schedule->matrices[i].rows() != spec.dimension() ||
          schedule->matrices[i].cols() != spec.dimension())
        throw ScheduleMismatch("schedule matrix " + std::to_string(i) + " has the wrong shape");
    }
  }

  const double h = sampleStep > 0.0 ? sampleStep : detail::defaultSampleStep(signal);

  Trajectory traj;
  traj.norm = spec.norm;
  const auto record = [&traj, &spec](double t, const RealVector& state, ModeId mode) {
    traj.samples.push_back({t, state, mode});
    traj.normTrace.emplace_back(t, stateNorm(state, spec.norm));
  };

  RealVector x = x0;
  for (size_t k = 0; k < signal.events.size(); ++k) {
    const double tStart = signal.events[k].time;
    const ModeId mode = signal.events[k].mode;
    const bool last = (k + 1 == signal.events.size());
    const double tEnd = last ? signal.horizon : signal.events[k + 1].time;
    record(tStart, x, mode);

    const RealMatrix& A = spec.subsystem(mode).A;
    const double guard = 1e-12 * std::max(1.0, std::abs(tEnd));
    for (int j = 1; tStart + j * h < tEnd - guard; ++j)
      record(tStart + j * h, matrixExp(A, j * h) * x, mode);

    if (last) {
      if (tEnd > tStart + guard) record(tEnd, matrixExp(A, tEnd - tStart) * x, mode);
      break;
    }

    const RealVector pre = matrixExp(A, tEnd - tStart) * x;
    const ModeId next = signal.events[k + 1].mode;
    RealMatrix J;
    std::string id;
    if (impulsive) {
      J = schedule->matrices[k];
      id = detail::impulseId(std::get<ImpulseSet>(spec.jumps), J, k);
    } else {
      const RealMatrix* R = std::get<ResetCollection>(spec.jumps).find(mode, next);
      if (!R)
        throw Error("no reset matrix on edge (" + std::to_string(mode) + "," +
                    std::to_string(next) + ")");
      J = *R;
      id = "R(" + std::to_string(mode) + "," + std::to_string(next) + ")";
    }
    const RealVector post = J * pre;
    traj.jumpEvents.push_back({tEnd, pre, post, mode, next, std::move(id)});
    x = post;
  }
  return traj;
}

/// Reset-system convenience: no schedule argument.
inline Trajectory simulate(const SwitchedSystemSpec& spec, const SwitchingSignal& signal,
                           const RealVector& x0, double sampleStep = 0.0) {
  return simulate(spec, signal, nullptr, x0, sampleStep);
}

// ---------------------------------------------------------------------------
// Signal generation
// ---------------------------------------------------------------------------

struct SignalGenerator {
  enum class Kind { periodicCycle, randomAdmissible };

  Kind kind = Kind::periodicCycle;
  std::vector<ModeId> modes;      // periodicCycle: the repeating mode sequence
  std::vector<double> durations;  // periodicCycle: per-step sojourns, cycled alongside
  TimeConstraints constraints;    // randomAdmissible: the class parameters
  ModeGraph graph;                // randomAdmissible: admissible transitions
  std::map<ModeId, StabilityClass> stability;  // randomAdmissible: gap law per source mode
  unsigned seed = 0;
  double horizon = 0.0;

  static SignalGenerator periodicCycle(std::vector<ModeId> modes, std::vector<double> durations,
                                       double horizon) {
    SignalGenerator gen;
    gen.kind = Kind::periodicCycle;
    gen.modes = std::move(modes);
    gen.durations = std::move(durations);
    gen.horizon = horizon;
    return gen;
  }

  static SignalGenerator randomAdmissible(const SwitchedSystemSpec& spec,
                                          TimeConstraints constraints, unsigned seed,
                                          double horizon) {
    SignalGenerator gen;
    gen.kind = Kind::randomAdmissible;
    gen.constraints = std::move(constraints);
    gen.graph = spec.graph;
    for (const auto& sub : spec.subsystems) gen.stability[sub.modeId] = sub.stabilityClass;
    gen.seed = seed;
    gen.horizon = horizon;
    return gen;
  }
};

/// Realize a signal.  periodicCycle walks the given sequence with the given
/// sojourns.  randomAdmissible draws stable-source gaps as tau_p (1 + Exp(1))
/// truncated at 10 tau_p and unstable-source gaps uniform on (0, eta_p],
/// then walks to a uniformly chosen graph successor, so the result lies in
/// the declared class by construction (both laws need a positive bound; a
/// dwell bound of zero has no positive sampler).  Switch instants landing
/// within 1e-9 (relative) of the horizon are dropped — a jump at the exact
/// endpoint would only flip the final sample to its one-sided limit.
/// Deterministic for a fixed seed.
inline SwitchingSignal generateSignal(const SignalGenerator& gen) {
  if (!(gen.horizon > 0.0)) throw Error("generateSignal: horizon must be positive");
  SwitchingSignal sig;
  sig.horizon = gen.horizon;
  const double guard = 1e-9 * std::max(1.0, gen.horizon);

  if (gen.kind == SignalGenerator::Kind::periodicCycle) {
    if (gen.modes.empty() || gen.durations.empty())
      throw Error("generateSignal: the cycle needs modes and durations");
    sig.events.push_back({0.0, gen.modes.front()});
    double t = 0.0;
    for (size_t step = 0;; ++step) {
      const double next = t + gen.durations[step % gen.durations.size()];
      if (!(next < gen.horizon - guard)) break;
      t = next;
      sig.events.push_back({t, gen.modes[(step + 1) % gen.modes.size()]});
    }
    return sig;
  }

  if (gen.graph.vertices.empty()) throw UnsatisfiableClass("the mode graph has no vertices");
  const auto stabilityOf = [&gen](ModeId p) {
    const auto it = gen.stability.find(p);
    if (it == gen.stability.end())
      throw Error("generateSignal: no stability class for mode " + std::to_string(p));
    return it->second;
  };
  for (ModeId v : gen.graph.vertices)
    if (stabilityOf(v) == StabilityClass::unstable && gen.graph.outDegree(v) == 0)
      throw UnsatisfiableClass("unstable mode " + std::to_string(v) +
                               " has no successor, so no signal can flee it in time");

  std::mt19937 rng(gen.seed);
  std::uniform_int_distribution<size_t> pickStart(0, gen.graph.vertices.size() - 1);
  ModeId mode = gen.graph.vertices[pickStart(rng)];
  sig.events.push_back({0.0, mode});
  double t = 0.0;
  for (;;) {
    double gap = 0.0;
    if (stabilityOf(mode) == StabilityClass::unstable) {
      const double eta = gen.constraints.fleeFor(mode);
      if (!(eta > 0.0))
        throw UnsatisfiableClass("flee bound for mode " + std::to_string(mode) +
                                 " must be positive");
      gap = eta * (1.0 - std::uniform_real_distribution<double>(0.0, 1.0)(rng));
    } else {
      const double tau = gen.constraints.dwellFor(mode);
      if (!(tau > 0.0))
        throw UnsatisfiableClass("dwell bound for mode " + std::to_string(mode) +
                                 " must be positive to sample from");
      gap = std::min(tau * (1.0 + std::exponential_distribution<double>(1.0)(rng)), 10.0 * tau);
    }
    const double next = t + gap;
    if (!(next < gen.horizon - guard)) break;
    const auto succ = gen.graph.successors(mode);
    if (succ.empty()) break;  // stable dead end: dwell out the rest of the horizon
    std::uniform_int_distribution<size_t> pick(0, succ.size() - 1);
    mode = succ[pick(rng)];
    t = next;
    sig.events.push_back({t, mode});
  }
  return sig;
}

// ---------------------------------------------------------------------------
// Signal classification
// ---------------------------------------------------------------------------

/// Tightest class parameters a signal satisfies.  Only completed sojourns
/// count (the trailing partial sojourn is cut off by the horizon, not by a
/// switch); marginal sources sit on the dwell side, where lingering is
/// harmless.  A signal with no completed sojourn is vacuously in every
/// class: dwell +inf, flee 0.
struct SignalClassReport {
  double uniformDwell = std::numeric_limits<double>::infinity();  // largest tau satisfied
  double uniformFlee = 0.0;                                       // smallest eta satisfied
  std::map<ModeId, double> dwellByMode;  // per stable source: its smallest sojourn
  std::map<ModeId, double> fleeByMode;   // per unstable source: its largest sojourn
  bool graphAdmissible = true;
  std::vector<Diagnostic> diagnostics;  // everything checkSignal raised
};

inline SignalClassReport classifySignal(const SwitchingSignal& signal,
                                        const SwitchedSystemSpec& spec) {
  SignalClassReport rep;
  rep.diagnostics = checkSignal(signal, &spec.graph);
  for (const auto& d : rep.diagnostics)
    if (d.code == DiagCode::SignalEdge) rep.graphAdmissible = false;

  for (size_t k = 0; k + 1 < signal.events.size(); ++k) {
    const double gap = signal.events[k + 1].time - signal.events[k].time;
    const ModeId p = signal.events[k].mode;
    const SubsystemSpec* sub = spec.find(p);
    if (!sub) continue;  // unknown mode: the diagnostics already cover it
    if (sub->stabilityClass == StabilityClass::unstable) {
      rep.uniformFlee = std::max(rep.uniformFlee, gap);
      const auto [it, fresh] = rep.fleeByMode.try_emplace(p, gap);
      if (!fresh) it->second = std::max(it->second, gap);
    } else {
      rep.uniformDwell = std::min(rep.uniformDwell, gap);
      const auto [it, fresh] = rep.dwellByMode.try_emplace(p, gap);
      if (!fresh) it->second = std::min(it->second, gap);
    }
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Empirical stability probe
// ---------------------------------------------------------------------------

struct ProbeReport {
  double maxRatio = 0.0;        // sup_t ||x(t)|| / ||x0|| over every trial
  std::vector<bool> growth;     // per trial: norm envelope still rising in the back half
  int deterministicTrials = 0;  // leading entries of `growth`: boundary probes

  [[nodiscard]] bool anyGrowth() const {
    return std::any_of(growth.begin(), growth.end(), [](bool g) { return g; });
  }
};

namespace detail {

/// The class's boundary member: start at the smallest vertex, always walk to
/// the smallest successor, sojourn exactly tau_p in stable/marginal modes and
/// eta_p in unstable ones.  The flow bounds are tight exactly here, so a
/// probe that skipped it would miss the worst member of the class (random
/// gaps essentially never land on the bound).
inline SwitchingSignal tightestPeriodicSignal(const SwitchedSystemSpec& spec,
                                              const TimeConstraints& constraints,
                                              double horizon) {
  if (spec.graph.vertices.empty()) throw UnsatisfiableClass("the mode graph has no vertices");
  SwitchingSignal sig;
  sig.horizon = horizon;
  ModeId mode = *std::min_element(spec.graph.vertices.begin(), spec.graph.vertices.end());
  sig.events.push_back({0.0, mode});
  double t = 0.0;
  const double guard = 1e-9 * std::max(1.0, horizon);
  for (;;) {
    const bool unstable = spec.subsystem(mode).stabilityClass == StabilityClass::unstable;
    const double gap = unstable ? constraints.fleeFor(mode) : constraints.dwellFor(mode);
    if (!(gap > 0.0))
      throw UnsatisfiableClass("gap bound for mode " + std::to_string(mode) +
                               " must be positive");
    const double next = t + gap;
    if (!(next < horizon - guard)) break;
    const auto succ = spec.graph.successors(mode);
    if (succ.empty()) {
      if (unstable)
        throw UnsatisfiableClass("unstable mode " + std::to_string(mode) +
                                 " has no successor, so no signal can flee it in time");
      break;
    }
    mode = succ.front();  // successors() is ordered, so this is the smallest
    t = next;
    sig.events.push_back({t, mode});
  }
  return sig;
}

/// One draw from the impulse family: a uniformly chosen member for finite
/// kinds, a Dirichlet(1,..,1) vertex mix for hulls (covers the interior and
/// the near-vertex corners alike).
inline RealMatrix randomImpulse(const ImpulseSet& family, std::mt19937& rng) {
  if (family.matrices.empty()) throw Error("the impulse family is empty");
  if (family.kind == ImpulseSet::Kind::finite) {
    std::uniform_int_distribution<size_t> pick(0, family.matrices.size() - 1);
    return family.matrices[pick(rng)];
  }
  std::exponential_distribution<double> exp1(1.0);
  std::vector<double> w(family.matrices.size());
  double total = 0.0;
  for (double& wi : w) {
    wi = exp1(rng);
    total += wi;
  }
  RealMatrix M = RealMatrix::Zero(family.matrices.front().rows(), family.matrices.front().cols());
  for (size_t i = 0; i < w.size(); ++i) M += (w[i] / total) * family.matrices[i];
  return M;
}

/// Is the norm envelope still rising in the back half of the horizon?  The
/// 1e-6 slack keeps trajectories riding the stability boundary (per-switch
/// factor exactly 1) from flipping the flag on rounding noise.
inline bool envelopeRising(const Trajectory& traj) {
  if (traj.normTrace.size() < 2) return false;
  const double mid = 0.5 * (traj.normTrace.front().first + traj.normTrace.back().first);
  double front = 0.0, back = 0.0;
  for (const auto& [t, n] : traj.normTrace) {
    if (t <= mid)
      front = std::max(front, n);
    else
      back = std::max(back, n);
  }
  return back > front * (1.0 + 1e-6);
}

}  // namespace detail

/// Empirical evidence for (in)stability over a signal class: `trials`
/// randomized admissible signals (random unit start, Dirichlet schedules for
/// hulls) plus deterministic boundary probes — the tightest-gap periodic
/// signal from every canonical basis direction (a boundary cycle's growing
/// eigenvector can be exactly orthogonal to any single start), once per
/// impulse vertex for impulsive systems.  Evidence only: bounded ratios
/// corroborate a certificate, a growth flag refutes stability over the
/// class, and neither replaces the certified statements from the
/// bounds/lyapunov analyses.
inline ProbeReport empiricalStabilityProbe(const SwitchedSystemSpec& spec,
                                           const TimeConstraints& constraints, int trials,
                                           double horizon, unsigned seed) {
  if (!(horizon > 0.0)) throw Error("empiricalStabilityProbe: horizon must be positive");
  ProbeReport rep;
  const bool impulsive = std::holds_alternative<ImpulseSet>(spec.jumps);

  const auto runTrial = [&rep, &spec](const SwitchingSignal& sig, const ImpulseSchedule* sched,
                                      const RealVector& x0) {
    const Trajectory traj = simulate(spec, sig, sched, x0);
    const double base = stateNorm(x0, spec.norm);
    double peak = 0.0;
    for (const auto& [t, nrm] : traj.normTrace) peak = std::max(peak, nrm);
    rep.maxRatio = std::max(rep.maxRatio, peak / base);
    rep.growth.push_back(detail::envelopeRising(traj));
  };

  const SwitchingSignal boundary = detail::tightestPeriodicSignal(spec, constraints, horizon);
  const auto sweepBasis = [&runTrial, &spec](const SwitchingSignal& sig,
                                             const ImpulseSchedule* sched) {
    for (Eigen::Index i = 0; i < spec.dimension(); ++i) {
      RealVector ei = RealVector::Zero(spec.dimension());
      ei(i) = 1.0;
      runTrial(sig, sched, ei);
    }
  };
  if (impulsive) {
    const auto& family = std::get<ImpulseSet>(spec.jumps);
    for (const auto& M : family.matrices) {
      ImpulseSchedule sched;
      sched.times = boundary.switchTimes();
      sched.matrices.assign(sched.times.size(), M);
      sweepBasis(boundary, &sched);
    }
  } else {
    sweepBasis(boundary, nullptr);
  }
  rep.deterministicTrials = static_cast<int>(rep.growth.size());

  std::mt19937 master(seed);
  for (int trial = 0; trial < trials; ++trial) {
    std::mt19937 rng(master());
    const auto gen = SignalGenerator::randomAdmissible(spec, constraints,
                                                       static_cast<unsigned>(rng()), horizon);
    const SwitchingSignal sig = generateSignal(gen);
    std::normal_distribution<double> gauss(0.0, 1.0);
    RealVector x0(spec.dimension());
    for (Eigen::Index i = 0; i < x0.size(); ++i) x0(i) = gauss(rng);
    if (x0.norm() == 0.0) x0(0) = 1.0;
    x0.normalize();
    if (impulsive) {
      ImpulseSchedule sched;
      sched.times = sig.switchTimes();
      sched.matrices.reserve(sched.times.size());
      for (size_t k = 0; k < sched.times.size(); ++k)
        sched.matrices.push_back(detail::randomImpulse(std::get<ImpulseSet>(spec.jumps), rng));
      runTrial(sig, &sched, x0);
    } else {
      runTrial(sig, nullptr, x0);
    }
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Trace helpers and export
// ---------------------------------------------------------------------------

/// V_{sigma(t)}(x(t)) = x^T Q_{sigma(t)} x at every sample, for checking
/// certificate inequalities along a flow.
inline std::vector<std::pair<double, double>> quadraticTrace(
    const Trajectory& traj, const std::map<ModeId, RealMatrix>& Q) {
  std::vector<std::pair<double, double>> out;
  out.reserve(traj.samples.size());
  for (const auto& s : traj.samples) {
    const auto it = Q.find(s.mode);
    if (it == Q.end())
      throw Error("quadraticTrace: no matrix for mode " + std::to_string(s.mode));
    out.emplace_back(s.time, s.state.dot(it->second * s.state));
  }
  return out;
}

/// CSV export: header row, then time, state components, active mode, norm,
/// jump flag.  The flag is 0 for flow samples; a switch instant emits two
/// rows at the same time, the pre-jump limit (flag 1) and the post-jump
/// value (flag 2).
inline void writeCsv(const Trajectory& traj, std::ostream& os) {
  const Eigen::Index n = traj.samples.empty() ? 0 : traj.samples.front().state.size();
  os << "time";
  for (Eigen::Index i = 1; i <= n; ++i) os << ",x" << i;
  os << ",mode,norm,jump\n";
  os << std::setprecision(15);
  const auto row = [&os, n](double t, const RealVector& x, ModeId mode, double nrm, int flag) {
    os << t;
    for (Eigen::Index i = 0; i < n; ++i) os << ',' << x(i);
    os << ',' << mode << ',' << nrm << ',' << flag << '\n';
  };
  size_t j = 0;
  for (size_t i = 0; i < traj.samples.size(); ++i) {
    const auto& s = traj.samples[i];
    if (j < traj.jumpEvents.size() && traj.jumpEvents[j].time == s.time) {
      const auto& e = traj.jumpEvents[j];
      row(e.time, e.pre, e.fromMode, stateNorm(e.pre, traj.norm), 1);
      row(s.time, s.state, s.mode, traj.normTrace[i].second, 2);
      ++j;
    } else {
      row(s.time, s.state, s.mode, traj.normTrace[i].second, 0);
    }
  }
}

}  // namespace dwellkit
