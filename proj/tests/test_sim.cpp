#include "dwellkit/sim.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "dwellkit/lyapunov.hpp"
#include "reference_systems.hpp"

using namespace dwellkit;

namespace {

// Fig-style setup: modes 8 -> 9 -> 10 cycling with period 2.81, the impulse
// M_2 at every switch, ten segments in total.
SwitchingSignal fig1Signal() {
  SwitchingSignal sig;
  const ModeId cycle[3] = {8, 9, 10};
  for (int k = 0; k < 10; ++k) sig.events.push_back({k * 2.81, cycle[k % 3]});
  sig.horizon = 10 * 2.81;
  return sig;
}

ImpulseSchedule constantSchedule(const SwitchingSignal& sig, const RealMatrix& M) {
  ImpulseSchedule sched;
  sched.times = sig.switchTimes();
  sched.matrices.assign(sched.times.size(), M);
  return sched;
}

// The published destabilizing signal: resets every pi/(2 sqrt 2) time units,
// modes alternating 1 <-> 2.
SwitchingSignal destabissPeriodic(int periods) {
  const double T = M_PI / (2.0 * std::sqrt(2.0));
  SwitchingSignal sig;
  for (int k = 0; k < periods; ++k) sig.events.push_back({k * T, (k % 2) ? 2 : 1});
  sig.horizon = periods * T;
  return sig;
}

// Alternating sojourns of exactly (14.64, 3) on the mixed pair, starting in
// the stable mode 4.
SwitchingSignal alternatingMixed(int sojourns, double horizon) {
  SwitchingSignal sig;
  double t = 0.0;
  for (int k = 0; k < sojourns; ++k) {
    sig.events.push_back({t, (k % 2) ? 5 : 4});
    t += (k % 2) ? 3.0 : 14.64;
  }
  sig.horizon = horizon;
  return sig;
}

RealVector vec2(double a, double b) {
  RealVector v(2);
  v << a, b;
  return v;
}

RealVector vec3(double a, double b, double c) {
  RealVector v(3);
  v << a, b, c;
  return v;
}

// max_p cond(P_p) * max_p c_p, the constant the flow-expression proof hides.
double proofConstant(const SwitchedSystemSpec& spec) {
  double cond = 0.0, c = 0.0;
  for (const auto& sub : spec.subsystems) {
    cond = std::max(cond, conditionNumber(sub.eig.basis));
    c = std::max(c, sub.c);
  }
  return cond * c;
}

}  // namespace

// ---------------------------------------------------------------------------
// simulate: published trajectories
// ---------------------------------------------------------------------------

TEST(Simulate, FigureTrajectoryDecaysUnderConstantM2) {
  const auto spec = refsys::arbReset3d();
  const auto sig = fig1Signal();
  const auto sched = constantSchedule(sig, refsys::m2());
  const auto traj = simulate(spec, sig, &sched, vec3(-5.0, 5.0, -3.0));

  ASSERT_FALSE(traj.normTrace.empty());
  EXPECT_DOUBLE_EQ(traj.normTrace.front().second, std::sqrt(59.0));
  EXPECT_DOUBLE_EQ(traj.samples.back().time, 28.1);

  // Ten exact segments and nine constant-M_2 jumps land on this value.
  const double finalNorm = traj.normTrace.back().second;
  EXPECT_NEAR(finalNorm, 4.194027e-5, 1e-9);
  EXPECT_LT(finalNorm, 1e-4 * traj.normTrace.front().second);

  ASSERT_EQ(traj.jumpEvents.size(), 9u);
  for (const auto& e : traj.jumpEvents) {
    EXPECT_EQ(e.jumpId, "I[1]");
    EXPECT_LE((e.post - refsys::m2() * e.pre).norm(), 1e-12 * std::max(1.0, e.pre.norm()));
  }
}

TEST(Simulate, DestabissGrowsAtThePublishedRate) {
  const auto spec = refsys::destabiss();
  const auto sig = destabissPeriodic(20);
  const auto traj = simulate(spec, sig, vec2(1.0, 1.0));

  const double ratio = traj.normTrace.back().second / traj.normTrace.front().second;
  const double perPeriod = std::pow(ratio, 1.0 / 20.0);
  EXPECT_NEAR(perPeriod, 1.2438020244408587, 1e-9);

  // Within 5% of the spectral radius of the one-period map.
  const double T = M_PI / (2.0 * std::sqrt(2.0));
  const double rho = spectralRadius(refsys::rotationReset() * matrixExp(refsys::a1(), T));
  EXPECT_NEAR(rho, 1.2655433, 1e-6);
  EXPECT_NEAR(perPeriod / rho, 1.0, 0.05);
  EXPECT_GT(ratio, 50.0);
}

TEST(Simulate, ZeroInitialStateStaysZero) {
  const auto traj = simulate(refsys::destabiss(), destabissPeriodic(5), RealVector::Zero(2));
  for (const auto& s : traj.samples) EXPECT_EQ(s.state.norm(), 0.0);
  for (const auto& [t, n] : traj.normTrace) EXPECT_EQ(n, 0.0);
}

// ---------------------------------------------------------------------------
// simulate: exactness invariants
// ---------------------------------------------------------------------------

TEST(Simulate, SamplesFollowTheExactFlowOfTheActiveMode) {
  const auto spec = refsys::bpls();
  SwitchingSignal sig;
  sig.events = {{0.0, 2}, {1.3, 3}, {3.1, 2}};
  sig.horizon = 5.0;
  const auto traj = simulate(spec, sig, vec2(0.4, -1.0), 0.17);

  // Segment starts are the samples at the event times themselves.
  std::map<double, RealVector> startState;
  for (const auto& s : traj.samples)
    for (const auto& e : sig.events)
      if (s.time == e.time) startState[e.time] = s.state;
  ASSERT_EQ(startState.size(), sig.events.size());

  for (const auto& s : traj.samples) {
    double t0 = 0.0;
    ModeId mode = sig.events.front().mode;
    for (const auto& e : sig.events)
      if (e.time <= s.time) {
        t0 = e.time;
        mode = e.mode;
      }
    const RealVector expected = matrixExp(spec.subsystem(mode).A, s.time - t0) * startState[t0];
    EXPECT_LE((s.state - expected).norm(), 1e-9 * std::max(1.0, expected.norm()));
    EXPECT_EQ(s.mode, mode);
  }

  // Times strictly increase (the post-jump sample owns the switch instant).
  for (size_t i = 1; i < traj.samples.size(); ++i)
    EXPECT_GT(traj.samples[i].time, traj.samples[i - 1].time);
}

TEST(Simulate, HalfStepRefinementChangesNoSample) {
  const auto spec = refsys::destabiss();
  const auto sig = destabissPeriodic(6);
  const auto coarse = simulate(spec, sig, vec2(0.3, 0.7), 0.2);
  const auto fine = simulate(spec, sig, vec2(0.3, 0.7), 0.1);

  std::map<double, const RealVector*> fineByTime;
  for (const auto& s : fine.samples) fineByTime[s.time] = &s.state;

  size_t matched = 0;
  for (const auto& s : coarse.samples) {
    const auto it = fineByTime.find(s.time);
    ASSERT_NE(it, fineByTime.end()) << "no fine sample at t = " << s.time;
    EXPECT_LE((s.state - *it->second).norm(), 1e-9 * std::max(1.0, s.state.norm()));
    ++matched;
  }
  EXPECT_EQ(matched, coarse.samples.size());
  EXPECT_GT(fine.samples.size(), coarse.samples.size());
}

TEST(Simulate, CompositionAcrossASplitHorizon) {
  const auto spec = refsys::bpls();
  SwitchingSignal whole;
  whole.events = {{0.0, 2}, {2.0, 3}, {5.0, 2}};
  whole.horizon = 8.0;

  SwitchingSignal firstHalf;
  firstHalf.events = {{0.0, 2}, {2.0, 3}};
  firstHalf.horizon = 4.0;

  SwitchingSignal secondHalf;  // re-based at t = 4, still in mode 3
  secondHalf.events = {{0.0, 3}, {1.0, 2}};
  secondHalf.horizon = 4.0;

  const RealVector x0 = vec2(1.0, -0.5);
  const auto full = simulate(spec, whole, x0, 0.5);
  const auto partA = simulate(spec, firstHalf, x0, 0.5);
  const auto partB = simulate(spec, secondHalf, partA.finalState(), 0.5);

  EXPECT_LE((full.finalState() - partB.finalState()).norm(),
            1e-9 * std::max(1.0, full.finalState().norm()));

  // Every second-leg sample whose absolute time the full run also hit agrees.
  std::map<double, const RealVector*> fullByTime;
  for (const auto& s : full.samples) fullByTime[s.time] = &s.state;
  size_t matched = 0;
  for (const auto& s : partB.samples) {
    const auto it = fullByTime.find(4.0 + s.time);
    if (it == fullByTime.end()) continue;
    EXPECT_LE((s.state - *it->second).norm(), 1e-9 * std::max(1.0, s.state.norm()));
    ++matched;
  }
  EXPECT_GE(matched, 5u);
}

// ---------------------------------------------------------------------------
// simulate: admissibility and schedule errors
// ---------------------------------------------------------------------------

TEST(Simulate, RejectsInadmissibleSignals) {
  const auto spec = refsys::destabiss();
  SwitchingSignal sig;

  sig.events = {{0.5, 1}, {2.0, 2}};  // first event off the origin
  sig.horizon = 4.0;
  EXPECT_THROW(simulate(spec, sig, vec2(1, 0)), InadmissibleSignal);

  sig.events = {{0.0, 1}, {2.0, 1}};  // repeated mode
  EXPECT_THROW(simulate(spec, sig, vec2(1, 0)), InadmissibleSignal);

  sig.events = {{0.0, 1}, {2.0, 7}};  // unknown mode / non-edge
  EXPECT_THROW(simulate(spec, sig, vec2(1, 0)), InadmissibleSignal);

  sig.events = {{0.0, 1}, {2.0, 2}};
  sig.horizon = 1.0;  // horizon precedes the last event
  EXPECT_THROW(simulate(spec, sig, vec2(1, 0)), InadmissibleSignal);

  sig.horizon = 4.0;
  EXPECT_THROW(simulate(spec, sig, vec3(1, 0, 0)), DimensionMismatch);
  EXPECT_NO_THROW(simulate(spec, sig, vec2(1, 0)));
}

TEST(Simulate, ScheduleIsRequiredExactlyForImpulses) {
  const auto arb = refsys::arbReset3d();
  const auto sig = fig1Signal();
  EXPECT_THROW(simulate(arb, sig, vec3(1, 0, 0)), ScheduleMismatch);

  const auto destabiss = refsys::destabiss();
  const auto rsig = destabissPeriodic(3);
  ImpulseSchedule stray = constantSchedule(rsig, refsys::rotationReset());
  EXPECT_THROW(simulate(destabiss, rsig, &stray, vec2(1, 0)), ScheduleMismatch);
}

TEST(Simulate, ScheduleMustAlignWithTheSwitchInstants) {
  const auto spec = refsys::arbReset3d();
  const auto sig = fig1Signal();

  auto sched = constantSchedule(sig, refsys::m2());
  sched.times.pop_back();
  sched.matrices.pop_back();
  EXPECT_THROW(simulate(spec, sig, &sched, vec3(1, 0, 0)), ScheduleMismatch);

  sched = constantSchedule(sig, refsys::m2());
  sched.times[3] += 0.2;
  EXPECT_THROW(simulate(spec, sig, &sched, vec3(1, 0, 0)), ScheduleMismatch);
}

TEST(Simulate, HullScheduleEntriesMustBeHullMembers) {
  const auto spec = refsys::arbReset3d();
  const auto sig = fig1Signal();

  // A strict convex combination is fine and is labelled as such.
  const RealMatrix mid = 0.5 * (refsys::m1() + refsys::m2());
  const auto inside = constantSchedule(sig, mid);
  const auto traj = simulate(spec, sig, &inside, vec3(1, 1, 1));
  ASSERT_FALSE(traj.jumpEvents.empty());
  EXPECT_EQ(traj.jumpEvents.front().jumpId, "hull");

  const auto outside = constantSchedule(sig, RealMatrix(2.0 * refsys::m2()));
  EXPECT_THROW(simulate(spec, sig, &outside, vec3(1, 1, 1)), ScheduleMismatch);
}

TEST(Simulate, FiniteImpulseFamiliesMatchMembersExactly) {
  auto spec = refsys::arbReset3d();
  ImpulseSet finite;
  finite.kind = ImpulseSet::Kind::finite;
  finite.matrices = {refsys::m1(), refsys::m2()};
  spec.jumps = finite;

  const auto sig = fig1Signal();
  const auto member = constantSchedule(sig, refsys::m2());
  const auto traj = simulate(spec, sig, &member, vec3(1, 1, 1));
  EXPECT_EQ(traj.jumpEvents.front().jumpId, "I[1]");

  // Mixtures are outside a finite family even when they sit in its hull.
  const auto mix = constantSchedule(sig, RealMatrix(0.5 * (refsys::m1() + refsys::m2())));
  EXPECT_THROW(simulate(spec, sig, &mix, vec3(1, 1, 1)), ScheduleMismatch);
}

// ---------------------------------------------------------------------------
// Signal generation
// ---------------------------------------------------------------------------

TEST(Generate, PeriodicCycleLandsOnTheLattice) {
  const auto gen = SignalGenerator::periodicCycle({8, 9, 10}, {2.81}, 30.0);
  const auto sig = generateSignal(gen);
  ASSERT_EQ(sig.events.size(), 11u);  // 10*2.81 = 28.1 < 30, 11*2.81 > 30
  const ModeId cycle[3] = {8, 9, 10};
  for (size_t k = 0; k < sig.events.size(); ++k) {
    EXPECT_NEAR(sig.events[k].time, 2.81 * static_cast<double>(k), 1e-9);
    EXPECT_EQ(sig.events[k].mode, cycle[k % 3]);
  }
  EXPECT_DOUBLE_EQ(sig.horizon, 30.0);
}

TEST(Generate, RandomAdmissibleStaysInClassAndIsSeedDeterministic) {
  const auto spec = refsys::destabiss();
  TimeConstraints cls;
  cls.dwell = 3.5;
  const auto gen = SignalGenerator::randomAdmissible(spec, cls, 42u, 60.0);
  const auto sig = generateSignal(gen);
  const auto again = generateSignal(gen);

  ASSERT_EQ(sig.events.size(), again.events.size());
  for (size_t i = 0; i < sig.events.size(); ++i) {
    EXPECT_EQ(sig.events[i].time, again.events[i].time);
    EXPECT_EQ(sig.events[i].mode, again.events[i].mode);
  }
  ASSERT_GE(sig.events.size(), 2u);

  // Independent membership check: gaps within [tau, 10 tau], graph edges only.
  const auto report = classifySignal(sig, spec);
  EXPECT_TRUE(report.graphAdmissible);
  EXPECT_GE(report.uniformDwell, 3.5);
  EXPECT_LE(report.uniformDwell, 35.0 + 1e-12);

  auto other = gen;
  other.seed = 43u;
  const auto different = generateSignal(other);
  const bool same = different.events.size() == sig.events.size() &&
                    std::equal(sig.events.begin(), sig.events.end(), different.events.begin(),
                               [](const auto& a, const auto& b) {
                                 return a.time == b.time && a.mode == b.mode;
                               });
  EXPECT_FALSE(same);
}

TEST(Generate, MixedClassSamplerRespectsBothBounds) {
  const auto spec = refsys::mixed();
  TimeConstraints cls;
  cls.dwell = 14.64;
  cls.flee = 3.0;
  const auto sig = generateSignal(SignalGenerator::randomAdmissible(spec, cls, 7u, 300.0));
  const auto report = classifySignal(sig, spec);
  EXPECT_TRUE(report.graphAdmissible);
  ASSERT_FALSE(report.dwellByMode.empty());
  EXPECT_GE(report.dwellByMode.at(4), 14.64);
  ASSERT_FALSE(report.fleeByMode.empty());
  EXPECT_LE(report.fleeByMode.at(5), 3.0);
  EXPECT_GT(report.fleeByMode.at(5), 0.0);
}

TEST(Generate, UnsatisfiableClassesAreRejected) {
  auto spec = refsys::mixed();
  spec.graph.edges = {{4, 5}};  // the unstable mode 5 has nowhere to go
  TimeConstraints cls;
  cls.dwell = 10.0;
  cls.flee = 3.0;
  EXPECT_THROW(generateSignal(SignalGenerator::randomAdmissible(spec, cls, 1u, 50.0)),
               UnsatisfiableClass);

  // A zero dwell bound has no positive sampler.
  TimeConstraints degenerate;
  degenerate.dwell = 0.0;
  degenerate.flee = 3.0;
  EXPECT_THROW(
      generateSignal(SignalGenerator::randomAdmissible(refsys::mixed(), degenerate, 1u, 50.0)),
      UnsatisfiableClass);
}

// ---------------------------------------------------------------------------
// Signal classification
// ---------------------------------------------------------------------------

TEST(Classify, PeriodicSignalHasItsPeriodAsTightestDwell) {
  const auto report = classifySignal(fig1Signal(), refsys::arbReset3d());
  EXPECT_TRUE(report.graphAdmissible);
  EXPECT_NEAR(report.uniformDwell, 2.81, 1e-12);
  EXPECT_EQ(report.uniformFlee, 0.0);  // no unstable sources
  EXPECT_TRUE(report.fleeByMode.empty());
  EXPECT_NEAR(report.dwellByMode.at(8), 2.81, 1e-12);
  EXPECT_NEAR(report.dwellByMode.at(9), 2.81, 1e-12);
  EXPECT_NEAR(report.dwellByMode.at(10), 2.81, 1e-12);
}

TEST(Classify, AlternatingMixedSignalSplitsPerMode) {
  const auto report = classifySignal(alternatingMixed(6, 60.0), refsys::mixed());
  EXPECT_TRUE(report.graphAdmissible);
  EXPECT_DOUBLE_EQ(report.uniformDwell, 14.64);
  EXPECT_DOUBLE_EQ(report.uniformFlee, 3.0);
  EXPECT_DOUBLE_EQ(report.dwellByMode.at(4), 14.64);
  EXPECT_DOUBLE_EQ(report.fleeByMode.at(5), 3.0);
}

TEST(Classify, SwitchFreeSignalsAreVacuouslyInEveryClass) {
  SwitchingSignal constant;
  constant.events = {{0.0, 1}};
  constant.horizon = 10.0;
  const auto report = classifySignal(constant, refsys::destabiss());
  EXPECT_TRUE(report.graphAdmissible);
  EXPECT_TRUE(std::isinf(report.uniformDwell));
  EXPECT_EQ(report.uniformFlee, 0.0);
  EXPECT_TRUE(report.dwellByMode.empty());

  const SwitchingSignal empty;
  const auto vacuous = classifySignal(empty, refsys::destabiss());
  EXPECT_TRUE(vacuous.graphAdmissible);
  EXPECT_TRUE(std::isinf(vacuous.uniformDwell));
  EXPECT_FALSE(vacuous.diagnostics.empty());  // still reported as not simulatable
}

// ---------------------------------------------------------------------------
// Empirical stability probe
// ---------------------------------------------------------------------------

TEST(Probe, CertifiedDwellStaysWithinTheProofConstant) {
  const auto spec = withDecayConstants(refsys::destabiss());
  const auto constraints = flowDwellFlee(spec);
  ASSERT_TRUE(constraints.dwell.has_value());

  const auto report = empiricalStabilityProbe(spec, constraints, 20, 40.0, 1u);
  EXPECT_EQ(report.deterministicTrials, 2);  // boundary cycle from e_1 and e_2
  EXPECT_EQ(report.growth.size(), 22u);
  EXPECT_FALSE(report.anyGrowth());
  EXPECT_GE(report.maxRatio, 1.0);
  EXPECT_LE(report.maxRatio, 1.1 * proofConstant(spec));
}

TEST(Probe, PublishedDestabilizingPeriodRaisesTheGrowthFlag) {
  const auto spec = withDecayConstants(refsys::destabiss());
  TimeConstraints tight;
  tight.dwell = M_PI / (2.0 * std::sqrt(2.0));
  const auto report = empiricalStabilityProbe(spec, tight, 5, 40.0, 2u);
  // The boundary probe is exactly the published periodic signal, which grows
  // by 1.26 per period; random members of the class need not grow.  The
  // one-period map is diagonal here, so only the e_2 start sees the growth.
  const auto first = report.growth.begin();
  EXPECT_TRUE(std::any_of(first, first + report.deterministicTrials,
                          [](bool flag) { return flag; }));
  EXPECT_TRUE(report.anyGrowth());
  EXPECT_GT(report.maxRatio, 10.0);
}

TEST(Probe, HullSchedulesStayBoundedAtTheCertifiedDwell) {
  const auto spec = withDecayConstants(refsys::arbReset3d());
  const auto constraints = flowDwellFleeImpulsive(spec);
  ASSERT_TRUE(constraints.dwell.has_value());

  const auto report = empiricalStabilityProbe(spec, constraints, 10, 40.0, 3u);
  EXPECT_EQ(report.deterministicTrials, 9);  // hull vertices x basis directions
  EXPECT_FALSE(report.anyGrowth());
  EXPECT_LE(report.maxRatio, 1.1 * proofConstant(spec));
}

// ---------------------------------------------------------------------------
// Lyapunov traces along simulated flows
// ---------------------------------------------------------------------------

TEST(LyapunovAlongFlows, CertifiedDwellMakesSwitchValuesNonincreasing) {
  const auto spec = refsys::destabiss();
  LmiParameters params;
  params.tau = 3.48;
  const auto cert = feasibilitySearch(buildLmiSystem(spec, LmiTemplate::resetDwell, params));
  ASSERT_TRUE(cert.has_value());

  TimeConstraints cls;
  cls.dwell = 3.48;
  const auto sig = generateSignal(SignalGenerator::randomAdmissible(spec, cls, 11u, 120.0));
  const auto traj = simulate(spec, sig, vec2(0.8, -0.6));
  ASSERT_GE(traj.jumpEvents.size(), 3u);

  // V_{sigma(t_k)}(x(t_k)) over k = 0, 1, ...: the proof's chain quantity.
  std::vector<double> values;
  values.push_back(traj.samples.front().state.dot(cert->Q.at(sig.events.front().mode) *
                                                  traj.samples.front().state));
  for (const auto& e : traj.jumpEvents)
    values.push_back(e.post.dot(cert->Q.at(e.toMode) * e.post));
  for (size_t k = 1; k < values.size(); ++k)
    EXPECT_LE(values[k], values[k - 1] * (1.0 + 1e-7));
}

TEST(LyapunovAlongFlows, MixedRateBoundHoldsAlongTheAlternatingSignal) {
  const auto spec = refsys::mixed();
  const auto found = mixedRateSearch(spec);
  ASSERT_TRUE(found.has_value());
  const auto& [cert, rates] = *found;

  const auto sig = alternatingMixed(9, 80.0);
  const auto traj = simulate(spec, sig, vec3(0.5, -1.0, 0.25));
  ASSERT_EQ(traj.jumpEvents.size(), 8u);

  const double v0 =
      traj.samples.front().state.dot(cert.Q.at(4) * traj.samples.front().state);
  for (size_t k = 0; k < traj.jumpEvents.size(); ++k) {
    const auto& e = traj.jumpEvents[k];
    const double vk = e.post.dot(cert.Q.at(e.toMode) * e.post);
    // Completed sojourns up to t_k: the initial stable one plus the entered
    // modes of the strictly earlier switches; the k-th jump itself adds the
    // final gamma factor.
    const auto counts = countSwitches(sig, spec, e.time);
    const int total = counts.total + 1;
    const int stableSojourns = counts.toStable + 1;
    const int unstableSojourns = counts.toUnstable;
    const double bound = std::pow(rates.gamma, total) *
                         std::exp(-rates.lambda * stableSojourns * 14.64 +
                                  rates.mu * unstableSojourns * 3.0) *
                         v0;
    EXPECT_LE(vk, bound * (1.0 + 1e-6));
  }
}

TEST(LyapunovAlongFlows, QuadraticTraceDecaysWithinStableSojourns) {
  const auto spec = refsys::destabiss();
  LmiParameters params;
  params.tau = 3.48;
  const auto cert = feasibilitySearch(buildLmiSystem(spec, LmiTemplate::resetDwell, params));
  ASSERT_TRUE(cert.has_value());

  const auto sig = destabissPeriodic(2);  // mode 1 then mode 2, gaps ~1.11
  SwitchingSignal slow = sig;
  slow.events[1].time = 4.0;
  slow.horizon = 8.0;
  const auto traj = simulate(spec, slow, vec2(1.0, 0.4), 0.05);
  const auto trace = quadraticTrace(traj, cert->Q);

  // Between switches the decay LMI makes V strictly nonincreasing.
  size_t jump = 0;
  for (size_t i = 1; i < trace.size(); ++i) {
    const bool atSwitch = jump < traj.jumpEvents.size() &&
                          trace[i].first == traj.jumpEvents[jump].time;
    if (atSwitch) {
      ++jump;
      continue;
    }
    EXPECT_LE(trace[i].second, trace[i - 1].second * (1.0 + 1e-9));
  }
}

// ---------------------------------------------------------------------------
// C-constant bound for certified flows
// ---------------------------------------------------------------------------

TEST(FlowBound, GeneratedSignalsRespectTheProofEnvelope) {
  const auto spec = withDecayConstants(refsys::destabiss());
  const auto constraints = flowDwellFlee(spec);
  const double C = proofConstant(spec);

  for (unsigned seed : {5u, 6u, 7u}) {
    const auto sig =
        generateSignal(SignalGenerator::randomAdmissible(spec, constraints, seed, 60.0));
    const auto traj = simulate(spec, sig, vec2(-0.8, 0.6));
    const double base = traj.normTrace.front().second;
    for (const auto& [t, n] : traj.normTrace) EXPECT_LE(n, 1.1 * C * base);
  }
}

// ---------------------------------------------------------------------------
// CSV export
// ---------------------------------------------------------------------------

TEST(Csv, JumpInstantsEmitPreAndPostRows) {
  const auto spec = refsys::destabiss();
  const auto sig = destabissPeriodic(3);
  const auto traj = simulate(spec, sig, vec2(1.0, 0.0), 0.3);

  std::ostringstream os;
  writeCsv(traj, os);
  std::istringstream is(os.str());
  std::string line;
  ASSERT_TRUE(std::getline(is, line));
  EXPECT_EQ(line, "time,x1,x2,mode,norm,jump");

  size_t rows = 0, preRows = 0, postRows = 0;
  std::string pendingPreTime;
  while (std::getline(is, line)) {
    ++rows;
    const auto lastComma = line.rfind(',');
    ASSERT_NE(lastComma, std::string::npos);
    const std::string flag = line.substr(lastComma + 1);
    const std::string time = line.substr(0, line.find(','));
    if (flag == "1") {
      ++preRows;
      pendingPreTime = time;
    } else if (flag == "2") {
      ++postRows;
      EXPECT_EQ(time, pendingPreTime);  // the pre row immediately precedes
    } else {
      EXPECT_EQ(flag, "0");
    }
  }
  EXPECT_EQ(preRows, traj.jumpEvents.size());
  EXPECT_EQ(postRows, traj.jumpEvents.size());
  EXPECT_EQ(rows, traj.samples.size() + traj.jumpEvents.size());
}
