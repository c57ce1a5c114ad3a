#pragma once

// Reference subsystem matrices, jump matrices, and system builders shared by
// the test suite.  The builders leave the envelope constants (c, rate) unset;
// call dwellkit::withDecayConstants (bounds module) where they are needed.

#include "dwellkit/model.hpp"

#include <cmath>

namespace refsys {

using dwellkit::ComplexMatrix;
using dwellkit::ImpulseSet;
using dwellkit::ModeGraph;
using dwellkit::NormSpec;
using dwellkit::RealMatrix;
using dwellkit::ResetCollection;
using dwellkit::SwitchedSystemSpec;

inline RealMatrix mat2(double a, double b, double c, double d) {
  RealMatrix M(2, 2);
  M << a, b, c, d;
  return M;
}

inline RealMatrix mat3(double a, double b, double c, double d, double e, double f, double g,
                       double h, double i) {
  RealMatrix M(3, 3);
  M << a, b, c, d, e, f, g, h, i;
  return M;
}

// Subsystem matrices ---------------------------------------------------------

inline RealMatrix a1() { return mat2(-0.1, 2, -1, -0.1); }   // also A_2
inline RealMatrix a3() { return mat2(-0.1, -1, 2, -0.1); }
inline RealMatrix a4() { return mat3(-5, -3, -4, 4, 2, 4, 0, 0, -1); }
inline RealMatrix a5() { return mat3(0, 2, 1, -2, 1, 0, 1, -2, 0); }
inline RealMatrix a6() { return mat3(-2, 1, 0, 1, -2, 0, 0, 0, -3); }
inline RealMatrix a7() { return mat3(-1, 1, 1, 0, -2, 2, 0, 0, -3); }
inline RealMatrix a8() { return mat3(-5, 3, -3, 0, -2, 2, 0, 0, -1); }
inline RealMatrix a9() { return mat3(-2, 2, -1, 4, 3, -4, 7, 10, -10); }
inline RealMatrix a10() { return mat3(-1, -2, -3, 1, 0, 1, 0, -1, -3); }

// Jump matrices ---------------------------------------------------------------

inline RealMatrix rotationReset() { return mat2(0, 1, -1, 0); }
inline RealMatrix r23() { return mat2(2, 3, 1, 2); }
inline RealMatrix r32() { return mat2(1, -2, -2, 5); }
inline RealMatrix r45() { return mat3(3, 5, -2, -6, -4, 1, 3, 1, 2); }
inline RealMatrix r54() { return mat3(-7, 3, 0, 0, -7, -3, -5, 0, 4); }
inline RealMatrix r67() { return mat3(0, 1, 0, 0, 0, 1, 1, 0, 0); }
inline RealMatrix r76() { return mat3(-1, 0, 1, 0, 1, 0, 0, 0, -1); }

inline RealMatrix m1() { return mat3(-2, 1, 0, 0, 2, -1, 3, 0, 0); }
inline RealMatrix m2() { return mat3(-3, 2, -1, 1, 4, 2, -2, -1, 1); }
inline RealMatrix m3() { return mat3(1, 1, -1, 2, 0, 2, 1, 0, 3); }

// Alternative bases -----------------------------------------------------------

inline RealMatrix v6() { return mat3(0, -1, 1, 0, 1, 1, 1, 0, 0); }
inline RealMatrix v7() { return mat3(1, -1, 1, -4, 1, 0, 2, 0, 0); }

/// Jordan bases as tabulated: P_4 (columns for eigenvalues -2, -1, -1) and
/// P_5 (columns for eigenvalues 1, -i*sqrt3, +i*sqrt3, in that order).
inline ComplexMatrix p4Tabulated() {
  const double s2 = std::sqrt(2.0), s21 = std::sqrt(21.0);
  ComplexMatrix P(3, 3);
  P << -1 / s2, 1 / s2, 2 / s21, 1 / s2, 0, -4 / s21, 0, -1 / s2, 1 / s21;
  return P;
}

inline ComplexMatrix p5Tabulated() {
  const double s3 = std::sqrt(3.0), s5 = std::sqrt(5.0);
  const std::complex<double> i(0, 1);
  ComplexMatrix P(3, 3);
  P << 0, -1 / s3, -1 / s3,
      -1 / s5, (-1.0 + i * s3) / (2 * s3), (-1.0 - i * s3) / (2 * s3),
      2 / s5, 1 / s3, 1 / s3;
  return P;
}

inline RealMatrix ellipsoidWeight() {
  RealMatrix W = RealMatrix::Zero(3, 3);
  W.diagonal() << 2.0, 0.5, 1.0;
  return W;
}

// System builders --------------------------------------------------------------

/// Two copies of the scaled rotation, all switches apply the plane rotation.
inline SwitchedSystemSpec destabiss() {
  SwitchedSystemSpec spec;
  spec.subsystems = {dwellkit::makeSubsystem(1, a1()), dwellkit::makeSubsystem(2, a1())};
  spec.graph = ModeGraph::complete({1, 2});
  ResetCollection resets;
  resets.resets[{1, 2}] = rotationReset();
  resets.resets[{2, 1}] = rotationReset();
  spec.jumps = resets;
  return spec;
}

/// Bistable planar pair with asymmetric resets.
inline SwitchedSystemSpec bpls() {
  SwitchedSystemSpec spec;
  spec.subsystems = {dwellkit::makeSubsystem(2, a1()), dwellkit::makeSubsystem(3, a3())};
  spec.graph = ModeGraph::complete({2, 3});
  ResetCollection resets;
  resets.resets[{2, 3}] = r23();
  resets.resets[{3, 2}] = r32();
  spec.jumps = resets;
  return spec;
}

/// Three stable 3x3 modes, jumps drawn from the hull of M_1, M_2, M_3.
inline SwitchedSystemSpec arbReset3d() {
  SwitchedSystemSpec spec;
  spec.subsystems = {dwellkit::makeSubsystem(8, a8()), dwellkit::makeSubsystem(9, a9()),
                     dwellkit::makeSubsystem(10, a10())};
  spec.graph = ModeGraph::complete({8, 9, 10});
  ImpulseSet impulses;
  impulses.kind = ImpulseSet::Kind::convexHull;
  impulses.matrices = {m1(), m2(), m3()};
  spec.jumps = impulses;
  return spec;
}

/// Stable A_4 against unstable A_5 with resets both ways.
inline SwitchedSystemSpec mixed() {
  SwitchedSystemSpec spec;
  spec.subsystems = {dwellkit::makeSubsystem(4, a4()), dwellkit::makeSubsystem(5, a5())};
  spec.graph = ModeGraph::complete({4, 5});
  ResetCollection resets;
  resets.resets[{4, 5}] = r45();
  resets.resets[{5, 4}] = r54();
  spec.jumps = resets;
  return spec;
}

/// Two stable 3x3 modes with a permutation / involution reset pair.
inline SwitchedSystemSpec scope() {
  SwitchedSystemSpec spec;
  spec.subsystems = {dwellkit::makeSubsystem(6, a6()), dwellkit::makeSubsystem(7, a7())};
  spec.graph = ModeGraph::complete({6, 7});
  ResetCollection resets;
  resets.resets[{6, 7}] = r67();
  resets.resets[{7, 6}] = r76();
  spec.jumps = resets;
  return spec;
}

}  // namespace refsys
