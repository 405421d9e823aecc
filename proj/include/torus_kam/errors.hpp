#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace torus_kam {

struct SingularLattice : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct InvalidParams : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NotCommuting : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NumericalBreakdown : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SingularMatrix : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NotSingleEigenvalue : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ZeroHCoordinate : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NotUnimodular : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ResonantInput : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct IncompatibleRHS : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct CommutationDefectTooLarge : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Composition pushed coefficients past the Laurent band; carries the total
// absolute mass that was dropped.
struct PBandOverflow : std::runtime_error {
  double dropped_mass;
  explicit PBandOverflow(double mass)
      : std::runtime_error("Laurent band overflow, dropped coefficient mass " +
                           std::to_string(mass)),
        dropped_mass(mass) {}
};

// A divisor needed by the cohomological solver is zero within tolerance.
struct ResonantDivisor : std::runtime_error {
  std::vector<int> P, Q;
  bool horizontal;  // target kind
  int target_index; // 0-based
  double value;
  ResonantDivisor(std::vector<int> P_, std::vector<int> Q_, bool horiz,
                  int tgt, double val)
      : std::runtime_error("resonant divisor"), P(std::move(P_)),
        Q(std::move(Q_)), horizontal(horiz), target_index(tgt), value(val) {}
};

struct NoConvergence : std::runtime_error {
  using std::runtime_error::runtime_error;
};

} // namespace torus_kam
