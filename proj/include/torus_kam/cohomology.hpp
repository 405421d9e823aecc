#pragma once

#include <optional>
#include <vector>

#include "torus_kam/diophantine.hpp"
#include "torus_kam/series.hpp"
#include "torus_kam/system.hpp"

namespace torus_kam {

/// Linearized conjugacy operator of generator i applied to a map-valued
/// series: phi o tau_hat_i - D tau_hat_i . phi, computed coefficientwise
/// through the divisor multipliers.
Series apply_L(const LinearDeck& deck, int i, const Series& phi);

/// Certified norm bound, on the system's reference domain, of the jet of
/// tau_i o tau_j - tau_j o tau_i through vertical order jet_order.  Vanishes
/// (up to roundoff) for genuinely commuting systems.
double commutation_defect(const DeckSystem& sys, int i, int j, int jet_order);

/// Cross-generator compatibility of a right-hand side F: for every key and
/// every pair (m, target), div_argmax * F_m = div_m * F_argmax within
/// rel_tol.  Holds identically when F_i = apply_L(i, G) for a common G.
bool compatibility_check(const LinearDeck& deck, const std::vector<Series>& F,
                         int q_lo, int q_hi, double rel_tol = 1e-9);

struct CohomSolveReport {
  int q_lo = 0, q_hi = 0;
  double max_divisor_used = 0.0; // smallest divisor divided by (worst case)
  int near_resonant_count = 0;   // divisors below the warning threshold
  bool coeff_bound_ok = true;    // |G| <= max|F| (|P|+|Q|)^tau / D_fit
  double norm_G = 0.0;
  double norm_G_composed = 0.0;
};

struct CohomSolution {
  Series G;
  CohomSolveReport report;
};

/// Domain used only for the report's certified norms.
struct CohomNormSpec {
  Lattice lat;
  DomainSpec dom;
};

/// Solves L_i(G) = F_i coefficientwise over 2 <= q_lo <= |Q| <= q_hi by
/// dividing through the argmax divisor per key and target.  Throws
/// ResonantDivisor when a needed divisor is zero within tolerance and
/// IncompatibleRHS when the solved G fails to reproduce F.
CohomSolution solve(const LinearDeck& deck, const std::vector<Series>& F,
                    int q_lo, int q_hi, const DiophantineFit& fit,
                    const std::optional<CohomNormSpec>& norms = std::nullopt);

} // namespace torus_kam
