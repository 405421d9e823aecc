#pragma once

#include <Eigen/Dense>
#include <functional>
#include <span>
#include <vector>

#include "torus_kam/deck.hpp"

namespace torus_kam {

inline constexpr double kResonanceTol = 1e-13;
inline constexpr double kNearResonanceWarn = 1e-8;

struct DivisorTarget {
  bool horizontal = true;
  int index = 0; // 0-based: tangential direction i or normal direction j
};

struct DivisorRecord {
  std::vector<int> P, Q;
  DivisorTarget target;
  double value = 0.0;
  int argmax = 0; // generator index realizing the max, smallest on ties
};

/// max over generators ell of |lam_ell^P mu_ell^Q - target eigenvalue|,
/// products taken in log space so large |P| cannot overflow.
DivisorRecord small_divisor(const LinearDeck& deck, std::span<const int> P,
                            std::span<const int> Q, DivisorTarget target);

struct ScanResult {
  bool ok = false;
  std::vector<DivisorRecord> witnesses; // resonant records when !ok
};

/// Scans all |P|_1 + |Q|_1 <= N with |Q| >= 2 over every target; a record is
/// resonant when its value is <= tol.
ScanResult nonresonance_scan(const LinearDeck& deck, int N,
                             double tol = kResonanceTol);

struct DiophantineFit {
  double tau_exp = 0.0;
  double D_fit = 0.0;
  int N_scan = 0;
  DivisorRecord worst;
};

/// Largest constant consistent with value > D / (|P|+|Q|)^tau over the
/// scanned range: D_fit = min value * (|P|+|Q|)^tau.  Monotone nonincreasing
/// in N.  Throws ResonantInput when the scan finds a resonance.
DiophantineFit diophantine_fit(const LinearDeck& deck, int N, double tau_exp);

/// Generator change by a unimodular integer matrix:
/// lam~(l,i) = prod_k lam(k,i)^A(l,k), mu~(l,j) = prod_k mu(k,j)^A(l,k).
LinearDeck change_generators(const LinearDeck& deck, const Eigen::MatrixXi& A);

/// |Q| = 1 tangential divisor scan replacing the split-bundle hypothesis;
/// true when no scanned divisor is resonant.
bool splitting_divisor_check(const LinearDeck& deck, int N,
                             double tol = kResonanceTol);

/// Checks value >= D' * max_k |lam_k^P mu_k^Q| / (|P|+|Q|)^tau with
/// D' = min(D_fit / B, 1/2), B = 2 max(|lam|, |mu|), on the scanned range.
bool enhanced_bound_check(const LinearDeck& deck, const DiophantineFit& fit,
                          int N);

/// Enumerates every (P, Q, both target kinds) with |P|_1 + |Q|_1 <= N and
/// q_lo <= |Q| <= q_hi, in deterministic order.
void for_each_divisor(const LinearDeck& deck, int N, int q_lo, int q_hi,
                      const std::function<void(const DivisorRecord&)>& fn);

} // namespace torus_kam
