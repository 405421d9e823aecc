#pragma once

#include <vector>

#include "torus_kam/deck.hpp"
#include "torus_kam/series.hpp"

namespace torus_kam {

/// n perturbed commuting deck maps tau_j = tau_hat_j + pert_j, where pert_j
/// is a map-valued series (m = n + d components, v_min >= 2) and dom is the
/// reference analysis domain.
struct DeckSystem {
  Lattice lat;
  LinearDeck linear;
  std::vector<Series> pert;
  DomainSpec dom;

  void validate() const;
};

} // namespace torus_kam
