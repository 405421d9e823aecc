#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "torus_kam/kam.hpp"
#include "torus_kam/system.hpp"

namespace torus_kam {

enum class InstanceMode { conjugated, planted_resonance, custom_file };

struct InstanceConfig {
  InstanceMode mode = InstanceMode::conjugated;
  std::uint64_t seed = 0;
  double pert_norm = 0.0;
  int q_max = 8;
  int p_max = 8;
  std::string file; // custom_file mode
};

struct ExperimentConfig {
  Lattice lattice;
  Eigen::MatrixXcd mu;                         // n x d normal multipliers
  std::vector<Eigen::MatrixXcd> hermitian_gens; // alternative bundle input
  InstanceConfig instance;
  int n_scan = 12;
  double tau_exp = 3.0;
  KamParams kam;
  std::string report_path;
  std::string csv_path;
};

struct Instance {
  DeckSystem sys;
  Series phi_true;              // generator transform (g part), empty if none
  std::vector<int> planted_P; // planted resonance key, if any
  std::vector<int> planted_Q;
  bool has_planted = false;
};

/// Draws a random sparse transform Phi_true = Id + g with v_min >= 2 and
/// certified norm pert_norm, and conjugates the linear deck jet-exactly.
/// Planted mode first rewires mu so one divisor vanishes exactly and makes
/// sure the conjugation places coefficient mass on that key.  Identical
/// seeds reproduce identical instances bit for bit.
Instance gen_instance(const ExperimentConfig& cfg);

} // namespace torus_kam
