#pragma once

#include <Eigen/Dense>
#include <complex>
#include <span>

#include "torus_kam/lattice.hpp"

namespace torus_kam {

using Complex = std::complex<double>;

/// Diagonal linear parts of the model deck transformations: generator j acts
/// as (h, v) -> (T_j h, M_j v) with T_j = diag(lam(j,0..n-1)) and
/// M_j = diag(mu(j,0..d-1)).
struct LinearDeck {
  int n = 0;
  int d = 0;
  Eigen::MatrixXcd lam; // n x n, row j
  Eigen::MatrixXcd mu;  // n x d, row j

  LinearDeck() = default;
  LinearDeck(Eigen::MatrixXcd lam_, Eigen::MatrixXcd mu_);

  /// lam(j,k) = exp(2*pi*i*e'_{j,k}).
  static LinearDeck from_lattice(const Lattice& lat, Eigen::MatrixXcd mu_);

  void validate() const; // nonzero multipliers

  /// lam_j^P * mu_j^Q computed through complex logs so that huge |P| cannot
  /// overflow intermediate products.  Returns magnitude clamped to 1e300.
  Complex multiplier(int j, std::span<const int> P,
                     std::span<const int> Q) const;

  /// log-magnitude of lam_j^P * mu_j^Q.
  double log_abs_multiplier(int j, std::span<const int> P,
                            std::span<const int> Q) const;
};

} // namespace torus_kam
