#pragma once

#include <Eigen/Dense>
#include <span>
#include <vector>

#include "torus_kam/lattice.hpp"
#include "torus_kam/matcom.hpp"

namespace torus_kam {

/// Constant factor of automorphy for a flat rank-d bundle: one invertible
/// matrix per lattice generator, rho(e_1..e_n) then rho(e'_1..e'_n).  The
/// image group is abelian, so all 2n matrices must commute.
struct ConstantFactor {
  Lattice lat;
  int d = 0;
  std::vector<Eigen::MatrixXcd> rho; // 2n matrices

  /// Commutation within 1e-10 * max(||.||*||.||, 1); throws NotCommuting.
  void validate() const;
};

/// rho evaluated on the lattice point with the given integer coordinates in
/// the generator basis; negative powers through the inverse.
Eigen::MatrixXcd rho_of(const ConstantFactor& factor,
                        std::span<const int> coeffs);

struct Trivialization {
  std::vector<Eigen::MatrixXcd> logs; // n flow generators ln rho(e_j)^-1
  ConstantFactor factor;              // equivalent factor, rho(e_j) = I
};

/// Equivalent constant factor with rho(e_j) = I for the first n generators,
/// obtained from the flow v(z) of the commuting logs of rho(e_j)^-1.
Trivialization trivialize_over_cylinder(const ConstantFactor& factor);

/// Flow v(z) of a trivialization at an arbitrary complex point.
Eigen::MatrixXcd trivialization_flow(const Trivialization& triv,
                                     std::span<const Complex> z);

struct HermitianFrame {
  Eigen::MatrixXcd U;  // unitary change of frame, columns joint eigenvectors
  Eigen::MatrixXd mu;  // (generator, direction) -> real eigenvalue
};

/// Simultaneous unitary diagonalization of commuting Hermitian generators;
/// eigenvalues are real and must be nonzero for an invertible factor.
HermitianFrame hermitian_diagonal_frame(
    const std::vector<Eigen::MatrixXcd>& gens);

} // namespace torus_kam
