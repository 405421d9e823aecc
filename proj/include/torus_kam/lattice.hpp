#pragma once

#include <Eigen/Dense>
#include <span>
#include <vector>

#include "torus_kam/errors.hpp"

namespace torus_kam {

/// Period data of an n-dimensional complex torus: the lattice is spanned by
/// the standard unit vectors together with the rows of e_prime, whose
/// imaginary parts must be linearly independent.
struct Lattice {
  int n = 0;
  Eigen::MatrixXcd e_prime; // n x n, row j is the j-th period vector

  Lattice() = default;
  Lattice(int n_, Eigen::MatrixXcd ep) : n(n_), e_prime(std::move(ep)) {}

  Eigen::MatrixXd im() const { return e_prime.imag(); }

  /// Throws SingularLattice when |det(Im e_prime)| <= 1e-12.
  void validate() const;
};

/// Analysis domain: a Reinhardt shell of margin eps times a vertical
/// polydisc of radius r.
struct DomainSpec {
  double eps = 0.0;
  double r = 0.0;

  void validate() const {
    if (!(r > 0.0) || !(eps >= 0.0))
      throw InvalidParams("DomainSpec requires r > 0 and eps >= 0");
  }
};

/// Vertices of the parallelotope { sum_i t_i Im e'_i : t_i in {-eps, 1+eps} },
/// enumerated by bitmask (bit i set picks t_i = 1+eps).
std::vector<Eigen::VectorXd> parallelotope_vertices(const Lattice& lat,
                                                    double eps);

/// sup over the shell of |h^P| = max over parallelotope vertices R of
/// exp(-2*pi*<R,P>); exact because the exponent is linear in R.
double sup_h_pow(const Lattice& lat, double eps, std::span<const int> P);

/// Same supremum over the window { sum_i t_i Im e'_i : t_i in [lo_i, hi_i] }.
double sup_h_pow_window(const Lattice& lat, std::span<const double> lo,
                        std::span<const double> hi, std::span<const int> P);

/// Separation constant kappa = 2*pi*kappa0 with kappa0 = sigma_min(Im
/// e_prime)/sqrt(n), a certified lower bound for the vertex-separation
/// inequality driving Laurent coefficient decay.
double kappa0(const Lattice& lat);
double kappa(const Lattice& lat);

} // namespace torus_kam
