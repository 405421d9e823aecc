#pragma once

#include <Eigen/Dense>
#include <complex>
#include <span>
#include <vector>

#include "torus_kam/errors.hpp"

namespace torus_kam {

using Complex = std::complex<double>;

/// Entrywise max modulus.
double mat_norm(const Eigen::MatrixXcd& A);

struct CommutingFamily {
  int dim = 0;
  std::vector<Eigen::MatrixXcd> mats;

  CommutingFamily() = default;
  CommutingFamily(std::vector<Eigen::MatrixXcd> ms);

  /// Throws NotCommuting when some pair fails
  /// ||A_i A_j - A_j A_i|| <= 1e-10 * max(||A_i|| ||A_j||, 1).
  void validate() const;
};

struct EigenBlock {
  int offset = 0;
  int size = 0;
};

/// Joint upper-triangular form: S^-1 A_j S is block diagonal with upper
/// triangular blocks, each block carrying a single eigenvalue per matrix.
struct TriangularizedFamily {
  Eigen::MatrixXcd S;
  Eigen::MatrixXcd S_inv;
  std::vector<Eigen::MatrixXcd> tri;
  std::vector<EigenBlock> blocks;
  Eigen::MatrixXcd eigenvalues; // (j, i) -> eigenvalue of matrix j on block i
};

TriangularizedFamily simultaneous_triangularize(const CommutingFamily& fam);

/// Principal logarithm of an upper-triangular matrix with a single
/// eigenvalue: ln A = (ln lambda) I - sum_{k=1}^{dim-1} (-a/lambda)^k / k,
/// a = A - lambda I, with Im ln(lambda) in [0, 2*pi).
Eigen::MatrixXcd log_upper_triangular(const Eigen::MatrixXcd& A);

/// Pairwise commuting logarithms with exp(L_j) = A_j, built blockwise
/// through the joint triangularization.
std::vector<Eigen::MatrixXcd> commuting_logs(const CommutingFamily& fam);

/// v(z) = exp(z_1 L_1 + ... + z_n L_n); entire in z, v(0) = I, v(e_j) =
/// exp(L_j), and v(z+z') = v(z) v(z') because the logs commute.
Eigen::MatrixXcd flow_map(const std::vector<Eigen::MatrixXcd>& logs,
                          std::span<const Complex> z);

} // namespace torus_kam
