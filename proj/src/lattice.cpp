#include "torus_kam/lattice.hpp"

#include <cmath>
#include <numbers>

namespace torus_kam {

void Lattice::validate() const {
  if (n <= 0 || e_prime.rows() != n || e_prime.cols() != n)
    throw InvalidParams("lattice dimension mismatch");
  const double det = std::abs(im().determinant());
  if (!(det > 1e-12))
    throw SingularLattice("Im e_prime is singular (|det| <= 1e-12)");
}

std::vector<Eigen::VectorXd> parallelotope_vertices(const Lattice& lat,
                                                    double eps) {
  const int n = lat.n;
  const Eigen::MatrixXd W = lat.im();
  std::vector<Eigen::VectorXd> verts;
  verts.reserve(std::size_t(1) << n);
  for (unsigned mask = 0; mask < (1u << n); ++mask) {
    Eigen::VectorXd v = Eigen::VectorXd::Zero(n);
    for (int i = 0; i < n; ++i) {
      const double t = (mask & (1u << i)) ? 1.0 + eps : -eps;
      v += t * W.row(i).transpose();
    }
    verts.push_back(std::move(v));
  }
  return verts;
}

double sup_h_pow_window(const Lattice& lat, std::span<const double> lo,
                        std::span<const double> hi, std::span<const int> P) {
  // <R,P> with R = sum t_i w_i is separable in t, so the minimum over the
  // window splits per coordinate.  This equals the vertex maximum of
  // exp(-2*pi*<R,P>).
  const Eigen::MatrixXd W = lat.im();
  double expo = 0.0; // minimal <R,P>
  for (int i = 0; i < lat.n; ++i) {
    double c = 0.0;
    for (int k = 0; k < lat.n; ++k) c += W(i, k) * double(P[std::size_t(k)]);
    expo += std::min(lo[std::size_t(i)] * c, hi[std::size_t(i)] * c);
  }
  return std::exp(-2.0 * std::numbers::pi * expo);
}

double sup_h_pow(const Lattice& lat, double eps, std::span<const int> P) {
  const std::vector<double> lo(std::size_t(lat.n), -eps);
  const std::vector<double> hi(std::size_t(lat.n), 1.0 + eps);
  return sup_h_pow_window(lat, lo, hi, P);
}

double kappa0(const Lattice& lat) {
  lat.validate();
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(lat.im());
  const double sigma_min = svd.singularValues().tail(1)(0);
  return sigma_min / std::sqrt(double(lat.n));
}

double kappa(const Lattice& lat) {
  return 2.0 * std::numbers::pi * kappa0(lat);
}

} // namespace torus_kam
