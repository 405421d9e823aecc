#include "torus_kam/deck.hpp"

#include <cmath>
#include <numbers>

namespace torus_kam {

LinearDeck::LinearDeck(Eigen::MatrixXcd lam_, Eigen::MatrixXcd mu_)
    : n(int(lam_.rows())), d(int(mu_.cols())), lam(std::move(lam_)),
      mu(std::move(mu_)) {
  if (lam.cols() != n || mu.rows() != n)
    throw InvalidParams("LinearDeck: lam must be n x n and mu n x d");
}

LinearDeck LinearDeck::from_lattice(const Lattice& lat, Eigen::MatrixXcd mu_) {
  lat.validate();
  const Complex two_pi_i(0.0, 2.0 * std::numbers::pi);
  Eigen::MatrixXcd lam_(lat.n, lat.n);
  for (int j = 0; j < lat.n; ++j)
    for (int k = 0; k < lat.n; ++k)
      lam_(j, k) = std::exp(two_pi_i * lat.e_prime(j, k));
  return LinearDeck(std::move(lam_), std::move(mu_));
}

void LinearDeck::validate() const {
  for (int j = 0; j < n; ++j) {
    for (int k = 0; k < n; ++k)
      if (lam(j, k) == Complex(0.0, 0.0))
        throw InvalidParams("LinearDeck: zero tangential multiplier");
    for (int l = 0; l < d; ++l)
      if (mu(j, l) == Complex(0.0, 0.0))
        throw InvalidParams("LinearDeck: zero normal multiplier");
  }
}

double LinearDeck::log_abs_multiplier(int j, std::span<const int> P,
                                      std::span<const int> Q) const {
  double lg = 0.0;
  for (int k = 0; k < n; ++k)
    if (P[std::size_t(k)] != 0)
      lg += double(P[std::size_t(k)]) * std::log(std::abs(lam(j, k)));
  for (int l = 0; l < d; ++l)
    if (Q[std::size_t(l)] != 0)
      lg += double(Q[std::size_t(l)]) * std::log(std::abs(mu(j, l)));
  return lg;
}

Complex LinearDeck::multiplier(int j, std::span<const int> P,
                               std::span<const int> Q) const {
  double lg = 0.0, arg = 0.0;
  for (int k = 0; k < n; ++k) {
    const int p = P[std::size_t(k)];
    if (p == 0) continue;
    lg += double(p) * std::log(std::abs(lam(j, k)));
    arg += double(p) * std::arg(lam(j, k));
  }
  for (int l = 0; l < d; ++l) {
    const int q = Q[std::size_t(l)];
    if (q == 0) continue;
    lg += double(q) * std::log(std::abs(mu(j, l)));
    arg += double(q) * std::arg(mu(j, l));
  }
  arg = std::remainder(arg, 2.0 * std::numbers::pi);
  const double mag = std::exp(std::min(lg, 690.7)); // clamp near 1e300
  return mag * Complex(std::cos(arg), std::sin(arg));
}

} // namespace torus_kam
