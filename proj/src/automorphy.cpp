#include "torus_kam/automorphy.hpp"

#include <cmath>

namespace torus_kam {

void ConstantFactor::validate() const {
  lat.validate();
  if (int(rho.size()) != 2 * lat.n)
    throw InvalidParams("constant factor needs 2n generator matrices");
  for (const auto& M : rho)
    if (M.rows() != d || M.cols() != d)
      throw InvalidParams("constant factor rank mismatch");
  for (std::size_t i = 0; i < rho.size(); ++i)
    for (std::size_t j = i + 1; j < rho.size(); ++j) {
      const double defect = mat_norm(rho[i] * rho[j] - rho[j] * rho[i]);
      if (defect > 1e-10 * std::max(mat_norm(rho[i]) * mat_norm(rho[j]), 1.0))
        throw NotCommuting("factor generators do not commute");
    }
}

Eigen::MatrixXcd rho_of(const ConstantFactor& factor,
                        std::span<const int> coeffs) {
  if (int(coeffs.size()) != 2 * factor.lat.n)
    throw InvalidParams("rho_of: coefficient vector must have 2n entries");
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Identity(factor.d, factor.d);
  for (std::size_t g = 0; g < coeffs.size(); ++g) {
    int m = coeffs[g];
    if (m == 0) continue;
    Eigen::MatrixXcd base = factor.rho[g];
    if (m < 0) {
      base = base.partialPivLu().inverse().eval();
      m = -m;
    }
    // binary exponentiation
    while (m > 0) {
      if (m & 1) out = (out * base).eval();
      base = (base * base).eval();
      m >>= 1;
    }
  }
  return out;
}

Trivialization trivialize_over_cylinder(const ConstantFactor& factor) {
  factor.validate();
  const int n = factor.lat.n;
  std::vector<Eigen::MatrixXcd> A;
  A.reserve(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j)
    A.push_back(factor.rho[std::size_t(j)].partialPivLu().inverse());
  const auto logs = commuting_logs(CommutingFamily(A));

  Trivialization out;
  out.logs = logs;
  out.factor.lat = factor.lat;
  out.factor.d = factor.d;
  out.factor.rho.resize(std::size_t(2 * n));
  // new factor: rho~(lambda) = v(lambda) rho(lambda), with v(e_j) = rho(e_j)^-1
  std::vector<Complex> z(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j) {
    std::fill(z.begin(), z.end(), Complex(0.0, 0.0));
    z[std::size_t(j)] = Complex(1.0, 0.0);
    out.factor.rho[std::size_t(j)] =
        flow_map(logs, z) * factor.rho[std::size_t(j)];
  }
  for (int j = 0; j < n; ++j) {
    for (int k = 0; k < n; ++k) z[std::size_t(k)] = factor.lat.e_prime(j, k);
    out.factor.rho[std::size_t(n + j)] =
        flow_map(logs, z) * factor.rho[std::size_t(n + j)];
  }
  return out;
}

Eigen::MatrixXcd trivialization_flow(const Trivialization& triv,
                                     std::span<const Complex> z) {
  return flow_map(triv.logs, z);
}

HermitianFrame hermitian_diagonal_frame(
    const std::vector<Eigen::MatrixXcd>& gens) {
  if (gens.empty()) throw InvalidParams("no generators");
  const int d = int(gens.front().rows());
  for (const auto& H : gens) {
    if (H.rows() != d || H.cols() != d)
      throw InvalidParams("generator dimension mismatch");
    if (mat_norm(Eigen::MatrixXcd(H - H.adjoint())) >
        1e-10 * std::max(1.0, mat_norm(H)))
      throw InvalidParams("generator is not Hermitian");
  }
  CommutingFamily fam(gens);
  fam.validate();

  // joint eigenspace refinement; all restrictions stay Hermitian, so each
  // split is an orthonormal eigendecomposition
  std::vector<Eigen::MatrixXcd> spaces{Eigen::MatrixXcd::Identity(d, d)};
  for (const auto& H : gens) {
    std::vector<Eigen::MatrixXcd> next;
    for (const auto& V : spaces) {
      const Eigen::MatrixXcd B = V.adjoint() * H * V;
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(B);
      if (es.info() != Eigen::Success)
        throw NumericalBreakdown("Hermitian eigendecomposition failed");
      const auto& ev = es.eigenvalues();
      const double tol = 1e-10 * std::max(1.0, mat_norm(B));
      int start = 0;
      for (int i = 1; i <= int(ev.size()); ++i) {
        if (i == int(ev.size()) || std::abs(ev(i) - ev(start)) > tol) {
          next.push_back(V * es.eigenvectors().middleCols(start, i - start));
          start = i;
        }
      }
    }
    spaces = std::move(next);
  }

  HermitianFrame out;
  out.U.resize(d, d);
  int off = 0;
  for (const auto& V : spaces) {
    out.U.middleCols(off, int(V.cols())) = V;
    off += int(V.cols());
  }
  out.mu.resize(int(gens.size()), d);
  for (std::size_t j = 0; j < gens.size(); ++j)
    for (int c = 0; c < d; ++c) {
      const Complex v = out.U.col(c).adjoint() * gens[j] * out.U.col(c);
      out.mu(int(j), c) = v.real();
    }
  return out;
}

} // namespace torus_kam
