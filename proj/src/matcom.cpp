#include "torus_kam/matcom.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <numbers>

namespace torus_kam {

double mat_norm(const Eigen::MatrixXcd& A) {
  return A.size() == 0 ? 0.0 : A.cwiseAbs().maxCoeff();
}

CommutingFamily::CommutingFamily(std::vector<Eigen::MatrixXcd> ms)
    : mats(std::move(ms)) {
  if (mats.empty()) throw InvalidParams("empty matrix family");
  dim = int(mats.front().rows());
  for (const auto& A : mats)
    if (A.rows() != dim || A.cols() != dim)
      throw InvalidParams("family matrices must share one square dimension");
}

void CommutingFamily::validate() const {
  for (std::size_t i = 0; i < mats.size(); ++i)
    for (std::size_t j = i + 1; j < mats.size(); ++j) {
      const double defect = mat_norm(mats[i] * mats[j] - mats[j] * mats[i]);
      const double scale = std::max(mat_norm(mats[i]) * mat_norm(mats[j]), 1.0);
      if (defect > 1e-10 * scale)
        throw NotCommuting("matrix pair " + std::to_string(i) + "," +
                           std::to_string(j) + " does not commute");
    }
}

namespace {

// Eigenvalue clusters in first-appearance order at the given merge radius.
// Defective eigenvalues computed in floating point spread like eps^(1/k),
// far beyond the nominal 1e-8 grouping rule, so the caller walks a ladder
// of radii and keeps the finest one whose split validates.
std::vector<std::vector<int>> cluster_eigenvalues(const Eigen::VectorXcd& ev,
                                                  double scale,
                                                  double tol_base) {
  const double tol = tol_base * (1.0 + scale);
  std::vector<std::vector<int>> clusters;
  std::vector<Complex> centers;
  for (int i = 0; i < int(ev.size()); ++i) {
    bool placed = false;
    for (std::size_t c = 0; c < clusters.size(); ++c) {
      if (std::abs(ev(i) - centers[c]) <= tol) {
        clusters[c].push_back(i);
        // running mean keeps the center on the true eigenvalue
        Complex sum(0.0, 0.0);
        for (int idx : clusters[c]) sum += ev(idx);
        centers[c] = sum / double(clusters[c].size());
        placed = true;
        break;
      }
    }
    if (!placed) {
      clusters.push_back({i});
      centers.push_back(ev(i));
    }
  }
  return clusters;
}

Complex cluster_mean(const Eigen::VectorXcd& ev, const std::vector<int>& idx) {
  Complex s(0.0, 0.0);
  for (int i : idx) s += ev(i);
  return s / double(idx.size());
}

// Orthonormal basis of ker (B - lambda I)^power, dimension fixed a priori.
Eigen::MatrixXcd generalized_kernel(const Eigen::MatrixXcd& B, Complex lambda,
                                    int power, int dim_wanted) {
  const int k = int(B.rows());
  Eigen::MatrixXcd M = Eigen::MatrixXcd::Identity(k, k);
  Eigen::MatrixXcd shifted = B - lambda * Eigen::MatrixXcd::Identity(k, k);
  for (int t = 0; t < power; ++t) M = shifted * M;
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(M, Eigen::ComputeFullV);
  return svd.matrixV().rightCols(dim_wanted);
}

// Orthonormal basis of the plain eigenspace ker (B - lambda I), rank decided
// by a singular-value gap.
Eigen::MatrixXcd eigen_kernel(const Eigen::MatrixXcd& B, Complex lambda) {
  const int k = int(B.rows());
  Eigen::MatrixXcd M = B - lambda * Eigen::MatrixXcd::Identity(k, k);
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(M, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  const double cut = 1e-7 * std::max(1.0, sv.size() ? sv(0) : 0.0);
  int null_dim = 0;
  for (int i = 0; i < sv.size(); ++i)
    if (sv(i) <= cut) ++null_dim;
  if (null_dim == 0)
    throw NumericalBreakdown("expected eigenspace not found within tolerance");
  return svd.matrixV().rightCols(null_dim);
}

// Common unit eigenvector of a family that has a single joint eigenvalue
// per matrix on the current space.
Eigen::VectorXcd common_eigenvector(const std::vector<Eigen::MatrixXcd>& mats) {
  const int k = int(mats.front().rows());
  Eigen::MatrixXcd E = Eigen::MatrixXcd::Identity(k, k);
  for (const auto& A : mats) {
    if (E.cols() == 1) break;
    const Eigen::MatrixXcd R = E.adjoint() * A * E;
    const Complex lambda = R.trace() / double(R.rows());
    E = E * eigen_kernel(R, lambda);
  }
  return E.col(0);
}

// Unitary triangularization of a commuting single-joint-eigenvalue family by
// common-eigenvector deflation.
Eigen::MatrixXcd deflate_block(std::vector<Eigen::MatrixXcd> mats) {
  const int k = int(mats.front().rows());
  Eigen::MatrixXcd U = Eigen::MatrixXcd::Identity(k, k);
  for (int off = 0; off + 1 < k; ++off) {
    const int kk = k - off;
    std::vector<Eigen::MatrixXcd> sub;
    sub.reserve(mats.size());
    for (const auto& A : mats) sub.push_back(A.bottomRightCorner(kk, kk));
    const Eigen::VectorXcd x = common_eigenvector(sub);
    Eigen::MatrixXcd X(kk, 1);
    X.col(0) = x;
    Eigen::HouseholderQR<Eigen::MatrixXcd> qr(X);
    Eigen::MatrixXcd Q = qr.householderQ();
    for (auto& A : mats) {
      A.bottomRightCorner(kk, kk) =
          (Q.adjoint() * A.bottomRightCorner(kk, kk) * Q).eval();
      A.block(off + 1, off, kk - 1, 1).setZero();
    }
    U.rightCols(kk) = (U.rightCols(kk) * Q).eval();
  }
  return U;
}

// One splitting/deflation attempt at a given cluster widening; throws
// NumericalBreakdown when the result fails to reproduce the family.
TriangularizedFamily triangularize_attempt(const CommutingFamily& fam,
                                           double tol_base) {
  const int d = fam.dim;
  const int m = int(fam.mats.size());

  // joint generalized-eigenspace refinement
  std::vector<Eigen::MatrixXcd> spaces{Eigen::MatrixXcd::Identity(d, d)};
  for (const auto& A : fam.mats) {
    std::vector<Eigen::MatrixXcd> next;
    for (const auto& V : spaces) {
      const Eigen::MatrixXcd B = V.adjoint() * A * V;
      Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(B, false);
      if (es.info() != Eigen::Success)
        throw NumericalBreakdown("eigenvalue iteration failed");
      const auto clusters =
          cluster_eigenvalues(es.eigenvalues(), mat_norm(B), tol_base);
      if (clusters.size() == 1) {
        next.push_back(V);
        continue;
      }
      for (const auto& cl : clusters) {
        const Complex lambda = cluster_mean(es.eigenvalues(), cl);
        const Eigen::MatrixXcd K =
            generalized_kernel(B, lambda, int(cl.size()), int(cl.size()));
        next.push_back(V * K);
      }
    }
    spaces = std::move(next);
  }
  int total = 0;
  for (const auto& V : spaces) total += int(V.cols());
  if (total != d)
    throw NumericalBreakdown("joint eigenspace splitting lost dimensions");

  TriangularizedFamily out;
  out.S.resize(d, d);
  int off = 0;
  for (const auto& V : spaces) {
    const int k = int(V.cols());
    std::vector<Eigen::MatrixXcd> restricted;
    restricted.reserve(fam.mats.size());
    for (const auto& A : fam.mats)
      restricted.push_back(V.adjoint() * A * V);
    const Eigen::MatrixXcd U = deflate_block(restricted);
    out.S.middleCols(off, k) = V * U;
    out.blocks.push_back({off, k});
    off += k;
  }

  Eigen::PartialPivLU<Eigen::MatrixXcd> lu(out.S);
  out.S_inv = lu.inverse();
  out.eigenvalues.resize(m, int(out.blocks.size()));
  for (int j = 0; j < m; ++j) {
    Eigen::MatrixXcd T = out.S_inv * fam.mats[std::size_t(j)] * out.S;
    // exact block-triangular storage: zero the strict lower part and
    // everything outside the diagonal blocks
    for (int c = 0; c < d; ++c)
      for (int r = c + 1; r < d; ++r) T(r, c) = Complex(0.0, 0.0);
    for (int r = 0; r < d; ++r)
      for (int c = r + 1; c < d; ++c) {
        bool same_block = false;
        for (const auto& blk : out.blocks)
          if (r >= blk.offset && r < blk.offset + blk.size && c >= blk.offset &&
              c < blk.offset + blk.size)
            same_block = true;
        if (!same_block) T(r, c) = Complex(0.0, 0.0);
      }
    for (std::size_t b = 0; b < out.blocks.size(); ++b) {
      const auto& blk = out.blocks[b];
      Complex mean(0.0, 0.0);
      for (int t = 0; t < blk.size; ++t) mean += T(blk.offset + t, blk.offset + t);
      mean /= double(blk.size);
      out.eigenvalues(j, int(b)) = mean;
      for (int t = 0; t < blk.size; ++t) {
        const Complex dv = T(blk.offset + t, blk.offset + t);
        if (std::abs(dv - mean) > 1e-8 * (1.0 + std::abs(mean)))
          throw NumericalBreakdown(
              "triangular block departs from a single eigenvalue");
      }
    }
    out.tri.push_back(std::move(T));
  }
  for (int j = 0; j < m; ++j) {
    const double scale = std::max(1.0, mat_norm(fam.mats[std::size_t(j)]));
    const Eigen::MatrixXcd back = out.S * out.tri[std::size_t(j)] * out.S_inv;
    if (mat_norm(Eigen::MatrixXcd(back - fam.mats[std::size_t(j)])) >
        1e-9 * scale)
      throw NumericalBreakdown("triangular form fails to reproduce input");
  }
  return out;
}

} // namespace

TriangularizedFamily simultaneous_triangularize(const CommutingFamily& fam) {
  fam.validate();
  // finest clustering first: a genuinely close pair must stay split, while
  // a defective cluster only validates once its floating-point spread is
  // swallowed by the merge radius
  std::string last_err = "no attempt";
  for (const double tol_base : {1e-8, 3e-7, 1e-5, 3e-4, 3e-3, 2e-2}) {
    try {
      return triangularize_attempt(fam, tol_base);
    } catch (const NumericalBreakdown& e) {
      last_err = e.what();
    }
  }
  throw NumericalBreakdown("no common eigenvector structure found within "
                           "tolerance: " +
                           last_err);
}

Eigen::MatrixXcd log_upper_triangular(const Eigen::MatrixXcd& A) {
  const int d = int(A.rows());
  if (A.cols() != d) throw InvalidParams("log: matrix not square");
  for (int r = 0; r < d; ++r)
    for (int c = 0; c < r; ++c)
      if (A(r, c) != Complex(0.0, 0.0))
        throw InvalidParams("log: matrix not upper triangular");

  Complex lambda(0.0, 0.0);
  for (int i = 0; i < d; ++i) lambda += A(i, i);
  lambda /= double(d);
  if (std::abs(lambda) <= 1e-12)
    throw SingularMatrix("log: eigenvalue is zero within tolerance");
  for (int i = 0; i < d; ++i)
    if (std::abs(A(i, i) - lambda) > 1e-8 * (1.0 + std::abs(lambda)))
      throw NotSingleEigenvalue("log: diagonal entries disagree");

  // principal scalar branch with Im in [0, 2*pi)
  double arg = std::arg(lambda);
  if (arg < 0.0) arg += 2.0 * std::numbers::pi;
  const Complex log_lambda(std::log(std::abs(lambda)), arg);

  const Eigen::MatrixXcd a = A - lambda * Eigen::MatrixXcd::Identity(d, d);
  Eigen::MatrixXcd result =
      log_lambda * Eigen::MatrixXcd::Identity(d, d);
  Eigen::MatrixXcd power = Eigen::MatrixXcd::Identity(d, d);
  for (int k = 1; k < d; ++k) {
    power = (power * (-a / lambda)).eval();
    result -= power / double(k);
  }
  return result;
}

std::vector<Eigen::MatrixXcd> commuting_logs(const CommutingFamily& fam) {
  const auto tf = simultaneous_triangularize(fam);
  const int d = fam.dim;
  std::vector<Eigen::MatrixXcd> logs;
  logs.reserve(fam.mats.size());
  for (std::size_t j = 0; j < fam.mats.size(); ++j) {
    Eigen::MatrixXcd L = Eigen::MatrixXcd::Zero(d, d);
    for (const auto& blk : tf.blocks) {
      const Eigen::MatrixXcd B =
          tf.tri[j].block(blk.offset, blk.offset, blk.size, blk.size);
      L.block(blk.offset, blk.offset, blk.size, blk.size) =
          log_upper_triangular(B);
    }
    logs.push_back(tf.S * L * tf.S_inv);
  }
  return logs;
}

Eigen::MatrixXcd flow_map(const std::vector<Eigen::MatrixXcd>& logs,
                          std::span<const Complex> z) {
  if (logs.empty()) throw InvalidParams("flow_map: no generators");
  if (z.size() != logs.size())
    throw InvalidParams("flow_map: z dimension mismatch");
  for (std::size_t i = 0; i < logs.size(); ++i)
    for (std::size_t j = i + 1; j < logs.size(); ++j) {
      const double defect =
          mat_norm(logs[i] * logs[j] - logs[j] * logs[i]);
      if (defect > 1e-9 * std::max(mat_norm(logs[i]) * mat_norm(logs[j]), 1.0))
        throw NotCommuting("flow_map: generators do not commute");
    }
  const int d = int(logs.front().rows());
  Eigen::MatrixXcd sum = Eigen::MatrixXcd::Zero(d, d);
  for (std::size_t j = 0; j < logs.size(); ++j) sum += z[j] * logs[j];
  return sum.exp();
}

} // namespace torus_kam
