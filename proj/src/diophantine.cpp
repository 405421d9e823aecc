#include "torus_kam/diophantine.hpp"

#include <cmath>
#include <cstdint>

#include "torus_kam/errors.hpp"

namespace torus_kam {

namespace {

// all Q in N^d with |Q|_1 == total
void enum_q(int d, int total, std::vector<int>& Q, int pos,
            const std::function<void()>& fn) {
  if (pos == d - 1) {
    Q[std::size_t(pos)] = total;
    fn();
    return;
  }
  for (int q = 0; q <= total; ++q) {
    Q[std::size_t(pos)] = q;
    enum_q(d, total - q, Q, pos + 1, fn);
  }
}

// all P in Z^n with |P|_1 <= budget
void enum_p(int n, int budget, std::vector<int>& P, int pos,
            const std::function<void()>& fn) {
  if (pos == n) {
    fn();
    return;
  }
  for (int p = -budget; p <= budget; ++p) {
    P[std::size_t(pos)] = p;
    enum_p(n, budget - std::abs(p), P, pos + 1, fn);
  }
}

std::int64_t int_det(const Eigen::MatrixXi& A) {
  const int n = int(A.rows());
  if (n == 1) return A(0, 0);
  std::int64_t det = 0;
  Eigen::MatrixXi minor(n - 1, n - 1);
  for (int c = 0; c < n; ++c) {
    for (int r = 1; r < n; ++r) {
      int cc = 0;
      for (int k = 0; k < n; ++k) {
        if (k == c) continue;
        minor(r - 1, cc++) = A(r, k);
      }
    }
    const std::int64_t sign = (c % 2 == 0) ? 1 : -1;
    det += sign * std::int64_t(A(0, c)) * int_det(minor);
  }
  return det;
}

Complex int_pow(Complex base, int e) {
  if (e < 0) {
    base = Complex(1.0, 0.0) / base;
    e = -e;
  }
  Complex out(1.0, 0.0);
  while (e > 0) {
    if (e & 1) out *= base;
    base *= base;
    e >>= 1;
  }
  return out;
}

} // namespace

DivisorRecord small_divisor(const LinearDeck& deck, std::span<const int> P,
                            std::span<const int> Q, DivisorTarget target) {
  if (int(P.size()) != deck.n || int(Q.size()) != deck.d)
    throw InvalidParams("small_divisor: index dimension mismatch");
  DivisorRecord rec;
  rec.P.assign(P.begin(), P.end());
  rec.Q.assign(Q.begin(), Q.end());
  rec.target = target;
  rec.value = -1.0;
  for (int l = 0; l < deck.n; ++l) {
    const Complex t = target.horizontal ? deck.lam(l, target.index)
                                        : deck.mu(l, target.index);
    const double lg = deck.log_abs_multiplier(l, P, Q);
    double v;
    if (lg > 690.7) {
      v = 1e300; // the product dwarfs any eigenvalue
    } else if (lg < -745.0) {
      v = std::abs(t);
    } else {
      v = std::abs(deck.multiplier(l, P, Q) - t);
    }
    if (v > rec.value) {
      rec.value = v;
      rec.argmax = l;
    }
  }
  return rec;
}

void for_each_divisor(const LinearDeck& deck, int N, int q_lo, int q_hi,
                      const std::function<void(const DivisorRecord&)>& fn) {
  if (deck.d == 0 && q_lo > 0) return; // no normal directions, nothing to scan
  std::vector<int> Q(static_cast<std::size_t>(deck.d)), P(static_cast<std::size_t>(deck.n));
  for (int qt = q_lo; qt <= std::min(q_hi, N); ++qt) {
    enum_q(deck.d, qt, Q, 0, [&] {
      enum_p(deck.n, N - qt, P, 0, [&] {
        for (int i = 0; i < deck.n; ++i)
          fn(small_divisor(deck, P, Q, {true, i}));
        for (int j = 0; j < deck.d; ++j)
          fn(small_divisor(deck, P, Q, {false, j}));
      });
    });
  }
}

ScanResult nonresonance_scan(const LinearDeck& deck, int N, double tol) {
  if (N < 2) throw InvalidParams("nonresonance_scan: N must be >= 2");
  ScanResult out;
  out.ok = true;
  for_each_divisor(deck, N, 2, N, [&](const DivisorRecord& rec) {
    if (rec.value <= tol) {
      out.ok = false;
      out.witnesses.push_back(rec);
    }
  });
  return out;
}

DiophantineFit diophantine_fit(const LinearDeck& deck, int N, double tau_exp) {
  const auto scan = nonresonance_scan(deck, N);
  if (!scan.ok)
    throw ResonantInput("diophantine_fit: resonance inside the scan range");
  DiophantineFit fit;
  fit.tau_exp = tau_exp;
  fit.N_scan = N;
  fit.D_fit = 1e300;
  for_each_divisor(deck, N, 2, N, [&](const DivisorRecord& rec) {
    int order = 0;
    for (int p : rec.P) order += std::abs(p);
    for (int q : rec.Q) order += q;
    const double dk = rec.value * std::pow(double(order), tau_exp);
    if (dk < fit.D_fit) {
      fit.D_fit = dk;
      fit.worst = rec;
    }
  });
  return fit;
}

LinearDeck change_generators(const LinearDeck& deck, const Eigen::MatrixXi& A) {
  if (A.rows() != deck.n || A.cols() != deck.n)
    throw InvalidParams("change_generators: matrix must be n x n");
  const std::int64_t det = int_det(A);
  if (det != 1 && det != -1)
    throw NotUnimodular("change_generators: |det| != 1");
  Eigen::MatrixXcd lam(deck.n, deck.n), mu(deck.n, deck.d);
  for (int l = 0; l < deck.n; ++l) {
    for (int i = 0; i < deck.n; ++i) {
      Complex v(1.0, 0.0);
      for (int k = 0; k < deck.n; ++k) v *= int_pow(deck.lam(k, i), A(l, k));
      lam(l, i) = v;
    }
    for (int j = 0; j < deck.d; ++j) {
      Complex v(1.0, 0.0);
      for (int k = 0; k < deck.n; ++k) v *= int_pow(deck.mu(k, j), A(l, k));
      mu(l, j) = v;
    }
  }
  return LinearDeck(std::move(lam), std::move(mu));
}

bool splitting_divisor_check(const LinearDeck& deck, int N, double tol) {
  if (deck.d == 0) return true;
  bool ok = true;
  std::vector<int> Q(static_cast<std::size_t>(deck.d)), P(static_cast<std::size_t>(deck.n));
  enum_q(deck.d, 1, Q, 0, [&] {
    enum_p(deck.n, N - 1, P, 0, [&] {
      for (int i = 0; i < deck.n && ok; ++i)
        if (small_divisor(deck, P, Q, {true, i}).value <= tol) ok = false;
    });
  });
  return ok;
}

bool enhanced_bound_check(const LinearDeck& deck, const DiophantineFit& fit,
                          int N) {
  double B = 0.0;
  for (int k = 0; k < deck.n; ++k) {
    for (int i = 0; i < deck.n; ++i)
      B = std::max(B, std::abs(deck.lam(k, i)));
    for (int j = 0; j < deck.d; ++j) B = std::max(B, std::abs(deck.mu(k, j)));
  }
  B *= 2.0;
  const double d_prime = std::min(fit.D_fit / B, 0.5);
  bool ok = true;
  for_each_divisor(deck, N, 2, N, [&](const DivisorRecord& rec) {
    if (!ok) return;
    double max_mag = 0.0;
    for (int k = 0; k < deck.n; ++k)
      max_mag = std::max(
          max_mag, std::exp(std::min(deck.log_abs_multiplier(k, rec.P, rec.Q),
                                     690.7)));
    int order = 0;
    for (int p : rec.P) order += std::abs(p);
    for (int q : rec.Q) order += q;
    const double lower =
        d_prime * max_mag / std::pow(double(order), fit.tau_exp);
    if (rec.value < lower * (1.0 - 1e-12)) ok = false;
  });
  return ok;
}

} // namespace torus_kam
