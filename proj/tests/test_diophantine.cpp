#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>
#include <numbers>

#include "support/test_helpers.hpp"
#include "torus_kam/diophantine.hpp"

using namespace torus_kam;
using tk_test::random_deck;
using tk_test::random_lattice;

namespace {

// brute-force divisor value in extended precision
double divisor_oracle(const LinearDeck& deck, const std::vector<int>& P,
                      const std::vector<int>& Q, DivisorTarget t) {
  long double best = -1.0L;
  for (int l = 0; l < deck.n; ++l) {
    std::complex<long double> prod(1.0L, 0.0L);
    for (int k = 0; k < deck.n; ++k) {
      const std::complex<long double> base(deck.lam(l, k).real(),
                                           deck.lam(l, k).imag());
      for (int e = 0; e < std::abs(P[std::size_t(k)]); ++e)
        prod = P[std::size_t(k)] > 0 ? prod * base : prod / base;
    }
    for (int j = 0; j < deck.d; ++j) {
      const std::complex<long double> base(deck.mu(l, j).real(),
                                           deck.mu(l, j).imag());
      for (int e = 0; e < Q[std::size_t(j)]; ++e) prod *= base;
    }
    const Complex tv =
        t.horizontal ? deck.lam(l, t.index) : deck.mu(l, t.index);
    best = std::max(best,
                    std::abs(prod - std::complex<long double>(tv.real(),
                                                              tv.imag())));
  }
  return double(best);
}

LinearDeck golden_deck() {
  const double golden = (std::sqrt(5.0) - 1.0) / 2.0;
  Eigen::MatrixXcd ep(1, 1);
  ep(0, 0) = Complex(golden, 0.08);
  Eigen::MatrixXcd mu(1, 1);
  mu(0, 0) = std::exp(Complex(0.0, 2.0 * std::numbers::pi * golden * golden)) *
             std::exp(-0.11);
  return LinearDeck::from_lattice(Lattice(1, ep), mu);
}

} // namespace

TEST_CASE("small divisor: exact resonance by construction") {
  // d = 2 with mu(l,1) = mu(l,0)^2: Q = (2,0) resonates with target j = 1
  Rng rng(61);
  const auto lat = random_lattice(rng, 2);
  Eigen::MatrixXcd mu(2, 2);
  for (int l = 0; l < 2; ++l) {
    mu(l, 0) = std::exp(Complex(rng.uniform(-0.4, 0.4), rng.uniform(0, 6.2)));
    mu(l, 1) = mu(l, 0) * mu(l, 0);
  }
  const auto deck = LinearDeck::from_lattice(lat, mu);
  const auto rec = small_divisor(deck, std::vector<int>{0, 0},
                                 std::vector<int>{2, 0}, {false, 1});
  CHECK(rec.value <= 1e-13);
}

TEST_CASE("small divisor: scalar arithmetic case") {
  Eigen::MatrixXcd ep(1, 1);
  ep(0, 0) = Complex(0.0, 1.0); // lam = e^{2 pi i * i} = e^{-2 pi}
  Eigen::MatrixXcd mu(1, 1);
  mu(0, 0) = Complex(0.5, 0.0);
  const auto deck = LinearDeck::from_lattice(Lattice(1, ep), mu);
  const auto rec = small_divisor(deck, std::vector<int>{1},
                                 std::vector<int>{2}, {true, 0});
  const double lam_abs = std::exp(-2.0 * std::numbers::pi);
  CHECK(rec.value == doctest::Approx(0.75 * lam_abs).epsilon(1e-12));
  CHECK(rec.argmax == 0);
}

TEST_CASE("small divisor agrees with the extended-precision oracle") {
  Rng rng(62);
  for (int trial = 0; trial < 30; ++trial) {
    const int n = rng.uniform_int(1, 3), d = rng.uniform_int(1, 2);
    const auto deck = random_deck(rng, n, d);
    std::vector<int> P(static_cast<std::size_t>(n)),
        Q(static_cast<std::size_t>(d));
    for (auto& p : P) p = rng.uniform_int(-6, 6);
    for (auto& q : Q) q = rng.uniform_int(0, 5);
    const DivisorTarget t{rng.uniform() < 0.5,
                          rng.uniform_int(0, (rng.uniform() < 0.5 ? n : d) - 1)};
    const DivisorTarget tt{t.horizontal,
                           t.horizontal ? t.index % n : t.index % d};
    const auto rec = small_divisor(deck, P, Q, tt);
    const double want = divisor_oracle(deck, P, Q, tt);
    CHECK(rec.value == doctest::Approx(want).epsilon(1e-12));
  }
}

TEST_CASE("nonresonance scan: generic deck passes, planted witness found") {
  Rng rng(63);
  const auto deck = random_deck(rng, 1, 1);
  CHECK(nonresonance_scan(deck, 12).ok);

  // plant mu = 1/lam: lam * mu^2 - mu = 0 at P=(1), Q=(2).  Moderate
  // moduli keep the exact zero below the absolute resonance tolerance.
  const auto lat = tk_test::random_lattice_small_im(rng, 1);
  const auto base = LinearDeck::from_lattice(lat, deck.mu);
  Eigen::MatrixXcd mu(1, 1);
  mu(0, 0) = Complex(1.0, 0.0) / base.lam(0, 0);
  const LinearDeck planted(base.lam, mu);
  const auto scan = nonresonance_scan(planted, 8);
  CHECK_FALSE(scan.ok);
  bool found = false;
  for (const auto& w : scan.witnesses)
    if (w.P == std::vector<int>{1} && w.Q == std::vector<int>{2} &&
        !w.target.horizontal)
      found = true;
  CHECK(found);
}

TEST_CASE("nonresonance scan: no normal directions is vacuously fine") {
  Rng rng(64);
  const auto lat = random_lattice(rng, 2);
  const auto deck = LinearDeck::from_lattice(lat, Eigen::MatrixXcd(2, 0));
  CHECK(nonresonance_scan(deck, 8).ok);
  CHECK(splitting_divisor_check(deck, 8));
}

TEST_CASE("diophantine fit: invariant against a direct oracle at small N") {
  const auto deck = golden_deck();
  const double tau = 2.5;
  const auto fit = diophantine_fit(deck, 4, tau);
  double want = 1e300;
  for_each_divisor(deck, 4, 2, 4, [&](const DivisorRecord& rec) {
    int order = 0;
    for (int p : rec.P) order += std::abs(p);
    for (int q : rec.Q) order += q;
    want = std::min(want, rec.value * std::pow(double(order), tau));
  });
  CHECK(fit.D_fit == doctest::Approx(want));
  CHECK(fit.N_scan == 4);
}

TEST_CASE("diophantine fit: stabilizes on golden-ratio data") {
  const auto deck = golden_deck();
  const auto f20 = diophantine_fit(deck, 20, 2.5);
  const auto f40 = diophantine_fit(deck, 40, 2.5);
  CHECK(f40.D_fit <= f20.D_fit * (1.0 + 1e-12)); // monotone in N
  CHECK(std::abs(f40.D_fit - f20.D_fit) <= 0.10 * f20.D_fit);
}

TEST_CASE("diophantine fit: tau = 0 collapses on planted near-resonances") {
  // mu on the unit circle with angle beta = 1/3 + 2.5e-4: mu^4 - mu is tiny
  Eigen::MatrixXcd ep(1, 1);
  ep(0, 0) = Complex(0.37, 1.05);
  const double beta = 1.0 / 3.0 + 2.5e-4;
  Eigen::MatrixXcd mu(1, 1);
  mu(0, 0) = std::exp(Complex(0.0, 2.0 * std::numbers::pi * beta));
  const auto deck = LinearDeck::from_lattice(Lattice(1, ep), mu);
  const auto shallow = diophantine_fit(deck, 3, 0.0);
  const auto deep = diophantine_fit(deck, 5, 0.0);
  CHECK(deep.D_fit < 1e-2 * shallow.D_fit);
  // the tangential family meets the planted angle first: lam mu^3 vs lam
  CHECK(deep.worst.Q == std::vector<int>{3});
  CHECK(deep.worst.P == std::vector<int>{1});
  CHECK(deep.worst.target.horizontal);
}

TEST_CASE("fit rejects resonant input") {
  Rng rng(65);
  const auto deck = random_deck(rng, 1, 1);
  Eigen::MatrixXcd mu(1, 1);
  mu(0, 0) = Complex(1.0, 0.0) / deck.lam(0, 0);
  const LinearDeck planted(deck.lam, mu);
  CHECK_THROWS_AS(diophantine_fit(planted, 8, 3.0), ResonantInput);
}

TEST_CASE("change of generators: identity, shear, planted transfer") {
  Rng rng(66);
  const auto deck = random_deck(rng, 2, 2);

  Eigen::MatrixXi id = Eigen::MatrixXi::Identity(2, 2);
  const auto same = change_generators(deck, id);
  CHECK((same.lam - deck.lam).cwiseAbs().maxCoeff() <= 1e-14);
  CHECK((same.mu - deck.mu).cwiseAbs().maxCoeff() <= 1e-14);

  Eigen::MatrixXi shear(2, 2);
  shear << 1, 1, 0, 1;
  const auto sheared = change_generators(deck, shear);
  for (int i = 0; i < 2; ++i) {
    CHECK(std::abs(sheared.lam(0, i) - deck.lam(0, i) * deck.lam(1, i)) <=
          1e-12 * std::abs(sheared.lam(0, i)));
    CHECK(std::abs(sheared.lam(1, i) - deck.lam(1, i)) <= 1e-14);
  }
  for (int j = 0; j < 2; ++j)
    CHECK(std::abs(sheared.mu(0, j) - deck.mu(0, j) * deck.mu(1, j)) <=
          1e-12 * std::abs(sheared.mu(0, j)));

  Eigen::MatrixXi bad(2, 2);
  bad << 2, 0, 0, 1;
  CHECK_THROWS_AS(change_generators(deck, bad), NotUnimodular);

  // planted resonance transfers: value stays ~0 at the same (P,Q).
  // a small-imaginary-part lattice keeps the transformed multipliers of
  // moderate modulus, so the absolute 1e-10 comparison is meaningful
  const auto lat_small = tk_test::random_lattice_small_im(rng, 2);
  const auto base = LinearDeck::from_lattice(lat_small, deck.mu);
  Eigen::MatrixXcd mu = deck.mu;
  for (int l = 0; l < 2; ++l) mu(l, 0) = Complex(1.0, 0.0) / base.lam(l, 0);
  const LinearDeck planted(base.lam, mu); // lam^(1,0) mu^(2,0) = mu, all l
  const std::vector<int> P{1, 0}, Q{2, 0};
  CHECK(small_divisor(planted, P, Q, {false, 0}).value <= 1e-12);
  for (int rep = 0; rep < 20; ++rep) {
    Eigen::MatrixXi A = Eigen::MatrixXi::Identity(2, 2);
    // random word of elementary shears keeps |det| = 1 with small entries
    for (int s = 0; s < 4; ++s) {
      Eigen::MatrixXi E = Eigen::MatrixXi::Identity(2, 2);
      const int off = rng.uniform_int(0, 1);
      E(off, 1 - off) = rng.uniform_int(-1, 1);
      A = A * E;
    }
    const auto moved = change_generators(planted, A);
    CHECK(small_divisor(moved, P, Q, {false, 0}).value <= 1e-10);
    CHECK_FALSE(nonresonance_scan(moved, 5).ok);
  }
}

TEST_CASE("splitting divisor check: generic passes, tangential plant fails") {
  Rng rng(67);
  const auto deck = random_deck(rng, 2, 2);
  CHECK(splitting_divisor_check(deck, 10));

  Eigen::MatrixXcd mu = deck.mu;
  for (int l = 0; l < 2; ++l) mu(l, 0) = deck.lam(l, 0);
  const LinearDeck planted(deck.lam, mu); // mu_{.,0} = lam_{.,0}
  CHECK_FALSE(splitting_divisor_check(planted, 10));

  // modulus separation: |mu| far from every scanned |lam^P|
  Eigen::MatrixXcd ep(1, 1);
  ep(0, 0) = Complex(0.2, 1.0);
  Eigen::MatrixXcd mu1(1, 1);
  mu1(0, 0) = Complex(0.0, 2.7); // |mu| = 2.7 vs |lam|^p = e^{-2 pi p}
  const auto sep = LinearDeck::from_lattice(Lattice(1, ep), mu1);
  CHECK(splitting_divisor_check(sep, 10));
}

TEST_CASE("divisor value is invariant under permuting the generator rows") {
  Rng rng(68);
  const auto deck = random_deck(rng, 3, 2);
  Eigen::MatrixXcd lam2 = deck.lam, mu2 = deck.mu;
  lam2.row(0).swap(lam2.row(2));
  mu2.row(0).swap(mu2.row(2));
  const LinearDeck permuted(lam2, mu2);
  std::vector<int> P{2, -1, 0}, Q{1, 2};
  const auto a = small_divisor(deck, P, Q, {false, 1});
  const auto b = small_divisor(permuted, P, Q, {false, 1});
  CHECK(a.value == doctest::Approx(b.value).epsilon(1e-12));
}

TEST_CASE("enhanced lower bound holds over the scanned range") {
  Rng rng(69);
  for (int trial = 0; trial < 10; ++trial) {
    const auto deck = random_deck(rng, 2, 2);
    const auto scan = nonresonance_scan(deck, 8);
    if (!scan.ok) continue;
    const auto fit = diophantine_fit(deck, 8, 3.0);
    CHECK(enhanced_bound_check(deck, fit, 8));
  }
}

TEST_CASE("D_fit is monotone nonincreasing in N") {
  Rng rng(70);
  for (int trial = 0; trial < 10; ++trial) {
    const auto deck = random_deck(rng, 2, 1);
    const auto scan = nonresonance_scan(deck, 12);
    if (!scan.ok) continue;
    double prev = 1e300;
    for (int N : {4, 6, 8, 12}) {
      const auto fit = diophantine_fit(deck, N, 3.0);
      CHECK(fit.D_fit <= prev * (1.0 + 1e-12));
      prev = fit.D_fit;
    }
  }
}
