#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>

#include "support/test_helpers.hpp"
#include "torus_kam/series.hpp"

using namespace torus_kam;
using tk_test::random_deck;
using tk_test::random_lattice;
using tk_test::random_series;

namespace {

Series monomial(int n, int d, int m, int q_max, int p_max,
                const std::vector<int>& Q, const std::vector<int>& P, int comp,
                Complex c) {
  Series f(n, d, m, q_max, p_max);
  f.add(Q, P, comp, c);
  return f;
}

// extended-precision oracle for eval
std::complex<long double> eval_oracle_1c(const Series& f,
                                         const std::vector<Complex>& h,
                                         const std::vector<Complex>& v,
                                         int comp) {
  std::complex<long double> acc(0.0L, 0.0L);
  for (const auto& [k, c] : f.terms()) {
    std::complex<long double> mono(1.0L, 0.0L);
    for (int l = 0; l < f.d(); ++l)
      for (int t = 0; t < k.v[std::size_t(l)]; ++t)
        mono *= std::complex<long double>(v[std::size_t(l)].real(),
                                          v[std::size_t(l)].imag());
    for (int j = 0; j < f.n(); ++j) {
      const int p = k.v[std::size_t(f.d() + j)];
      const std::complex<long double> hj(h[std::size_t(j)].real(),
                                         h[std::size_t(j)].imag());
      for (int t = 0; t < std::abs(p); ++t) mono = p > 0 ? mono * hj : mono / hj;
    }
    const Complex cc = c.a[std::size_t(comp)];
    acc += std::complex<long double>(cc.real(), cc.imag()) * mono;
  }
  return acc;
}

} // namespace

TEST_CASE("eval basics") {
  // constant series
  Series c0 = monomial(1, 1, 1, 4, 4, {0}, {0}, 0, Complex(2.5, -1.0));
  auto val = eval(c0, std::vector<Complex>{Complex(0.3, 0.2)},
                  std::vector<Complex>{Complex(9.0, 0.0)});
  CHECK(val[0] == Complex(2.5, -1.0));

  // h^-1 v^2 at h=2, v=3 -> 4.5
  Series f = monomial(1, 1, 1, 4, 4, {2}, {-1}, 0, Complex(1.0, 0.0));
  val = eval(f, std::vector<Complex>{Complex(2.0, 0.0)},
             std::vector<Complex>{Complex(3.0, 0.0)});
  CHECK(val[0].real() == doctest::Approx(4.5));
  CHECK(val[0].imag() == doctest::Approx(0.0));

  CHECK_THROWS_AS(eval(f, std::vector<Complex>{Complex(0.0, 0.0)},
                       std::vector<Complex>{Complex(3.0, 0.0)}),
                  ZeroHCoordinate);
}

TEST_CASE("eval agrees with an extended-precision oracle") {
  Rng rng(21);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = rng.uniform_int(1, 2), d = rng.uniform_int(1, 2);
    const Series f = random_series(rng, n, d, 2, 6, 4, 25);
    std::vector<Complex> h(static_cast<std::size_t>(n)), v(static_cast<std::size_t>(d));
    for (auto& x : h) x = std::exp(Complex(rng.uniform(-0.5, 0.5), 0.0)) *
                          rng.unit_phase();
    for (auto& x : v) x = 0.4 * rng.uniform() * rng.unit_phase();
    const auto got = eval(f, h, v);
    for (int comp = 0; comp < 2; ++comp) {
      const auto want = eval_oracle_1c(f, h, v, comp);
      const double scale = std::max(1.0, std::abs(std::complex<double>(
                                             double(want.real()),
                                             double(want.imag()))));
      CHECK(std::abs(got[std::size_t(comp)] -
                     Complex(double(want.real()), double(want.imag()))) <=
            1e-12 * scale);
    }
  }
}

TEST_CASE("compose_with_linear on monomials") {
  Rng rng(22);
  const auto deck = random_deck(rng, 1, 1);
  // f = v
  Series f = monomial(1, 1, 1, 6, 4, {1}, {0}, 0, Complex(1.0, 0.0));
  Series g = compose_with_linear(f, deck, 0);
  CHECK(std::abs(g.coeff(std::vector<int>{1}, std::vector<int>{0})[0] -
                 deck.mu(0, 0)) <= 1e-13 * std::abs(deck.mu(0, 0)));
  // f = h v^2 -> lam mu^2 h v^2
  f = monomial(1, 1, 1, 6, 4, {2}, {1}, 0, Complex(1.0, 0.0));
  g = compose_with_linear(f, deck, 0);
  const Complex want = deck.lam(0, 0) * deck.mu(0, 0) * deck.mu(0, 0);
  const Complex got = g.coeff(std::vector<int>{2}, std::vector<int>{1})[0];
  CHECK(std::abs(got - want) <= 1e-12 * std::abs(want));
}

TEST_CASE("compose_with_linear matches pointwise evaluation") {
  Rng rng(23);
  for (int trial = 0; trial < 5; ++trial) {
    const int n = rng.uniform_int(1, 2), d = rng.uniform_int(1, 2);
    const auto deck = random_deck(rng, n, d);
    const Series f = random_series(rng, n, d, n + d, 6, 4, 20);
    const int j = rng.uniform_int(0, n - 1);
    const Series fj = compose_with_linear(f, deck, j);
    for (int pt = 0; pt < 10; ++pt) {
      std::vector<Complex> h(static_cast<std::size_t>(n)), v(static_cast<std::size_t>(d));
      std::vector<Complex> Th(static_cast<std::size_t>(n)), Mv(static_cast<std::size_t>(d));
      for (int i = 0; i < n; ++i) {
        h[std::size_t(i)] = std::exp(Complex(rng.uniform(-0.3, 0.3), 0.0)) *
                            rng.unit_phase();
        Th[std::size_t(i)] = deck.lam(j, i) * h[std::size_t(i)];
      }
      for (int l = 0; l < d; ++l) {
        v[std::size_t(l)] = 0.3 * rng.uniform() * rng.unit_phase();
        Mv[std::size_t(l)] = deck.mu(j, l) * v[std::size_t(l)];
      }
      const auto a = eval(fj, h, v);
      const auto b = eval(f, Th, Mv);
      for (std::size_t c = 0; c < a.size(); ++c) {
        const double scale = std::max(1.0, std::abs(b[c]));
        CHECK(std::abs(a[c] - b[c]) <= 1e-11 * scale);
      }
    }
  }
}

TEST_CASE("jet_truncate basics and scaling order") {
  Rng rng(24);
  const Series f = random_series(rng, 1, 1, 1, 8, 3, 30, 0);
  CHECK(sub(jet_truncate(f, 8), f).empty()); // q >= Q_max is the identity
  const Series high = random_series(rng, 1, 1, 1, 8, 3, 10, 5);
  CHECK(jet_truncate(high, 4).empty()); // v_min >= q+1 truncates to zero

  // tail after truncation scales like |v|^(q+1)
  const int q = 3;
  const Series tail = sub(f, jet_truncate(f, q));
  if (!tail.empty()) {
    std::vector<Complex> h{Complex(1.1, 0.2)};
    auto mag = [&](double t) {
      std::vector<Complex> v{t * Complex(0.31, 0.12)};
      return std::abs(eval(tail, h, v)[0]);
    };
    const double m1 = mag(1e-2), m2 = mag(1e-3);
    if (m1 > 1e-300 && m2 > 1e-300) {
      const double slope = std::log10(m1 / m2);
      CHECK(slope >= double(q + 1) - 0.1);
    }
  }

  // exact coefficient partition
  const Series parts = add(jet_truncate(f, q), tail);
  CHECK(sub(parts, f).empty());
}

TEST_CASE("compose with the identity is the identity") {
  Rng rng(25);
  const Series f = random_series(rng, 2, 1, 1, 6, 4, 20);
  const Series ghat(2, 1, 3, 6, 4); // zero perturbation
  double dropped = 0.0;
  CHECK(sub(compose(f, ghat, dropped), f).empty());
  CHECK(dropped == 0.0);
}

TEST_CASE("compose against the binomial oracle: f=v^2, vertical shift v^2") {
  // f o (Id + (0, v^2)) = (v + v^2)^2 = v^2 + 2 v^3 + v^4 below the jet cut
  Series f = monomial(1, 1, 1, 8, 4, {2}, {0}, 0, Complex(1.0, 0.0));
  Series ghat(1, 1, 2, 8, 4);
  ghat.add(std::vector<int>{2}, std::vector<int>{0}, 1, Complex(1.0, 0.0));
  double dropped = 0.0;
  const Series out = compose(f, ghat, dropped);
  CHECK(dropped == 0.0);
  CHECK(out.coeff(std::vector<int>{2}, std::vector<int>{0})[0] ==
        Complex(1.0, 0.0));
  CHECK(out.coeff(std::vector<int>{3}, std::vector<int>{0})[0] ==
        Complex(2.0, 0.0));
  CHECK(out.coeff(std::vector<int>{4}, std::vector<int>{0})[0] ==
        Complex(1.0, 0.0));
  CHECK(out.term_count() == 3);
}

TEST_CASE("compose matches pointwise evaluation at small |v|") {
  Rng rng(26);
  for (int trial = 0; trial < 5; ++trial) {
    const int n = rng.uniform_int(1, 2), d = rng.uniform_int(1, 2);
    const int q_max = 8, p_max = 12; // wide enough band for extent-1 draws
    const Series f = random_series(rng, n, d, 1, q_max, p_max, 15, 0, 1);
    const Series ghat = random_series(rng, n, d, n + d, q_max, p_max, 8, 2, 1);
    double dropped = 0.0;
    const Series fg = compose(f, ghat, dropped);
    for (int pt = 0; pt < 8; ++pt) {
      const double tv = 1e-3;
      std::vector<Complex> h(static_cast<std::size_t>(n)), v(static_cast<std::size_t>(d));
      for (auto& x : h)
        x = std::exp(Complex(rng.uniform(-0.2, 0.2), 0.0)) * rng.unit_phase();
      for (auto& x : v) x = tv * rng.uniform() * rng.unit_phase();
      // evaluate the composed map directly
      const auto gval = eval(ghat, h, v);
      std::vector<Complex> h2(static_cast<std::size_t>(n)), v2(static_cast<std::size_t>(d));
      for (int i = 0; i < n; ++i)
        h2[std::size_t(i)] = h[std::size_t(i)] + gval[std::size_t(i)];
      for (int l = 0; l < d; ++l)
        v2[std::size_t(l)] = v[std::size_t(l)] + gval[std::size_t(n + l)];
      const Complex direct = eval(f, h2, v2)[0];
      const Complex through = eval(fg, h, v)[0];
      // jet-exact through q_max, so the defect is O(|v|^(q_max+1))
      CHECK(std::abs(direct - through) <=
            1e3 * std::pow(tv, double(q_max + 1)) + 1e-13);
    }
    // band-safe inputs never drop coefficients
    CHECK(dropped == 0.0);
  }
}

TEST_CASE("compose tracks dropped Laurent mass instead of losing it") {
  // f = h^3 with p_max = 3; substituting h -> h + c h^2 v^2 pushes
  // coefficients to h^4 v^2 and beyond the band
  Series f = monomial(1, 1, 1, 4, 3, {0}, {3}, 0, Complex(1.0, 0.0));
  Series ghat(1, 1, 2, 4, 3);
  ghat.add(std::vector<int>{2}, std::vector<int>{2}, 0, Complex(0.5, 0.0));
  double dropped = 0.0;
  const Series out = compose(f, ghat, dropped);
  CHECK(dropped > 0.0);
  // the in-band part of (h + 0.5 h^2 v^2)^3 is just h^3
  CHECK(out.term_count() == 1);
  CHECK(out.coeff(std::vector<int>{0}, std::vector<int>{3})[0] ==
        Complex(1.0, 0.0));
  // dropped mass: 3 * 0.5 * (h^4 v^2) term = 1.5, plus higher order
  CHECK(dropped >= 1.5 - 1e-12);
}

TEST_CASE("compose rejects order-zero perturbations") {
  Series f = monomial(1, 1, 1, 4, 3, {1}, {0}, 0, Complex(1.0, 0.0));
  Series ghat(1, 1, 2, 4, 3);
  ghat.add(std::vector<int>{0}, std::vector<int>{1}, 0, Complex(0.5, 0.0));
  double dropped = 0.0;
  CHECK_THROWS_AS(compose(f, ghat, dropped), InvalidParams);
}

TEST_CASE("ring axioms under linear composition") {
  Rng rng(27);
  const auto deck = random_deck(rng, 2, 2);
  const Series f = random_series(rng, 2, 2, 1, 5, 3, 15);
  const Series g = random_series(rng, 2, 2, 1, 5, 3, 15);
  const Series lhs = compose_with_linear(add(f, g), deck, 1);
  const Series rhs =
      add(compose_with_linear(f, deck, 1), compose_with_linear(g, deck, 1));
  const Series diff = sub(lhs, rhs);
  CHECK(diff.max_abs_coeff() <= 1e-12 * std::max(1.0, lhs.max_abs_coeff()));

  // multiplicative over products of scalar series
  double dr1 = 0.0, dr2 = 0.0;
  const Series prod = mul(f, g, dr1);
  const Series lhs2 = compose_with_linear(prod, deck, 0);
  const Series rhs2 = mul(compose_with_linear(f, deck, 0),
                          compose_with_linear(g, deck, 0), dr2);
  const Series diff2 = sub(lhs2, rhs2);
  CHECK(diff2.max_abs_coeff() <= 1e-12 * std::max(1.0, lhs2.max_abs_coeff()));
}

TEST_CASE("compose associativity at jet level") {
  Rng rng(28);
  const int n = 1, d = 1, q_max = 8, p_max = 6;
  const Series f = random_series(rng, n, d, 1, q_max, p_max, 10, 0, 1);
  const Series g = random_series(rng, n, d, n + d, q_max, p_max, 6, 2, 1);
  const Series k = random_series(rng, n, d, n + d, q_max, p_max, 6, 2, 1);
  double drop = 0.0;
  // (f o G) o K = f o (G o K) with G = Id+g, K = Id+k:
  // G o K = Id + (k + g o K)
  const Series gk = add(k, compose(g, k, drop));
  const Series lhs = compose(compose(f, g, drop), k, drop);
  const Series rhs = compose(f, gk, drop);
  CHECK(drop == 0.0);
  const Series diff = sub(lhs, rhs);
  CHECK(diff.max_abs_coeff() <= 1e-10 * std::max(1.0, lhs.max_abs_coeff()));
}

TEST_CASE("norm_upper closed forms") {
  const Lattice l1(1, Complex(0.0, 1.0) * Eigen::MatrixXcd::Identity(1, 1));
  Series one = monomial(1, 1, 1, 4, 4, {0}, {0}, 0, Complex(1.0, 0.0));
  CHECK(norm_upper(one, l1, DomainSpec{0.0, 0.5}) == doctest::Approx(1.0));
  Series hv = monomial(1, 1, 1, 4, 4, {1}, {1}, 0, Complex(1.0, 0.0));
  CHECK(norm_upper(hv, l1, DomainSpec{0.0, 0.5}) == doctest::Approx(0.5));
}

TEST_CASE("norm_upper dominates sampled sup") {
  Rng rng(29);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = rng.uniform_int(1, 2), d = rng.uniform_int(1, 2);
    const auto lat = random_lattice(rng, n);
    const DomainSpec dom{rng.uniform(0.0, 0.4), rng.uniform(0.2, 0.8)};
    const Series f = random_series(rng, n, d, 2, 6, 3, 25);
    const double bound = norm_upper(f, lat, dom);
    const double sampled = sample_sup(f, lat, dom, 1000, rng.next_u64());
    CHECK(bound >= sampled * (1.0 - 1e-12));
  }
}

TEST_CASE("norm_upper is subadditive and submultiplicative") {
  Rng rng(30);
  const auto lat = random_lattice(rng, 2);
  const DomainSpec dom{0.2, 0.5};
  const Series f = random_series(rng, 2, 1, 1, 5, 3, 12);
  const Series g = random_series(rng, 2, 1, 1, 5, 3, 12);
  CHECK(norm_upper(add(f, g), lat, dom) <=
        (norm_upper(f, lat, dom) + norm_upper(g, lat, dom)) * (1.0 + 1e-12));
  double drop = 0.0;
  const Series fg = mul(f, g, drop);
  // dropped terms only shrink the product's bound
  CHECK(norm_upper(fg, lat, dom) <=
        norm_upper(f, lat, dom) * norm_upper(g, lat, dom) * (1.0 + 1e-12));
}

TEST_CASE("cauchy bound: monomial equality and corrupted coefficient") {
  Rng rng(31);
  const auto lat = random_lattice(rng, 1);
  const DomainSpec dom{0.25, 0.5};
  Series f = monomial(1, 1, 1, 6, 4, {2}, {-1}, 0, Complex(0.7, 0.4));
  const double M = sample_sup(f, lat, dom, 200, 7);
  CHECK(cauchy_bound_check(f, lat, dom, M));

  // rational function sampled onto a series: 1/(1 - v/2) truncated
  Series rat(1, 1, 1, 6, 4);
  for (int q = 0; q <= 6; ++q)
    rat.add(std::vector<int>{q}, std::vector<int>{0}, 0,
            Complex(std::pow(0.5, q), 0.0));
  const double Mr = sample_sup(rat, lat, dom, 500, 8);
  CHECK(cauchy_bound_check(rat, lat, dom, Mr));

  Series corrupted = rat;
  corrupted.set(std::vector<int>{0}, std::vector<int>{0},
                std::vector<Complex>{Complex(10.0, 0.0)});
  CHECK_FALSE(cauchy_bound_check(corrupted, lat, dom, Mr));
}
