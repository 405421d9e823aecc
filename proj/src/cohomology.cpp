#include "torus_kam/cohomology.hpp"

#include <cmath>
#include <set>

namespace torus_kam {

namespace {

void decode_key(const MultiIndex& k, int n, int d, std::vector<int>& Q,
                std::vector<int>& P) {
  Q.resize(static_cast<std::size_t>(d));
  P.resize(static_cast<std::size_t>(n));
  for (int l = 0; l < d; ++l) Q[std::size_t(l)] = k.v[std::size_t(l)];
  for (int i = 0; i < n; ++i) P[std::size_t(i)] = k.v[std::size_t(d + i)];
}

} // namespace

Series apply_L(const LinearDeck& deck, int i, const Series& phi) {
  if (phi.m() != deck.n + deck.d)
    throw InvalidParams("apply_L: series is not map-valued");
  if (!phi.empty() && phi.v_min() < 1)
    throw InvalidParams("apply_L: series must vanish on the zero section");
  Series out(phi.n(), phi.d(), phi.m(), phi.q_max(), phi.p_max());
  std::vector<int> Q, P;
  for (const auto& [k, c] : phi.terms()) {
    decode_key(k, phi.n(), phi.d(), Q, P);
    const Complex base = deck.multiplier(i, P, Q);
    for (int comp = 0; comp < phi.m(); ++comp) {
      if (c.a[std::size_t(comp)] == Complex(0.0, 0.0)) continue;
      const Complex target =
          comp < deck.n ? deck.lam(i, comp) : deck.mu(i, comp - deck.n);
      out.add_in_band(k, comp, (base - target) * c.a[std::size_t(comp)]);
    }
  }
  out.prune_zeros();
  return out;
}

double commutation_defect(const DeckSystem& sys, int i, int j, int jet_order) {
  if (i == j) throw InvalidParams("commutation_defect: need i != j");
  const LinearDeck& deck = sys.linear;
  double dropped = 0.0;

  auto half = [&](int a, int b) {
    // tau_a o tau_b - tau_hat_a o tau_hat_b
    const Series ghat_b =
        postcompose_linear(deck, b, sys.pert[std::size_t(b)], true);
    const Series tail = compose(
        compose_with_linear(sys.pert[std::size_t(a)], deck, b), ghat_b,
        dropped);
    return add(postcompose_linear(deck, a, sys.pert[std::size_t(b)], false),
               tail);
  };

  const Series delta = sub(half(i, j), half(j, i));
  if (dropped > 0.0) throw PBandOverflow(dropped);

  // Certified bound on the common domain where both compositions are
  // defined: the window with t_i, t_j in (-eps, eps) and the polydisc
  // shrunk by the normal multipliers.
  const int n = deck.n, d = deck.d;
  std::vector<double> lo(std::size_t(n), -sys.dom.eps);
  std::vector<double> hi(std::size_t(n), 1.0 + sys.dom.eps);
  hi[std::size_t(i)] = sys.dom.eps;
  hi[std::size_t(j)] = sys.dom.eps;
  std::vector<double> rad(std::size_t(d), sys.dom.r);
  for (int l = 0; l < d; ++l)
    rad[std::size_t(l)] *= std::min(
        {1.0, 1.0 / std::abs(deck.mu(i, l)), 1.0 / std::abs(deck.mu(j, l))});

  const Series jet = jet_truncate(delta, jet_order);
  std::vector<double> acc(std::size_t(jet.m()), 0.0);
  std::vector<int> Q, P;
  for (const auto& [k, c] : jet.terms()) {
    decode_key(k, n, d, Q, P);
    double w = sup_h_pow_window(sys.lat, lo, hi, P);
    for (int l = 0; l < d; ++l)
      w *= std::pow(rad[std::size_t(l)], double(Q[std::size_t(l)]));
    for (int comp = 0; comp < jet.m(); ++comp)
      acc[std::size_t(comp)] += std::abs(c.a[std::size_t(comp)]) * w;
  }
  double bound = 0.0;
  for (double a : acc) bound = std::max(bound, a);
  return bound;
}

bool compatibility_check(const LinearDeck& deck, const std::vector<Series>& F,
                         int q_lo, int q_hi, double rel_tol) {
  if (int(F.size()) != deck.n)
    throw InvalidParams("compatibility_check: need n right-hand sides");
  const int n = deck.n, d = deck.d;
  std::set<MultiIndex> keys;
  for (const auto& f : F)
    for (const auto& [k, c] : f.terms()) {
      const int q = order_q(k, d);
      if (q >= q_lo && q <= q_hi) keys.insert(k);
    }

  std::vector<int> Q, P;
  std::vector<Complex> divisor(static_cast<std::size_t>(n));
  for (const auto& key : keys) {
    decode_key(key, n, d, Q, P);
    for (int kind = 0; kind < 2; ++kind) {
      const bool horizontal = kind == 0;
      const int targets = horizontal ? n : d;
      for (int t = 0; t < targets; ++t) {
        int best = 0;
        double best_val = -1.0;
        for (int l = 0; l < n; ++l) {
          const Complex tgt = horizontal ? deck.lam(l, t) : deck.mu(l, t);
          divisor[std::size_t(l)] = deck.multiplier(l, P, Q) - tgt;
          const double v = std::abs(divisor[std::size_t(l)]);
          if (v > best_val) {
            best_val = v;
            best = l;
          }
        }
        const int comp = horizontal ? t : n + t;
        const Complex f_best =
            F[std::size_t(best)].coeff(Q, P)[std::size_t(comp)];
        for (int m = 0; m < n; ++m) {
          const Complex f_m = F[std::size_t(m)].coeff(Q, P)[std::size_t(comp)];
          const Complex lhs = divisor[std::size_t(best)] * f_m;
          const Complex rhs = divisor[std::size_t(m)] * f_best;
          const double scale = std::max(std::abs(lhs), std::abs(rhs));
          if (scale == 0.0) continue;
          if (std::abs(lhs - rhs) > rel_tol * scale) return false;
        }
      }
    }
  }
  return true;
}

CohomSolution solve(const LinearDeck& deck, const std::vector<Series>& F,
                    int q_lo, int q_hi, const DiophantineFit& fit,
                    const std::optional<CohomNormSpec>& norms) {
  if (int(F.size()) != deck.n)
    throw InvalidParams("solve: need n right-hand sides");
  const int n = deck.n, d = deck.d;
  const Series& f0 = F.front();
  for (const auto& f : F)
    if (f.m() != n + d || !f.same_shape(f0))
      throw InvalidParams("solve: right-hand sides must be map-valued");

  CohomSolution sol;
  sol.G = Series(f0.n(), f0.d(), f0.m(), f0.q_max(), f0.p_max());
  sol.report.q_lo = q_lo;
  sol.report.q_hi = q_hi;
  sol.report.max_divisor_used = 1e300;

  std::set<MultiIndex> keys;
  for (const auto& f : F)
    for (const auto& [k, c] : f.terms()) {
      const int q = order_q(k, d);
      if (q >= q_lo && q <= q_hi) keys.insert(k);
    }

  std::vector<int> Q, P;
  for (const auto& key : keys) {
    decode_key(key, n, d, Q, P);
    int order = 0;
    for (int p : P) order += std::abs(p);
    for (int q : Q) order += q;
    double f_key_max = 0.0;
    for (const auto& f : F) {
      const auto c = f.coeff(Q, P);
      for (const auto& x : c) f_key_max = std::max(f_key_max, std::abs(x));
    }
    const double ghv_cap =
        f_key_max * std::pow(double(order), fit.tau_exp) /
        std::max(fit.D_fit, 1e-300);

    for (int kind = 0; kind < 2; ++kind) {
      const bool horizontal = kind == 0;
      const int targets = horizontal ? n : d;
      for (int t = 0; t < targets; ++t) {
        const int comp = horizontal ? t : n + t;
        bool needed = false;
        for (const auto& f : F)
          if (f.coeff(Q, P)[std::size_t(comp)] != Complex(0.0, 0.0))
            needed = true;
        if (!needed) continue;

        int best = 0;
        double best_val = -1.0;
        Complex best_div(0.0, 0.0);
        for (int l = 0; l < n; ++l) {
          const Complex tgt = horizontal ? deck.lam(l, t) : deck.mu(l, t);
          const Complex div = deck.multiplier(l, P, Q) - tgt;
          const double v = std::abs(div);
          if (v > best_val) {
            best_val = v;
            best = l;
            best_div = div;
          }
        }
        const double scale = std::max(
            {1.0,
             std::exp(std::min(deck.log_abs_multiplier(best, P, Q), 690.7)),
             std::abs(horizontal ? deck.lam(best, t) : deck.mu(best, t))});
        if (best_val <= kResonanceTol * scale)
          throw ResonantDivisor(P, Q, horizontal, t, best_val);
        if (best_val < kNearResonanceWarn * scale)
          ++sol.report.near_resonant_count;
        sol.report.max_divisor_used =
            std::min(sol.report.max_divisor_used, best_val);

        const Complex g =
            F[std::size_t(best)].coeff(Q, P)[std::size_t(comp)] / best_div;
        if (g != Complex(0.0, 0.0)) sol.G.add_in_band(key, comp, g);
        if (std::abs(g) > ghv_cap * (1.0 + 1e-9))
          sol.report.coeff_bound_ok = false;
      }
    }
  }
  sol.G.prune_zeros();

  // the solved jet must reproduce every right-hand side in range
  for (int m = 0; m < n; ++m) {
    const Series lg = apply_L(deck, m, sol.G);
    const Series diff = sub(jet_truncate(lg, q_hi),
                            jet_truncate(F[std::size_t(m)], q_hi));
    double worst = 0.0;
    double ref = std::max(F[std::size_t(m)].max_abs_coeff(), 1.0);
    for (const auto& [k, c] : diff.terms()) {
      const int q = order_q(k, d);
      if (q < q_lo) continue;
      for (int i = 0; i < diff.m(); ++i)
        worst = std::max(worst, std::abs(c.a[std::size_t(i)]));
    }
    if (worst > 1e-9 * ref)
      throw IncompatibleRHS("solve: L_m(G) does not reproduce F_m");
  }

  if (norms) {
    sol.report.norm_G = norm_upper(sol.G, norms->lat, norms->dom);
    double composed = 0.0;
    for (int i = 0; i < n; ++i)
      composed = std::max(
          composed,
          norm_upper(compose_with_linear(sol.G, deck, i), norms->lat,
                     norms->dom));
    sol.report.norm_G_composed = composed;
  }
  return sol;
}

} // namespace torus_kam
