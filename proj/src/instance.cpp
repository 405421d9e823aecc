#include "torus_kam/instance.hpp"

#include <cmath>

#include "torus_kam/automorphy.hpp"
#include "torus_kam/rng.hpp"

namespace torus_kam {

namespace {

// Band-safe Laurent extent for a generator term.  Substituting a normal
// component consumes one vertical order, substituting a tangential one costs
// an extra h-division, so keeping |P|_inf <= (|Q|-1)/2 for normal terms and
// |P|_inf <= |Q|/2 - 1 for tangential ones makes every composition the
// engine performs stay inside p_max >= q_max/2.
int p_extent(int component, int n, int q) {
  return std::max(0, component < n ? (q - 2) / 2 : (q - 1) / 2);
}

Series random_transform(Rng& rng, int n, int d, int q_max, int p_max) {
  Series g(n, d, n + d, q_max, p_max);
  const int low_terms = 4 + 2 * (n + d);
  std::vector<int> Q(static_cast<std::size_t>(d)), P(static_cast<std::size_t>(n));
  auto draw_term = [&](int q_lo, int q_hi) {
    const int comp = rng.uniform_int(0, n + d - 1);
    const int q_tot = rng.uniform_int(q_lo, q_hi);
    // split q_tot over the d slots
    std::fill(Q.begin(), Q.end(), 0);
    for (int t = 0; t < q_tot; ++t) ++Q[std::size_t(rng.uniform_int(0, d - 1))];
    const int pb = std::min(p_extent(comp, n, q_tot), p_max);
    for (int i = 0; i < n; ++i) P[std::size_t(i)] = rng.uniform_int(-pb, pb);
    g.add(Q, P, comp, 0.3 * rng.cgauss());
  };
  for (int t = 0; t < low_terms; ++t) draw_term(2, std::min(5, q_max));
  if (q_max >= 10) {
    // a couple of deep terms with genuine Laurent content
    draw_term(std::max(6, q_max - 6), q_max - 2);
    draw_term(std::max(6, q_max - 6), q_max - 2);
  }
  g.prune_zeros();
  return g;
}

} // namespace

Instance gen_instance(const ExperimentConfig& cfg) {
  cfg.lattice.validate();
  const int n = cfg.lattice.n;

  Eigen::MatrixXcd mu = cfg.mu;
  if (!cfg.hermitian_gens.empty()) {
    const auto frame = hermitian_diagonal_frame(cfg.hermitian_gens);
    mu = frame.mu.cast<Complex>();
    for (int j = 0; j < mu.rows(); ++j)
      for (int l = 0; l < mu.cols(); ++l)
        if (std::abs(mu(j, l)) <= 1e-12)
          throw InvalidParams("Hermitian bundle has a zero eigenvalue");
  }
  const int d = int(mu.cols());
  if (mu.rows() != n) throw InvalidParams("mu must have n rows");

  Instance inst;
  const int q_max = cfg.instance.q_max;
  const int p_max = cfg.instance.p_max;
  if (p_max < (q_max + 1) / 2)
    throw InvalidParams("instance requires p_max >= q_max/2 to stay in band");

  if (cfg.instance.mode == InstanceMode::planted_resonance) {
    if (n < 1 || d < 1 || q_max < 4)
      throw InvalidParams("planted resonance needs q_max >= 4");
    // the planted normal term sits right on the drift boundary, so chains of
    // substitutions reach |P| = |Q| - 1 before the jet cut takes over
    if (p_max < q_max - 1)
      throw InvalidParams("planted resonance requires p_max >= q_max - 1");
    // exact normal resonance at Q* = 3 e_1, P* = 2 e_1 only:
    // mu(l,0)^3 lam(l,0)^2 = mu(l,0) with mu(l,0) = -1/lam(l,0); the
    // negative root keeps every |Q| = 2 divisor away from zero, so the
    // planted key is the first resonance the solver can meet.
    const LinearDeck base = LinearDeck::from_lattice(cfg.lattice, mu);
    for (int l = 0; l < n; ++l) mu(l, 0) = Complex(-1.0, 0.0) / base.lam(l, 0);
    inst.planted_P.assign(std::size_t(n), 0);
    inst.planted_Q.assign(std::size_t(d), 0);
    inst.planted_P[0] = 2;
    inst.planted_Q[0] = 3;
    inst.has_planted = true;
  }

  LinearDeck deck = LinearDeck::from_lattice(cfg.lattice, mu);
  deck.validate();

  DomainSpec dom{cfg.kam.eps0, cfg.kam.r0};
  dom.validate();

  Rng rng(cfg.instance.seed);
  Series g = random_transform(rng, n, d, q_max, p_max);

  if (inst.has_planted) {
    // two interacting normal terms whose quadratic mixing lands exactly on
    // the resonant key (3 e_1, 2 e_1)
    std::vector<int> Q(std::size_t(d), 0), P(std::size_t(n), 0);
    Q[0] = 2;
    P[0] = 1;
    g.set(Q, P, std::vector<Complex>(std::size_t(n + d), Complex(0, 0)));
    g.add(Q, P, n + 0, Complex(0.4, 0.1));
  }

  if (cfg.instance.pert_norm > 0.0 && !g.empty()) {
    const double nn = norm_upper(g, cfg.lattice, dom);
    g = scaled(g, Complex(cfg.instance.pert_norm / nn, 0.0));
  } else {
    g = Series(n, d, n + d, q_max, p_max);
  }
  inst.phi_true = g;

  inst.sys.lat = cfg.lattice;
  inst.sys.linear = deck;
  inst.sys.dom = dom;
  inst.sys.pert.assign(std::size_t(n), Series(n, d, n + d, q_max, p_max));
  if (!g.empty()) {
    double dropped = 0.0;
    const Series psi = invert_map(g, std::max(1, g.v_min() - 1), dropped);
    const Series minus_psi = scaled(psi, Complex(-1.0, 0.0));
    for (int i = 0; i < n; ++i) {
      // tau_i = (Id+g) o tau_hat_i o (Id-psi)
      const Series mid = postcompose_linear(deck, i, minus_psi, false);
      const Series outer =
          compose(compose_with_linear(g, deck, i), minus_psi, dropped);
      inst.sys.pert[std::size_t(i)] = add(mid, outer);
    }
    if (dropped > 0.0)
      throw PBandOverflow(dropped); // generator terms are band-safe; if this
                                    // fires the extent rule was violated
  }
  inst.sys.validate();
  return inst;
}

} // namespace torus_kam
