#include "torus_kam/kam.hpp"

#include <cmath>
#include <numbers>

#include "torus_kam/rng.hpp"

namespace torus_kam {

void DeckSystem::validate() const {
  lat.validate();
  linear.validate();
  dom.validate();
  if (int(pert.size()) != lat.n)
    throw InvalidParams("deck system needs n perturbation series");
  for (const auto& p : pert) {
    if (p.m() != lat.n + linear.d)
      throw InvalidParams("perturbation series must be map-valued");
    if (!p.empty() && p.v_min() < 2)
      throw InvalidParams("perturbation must vanish to second order in v");
  }
}

void KamParams::validate(double kappa_val) const {
  if (!(delta0 > 0.0) || !(eps0 > 0.0) || !(r0 > 0.0) || q0 < 1 || K_max < 1 ||
      !(mu_exp > 0.0))
    throw InvalidParams("KAM parameters out of range");
  if (!(delta0 < kappa_val / 20.0 * eps0))
    throw InvalidParams("delta0 must satisfy delta0 < (kappa/20) eps0");
  if (!(delta0 < std::log(2.0) / 10.0))
    throw InvalidParams("delta0 must satisfy delta0 < ln(2)/10");
}

std::vector<ScheduleRow> schedule(const KamParams& params, double kappa_val,
                                  int K) {
  params.validate(kappa_val);
  std::vector<ScheduleRow> rows;
  rows.reserve(static_cast<std::size_t>(K));
  double eps = params.eps0, r = params.r0;
  long long q = params.q0;
  for (int k = 0; k < K; ++k) {
    const double delta = params.delta0 / double((k + 1) * (k + 1));
    rows.push_back({delta, eps, r, q});
    if (!(eps > params.eps0 / 2.0) || !(r > params.r0 / 2.0))
      throw InvalidParams("schedule left the guaranteed domain floor");
    eps -= 5.0 * delta / kappa_val;
    r *= std::exp(-5.0 * delta);
    if (q < (1LL << 61)) q = 2 * q + 1;
  }
  return rows;
}

Series invert_map(const Series& phi, int q, double& dropped) {
  if (q < 1) throw InvalidParams("invert_map: q must be >= 1");
  if (!phi.empty() && phi.v_min() < q + 1)
    throw InvalidParams("invert_map: phi must vanish to order q+1");
  Series psi(phi.n(), phi.d(), phi.m(), phi.q_max(), phi.p_max());
  if (phi.empty()) return psi;
  // each pass extends the exact agreement by at least q vertical orders
  const int it_max = phi.q_max() / std::max(1, q) + 3;
  for (int it = 0; it < it_max; ++it) {
    const Series next = compose(phi, scaled(psi, Complex(-1.0, 0.0)), dropped);
    const bool stable = sub(next, psi).empty();
    psi = next;
    if (stable) return psi;
  }
  throw NumericalBreakdown("invert_map: fixed point did not stabilize");
}

namespace {

double residual_norm(const std::vector<Series>& pert, const Lattice& lat,
                     const DomainSpec& dom) {
  double r = 0.0;
  for (const auto& p : pert) r = std::max(r, norm_upper(p, lat, dom));
  return r;
}

int residual_v_min(const std::vector<Series>& pert) {
  int v = pert.front().q_max() + 1;
  for (const auto& p : pert) v = std::min(v, p.v_min());
  return v;
}

} // namespace

Series dilate_perturbation(const Series& f, double s, int n) {
  Series out(f.n(), f.d(), f.m(), f.q_max(), f.p_max());
  for (const auto& [k, c] : f.terms()) {
    const int q = order_q(k, f.d());
    const double hor = std::pow(s, double(q));
    const double ver = q == 0 ? 1.0 / s : std::pow(s, double(q - 1));
    for (int i = 0; i < f.m(); ++i) {
      if (c.a[std::size_t(i)] == Complex(0.0, 0.0)) continue;
      out.add_in_band(k, i, c.a[std::size_t(i)] * (i < n ? hor : ver));
    }
  }
  return out;
}

NewtonStepResult newton_step(const DeckSystem& sys, int q_k,
                             const DiophantineFit& fit,
                             const KamParams& params, double delta_k,
                             double kappa_val, const DomainSpec& next_dom) {
  const LinearDeck& deck = sys.linear;
  const int n = deck.n;
  NewtonStepResult res;
  res.next = sys;
  res.next.dom = next_dom;

  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      const double defect = commutation_defect(sys, i, j, 2 * q_k);
      if (defect > params.commutation_tol)
        throw CommutationDefectTooLarge(
            "commutation defect " + std::to_string(defect) +
            " at jet order " + std::to_string(2 * q_k));
    }

  std::vector<Series> F;
  F.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i)
    F.push_back(scaled(jet_truncate(sys.pert[std::size_t(i)], 2 * q_k),
                       Complex(-1.0, 0.0)));

  const DomainSpec shrunk{sys.dom.eps - delta_k / kappa_val,
                          sys.dom.r * std::exp(-delta_k)};
  CohomSolution sol =
      solve(deck, F, 2, 2 * q_k, fit, CohomNormSpec{sys.lat, shrunk});
  res.phi = std::move(sol.G);
  res.solve_report = sol.report;

  res.psi = invert_map(res.phi, q_k, res.dropped);
  const Series minus_psi = scaled(res.psi, Complex(-1.0, 0.0));

  for (int i = 0; i < n; ++i) {
    // tau'_i = (Id+phi) o tau_i o (Id-psi), assembled around tau_hat_i
    const Series ghat_i =
        postcompose_linear(deck, i, sys.pert[std::size_t(i)], true);
    const Series gprime_i =
        add(minus_psi, compose(ghat_i, minus_psi, res.dropped));
    const Series mid = postcompose_linear(deck, i, gprime_i, false);
    const Series outer = compose(compose_with_linear(res.phi, deck, i),
                                 gprime_i, res.dropped);
    Series next_pert = add(mid, outer);

    // orders <= 2 q_k must vanish; verify, then store exact zeros
    const Series low = jet_truncate(next_pert, 2 * q_k);
    if (low.max_abs_coeff() > 1e-10)
      throw NumericalBreakdown(
          "newton_step: low orders failed to cancel (max " +
          std::to_string(low.max_abs_coeff()) + ")");
    next_pert.zero_low_orders(2 * q_k);
    res.next.pert[std::size_t(i)] = std::move(next_pert);
  }

  if (params.overflow_policy == OverflowPolicy::strict && res.dropped > 0.0)
    throw PBandOverflow(res.dropped);

  res.residual_bound = residual_norm(res.next.pert, sys.lat, next_dom);
  return res;
}

KamRunResult run(const DeckSystem& sys_in, const KamParams& params) {
  sys_in.validate();
  const double kv = kappa(sys_in.lat);
  params.validate(kv);
  const int n = sys_in.lat.n;

  DiophantineFit fit;
  fit.tau_exp = params.tau_exp;
  fit.D_fit = params.D_fit;

  KamRunResult out;
  out.report.dilation = 1.0;

  DeckSystem sys = sys_in;
  sys.dom = DomainSpec{params.eps0, params.r0};

  // dilation preconditioning: shrink the perturbation below delta0^mu
  const double rho0 = residual_norm(sys.pert, sys.lat, sys.dom);
  const double threshold = std::pow(params.delta0, params.mu_exp);
  if (rho0 > threshold) {
    const int vm = residual_v_min(sys.pert);
    const double s = std::pow(params.dilation_safety * threshold / rho0,
                              1.0 / double(vm - 1));
    out.report.dilation = s;
    for (auto& p : sys.pert) p = dilate_perturbation(p, s, n);
  }

  const Series& p0 = sys.pert.front();
  Series g_total(p0.n(), p0.d(), p0.m(), p0.q_max(), p0.p_max());
  const DomainSpec floor_dom{params.eps0 / 2.0, params.r0 / 2.0};

  const auto sched = schedule(params, kv, params.K_max + 1);
  bool converged = false;
  for (int k = 0; k <= params.K_max; ++k) {
    const auto& row = sched[std::size_t(k)];
    sys.dom = DomainSpec{row.eps_k, row.r_k};
    StepRow rep;
    rep.k = k;
    rep.q_k = row.q_k;
    rep.delta_k = row.delta_k;
    rep.eps_k = row.eps_k;
    rep.r_k = row.r_k;
    rep.residual_bound = residual_norm(sys.pert, sys.lat, sys.dom);
    rep.residual_v_min = residual_v_min(sys.pert);

    if (rep.residual_bound < params.target_residual ||
        rep.residual_v_min > p0.q_max()) {
      out.report.rows.push_back(rep);
      out.report.stop_reason = rep.residual_v_min > p0.q_max()
                                   ? "jet exhausted"
                                   : "residual below target";
      out.report.final_domain = sys.dom;
      converged = true;
      break;
    }
    if (k == params.K_max) {
      out.report.rows.push_back(rep);
      break;
    }

    const auto& next_row = sched[std::size_t(k) + 1];
    const DomainSpec next_dom{next_row.eps_k, next_row.r_k};
    const int q_used = int(std::min<long long>(row.q_k, p0.q_max()));
    NewtonStepResult step =
        newton_step(sys, q_used, fit, params, row.delta_k, kv, next_dom);

    const DomainSpec shrunk{row.eps_k - row.delta_k / kv,
                            row.r_k * std::exp(-row.delta_k)};
    rep.phi_norm = norm_upper(step.phi, sys.lat, shrunk);
    rep.dropped_mass = step.dropped;

    // Phi_total^-1 accumulates as (Id-psi_0) o (Id-psi_1) o ...; the
    // linearizing map keeps the generator's orientation.
    const Series minus_psi = scaled(step.psi, Complex(-1.0, 0.0));
    double acc_drop = 0.0;
    Series g_next = add(minus_psi, compose(g_total, minus_psi, acc_drop));
    if (params.overflow_policy == OverflowPolicy::strict && acc_drop > 0.0)
      throw PBandOverflow(acc_drop);
    rep.dropped_mass += acc_drop;
    rep.phi_total_delta = norm_upper(sub(g_next, g_total), sys.lat, floor_dom);
    g_total = std::move(g_next);

    out.report.rows.push_back(rep);
    sys = std::move(step.next);
  }

  if (!converged) throw KamNoConvergence(std::move(out.report));

  if (out.report.dilation != 1.0)
    g_total = dilate_perturbation(g_total, 1.0 / out.report.dilation, n);
  out.phi_total = std::move(g_total);

  DeckSystem orig = sys_in;
  orig.dom = out.report.final_domain;
  out.report.verify_bound =
      verify_conjugacy(out.phi_total, orig, out.report.final_domain);
  out.report.converged = true;
  return out;
}

double verify_conjugacy(const Series& phi_g, const DeckSystem& sys,
                        const DomainSpec& dom) {
  const LinearDeck& deck = sys.linear;
  const int n = deck.n, d = deck.d;
  double bound = 0.0;
  double dropped = 0.0;
  std::vector<Series> defects;
  for (int i = 0; i < n; ++i) {
    const Series lhs = compose_with_linear(phi_g, deck, i);
    const Series rhs1 = postcompose_linear(deck, i, phi_g, false);
    const Series rhs2 =
        compose(sys.pert[std::size_t(i)], phi_g, dropped);
    const Series delta = sub(lhs, add(rhs1, rhs2));
    defects.push_back(delta);
    bound = std::max(bound, norm_upper(delta, sys.lat, dom));
  }
  if (dropped > 0.0) throw PBandOverflow(dropped);

  // pointwise cross-check on sampled domain points
  Rng rng(0x5eedULL);
  const Eigen::MatrixXd W = sys.lat.im();
  for (int s = 0; s < 100; ++s) {
    Eigen::VectorXd t(n);
    for (int i = 0; i < n; ++i) t(i) = rng.uniform(-dom.eps, 1.0 + dom.eps);
    const Eigen::VectorXd R = W.transpose() * t;
    std::vector<Complex> h(static_cast<std::size_t>(n)), v(static_cast<std::size_t>(d));
    for (int i = 0; i < n; ++i)
      h[std::size_t(i)] =
          std::exp(-2.0 * std::numbers::pi * R(i)) * rng.unit_phase();
    for (int l = 0; l < d; ++l)
      v[std::size_t(l)] = dom.r * rng.uniform() * rng.unit_phase();
    for (const auto& delta : defects) {
      const auto val = eval(delta, h, v);
      for (const auto& x : val)
        if (std::abs(x) > bound * (1.0 + 1e-8) + 1e-12)
          throw NumericalBreakdown(
              "verify_conjugacy: pointwise defect exceeds certified bound");
    }
  }
  return bound;
}

} // namespace torus_kam
