#include "torus_kam/series.hpp"

#include <algorithm>
#include <cmath>

#include "torus_kam/rng.hpp"

namespace torus_kam {

namespace {

double coeff_abs_sum(const Coeff& c, int m) {
  double s = 0.0;
  for (int i = 0; i < m; ++i) s += std::abs(c.a[std::size_t(i)]);
  return s;
}

bool coeff_is_zero(const Coeff& c, int m) {
  for (int i = 0; i < m; ++i)
    if (c.a[std::size_t(i)] != Complex(0.0, 0.0)) return false;
  return true;
}

} // namespace

Series::Series(int n, int d, int m, int q_max, int p_max)
    : n_(n), d_(d), m_(m), q_max_(q_max), p_max_(p_max) {
  if (n < 0 || d < 0 || n + d > kMaxDims || m < 1 || m > kMaxDims)
    throw InvalidParams("series dimensions out of range");
  if (q_max < 0 || q_max > 200 || p_max < 0 || p_max > 120)
    throw InvalidParams("series truncation orders out of range");
}

int Series::v_min() const {
  int vm = q_max_ + 1;
  for (const auto& [k, c] : terms_) {
    if (coeff_is_zero(c, m_)) continue;
    vm = std::min(vm, order_q(k, d_));
  }
  return vm;
}

int Series::v_min_component(int c) const {
  int vm = q_max_ + 1;
  for (const auto& [k, cf] : terms_) {
    if (cf.a[std::size_t(c)] == Complex(0.0, 0.0)) continue;
    vm = std::min(vm, order_q(k, d_));
  }
  return vm;
}

int Series::max_abs_p_support() const {
  int mp = 0;
  for (const auto& [k, c] : terms_)
    mp = std::max(mp, max_abs_p(k, n_, d_));
  return mp;
}

void Series::set(std::span<const int> Q, std::span<const int> P,
                 std::span<const Complex> c) {
  if (int(Q.size()) != d_ || int(P.size()) != n_ || int(c.size()) != m_)
    throw InvalidParams("series coefficient shape mismatch");
  for (int q : Q)
    if (q < 0) throw InvalidParams("negative vertical exponent");
  const MultiIndex k = make_index(Q, P);
  if (!in_band(k)) throw InvalidParams("series key out of band");
  Coeff cf;
  for (int i = 0; i < m_; ++i) cf.a[std::size_t(i)] = c[std::size_t(i)];
  if (coeff_is_zero(cf, m_))
    terms_.erase(k);
  else
    terms_[k] = cf;
}

void Series::add(std::span<const int> Q, std::span<const int> P, int component,
                 Complex c) {
  if (int(Q.size()) != d_ || int(P.size()) != n_ || component < 0 ||
      component >= m_)
    throw InvalidParams("series coefficient shape mismatch");
  const MultiIndex k = make_index(Q, P);
  if (!in_band(k)) throw InvalidParams("series key out of band");
  add_in_band(k, component, c);
}

void Series::add_in_band(const MultiIndex& k, int component, Complex c) {
  terms_[k].a[std::size_t(component)] += c;
}

std::vector<Complex> Series::coeff(std::span<const int> Q,
                                   std::span<const int> P) const {
  std::vector<Complex> out(std::size_t(m_), Complex(0.0, 0.0));
  const auto it = terms_.find(make_index(Q, P));
  if (it != terms_.end())
    for (int i = 0; i < m_; ++i) out[std::size_t(i)] = it->second.a[std::size_t(i)];
  return out;
}

void Series::prune_zeros() {
  for (auto it = terms_.begin(); it != terms_.end();) {
    if (coeff_is_zero(it->second, m_))
      it = terms_.erase(it);
    else
      ++it;
  }
}

void Series::zero_low_orders(int order) {
  for (auto it = terms_.begin(); it != terms_.end();) {
    if (order_q(it->first, d_) <= order)
      it = terms_.erase(it);
    else
      ++it;
  }
}

double Series::max_abs_coeff() const {
  double m = 0.0;
  for (const auto& [k, c] : terms_)
    for (int i = 0; i < m_; ++i)
      m = std::max(m, std::abs(c.a[std::size_t(i)]));
  return m;
}

// ---- pointwise evaluation ----

std::vector<Complex> eval(const Series& f, std::span<const Complex> h,
                          std::span<const Complex> v) {
  if (int(h.size()) != f.n() || int(v.size()) != f.d())
    throw InvalidParams("eval: point dimension mismatch");
  for (const Complex& hj : h)
    if (hj == Complex(0.0, 0.0))
      throw ZeroHCoordinate("eval: h coordinate is zero");
  std::vector<Complex> out(static_cast<std::size_t>(f.m()), Complex(0.0, 0.0));
  for (const auto& [k, c] : f.terms()) {
    Complex mono(1.0, 0.0);
    for (int l = 0; l < f.d(); ++l) {
      const int q = k.v[std::size_t(l)];
      for (int t = 0; t < q; ++t) mono *= v[std::size_t(l)];
    }
    for (int j = 0; j < f.n(); ++j) {
      const int p = k.v[std::size_t(f.d() + j)];
      if (p >= 0)
        for (int t = 0; t < p; ++t) mono *= h[std::size_t(j)];
      else
        for (int t = 0; t < -p; ++t) mono /= h[std::size_t(j)];
    }
    for (int i = 0; i < f.m(); ++i)
      out[std::size_t(i)] += c.a[std::size_t(i)] * mono;
  }
  return out;
}

// ---- linear structure ----

Series add(const Series& a, const Series& b) {
  if (!a.same_shape(b)) throw InvalidParams("add: shape mismatch");
  Series out = a;
  for (const auto& [k, c] : b.terms())
    for (int i = 0; i < b.m(); ++i)
      out.add_in_band(k, i, c.a[std::size_t(i)]);
  out.prune_zeros();
  return out;
}

Series sub(const Series& a, const Series& b) {
  return add(a, scaled(b, Complex(-1.0, 0.0)));
}

Series scaled(const Series& f, Complex factor) {
  Series out(f.n(), f.d(), f.m(), f.q_max(), f.p_max());
  if (factor == Complex(0.0, 0.0)) return out;
  for (const auto& [k, c] : f.terms()) {
    for (int i = 0; i < f.m(); ++i)
      if (c.a[std::size_t(i)] != Complex(0.0, 0.0))
        out.add_in_band(k, i, factor * c.a[std::size_t(i)]);
  }
  return out;
}

Series component(const Series& f, int c) {
  if (c < 0 || c >= f.m()) throw InvalidParams("component index out of range");
  Series out(f.n(), f.d(), 1, f.q_max(), f.p_max());
  for (const auto& [k, cf] : f.terms())
    if (cf.a[std::size_t(c)] != Complex(0.0, 0.0))
      out.add_in_band(k, 0, cf.a[std::size_t(c)]);
  return out;
}

Series assemble(const std::vector<Series>& comps) {
  if (comps.empty()) throw InvalidParams("assemble: no components");
  const Series& f0 = comps.front();
  Series out(f0.n(), f0.d(), int(comps.size()), f0.q_max(), f0.p_max());
  for (int c = 0; c < int(comps.size()); ++c) {
    const Series& fc = comps[std::size_t(c)];
    if (fc.m() != 1 || fc.n() != f0.n() || fc.d() != f0.d() ||
        fc.q_max() != f0.q_max() || fc.p_max() != f0.p_max())
      throw InvalidParams("assemble: component shape mismatch");
    for (const auto& [k, cf] : fc.terms())
      out.add_in_band(k, c, cf.a[0]);
  }
  out.prune_zeros();
  return out;
}

Series mul(const Series& a, const Series& b, double& dropped) {
  if (a.m() != 1) throw InvalidParams("mul: left factor must be scalar");
  if (a.n() != b.n() || a.d() != b.d() || a.q_max() != b.q_max() ||
      a.p_max() != b.p_max())
    throw InvalidParams("mul: shape mismatch");
  Series out(b.n(), b.d(), b.m(), b.q_max(), b.p_max());
  const int n = b.n(), d = b.d();
  for (const auto& [ka, ca] : a.terms()) {
    const Complex fa = ca.a[0];
    for (const auto& [kb, cb] : b.terms()) {
      const MultiIndex k = add_index(ka, kb, n, d);
      if (order_q(k, d) > b.q_max()) continue;
      if (max_abs_p(k, n, d) > b.p_max()) {
        dropped += std::abs(fa) * coeff_abs_sum(cb, b.m());
        continue;
      }
      for (int i = 0; i < b.m(); ++i)
        if (cb.a[std::size_t(i)] != Complex(0.0, 0.0))
          out.add_in_band(k, i, fa * cb.a[std::size_t(i)]);
    }
  }
  out.prune_zeros();
  return out;
}

Series compose_with_linear(const Series& f, const LinearDeck& deck, int j) {
  if (deck.n != f.n() || deck.d != f.d())
    throw InvalidParams("compose_with_linear: deck shape mismatch");
  Series out(f.n(), f.d(), f.m(), f.q_max(), f.p_max());
  std::array<int, kMaxDims> Q{}, P{};
  for (const auto& [k, c] : f.terms()) {
    for (int l = 0; l < f.d(); ++l) Q[std::size_t(l)] = k.v[std::size_t(l)];
    for (int i = 0; i < f.n(); ++i)
      P[std::size_t(i)] = k.v[std::size_t(f.d() + i)];
    const Complex factor = deck.multiplier(
        j, std::span<const int>(P.data(), std::size_t(f.n())),
        std::span<const int>(Q.data(), std::size_t(f.d())));
    for (int i = 0; i < f.m(); ++i)
      if (c.a[std::size_t(i)] != Complex(0.0, 0.0))
        out.add_in_band(k, i, factor * c.a[std::size_t(i)]);
  }
  out.prune_zeros();
  return out;
}

Series postcompose_linear(const LinearDeck& deck, int j, const Series& f,
                          bool inverse) {
  if (f.m() != deck.n + deck.d)
    throw InvalidParams("postcompose_linear: series is not map-valued");
  Series out(f.n(), f.d(), f.m(), f.q_max(), f.p_max());
  for (const auto& [k, c] : f.terms()) {
    for (int i = 0; i < f.m(); ++i) {
      if (c.a[std::size_t(i)] == Complex(0.0, 0.0)) continue;
      const Complex s =
          i < deck.n ? deck.lam(j, i) : deck.mu(j, i - deck.n);
      out.add_in_band(k, i, inverse ? c.a[std::size_t(i)] / s
                                    : c.a[std::size_t(i)] * s);
    }
  }
  return out;
}

Series jet_truncate(const Series& f, int q) {
  if (q < 0) throw InvalidParams("jet_truncate: negative order");
  Series out(f.n(), f.d(), f.m(), f.q_max(), f.p_max());
  for (const auto& [k, c] : f.terms()) {
    if (order_q(k, f.d()) > q) continue;
    for (int i = 0; i < f.m(); ++i)
      if (c.a[std::size_t(i)] != Complex(0.0, 0.0))
        out.add_in_band(k, i, c.a[std::size_t(i)]);
  }
  return out;
}

// ---- composition with Id + ghat ----

namespace {

// Scalar intermediate polynomial: same index layout, unbounded Laurent band.
using TermMap = std::map<MultiIndex, Complex>;

TermMap one_term() {
  TermMap t;
  t[MultiIndex{}] = Complex(1.0, 0.0);
  return t;
}

TermMap to_term_map(const Series& f) {
  TermMap t;
  for (const auto& [k, c] : f.terms())
    if (c.a[0] != Complex(0.0, 0.0)) t[k] = c.a[0];
  return t;
}

TermMap mul_tm(const TermMap& a, const TermMap& b, int n, int d, int q_max) {
  TermMap out;
  for (const auto& [ka, ca] : a)
    for (const auto& [kb, cb] : b) {
      const MultiIndex k = add_index(ka, kb, n, d);
      if (order_q(k, d) > q_max) continue;
      out[k] += ca * cb;
    }
  return out;
}

double binom_gen(int p, int s) {
  double r = 1.0;
  for (int i = 0; i < s; ++i) r *= double(p - i) / double(i + 1);
  return r;
}

struct ComposeCtx {
  int n, d, m, q_max, p_max;
  std::vector<TermMap> g;        // scalar components of ghat
  std::vector<int> g_vmin;       // per component
  std::vector<std::vector<TermMap>> gpow; // lazily extended powers
  std::map<MultiIndex, TermMap> hpow_cache; // key: p placed at slot d+k, rest 0
  std::map<MultiIndex, TermMap> vpow_cache; // key: q at slot l
  std::map<MultiIndex, TermMap> w_cache;    // key: P part only
  std::map<MultiIndex, TermMap> v_cache;    // key: Q part only

  const TermMap& gpow_get(int c, int s) {
    auto& v = gpow[std::size_t(c)];
    while (int(v.size()) <= s)
      v.push_back(mul_tm(v.back(), g[std::size_t(c)], n, d, q_max));
    return v[std::size_t(s)];
  }

  int s_cap(int c) const {
    if (g[std::size_t(c)].empty()) return 0;
    return q_max / std::max(1, g_vmin[std::size_t(c)]);
  }

  // (h_k + g_k)^p
  const TermMap& hpow(int k, int p) {
    MultiIndex key{};
    key.v[std::size_t(d + k)] = std::int16_t(p);
    auto it = hpow_cache.find(key);
    if (it != hpow_cache.end()) return it->second;
    TermMap r;
    const int cap = p >= 0 ? std::min(p, s_cap(k)) : s_cap(k);
    for (int s = 0; s <= cap; ++s) {
      const double b = binom_gen(p, s);
      if (b == 0.0) continue;
      for (const auto& [kg, cg] : gpow_get(k, s)) {
        MultiIndex kk = kg;
        kk.v[std::size_t(d + k)] =
            std::int16_t(kk.v[std::size_t(d + k)] + (p - s));
        r[kk] += b * cg;
      }
    }
    return hpow_cache.emplace(key, std::move(r)).first->second;
  }

  // (v_l + g_{n+l})^q
  const TermMap& vpow(int l, int q) {
    MultiIndex key{};
    key.v[std::size_t(l)] = std::int16_t(q);
    auto it = vpow_cache.find(key);
    if (it != vpow_cache.end()) return it->second;
    TermMap r;
    for (int s = 0; s <= q; ++s) {
      const double b = binom_gen(q, s);
      for (const auto& [kg, cg] : gpow_get(n + l, s)) {
        MultiIndex kk = kg;
        kk.v[std::size_t(l)] = std::int16_t(kk.v[std::size_t(l)] + (q - s));
        if (order_q(kk, d) > q_max) continue;
        r[kk] += b * cg;
      }
    }
    return vpow_cache.emplace(key, std::move(r)).first->second;
  }

  const TermMap& w_prod(const MultiIndex& kf) {
    MultiIndex key{};
    for (int i = 0; i < n; ++i)
      key.v[std::size_t(d + i)] = kf.v[std::size_t(d + i)];
    auto it = w_cache.find(key);
    if (it != w_cache.end()) return it->second;
    TermMap r = one_term();
    for (int k = 0; k < n; ++k) {
      const int p = kf.v[std::size_t(d + k)];
      if (p == 0) continue;
      r = mul_tm(r, hpow(k, p), n, d, q_max);
    }
    return w_cache.emplace(key, std::move(r)).first->second;
  }

  const TermMap& v_prod(const MultiIndex& kf) {
    MultiIndex key{};
    for (int i = 0; i < d; ++i) key.v[std::size_t(i)] = kf.v[std::size_t(i)];
    auto it = v_cache.find(key);
    if (it != v_cache.end()) return it->second;
    TermMap r = one_term();
    for (int l = 0; l < d; ++l) {
      const int q = kf.v[std::size_t(l)];
      if (q == 0) continue;
      r = mul_tm(r, vpow(l, q), n, d, q_max);
    }
    return v_cache.emplace(key, std::move(r)).first->second;
  }
};

} // namespace

Series compose(const Series& f, const Series& ghat, double& dropped) {
  if (f.n() != ghat.n() || f.d() != ghat.d() || f.q_max() != ghat.q_max() ||
      f.p_max() != ghat.p_max())
    throw InvalidParams("compose: shape mismatch");
  if (ghat.m() != f.n() + f.d())
    throw InvalidParams("compose: ghat is not map-valued");

  ComposeCtx ctx;
  ctx.n = f.n();
  ctx.d = f.d();
  ctx.m = f.m();
  ctx.q_max = f.q_max();
  ctx.p_max = f.p_max();
  for (int c = 0; c < ctx.n + ctx.d; ++c) {
    Series gc = component(ghat, c);
    const int vm = gc.v_min();
    if (!gc.empty() && vm < 1)
      throw InvalidParams("compose: ghat component has terms of order 0 in v");
    ctx.g.push_back(to_term_map(gc));
    ctx.g_vmin.push_back(vm);
    ctx.gpow.push_back({one_term()});
  }

  Series out(f.n(), f.d(), f.m(), f.q_max(), f.p_max());
  for (const auto& [kf, cf] : f.terms()) {
    const TermMap& W = ctx.w_prod(kf);
    const TermMap& V = ctx.v_prod(kf);
    const TermMap T = mul_tm(W, V, ctx.n, ctx.d, ctx.q_max);
    for (const auto& [kt, ct] : T) {
      if (max_abs_p(kt, ctx.n, ctx.d) > ctx.p_max) {
        dropped += std::abs(ct) * coeff_abs_sum(cf, f.m());
        continue;
      }
      for (int i = 0; i < f.m(); ++i)
        if (cf.a[std::size_t(i)] != Complex(0.0, 0.0))
          out.add_in_band(kt, i, cf.a[std::size_t(i)] * ct);
    }
  }
  out.prune_zeros();
  return out;
}

// ---- certified norms ----

double norm_upper(const Series& f, const Lattice& lat, const DomainSpec& dom) {
  dom.validate();
  if (lat.n != f.n()) throw InvalidParams("norm_upper: lattice mismatch");
  std::vector<double> acc(static_cast<std::size_t>(f.m()), 0.0);
  std::array<int, kMaxDims> P{};
  for (const auto& [k, c] : f.terms()) {
    for (int i = 0; i < f.n(); ++i)
      P[std::size_t(i)] = k.v[std::size_t(f.d() + i)];
    const double w =
        sup_h_pow(lat, dom.eps,
                  std::span<const int>(P.data(), std::size_t(f.n()))) *
        std::pow(dom.r, double(order_q(k, f.d())));
    for (int i = 0; i < f.m(); ++i)
      acc[std::size_t(i)] += std::abs(c.a[std::size_t(i)]) * w;
  }
  return acc.empty() ? 0.0 : *std::max_element(acc.begin(), acc.end());
}

double sample_sup(const Series& f, const Lattice& lat, const DomainSpec& dom,
                  int samples, std::uint64_t seed) {
  dom.validate();
  Rng rng(seed);
  const int n = f.n(), d = f.d();
  const Eigen::MatrixXd W = lat.im();
  double best = 0.0;

  auto probe = [&](const Eigen::VectorXd& R, bool random_phases) {
    std::vector<Complex> h(static_cast<std::size_t>(n)), v(static_cast<std::size_t>(d));
    for (int j = 0; j < n; ++j) {
      const double mag = std::exp(-2.0 * std::numbers::pi * R(j));
      h[std::size_t(j)] =
          mag * (random_phases ? rng.unit_phase() : Complex(1.0, 0.0));
    }
    for (int l = 0; l < d; ++l)
      v[std::size_t(l)] =
          dom.r * (random_phases ? rng.unit_phase() : Complex(1.0, 0.0));
    const auto val = eval(f, h, v);
    for (const Complex& x : val) best = std::max(best, std::abs(x));
  };

  for (const auto& R : parallelotope_vertices(lat, dom.eps)) {
    probe(R, false);
    probe(R, true);
  }
  for (int s = 0; s < samples; ++s) {
    Eigen::VectorXd t(n);
    for (int i = 0; i < n; ++i) t(i) = rng.uniform(-dom.eps, 1.0 + dom.eps);
    probe(W.transpose() * t, true);
  }
  return best;
}

bool cauchy_bound_check(const Series& f, const Lattice& lat,
                        const DomainSpec& dom, double M, double slack) {
  dom.validate();
  std::array<int, kMaxDims> P{};
  for (const auto& [k, c] : f.terms()) {
    for (int i = 0; i < f.n(); ++i)
      P[std::size_t(i)] = k.v[std::size_t(f.d() + i)];
    const double w =
        sup_h_pow(lat, dom.eps,
                  std::span<const int>(P.data(), std::size_t(f.n()))) *
        std::pow(dom.r, double(order_q(k, f.d())));
    for (int i = 0; i < f.m(); ++i)
      if (std::abs(c.a[std::size_t(i)]) * w > M * (1.0 + slack)) return false;
  }
  return true;
}

} // namespace torus_kam
