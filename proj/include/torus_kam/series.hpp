#pragma once

#include <array>
#include <complex>
#include <map>
#include <span>
#include <vector>

#include "torus_kam/deck.hpp"
#include "torus_kam/errors.hpp"
#include "torus_kam/lattice.hpp"
#include "torus_kam/multi_index.hpp"

namespace torus_kam {

/// Coefficient vector of a series term; only the first m entries are used.
struct Coeff {
  std::array<Complex, kMaxDims> a{};
};

/// Truncated Taylor-Laurent series  sum_{Q,P} c_{Q,P} h^P v^Q  with
/// Q in N^d (|Q| <= q_max) and P in Z^n (|P|_inf <= p_max), m components.
/// Coefficients are stored sparsely and iterate in lexicographic (Q,P)
/// order, so every operation is reproducible bit for bit.
class Series {
public:
  Series() = default;
  Series(int n, int d, int m, int q_max, int p_max);

  int n() const { return n_; }
  int d() const { return d_; }
  int m() const { return m_; }
  int q_max() const { return q_max_; }
  int p_max() const { return p_max_; }

  const std::map<MultiIndex, Coeff>& terms() const { return terms_; }
  bool empty() const { return terms_.empty(); }
  std::size_t term_count() const { return terms_.size(); }

  bool same_shape(const Series& o) const {
    return n_ == o.n_ && d_ == o.d_ && m_ == o.m_ && q_max_ == o.q_max_ &&
           p_max_ == o.p_max_;
  }

  /// Minimal |Q| carrying a nonzero coefficient; q_max+1 when empty.
  int v_min() const;
  int v_min_component(int c) const;
  int max_abs_p_support() const;

  bool in_band(const MultiIndex& k) const {
    return order_q(k, d_) <= q_max_ && max_abs_p(k, n_, d_) <= p_max_;
  }

  /// Inserts/overwrites one coefficient vector; throws InvalidParams when the
  /// key is out of band.
  void set(std::span<const int> Q, std::span<const int> P,
           std::span<const Complex> c);
  void add(std::span<const int> Q, std::span<const int> P, int component,
           Complex c);

  std::vector<Complex> coeff(std::span<const int> Q,
                             std::span<const int> P) const;

  void add_in_band(const MultiIndex& k, int component, Complex c);

  /// Removes stored terms whose components are all exactly zero.
  void prune_zeros();

  /// Zeroes (exactly) all terms with |Q| <= order.
  void zero_low_orders(int order);

  double max_abs_coeff() const;

private:
  int n_ = 0, d_ = 0, m_ = 0, q_max_ = 0, p_max_ = 0;
  std::map<MultiIndex, Coeff> terms_;
};

// ---- pointwise and linear operations ----

std::vector<Complex> eval(const Series& f, std::span<const Complex> h,
                          std::span<const Complex> v);

Series add(const Series& a, const Series& b);
Series sub(const Series& a, const Series& b);
Series scaled(const Series& f, Complex factor);
Series component(const Series& f, int c);
Series assemble(const std::vector<Series>& comps);

/// Product of a scalar (m=1) series with a series of any m.  Terms past the
/// jet order are dropped (jet semantics); terms past the Laurent band add
/// their absolute mass to `dropped`.
Series mul(const Series& a, const Series& b, double& dropped);

/// f composed on the right with the diagonal linear map of generator j:
/// coefficient (Q,P) picks up the factor lam_j^P mu_j^Q.  Exact.
Series compose_with_linear(const Series& f, const LinearDeck& deck, int j);

/// Left action of the diagonal linear map of generator j on a map-valued
/// series (m == n+d): horizontal component k scales by lam(j,k), vertical
/// component l by mu(j,l).  `inverse` divides instead.
Series postcompose_linear(const LinearDeck& deck, int j, const Series& f,
                          bool inverse = false);

/// Drops all terms with |Q| > q (the 2q-jet truncation).
Series jet_truncate(const Series& f, int q);

/// Composition f o (Id + ghat), jet-exact through q_max.  ghat must be
/// map-valued (m == n+d) and every component needs v_min >= 1 so the
/// expansion is graded by vertical order.  Coefficients pushed past the
/// Laurent band are accumulated into `dropped`, never silently lost.
Series compose(const Series& f, const Series& ghat, double& dropped);

/// Certified upper bound for the sup norm over the domain:
/// sum |c_{Q,P}| * sup|h^P| * r^|Q|, maximized over components.
double norm_upper(const Series& f, const Lattice& lat, const DomainSpec& dom);

/// Sampled sup of |f| over the domain (max over components); the vertex
/// moduli of the parallelotope and the polydisc boundary radius are always
/// in the sample set, so single monomials attain their exact sup.
double sample_sup(const Series& f, const Lattice& lat, const DomainSpec& dom,
                  int samples, std::uint64_t seed);

/// Checks every coefficient against the Cauchy-type bound
/// |c_{Q,P}| <= M / (r^|Q| * sup|h^P|), with M a sampled sup of the function
/// the series was produced from.  `slack` absorbs sampling error.
bool cauchy_bound_check(const Series& f, const Lattice& lat,
                        const DomainSpec& dom, double M, double slack = 1e-6);

} // namespace torus_kam
