#pragma once

#include <array>
#include <cstdint>
#include <numeric>
#include <span>

namespace torus_kam {

inline constexpr int kMaxDims = 8; // n + d <= 8

/// Combined multi-index (Q, P): the first d slots hold the vertical exponents
/// Q in N^d, the next n slots the Laurent exponents P in Z^n.  Array ordering
/// is lexicographic in (Q, P), which fixes a deterministic iteration order.
struct MultiIndex {
  std::array<std::int16_t, kMaxDims> v{};

  auto operator<=>(const MultiIndex&) const = default;
};

inline MultiIndex make_index(std::span<const int> Q, std::span<const int> P) {
  MultiIndex k;
  std::size_t pos = 0;
  for (int q : Q) k.v[pos++] = static_cast<std::int16_t>(q);
  for (int p : P) k.v[pos++] = static_cast<std::int16_t>(p);
  return k;
}

inline int order_q(const MultiIndex& k, int d) {
  int s = 0;
  for (int i = 0; i < d; ++i) s += k.v[std::size_t(i)];
  return s;
}

inline int max_abs_p(const MultiIndex& k, int n, int d) {
  int m = 0;
  for (int i = 0; i < n; ++i) {
    const int a = std::abs(int(k.v[std::size_t(d + i)]));
    if (a > m) m = a;
  }
  return m;
}

inline int abs_p_l1(const MultiIndex& k, int n, int d) {
  int s = 0;
  for (int i = 0; i < n; ++i) s += std::abs(int(k.v[std::size_t(d + i)]));
  return s;
}

inline MultiIndex add_index(const MultiIndex& a, const MultiIndex& b, int n,
                            int d) {
  MultiIndex r;
  for (int i = 0; i < n + d; ++i)
    r.v[std::size_t(i)] =
        static_cast<std::int16_t>(a.v[std::size_t(i)] + b.v[std::size_t(i)]);
  return r;
}

} // namespace torus_kam
