#pragma once

#include <algorithm>
#include <numeric>
#include <vector>

namespace ustar {

namespace detail {
inline int permutation_sign(const std::vector<int>& p) {
  int inversions = 0;
  for (std::size_t i = 0; i < p.size(); ++i)
    for (std::size_t j = i + 1; j < p.size(); ++j)
      if (p[i] > p[j]) ++inversions;
  return (inversions % 2 == 0) ? 1 : -1;
}
}  // namespace detail

template <typename T>
void set_alternating(Tensor<T>& t, std::span<const int> sorted, const T& v) {
  const int p = static_cast<int>(sorted.size());
  std::vector<int> perm(p);
  std::iota(perm.begin(), perm.end(), 0);
  std::vector<int> idx(p);
  const T neg = -v;
  do {
    for (int a = 0; a < p; ++a) idx[a] = sorted[perm[a]];
    t.at(idx) = detail::permutation_sign(perm) > 0 ? v : neg;
  } while (std::next_permutation(perm.begin(), perm.end()));
}

/// Calls f(tuple) for every strictly increasing index tuple of length p.
template <typename F>
void for_each_increasing(int n, int p, F&& f) {
  if (p == 0) {
    std::vector<int> empty;
    f(std::span<const int>(empty));
    return;
  }
  std::vector<int> idx(p);
  std::iota(idx.begin(), idx.end(), 0);
  if (p > n) return;
  while (true) {
    f(std::span<const int>(idx));
    int a = p - 1;
    while (a >= 0 && idx[a] == n - p + a) --a;
    if (a < 0) return;
    ++idx[a];
    for (int b = a + 1; b < p; ++b) idx[b] = idx[b - 1] + 1;
  }
}

}  // namespace ustar
