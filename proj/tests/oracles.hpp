#pragma once
// Brute-force reference implementations used only by the tests.

#include <cstdint>
#include <vector>

namespace oracle {

// Sum over all edge subsets of K_n that connect {0..n-1} of prod w_ij.
inline std::int64_t ursell_graph_sum(const std::vector<std::vector<int>>& w) {
  const int n = static_cast<int>(w.size());
  std::vector<std::pair<int, int>> edges;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) edges.emplace_back(i, j);
  std::int64_t total = 0;
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << edges.size()); ++mask) {
    std::vector<int> parent(n);
    for (int i = 0; i < n; ++i) parent[i] = i;
    auto find = [&](int x) {
      while (parent[x] != x) x = parent[x] = parent[parent[x]];
      return x;
    };
    std::int64_t prod = 1;
    int comps = n;
    for (std::size_t e = 0; e < edges.size(); ++e) {
      if (!(mask >> e & 1u)) continue;
      const auto [i, j] = edges[e];
      prod *= w[i][j];
      const int a = find(i), b = find(j);
      if (a != b) parent[a] = b, --comps;
    }
    if (comps == 1) total += prod;
  }
  return total;
}

// True when no bipartition of {0..n-1} into two nonempty parts has zero weight across it.
inline bool connected_by_bipartitions(const std::vector<std::vector<int>>& w) {
  const int n = static_cast<int>(w.size());
  if (n == 0) return false;
  for (unsigned side = 1; side < (1u << n) - 1; ++side) {
    if (!(side & 1u)) continue;  // fix element 0 on one side
    bool linked = false;
    for (int i = 0; i < n && !linked; ++i)
      for (int j = 0; j < n && !linked; ++j)
        if ((side >> i & 1u) && !(side >> j & 1u) && w[i][j] != 0) linked = true;
    if (!linked) return false;
  }
  return true;
}

}  // namespace oracle
