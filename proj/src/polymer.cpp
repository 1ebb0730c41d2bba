#include "z2lab/polymer.hpp"

#include <algorithm>
#include <numeric>
#include <set>
#include <unordered_set>

#include <boost/container_hash/hash.hpp>

#include "z2lab/exact.hpp"

namespace z2lab {

int adjacency_cell_dim(AdjacencyKind kind) {
  return (kind == AdjacencyKind::G0 || kind == AdjacencyKind::G1) ? 1 : 2;
}

int degree_bound(AdjacencyKind kind, int m) {
  switch (kind) {
    case AdjacencyKind::G0: return 4 * m - 1;
    case AdjacencyKind::G1: return 6 * (m - 1);
    case AdjacencyKind::G2: return 8 * m - 12;
    case AdjacencyKind::G3: return 10 * (m - 2);
  }
  return 0;
}

int Graph::max_degree() const {
  std::size_t d = 0;
  for (const auto& n : nbrs) d = std::max(d, n.size());
  return static_cast<int>(d);
}

bool Graph::adjacent(int a, int b) const { return std::binary_search(nbrs[a].begin(), nbrs[a].end(), b); }

Graph adjacency(const Lattice& lat, AdjacencyKind kind) {
  const int k = adjacency_cell_dim(kind);
  const int n = lat.count(k);
  std::vector<std::set<int>> adj(n);
  auto link_all = [&](const std::vector<int>& group) {
    for (int a : group)
      for (int b : group)
        if (a != b) adj[a].insert(b);
  };
  switch (kind) {
    case AdjacencyKind::G0:
      for (int v = 0; v < lat.count(0); ++v) {
        std::vector<int> g;
        for (const auto& inc : lat.incident_edges(v)) g.push_back(inc.cell);
        link_all(g);
      }
      break;
    case AdjacencyKind::G1:
    case AdjacencyKind::G3:
      for (int c = 0; c < lat.count(k + 1); ++c) {
        std::vector<int> g;
        for (const auto& inc : lat.boundary(k + 1, c)) g.push_back(inc.cell);
        link_all(g);
      }
      break;
    case AdjacencyKind::G2:
      for (int e = 0; e < lat.count(1); ++e) {
        std::vector<int> g;
        for (const auto& inc : lat.coboundary(1, e)) g.push_back(inc.cell);
        link_all(g);
      }
      break;
  }
  Graph g;
  g.nbrs.resize(n);
  for (int i = 0; i < n; ++i) g.nbrs[i].assign(adj[i].begin(), adj[i].end());
  return g;
}

// ---------------------------------------------------------------------------
// Redelmeier enumeration

namespace {

struct Redelmeier {
  const Graph& g;
  int max_size;
  const std::function<void(const std::vector<int>&)>& visit;
  std::vector<char> seen;
  std::vector<int> current;
  const std::function<bool(const std::vector<int>&)>* descend = nullptr;

  void grow(std::vector<int> untried) {
    while (!untried.empty()) {
      const int v = untried.back();
      untried.pop_back();
      current.push_back(v);
      visit(current);
      if (static_cast<int>(current.size()) < max_size && (!descend || (*descend)(current))) {
        std::vector<int> next = untried, fresh;
        for (int w : g.nbrs[v])
          if (!seen[w]) seen[w] = 1, fresh.push_back(w), next.push_back(w);
        grow(std::move(next));
        for (int w : fresh) seen[w] = 0;
      }
      current.pop_back();
    }
  }
};

}  // namespace

void for_each_connected_set(const Graph& g, int anchor, int max_size,
                            const std::function<void(const std::vector<int>&)>& visit) {
  if (max_size < 1) return;
  Redelmeier r{g, max_size, visit, std::vector<char>(g.size(), 0), {}};
  r.seen[anchor] = 1;
  r.grow({anchor});
}

std::vector<std::vector<int>> enumerate_polymers(const Graph& g, int anchor, int max_size) {
  if (max_size > kPolymerBudget) throw BudgetError("polymer size exceeds enumeration budget");
  std::vector<std::vector<int>> out;
  for_each_connected_set(g, anchor, max_size, [&](const std::vector<int>& s) {
    auto sorted = s;
    std::sort(sorted.begin(), sorted.end());
    out.push_back(std::move(sorted));
  });
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    return a.size() != b.size() ? a.size() < b.size() : a < b;
  });
  return out;
}

std::vector<std::vector<int>> enumerate_polymers(const Lattice& lat, AdjacencyKind kind, int anchor, int max_size) {
  return enumerate_polymers(adjacency(lat, kind), anchor, max_size);
}

std::vector<std::uint64_t> count_connected_sets(const Graph& g, int anchor, int max_size) {
  std::vector<std::uint64_t> counts(max_size + 1, 0);
  for_each_connected_set(g, anchor, max_size, [&](const std::vector<int>& s) { ++counts[s.size()]; });
  return counts;
}

std::vector<std::uint64_t> count_sets_meeting(const Graph& g, const std::vector<int>& hit, int max_size) {
  std::vector<std::uint64_t> counts(max_size + 1, 0);
  if (max_size < 1) return counts;
  std::vector<int> h = hit;
  std::sort(h.begin(), h.end());
  h.erase(std::unique(h.begin(), h.end()), h.end());
  const std::function<void(const std::vector<int>&)> tally = [&](const std::vector<int>& s) { ++counts[s.size()]; };
  // each set is counted at its smallest vertex in hit; smaller hit vertices are excluded
  Redelmeier r{g, max_size, tally, std::vector<char>(g.size(), 0), {}};
  for (int v : h) {
    r.seen[v] = 1;
    r.grow({v});
  }
  return counts;
}

void for_each_set_meeting(const Graph& g, const std::vector<int>& hit, int max_size,
                          const std::function<void(const std::vector<int>&)>& visit,
                          const std::function<bool(const std::vector<int>&)>& descend) {
  if (max_size < 1) return;
  std::vector<int> h = hit;
  std::sort(h.begin(), h.end());
  h.erase(std::unique(h.begin(), h.end()), h.end());
  Redelmeier r{g, max_size, visit, std::vector<char>(g.size(), 0), {}};
  if (descend) r.descend = &descend;
  for (int v : h) {
    r.seen[v] = 1;
    r.grow({v});
  }
}

bool is_connected(const Graph& g, const std::vector<int>& vertices) {
  if (vertices.empty()) return false;
  std::set<int> rest(vertices.begin(), vertices.end());
  std::vector<int> stack{*rest.begin()};
  rest.erase(rest.begin());
  while (!stack.empty()) {
    const int v = stack.back();
    stack.pop_back();
    for (int w : g.nbrs[v])
      if (rest.erase(w)) stack.push_back(w);
  }
  return rest.empty();
}

// ---------------------------------------------------------------------------
// Ursell functions

std::int64_t ursell(const std::vector<std::vector<int>>& w) {
  const int n = static_cast<int>(w.size());
  if (n == 0) return 0;
  if (n > kUrsellBudget) throw BudgetError("Ursell function: too many polymers");
  const unsigned full = (1u << n) - 1;
  // f(A): sum over all graphs on A; c(A): over connected graphs on A
  std::vector<std::int64_t> f(full + 1, 1), c(full + 1, 0);
  for (unsigned A = 1; A <= full; ++A) {
    const int top = 31 - __builtin_clz(A);
    const unsigned rest = A & ~(1u << top);
    std::int64_t prod = f[rest];
    for (int j = 0; j < top; ++j)
      if (rest >> j & 1u) prod *= 1 + w[top][j];
    f[A] = prod;
  }
  for (unsigned A = 1; A <= full; ++A) {
    const unsigned low = A & -A;
    std::int64_t v = f[A];
    // proper subsets B of A containing the lowest element
    const unsigned others = A & ~low;
    for (unsigned sub = (others - 1) & others;; sub = (sub - 1) & others) {
      const unsigned B = sub | low;
      if (B != A) v -= c[B] * f[A & ~B];
      if (sub == 0) break;
    }
    c[A] = v;
  }
  return c[full];
}

// ---------------------------------------------------------------------------
// Polymer family

PolymerFamily::PolymerFamily(Graph g, int size_max) : g_(std::move(g)), size_max_(size_max) {
  if (size_max > kPolymerBudget) throw BudgetError("polymer size exceeds enumeration budget");
  by_cell_.resize(g_.size());
  by_cell_done_.assign(g_.size(), 0);
}

int PolymerFamily::intern(std::vector<int> cells) {
  auto [it, fresh] = ids_.try_emplace(cells, count());
  if (fresh) {
    std::set<int> h(cells.begin(), cells.end());
    for (int c : cells) h.insert(g_.nbrs[c].begin(), g_.nbrs[c].end());
    halo_.emplace_back(h.begin(), h.end());
    cells_.push_back(std::move(cells));
  }
  return it->second;
}

const std::vector<int>& PolymerFamily::containing(int cell) {
  if (!by_cell_done_[cell]) {
    std::vector<int> ids;
    for (auto& s : enumerate_polymers(g_, cell, size_max_)) ids.push_back(intern(std::move(s)));
    by_cell_[cell] = std::move(ids);
    by_cell_done_[cell] = 1;
  }
  return by_cell_[cell];
}

bool PolymerFamily::interact(int a, int b) const {
  const auto& h = halo_[a];
  for (int c : cells_[b])
    if (std::binary_search(h.begin(), h.end(), c)) return true;
  return false;
}

std::vector<int> PolymerFamily::interacting(int id, int max_size) {
  std::vector<int> out;
  const std::vector<int> h = halo_[id];  // containing() may grow halo_
  for (int c : h)
    for (int q : containing(c))
      if (size(q) <= max_size) out.push_back(q);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

// ---------------------------------------------------------------------------
// Clusters

std::vector<std::vector<int>> interaction_weights(const PolymerFamily& fam, const Cluster& c) {
  const int n = static_cast<int>(c.ids.size());
  std::vector<std::vector<int>> w(n, std::vector<int>(n, 0));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < i; ++j) w[i][j] = w[j][i] = fam.interact(c.ids[i], c.ids[j]) ? -1 : 0;
  return w;
}

bool is_cluster(const PolymerFamily& fam, const Cluster& c) {
  const int n = static_cast<int>(c.ids.size());
  if (n == 0) return false;
  std::vector<char> reached(n, 0);
  std::vector<int> stack{0};
  reached[0] = 1;
  int count = 1;
  while (!stack.empty()) {
    const int i = stack.back();
    stack.pop_back();
    for (int j = 0; j < n; ++j)
      if (!reached[j] && fam.interact(c.ids[i], c.ids[j])) reached[j] = 1, ++count, stack.push_back(j);
  }
  return count == n;
}

std::int64_t multiplicity_factorial(const Cluster& c) {
  std::int64_t r = 1, run = 0;
  for (std::size_t i = 0; i < c.ids.size(); ++i) {
    run = (i > 0 && c.ids[i] == c.ids[i - 1]) ? run + 1 : 1;
    r *= run;
  }
  return r;
}

int cluster_size(const PolymerFamily& fam, const Cluster& c) {
  int s = 0;
  for (int id : c.ids) s += fam.size(id);
  return s;
}

namespace {
struct VecHash {
  std::size_t operator()(const std::vector<int>& v) const { return boost::hash_range(v.begin(), v.end()); }
};
}  // namespace

std::vector<Cluster> enumerate_clusters(PolymerFamily& fam, const std::vector<int>& seed_cells, int n_max,
                                        int size_max) {
  if (size_max > fam.size_max()) throw BudgetError("cluster size exceeds the polymer family's budget");
  if (n_max > kUrsellBudget) throw BudgetError("cluster order exceeds the Ursell budget");
  std::vector<Cluster> out;
  if (n_max < 1 || size_max < 1) return out;

  std::vector<int> seeds;
  for (int c : seed_cells)
    for (int id : fam.containing(c))
      if (fam.size(id) <= size_max) seeds.push_back(id);
  std::sort(seeds.begin(), seeds.end());
  seeds.erase(std::unique(seeds.begin(), seeds.end()), seeds.end());

  std::vector<Cluster> level;
  for (int id : seeds) level.push_back(Cluster{{id}});
  std::unordered_set<std::vector<int>, VecHash> seen;
  for (const auto& c : level) seen.insert(c.ids);

  for (int n = 1; !level.empty(); ++n) {
    out.insert(out.end(), level.begin(), level.end());
    if (n == n_max) break;
    std::vector<Cluster> next;
    for (const auto& c : level) {
      const int room = size_max - cluster_size(fam, c);
      if (room < 1) continue;
      std::vector<int> cand;
      for (std::size_t i = 0; i < c.ids.size(); ++i) {
        if (i > 0 && c.ids[i] == c.ids[i - 1]) continue;
        const auto nb = fam.interacting(c.ids[i], room);
        cand.insert(cand.end(), nb.begin(), nb.end());
      }
      std::sort(cand.begin(), cand.end());
      cand.erase(std::unique(cand.begin(), cand.end()), cand.end());
      for (int q : cand) {
        Cluster d = c;
        d.ids.insert(std::upper_bound(d.ids.begin(), d.ids.end(), q), q);
        if (seen.insert(d.ids).second) next.push_back(std::move(d));
      }
    }
    level = std::move(next);
  }
  return out;
}

}  // namespace z2lab
