#pragma once
// Adjacency graphs on cells, connected-set (polymer) enumeration, Ursell
// functions and anchored cluster enumeration for hard-core polymer gases.

#include <cstdint>
#include <functional>
#include <map>
#include <vector>

#include "z2lab/lattice.hpp"

namespace z2lab {

enum class AdjacencyKind {
  G0,  // edges sharing an endpoint
  G1,  // edges co-bounding a plaquette
  G2,  // plaquettes sharing a boundary edge
  G3,  // plaquettes co-bounding a cube
};

// Cell dimension the graph lives on.
int adjacency_cell_dim(AdjacencyKind kind);
// Degree ceiling M0..M3 as a function of m.
int degree_bound(AdjacencyKind kind, int m);

struct Graph {
  std::vector<std::vector<int>> nbrs;  // sorted, no self loops

  int size() const { return static_cast<int>(nbrs.size()); }
  int max_degree() const;
  bool adjacent(int a, int b) const;
};

Graph adjacency(const Lattice& lat, AdjacencyKind kind);

inline constexpr int kPolymerBudget = 8;
inline constexpr int kUrsellBudget = 7;

// Every connected vertex set of size <= max_size containing anchor, visited exactly once
// (Redelmeier's algorithm). The callback sees the set in insertion order.
void for_each_connected_set(const Graph& g, int anchor, int max_size,
                            const std::function<void(const std::vector<int>&)>& visit);
// Sorted vertex sets; throws BudgetError when max_size exceeds kPolymerBudget.
std::vector<std::vector<int>> enumerate_polymers(const Graph& g, int anchor, int max_size);
std::vector<std::vector<int>> enumerate_polymers(const Lattice& lat, AdjacencyKind kind, int anchor, int max_size);
// counts[k] = number of connected sets of size k containing anchor, k = 0..max_size.
std::vector<std::uint64_t> count_connected_sets(const Graph& g, int anchor, int max_size);

// counts[k] = number of connected sets of size k meeting the vertex set hit.
std::vector<std::uint64_t> count_sets_meeting(const Graph& g, const std::vector<int>& hit, int max_size);

// Visits every connected set of size <= max_size meeting hit exactly once. When descend is
// given and returns false for the current set, none of its proper supersets are visited
// (so it must only reject sets with no admissible extension).
void for_each_set_meeting(const Graph& g, const std::vector<int>& hit, int max_size,
                          const std::function<void(const std::vector<int>&)>& visit,
                          const std::function<bool(const std::vector<int>&)>& descend = {});

bool is_connected(const Graph& g, const std::vector<int>& vertices);

// Connected-graph sum over a labeled list of n polymers: sum over connected graphs G on
// {0..n-1} of prod_{ij in G} w[i][j]. HardCore uses w = -1 for interacting pairs;
// FreeMixed additionally uses -2 for linked surface/cycle pairs. Budget n <= kUrsellBudget.
std::int64_t ursell(const std::vector<std::vector<int>>& w);

// Polymers of a hard-core gas over one adjacency graph, interned by support.
// Two polymers interact when their union is connected (shared or adjacent cells).
class PolymerFamily {
 public:
  PolymerFamily(Graph g, int size_max);

  const Graph& graph() const { return g_; }
  int size_max() const { return size_max_; }
  int count() const { return static_cast<int>(cells_.size()); }
  const std::vector<int>& cells(int id) const { return cells_[id]; }
  int size(int id) const { return static_cast<int>(cells_[id].size()); }
  // Ids of all polymers containing cell, lazily enumerated.
  const std::vector<int>& containing(int cell);
  // Closed neighbourhood of the polymer's support (sorted).
  const std::vector<int>& halo(int id) const { return halo_[id]; }
  bool interact(int a, int b) const;
  // Polymers of size <= max_size interacting with id.
  std::vector<int> interacting(int id, int max_size);

 private:
  int intern(std::vector<int> cells);

  Graph g_;
  int size_max_;
  std::vector<std::vector<int>> cells_, halo_;
  std::map<std::vector<int>, int> ids_;
  std::vector<std::vector<int>> by_cell_;
  std::vector<char> by_cell_done_;
};

// Multiset of polymer ids in non-decreasing order.
struct Cluster {
  std::vector<int> ids;
  bool operator==(const Cluster&) const = default;
};

// Interaction matrix (-1 / 0) of the labeled polymer list underlying a cluster.
std::vector<std::vector<int>> interaction_weights(const PolymerFamily& fam, const Cluster& c);
bool is_cluster(const PolymerFamily& fam, const Cluster& c);
// prod over distinct polymers of n!
std::int64_t multiplicity_factorial(const Cluster& c);
// sum_eta n(eta) |supp eta|
int cluster_size(const PolymerFamily& fam, const Cluster& c);

// All clusters with n <= n_max and total size <= size_max containing at least one polymer
// that meets a seed cell; each cluster appears once, in deterministic order.
std::vector<Cluster> enumerate_clusters(PolymerFamily& fam, const std::vector<int>& seed_cells, int n_max,
                                        int size_max);

}  // namespace z2lab
