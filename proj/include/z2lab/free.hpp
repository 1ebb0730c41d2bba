#pragma once
// Free-phase double expansion: cycle polymers (closed G0-connected edge sets) and
// surface polymers (closed G3-connected 2-forms) with the mixed linking interaction,
// exact restricted sums on tiny lattices, completions of open lines, and the bound
// evaluators behind the decay of the Marcu-Fredenhagen ratio.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "z2lab/constants.hpp"
#include "z2lab/lattice.hpp"
#include "z2lab/model.hpp"
#include "z2lab/polymer.hpp"

namespace z2lab {

enum class FreeFamily { Cycle, Surface };

// Reflection x2 -> -x2 followed by orientation reversal. Throws LatticeError when the
// reflected path leaves the box or an endpoint lies off the x2 = 0 hyperplane.
Path mirrored_path(const Lattice& lat, const Path& g);
// Reflection of an unoriented edge set.
Bits mirrored_edges(const Lattice& lat, const Bits& edges);

inline constexpr int kFreePolymerBudget = 12;
inline constexpr int kCompletionBudget = 24;

// Cycle: closed connected edge sets through the anchor vertex. Surface: closed connected
// 2-forms containing the anchor plaquette. Sorted cell lists, by size then lexicographically.
std::vector<std::vector<int>> enumerate_free_polymers(const Lattice& lat, FreeFamily family, int anchor,
                                                      int max_size);

// 1 when the closed 2-form evaluates to -1 on a spanning surface of the mod-2 cycle.
int linking_parity(const Lattice& lat, const Bits& surface, const Bits& cycle);
bool is_cycle_mod2(const Lattice& lat, const Bits& edges);
bool is_closed_form(const Lattice& lat, const Bits& plaquettes);

struct FreePolymer {
  FreeFamily family;
  std::vector<int> cells;  // edges or plaquettes, sorted
};

// Every polymer of a (small) lattice up to the size caps, with the pairwise interaction
// zeta: -1 for touching polymers of the same family (shared vertex / G3-adjacent),
// -2 for a linked cycle-surface pair, 0 otherwise.
class FreeGas {
 public:
  FreeGas(const Lattice& lat, int cycle_max, int surface_max);

  const Lattice& lattice() const { return lat_; }
  int count() const { return static_cast<int>(polys_.size()); }
  const FreePolymer& polymer(int id) const { return polys_[id]; }
  int size(int id) const { return static_cast<int>(polys_[id].cells.size()); }
  int weight(int a, int b) const { return zeta_[a][b]; }
  const std::vector<int>& vertices(int id) const { return verts_[id]; }
  Bits support(int id) const;

 private:
  const Lattice& lat_;
  std::vector<FreePolymer> polys_;
  std::vector<std::vector<int>> verts_;
  std::vector<std::vector<int>> zeta_;
};

// Ursell function with the mixed weights.
std::int64_t ursell_mixed(const FreeGas& gas, const Cluster& c);
// Every cluster (connected under zeta) with at most n_max polymers and total size <= size_max.
std::vector<Cluster> enumerate_mixed_clusters(const FreeGas& gas, int n_max, int size_max);

// U(S)/prod n! times prod over surfaces rho(omega(q_gamma)) e^{-4 beta |omega|} and over
// cycles tanh(2 kappa)^{|gamma'|} 1(gamma' shares no vertex with gamma0). gamma is a mod-2 cycle.
long double psi_free(const FreeGas& gas, const Cluster& c, const ModelParams& p, const Bits& gamma,
                     const Bits& gamma0);
// Sum of psi_free over the clusters of the truncation.
long double free_log_series(const FreeGas& gas, const ModelParams& p, const Bits& gamma, const Bits& gamma0,
                            int n_max, int size_max);

// Exact restricted sums on a tiny lattice, via the cycle space and the closed 2-forms.
class FreeExact {
 public:
  explicit FreeExact(const Lattice& lat);

  // sum over closed tau and cycles c sharing no vertex with gamma0 of
  // e^{-4 beta |tau|} tanh(2 kappa)^{|c|} rho(tau(q_{gamma + c})); gamma a mod-2 cycle.
  long double z(const ModelParams& p, const Bits& gamma, const Bits& gamma0) const;
  // Unrestricted sum with an arbitrary (open or closed) path: tanh(2 kappa)^{|gamma + c|} rho(tau(q_c)).
  long double z_open(const ModelParams& p, const Bits& gamma) const;

 private:
  std::uint32_t coords(const Bits& cycle) const;
  std::vector<long double> surface_weights(const ModelParams& p) const;

  const Lattice& lat_;
  int dim_ = 0;
  std::vector<Bits> cycles_;        // index = coefficient vector in the cycle basis
  std::vector<Bits> cycle_verts_;   // vertex support of each cycle
  std::vector<std::uint32_t> tau_syndrome_;
  std::vector<int> tau_size_;
  std::vector<Bits> edge_rows_;     // per edge: membership in each basis cycle
};

struct CompletionList {
  std::vector<Bits> completions;             // sorted by length
  std::vector<std::uint64_t> count_by_length;  // index = length
  double tail = 0;                           // sum_{j > L_max} (2m tanh 2kappa)^j
  bool tail_divergent = false;
};

// Connected edge sets gamma0 with gamma + gamma0 closed and |gamma0| <= L_max.
CompletionList decompose_open_line(const Lattice& lat, const Path& open, int L_max, double kappa);

enum class FreeBoundKind { PathPath, SpinSpin, PathSpin, SpinPath, Gamma0Term, Gamma0Term2, Gamma0Term4, KPfeasible };

struct FreeBoundArgs {
  int m = 3;
  double alpha = 0.5;  // the bound exponent is a = 1 - alpha
  double beta = 0;
  double kappa = 0;
  double D0 = -1;      // < 0: measured with exponent m-1
  int power = -1;      // j-power multiplying D0; < 0: max(3, m-1)
  int length = 1;      // |gamma| for the gamma0 terms
  double eps = 0.1;    // split of the fourth gamma0 term
};

struct FreeBoundResult {
  double value = 0;
  bool divergent = false;
  bool feasible = false;  // KPfeasible; Gamma0Term4: its own preconditions
  std::string note;
};

// PathPath/PathSpin: per unit length of the cycle; SpinSpin/SpinPath: per plaquette.
FreeBoundResult free_bound_eval(FreeBoundKind which, const FreeBoundArgs& args);
FreeBoundKind parse_free_bound_kind(const std::string& s);
const char* free_bound_name(FreeBoundKind k);

struct FreeReportRow {
  int length = 0;
  double count_ceiling = 0;      // (2m)^L
  double count_connected = 0;    // 2m (e M0)^{L-1}
  long long enumerated = -1;     // exact count on the lattice when enumerated
  double weight = 0;             // tanh(2 kappa)^L
  double a0 = 0, a1 = 0, a2 = 0;  // bounds on |A0|, |A1|, |A2|
  double contribution = 0;       // count_ceiling * weight * exp((a0+a1+a2)/2)
};

struct FreeExactBranch {
  double ratio_direct = 0;       // from the four exact check-Z values
  double ratio_decomposed = 0;   // (sum over completions)^2
  double ratio_reference = 0;    // exact enumeration of the model
  double max_rel_error = 0;
  std::size_t completions = 0;
};

struct FreeReportOptions {
  double alpha = 0.5;
  double eps = 0.1;
  int rows = 8;
  int enumerate_max = 0;       // enumerate completions on the lattice up to this length (0: skip)
  bool exact = false;          // tiny lattice: compute the exact branch
  bool require_admissible = true;
  double D0 = -1;
  int power = -1;
};

struct FreeReport {
  ModelParams params;
  int m = 3, R = 1, T = 1;
  double alpha = 0.5, eps = 0.1;
  bool admissible = false;
  bool gamma0_term4_ok = false;
  std::vector<FreeReportRow> rows;
  double ratio_q = 0;               // per-length growth ratio of the walk-count series
  double sqrt_rho_upper = 0;        // sum over all lengths >= T (walk count (2m)^L)
  double rho_upper = 0;
  double ratio_q_connected = 0;
  double rho_upper_connected = 0;   // same with the connected-set count ceiling
  bool divergent = false, divergent_connected = false;
  std::optional<FreeExactBranch> exact;
  std::string note;
};

FreeReport mf_ratio_free_report(const Lattice& lat, const ModelParams& p, int R, int T,
                                const FreeReportOptions& opt = {});

}  // namespace z2lab
