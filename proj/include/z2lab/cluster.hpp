#pragma once
// Cluster expansions of the Higgs phase (edge polymers on G1) and of the
// confinement phase (plaquette polymers on G2, high-temperature weights).

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "z2lab/constants.hpp"
#include "z2lab/lattice.hpp"
#include "z2lab/model.hpp"
#include "z2lab/polymer.hpp"

namespace z2lab {

enum class Phase { Higgs, Confinement };
enum class SeriesMode { LogZ, LogWilson, LogRho, Covariance };

struct Truncation {
  int n_max = 3;
  int size_max = 6;
};

class ClusterExpansion {
 public:
  ClusterExpansion(const Lattice& lat, Phase phase, int size_max);

  const Lattice& lattice() const { return lat_; }
  Phase phase() const { return phase_; }
  PolymerFamily& family() { return fam_; }
  const PolymerFamily& family() const { return fam_; }

  // Higgs: |supp eta| and |supp d eta|. Confinement: |supp omega| and delta(omega) edges.
  int support_size(int id) const { return fam_.size(id); }
  int differential_size(int id) const { return static_cast<int>(partner(id).size()); }
  const std::vector<int>& partner(int id) const;

  // Parity eta(gamma) for Higgs polymers.
  int evaluate(int id, const Bits& gamma_edges) const;
  // Polymer activity. Higgs: exp(-4 beta |d eta| - 4 kappa |eta|). Confinement: the
  // high-temperature weight relative to gamma (gamma_edges may be empty for gamma = 0).
  long double activity(int id, const ModelParams& p, const Bits* gamma_edges = nullptr) const;

  // Psi(S) = U(S) / prod n! * prod activity^n, optionally times rho(S(gamma)) in the Higgs phase.
  long double psi(const Cluster& c, const ModelParams& p, const Bits* gamma_edges = nullptr,
                  bool sign_by_gamma = false) const;
  std::int64_t ursell_of(const Cluster& c) const;
  // S(gamma) mod 2 (Higgs)
  int parity(const Cluster& c, const Bits& gamma_edges) const;
  // Cells that make a polymer "touch" gamma: its edges (Higgs) or their coboundary plaquettes.
  std::vector<int> touching_cells(const Path& gamma) const;
  bool touches(const Cluster& c, const Path& gamma) const;

  std::vector<Cluster> clusters(const std::vector<int>& seed_cells, Truncation t);

 private:
  const Lattice& lat_;
  Phase phase_;
  PolymerFamily fam_;
  mutable std::vector<std::vector<int>> partner_;
  mutable std::vector<char> partner_done_;
};

struct SeriesResult {
  double value = 0;
  double tail = 0;          // bound on the omitted clusters; +inf when out of the bound's domain
  bool tail_valid = false;
  std::size_t clusters = 0;
  std::string note;
};

// LogZ: log of the normalized polymer partition function. LogWilson: -log <W_gamma>.
// LogRho: log of the Marcu-Fredenhagen ratio. Covariance: 4 |sum over clusters seeing both paths|.
SeriesResult truncated_series(const Lattice& lat, Phase phase, SeriesMode mode, const ModelParams& p,
                              const std::vector<Path>& gammas, Truncation t, const ExpansionConstants& c,
                              double eps = 0.1, double slack = 0.0);

// sum |Psi_{beta,kappa}(S)| over clusters with e in supp S and ||S||_1 >= k_min (Higgs phase).
long double anchored_abs_sum(ClusterExpansion& ce, int edge, const ModelParams& p, int k_min, Truncation t);

// 4 max_e sum |Psi_{0, kappa0 + eps}| over the truncated enumeration on lat (indicative estimate).
double ceps_enumerated(const Lattice& lat, const ExpansionConstants& c, double eps, Truncation t);

// Truncated Kotecky-Preiss sum for a Higgs polymer with the given halo (closed G1
// neighbourhood): sum over interacting eta' with |eta'| <= size_max of exp(-4 kappa (1 - alpha) |eta'|).
long double kp_sum(const Graph& g1, const std::vector<int>& halo, double kappa, double alpha, int size_max);

}  // namespace z2lab
