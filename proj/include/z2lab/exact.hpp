#pragma once
// Brute-force enumeration on tiny lattices.

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <vector>

#include "z2lab/lattice.hpp"
#include "z2lab/model.hpp"

namespace z2lab {

inline constexpr int kEnumBudgetBits = 26;

class BudgetError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

class DenominatorZero : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Named tiny lattices used throughout the tests.
namespace tiny {
Lattice single_edge();       // 2 vertices, 1 edge
Lattice single_plaquette();  // 4 edges, 1 plaquette, no cubes
Lattice cube2();             // 2x2x2 vertices: 12 edges, 6 plaquettes, 1 cube
Lattice slab();              // 2x3x2 vertices, x2 symmetric: hosts build_line_pair(1,1)
}  // namespace tiny

class TinyLattice {
 public:
  explicit TinyLattice(Lattice lat);
  const Lattice& lattice() const { return lat_; }

 private:
  Lattice lat_;
};

enum class Ensemble { Full, Unitary };

struct ExactResult {
  double value = 0;
  double log_value = 0;
  std::uint64_t terms = 0;
};

struct WilsonExact {
  ExactResult Z;        // absolute partition function exp(-action) summed
  double mean = 0;      // <W>
  double neg_log = 0;   // -log <W>, computed without cancellation
  long double plus = 0, minus = 0;  // relative weights of W = +1 / W = -1
};

// Generic Gray-code engine. Each "unit" is a parity cell belonging to a weight
// category; each variable toggles a set of units and flips observable signs.
struct EnumSpec {
  std::vector<int> unit_category;
  std::vector<char> unit_init;
  int n_categories = 0;
  std::vector<std::vector<int>> var_units;
  std::vector<std::uint32_t> var_obs;
  int n_obs = 0;
};

struct Histogram {
  std::vector<int> dims;  // per category: max count + 1
  int n_obs = 0;
  std::vector<std::uint64_t> counts;  // mixed radix (categories..., pattern)
  std::uint64_t terms = 0;

  // Sum of count * prod_c w[c]^{n_c} over patterns accepted by keep.
  long double weighted(const std::vector<long double>& w, const std::function<bool(std::uint32_t)>& keep) const;
};

Histogram enumerate(const EnumSpec& spec, int threads = 1);

std::vector<WilsonExact> exact_expectations(const TinyLattice& lat, const ModelParams& p, const std::vector<Path>& gammas,
                                            Ensemble ensemble, int threads = 1);
WilsonExact exact_expectation(const TinyLattice& lat, const ModelParams& p, const Path& gamma, Ensemble ensemble);

struct MfExact {
  double ratio = 0;
  double log_ratio = 0;
};
MfExact exact_mf_ratio(const TinyLattice& lat, const ModelParams& p, const Path& g1, const Path& g2);

std::vector<Bits> cycle_space(const Lattice& lat, int max_dim = 25);
std::vector<Bits> cycle_basis(const Lattice& lat);
std::vector<Bits> closed_two_forms(const Lattice& lat, int max_dim = 25);
std::vector<Bits> closed_two_form_basis(const Lattice& lat);

enum class IdentityKind { UnitaryGauge, HighTempConf, HighTempFree };
enum class PrefactorConvention { Once, Twice };

// Exact high-temperature representation of <W_gamma> in the confinement expansion.
double ht_conf_expectation(const TinyLattice& lat, const ModelParams& p, const Path& gamma,
                           PrefactorConvention conv = PrefactorConvention::Once);

// Shifted free-phase sum: sum_{tau closed} sum_{c cycle} e^{-4 beta |tau|} t^{|gamma + c|} rho(tau(q_c)).
long double free_check_z(const Lattice& lat, const ModelParams& p, const Path& gamma);

double verify_identity(IdentityKind kind, const TinyLattice& lat, const ModelParams& p, const Path& gamma);

}  // namespace z2lab
