#pragma once
// Markov chain sampling of the unitary-gauge measure: single-edge heat bath (or
// Metropolis) plus vertex moves sigma -> sigma + d(1_v), jackknife estimators for
// Wilson lines, the Marcu-Fredenhagen ratio and covariances, and parameter scans.

#include <cstdint>
#include <functional>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "z2lab/lattice.hpp"
#include "z2lab/model.hpp"

namespace z2lab {

class ConfigError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

// splitmix64
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : s_(seed) {}
  std::uint64_t next() {
    std::uint64_t z = (s_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }
  // uniform on [0,1) with 53 random bits
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
  std::uint64_t state() const { return s_; }

 private:
  std::uint64_t s_;
};

// Seed of chain c derived from a run seed.
std::uint64_t chain_seed(std::uint64_t seed, int chain);

enum class UpdateKind { HeatBath, Metropolis };

struct RunConfig {
  long sweeps = 10000;      // total, including burn-in
  long burn_in = -1;        // < 0: 10% of sweeps
  int measure_every = 1;
  int bins = 50;
  std::uint64_t seed = 1;
  UpdateKind update = UpdateKind::HeatBath;
  bool vertex_moves = true;
  bool rao_blackwell = true;  // replace isolated edges by their conditional expectation
  bool translate = false;     // average line pairs over translates away from the wall
  int margin = 2;             // translates keep this l-infinity distance from the wall
  int chains = 1;
  int threads = 1;

  long burn() const { return burn_in < 0 ? sweeps / 10 : burn_in; }
  void validate() const;
};

struct EstimatorResult {
  double mean = 0;
  double stderr_ = 0;
  long n_samples = 0;
  int n_bins = 0;
  double autocorr_hint = 0;  // bin variance relative to the naive i.i.d. variance
};

// Cached neighbourhood tables of a lattice.
struct Topology {
  explicit Topology(const Lattice& lat);

  int E = 0, V = 0, max_plaq = 0, max_deg = 0;
  std::vector<std::int32_t> others;   // E x max_plaq x 3: the other edges of each plaquette at e
  std::vector<std::uint8_t> nplaq;    // plaquettes containing e
  std::vector<std::int32_t> vedges;   // V x max_deg incident edges
  std::vector<std::uint8_t> vdeg;
  std::vector<std::int32_t> prev;     // previous edge along the same axis line, -1 at the start
};

class Sampler {
 public:
  Sampler(const Lattice& lat, std::uint64_t seed);
  Sampler(std::shared_ptr<const Topology> topo, std::uint64_t seed);

  void sweep(const ModelParams& p, UpdateKind kind = UpdateKind::HeatBath, bool vertex_moves = true);
  long sweeps() const { return sweeps_; }
  const std::vector<std::uint8_t>& sigma() const { return s_; }
  std::vector<std::uint8_t>& sigma() { return s_; }
  Form form(const Lattice& lat) const;
  const Topology& topology() const { return *topo_; }
  Rng& rng() { return rng_; }

  // E[rho(sigma_e) | all other edges] for every edge.
  void edge_expectations(const ModelParams& p, std::vector<double>& f) const;
  double edge_expectation(const ModelParams& p, int e) const;

 private:
  struct Tables;
  const Tables& tables(const ModelParams& p);

  std::shared_ptr<const Topology> topo_;
  std::vector<std::uint8_t> s_;
  Rng rng_;
  long sweeps_ = 0;
  std::shared_ptr<Tables> tab_;
};

// Jackknife over consecutive bins of a scalar series.
EstimatorResult jackknife_mean(const std::vector<double>& samples, int bins);
// Jackknife of f(bin-mean vector) over already binned data (rows = bins).
EstimatorResult jackknife(const std::vector<std::vector<double>>& bin_means, long n_samples,
                          const std::function<double(const std::vector<double>&)>& f);

// <W_gamma> for each path, all on the same trajectories.
std::vector<EstimatorResult> estimate(const Lattice& lat, const ModelParams& p, const std::vector<Path>& observables,
                                      const RunConfig& cfg);

enum class RatioFlag { Ok, Unresolved, NonPositive };
const char* ratio_flag_name(RatioFlag f);

struct RatioResult {
  EstimatorResult rho, log_rho;
  EstimatorResult w1, w2, w12;
  RatioFlag flag = RatioFlag::Ok;
  long translates = 1;
};

RatioResult estimate_mf_ratio(const Lattice& lat, const ModelParams& p, const Path& g1, const Path& g2,
                              const RunConfig& cfg);
// Several line pairs (from build_line_pair) measured on the same trajectories.
std::vector<RatioResult> estimate_mf_ratios(const Lattice& lat, const ModelParams& p,
                                            const std::vector<std::pair<int, int>>& sizes, const RunConfig& cfg);

struct CovariancePoint {
  int separation = 0;
  int distance = 0;
  EstimatorResult cov;
  bool resolved = false;  // stderr > 0, |cov| > 3 stderr and above rounding level
};

struct CorrelationTable {
  std::vector<CovariancePoint> points;
  double rate = 0;       // -slope of log|cov| against distance over resolved points
  int fitted = 0;        // number of resolved points used
  bool fit_ok = false;   // at least two resolved points
};

// Covariance of W_gamma and its translate by separation * e_axis.
CorrelationTable correlation_decay(const Lattice& lat, const ModelParams& p, const Path& templ, int axis,
                                   const std::vector<int>& separations, const RunConfig& cfg);

struct ScanRow {
  ModelParams params;
  int m = 0, N = 0, R = 0, T = 0;
  RatioResult result;
  long sweeps = 0;
  std::uint64_t seed = 0;
};

std::vector<ScanRow> scan(int m, int N, const std::vector<ModelParams>& grid,
                          const std::vector<std::pair<int, int>>& sizes, const RunConfig& cfg);

std::string scan_csv_header();
std::string scan_csv_row(const ScanRow& r);

}  // namespace z2lab
