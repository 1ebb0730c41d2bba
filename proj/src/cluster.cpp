#include "z2lab/cluster.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace z2lab {

ClusterExpansion::ClusterExpansion(const Lattice& lat, Phase phase, int size_max)
    : lat_(lat),
      phase_(phase),
      fam_(adjacency(lat, phase == Phase::Higgs ? AdjacencyKind::G1 : AdjacencyKind::G2), size_max) {}

const std::vector<int>& ClusterExpansion::partner(int id) const {
  if (static_cast<int>(partner_.size()) <= id) partner_.resize(fam_.count()), partner_done_.resize(fam_.count(), 0);
  auto& out = partner_[id];
  if (!partner_done_[id]) {
    // odd-multiplicity cells of the (co)boundaries: d eta for edges, delta omega for plaquettes
    std::vector<int> all;
    for (int c : fam_.cells(id)) {
      const auto span = phase_ == Phase::Higgs ? lat_.coboundary(1, c) : lat_.boundary(2, c);
      for (const auto& inc : span) all.push_back(inc.cell);
    }
    std::sort(all.begin(), all.end());
    for (std::size_t i = 0; i < all.size();) {
      std::size_t j = i;
      while (j < all.size() && all[j] == all[i]) ++j;
      if ((j - i) % 2) out.push_back(all[i]);
      i = j;
    }
    partner_done_[id] = 1;
  }
  return out;
}

int ClusterExpansion::evaluate(int id, const Bits& gamma_edges) const {
  int s = 0;
  for (int e : fam_.cells(id)) s ^= gamma_edges[e];
  return s;
}

long double ClusterExpansion::activity(int id, const ModelParams& p, const Bits* gamma_edges) const {
  const auto& dp = partner(id);
  const int n = fam_.size(id);
  if (phase_ == Phase::Higgs)
    return std::exp(-4.0L * p.beta * static_cast<long double>(dp.size()) - 4.0L * p.kappa * n);
  const long double tb = std::tanh(2.0L * p.beta), t = std::tanh(2.0L * p.kappa);
  int exponent = 0;
  for (int e : dp) exponent += (gamma_edges && (*gamma_edges)[e]) ? -1 : 1;
  return std::pow(tb, n) * std::pow(t, exponent);
}

std::int64_t ClusterExpansion::ursell_of(const Cluster& c) const { return ursell(interaction_weights(fam_, c)); }

long double ClusterExpansion::psi(const Cluster& c, const ModelParams& p, const Bits* gamma_edges,
                                  bool sign_by_gamma) const {
  long double w = static_cast<long double>(ursell_of(c)) / multiplicity_factorial(c);
  for (int id : c.ids) w *= activity(id, p, gamma_edges);
  if (sign_by_gamma && gamma_edges && parity(c, *gamma_edges)) w = -w;
  return w;
}

int ClusterExpansion::parity(const Cluster& c, const Bits& gamma_edges) const {
  int s = 0;
  for (int id : c.ids) s ^= evaluate(id, gamma_edges);
  return s;
}

std::vector<int> ClusterExpansion::touching_cells(const Path& gamma) const {
  std::vector<int> out;
  for (int e : gamma.edges()) {
    if (phase_ == Phase::Higgs) out.push_back(e);
    else
      for (const auto& inc : lat_.coboundary(1, e)) out.push_back(inc.cell);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

bool ClusterExpansion::touches(const Cluster& c, const Path& gamma) const {
  const auto cells = touching_cells(gamma);
  for (int id : c.ids)
    for (int x : fam_.cells(id))
      if (std::binary_search(cells.begin(), cells.end(), x)) return true;
  return false;
}

std::vector<Cluster> ClusterExpansion::clusters(const std::vector<int>& seed_cells, Truncation t) {
  return enumerate_clusters(fam_, seed_cells, t.n_max, t.size_max);
}

// ---------------------------------------------------------------------------

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::vector<int> all_cells(int n) {
  std::vector<int> v(n);
  for (int i = 0; i < n; ++i) v[i] = i;
  return v;
}

// Records a tail bound, or +inf with the reason when parameters are outside the bound's domain.
template <class F>
void set_tail(SeriesResult& r, F f) {
  try {
    r.tail = f();
    r.tail_valid = std::isfinite(r.tail);
  } catch (const DomainError& e) {
    r.tail = kInf;
    r.tail_valid = false;
    r.note = e.what();
  }
}

}  // namespace

SeriesResult truncated_series(const Lattice& lat, Phase phase, SeriesMode mode, const ModelParams& p,
                              const std::vector<Path>& gammas, Truncation t, const ExpansionConstants& c,
                              double eps, double slack) {
  p.validate();
  const std::size_t need = mode == SeriesMode::LogZ ? 0 : mode == SeriesMode::LogWilson ? 1 : 2;
  if (gammas.size() < need) throw std::invalid_argument("truncated_series: missing paths");
  if (phase == Phase::Confinement && mode == SeriesMode::Covariance)
    throw std::invalid_argument("covariance series is only available in the Higgs phase");
  if (phase == Phase::Confinement && p.kappa <= 0) throw DomainError("confinement series needs kappa > 0");

  ClusterExpansion ce(lat, phase, t.size_max);
  SeriesResult r;
  const int k = std::min(t.n_max, t.size_max) + 1;  // every omitted cluster has ||S|| >= k
  long double sum = 0;

  if (phase == Phase::Higgs) {
    if (mode == SeriesMode::LogZ) {
      const auto cl = ce.clusters(all_cells(lat.count(1)), t);
      for (const auto& s : cl) sum += ce.psi(s, p);
      r.value = static_cast<double>(sum);
      r.clusters = cl.size();
      set_tail(r, [&] { return lat.count(1) * single_cell(c, k, p.kappa, eps); });
      return r;
    }
    const Path& g1 = gammas[0];
    const Bits b1 = g1.support(lat);
    const auto cl = ce.clusters(g1.edges(), t);
    if (mode == SeriesMode::LogWilson) {
      for (const auto& s : cl)
        if (ce.parity(s, b1)) sum += ce.psi(s, p), ++r.clusters;
      r.value = static_cast<double>(2 * sum);
      set_tail(r, [&] { return 2.0 * g1.length() * single_cell(c, k, p.kappa, eps); });
      return r;
    }
    const Path& g2 = gammas[1];
    const Bits b2 = g2.support(lat);
    for (const auto& s : cl)
      if (ce.parity(s, b1) && ce.parity(s, b2)) sum += ce.psi(s, p), ++r.clusters;
    r.value = static_cast<double>(mode == SeriesMode::LogRho ? -4 * sum : 4 * std::fabs(sum));
    // clusters seeing both paths span the gap: ||S||_1 >= dist(e, gamma2) + 1 for their edge e in gamma1
    set_tail(r, [&] {
      double tail = 0;
      for (int e : g1.edges()) tail += 4 * single_cell(c, std::max(k, dist_edge(lat, e, g2) + 1), p.kappa, eps);
      return tail;
    });
    return r;
  }

  // confinement phase
  const long double log_t = std::log(std::tanh(2.0L * p.kappa));
  if (mode == SeriesMode::LogZ) {
    const auto cl = ce.clusters(all_cells(lat.count(2)), t);
    for (const auto& s : cl) sum += ce.psi(s, p);
    r.value = static_cast<double>(sum);
    r.clusters = cl.size();
    set_tail(r, [&] { return lat.count(2) * tail_conf(c.m, k, p.beta, eps, slack); });
    return r;
  }
  const Path& g1 = gammas[0];
  const Bits b1 = g1.support(lat);
  const auto cl = ce.clusters(ce.touching_cells(g1), t);
  const double plaq_per_edge = 2.0 * (lat.dim() - 1);
  if (mode == SeriesMode::LogWilson) {
    for (const auto& s : cl) sum += ce.psi(s, p, &b1) - ce.psi(s, p);
    r.clusters = cl.size();
    r.value = static_cast<double>(-g1.length() * log_t - sum);
    set_tail(r, [&] { return 2 * plaq_per_edge * g1.length() * tail_conf(c.m, k, p.beta, eps, slack); });
    return r;
  }
  const Path& g2 = gammas[1];
  const Path g12 = g1 + g2;
  const Bits b2 = g2.support(lat), b12 = g12.support(lat);
  for (const auto& s : cl) {
    if (!ce.touches(s, g2)) continue;
    sum += ce.psi(s, p, &b1) + ce.psi(s, p, &b2) - ce.psi(s, p, &b12) - ce.psi(s, p);
    ++r.clusters;
  }
  r.value = static_cast<double>((g1.length() + g2.length() - g12.length()) * log_t + sum);
  set_tail(r, [&] { return 4 * plaq_per_edge * g1.length() * tail_conf(c.m, k, p.beta, eps, slack); });
  return r;
}

long double anchored_abs_sum(ClusterExpansion& ce, int edge, const ModelParams& p, int k_min, Truncation t) {
  long double s = 0;
  for (const auto& cl : ce.clusters({edge}, t))
    if (cluster_size(ce.family(), cl) >= k_min) s += std::fabs(ce.psi(cl, p));
  return s;
}

double ceps_enumerated(const Lattice& lat, const ExpansionConstants& c, double eps, Truncation t) {
  ClusterExpansion ce(lat, Phase::Higgs, t.size_max);
  const ModelParams p{0.0, c.kappa0_higgs + eps};
  long double best = 0;
  for (int e = 0; e < lat.count(1); ++e) best = std::max(best, anchored_abs_sum(ce, e, p, 1, t));
  return static_cast<double>(4 * best);
}

long double kp_sum(const Graph& g1, const std::vector<int>& halo, double kappa, double alpha, int size_max) {
  const auto counts = count_sets_meeting(g1, halo, size_max);
  long double s = 0;
  for (int k = 1; k <= size_max; ++k) s += counts[k] * std::exp(-4.0L * kappa * (1 - alpha) * k);
  return s;
}

}  // namespace z2lab
