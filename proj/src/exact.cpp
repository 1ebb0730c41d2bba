#include "z2lab/exact.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <thread>

#include "z2lab/gf2.hpp"

namespace z2lab {

namespace tiny {
Lattice single_edge() { return Lattice({0, 0, 0}, {1, 0, 0}); }
Lattice single_plaquette() { return Lattice({0, 0, 0}, {1, 1, 0}); }
Lattice cube2() { return Lattice({0, 0, 0}, {1, 1, 1}); }
Lattice slab() { return Lattice({0, -1, 0}, {1, 1, 1}); }
}  // namespace tiny

TinyLattice::TinyLattice(Lattice lat) : lat_(std::move(lat)) {
  if (lat_.count(1) > kEnumBudgetBits) throw BudgetError("tiny lattice: more than 2^26 gauge configurations");
}

// ---------------------------------------------------------------------------
// Gray-code engine

namespace {

struct Flat {
  std::vector<int> off, unit;
  std::vector<std::uint64_t> stride_of_unit;
};

void run_partition(const EnumSpec& s, const Flat& f, std::uint64_t begin, std::uint64_t end,
                   std::vector<std::uint64_t>& counts) {
  const std::size_t nu = s.unit_category.size();
  std::vector<char> par(s.unit_init.begin(), s.unit_init.end());
  par.resize(nu, 0);
  std::uint64_t idx = 0;
  for (std::size_t u = 0; u < nu; ++u)
    if (par[u]) idx += f.stride_of_unit[u];

  auto toggle = [&](int v) {
    for (int q = f.off[v]; q < f.off[v + 1]; ++q) {
      const int u = f.unit[q];
      par[u] ^= 1;
      if (par[u]) idx += f.stride_of_unit[u];
      else idx -= f.stride_of_unit[u];
    }
    idx ^= s.var_obs[v];
  };

  const std::uint64_t g0 = begin ^ (begin >> 1);
  for (std::size_t v = 0; v < s.var_units.size(); ++v)
    if (g0 >> v & 1u) toggle(static_cast<int>(v));
  ++counts[idx];
  for (std::uint64_t i = begin + 1; i < end; ++i) {
    toggle(__builtin_ctzll(i));
    ++counts[idx];
  }
}

}  // namespace

Histogram enumerate(const EnumSpec& s, int threads) {
  const std::size_t nv = s.var_units.size();
  if (nv > static_cast<std::size_t>(kEnumBudgetBits)) throw BudgetError("enumeration exceeds 2^26 states");
  if (s.var_obs.size() != nv) throw std::invalid_argument("enumerate: observable masks missing");
  if (s.n_obs > 16) throw std::invalid_argument("enumerate: too many observables");
  Histogram h;
  h.n_obs = s.n_obs;
  h.dims.assign(s.n_categories, 1);
  for (int c : s.unit_category) ++h.dims.at(c);

  std::vector<std::uint64_t> cat_stride(s.n_categories);
  std::uint64_t stride = std::uint64_t{1} << s.n_obs;
  for (int c = s.n_categories - 1; c >= 0; --c) {
    cat_stride[c] = stride;
    stride *= static_cast<std::uint64_t>(h.dims[c]);
  }
  const std::uint64_t size = stride;
  if (size > (std::uint64_t{1} << 28)) throw BudgetError("enumerate: histogram too large");

  Flat f;
  f.off.push_back(0);
  for (const auto& us : s.var_units) {
    f.unit.insert(f.unit.end(), us.begin(), us.end());
    f.off.push_back(static_cast<int>(f.unit.size()));
  }
  for (int c : s.unit_category) f.stride_of_unit.push_back(cat_stride[c]);

  const std::uint64_t total = std::uint64_t{1} << nv;
  int parts = 1;
  while (parts * 2 <= std::max(threads, 1) && (std::uint64_t(parts) * 2) <= total / 1024) parts *= 2;
  std::vector<std::vector<std::uint64_t>> local(parts, std::vector<std::uint64_t>(size, 0));
  const std::uint64_t chunk = total / parts;
  if (parts == 1) {
    run_partition(s, f, 0, total, local[0]);
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < parts; ++t)
      pool.emplace_back([&, t] { run_partition(s, f, chunk * t, chunk * (t + 1), local[t]); });
    for (auto& th : pool) th.join();
  }
  h.counts.assign(size, 0);
  for (const auto& l : local)
    for (std::uint64_t i = 0; i < size; ++i) h.counts[i] += l[i];
  h.terms = total;
  return h;
}

long double Histogram::weighted(const std::vector<long double>& w,
                                const std::function<bool(std::uint32_t)>& keep) const {
  const int nc = static_cast<int>(dims.size());
  std::vector<std::vector<long double>> pw(nc);
  for (int c = 0; c < nc; ++c) {
    pw[c].resize(dims[c]);
    for (int n = 0; n < dims[c]; ++n) pw[c][n] = std::pow(w[c], static_cast<long double>(n));
  }
  const std::uint64_t npat = std::uint64_t{1} << n_obs;
  std::vector<int> n(nc, 0);
  long double sum = 0;
  for (std::uint64_t base = 0; base < counts.size(); base += npat) {
    long double wt = 1;
    for (int c = 0; c < nc; ++c) wt *= pw[c][n[c]];
    for (std::uint64_t pat = 0; pat < npat; ++pat) {
      const auto cnt = counts[base + pat];
      if (cnt && keep(static_cast<std::uint32_t>(pat))) sum += static_cast<long double>(cnt) * wt;
    }
    for (int c = nc - 1; c >= 0; --c) {
      if (++n[c] < dims[c]) break;
      n[c] = 0;
    }
  }
  return sum;
}

// ---------------------------------------------------------------------------

std::vector<WilsonExact> exact_expectations(const TinyLattice& tl, const ModelParams& p, const std::vector<Path>& gammas,
                                            Ensemble ensemble, int threads) {
  p.validate();
  const Lattice& lat = tl.lattice();
  const int P = lat.count(2), E = lat.count(1), V = lat.count(0);
  EnumSpec s;
  s.n_categories = 2;
  s.unit_category.assign(P, 0);
  s.unit_category.resize(P + E, 1);
  s.n_obs = static_cast<int>(gammas.size());
  std::vector<Bits> supp;
  for (const auto& g : gammas) supp.push_back(g.support(lat));
  for (int e = 0; e < E; ++e) {
    std::vector<int> us;
    for (const auto& inc : lat.coboundary(1, e)) us.push_back(inc.cell);
    us.push_back(P + e);
    std::uint32_t mask = 0;
    for (std::size_t j = 0; j < gammas.size(); ++j)
      if (supp[j][e]) mask |= 1u << j;
    s.var_units.push_back(std::move(us));
    s.var_obs.push_back(mask);
  }
  if (ensemble == Ensemble::Full) {
    for (int v = 0; v < V; ++v) {
      std::vector<int> us;
      for (const auto& inc : lat.coboundary(0, v)) us.push_back(P + inc.cell);
      std::uint32_t mask = 0;
      for (std::size_t j = 0; j < gammas.size(); ++j) {
        auto it = gammas[j].boundary().coef.find(v);
        if (it != gammas[j].boundary().coef.end() && (it->second & 1)) mask |= 1u << j;
      }
      s.var_units.push_back(std::move(us));
      s.var_obs.push_back(mask);
    }
  }
  const Histogram h = enumerate(s, threads);
  const std::vector<long double> w{std::exp(-4.0L * p.beta), std::exp(-4.0L * p.kappa)};
  const long double Z = h.weighted(w, [](std::uint32_t) { return true; });
  ExactResult zr;
  zr.log_value = static_cast<double>(std::log(Z) + 2.0L * p.beta * P + 2.0L * p.kappa * E);
  zr.value = std::exp(zr.log_value);
  zr.terms = h.terms;

  std::vector<WilsonExact> out;
  for (std::size_t j = 0; j < gammas.size(); ++j) {
    WilsonExact r;
    r.Z = zr;
    const std::uint32_t bit = 1u << j;
    r.minus = h.weighted(w, [bit](std::uint32_t pat) { return (pat & bit) != 0; });
    r.plus = h.weighted(w, [bit](std::uint32_t pat) { return (pat & bit) == 0; });
    const long double tot = r.plus + r.minus;
    r.mean = static_cast<double>((r.plus - r.minus) / tot);
    if (r.plus > r.minus)
      r.neg_log = static_cast<double>(-std::log1p(-2.0L * r.minus / tot));
    else
      r.neg_log = std::numeric_limits<double>::infinity();
    out.push_back(r);
  }
  return out;
}

WilsonExact exact_expectation(const TinyLattice& lat, const ModelParams& p, const Path& gamma, Ensemble ensemble) {
  return exact_expectations(lat, p, {gamma}, ensemble).front();
}

MfExact exact_mf_ratio(const TinyLattice& tl, const ModelParams& p, const Path& g1, const Path& g2) {
  if (classify(g1).kind != PathKind::Open || classify(g2).kind != PathKind::Open)
    throw std::invalid_argument("mf ratio: both lines must be open paths");
  const Path loop = g1 + g2;
  if (classify(loop).kind != PathKind::Loop) throw std::invalid_argument("mf ratio: lines must close into a loop");
  const auto r = exact_expectations(tl, p, {g1, g2, loop}, Ensemble::Unitary);
  if (r[2].plus == r[2].minus) throw DenominatorZero("mf ratio: loop expectation vanishes");
  MfExact out;
  out.ratio = r[0].mean * r[1].mean / r[2].mean;
  out.log_ratio = -r[0].neg_log - r[1].neg_log + r[2].neg_log;
  return out;
}

// ---------------------------------------------------------------------------

std::vector<Bits> cycle_basis(const Lattice& lat) {
  const int E = lat.count(1);
  std::vector<Bits> rows(lat.count(0), Bits(E));
  for (int e = 0; e < E; ++e) {
    rows[lat.edge_tail(e)].set(e);
    rows[lat.edge_head(e)].set(e);
  }
  return gf2::kernel_basis(std::move(rows), E);
}

std::vector<Bits> cycle_space(const Lattice& lat, int max_dim) {
  auto basis = cycle_basis(lat);
  if (static_cast<int>(basis.size()) > max_dim) throw BudgetError("cycle space dimension too large");
  return gf2::span(basis, lat.count(1));
}

std::vector<Bits> closed_two_form_basis(const Lattice& lat) {
  const int P = lat.count(2);
  std::vector<Bits> rows;
  if (lat.dim() >= 3)
    for (int c = 0; c < lat.count(3); ++c) {
      Bits r(P);
      for (const auto& inc : lat.boundary(3, c)) r.set(inc.cell);
      rows.push_back(std::move(r));
    }
  return gf2::kernel_basis(std::move(rows), P);
}

std::vector<Bits> closed_two_forms(const Lattice& lat, int max_dim) {
  auto basis = closed_two_form_basis(lat);
  if (static_cast<int>(basis.size()) > max_dim) throw BudgetError("closed 2-form space dimension too large");
  return gf2::span(basis, lat.count(2));
}

// ---------------------------------------------------------------------------

double ht_conf_expectation(const TinyLattice& tl, const ModelParams& p, const Path& gamma, PrefactorConvention conv) {
  p.validate();
  const Lattice& lat = tl.lattice();
  const int P = lat.count(2), E = lat.count(1);
  const Bits supp = gamma.support(lat);
  auto hat_z = [&](bool with_gamma) {
    EnumSpec s;
    s.n_categories = 2;
    s.unit_category.assign(P, 0);
    s.unit_category.resize(P + E, 1);
    s.unit_init.assign(P + E, 0);
    if (with_gamma)
      for (int e = 0; e < E; ++e) s.unit_init[P + e] = supp[e];
    for (int q = 0; q < P; ++q) {
      std::vector<int> us{q};
      for (const auto& inc : lat.boundary(2, q)) us.push_back(P + inc.cell);
      s.var_units.push_back(std::move(us));
      s.var_obs.push_back(0);
    }
    const Histogram h = enumerate(s);
    // plaquette factor tanh(2 beta) per occupied plaquette, tanh(2 kappa) per edge of delta(w) + gamma
    return h.weighted({std::tanh(2.0L * p.beta), std::tanh(2.0L * p.kappa)}, [](std::uint32_t) { return true; });
  };
  long double r = hat_z(true) / hat_z(false);
  if (conv == PrefactorConvention::Twice) r *= std::pow(std::tanh(2.0L * p.kappa), gamma.length());
  return static_cast<double>(r);
}

long double free_check_z(const Lattice& lat, const ModelParams& p, const Path& gamma) {
  const auto cb = cycle_basis(lat);
  // q_c is linear in c mod 2: solve once per basis cycle
  std::vector<Bits> rows(lat.count(1), Bits(lat.count(2)));
  for (int q = 0; q < lat.count(2); ++q)
    for (const auto& inc : lat.boundary(2, q)) rows[inc.cell].set(q);
  std::vector<Bits> qb;
  for (const auto& c : cb) {
    auto x = gf2::solve(rows, lat.count(2), c);
    if (!x) throw LatticeError("free sum: cycle without spanning surface");
    qb.push_back(*x);
  }
  if (cb.size() > 25) throw BudgetError("cycle space dimension too large");
  const auto cycles = gf2::span(cb, lat.count(1));
  const auto qs = gf2::span(qb, lat.count(2));
  const auto taus = closed_two_forms(lat);
  const Bits g = gamma.support(lat);
  const long double t = std::tanh(2.0L * p.kappa);
  const long double wb = std::exp(-4.0L * p.beta);
  std::vector<long double> a(cycles.size());
  for (std::size_t i = 0; i < cycles.size(); ++i) a[i] = std::pow(t, static_cast<long double>((g ^ cycles[i]).count()));
  long double total = 0;
  for (const auto& tau : taus) {
    long double inner = 0;
    for (std::size_t i = 0; i < cycles.size(); ++i) inner += ((tau & qs[i]).count() & 1) ? -a[i] : a[i];
    total += std::pow(wb, static_cast<long double>(tau.count())) * inner;
  }
  return total;
}

namespace {
double rel(long double a, long double b) {
  const long double s = std::max(std::fabs(a), std::fabs(b));
  if (s == 0) return 0.0;
  return static_cast<double>(std::fabs(a - b) / s);
}
}  // namespace

double verify_identity(IdentityKind kind, const TinyLattice& tl, const ModelParams& p, const Path& gamma) {
  const Lattice& lat = tl.lattice();
  switch (kind) {
    case IdentityKind::UnitaryGauge: {
      const auto full = exact_expectation(tl, p, gamma, Ensemble::Full);
      const auto unit = exact_expectation(tl, p, gamma, Ensemble::Unitary);
      // Z_full = 2^{|V|} Z_unitary (gauge orbits); |dlog| is the relative discrepancy
      const double dz = static_cast<double>(std::fabs(full.Z.log_value - lat.count(0) * std::log(2.0L) - unit.Z.log_value));
      return std::max(rel(full.mean, unit.mean), dz);
    }
    case IdentityKind::HighTempConf: {
      const auto unit = exact_expectation(tl, p, gamma, Ensemble::Unitary);
      return rel(unit.mean, ht_conf_expectation(tl, p, gamma));
    }
    case IdentityKind::HighTempFree: {
      const auto unit = exact_expectation(tl, p, gamma, Ensemble::Unitary);
      const int E = lat.count(1);
      // Both sides divided by exp(2 beta |C2^+|).
      const long double lhs = std::exp(2.0L * p.kappa * E) * (unit.plus - unit.minus);
      const long double kerd = static_cast<long double>(closed_two_forms(lat).size());
      const long double rhs = std::pow(std::cosh(2.0L * p.kappa), E) * std::pow(2.0L, E) / kerd * free_check_z(lat, p, gamma);
      return rel(lhs, rhs);
    }
  }
  return 1.0;
}

}  // namespace z2lab
