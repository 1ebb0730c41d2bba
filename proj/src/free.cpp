#include "z2lab/free.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <numeric>
#include <set>

#include "z2lab/exact.hpp"
#include "z2lab/gf2.hpp"

namespace z2lab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Point reflect(Point x) {
  x[1] = -x[1];
  return x;
}

// Reflected positive edge and the orientation sign of the image of the positive edge e.
std::pair<int, int> reflect_edge(const Lattice& lat, int e) {
  const Point a = reflect(lat.vertex(lat.edge_tail(e))), b = reflect(lat.vertex(lat.edge_head(e)));
  if (!lat.contains(a) || !lat.contains(b)) throw LatticeError("mirrored path: reflection leaves the box");
  const int ia = lat.vertex_index(a), ib = lat.vertex_index(b);
  for (const auto& inc : lat.incident_edges(ia)) {
    const int f = inc.cell;
    if (lat.edge_tail(f) == ia && lat.edge_head(f) == ib) return {f, 1};
    if (lat.edge_tail(f) == ib && lat.edge_head(f) == ia) return {f, -1};
  }
  throw LatticeError("mirrored path: reflected edge not found");
}

std::vector<int> bits_to_vector(const Bits& b) {
  std::vector<int> v;
  for (auto i = b.find_first(); i != Bits::npos; i = b.find_next(i)) v.push_back(static_cast<int>(i));
  return v;
}

Bits vector_to_bits(const std::vector<int>& v, std::size_t n) {
  Bits b(n);
  for (int i : v) b.set(i);
  return b;
}

Bits vertex_support(const Lattice& lat, const Bits& edges) {
  Bits v(lat.count(0));
  for (auto e = edges.find_first(); e != Bits::npos; e = edges.find_next(e)) {
    v.set(lat.edge_tail(static_cast<int>(e)));
    v.set(lat.edge_head(static_cast<int>(e)));
  }
  return v;
}

// Parity scratchpad: number of odd cells among the boundary cells of a set.
struct ParityCounter {
  std::vector<char> odd;
  std::vector<int> touched;

  explicit ParityCounter(int n) : odd(n, 0) {}

  template <class BoundaryOf>
  int mismatch(const std::vector<int>& set, BoundaryOf boundary_of, const std::vector<int>& target) {
    for (int c : set)
      for (int b : boundary_of(c)) {
        odd[b] ^= 1;
        touched.push_back(b);
      }
    for (int b : target) {
      odd[b] ^= 1;
      touched.push_back(b);
    }
    int count = 0;
    for (int b : touched)
      if (odd[b] == 1) count += 1, odd[b] = 2;  // count each once
    for (int b : touched) odd[b] = 0;
    touched.clear();
    return count;
  }
};

std::vector<int> edge_ends(const Lattice& lat, int e) { return {lat.edge_tail(e), lat.edge_head(e)}; }

std::vector<int> plaquette_cubes(const Lattice& lat, int p) {
  std::vector<int> out;
  for (const auto& inc : lat.coboundary(2, p)) out.push_back(inc.cell);
  return out;
}

// Connected sets in g meeting hit whose boundary parity equals target, with the parity
// pruning "each added cell fixes at most two boundary cells".
template <class BoundaryOf>
std::vector<std::vector<int>> closed_sets(const Graph& g, const std::vector<int>& hit, int max_size, int nbnd,
                                          BoundaryOf boundary_of, const std::vector<int>& target) {
  ParityCounter pc(nbnd);
  std::vector<std::vector<int>> out;
  for_each_set_meeting(
      g, hit, max_size,
      [&](const std::vector<int>& s) {
        if (pc.mismatch(s, boundary_of, target) == 0) {
          auto sorted = s;
          std::sort(sorted.begin(), sorted.end());
          out.push_back(std::move(sorted));
        }
      },
      [&](const std::vector<int>& s) {
        const int need = (pc.mismatch(s, boundary_of, target) + 1) / 2;
        return static_cast<int>(s.size()) + std::max(need, 1) <= max_size;
      });
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    return a.size() != b.size() ? a.size() < b.size() : a < b;
  });
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// Mirrored paths

Path mirrored_path(const Lattice& lat, const Path& g) {
  if (lat.dim() < 2) throw LatticeError("mirrored path: need at least two axes");
  for (const auto& [v, c] : g.boundary().coef)
    if (lat.vertex(v)[1] != 0) throw LatticeError("mirrored path: endpoint off the x2 = 0 hyperplane");
  Chain out{1, {}};
  for (const auto& [e, c] : g.chain().coef) {
    const auto [f, s] = reflect_edge(lat, e);
    out.add(f, -c * s);
  }
  return Path(lat, std::move(out));
}

Bits mirrored_edges(const Lattice& lat, const Bits& edges) {
  Bits out(lat.count(1));
  for (auto e = edges.find_first(); e != Bits::npos; e = edges.find_next(e))
    out.set(reflect_edge(lat, static_cast<int>(e)).first);
  return out;
}

// ---------------------------------------------------------------------------
// Polymers

std::vector<std::vector<int>> enumerate_free_polymers(const Lattice& lat, FreeFamily family, int anchor,
                                                      int max_size) {
  if (max_size > kFreePolymerBudget) throw BudgetError("free polymer size exceeds enumeration budget");
  if (max_size < 1) return {};
  if (family == FreeFamily::Cycle) {
    if (anchor < 0 || anchor >= lat.count(0)) throw LatticeError("anchor vertex out of range");
    std::vector<int> hit;
    for (const auto& inc : lat.incident_edges(anchor)) hit.push_back(inc.cell);
    return closed_sets(adjacency(lat, AdjacencyKind::G0), hit, max_size, lat.count(0),
                       [&](int e) { return edge_ends(lat, e); }, {});
  }
  if (anchor < 0 || anchor >= lat.count(2)) throw LatticeError("anchor plaquette out of range");
  return closed_sets(adjacency(lat, AdjacencyKind::G3), {anchor}, max_size, std::max(lat.count(3), 1),
                     [&](int p) { return plaquette_cubes(lat, p); }, {});
}

int linking_parity(const Lattice& lat, const Bits& surface, const Bits& cycle) {
  const Bits q = spanning_surface(lat, cycle);
  return static_cast<int>((q & surface).count() & 1);
}

bool is_cycle_mod2(const Lattice& lat, const Bits& edges) {
  std::vector<char> par(lat.count(0), 0);
  for (auto e = edges.find_first(); e != Bits::npos; e = edges.find_next(e)) {
    par[lat.edge_tail(static_cast<int>(e))] ^= 1;
    par[lat.edge_head(static_cast<int>(e))] ^= 1;
  }
  return std::none_of(par.begin(), par.end(), [](char c) { return c != 0; });
}

bool is_closed_form(const Lattice& lat, const Bits& plaquettes) {
  for (int c = 0; c < lat.count(3); ++c) {
    int n = 0;
    for (const auto& inc : lat.boundary(3, c)) n += plaquettes[inc.cell];
    if (n & 1) return false;
  }
  return true;
}

FreeGas::FreeGas(const Lattice& lat, int cycle_max, int surface_max) : lat_(lat) {
  std::set<std::vector<int>> cycles, surfaces;
  for (int v = 0; v < lat.count(0) && cycle_max >= 4; ++v)
    for (auto& c : enumerate_free_polymers(lat, FreeFamily::Cycle, v, cycle_max)) cycles.insert(std::move(c));
  for (int p = 0; p < lat.count(2) && surface_max >= 1; ++p)
    for (auto& s : enumerate_free_polymers(lat, FreeFamily::Surface, p, surface_max)) surfaces.insert(std::move(s));
  for (const auto& c : cycles) polys_.push_back({FreeFamily::Cycle, c});
  for (const auto& s : surfaces) polys_.push_back({FreeFamily::Surface, s});

  const int n = count();
  const Graph g3 = adjacency(lat, AdjacencyKind::G3);
  std::vector<Bits> vert(n), halo(n), supp(n), qsurf(n);
  verts_.resize(n);
  for (int i = 0; i < n; ++i) {
    supp[i] = support(i);
    if (polys_[i].family == FreeFamily::Cycle) {
      vert[i] = vertex_support(lat, supp[i]);
      verts_[i] = bits_to_vector(vert[i]);
      qsurf[i] = spanning_surface(lat, supp[i]);
    } else {
      halo[i] = supp[i];
      for (int p : polys_[i].cells)
        for (int q : g3.nbrs[p]) halo[i].set(q);
      Bits vs(lat.count(0));
      for (int p : polys_[i].cells)
        for (const auto& inc : lat.boundary(2, p)) {
          vs.set(lat.edge_tail(inc.cell));
          vs.set(lat.edge_head(inc.cell));
        }
      verts_[i] = bits_to_vector(vs);
    }
  }
  zeta_.assign(n, std::vector<int>(n, 0));
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      const auto fi = polys_[i].family, fj = polys_[j].family;
      int w = 0;
      if (fi == FreeFamily::Cycle && fj == FreeFamily::Cycle) {
        w = vert[i].intersects(vert[j]) ? -1 : 0;
      } else if (fi == FreeFamily::Surface && fj == FreeFamily::Surface) {
        w = halo[i].intersects(supp[j]) ? -1 : 0;
      } else {
        const int c = fi == FreeFamily::Cycle ? i : j, s = fi == FreeFamily::Cycle ? j : i;
        w = ((qsurf[c] & supp[s]).count() & 1) ? -2 : 0;
      }
      zeta_[i][j] = zeta_[j][i] = w;
    }
}

Bits FreeGas::support(int id) const {
  const auto& p = polys_[id];
  return vector_to_bits(p.cells, lat_.count(p.family == FreeFamily::Cycle ? 1 : 2));
}

std::int64_t ursell_mixed(const FreeGas& gas, const Cluster& c) {
  const int n = static_cast<int>(c.ids.size());
  std::vector<std::vector<int>> w(n, std::vector<int>(n, 0));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (i != j) w[i][j] = gas.weight(c.ids[i], c.ids[j]);
  return ursell(w);
}

std::vector<Cluster> enumerate_mixed_clusters(const FreeGas& gas, int n_max, int size_max) {
  if (n_max > kUrsellBudget) throw BudgetError("cluster order exceeds the Ursell budget");
  std::vector<Cluster> out;
  std::vector<int> ids;
  auto connected = [&]() {
    const int n = static_cast<int>(ids.size());
    std::vector<char> reached(n, 0);
    std::vector<int> stack{0};
    reached[0] = 1;
    int seen = 1;
    while (!stack.empty()) {
      const int i = stack.back();
      stack.pop_back();
      for (int j = 0; j < n; ++j)
        if (!reached[j] && gas.weight(ids[i], ids[j]) != 0) reached[j] = 1, ++seen, stack.push_back(j);
    }
    return seen == n;
  };
  auto rec = [&](auto&& self, int from, int size) -> void {
    for (int id = from; id < gas.count(); ++id) {
      if (size + gas.size(id) > size_max) continue;
      ids.push_back(id);
      if (connected()) out.push_back(Cluster{ids});
      if (static_cast<int>(ids.size()) < n_max) self(self, id, size + gas.size(id));
      ids.pop_back();
    }
  };
  if (n_max >= 1) rec(rec, 0, 0);
  return out;
}

namespace {

struct FreeContext {
  long double t, wb;
  Bits q_gamma;
  Bits gamma0_verts;
};

FreeContext make_context(const FreeGas& gas, const ModelParams& p, const Bits& gamma, const Bits& gamma0) {
  const Lattice& lat = gas.lattice();
  return {std::tanh(2.0L * p.kappa), std::exp(-4.0L * p.beta), spanning_surface(lat, gamma),
          gamma0.size() ? vertex_support(lat, gamma0) : Bits(lat.count(0))};
}

long double psi_in(const FreeGas& gas, const Cluster& c, const FreeContext& ctx) {
  long double act = 1;
  for (int id : c.ids) {
    const auto& poly = gas.polymer(id);
    if (poly.family == FreeFamily::Cycle) {
      for (int v : gas.vertices(id))
        if (ctx.gamma0_verts[v]) return 0;
      act *= std::pow(ctx.t, static_cast<long double>(poly.cells.size()));
    } else {
      int par = 0;
      for (int q : poly.cells) par ^= ctx.q_gamma[q];
      act *= (par ? -1.0L : 1.0L) * std::pow(ctx.wb, static_cast<long double>(poly.cells.size()));
    }
  }
  return static_cast<long double>(ursell_mixed(gas, c)) / multiplicity_factorial(c) * act;
}

}  // namespace

long double psi_free(const FreeGas& gas, const Cluster& c, const ModelParams& p, const Bits& gamma,
                     const Bits& gamma0) {
  return psi_in(gas, c, make_context(gas, p, gamma, gamma0));
}

long double free_log_series(const FreeGas& gas, const ModelParams& p, const Bits& gamma, const Bits& gamma0,
                            int n_max, int size_max) {
  const auto ctx = make_context(gas, p, gamma, gamma0);
  long double sum = 0;
  for (const auto& c : enumerate_mixed_clusters(gas, n_max, size_max)) sum += psi_in(gas, c, ctx);
  return sum;
}

// ---------------------------------------------------------------------------
// Exact restricted sums

namespace {
constexpr int kFreeExactMaxDim = 20;

// In-place Walsh-Hadamard transform: f[s] <- sum_i f[i] (-1)^{<i,s>}.
void walsh_hadamard(std::vector<long double>& f) {
  for (std::size_t h = 1; h < f.size(); h <<= 1)
    for (std::size_t i = 0; i < f.size(); i += 2 * h)
      for (std::size_t j = i; j < i + h; ++j) {
        const long double a = f[j], b = f[j + h];
        f[j] = a + b, f[j + h] = a - b;
      }
}
}  // namespace

FreeExact::FreeExact(const Lattice& lat) : lat_(lat) {
  const auto cb = cycle_basis(lat);
  dim_ = static_cast<int>(cb.size());
  if (dim_ > kFreeExactMaxDim) throw BudgetError("cycle space dimension exceeds the exact budget");
  cycles_ = gf2::span(cb, lat.count(1));
  for (const auto& c : cycles_) cycle_verts_.push_back(vertex_support(lat, c));

  std::vector<Bits> rows(lat.count(1), Bits(lat.count(2)));
  for (int q = 0; q < lat.count(2); ++q)
    for (const auto& inc : lat.boundary(2, q)) rows[inc.cell].set(q);
  std::vector<Bits> qb;
  for (const auto& c : cb) {
    auto x = gf2::solve(rows, lat.count(2), c);
    if (!x) throw LatticeError("free sum: cycle without spanning surface");
    qb.push_back(*x);
  }
  for (const auto& tau : closed_two_forms(lat)) {
    std::uint32_t s = 0;
    for (int j = 0; j < dim_; ++j)
      if ((tau & qb[j]).count() & 1) s |= 1u << j;
    tau_syndrome_.push_back(s);
    tau_size_.push_back(static_cast<int>(tau.count()));
  }
  edge_rows_.assign(lat.count(1), Bits(std::max(dim_, 1)));
  for (int j = 0; j < dim_; ++j)
    for (auto e = cb[j].find_first(); e != Bits::npos; e = cb[j].find_next(e)) edge_rows_[e].set(j);
}

std::uint32_t FreeExact::coords(const Bits& cycle) const {
  if (dim_ == 0) {
    if (cycle.any()) throw LatticeError("free sum: edge set is not a cycle");
    return 0;
  }
  auto x = gf2::solve(edge_rows_, dim_, cycle);
  if (!x) throw LatticeError("free sum: edge set is not a cycle");
  std::uint32_t s = 0;
  for (int j = 0; j < dim_; ++j)
    if ((*x)[j]) s |= 1u << j;
  return s;
}

std::vector<long double> FreeExact::surface_weights(const ModelParams& p) const {
  std::vector<long double> G(std::size_t{1} << dim_, 0.0L);
  const long double wb = std::exp(-4.0L * p.beta);
  for (std::size_t i = 0; i < tau_syndrome_.size(); ++i)
    G[tau_syndrome_[i]] += std::pow(wb, static_cast<long double>(tau_size_[i]));
  return G;
}

long double FreeExact::z(const ModelParams& p, const Bits& gamma, const Bits& gamma0) const {
  const std::uint32_t g = coords(gamma);
  const Bits v0 = gamma0.size() ? vertex_support(lat_, gamma0) : Bits(lat_.count(0));
  const long double t = std::tanh(2.0L * p.kappa);
  std::vector<long double> F(cycles_.size());
  for (std::size_t i = 0; i < cycles_.size(); ++i)
    F[i] = cycle_verts_[i].intersects(v0) ? 0.0L : std::pow(t, static_cast<long double>(cycles_[i].count()));
  walsh_hadamard(F);
  const auto G = surface_weights(p);
  long double total = 0;
  for (std::size_t s = 0; s < G.size(); ++s)
    total += (std::popcount(g & static_cast<std::uint32_t>(s)) & 1 ? -1.0L : 1.0L) * G[s] * F[s];
  return total;
}

long double FreeExact::z_open(const ModelParams& p, const Bits& gamma) const {
  const long double t = std::tanh(2.0L * p.kappa);
  std::vector<long double> F(cycles_.size());
  for (std::size_t i = 0; i < cycles_.size(); ++i)
    F[i] = std::pow(t, static_cast<long double>((gamma ^ cycles_[i]).count()));
  walsh_hadamard(F);
  const auto G = surface_weights(p);
  long double total = 0;
  for (std::size_t s = 0; s < G.size(); ++s) total += G[s] * F[s];
  return total;
}

// ---------------------------------------------------------------------------
// Completions of an open line

CompletionList decompose_open_line(const Lattice& lat, const Path& open, int L_max, double kappa) {
  const auto cls = classify(open);
  if (cls.kind != PathKind::Open) throw LatticeError("completion: path is not an open line");
  if (L_max > kCompletionBudget) throw BudgetError("completion length exceeds enumeration budget");
  CompletionList out;
  out.count_by_length.assign(std::max(L_max, 0) + 1, 0);
  if (L_max >= 1) {
    std::vector<int> hit;
    for (const auto& inc : lat.incident_edges(cls.start)) hit.push_back(inc.cell);
    const auto sets = closed_sets(adjacency(lat, AdjacencyKind::G0), hit, L_max, lat.count(0),
                                  [&](int e) { return edge_ends(lat, e); }, {cls.start, cls.end});
    for (const auto& s : sets) {
      ++out.count_by_length[s.size()];
      out.completions.push_back(vector_to_bits(s, lat.count(1)));
    }
  }
  const double x = 2.0 * lat.dim() * std::tanh(2 * kappa);
  out.tail_divergent = x >= 1;
  out.tail = out.tail_divergent ? kInf : std::pow(x, L_max + 1) / (1 - x);
  return out;
}

// ---------------------------------------------------------------------------
// Bound evaluators

namespace {

// sum_{j >= j0} j^p r^j for r in [0,1), summed until the geometric remainder bound is
// negligible; the remainder bound is added so the result stays an upper bound.
double poly_geom_sum(int p, double r, int j0) {
  if (r <= 0) return 0;
  long double sum = 0;
  for (long j = std::max(j0, 1);; ++j) {
    const long double term = std::pow(static_cast<long double>(j), p) * std::pow(static_cast<long double>(r), j);
    sum += term;
    const long double q = std::pow(1.0L + 1.0L / j, p) * r;
    if (q < 1) {
      const long double rem = term * q / (1 - q);
      if (rem <= 1e-17L * sum || (sum == 0 && term == 0)) return static_cast<double>(sum + rem);
    }
    if (j > 10000000) return kInf;
  }
}

double default_D0(int m) {
  static std::mutex mu;
  static std::map<int, double> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(m);
  if (it == cache.end()) it = cache.emplace(m, measure_D0(m, 3, m - 1)).first;
  return it->second;
}

struct Resolved {
  int m, p, k0;
  double a, t, D0, M3;
};

Resolved resolve(const FreeBoundArgs& x) {
  if (x.m < 3) throw DomainError("dimension must be >= 3");
  if (!(x.alpha > 0 && x.alpha < 1)) throw DomainError("alpha must lie in (0,1)");
  if (x.beta < 0 || x.kappa < 0) throw DomainError("beta and kappa must be non-negative");
  Resolved r;
  r.m = x.m;
  r.p = x.power < 0 ? std::max(3, x.m - 1) : x.power;
  r.k0 = 2 * (x.m - 1);
  r.a = 1 - x.alpha;
  r.t = std::tanh(2 * x.kappa);
  r.D0 = x.D0 < 0 ? default_D0(x.m) : x.D0;
  r.M3 = 10.0 * (x.m - 2);
  return r;
}

FreeBoundResult divergent(const char* why) {
  FreeBoundResult res;
  res.value = kInf;
  res.divergent = true;
  res.note = why;
  return res;
}

FreeBoundResult finite(double v) {
  FreeBoundResult res;
  res.value = v;
  return res;
}

// sum_{j>=2} 2j (2m)^{2j} t^{2aj}
FreeBoundResult path_path(const Resolved& r) {
  const double X = 4.0 * r.m * r.m * std::pow(r.t, 2 * r.a);
  if (X >= 1) return divergent("(2m)^2 tanh(2kappa)^{2a} >= 1");
  return finite(2 * poly_geom_sum(1, X, 2));
}

// sum_{j>=2(m-1)} M3^{2j+1} e^{-4 beta a j}
FreeBoundResult spin_spin(const Resolved& r, double beta) {
  const double Z = r.M3 * r.M3 * std::exp(-4 * beta * r.a);
  if (Z >= 1) return divergent("M3^2 e^{-4 beta a} >= 1");
  return finite(r.M3 * std::pow(Z, r.k0) / (1 - Z));
}

// sum_{j>=1} D0 j^p sum_{k>=max(4j,2(m-1))} M3^{2k-1} e^{-4 beta a k}  (without the factor 2)
FreeBoundResult path_spin_half(const Resolved& r, double beta) {
  const double Z = r.M3 * r.M3 * std::exp(-4 * beta * r.a);
  if (Z >= 1) return divergent("M3^2 e^{-4 beta a} >= 1");
  const int j1 = (r.k0 + 3) / 4;  // first j with 4j >= 2(m-1)
  double s = 0;
  for (int j = 1; j < j1; ++j) s += std::pow(j, r.p) * std::pow(Z, r.k0);
  s += poly_geom_sum(r.p, std::pow(Z, 4), j1);
  return finite(r.D0 * s / (r.M3 * (1 - Z)));
}

// 2 sum_{j>=1} D0 j^p sum_{k>=4j} (2m)^k t^{ak}
FreeBoundResult spin_path(const Resolved& r) {
  const double W = 2.0 * r.m * std::pow(r.t, r.a);
  if (W >= 1) return divergent("2m tanh(2kappa)^a >= 1");
  return finite(2 * r.D0 * poly_geom_sum(r.p, std::pow(W, 4), 1) / (1 - W));
}

struct KpTotals {
  double path = 0, spin = 0;
  bool divergent = false;
};

KpTotals kp_totals(const Resolved& r, double beta) {
  const auto pp = path_path(r), ss = spin_spin(r, beta), ps = path_spin_half(r, beta), sp = spin_path(r);
  KpTotals k;
  k.divergent = pp.divergent || ss.divergent || ps.divergent || sp.divergent;
  k.path = pp.value + 2 * ps.value;
  k.spin = ss.value + sp.value;
  return k;
}

}  // namespace

FreeBoundResult free_bound_eval(FreeBoundKind which, const FreeBoundArgs& args) {
  const Resolved r = resolve(args);
  const double len = args.length;
  switch (which) {
    case FreeBoundKind::PathPath: return path_path(r);
    case FreeBoundKind::SpinSpin: return spin_spin(r, args.beta);
    case FreeBoundKind::PathSpin: {
      auto res = path_spin_half(r, args.beta);
      res.value *= 2;
      return res;
    }
    case FreeBoundKind::SpinPath: return spin_path(r);
    case FreeBoundKind::Gamma0Term: {
      auto res = path_path(r);
      res.value *= len + 1;
      return res;
    }
    case FreeBoundKind::Gamma0Term2: {
      auto res = path_spin_half(r, args.beta);
      res.value *= len;
      return res;
    }
    case FreeBoundKind::Gamma0Term4: {
      const double eps = args.eps;
      if (!(eps > 0 && eps < 1)) throw DomainError("eps must lie in (0,1)");
      const double Zp = r.M3 * r.M3 * std::exp(-4 * (1 - eps) * args.beta);
      if (Zp >= 1) return divergent("M3^2 e^{-4(1-eps) beta} >= 1");
      const double s1 = std::pow(Zp, r.k0) / (r.M3 * (1 - Zp));
      const double u = std::max(std::exp(-4 * args.beta), r.t);
      const double ru = std::pow(u, 4 * eps);
      if (ru >= 1) return divergent("max(e^{-4 beta}, tanh 2kappa) = 1");
      // j with 4j <= 2(m-1) contribute j^p; beyond, j^p u^{eps(4j - 2(m-1))}
      const int jfull = r.k0 / 4;
      double s2 = 0;
      for (int j = 1; j <= jfull; ++j) s2 += std::pow(j, r.p);
      s2 += std::pow(u, -eps * r.k0) * poly_geom_sum(r.p, ru, jfull + 1);
      auto res = finite(2 * r.D0 * len * std::exp(-8 * args.beta * eps * (args.m - 1)) * s1 * s2);
      // preconditions: the bound needs ((1-eps) beta, kappa') admissible with tanh 2kappa' = t^{1-eps}
      Resolved rp = r;
      rp.t = std::pow(r.t, 1 - eps);
      const auto k = kp_totals(rp, (1 - eps) * args.beta);
      res.feasible = !k.divergent && k.path <= args.alpha && k.spin <= args.alpha;
      if (!res.feasible) res.note = "shifted parameters outside the admissible region";
      return res;
    }
    case FreeBoundKind::KPfeasible: {
      const auto k = kp_totals(r, args.beta);
      FreeBoundResult res;
      res.divergent = k.divergent;
      res.value = k.divergent ? kInf : std::max(k.path, k.spin);
      res.feasible = !k.divergent && k.path <= args.alpha && k.spin <= args.alpha;
      if (k.divergent) res.note = "a case series diverges";
      return res;
    }
  }
  throw DomainError("unknown free bound");
}

namespace {
const std::pair<const char*, FreeBoundKind> kFreeBoundNames[] = {
    {"PathPath", FreeBoundKind::PathPath},       {"SpinSpin", FreeBoundKind::SpinSpin},
    {"PathSpin", FreeBoundKind::PathSpin},       {"SpinPath", FreeBoundKind::SpinPath},
    {"Gamma0Term", FreeBoundKind::Gamma0Term},   {"Gamma0Term2", FreeBoundKind::Gamma0Term2},
    {"Gamma0Term4", FreeBoundKind::Gamma0Term4}, {"KPfeasible", FreeBoundKind::KPfeasible}};
}

FreeBoundKind parse_free_bound_kind(const std::string& s) {
  for (const auto& [n, k] : kFreeBoundNames)
    if (s == n) return k;
  throw DomainError("unknown free bound kind: " + s);
}

const char* free_bound_name(FreeBoundKind k) {
  for (const auto& [n, kk] : kFreeBoundNames)
    if (k == kk) return n;
  return "?";
}

// ---------------------------------------------------------------------------
// Report

namespace {

FreeExactBranch exact_branch(const Lattice& lat, const ModelParams& p, const Path& g1, const Path& g2) {
  FreeExactBranch b;
  const FreeExact fe(lat);
  const Bits s1 = g1.support(lat), s2 = g2.support(lat), s12 = (g1 + g2).support(lat);
  const Bits none(lat.count(1));
  const long double z1 = fe.z_open(p, s1), z2 = fe.z_open(p, s2);
  const long double z12 = fe.z(p, s12, none), z0 = fe.z(p, none, none);
  b.ratio_direct = static_cast<double>(z1 * z2 / (z12 * z0));

  const int L = std::min(lat.count(1), kCompletionBudget);
  const auto comp = decompose_open_line(lat, g1, L, p.kappa);
  const long double t = std::tanh(2.0L * p.kappa), norm = std::sqrt(z12 * z0);
  long double half = 0;
  for (const auto& g0 : comp.completions)
    half += std::pow(t, static_cast<long double>(g0.count())) * fe.z(p, s1 ^ g0, g0) / norm;
  b.ratio_decomposed = static_cast<double>(half * half);
  b.completions = comp.completions.size();

  b.ratio_reference = exact_mf_ratio(TinyLattice(lat), p, g1, g2).ratio;
  const double ref = b.ratio_reference;
  b.max_rel_error = std::max(std::fabs(b.ratio_direct - ref), std::fabs(b.ratio_decomposed - ref)) / std::fabs(ref);
  return b;
}

}  // namespace

FreeReport mf_ratio_free_report(const Lattice& lat, const ModelParams& p, int R, int T,
                                const FreeReportOptions& opt) {
  p.validate();
  FreeReport rep;
  rep.params = p;
  rep.m = lat.dim();
  rep.R = R;
  rep.T = T;
  rep.alpha = opt.alpha;
  rep.eps = opt.eps;

  FreeBoundArgs args;
  args.m = rep.m;
  args.alpha = opt.alpha;
  args.beta = p.beta;
  args.kappa = p.kappa;
  args.D0 = opt.D0;
  args.power = opt.power;
  args.eps = opt.eps;
  const auto kp = free_bound_eval(FreeBoundKind::KPfeasible, args);
  rep.admissible = kp.feasible;
  if (opt.require_admissible && !rep.admissible)
    throw DomainError("parameters outside the admissible free-phase region (KPfeasible is false)");

  const auto [g1, g2] = build_line_pair(lat, R, T);

  // per-unit-length coefficients: B(L) = (L+1) c0 + L (c2 + 4 c4)
  args.length = 1;
  const auto b0 = free_bound_eval(FreeBoundKind::PathPath, args);
  const auto b2 = free_bound_eval(FreeBoundKind::Gamma0Term2, args);
  const auto b4 = free_bound_eval(FreeBoundKind::Gamma0Term4, args);
  rep.gamma0_term4_ok = b4.feasible;
  const bool div = b0.divergent || b2.divergent || b4.divergent;
  const double c0 = b0.value, cl = b2.value + 4 * b4.value;
  const double t = std::tanh(2 * p.kappa);
  const double M0 = 4.0 * rep.m - 1;

  std::vector<std::uint64_t> enumerated;
  if (opt.enumerate_max > 0) enumerated = decompose_open_line(lat, g1, opt.enumerate_max, p.kappa).count_by_length;

  for (int i = 0; i < opt.rows; ++i) {
    FreeReportRow row;
    row.length = T + i;
    const double L = row.length;
    row.count_ceiling = std::pow(2.0 * rep.m, L);
    row.count_connected = 2.0 * rep.m * std::pow(std::exp(1.0) * M0, L - 1);
    if (row.length < static_cast<int>(enumerated.size())) row.enumerated = static_cast<long long>(enumerated[row.length]);
    row.weight = std::pow(t, L);
    row.a0 = (L + 1) * c0;
    row.a2 = L * b2.value;
    row.a1 = 4 * L * b4.value;
    row.contribution = div ? kInf : row.count_ceiling * row.weight * std::exp((row.a0 + row.a1 + row.a2) / 2);
    rep.rows.push_back(row);
  }

  auto geometric = [&](double x, double prefactor, double& q, bool& diverged) {
    q = div ? kInf : x * t * std::exp(cl / 2 + c0 / 2);
    diverged = div || !(q < 1);
    if (diverged) return kInf;
    // sum_{L>=T} prefactor x^L t^L e^{((L+1) c0 + L cl)/2}
    return prefactor * std::exp(c0 / 2) * std::pow(q, T) / (1 - q);
  };
  rep.sqrt_rho_upper = geometric(2.0 * rep.m, 1.0, rep.ratio_q, rep.divergent);
  rep.rho_upper = rep.divergent ? kInf : rep.sqrt_rho_upper * rep.sqrt_rho_upper;
  const double half_conn = geometric(std::exp(1.0) * M0, 2.0 * rep.m / (std::exp(1.0) * M0), rep.ratio_q_connected,
                                     rep.divergent_connected);
  rep.rho_upper_connected = rep.divergent_connected ? kInf : half_conn * half_conn;
  if (!rep.admissible) rep.note = "KPfeasible is false: the bounds are not certified at these parameters";

  if (opt.exact) rep.exact = exact_branch(lat, p, g1, g2);
  return rep;
}

}  // namespace z2lab
