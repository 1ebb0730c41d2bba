#include "z2lab/mc.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <limits>
#include <mutex>
#include <optional>
#include <thread>

namespace z2lab {

namespace {

constexpr double kTwo53 = 9007199254740992.0;

std::uint64_t threshold(double prob) {
  if (!(prob > 0)) return 0;
  if (prob >= 1) return std::uint64_t{1} << 53;
  return static_cast<std::uint64_t>(prob * kTwo53);
}

double nan() { return std::numeric_limits<double>::quiet_NaN(); }

// differences of O(1) sample means below this are rounding
constexpr double kCovarianceFloor = 1e-12;

}  // namespace

std::uint64_t chain_seed(std::uint64_t seed, int chain) {
  Rng r(seed ^ (0xd1b54a32d192ed03ULL * static_cast<std::uint64_t>(chain + 1)));
  return r.next();
}

void RunConfig::validate() const {
  if (sweeps <= 0) throw ConfigError("sweeps must be positive");
  if (burn() >= sweeps) throw ConfigError("burn_in must be smaller than sweeps");
  if (measure_every < 1) throw ConfigError("measure_every must be >= 1");
  if (bins < 10) throw ConfigError("bins must be >= 10");
  if (chains < 1) throw ConfigError("chains must be >= 1");
  if (threads < 1) throw ConfigError("threads must be >= 1");
  if (margin < 0) throw ConfigError("margin must be >= 0");
  const long n_meas = (sweeps - burn() + measure_every - 1) / measure_every;
  if (n_meas < bins) throw ConfigError("fewer measurements than bins after burn-in and thinning");
}

// ---------------------------------------------------------------------------
// Topology

Topology::Topology(const Lattice& lat) : E(lat.count(1)), V(lat.count(0)) {
  for (int e = 0; e < E; ++e) max_plaq = std::max<int>(max_plaq, static_cast<int>(lat.coboundary(1, e).size()));
  for (int v = 0; v < V; ++v) max_deg = std::max<int>(max_deg, static_cast<int>(lat.incident_edges(v).size()));

  others.assign(static_cast<std::size_t>(E) * max_plaq * 3, 0);
  nplaq.assign(E, 0);
  for (int e = 0; e < E; ++e) {
    int j = 0;
    for (const auto& pinc : lat.coboundary(1, e)) {
      int o = 0;
      for (const auto& einc : lat.boundary(2, pinc.cell))
        if (einc.cell != e) others[(static_cast<std::size_t>(e) * max_plaq + j) * 3 + o++] = einc.cell;
      ++j;
    }
    nplaq[e] = static_cast<std::uint8_t>(j);
  }

  vedges.assign(static_cast<std::size_t>(V) * max_deg, 0);
  vdeg.assign(V, 0);
  for (int v = 0; v < V; ++v) {
    int j = 0;
    for (const auto& inc : lat.incident_edges(v)) vedges[static_cast<std::size_t>(v) * max_deg + j++] = inc.cell;
    vdeg[v] = static_cast<std::uint8_t>(j);
  }

  prev.assign(E, -1);
  for (int e = 0; e < E; ++e) {
    const int a = lat.edge_axis(e);
    Point x = lat.vertex(lat.edge_tail(e));
    x[a] -= 1;
    if (!lat.contains(x)) continue;
    prev[e] = lat.index(1, x, 1u << a);
    if (prev[e] >= e) throw LatticeError("edge order is not compatible with line prefixes");
  }
}

// ---------------------------------------------------------------------------
// Sampler

struct Sampler::Tables {
  double beta = nan(), kappa = nan();
  int P = 0, D = 0;
  std::vector<std::uint64_t> heat;      // [np][k]: P(sigma_e = 1)
  std::vector<std::uint64_t> metro;     // [np][k][b]: P(accept flip)
  std::vector<std::uint64_t> vheat;     // [deg][occ]: P(flip)
  std::vector<std::uint64_t> vmetro;
  std::vector<double> cond;             // [np][k]: E[rho(sigma_e) | rest]
};

Sampler::Sampler(const Lattice& lat, std::uint64_t seed) : Sampler(std::make_shared<Topology>(lat), seed) {}

Sampler::Sampler(std::shared_ptr<const Topology> topo, std::uint64_t seed)
    : topo_(std::move(topo)), s_(topo_->E, 0), rng_(seed), tab_(std::make_shared<Tables>()) {}

Form Sampler::form(const Lattice& lat) const {
  Form f = Form::zero(lat, 1);
  for (int e = 0; e < topo_->E; ++e)
    if (s_[e]) f.bits.set(e);
  return f;
}

const Sampler::Tables& Sampler::tables(const ModelParams& p) {
  Tables& t = *tab_;
  if (t.beta == p.beta && t.kappa == p.kappa) return t;
  p.validate();
  t.beta = p.beta;
  t.kappa = p.kappa;
  const int P = topo_->max_plaq + 1, D = topo_->max_deg + 1;
  t.P = P;
  t.D = D;
  t.heat.assign(P * P, 0);
  t.metro.assign(P * P * 2, 0);
  t.cond.assign(P * P, 0);
  for (int np = 0; np < P; ++np)
    for (int k = 0; k <= np; ++k) {
      // sigma_e = 0 breaks k plaquettes, sigma_e = 1 breaks np - k
      const double x = 4.0 * p.beta * ((np - k) - k) + 4.0 * p.kappa;
      const double p1 = 1.0 / (1.0 + std::exp(x));
      t.heat[np * P + k] = threshold(p1);
      t.cond[np * P + k] = std::tanh(0.5 * x);  // (w0 - w1) / (w0 + w1)
      t.metro[(np * P + k) * 2 + 0] = threshold(std::min(1.0, std::exp(-x)));
      t.metro[(np * P + k) * 2 + 1] = threshold(std::min(1.0, std::exp(x)));
    }
  t.vheat.assign(D * D, 0);
  t.vmetro.assign(D * D, 0);
  for (int deg = 0; deg < D; ++deg)
    for (int occ = 0; occ <= deg; ++occ) {
      const double x = 4.0 * p.kappa * (deg - 2 * occ);  // -log of the weight ratio flipped/current
      t.vheat[deg * D + occ] = threshold(1.0 / (1.0 + std::exp(x)));
      t.vmetro[deg * D + occ] = threshold(std::min(1.0, std::exp(-x)));
    }
  return t;
}

void Sampler::sweep(const ModelParams& p, UpdateKind kind, bool vertex_moves) {
  const Tables& t = tables(p);
  const Topology& g = *topo_;
  std::uint8_t* s = s_.data();
  const std::int32_t* oth = g.others.data();
  const int MP = g.max_plaq, P = t.P;
  for (int e = 0; e < g.E; ++e) {
    const std::int32_t* o = oth + static_cast<std::size_t>(e) * MP * 3;
    const int np = g.nplaq[e];
    int k = 0;
    for (int j = 0; j < np; ++j) k += s[o[3 * j]] ^ s[o[3 * j + 1]] ^ s[o[3 * j + 2]];
    const std::uint64_t r = rng_.next() >> 11;
    if (kind == UpdateKind::HeatBath)
      s[e] = r < t.heat[np * P + k] ? 1 : 0;
    else if (r < t.metro[(np * P + k) * 2 + s[e]])
      s[e] ^= 1;
  }
  if (vertex_moves) {
    const int MD = g.max_deg, D = t.D;
    const auto& table = kind == UpdateKind::HeatBath ? t.vheat : t.vmetro;
    for (int v = 0; v < g.V; ++v) {
      const std::int32_t* ve = g.vedges.data() + static_cast<std::size_t>(v) * MD;
      const int deg = g.vdeg[v];
      int occ = 0;
      for (int j = 0; j < deg; ++j) occ += s[ve[j]];
      if ((rng_.next() >> 11) < table[deg * D + occ])
        for (int j = 0; j < deg; ++j) s[ve[j]] ^= 1;
    }
  }
  ++sweeps_;
}

void Sampler::edge_expectations(const ModelParams& p, std::vector<double>& f) const {
  const Tables& t = const_cast<Sampler*>(this)->tables(p);
  const Topology& g = *topo_;
  const std::uint8_t* s = s_.data();
  f.resize(g.E);
  for (int e = 0; e < g.E; ++e) {
    const std::int32_t* o = g.others.data() + static_cast<std::size_t>(e) * g.max_plaq * 3;
    const int np = g.nplaq[e];
    int k = 0;
    for (int j = 0; j < np; ++j) k += s[o[3 * j]] ^ s[o[3 * j + 1]] ^ s[o[3 * j + 2]];
    f[e] = t.cond[np * t.P + k];
  }
}

double Sampler::edge_expectation(const ModelParams& p, int e) const {
  const Tables& t = const_cast<Sampler*>(this)->tables(p);
  const Topology& g = *topo_;
  const std::uint8_t* s = s_.data();
  const std::int32_t* o = g.others.data() + static_cast<std::size_t>(e) * g.max_plaq * 3;
  const int np = g.nplaq[e];
  int k = 0;
  for (int j = 0; j < np; ++j) k += s[o[3 * j]] ^ s[o[3 * j + 1]] ^ s[o[3 * j + 2]];
  return t.cond[np * t.P + k];
}

// ---------------------------------------------------------------------------
// Jackknife

EstimatorResult jackknife(const std::vector<std::vector<double>>& bin_means, long n_samples,
                          const std::function<double(const std::vector<double>&)>& f) {
  EstimatorResult r;
  const int nb = static_cast<int>(bin_means.size());
  r.n_bins = nb;
  r.n_samples = n_samples;
  if (nb < 2) throw ConfigError("jackknife needs at least two bins");
  const std::size_t K = bin_means[0].size();
  std::vector<double> total(K, 0.0);
  for (const auto& b : bin_means)
    for (std::size_t k = 0; k < K; ++k) total[k] += b[k];
  std::vector<double> mean(K);
  for (std::size_t k = 0; k < K; ++k) mean[k] = total[k] / nb;
  r.mean = f(mean);
  std::vector<double> loo(K), vals(nb);
  double avg = 0;
  for (int b = 0; b < nb; ++b) {
    for (std::size_t k = 0; k < K; ++k) loo[k] = (total[k] - bin_means[b][k]) / (nb - 1);
    vals[b] = f(loo);
    avg += vals[b];
  }
  avg /= nb;
  double ss = 0;
  for (double v : vals) ss += (v - avg) * (v - avg);
  r.stderr_ = std::sqrt(ss * (nb - 1) / nb);
  // identical replicates: report an exact zero rather than rounding noise
  if (std::all_of(vals.begin(), vals.end(), [&](double v) { return v == vals[0]; })) r.stderr_ = 0;
  return r;
}

EstimatorResult jackknife_mean(const std::vector<double>& samples, int bins) {
  if (bins < 2 || static_cast<long>(samples.size()) < bins) throw ConfigError("not enough samples for the bins");
  const std::size_t size = samples.size() / bins;
  const std::size_t skip = samples.size() - size * bins;
  std::vector<std::vector<double>> bm(bins, std::vector<double>(1, 0.0));
  double sum = 0, sumsq = 0;
  for (int b = 0; b < bins; ++b) {
    for (std::size_t i = 0; i < size; ++i) {
      const double x = samples[skip + b * size + i];
      bm[b][0] += x;
      sum += x;
      sumsq += x * x;
    }
    bm[b][0] /= static_cast<double>(size);
  }
  const long n = static_cast<long>(size * bins);
  EstimatorResult r = jackknife(bm, n, [](const std::vector<double>& v) { return v[0]; });
  const double var = sumsq / n - (sum / n) * (sum / n);
  r.autocorr_hint = var > 0 ? r.stderr_ * r.stderr_ * n / var : 1.0;
  return r;
}

// ---------------------------------------------------------------------------
// Compiled observables: each sample value is an average over translates of a product of
// edge factors, evaluated via prefix sums along the lattice lines.

namespace {

struct Segment {
  std::int32_t last, before;  // prefix index range (before may be -1)
  bool rb;
};

struct Observable {
  std::vector<std::vector<Segment>> translates;
};

class Compiler {
 public:
  Compiler(const Lattice& lat, const Topology& topo, bool rb) : lat_(lat), topo_(topo), rb_(rb), next_(topo.E, -1) {
    for (int e = 0; e < topo.E; ++e)
      if (topo.prev[e] >= 0) next_[topo.prev[e]] = e;
  }

  std::vector<Segment> compile(const Bits& edges) const {
    const int E = topo_.E;
    std::vector<char> elig(E, 0);
    for (auto e = edges.find_first(); e != Bits::npos; e = edges.find_next(e)) {
      bool ok = rb_;
      const int np = topo_.nplaq[e];
      for (int j = 0; ok && j < np * 3; ++j)
        if (edges.test(topo_.others[(static_cast<std::size_t>(e) * topo_.max_plaq * 3) + j])) ok = false;
      elig[e] = ok;
    }
    std::vector<Segment> segs;
    for (auto e = edges.find_first(); e != Bits::npos; e = edges.find_next(e)) {
      const int pe = topo_.prev[e];
      if (pe >= 0 && edges.test(pe) && elig[pe] == elig[e]) continue;  // not a run head
      int last = static_cast<int>(e);
      while (next_[last] >= 0 && edges.test(next_[last]) && elig[next_[last]] == elig[e]) last = next_[last];
      segs.push_back({last, pe, elig[e] != 0});
    }
    return segs;
  }

  // Edge set shifted by a vector; empty optional when it leaves the box.
  std::optional<Bits> shift(const Bits& edges, const Point& s) const {
    Bits out(topo_.E);
    for (auto e = edges.find_first(); e != Bits::npos; e = edges.find_next(e)) {
      Point x = lat_.vertex(lat_.edge_tail(static_cast<int>(e)));
      for (std::size_t i = 0; i < x.size(); ++i) x[i] += s[i];
      const int a = lat_.edge_axis(static_cast<int>(e));
      Point y = x;
      y[a] += 1;
      if (!lat_.contains(x) || !lat_.contains(y)) return std::nullopt;
      out.set(lat_.index(1, x, 1u << a));
    }
    return out;
  }

  // Shifts keeping every edge set inside the box shrunk by margin, together with the
  // zero shift (only zero when !all).
  std::vector<Point> shifts(const std::vector<Bits>& sets, bool all, int margin) const {
    const int m = lat_.dim();
    if (!all) return {Point(m, 0)};
    Point mn(m, std::numeric_limits<int>::max()), mx(m, std::numeric_limits<int>::min());
    bool any = false;
    for (const auto& b : sets)
      for (auto e = b.find_first(); e != Bits::npos; e = b.find_next(e)) {
        any = true;
        for (int v : {lat_.edge_tail(static_cast<int>(e)), lat_.edge_head(static_cast<int>(e))}) {
          const Point x = lat_.vertex(v);
          for (int i = 0; i < m; ++i) {
            mn[i] = std::min(mn[i], x[i]);
            mx[i] = std::max(mx[i], x[i]);
          }
        }
      }
    if (!any) return {Point(m, 0)};
    std::vector<Point> out;
    Point s(m);
    Point lo(m), hi(m);
    for (int i = 0; i < m; ++i) {
      lo[i] = std::min(0, lat_.lo()[i] + margin - mn[i]);
      hi[i] = std::max(0, lat_.hi()[i] - margin - mx[i]);
    }
    s = lo;
    while (true) {
      out.push_back(s);
      int i = 0;
      for (; i < m; ++i) {
        if (++s[i] <= hi[i]) break;
        s[i] = lo[i];
      }
      if (i == m) break;
    }
    return out;
  }

 private:
  const Lattice& lat_;
  const Topology& topo_;
  bool rb_;
  std::vector<int> next_;
};

// Few edges in total: walk every segment edge by edge. Otherwise use prefix sums along
// the lattice lines, computed once per measurement.
class Evaluator {
 public:
  Evaluator(const Topology& topo, const std::vector<Observable>& obs) : topo_(topo), obs_(obs) {
    long total = 0;
    for (const auto& o : obs)
      for (const auto& t : o.translates)
        for (const auto& sg : t) {
          need_rb_ = need_rb_ || sg.rb;
          for (int e = sg.last; e != sg.before; e = topo.prev[e]) ++total;
        }
    prefix_ = total > 2L * topo.E;
    if (prefix_) {
      parity_.assign(topo.E + 1, 0);
      logs_.assign(topo.E + 1, 0);
      neg_.assign(topo.E + 1, 0);
      zero_.assign(topo.E + 1, 0);
    }
  }

  void measure(const Sampler& smp, const ModelParams& p, double* out) {
    if (prefix_)
      measure_prefix(smp, p, out);
    else
      measure_direct(smp, p, out);
  }

 private:
  void measure_direct(const Sampler& smp, const ModelParams& p, double* out) const {
    const auto& s = smp.sigma();
    for (std::size_t k = 0; k < obs_.size(); ++k) {
      double acc = 0;
      for (const auto& t : obs_[k].translates) {
        int par = 0;
        double prod = 1;
        for (const auto& sg : t)
          for (int e = sg.last; e != sg.before; e = topo_.prev[e]) {
            if (sg.rb)
              prod *= smp.edge_expectation(p, e);
            else
              par ^= s[e];
          }
        acc += par ? -prod : prod;
      }
      out[k] = acc / static_cast<double>(obs_[k].translates.size());
    }
  }

  void measure_prefix(const Sampler& smp, const ModelParams& p, double* out) {
    const int E = topo_.E;
    const auto& s = smp.sigma();
    if (need_rb_) smp.edge_expectations(p, f_);
    // shifted by one so that index 0 stands for "before the line"
    for (int e = 0; e < E; ++e) {
      const int q = topo_.prev[e] + 1;
      parity_[e + 1] = parity_[q] ^ s[e];
      if (need_rb_) {
        const double x = f_[e];
        zero_[e + 1] = zero_[q] + (x == 0.0);
        neg_[e + 1] = neg_[q] ^ (x < 0.0);
        logs_[e + 1] = logs_[q] + (x == 0.0 ? 0.0 : std::log(std::fabs(x)));
      }
    }
    for (std::size_t k = 0; k < obs_.size(); ++k) {
      double acc = 0;
      for (const auto& t : obs_[k].translates) {
        int par = 0, zeros = 0;
        double lg = 0;
        for (const auto& sg : t) {
          const int a = sg.last + 1, b = sg.before + 1;
          if (sg.rb) {
            zeros += zero_[a] - zero_[b];
            par ^= neg_[a] ^ neg_[b];
            lg += logs_[a] - logs_[b];
          } else {
            par ^= parity_[a] ^ parity_[b];
          }
        }
        if (zeros) continue;
        const double mag = lg == 0.0 ? 1.0 : std::exp(lg);
        acc += par ? -mag : mag;
      }
      out[k] = acc / static_cast<double>(obs_[k].translates.size());
    }
  }

  const Topology& topo_;
  const std::vector<Observable>& obs_;
  bool need_rb_ = false, prefix_ = false;
  std::vector<double> f_;
  std::vector<std::uint8_t> parity_;
  std::vector<double> logs_;
  std::vector<std::uint8_t> neg_;
  std::vector<int> zero_;
};

struct ChainOutput {
  std::vector<std::vector<double>> bins;  // bins x K
  std::vector<double> sum, sumsq;
  long n = 0;
};

ChainOutput run_chain(const std::shared_ptr<const Topology>& topo, const ModelParams& p, const RunConfig& cfg,
                      int chain, const std::vector<Observable>& obs) {
  Sampler smp(topo, chain_seed(cfg.seed, chain));
  Evaluator ev(*topo, obs);
  const std::size_t K = obs.size();
  const long burn = cfg.burn();
  const long n_meas = (cfg.sweeps - burn + cfg.measure_every - 1) / cfg.measure_every;
  const long size = n_meas / cfg.bins;
  const long skip = n_meas - size * cfg.bins;

  ChainOutput out;
  out.bins.assign(cfg.bins, std::vector<double>(K, 0.0));
  out.sum.assign(K, 0.0);
  out.sumsq.assign(K, 0.0);
  std::vector<double> v(K);
  for (long i = 0; i < burn; ++i) smp.sweep(p, cfg.update, cfg.vertex_moves);
  long m = 0;
  for (long i = 0; i < cfg.sweeps - burn; ++i) {
    smp.sweep(p, cfg.update, cfg.vertex_moves);
    if (i % cfg.measure_every) continue;
    if (m >= skip) {
      ev.measure(smp, p, v.data());
      auto& b = out.bins[(m - skip) / size];
      for (std::size_t k = 0; k < K; ++k) {
        b[k] += v[k];
        out.sum[k] += v[k];
        out.sumsq[k] += v[k] * v[k];
      }
      ++out.n;
    }
    ++m;
  }
  for (auto& b : out.bins)
    for (double& x : b) x /= static_cast<double>(size);
  return out;
}

struct Pooled {
  std::vector<std::vector<double>> bins;
  std::vector<double> var;  // naive per-sample variance of each component
  long n = 0;
};

Pooled run_all(const Lattice& lat, const ModelParams& p, const RunConfig& cfg, const std::vector<Observable>& obs) {
  cfg.validate();
  p.validate();
  auto topo = std::make_shared<const Topology>(lat);
  std::vector<ChainOutput> outs(cfg.chains);
  std::atomic<int> next{0};
  std::mutex err_mu;
  std::exception_ptr err;
  auto worker = [&] {
    for (int c; (c = next++) < cfg.chains;) {
      try {
        outs[c] = run_chain(topo, p, cfg, c, obs);
      } catch (...) {
        std::lock_guard<std::mutex> lk(err_mu);
        if (!err) err = std::current_exception();
      }
    }
  };
  const int nt = std::min(cfg.threads, cfg.chains);
  if (nt <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int i = 0; i < nt; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (err) std::rethrow_exception(err);

  // aggregate in seed order
  Pooled r;
  const std::size_t K = obs.size();
  std::vector<double> sum(K, 0.0), sumsq(K, 0.0);
  for (const auto& o : outs) {
    r.bins.insert(r.bins.end(), o.bins.begin(), o.bins.end());
    for (std::size_t k = 0; k < K; ++k) {
      sum[k] += o.sum[k];
      sumsq[k] += o.sumsq[k];
    }
    r.n += o.n;
  }
  r.var.resize(K);
  for (std::size_t k = 0; k < K; ++k) r.var[k] = std::max(0.0, sumsq[k] / r.n - (sum[k] / r.n) * (sum[k] / r.n));
  return r;
}

EstimatorResult component(const Pooled& d, std::size_t k) {
  EstimatorResult r = jackknife(d.bins, d.n, [k](const std::vector<double>& v) { return v[k]; });
  r.autocorr_hint = d.var[k] > 0 ? r.stderr_ * r.stderr_ * d.n / d.var[k] : 1.0;
  return r;
}

Observable single(const Compiler& cc, const Bits& edges) { return Observable{{cc.compile(edges)}}; }

// Three observables (first, second, first + second) averaged over common translates.
std::array<Observable, 3> pair_observables(const Compiler& cc, const Bits& a, const Bits& b, const RunConfig& cfg) {
  std::array<Observable, 3> o;
  const Bits ab = a ^ b;
  for (const auto& s : cc.shifts({a, b}, cfg.translate, cfg.margin)) {
    auto ta = cc.shift(a, s), tb = cc.shift(b, s), tab = cc.shift(ab, s);
    if (!ta || !tb || !tab) continue;
    o[0].translates.push_back(cc.compile(*ta));
    o[1].translates.push_back(cc.compile(*tb));
    o[2].translates.push_back(cc.compile(*tab));
  }
  if (o[0].translates.empty()) throw LatticeError("paths do not fit in the box");
  return o;
}

RatioResult ratio_from(const Pooled& d, std::size_t base, long translates) {
  RatioResult r;
  r.translates = translates;
  r.w1 = component(d, base);
  r.w2 = component(d, base + 1);
  r.w12 = component(d, base + 2);
  r.rho = jackknife(d.bins, d.n, [base](const std::vector<double>& v) { return v[base] * v[base + 1] / v[base + 2]; });
  r.log_rho = jackknife(d.bins, d.n, [base](const std::vector<double>& v) {
    if (v[base] <= 0 || v[base + 1] <= 0 || v[base + 2] <= 0) return nan();
    return std::log(v[base]) + std::log(v[base + 1]) - std::log(v[base + 2]);
  });
  if (std::fabs(r.w12.mean) < 2.0 * r.w12.stderr_ || r.w12.mean == 0.0)
    r.flag = RatioFlag::Unresolved;
  else if (!std::isfinite(r.log_rho.mean) || !std::isfinite(r.log_rho.stderr_))
    r.flag = RatioFlag::NonPositive;
  return r;
}

}  // namespace

std::vector<EstimatorResult> estimate(const Lattice& lat, const ModelParams& p, const std::vector<Path>& observables,
                                      const RunConfig& cfg) {
  Topology topo(lat);
  Compiler cc(lat, topo, cfg.rao_blackwell);
  std::vector<Observable> obs;
  for (const auto& g : observables) obs.push_back(single(cc, g.support(lat)));
  const Pooled d = run_all(lat, p, cfg, obs);
  std::vector<EstimatorResult> out;
  for (std::size_t k = 0; k < obs.size(); ++k) out.push_back(component(d, k));
  return out;
}

const char* ratio_flag_name(RatioFlag f) {
  switch (f) {
    case RatioFlag::Ok: return "ok";
    case RatioFlag::Unresolved: return "unresolved";
    case RatioFlag::NonPositive: return "nonpositive";
  }
  return "?";
}

RatioResult estimate_mf_ratio(const Lattice& lat, const ModelParams& p, const Path& g1, const Path& g2,
                              const RunConfig& cfg) {
  Topology topo(lat);
  Compiler cc(lat, topo, cfg.rao_blackwell);
  auto o = pair_observables(cc, g1.support(lat), g2.support(lat), cfg);
  const long nt = static_cast<long>(o[0].translates.size());
  std::vector<Observable> obs(o.begin(), o.end());
  return ratio_from(run_all(lat, p, cfg, obs), 0, nt);
}

std::vector<RatioResult> estimate_mf_ratios(const Lattice& lat, const ModelParams& p,
                                            const std::vector<std::pair<int, int>>& sizes, const RunConfig& cfg) {
  Topology topo(lat);
  Compiler cc(lat, topo, cfg.rao_blackwell);
  std::vector<Observable> obs;
  std::vector<long> nts;
  for (auto [R, T] : sizes) {
    auto [g1, g2] = build_line_pair(lat, R, T);
    auto o = pair_observables(cc, g1.support(lat), g2.support(lat), cfg);
    nts.push_back(static_cast<long>(o[0].translates.size()));
    for (auto& x : o) obs.push_back(std::move(x));
  }
  const Pooled d = run_all(lat, p, cfg, obs);
  std::vector<RatioResult> out;
  for (std::size_t i = 0; i < sizes.size(); ++i) out.push_back(ratio_from(d, 3 * i, nts[i]));
  return out;
}

CorrelationTable correlation_decay(const Lattice& lat, const ModelParams& p, const Path& templ, int axis,
                                   const std::vector<int>& separations, const RunConfig& cfg) {
  if (axis < 0 || axis >= lat.dim()) throw ConfigError("axis out of range");
  Topology topo(lat);
  Compiler cc(lat, topo, cfg.rao_blackwell);
  const Bits a = templ.support(lat);
  std::vector<Observable> obs;
  CorrelationTable tab;
  for (int sep : separations) {
    Point s(lat.dim(), 0);
    s[axis] = sep;
    auto b = cc.shift(a, s);
    if (!b) throw LatticeError("translated path leaves the box");
    CovariancePoint pt;
    pt.separation = sep;
    std::optional<Path> moved = translate(lat, templ, s);
    pt.distance = dist(lat, templ, *moved);
    tab.points.push_back(pt);
    auto o = pair_observables(cc, a, *b, cfg);
    for (auto& x : o) obs.push_back(std::move(x));
  }
  const Pooled d = run_all(lat, p, cfg, obs);
  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < tab.points.size(); ++i) {
    const std::size_t b = 3 * i;
    auto& pt = tab.points[i];
    pt.cov = jackknife(d.bins, d.n, [b](const std::vector<double>& v) { return v[b + 2] - v[b] * v[b + 1]; });
    // a zero error bar (frozen chain) or a value at rounding level is not a resolution
    pt.resolved = pt.cov.stderr_ > 0 && std::fabs(pt.cov.mean) > 3.0 * pt.cov.stderr_ &&
                  std::fabs(pt.cov.mean) > kCovarianceFloor;
    if (pt.resolved) {
      xs.push_back(pt.distance);
      ys.push_back(std::log(std::fabs(pt.cov.mean)));
    }
  }
  tab.fitted = static_cast<int>(xs.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  if (xs.size() >= 2) {
    mx /= xs.size();
    my /= xs.size();
    double sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      sxx += (xs[i] - mx) * (xs[i] - mx);
      sxy += (xs[i] - mx) * (ys[i] - my);
    }
    if (sxx > 0) {
      tab.rate = -sxy / sxx;
      tab.fit_ok = true;
    }
  }
  if (!tab.fit_ok) tab.rate = nan();
  return tab;
}

std::vector<ScanRow> scan(int m, int N, const std::vector<ModelParams>& grid,
                          const std::vector<std::pair<int, int>>& sizes, const RunConfig& cfg) {
  const Lattice lat = Lattice::box(m, N);
  std::vector<ScanRow> rows;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    RunConfig c = cfg;
    c.seed = cfg.seed + i;
    const auto res = estimate_mf_ratios(lat, grid[i], sizes, c);
    for (std::size_t j = 0; j < sizes.size(); ++j)
      rows.push_back(ScanRow{grid[i], m, N, sizes[j].first, sizes[j].second, res[j], c.sweeps, c.seed});
  }
  return rows;
}

std::string scan_csv_header() {
  return "beta,kappa,m,N,R,T,rho,rho_stderr,log_rho,log_rho_stderr,flag,sweeps,seed";
}

std::string scan_csv_row(const ScanRow& r) {
  char buf[512];
  std::snprintf(buf, sizeof buf, "%.17g,%.17g,%d,%d,%d,%d,%.17g,%.17g,%.17g,%.17g,%s,%ld,%llu", r.params.beta,
                r.params.kappa, r.m, r.N, r.R, r.T, r.result.rho.mean, r.result.rho.stderr_, r.result.log_rho.mean,
                r.result.log_rho.stderr_, ratio_flag_name(r.result.flag), r.sweeps,
                static_cast<unsigned long long>(r.seed));
  return buf;
}

}  // namespace z2lab
