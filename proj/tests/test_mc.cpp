#include <cmath>
#include <map>

#include "doctest.h"
#include "z2lab/exact.hpp"
#include "z2lab/mc.hpp"

using namespace z2lab;

namespace {

RunConfig quick(long sweeps, std::uint64_t seed = 7) {
  RunConfig c;
  c.sweeps = sweeps;
  c.seed = seed;
  c.bins = 20;
  return c;
}

bool within(const EstimatorResult& r, double exact, double nsigma = 4.0, double slack = 1e-12) {
  return std::fabs(r.mean - exact) <= nsigma * r.stderr_ + slack;
}

}  // namespace

TEST_CASE("rng and seeds") {
  Rng a(42), b(42);
  for (int i = 0; i < 100; ++i) CHECK(a.next() == b.next());
  Rng c(1);
  double lo = 1, hi = 0, sum = 0;
  for (int i = 0; i < 100000; ++i) {
    const double u = c.uniform();
    lo = std::min(lo, u);
    hi = std::max(hi, u);
    sum += u;
  }
  CHECK(lo >= 0.0);
  CHECK(hi < 1.0);
  CHECK(sum / 100000 == doctest::Approx(0.5).epsilon(0.01));
  CHECK(chain_seed(1, 0) != chain_seed(1, 1));
  CHECK(chain_seed(1, 0) != chain_seed(2, 0));
}

TEST_CASE("run config validation") {
  RunConfig c = quick(1000);
  CHECK_NOTHROW(c.validate());
  c.bins = 5;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = quick(1000);
  c.burn_in = 1000;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = quick(100);
  c.measure_every = 10;
  CHECK_THROWS_AS(c.validate(), ConfigError);  // 9 measurements < 20 bins
  c = quick(1000);
  c.chains = 0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  const Lattice lat = tiny::single_edge();
  CHECK_THROWS_AS(estimate(lat, {0, 0}, {Path::single_edge(lat, 0)}, quick(10)), ConfigError);
}

TEST_CASE("jackknife") {
  SUBCASE("constant observable") {
    const auto r = jackknife_mean(std::vector<double>(1000, 1.0), 50);
    CHECK(r.mean == 1.0);
    CHECK(r.stderr_ == 0.0);
    CHECK(r.n_bins == 50);
    CHECK(r.n_samples == 1000);
  }
  SUBCASE("iid signs") {
    Rng rng(3);
    const long n = 100000;
    std::vector<double> x(n);
    for (auto& v : x) v = (rng.next() >> 63) ? 1.0 : -1.0;
    const auto r = jackknife_mean(x, 50);
    CHECK(r.stderr_ == doctest::Approx(1.0 / std::sqrt(static_cast<double>(n))).epsilon(0.2));
    CHECK(r.autocorr_hint == doctest::Approx(1.0).epsilon(0.5));
  }
  SUBCASE("remainder dropped at the start") {
    std::vector<double> x(105, 0.0);
    for (int i = 0; i < 5; ++i) x[i] = 100.0;
    const auto r = jackknife_mean(x, 10);
    CHECK(r.mean == 0.0);
    CHECK(r.n_samples == 100);
  }
  SUBCASE("nonlinear function of means") {
    // ratio of two exact constants
    std::vector<std::vector<double>> bins(10, {2.0, 4.0});
    const auto r = jackknife(bins, 10, [](const std::vector<double>& v) { return v[0] / v[1]; });
    CHECK(r.mean == 0.5);
    CHECK(r.stderr_ == 0.0);
  }
}

TEST_CASE("topology tables") {
  const Lattice lat = Lattice::box(3, 2);
  const Topology t(lat);
  CHECK(t.E == lat.count(1));
  CHECK(t.max_plaq == 4);
  CHECK(t.max_deg == 6);
  for (int e = 0; e < t.E; ++e) {
    CHECK(t.nplaq[e] == lat.coboundary(1, e).size());
    if (t.prev[e] >= 0) {
      CHECK(lat.edge_head(t.prev[e]) == lat.edge_tail(e));
      CHECK(lat.edge_axis(t.prev[e]) == lat.edge_axis(e));
    }
  }
}

TEST_CASE("conditional expectations match the model") {
  const Lattice lat = tiny::cube2();
  const ModelParams p{0.37, 0.21};
  Sampler s(lat, 11);
  std::vector<double> f;
  for (int rep = 0; rep < 20; ++rep) {
    s.sweep({0.05, 0.05});  // scramble
    const Form sig = s.form(lat);
    s.edge_expectations(p, f);
    for (int e = 0; e < lat.count(1); ++e)
      CHECK(f[e] == doctest::Approx(1.0 - 2.0 * local_conditional(lat, sig, e, p)).epsilon(1e-12));
  }
}

TEST_CASE("independent edges at beta = 0") {
  const Lattice lat = tiny::cube2();
  const Path e = Path::single_edge(lat, 3);
  SUBCASE("kappa = 2: occupation 1/(1+e^8)") {
    RunConfig c = quick(200000);
    c.rao_blackwell = false;
    const auto r = estimate(lat, {0.0, 2.0}, {e}, c)[0];
    const double occ = 0.5 * (1.0 - r.mean), occ_err = 0.5 * r.stderr_;
    const double exact = 1.0 / (1.0 + std::exp(8.0));
    CHECK(std::fabs(occ - exact) <= 4 * occ_err + 1e-12);
    CHECK(occ_err > 0);
  }
  SUBCASE("kappa = 0: <W_e> = 0") {
    RunConfig c = quick(20000);
    c.rao_blackwell = false;
    const auto r = estimate(lat, {0.0, 0.0}, {e}, c)[0];
    CHECK(within(r, 0.0));
    CHECK(r.stderr_ == doctest::Approx(1.0 / std::sqrt(18000.0)).epsilon(0.3));
  }
  SUBCASE("empty path is constant") {
    const auto r = estimate(lat, {0.4, 0.3}, {Path{}}, quick(2000))[0];
    CHECK(r.mean == 1.0);
    CHECK(r.stderr_ == 0.0);
  }
}

TEST_CASE("agreement with exact enumeration") {
  const TinyLattice tl(tiny::cube2());
  const Lattice& lat = tl.lattice();
  const std::vector<Path> paths = {
      Path::single_edge(lat, 0),
      Path::walk(lat, {{0, 0, 0}, {1, 0, 0}, {1, 1, 0}}),
      Path::walk(lat, {{0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 1, 0}, {0, 0, 0}}),
      Path::walk(lat, {{0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {1, 1, 1}, {0, 1, 1}}),
  };
  const ModelParams p{0.3, 0.6};
  for (UpdateKind kind : {UpdateKind::HeatBath, UpdateKind::Metropolis})
    for (bool rb : {false, true}) {
      CAPTURE(rb);
      RunConfig c = quick(60000, 5);
      c.update = kind;
      c.rao_blackwell = rb;
      const auto est = estimate(lat, p, paths, c);
      for (std::size_t i = 0; i < paths.size(); ++i) {
        CAPTURE(i);
        const double ex = exact_expectation(tl, p, paths[i], Ensemble::Unitary).mean;
        CHECK(within(est[i], ex));
      }
    }
}

TEST_CASE("ratio against exact enumeration") {
  const TinyLattice tl(tiny::slab());
  const Lattice& lat = tl.lattice();
  auto [g1, g2] = build_line_pair(lat, 1, 1);
  for (ModelParams p : {ModelParams{0.0, 3.0}, ModelParams{0.3, 0.6}, ModelParams{1.2, 0.1}}) {
    CAPTURE(p.beta);
    RunConfig c = quick(60000, 9);
    c.translate = false;
    const auto r = estimate_mf_ratio(lat, p, g1, g2, c);
    const auto ex = exact_mf_ratio(tl, p, g1, g2);
    CHECK(r.translates == 1);
    CHECK(r.flag == RatioFlag::Ok);
    CHECK(within(r.rho, ex.ratio, 4.0, 1e-9));
    CHECK(within(r.log_rho, ex.log_ratio, 4.0, 1e-9));
  }
  SUBCASE("beta = kappa = 0 is unresolved") {
    RunConfig c = quick(5000, 9);
    c.translate = false;
    CHECK(estimate_mf_ratio(lat, {0, 0}, g1, g2, c).flag == RatioFlag::Unresolved);
    c.rao_blackwell = false;
    CHECK(estimate_mf_ratio(lat, {0, 0}, g1, g2, c).flag == RatioFlag::Unresolved);
  }
}

TEST_CASE("detailed balance on a single plaquette") {
  const Lattice lat = tiny::single_plaquette();
  const ModelParams p{0.3, 0.2};
  std::vector<double> w(16);
  double z = 0;
  for (int s = 0; s < 16; ++s) {
    Form f = Form::zero(lat, 1);
    for (int e = 0; e < 4; ++e) f.bits[e] = s >> e & 1;
    w[s] = activity(lat, f, p);
    z += w[s];
  }
  for (UpdateKind kind : {UpdateKind::HeatBath, UpdateKind::Metropolis}) {
    Sampler smp(lat, 21);
    for (int i = 0; i < 100; ++i) smp.sweep(p, kind);
    std::vector<long> hist(16, 0);
    const long n = 1000000;
    for (long i = 0; i < n; ++i) {
      smp.sweep(p, kind);
      const auto& s = smp.sigma();
      ++hist[s[0] | s[1] << 1 | s[2] << 2 | s[3] << 3];
    }
    double chi2 = 0;
    for (int s = 0; s < 16; ++s) {
      const double expct = n * w[s] / z;
      chi2 += (hist[s] - expct) * (hist[s] - expct) / expct;
    }
    CAPTURE(chi2);
    CHECK(chi2 < 37.70);  // chi^2_{15} at 0.999
  }
}

TEST_CASE("determinism and chain aggregation") {
  const Lattice lat = Lattice::box(3, 2);
  RunConfig c = quick(400, 17);
  c.chains = 3;
  const std::vector<std::pair<int, int>> sizes = {{1, 1}, {1, 2}};
  const auto a = estimate_mf_ratios(lat, {0.4, 0.5}, sizes, c);
  const auto b = estimate_mf_ratios(lat, {0.4, 0.5}, sizes, c);
  c.threads = 3;
  const auto d = estimate_mf_ratios(lat, {0.4, 0.5}, sizes, c);
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    CHECK(a[i].rho.mean == b[i].rho.mean);
    CHECK(a[i].rho.stderr_ == b[i].rho.stderr_);
    CHECK(a[i].rho.mean == d[i].rho.mean);
    CHECK(a[i].w12.stderr_ == d[i].w12.stderr_);
    CHECK(a[i].rho.n_bins == 60);
  }
  CHECK(a[0].translates == 1);
  c.translate = true;
  c.margin = 0;
  // every translate of the (1,1) pair inside B_2: 4 x 3 x 5
  CHECK(estimate_mf_ratios(lat, {0.4, 0.5}, sizes, c)[0].translates == 60);
  c.margin = 1;
  // x1 in {-1, 0}, x2 fixed, x3 in {-1, 0, 1}
  CHECK(estimate_mf_ratios(lat, {0.4, 0.5}, sizes, c)[0].translates == 6);
  c.translate = false;
  c.seed = 18;
  CHECK(estimate_mf_ratios(lat, {0.4, 0.5}, sizes, c)[0].rho.mean != a[0].rho.mean);
}

TEST_CASE("translated and Rao-Blackwellised estimates agree with raw ones") {
  const Lattice lat = Lattice::box(3, 3);
  // in a 2 x 1 rectangle every edge shares a plaquette with another loop edge, so only
  // the 4 x 3 rectangle has edges that are replaced by conditional expectations
  const std::vector<std::pair<int, int>> sizes = {{1, 1}, {2, 3}};
  RunConfig c = quick(4000, 23);
  c.translate = true;
  const auto rb = estimate_mf_ratios(lat, {0.25, 0.35}, sizes, c);
  c.rao_blackwell = false;
  const auto raw = estimate_mf_ratios(lat, {0.25, 0.35}, sizes, c);
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    CAPTURE(i);
    const double s = std::hypot(rb[i].rho.stderr_, raw[i].rho.stderr_);
    CHECK(std::fabs(rb[i].rho.mean - raw[i].rho.mean) <= 4 * s);
  }
  CHECK(rb[0].w12.stderr_ == raw[0].w12.stderr_);
  CHECK(rb[1].w12.stderr_ < raw[1].w12.stderr_);
  CHECK(rb[1].w1.stderr_ < raw[1].w1.stderr_);
}

TEST_CASE("prefix and direct evaluation agree") {
  // many copies of the observables switch the evaluator to line prefix sums
  const Lattice lat = Lattice::box(3, 2);
  const std::vector<Path> one = {Path::walk(lat, {{-2, 0, 0}, {-1, 0, 0}, {0, 0, 0}, {1, 0, 0}, {1, 1, 0}}),
                                 Path::walk(lat, {{0, 0, 0}, {1, 0, 0}, {2, 0, 0}})};
  std::vector<Path> many;
  for (int i = 0; i < 200; ++i) many.insert(many.end(), one.begin(), one.end());
  for (bool rb : {false, true}) {
    RunConfig c = quick(400, 37);
    c.rao_blackwell = rb;
    const auto a = estimate(lat, {0.3, 0.4}, one, c);
    const auto b = estimate(lat, {0.3, 0.4}, many, c);
    for (int i = 0; i < 2; ++i) {
      CHECK(b[i].mean == doctest::Approx(a[i].mean).epsilon(1e-12));
      CHECK(b[i + 2 * 150].stderr_ == doctest::Approx(a[i].stderr_).epsilon(1e-9));
    }
  }
}

TEST_CASE("correlation decay") {
  const Lattice lat = Lattice::box(3, 2);
  const Path e = Path::walk(lat, {{-2, 0, 0}, {-2, 1, 0}});
  RunConfig c = quick(4000, 29);
  SUBCASE("independent edges") {
    const auto tab = correlation_decay(lat, {0.0, 0.4}, e, 0, {1, 2, 3}, c);
    REQUIRE(tab.points.size() == 3);
    for (int i = 0; i < 3; ++i) {
      CHECK(tab.points[i].distance == i + 1);
      CHECK(within(tab.points[i].cov, 0.0, 4.0));
    }
  }
  SUBCASE("coincident paths give the variance") {
    const auto tab = correlation_decay(lat, {0.4, 0.3}, e, 0, {0}, c);
    REQUIRE(tab.points.size() == 1);
    CHECK(tab.points[0].distance == 0);
    CHECK(tab.points[0].cov.mean > 0);
    CHECK(tab.points[0].resolved);
    CHECK_FALSE(tab.fit_ok);
  }
  SUBCASE("leaving the box") {
    CHECK_THROWS_AS(correlation_decay(lat, {0.4, 0.3}, e, 0, {5}, c), LatticeError);
  }
}

TEST_CASE("scan rows") {
  RunConfig c = quick(200, 31);
  const auto rows = scan(3, 2, {{0.2, 0.3}, {0.5, 1.5}}, {{1, 1}}, c);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].seed == 31);
  CHECK(rows[1].seed == 32);
  CHECK(scan_csv_header() == "beta,kappa,m,N,R,T,rho,rho_stderr,log_rho,log_rho_stderr,flag,sweeps,seed");
  const std::string line = scan_csv_row(rows[1]);
  CHECK(line.rfind("0.5,1.5,3,2,1,1,", 0) == 0);
  CHECK(line.find(",200,32") != std::string::npos);
}
