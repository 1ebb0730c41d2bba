#include "z2lab/constants.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "z2lab/lattice.hpp"

namespace z2lab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require_m(int m) {
  if (m < 3) throw DomainError("dimension must be >= 3");
}

template <class F>
std::pair<double, double> golden_min(F f, double a, double b, double tol) {
  const double g = (std::sqrt(5.0) - 1) / 2;
  double c = b - g * (b - a), d = a + g * (b - a);
  double fc = f(c), fd = f(d);
  while (b - a > tol) {
    if (fc < fd) {
      b = d, d = c, fd = fc;
      c = b - g * (b - a), fc = f(c);
    } else {
      a = c, c = d, fc = fd;
      d = a + g * (b - a), fd = f(d);
    }
  }
  const double x = (a + b) / 2;
  return {x, f(x)};
}

// M2^3 y / (1 - M2^2 y) - 2a with y = tanh(2 beta)^{1-a}; +inf when the geometric series diverges.
double conf_margin(int m, double beta, double a) {
  const double M2 = 8.0 * m - 12;
  const double y = std::pow(std::tanh(2 * beta), 1 - a);
  const double den = 1 - M2 * M2 * y;
  if (den <= 0) return kInf;
  return M2 * M2 * M2 * y / den - 2 * a;
}

constexpr int kAlphaGrid = 4000;

}  // namespace

double kappa0_objective(int m, double a) {
  const double M1 = 6.0 * (m - 1);
  return std::log(M1 * M1 + 1 / a) / (4 * (1 - a));
}

std::pair<double, double> kappa0_golden(int m, double tol) {
  require_m(m);
  return golden_min([m](double a) { return kappa0_objective(m, a); }, 1e-9, 1 - 1e-9, tol);
}

std::pair<double, double> kappa0_grid(int m, double step) {
  require_m(m);
  std::pair<double, double> best{0, kInf};
  const long n = std::lround(1 / step);
  for (long i = 1; i < n; ++i) {
    const double a = i * step, v = kappa0_objective(m, a);
    if (v < best.second) best = {a, v};
  }
  return best;
}

bool beta0_conf_feasible(int m, double beta) {
  require_m(m);
  const double M2 = 8.0 * m - 12;
  if (beta < 0) return false;
  if (M2 * M2 * std::tanh(2 * beta) >= 1) return false;
  // coarse scan, then local refinement around the best grid point
  int best = 1;
  double bv = kInf;
  for (int i = 1; i < kAlphaGrid; ++i) {
    const double v = conf_margin(m, beta, double(i) / kAlphaGrid);
    if (v < 0) return true;
    if (v < bv) bv = v, best = i;
  }
  const double lo = double(best - 1) / kAlphaGrid, hi = double(best + 1) / kAlphaGrid;
  return golden_min([&](double a) { return conf_margin(m, beta, a); }, std::max(lo, 1e-12), hi, 1e-13).second < 0;
}

double beta0_conf(int m) {
  require_m(m);
  double lo = 0, hi = 0.5 * std::atanh(1 / std::pow(8.0 * m - 12, 2));
  if (beta0_conf_feasible(m, hi)) return hi;
  if (!beta0_conf_feasible(m, 1e-300)) return 0;
  for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
    const double mid = (lo + hi) / 2;
    (beta0_conf_feasible(m, mid) ? lo : hi) = mid;
  }
  return lo;
}

std::optional<double> alpha_conf(int m, double beta) {
  require_m(m);
  for (int i = 1; i < kAlphaGrid; ++i) {
    const double a = double(i) / kAlphaGrid;
    if (conf_margin(m, beta, a) < 0) {
      // first crossing lies in (previous grid point, a]
      double lo = double(i - 1) / kAlphaGrid, hi = a;
      for (int it = 0; it < 100 && hi - lo > 1e-15; ++it) {
        const double mid = (lo + hi) / 2;
        (conf_margin(m, beta, mid) < 0 ? hi : lo) = mid;
      }
      return hi;
    }
  }
  return std::nullopt;
}

double measure_D0(int m, int N, int exponent) {
  const Lattice lat = Lattice::box(m, N);
  // per-axis coordinate ranges of a cell; the l1 distance between two vertex sets that are
  // coordinate products separates into per-axis gaps
  auto ranges = [&](int k, int idx) {
    std::vector<std::pair<int, int>> r(m);
    const Point b = lat.vertex(lat.base_vertex(k, idx));
    const unsigned mask = lat.dirmask(k, idx);
    for (int i = 0; i < m; ++i) r[i] = {b[i], b[i] + int(mask >> i & 1u)};
    return r;
  };
  std::vector<std::vector<std::pair<int, int>>> plaq(lat.count(2));
  for (int p = 0; p < lat.count(2); ++p) plaq[p] = ranges(2, p);
  double best = 0;
  std::vector<int> counts;
  for (int e = 0; e < lat.count(1); ++e) {
    const auto re = ranges(1, e);
    counts.assign(2 * m * N + 2, 0);
    for (const auto& rp : plaq) {
      int d = 0;
      for (int i = 0; i < m; ++i) d += std::max({0, rp[i].first - re[i].second, re[i].first - rp[i].second});
      ++counts[d];
    }
    for (std::size_t j = 1; j < counts.size(); ++j)
      best = std::max(best, counts[j] / std::pow(double(j), exponent));
  }
  return best;
}

ExpansionConstants compute_constants(int m, int d0_exponent) {
  require_m(m);
  ExpansionConstants c;
  c.m = m;
  c.M0 = 4 * m - 1;
  c.M1 = 6 * (m - 1);
  c.M2 = 8 * m - 12;
  c.M3 = 10 * (m - 2);
  std::tie(c.alpha_higgs, c.kappa0_higgs) = kappa0_golden(m);
  c.beta0_conf = beta0_conf(m);
  c.d0_exponent = d0_exponent < 0 ? m - 1 : d0_exponent;
  c.D0 = measure_D0(m, 3, c.d0_exponent);
  return c;
}

CepsReport ceps_report(const ExpansionConstants& c, double eps) {
  if (eps <= 0) throw DomainError("eps must be positive");
  CepsReport r;
  r.kappa_eval = c.kappa0_higgs + eps;
  const double M1sq = double(c.M1) * c.M1;
  const double xc = std::exp(-2 * (2 * r.kappa_eval - c.alpha_higgs));
  const double denc = 1 - 4 * M1sq * xc;
  r.closed_form_divergent = denc <= 0;
  r.closed_form = r.closed_form_divergent ? kInf : 4 * xc / denc;
  const double x = std::exp(-4 * r.kappa_eval * (1 - c.alpha_higgs));
  r.rigorous = 4 * x / (1 - M1sq * x);
  return r;
}

double ceps(const ExpansionConstants& c, double eps) { return ceps_report(c, eps).rigorous; }

double max_power_sum(double x, int k) {
  if (x < 0 || x >= 1) throw DomainError("decay factor must lie in [0,1)");
  k = std::max(k, 1);
  // k terms equal to x^k, then the geometric tail from j = k+1
  return k * std::pow(x, k) + std::pow(x, k + 1) / (1 - x);
}

namespace {
double higgs_delta(const ExpansionConstants& c, double kappa, double eps) {
  const double delta = kappa - c.kappa0_higgs - eps;
  if (!(delta > 0)) throw DomainError("Higgs bounds need kappa > kappa0 + eps");
  return delta;
}
}  // namespace

double single_cell(const ExpansionConstants& c, int k, double kappa, double eps) {
  const double delta = higgs_delta(c, kappa, eps);
  return ceps(c, eps) / 4 * std::exp(-4.0 * k * delta);
}

double tail_higgs(const ExpansionConstants& c, int R, int T, double kappa, double eps) {
  const double delta = higgs_delta(c, kappa, eps), C = ceps(c, eps);
  const int k = std::min(R, T);
  const double x = std::exp(-4 * delta);
  return 4 * C * max_power_sum(x, k) + 2 * C * std::max(T - 2 * R, 0) * std::exp(-4.0 * std::max(2 * R, k) * delta);
}

double gamma0_tail(const ExpansionConstants& c, int k, int R, int T, double kappa, double eps) {
  const double delta = higgs_delta(c, kappa, eps), C = ceps(c, eps);
  const double x = std::exp(-4 * delta);
  return C / 2 * max_power_sum(x, k) + std::max(T - 2 * R, 0) * C / 4 * std::exp(-4.0 * std::max(2 * R, k) * delta);
}

double cov_bound(const ExpansionConstants& c, int length, int dist, double kappa, double eps) {
  const double delta = higgs_delta(c, kappa, eps);
  return ceps(c, eps) * length * std::exp(-4 * delta * dist);
}

double ceps_conf(int m, double beta_prime, double slack) {
  if (slack < 0 || slack >= 1) throw DomainError("slack must lie in [0,1)");
  const auto a = alpha_conf(m, beta_prime);
  if (!a) throw DomainError("no feasible alpha: beta + eps outside the confinement regime");
  const double M2 = 8.0 * m - 12;
  const double u = std::pow(std::tanh(2 * beta_prime), (1 - slack) * (1 - *a));
  const double den = 1 - M2 * M2 * u;
  if (den <= 0) throw DomainError("confinement constant diverges");
  return u / den;
}

double tail_conf(int m, int k, double beta, double eps, double slack) {
  if (eps <= 0) throw DomainError("eps must be positive");
  const double C = ceps_conf(m, beta + eps, slack);
  return C * std::pow(std::tanh(2 * beta) / std::tanh(2 * (beta + eps)), k);
}

double sum_conf(int m, int k, int R, int T, double beta, double eps, double slack) {
  if (eps <= 0) throw DomainError("eps must be positive");
  const double C = ceps_conf(m, beta + eps, slack);
  const double r = std::tanh(2 * beta) / std::tanh(2 * (beta + eps));
  return 2.0 * (m - 1) * C * (2 * max_power_sum(r, k) + std::max(0, T - 2 * R) * std::pow(r, 2 * R));
}

double conf_log_rho_lower(int m, double beta, double eps, double slack) {
  const double C = ceps_conf(m, beta + eps, slack);
  const double tb = std::tanh(2 * beta);
  return -16.0 * (m - 1) * C * tb / (std::tanh(2 * (beta + eps)) - tb);
}

double bound_eval(BoundKind which, const BoundArgs& a, const ExpansionConstants& c) {
  switch (which) {
    case BoundKind::Ceps: return ceps(c, a.eps);
    case BoundKind::SingleCell: return single_cell(c, a.k, a.kappa, a.eps);
    case BoundKind::TailHiggs: return tail_higgs(c, a.R, a.T, a.kappa, a.eps);
    case BoundKind::CovBound: return cov_bound(c, a.length, a.dist, a.kappa, a.eps);
    case BoundKind::CepsConf: return ceps_conf(a.m, a.beta + a.eps, a.slack);
    case BoundKind::TailConf: return tail_conf(a.m, a.k, a.beta, a.eps, a.slack);
    case BoundKind::SumConf: return sum_conf(a.m, a.k, a.R, a.T, a.beta, a.eps, a.slack);
  }
  throw DomainError("unknown bound");
}

BoundKind parse_bound_kind(const std::string& s) {
  static const std::pair<const char*, BoundKind> names[] = {
      {"Ceps", BoundKind::Ceps},         {"SingleCell", BoundKind::SingleCell}, {"TailHiggs", BoundKind::TailHiggs},
      {"CovBound", BoundKind::CovBound}, {"CepsConf", BoundKind::CepsConf},     {"TailConf", BoundKind::TailConf},
      {"SumConf", BoundKind::SumConf}};
  for (const auto& [n, k] : names)
    if (s == n) return k;
  throw DomainError("unknown bound kind: " + s);
}

}  // namespace z2lab
