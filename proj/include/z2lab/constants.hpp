#pragma once
// Convergence constants and closed-form tail bounds of the Higgs-phase and
// confinement-phase expansions.

#include <optional>
#include <stdexcept>
#include <string>
#include <tuple>
#include <utility>

namespace z2lab {

class DomainError : public std::domain_error {
  using std::domain_error::domain_error;
};

struct ExpansionConstants {
  int m = 3;
  int M0 = 0, M1 = 0, M2 = 0, M3 = 0;
  double alpha_higgs = 0, kappa0_higgs = 0;
  double beta0_conf = 0;
  double D0 = 0;
  int d0_exponent = 0;
};

// d0_exponent < 0 selects m - 1.
ExpansionConstants compute_constants(int m, int d0_exponent = -1);

// log(M1^2 + 1/a) / (4 (1 - a))
double kappa0_objective(int m, double a);
// (argmin, min) by golden-section search
std::pair<double, double> kappa0_golden(int m, double tol = 1e-12);
// (argmin, min) by grid search over (0,1)
std::pair<double, double> kappa0_grid(int m, double step = 1e-5);

// Feasibility predicate whose supremum defines the confinement threshold.
bool beta0_conf_feasible(int m, double beta);
double beta0_conf(int m);
// Infimum of the feasible alphas for the confinement polymer condition; nullopt when none works.
std::optional<double> alpha_conf(int m, double beta);

// Smallest D with #{plaquettes at distance j from e} <= D j^p for all edges e of B_N and j >= 1.
double measure_D0(int m, int N, int exponent);

enum class BoundKind { Ceps, SingleCell, TailHiggs, CovBound, CepsConf, TailConf, SumConf };

struct BoundArgs {
  int m = 3;
  double beta = 0, kappa = 0, eps = 0.1;
  int k = 1;
  int R = 1, T = 1;
  int length = 1;  // |supp gamma_1|
  int dist = 0;
  double slack = 0.0;
};

struct CepsReport {
  double closed_form = 0;   // ceiling as displayed with the 2(2 kappa - alpha) exponent
  bool closed_form_divergent = false;
  double rigorous = 0;      // ceiling from the polymer-sum bound, exponent 4 kappa (1 - alpha)
  double kappa_eval = 0;    // kappa0 + eps
};

CepsReport ceps_report(const ExpansionConstants& c, double eps);
// Rigorous ceiling used by every Higgs bound.
double ceps(const ExpansionConstants& c, double eps);

// (C/4) e^{-4k(kappa - kappa0 - eps)}
double single_cell(const ExpansionConstants& c, int k, double kappa, double eps);
// sum_{j>=1} x^{max(j,k)} for 0 <= x < 1
double max_power_sum(double x, int k);
double tail_higgs(const ExpansionConstants& c, int R, int T, double kappa, double eps);
double gamma0_tail(const ExpansionConstants& c, int k, int R, int T, double kappa, double eps);
double cov_bound(const ExpansionConstants& c, int length, int dist, double kappa, double eps);

// Confinement constant evaluated at beta' (normally beta + eps).
double ceps_conf(int m, double beta_prime, double slack = 0.0);
double tail_conf(int m, int k, double beta, double eps, double slack = 0.0);
double sum_conf(int m, int k, int R, int T, double beta, double eps, double slack = 0.0);
// Lower bound on the limiting log ratio in the confinement regime.
double conf_log_rho_lower(int m, double beta, double eps, double slack = 0.0);

double bound_eval(BoundKind which, const BoundArgs& a, const ExpansionConstants& c);
BoundKind parse_bound_kind(const std::string& s);

}  // namespace z2lab
