#include "z2lab/model.hpp"

#include <cmath>
#include <stdexcept>

namespace z2lab {

void ModelParams::validate() const {
  if (!std::isfinite(beta) || !std::isfinite(kappa) || beta < 0 || kappa < 0)
    throw std::domain_error("model: beta and kappa must be finite and non-negative");
}

double action(const Lattice& lat, const Form& sigma, const Form& phi, const ModelParams& p) {
  const Form ds = d(lat, sigma);
  long sp = 0, se = 0;
  for (int q = 0; q < lat.count(2); ++q) sp += rho(ds.bits[q]);
  for (int e = 0; e < lat.count(1); ++e)
    se += rho(sigma.bits[e] ^ phi.bits[lat.edge_tail(e)] ^ phi.bits[lat.edge_head(e)]);
  return -2.0 * p.beta * static_cast<double>(sp) - 2.0 * p.kappa * static_cast<double>(se);
}

double activity(const Lattice& lat, const Form& sigma, const ModelParams& p) {
  const auto broken = d(lat, sigma).bits.count();
  const auto occupied = sigma.bits.count();
  return std::exp(-4.0 * p.beta * static_cast<double>(broken) - 4.0 * p.kappa * static_cast<double>(occupied));
}

int wilson_line(const Form& sigma, const std::optional<Form>& phi, const Path& gamma) {
  int g = gamma.evaluate(sigma.bits);
  if (phi)
    for (const auto& [v, c] : gamma.boundary().coef)
      if (c & 1) g ^= phi->bits[v] ? 1 : 0;
  return rho(g);
}

std::pair<Form, Form> gauge_transform(const Lattice& lat, const Form& sigma, const Form& phi, const Form& eta) {
  Form s = sigma;
  for (int e = 0; e < lat.count(1); ++e)
    s.bits[e] = sigma.bits[e] ^ eta.bits[lat.edge_tail(e)] ^ eta.bits[lat.edge_head(e)];
  Form f{0, phi.bits ^ eta.bits};
  return {std::move(s), std::move(f)};
}

int broken_around(const Lattice& lat, const Form& sigma, int e, int b) {
  int n = 0;
  for (const auto& pinc : lat.coboundary(1, e)) {
    int par = b;
    for (const auto& einc : lat.boundary(2, pinc.cell))
      if (einc.cell != e) par ^= sigma.bits[einc.cell] ? 1 : 0;
    n += par;
  }
  return n;
}

double local_conditional(const Lattice& lat, const Form& sigma, int e, const ModelParams& p) {
  const int n0 = broken_around(lat, sigma, e, 0);
  const int n1 = broken_around(lat, sigma, e, 1);
  // w1 / (w0 + w1) with w_b = exp(-4 beta n_b - 4 kappa b)
  return 1.0 / (1.0 + std::exp(4.0 * p.beta * (n1 - n0) + 4.0 * p.kappa));
}

}  // namespace z2lab
