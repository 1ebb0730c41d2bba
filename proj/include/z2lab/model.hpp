#pragma once
// Z2 gauge-Higgs model: action, activity, Wilson lines, gauge transformations.

#include <optional>
#include <utility>

#include "z2lab/lattice.hpp"

namespace z2lab {

struct ModelParams {
  double beta = 0.0;
  double kappa = 0.0;
  void validate() const;
};

// rho : Z2 -> {+1,-1}
inline int rho(int g) { return (g & 1) ? -1 : 1; }

// -beta sum_p rho(d sigma(p)) - kappa sum_e rho(sigma(e) - phi(de)), both orientations.
double action(const Lattice& lat, const Form& sigma, const Form& phi, const ModelParams& p);

// exp(-4 beta |supp d sigma|^+ - 4 kappa |supp sigma|^+)
double activity(const Lattice& lat, const Form& sigma, const ModelParams& p);

// rho(sigma(gamma) - phi(d gamma)); phi = nullopt means unitary gauge.
int wilson_line(const Form& sigma, const std::optional<Form>& phi, const Path& gamma);

std::pair<Form, Form> gauge_transform(const Lattice& lat, const Form& sigma, const Form& phi, const Form& eta);

// Number of broken plaquettes around edge e if sigma(e) were set to b.
int broken_around(const Lattice& lat, const Form& sigma, int e, int b);

// P(sigma(e) = 1 | rest) under the unitary-gauge measure.
double local_conditional(const Lattice& lat, const Form& sigma, int e, const ModelParams& p);

}  // namespace z2lab
