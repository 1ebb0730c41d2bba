#include <cmath>
#include <random>

#include "doctest.h"
#include "z2lab/model.hpp"

using namespace z2lab;

namespace {
Form random_form(const Lattice& lat, int k, std::mt19937_64& rng) {
  Form f = Form::zero(lat, k);
  for (int i = 0; i < lat.count(k); ++i) f.bits[i] = rng() & 1u;
  return f;
}
}  // namespace

TEST_CASE("action of the zero field and of a single flipped edge") {
  const Lattice lat = Lattice::box(3, 1);
  const ModelParams p{0.37, 0.81};
  const Form s0 = Form::zero(lat, 1), f0 = Form::zero(lat, 0);
  CHECK(action(lat, s0, f0, p) == doctest::Approx(-p.beta * 2 * 36 - p.kappa * 2 * 54));
  Form s1 = s0;
  s1.bits[lat.index(Cell{{0, 0, 0}, {0}, 1})] = true;
  CHECK(action(lat, s1, f0, p) - action(lat, s0, f0, p) == doctest::Approx(2 * p.beta * 2 * 4 + 2 * p.kappa * 2 * 1));
}

TEST_CASE("gauge invariance of action and Wilson lines") {
  const Lattice lat = Lattice::box(3, 1);
  const ModelParams p{0.3, 0.4};
  std::mt19937_64 rng(17);
  const Path open = Path::walk(lat, {{-1, 0, 0}, {0, 0, 0}, {0, 1, 0}, {1, 1, 0}});
  const Path loop = Path::walk(lat, {{0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 1, 0}, {0, 0, 0}});
  for (int r = 0; r < 100; ++r) {
    const Form s = random_form(lat, 1, rng), f = random_form(lat, 0, rng), eta = random_form(lat, 0, rng);
    const auto [s2, f2] = gauge_transform(lat, s, f, eta);
    CHECK(action(lat, s2, f2, p) == action(lat, s, f, p));
    CHECK(wilson_line(s2, f2, open) == wilson_line(s, f, open));
    CHECK(wilson_line(s2, f2, loop) == wilson_line(s, f, loop));
    // eta = phi reaches unitary gauge
    const auto [s3, f3] = gauge_transform(lat, s, f, f);
    CHECK(f3.bits.none());
    CHECK(wilson_line(s3, std::nullopt, open) == wilson_line(s, f, open));
  }
  const Form s = random_form(lat, 1, rng), f = random_form(lat, 0, rng);
  const auto [si, fi] = gauge_transform(lat, s, f, Form::zero(lat, 0));
  CHECK(si == s);
  CHECK(fi == f);
}

TEST_CASE("activity") {
  const Lattice lat = Lattice::box(3, 2);
  const ModelParams p{0.21, 0.33};
  CHECK(activity(lat, Form::zero(lat, 1), p) == 1.0);
  Form s = Form::zero(lat, 1);
  const int e1 = lat.index(Cell{{0, 0, 0}, {0}, 1});
  s.bits[e1] = true;
  const double single = std::exp(-16 * p.beta - 4 * p.kappa);
  CHECK(activity(lat, s, p) == doctest::Approx(single).epsilon(1e-14));
  // far-apart edge: disjoint supports and differentials
  Form t = Form::zero(lat, 1);
  t.bits[lat.index(Cell{{-2, -2, -2}, {0}, 1})] = true;
  Form st = s;
  st.bits |= t.bits;
  CHECK(activity(lat, st, p) == doctest::Approx(activity(lat, s, p) * activity(lat, t, p)).epsilon(1e-14));
  std::mt19937_64 rng(1);
  const Form zero1 = Form::zero(lat, 1), zero0 = Form::zero(lat, 0);
  for (int r = 0; r < 20; ++r) {
    const Form x = random_form(lat, 1, rng);
    const double expect = std::exp(-action(lat, x, zero0, p) + action(lat, zero1, zero0, p));
    CHECK(activity(lat, x, p) == doctest::Approx(expect).epsilon(1e-12));
  }
}

TEST_CASE("Wilson line values") {
  const Lattice lat = Lattice::box(3, 1);
  const Path e = Path::walk(lat, {{0, 0, 0}, {1, 0, 0}});
  Form s = Form::zero(lat, 1), f = Form::zero(lat, 0);
  CHECK(wilson_line(s, f, e) == 1);
  s.bits[e.edges()[0]] = true;
  CHECK(wilson_line(s, std::nullopt, e) == -1);
  s.bits.reset();
  f.bits[lat.vertex_index({0, 0, 0})] = true;
  CHECK(wilson_line(s, f, e) == -1);
}

TEST_CASE("local conditional probabilities") {
  const Lattice lat = Lattice::box(3, 1);
  const int e = lat.index(Cell{{0, 0, 0}, {0}, 1});
  std::mt19937_64 rng(2);
  const Form s = random_form(lat, 1, rng);
  CHECK(local_conditional(lat, s, e, {0.0, 0.7}) == doctest::Approx(std::exp(-2.8) / (1 + std::exp(-2.8))));
  CHECK(local_conditional(lat, Form::zero(lat, 1), e, {0.4, 0.0}) ==
        doctest::Approx(std::exp(-6.4) / (1 + std::exp(-6.4))));
  CHECK(local_conditional(lat, s, e, {0.0, 0.0}) == 0.5);
  // agrees with the ratio of full activities
  const ModelParams p{0.3, 0.6};
  Form s0 = s, s1 = s;
  s0.bits[e] = false;
  s1.bits[e] = true;
  const double w0 = activity(lat, s0, p), w1 = activity(lat, s1, p);
  CHECK(local_conditional(lat, s, e, p) == doctest::Approx(w1 / (w0 + w1)).epsilon(1e-12));
  CHECK_THROWS(ModelParams{-1.0, 0.0}.validate());
}
