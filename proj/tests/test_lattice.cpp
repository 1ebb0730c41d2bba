#include <random>
#include <set>

#include "doctest.h"
#include "z2lab/exact.hpp"
#include "z2lab/gf2.hpp"
#include "z2lab/lattice.hpp"

using namespace z2lab;

namespace {

int brute_cell_count(int m, int N, int k) {
  // nested loops over basepoints and direction subsets
  int total = 0;
  const int side = 2 * N + 1;
  int nv = 1;
  for (int i = 0; i < m; ++i) nv *= side;
  for (int v = 0; v < nv; ++v) {
    std::vector<int> x(m);
    int r = v;
    for (int i = 0; i < m; ++i) {
      x[i] = r % side - N;
      r /= side;
    }
    for (unsigned mask = 0; mask < (1u << m); ++mask) {
      if (__builtin_popcount(mask) != k) continue;
      bool ok = true;
      for (int i = 0; i < m; ++i)
        if ((mask >> i & 1u) && x[i] + 1 > N) ok = false;
      total += ok;
    }
  }
  return total;
}

Chain random_chain(const Lattice& lat, int k, std::mt19937_64& rng) {
  Chain c{k, {}};
  std::uniform_int_distribution<int> cell(0, lat.count(k) - 1), coef(-3, 3);
  for (int i = 0; i < 6; ++i) c.add(cell(rng), coef(rng));
  return c;
}

Form random_form(const Lattice& lat, int k, std::mt19937_64& rng) {
  Form f = Form::zero(lat, k);
  for (int i = 0; i < lat.count(k); ++i) f.bits[i] = rng() & 1u;
  return f;
}

}  // namespace

TEST_CASE("cell counts match nested-loop enumeration") {
  for (int N : {1, 2}) {
    const Lattice lat = Lattice::box(3, N);
    for (int k = 0; k <= 3; ++k) CHECK(lat.count(k) == brute_cell_count(3, N, k));
  }
  const Lattice b1 = Lattice::box(3, 1);
  CHECK(b1.count(0) == 27);
  CHECK(b1.count(1) == 54);
  CHECK(b1.count(2) == 36);
  const Lattice b4 = Lattice::box(4, 1);
  CHECK(b4.count(1) == 4 * 2 * 27);
  CHECK(b4.count(2) == 6 * 4 * 9);
  CHECK_THROWS_AS(b1.count(4), LatticeError);
}

TEST_CASE("index and cell round-trip in lexicographic order") {
  const Lattice lat = Lattice::box(3, 2);
  for (int k = 0; k <= 3; ++k) {
    const auto cells = enumerate_cells(lat, k);
    for (int i = 0; i < static_cast<int>(cells.size()); ++i) {
      REQUIRE(lat.index(cells[i]) == i);
      if (i > 0) {
        const auto& a = cells[i - 1];
        const auto& b = cells[i];
        CHECK((a.base < b.base || (a.base == b.base && a.dirs < b.dirs)));
      }
    }
  }
  Cell outside{{2, 2, 2}, {0}, 1};
  CHECK(lat.index(outside) == -1);
}

TEST_CASE("plaquette boundary traces the oriented square") {
  const Lattice lat = Lattice::box(3, 1);
  const int p = lat.index(Cell{{0, 0, 0}, {0, 1}, 1});
  Chain c{2, {}};
  c.add(p, 1);
  const Chain b = boundary(lat, c);
  CHECK(b.size() == 4);
  CHECK(b.coef.at(lat.index(Cell{{0, 0, 0}, {0}, 1})) == 1);
  CHECK(b.coef.at(lat.index(Cell{{1, 0, 0}, {1}, 1})) == 1);
  CHECK(b.coef.at(lat.index(Cell{{0, 1, 0}, {0}, 1})) == -1);
  CHECK(b.coef.at(lat.index(Cell{{0, 0, 0}, {1}, 1})) == -1);
  CHECK(boundary(lat, b).empty());

  // two-edge open path x1 -> x2
  const Path g = Path::walk(lat, {{0, 0, 0}, {1, 0, 0}, {1, 1, 0}});
  const Chain gb = g.boundary();
  CHECK(gb.size() == 2);
  CHECK(gb.coef.at(lat.vertex_index({1, 1, 0})) == 1);
  CHECK(gb.coef.at(lat.vertex_index({0, 0, 0})) == -1);
}

TEST_CASE("boundary of boundary vanishes on basis cells and random chains") {
  const Lattice lat = Lattice::box(3, 1);
  for (int k = 2; k <= 3; ++k)
    for (int i = 0; i < lat.count(k); ++i) {
      Chain c{k, {}};
      c.add(i, 1);
      CHECK(boundary(lat, boundary(lat, c)).empty());
    }
  std::mt19937_64 rng(7);
  for (int k = 2; k <= 3; ++k)
    for (int r = 0; r < 100; ++r) CHECK(boundary(lat, boundary(lat, random_chain(lat, k, rng))).empty());
}

TEST_CASE("d of d vanishes") {
  const Lattice lat = Lattice::box(3, 1);
  std::mt19937_64 rng(11);
  for (int k = 0; k <= 1; ++k)
    for (int r = 0; r < 100; ++r) CHECK(d(lat, d(lat, random_form(lat, k, rng))).bits.none());
  CHECK(d(lat, Form::zero(lat, 1)).bits.none());
  // single interior edge -> 4 plaquettes
  Form s = Form::zero(lat, 1);
  s.bits[lat.index(Cell{{0, 0, 0}, {0}, 1})] = true;
  CHECK(d(lat, s).bits.count() == 4);
}

TEST_CASE("coboundary: interior, wall and corner cells") {
  const Lattice lat = Lattice::box(3, 1);
  CHECK(coboundary(lat, Cell{{0, 0, 0}, {0}, 1}).size() == 4);
  CHECK(coboundary(lat, Cell{{0, 1, 1}, {0}, 1}).size() < 4);
  const Chain corner = coboundary(lat, Cell{{-1, -1, -1}, {}, 1});
  CHECK(corner.size() == 3);
  for (const auto& kv : corner.coef) CHECK(kv.second == -1);
  const Chain neg = coboundary(lat, Cell{{-1, -1, -1}, {}, -1});
  for (const auto& kv : neg.coef) CHECK(kv.second == 1);
}

TEST_CASE("boundary and coboundary are adjoint on B_1") {
  const Lattice lat = Lattice::box(3, 1);
  for (int k = 1; k <= 3; ++k)
    for (int c = 0; c < lat.count(k); ++c)
      for (const auto& inc : lat.boundary(k, c)) {
        bool found = false;
        for (const auto& back : lat.coboundary(k - 1, inc.cell))
          if (back.cell == c) {
            found = true;
            CHECK(back.sign == inc.sign);
          }
        CHECK(found);
      }
}

TEST_CASE("codifferential") {
  const Lattice lat = Lattice::box(3, 1);
  Form w = Form::zero(lat, 2);
  CHECK(codifferential(lat, w).bits.none());
  w.bits[5] = true;
  CHECK(codifferential(lat, w).bits.count() == 4);
  // <delta w, s> = <w, d s> mod 2
  std::mt19937_64 rng(3);
  for (int r = 0; r < 100; ++r) {
    const Form om = random_form(lat, 2, rng);
    Form s = Form::zero(lat, 1);
    s.bits[rng() % lat.count(1)] = true;
    const auto lhs = (codifferential(lat, om).bits & s.bits).count() & 1;
    const auto rhs = (om.bits & d(lat, s).bits).count() & 1;
    CHECK(lhs == rhs);
  }
}

TEST_CASE("path classification") {
  const Lattice lat = Lattice::box(3, 1);
  const Path sq = Path::walk(lat, {{0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 1, 0}, {0, 0, 0}});
  CHECK(classify(sq).kind == PathKind::Loop);
  CHECK(sq.length() == 4);
  CHECK(classify(Path()).kind == PathKind::Loop);
  CHECK(Path().length() == 0);
  const Path open = Path::walk(lat, {{0, 0, 0}, {1, 0, 0}});
  const auto pc = classify(open);
  CHECK(pc.kind == PathKind::Open);
  CHECK(pc.start == lat.vertex_index({0, 0, 0}));
  CHECK(pc.end == lat.vertex_index({1, 0, 0}));
  const Path two = open + Path::walk(lat, {{-1, -1, -1}, {-1, -1, 0}});
  CHECK(classify(two).kind == PathKind::Invalid);
}

TEST_CASE("line pair geometry") {
  const Lattice lat = Lattice::box(3, 4);
  {
    const auto [g1, g2] = build_line_pair(lat, 1, 2);
    CHECK(g1.length() == 4);
    CHECK(g2.length() == 4);
    const Path loop = g1 + g2;
    CHECK(classify(loop).kind == PathKind::Loop);
    CHECK(loop.length() == 8);
    CHECK((g1.support(lat) & g2.support(lat)).none());
  }
  {
    const auto [g1, g2] = build_line_pair(lat, 1, 1);
    CHECK(g1.length() == 3);
    const auto pc = classify(g1);
    REQUIRE(pc.kind == PathKind::Open);
    // endpoints on the x1-axis
    CHECK(lat.vertex(pc.start)[1] == 0);
    CHECK(lat.vertex(pc.end)[1] == 0);
    CHECK(classify(g2).start == pc.end);
  }
  {
    const auto [g1, g2] = build_line_pair(lat, 2, 6);
    int far = 0, maxd = 0;
    for (int e : g1.edges()) {
      const int de = dist_edge(lat, e, g2);
      maxd = std::max(maxd, de);
      far += (de == 4);
    }
    CHECK(maxd == 4);
    CHECK(far == 2);
  }
  CHECK_THROWS_AS(build_line_pair(lat, 5, 2), LatticeError);
  CHECK_THROWS_AS(build_line_pair(lat, 1, 9), LatticeError);
}

TEST_CASE("dist between supports") {
  const Lattice lat = Lattice::box(3, 3);
  const Path a = Path::walk(lat, {{0, 0, 0}, {1, 0, 0}});
  const Path b = Path::walk(lat, {{0, 1, 0}, {1, 1, 0}});
  CHECK(dist(lat, a, a) == 0);
  CHECK(dist(lat, a, b) == 1);
  // the two halves of a rectangle share their endpoints
  const auto [g1, g2] = build_line_pair(lat, 2, 2);
  int brute = 1 << 20;
  for (int e : g1.edges())
    for (int f : g2.edges())
      for (int u : {lat.edge_tail(e), lat.edge_head(e)})
        for (int v : {lat.edge_tail(f), lat.edge_head(f)}) {
          const auto x = lat.vertex(u), y = lat.vertex(v);
          brute = std::min(brute, std::abs(x[0] - y[0]) + std::abs(x[1] - y[1]) + std::abs(x[2] - y[2]));
        }
  CHECK(dist(lat, g1, g2) == brute);
  CHECK(brute == 0);
  CHECK_THROWS_AS(dist(lat, Path(), a), LatticeError);
}

TEST_CASE("spanning surfaces") {
  const Lattice lat = Lattice::box(3, 4);
  const Path sq = Path::walk(lat, {{0, 0, 0}, {0, 1, 0}, {0, 1, 1}, {0, 0, 1}, {0, 0, 0}});
  const Bits q1 = spanning_surface(lat, sq);
  CHECK(q1.count() == 1);
  CHECK(q1.test(lat.index(Cell{{0, 0, 0}, {1, 2}, 1})));
  for (auto [R, T] : {std::pair{1, 1}, {2, 3}, {3, 4}}) {
    const auto [g1, g2] = build_line_pair(lat, R, T);
    const Bits q = spanning_surface(lat, g1 + g2);
    CHECK(q.count() == static_cast<std::size_t>(2 * R * T));
    CHECK(boundary_mod2(lat, q) == (g1 + g2).support(lat));
  }
  // non-planar loop goes through the GF(2) solver
  const Path bent = Path::walk(lat, {{0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {1, 1, 1}, {0, 1, 1}, {0, 0, 1}, {0, 0, 0}});
  CHECK(boundary_mod2(lat, spanning_surface(lat, bent)) == bent.support(lat));
  CHECK_THROWS_AS(spanning_surface(lat, Path::walk(lat, {{0, 0, 0}, {1, 0, 0}})), LatticeError);

  // random cycle-space elements of the 2x2x2 cube
  const Lattice c2 = tiny::cube2();
  std::mt19937_64 rng(5);
  const auto cycles = cycle_space(c2);
  for (int r = 0; r < 20; ++r) {
    const Bits& c = cycles[rng() % cycles.size()];
    std::vector<Bits> rows(c2.count(1), Bits(c2.count(2)));
    for (int p = 0; p < c2.count(2); ++p)
      for (const auto& inc : c2.boundary(2, p)) rows[inc.cell].set(p);
    const auto q = gf2::solve(rows, c2.count(2), c);
    REQUIRE(q);
    CHECK(boundary_mod2(c2, *q) == c);
  }
}

TEST_CASE("Stokes: closed forms agree on surfaces with the same boundary") {
  const Lattice lat = tiny::cube2();
  const Path sq = Path::walk(lat, {{0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 1, 0}, {0, 0, 0}});
  const Bits q = spanning_surface(lat, sq);
  Bits cube_bnd(lat.count(2));
  for (const auto& inc : lat.boundary(3, 0)) cube_bnd.set(inc.cell);
  const Bits q2 = q ^ cube_bnd;  // the other five faces
  CHECK(boundary_mod2(lat, q2) == sq.support(lat));
  for (const auto& w : closed_two_forms(lat)) CHECK(((w & q).count() & 1) == ((w & q2).count() & 1));
}

TEST_CASE("gf2 kernels and ranks") {
  std::vector<Bits> rows{Bits(std::string("0110")), Bits(std::string("1100"))};
  CHECK(gf2::rank(rows, 4) == 2);
  const auto ker = gf2::kernel_basis(rows, 4);
  CHECK(ker.size() == 2);
  for (const auto& x : ker)
    for (const auto& r : rows) CHECK(((r & x).count() & 1) == 0);
  CHECK_FALSE(gf2::solve({Bits(std::string("00"))}, 2, Bits(std::string("1"))).has_value());
}
