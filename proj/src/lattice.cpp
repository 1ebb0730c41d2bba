#include "z2lab/lattice.hpp"

#include <algorithm>
#include <climits>
#include <cstdlib>
#include <set>
#include <sstream>

#include "z2lab/gf2.hpp"

namespace z2lab {

namespace {

std::vector<int> mask_dirs(unsigned mask) {
  std::vector<int> d;
  for (int i = 0; mask; ++i, mask >>= 1)
    if (mask & 1u) d.push_back(i);
  return d;
}

unsigned dirs_mask(const std::vector<int>& dirs) {
  unsigned m = 0;
  for (int d : dirs) m |= 1u << d;
  return m;
}

// Direction subsets of size k in lexicographic order of their sorted tuples.
std::vector<unsigned> subsets_lex(int m, int k) {
  std::vector<unsigned> out;
  std::vector<int> pick(k);
  for (int i = 0; i < k; ++i) pick[i] = i;
  if (k > m) return out;
  while (true) {
    unsigned mask = 0;
    for (int p : pick) mask |= 1u << p;
    out.push_back(mask);
    int i = k - 1;
    while (i >= 0 && pick[i] == m - k + i) --i;
    if (i < 0) break;
    ++pick[i];
    for (int j = i + 1; j < k; ++j) pick[j] = pick[j - 1] + 1;
  }
  return out;
}

}  // namespace

Lattice::Lattice(std::vector<int> lo, std::vector<int> hi) : m_(static_cast<int>(lo.size())), lo_(std::move(lo)), hi_(std::move(hi)) {
  if (m_ < 1 || hi_.size() != lo_.size()) throw LatticeError("lattice: bad box dimension");
  if (m_ > 16) throw LatticeError("lattice: dimension too large");
  for (int i = 0; i < m_; ++i)
    if (hi_[i] < lo_[i]) throw LatticeError("lattice: empty axis range");
  build();
}

Lattice Lattice::box(int m, int N) {
  if (N < 1) throw LatticeError("lattice: N must be >= 1");
  return Lattice(std::vector<int>(m, -N), std::vector<int>(m, N));
}

int Lattice::radius() const {
  for (int i = 0; i < m_; ++i)
    if (lo_[i] != -hi_[0] || hi_[i] != hi_[0]) return -1;
  return hi_[0];
}

std::string Lattice::describe() const {
  std::ostringstream os;
  for (int i = 0; i < m_; ++i) os << (i ? "x" : "") << "[" << lo_[i] << "," << hi_[i] << "]";
  return os.str();
}

void Lattice::build() {
  extent_.resize(m_);
  stride_.assign(m_, 1);
  for (int i = 0; i < m_; ++i) extent_[i] = hi_[i] - lo_[i] + 1;
  for (int i = m_ - 2; i >= 0; --i) stride_[i] = stride_[i + 1] * extent_[i + 1];
  long nv = 1;
  for (int i = 0; i < m_; ++i) {
    nv *= extent_[i];
    if (nv > (1L << 26)) throw LatticeError("lattice: box too large");
  }
  nverts_ = static_cast<int>(nv);

  const int kmax = std::min(m_, kMaxCellDim);
  const std::size_t nmask = std::size_t{1} << m_;
  std::vector<int> x(m_);
  for (int k = 0; k <= kmax; ++k) {
    auto& t = cells_[k];
    t.lookup.assign(static_cast<std::size_t>(nverts_) * nmask, -1);
    const auto subsets = subsets_lex(m_, k);
    for (int v = 0; v < nverts_; ++v) {
      int rem = v;
      for (int i = 0; i < m_; ++i) {
        x[i] = lo_[i] + rem / stride_[i];
        rem %= stride_[i];
      }
      for (unsigned mask : subsets) {
        bool fits = true;
        for (int i = 0; i < m_; ++i)
          if ((mask >> i & 1u) && x[i] + 1 > hi_[i]) fits = false;
        if (!fits) continue;
        t.lookup[static_cast<std::size_t>(v) * nmask + mask] = static_cast<int>(t.base.size());
        t.base.push_back(v);
        t.mask.push_back(mask);
      }
    }
  }

  // Boundary: d[x; i_0<..<i_{k-1}] = sum_j (-1)^j ([x + e_{i_j}; dirs \ i_j] - [x; dirs \ i_j]).
  for (int k = 1; k <= kmax; ++k) {
    auto& b = bnd_[k];
    const auto& t = cells_[k];
    b.off.assign(1, 0);
    for (std::size_t c = 0; c < t.base.size(); ++c) {
      const auto dirs = mask_dirs(t.mask[c]);
      for (int j = 0; j < k; ++j) {
        const unsigned face = t.mask[c] & ~(1u << dirs[j]);
        const int s = (j % 2 == 0) ? 1 : -1;
        const int lower = cells_[k - 1].lookup[static_cast<std::size_t>(t.base[c]) * nmask + face];
        const int upper = cells_[k - 1].lookup[static_cast<std::size_t>(t.base[c] + stride_[dirs[j]]) * nmask + face];
        b.data.push_back({upper, s});
        b.data.push_back({lower, -s});
        if (k == 1) {
          b.idx.push_back(lower);
          b.idx.push_back(upper);
        }
      }
      b.off.push_back(static_cast<int>(b.data.size()));
    }
  }
  // Coboundary as transpose of the boundary.
  for (int k = 0; k < kmax; ++k) {
    auto& cb = cob_[k];
    const int n = count(k);
    std::vector<int> deg(n, 0);
    const auto& b = bnd_[k + 1];
    for (const auto& inc : b.data) ++deg[inc.cell];
    cb.off.assign(n + 1, 0);
    for (int i = 0; i < n; ++i) cb.off[i + 1] = cb.off[i] + deg[i];
    cb.data.resize(b.data.size());
    std::vector<int> fill(cb.off.begin(), cb.off.end() - 1);
    for (int c = 0; c + 1 < static_cast<int>(b.off.size()); ++c)
      for (int q = b.off[c]; q < b.off[c + 1]; ++q) cb.data[fill[b.data[q].cell]++] = {c, b.data[q].sign};
  }
}

int Lattice::count(int k) const {
  if (k < 0 || k > std::min(m_, kMaxCellDim)) throw LatticeError("lattice: cell dimension out of range");
  return static_cast<int>(cells_[k].base.size());
}

Cell Lattice::cell(int k, int idx) const {
  if (idx < 0 || idx >= count(k)) throw LatticeError("lattice: cell index out of range");
  return Cell{vertex(cells_[k].base[idx]), mask_dirs(cells_[k].mask[idx]), 1};
}

int Lattice::index(int k, const Point& base, unsigned mask) const {
  if (k < 0 || k > std::min(m_, kMaxCellDim)) throw LatticeError("lattice: cell dimension out of range");
  if (!contains(base)) return -1;
  if (mask >> m_) return -1;
  return cells_[k].lookup[static_cast<std::size_t>(vertex_index(base)) * (std::size_t{1} << m_) + mask];
}

int Lattice::index(const Cell& c) const {
  for (std::size_t i = 0; i < c.dirs.size(); ++i)
    if (c.dirs[i] < 0 || c.dirs[i] >= m_ || (i > 0 && c.dirs[i] <= c.dirs[i - 1]))
      throw LatticeError("lattice: directions must be strictly increasing axes");
  return index(c.dim(), c.base, dirs_mask(c.dirs));
}

bool Lattice::contains(const Point& x) const {
  if (static_cast<int>(x.size()) != m_) return false;
  for (int i = 0; i < m_; ++i)
    if (x[i] < lo_[i] || x[i] > hi_[i]) return false;
  return true;
}

int Lattice::vertex_index(const Point& x) const {
  if (!contains(x)) return -1;
  int v = 0;
  for (int i = 0; i < m_; ++i) v += (x[i] - lo_[i]) * stride_[i];
  return v;
}

Point Lattice::vertex(int v) const {
  Point x(m_);
  for (int i = 0; i < m_; ++i) {
    x[i] = lo_[i] + v / stride_[i];
    v %= stride_[i];
  }
  return x;
}

std::span<const Incidence> Lattice::boundary(int k, int idx) const {
  if (k < 1 || k > std::min(m_, kMaxCellDim)) throw LatticeError("boundary: k out of range");
  const auto& b = bnd_[k];
  return {b.data.data() + b.off[idx], static_cast<std::size_t>(b.off[idx + 1] - b.off[idx])};
}

std::span<const Incidence> Lattice::coboundary(int k, int idx) const {
  if (k < 0 || k >= std::min(m_, kMaxCellDim)) throw LatticeError("coboundary: k out of range");
  const auto& b = cob_[k];
  return {b.data.data() + b.off[idx], static_cast<std::size_t>(b.off[idx + 1] - b.off[idx])};
}

int Lattice::edge_axis(int e) const { return __builtin_ctz(cells_[1].mask[e]); }

// ---------------------------------------------------------------------------

void Chain::add(int idx, long v) {
  if (v == 0) return;
  auto [it, fresh] = coef.try_emplace(idx, v);
  if (!fresh) {
    it->second += v;
    if (it->second == 0) coef.erase(it);
  }
}

std::vector<Cell> enumerate_cells(const Lattice& lat, int k) {
  std::vector<Cell> out;
  const int n = lat.count(k);
  out.reserve(n);
  for (int i = 0; i < n; ++i) out.push_back(lat.cell(k, i));
  return out;
}

Chain boundary(const Lattice& lat, const Chain& c) {
  if (c.k < 1) throw LatticeError("boundary: k must be >= 1");
  Chain out{c.k - 1, {}};
  for (const auto& [idx, v] : c.coef)
    for (const auto& inc : lat.boundary(c.k, idx)) out.add(inc.cell, v * inc.sign);
  return out;
}

Chain coboundary(const Lattice& lat, const Cell& c) {
  const int idx = lat.index(c);
  if (idx < 0) throw LatticeError("coboundary: cell outside the box");
  Chain out{c.dim() + 1, {}};
  for (const auto& inc : lat.coboundary(c.dim(), idx)) out.add(inc.cell, static_cast<long>(inc.sign) * c.sign);
  return out;
}

Form d(const Lattice& lat, const Form& f) {
  Form out = Form::zero(lat, f.k + 1);
  for (int c = 0; c < lat.count(f.k + 1); ++c) {
    bool par = false;
    for (const auto& inc : lat.boundary(f.k + 1, c)) par ^= f.bits[inc.cell];
    out.bits[c] = par;
  }
  return out;
}

Form codifferential(const Lattice& lat, const Form& w) {
  if (w.k < 1) throw LatticeError("codifferential: k must be >= 1");
  Form out = Form::zero(lat, w.k - 1);
  for (int c = 0; c < lat.count(w.k - 1); ++c) {
    bool par = false;
    for (const auto& inc : lat.coboundary(w.k - 1, c)) par ^= w.bits[inc.cell];
    out.bits[c] = par;
  }
  return out;
}

// ---------------------------------------------------------------------------

Path::Path(const Lattice& lat, Chain c) : chain_(std::move(c)) {
  if (chain_.k != 1) throw LatticeError("path: chain must be a 1-chain");
  for (const auto& [e, v] : chain_.coef)
    if (v != 1 && v != -1) throw LatticeError("path: coefficients must be in {-1,0,1}");
  bnd_ = z2lab::boundary(lat, chain_);
}

Path Path::walk(const Lattice& lat, const std::vector<Point>& vs) {
  Chain c{1, {}};
  for (std::size_t i = 0; i + 1 < vs.size(); ++i) {
    const Point& a = vs[i];
    const Point& b = vs[i + 1];
    int axis = -1, step = 0;
    for (int j = 0; j < lat.dim(); ++j) {
      const int dlt = b[j] - a[j];
      if (dlt == 0) continue;
      if (axis >= 0 || std::abs(dlt) != 1) throw LatticeError("path: walk steps must be nearest-neighbour");
      axis = j;
      step = dlt;
    }
    if (axis < 0) throw LatticeError("path: repeated vertex in walk");
    const int e = lat.index(1, step > 0 ? a : b, 1u << axis);
    if (e < 0) throw LatticeError("path: walk leaves the box");
    c.add(e, step);
  }
  return Path(lat, std::move(c));
}

Path Path::single_edge(const Lattice& lat, int e) {
  Chain c{1, {}};
  if (e < 0 || e >= lat.count(1)) throw LatticeError("path: edge index out of range");
  c.add(e, 1);
  return Path(lat, std::move(c));
}

std::vector<int> Path::edges() const {
  std::vector<int> out;
  out.reserve(chain_.size());
  for (const auto& kv : chain_.coef) out.push_back(kv.first);
  return out;
}

Bits Path::support(const Lattice& lat) const {
  Bits b(lat.count(1));
  for (const auto& kv : chain_.coef) b.set(kv.first);
  return b;
}

int Path::evaluate(const Bits& sigma) const {
  int par = 0;
  for (const auto& kv : chain_.coef) par ^= sigma[kv.first] ? 1 : 0;
  return par;
}

Path Path::operator+(const Path& o) const {
  Path out = *this;
  for (const auto& [e, v] : o.chain_.coef) out.chain_.add(e, v);
  for (const auto& [e, v] : out.chain_.coef)
    if (v != 1 && v != -1) throw LatticeError("path: sum leaves {-1,0,1}");
  for (const auto& [x, v] : o.bnd_.coef) out.bnd_.add(x, v);
  return out;
}

Path Path::operator-() const {
  Path out = *this;
  for (auto& kv : out.chain_.coef) kv.second = -kv.second;
  for (auto& kv : out.bnd_.coef) kv.second = -kv.second;
  return out;
}

PathClass classify(const Path& g) {
  const auto& b = g.boundary().coef;
  if (b.empty()) return {PathKind::Loop, -1, -1};
  if (b.size() != 2) return {PathKind::Invalid, -1, -1};
  auto it = b.begin();
  const auto [v0, c0] = *it++;
  const auto [v1, c1] = *it;
  if (c0 == -1 && c1 == 1) return {PathKind::Open, v0, v1};
  if (c0 == 1 && c1 == -1) return {PathKind::Open, v1, v0};
  return {PathKind::Invalid, -1, -1};
}

std::pair<Path, Path> build_line_pair(const Lattice& lat, int R, int T) {
  if (lat.dim() < 2) throw LatticeError("line pair: need at least two axes");
  if (R < 1 || T < 1) throw LatticeError("line pair: R and T must be >= 1");
  const auto& lo = lat.lo();
  const auto& hi = lat.hi();
  const int s = lo[0] + ((hi[0] - lo[0]) - T) / 2;
  if (s < lo[0] || s + T > hi[0] || -R < lo[1] || R > hi[1])
    throw LatticeError("line pair: rectangle exceeds the box");
  Point base(lat.dim(), 0);
  for (int i = 2; i < lat.dim(); ++i) base[i] = std::clamp(0, lo[i], hi[i]);
  auto at = [&](int x1, int x2) {
    Point p = base;
    p[0] = x1;
    p[1] = x2;
    return p;
  };
  std::vector<Point> w1, w2;
  for (int y = 0; y >= -R; --y) w1.push_back(at(s, y));
  for (int x = s + 1; x <= s + T; ++x) w1.push_back(at(x, -R));
  for (int y = -R + 1; y <= 0; ++y) w1.push_back(at(s + T, y));
  for (int y = 0; y <= R; ++y) w2.push_back(at(s + T, y));
  for (int x = s + T - 1; x >= s; --x) w2.push_back(at(x, R));
  for (int y = R - 1; y >= 0; --y) w2.push_back(at(s, y));
  return {Path::walk(lat, w1), Path::walk(lat, w2)};
}

std::optional<Path> translate(const Lattice& lat, const Path& g, const Point& shift) {
  Chain c{1, {}};
  for (const auto& [e, v] : g.chain().coef) {
    Point b = lat.vertex(lat.base_vertex(1, e));
    for (int i = 0; i < lat.dim(); ++i) b[i] += shift[i];
    const int e2 = lat.index(1, b, lat.dirmask(1, e));
    if (e2 < 0) return std::nullopt;
    c.add(e2, v);
  }
  return Path(lat, std::move(c));
}

namespace {

std::vector<Point> support_vertices(const Lattice& lat, const Path& g) {
  std::set<int> vs;
  for (const auto& kv : g.chain().coef) {
    vs.insert(lat.edge_tail(kv.first));
    vs.insert(lat.edge_head(kv.first));
  }
  std::vector<Point> out;
  for (int v : vs) out.push_back(lat.vertex(v));
  return out;
}

int min_l1(const std::vector<Point>& a, const std::vector<Point>& b) {
  int best = INT_MAX;
  for (const auto& p : a)
    for (const auto& q : b) {
      int s = 0;
      for (std::size_t i = 0; i < p.size(); ++i) s += std::abs(p[i] - q[i]);
      best = std::min(best, s);
    }
  return best;
}

}  // namespace

int dist(const Lattice& lat, const Path& a, const Path& b) {
  if (a.empty() || b.empty()) throw LatticeError("dist: empty path");
  return min_l1(support_vertices(lat, a), support_vertices(lat, b));
}

int dist_edge(const Lattice& lat, int e, const Path& b) {
  if (b.empty()) throw LatticeError("dist: empty path");
  return min_l1({lat.vertex(lat.edge_tail(e)), lat.vertex(lat.edge_head(e))}, support_vertices(lat, b));
}

Bits boundary_mod2(const Lattice& lat, const Bits& plaq) {
  Bits out(lat.count(1));
  for (auto p = plaq.find_first(); p != Bits::npos; p = plaq.find_next(p))
    for (const auto& inc : lat.boundary(2, static_cast<int>(p))) out.flip(inc.cell);
  return out;
}

Bits spanning_surface(const Lattice& lat, const Path& loop) {
  if (classify(loop).kind != PathKind::Loop) throw LatticeError("spanning surface: path is not closed");
  return spanning_surface(lat, loop.support(lat));
}

Bits spanning_surface(const Lattice& lat, const Bits& target) {
  Bits result(lat.count(2));
  if (target.none()) return result;
  std::vector<int> parity(lat.count(0), 0);
  for (auto e = target.find_first(); e != Bits::npos; e = target.find_next(e)) {
    parity[lat.edge_tail(static_cast<int>(e))] ^= 1;
    parity[lat.edge_head(static_cast<int>(e))] ^= 1;
  }
  if (std::any_of(parity.begin(), parity.end(), [](int x) { return x != 0; }))
    throw LatticeError("spanning surface: edge set is not a cycle mod 2");
  const int m = lat.dim();
  Point lo(m, INT_MAX), hi(m, INT_MIN);
  for (auto e = target.find_first(); e != Bits::npos; e = target.find_next(e))
    for (int v : {lat.edge_tail(static_cast<int>(e)), lat.edge_head(static_cast<int>(e))}) {
      const Point x = lat.vertex(v);
      for (int i = 0; i < m; ++i) {
        lo[i] = std::min(lo[i], x[i]);
        hi[i] = std::max(hi[i], x[i]);
      }
    }
  std::vector<int> varying;
  for (int i = 0; i < m; ++i)
    if (hi[i] > lo[i]) varying.push_back(i);

  // Flat filling of an axis-aligned rectangle.
  if (varying.size() == 2) {
    const unsigned mask = (1u << varying[0]) | (1u << varying[1]);
    Point x = lo;
    for (x[varying[0]] = lo[varying[0]]; x[varying[0]] < hi[varying[0]]; ++x[varying[0]])
      for (x[varying[1]] = lo[varying[1]]; x[varying[1]] < hi[varying[1]]; ++x[varying[1]])
        result.set(lat.index(2, x, mask));
    if (boundary_mod2(lat, result) == target) return result;
    result.reset();
  }

  // General case: solve boundary_2 x = gamma (mod 2) inside the bounding box,
  // which is contractible, so a solution exists.
  const Lattice sub(lo, hi);
  std::vector<Bits> rows(sub.count(1), Bits(sub.count(2)));
  for (int p = 0; p < sub.count(2); ++p)
    for (const auto& inc : sub.boundary(2, p)) rows[inc.cell].set(p);
  Bits rhs(sub.count(1));
  for (int e = 0; e < sub.count(1); ++e) {
    const int ge = lat.index(1, sub.vertex(sub.base_vertex(1, e)), sub.dirmask(1, e));
    rhs[e] = target[ge];
  }
  auto x = gf2::solve(rows, sub.count(2), rhs);
  if (!x) throw LatticeError("spanning surface: no solution (internal error)");
  for (auto p = x->find_first(); p != Bits::npos; p = x->find_next(p))
    result.set(lat.index(2, sub.vertex(sub.base_vertex(2, static_cast<int>(p))), sub.dirmask(2, static_cast<int>(p))));
  if (boundary_mod2(lat, result) != target) throw LatticeError("spanning surface: residual check failed");
  return result;
}

}  // namespace z2lab
