#pragma once
// Cubical cell complex of an axis-aligned box in Z^m with free boundary.
// Cells of dimension 0..3 are indexed lexicographically by (basepoint, direction set).

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <boost/dynamic_bitset.hpp>

namespace z2lab {

using Bits = boost::dynamic_bitset<std::uint64_t>;
using Point = std::vector<int>;

inline constexpr int kMaxCellDim = 3;

struct Cell {
  Point base;
  std::vector<int> dirs;  // strictly increasing axis indices
  int sign = 1;

  int dim() const { return static_cast<int>(dirs.size()); }
  Cell negated() const { return Cell{base, dirs, -sign}; }
  bool operator==(const Cell&) const = default;
};

struct Incidence {
  int cell;
  int sign;
};

class Lattice {
 public:
  // Box with vertex coordinates lo[i] <= x_i <= hi[i].
  Lattice(std::vector<int> lo, std::vector<int> hi);
  // B_N = [-N, N]^m.
  static Lattice box(int m, int N);

  int dim() const { return m_; }
  const std::vector<int>& lo() const { return lo_; }
  const std::vector<int>& hi() const { return hi_; }
  // N when the box is [-N,N]^m, otherwise -1.
  int radius() const;
  std::string describe() const;

  int count(int k) const;
  Cell cell(int k, int idx) const;
  // Index of the positive cell underlying c (sign ignored); -1 when outside the box.
  int index(const Cell& c) const;
  int index(int k, const Point& base, unsigned dirmask) const;

  int vertex_index(const Point& x) const;
  Point vertex(int v) const;
  bool contains(const Point& x) const;

  std::span<const Incidence> boundary(int k, int idx) const;
  std::span<const Incidence> coboundary(int k, int idx) const;

  // Edge e runs from tail to head along axis edge_axis(e).
  int edge_tail(int e) const { return bnd_[1].idx[2 * e]; }
  int edge_head(int e) const { return bnd_[1].idx[2 * e + 1]; }
  int edge_axis(int e) const;
  unsigned dirmask(int k, int idx) const { return cells_[k].mask[idx]; }
  int base_vertex(int k, int idx) const { return cells_[k].base[idx]; }

  // Vertex adjacency (for graph distances).
  std::span<const Incidence> incident_edges(int v) const { return coboundary(0, v); }

 private:
  struct CellTable {
    std::vector<int> base;        // vertex index of basepoint
    std::vector<unsigned> mask;   // direction bitmask
    std::vector<int> lookup;      // base * 2^m + mask -> idx or -1
  };

  int m_;
  std::vector<int> lo_, hi_, extent_, stride_;
  int nverts_ = 0;
  CellTable cells_[kMaxCellDim + 1];
  struct Inc {
    std::vector<int> off;
    std::vector<Incidence> data;
    std::vector<int> idx;  // edge endpoints (tail, head) for k = 1
  };
  Inc bnd_[kMaxCellDim + 1];
  Inc cob_[kMaxCellDim + 1];

  void build();
};

// Integer k-chain: sparse coefficients on positive k-cells, zeros never stored.
struct Chain {
  int k = 0;
  std::map<int, long> coef;

  void add(int idx, long v);
  bool empty() const { return coef.empty(); }
  std::size_t size() const { return coef.size(); }
  bool operator==(const Chain&) const = default;
};

// Z2-valued k-form stored on positive cells.
struct Form {
  int k = 0;
  Bits bits;

  static Form zero(const Lattice& lat, int k) { return Form{k, Bits(lat.count(k))}; }
  bool operator==(const Form&) const = default;
};

enum class PathKind { Loop, Open, Invalid };

struct PathClass {
  PathKind kind = PathKind::Invalid;
  int start = -1;  // vertex index of x1 (coefficient -1 in the boundary)
  int end = -1;    // vertex index of x2 (coefficient +1)
};

// 1-chain with coefficients in {-1,0,1}.
class Path {
 public:
  Path() = default;
  Path(const Lattice& lat, Chain c);
  // Walk through consecutive nearest-neighbour vertices.
  static Path walk(const Lattice& lat, const std::vector<Point>& vertices);
  static Path single_edge(const Lattice& lat, int e);

  const Chain& chain() const { return chain_; }
  const Chain& boundary() const { return bnd_; }
  int length() const { return static_cast<int>(chain_.size()); }
  bool empty() const { return chain_.empty(); }
  std::vector<int> edges() const;
  Bits support(const Lattice& lat) const;
  // sigma(gamma) in Z2.
  int evaluate(const Bits& sigma) const;
  Path operator+(const Path& other) const;
  Path operator-() const;
  bool operator==(const Path&) const = default;

 private:
  Chain chain_{1, {}};
  Chain bnd_{0, {}};
};

std::vector<Cell> enumerate_cells(const Lattice& lat, int k);
Chain boundary(const Lattice& lat, const Chain& c);
Chain coboundary(const Lattice& lat, const Cell& c);
Form d(const Lattice& lat, const Form& f);
// (delta w)(e) = parity of support plaquettes containing e.
Form codifferential(const Lattice& lat, const Form& w);
PathClass classify(const Path& g);

// Open lines gamma1 (via x2 = -R) and gamma2 (via x2 = +R) joining two points
// on the x1-axis at distance T; gamma1 + gamma2 is the 2R x T rectangle.
std::pair<Path, Path> build_line_pair(const Lattice& lat, int R, int T);
// Translate a path by an integer vector; nullopt when it leaves the box.
std::optional<Path> translate(const Lattice& lat, const Path& g, const Point& shift);

// Minimal l1 distance between the vertex sets of the two supports.
int dist(const Lattice& lat, const Path& a, const Path& b);
int dist_edge(const Lattice& lat, int e, const Path& b);

// Plaquette set q with boundary(q) = gamma mod 2.
Bits spanning_surface(const Lattice& lat, const Path& loop);
// Same for an edge set that is a cycle mod 2 (every vertex has even degree).
Bits spanning_surface(const Lattice& lat, const Bits& cycle_edges);
// Edge set of the mod-2 boundary of a plaquette set.
Bits boundary_mod2(const Lattice& lat, const Bits& plaquettes);

class LatticeError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace z2lab
