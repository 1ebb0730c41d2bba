#include "z2lab/gf2.hpp"

#include <stdexcept>

namespace z2lab::gf2 {

std::vector<std::size_t> row_reduce(std::vector<Bits>& rows, std::size_t ncols) {
  std::vector<std::size_t> pivots;
  std::size_t r = 0;
  for (std::size_t c = 0; c < ncols && r < rows.size(); ++c) {
    std::size_t sel = r;
    while (sel < rows.size() && !rows[sel].test(c)) ++sel;
    if (sel == rows.size()) continue;
    std::swap(rows[r], rows[sel]);
    for (std::size_t i = 0; i < rows.size(); ++i)
      if (i != r && rows[i].test(c)) rows[i] ^= rows[r];
    pivots.push_back(c);
    ++r;
  }
  return pivots;
}

std::size_t rank(std::vector<Bits> rows, std::size_t ncols) {
  return row_reduce(rows, ncols).size();
}

std::vector<Bits> kernel_basis(std::vector<Bits> rows, std::size_t ncols) {
  auto pivots = row_reduce(rows, ncols);
  std::vector<char> is_pivot(ncols, 0);
  for (auto p : pivots) is_pivot[p] = 1;
  std::vector<Bits> basis;
  for (std::size_t f = 0; f < ncols; ++f) {
    if (is_pivot[f]) continue;
    Bits x(ncols);
    x.set(f);
    for (std::size_t i = 0; i < pivots.size(); ++i)
      if (rows[i].test(f)) x.set(pivots[i]);
    basis.push_back(std::move(x));
  }
  return basis;
}

std::optional<Bits> solve(const std::vector<Bits>& rows, std::size_t ncols, const Bits& rhs) {
  if (rhs.size() != rows.size()) throw std::invalid_argument("gf2::solve: rhs size mismatch");
  std::vector<Bits> aug;
  aug.reserve(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    Bits r = rows[i];
    r.resize(ncols + 1);
    r[ncols] = rhs[i];
    aug.push_back(std::move(r));
  }
  auto pivots = row_reduce(aug, ncols);
  for (std::size_t i = pivots.size(); i < aug.size(); ++i)
    if (aug[i].test(ncols)) return std::nullopt;
  Bits x(ncols);
  for (std::size_t i = 0; i < pivots.size(); ++i)
    if (aug[i].test(ncols)) x.set(pivots[i]);
  return x;
}

std::vector<Bits> span(const std::vector<Bits>& basis, std::size_t nbits) {
  if (basis.size() > 30) throw std::length_error("gf2::span: basis too large to enumerate");
  std::vector<Bits> out(std::size_t{1} << basis.size(), Bits(nbits));
  for (std::size_t i = 1; i < out.size(); ++i) {
    // Gray-free construction: out[i] = out[i without lowest bit] + basis[lowest bit].
    std::size_t low = static_cast<std::size_t>(__builtin_ctzll(i));
    out[i] = out[i & (i - 1)] ^ basis[low];
  }
  return out;
}

}  // namespace z2lab::gf2
