#pragma once
// Dense bitset linear algebra over GF(2).

#include <cstddef>
#include <optional>
#include <vector>

#include "z2lab/lattice.hpp"

namespace z2lab::gf2 {

// Reduces rows to reduced row-echelon form over the first ncols columns.
// Returns the pivot column of each nonzero row, in row order.
std::vector<std::size_t> row_reduce(std::vector<Bits>& rows, std::size_t ncols);

std::size_t rank(std::vector<Bits> rows, std::size_t ncols);

// Basis of {x : A x = 0}, rows of A given as bitsets of length ncols.
std::vector<Bits> kernel_basis(std::vector<Bits> rows, std::size_t ncols);

// Some x with A x = b, or nullopt when inconsistent.
std::optional<Bits> solve(const std::vector<Bits>& rows, std::size_t ncols, const Bits& rhs);

// All 2^basis.size() combinations, in binary-counter order of the coefficients.
std::vector<Bits> span(const std::vector<Bits>& basis, std::size_t nbits);

}  // namespace z2lab::gf2
