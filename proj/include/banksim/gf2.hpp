#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "banksim/rng.hpp"

// Linear algebra over GF(2) on bit vectors of width <= 64, stored as
// uint64_t masks (bit i = coordinate i).
namespace banksim::gf2 {

inline int parity(uint64_t x) { return __builtin_parityll(x); }

// Row-reduces `rows` in place (Gauss-Jordan, highest set bit as pivot),
// dropping zero rows. Returns the rank.
size_t echelonize(std::vector<uint64_t>& rows);

size_t rank(std::vector<uint64_t> rows);

// True iff the two sets of vectors span the same subspace.
bool same_span(const std::vector<uint64_t>& a, const std::vector<uint64_t>& b);

// Basis of { x in GF(2)^width : parity(r & x) == 0 for every r in rows }.
// Serves both as nullspace (rows as equations) and as orthogonal
// complement (rows as a spanned subspace) under the standard dot product.
std::vector<uint64_t> nullspace(const std::vector<uint64_t>& rows, uint32_t width);

// One linear equation: parity(coeffs & x) == rhs.
struct Equation {
  uint64_t coeffs = 0;
  uint8_t rhs = 0;
};

// A solved affine system x = particular + span(kernel_basis); free
// coordinates can be assigned at random to sample uniformly.
struct AffineSolution {
  uint64_t particular = 0;
  std::vector<uint64_t> kernel_basis;

  uint64_t sample(Rng& rng) const {
    uint64_t x = particular;
    for (uint64_t k : kernel_basis)
      if (rng.coin()) x ^= k;
    return x;
  }
};

// Solves the system over `width` unknowns; nullopt if inconsistent.
std::optional<AffineSolution> solve(const std::vector<Equation>& eqs, uint32_t width);

}  // namespace banksim::gf2
