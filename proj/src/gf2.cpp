#include "banksim/gf2.hpp"

#include <bit>

namespace banksim::gf2 {

size_t echelonize(std::vector<uint64_t>& rows) {
  size_t r = 0;
  for (int bit = 63; bit >= 0 && r < rows.size(); --bit) {
    uint64_t mask = 1ULL << bit;
    size_t pivot = r;
    while (pivot < rows.size() && !(rows[pivot] & mask)) ++pivot;
    if (pivot == rows.size()) continue;
    std::swap(rows[r], rows[pivot]);
    for (size_t i = 0; i < rows.size(); ++i)
      if (i != r && (rows[i] & mask)) rows[i] ^= rows[r];
    ++r;
  }
  rows.resize(r);
  return r;
}

size_t rank(std::vector<uint64_t> rows) { return echelonize(rows); }

bool same_span(const std::vector<uint64_t>& a, const std::vector<uint64_t>& b) {
  std::vector<uint64_t> merged = a;
  merged.insert(merged.end(), b.begin(), b.end());
  size_t ra = rank(a);
  return ra == rank(b) && ra == rank(merged);
}

std::vector<uint64_t> nullspace(const std::vector<uint64_t>& rows, uint32_t width) {
  std::vector<uint64_t> m = rows;
  echelonize(m);

  // Pivot columns after reduction are the highest set bits of each row.
  uint64_t pivot_cols = 0;
  for (uint64_t row : m)
    pivot_cols |= 1ULL << (63 - std::countl_zero(row));

  std::vector<uint64_t> basis;
  for (uint32_t free_col = 0; free_col < width; ++free_col) {
    if (pivot_cols & (1ULL << free_col)) continue;
    uint64_t v = 1ULL << free_col;
    // x_pivot = parity of the row restricted to free coordinates.
    for (uint64_t row : m) {
      uint64_t pivot = 1ULL << (63 - std::countl_zero(row));
      if (parity(row & v)) v ^= pivot;
    }
    basis.push_back(v);
  }
  return basis;
}

std::optional<AffineSolution> solve(const std::vector<Equation>& eqs, uint32_t width) {
  // Gauss-Jordan on the augmented system, tracking rhs alongside.
  std::vector<Equation> reduced;
  for (Equation eq : eqs) {
    for (const Equation& r : reduced) {
      uint64_t pivot = 1ULL << (63 - std::countl_zero(r.coeffs));
      if (eq.coeffs & pivot) {
        eq.coeffs ^= r.coeffs;
        eq.rhs ^= r.rhs;
      }
    }
    if (eq.coeffs == 0) {
      if (eq.rhs) return std::nullopt;
      continue;
    }
    uint64_t pivot = 1ULL << (63 - std::countl_zero(eq.coeffs));
    for (Equation& r : reduced) {
      if (r.coeffs & pivot) {
        r.coeffs ^= eq.coeffs;
        r.rhs ^= eq.rhs;
      }
    }
    reduced.push_back(eq);
  }

  uint64_t pivot_cols = 0;
  for (const Equation& r : reduced)
    pivot_cols |= 1ULL << (63 - std::countl_zero(r.coeffs));

  AffineSolution sol;
  // Particular solution: all free coordinates zero.
  for (const Equation& r : reduced) {
    uint64_t pivot = 1ULL << (63 - std::countl_zero(r.coeffs));
    if (r.rhs) sol.particular |= pivot;
  }
  // Kernel basis: one vector per free coordinate.
  for (uint32_t free_col = 0; free_col < width; ++free_col) {
    if (pivot_cols & (1ULL << free_col)) continue;
    uint64_t v = 1ULL << free_col;
    for (const Equation& r : reduced) {
      uint64_t pivot = 1ULL << (63 - std::countl_zero(r.coeffs));
      if (parity(r.coeffs & v & ~pivot)) v ^= pivot;
    }
    sol.kernel_basis.push_back(v);
  }
  return sol;
}

}  // namespace banksim::gf2
