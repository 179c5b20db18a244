#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "banksim/gf2.hpp"
#include "banksim/rng.hpp"
#include "banksim/types.hpp"

namespace banksim {

// XOR-based bank address function: bank bit i is the parity of the physical
// address restricted to functions[i].  Bit positions are kept in the order
// they were written so to_spec() round-trips the original notation.
struct BankMap {
  std::vector<std::vector<uint32_t>> functions;
  uint32_t addr_width = 32;

  uint32_t n_banks() const { return 1u << functions.size(); }
  uint32_t n_bits() const { return static_cast<uint32_t>(functions.size()); }

  uint64_t mask_of(size_t i) const;
  std::vector<uint64_t> masks() const;

  uint32_t paddr_to_bank(uint64_t paddr) const;

  // Keeps the lowest `bits` functions; models halving the bank count.
  // bits == 0 yields the single-bank map.
  BankMap truncated(uint32_t bits) const;

  std::string to_spec() const;
};

BankMap parse_bank_map(const std::string& text, uint32_t addr_width);

bool maps_equivalent(const BankMap& a, const BankMap& b);

// Physical row index used by the DRAM model and by distinct-row address
// synthesis.  Bits below row_shift are column/offset bits; the bottom 6 of
// those are the line offset.
struct RowColumnLayout {
  uint32_t row_shift = 16;
  uint32_t row_width = 16;
  uint32_t addr_width = 32;
  uint64_t column_mask = 0xFFC0;  // bits [kLineShift, row_shift)

  static RowColumnLayout for_width(uint32_t addr_width, uint32_t row_shift = 16);

  uint64_t row_of(uint64_t paddr) const {
    return (paddr >> row_shift) & ((row_width >= 64 ? ~0ULL : (1ULL << row_width) - 1));
  }
  uint64_t row_field_mask() const {
    return ((row_width >= 64 ? ~0ULL : (1ULL << row_width) - 1)) << row_shift;
  }
  void validate() const;
};

// Line-aligned addresses all mapping to `bank`.  With distinct_rows, every
// address lands in a different DRAM row (throws if n exceeds the row capacity
// of the bank's coset).  Output order is shuffled by rng.
std::vector<uint64_t> addresses_for_bank(const BankMap& map, const RowColumnLayout& layout,
                                         uint32_t bank, size_t n, bool distinct_rows, Rng& rng);

}  // namespace banksim
