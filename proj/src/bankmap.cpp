#include "banksim/bankmap.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>
#include <unordered_set>

namespace banksim {

uint64_t BankMap::mask_of(size_t i) const {
  uint64_t m = 0;
  for (uint32_t pos : functions[i]) m |= 1ULL << pos;
  return m;
}

std::vector<uint64_t> BankMap::masks() const {
  std::vector<uint64_t> out(functions.size());
  for (size_t i = 0; i < functions.size(); ++i) out[i] = mask_of(i);
  return out;
}

uint32_t BankMap::paddr_to_bank(uint64_t paddr) const {
  uint32_t bank = 0;
  for (size_t i = 0; i < functions.size(); ++i) {
    uint32_t bit = 0;
    for (uint32_t pos : functions[i]) bit ^= (paddr >> pos) & 1u;
    bank |= bit << i;
  }
  return bank;
}

BankMap BankMap::truncated(uint32_t bits) const {
  if (bits > functions.size())
    throw std::invalid_argument("truncated: bits must be in [0, n_bits]");
  BankMap out;
  out.addr_width = addr_width;
  out.functions.assign(functions.begin(), functions.begin() + bits);
  return out;
}

std::string BankMap::to_spec() const {
  std::ostringstream os;
  for (size_t i = 0; i < functions.size(); ++i) {
    if (i) os << ' ';
    os << 'b' << i << ':';
    for (size_t j = 0; j < functions[i].size(); ++j) {
      if (j) os << "\xE2\x8A\x95";  // U+2295 circled plus
      os << functions[i][j];
    }
  }
  return os.str();
}

BankMap parse_bank_map(const std::string& text, uint32_t addr_width) {
  if (addr_width == 0 || addr_width > 64)
    throw std::invalid_argument("bank map: addr_width must be in [1, 64]");

  std::istringstream is(text);
  std::string token;
  std::vector<std::pair<uint32_t, std::vector<uint32_t>>> labeled;
  while (is >> token) {
    size_t colon = token.find(':');
    if (colon == std::string::npos || colon < 2 || token[0] != 'b')
      throw std::invalid_argument("bank map: expected token of form bN:bits, got '" + token + "'");
    uint32_t label;
    try {
      size_t used;
      label = static_cast<uint32_t>(std::stoul(token.substr(1, colon - 1), &used));
      if (used != colon - 1) throw std::invalid_argument("");
    } catch (...) {
      throw std::invalid_argument("bank map: bad label in '" + token + "'");
    }

    // Bit positions joined by '+' or the XOR sign U+2295.
    std::vector<uint32_t> bits;
    std::string body = token.substr(colon + 1);
    size_t off = 0;
    while (off < body.size()) {
      size_t sep = body.find('+', off);
      size_t sep2 = body.find("\xE2\x8A\x95", off);
      size_t end = std::min(sep, sep2);
      std::string piece = body.substr(off, end == std::string::npos ? std::string::npos : end - off);
      uint32_t pos;
      try {
        size_t used;
        pos = static_cast<uint32_t>(std::stoul(piece, &used));
        if (used != piece.size() || piece.empty()) throw std::invalid_argument("");
      } catch (...) {
        throw std::invalid_argument("bank map: bad bit position '" + piece + "' in '" + token + "'");
      }
      if (pos >= addr_width)
        throw std::invalid_argument("bank map: bit position " + std::to_string(pos) +
                                    " exceeds addr_width " + std::to_string(addr_width));
      bits.push_back(pos);
      if (end == std::string::npos) break;
      off = end + (end == sep ? 1 : 3);
    }
    if (bits.empty()) throw std::invalid_argument("bank map: empty function in '" + token + "'");
    labeled.emplace_back(label, std::move(bits));
  }
  if (labeled.empty()) throw std::invalid_argument("bank map: no functions given");

  BankMap map;
  map.addr_width = addr_width;
  map.functions.resize(labeled.size());
  std::vector<bool> seen(labeled.size(), false);
  for (auto& [label, bits] : labeled) {
    if (label >= labeled.size())
      throw std::invalid_argument("bank map: label b" + std::to_string(label) +
                                  " out of range (missing lower label?)");
    if (seen[label]) throw std::invalid_argument("bank map: duplicate label b" + std::to_string(label));
    seen[label] = true;
    map.functions[label] = std::move(bits);
  }

  if (gf2::rank(map.masks()) != map.functions.size())
    throw std::invalid_argument("bank map: functions are linearly dependent");
  return map;
}

bool maps_equivalent(const BankMap& a, const BankMap& b) {
  return gf2::same_span(a.masks(), b.masks());
}

RowColumnLayout RowColumnLayout::for_width(uint32_t addr_width, uint32_t row_shift) {
  RowColumnLayout l;
  l.addr_width = addr_width;
  l.row_shift = row_shift;
  l.row_width = addr_width - row_shift;
  l.column_mask = ((1ULL << row_shift) - 1) & ~((1ULL << kLineShift) - 1);
  l.validate();
  return l;
}

void RowColumnLayout::validate() const {
  if (row_shift < kLineShift)
    throw std::invalid_argument("layout: row field overlaps the line offset");
  if (row_width == 0) throw std::invalid_argument("layout: row_width must be positive");
  if (row_shift + row_width > addr_width)
    throw std::invalid_argument("layout: row field exceeds address width");
}

std::vector<uint64_t> addresses_for_bank(const BankMap& map, const RowColumnLayout& layout,
                                         uint32_t bank, size_t n, bool distinct_rows, Rng& rng) {
  if (bank >= map.n_banks()) throw std::invalid_argument("addresses_for_bank: bank out of range");
  if (layout.addr_width != map.addr_width)
    throw std::invalid_argument("addresses_for_bank: layout/map addr_width mismatch");
  if (n == 0) return {};

  std::vector<gf2::Equation> eqs;
  for (size_t i = 0; i < map.functions.size(); ++i)
    eqs.push_back({map.mask_of(i), static_cast<uint8_t>((bank >> i) & 1u)});
  for (uint32_t b = 0; b < kLineShift; ++b) eqs.push_back({1ULL << b, 0});

  auto sol = gf2::solve(eqs, map.addr_width);
  if (!sol) throw std::logic_error("addresses_for_bank: inconsistent system");

  std::vector<uint64_t> out;
  out.reserve(n);

  if (!distinct_rows) {
    size_t dim = sol->kernel_basis.size();
    if (dim < 63 && n > (1ULL << dim))
      throw std::invalid_argument("addresses_for_bank: bank coset smaller than n");
    std::unordered_set<uint64_t> used;
    while (out.size() < n) {
      uint64_t a = sol->sample(rng);
      if (used.insert(a).second) out.push_back(a);
    }
    return out;
  }

  // Split the kernel into vectors with independent row-field projections
  // (each flips a distinct row pattern) and row-neutral leftovers.
  // row_movers stays sorted by descending projection pivot so forward
  // elimination cannot reintroduce an already-cleared bit.
  uint64_t row_mask = layout.row_field_mask();
  std::vector<uint64_t> row_movers;
  std::vector<uint64_t> row_neutral;  // change only column/offset bits
  auto proj_pivot = [row_mask](uint64_t v) { return 63 - __builtin_clzll(v & row_mask); };
  for (uint64_t k : sol->kernel_basis) {
    for (uint64_t m : row_movers) {
      if ((k & row_mask) == 0) break;
      if ((k >> proj_pivot(m)) & 1u) k ^= m;
    }
    if ((k & row_mask) == 0) {
      row_neutral.push_back(k);
    } else {
      auto it = std::upper_bound(row_movers.begin(), row_movers.end(), k,
                                 [&](uint64_t a, uint64_t b) { return proj_pivot(a) > proj_pivot(b); });
      row_movers.insert(it, k);
    }
  }
  size_t rho = row_movers.size();
  if (rho < 63 && n > (1ULL << rho))
    throw std::invalid_argument("addresses_for_bank: bank has only " +
                                std::to_string(1ULL << rho) + " distinct rows, need " +
                                std::to_string(n));

  // Distinct selector bitstrings over the row movers give distinct rows.
  std::vector<uint64_t> selectors;
  if (rho < 22 && (1ULL << rho) <= std::max<uint64_t>(4 * n, 1024)) {
    selectors.resize(1ULL << rho);
    for (uint64_t s = 0; s < selectors.size(); ++s) selectors[s] = s;
    rng.shuffle(selectors);
    selectors.resize(n);
  } else {
    std::unordered_set<uint64_t> used;
    while (selectors.size() < n) {
      uint64_t s = rho >= 64 ? rng.next() : rng.below(1ULL << rho);
      if (used.insert(s).second) selectors.push_back(s);
    }
  }

  for (uint64_t s : selectors) {
    uint64_t a = sol->particular;
    for (size_t j = 0; j < rho; ++j)
      if ((s >> j) & 1u) a ^= row_movers[j];
    for (uint64_t m : row_neutral)
      if (rng.coin()) a ^= m;
    out.push_back(a);
  }
  rng.shuffle(out);
  return out;
}

}  // namespace banksim
