#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <vector>

#include "banksim/gf2.hpp"
#include "banksim/rng.hpp"

using namespace banksim;

TEST_CASE("echelonize drops dependent rows and reports rank") {
  std::vector<uint64_t> rows = {1ull << 12, 1ull << 13, (1ull << 12) | (1ull << 13)};
  CHECK(gf2::echelonize(rows) == 2);
  CHECK(rows.size() == 2);

  std::vector<uint64_t> zero = {0, 0};
  CHECK(gf2::echelonize(zero) == 0);
  CHECK(zero.empty());

  CHECK(gf2::rank({1, 2, 4, 8}) == 4);
  CHECK(gf2::rank({3, 5, 6}) == 2);  // 6 = 3 ^ 5
}

TEST_CASE("same_span recognizes reordered and recombined bases") {
  CHECK(gf2::same_span({1ull << 12, 1ull << 13}, {1ull << 13, 1ull << 12}));
  CHECK(gf2::same_span({1ull << 12, 1ull << 13}, {1ull << 12, (1ull << 12) | (1ull << 13)}));
  CHECK_FALSE(gf2::same_span({1ull << 12}, {1ull << 14}));
  CHECK_FALSE(gf2::same_span({1ull << 12}, {1ull << 12, 1ull << 13}));
  CHECK(gf2::same_span({}, {}));
}

TEST_CASE("nullspace is the orthogonal complement") {
  const uint32_t width = 16;
  Rng rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<uint64_t> rows;
    size_t n = 1 + rng.below(5);
    for (size_t i = 0; i < n; ++i) rows.push_back(rng.next() & ((1ull << width) - 1));
    auto basis = gf2::nullspace(rows, width);
    CHECK(basis.size() == width - gf2::rank(rows));
    for (uint64_t v : basis) {
      for (uint64_t r : rows) CHECK(gf2::parity(r & v) == 0);
    }
    CHECK(gf2::rank(basis) == basis.size());
  }
}

TEST_CASE("nullspace of an empty system is the full space") {
  auto basis = gf2::nullspace({}, 6);
  CHECK(basis.size() == 6);
}

TEST_CASE("affine solve round-trips random consistent systems") {
  const uint32_t width = 20;
  Rng rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    uint64_t x0 = rng.next() & ((1ull << width) - 1);
    std::vector<gf2::Equation> eqs;
    size_t n = 1 + rng.below(8);
    for (size_t i = 0; i < n; ++i) {
      uint64_t c = rng.next() & ((1ull << width) - 1);
      eqs.push_back({c, static_cast<uint8_t>(gf2::parity(c & x0))});
    }
    auto sol = gf2::solve(eqs, width);
    REQUIRE(sol.has_value());
    for (int s = 0; s < 8; ++s) {
      uint64_t x = sol->sample(rng);
      for (const auto& e : eqs) CHECK(gf2::parity(e.coeffs & x) == e.rhs);
    }
  }
}

TEST_CASE("affine solve reports inconsistency") {
  std::vector<gf2::Equation> eqs = {{0b11, 0}, {0b11, 1}};
  CHECK_FALSE(gf2::solve(eqs, 4).has_value());
}
