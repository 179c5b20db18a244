#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <set>
#include <stdexcept>
#include <vector>

#include "banksim/workload.hpp"

using namespace banksim;

namespace {

BankMap map8() { return parse_bank_map("b0:9 b1:10 b2:11", 32); }
RowColumnLayout layout32() { return RowColumnLayout::for_width(32); }

PllWorkload::Params sb_params(uint32_t lists, uint32_t entries) {
  PllWorkload::Params p;
  p.n_lists = lists;
  p.entries_per_list = entries;
  p.target_banks = {0};
  return p;
}

}  // namespace

TEST_CASE("build_pll validates its inputs") {
  auto m = map8();
  auto l = layout32();
  PllWorkload::Params p = sb_params(0, 8);
  CHECK_THROWS_AS(build_pll(p, m, l), std::invalid_argument);
  p = sb_params(2, 8);
  p.target_banks = {};
  CHECK_THROWS_AS(build_pll(p, m, l), std::invalid_argument);
  p.target_banks = {8};  // only banks 0-7 exist
  CHECK_THROWS_AS(build_pll(p, m, l), std::invalid_argument);
}

TEST_CASE("single-bank chains: one bank, pairwise-distinct rows") {
  auto m = map8();
  auto l = layout32();
  auto chains = build_pll(sb_params(2, 8), m, l);
  REQUIRE(chains.size() == 2);
  std::set<uint64_t> rows;
  for (const auto& c : chains) {
    REQUIRE(c.size() == 8);
    for (uint64_t a : c) {
      CHECK(m.paddr_to_bank(a) == 0);
      rows.insert(l.row_of(a));
    }
  }
  CHECK(rows.size() == 16);  // every chase step row-conflicts
}

TEST_CASE("single-bank chains reject when the bank has too few rows") {
  BankMap m = parse_bank_map("b0:9", 20);
  RowColumnLayout l = RowColumnLayout::for_width(20, 16);  // 16 rows
  PllWorkload::Params p = sb_params(1, 17);
  CHECK_THROWS_AS(build_pll(p, m, l), std::invalid_argument);
  p.entries_per_list = 16;
  CHECK_NOTHROW(build_pll(p, m, l));
}

TEST_CASE("all-bank chains spread evenly across the target banks") {
  auto m = map8();
  auto l = layout32();
  PllWorkload::Params p = sb_params(2, 32);
  p.target_banks = {0, 1, 2, 3, 4, 5, 6, 7};
  auto chains = build_pll(p, m, l);  // 64 addresses, 8 per bank
  std::vector<int> hist(8, 0);
  std::set<uint64_t> distinct;
  for (const auto& c : chains)
    for (uint64_t a : c) {
      ++hist[m.paddr_to_bank(a)];
      distinct.insert(a);
    }
  for (int h : hist) CHECK(h == 8);
  CHECK(distinct.size() == 64);
}

TEST_CASE("pll chase: one outstanding hop per chain") {
  auto m = map8();
  auto l = layout32();
  PllWorkload w(0, 8, sb_params(4, 16), m, l);

  // Round-robin across the four chains, then stall on the chase dependency.
  for (uint64_t c = 0; c < 4; ++c) {
    auto r = w.peek(0);
    REQUIRE(r);
    CHECK(r->token == c);
    CHECK(r->paddr == w.chains()[c][0]);
    CHECK(!r->is_write);
    CHECK(!r->allocate);
    w.accepted(0);
  }
  CHECK(w.outstanding() == 4);
  CHECK(!w.peek(1));
  CHECK(w.wake_hint(1) == kNever);

  // A completion frees exactly that chain, advanced one hop.
  w.on_complete(2, 50);
  auto r = w.peek(51);
  REQUIRE(r);
  CHECK(r->token == 2);
  CHECK(r->paddr == w.chains()[2][1]);
}

TEST_CASE("pll respects the MLP limit") {
  auto m = map8();
  auto l = layout32();
  PllWorkload w(0, 2, sb_params(8, 16), m, l);
  REQUIRE(w.peek(0));
  w.accepted(0);
  REQUIRE(w.peek(0));
  w.accepted(0);
  CHECK(w.outstanding() == 2);
  CHECK(!w.peek(0));  // six chains idle, but the core is out of MLP
  CHECK(w.wake_hint(0) == kNever);
}

TEST_CASE("pll parked chain sleeps until its wake cycle") {
  auto m = map8();
  auto l = layout32();
  PllWorkload w(0, 4, sb_params(1, 16), m, l);
  auto r = w.peek(0);
  REQUIRE(r);
  w.parked(*r, 100);
  CHECK(!w.peek(5));
  CHECK(w.wake_hint(5) == 100);
  auto again = w.peek(100);
  REQUIRE(again);
  CHECK(again->paddr == r->paddr);  // same hop retried
}

TEST_CASE("pll accepted without a peek is a driver bug") {
  auto m = map8();
  auto l = layout32();
  PllWorkload w(0, 4, sb_params(2, 8), m, l);
  CHECK_THROWS_AS(w.accepted(0), std::logic_error);
}

TEST_CASE("pll quota stops issue and stamps completion time") {
  auto m = map8();
  auto l = layout32();
  PllWorkload::Params p = sb_params(2, 8);
  p.quota = 3;
  PllWorkload w(0, 1, p, m, l);
  cycle_t now = 0;
  for (int i = 0; i < 3; ++i) {
    auto r = w.peek(now);
    REQUIRE(r);
    w.accepted(now);
    now += 10;
    w.on_complete(r->token, now);
  }
  CHECK(w.quota_done());
  CHECK(w.quota_done_at() == 30);
  CHECK(!w.peek(now));
  CHECK(w.completed() == 3);
}

TEST_CASE("sequential sweep walks the array a line at a time and wraps") {
  SequentialWorkload::Params p;
  p.base_addr = 0x10000;
  p.array_bytes = 4 * kLineBytes;
  SequentialWorkload w(0, 4, p);
  std::vector<uint64_t> seen;
  for (int i = 0; i < 6; ++i) {
    auto r = w.peek(i);
    REQUIRE(r);
    CHECK(!r->is_write);
    CHECK(r->allocate);
    CHECK(r->token == uint64_t(i));
    seen.push_back(r->paddr);
    w.accepted(i);
    w.on_complete(r->token, i);
  }
  CHECK(seen == std::vector<uint64_t>{0x10000, 0x10040, 0x10080, 0x100c0, 0x10000, 0x10040});
}

TEST_CASE("scattered sweep is sequential within a page, scattered across pages") {
  SequentialWorkload::Params p;
  p.array_bytes = 8 * kLineBytes;  // 4 pages of 2 lines
  p.page_bytes = 2 * kLineBytes;
  p.scatter_pages = true;
  p.addr_width = 20;
  p.seed = 3;
  SequentialWorkload w(0, 1, p);

  std::vector<uint64_t> addrs;
  for (int i = 0; i < 8; ++i) {
    auto r = w.peek(i);
    REQUIRE(r);
    addrs.push_back(r->paddr);
    w.accepted(i);
    w.on_complete(r->token, i);
  }
  std::set<uint64_t> frames;
  for (int k = 0; k < 4; ++k) {
    uint64_t base = addrs[2 * k];
    CHECK(base % p.page_bytes == 0);
    CHECK(base < (1ull << 20));
    CHECK(addrs[2 * k + 1] == base + kLineBytes);
    frames.insert(base);
  }
  CHECK(frames.size() == 4);

  // Same seed, same frames; the wrap revisits the same physical pages.
  SequentialWorkload w2(0, 1, p);
  auto r = w2.peek(0);
  REQUIRE(r);
  CHECK(r->paddr == addrs[0]);
}

TEST_CASE("scattered sweep parameter validation") {
  SequentialWorkload::Params p;
  p.scatter_pages = true;
  p.array_bytes = 4096;
  p.page_bytes = 100;
  CHECK_THROWS_AS(SequentialWorkload(0, 1, p), std::invalid_argument);
  p.page_bytes = 4096;
  p.addr_width = 10;
  CHECK_THROWS_AS(SequentialWorkload(0, 1, p), std::invalid_argument);
  p.addr_width = 13;
  p.array_bytes = 8192;  // 2 pages, but the 8 KiB pool only spares 1
  CHECK_THROWS_AS(SequentialWorkload(0, 1, p), std::invalid_argument);
  p.array_bytes = 4096;
  CHECK_NOTHROW(SequentialWorkload(0, 1, p));

  SequentialWorkload::Params tiny;
  tiny.array_bytes = 32;
  CHECK_THROWS_AS(SequentialWorkload(0, 1, tiny), std::invalid_argument);
}

TEST_CASE("sequential MLP, parking, and quota") {
  SequentialWorkload::Params p;
  p.array_bytes = 1 << 20;
  p.quota_lines = 3;
  SequentialWorkload w(0, 2, p);

  auto r1 = w.peek(0);
  REQUIRE(r1);
  w.accepted(0);
  auto r2 = w.peek(0);
  REQUIRE(r2);
  w.accepted(0);
  CHECK(!w.peek(0));  // MLP limit
  CHECK(w.wake_hint(0) == kNever);

  w.on_complete(r1->token, 40);
  auto r3 = w.peek(40);
  REQUIRE(r3);
  w.parked(*r3, 60);
  CHECK(!w.peek(50));
  CHECK(w.wake_hint(50) == 60);
  REQUIRE(w.peek(60));
  w.accepted(60);

  CHECK(!w.peek(61));  // issued == quota
  CHECK(w.wake_hint(61) == kNever);
  w.on_complete(r2->token, 70);
  CHECK(!w.quota_done());
  w.on_complete(r3->token, 90);
  CHECK(w.quota_done());
  CHECK(w.quota_done_at() == 90);
}

TEST_CASE("bandwidth conversion") {
  CHECK(measure_bandwidth_mbps(1'000'000, 50'000'000) == doctest::Approx(1280.0));
  CHECK(measure_bandwidth_mbps(1, 64) == doctest::Approx(1000.0));
  CHECK(measure_bandwidth_mbps(0, 100) == 0.0);
  CHECK_THROWS_AS(measure_bandwidth_mbps(5, 0), std::invalid_argument);
}
