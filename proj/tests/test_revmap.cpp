#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <map>
#include <stdexcept>
#include <vector>

#include "banksim/revmap.hpp"
#include "banksim/rng.hpp"

using namespace banksim;
using namespace banksim::revmap;

namespace {

DramConfig cfg8() {
  DramConfig cfg;
  cfg.map = parse_bank_map("b0:9 b1:10 b2:11", 32);
  cfg.layout = RowColumnLayout::for_width(32);
  return cfg;
}

uint64_t row_addr(uint64_t bank, uint64_t row) { return (row << 16) | (bank << 9); }

// Perfect conflict sets for a known map: bucket random line-aligned
// addresses (distinct rows) by their true bank.
ConflictSets planted_clusters(const BankMap& map, const RowColumnLayout& layout, size_t n,
                              uint64_t seed) {
  Rng rng(seed);
  std::map<uint32_t, std::vector<uint64_t>> buckets;
  std::vector<uint64_t> rows_used;
  size_t made = 0;
  while (made < n) {
    uint64_t a = rng.next() & ((1ull << map.addr_width) - 1) & ~uint64_t(kLineBytes - 1);
    uint64_t row = layout.row_of(a);
    if (std::find(rows_used.begin(), rows_used.end(), row) != rows_used.end()) continue;
    rows_used.push_back(row);
    buckets[map.paddr_to_bank(a)].push_back(a);
    ++made;
  }
  ConflictSets cs;
  for (auto& [bank, members] : buckets) {
    std::sort(members.begin(), members.end());
    cs.sets.push_back(members);
  }
  return cs;
}

}  // namespace

TEST_CASE("probe validates its arguments") {
  DramOracle o(cfg8());
  CHECK_THROWS_AS(o.probe(row_addr(0, 1), row_addr(0, 2), 0), std::invalid_argument);
  CHECK_THROWS_AS(o.probe(row_addr(0, 1), row_addr(0, 1) + 32, 4), std::invalid_argument);
  // Distinct banks but one shared row field: a row buffer never closes.
  CHECK_THROWS_AS(o.probe(row_addr(1, 5), row_addr(2, 5), 4), std::invalid_argument);
}

TEST_CASE("probe separates same-bank conflicts from different-bank pairs") {
  DramOracle o(cfg8());
  ProbeSample same = o.probe(row_addr(0, 1), row_addr(0, 2), 4);
  ProbeSample diff = o.probe(row_addr(0, 1), row_addr(1, 2), 4);

  // Same-bank alternation is paced by tRC.
  CHECK(same.mean_latency == doctest::Approx(47.0).epsilon(0.05));
  CHECK(same.mean_latency > diff.mean_latency + 10.0);

  // Steady state: more repeats barely move the mean.
  ProbeSample longer = o.probe(row_addr(0, 1), row_addr(0, 2), 16);
  CHECK(longer.mean_latency == doctest::Approx(same.mean_latency).epsilon(0.03));

  // The oracle resets per probe, so a repeat is bit-identical.
  ProbeSample again = o.probe(row_addr(0, 1), row_addr(0, 2), 4);
  CHECK(again.mean_latency == same.mean_latency);
}

TEST_CASE("otsu split on bimodal, unimodal, and degenerate data") {
  LatencySplit s = otsu_split({30.0, 31.0, 30.5, 47.0, 46.5, 47.0, 46.8});
  CHECK(s.conclusive);
  CHECK(s.threshold > 31.0);
  CHECK(s.threshold <= 46.5);
  CHECK(s.separation > 0.95);

  CHECK(!otsu_split({40.0, 40.5, 41.0, 39.8, 40.2, 40.7}).conclusive);
  CHECK(!otsu_split({42.0, 42.0, 42.0}).conclusive);
  CHECK(!otsu_split({}).conclusive);
  CHECK(!otsu_split({42.0}).conclusive);
}

TEST_CASE("cluster unions transitive conflict edges") {
  auto edge = [](uint64_t a, uint64_t b, double lat) {
    ProbeSample s;
    s.addr_a = a;
    s.addr_b = b;
    s.mean_latency = lat;
    return s;
  };
  // a-b and b-c conflict; d only appears on fast edges.
  std::vector<ProbeSample> samples = {
      edge(0x100, 0x200, 50.0),
      edge(0x200, 0x300, 50.0),
      edge(0x100, 0x400, 20.0),
      edge(0x300, 0x400, 20.0),
  };
  ConflictSets cs = cluster(samples, 40.0);
  REQUIRE(cs.sets.size() == 2);
  CHECK(cs.sets[0] == std::vector<uint64_t>{0x100, 0x200, 0x300});
  CHECK(cs.sets[1] == std::vector<uint64_t>{0x400});
  CHECK(cs.threshold == 40.0);
  CHECK(!cs.inconclusive);  // 50 vs 20 splits cleanly

  ConflictSets mush = cluster({edge(1 << 6, 2 << 6, 30.0), edge(2 << 6, 3 << 6, 30.0)}, 29.0);
  CHECK(mush.inconclusive);  // constant latencies separate nothing
}

TEST_CASE("solve recovers a planted map exactly") {
  BankMap truth = parse_bank_map("b0:12 b1:13 b2:14 b3:31", 32);
  RowColumnLayout layout = RowColumnLayout::for_width(32);
  ConflictSets cs = planted_clusters(truth, layout, 400, 11);
  REQUIRE(cs.sets.size() == 16);

  RecoveredMap r = solve(cs, 32);
  CHECK(maps_equivalent(r.map, truth));
  CHECK(r.map.n_bits() == 4);
  CHECK(!r.rank_deficient);
  CHECK(r.confidence == 1.0);
  CHECK(r.kernel_rank == 32 - kLineShift - 4);

  // Masks come out ascending; functions use in-window bits only.
  for (size_t i = 1; i < r.map.functions.size(); ++i) {
    auto mask = [](const std::vector<uint32_t>& bits) {
      uint64_t m = 0;
      for (uint32_t b : bits) m |= 1ull << b;
      return m;
    };
    CHECK(mask(r.map.functions[i - 1]) < mask(r.map.functions[i]));
  }
}

TEST_CASE("solve flags rank deficiency when clusters collapse") {
  BankMap truth = parse_bank_map("b0:9 b1:10 b2:11", 28);
  RowColumnLayout layout = RowColumnLayout::for_width(28);
  ConflictSets cs = planted_clusters(truth, layout, 200, 5);
  REQUIRE(cs.sets.size() == 8);

  // Merge two real banks into one observed cluster.
  cs.sets[0].insert(cs.sets[0].end(), cs.sets[1].begin(), cs.sets[1].end());
  std::sort(cs.sets[0].begin(), cs.sets[0].end());
  cs.sets.erase(cs.sets.begin() + 1);

  RecoveredMap r = solve(cs, 28);
  CHECK(r.rank_deficient);
  CHECK(r.map.n_bits() < 3);
}

TEST_CASE("solve rejects unusable inputs") {
  ConflictSets one;
  one.sets = {{0x1000, 0x2000}};
  CHECK_THROWS_AS(solve(one, 32), std::invalid_argument);
  ConflictSets two;
  two.sets = {{0x1000}, {0x2000}};
  CHECK_THROWS_AS(solve(two, 0), std::invalid_argument);
  CHECK_THROWS_AS(solve(two, 65), std::invalid_argument);
}

TEST_CASE("platform presets match the published maps") {
  const auto& names = platform_names();
  CHECK(names == std::vector<std::string>{"pi4", "pi5", "intel", "agx"});
  CHECK(!platform_preset("coffee-lake"));

  auto pi4 = platform_preset("pi4");
  REQUIRE(pi4);
  CHECK(pi4->map.to_spec() == "b0:12 b1:13 b2:14");
  CHECK(pi4->tRC == 60);
  auto intel = platform_preset("intel");
  REQUIRE(intel);
  CHECK(intel->map.n_banks() == 128);
  CHECK(intel->tRC == 47);
  auto agx = platform_preset("agx");
  REQUIRE(agx);
  CHECK(agx->map.addr_width == 36);
  CHECK(agx->map.n_banks() == 256);
}

TEST_CASE("campaign recovers the pi4 map from timing alone") {
  auto cfg = platform_preset("pi4");
  REQUIRE(cfg);
  CampaignConfig cc;
  cc.samples_per_bank = 8;
  cc.repeats = 2;
  cc.bootstrap_addresses = 16;
  cc.seed = 1;

  CampaignResult r = recover_map(*cfg, cc);
  CHECK(maps_equivalent(r.recovered.map, cfg->map));
  CHECK(!r.recovered.rank_deficient);
  CHECK(r.recovered.confidence > 0.99);
  CHECK(r.clusters.sets.size() == cfg->map.n_banks());
  CHECK(r.probes_issued == r.samples.size());
}

TEST_CASE("campaign probe count grows subquadratically in the sample budget") {
  auto cfg = platform_preset("pi4");
  REQUIRE(cfg);
  CampaignConfig cc;
  cc.repeats = 2;
  cc.bootstrap_addresses = 16;

  auto probes_at = [&](int spb) {
    CampaignConfig c = cc;
    c.samples_per_bank = spb;
    CampaignResult r = recover_map(*cfg, c);
    REQUIRE(maps_equivalent(r.recovered.map, cfg->map));
    // Classification costs at most one probe per (address, live cluster).
    size_t n = size_t(spb) * cfg->map.n_banks();
    CHECK(r.probes_issued <= 16 * 15 / 2 + (n - 16) * cfg->map.n_banks());
    return r.probes_issued;
  };
  size_t p8 = probes_at(8);
  size_t p16 = probes_at(16);
  CHECK(double(p16) / double(p8) < 2.5);  // all-pairs everywhere would give ~4x
}

TEST_CASE("campaign is deterministic per seed and robust across seeds") {
  auto cfg = platform_preset("pi4");
  REQUIRE(cfg);
  CampaignConfig cc;
  cc.samples_per_bank = 4;
  cc.repeats = 2;
  cc.bootstrap_addresses = 16;
  cc.seed = 9;

  CampaignResult a = recover_map(*cfg, cc);
  CampaignResult b = recover_map(*cfg, cc);
  CHECK(a.probes_issued == b.probes_issued);
  CHECK(a.recovered.map.to_spec() == b.recovered.map.to_spec());

  cc.seed = 10;
  CampaignResult c = recover_map(*cfg, cc);
  CHECK(maps_equivalent(c.recovered.map, cfg->map));
}

TEST_CASE("campaign rejects impossible sampling plans") {
  auto cfg = platform_preset("pi4");
  REQUIRE(cfg);
  CampaignConfig cc;
  cc.samples_per_bank = 0;
  CHECK_THROWS_AS(recover_map(*cfg, cc), std::invalid_argument);

  // Distinct-row sampling cannot exceed half the row space.
  DramConfig tiny;
  tiny.map = parse_bank_map("b0:9", 20);
  tiny.layout = RowColumnLayout::for_width(20, 16);  // 16 rows
  CampaignConfig wide;
  wide.samples_per_bank = 5;  // 10 addresses > 16 / 2
  CHECK_THROWS_AS(recover_map(tiny, wide), std::invalid_argument);
}

TEST_CASE("campaign reports non-bimodal timing instead of inventing a map") {
  DramConfig flat = cfg8();
  flat.map = flat.map.truncated(0);  // one bank: every pair conflicts
  CampaignConfig cc;
  cc.samples_per_bank = 8;
  cc.repeats = 2;
  cc.bootstrap_addresses = 8;
  CHECK_THROWS_AS(recover_map(flat, cc), std::runtime_error);
}
