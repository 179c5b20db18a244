#include "banksim/revmap.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <map>
#include <numeric>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

#include "banksim/gf2.hpp"

namespace banksim::revmap {

DramOracle::DramOracle(const DramConfig& cfg) : cfg_(cfg), model_(cfg) {
  cfg_.validate();
}

cycle_t DramOracle::issue_and_wait(uint64_t paddr, uint64_t id, cycle_t issue_at) {
  MemRequest req;
  req.id = id;
  req.paddr = paddr;
  if (!model_.enqueue(req, issue_at))
    throw std::logic_error("oracle: queue full with a single request in flight");
  cycle_t now = issue_at;
  std::vector<MemRequest> done;
  for (;;) {
    done.clear();
    model_.tick(now, done);
    for (const auto& r : done)
      if (r.id == id) return r.complete_cycle;
    cycle_t next = model_.next_event_after(now);
    if (next == kNever || next <= now)
      throw std::logic_error("oracle: model stalled with a request pending");
    now = next;
  }
}

ProbeSample DramOracle::probe(uint64_t addr_a, uint64_t addr_b, int repeats) {
  if (repeats < 1) throw std::invalid_argument("probe: repeats must be >= 1");
  if ((addr_a >> kLineShift) == (addr_b >> kLineShift))
    throw std::invalid_argument("probe: addresses must differ at line granularity");
  if (cfg_.layout.row_of(addr_a) == cfg_.layout.row_of(addr_b))
    throw std::invalid_argument("probe: addresses must have distinct row fields");

  model_.reset();
  const int accesses = 2 * repeats;
  cycle_t first = 0, last = 0;
  cycle_t issue_at = 0;
  for (int i = 0; i < accesses; ++i) {
    cycle_t done = issue_and_wait(i % 2 == 0 ? addr_a : addr_b,
                                  static_cast<uint64_t>(i), issue_at);
    if (i == 0) first = done;
    last = done;
    issue_at = done + 1;  // dependent access: next pointer available after data
  }

  ProbeSample s;
  s.addr_a = addr_a;
  s.addr_b = addr_b;
  s.repeats = repeats;
  s.mean_latency = static_cast<double>(last - first) / (accesses - 1);
  return s;
}

namespace {

// Between-class / total variance of the two classes split at `threshold`.
// Zero when either class is empty or the data is constant.
double separation_at(const std::vector<double>& xs, double threshold) {
  double n0 = 0, n1 = 0, s0 = 0, s1 = 0;
  for (double x : xs) {
    if (x > threshold) {
      ++n1;
      s1 += x;
    } else {
      ++n0;
      s0 += x;
    }
  }
  if (n0 == 0 || n1 == 0) return 0.0;
  const double n = n0 + n1;
  const double mean = (s0 + s1) / n;
  double var = 0;
  for (double x : xs) var += (x - mean) * (x - mean);
  var /= n;
  if (var == 0) return 0.0;
  const double m0 = s0 / n0, m1 = s1 / n1;
  const double between = (n0 / n) * (n1 / n) * (m1 - m0) * (m1 - m0);
  return between / var;
}

}  // namespace

LatencySplit otsu_split(const std::vector<double>& latencies) {
  LatencySplit out;
  if (latencies.size() < 2) return out;
  std::vector<double> v = latencies;
  std::sort(v.begin(), v.end());

  std::vector<double> prefix(v.size() + 1, 0.0);
  for (size_t i = 0; i < v.size(); ++i) prefix[i + 1] = prefix[i] + v[i];
  const double n = static_cast<double>(v.size());
  const double total_mean = prefix[v.size()] / n;

  double best = -1.0;
  size_t best_k = 0;
  for (size_t k = 1; k < v.size(); ++k) {
    if (v[k - 1] == v[k]) continue;  // midpoint would not separate equal values
    const double w0 = k / n, w1 = 1.0 - w0;
    const double m0 = prefix[k] / k;
    const double m1 = (prefix[v.size()] - prefix[k]) / (n - k);
    const double between = w0 * w1 * (m1 - m0) * (m1 - m0);
    if (between > best) {
      best = between;
      best_k = k;
    }
  }
  if (best < 0) return out;  // constant data: no valid split

  out.threshold = 0.5 * (v[best_k - 1] + v[best_k]);
  double var = 0;
  for (double x : v) var += (x - total_mean) * (x - total_mean);
  var /= n;
  out.separation = var > 0 ? best / var : 0.0;
  out.conclusive = out.separation >= kMinSeparation;
  return out;
}

namespace {

struct Dsu {
  std::vector<uint32_t> parent;
  explicit Dsu(size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0u); }
  uint32_t find(uint32_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  void unite(uint32_t a, uint32_t b) { parent[find(a)] = find(b); }
};

}  // namespace

ConflictSets cluster(const std::vector<ProbeSample>& samples, double threshold) {
  std::vector<uint64_t> addrs;
  addrs.reserve(samples.size() * 2);
  for (const auto& s : samples) {
    addrs.push_back(s.addr_a);
    addrs.push_back(s.addr_b);
  }
  std::sort(addrs.begin(), addrs.end());
  addrs.erase(std::unique(addrs.begin(), addrs.end()), addrs.end());
  std::unordered_map<uint64_t, uint32_t> index;
  index.reserve(addrs.size());
  for (uint32_t i = 0; i < addrs.size(); ++i) index.emplace(addrs[i], i);

  Dsu dsu(addrs.size());
  std::vector<double> latencies;
  latencies.reserve(samples.size());
  for (const auto& s : samples) {
    latencies.push_back(s.mean_latency);
    if (s.mean_latency > threshold) dsu.unite(index.at(s.addr_a), index.at(s.addr_b));
  }

  std::map<uint32_t, std::vector<uint64_t>> groups;  // keyed by root of min member
  for (uint32_t i = 0; i < addrs.size(); ++i) groups[dsu.find(i)].push_back(addrs[i]);

  ConflictSets out;
  out.threshold = threshold;
  for (auto& [root, members] : groups) out.sets.push_back(std::move(members));
  std::sort(out.sets.begin(), out.sets.end(),
            [](const auto& a, const auto& b) { return a.front() < b.front(); });
  out.separation = separation_at(latencies, threshold);
  out.inconclusive = out.separation < kMinSeparation;
  return out;
}

RecoveredMap solve(const ConflictSets& clusters, unsigned addr_width, unsigned known_zero_bits) {
  if (clusters.sets.size() < 2)
    throw std::invalid_argument("solve: need at least two clusters to constrain the map");
  if (addr_width == 0 || addr_width > 64)
    throw std::invalid_argument("solve: addr_width must be in [1, 64]");

  std::vector<uint64_t> kernel;
  for (const auto& set : clusters.sets)
    for (size_t i = 1; i < set.size(); ++i) kernel.push_back(set[i] ^ set[0]);
  RecoveredMap out;
  out.kernel_rank = gf2::rank(kernel);

  // Sub-line bits never vary across probes; treat them as kernel directions
  // so they cannot surface as spurious functions.
  for (unsigned b = 0; b < known_zero_bits && b < addr_width; ++b)
    kernel.push_back(1ULL << b);
  gf2::echelonize(kernel);

  std::vector<uint64_t> masks = gf2::nullspace(kernel, addr_width);
  std::sort(masks.begin(), masks.end());
  out.map.addr_width = addr_width;
  for (uint64_t m : masks) {
    std::vector<uint32_t> bits;
    for (uint32_t b = 0; b < addr_width; ++b)
      if ((m >> b) & 1u) bits.push_back(b);
    out.map.functions.push_back(std::move(bits));
  }

  const unsigned expected =
      std::bit_width(clusters.sets.size() - 1);  // ceil(log2(cluster count))
  out.rank_deficient = out.map.n_bits() != expected;

  // Membership consistency: members of one cluster should share a recovered
  // bank. Counts each address against its cluster's majority bank.
  size_t consistent = 0, total = 0;
  for (const auto& set : clusters.sets) {
    std::map<uint32_t, size_t> votes;
    for (uint64_t a : set) ++votes[out.map.paddr_to_bank(a)];
    size_t majority = 0;
    for (const auto& [bank, count] : votes) majority = std::max(majority, count);
    consistent += majority;
    total += set.size();
  }
  out.confidence = total ? static_cast<double>(consistent) / total : 0.0;
  return out;
}

CampaignResult recover_map(const DramConfig& oracle_cfg, const CampaignConfig& cc) {
  oracle_cfg.validate();
  if (cc.samples_per_bank < 1) throw std::invalid_argument("campaign: samples_per_bank >= 1");
  const uint32_t width = oracle_cfg.map.addr_width;
  const size_t n = static_cast<size_t>(cc.samples_per_bank) * oracle_cfg.map.n_banks();
  if (n < 2) throw std::invalid_argument("campaign: need at least two addresses");
  const uint64_t row_capacity = 1ULL << oracle_cfg.layout.row_width;
  if (n > row_capacity / 2)
    throw std::invalid_argument("campaign: sample count exceeds distinct-row capacity");

  Rng rng(cc.seed);
  const uint64_t addr_mask =
      (width >= 64 ? ~0ULL : (1ULL << width) - 1) & ~((1ULL << kLineShift) - 1);
  std::vector<uint64_t> addrs;
  addrs.reserve(n);
  std::unordered_set<uint64_t> used_rows;
  used_rows.reserve(n * 2);
  while (addrs.size() < n) {
    uint64_t a = rng.next() & addr_mask;
    if (used_rows.insert(oracle_cfg.layout.row_of(a)).second) addrs.push_back(a);
  }

  DramOracle oracle(oracle_cfg);
  std::vector<ProbeSample> samples;
  std::vector<double> latencies;
  auto take = [&](uint64_t a, uint64_t b) -> double {
    ProbeSample s = oracle.probe(a, b, cc.repeats);
    samples.push_back(s);
    latencies.push_back(s.mean_latency);
    return s.mean_latency;
  };

  // Bootstrap: all-pairs over a prefix until the histogram splits cleanly.
  // Growing the prefix guarantees same-bank pairs appear even on many-bank
  // maps where a small prefix might land every address in a distinct bank.
  size_t prefix = std::min<size_t>(std::max(cc.bootstrap_addresses, 2), n);
  const size_t prefix_cap = std::min<size_t>(n, 1024);
  for (size_t i = 0; i < prefix; ++i)
    for (size_t j = i + 1; j < prefix; ++j) take(addrs[i], addrs[j]);
  LatencySplit split = otsu_split(latencies);
  while (!split.conclusive && prefix < prefix_cap) {
    for (size_t j = 0; j < prefix; ++j) take(addrs[prefix], addrs[j]);
    ++prefix;
    split = otsu_split(latencies);
  }
  if (!split.conclusive)
    throw std::runtime_error("campaign: probe latencies are not bimodal");

  // Representatives of the clusters seen so far, in creation order.
  std::vector<uint64_t> reps;
  {
    std::vector<ProbeSample> boot(samples.begin(), samples.end());
    ConflictSets cs = cluster(boot, split.threshold);
    for (const auto& set : cs.sets) reps.push_back(set.front());
  }

  // Classification: probe each address against representatives, stopping at
  // the first conflict; no conflict anywhere founds a new cluster.
  for (size_t i = prefix; i < n; ++i) {
    bool assigned = false;
    for (uint64_t rep : reps) {
      if (take(addrs[i], rep) > split.threshold) {
        assigned = true;
        break;
      }
    }
    if (!assigned) reps.push_back(addrs[i]);
  }

  LatencySplit final_split = otsu_split(latencies);
  if (!final_split.conclusive)
    throw std::runtime_error("campaign: final latency histogram is not bimodal");
  ConflictSets clusters_out = cluster(samples, final_split.threshold);
  if (clusters_out.inconclusive)
    throw std::runtime_error("campaign: threshold separates less than 95% of variance");

  RecoveredMap recovered = solve(clusters_out, width);

  // Probe-level consistency: conflict classification must match bank
  // equality under the recovered map.
  size_t ok = 0;
  for (const auto& s : samples) {
    const bool conflict = s.mean_latency > final_split.threshold;
    const bool same_bank =
        recovered.map.paddr_to_bank(s.addr_a) == recovered.map.paddr_to_bank(s.addr_b);
    if (conflict == same_bank) ++ok;
  }
  recovered.confidence = samples.empty() ? 0.0 : static_cast<double>(ok) / samples.size();

  CampaignResult result;
  result.recovered = std::move(recovered);
  result.clusters = std::move(clusters_out);
  result.probes_issued = samples.size();
  result.samples = std::move(samples);
  return result;
}

namespace {

struct Platform {
  const char* name;
  const char* map;
  uint32_t addr_width;
  uint32_t trc;
};

// Table 1 maps; tRC in ns equals cycles at the 1 GHz command clock.
const Platform kPlatforms[] = {
    {"pi4", "b0:12 b1:13 b2:14", 32, 60},
    {"pi5", "b0:12 b1:13 b2:14 b3:31", 32, 60},
    {"intel",
     "b0:7+14 b1:15+20 b2:16+21 b3:17+22 b4:18+23 b5:19+24 b6:8+9+12+13+18+19",
     32, 47},
    {"agx",
     "b0:11+14+16+20+21+22+33 b1:9+11+12+16+19+23+27+28 b2:12+13+18+22+25+29+30+31 "
     "b3:10+11+12+17+19+20+23+32 b4:10+11+13+14+18+27+28+34 b5:11+12+13+16+19+24+33+35 "
     "b6:10+13+7+21+24+25+26+29+34 b7:14+15+17+21+25+28+31+34+35",
     36, 60},
};

}  // namespace

std::optional<DramConfig> platform_preset(const std::string& name) {
  for (const auto& p : kPlatforms) {
    if (name != p.name) continue;
    DramConfig cfg;
    cfg.tRC = p.trc;
    cfg.map = parse_bank_map(p.map, p.addr_width);
    cfg.layout = RowColumnLayout::for_width(p.addr_width);
    cfg.validate();
    return cfg;
  }
  return std::nullopt;
}

const std::vector<std::string>& platform_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> out;
    for (const auto& p : kPlatforms) out.emplace_back(p.name);
    return out;
  }();
  return names;
}

}  // namespace banksim::revmap
