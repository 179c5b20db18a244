#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "banksim/bankmap.hpp"
#include "banksim/dram.hpp"
#include "banksim/rng.hpp"
#include "banksim/types.hpp"

namespace banksim::revmap {

// One timing measurement: mean inter-completion latency of serial alternating
// reads to a and b, averaged over 2*repeats accesses against a fresh oracle.
struct ProbeSample {
  uint64_t addr_a = 0;
  uint64_t addr_b = 0;
  double mean_latency = 0.0;  // cycles per access in steady alternation
  int repeats = 1;
};

// Wraps a DramModel as a timing oracle. Each probe starts from reset state;
// reads are dependent (the next issues only after the previous completes),
// mimicking uncached pointer-chase accesses.
class DramOracle {
 public:
  explicit DramOracle(const DramConfig& cfg);

  ProbeSample probe(uint64_t addr_a, uint64_t addr_b, int repeats);
  const DramConfig& config() const { return cfg_; }

 private:
  cycle_t issue_and_wait(uint64_t paddr, uint64_t id, cycle_t issue_at);

  DramConfig cfg_;
  DramModel model_;
};

// Two-class split of probe latencies. threshold maximizes between-class
// variance (Otsu); separation is the between/total variance ratio at that
// threshold, 1.0 for perfectly bimodal data.
struct LatencySplit {
  double threshold = 0.0;
  double separation = 0.0;
  bool conclusive = false;  // both classes populated and separation >= min
};

inline constexpr double kMinSeparation = 0.95;

LatencySplit otsu_split(const std::vector<double>& latencies);

// Disjoint same-bank groups produced by union-find over conflict edges.
struct ConflictSets {
  std::vector<std::vector<uint64_t>> sets;  // each sorted; sets ordered by min member
  double threshold = 0.0;
  double separation = 0.0;
  bool inconclusive = false;  // threshold fails to separate >= 95% of variance
};

// Groups sample endpoints: an edge with mean_latency > threshold marks the
// pair same-bank. Addresses with no conflict edge form singleton sets.
ConflictSets cluster(const std::vector<ProbeSample>& samples, double threshold);

struct RecoveredMap {
  BankMap map;             // basis of the recovered functions, ascending masks
  double confidence = 0.0;  // fraction of probes consistent with the map
  size_t kernel_rank = 0;   // rank of the observed XOR-difference span
  bool rank_deficient = false;  // function count != log2(cluster count)
};

// Same-cluster XOR differences span the map kernel; the recovered functions
// are a basis of its orthogonal complement. Bits below known_zero_bits are
// unobservable at line granularity and are folded into the kernel.
RecoveredMap solve(const ConflictSets& clusters, unsigned addr_width,
                   unsigned known_zero_bits = kLineShift);

struct CampaignConfig {
  int samples_per_bank = 32;   // addresses drawn per bank of the hidden map
  int repeats = 4;             // alternation rounds per probe
  int bootstrap_addresses = 64;  // all-pairs phase sizing the threshold
  uint64_t seed = 1;
};

struct CampaignResult {
  RecoveredMap recovered;
  ConflictSets clusters;
  std::vector<ProbeSample> samples;
  size_t probes_issued = 0;
};

// Full pipeline against a hidden map: sample line-aligned addresses with
// globally distinct row fields, bootstrap a threshold from an all-pairs
// phase, then classify each address against cluster representatives with
// early stop, and solve. Throws if latencies never become bimodal or the
// final threshold is inconclusive.
CampaignResult recover_map(const DramConfig& oracle_cfg, const CampaignConfig& cc);

// Evaluated-platform presets: Table 1 maps with per-platform tRC. Names:
// pi4, pi5, intel, agx. Unknown name -> nullopt.
std::optional<DramConfig> platform_preset(const std::string& name);
const std::vector<std::string>& platform_names();

}  // namespace banksim::revmap
