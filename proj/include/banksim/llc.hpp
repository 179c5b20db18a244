#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <unordered_map>
#include <vector>

#include "banksim/bankmap.hpp"
#include "banksim/dram.hpp"
#include "banksim/regulator.hpp"
#include "banksim/types.hpp"

namespace banksim {

struct TaggingConfig {
  std::vector<uint32_t> core_to_domain = {0};
  uint32_t n_domains = 1;

  uint32_t domain_of(uint32_t core) const { return core_to_domain.at(core); }
  void validate() const;
};

struct SetRange {
  uint32_t start = 0;
  uint32_t count = 0;
};

struct LlcConfig {
  uint32_t size_bytes = 1u << 20;
  uint32_t associativity = 16;
  uint32_t n_cache_banks = 2;
  uint32_t mshrs_per_bank = 27;
  uint32_t hit_latency = 20;
  uint64_t replacement_seed = 1;  // random replacement (seeded)
  TaggingConfig tagging;
  // Per-domain set ranges within each cache bank; empty means unpartitioned.
  std::vector<SetRange> set_partition;

  uint32_t n_sets() const { return size_bytes / (kLineBytes * associativity); }
  uint32_t sets_per_bank() const { return n_sets() / n_cache_banks; }
  void validate() const;
  // Evenly split each cache bank's sets across n_domains.
  static std::vector<SetRange> even_partition(uint32_t sets_per_bank, uint32_t n_domains);
};

enum class AccessOutcome : uint8_t {
  kHit,
  kMissAllocated,
  kBlockedThrottle,  // (domain, dram-bank) throttle asserted; retry next period
  kBlockedMshr,      // no MSHR free / line already in flight; retry on next fill
};

struct LlcCompletion {
  uint32_t core = 0;
  uint64_t token = 0;
  cycle_t at = 0;
};

struct LlcDomainStats {
  uint64_t hits = 0;
  uint64_t misses = 0;
  uint64_t writebacks = 0;
  uint64_t blocked_throttle = 0;
  uint64_t blocked_mshr = 0;
  uint64_t dram_reads = 0;
};

// Shared LLC front end: domain tagging, set-partitioned hit/miss state,
// per-cache-bank MSHRs with a throttle-gated round-robin arbiter, and a
// writeback buffer drained one write per cycle.
class LlcModel {
 public:
  LlcModel(const LlcConfig& cfg, const BankMap& map, const RowColumnLayout& layout);

  // One LLC-level access.  allocate=false models streaming traffic: misses
  // still fetch from DRAM (write-allocate refill reads for stores, plus the
  // store's writeback on fill) but never install a line.
  AccessOutcome access(uint32_t core, uint64_t paddr, bool is_write, uint64_t token, cycle_t now,
                       const Regulator& reg, bool allocate = true);

  // Delivers due core completions, then arbitrates MSHRs (one issue per
  // cache bank per cycle) and drains at most one writeback.
  void tick(cycle_t now, DramModel& dram, Regulator& reg, std::vector<LlcCompletion>& out);

  // Routes a finished DRAM request back to its MSHR / writeback record.
  void on_dram_complete(const MemRequest& r, cycle_t now);

  // Round-robin pick for one cache bank: next eligible MSHR slot, or none.
  // Advances the bank's pointer past the selected slot.  Eligible = state
  // allocated, lookup done, throttle clear, DRAM read queue has space.
  std::optional<uint32_t> arbiter_select(uint32_t cache_bank, const ThrottleMatrix& throttle,
                                         cycle_t now, const DramModel& dram);

  // Earliest cycle > now at which tick() could make progress, ignoring
  // events owned by the DRAM/regulator (the caller merges those).
  cycle_t next_event_after(cycle_t now, const DramModel& dram, const Regulator& reg) const;

  const LlcDomainStats& domain_stats(uint32_t d) const { return stats_.at(d); }
  size_t mshrs_in_use(uint32_t cache_bank) const;
  size_t writeback_queue_size() const { return writebacks_.size(); }
  const LlcConfig& config() const { return cfg_; }
  void reset();

 private:
  struct Line {
    bool valid = false;
    bool dirty = false;
    uint64_t tag = 0;
    uint32_t domain = 0;  // owner, for writeback attribution
  };
  struct Mshr {
    enum State : uint8_t { kFree, kAllocated, kIssued, kFilling } state = kFree;
    uint64_t line_addr = 0;
    uint32_t core = 0;
    uint32_t domain = 0;
    uint32_t dram_bank = 0;
    uint64_t token = 0;
    cycle_t ready_at = 0;  // tag-lookup pipeline done
    bool is_write = false;
    bool allocate = true;
  };
  struct Writeback {
    uint64_t line_addr = 0;
    uint32_t domain = 0;
    uint32_t dram_bank = 0;
  };

  struct PendingCompletion {
    LlcCompletion c;
    uint64_t seq = 0;
  };

  uint32_t cache_bank_of(uint64_t paddr) const;
  uint32_t set_of(uint64_t paddr, uint32_t domain) const;
  Line* lookup(uint32_t cache_bank, uint32_t set, uint64_t tag);
  void install(uint32_t cache_bank, uint32_t set, uint64_t tag, uint32_t domain, bool dirty);
  void push_completion(uint32_t core, uint64_t token, cycle_t at);

  LlcConfig cfg_;
  BankMap map_;
  RowColumnLayout layout_;
  uint32_t bank_shift_ = 1;  // log2(n_cache_banks)
  std::vector<Line> lines_;  // [cache_bank][set][way] flattened
  std::vector<uint32_t> fill_seq_;  // per (cache_bank, set): replacement stream
  std::vector<std::vector<Mshr>> mshrs_;  // per cache bank
  std::vector<uint32_t> rr_;              // per cache bank round-robin pointer
  std::deque<Writeback> writebacks_;
  std::vector<PendingCompletion> pending_;  // sorted by (at, seq)
  uint64_t seq_ = 0;
  uint64_t next_dram_id_ = 1;
  std::unordered_map<uint64_t, std::pair<uint32_t, uint32_t>> dram_to_mshr_;
  std::vector<LlcDomainStats> stats_;
};

}  // namespace banksim
