#pragma once

#include <cstdint>
#include <vector>

#include "banksim/types.hpp"

namespace banksim {

enum class RegulationMode : uint8_t { kPerBank, kAllBank };

struct RegulatorConfig {
  RegulationMode mode = RegulationMode::kPerBank;
  cycle_t period_cycles = 1'000'000;  // 1 ms at 1 GHz
  std::vector<uint64_t> budgets;      // per domain, accesses per period
  std::vector<uint8_t> regulated;     // per domain; unregulated never throttles
  uint32_t n_domains = 1;
  uint32_t n_banks = 8;
  // Attribute writeback traffic to the issuing domain's budget.  Stronger
  // than regulating refill reads alone; turn off for strict read-only
  // accounting.
  bool count_writebacks = true;

  void validate() const;
};

// Budget inversion (Eq. N_acc = bw * P / (G * f)); bw in MB/s (10^6 B/s).
struct BudgetResult {
  uint64_t n_acc = 1;
  bool clamped = false;  // true when the rounded budget fell below 1
};
BudgetResult budget_from_bandwidth(double mbps, cycle_t period_cycles, double freq_hz = 1e9,
                                   uint32_t granule_bytes = kLineBytes);

// Eq. BW_max = B_per_bank * N_bank.
double max_bandwidth_mbps(double per_bank_mbps, uint32_t n_banks);

class ThrottleMatrix {
 public:
  ThrottleMatrix() = default;
  ThrottleMatrix(uint32_t n_domains, uint32_t n_banks)
      : d_(n_domains), b_(n_banks), bits_(size_t(n_domains) * n_banks, 0) {}

  bool get(uint32_t d, uint32_t b) const { return bits_[size_t(d) * b_ + b] != 0; }
  void set(uint32_t d, uint32_t b, bool v) { bits_[size_t(d) * b_ + b] = v ? 1 : 0; }
  void set_row(uint32_t d, bool v) {
    for (uint32_t b = 0; b < b_; ++b) set(d, b, v);
  }
  void clear() { bits_.assign(bits_.size(), 0); }
  bool any() const {
    for (uint8_t x : bits_)
      if (x) return true;
    return false;
  }
  uint32_t n_domains() const { return d_; }
  uint32_t n_banks() const { return b_; }

 private:
  uint32_t d_ = 0;
  uint32_t b_ = 0;
  std::vector<uint8_t> bits_;
};

struct RegulatorStats {
  uint64_t periods_elapsed = 0;
  std::vector<uint64_t> issued;            // per domain, total over the run
  std::vector<uint64_t> throttle_events;   // per domain, assertion count
  std::vector<uint64_t> throttled_cycles;  // per domain, sum of assert->boundary spans
};

// Fixed-period budget regulator.  Counters reset at absolute multiples of
// the period; the boundary cycle belongs to the new period.  A counter
// reaching its budget asserts the throttle immediately (exact enforcement),
// so issuing against an asserted bit is a caller bug.
class Regulator {
 public:
  explicit Regulator(const RegulatorConfig& cfg);

  // Advance to `now`, replenishing budgets at each crossed boundary.
  void on_tick(cycle_t now);

  // Account one memory access.  Must be called after on_tick(now).
  void on_issue(uint32_t domain, uint32_t bank, cycle_t now);

  bool throttled(uint32_t domain, uint32_t bank) const { return matrix_.get(domain, bank); }
  const ThrottleMatrix& matrix() const { return matrix_; }

  // First period boundary strictly after `now`.
  cycle_t next_period_boundary(cycle_t now) const {
    return (now / cfg_.period_cycles + 1) * cfg_.period_cycles;
  }
  cycle_t period_start() const { return period_start_; }

  const RegulatorStats& stats() const { return stats_; }
  const RegulatorConfig& config() const { return cfg_; }
  void reset();

 private:
  uint64_t& counter(uint32_t domain, uint32_t bank);
  void begin_period();

  RegulatorConfig cfg_;
  ThrottleMatrix matrix_;
  std::vector<uint64_t> counters_;  // [d*n_banks+b] per-bank, [d] all-bank
  cycle_t period_start_ = 0;
  RegulatorStats stats_;
};

}  // namespace banksim
