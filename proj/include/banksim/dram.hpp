#pragma once

#include <cstdint>
#include <deque>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "banksim/bankmap.hpp"
#include "banksim/types.hpp"

namespace banksim {

// All timings in controller cycles.  The clock is fixed at 1 GHz, so one
// cycle is one nanosecond and 64 bytes per tRC works out to 64/tRC GB/s.
struct DramConfig {
  uint32_t tRC = 47;
  uint32_t tRCD = 14;
  uint32_t tRP = 14;
  uint32_t tCL = 14;
  uint32_t tWTR = 8;
  uint32_t tBURST = 4;
  uint32_t read_q_depth = 32;
  uint32_t write_q_depth = 32;
  uint32_t write_high_watermark = 24;
  uint32_t write_low_watermark = 8;
  BankMap map;
  RowColumnLayout layout;

  uint32_t n_banks() const { return map.n_banks(); }
  void validate() const;
};

// Guaranteed bandwidth (Eq. BW_g = 64 / tRC): the worst-case service rate
// when every access row-conflicts in a single bank.  MB = 10^6 bytes.
double guaranteed_bw_mbps(const DramConfig& cfg);

struct MemRequest {
  uint64_t id = 0;
  uint32_t core = 0;
  uint32_t domain = 0;
  bool is_write = false;
  uint64_t paddr = 0;
  // Filled in by the model at enqueue / completion.
  uint32_t bank = 0;
  uint64_t row = 0;
  cycle_t enqueue_cycle = 0;
  cycle_t complete_cycle = 0;
};

enum class DramCommandKind : uint8_t { kActivate, kReadCas, kWriteCas, kPrecharge };

std::string command_name(DramCommandKind k);

struct TraceEvent {
  cycle_t cycle = 0;
  DramCommandKind kind = DramCommandKind::kActivate;
  uint32_t bank = 0;
  uint64_t row = 0;
  uint64_t request_id = 0;
  bool write_mode = false;  // bus mode when the command issued
};

struct DramStats {
  uint64_t reads_enqueued = 0;
  uint64_t writes_enqueued = 0;
  uint64_t reads_served = 0;
  uint64_t writes_served = 0;
  uint64_t activates = 0;
  uint64_t precharges = 0;
  uint64_t row_hits = 0;    // CAS reusing an already-open row
  uint64_t row_misses = 0;  // first CAS after each ACTIVATE
  uint64_t bus_mode_switches = 0;  // consecutive CAS of different type
  uint64_t drain_entries = 0;
  uint64_t busy_cycles = 0;  // cycles that issued a command
  std::vector<uint64_t> per_bank_activations;
};

// Single-channel open-page controller with FR-FCFS scheduling and
// watermark-batched writes.  At most one command issues per cycle.  Writes
// are posted: a write completes when its data burst is accepted (CAS +
// tBURST); reads complete at data-burst end (CAS + tCL + tBURST).
class DramModel {
 public:
  explicit DramModel(const DramConfig& cfg);

  // False means backpressure (target queue full); retry later.
  bool enqueue(const MemRequest& req, cycle_t now);
  bool can_accept(bool is_write) const;

  // Advances to cycle `now` (monotone; throws on clock regression),
  // appending completions to `out` and issuing at most one command.
  void tick(cycle_t now, std::vector<MemRequest>& out);

  // Earliest cycle > now at which tick() could act, or kNever when idle.
  // Cycles strictly between can be skipped without changing behavior.
  cycle_t next_event_after(cycle_t now) const;

  const DramStats& stats() const { return stats_; }
  const DramConfig& config() const { return cfg_; }
  size_t read_queue_size() const { return read_q_.size(); }
  size_t write_queue_size() const { return write_q_.size(); }
  size_t in_flight() const { return inflight_.size(); }
  bool draining() const { return draining_; }

  void set_trace(std::vector<TraceEvent>* sink) { trace_ = sink; }
  void reset();

 private:
  struct Pending {
    MemRequest req;
  };
  struct BankState {
    std::optional<uint64_t> open_row;
    cycle_t ready_at = 0;        // busy until (tRCD / tRP / write recovery)
    cycle_t act_allowed_at = 0;  // last ACTIVATE + tRC
    bool fresh_act = false;      // next CAS pays for the ACTIVATE
  };
  struct InFlight {
    MemRequest req;
    uint64_t seq = 0;  // delivery-order tiebreak at equal cycles
  };

  bool serving_writes() const;
  bool row_needed_by_queue(const std::deque<Pending>& q, uint32_t bank, uint64_t row) const;
  void update_drain();
  void issue_command(cycle_t now);
  void record(cycle_t now, DramCommandKind kind, uint32_t bank, uint64_t row, uint64_t id);

  DramConfig cfg_;
  std::vector<BankState> banks_;
  std::deque<Pending> read_q_;
  std::deque<Pending> write_q_;
  std::vector<InFlight> inflight_;  // sorted by (complete_cycle, seq)
  cycle_t cas_read_allowed_at_ = 0;
  cycle_t cas_write_allowed_at_ = 0;
  std::optional<bool> last_cas_write_;
  bool draining_ = false;
  uint32_t drain_floor_ = 0;  // stop level of the active drain (lo or 0)
  cycle_t last_now_ = 0;
  bool ticked_ = false;
  uint64_t seq_ = 0;
  DramStats stats_;
  std::vector<TraceEvent>* trace_ = nullptr;
};

}  // namespace banksim
