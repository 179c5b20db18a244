#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

#include "banksim/bankmap.hpp"
#include "banksim/rng.hpp"
#include "banksim/types.hpp"

namespace banksim {

struct WorkloadRequest {
  uint64_t paddr = 0;
  bool is_write = false;
  uint64_t token = 0;
  bool allocate = true;
};

// A core-bound request generator driven by the simulation loop: peek() the
// next issuable request, accepted() when the LLC took it, parked() when it
// was blocked.  At most one accepted request per cycle per core; outstanding
// requests never exceed the core's MLP limit.
class Workload {
 public:
  Workload(uint32_t core, uint32_t mlp_limit) : core_(core), mlp_limit_(mlp_limit) {}
  virtual ~Workload() = default;

  uint32_t core() const { return core_; }
  uint32_t mlp_limit() const { return mlp_limit_; }
  uint32_t outstanding() const { return outstanding_; }
  uint64_t completed() const { return completed_; }

  virtual std::optional<WorkloadRequest> peek(cycle_t now) = 0;
  virtual void accepted(cycle_t now) = 0;
  virtual void parked(const WorkloadRequest& r, cycle_t wake) = 0;
  virtual void on_complete(uint64_t token, cycle_t now) = 0;

  // Work quota for runtime measurement; quota-less workloads never finish.
  virtual bool quota_done() const = 0;
  cycle_t quota_done_at() const { return quota_done_at_; }

  // Earliest cycle > now this workload could issue, or kNever when it is
  // waiting purely on completions.
  virtual cycle_t wake_hint(cycle_t now) const = 0;

 protected:
  uint32_t core_;
  uint32_t mlp_limit_;
  uint32_t outstanding_ = 0;
  uint64_t completed_ = 0;
  cycle_t quota_done_at_ = kNever;
};

// Parallel linked lists: L chains, each a seeded random permutation of its
// node addresses; one outstanding request per chain (pointer-chase), round-
// robin across ready chains up to the MLP limit.  Tokens identify chains.
class PllWorkload : public Workload {
 public:
  struct Params {
    uint32_t n_lists = 16;
    uint32_t entries_per_list = 4096;
    std::vector<uint32_t> target_banks;  // singleton for SB, all banks for AB
    bool is_write = false;
    bool allocate = false;  // streaming: attack arrays dwarf the LLC
    uint64_t seed = 1;
    uint64_t quota = 0;  // completions to finish; 0 = run forever
  };

  PllWorkload(uint32_t core, uint32_t mlp_limit, const Params& p, const BankMap& map,
              const RowColumnLayout& layout);

  std::optional<WorkloadRequest> peek(cycle_t now) override;
  void accepted(cycle_t now) override;
  void parked(const WorkloadRequest& r, cycle_t wake) override;
  void on_complete(uint64_t token, cycle_t now) override;
  bool quota_done() const override;
  cycle_t wake_hint(cycle_t now) const override;

  const std::vector<std::vector<uint64_t>>& chains() const { return chains_; }

 private:
  struct Chain {
    uint32_t pos = 0;
    bool in_flight = false;
    cycle_t parked_until = 0;
  };
  std::optional<uint32_t> pick_chain(cycle_t now) const;

  Params p_;
  std::vector<std::vector<uint64_t>> chains_;
  std::vector<Chain> state_;
  uint32_t rr_ = 0;
  std::optional<uint32_t> pending_chain_;
};

// Builds the chains per the bank constraints: SB (one target bank) draws
// globally distinct rows so consecutive chase steps always row-conflict;
// AB draws an even share of every bank's coset.
std::vector<std::vector<uint64_t>> build_pll(const PllWorkload::Params& p, const BankMap& map,
                                             const RowColumnLayout& layout);

// Sequential reads over a large array, stride one line; models the victim.
class SequentialWorkload : public Workload {
 public:
  struct Params {
    uint64_t base_addr = 0;
    uint64_t array_bytes = 2ull << 20;  // 2x the default LLC
    uint64_t quota_lines = 0;           // completions to finish; 0 = forever
    // A virtually sequential sweep lands on scattered physical frames; the
    // sweep stays sequential inside each page.  False keeps the array
    // physically contiguous at base_addr.
    uint64_t page_bytes = 4096;
    bool scatter_pages = false;
    uint32_t addr_width = 32;  // frame pool spans [0, 2^addr_width)
    uint64_t seed = 1;
  };

  SequentialWorkload(uint32_t core, uint32_t mlp_limit, const Params& p);

  std::optional<WorkloadRequest> peek(cycle_t now) override;
  void accepted(cycle_t now) override;
  void parked(const WorkloadRequest& r, cycle_t wake) override;
  void on_complete(uint64_t token, cycle_t now) override;
  bool quota_done() const override;
  cycle_t wake_hint(cycle_t now) const override;

 private:
  uint64_t line_addr(uint64_t line) const;

  Params p_;
  std::vector<uint64_t> frames_;  // physical page bases when scattering
  uint64_t issued_lines_ = 0;
  cycle_t parked_until_ = 0;
};

// bytes completed x 64 / elapsed, reported in MB/s (10^6 B/s at 1 GHz).
double measure_bandwidth_mbps(uint64_t lines_completed, cycle_t window_cycles);

}  // namespace banksim
