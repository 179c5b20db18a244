#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "banksim/dram.hpp"
#include "banksim/llc.hpp"
#include "banksim/regulator.hpp"
#include "banksim/types.hpp"
#include "banksim/workload.hpp"

namespace banksim {

// Single-threaded composition of workloads -> LLC -> regulator -> DRAM.
// The loop is event-skipping: between steps it advances straight to the
// minimum of every component's next-event hint.  Stepping a quiet cycle is
// a no-op, so force_per_cycle (tick every cycle) must produce bit-identical
// results; a property test pins that equivalence.
class Simulation {
 public:
  struct Config {
    DramConfig dram;
    LlcConfig llc;
    RegulatorConfig reg;
    cycle_t duration = 10'000'000;
    bool stop_when_quotas_done = false;
    bool force_per_cycle = false;
  };

  Simulation(const Config& cfg, std::vector<std::unique_ptr<Workload>> workloads);

  // Advances simulated time to `target` cycles (capped at cfg.duration).
  void run_until(cycle_t target);
  void run() { run_until(cfg_.duration); }

  cycle_t now() const { return now_; }
  bool all_quotas_done() const;

  DramModel& dram() { return dram_; }
  LlcModel& llc() { return llc_; }
  Regulator& regulator() { return reg_; }
  Workload& workload(size_t i) { return *workloads_[i]; }
  const Workload& workload(size_t i) const { return *workloads_[i]; }
  size_t n_workloads() const { return workloads_.size(); }
  const Config& config() const { return cfg_; }

 private:
  void step(cycle_t now);
  cycle_t next_event(cycle_t now) const;

  Config cfg_;
  DramModel dram_;
  LlcModel llc_;
  Regulator reg_;
  std::vector<std::unique_ptr<Workload>> workloads_;
  std::vector<LlcCompletion> llc_out_;
  std::vector<MemRequest> dram_out_;
  cycle_t now_ = 0;
};

}  // namespace banksim
