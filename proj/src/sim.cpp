#include "banksim/sim.hpp"

#include <algorithm>
#include <stdexcept>

namespace banksim {

Simulation::Simulation(const Config& cfg, std::vector<std::unique_ptr<Workload>> workloads)
    : cfg_(cfg),
      dram_(cfg.dram),
      llc_(cfg.llc, cfg.dram.map, cfg.dram.layout),
      reg_(cfg.reg),
      workloads_(std::move(workloads)) {
  if (cfg_.reg.n_banks != cfg_.dram.n_banks())
    throw std::invalid_argument("sim: regulator bank count must match the DRAM");
  for (const auto& w : workloads_)
    if (w->core() >= cfg_.llc.tagging.core_to_domain.size())
      throw std::invalid_argument("sim: workload bound to unknown core");
  for (size_t i = 0; i < workloads_.size(); ++i)
    for (size_t j = i + 1; j < workloads_.size(); ++j)
      if (workloads_[i]->core() == workloads_[j]->core())
        throw std::invalid_argument("sim: one workload per core");
}

bool Simulation::all_quotas_done() const {
  for (const auto& w : workloads_)
    if (!w->quota_done()) return false;
  return true;
}

void Simulation::step(cycle_t now) {
  reg_.on_tick(now);

  llc_out_.clear();
  llc_.tick(now, dram_, reg_, llc_out_);
  for (const LlcCompletion& c : llc_out_) {
    for (auto& w : workloads_) {
      if (w->core() == c.core) {
        w->on_complete(c.token, now);
        break;
      }
    }
  }

  for (auto& w : workloads_) {
    auto r = w->peek(now);
    if (!r) continue;
    switch (llc_.access(w->core(), r->paddr, r->is_write, r->token, now, reg_, r->allocate)) {
      case AccessOutcome::kHit:
      case AccessOutcome::kMissAllocated:
        w->accepted(now);
        break;
      case AccessOutcome::kBlockedThrottle:
        w->parked(*r, reg_.next_period_boundary(now));
        break;
      case AccessOutcome::kBlockedMshr:
        w->parked(*r, now + 1);
        break;
    }
  }

  dram_out_.clear();
  dram_.tick(now, dram_out_);
  for (const MemRequest& r : dram_out_) llc_.on_dram_complete(r, now);
}

cycle_t Simulation::next_event(cycle_t now) const {
  cycle_t best = dram_.next_event_after(now);
  best = std::min(best, llc_.next_event_after(now, dram_, reg_));
  for (const auto& w : workloads_) best = std::min(best, w->wake_hint(now));
  return best;
}

void Simulation::run_until(cycle_t target) {
  target = std::min(target, cfg_.duration);
  while (now_ < target) {
    step(now_);
    if (cfg_.stop_when_quotas_done && all_quotas_done()) {
      ++now_;
      return;
    }
    cycle_t next = cfg_.force_per_cycle ? now_ + 1 : next_event(now_);
    now_ = std::min(next, target);
  }
}

}  // namespace banksim
