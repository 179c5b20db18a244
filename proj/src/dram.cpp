#include "banksim/dram.hpp"

#include <algorithm>
#include <stdexcept>

namespace banksim {

void DramConfig::validate() const {
  if (tBURST == 0 || tRCD == 0 || tRP == 0 || tCL == 0 || tRC == 0)
    throw std::invalid_argument("dram: timings must be positive");
  if (tRC < tRCD + tRP)
    throw std::invalid_argument("dram: tRC must cover tRCD + tRP");
  if (read_q_depth == 0 || write_q_depth == 0)
    throw std::invalid_argument("dram: queue depths must be positive");
  if (!(write_low_watermark < write_high_watermark && write_high_watermark <= write_q_depth))
    throw std::invalid_argument("dram: need 0 <= low < high <= write_q_depth");
  if (layout.addr_width != map.addr_width)
    throw std::invalid_argument("dram: layout/map addr_width mismatch");
  layout.validate();
}

double guaranteed_bw_mbps(const DramConfig& cfg) {
  return kLineBytes * 1000.0 / cfg.tRC;  // bytes per ns -> MB/s at 1 GHz
}

std::string command_name(DramCommandKind k) {
  switch (k) {
    case DramCommandKind::kActivate: return "ACT";
    case DramCommandKind::kReadCas: return "RD";
    case DramCommandKind::kWriteCas: return "WR";
    case DramCommandKind::kPrecharge: return "PRE";
  }
  return "?";
}

DramModel::DramModel(const DramConfig& cfg) : cfg_(cfg) {
  cfg_.validate();
  banks_.resize(cfg_.n_banks());
  stats_.per_bank_activations.assign(banks_.size(), 0);
}

void DramModel::reset() {
  banks_.assign(banks_.size(), BankState{});
  read_q_.clear();
  write_q_.clear();
  inflight_.clear();
  cas_read_allowed_at_ = 0;
  cas_write_allowed_at_ = 0;
  last_cas_write_.reset();
  draining_ = false;
  drain_floor_ = 0;
  last_now_ = 0;
  ticked_ = false;
  seq_ = 0;
  stats_ = DramStats{};
  stats_.per_bank_activations.assign(banks_.size(), 0);
}

bool DramModel::can_accept(bool is_write) const {
  return is_write ? write_q_.size() < cfg_.write_q_depth : read_q_.size() < cfg_.read_q_depth;
}

bool DramModel::enqueue(const MemRequest& req, cycle_t now) {
  if (cfg_.layout.addr_width < 64 && req.paddr >> cfg_.layout.addr_width)
    throw std::invalid_argument("dram: paddr outside address width");
  if (!can_accept(req.is_write)) return false;
  Pending p;
  p.req = req;
  p.req.bank = cfg_.map.paddr_to_bank(req.paddr);
  p.req.row = cfg_.layout.row_of(req.paddr);
  p.req.enqueue_cycle = now;
  if (req.is_write) {
    write_q_.push_back(p);
    ++stats_.writes_enqueued;
  } else {
    read_q_.push_back(p);
    ++stats_.reads_enqueued;
  }
  return true;
}

bool DramModel::serving_writes() const { return draining_; }

bool DramModel::row_needed_by_queue(const std::deque<Pending>& q, uint32_t bank,
                                    uint64_t row) const {
  for (const Pending& p : q)
    if (p.req.bank == bank && p.req.row == row) return true;
  return false;
}

void DramModel::record(cycle_t now, DramCommandKind kind, uint32_t bank, uint64_t row,
                       uint64_t id) {
  if (trace_) trace_->push_back({now, kind, bank, row, id, serving_writes()});
}

void DramModel::update_drain() {
  if (!draining_) {
    if (write_q_.size() >= cfg_.write_high_watermark) {
      draining_ = true;
      drain_floor_ = cfg_.write_low_watermark;
      ++stats_.drain_entries;
    } else if (read_q_.empty() && !write_q_.empty()) {
      // Idle read queue: flush the backlog in one bus turnaround instead of
      // trickling writes out between future reads.
      draining_ = true;
      drain_floor_ = 0;
    }
  }
  // A drain is sticky: reads arriving mid-drain wait until the floor.  A
  // watermark drain that reaches its floor with no reads waiting re-enters
  // the idle branch and keeps going, so leftovers never strand.
  if (draining_ && write_q_.size() <= drain_floor_) draining_ = false;
}

void DramModel::tick(cycle_t now, std::vector<MemRequest>& out) {
  if (ticked_ && now < last_now_) throw std::logic_error("dram: clock moved backwards");
  last_now_ = now;
  ticked_ = true;

  while (!inflight_.empty() && inflight_.front().req.complete_cycle <= now) {
    MemRequest& r = inflight_.front().req;
    if (r.is_write)
      ++stats_.writes_served;
    else
      ++stats_.reads_served;
    out.push_back(r);
    inflight_.erase(inflight_.begin());
  }

  update_drain();
  issue_command(now);
  // Settle the flag after queue mutation so next_event_after() sees the
  // mode the next tick will actually serve.
  update_drain();
}

void DramModel::issue_command(cycle_t now) {
  bool writes = serving_writes();
  std::deque<Pending>& q = writes ? write_q_ : read_q_;
  if (q.empty()) return;

  cycle_t cas_ok = writes ? cas_write_allowed_at_ : cas_read_allowed_at_;

  // FR-FCFS: the oldest CAS-ready row hit outranks everything else.
  for (size_t i = 0; i < q.size(); ++i) {
    Pending& p = q[i];
    BankState& bk = banks_[p.req.bank];
    if (bk.open_row == p.req.row && now >= bk.ready_at && now >= cas_ok) {
      if (bk.fresh_act) {
        bk.fresh_act = false;  // first CAS pays for the ACTIVATE
        ++stats_.row_misses;
      } else {
        ++stats_.row_hits;
      }
      if (last_cas_write_ && *last_cas_write_ != p.req.is_write) ++stats_.bus_mode_switches;
      last_cas_write_ = p.req.is_write;

      MemRequest done = p.req;
      if (done.is_write) {
        done.complete_cycle = now + cfg_.tBURST;             // posted write
        bk.ready_at = now + cfg_.tCL + cfg_.tBURST;          // write recovery
        cas_write_allowed_at_ = now + cfg_.tBURST;
        cas_read_allowed_at_ = now + cfg_.tBURST + cfg_.tWTR;  // bus turnaround
        record(now, DramCommandKind::kWriteCas, done.bank, done.row, done.id);
      } else {
        done.complete_cycle = now + cfg_.tCL + cfg_.tBURST;
        bk.ready_at = std::max(bk.ready_at, now + cfg_.tBURST);
        cas_read_allowed_at_ = now + cfg_.tBURST;
        cas_write_allowed_at_ = now + cfg_.tBURST;
        record(now, DramCommandKind::kReadCas, done.bank, done.row, done.id);
      }
      ++stats_.busy_cycles;

      InFlight f{done, seq_++};
      auto pos = std::upper_bound(
          inflight_.begin(), inflight_.end(), f, [](const InFlight& a, const InFlight& b) {
            return a.req.complete_cycle != b.req.complete_cycle
                       ? a.req.complete_cycle < b.req.complete_cycle
                       : a.seq < b.seq;
          });
      inflight_.insert(pos, f);
      q.erase(q.begin() + i);
      return;
    }
  }

  // No hit ready: walk in age order and advance the first bank that can
  // make progress (precharge a stale row or activate a needed one).
  for (const Pending& p : q) {
    BankState& bk = banks_[p.req.bank];
    if (bk.open_row) {
      if (*bk.open_row == p.req.row) continue;  // waiting on bus/bank timing
      // Keep a row alive while any request in the served queue still hits it.
      if (row_needed_by_queue(q, p.req.bank, *bk.open_row)) continue;
      if (now >= bk.ready_at) {
        uint64_t closed = *bk.open_row;
        bk.open_row.reset();
        bk.ready_at = now + cfg_.tRP;
        ++stats_.precharges;
        ++stats_.busy_cycles;
        record(now, DramCommandKind::kPrecharge, p.req.bank, closed, p.req.id);
        return;
      }
    } else if (now >= bk.ready_at && now >= bk.act_allowed_at) {
      bk.open_row = p.req.row;
      bk.ready_at = now + cfg_.tRCD;
      bk.act_allowed_at = now + cfg_.tRC;
      bk.fresh_act = true;
      ++stats_.activates;
      ++stats_.per_bank_activations[p.req.bank];
      ++stats_.busy_cycles;
      record(now, DramCommandKind::kActivate, p.req.bank, p.req.row, p.req.id);
      return;
    }
  }
}

cycle_t DramModel::next_event_after(cycle_t now) const {
  cycle_t best = kNever;
  if (!inflight_.empty()) best = inflight_.front().req.complete_cycle;

  // Between externally visible events the served queue cannot change, and
  // every timing rule is a lower bound on the cycle, so the minimum of the
  // per-request thresholds is exact for the next command issue.
  bool writes = serving_writes();
  const std::deque<Pending>& q = writes ? write_q_ : read_q_;
  cycle_t cas_ok = writes ? cas_write_allowed_at_ : cas_read_allowed_at_;
  for (const Pending& p : q) {
    const BankState& bk = banks_[p.req.bank];
    cycle_t t = kNever;
    if (bk.open_row == p.req.row) {
      t = std::max(bk.ready_at, cas_ok);
    } else if (bk.open_row) {
      if (!row_needed_by_queue(q, p.req.bank, *bk.open_row)) t = bk.ready_at;
    } else {
      t = std::max(bk.ready_at, bk.act_allowed_at);
    }
    if (t < best) best = t;
  }
  if (best == kNever) return kNever;
  return std::max(best, now + 1);
}

}  // namespace banksim
