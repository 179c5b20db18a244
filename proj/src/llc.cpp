#include "banksim/llc.hpp"

#include <algorithm>
#include <bit>
#include <stdexcept>

#include "banksim/rng.hpp"

namespace banksim {

void TaggingConfig::validate() const {
  if (core_to_domain.empty()) throw std::invalid_argument("tagging: need at least one core");
  if (n_domains == 0) throw std::invalid_argument("tagging: need at least one domain");
  for (uint32_t d : core_to_domain)
    if (d >= n_domains) throw std::invalid_argument("tagging: core mapped to unknown domain");
}

void LlcConfig::validate() const {
  tagging.validate();
  if (associativity == 0 || size_bytes == 0)
    throw std::invalid_argument("llc: size and associativity must be positive");
  if (size_bytes % (kLineBytes * associativity) != 0)
    throw std::invalid_argument("llc: size must be a whole number of sets");
  if (n_cache_banks == 0 || !std::has_single_bit(n_cache_banks))
    throw std::invalid_argument("llc: n_cache_banks must be a power of two");
  if (n_sets() % n_cache_banks != 0)
    throw std::invalid_argument("llc: sets must divide evenly across cache banks");
  if (mshrs_per_bank == 0) throw std::invalid_argument("llc: mshrs_per_bank must be >= 1");
  if (hit_latency == 0) throw std::invalid_argument("llc: hit_latency must be >= 1");
  if (!set_partition.empty()) {
    if (set_partition.size() != tagging.n_domains)
      throw std::invalid_argument("llc: set_partition must have one range per domain");
    // Ranges must be disjoint and inside the per-bank set space.
    std::vector<std::pair<uint32_t, uint32_t>> spans;
    for (const SetRange& r : set_partition) {
      if (r.count == 0 || r.start + r.count > sets_per_bank())
        throw std::invalid_argument("llc: set range out of bounds");
      spans.emplace_back(r.start, r.start + r.count);
    }
    std::sort(spans.begin(), spans.end());
    for (size_t i = 1; i < spans.size(); ++i)
      if (spans[i].first < spans[i - 1].second)
        throw std::invalid_argument("llc: set ranges overlap");
  }
}

std::vector<SetRange> LlcConfig::even_partition(uint32_t sets_per_bank, uint32_t n_domains) {
  if (n_domains == 0 || sets_per_bank / n_domains == 0)
    throw std::invalid_argument("llc: cannot partition that many domains");
  std::vector<SetRange> out(n_domains);
  uint32_t share = sets_per_bank / n_domains;
  for (uint32_t d = 0; d < n_domains; ++d) out[d] = {d * share, share};
  return out;
}

LlcModel::LlcModel(const LlcConfig& cfg, const BankMap& map, const RowColumnLayout& layout)
    : cfg_(cfg), map_(map), layout_(layout) {
  cfg_.validate();
  bank_shift_ = std::countr_zero(cfg_.n_cache_banks);
  lines_.assign(size_t(cfg_.n_sets()) * cfg_.associativity, Line{});
  fill_seq_.assign(cfg_.n_sets(), 0);
  mshrs_.assign(cfg_.n_cache_banks, std::vector<Mshr>(cfg_.mshrs_per_bank));
  rr_.assign(cfg_.n_cache_banks, 0);
  stats_.assign(cfg_.tagging.n_domains, LlcDomainStats{});
}

void LlcModel::reset() {
  lines_.assign(lines_.size(), Line{});
  fill_seq_.assign(fill_seq_.size(), 0);
  for (auto& bank : mshrs_) bank.assign(bank.size(), Mshr{});
  rr_.assign(rr_.size(), 0);
  writebacks_.clear();
  pending_.clear();
  seq_ = 0;
  next_dram_id_ = 1;
  dram_to_mshr_.clear();
  stats_.assign(stats_.size(), LlcDomainStats{});
}

uint32_t LlcModel::cache_bank_of(uint64_t paddr) const {
  return (paddr >> kLineShift) & (cfg_.n_cache_banks - 1);
}

uint32_t LlcModel::set_of(uint64_t paddr, uint32_t domain) const {
  uint32_t natural = (paddr >> (kLineShift + bank_shift_)) % cfg_.sets_per_bank();
  if (cfg_.set_partition.empty()) return natural;
  const SetRange& r = cfg_.set_partition[domain];
  return r.start + natural % r.count;
}

LlcModel::Line* LlcModel::lookup(uint32_t cache_bank, uint32_t set, uint64_t tag) {
  size_t base = (size_t(cache_bank) * cfg_.sets_per_bank() + set) * cfg_.associativity;
  for (uint32_t w = 0; w < cfg_.associativity; ++w) {
    Line& ln = lines_[base + w];
    if (ln.valid && ln.tag == tag) return &ln;
  }
  return nullptr;
}

void LlcModel::install(uint32_t cache_bank, uint32_t set, uint64_t tag, uint32_t domain,
                       bool dirty) {
  size_t global_set = size_t(cache_bank) * cfg_.sets_per_bank() + set;
  size_t base = global_set * cfg_.associativity;
  uint32_t victim = cfg_.associativity;
  for (uint32_t w = 0; w < cfg_.associativity; ++w) {
    if (!lines_[base + w].valid) {
      victim = w;
      break;
    }
  }
  if (victim == cfg_.associativity) {
    // Random replacement, deterministic per set so one domain's stream is
    // unaffected by other domains' fills (partitioned sets are disjoint).
    uint64_t x = cfg_.replacement_seed ^ (global_set * 0x9e3779b97f4a7c15ULL) ^
                 (uint64_t(fill_seq_[global_set]) << 32);
    victim = Rng::splitmix64(x) % cfg_.associativity;
    Line& old = lines_[base + victim];
    if (old.dirty) {
      uint64_t old_addr = old.tag;
      writebacks_.push_back({old_addr, old.domain, map_.paddr_to_bank(old_addr)});
      ++stats_[old.domain].writebacks;
    }
  }
  ++fill_seq_[global_set];
  lines_[base + victim] = Line{true, dirty, tag, domain};
}

void LlcModel::push_completion(uint32_t core, uint64_t token, cycle_t at) {
  PendingCompletion p{{core, token, at}, seq_++};
  auto pos = std::upper_bound(pending_.begin(), pending_.end(), p,
                              [](const PendingCompletion& a, const PendingCompletion& b) {
                                return a.c.at != b.c.at ? a.c.at < b.c.at : a.seq < b.seq;
                              });
  pending_.insert(pos, p);
}

AccessOutcome LlcModel::access(uint32_t core, uint64_t paddr, bool is_write, uint64_t token,
                               cycle_t now, const Regulator& reg, bool allocate) {
  uint32_t domain = cfg_.tagging.domain_of(core);
  uint64_t line_addr = paddr & ~uint64_t(kLineBytes - 1);
  uint32_t cache_bank = cache_bank_of(line_addr);
  uint32_t set = set_of(line_addr, domain);

  if (Line* ln = lookup(cache_bank, set, line_addr)) {
    if (is_write) ln->dirty = true;
    ++stats_[domain].hits;
    push_completion(core, token, now + cfg_.hit_latency);
    return AccessOutcome::kHit;
  }

  // Miss path: one MSHR per in-flight line; a second miss on the same line
  // is backpressured rather than merged.
  std::vector<Mshr>& bank = mshrs_[cache_bank];
  uint32_t free_slot = cfg_.mshrs_per_bank;
  for (uint32_t i = 0; i < cfg_.mshrs_per_bank; ++i) {
    if (bank[i].state != Mshr::kFree && bank[i].line_addr == line_addr) {
      ++stats_[domain].blocked_mshr;
      return AccessOutcome::kBlockedMshr;
    }
    if (bank[i].state == Mshr::kFree && free_slot == cfg_.mshrs_per_bank) free_slot = i;
  }
  if (free_slot == cfg_.mshrs_per_bank) {
    ++stats_[domain].blocked_mshr;
    return AccessOutcome::kBlockedMshr;
  }

  uint32_t dram_bank = map_.paddr_to_bank(line_addr);
  if (reg.throttled(domain, dram_bank)) {
    ++stats_[domain].blocked_throttle;
    return AccessOutcome::kBlockedThrottle;
  }

  Mshr& m = bank[free_slot];
  m.state = Mshr::kAllocated;
  m.line_addr = line_addr;
  m.core = core;
  m.domain = domain;
  m.dram_bank = dram_bank;
  m.token = token;
  m.ready_at = now + cfg_.hit_latency;  // tag lookup before the refill issues
  m.is_write = is_write;
  m.allocate = allocate;
  ++stats_[domain].misses;
  return AccessOutcome::kMissAllocated;
}

std::optional<uint32_t> LlcModel::arbiter_select(uint32_t cache_bank,
                                                 const ThrottleMatrix& throttle, cycle_t now,
                                                 const DramModel& dram) {
  std::vector<Mshr>& bank = mshrs_[cache_bank];
  uint32_t n = cfg_.mshrs_per_bank;
  for (uint32_t k = 0; k < n; ++k) {
    uint32_t slot = (rr_[cache_bank] + k) % n;
    const Mshr& m = bank[slot];
    if (m.state != Mshr::kAllocated || m.ready_at > now) continue;
    if (throttle.get(m.domain, m.dram_bank)) continue;
    if (!dram.can_accept(false)) return std::nullopt;
    rr_[cache_bank] = (slot + 1) % n;
    return slot;
  }
  return std::nullopt;
}

void LlcModel::tick(cycle_t now, DramModel& dram, Regulator& reg,
                    std::vector<LlcCompletion>& out) {
  while (!pending_.empty() && pending_.front().c.at <= now) {
    out.push_back(pending_.front().c);
    pending_.erase(pending_.begin());
  }
  for (auto& bank : mshrs_)
    for (Mshr& m : bank)
      if (m.state == Mshr::kFilling && m.ready_at <= now) m.state = Mshr::kFree;

  for (uint32_t cb = 0; cb < cfg_.n_cache_banks; ++cb) {
    auto slot = arbiter_select(cb, reg.matrix(), now, dram);
    if (!slot) continue;
    Mshr& m = mshrs_[cb][*slot];
    MemRequest req;
    req.id = next_dram_id_++;
    req.core = m.core;
    req.domain = m.domain;
    req.is_write = false;  // refill read (write misses are write-allocate)
    req.paddr = m.line_addr;
    if (!dram.enqueue(req, now)) throw std::logic_error("llc: arbiter issued into a full queue");
    reg.on_issue(m.domain, m.dram_bank, now);
    ++stats_[m.domain].dram_reads;
    m.state = Mshr::kIssued;
    dram_to_mshr_[req.id] = {cb, *slot};
  }

  // Drain one writeback per cycle, skipping over throttled domains so a
  // capped domain cannot head-of-line-block the others.
  bool counted = reg.config().count_writebacks;
  if (!writebacks_.empty() && dram.can_accept(true)) {
    for (auto it = writebacks_.begin(); it != writebacks_.end(); ++it) {
      if (counted && reg.throttled(it->domain, it->dram_bank)) continue;
      MemRequest req;
      req.id = next_dram_id_++;
      req.core = 0;
      req.domain = it->domain;
      req.is_write = true;
      req.paddr = it->line_addr;
      if (!dram.enqueue(req, now)) throw std::logic_error("llc: writeback into a full queue");
      if (counted) reg.on_issue(it->domain, it->dram_bank, now);
      writebacks_.erase(it);
      break;
    }
  }
}

void LlcModel::on_dram_complete(const MemRequest& r, cycle_t now) {
  if (r.is_write) return;  // writeback landed; nothing to route
  auto it = dram_to_mshr_.find(r.id);
  if (it == dram_to_mshr_.end()) throw std::logic_error("llc: unknown refill completion");
  auto [cb, slot] = it->second;
  dram_to_mshr_.erase(it);
  Mshr& m = mshrs_[cb][slot];
  if (m.state != Mshr::kIssued) throw std::logic_error("llc: refill for idle MSHR");

  if (m.allocate) {
    install(cb, set_of(m.line_addr, m.domain), m.line_addr, m.domain, m.is_write);
  } else if (m.is_write) {
    // Streaming store: write-allocate refill just happened; the dirty line
    // leaves immediately as a writeback instead of being installed.
    writebacks_.push_back({m.line_addr, m.domain, m.dram_bank});
    ++stats_[m.domain].writebacks;
  }
  push_completion(m.core, m.token, now + 1);
  m.state = Mshr::kFilling;
  m.ready_at = now + 1;
}

size_t LlcModel::mshrs_in_use(uint32_t cache_bank) const {
  size_t n = 0;
  for (const Mshr& m : mshrs_[cache_bank])
    if (m.state != Mshr::kFree) ++n;
  return n;
}

cycle_t LlcModel::next_event_after(cycle_t now, const DramModel& dram,
                                   const Regulator& reg) const {
  cycle_t best = kNever;
  if (!pending_.empty()) best = std::min(best, pending_.front().c.at);
  for (const auto& bank : mshrs_) {
    for (const Mshr& m : bank) {
      if (m.state == Mshr::kFilling) {
        best = std::min(best, m.ready_at);
      } else if (m.state == Mshr::kAllocated) {
        if (m.ready_at > now) {
          best = std::min(best, m.ready_at);
        } else if (reg.throttled(m.domain, m.dram_bank)) {
          best = std::min(best, reg.next_period_boundary(now));
        } else if (dram.can_accept(false)) {
          best = std::min(best, now + 1);  // lost this cycle's arbitration
        }
        // Queue-full waits ride on the DRAM's own next event.
      }
    }
  }
  bool counted = reg.config().count_writebacks;
  for (const Writeback& w : writebacks_) {
    if (counted && reg.throttled(w.domain, w.dram_bank)) {
      best = std::min(best, reg.next_period_boundary(now));
    } else if (dram.can_accept(true)) {
      best = std::min(best, now + 1);
      break;
    }
  }
  if (best == kNever) return kNever;
  return std::max(best, now + 1);
}

}  // namespace banksim
