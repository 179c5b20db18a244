#include "banksim/workload.hpp"

#include <algorithm>
#include <stdexcept>
#include <unordered_set>

namespace banksim {

std::vector<std::vector<uint64_t>> build_pll(const PllWorkload::Params& p, const BankMap& map,
                                             const RowColumnLayout& layout) {
  if (p.n_lists == 0 || p.entries_per_list == 0)
    throw std::invalid_argument("pll: need at least one list and one entry");
  if (p.target_banks.empty()) throw std::invalid_argument("pll: target_banks empty");
  for (uint32_t b : p.target_banks)
    if (b >= map.n_banks()) throw std::invalid_argument("pll: target bank out of range");

  Rng rng(p.seed);
  size_t total = size_t(p.n_lists) * p.entries_per_list;
  std::vector<uint64_t> pool;
  pool.reserve(total);
  if (p.target_banks.size() == 1) {
    // Single bank: pairwise-distinct rows so every chase step conflicts.
    pool = addresses_for_bank(map, layout, p.target_banks[0], total, true, rng);
  } else {
    size_t per_bank = (total + p.target_banks.size() - 1) / p.target_banks.size();
    for (uint32_t b : p.target_banks) {
      auto part = addresses_for_bank(map, layout, b, per_bank, false, rng);
      pool.insert(pool.end(), part.begin(), part.end());
    }
    rng.shuffle(pool);
    pool.resize(total);
  }

  std::vector<std::vector<uint64_t>> chains(p.n_lists);
  for (uint32_t c = 0; c < p.n_lists; ++c)
    chains[c].assign(pool.begin() + size_t(c) * p.entries_per_list,
                     pool.begin() + size_t(c + 1) * p.entries_per_list);
  return chains;
}

PllWorkload::PllWorkload(uint32_t core, uint32_t mlp_limit, const Params& p, const BankMap& map,
                         const RowColumnLayout& layout)
    : Workload(core, mlp_limit), p_(p), chains_(build_pll(p, map, layout)) {
  state_.resize(chains_.size());
}

std::optional<uint32_t> PllWorkload::pick_chain(cycle_t now) const {
  if (outstanding_ >= mlp_limit_) return std::nullopt;
  if (p_.quota && completed_ >= p_.quota) return std::nullopt;
  for (uint32_t k = 0; k < state_.size(); ++k) {
    uint32_t c = (rr_ + k) % state_.size();
    if (!state_[c].in_flight && state_[c].parked_until <= now) return c;
  }
  return std::nullopt;
}

std::optional<WorkloadRequest> PllWorkload::peek(cycle_t now) {
  auto c = pick_chain(now);
  if (!c) {
    pending_chain_.reset();
    return std::nullopt;
  }
  pending_chain_ = *c;
  const Chain& ch = state_[*c];
  return WorkloadRequest{chains_[*c][ch.pos], p_.is_write, *c, p_.allocate};
}

void PllWorkload::accepted(cycle_t) {
  if (!pending_chain_) throw std::logic_error("pll: accepted without a pending peek");
  Chain& ch = state_[*pending_chain_];
  ch.in_flight = true;
  rr_ = (*pending_chain_ + 1) % state_.size();
  pending_chain_.reset();
  ++outstanding_;
}

void PllWorkload::parked(const WorkloadRequest& r, cycle_t wake) {
  state_[r.token].parked_until = wake;
  rr_ = (uint32_t(r.token) + 1) % state_.size();
  pending_chain_.reset();
}

void PllWorkload::on_complete(uint64_t token, cycle_t now) {
  Chain& ch = state_[token];
  if (!ch.in_flight) throw std::logic_error("pll: completion for idle chain");
  ch.in_flight = false;
  ch.pos = (ch.pos + 1) % chains_[token].size();
  --outstanding_;
  ++completed_;
  if (p_.quota && completed_ == p_.quota && quota_done_at_ == kNever) quota_done_at_ = now;
}

bool PllWorkload::quota_done() const { return p_.quota && completed_ >= p_.quota; }

cycle_t PllWorkload::wake_hint(cycle_t now) const {
  if (pick_chain(now)) return now + 1;
  if (outstanding_ >= mlp_limit_) return kNever;  // a completion will wake us
  cycle_t best = kNever;
  for (const Chain& ch : state_)
    if (!ch.in_flight && ch.parked_until > now) best = std::min(best, ch.parked_until);
  return best;
}

SequentialWorkload::SequentialWorkload(uint32_t core, uint32_t mlp_limit, const Params& p)
    : Workload(core, mlp_limit), p_(p) {
  if (p_.array_bytes < kLineBytes) throw std::invalid_argument("sequential: array too small");
  if (p_.scatter_pages) {
    if (p_.page_bytes < kLineBytes || (p_.page_bytes & (p_.page_bytes - 1)))
      throw std::invalid_argument("sequential: page_bytes must be a power of two >= a line");
    if (p_.addr_width < 13 || p_.addr_width > 56)
      throw std::invalid_argument("sequential: addr_width out of range");
    uint64_t n_pages = (p_.array_bytes + p_.page_bytes - 1) / p_.page_bytes;
    uint64_t span = 1ull << p_.addr_width;
    if (n_pages > span / p_.page_bytes / 2)
      throw std::invalid_argument("sequential: array too large for the frame pool");
    Rng rng(p_.seed);
    std::unordered_set<uint64_t> used;
    frames_.reserve(n_pages);
    while (frames_.size() < n_pages) {
      uint64_t base = rng.next() & (span - 1) & ~(p_.page_bytes - 1);
      if (used.insert(base).second) frames_.push_back(base);
    }
  }
}

uint64_t SequentialWorkload::line_addr(uint64_t line) const {
  uint64_t lines = p_.array_bytes / kLineBytes;
  uint64_t idx = line % lines;
  if (frames_.empty()) return p_.base_addr + idx * kLineBytes;
  uint64_t per_page = p_.page_bytes / kLineBytes;
  return frames_[idx / per_page] + (idx % per_page) * kLineBytes;
}

std::optional<WorkloadRequest> SequentialWorkload::peek(cycle_t now) {
  if (outstanding_ >= mlp_limit_) return std::nullopt;
  if (p_.quota_lines && issued_lines_ >= p_.quota_lines) return std::nullopt;
  if (parked_until_ > now) return std::nullopt;
  return WorkloadRequest{line_addr(issued_lines_), false, issued_lines_, true};
}

void SequentialWorkload::accepted(cycle_t) {
  ++issued_lines_;
  ++outstanding_;
}

void SequentialWorkload::parked(const WorkloadRequest&, cycle_t wake) { parked_until_ = wake; }

void SequentialWorkload::on_complete(uint64_t, cycle_t now) {
  --outstanding_;
  ++completed_;
  if (p_.quota_lines && completed_ == p_.quota_lines && quota_done_at_ == kNever)
    quota_done_at_ = now;
}

bool SequentialWorkload::quota_done() const {
  return p_.quota_lines && completed_ >= p_.quota_lines;
}

cycle_t SequentialWorkload::wake_hint(cycle_t now) const {
  if (outstanding_ >= mlp_limit_) return kNever;
  if (p_.quota_lines && issued_lines_ >= p_.quota_lines) return kNever;
  if (parked_until_ > now) return parked_until_;
  return now + 1;
}

double measure_bandwidth_mbps(uint64_t lines_completed, cycle_t window_cycles) {
  if (window_cycles == 0) throw std::invalid_argument("measure_bandwidth: empty window");
  return double(lines_completed) * kLineBytes * 1000.0 / double(window_cycles);
}

}  // namespace banksim
