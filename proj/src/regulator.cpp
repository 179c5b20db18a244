#include "banksim/regulator.hpp"

#include <cmath>
#include <stdexcept>

namespace banksim {

void RegulatorConfig::validate() const {
  if (period_cycles == 0) throw std::invalid_argument("regulator: period must be >= 1");
  if (n_domains == 0 || n_banks == 0)
    throw std::invalid_argument("regulator: need at least one domain and one bank");
  if (budgets.size() != n_domains || regulated.size() != n_domains)
    throw std::invalid_argument("regulator: budgets/regulated must have one entry per domain");
}

BudgetResult budget_from_bandwidth(double mbps, cycle_t period_cycles, double freq_hz,
                                   uint32_t granule_bytes) {
  if (mbps <= 0 || freq_hz <= 0 || granule_bytes == 0 || period_cycles == 0)
    throw std::invalid_argument("budget_from_bandwidth: inputs must be positive");
  double bytes_per_sec = mbps * 1e6;
  double n = bytes_per_sec * double(period_cycles) / (double(granule_bytes) * freq_hz);
  long long rounded = std::llround(n);
  BudgetResult r;
  r.clamped = rounded < 1;
  r.n_acc = r.clamped ? 1 : uint64_t(rounded);
  return r;
}

double max_bandwidth_mbps(double per_bank_mbps, uint32_t n_banks) {
  if (per_bank_mbps <= 0 || n_banks == 0)
    throw std::invalid_argument("max_bandwidth: inputs must be positive");
  return per_bank_mbps * n_banks;
}

Regulator::Regulator(const RegulatorConfig& cfg) : cfg_(cfg) {
  cfg_.validate();
  matrix_ = ThrottleMatrix(cfg_.n_domains, cfg_.n_banks);
  counters_.assign(cfg_.mode == RegulationMode::kPerBank ? size_t(cfg_.n_domains) * cfg_.n_banks
                                                         : cfg_.n_domains,
                   0);
  stats_.issued.assign(cfg_.n_domains, 0);
  stats_.throttle_events.assign(cfg_.n_domains, 0);
  stats_.throttled_cycles.assign(cfg_.n_domains, 0);
  begin_period();
}

void Regulator::reset() {
  period_start_ = 0;
  stats_ = RegulatorStats{};
  stats_.issued.assign(cfg_.n_domains, 0);
  stats_.throttle_events.assign(cfg_.n_domains, 0);
  stats_.throttled_cycles.assign(cfg_.n_domains, 0);
  begin_period();
}

uint64_t& Regulator::counter(uint32_t domain, uint32_t bank) {
  return cfg_.mode == RegulationMode::kPerBank ? counters_[size_t(domain) * cfg_.n_banks + bank]
                                               : counters_[domain];
}

void Regulator::begin_period() {
  counters_.assign(counters_.size(), 0);
  matrix_.clear();
  // A zero budget means the domain is throttled for the entire period.
  for (uint32_t d = 0; d < cfg_.n_domains; ++d)
    if (cfg_.regulated[d] && cfg_.budgets[d] == 0) matrix_.set_row(d, true);
}

void Regulator::on_tick(cycle_t now) {
  while (now >= period_start_ + cfg_.period_cycles) {
    period_start_ += cfg_.period_cycles;
    ++stats_.periods_elapsed;
    begin_period();
  }
}

void Regulator::on_issue(uint32_t domain, uint32_t bank, cycle_t now) {
  if (domain >= cfg_.n_domains || bank >= cfg_.n_banks)
    throw std::invalid_argument("regulator: domain/bank out of range");
  if (now < period_start_ || now >= period_start_ + cfg_.period_cycles)
    throw std::logic_error("regulator: on_issue without a preceding on_tick(now)");
  ++stats_.issued[domain];
  if (!cfg_.regulated[domain]) return;
  if (matrix_.get(domain, bank))
    throw std::logic_error("regulator: issue while throttled (cachefront must gate)");
  uint64_t& c = counter(domain, bank);
  ++c;
  if (c >= cfg_.budgets[domain]) {
    if (cfg_.mode == RegulationMode::kPerBank)
      matrix_.set(domain, bank, true);
    else
      matrix_.set_row(domain, true);
    ++stats_.throttle_events[domain];
    stats_.throttled_cycles[domain] += period_start_ + cfg_.period_cycles - now;
  }
}

}  // namespace banksim
