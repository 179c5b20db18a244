#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "banksim/dram.hpp"
#include "banksim/llc.hpp"
#include "banksim/regulator.hpp"
#include "banksim/sim.hpp"
#include "banksim/types.hpp"
#include "banksim/workload.hpp"

namespace banksim::harness {

using json = nlohmann::ordered_json;

struct WorkloadSpec {
  std::string kind = "pll";  // "pll" | "sequential"
  uint32_t core = 0;
  bool victim = false;
  bool is_write = false;
  bool allocate = false;   // LLC install on miss; victims default true below
  uint32_t lists = 16;     // pll
  uint32_t entries = 1024;  // pll, per list
  std::string banks = "all";  // "all" or comma-separated bank ids, e.g. "0"
  uint32_t mlp = 6;
  uint64_t quota_lines = 0;  // 0 = run forever
  uint64_t array_kb = 2048;  // sequential
  bool paged = true;         // sequential: scatter frames the way a stock kernel would
};

struct RevmapParams {
  std::string map = "pi4";  // preset name or explicit spec string
  uint32_t addr_width = 32;  // used when map is a spec string
  uint32_t trc = 47;         // used when map is a spec string
  int samples_per_bank = 32;
  int repeats = 4;
  int seeds = 1;  // campaigns run with seed, seed+1, ...
};

struct ExperimentConfig {
  uint64_t seed = 1;
  cycle_t duration = 10'000'000;
  double warmup_frac = 0.10;  // measurement window = [warmup, duration]

  DramConfig dram;
  LlcConfig llc;
  bool partition_llc = true;  // even per-domain set partition

  bool reg_enabled = false;
  RegulationMode reg_mode = RegulationMode::kPerBank;
  cycle_t reg_period = 1'000'000;
  std::vector<double> budgets_mbps;  // per domain; <= 0 leaves a domain unregulated
  bool count_writebacks = true;

  std::vector<uint32_t> core_domains = {0, 1, 1, 1};
  std::vector<WorkloadSpec> workloads;

  std::vector<uint32_t> mlp_lists = {1, 2, 4, 8, 16};
  cycle_t mlp_duration = 2'000'000;

  std::vector<uint32_t> scaling_banks = {1, 2, 4, 8};
  double scaling_budget_mbps = 53.0;

  RevmapParams revmap;

  void validate() const;
};

// Table 3 defaults: 8-bank DDR3-ish part, tRC 47 ns, bank map b0:9 b1:10
// b2:11, 1 MB 16-way LLC, 1 ms regulator period.
ExperimentConfig default_config();
ExperimentConfig config_from_json(const json& j);
ExperimentConfig load_config(const std::string& path);

struct WorkloadResult {
  uint32_t core = 0;
  uint32_t domain = 0;
  bool victim = false;
  uint64_t lines_total = 0;
  uint64_t lines_window = 0;  // completions inside [warmup, end]
  double bw_mbps = 0.0;       // over the measurement window
  cycle_t quota_done_at = kNever;
};

struct RunMeasurement {
  cycle_t ran_until = 0;
  std::vector<WorkloadResult> workloads;
  DramStats dram;
  RegulatorStats reg;
  std::vector<LlcDomainStats> llc;  // indexed by domain
  bool all_quotas_done = false;
};

// Builds a simulation over `specs` and runs it to cfg.duration (or to quota
// completion when stop_on_quota). Bandwidths use the post-warmup window.
RunMeasurement run_measurement(const ExperimentConfig& cfg,
                               const std::vector<WorkloadSpec>& specs, bool stop_on_quota);

struct ExperimentResult {
  cycle_t solo_cycles = 0;
  cycle_t contended_cycles = 0;
  double slowdown = 1.0;
  double attacker_bw_mbps = 0.0;  // aggregate over non-victim workloads
  std::vector<WorkloadResult> workloads;  // from the contended run
  DramStats dram;                         // from the contended run
  RegulatorStats reg;
  std::vector<LlcDomainStats> llc;

  json to_json() const;
};

// Solo pass times the victim's quota alone; the contended pass adds the
// attackers under the same per-workload seeds. Throws on quota timeout.
ExperimentResult run_solo_then_contended(const ExperimentConfig& cfg);

struct MlpPoint {
  std::string config;  // "sb_1x" | "sb_4x" | "ab_1x" | "ab_4x"
  uint32_t lists = 1;
  double mbps = 0.0;  // aggregate over all instances
};
std::vector<MlpPoint> sweep_mlp(const ExperimentConfig& cfg);

struct BankScalingPoint {
  uint32_t banks = 1;
  double mbps = 0.0;
  double speedup = 1.0;  // vs the 1-bank measurement
};
std::vector<BankScalingPoint> sweep_bank_scaling(const ExperimentConfig& cfg);

struct ResultRow {
  std::string experiment;
  std::string metric;
  std::string unit;   // "MB/s" | "ratio" | "cycles" | "count"
  std::string value;  // preformatted: 1 decimal for MB/s, 2 for ratios
};

std::string fmt_mbps(double v);
std::string fmt_ratio(double v);
std::string fmt_count(uint64_t v);

std::vector<ResultRow> rows_from_experiment(const std::string& name, const ExperimentResult& r);
std::vector<ResultRow> rows_from_mlp(const std::vector<MlpPoint>& points);
std::vector<ResultRow> rows_from_scaling(const std::vector<BankScalingPoint>& points);

std::string render_csv(const std::vector<ResultRow>& rows);
std::string render_json(const std::vector<ResultRow>& rows, const json& detail = json());

enum class EmitFormat : uint8_t { kCsv, kJson };

// Deterministic bytes for fixed rows; format defaults from the path
// extension (.json -> JSON, anything else -> CSV).
void emit_results(const std::vector<ResultRow>& rows, const std::string& path,
                  std::optional<EmitFormat> format = std::nullopt, const json& detail = json());

}  // namespace banksim::harness
