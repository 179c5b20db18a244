#include "banksim/harness.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace banksim::harness {

namespace {

uint64_t workload_seed(uint64_t base, uint32_t core) {
  uint64_t x = base;
  Rng::splitmix64(x);
  x ^= (core + 1) * 0x9e3779b97f4a7c15ULL;
  return Rng::splitmix64(x);
}

uint32_t domain_count(const std::vector<uint32_t>& core_domains) {
  uint32_t n = 0;
  for (uint32_t d : core_domains) n = std::max(n, d + 1);
  return n;
}

std::vector<uint32_t> parse_banks(const std::string& text, uint32_t n_banks) {
  std::vector<uint32_t> out;
  if (text == "all") {
    for (uint32_t b = 0; b < n_banks; ++b) out.push_back(b);
    return out;
  }
  std::stringstream ss(text);
  std::string piece;
  while (std::getline(ss, piece, ',')) {
    size_t used = 0;
    unsigned long v = std::stoul(piece, &used);
    if (used != piece.size() || piece.empty())
      throw std::invalid_argument("workload banks: bad token '" + piece + "'");
    if (v >= n_banks)
      throw std::invalid_argument("workload banks: bank " + piece + " out of range");
    out.push_back(static_cast<uint32_t>(v));
  }
  if (out.empty()) throw std::invalid_argument("workload banks: empty list");
  return out;
}

}  // namespace

void ExperimentConfig::validate() const {
  dram.validate();
  if (core_domains.empty()) throw std::invalid_argument("config: core_domains empty");
  if (warmup_frac < 0.0 || warmup_frac > 0.9)
    throw std::invalid_argument("config: warmup_frac must be in [0, 0.9]");
  if (duration == 0) throw std::invalid_argument("config: duration must be positive");
  if (reg_enabled && duration < 10 * reg_period)
    throw std::invalid_argument("config: duration must cover >= 10 regulator periods");
  const uint32_t nd = domain_count(core_domains);
  if (budgets_mbps.size() > nd)
    throw std::invalid_argument("config: more budgets than domains");
  size_t victims = 0;
  for (const auto& w : workloads) {
    if (w.core >= core_domains.size())
      throw std::invalid_argument("config: workload core out of range");
    if (w.kind != "pll" && w.kind != "sequential")
      throw std::invalid_argument("config: unknown workload kind '" + w.kind + "'");
    victims += w.victim ? 1 : 0;
  }
  if (victims > 1) throw std::invalid_argument("config: more than one victim");
  if (mlp_lists.empty()) throw std::invalid_argument("config: mlp_lists empty");
  if (scaling_banks.empty() || scaling_banks.front() != 1)
    throw std::invalid_argument("config: scaling_banks must start at 1");
  for (size_t i = 0; i < scaling_banks.size(); ++i) {
    uint32_t n = scaling_banks[i];
    if (!std::has_single_bit(n) || n > dram.n_banks())
      throw std::invalid_argument("config: scaling_banks must be powers of two <= n_banks");
    if (i && n <= scaling_banks[i - 1])
      throw std::invalid_argument("config: scaling_banks must be increasing");
  }
}

ExperimentConfig default_config() {
  ExperimentConfig cfg;
  cfg.dram.map = parse_bank_map("b0:9 b1:10 b2:11", 32);
  cfg.dram.layout = RowColumnLayout::for_width(32);
  cfg.budgets_mbps = {0.0, 53.0};  // victim domain unregulated
  return cfg;
}

namespace {

WorkloadSpec workload_from_json(const json& j) {
  WorkloadSpec w;
  w.kind = j.value("kind", w.kind);
  w.core = j.value("core", w.core);
  w.victim = j.value("victim", w.victim);
  std::string rw = j.value("rw", std::string(w.is_write ? "w" : "r"));
  if (rw != "r" && rw != "w") throw std::invalid_argument("workload rw must be 'r' or 'w'");
  w.is_write = rw == "w";
  w.allocate = j.value("allocate", w.kind == "sequential");
  w.lists = j.value("lists", w.lists);
  w.entries = j.value("entries", w.entries);
  w.banks = j.value("banks", w.banks);
  w.mlp = j.value("mlp", w.mlp);
  w.quota_lines = j.value("quota_lines", w.quota_lines);
  w.array_kb = j.value("array_kb", w.array_kb);
  w.paged = j.value("paged", w.paged);
  return w;
}

}  // namespace

ExperimentConfig config_from_json(const json& j) {
  ExperimentConfig cfg = default_config();
  cfg.seed = j.value("seed", cfg.seed);
  cfg.duration = j.value("duration", cfg.duration);
  cfg.warmup_frac = j.value("warmup_frac", cfg.warmup_frac);

  if (j.contains("dram")) {
    const auto& d = j.at("dram");
    cfg.dram.tRC = d.value("tRC", cfg.dram.tRC);
    cfg.dram.tRCD = d.value("tRCD", cfg.dram.tRCD);
    cfg.dram.tRP = d.value("tRP", cfg.dram.tRP);
    cfg.dram.tCL = d.value("tCL", cfg.dram.tCL);
    cfg.dram.tWTR = d.value("tWTR", cfg.dram.tWTR);
    cfg.dram.tBURST = d.value("tBURST", cfg.dram.tBURST);
    cfg.dram.read_q_depth = d.value("read_queue", cfg.dram.read_q_depth);
    cfg.dram.write_q_depth = d.value("write_queue", cfg.dram.write_q_depth);
    cfg.dram.write_high_watermark = d.value("high_watermark", cfg.dram.write_high_watermark);
    cfg.dram.write_low_watermark = d.value("low_watermark", cfg.dram.write_low_watermark);
    uint32_t width = d.value("addr_width", cfg.dram.map.addr_width);
    uint32_t row_shift = d.value("row_shift", cfg.dram.layout.row_shift);
    std::string map = d.value("map", std::string());
    if (!map.empty()) cfg.dram.map = parse_bank_map(map, width);
    cfg.dram.map.addr_width = width;
    cfg.dram.layout = RowColumnLayout::for_width(width, row_shift);
  }
  if (j.contains("llc")) {
    const auto& l = j.at("llc");
    cfg.llc.size_bytes = l.value("size_kb", cfg.llc.size_bytes >> 10) << 10;
    cfg.llc.associativity = l.value("assoc", cfg.llc.associativity);
    cfg.llc.n_cache_banks = l.value("cache_banks", cfg.llc.n_cache_banks);
    cfg.llc.mshrs_per_bank = l.value("mshrs_per_bank", cfg.llc.mshrs_per_bank);
    cfg.llc.hit_latency = l.value("hit_latency", cfg.llc.hit_latency);
    cfg.llc.replacement_seed = l.value("replacement_seed", cfg.llc.replacement_seed);
    cfg.partition_llc = l.value("partition", cfg.partition_llc);
  }
  if (j.contains("regulator")) {
    const auto& r = j.at("regulator");
    cfg.reg_enabled = r.value("enabled", cfg.reg_enabled);
    std::string mode = r.value("mode", std::string(cfg.reg_mode == RegulationMode::kPerBank
                                                       ? "per-bank"
                                                       : "all-bank"));
    if (mode == "per-bank")
      cfg.reg_mode = RegulationMode::kPerBank;
    else if (mode == "all-bank")
      cfg.reg_mode = RegulationMode::kAllBank;
    else
      throw std::invalid_argument("regulator mode must be per-bank or all-bank");
    cfg.reg_period = r.value("period", cfg.reg_period);
    if (r.contains("budgets_mbps"))
      cfg.budgets_mbps = r.at("budgets_mbps").get<std::vector<double>>();
    cfg.count_writebacks = r.value("count_writebacks", cfg.count_writebacks);
  }
  if (j.contains("core_domains"))
    cfg.core_domains = j.at("core_domains").get<std::vector<uint32_t>>();
  if (j.contains("workloads")) {
    cfg.workloads.clear();
    for (const auto& w : j.at("workloads")) cfg.workloads.push_back(workload_from_json(w));
  }
  if (j.contains("mlp")) {
    const auto& m = j.at("mlp");
    if (m.contains("lists")) cfg.mlp_lists = m.at("lists").get<std::vector<uint32_t>>();
    cfg.mlp_duration = m.value("duration", cfg.mlp_duration);
  }
  if (j.contains("bank_scaling")) {
    const auto& b = j.at("bank_scaling");
    if (b.contains("banks")) cfg.scaling_banks = b.at("banks").get<std::vector<uint32_t>>();
    cfg.scaling_budget_mbps = b.value("budget_mbps", cfg.scaling_budget_mbps);
  }
  if (j.contains("revmap")) {
    const auto& r = j.at("revmap");
    cfg.revmap.map = r.value("map", cfg.revmap.map);
    cfg.revmap.addr_width = r.value("addr_width", cfg.revmap.addr_width);
    cfg.revmap.trc = r.value("tRC", cfg.revmap.trc);
    cfg.revmap.samples_per_bank = r.value("samples_per_bank", cfg.revmap.samples_per_bank);
    cfg.revmap.repeats = r.value("repeats", cfg.revmap.repeats);
    cfg.revmap.seeds = r.value("seeds", cfg.revmap.seeds);
  }
  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  json j = json::parse(in);
  return config_from_json(j);
}

namespace {

LlcConfig make_llc(const ExperimentConfig& cfg) {
  LlcConfig llc = cfg.llc;
  llc.tagging.core_to_domain = cfg.core_domains;
  llc.tagging.n_domains = domain_count(cfg.core_domains);
  if (cfg.partition_llc && llc.tagging.n_domains > 1)
    llc.set_partition = LlcConfig::even_partition(llc.sets_per_bank(), llc.tagging.n_domains);
  else
    llc.set_partition.clear();
  return llc;
}

RegulatorConfig make_reg(const ExperimentConfig& cfg) {
  RegulatorConfig reg;
  reg.mode = cfg.reg_mode;
  reg.period_cycles = cfg.reg_period;
  reg.n_banks = cfg.dram.n_banks();
  reg.n_domains = domain_count(cfg.core_domains);
  reg.count_writebacks = cfg.count_writebacks;
  reg.budgets.assign(reg.n_domains, 1);
  reg.regulated.assign(reg.n_domains, 0);
  if (cfg.reg_enabled) {
    for (uint32_t d = 0; d < reg.n_domains && d < cfg.budgets_mbps.size(); ++d) {
      if (cfg.budgets_mbps[d] <= 0.0) continue;
      reg.budgets[d] = budget_from_bandwidth(cfg.budgets_mbps[d], reg.period_cycles).n_acc;
      reg.regulated[d] = 1;
    }
  }
  return reg;
}

std::unique_ptr<Workload> build_workload(const WorkloadSpec& s, const ExperimentConfig& cfg) {
  const uint64_t seed = workload_seed(cfg.seed, s.core);
  if (s.kind == "sequential") {
    SequentialWorkload::Params p;
    p.array_bytes = s.array_kb << 10;
    p.quota_lines = s.quota_lines ? s.quota_lines : p.array_bytes / kLineBytes;
    p.scatter_pages = s.paged;
    p.addr_width = cfg.dram.map.addr_width;
    p.seed = seed;
    return std::make_unique<SequentialWorkload>(s.core, s.mlp, p);
  }
  PllWorkload::Params p;
  p.n_lists = s.lists;
  p.entries_per_list = s.entries;
  p.target_banks = parse_banks(s.banks, cfg.dram.n_banks());
  p.is_write = s.is_write;
  p.allocate = s.allocate;
  p.seed = seed;
  p.quota = s.quota_lines;
  return std::make_unique<PllWorkload>(s.core, s.mlp, p, cfg.dram.map, cfg.dram.layout);
}

}  // namespace

RunMeasurement run_measurement(const ExperimentConfig& cfg,
                               const std::vector<WorkloadSpec>& specs, bool stop_on_quota) {
  cfg.validate();
  Simulation::Config sc;
  sc.dram = cfg.dram;
  sc.llc = make_llc(cfg);
  sc.reg = make_reg(cfg);
  sc.duration = cfg.duration;
  sc.stop_when_quotas_done = stop_on_quota;

  std::vector<std::unique_ptr<Workload>> ws;
  ws.reserve(specs.size());
  for (const auto& s : specs) ws.push_back(build_workload(s, cfg));
  Simulation sim(sc, std::move(ws));

  const cycle_t warmup = static_cast<cycle_t>(cfg.duration * cfg.warmup_frac);
  sim.run_until(warmup);
  std::vector<uint64_t> at_warmup(specs.size());
  for (size_t i = 0; i < specs.size(); ++i) at_warmup[i] = sim.workload(i).completed();
  sim.run_until(cfg.duration);

  RunMeasurement m;
  m.ran_until = sim.now();
  const cycle_t window = m.ran_until > warmup ? m.ran_until - warmup : 1;
  for (size_t i = 0; i < specs.size(); ++i) {
    const Workload& w = sim.workload(i);
    WorkloadResult r;
    r.core = specs[i].core;
    r.domain = cfg.core_domains.at(specs[i].core);
    r.victim = specs[i].victim;
    r.lines_total = w.completed();
    r.lines_window = w.completed() - at_warmup[i];
    r.bw_mbps = measure_bandwidth_mbps(r.lines_window, window);
    r.quota_done_at = w.quota_done_at();
    m.workloads.push_back(r);
  }
  m.dram = sim.dram().stats();
  m.reg = sim.regulator().stats();
  for (uint32_t d = 0; d < sc.llc.tagging.n_domains; ++d)
    m.llc.push_back(sim.llc().domain_stats(d));
  m.all_quotas_done = sim.all_quotas_done();
  return m;
}

ExperimentResult run_solo_then_contended(const ExperimentConfig& cfg) {
  cfg.validate();
  const WorkloadSpec* victim = nullptr;
  for (const auto& w : cfg.workloads)
    if (w.victim) victim = &w;
  if (!victim) throw std::invalid_argument("run: config must mark exactly one victim");
  if (victim->kind == "pll" && victim->quota_lines == 0)
    throw std::invalid_argument("run: victim needs a work quota");

  RunMeasurement solo = run_measurement(cfg, {*victim}, true);
  if (solo.workloads[0].quota_done_at == kNever)
    throw std::runtime_error("run: victim did not finish its quota within duration (solo)");

  RunMeasurement contended = run_measurement(cfg, cfg.workloads, false);
  const WorkloadResult* cv = nullptr;
  for (const auto& r : contended.workloads)
    if (r.victim) cv = &r;
  if (cv->quota_done_at == kNever)
    throw std::runtime_error("run: victim did not finish its quota within duration (contended)");

  ExperimentResult out;
  out.solo_cycles = solo.workloads[0].quota_done_at;
  out.contended_cycles = cv->quota_done_at;
  out.slowdown = static_cast<double>(out.contended_cycles) / out.solo_cycles;
  for (const auto& r : contended.workloads)
    if (!r.victim) out.attacker_bw_mbps += r.bw_mbps;
  out.workloads = contended.workloads;
  out.dram = contended.dram;
  out.reg = contended.reg;
  out.llc = contended.llc;
  return out;
}

std::vector<MlpPoint> sweep_mlp(const ExperimentConfig& cfg) {
  ExperimentConfig c = cfg;
  c.duration = cfg.mlp_duration;
  c.reg_enabled = false;
  c.budgets_mbps.clear();
  c.partition_llc = false;
  struct Variant {
    const char* label;
    uint32_t instances;
    const char* banks;
  };
  const Variant variants[] = {
      {"sb_1x", 1, "0"}, {"sb_4x", 4, "0"}, {"ab_1x", 1, "all"}, {"ab_4x", 4, "all"}};

  std::vector<MlpPoint> out;
  for (const auto& v : variants) {
    for (uint32_t lists : cfg.mlp_lists) {
      c.core_domains.assign(std::max<size_t>(v.instances, cfg.core_domains.size()), 0);
      std::vector<WorkloadSpec> specs;
      for (uint32_t i = 0; i < v.instances; ++i) {
        WorkloadSpec w;
        w.kind = "pll";
        w.core = i;
        w.lists = lists;
        w.entries = 1024;
        w.banks = v.banks;
        w.is_write = false;
        w.allocate = false;
        w.mlp = 6;  // per-core MSHR budget; lists beyond it queue up
        specs.push_back(w);
      }
      RunMeasurement m = run_measurement(c, specs, false);
      MlpPoint p;
      p.config = v.label;
      p.lists = lists;
      for (const auto& r : m.workloads) p.mbps += r.bw_mbps;
      out.push_back(p);
    }
  }
  return out;
}

std::vector<BankScalingPoint> sweep_bank_scaling(const ExperimentConfig& cfg) {
  std::vector<BankScalingPoint> out;
  for (uint32_t n : cfg.scaling_banks) {
    const uint32_t bits = static_cast<uint32_t>(std::countr_zero(n));
    ExperimentConfig c = cfg;
    c.dram.map = cfg.dram.map.truncated(bits);
    c.scaling_banks = {1};  // keep validate() consistent with the truncated map
    c.reg_enabled = true;
    c.reg_mode = RegulationMode::kPerBank;
    c.core_domains = {0, 1, 1, 1};
    c.budgets_mbps.assign(2, 0.0);
    c.budgets_mbps[1] = cfg.scaling_budget_mbps;

    std::vector<WorkloadSpec> specs;
    for (uint32_t core = 1; core <= 3; ++core) {
      WorkloadSpec w;
      w.kind = "pll";
      w.core = core;
      w.banks = "all";
      w.is_write = false;
      w.allocate = false;
      specs.push_back(w);
    }
    RunMeasurement m = run_measurement(c, specs, false);
    BankScalingPoint p;
    p.banks = n;
    for (const auto& r : m.workloads) p.mbps += r.bw_mbps;
    p.speedup = out.empty() ? 1.0 : p.mbps / out.front().mbps;
    out.push_back(p);
  }
  return out;
}

std::string fmt_mbps(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.1f", v);
  return buf;
}

std::string fmt_ratio(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string fmt_count(uint64_t v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%llu", static_cast<unsigned long long>(v));
  return buf;
}

json ExperimentResult::to_json() const {
  json j;
  j["solo_cycles"] = solo_cycles;
  j["contended_cycles"] = contended_cycles;
  j["slowdown"] = slowdown;
  j["attacker_bw_mbps"] = attacker_bw_mbps;
  json ws = json::array();
  for (const auto& w : workloads) {
    json e;
    e["core"] = w.core;
    e["domain"] = w.domain;
    e["victim"] = w.victim;
    e["lines_total"] = w.lines_total;
    e["lines_window"] = w.lines_window;
    e["bw_mbps"] = w.bw_mbps;
    e["quota_done_at"] = w.quota_done_at == kNever ? -1 : static_cast<int64_t>(w.quota_done_at);
    ws.push_back(e);
  }
  j["workloads"] = ws;
  json d;
  d["reads_served"] = dram.reads_served;
  d["writes_served"] = dram.writes_served;
  d["activates"] = dram.activates;
  d["row_hits"] = dram.row_hits;
  d["row_misses"] = dram.row_misses;
  d["bus_mode_switches"] = dram.bus_mode_switches;
  d["busy_cycles"] = dram.busy_cycles;
  d["per_bank_activations"] = dram.per_bank_activations;
  j["dram"] = d;
  json r;
  r["periods_elapsed"] = reg.periods_elapsed;
  r["issued"] = reg.issued;
  r["throttle_events"] = reg.throttle_events;
  r["throttled_cycles"] = reg.throttled_cycles;
  j["regulator"] = r;
  json ls = json::array();
  for (const auto& s : llc) {
    json e;
    e["hits"] = s.hits;
    e["misses"] = s.misses;
    e["writebacks"] = s.writebacks;
    e["blocked_throttle"] = s.blocked_throttle;
    e["blocked_mshr"] = s.blocked_mshr;
    e["dram_reads"] = s.dram_reads;
    ls.push_back(e);
  }
  j["llc_domains"] = ls;
  return j;
}

std::vector<ResultRow> rows_from_experiment(const std::string& name, const ExperimentResult& r) {
  std::vector<ResultRow> rows;
  rows.push_back({name, "solo_runtime", "cycles", fmt_count(r.solo_cycles)});
  rows.push_back({name, "contended_runtime", "cycles", fmt_count(r.contended_cycles)});
  rows.push_back({name, "slowdown", "ratio", fmt_ratio(r.slowdown)});
  rows.push_back({name, "attacker_bw", "MB/s", fmt_mbps(r.attacker_bw_mbps)});
  for (const auto& w : r.workloads)
    rows.push_back({name, "core" + std::to_string(w.core) + "_bw", "MB/s", fmt_mbps(w.bw_mbps)});
  for (size_t d = 0; d < r.reg.throttled_cycles.size(); ++d) {
    if (r.reg.throttle_events[d] == 0) continue;
    rows.push_back({name, "domain" + std::to_string(d) + "_throttled", "cycles",
                    fmt_count(r.reg.throttled_cycles[d])});
  }
  return rows;
}

std::vector<ResultRow> rows_from_mlp(const std::vector<MlpPoint>& points) {
  std::vector<ResultRow> rows;
  for (const auto& p : points)
    rows.push_back(
        {"mlp-sweep", p.config + "_L" + std::to_string(p.lists), "MB/s", fmt_mbps(p.mbps)});
  return rows;
}

std::vector<ResultRow> rows_from_scaling(const std::vector<BankScalingPoint>& points) {
  std::vector<ResultRow> rows;
  for (const auto& p : points) {
    rows.push_back(
        {"bank-scaling", "banks" + std::to_string(p.banks) + "_bw", "MB/s", fmt_mbps(p.mbps)});
    rows.push_back({"bank-scaling", "banks" + std::to_string(p.banks) + "_speedup", "ratio",
                    fmt_ratio(p.speedup)});
  }
  return rows;
}

std::string render_csv(const std::vector<ResultRow>& rows) {
  std::string out = "experiment,metric,unit,value\n";
  for (const auto& r : rows)
    out += r.experiment + "," + r.metric + "," + r.unit + "," + r.value + "\n";
  return out;
}

std::string render_json(const std::vector<ResultRow>& rows, const json& detail) {
  json j;
  json arr = json::array();
  for (const auto& r : rows) {
    json e;
    e["experiment"] = r.experiment;
    e["metric"] = r.metric;
    e["unit"] = r.unit;
    e["value"] = r.value;
    arr.push_back(e);
  }
  j["rows"] = arr;
  if (!detail.is_null()) j["detail"] = detail;
  return j.dump(2) + "\n";
}

void emit_results(const std::vector<ResultRow>& rows, const std::string& path,
                  std::optional<EmitFormat> format, const json& detail) {
  EmitFormat f = format.value_or(path.size() >= 5 && path.substr(path.size() - 5) == ".json"
                                     ? EmitFormat::kJson
                                     : EmitFormat::kCsv);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write results to " + path);
  out << (f == EmitFormat::kJson ? render_json(rows, detail) : render_csv(rows));
  if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace banksim::harness
