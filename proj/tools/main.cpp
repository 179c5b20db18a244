#include <cstdio>
#include <exception>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "banksim/harness.hpp"
#include "banksim/revmap.hpp"

namespace {

using banksim::harness::ExperimentConfig;
using banksim::harness::ResultRow;
using json = banksim::harness::json;

struct CommonArgs {
  std::string config_path;
  std::optional<uint64_t> seed;
  std::string out_path;
};

void add_common(CLI::App* cmd, CommonArgs& a) {
  cmd->add_option("--config", a.config_path, "Experiment config (JSON)");
  cmd->add_option("--seed", a.seed, "Override the config seed");
  cmd->add_option("--out", a.out_path, "Result file (.csv or .json)");
}

ExperimentConfig load(const CommonArgs& a) {
  ExperimentConfig cfg = a.config_path.empty() ? banksim::harness::default_config()
                                               : banksim::harness::load_config(a.config_path);
  if (a.seed) cfg.seed = *a.seed;
  return cfg;
}

void finish(const std::vector<ResultRow>& rows, const CommonArgs& a, const json& detail = json()) {
  std::cout << banksim::harness::render_csv(rows);
  if (!a.out_path.empty()) banksim::harness::emit_results(rows, a.out_path, std::nullopt, detail);
}

// Theory per Eq. 1 plus a measured single-bank PLL run at the largest
// configured list count.
int cmd_guaranteed_bw(const CommonArgs& a) {
  ExperimentConfig cfg = load(a);
  const double theory = banksim::guaranteed_bw_mbps(cfg.dram);

  ExperimentConfig c = cfg;
  c.duration = cfg.mlp_duration;
  c.reg_enabled = false;
  c.budgets_mbps.clear();
  c.partition_llc = false;
  c.core_domains.assign(cfg.core_domains.size(), 0);
  banksim::harness::WorkloadSpec w;
  w.kind = "pll";
  w.core = 0;
  w.banks = "0";
  w.lists = cfg.mlp_lists.back();
  auto m = banksim::harness::run_measurement(c, {w}, false);
  const double measured = m.workloads[0].bw_mbps;

  std::vector<ResultRow> rows;
  rows.push_back({"guaranteed-bw", "theory_bw", "MB/s", banksim::harness::fmt_mbps(theory)});
  rows.push_back({"guaranteed-bw", "measured_sb_bw", "MB/s", banksim::harness::fmt_mbps(measured)});
  rows.push_back(
      {"guaranteed-bw", "measured_over_theory", "ratio", banksim::harness::fmt_ratio(measured / theory)});
  finish(rows, a);
  return 0;
}

int cmd_mlp_sweep(const CommonArgs& a) {
  ExperimentConfig cfg = load(a);
  auto points = banksim::harness::sweep_mlp(cfg);
  finish(banksim::harness::rows_from_mlp(points), a);
  return 0;
}

int cmd_attack(const CommonArgs& a, const std::string& name) {
  ExperimentConfig cfg = load(a);
  auto result = banksim::harness::run_solo_then_contended(cfg);
  finish(banksim::harness::rows_from_experiment(name, result), a, result.to_json());
  return 0;
}

int cmd_bank_scaling(const CommonArgs& a) {
  ExperimentConfig cfg = load(a);
  auto points = banksim::harness::sweep_bank_scaling(cfg);
  finish(banksim::harness::rows_from_scaling(points), a);
  return 0;
}

int cmd_revmap(const CommonArgs& a, const std::string& map_arg, std::optional<int> samples) {
  ExperimentConfig cfg = load(a);
  banksim::harness::RevmapParams rp = cfg.revmap;
  if (!map_arg.empty()) rp.map = map_arg;
  if (samples) rp.samples_per_bank = *samples;

  banksim::DramConfig oracle;
  if (auto preset = banksim::revmap::platform_preset(rp.map)) {
    oracle = *preset;
  } else {
    oracle.tRC = rp.trc;
    oracle.map = banksim::parse_bank_map(rp.map, rp.addr_width);
    oracle.layout = banksim::RowColumnLayout::for_width(rp.addr_width);
  }

  std::vector<ResultRow> rows;
  json detail = json::array();
  for (int s = 0; s < std::max(rp.seeds, 1); ++s) {
    banksim::revmap::CampaignConfig cc;
    cc.samples_per_bank = rp.samples_per_bank;
    cc.repeats = rp.repeats;
    cc.seed = cfg.seed + static_cast<uint64_t>(s);
    auto result = banksim::revmap::recover_map(oracle, cc);

    const bool equivalent = banksim::maps_equivalent(result.recovered.map, oracle.map);
    std::printf("seed %llu: recovered %s\n", static_cast<unsigned long long>(cc.seed),
                result.recovered.map.to_spec().c_str());
    std::printf("  confidence %.4f, clusters %zu, probes %zu, equivalent %s\n",
                result.recovered.confidence, result.clusters.sets.size(), result.probes_issued,
                equivalent ? "yes" : "no");

    const std::string tag = "seed" + std::to_string(cc.seed);
    rows.push_back({"revmap", tag + "_confidence", "ratio",
                    banksim::harness::fmt_ratio(result.recovered.confidence)});
    rows.push_back({"revmap", tag + "_clusters", "count",
                    banksim::harness::fmt_count(result.clusters.sets.size())});
    rows.push_back({"revmap", tag + "_equivalent", "count",
                    banksim::harness::fmt_count(equivalent ? 1 : 0)});
    json e;
    e["seed"] = cc.seed;
    e["recovered"] = result.recovered.map.to_spec();
    e["confidence"] = result.recovered.confidence;
    e["clusters"] = result.clusters.sets.size();
    e["probes"] = result.probes_issued;
    e["equivalent"] = equivalent;
    detail.push_back(e);
  }
  if (!a.out_path.empty()) banksim::harness::emit_results(rows, a.out_path, std::nullopt, detail);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bank-aware DRAM bandwidth simulator and reverse-engineering toolkit"};
  app.require_subcommand(1);

  CommonArgs args;
  std::string revmap_map;
  std::optional<int> revmap_samples;

  auto* c_gbw = app.add_subcommand("guaranteed-bw", "Eq. 1 theory vs measured SB bandwidth");
  add_common(c_gbw, args);
  auto* c_mlp = app.add_subcommand("mlp-sweep", "PLL bandwidth over L in {1..16}, SB/AB x 1/4 cores");
  add_common(c_mlp, args);
  auto* c_attack = app.add_subcommand("attack", "Victim slowdown under unregulated attackers");
  add_common(c_attack, args);
  auto* c_reg = app.add_subcommand("regulate", "Victim slowdown under a bandwidth regulator");
  add_common(c_reg, args);
  auto* c_scale = app.add_subcommand("bank-scaling", "Regulated throughput over {1,2,4,8} banks");
  add_common(c_scale, args);
  auto* c_rev = app.add_subcommand("revmap", "Recover the bank map from timing probes");
  add_common(c_rev, args);
  c_rev->add_option("--map", revmap_map, "Platform preset (pi4/pi5/intel/agx) or map spec");
  c_rev->add_option("--samples", revmap_samples, "Samples per bank");

  CLI11_PARSE(app, argc, argv);

  try {
    if (c_gbw->parsed()) return cmd_guaranteed_bw(args);
    if (c_mlp->parsed()) return cmd_mlp_sweep(args);
    if (c_attack->parsed()) return cmd_attack(args, "attack");
    if (c_reg->parsed()) return cmd_attack(args, "regulate");
    if (c_scale->parsed()) return cmd_bank_scaling(args);
    if (c_rev->parsed()) return cmd_revmap(args, revmap_map, revmap_samples);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
