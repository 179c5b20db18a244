// Python bindings for the main operations: bank-map algebra, regulation
// arithmetic, map recovery, and the experiment runners.  Experiment entry
// points take and return JSON text; the banksim package wraps them in dicts.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "banksim/bankmap.hpp"
#include "banksim/dram.hpp"
#include "banksim/harness.hpp"
#include "banksim/regulator.hpp"
#include "banksim/revmap.hpp"
#include "banksim/rng.hpp"

namespace py = pybind11;
using namespace banksim;

namespace {

harness::ExperimentConfig config_from_text(const std::string& text) {
  return harness::config_from_json(nlohmann::ordered_json::parse(text));
}

DramConfig oracle_from_args(const std::string& map, uint32_t addr_width, uint32_t trc) {
  if (auto preset = revmap::platform_preset(map)) return *preset;
  DramConfig cfg;
  cfg.tRC = trc;
  cfg.map = parse_bank_map(map, addr_width);
  cfg.layout = RowColumnLayout::for_width(addr_width);
  return cfg;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "DRAM bank simulator core: bank maps, regulation math, experiment runners";

  py::class_<BankMap>(m, "BankMap")
      .def(py::init([](const std::string& spec, uint32_t addr_width) {
             return parse_bank_map(spec, addr_width);
           }),
           py::arg("spec"), py::arg("addr_width") = 32)
      .def_readonly("addr_width", &BankMap::addr_width)
      .def("n_banks", &BankMap::n_banks)
      .def("n_bits", &BankMap::n_bits)
      .def("masks", &BankMap::masks)
      .def("paddr_to_bank", &BankMap::paddr_to_bank, py::arg("paddr"))
      .def("truncated", &BankMap::truncated, py::arg("bits"))
      .def("to_spec", &BankMap::to_spec)
      .def("__repr__", [](const BankMap& bm) { return "BankMap('" + bm.to_spec() + "')"; });

  m.def(
      "parse_map",
      [](const std::string& spec, uint32_t addr_width) { return parse_bank_map(spec, addr_width); },
      py::arg("spec"), py::arg("addr_width") = 32);

  m.def("maps_equivalent", &maps_equivalent, py::arg("a"), py::arg("b"));

  m.def(
      "addresses_for_bank",
      [](const BankMap& map, uint32_t bank, size_t n, uint64_t seed, bool distinct_rows,
         uint32_t row_shift) {
        RowColumnLayout layout = RowColumnLayout::for_width(map.addr_width, row_shift);
        Rng rng(seed);
        return addresses_for_bank(map, layout, bank, n, distinct_rows, rng);
      },
      py::arg("map"), py::arg("bank"), py::arg("n"), py::arg("seed") = 1,
      py::arg("distinct_rows") = true, py::arg("row_shift") = 16);

  m.def(
      "guaranteed_bw_mbps",
      [](uint32_t trc_ns) {
        DramConfig cfg;
        cfg.tRC = trc_ns;
        return guaranteed_bw_mbps(cfg);
      },
      py::arg("trc_ns") = 47);

  m.def(
      "budget_from_bandwidth",
      [](double mbps, uint64_t period_cycles, double freq_hz, uint32_t granule_bytes) {
        const BudgetResult r = budget_from_bandwidth(mbps, period_cycles, freq_hz, granule_bytes);
        return py::make_tuple(r.n_acc, r.clamped);
      },
      py::arg("mbps"), py::arg("period_cycles"), py::arg("freq_hz") = 1e9,
      py::arg("granule_bytes") = 64);

  m.def("max_bandwidth_mbps", &max_bandwidth_mbps, py::arg("per_bank_mbps"), py::arg("n_banks"));

  m.def("platform_names", [] { return revmap::platform_names(); });

  m.def(
      "platform_spec",
      [](const std::string& name) {
        const auto preset = revmap::platform_preset(name);
        if (!preset) throw std::invalid_argument("unknown platform preset '" + name + "'");
        py::dict d;
        d["map"] = preset->map.to_spec();
        d["addr_width"] = preset->map.addr_width;
        d["trc_ns"] = preset->tRC;
        d["n_banks"] = preset->map.n_banks();
        return d;
      },
      py::arg("name"));

  m.def(
      "recover_map",
      [](const std::string& map, uint32_t addr_width, uint32_t trc_ns, int samples_per_bank,
         int repeats, uint64_t seed) {
        const DramConfig oracle = oracle_from_args(map, addr_width, trc_ns);
        revmap::CampaignConfig cc;
        cc.samples_per_bank = samples_per_bank;
        cc.repeats = repeats;
        cc.seed = seed;
        revmap::CampaignResult r;
        {
          py::gil_scoped_release release;
          r = revmap::recover_map(oracle, cc);
        }
        py::dict d;
        d["recovered"] = r.recovered.map.to_spec();
        d["confidence"] = r.recovered.confidence;
        d["rank_deficient"] = r.recovered.rank_deficient;
        d["clusters"] = r.clusters.sets.size();
        d["probes"] = r.probes_issued;
        d["equivalent"] = maps_equivalent(r.recovered.map, oracle.map);
        return d;
      },
      py::arg("map"), py::arg("addr_width") = 32, py::arg("trc_ns") = 47,
      py::arg("samples_per_bank") = 32, py::arg("repeats") = 4, py::arg("seed") = 1);

  m.def(
      "run_experiment",
      [](const std::string& config_json) {
        const harness::ExperimentConfig cfg = config_from_text(config_json);
        harness::ExperimentResult r;
        {
          py::gil_scoped_release release;
          r = harness::run_solo_then_contended(cfg);
        }
        return r.to_json().dump();
      },
      py::arg("config_json"));

  m.def(
      "sweep_mlp",
      [](const std::string& config_json) {
        const harness::ExperimentConfig cfg = config_from_text(config_json);
        std::vector<harness::MlpPoint> pts;
        {
          py::gil_scoped_release release;
          pts = harness::sweep_mlp(cfg);
        }
        nlohmann::ordered_json out = nlohmann::ordered_json::array();
        for (const auto& p : pts) {
          nlohmann::ordered_json e;
          e["config"] = p.config;
          e["lists"] = p.lists;
          e["mbps"] = p.mbps;
          out.push_back(e);
        }
        return out.dump();
      },
      py::arg("config_json"));

  m.def(
      "sweep_bank_scaling",
      [](const std::string& config_json) {
        const harness::ExperimentConfig cfg = config_from_text(config_json);
        std::vector<harness::BankScalingPoint> pts;
        {
          py::gil_scoped_release release;
          pts = harness::sweep_bank_scaling(cfg);
        }
        nlohmann::ordered_json out = nlohmann::ordered_json::array();
        for (const auto& p : pts) {
          nlohmann::ordered_json e;
          e["banks"] = p.banks;
          e["mbps"] = p.mbps;
          e["speedup"] = p.speedup;
          out.push_back(e);
        }
        return out.dump();
      },
      py::arg("config_json"));
}
