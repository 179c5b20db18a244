"""Bank-aware DRAM bandwidth simulator: bank maps, regulation math, and
experiment runners backed by the C++ core."""

import json as _json

from . import _core as _c
from ._core import (
    BankMap,
    addresses_for_bank,
    budget_from_bandwidth,
    guaranteed_bw_mbps,
    maps_equivalent,
    max_bandwidth_mbps,
    parse_map,
    platform_names,
    platform_spec,
    recover_map,
)

__all__ = [
    "BankMap",
    "addresses_for_bank",
    "budget_from_bandwidth",
    "guaranteed_bw_mbps",
    "maps_equivalent",
    "max_bandwidth_mbps",
    "parse_map",
    "platform_names",
    "platform_spec",
    "recover_map",
    "run_experiment",
    "sweep_bank_scaling",
    "sweep_mlp",
]


def _as_text(config):
    return config if isinstance(config, str) else _json.dumps(config)


def run_experiment(config):
    """Solo-then-contended run. `config` is a dict or JSON text with the
    same schema as the CLI config files; returns the result as a dict."""
    return _json.loads(_c.run_experiment(_as_text(config)))


def sweep_mlp(config):
    """PLL bandwidth over the configured list counts, SB/AB x 1/4 cores."""
    return _json.loads(_c.sweep_mlp(_as_text(config)))


def sweep_bank_scaling(config):
    """Regulated best-effort throughput over the configured bank counts."""
    return _json.loads(_c.sweep_bank_scaling(_as_text(config)))
