"""
Run configuration: a YAML document with physics sections and one block per command.

Every section is checked against a fixed key set; an unknown key raises
:class:`ConfigError` naming it. Frequencies are GHz (angular / 2pi), coherence
times microseconds, durations ns.
"""
from __future__ import annotations

import copy
import hashlib
import json
from importlib import resources
from pathlib import Path

import numpy as np
import yaml

from .device import DeviceParams
from .dynamics import CoherenceParams
from .errors import ConfigError
from .hilbert import ModeDims

DEFAULTS = {
    "device": {
        "omega": None, "alpha": None, "g1c": None, "g2c": None, "g12": 0.0,
        "levels": [4, 4, 4],
    },
    "coherence": {"t1": None, "t2_ramsey": None, "t2_echo": None},
    "drive": {
        "omega_d": None, "amp": 0.0,
        "shape": {"kind": "flat_top_gaussian", "sigma": 10.0, "edge_sigmas": 2.0,
                  "lifted": False},
    },
    "seed": 0,
    "spectrum": {"include_g12": True},
    "cas_rates": {"amps": [0.01, 0.02, 0.03, 0.04, 0.05, 0.06, 0.07, 0.075, 0.08],
                  "window": 0.030, "points": 201, "both_g12_variants": True},
    "chevron": {"amp": 0.072, "transition": "blue", "include_g12": True,
                "delta_min": -0.010, "delta_max": 0.010, "delta_points": 11,
                "tau_min": 0.0, "tau_max": 2000.0, "tau_points": 21, "levels": None},
    "zz_map": {
        "x_min": 0.5, "x_max": 5.0, "x_points": 40,
        "y_min": 0.005, "y_max": 0.2, "y_points": 40,
        "omega2": 5.0, "coupler_offset": 0.6, "g12": None, "g12_ratio": 1.0,
        "modes": ["cas_blue", "cross_resonance"], "levels": [4, 4, 4],
        "driven": {"amp": 0.0073, "delta_min": -0.020, "delta_max": 0.020, "points": 81,
                   "min_abs_delta": 0.0005, "xi0_source": "diagonalization"},
    },
    "calibrate_cz": {"amp": 0.075, "include_g12": True, "t2_choices": ["ramsey", "echo"],
                     "plateau_step": 0.5, "edge_step": 0.25},
}

REQUIRED = {"device": ("omega", "alpha", "g1c", "g2c")}


def _merge(defaults: dict, given: dict, path: str) -> dict:
    if not isinstance(given, dict):
        raise ConfigError(f"section '{path}' must be a mapping")
    out = copy.deepcopy(defaults)
    for key, val in given.items():
        full = f"{path}.{key}" if path else key
        if key not in defaults:
            err = ConfigError(f"unknown config key '{full}'")
            err.key = full
            raise err
        if isinstance(defaults[key], dict) and val is not None:
            out[key] = _merge(defaults[key], val, full)
        else:
            out[key] = val
    return out


def load_config(path) -> dict:
    """Read and validate a config file; returns the merged dictionary."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return parse_config(text)


def parse_config(text: str) -> dict:
    try:
        raw = yaml.safe_load(text) or {}
    except yaml.YAMLError as exc:
        raise ConfigError(f"config is not valid YAML: {exc}") from exc
    cfg = _merge(DEFAULTS, raw, "")
    for section, keys in REQUIRED.items():
        for k in keys:
            if cfg[section][k] is None:
                err = ConfigError(f"missing required config key '{section}.{k}'")
                err.key = f"{section}.{k}"
                raise err
    # fail early on physically invalid values
    device_from(cfg)
    if any(cfg["coherence"][k] is not None for k in cfg["coherence"]):
        coherence_from(cfg)
    return cfg


def config_hash(cfg: dict) -> str:
    blob = json.dumps(cfg, sort_keys=True, default=str).encode()
    return hashlib.sha256(blob).hexdigest()


def device_from(cfg: dict, levels=None) -> DeviceParams:
    d = cfg["device"]
    try:
        return DeviceParams(omega=tuple(d["omega"]), alpha=tuple(d["alpha"]),
                            g1c=d["g1c"], g2c=d["g2c"], g12=d["g12"] or 0.0,
                            dims=ModeDims(tuple(levels or d["levels"])))
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid device section: {exc}") from exc


def coherence_from(cfg: dict) -> CoherenceParams:
    c = cfg["coherence"]
    missing = [k for k, v in c.items() if v is None]
    if missing:
        raise ConfigError(f"missing coherence keys {missing}")
    try:
        return CoherenceParams(tuple(c["t1"]), tuple(c["t2_ramsey"]), tuple(c["t2_echo"]))
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid coherence section: {exc}") from exc


def axis(block: dict, name: str) -> np.ndarray:
    """``linspace(name_min, name_max, name_points)``; an empty axis is a config error."""
    lo, hi, n = block[f"{name}_min"], block[f"{name}_max"], block[f"{name}_points"]
    if n is None or int(n) < 1 or (int(n) > 1 and not hi > lo):
        raise ConfigError(f"empty sweep range for '{name}'")
    return np.linspace(float(lo), float(hi), int(n))


def bundled_config(name: str) -> Path:
    """Path of a shipped default config (``paper-device`` or ``fig4-background``)."""
    ref = resources.files("transmon_cas") / "data" / f"{name}.yaml"
    return Path(str(ref))
