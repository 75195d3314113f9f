import csv
import json
import time

import numpy as np
import pytest
import yaml

from transmon_cas.cli import CAS_COLUMNS, main
from transmon_cas.config import bundled_config, load_config, parse_config
from transmon_cas.errors import ConfigError
from transmon_cas.gates import CzRecord

DEVICE = {"omega": [5.641, 5.507, 6.317], "alpha": [-0.300, -0.303, -0.381],
          "g1c": 0.040, "g2c": 0.031, "g12": 0.0018, "levels": [3, 3, 3]}


def write_cfg(tmp_path, **sections):
    cfg = {"device": dict(DEVICE)}
    for k, v in sections.items():
        if k == "device":
            cfg["device"].update(v)
        else:
            cfg[k] = v
    path = tmp_path / "run.yaml"
    path.write_text(yaml.safe_dump(cfg))
    return path


def run(cmd, cfg, out, jobs=1):
    return main([cmd, "--config", str(cfg), "--out", str(out), "--jobs", str(jobs)])


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def error_line(capsys):
    return json.loads(capsys.readouterr().err.strip().splitlines()[-1])


# ---------------------------------------------------------------- config

def test_bundled_configs_load():
    for name in ("paper-device", "fig4-background"):
        cfg = load_config(bundled_config(name))
        assert cfg["device"]["omega"] == [5.641, 5.507, 6.317]


def test_unknown_key_exit_code(tmp_path, capsys):
    cfg = write_cfg(tmp_path, device={"omega_1": 5.6})
    assert run("spectrum", cfg, tmp_path / "out") == 2
    err = error_line(capsys)
    assert err["key"] == "device.omega_1" and err["kind"] == "config"
    assert not (tmp_path / "out" / "manifest.json").exists()


def test_missing_required_key():
    with pytest.raises(ConfigError) as err:
        parse_config("device: {omega: [5.6, 5.5, 6.3], alpha: [-0.3, -0.3, -0.38], g1c: 0.04}")
    assert err.value.key == "device.g2c"


def test_empty_sweep_exit_code(tmp_path, capsys):
    cfg = write_cfg(tmp_path, chevron={"tau_min": 100.0, "tau_max": 0.0, "tau_points": 5})
    assert run("chevron", cfg, tmp_path / "out") == 2
    assert "empty sweep" in error_line(capsys)["message"]
    cfg = write_cfg(tmp_path, cas_rates={"amps": []})
    assert run("cas-rates", cfg, tmp_path / "out") == 2


def test_model_error_exit_code(tmp_path, capsys):
    # coupler exactly between the qubit sums: degenerate levels
    cfg = write_cfg(tmp_path, device={"omega": [5.6, 5.6, 6.3]}, cas_rates={"amps": [0.05]})
    assert run("cas-rates", cfg, tmp_path / "out") == 1
    assert error_line(capsys)["kind"] == "model"


def test_bad_jobs(tmp_path):
    assert run("spectrum", write_cfg(tmp_path), tmp_path / "out", jobs=0) == 2


# ------------------------------------------------------------- commands

def test_spectrum_outputs(tmp_path):
    out = tmp_path / "out"
    assert run("spectrum", write_cfg(tmp_path), out) == 0
    rows = read_csv(out / "eigenenergies.csv")
    assert len(rows) == 27 and rows[0]["label"] == "000"
    rep = json.loads((out / "zz_report.json").read_text())
    assert rep["xi_zz_hz"] < 0
    man = json.loads((out / "manifest.json").read_text())
    assert man["command"] == "spectrum"
    assert {o["path"] for o in man["outputs"]} == {"eigenenergies.csv", "zz_report.json"}
    assert not list(out.glob(".manifest.*"))


def test_spectrum_decoupled(tmp_path):
    out = tmp_path / "out"
    cfg = write_cfg(tmp_path, device={"g1c": 0.0, "g2c": 0.0, "g12": 0.0})
    assert run("spectrum", cfg, out) == 0
    rep = json.loads((out / "zz_report.json").read_text())
    assert abs(rep["xi_zz_hz"]) < 1e-3
    rows = read_csv(out / "eigenenergies.csv")
    assert all(float(r["overlap"]) == 1.0 for r in rows)


def test_cas_rates_zero_amp(tmp_path):
    out = tmp_path / "out"
    cfg = write_cfg(tmp_path, cas_rates={"amps": [0.0, 0.05], "points": 81})
    assert run("cas-rates", cfg, out) == 0
    rows = read_csv(out / "cas_rates.csv")
    assert tuple(rows[0]) == CAS_COLUMNS
    zero = rows[0]
    for key in CAS_COLUMNS:
        if key.endswith("_mhz"):
            assert float(zero[key]) == 0.0
    assert float(rows[1]["numeric_blue_mhz"]) > 0
    assert rows[1]["status"] == "ok"


def test_chevron_smoke(tmp_path):
    out = tmp_path / "out"
    cfg = write_cfg(tmp_path, chevron={"levels": [2, 2, 2], "delta_points": 5, "tau_points": 5,
                                       "tau_max": 400.0})
    t0 = time.perf_counter()
    assert run("chevron", cfg, out) == 0
    assert time.perf_counter() - t0 < 10
    rows = read_csv(out / "chevron.csv")
    assert len(rows) == 25
    pops = [float(r[k]) for r in rows for k in r if k.startswith("p")]
    assert pops and all(0 <= v <= 1 + 1e-9 for v in pops)
    meta = json.loads((out / "chevron_meta.json").read_text())
    assert meta["transition"] == "blue"


def test_zz_map_deterministic(tmp_path):
    zz = {"x_points": 4, "y_points": 3, "levels": [3, 3, 3],
          "driven": {"points": 5, "amp": 0.0073}}
    cfg = write_cfg(tmp_path, zz_map=zz)
    a, b = tmp_path / "a", tmp_path / "b"
    assert run("zz-map", cfg, a, jobs=1) == 0
    assert run("zz-map", cfg, b, jobs=3) == 0
    for name in ("design_cas_with_g12.csv", "design_cas_no_g12.csv",
                 "design_cr_with_g12.csv", "design_cr_no_g12.csv", "driven_zz.csv"):
        assert (a / name).read_bytes() == (b / name).read_bytes()
    assert len(read_csv(a / "design_cas_with_g12.csv")) == 12
    ma = json.loads((a / "manifest.json").read_text())
    mb = json.loads((b / "manifest.json").read_text())
    assert ma["config_hash"] == mb["config_hash"]


@pytest.mark.slow
def test_calibrate_cz_record(tmp_path):
    out = tmp_path / "out"
    cfg = write_cfg(tmp_path, coherence={"t1": [95, 108, 15], "t2_ramsey": [76, 81, 15],
                                         "t2_echo": [88, 166, 18]},
                    calibrate_cz={"t2_choices": ["echo"]})
    assert run("calibrate-cz", cfg, out) == 0
    text = (out / "cz_calibration.json").read_text()
    rec = CzRecord.from_json(text)
    assert CzRecord.from_json(rec.to_json()) == rec
    assert 0.9 < rec.fbar_lindblad_echo < rec.fbar_coherent <= 1
    assert np.isfinite(rec.plateau_ns)
