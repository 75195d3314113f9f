"""
Command-line front end.

    transmon-cas <command> --config run.yaml --out results/ [--jobs N]

Commands: ``spectrum``, ``cas-rates``, ``chevron``, ``zz-map``, ``calibrate-cz``.
All physics comes from the config file. Every successful run ends with an
atomically written ``manifest.json``. Exit codes: 0 success, 1 model or
numerical failure, 2 configuration error; failures also print one JSON line
on stderr.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile
import time
from pathlib import Path

import numpy as np

from . import __version__
from .config import axis, coherence_from, config_hash, device_from, load_config
from .device import DriveParams, build_static_hamiltonian
from .dynamics import chevron_scan, default_cas_shape, fit_oscillation
from .errors import CasError, ConfigError
from .gates import CzRecord, average_gate_fidelity, calibrate_cz, channel_superoperator
from .hilbert import all_labels
from .spectrum import (SweepSpec, ac_stark_shift, cas_rate_numeric, design_map, dressed_basis,
                       tunable_zz, write_rows, zz_strength)
from .swt import analytic_cas_rates, analytic_weak_drive_frequencies, effective_cas_rate

HZ = 1e9
MHZ = 1e3


def _write_json(path: Path, obj) -> int:
    path.write_text(json.dumps(obj, indent=2, sort_keys=True, default=float) + "\n",
                    encoding="utf-8")
    return 1


# ------------------------------------------------------------------ commands

def cmd_spectrum(cfg, out: Path, jobs: int = 1):
    p = device_from(cfg)
    inc = cfg["spectrum"]["include_g12"]
    h = build_static_hamiltonian(p, inc)
    v = dressed_basis(h, p.dims)
    energies = np.real(np.einsum("in,ij,jn->n", v.conj(), h, v)) / (2 * np.pi)
    rows = [("".join(map(str, lab)), energies[n], abs(v[n, n]) ** 2)
            for n, lab in enumerate(all_labels(p.dims))]
    files = [("eigenenergies.csv",
              write_rows(out / "eigenenergies.csv", ("label", "energy_ghz", "overlap"), rows))]
    zz = zz_strength(p, inc)
    zz_no = zz_strength(p, include_g12=False)
    wd = analytic_weak_drive_frequencies(p)
    report = {
        "xi_zz_hz": zz.xi_zz * HZ,
        "xi_zz_no_g12_hz": zz_no.xi_zz * HZ,
        "xi0_analytic_hz": zz.xi_0_analytic * HZ,
        "g_eff_hz": zz.g_eff * HZ,
        "include_g12": inc,
        "omega_b_prime_ghz": wd.omega_b_prime,
        "omega_r_prime_ghz": wd.omega_r_prime,
    }
    files.append(("zz_report.json", _write_json(out / "zz_report.json", report)))
    return files


CAS_COLUMNS = ("amp_mhz", "analytic_blue_mhz", "analytic_red_mhz", "sw_blue_mhz", "sw_red_mhz",
               "numeric_blue_mhz", "numeric_red_mhz", "resonance_blue_ghz", "resonance_red_ghz",
               "stark_blue_ghz", "stark_red_ghz", "numeric_blue_no_g12_mhz",
               "numeric_red_no_g12_mhz", "status")


def _cas_row(p, amp, block):
    an = analytic_cas_rates(p, amp)
    row = {"amp_mhz": amp * MHZ, "analytic_blue_mhz": an.omega_b_rate * MHZ,
           "analytic_red_mhz": an.omega_r_rate * MHZ,
           "sw_blue_mhz": effective_cas_rate(p, amp, "blue") * MHZ,
           "sw_red_mhz": effective_cas_rate(p, amp, "red") * MHZ}
    status = []
    if amp == 0:
        wd = analytic_weak_drive_frequencies(p)
        row.update(numeric_blue_mhz=0.0, numeric_red_mhz=0.0,
                   resonance_blue_ghz=wd.omega_b_prime, resonance_red_ghz=wd.omega_r_prime,
                   stark_blue_ghz=wd.omega_b_prime, stark_red_ghz=wd.omega_r_prime,
                   numeric_blue_no_g12_mhz=0.0, numeric_red_no_g12_mhz=0.0)
        row["status"] = "ok"
        return row
    for tr in ("blue", "red"):
        for inc, suffix in ((True, ""), (False, "_no_g12")):
            key = f"numeric_{tr}{suffix}_mhz"
            if not inc and not block["both_g12_variants"]:
                row[key] = float("nan")
                continue
            try:
                r = cas_rate_numeric(p, amp, tr, inc, window=block["window"],
                                     points=block["points"])
                row[key] = r.rate * MHZ
                if inc:
                    row[f"resonance_{tr}_ghz"] = r.omega_resonance
                    st = ac_stark_shift(p, DriveParams(r.omega_resonance, amp))
                    row[f"stark_{tr}_ghz"] = st.omega_b_tilde if tr == "blue" else st.omega_r_tilde
            except CasError as exc:
                status.append(f"{tr}{suffix}:{type(exc).__name__}")
                row[key] = float("nan")
                if inc:
                    row[f"resonance_{tr}_ghz"] = row[f"stark_{tr}_ghz"] = float("nan")
    row["status"] = ";".join(status) or "ok"
    return row


def cmd_cas_rates(cfg, out: Path, jobs: int = 1):
    p = device_from(cfg)
    block = cfg["cas_rates"]
    amps = [float(a) for a in block["amps"] or []]
    if not amps:
        raise ConfigError("empty sweep range for 'cas_rates.amps'")
    if any(a < 0 for a in amps):
        raise ConfigError("cas_rates.amps must be non-negative")
    rows = _map(lambda a: _cas_row(p, a, block), amps, jobs)
    n = write_rows(out / "cas_rates.csv", CAS_COLUMNS, ([r[c] for c in CAS_COLUMNS] for r in rows))
    return [("cas_rates.csv", n)]


def cmd_chevron(cfg, out: Path, jobs: int = 1):
    block = cfg["chevron"]
    p = device_from(cfg, block["levels"])
    deltas, taus = axis(block, "delta"), axis(block, "tau")
    amp = float(block["amp"])
    shape = cfg["drive"]["shape"]
    sh = default_cas_shape(amp, shape["sigma"], shape["lifted"])
    tr = block["transition"]
    res = cas_rate_numeric(p, amp, tr, block["include_g12"])
    grid = chevron_scan(p, amp, deltas, taus, tr, res.omega_resonance, sh,
                        block["include_g12"], jobs=jobs)
    files = [("chevron.csv", grid.write_csv(out / "chevron.csv")),
             ("chevron_matrix.csv", grid.write_matrix(out / "chevron_matrix.csv"))]
    i0 = int(np.argmin(np.abs(deltas)))
    meta = {"omega_center_ghz": grid.omega_center, "transition": tr, "amp_ghz": amp,
            "anticrossing_rate_mhz": res.rate * MHZ,
            "resonance_row_delta_mhz": float(deltas[i0] * MHZ),
            "errors": grid.errors}
    try:
        fit = fit_oscillation(taus, grid.population[i0])
        meta.update(fit_frequency_mhz=fit.frequency * MHZ, fit_low_confidence=fit.low_confidence)
    except CasError as exc:
        meta["fit_error"] = str(exc)
    files.append(("chevron_meta.json", _write_json(out / "chevron_meta.json", meta)))
    return files


def _sign_changes(x, y):
    ok = np.isfinite(y)
    x, y = x[ok], y[ok]
    out = []
    for i in range(len(y) - 1):
        if y[i] == 0 or np.sign(y[i]) != np.sign(y[i + 1]):
            out.append(float(x[i] - y[i] * (x[i + 1] - x[i]) / (y[i + 1] - y[i])))
    return out


def driven_zz_curve(p, block, jobs: int = 1):
    """Numeric and dispersive driven ZZ vs detuning from each method's own resonance."""
    amp = float(block["amp"])
    deltas = axis(block | {"delta_points": block["points"]}, "delta")
    deltas = deltas[np.abs(deltas) >= block["min_abs_delta"]]
    res = cas_rate_numeric(p, amp, "blue")
    wb_analytic = ac_stark_shift(p, DriveParams(res.omega_resonance, amp)).omega_b_tilde
    if block["xi0_source"] == "diagonalization":
        xi0 = zz_strength(p).xi_zz
    elif block["xi0_source"] == "analytic":
        xi0 = None
    else:
        raise ConfigError("zz_map.driven.xi0_source must be 'diagonalization' or 'analytic'")

    def point(dl):
        try:
            num = tunable_zz(p, DriveParams(res.omega_resonance + dl, amp), "numeric").xi_zz
        except CasError:
            num = float("nan")
        ana = tunable_zz(p, DriveParams(wb_analytic + dl, amp), "analytic", xi0=xi0,
                         omega_b=wb_analytic).xi_zz
        return num, ana

    vals = _map(point, list(deltas), jobs)
    num = np.array([v[0] for v in vals])
    ana = np.array([v[1] for v in vals])
    report = {"amp_ghz": amp, "numeric_resonance_ghz": res.omega_resonance,
              "analytic_resonance_ghz": wb_analytic, "omega_b_numeric_mhz": res.rate * MHZ,
              "xi0_hz": (xi0 if xi0 is not None else zz_strength(p).xi_0_analytic) * HZ,
              "xi0_source": block["xi0_source"]}
    for name, sel in (("negative", deltas < 0), ("positive", deltas > 0)):
        report[f"numeric_zero_crossings_{name}_mhz"] = [z * MHZ for z in _sign_changes(deltas[sel], num[sel])]
        report[f"analytic_zero_crossings_{name}_mhz"] = [z * MHZ for z in _sign_changes(deltas[sel], ana[sel])]
    return deltas, num, ana, report


def cmd_zz_map(cfg, out: Path, jobs: int = 1):
    block = cfg["zz_map"]
    xs, ys = axis(block, "x"), axis(block, "y")
    files = []
    names = {"cas_blue": "cas", "cross_resonance": "cr"}
    for mode in block["modes"]:
        if mode not in names:
            raise ConfigError(f"unknown zz_map mode '{mode}'")
        for inc in (True, False):
            spec = SweepSpec(tuple(xs), tuple(ys), mode, inc, block["g12"], block["g12_ratio"],
                             block["omega2"], block["coupler_offset"],
                             levels=tuple(block["levels"]))
            grid = design_map(spec, jobs)
            name = f"design_{names[mode]}_{'with' if inc else 'no'}_g12.csv"
            files.append((name, grid.write_csv(out / name)))
    p = device_from(cfg)
    deltas, num, ana, report = driven_zz_curve(p, block["driven"], jobs)
    n = write_rows(out / "driven_zz.csv", ("delta_mhz", "xi_numeric_hz", "xi_analytic_hz"),
                   zip(deltas * MHZ, num * HZ, ana * HZ))
    files.append(("driven_zz.csv", n))
    files.append(("driven_zz_report.json", _write_json(out / "driven_zz_report.json", report)))
    return files


def cmd_calibrate_cz(cfg, out: Path, jobs: int = 1):
    block = cfg["calibrate_cz"]
    p = device_from(cfg)
    shape = cfg["drive"]["shape"]
    amp = float(block["amp"])
    inc = block["include_g12"]
    cal = calibrate_cz(p, amp, inc, sigma=shape["sigma"], lifted=shape["lifted"])
    f_coh, leak = average_gate_fidelity(channel_superoperator(p, cal, include_g12=inc))
    kw = {"fbar_coherent": f_coh, "leakage": leak}
    coherence = coherence_from(cfg)
    choices = list(block["t2_choices"])
    for ch in choices:
        if ch not in ("ramsey", "echo"):
            raise ConfigError(f"unknown t2 choice '{ch}'")

    def lindblad(ch):
        an = channel_superoperator(p, cal, coherence, ch, include_g12=inc,
                                   plateau_step=block["plateau_step"],
                                   edge_step=block["edge_step"])
        return average_gate_fidelity(an)

    results = _map(lindblad, choices, jobs)
    extra = {"predicted_controlled_phase": cal.predicted_controlled_phase, "p110": cal.p110}
    for ch, (f, lk) in zip(choices, results):
        kw[f"fbar_lindblad_{ch}"] = f
        extra[f"leakage_lindblad_{ch}"] = lk
    rec = CzRecord.from_calibration(cal, extra=extra, **kw)
    (out / "cz_calibration.json").write_text(rec.to_json() + "\n", encoding="utf-8")
    return [("cz_calibration.json", 1)]


COMMANDS = {
    "spectrum": cmd_spectrum,
    "cas-rates": cmd_cas_rates,
    "chevron": cmd_chevron,
    "zz-map": cmd_zz_map,
    "calibrate-cz": cmd_calibrate_cz,
}


def _map(fn, items, jobs):
    if jobs > 1:
        from concurrent.futures import ThreadPoolExecutor
        with ThreadPoolExecutor(jobs) as pool:
            return list(pool.map(fn, items))
    return [fn(x) for x in items]


# ------------------------------------------------------------------ plumbing

def write_manifest(out: Path, manifest: dict) -> Path:
    """Write ``manifest.json`` via a temporary file and an atomic rename."""
    fd, tmp = tempfile.mkstemp(dir=out, prefix=".manifest.", suffix=".tmp")
    with os.fdopen(fd, "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    target = out / "manifest.json"
    os.replace(tmp, target)
    return target


def _error_line(kind: str, exc: Exception) -> None:
    rec = {"error": type(exc).__name__, "kind": kind, "message": str(exc)}
    if getattr(exc, "key", None):
        rec["key"] = exc.key
    print(json.dumps(rec), file=sys.stderr)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="transmon-cas", description=__doc__.split("\n\n")[0])
    ap.add_argument("command", choices=sorted(COMMANDS))
    ap.add_argument("--config", required=True, help="YAML run configuration")
    ap.add_argument("--out", default="out", help="output directory")
    ap.add_argument("--jobs", type=int, default=1, help="worker threads")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    t0 = time.perf_counter()
    try:
        if args.jobs < 1:
            raise ConfigError("--jobs must be at least 1")
        cfg = load_config(args.config)
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        files = COMMANDS[args.command](cfg, out, args.jobs)
    except ConfigError as exc:
        _error_line("config", exc)
        return 2
    except (CasError, ArithmeticError, np.linalg.LinAlgError, ValueError) as exc:
        _error_line("model", exc)
        return 1
    write_manifest(out, {
        "command": args.command,
        "config_hash": config_hash(cfg),
        "artifact_version": __version__,
        "wall_time_s": round(time.perf_counter() - t0, 3),
        "outputs": [{"path": name, "rows": rows} for name, rows in files],
    })
    return 0


if __name__ == "__main__":
    sys.exit(main())
