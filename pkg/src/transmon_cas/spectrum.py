"""
Exact diagonalization: labeled spectra, static and drive-tuned ZZ, CAS rates
from anticrossings, ac Stark shifts and design-space maps.

Energies come out of the Hamiltonians in rad/ns; every public quantity here is
returned as an ordinary frequency in GHz.
"""
from __future__ import annotations

import csv
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.optimize import linear_sum_assignment, minimize_scalar

from .device import (TWO_PI, DeviceParams, DriveParams, build_rotating_hamiltonian,
                     build_static_hamiltonian)
from .errors import CasError, LabelAmbiguous, NoAnticrossing, SingularDenominator
from .hilbert import ModeDims, all_labels, as_dims, basis_index
from .swt import (analytic_cas_rates, analytic_weak_drive_frequencies,
                  transition_pair)

ZZ_LABELS = [(0, 0, 0), (1, 0, 0), (0, 1, 0), (1, 1, 0)]
TIE_TOL = 1e-6


@dataclass
class LabeledSpectrum:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    label_of: dict
    overlaps: dict
    dims: ModeDims

    def energy(self, label) -> float:
        """Eigenvalue tagged with ``label``, rad/ns."""
        return float(self.eigenvalues[self.label_of[tuple(label)]])

    def state(self, label) -> np.ndarray:
        return self.eigenvectors[:, self.label_of[tuple(label)]]


@dataclass(frozen=True)
class ZzReport:
    xi_zz: float
    xi_0_analytic: float
    g_eff: float
    method: str


def diagonalize_and_label(H: np.ndarray, dims, labels: Optional[Sequence] = None,
                          min_overlap: float = 0.5) -> LabeledSpectrum:
    """Dense eigendecomposition with greedy maximum-overlap labeling.

    Candidate (label, eigenvector) pairs are taken in order of decreasing
    ``|<label|v>|**2``; a label is rejected if its best overlap is below
    ``min_overlap`` or two eigenvectors tie for it.
    """
    dims = as_dims(dims)
    labels = all_labels(dims) if labels is None else [tuple(l) for l in labels]
    if np.count_nonzero(H - np.diag(np.diag(H))) == 0:
        # already diagonal: sort exactly instead of calling the eigensolver
        order = np.argsort(np.real(np.diag(H)), kind="stable")
        evals = np.real(np.diag(H))[order]
        evecs = np.eye(len(order), dtype=complex)[:, order]
    else:
        evals, evecs = np.linalg.eigh(H)
    rows = [basis_index(dims, l) for l in labels]
    ov = np.abs(evecs[rows, :]) ** 2

    for r, lab in enumerate(labels):
        order = np.argsort(ov[r])[::-1]
        best, second = ov[r, order[0]], ov[r, order[1]]
        if best < min_overlap or best - second < TIE_TOL:
            raise LabelAmbiguous(lab, order[:2], (best, second))

    label_of, overlaps = {}, {}
    taken = set()
    for flat in np.argsort(ov, axis=None)[::-1]:
        r, n = divmod(int(flat), ov.shape[1])
        lab = labels[r]
        if lab in label_of or n in taken:
            continue
        if ov[r, n] < min_overlap:
            break
        label_of[lab] = n
        overlaps[lab] = float(ov[r, n])
        taken.add(n)
    missing = [l for l in labels if l not in label_of]
    if missing:
        r = labels.index(missing[0])
        order = np.argsort(ov[r])[::-1]
        raise LabelAmbiguous(missing[0], order[:2], ov[r, order[:2]])
    return LabeledSpectrum(evals, evecs, label_of, overlaps, dims)


def dressed_basis(H: np.ndarray, dims) -> np.ndarray:
    """Eigenvectors of ``H`` re-ordered so column ``n`` is the state tagged with bare index ``n``.

    Every eigenvector is assigned (an optimal one-to-one assignment on the
    overlaps), and each column's phase is fixed so that its bare component is
    real and positive.
    """
    dims = as_dims(dims)
    _, v = np.linalg.eigh(H)
    _, col = linear_sum_assignment(-np.abs(v) ** 2)
    v = v[:, col]
    return v * np.exp(-1j * np.angle(np.diag(v)))


# ---------------------------------------------------------------- static ZZ

def _zz_combination(spec: LabeledSpectrum) -> float:
    e = spec.energy
    return (e((1, 1, 0)) - e((1, 0, 0)) - e((0, 1, 0)) + e((0, 0, 0))) / TWO_PI


def static_zz_analytic(p: DeviceParams, include_g12: bool = True):
    """``(xi_0, g_eff)`` from the second-order dispersive formula, GHz."""
    w1, w2, wc = p.omega
    a1, a2 = p.alpha[0], p.alpha[1]
    d12 = w1 - w2
    for name, val in (("Delta_1c", w1 - wc), ("Delta_2c", w2 - wc),
                      ("Delta_12 + alpha_1", d12 + a1), ("alpha_2 - Delta_12", a2 - d12)):
        if val == 0:
            raise SingularDenominator(name, val)
    g_eff = 0.5 * p.g1c * p.g2c * (1 / (w1 - wc) + 1 / (w2 - wc))
    if include_g12:
        g_eff += p.g12
    xi0 = 2 * g_eff ** 2 * (a1 + a2) / ((d12 + a1) * (a2 - d12))
    return float(xi0), float(g_eff)


def zz_strength(p: DeviceParams, include_g12: bool = True) -> ZzReport:
    """``E110 - E100 - E010 + E000`` of the static Hamiltonian, GHz."""
    spec = diagonalize_and_label(build_static_hamiltonian(p, include_g12), p.dims, ZZ_LABELS)
    xi0, g_eff = static_zz_analytic(p, include_g12)
    return ZzReport(_zz_combination(spec), xi0, g_eff, "diagonalization")


# ------------------------------------------------------------ CAS anticrossing

@dataclass(frozen=True)
class AcStark:
    delta_c_ac: float
    omega_b_tilde: float
    omega_r_tilde: float


def ac_stark_shift(p: DeviceParams, d: DriveParams) -> AcStark:
    """Coupler ac Stark shift and the shifted CAS transition frequencies, GHz."""
    ac = p.alpha[2]
    dc = p.omega[2] - d.omega_d
    if dc == 0:
        raise SingularDenominator("delta_c", dc)
    if dc + ac == 0:
        raise SingularDenominator("delta_c + alpha_c", dc + ac)
    shift = ac * d.amp ** 2 / (2 * dc * (dc + ac))
    wd = analytic_weak_drive_frequencies(p)
    return AcStark(float(shift), wd.omega_b_prime + shift, wd.omega_r_prime + shift)


def stark_resonance_estimate(p: DeviceParams, amp: float, transition: str = "blue",
                             iterations: int = 5) -> float:
    """Self-consistent ``w_d = w~(w_d)`` for the ac-Stark-shifted transition."""
    wd = analytic_weak_drive_frequencies(p)
    w = wd.omega_b_prime if transition == "blue" else wd.omega_r_prime
    for _ in range(iterations):
        st = ac_stark_shift(p, DriveParams(w, amp))
        w = st.omega_b_tilde if transition == "blue" else st.omega_r_tilde
    return float(w)


def branch_splitting(p: DeviceParams, amp: float, omega_d: float,
                     transition: str = "blue", include_g12: bool = True) -> float:
    """Gap between the two dressed branches carrying the transition pair, GHz."""
    a, b = transition_pair(transition)
    h = build_rotating_hamiltonian(p, DriveParams(omega_d, amp), include_g12)
    e, v = np.linalg.eigh(h)
    w = np.abs(v[basis_index(p.dims, a)]) ** 2 + np.abs(v[basis_index(p.dims, b)]) ** 2
    top = np.argsort(w)[-2:]
    return float(abs(e[top[1]] - e[top[0]]) / TWO_PI)


@dataclass(frozen=True)
class NumericCasRate:
    rate: float
    omega_resonance: float
    transition: str
    scan: np.ndarray = field(repr=False, default=None)
    splittings: np.ndarray = field(repr=False, default=None)


def cas_rate_numeric(p: DeviceParams, amp: float, transition: str = "blue",
                     include_g12: bool = True, center: Optional[float] = None,
                     window: float = 0.030, points: int = 201, resolution: float = 1e-6,
                     reverse: bool = False) -> NumericCasRate:
    """Minimum branch splitting over a drive-frequency scan, refined by golden section.

    Returns the splitting (the CAS rate) and the drive frequency where it
    occurs (the Stark-shifted transition frequency), both in GHz.
    """
    if amp <= 0:
        raise ValueError("drive amplitude must be positive")
    if center is None:
        center = stark_resonance_estimate(p, amp, transition)
    grid = np.linspace(center - window, center + window, points)
    if reverse:
        grid = grid[::-1]
    s = np.array([branch_splitting(p, amp, w, transition, include_g12) for w in grid])
    i = int(np.argmin(s))
    if i == 0 or i == len(grid) - 1:
        raise NoAnticrossing(
            f"{transition} splitting is smallest at the scan edge {grid[i]:.6f} GHz")
    lo, hi = sorted((grid[i - 1], grid[i + 1]))
    res = minimize_scalar(lambda w: branch_splitting(p, amp, w, transition, include_g12),
                          bracket=(lo, grid[i], hi), method="golden",
                          options={"xtol": resolution / abs(grid[i])})
    w_best, s_best = (res.x, res.fun) if res.fun <= s[i] else (grid[i], s[i])
    return NumericCasRate(float(s_best), float(w_best), transition, grid, s)


# ----------------------------------------------------------------- driven ZZ

def tunable_zz(p: DeviceParams, d: DriveParams, method: str = "analytic",
               include_g12: bool = True, xi0: Optional[float] = None,
               omega_b: Optional[float] = None) -> ZzReport:
    """ZZ under a continuous coupler drive, GHz.

    ``analytic``: ``xi0 - Omega_b**2 / (8 delta)`` with ``delta = w_d - w_b``;
    ``xi0`` defaults to the dispersive formula and ``w_b`` to the Stark-shifted
    blue frequency. ``numeric``: the four-energy combination of the
    rotating-frame Hamiltonian.
    """
    xi_a, g_eff = static_zz_analytic(p, include_g12)
    if method == "numeric":
        spec = diagonalize_and_label(build_rotating_hamiltonian(p, d, include_g12),
                                     p.dims, ZZ_LABELS)
        return ZzReport(_zz_combination(spec), xi_a, g_eff, "driven")
    if method != "analytic":
        raise ValueError(f"method must be 'analytic' or 'numeric', got {method!r}")
    base = xi_a if xi0 is None else xi0
    if d.amp == 0:
        return ZzReport(base, xi_a, g_eff, "analytic")
    wb = ac_stark_shift(p, d).omega_b_tilde if omega_b is None else omega_b
    delta = d.omega_d - wb
    if delta == 0:
        raise SingularDenominator("w_d - w_b", delta)
    ob = analytic_cas_rates(p, d.amp).omega_b_rate
    return ZzReport(float(base - ob ** 2 / (8 * delta)), xi_a, g_eff, "analytic")


# ---------------------------------------------------------------- design maps

MAP_MODES = ("cas_blue", "cross_resonance")
CSV_COLUMNS = ("delta12_over_alpha", "g_over_delta", "xi_zz_hz", "eta", "flags")


@dataclass(frozen=True)
class SweepSpec:
    """Grid and fixed background for a ZZ / drive-efficiency map.

    ``x_values`` is ``Delta_12/|alpha_mean|`` and ``y_values`` is the common
    ``|g_ic/Delta_ic|``. With ``include_g12`` the direct coupling is either
    ``g12`` (GHz) when given, or ``-g12_ratio`` times the coupler-mediated
    exchange at that grid point.
    """

    x_values: tuple
    y_values: tuple
    mode: str = "cas_blue"
    include_g12: bool = False
    g12: Optional[float] = None
    g12_ratio: float = 1.0
    omega2: float = 5.0
    coupler_offset: float = 0.6
    alpha: Optional[tuple] = None
    levels: tuple = (4, 4, 4)
    sw_limit: float = 0.3

    def __post_init__(self):
        if self.mode not in MAP_MODES:
            raise ValueError(f"mode must be one of {MAP_MODES}, got {self.mode!r}")
        if len(self.x_values) == 0 or len(self.y_values) == 0:
            raise ValueError("sweep axes must be non-empty")
        object.__setattr__(self, "x_values", tuple(float(x) for x in self.x_values))
        object.__setattr__(self, "y_values", tuple(float(y) for y in self.y_values))
        if self.alpha is None:
            alpha = (-0.20, -0.20, -0.45) if self.mode == "cas_blue" else (-0.30, -0.30, 0.0)
            object.__setattr__(self, "alpha", alpha)

    def device(self, x: float, y: float) -> DeviceParams:
        a_mean = abs(0.5 * (self.alpha[0] + self.alpha[1]))
        w1 = self.omega2 + a_mean * x
        wc = w1 + self.coupler_offset
        g1c, g2c = y * abs(w1 - wc), y * abs(self.omega2 - wc)
        p = DeviceParams((w1, self.omega2, wc), self.alpha, g1c, g2c, 0.0, ModeDims(self.levels))
        if self.include_g12:
            if self.g12 is not None:
                g12 = self.g12
            else:
                g12 = -self.g12_ratio * static_zz_analytic(p, include_g12=False)[1]
            p = p.with_updates(g12=g12)
        return p


@dataclass
class SweepGrid:
    x_axis: np.ndarray
    y_axis: np.ndarray
    xi_zz: np.ndarray
    eta: np.ndarray
    flags: np.ndarray
    mode: str
    include_g12: bool

    def rows(self):
        for i, x in enumerate(self.x_axis):
            for j, y in enumerate(self.y_axis):
                yield (x, y, self.xi_zz[i, j] * 1e9, self.eta[i, j], self.flags[i, j])

    def write_csv(self, path) -> int:
        return write_rows(path, CSV_COLUMNS, self.rows())


def _drive_efficiency(p: DeviceParams, mode: str) -> float:
    if mode == "cas_blue":
        return abs(analytic_cas_rates(p, 1.0).omega_b_rate)
    _, g_eff = static_zz_analytic(p, include_g12=True)
    d12, a1 = p.delta_12, p.alpha[0]
    if d12 == 0 or d12 + a1 == 0:
        raise SingularDenominator("Delta_12 (Delta_12 + alpha_1)", 0.0)
    return abs(2 * 2 * g_eff * a1 / (d12 * (d12 + a1)))


def _map_cell(spec: SweepSpec, x: float, y: float):
    flags = []
    if y > spec.sw_limit:
        flags.append("sw_invalid")
    xi = eta = np.nan
    try:
        p = spec.device(x, y)
    except (CasError, ValueError) as exc:
        flags.append(f"error:{type(exc).__name__}")
        return xi, eta, ";".join(flags)
    # the two quantities fail independently; eta never depends on g12
    try:
        xi = zz_strength(p, include_g12=spec.include_g12).xi_zz
    except (CasError, ValueError) as exc:
        flags.append(f"error:{type(exc).__name__}")
    try:
        eta = _drive_efficiency(p, spec.mode)
    except CasError as exc:
        flags.append(f"error:{type(exc).__name__}")
    return xi, eta, ";".join(flags)


def design_map(spec: SweepSpec, jobs: int = 1) -> SweepGrid:
    """ZZ and drive efficiency over the sweep grid; failing cells become NaN with a flag."""
    cells = [(x, y) for x in spec.x_values for y in spec.y_values]
    run = lambda c: _map_cell(spec, *c)  # noqa: E731
    if jobs > 1:
        with ThreadPoolExecutor(jobs) as pool:
            out = list(pool.map(run, cells))
    else:
        out = [run(c) for c in cells]
    shape = (len(spec.x_values), len(spec.y_values))
    xi = np.array([o[0] for o in out], dtype=float).reshape(shape)
    eta = np.array([o[1] for o in out], dtype=float).reshape(shape)
    flags = np.array([o[2] for o in out], dtype=object).reshape(shape)
    return SweepGrid(np.array(spec.x_values), np.array(spec.y_values), xi, eta, flags,
                     spec.mode, spec.include_g12)


def write_rows(path, header, rows) -> int:
    """Write a CSV with a header row; floats use ``repr`` so output is reproducible."""
    n = 0
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for row in rows:
            w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v
                        for v in row])
            n += 1
    return n
