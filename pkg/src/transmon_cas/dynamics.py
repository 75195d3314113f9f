"""
Time-domain simulation of the driven triplet.

Two propagation routes are provided. ``method="rk"`` integrates with an
adaptive Dormand-Prince 8(5,3) pair (``scipy.integrate.solve_ivp``) and is the
reference. ``method="exp"`` / ``method="split"`` exploit the piecewise structure
of a flat-top pulse: constant stretches are exponentiated exactly, the Gaussian
edges use a fourth-order Magnus step, and for open systems the dissipator is
Strang-split around each unitary step. The second route is what makes full
gate channels at 64 levels affordable.

Times are in ns, rates in 1/ns, coherence times are given in microseconds.
"""
from __future__ import annotations

import csv
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
import scipy.sparse as sps
from scipy.integrate import solve_ivp
from scipy.optimize import curve_fit

from .device import DeviceParams, DriveParams, lab_hamiltonian, rotating_parts
from .errors import FitDiverged, NegativeDephasing, ToleranceNotMet
from .hilbert import basis_state, number_diagonals, site_operator
from .pulses import KINDS, PulseShape, envelope  # noqa: F401  (re-exported)
from .swt import transition_pair

EDGE_STEP = 0.25
PLATEAU_STEP = 0.5
_C1, _C2 = 0.5 - np.sqrt(3) / 6, 0.5 + np.sqrt(3) / 6


# ------------------------------------------------------------------ coherence

@dataclass(frozen=True)
class CoherenceParams:
    """T1, Ramsey T2* and echo T2 per transmon (Q1, Q2, Qc), in microseconds."""

    t1: tuple
    t2_ramsey: tuple
    t2_echo: tuple

    def __post_init__(self):
        for name in ("t1", "t2_ramsey", "t2_echo"):
            vals = tuple(float(v) for v in getattr(self, name))
            if len(vals) != 3:
                raise ValueError(f"{name} needs three entries")
            if any(v <= 0 for v in vals):
                raise ValueError(f"{name} entries must be positive")
            object.__setattr__(self, name, vals)

    def t2(self, choice: str = "ramsey") -> tuple:
        if choice == "ramsey":
            return self.t2_ramsey
        if choice == "echo":
            return self.t2_echo
        raise ValueError(f"t2 choice must be 'ramsey' or 'echo', got {choice!r}")

    def dephasing_rates(self, choice: str = "ramsey") -> np.ndarray:
        """Pure-dephasing rates ``1/T2 - 1/(2 T1)`` in 1/us."""
        t1 = np.array(self.t1)
        g = 1 / np.array(self.t2(choice)) - 1 / (2 * t1)
        if np.any(g < -1e-15):
            raise NegativeDephasing(f"T2 exceeds 2*T1 for modes {np.nonzero(g < -1e-15)[0].tolist()}")
        return np.clip(g, 0.0, None)

    def scaled(self, mode: int, factor: float) -> "CoherenceParams":
        """Scale all three times of one mode by ``factor``."""
        def f(v):
            v = list(v)
            v[mode] *= factor
            return tuple(v)
        return CoherenceParams(f(self.t1), f(self.t2_ramsey), f(self.t2_echo))


def measured_coherence() -> CoherenceParams:
    """Measured coherence times of the fabricated device."""
    return CoherenceParams(t1=(95, 108, 15), t2_ramsey=(76, 81, 15), t2_echo=(88, 166, 18))


@dataclass(frozen=True)
class CollapseOp:
    """Jump operator ``sqrt(rate) * operator``; ``rate`` in 1/ns."""

    mode: int
    kind: str
    rate: float
    operator: np.ndarray = field(repr=False)

    @property
    def matrix(self) -> np.ndarray:
        return np.sqrt(self.rate) * self.operator


def collapse_operators(p: DeviceParams, c: CoherenceParams,
                       t2_choice: str = "ramsey") -> list[CollapseOp]:
    """Relaxation ``sqrt(1/T1) a_i`` and dephasing ``sqrt(2 Gamma_phi) n_i`` per transmon."""
    gphi = c.dephasing_rates(t2_choice) * 1e-3
    ops = []
    for m in range(3):
        ops.append(CollapseOp(m, "relaxation", 1e-3 / c.t1[m], site_operator(p.dims, m, "lower")))
        if gphi[m] > 0:
            ops.append(CollapseOp(m, "dephasing", 2 * gphi[m], site_operator(p.dims, m, "number")))
    return ops


# ----------------------------------------------------------------- containers

@dataclass
class Trajectory:
    times: np.ndarray
    states: np.ndarray
    observables: dict = field(default_factory=dict)


def population_observables(dims, states: np.ndarray, labels: Sequence) -> dict:
    """Bare-state populations keyed by label string ``"ijk"``."""
    from .hilbert import basis_index
    out = {}
    for lab in labels:
        n = basis_index(dims, lab)
        if states.ndim == 2:
            out["".join(map(str, lab))] = np.abs(states[:, n]) ** 2
        else:
            out["".join(map(str, lab))] = np.real(states[:, n, n])
    return out


# ------------------------------------------------------ Hamiltonian callables

def _hamiltonian_fn(p, d: DriveParams, frame: str, include_g12: bool):
    if frame == "rotating":
        h0, xh = rotating_parts(p, d.omega_d, include_g12)
        return lambda t: h0 + d.amplitude_at(t) * xh
    if frame == "lab":
        return lab_hamiltonian(p, d, include_g12)
    raise ValueError(f"frame must be 'rotating' or 'lab', got {frame!r}")


def _expmh(h: np.ndarray, dt: float) -> np.ndarray:
    """``exp(-1j h dt)`` for Hermitian ``h``."""
    e, v = np.linalg.eigh(h)
    return (v * np.exp(-1j * e * dt)) @ v.conj().T


def _magnus4(h0, xh, amp_fn, t, dt):
    a1, a2 = amp_fn(t + _C1 * dt), amp_fn(t + _C2 * dt)
    h1, h2 = h0 + a1 * xh, h0 + a2 * xh
    heff = 0.5 * (h1 + h2) - 1j * (np.sqrt(3) / 12) * dt * (h2 @ h1 - h1 @ h2)
    # heff is Hermitian up to rounding; symmetrize before eigh
    return _expmh(0.5 * (heff + heff.conj().T), dt)


def _pieces(d: DriveParams, t0: float, t1: float):
    """Split ``[t0, t1]`` at envelope segment boundaries: ``(a, b, constant)``."""
    if d.envelope is None:
        return [(t0, t1, True)]
    cuts = [(0.0, 0.0, True)] + d.envelope.segments()
    bounds = sorted({t0, t1, *[c for s in cuts for c in s[:2] if t0 < c < t1]})
    out = []
    for a, b in zip(bounds[:-1], bounds[1:]):
        mid = 0.5 * (a + b)
        const = True
        for s, e, is_const in d.envelope.segments():
            if s <= mid < e:
                const = is_const
                break
        out.append((a, b, const))
    return out


def unitary_steps(p: DeviceParams, d: DriveParams, t0: float, t1: float,
                  include_g12: bool = True, edge_step: float = EDGE_STEP,
                  const_step: float = np.inf):
    """Rotating-frame step propagators ``[(U, dt), ...]`` covering ``[t0, t1]``.

    Constant pieces use the exact exponential in chunks of at most
    ``const_step``; varying pieces use fourth-order Magnus steps of at most
    ``edge_step``. Repeated constant chunks share one matrix.
    """
    h0, xh = rotating_parts(p, d.omega_d, include_g12)
    steps = []
    for a, b, const in _pieces(d, t0, t1):
        length = b - a
        if length <= 0:
            continue
        if const:
            n = 1 if not np.isfinite(const_step) else max(1, int(np.ceil(length / const_step - 1e-9)))
            dt = length / n
            u = _expmh(h0 + float(d.amplitude_at(0.5 * (a + b))) * xh, dt)
            steps.extend([(u, dt)] * n)
        else:
            n = max(1, int(np.ceil(length / edge_step - 1e-9)))
            dt = length / n
            for k in range(n):
                steps.append((_magnus4(h0, xh, d.amplitude_at, a + k * dt, dt), dt))
    return steps


def pulse_unitary(p: DeviceParams, d: DriveParams, include_g12: bool = True,
                  edge_step: float = EDGE_STEP) -> np.ndarray:
    """Rotating-frame propagator over the whole pulse (bare basis)."""
    if d.envelope is None:
        raise ValueError("pulse_unitary needs a drive with an envelope")
    u = np.eye(p.dims.total, dtype=complex)
    for step, _ in unitary_steps(p, d, 0.0, d.envelope.duration, include_g12, edge_step):
        u = step @ u
    return u


# ---------------------------------------------------------------- Schrodinger

def evolve_schrodinger(p: DeviceParams, d: DriveParams, psi0, t_grid, frame: str = "rotating",
                       method: str = "rk", include_g12: bool = True, rtol: float = 1e-10,
                       atol: float = 1e-12, norm_tol: float = 1e-8,
                       labels: Optional[Sequence] = None) -> Trajectory:
    """Propagate a pure state; states sampled on ``t_grid`` (ns).

    ``method="exp"`` is only available in the rotating frame.
    """
    psi0 = np.asarray(psi0, dtype=complex)
    if abs(np.linalg.norm(psi0) - 1) > 1e-10:
        raise ValueError("psi0 must be normalized")
    t_grid = np.asarray(t_grid, dtype=float)
    if method == "rk":
        hf = _hamiltonian_fn(p, d, frame, include_g12)
        sol = solve_ivp(lambda t, y: -1j * (hf(t) @ y), (t_grid[0], t_grid[-1]), psi0,
                        method="DOP853", t_eval=t_grid, rtol=rtol, atol=atol)
        if not sol.success:
            raise ToleranceNotMet(sol.message)
        states = sol.y.T
    elif method == "exp":
        if frame != "rotating":
            raise ValueError("the piecewise-exponential propagator works in the rotating frame")
        states = [psi0]
        psi = psi0
        for a, b in zip(t_grid[:-1], t_grid[1:]):
            for u, _ in unitary_steps(p, d, a, b, include_g12):
                psi = u @ psi
            states.append(psi)
        states = np.array(states)
    else:
        raise ValueError(f"method must be 'rk' or 'exp', got {method!r}")
    norms = np.linalg.norm(states, axis=1)
    if np.max(np.abs(norms - 1)) > norm_tol:
        raise ToleranceNotMet(f"norm drift {np.max(np.abs(norms - 1)):.2e}")
    obs = population_observables(p.dims, states, labels) if labels else {}
    return Trajectory(t_grid, states, obs)


# ------------------------------------------------------------------- Lindblad

class Dissipator:
    """Lindblad dissipator for a fixed list of collapse operators, batched over ``(B, D, D)``."""

    def __init__(self, c_ops: Sequence[CollapseOp]):
        self.jumps = [sps.csr_matrix(c.matrix) for c in c_ops]
        dim = c_ops[0].operator.shape[0] if c_ops else 0
        cdc = sum((c.matrix.conj().T @ c.matrix for c in c_ops), np.zeros((dim, dim), complex))
        self.cdc = cdc
        self.diag = np.allclose(cdc, np.diag(np.diag(cdc)))
        self.cdc_d = np.real(np.diag(cdc)) if c_ops else None

    def __call__(self, rho: np.ndarray) -> np.ndarray:
        if not self.jumps:
            return np.zeros_like(rho)
        b, dim, _ = rho.shape
        flat = rho.transpose(1, 0, 2).reshape(dim, b * dim)
        out = np.zeros_like(rho)
        for c in self.jumps:
            left = (c @ flat).reshape(dim, b, dim).transpose(1, 0, 2)
            # (c rho) c^dagger, via the conjugate transpose
            lt = left.conj().transpose(2, 0, 1).reshape(dim, b * dim)
            out += (c @ lt).reshape(dim, b, dim).transpose(1, 2, 0).conj()
        if self.diag:
            out -= 0.5 * (self.cdc_d[None, :, None] + self.cdc_d[None, None, :]) * rho
        else:
            out -= 0.5 * (self.cdc @ rho + rho @ self.cdc)
        return out

    def step(self, rho: np.ndarray, dt: float) -> np.ndarray:
        """One classical RK4 step of ``drho/dt = D(rho)``."""
        k1 = self(rho)
        k2 = self(rho + 0.5 * dt * k1)
        k3 = self(rho + 0.5 * dt * k2)
        k4 = self(rho + dt * k3)
        return rho + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)


def propagate_density(p: DeviceParams, d: DriveParams, rhos: np.ndarray, c_ops, t0: float,
                      t1: float, include_g12: bool = True, edge_step: float = EDGE_STEP,
                      plateau_step: float = PLATEAU_STEP) -> np.ndarray:
    """Strang-split propagation of a batch of density matrices (or any operators)."""
    rhos = np.array(rhos, dtype=complex)
    single = rhos.ndim == 2
    if single:
        rhos = rhos[None]
    dis = Dissipator(c_ops)
    for u, dt in unitary_steps(p, d, t0, t1, include_g12, edge_step, plateau_step):
        if dis.jumps:
            rhos = dis.step(rhos, 0.5 * dt)
        rhos = u @ rhos @ u.conj().T
        if dis.jumps:
            rhos = dis.step(rhos, 0.5 * dt)
    return rhos[0] if single else rhos


def evolve_lindblad(p: DeviceParams, d: DriveParams, rho0, t_grid, c_ops=(),
                    method: str = "rk", frame: str = "rotating", include_g12: bool = True,
                    rtol: float = 1e-10, atol: float = 1e-12, trace_tol: float = 1e-8,
                    herm_tol: float = 1e-10, labels: Optional[Sequence] = None) -> Trajectory:
    """Lindblad master equation; density matrices sampled on ``t_grid`` (ns)."""
    rho0 = np.asarray(rho0, dtype=complex)
    dim = rho0.shape[0]
    if abs(np.trace(rho0) - 1) > 1e-10 or not np.allclose(rho0, rho0.conj().T, atol=1e-12):
        raise ValueError("rho0 must be Hermitian with unit trace")
    if np.linalg.eigvalsh(rho0).min() < -1e-10:
        raise ValueError("rho0 must be positive semidefinite")
    t_grid = np.asarray(t_grid, dtype=float)
    c_ops = list(c_ops)
    if method == "rk":
        hf = _hamiltonian_fn(p, d, frame, include_g12)
        dis = Dissipator(c_ops)

        def rhs(t, y):
            r = y.reshape(1, dim, dim)
            h = hf(t)
            return (-1j * (h @ r[0] - r[0] @ h) + dis(r)[0]).ravel()

        sol = solve_ivp(rhs, (t_grid[0], t_grid[-1]), rho0.ravel(), method="DOP853",
                        t_eval=t_grid, rtol=rtol, atol=atol)
        if not sol.success:
            raise ToleranceNotMet(sol.message)
        states = sol.y.T.reshape(-1, dim, dim)
    elif method == "split":
        if frame != "rotating":
            raise ValueError("the split propagator works in the rotating frame")
        states = [rho0]
        rho = rho0
        for a, b in zip(t_grid[:-1], t_grid[1:]):
            rho = propagate_density(p, d, rho, c_ops, a, b, include_g12)
            states.append(rho)
        states = np.array(states)
    else:
        raise ValueError(f"method must be 'rk' or 'split', got {method!r}")
    tr = np.abs(np.trace(states, axis1=1, axis2=2) - 1).max()
    if tr > trace_tol:
        raise ToleranceNotMet(f"trace drift {tr:.2e}")
    herm = max(np.linalg.norm(s - s.conj().T) for s in states)
    if herm > herm_tol:
        raise ToleranceNotMet(f"hermiticity drift {herm:.2e}")
    obs = population_observables(p.dims, states, labels) if labels else {}
    return Trajectory(t_grid, states, obs)


# -------------------------------------------------------------------- chevron

def default_cas_shape(amp: float, sigma: float = 10.0, lifted: bool = False) -> PulseShape:
    """Flat-top CAS pulse with 2-sigma Gaussian edges on each side."""
    return PulseShape("flat_top_gaussian", amplitude=amp, sigma=sigma, edge_sigmas=2.0,
                      lifted=lifted)


@dataclass
class ChevronGrid:
    deltas: np.ndarray      # GHz, relative to omega_center
    taus: np.ndarray        # plateau lengths, ns
    population: np.ndarray  # rows = deltas, columns = taus
    omega_center: float
    transition: str
    errors: dict = field(default_factory=dict)

    def write_csv(self, path) -> int:
        n = 0
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow(["delta_mhz", "tau_ns", "population"])
            for i, dl in enumerate(self.deltas):
                for j, tau in enumerate(self.taus):
                    w.writerow([repr(float(dl * 1e3)), repr(float(tau)),
                                repr(float(self.population[i, j]))])
                    n += 1
        return n

    def write_matrix(self, path) -> int:
        """Dense grid: header row of tau values, first column of delta values (MHz)."""
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow(["delta_mhz\\tau_ns"] + [repr(float(t)) for t in self.taus])
            for i, dl in enumerate(self.deltas):
                w.writerow([repr(float(dl * 1e3))] + [repr(float(v)) for v in self.population[i]])
        return len(self.deltas)


def _excited_marginal(dims, psi, mode):
    occ = number_diagonals(dims)[mode]
    return float(np.sum(np.abs(psi[occ == 1]) ** 2))


def _chevron_row(p, amp, omega_d, taus, shape, transition, include_g12, edge_step):
    a, _ = transition_pair(transition)
    mode = 1 if transition == "blue" else 0
    psi0 = basis_state(p.dims, a)
    d0 = DriveParams(omega_d, amp, shape.with_plateau(0.0))
    e = shape.edge_length
    rise = np.eye(p.dims.total, dtype=complex)
    for u, _ in unitary_steps(p, d0, 0.0, e, include_g12, edge_step):
        rise = u @ rise
    fall = np.eye(p.dims.total, dtype=complex)
    for u, _ in unitary_steps(p, d0, e, 2 * e, include_g12, edge_step):
        fall = u @ fall
    h0, xh = rotating_parts(p, omega_d, include_g12)
    ev, vec = np.linalg.eigh(h0 + amp * xh)
    c = vec.conj().T @ (rise @ psi0)
    fv = fall @ vec
    row = np.empty(len(taus))
    for j, tau in enumerate(taus):
        row[j] = _excited_marginal(p.dims, fv @ (np.exp(-1j * ev * tau) * c), mode)
    return row


def chevron_scan(p: DeviceParams, amp: float, delta_range, tau_range, transition: str = "blue",
                 omega_center: Optional[float] = None, shape: Optional[PulseShape] = None,
                 include_g12: bool = True, edge_step: float = EDGE_STEP,
                 jobs: int = 1) -> ChevronGrid:
    """Swapped-qubit excited population vs drive detuning and plateau length.

    Starts in ``|010>`` (blue) or ``|100>`` (red) and records the bare-basis
    population of Q2 (blue) or Q1 (red) in its first excited level after a
    flat-top pulse of plateau ``tau``. ``delta_range`` is in GHz relative to
    ``omega_center`` (default: the numeric anticrossing).
    """
    if omega_center is None:
        from .spectrum import cas_rate_numeric
        omega_center = cas_rate_numeric(p, amp, transition, include_g12).omega_resonance
    shape = default_cas_shape(amp) if shape is None else shape.with_amplitude(amp)
    deltas = np.asarray(delta_range, dtype=float)
    taus = np.asarray(tau_range, dtype=float)
    errors = {}

    def row(i):
        try:
            return _chevron_row(p, amp, omega_center + deltas[i], taus, shape, transition,
                                include_g12, edge_step)
        except (np.linalg.LinAlgError, ValueError) as exc:
            errors[i] = repr(exc)
            return np.full(len(taus), np.nan)

    idx = range(len(deltas))
    if jobs > 1:
        with ThreadPoolExecutor(jobs) as pool:
            rows = list(pool.map(row, idx))
    else:
        rows = [row(i) for i in idx]
    return ChevronGrid(deltas, taus, np.array(rows), float(omega_center), transition, errors)


# ------------------------------------------------------------------------ fit

@dataclass(frozen=True)
class OscillationFit:
    frequency: float  # 1/ns (GHz)
    amplitude: float
    phase: float
    offset: float
    decay: Optional[float] = None
    low_confidence: bool = False


def _cos_model(t, a, f, ph, c):
    return a * np.cos(2 * np.pi * f * t + ph) + c


def _decay_model(t, a, f, ph, c, tau):
    return a * np.exp(-t / tau) * np.cos(2 * np.pi * f * t + ph) + c


def fit_oscillation(tau, series, delta: Optional[float] = None,
                    decay: bool = False) -> OscillationFit:
    """Least-squares fit to ``A cos(2 pi f tau + phi) + C`` (optionally damped).

    The starting frequency is the FFT peak, refined by a parabola through the
    neighbouring bins. ``delta`` is only recorded context; it does not enter
    the fit. Fewer than three periods in the window mark the fit
    ``low_confidence``.
    """
    t = np.asarray(tau, dtype=float)
    y = np.asarray(series, dtype=float)
    if len(t) < 5:
        raise FitDiverged("need at least 5 samples")
    dt = np.mean(np.diff(t))
    n = 8 * len(t)
    spec = np.abs(np.fft.rfft(y - y.mean(), n))
    freqs = np.fft.rfftfreq(n, dt)
    k = int(np.argmax(spec[1:]) + 1)
    f0 = freqs[k]
    if 1 <= k < len(spec) - 1:
        a, b, c = spec[k - 1], spec[k], spec[k + 1]
        den = a - 2 * b + c
        if den != 0:
            f0 = freqs[k] + 0.5 * (a - c) / den * (freqs[1] - freqs[0])
    amp0 = 0.5 * (y.max() - y.min())
    c0 = y.mean()
    # phase guess from projection on the trial frequency
    z = np.sum((y - c0) * np.exp(-2j * np.pi * f0 * t))
    ph0 = float(np.angle(z))
    try:
        if decay:
            span = t[-1] - t[0]
            popt, _ = curve_fit(_decay_model, t, y, p0=[amp0, f0, ph0, c0, span],
                                maxfev=20000)
        else:
            popt, _ = curve_fit(_cos_model, t, y, p0=[amp0, f0, ph0, c0], maxfev=20000)
    except (RuntimeError, ValueError) as exc:
        raise FitDiverged(str(exc)) from exc
    if not np.all(np.isfinite(popt)):
        raise FitDiverged("non-finite fit parameters")
    a, f, ph, c = popt[:4]
    if f < 0:
        f, ph = -f, -ph
    if a < 0:
        a, ph = -a, ph + np.pi
    ph = float(np.angle(np.exp(1j * ph)))
    low = (t[-1] - t[0]) * f < 3
    return OscillationFit(float(f), float(a), ph, float(c),
                          float(popt[4]) if decay else None, bool(low))
