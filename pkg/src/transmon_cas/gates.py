"""
CZ gate from a 2pi round trip on the blue CAS transition.

Gate quantities are evaluated in the dressed computational basis: the
propagator is rotated into the eigenbasis of the undriven Hamiltonian, whose
states are tagged with bare labels ``|ij0>``. Single-qubit operations in the
JAZZ echo are ideal instantaneous rotations on levels 0 and 1.

Superoperators use column stacking: ``vec(rho)[i + D*j] = rho[i, j]``, so a
unitary ``M`` acts as ``kron(M.conj(), M)``.
"""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from functools import reduce
from typing import Optional, Sequence

import numpy as np
from scipy.optimize import minimize

from .device import DeviceParams, DriveParams, build_static_hamiltonian
from .dynamics import (EDGE_STEP, PLATEAU_STEP, CoherenceParams, collapse_operators,
                       default_cas_shape, propagate_density, pulse_unitary)
from .errors import FitDiverged, LeakageExceeded, OptimizationStalled
from .hilbert import as_dims, basis_index, computational_labels, number_diagonals
from .pulses import PulseShape
from .spectrum import cas_rate_numeric, dressed_basis


# -------------------------------------------------------------- dressed frame

def dressed_frame(p: DeviceParams, include_g12: bool = True) -> np.ndarray:
    """Columns are the undriven eigenstates, ordered by their bare labels."""
    return dressed_basis(build_static_hamiltonian(p, include_g12), p.dims)


def comp_indices(dims) -> list[int]:
    return [basis_index(dims, l) for l in computational_labels()]


@dataclass(frozen=True)
class GateDrive:
    """A candidate CAS pulse: drive frequency and amplitude (GHz), plateau (ns).

    ``sigma=0`` drops the Gaussian edges and gives a square pulse.
    """

    omega_d: float
    amp: float
    plateau: float
    sigma: float = 10.0
    lifted: bool = False

    def shape(self) -> PulseShape:
        if self.sigma == 0:
            # no edges: a square pulse of length ``plateau``
            return PulseShape("square", amplitude=self.amp, flat_duration=self.plateau)
        return default_cas_shape(self.amp, self.sigma, self.lifted).with_plateau(self.plateau)

    def drive(self) -> DriveParams:
        return DriveParams(self.omega_d, self.amp, self.shape())


def gate_unitary(p: DeviceParams, g: GateDrive, frame: Optional[np.ndarray] = None,
                 include_g12: bool = True, edge_step: float = EDGE_STEP) -> np.ndarray:
    """Pulse propagator in the dressed basis (rotating frame at ``omega_d``)."""
    v = dressed_frame(p, include_g12) if frame is None else frame
    if g.shape().duration == 0:
        return np.eye(p.dims.total, dtype=complex)
    u = pulse_unitary(p, g.drive(), include_g12, edge_step)
    return v.conj().T @ u @ v


# ------------------------------------------------------------ ideal rotations

def _on_mode(dims, mode, op2):
    dims = as_dims(dims)
    m = np.eye(dims[mode], dtype=complex)
    m[:2, :2] = op2
    mats = [np.eye(n) for n in dims]
    mats[mode] = m
    return reduce(np.kron, mats).astype(complex)


def x_gate(dims, mode) -> np.ndarray:
    """Ideal pi pulse on levels 0 and 1 of one mode."""
    return _on_mode(dims, mode, np.array([[0, 1], [1, 0]]))


def rotation(dims, mode, phi: float, theta: float = np.pi / 2) -> np.ndarray:
    """Ideal rotation by ``theta`` about ``cos(phi) X + sin(phi) Y`` on levels 0 and 1."""
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    r = np.array([[c, -1j * s * np.exp(-1j * phi)], [-1j * s * np.exp(1j * phi), c]])
    return _on_mode(dims, mode, r)


# ----------------------------------------------------------------------- JAZZ

def jazz_state(U: np.ndarray, dims, phi: float, control: int = 0) -> np.ndarray:
    """Final state of the echo for control qubit Q1 prepared in ``control``.

    ``pi/2 (Q2) -> U -> pi (Q1, Q2) -> U -> pi/2 at angle phi (Q2)``. With
    ``U`` the identity, Q2 ends in its ground state at ``phi = 0``.
    """
    psi = np.zeros(U.shape[0], dtype=complex)
    psi[basis_index(dims, (control, 0, 0))] = 1.0
    psi = rotation(dims, 1, 0.0) @ psi
    psi = U @ psi
    psi = x_gate(dims, 0) @ (x_gate(dims, 1) @ psi)
    psi = U @ psi
    return rotation(dims, 1, phi) @ psi


def q2_excited(dims, psi) -> float:
    occ = number_diagonals(dims)[1]
    return float(np.sum(np.abs(psi[occ == 1]) ** 2))


def coupler_population(dims, psi) -> float:
    occ = number_diagonals(dims)[2]
    return float(np.sum(np.abs(psi[occ > 0]) ** 2))


@dataclass
class JazzResult:
    controlled_phase: float          # c = 0 Ramsey phase, in [0, 2pi)
    phase_control1: float            # c = 1 Ramsey phase (ideally -controlled_phase)
    phi: np.ndarray
    signal: dict                     # control -> P(Q2 = 1) vs phi
    contrast: dict
    coupler_leakage: float
    leakage_flag: bool


def _fit_ramsey(phi, y):
    """``y = C - A cos(phi - theta)`` by linear least squares; returns ``(theta, A)``."""
    m = np.column_stack([np.ones_like(phi), np.cos(phi), np.sin(phi)])
    (c, a, b), *_ = np.linalg.lstsq(m, y, rcond=None)
    amp = np.hypot(a, b)
    return float(np.mod(np.arctan2(-b, -a), 2 * np.pi)), float(amp)


def simulate_jazz(p: DeviceParams, g: GateDrive, phi_grid: Optional[Sequence] = None,
                  U: Optional[np.ndarray] = None, include_g12: bool = True,
                  leakage_limit: float = 0.05, strict: bool = False,
                  min_contrast: float = 0.05) -> JazzResult:
    """Controlled phase from the JAZZ echo, fitted over the final rotation angle."""
    phi = np.linspace(0, 2 * np.pi, 25, endpoint=False) if phi_grid is None else np.asarray(phi_grid)
    if U is None:
        U = gate_unitary(p, g, include_g12=include_g12)
    sig, contrast, theta = {}, {}, {}
    for c in (0, 1):
        sig[c] = np.array([q2_excited(p.dims, jazz_state(U, p.dims, f, c)) for f in phi])
        theta[c], contrast[c] = _fit_ramsey(phi, sig[c])
        if contrast[c] < min_contrast:
            raise FitDiverged(f"JAZZ fringe contrast {contrast[c]:.3g} for control {c}")
    leak = 0.0
    for idx in comp_indices(p.dims):
        leak = max(leak, coupler_population(p.dims, U[:, idx]))
    flag = leak > leakage_limit
    if flag and strict:
        raise LeakageExceeded(f"coupler population {leak:.3f} after the CAS pulse")
    return JazzResult(theta[0], theta[1], phi, sig, contrast, leak, flag)


def jazz_objective(U: np.ndarray, dims) -> float:
    """``P(|110>)`` at ``phi = 0`` with the control in ``|0>``; 1 for an ideal CZ."""
    psi = jazz_state(U, dims, 0.0, 0)
    return float(abs(psi[basis_index(dims, (1, 1, 0))]) ** 2)


# --------------------------------------------------------------- calibration

@dataclass
class CzCalibration:
    omega_d: float
    plateau: float
    amp: float
    local_phases: tuple
    predicted_controlled_phase: float
    sigma: float = 10.0
    lifted: bool = False
    p110: float = float("nan")
    iterations: int = 0

    def drive(self) -> GateDrive:
        return GateDrive(self.omega_d, self.amp, self.plateau, self.sigma, self.lifted)


def diagonal_phases(U: np.ndarray, dims) -> np.ndarray:
    """Phases of ``<ab0|U|ab0>`` ordered 00, 01, 10, 11."""
    return np.angle(np.diag(U)[comp_indices(dims)])


def local_phases(U: np.ndarray, dims) -> tuple:
    ph = diagonal_phases(U, dims)
    return float(ph[2] - ph[0]), float(ph[1] - ph[0])


def controlled_phase_of(U: np.ndarray, dims) -> float:
    ph = diagonal_phases(U, dims)
    return float(np.mod(ph[0] - ph[1] - ph[2] + ph[3], 2 * np.pi))


def virtual_z(dims, theta1: float, theta2: float) -> np.ndarray:
    """Diagonal frame correction ``exp(-i (theta1 n1 + theta2 n2))``."""
    n = number_diagonals(dims)
    return np.diag(np.exp(-1j * (theta1 * n[0] + theta2 * n[1])))


def ideal_cz(dims) -> np.ndarray:
    d = np.ones(as_dims(dims).total, dtype=complex)
    d[basis_index(dims, (1, 1, 0))] = -1
    return np.diag(d)


def calibrate_cz(p: DeviceParams, amp: float, include_g12: bool = True, sigma: float = 10.0,
                 lifted: bool = False, start: Optional[tuple] = None, tol: float = 1e-6,
                 stall_iterations: int = 50, accept: float = 0.05,
                 max_iterations: int = 400) -> CzCalibration:
    """Maximize the JAZZ ``|110>`` population over drive frequency and plateau.

    The start point is the numeric anticrossing and one full CAS cycle minus
    the area of the pulse edges. Nelder-Mead runs on scaled coordinates
    (1 MHz, 10 ns). ``OptimizationStalled`` is raised when the objective
    improves by less than ``tol`` for ``stall_iterations`` iterations while
    ``1 - P110`` is still above ``accept``.
    """
    frame = dressed_frame(p, include_g12)
    if start is None:
        res = cas_rate_numeric(p, amp, "blue", include_g12)
        edge = default_cas_shape(amp, sigma, lifted).edge_area()
        start = (res.omega_resonance, max(1.0 / res.rate - edge, 0.0))
    w0, t0 = start
    scale = np.array([1e-3, 10.0])

    def unpack(x):
        return w0 + x[0] * scale[0], max(t0 + x[1] * scale[1], 0.0)

    def objective(x):
        wd, tau = unpack(x)
        U = gate_unitary(p, GateDrive(wd, amp, tau, sigma, lifted), frame, include_g12)
        return 1.0 - jazz_objective(U, p.dims)

    history = []

    def callback(xk):
        history.append(objective(xk))
        if len(history) > stall_iterations:
            gain = history[-stall_iterations - 1] - history[-1]
            if gain < tol and history[-1] > accept:
                raise OptimizationStalled(
                    f"1 - P110 stuck at {history[-1]:.3e} for {stall_iterations} iterations")

    r = minimize(objective, np.zeros(2), method="Nelder-Mead", callback=callback,
                 options=dict(xatol=1e-5, fatol=1e-10, maxiter=max_iterations))
    wd, tau = unpack(r.x)
    if r.fun > accept:
        raise OptimizationStalled(f"best 1 - P110 = {r.fun:.3e} after {r.nit} iterations")
    U = gate_unitary(p, GateDrive(wd, amp, tau, sigma, lifted), frame, include_g12)
    return CzCalibration(float(wd), float(tau), float(amp), local_phases(U, p.dims),
                         controlled_phase_of(U, p.dims), sigma, lifted,
                         float(1 - r.fun), int(r.nit))


def corrected_unitary(U: np.ndarray, dims, cal: Optional[CzCalibration] = None) -> np.ndarray:
    """``Z(theta) U`` with the virtual-Z correction from ``cal`` (or from ``U`` itself)."""
    th = local_phases(U, dims) if cal is None else cal.local_phases
    return virtual_z(dims, *th) @ U


def jazz_detuning_scan(p: DeviceParams, cal: CzCalibration, deltas, rate: float,
                       include_g12: bool = True) -> np.ndarray:
    """Controlled phase vs drive detuning (GHz from the calibrated frequency).

    Off resonance the plateau follows full generalized-Rabi cycles:
    ``plateau(delta) = plateau_cal + 1/sqrt(delta**2 + rate**2) - 1/rate``.
    """
    frame = dressed_frame(p, include_g12)
    out = []
    for dl in deltas:
        tau = cal.plateau + 1 / np.hypot(dl, rate) - 1 / rate
        g = GateDrive(cal.omega_d + dl, cal.amp, max(tau, 0.0), cal.sigma, cal.lifted)
        out.append(simulate_jazz(p, g, U=gate_unitary(p, g, frame, include_g12)).controlled_phase)
    return np.array(out)


# ------------------------------------------------------------------- channels

@dataclass
class ChannelAnalysis:
    """Images of computational matrix units under the gate channel (dressed basis).

    ``images[(a, b)] = E(|a><b|)`` for ``a, b`` in ``comp``; ``superoperator``
    is the full column-stacked matrix when it was assembled.
    """

    images: dict
    comp: list
    dims: object
    superoperator: Optional[np.ndarray] = None
    d: int = 4
    avg_fidelity: float = float("nan")
    leakage: float = float("nan")

    @property
    def computational_projector(self) -> np.ndarray:
        n = as_dims(self.dims).total
        pr = np.zeros((n, n))
        pr[self.comp, self.comp] = 1.0
        return pr

    @classmethod
    def from_superoperator(cls, s: np.ndarray, dims) -> "ChannelAnalysis":
        n = as_dims(dims).total
        comp = comp_indices(dims)
        images = {}
        for a in comp:
            for b in comp:
                images[(a, b)] = s[:, a + n * b].reshape(n, n, order="F")
        return cls(images, comp, dims, s)

    def apply(self, rho_comp: np.ndarray) -> np.ndarray:
        """Channel output for an input supported on the computational subspace."""
        out = 0
        for i, a in enumerate(self.comp):
            for j, b in enumerate(self.comp):
                if rho_comp[i, j] != 0:
                    out = out + rho_comp[i, j] * self.images[(a, b)]
        return out


def _unit_superop(M: np.ndarray) -> np.ndarray:
    return np.kron(M.conj(), M)


def channel_superoperator(p: DeviceParams, cal: CzCalibration,
                          coherence: Optional[CoherenceParams] = None,
                          t2_choice: str = "ramsey", full: bool = False,
                          include_g12: bool = True, plateau_step: float = PLATEAU_STEP,
                          edge_step: float = EDGE_STEP) -> ChannelAnalysis:
    """Gate channel followed by the virtual-Z correction, in the dressed basis.

    Without coherence the channel is unitary. With coherence, the Lindblad
    equation is propagated for the 16 computational matrix units, which is all
    the fidelity needs; ``full=True`` propagates all ``D**2`` units and fills
    the superoperator.
    """
    dims = p.dims
    n = dims.total
    comp = comp_indices(dims)
    frame = dressed_frame(p, include_g12)
    g = cal.drive()
    U = gate_unitary(p, g, frame, include_g12, edge_step)
    M = virtual_z(dims, *cal.local_phases) @ U
    if coherence is None:
        images = {(a, b): np.outer(M[:, a], M[:, b].conj()) for a in comp for b in comp}
        s = _unit_superop(M) if full else None
        return ChannelAnalysis(images, comp, dims, s)
    c_ops = collapse_operators(p, coherence, t2_choice)
    pairs = [(a, b) for b in range(n) for a in range(n)] if full else \
        [(a, b) for a in comp for b in comp]
    rhos = np.array([np.outer(frame[:, a], frame[:, b].conj()) for a, b in pairs])
    duration = g.shape().duration
    if duration > 0:
        rhos = propagate_density(p, g.drive(), rhos, c_ops, 0.0, duration, include_g12,
                                 edge_step, plateau_step)
    z = np.diag(virtual_z(dims, *cal.local_phases))
    out = frame.conj().T @ rhos @ frame
    out = z[None, :, None] * out * z.conj()[None, None, :]
    images = {pr: out[k] for k, pr in enumerate(pairs) if pr[0] in comp and pr[1] in comp}
    s = None
    if full:
        s = np.empty((n * n, n * n), dtype=complex)
        for k, (a, b) in enumerate(pairs):
            s[:, a + n * b] = out[k].ravel(order="F")
    return ChannelAnalysis(images, comp, dims, s)


def _ideal_matrix(ideal, dims) -> np.ndarray:
    if isinstance(ideal, str):
        if ideal == "cz":
            return ideal_cz(dims)
        if ideal == "identity":
            return np.eye(as_dims(dims).total, dtype=complex)
        raise ValueError(f"unknown ideal gate {ideal!r}")
    return np.asarray(ideal, dtype=complex)


def average_gate_fidelity(analysis: ChannelAnalysis, ideal="cz"):
    """``(F_bar, leakage)`` of ``E~ = U_ideal^dagger o E`` on the computational subspace.

    ``F_bar = (sum_ab <a|E~(|a><b|)|b> + sum_ac <c|E~(|a><a|)|c>) / (d (d + 1))``
    and ``leakage = 1 - Tr[P E~(P/d)]``.
    """
    ui = _ideal_matrix(ideal, analysis.dims)
    comp, d = analysis.comp, analysis.d
    t1 = t2 = 0.0
    for a in comp:
        for b in comp:
            img = ui.conj().T @ analysis.images[(a, b)] @ ui
            t1 += img[a, b]
            if a == b:
                t2 += np.trace(img[np.ix_(comp, comp)])
    fbar = float(np.real(t1 + t2) / (d * (d + 1)))
    leak = float(1 - np.real(t2) / d)
    analysis.avg_fidelity, analysis.leakage = fbar, leak
    return fbar, leak


def haar_average_fidelity(analysis: ChannelAnalysis, ideal="cz", samples: int = 10_000,
                          seed: int = 0) -> float:
    """Monte Carlo mean of ``<psi|E~(|psi><psi|)|psi>`` over Haar-random computational states."""
    rng = np.random.default_rng(seed)
    ui = _ideal_matrix(ideal, analysis.dims)
    comp = analysis.comp
    k = len(comp)
    imgs = np.array([[(ui.conj().T @ analysis.images[(a, b)] @ ui)[np.ix_(comp, comp)]
                      for b in comp] for a in comp])
    z = rng.normal(size=(samples, k)) + 1j * rng.normal(size=(samples, k))
    psi = z / np.linalg.norm(z, axis=1, keepdims=True)
    rho = np.einsum("si,sj->sij", psi, psi.conj())
    out = np.einsum("sij,ijkl->skl", rho, imgs)
    return float(np.mean(np.real(np.einsum("si,sij,sj->s", psi.conj(), out, psi))))


def unitary_fidelity(U: np.ndarray, ideal: np.ndarray, comp: Sequence[int]) -> float:
    """``(|Tr(P V^dagger U P)|**2 + Tr(P M M^dagger P)) / (d (d + 1))`` on the computational block."""
    m = (ideal.conj().T @ U)[np.ix_(comp, comp)]
    d = len(comp)
    return float((abs(np.trace(m)) ** 2 + np.sum(np.abs(m) ** 2)) / (d * (d + 1)))


def choi_matrix(superop: np.ndarray, n: int) -> np.ndarray:
    """Choi matrix ``sum_ab |a><b| (x) E(|a><b|)`` from a column-stacked superoperator."""
    c = np.zeros((n * n, n * n), dtype=complex)
    for a in range(n):
        for b in range(n):
            img = superop[:, a + n * b].reshape(n, n, order="F")
            c[a * n:(a + 1) * n, b * n:(b + 1) * n] = img
    return c


def trace_preservation_residual(superop: np.ndarray, n: int) -> float:
    """``max |Tr E(|a><b|) - delta_ab|`` over all matrix units."""
    eye = np.eye(n).ravel(order="F")
    return float(np.max(np.abs(eye @ superop - eye)))


# -------------------------------------------------------------------- records

@dataclass
class CzRecord:
    omega_d: float
    plateau_ns: float
    amp: float
    theta1: float
    theta2: float
    fbar_coherent: float = float("nan")
    fbar_lindblad_ramsey: float = float("nan")
    fbar_lindblad_echo: float = float("nan")
    leakage: float = float("nan")
    extra: dict = field(default_factory=dict)

    @classmethod
    def from_calibration(cls, cal: CzCalibration, **kw) -> "CzRecord":
        return cls(cal.omega_d, cal.plateau, cal.amp, cal.local_phases[0],
                   cal.local_phases[1], **kw)

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "CzRecord":
        return cls(**json.loads(text))
