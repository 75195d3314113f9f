"""
Device parameters and Hamiltonian assembly for a data-coupler-data transmon triplet.

All frequency-like inputs are ordinary frequencies in GHz (angular value / 2pi);
the builders return matrices in angular units (rad/ns), so ``exp(-1j * H * t)``
with ``t`` in ns is the propagator.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .hilbert import ModeDims, as_dims, ladder_ops, total_number
from .pulses import PulseShape, envelope

TWO_PI = 2 * np.pi


def _triple(values, name):
    values = tuple(float(v) for v in values)
    if len(values) != 3:
        raise ValueError(f"{name} needs three entries (Q1, Q2, Qc), got {len(values)}")
    return values


@dataclass(frozen=True)
class DeviceParams:
    """Frequencies, anharmonicities and couplings of the triplet, all /2pi in GHz."""

    omega: tuple[float, float, float]
    alpha: tuple[float, float, float]
    g1c: float
    g2c: float
    g12: float = 0.0
    dims: ModeDims = field(default_factory=ModeDims)

    def __post_init__(self):
        object.__setattr__(self, "omega", _triple(self.omega, "omega"))
        object.__setattr__(self, "alpha", _triple(self.alpha, "alpha"))
        object.__setattr__(self, "dims", as_dims(self.dims))
        for name in ("g1c", "g2c", "g12"):
            object.__setattr__(self, name, float(getattr(self, name)))
        if any(a > 0 for a in self.alpha):
            warnings.warn(f"positive anharmonicity {self.alpha}; transmons have alpha < 0",
                          stacklevel=3)
        for i in (0, 1):
            if self.omega[i] == self.omega[2]:
                raise ValueError(f"data qubit Q{i + 1} is resonant with the coupler")

    @property
    def delta_12(self) -> float:
        return self.omega[0] - self.omega[1]

    @property
    def delta_1c(self) -> float:
        return self.omega[0] - self.omega[2]

    @property
    def delta_2c(self) -> float:
        return self.omega[1] - self.omega[2]

    def dispersive_ratios(self) -> tuple[float, float]:
        """``(|g1c/Delta_1c|, |g2c/Delta_2c|)``."""
        return abs(self.g1c / self.delta_1c), abs(self.g2c / self.delta_2c)

    def with_updates(self, **changes) -> "DeviceParams":
        from dataclasses import replace
        return replace(self, **changes)


@dataclass(frozen=True)
class DriveParams:
    """Coupler drive: frequency and peak amplitude (/2pi GHz), optional envelope.

    ``envelope=None`` means a continuous drive of constant amplitude.
    """

    omega_d: float
    amp: float
    envelope: Optional[PulseShape] = None

    def __post_init__(self):
        if self.amp < 0:
            raise ValueError("drive amplitude must be non-negative")
        if self.envelope is not None:
            if self.envelope.amplitude == 0 and self.amp != 0:
                object.__setattr__(self, "envelope", self.envelope.with_amplitude(self.amp))
            elif not np.isclose(self.envelope.amplitude, self.amp, rtol=0, atol=1e-15):
                raise ValueError(
                    f"envelope amplitude {self.envelope.amplitude} differs from amp {self.amp}")

    def amplitude_at(self, t):
        if self.envelope is None:
            return np.full_like(np.asarray(t, dtype=float), self.amp) if np.ndim(t) else self.amp
        return envelope(self.envelope, t)

    @property
    def duration(self) -> Optional[float]:
        return None if self.envelope is None else self.envelope.duration


@dataclass(frozen=True)
class DetuningSet:
    delta_12: float
    delta_1c: float
    delta_2c: float
    delta_1: float
    delta_2: float
    delta_c: float


def detunings(p: DeviceParams, d: DriveParams) -> DetuningSet:
    w1, w2, wc = p.omega
    wd = d.omega_d
    return DetuningSet(
        delta_12=w1 - w2, delta_1c=w1 - wc, delta_2c=w2 - wc,
        delta_1=w1 - wd, delta_2=w2 - wd, delta_c=wc - wd,
    )


def _uncoupled(p: DeviceParams, frame_freq: float = 0.0) -> np.ndarray:
    a = ladder_ops(p.dims)
    h = np.zeros((p.dims.total, p.dims.total), dtype=complex)
    for i in range(3):
        ad = a[i].conj().T
        h += (p.omega[i] - frame_freq) * (ad @ a[i]) + 0.5 * p.alpha[i] * (ad @ ad @ a[i] @ a[i])
    return TWO_PI * h


def coupling_hamiltonian(p: DeviceParams, include_g12: bool = True) -> np.ndarray:
    a1, a2, ac = ladder_ops(p.dims)
    h = p.g1c * (a1.conj().T @ ac + a1 @ ac.conj().T)
    h = h + p.g2c * (a2.conj().T @ ac + a2 @ ac.conj().T)
    if include_g12:
        h = h + p.g12 * (a1.conj().T @ a2 + a1 @ a2.conj().T)
    return TWO_PI * h


def build_static_hamiltonian(p: DeviceParams, include_g12: bool = True) -> np.ndarray:
    """Lab-frame static Hamiltonian H/hbar in rad/ns (Duffing modes + exchange couplings)."""
    return _uncoupled(p) + coupling_hamiltonian(p, include_g12)


def build_drive_operator(p: DeviceParams) -> np.ndarray:
    """``a_c + a_c^dagger``; the lab drive term is ``Omega_d cos(w_d t)`` times this."""
    ac = ladder_ops(p.dims)[2]
    return ac + ac.conj().T


def rotating_parts(p: DeviceParams, omega_d: float, include_g12: bool = True):
    """``(H_static_r, X_half)`` with ``H_r(t) = H_static_r + Omega(t) * X_half``.

    ``Omega(t)`` is the instantaneous amplitude in /2pi GHz, ``X_half`` carries
    the 2pi and the 1/2 from the rotating-wave approximation.
    """
    h0 = _uncoupled(p, omega_d) + coupling_hamiltonian(p, include_g12)
    return h0, 0.5 * TWO_PI * build_drive_operator(p)


def build_rotating_hamiltonian(p: DeviceParams, d: DriveParams,
                               include_g12: bool = True) -> np.ndarray:
    """Time-independent Hamiltonian in the frame rotating at ``omega_d`` (RWA drive)."""
    h0, x_half = rotating_parts(p, d.omega_d, include_g12)
    return h0 + d.amp * x_half


def lab_hamiltonian(p: DeviceParams, d: DriveParams,
                    include_g12: bool = True) -> Callable[[float], np.ndarray]:
    """``H(t)`` in the lab frame with the full ``cos(w_d t)`` drive (no RWA)."""
    h0 = build_static_hamiltonian(p, include_g12)
    x = TWO_PI * build_drive_operator(p)
    wd = TWO_PI * d.omega_d

    def h(t):
        return h0 + d.amplitude_at(t) * np.cos(wd * t) * x

    return h


def frame_generator(p: DeviceParams, omega_d: float) -> np.ndarray:
    """Diagonal of ``omega_d * N_total`` in rad/ns; the rotating frame is ``exp(i w_d N t)``."""
    return TWO_PI * omega_d * np.real(np.diag(total_number(p.dims)))


def measured_device(levels=(4, 4, 4), g12: float = 0.0018) -> DeviceParams:
    """Measured parameters of the fabricated triplet."""
    return DeviceParams(
        omega=(5.641, 5.507, 6.317),
        alpha=(-0.300, -0.303, -0.381),
        g1c=0.040, g2c=0.031, g12=g12,
        dims=ModeDims(tuple(levels)),
    )
