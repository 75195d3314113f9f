"""Pulse envelopes for the coupler drive."""
from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
from scipy.special import erf

KINDS = ("flat_top_gaussian", "gaussian", "square")


@dataclass(frozen=True)
class PulseShape:
    """Drive envelope; times in ns, ``amplitude`` is Omega_d/2pi in GHz.

    A flat-top pulse is a rising Gaussian edge of length ``edge_sigmas*sigma``
    centred on its end point, a plateau of ``flat_duration``, and the mirrored
    falling edge. With ``lifted=False`` the edges are plain truncated Gaussians,
    so the envelope starts at ``amplitude*exp(-edge_sigmas**2/2)``; ``lifted=True``
    subtracts that pedestal and rescales so the pulse starts from zero.
    """

    kind: str = "flat_top_gaussian"
    amplitude: float = 0.0
    sigma: float = 10.0
    flat_duration: float = 0.0
    edge_sigmas: float = 2.0
    lifted: bool = False

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"pulse kind must be one of {KINDS}, got {self.kind!r}")
        if self.amplitude < 0:
            raise ValueError("pulse amplitude must be non-negative")
        if self.sigma <= 0 and self.kind != "square":
            raise ValueError("sigma must be positive")
        if self.flat_duration < 0:
            raise ValueError("flat_duration must be non-negative")

    @property
    def edge_length(self) -> float:
        if self.kind == "square":
            return 0.0
        return self.edge_sigmas * self.sigma

    @property
    def plateau(self) -> float:
        return 0.0 if self.kind == "gaussian" else self.flat_duration

    @property
    def duration(self) -> float:
        return 2 * self.edge_length + self.plateau

    def with_plateau(self, flat_duration: float) -> "PulseShape":
        return replace(self, flat_duration=float(flat_duration))

    def with_amplitude(self, amplitude: float) -> "PulseShape":
        return replace(self, amplitude=float(amplitude))

    def segments(self) -> list[tuple[float, float, bool]]:
        """``(start, stop, is_constant)`` pieces covering the support."""
        e, p = self.edge_length, self.plateau
        out = []
        if e > 0:
            out.append((0.0, e, False))
        if p > 0:
            out.append((e, e + p, True))
        if e > 0:
            out.append((e + p, 2 * e + p, False))
        return out

    def edge_area(self) -> float:
        """Integral of the two edges divided by the amplitude, in ns."""
        e = self.edge_length
        if e == 0:
            return 0.0
        area = self.sigma * np.sqrt(np.pi / 2) * erf(e / (self.sigma * np.sqrt(2)))
        if self.lifted:
            floor = np.exp(-(self.edge_sigmas ** 2) / 2)
            area = (area - e * floor) / (1 - floor)
        return 2 * float(area)


def _edge(u, shape: PulseShape):
    """Normalised edge profile; ``u`` is the distance from the plateau, in ns."""
    g = np.exp(-(u ** 2) / (2 * shape.sigma ** 2))
    if shape.lifted:
        floor = np.exp(-(shape.edge_sigmas ** 2) / 2)
        g = (g - floor) / (1 - floor)
    return g


def envelope(shape: PulseShape, t):
    """Drive amplitude (/2pi GHz) at time(s) ``t`` in ns; zero outside the support."""
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    amp = shape.amplitude
    if shape.kind == "square":
        inside = (t >= 0) & (t < shape.flat_duration)
        out[inside] = amp
        return out if out.ndim else float(out)
    e, p = shape.edge_length, shape.plateau
    rise = (t >= 0) & (t < e)
    flat = (t >= e) & (t < e + p)
    fall = (t >= e + p) & (t <= 2 * e + p)
    out[rise] = amp * _edge(t[rise] - e, shape)
    out[flat] = amp
    out[fall] = amp * _edge(t[fall] - e - p, shape)
    return out if out.ndim else float(out)
