"""
Second-order Schrieffer-Wolff treatment of the exchange-coupled triplet.

Sign convention
---------------
With ``H = H0 + O1`` (``H0`` diagonal, ``O1`` off-diagonal) the generator solves
``[H0, S1] = O1``, i.e. ``(S1)_mn = (O1)_mn / (E_m - E_n)``, and the transformed
Hamiltonian is ``exp(S) H exp(-S)``. The second-order correction is then
``C = 1/2 [S1, O1]``, split into its diagonal part ``D2`` and off-diagonal part
``O2``; ``S2`` solves ``[H0, S2] = O2`` the same way. For two coupled levels
this gives the familiar dispersive shift ``+g**2/Delta`` on the upper one.

The closed-form rate and frequency expressions take :class:`DeviceParams`
and return ordinary frequencies in GHz.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm

from .device import (TWO_PI, DeviceParams, build_static_hamiltonian,
                     rotating_parts)
from .errors import DegenerateConnectedLevels, SingularDenominator
from .hilbert import basis_index, basis_label, commutator, number_diagonals

# 1 kHz, in rad/ns
GAP_TOL = TWO_PI * 1e-6

BLUE_PAIR = ((0, 1, 0), (1, 0, 1))
RED_PAIR = ((1, 0, 0), (0, 1, 1))


def transition_pair(transition: str):
    if transition == "blue":
        return BLUE_PAIR
    if transition == "red":
        return RED_PAIR
    raise ValueError(f"transition must be 'blue' or 'red', got {transition!r}")


@dataclass(frozen=True)
class SwDecomposition:
    H0: np.ndarray
    O1: np.ndarray
    S1: np.ndarray
    S2: np.ndarray
    D2: np.ndarray
    O2: np.ndarray
    dims: object = None


@dataclass(frozen=True)
class CasRates:
    """Signed blue and red CAS rates, /2pi GHz."""

    omega_b_rate: float
    omega_r_rate: float


@dataclass(frozen=True)
class WeakDriveFrequencies:
    omega_b_prime: float
    omega_r_prime: float


def split_diagonal(h: np.ndarray):
    """``(diag part, off-diagonal part)`` of a matrix."""
    d = np.diag(np.diag(h))
    return d, h - d


def _resolvent(energies, op, gap_tol, dims=None):
    gaps = energies[:, None] - energies[None, :]
    connected = np.abs(op) > 1e-14
    np.fill_diagonal(connected, False)
    bad = connected & (np.abs(gaps) < gap_tol)
    if bad.any():
        m, n = np.argwhere(bad)[0]
        pair = (m, n) if dims is None else (basis_label(dims, m), basis_label(dims, n))
        raise DegenerateConnectedLevels(pair, abs(gaps[m, n]))
    s = np.zeros_like(op, dtype=complex)
    s[connected] = op[connected] / gaps[connected]
    return s


def _check_diagonal(H0):
    off = H0 - np.diag(np.diag(H0))
    scale = max(np.abs(H0).max(), 1.0)
    if np.abs(off).max() > 1e-12 * scale:
        raise ValueError("H0 must be diagonal in the bare basis")


def solve_generator_order1(H0, O1, gap_tol: float = GAP_TOL, dims=None) -> np.ndarray:
    """First-order generator ``(S1)_mn = (O1)_mn / (E_m - E_n)``."""
    _check_diagonal(H0)
    return _resolvent(np.real(np.diag(H0)), O1, gap_tol, dims)


def solve_generator_order2(H0, S1, O1, gap_tol: float = GAP_TOL, dims=None):
    """``(D2, O2, S2)`` from ``C = 1/2 [S1, O1]``."""
    _check_diagonal(H0)
    c = 0.5 * commutator(S1, O1)
    d2, o2 = split_diagonal(c)
    s2 = _resolvent(np.real(np.diag(H0)), o2, gap_tol, dims)
    return d2, o2, s2


def decompose(H: np.ndarray, gap_tol: float = GAP_TOL, dims=None) -> SwDecomposition:
    h0, o1 = split_diagonal(H)
    s1 = solve_generator_order1(h0, o1, gap_tol, dims)
    d2, o2, s2 = solve_generator_order2(h0, s1, o1, gap_tol, dims)
    return SwDecomposition(H0=h0, O1=o1, S1=s1, S2=s2, D2=d2, O2=o2, dims=dims)


def decompose_device(p: DeviceParams, include_g12: bool = False,
                     gap_tol: float = GAP_TOL) -> SwDecomposition:
    """Decomposition of the static Hamiltonian (angular units).

    The closed forms for the CAS rates leave out the direct data-data coupling,
    hence ``include_g12=False`` by default.
    """
    return decompose(build_static_hamiltonian(p, include_g12), gap_tol, p.dims)


def generator_residual(H0, S, O) -> float:
    """``||[H0, S] - O||_F / max(||O||_F, eps)``; zero for an exact generator."""
    norm = max(np.linalg.norm(O), np.finfo(float).eps)
    return float(np.linalg.norm(commutator(H0, S) - O) / norm)


def antihermiticity_residual(S) -> float:
    return float(np.linalg.norm(S + S.conj().T))


def offdiagonal_residual(dec: SwDecomposition, max_excitations: int | None = 2) -> float:
    """Off-diagonal Frobenius norm of ``exp(S) H exp(-S)`` with ``S = S1 + S2``.

    The couplings conserve the total excitation number, so the transformed
    matrix is block diagonal in it. By default only the blocks with at most two
    excitations are measured; they hold every state used for the ZZ and CAS
    quantities, while the upper blocks of a 4-level truncation contain
    near-degenerate levels where the expansion is not meant to converge.
    """
    s = dec.S1 + dec.S2
    h = dec.H0 + dec.O1
    ht = expm(s) @ h @ expm(-s)
    e = np.real(np.diag(dec.H0))
    mask = np.abs(e[:, None] - e[None, :]) > GAP_TOL
    if max_excitations is not None:
        if dec.dims is None:
            raise ValueError("max_excitations needs the mode dims on the decomposition")
        keep = number_diagonals(dec.dims).sum(axis=0) <= max_excitations
        mask &= keep[:, None] & keep[None, :]
    return float(np.linalg.norm(ht[mask]))


def effective_static_hamiltonian(H0, D2) -> np.ndarray:
    return H0 + D2


def effective_drive(Hd_r, S1, S2) -> np.ndarray:
    """``Hd + [S1+S2, Hd] + 1/2 [S1, [S1, Hd]]``."""
    first = commutator(S1 + S2, Hd_r)
    return Hd_r + first + 0.5 * commutator(S1, commutator(S1, Hd_r))


def drive_term(p: DeviceParams, amp: float) -> np.ndarray:
    """Rotating-frame drive ``(Omega_d/2)(a_c + a_c^dagger)`` in rad/ns."""
    _, x_half = rotating_parts(p, 0.0, include_g12=False)
    return amp * x_half


def cas_matrix_element(Hd_eff, dims, transition: str = "blue") -> complex:
    """``2 <a|H'_d|b>`` for the transition pair, /2pi GHz, sign kept."""
    a, b = transition_pair(transition)
    return 2 * Hd_eff[basis_index(dims, a), basis_index(dims, b)] / TWO_PI


def cas_rate_from_matrix_element(Hd_eff, dims, transition: str = "blue") -> float:
    """Magnitude of the CAS rate read off the effective drive, /2pi GHz."""
    return float(abs(cas_matrix_element(Hd_eff, dims, transition)))


def effective_cas_rate(p: DeviceParams, amp: float, transition: str = "blue",
                       include_g12: bool = False) -> float:
    """Signed CAS rate from the transformed drive (real part of the matrix element)."""
    dec = decompose_device(p, include_g12)
    hd = effective_drive(drive_term(p, amp), dec.S1, dec.S2)
    return float(np.real(cas_matrix_element(hd, p.dims, transition)))


def _nonzero(name, value):
    if value == 0:
        raise SingularDenominator(name, value)
    return value


def analytic_cas_rates(p: DeviceParams, amp: float) -> CasRates:
    w1, w2, wc = p.omega
    ac = p.alpha[2]
    d12 = _nonzero("Delta_12", w1 - w2)
    num = 2 * p.g1c * p.g2c * ac * amp
    ob = num / (d12 * _nonzero("w_c - w_1 + alpha_c", wc - w1 + ac) * _nonzero("w_c - w_2", wc - w2))
    orr = -num / (d12 * _nonzero("w_c - w_2 + alpha_c", wc - w2 + ac) * _nonzero("w_c - w_1", wc - w1))
    return CasRates(float(ob), float(orr))


def analytic_weak_drive_frequencies(p: DeviceParams) -> WeakDriveFrequencies:
    w1, w2, wc = p.omega
    a1, a2, ac = p.alpha
    d12 = w1 - w2
    d1c = _nonzero("Delta_1c", w1 - wc)
    d2c = _nonzero("Delta_2c", w2 - wc)
    wb = (wc + d12
          + 2 * p.g1c ** 2 * (a1 + ac)
          / (_nonzero("Delta_1c - alpha_c", d1c - ac) * _nonzero("Delta_1c + alpha_1", d1c + a1))
          - 2 * p.g2c ** 2 / d2c)
    wr = (wc - d12
          + 2 * p.g2c ** 2 * (a2 + ac)
          / (_nonzero("Delta_2c - alpha_c", d2c - ac) * _nonzero("Delta_2c + alpha_2", d2c + a2))
          - 2 * p.g1c ** 2 / d1c)
    return WeakDriveFrequencies(float(wb), float(wr))


def sw_transition_frequency(dec: SwDecomposition, transition: str = "blue") -> float:
    """``(E_b - E_a)/2pi`` from ``H0 + D2`` for the transition pair, GHz."""
    a, b = transition_pair(transition)
    e = np.real(np.diag(effective_static_hamiltonian(dec.H0, dec.D2)))
    return float((e[basis_index(dec.dims, b)] - e[basis_index(dec.dims, a)]) / TWO_PI)
