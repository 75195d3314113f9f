"""
Operator algebra for three truncated bosonic modes.

Modes are always ordered (Q1, Q2, Qc) and basis states are packed row-major,
so the bare ket ``|ijk> = |i>_1 |j>_2 |k>_c`` sits at index
``i * (d2 * dc) + j * dc + k``. Operators are plain dense ``numpy`` arrays.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import reduce
from typing import Iterable, Sequence

import numpy as np

Q1, Q2, QC = 0, 1, 2
MODE_NAMES = ("q1", "q2", "qc")

_KINDS = ("lower", "raise", "number")


@dataclass(frozen=True)
class ModeDims:
    """Truncation levels per mode, ordered (Q1, Q2, Qc)."""

    levels: tuple[int, ...] = (4, 4, 4)

    def __post_init__(self):
        levels = tuple(int(n) for n in self.levels)
        if len(levels) != 3:
            raise ValueError(f"expected three modes (Q1, Q2, Qc), got {len(levels)}")
        if any(n < 2 for n in levels):
            raise ValueError(f"every mode needs at least 2 levels, got {levels}")
        object.__setattr__(self, "levels", levels)

    @property
    def total(self) -> int:
        return int(np.prod(self.levels))

    def __iter__(self):
        return iter(self.levels)

    def __getitem__(self, i):
        return self.levels[i]

    def __len__(self):
        return 3


def as_dims(dims) -> ModeDims:
    if isinstance(dims, ModeDims):
        return dims
    return ModeDims(tuple(dims))


def _mode_index(mode) -> int:
    if isinstance(mode, str):
        try:
            return MODE_NAMES.index(mode.lower())
        except ValueError:
            raise ValueError(f"unknown mode {mode!r}; expected one of {MODE_NAMES}") from None
    if mode not in (Q1, Q2, QC):
        raise ValueError(f"mode index must be 0 (Q1), 1 (Q2) or 2 (Qc), got {mode!r}")
    return int(mode)


def lowering(n: int) -> np.ndarray:
    """Single-mode truncated annihilation operator, <m-1|a|m> = sqrt(m)."""
    return np.diag(np.sqrt(np.arange(1, n, dtype=float)), 1)


def embed(dims, mode, op: np.ndarray) -> np.ndarray:
    """Tensor a single-mode operator with identities on the other two modes."""
    dims = as_dims(dims)
    m = _mode_index(mode)
    if op.shape != (dims[m], dims[m]):
        raise ValueError(f"operator shape {op.shape} does not match mode size {dims[m]}")
    factors = [np.eye(n) for n in dims]
    factors[m] = op
    return reduce(np.kron, factors).astype(complex)


def site_operator(dims, mode, kind: str) -> np.ndarray:
    """Ladder or number operator of one mode embedded in the product space.

    Parameters
    ----------
    dims : ModeDims or sequence of int
    mode : int or str
        0/``"q1"``, 1/``"q2"`` or 2/``"qc"``.
    kind : {"lower", "raise", "number"}
    """
    dims = as_dims(dims)
    m = _mode_index(mode)
    if kind not in _KINDS:
        raise ValueError(f"kind must be one of {_KINDS}, got {kind!r}")
    a = lowering(dims[m])
    if kind == "raise":
        a = a.T
    elif kind == "number":
        a = np.diag(np.arange(dims[m], dtype=float))
    return embed(dims, m, a)


def ladder_ops(dims) -> list[np.ndarray]:
    """Annihilation operators ``[a1, a2, ac]``."""
    return [site_operator(dims, m, "lower") for m in range(3)]


def number_diagonals(dims) -> np.ndarray:
    """Occupation numbers of every basis state, shape ``(3, D)``."""
    dims = as_dims(dims)
    grids = np.meshgrid(*[np.arange(n) for n in dims], indexing="ij")
    return np.stack([g.ravel() for g in grids]).astype(float)


def total_number(dims) -> np.ndarray:
    return np.diag(number_diagonals(dims).sum(axis=0)).astype(complex)


def basis_index(dims, label: Sequence[int]) -> int:
    dims = as_dims(dims)
    if len(label) != 3:
        raise ValueError(f"bare label needs three occupations, got {tuple(label)}")
    for n, d in zip(label, dims):
        if not 0 <= int(n) < d:
            raise ValueError(f"label {tuple(label)} out of range for dims {dims.levels}")
    i, j, k = (int(n) for n in label)
    return i * dims[1] * dims[2] + j * dims[2] + k


def basis_label(dims, index: int) -> tuple[int, int, int]:
    dims = as_dims(dims)
    if not 0 <= index < dims.total:
        raise ValueError(f"index {index} out of range for dims {dims.levels}")
    i, rest = divmod(int(index), dims[1] * dims[2])
    j, k = divmod(rest, dims[2])
    return (i, j, k)


def all_labels(dims) -> list[tuple[int, int, int]]:
    dims = as_dims(dims)
    return [basis_label(dims, n) for n in range(dims.total)]


def basis_state(dims, label: Sequence[int]) -> np.ndarray:
    dims = as_dims(dims)
    psi = np.zeros(dims.total, dtype=complex)
    psi[basis_index(dims, label)] = 1.0
    return psi


def computational_labels() -> list[tuple[int, int, int]]:
    """Two-qubit computational states ``|ij0>`` ordered 00, 01, 10, 11 (Q1 Q2)."""
    return [(0, 0, 0), (0, 1, 0), (1, 0, 0), (1, 1, 0)]


def commutator(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return a @ b - b @ a


def hermiticity_residual(op: np.ndarray) -> float:
    """Relative Frobenius norm of ``op - op^dagger``."""
    norm = np.linalg.norm(op)
    if norm == 0:
        return 0.0
    return float(np.linalg.norm(op - op.conj().T) / norm)


def is_hermitian(op: np.ndarray, tol: float = 1e-12) -> bool:
    return hermiticity_residual(op) <= tol


def projector(dims, labels: Iterable[Sequence[int]]) -> np.ndarray:
    dims = as_dims(dims)
    p = np.zeros((dims.total, dims.total), dtype=complex)
    for lab in labels:
        n = basis_index(dims, lab)
        p[n, n] = 1.0
    return p
