"""Truncated Hilbert space and elementary operators.

Basis ordering is fixed: internal level index varies slowest, phonon index
fastest, so the flat index of ``|level, n>`` is ``level * fock_dim + n``.
Operators are plain dense ``complex128`` numpy arrays.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg


@dataclass(frozen=True)
class SystemSpace:
    fock_dim: int
    level_count: int = 3

    def __post_init__(self):
        if int(self.fock_dim) != self.fock_dim or self.fock_dim < 2:
            raise ValueError(f"fock_dim must be an integer >= 2, got {self.fock_dim!r}")
        if self.level_count not in (2, 3):
            raise ValueError(f"level_count must be 2 or 3, got {self.level_count!r}")

    @property
    def dim(self) -> int:
        return self.fock_dim * self.level_count

    def index(self, level: int, n: int) -> int:
        if not 0 <= level < self.level_count:
            raise IndexError(f"level {level} out of range for {self.level_count} levels")
        if not 0 <= n < self.fock_dim:
            raise IndexError(f"phonon number {n} out of range for fock_dim={self.fock_dim}")
        return level * self.fock_dim + n

    def identity(self) -> np.ndarray:
        return np.eye(self.dim, dtype=complex)

    # Embeddings of single-factor operators into the product space.
    def phonon(self, op: np.ndarray) -> np.ndarray:
        return tensor(np.eye(self.level_count, dtype=complex), op)

    def internal(self, op: np.ndarray) -> np.ndarray:
        return tensor(op, np.eye(self.fock_dim, dtype=complex))

    def a(self) -> np.ndarray:
        """Phonon lowering operator on the full space."""
        return self.phonon(boson_annihilate(self))

    def s(self, i: int, j: int) -> np.ndarray:
        """``S_ij = |j><i|`` on the full space."""
        return self.internal(atomic_op(self, i, j))

    def number(self) -> np.ndarray:
        return self.phonon(np.diag(np.arange(self.fock_dim, dtype=complex)))

    def position(self) -> np.ndarray:
        """Dimensionless ``a + a^dagger``."""
        a = self.a()
        return a + a.conj().T


def default_fock_dim(nbar: float) -> int:
    """Truncation ``ceil(nbar + 7 sqrt(nbar + 1))`` with a floor of 15."""
    return max(15, math.ceil(nbar + 7.0 * math.sqrt(nbar + 1.0)))


def boson_annihilate(space: SystemSpace) -> np.ndarray:
    """N x N truncated lowering operator, ``a[n, n+1] = sqrt(n+1)``."""
    n = space.fock_dim
    return np.diag(np.sqrt(np.arange(1, n, dtype=float)), k=1).astype(complex)


def atomic_op(space: SystemSpace, i: int, j: int) -> np.ndarray:
    """Internal-factor transition operator ``S_ij = |j><i|``.

    Under this convention ``S_ij S_kl = delta_il S_kj``.
    """
    m = space.level_count
    if not (0 <= i < m and 0 <= j < m):
        raise IndexError(f"level indices ({i}, {j}) out of range for {m} levels")
    op = np.zeros((m, m), dtype=complex)
    op[j, i] = 1.0
    return op


def tensor(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Kronecker product, first factor slowest (internal (x) phonon)."""
    return np.kron(np.asarray(a, dtype=complex), np.asarray(b, dtype=complex))


def matrix_exp(a: np.ndarray) -> np.ndarray:
    """Matrix exponential (Pade scaling-and-squaring)."""
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"matrix_exp needs a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix_exp argument has non-finite entries")
    with np.errstate(over="raise", invalid="raise"):
        try:
            out = scipy.linalg.expm(a)
        except FloatingPointError as exc:
            raise OverflowError("matrix exponential overflowed; argument norm too large") from exc
    if not np.all(np.isfinite(out)):
        raise OverflowError("matrix exponential overflowed; argument norm too large")
    return out


def basis_ket(space: SystemSpace, level: int, n: int) -> np.ndarray:
    ket = np.zeros(space.dim, dtype=complex)
    ket[space.index(level, n)] = 1.0
    return ket


def normalized(ket: np.ndarray) -> np.ndarray:
    ket = np.asarray(ket, dtype=complex)
    norm = np.linalg.norm(ket)
    if norm == 0 or not np.isfinite(norm):
        raise ValueError("cannot normalize a zero or non-finite vector")
    return ket / norm


def dagger(op: np.ndarray) -> np.ndarray:
    return op.conj().T


def commutator(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return a @ b - b @ a


def is_hermitian(op: np.ndarray, atol: float = 1e-12) -> bool:
    return bool(np.max(np.abs(op - op.conj().T), initial=0.0) <= atol)


def is_antihermitian(op: np.ndarray, atol: float = 1e-12) -> bool:
    return bool(np.max(np.abs(op + op.conj().T), initial=0.0) <= atol)


def is_unitary(op: np.ndarray, atol: float = 1e-10) -> bool:
    eye = np.eye(op.shape[0])
    return bool(np.max(np.abs(op.conj().T @ op - eye), initial=0.0) <= atol)
