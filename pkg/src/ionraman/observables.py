"""Initial states and observables of the ion density matrix."""

from __future__ import annotations

import numpy as np
from scipy.stats import poisson

from .operators import SystemSpace, basis_ket


def pure(ket: np.ndarray) -> np.ndarray:
    return np.outer(ket, ket.conj())


def fock_state(space: SystemSpace, n: int, level: int = 0) -> np.ndarray:
    """Density matrix of ``|level, n>``."""
    return pure(basis_ket(space, level, n))


def coherent_amplitudes(fock_dim: int, alpha: complex) -> np.ndarray:
    """Truncated, renormalized coherent-state amplitudes ``<n|alpha>``."""
    n = np.arange(fock_dim)
    nbar = abs(alpha) ** 2
    # Poisson weights avoid factorial overflow; the phase is alpha^n / |alpha|^n
    mag = np.sqrt(poisson.pmf(n, nbar)) if nbar > 0 else (n == 0).astype(float)
    phase = np.exp(1j * np.angle(alpha) * n) if alpha != 0 else np.ones(fock_dim)
    amps = mag * phase
    return amps / np.linalg.norm(amps)


def coherent_state(space: SystemSpace, alpha: complex, level: int = 0) -> np.ndarray:
    r = abs(alpha)
    if r * r + 7 * r >= space.fock_dim:
        raise ValueError(
            f"coherent state |alpha|={r:.3g} needs fock_dim > |alpha|^2 + 7|alpha| = {r * r + 7 * r:.3g}, "
            f"got {space.fock_dim}"
        )
    ket = np.zeros(space.dim, dtype=complex)
    start = space.index(level, 0)
    ket[start:start + space.fock_dim] = coherent_amplitudes(space.fock_dim, alpha)
    return pure(ket)


def _block(rho: np.ndarray, space: SystemSpace, i: int, j: int) -> np.ndarray:
    n = space.fock_dim
    return rho[i * n:(i + 1) * n, j * n:(j + 1) * n]


def level_population(rho: np.ndarray, space: SystemSpace, level: int) -> float:
    return float(np.trace(_block(rho, space, level, level)).real)


def p_down(rho: np.ndarray, space: SystemSpace) -> float:
    """Occupation of internal level 0 summed over phonon number."""
    return level_population(rho, space, 0)


def p_up(rho: np.ndarray, space: SystemSpace) -> float:
    return level_population(rho, space, 1)


def coherence_01(rho: np.ndarray, space: SystemSpace) -> complex:
    """Motional trace of the 0-1 coherence, ``sum_n <0,n|rho|1,n>``."""
    return complex(np.trace(_block(rho, space, 0, 1)))


def coherence_10(rho: np.ndarray, space: SystemSpace) -> complex:
    return complex(np.trace(_block(rho, space, 1, 0)))


def mean_phonon(rho: np.ndarray, space: SystemSpace) -> float:
    n = np.tile(np.arange(space.fock_dim), space.level_count)
    return float(np.real(np.diagonal(rho)) @ n)


def phonon_distribution(rho: np.ndarray, space: SystemSpace) -> np.ndarray:
    d = np.real(np.diagonal(rho)).reshape(space.level_count, space.fock_dim)
    return d.sum(axis=0)


def purity(rho: np.ndarray) -> float:
    return float(np.real(np.vdot(rho.conj().T, rho)))


def min_eigenvalue(rho: np.ndarray) -> float:
    herm = 0.5 * (rho + rho.conj().T)
    return float(np.linalg.eigvalsh(herm)[0])
