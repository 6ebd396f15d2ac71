"""Physical parameters and Hamiltonians of the driven three-level ion.

All quantities use hbar = 1 and angular units (rad/s).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace

import numpy as np
import scipy.constants
import scipy.optimize

from .operators import SystemSpace, dagger, matrix_exp

#: Largest |g/Delta| accepted; beyond it the second-order rotation is meaningless.
MAX_EPS = 0.2


class SidebandMismatch(ValueError):
    """Effective detuning is not tuned to the requested sideband."""


class Sideband(str, enum.Enum):
    CARRIER = "carrier"
    RED = "red"
    BLUE = "blue"
    FULL_EXPONENTIAL = "full_exponential"

    def resonance(self, nu: float) -> float | None:
        """Required effective detuning for this sideband (None: no constraint)."""
        return {"carrier": 0.0, "red": nu, "blue": -nu}.get(self.value)


class LDConvention(str, enum.Enum):
    # linearization eps(x) ~ eps (1 + i eta x) of the phase factor exp(i eta x); the default
    IMAGINARY = "imaginary"
    # linearization eps(x) ~ eps (1 + eta x) with a real coefficient
    REAL = "real"


@dataclass(frozen=True)
class PhysicalConfig:
    nu: float
    delta_a: float
    delta_b: float
    g_a: complex
    g_b: complex
    gamma_a: float = 0.0
    gamma_b: float = 0.0
    eta_a: float = 0.101
    eta_b: float = -0.101
    fock_dim: int = 15
    ld_convention: LDConvention = LDConvention.IMAGINARY

    def __post_init__(self):
        if not self.nu > 0:
            raise ValueError(f"nu must be positive, got {self.nu}")
        if self.gamma_a < 0 or self.gamma_b < 0:
            raise ValueError("decay rates must be non-negative")
        for name in ("delta_a", "delta_b"):
            if getattr(self, name) == 0:
                raise ZeroDivisionError(f"{name} is zero; the rotation generator is undefined")
        for g, d, name in ((self.g_a, self.delta_a, "a"), (self.g_b, self.delta_b, "b")):
            if abs(g / d) >= MAX_EPS:
                raise ValueError(f"|g_{name}/delta_{name}| = {abs(g / d):.3g} outside the perturbative regime (< {MAX_EPS})")
        object.__setattr__(self, "ld_convention", LDConvention(self.ld_convention))

    @property
    def eta(self) -> float:
        return self.eta_a - self.eta_b

    def with_(self, **changes) -> PhysicalConfig:
        return replace(self, **changes)


@dataclass(frozen=True)
class EffectiveParams:
    delta: float
    omega: float
    eps_a: complex
    eps_b: complex
    eta: float
    # complex Raman coupling; H_int = -(coupling e^{i eta x} S_01 + h.c.)
    coupling: complex


def effective_params(cfg: PhysicalConfig) -> EffectiveParams:
    da, db = cfg.delta_a, cfg.delta_b
    if da == 0 or db == 0:
        raise ZeroDivisionError("zero detuning")
    delta = da - db + abs(cfg.g_a) ** 2 / da - abs(cfg.g_b) ** 2 / db
    coupling = 0.5 * (1.0 / da + 1.0 / db) * cfg.g_a * np.conj(cfg.g_b)
    return EffectiveParams(
        delta=float(delta),
        omega=float(2.0 * abs(coupling)),
        eps_a=complex(cfg.g_a / da),
        eps_b=complex(cfg.g_b / db),
        eta=cfg.eta,
        coupling=complex(coupling),
    )


def lamb_dicke_parameter(k: float, mass: float, nu: float) -> float:
    """``k sqrt(hbar / (2 M nu))`` with SI inputs (1/m, kg, rad/s)."""
    return k * math.sqrt(scipy.constants.hbar / (2.0 * mass * nu))


def tune_detuning(cfg: PhysicalConfig, sideband: Sideband | str) -> PhysicalConfig:
    """Adjust ``delta_b`` so the Stark-shifted detuning sits on the sideband."""
    target = Sideband(sideband).resonance(cfg.nu)
    if target is None:
        return cfg
    ga2, gb2 = abs(cfg.g_a) ** 2, abs(cfg.g_b) ** 2
    const = cfg.delta_a + ga2 / cfg.delta_a

    def f(db):
        return const - db - gb2 / db - target

    def fprime(db):
        return -1.0 + gb2 / db**2

    x0 = const - target - gb2 / cfg.delta_a
    db = scipy.optimize.newton(f, x0, fprime=fprime, tol=1e-14 * abs(x0), maxiter=100)
    return cfg.with_(delta_b=float(db))


def _check_space(space: SystemSpace, levels: int):
    if space.level_count != levels:
        raise ValueError(f"expected a {levels}-level space, got level_count={space.level_count}")


def displacement_factor(space: SystemSpace, eta: float) -> np.ndarray:
    """``exp(i eta (a + a^dagger))`` on the full space."""
    return matrix_exp(1j * eta * space.position())


def build_full_hamiltonian(cfg: PhysicalConfig, space: SystemSpace) -> np.ndarray:
    """Rotating-frame three-level Hamiltonian with position-dependent couplings."""
    _check_space(space, 3)
    a = space.a()
    h = cfg.nu * dagger(a) @ a - cfg.delta_a * space.s(0, 0) - cfg.delta_b * space.s(1, 1)
    for g, eta, lower in ((cfg.g_a, cfg.eta_a, 0), (cfg.g_b, cfg.eta_b, 1)):
        up = g * displacement_factor(space, eta) @ space.s(lower, 2)
        h = h + up + dagger(up)
    return h


def build_rotation_generator(cfg: PhysicalConfig, space: SystemSpace) -> np.ndarray:
    """Anti-Hermitian generator J with ``T = exp(J)`` removing level 2 at first order."""
    _check_space(space, 3)
    j = np.zeros((space.dim, space.dim), dtype=complex)
    for g, d, eta, lower in ((cfg.g_a, cfg.delta_a, cfg.eta_a, 0), (cfg.g_b, cfg.delta_b, cfg.eta_b, 1)):
        up = (g / d) * displacement_factor(space, eta) @ space.s(lower, 2)
        j = j + up - dagger(up)
    return j


def exact_transform(h: np.ndarray, j: np.ndarray) -> np.ndarray:
    """``T H T^dagger`` with ``T = exp(J)``, evaluated without series truncation."""
    if h.shape != j.shape:
        raise ValueError(f"dimension mismatch: H {h.shape} vs J {j.shape}")
    t = matrix_exp(j)
    return t @ h @ dagger(t)


def check_sideband(cfg: PhysicalConfig, sideband: Sideband | str, rtol: float = 1e-6) -> EffectiveParams:
    sb = Sideband(sideband)
    ep = effective_params(cfg)
    target = sb.resonance(cfg.nu)
    if target is not None and abs(ep.delta - target) > rtol * cfg.nu:
        raise SidebandMismatch(
            f"{sb.value} sideband needs delta = {target:.6g} rad/s, config gives {ep.delta:.6g} "
            "(use tune_detuning)"
        )
    return ep


def build_effective_hamiltonian(cfg: PhysicalConfig, space: SystemSpace, sideband: Sideband | str) -> np.ndarray:
    """Interaction Hamiltonian of the two-level effective model.

    ``red``/``blue`` are the lowest-order Lamb-Dicke sideband terms (interaction
    picture), ``carrier`` the zero-phonon term, and ``full_exponential`` keeps
    ``exp(i eta (a + a^dagger))`` with no rotating-wave selection; add
    :func:`build_effective_h0` to it for the rotating-frame generator.
    """
    _check_space(space, 2)
    sb = Sideband(sideband)
    ep = check_sideband(cfg, sb)
    c = ep.coupling
    s01 = space.s(0, 1)
    a = space.a()
    if sb is Sideband.FULL_EXPONENTIAL:
        up = c * displacement_factor(space, ep.eta) @ s01
        return -(up + dagger(up))
    if sb is Sideband.CARRIER:
        return -(c * s01 + np.conj(c) * dagger(s01))
    phonon = a if sb is Sideband.RED else dagger(a)
    up = c * phonon @ s01
    return -1j * ep.eta * (up - dagger(up))


def build_effective_h0(cfg: PhysicalConfig, space: SystemSpace) -> np.ndarray:
    """Stark-shifted free Hamiltonian of the transformed frame (any level count)."""
    a = space.a()
    return (
        cfg.nu * dagger(a) @ a
        - (cfg.delta_a + abs(cfg.g_a) ** 2 / cfg.delta_a) * space.s(0, 0)
        - (cfg.delta_b + abs(cfg.g_b) ** 2 / cfg.delta_b) * space.s(1, 1)
    )


def ground_projector(space: SystemSpace) -> np.ndarray:
    """Projector onto internal levels {0, 1}."""
    return space.s(0, 0) + space.s(1, 1)


def embed_two_level(op: np.ndarray, space3: SystemSpace) -> np.ndarray:
    """Place a two-level-space operator into the {0, 1} block of a three-level space."""
    _check_space(space3, 3)
    n2 = 2 * space3.fock_dim
    if op.shape != (n2, n2):
        raise ValueError(f"expected shape {(n2, n2)}, got {op.shape}")
    out = np.zeros((space3.dim, space3.dim), dtype=complex)
    out[:n2, :n2] = op
    return out


def transformation_error(cfg: PhysicalConfig, space: SystemSpace) -> float:
    """Relative error of the second-order effective Hamiltonian on the {0, 1} block.

    ``||P T H T^dagger P - H_eff|| / ||H_eff,int||`` in the spectral norm, where
    ``H_eff`` is the Stark-shifted free part plus the full-exponential coupling.
    """
    _check_space(space, 3)
    space2 = SystemSpace(space.fock_dim, 2)
    h_int = embed_two_level(build_effective_hamiltonian(cfg, space2, Sideband.FULL_EXPONENTIAL), space)
    h_eff = build_effective_h0(cfg, space) @ ground_projector(space) + h_int
    p = ground_projector(space)
    h_t = exact_transform(build_full_hamiltonian(cfg, space), build_rotation_generator(cfg, space))
    return float(np.linalg.norm(p @ h_t @ p - h_eff, 2) / np.linalg.norm(h_int, 2))
