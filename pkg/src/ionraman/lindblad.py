"""Right-hand sides of the full and effective master equations."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sps

from .model import (
    LDConvention,
    PhysicalConfig,
    Sideband,
    build_effective_h0,
    build_effective_hamiltonian,
    build_full_hamiltonian,
    build_rotation_generator,
    check_sideband,
    displacement_factor,
    effective_params,
)
from .operators import SystemSpace, dagger, matrix_exp


def _check_dims(*ops):
    shapes = {op.shape for op in ops}
    if len(shapes) != 1:
        raise ValueError(f"dimension mismatch: {sorted(shapes)}")
    (shape,) = shapes
    if len(shape) != 2 or shape[0] != shape[1]:
        raise ValueError(f"expected square matrices, got {shape}")


def lindblad_apply(c: np.ndarray, rho: np.ndarray) -> np.ndarray:
    """``2 C rho C^dagger - {C^dagger C, rho}``."""
    _check_dims(c, rho)
    cd = dagger(c)
    cdc = cd @ c
    return 2.0 * c @ rho @ cd - cdc @ rho - rho @ cdc


@dataclass(frozen=True)
class CrossedSpec:
    """Parameters of the sideband-selected crossed dissipator terms."""

    eps_a: complex
    eps_b: complex
    eta_a: float
    eta_b: float
    gamma_a: float
    gamma_b: float
    sideband: Sideband = Sideband.RED
    convention: LDConvention = LDConvention.IMAGINARY

    @property
    def eta(self) -> float:
        return self.eta_a - self.eta_b

    @classmethod
    def from_config(cls, cfg: PhysicalConfig, sideband: Sideband | str = Sideband.RED) -> CrossedSpec:
        ep = effective_params(cfg)
        return cls(ep.eps_a, ep.eps_b, cfg.eta_a, cfg.eta_b, cfg.gamma_a, cfg.gamma_b, Sideband(sideband), cfg.ld_convention)


def _crossed_operators(space: SystemSpace, sideband: Sideband):
    if space.level_count != 2:
        raise ValueError("crossed terms live on the two-level effective space")
    sideband = Sideband(sideband)
    if sideband not in (Sideband.RED, Sideband.BLUE):
        raise ValueError(f"crossed terms are defined for the first red/blue sideband, not {sideband.value}")
    a = space.a()
    # phonon factor paired with S_01; a on the red sideband, a^dagger on the blue
    lo = a if sideband is Sideband.RED else dagger(a)
    return lo, dagger(lo), space.s(0, 0), space.s(1, 1), space.s(0, 1), space.s(1, 0)


def _hc(x: np.ndarray) -> np.ndarray:
    return x + dagger(x)


def crossed_apply(spec: CrossedSpec, rho: np.ndarray, space: SystemSpace | None = None) -> tuple[np.ndarray, np.ndarray]:
    """The two crossed terms ``(K_a rho, K_b rho)`` without their gamma/2 prefactors.

    ``K_a = K[eps_a(x) S_00, eps_b(x) S_10]`` and ``K_b = K[eps_b(x) S_11, eps_a(x) S_01]``
    after keeping the stationary first-order terms in eta.
    """
    if space is None:
        if rho.shape[0] % 2:
            raise ValueError("rho dimension must be even for the two-level space")
        space = SystemSpace(rho.shape[0] // 2, 2)
    _check_dims(rho, np.empty((space.dim, space.dim)))
    lo, hi, s00, s11, s01, s10 = _crossed_operators(space, spec.sideband)
    ea, eb, eta_a, eta_b = spec.eps_a, spec.eps_b, spec.eta_a, spec.eta_b
    if spec.convention is LDConvention.IMAGINARY:
        eta = spec.eta
        k_a = 1j * ea * np.conj(eb) * (
            2 * (eta_a * s00 @ lo @ rho @ s01 - eta_b * s00 @ rho @ lo @ s01)
            - eta * (lo @ s01 @ s00 @ rho + rho @ lo @ s01 @ s00)
        )
        k_b = 1j * eb * np.conj(ea) * (
            2 * (eta_b * s11 @ hi @ rho @ s10 - eta_a * s11 @ rho @ hi @ s10)
            + eta * (hi @ s10 @ s11 @ rho + rho @ hi @ s10 @ s11)
        )
    else:
        eta_s = eta_a + eta_b
        k_a = ea * np.conj(eb) * (
            2 * (eta_a * s00 @ lo @ rho @ s01 + eta_b * s00 @ rho @ lo @ s01)
            - eta_s * (lo @ s01 @ rho + rho @ lo @ s01)
        )
        k_b = eb * np.conj(ea) * (
            2 * (eta_b * s11 @ hi @ rho @ s10 + eta_a * s11 @ rho @ hi @ s10)
            - eta_s * (hi @ s10 @ rho + rho @ hi @ s10)
        )
    return _hc(k_a), _hc(k_b)


@dataclass
class MasterEquation:
    """Generator ``-i[H, rho] + sum_k rate_k L[C_k] rho`` plus optional crossed terms.

    The generator is time independent; it is compiled once into
    ``G rho + rho G^dagger + sum_k L_k rho R_k`` for fast evaluation.
    """

    hamiltonian: np.ndarray
    channels: list[tuple[np.ndarray, float]] = field(default_factory=list)
    crossed: CrossedSpec | None = None
    model_tag: str = "full"

    def __post_init__(self):
        self.hamiltonian = np.asarray(self.hamiltonian, dtype=complex)
        _check_dims(self.hamiltonian, *(c for c, _ in self.channels))
        for _, rate in self.channels:
            if rate < 0:
                raise ValueError(f"channel rate must be non-negative, got {rate}")
        if self.crossed is not None and self.hamiltonian.shape[0] % 2:
            raise ValueError("crossed terms need the two-level effective space")
        self._compile()

    @property
    def dim(self) -> int:
        return self.hamiltonian.shape[0]

    def _compile(self):
        g = -1j * self.hamiltonian
        lefts, rights = [], []
        for c, rate in self.channels:
            if rate == 0:
                continue
            cd = dagger(c)
            g = g - rate * cd @ c
            lefts.append(2.0 * rate * c)
            rights.append(cd)
        if self.crossed is not None:
            g, more_l, more_r = _compile_crossed(self.crossed, self.dim, g)
            lefts += more_l
            rights += more_r
        self._g = g
        self._gd = dagger(g)
        self._lefts = np.array(lefts, dtype=complex).reshape(-1, self.dim, self.dim)
        self._rights = np.array(rights, dtype=complex).reshape(-1, self.dim, self.dim)
        self._liouvillian = None

    def liouvillian(self) -> sps.csr_matrix:
        """Sparse generator acting on row-major ``vec(rho)``; same terms as :meth:`rhs`."""
        if self._liouvillian is None:
            eye = sps.identity(self.dim, dtype=complex, format="csr")
            sup = sps.kron(sps.csr_matrix(self._g), eye) + sps.kron(eye, sps.csr_matrix(self._gd.T))
            for left, right in zip(self._lefts, self._rights):
                sup = sup + sps.kron(sps.csr_matrix(left), sps.csr_matrix(right.T))
            sup = sps.csr_matrix(sup)
            sup.eliminate_zeros()
            self._liouvillian = sup
        return self._liouvillian

    def coherent_bandwidth(self) -> float:
        """Spread of Hamiltonian eigenvalues (rad/s)."""
        ev = np.linalg.eigvalsh(self.hamiltonian)
        return float(ev[-1] - ev[0])

    def fastest_rate(self) -> float:
        """Upper bound on the largest frequency or rate in the generator (rad/s)."""
        dissipative = self._g + 1j * self.hamiltonian
        rate = self.coherent_bandwidth() + 2.0 * np.linalg.norm(dissipative, 2)
        rate += sum(np.linalg.norm(l, 2) * np.linalg.norm(r, 2) for l, r in zip(self._lefts, self._rights))
        return float(rate)

    def rhs(self, rho: np.ndarray, t: float = 0.0) -> np.ndarray:
        out = self._g @ rho + rho @ self._gd
        if rho.ndim == 2:
            if self._lefts.shape[0]:
                out += (self._lefts @ rho @ self._rights).sum(axis=0)
        else:
            # stacked density matrices
            for left, right in zip(self._lefts, self._rights):
                out += left @ rho @ right
        return out


def _compile_crossed(spec: CrossedSpec, dim: int, g: np.ndarray):
    """Expand the crossed terms into left-multiplier and sandwich form."""
    space = SystemSpace(dim // 2, 2)
    lo, hi, s00, s11, s01, s10 = _crossed_operators(space, spec.sideband)
    ea, eb, eta_a, eta_b = spec.eps_a, spec.eps_b, spec.eta_a, spec.eta_b
    lefts, rights = [], []

    def term(coef, left, right):
        # coef * left rho right + h.c.
        lefts.extend([coef * left, np.conj(coef) * dagger(right)])
        rights.extend([right, dagger(left)])

    def anti(coef, x):
        # -(coef {x, rho}) + h.c. == G-term -(coef x + conj(coef) x^dagger)
        return -(coef * x + np.conj(coef) * dagger(x))

    if spec.convention is LDConvention.IMAGINARY:
        ca = 0.5 * spec.gamma_a * 1j * ea * np.conj(eb)
        cb = 0.5 * spec.gamma_b * 1j * eb * np.conj(ea)
        eta = spec.eta
        term(2 * eta_a * ca, s00 @ lo, s01)
        term(-2 * eta_b * ca, s00, lo @ s01)
        g = g + anti(eta * ca, lo @ s01 @ s00)
        term(2 * eta_b * cb, s11 @ hi, s10)
        term(-2 * eta_a * cb, s11, hi @ s10)
        g = g + anti(-eta * cb, hi @ s10 @ s11)
    else:
        ca = 0.5 * spec.gamma_a * ea * np.conj(eb)
        cb = 0.5 * spec.gamma_b * eb * np.conj(ea)
        eta_s = eta_a + eta_b
        term(2 * eta_a * ca, s00 @ lo, s01)
        term(2 * eta_b * ca, s00, lo @ s01)
        g = g + anti(eta_s * ca, lo @ s01)
        term(2 * eta_b * cb, s11 @ hi, s10)
        term(2 * eta_a * cb, s11, hi @ s10)
        g = g + anti(eta_s * cb, hi @ s10)
    return g, lefts, rights


def rhs(me: MasterEquation, rho: np.ndarray, t: float = 0.0) -> np.ndarray:
    return me.rhs(rho, t)


def rhs_reference(me: MasterEquation, rho: np.ndarray) -> np.ndarray:
    """Term-by-term evaluation of the generator (slow; used to check the compiled form)."""
    h = me.hamiltonian
    out = -1j * (h @ rho - rho @ h)
    for c, rate in me.channels:
        out = out + rate * lindblad_apply(c, rho)
    if me.crossed is not None:
        k_a, k_b = crossed_apply(me.crossed, rho)
        out = out + 0.5 * me.crossed.gamma_a * k_a + 0.5 * me.crossed.gamma_b * k_b
    return out


@dataclass(frozen=True)
class TransformedJumps:
    """Effective dissipator data plus exact rotated jump operators for validation."""

    channels: list[tuple[np.ndarray, float]]
    crossed: CrossedSpec
    second_order: tuple[np.ndarray, np.ndarray]
    exact: tuple[np.ndarray, np.ndarray]


def transform_jump_operators(cfg: PhysicalConfig, space: SystemSpace, sideband: Sideband | str = Sideband.RED) -> TransformedJumps:
    """Rotate the decay operators ``S_20``, ``S_21`` into the effective frame.

    ``channels`` and ``crossed`` live on the two-level space; ``second_order``
    and ``exact`` are three-level operators ``T S_2l T^dagger`` to second order
    and without truncation respectively.
    """
    if space.level_count != 3:
        raise ValueError("jump-operator rotation needs the three-level space")
    ep = effective_params(cfg)
    space2 = SystemSpace(space.fock_dim, 2)
    s2 = space2.s
    channels = [
        (s2(0, 0), cfg.gamma_a * abs(ep.eps_a) ** 2 / 2),
        (s2(1, 1), cfg.gamma_b * abs(ep.eps_b) ** 2 / 2),
        (s2(1, 0), cfg.gamma_a * abs(ep.eps_b) ** 2 / 2),
        (s2(0, 1), cfg.gamma_b * abs(ep.eps_a) ** 2 / 2),
    ]
    crossed = CrossedSpec.from_config(cfg, sideband)

    eps_a_x = ep.eps_a * displacement_factor(space, cfg.eta_a)
    eps_b_x = ep.eps_b * displacement_factor(space, cfg.eta_b)
    s = space.s
    # adjoints of T S_02 T^dagger ~ S_02 - eps_a*(x) S_00 - eps_b*(x) S_01 (and the S_12 analogue)
    second = (
        s(2, 0) - eps_a_x @ s(0, 0) - eps_b_x @ s(1, 0),
        s(2, 1) - eps_b_x @ s(1, 1) - eps_a_x @ s(0, 1),
    )
    t = matrix_exp(build_rotation_generator(cfg, space))
    td = dagger(t)
    exact = (t @ s(2, 0) @ td, t @ s(2, 1) @ td)
    return TransformedJumps(channels, crossed, second, exact)


def full_master_equation(cfg: PhysicalConfig, space: SystemSpace | None = None) -> MasterEquation:
    space = space or SystemSpace(cfg.fock_dim, 3)
    h = build_full_hamiltonian(cfg, space)
    channels = [(space.s(2, 0), cfg.gamma_a / 2), (space.s(2, 1), cfg.gamma_b / 2)]
    return MasterEquation(h, channels, None, "full")


def effective_master_equation(
    cfg: PhysicalConfig,
    sideband: Sideband | str,
    crossed_terms: bool = True,
    space: SystemSpace | None = None,
) -> MasterEquation:
    """Effective two-level master equation.

    Sideband choices ``red``/``blue``/``carrier`` give the interaction-picture
    generator with the four rotated channels (plus crossed terms on red/blue).
    ``full_exponential`` is the rotating-frame generator: Stark-shifted free
    part, untruncated coupling, and the unexpanded rotated jump operators
    ``eps_a(x) S_00 + eps_b(x) S_10`` and ``eps_b(x) S_11 + eps_a(x) S_01``.
    """
    sb = Sideband(sideband)
    space = space or SystemSpace(cfg.fock_dim, 2)
    check_sideband(cfg, sb)
    h = build_effective_hamiltonian(cfg, space, sb)
    if sb is Sideband.FULL_EXPONENTIAL:
        ep = effective_params(cfg)
        h = h + build_effective_h0(cfg, space)
        ea = ep.eps_a * displacement_factor(space, cfg.eta_a)
        eb = ep.eps_b * displacement_factor(space, cfg.eta_b)
        s = space.s
        channels = [
            (ea @ s(0, 0) + eb @ s(1, 0), cfg.gamma_a / 2),
            (eb @ s(1, 1) + ea @ s(0, 1), cfg.gamma_b / 2),
        ]
        return MasterEquation(h, channels, None, "effective")
    jumps = transform_jump_operators(cfg, SystemSpace(space.fock_dim, 3), sb if sb in (Sideband.RED, Sideband.BLUE) else Sideband.RED)
    crossed = jumps.crossed if crossed_terms and sb in (Sideband.RED, Sideband.BLUE) else None
    return MasterEquation(h, jumps.channels, crossed, "effective")
