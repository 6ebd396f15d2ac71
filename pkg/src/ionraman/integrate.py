"""Fixed-step fourth-order Runge-Kutta propagation with conservation monitors."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .lindblad import MasterEquation
from .observables import coherence_01, mean_phonon, min_eigenvalue, p_down
from .operators import SystemSpace

log = logging.getLogger(__name__)

#: Trace drift and negative-eigenvalue thresholds that abort a run.
TRACE_ABORT = 1e-6
EIG_ABORT = -1e-6
#: dt times the fastest generator rate must stay below this.
STABILITY_LIMIT = 0.1
#: Largest dimension for which the composed one-step map is materialized.
PROPAGATOR_MAX_DIM = 40


class MonitorViolation(RuntimeError):
    def __init__(self, what: str, t: float, value: float):
        super().__init__(f"{what} violated at t={t:.6g} s: {value:.3e}")
        self.what, self.t, self.value = what, t, value


class IntegrationError(RuntimeError):
    pass


class StiffnessError(ValueError):
    pass


@dataclass(frozen=True)
class IntegrationPlan:
    t_max: float
    dt: float
    sample_stride: int = 1
    check_trace: bool = True
    check_hermiticity: bool = True
    check_positivity: bool = True

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError(f"dt must be positive, got {self.dt}")
        if self.dt > self.t_max:
            raise ValueError(f"dt={self.dt} exceeds t_max={self.t_max}")
        if int(self.sample_stride) != self.sample_stride or self.sample_stride < 1:
            raise ValueError(f"sample_stride must be a positive integer, got {self.sample_stride}")

    @property
    def n_steps(self) -> int:
        return int(round(self.t_max / self.dt))

    def check_stability(self, me: MasterEquation):
        rate = me.fastest_rate()
        if self.dt * rate >= STABILITY_LIMIT:
            raise StiffnessError(
                f"dt * fastest rate = {self.dt * rate:.3g} >= {STABILITY_LIMIT}; "
                f"use dt < {STABILITY_LIMIT / rate:.3g} s"
            )


def default_dt(me: MasterEquation, points_per_period: int = 200) -> float:
    """One period of the fastest coherent frequency split into ``points_per_period`` steps."""
    return 2.0 * math.pi / (points_per_period * me.coherent_bandwidth())


@dataclass
class Trajectory:
    times: np.ndarray
    p_down: np.ndarray
    coherence: np.ndarray
    n_mean: np.ndarray
    trace: np.ndarray
    min_eig: np.ndarray
    herm_dev: np.ndarray
    metadata: dict = field(default_factory=dict)
    final_state: np.ndarray | None = None

    def __len__(self):
        return len(self.times)

    @property
    def trace_drift(self) -> float:
        return float(np.max(np.abs(self.trace - 1.0)))

    def window(self, start: float, stop: float) -> slice:
        """Index slice covering fractions ``[start, stop)`` of the samples."""
        n = len(self.times)
        return slice(int(math.floor(start * n)), int(math.ceil(stop * n)))


def step_rk4(me: MasterEquation, rho: np.ndarray, t: float, dt: float) -> np.ndarray:
    """One classical RK4 step; the result is not renormalized."""
    k1 = me.rhs(rho, t)
    k2 = me.rhs(rho + 0.5 * dt * k1, t + 0.5 * dt)
    k3 = me.rhs(rho + 0.5 * dt * k2, t + 0.5 * dt)
    k4 = me.rhs(rho + dt * k3, t + dt)
    out = rho + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    if not np.all(np.isfinite(out)):
        raise IntegrationError(f"non-finite density matrix after RK4 step at t={t:.6g} s (dt={dt:.3g})")
    return out


def rk4_step_map(me: MasterEquation, dt: float) -> np.ndarray:
    """Matrix of one RK4 step acting on row-major ``vec(rho)``.

    The generator is linear and time independent, so k steps of RK4 equal the
    k-th power of this map.
    """
    d = me.dim
    basis = np.eye(d * d, dtype=complex).reshape(d * d, d, d)
    stepped = step_rk4(me, basis, 0.0, dt)
    return stepped.reshape(d * d, d * d).T


def _rk4_vec(sup, vec: np.ndarray, dt: float) -> np.ndarray:
    k1 = sup @ vec
    k2 = sup @ (vec + 0.5 * dt * k1)
    k3 = sup @ (vec + 0.5 * dt * k2)
    k4 = sup @ (vec + dt * k3)
    return vec + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def _space_for(me: MasterEquation) -> SystemSpace:
    levels = 3 if me.model_tag == "full" else 2
    return SystemSpace(me.dim // levels, levels)


def integrate(
    me: MasterEquation,
    rho0: np.ndarray,
    plan: IntegrationPlan,
    space: SystemSpace | None = None,
    method: str = "auto",
    metadata: dict | None = None,
) -> Trajectory:
    """March ``rho0`` over the plan, recording observables every ``sample_stride`` steps.

    All methods run the same fixed-step RK4 scheme. ``"dense"`` calls
    :func:`step_rk4` (matrix form), ``"sparse"`` steps ``vec(rho)`` with the
    sparse Liouvillian, and ``"propagator"`` applies the ``sample_stride``-th
    power of the one-step map. ``"auto"`` uses the propagator when
    ``dim <= PROPAGATOR_MAX_DIM`` and the sparse stepper otherwise.
    """
    space = space or _space_for(me)
    if space.dim != me.dim or rho0.shape != (me.dim, me.dim):
        raise ValueError(f"dimension mismatch: generator {me.dim}, space {space.dim}, rho0 {rho0.shape}")
    plan.check_stability(me)
    if method == "auto":
        method = "propagator" if me.dim <= PROPAGATOR_MAX_DIM and plan.sample_stride > 1 else "sparse"
    if method not in ("dense", "sparse", "propagator"):
        raise ValueError(f"unknown method {method!r}")

    n_samples = plan.n_steps // plan.sample_stride + 1
    times = plan.dt * plan.sample_stride * np.arange(n_samples)
    rec = {k: np.empty(n_samples) for k in ("p_down", "n_mean", "trace", "min_eig", "herm_dev")}
    coh = np.empty(n_samples, dtype=complex)

    def record(i, rho):
        t = times[i]
        tr = float(np.trace(rho).real)
        herm = float(np.max(np.abs(rho - rho.conj().T)))
        eig = min_eigenvalue(rho)
        rec["p_down"][i] = p_down(rho, space)
        rec["n_mean"][i] = mean_phonon(rho, space)
        rec["trace"][i] = tr
        rec["min_eig"][i] = eig
        rec["herm_dev"][i] = herm
        coh[i] = coherence_01(rho, space)
        if not np.isfinite(tr):
            raise IntegrationError(f"non-finite density matrix at t={t:.6g} s (sample {i})")
        if plan.check_trace and abs(tr - 1.0) > TRACE_ABORT:
            raise MonitorViolation("trace drift", t, tr - 1.0)
        if plan.check_positivity and eig < EIG_ABORT:
            raise MonitorViolation("positivity", t, eig)

    rho = np.array(rho0, dtype=complex)
    record(0, rho)
    if method == "dense":
        t = 0.0
        for i in range(1, n_samples):
            for _ in range(plan.sample_stride):
                rho = step_rk4(me, rho, t, plan.dt)
                t += plan.dt
            record(i, rho)
    elif method == "sparse":
        sup = me.liouvillian()
        vec = rho.reshape(-1).copy()
        for i in range(1, n_samples):
            for _ in range(plan.sample_stride):
                vec = _rk4_vec(sup, vec, plan.dt)
            rho = vec.reshape(me.dim, me.dim)
            if not np.all(np.isfinite(vec)):
                raise IntegrationError(f"non-finite density matrix before t={times[i]:.6g} s")
            record(i, rho)
    else:
        step_map = np.linalg.matrix_power(rk4_step_map(me, plan.dt), plan.sample_stride)
        vec = rho.reshape(-1)
        for i in range(1, n_samples):
            vec = step_map @ vec
            record(i, vec.reshape(me.dim, me.dim))
        rho = vec.reshape(me.dim, me.dim)

    meta = {"model": me.model_tag, "dt": plan.dt, "steps": (n_samples - 1) * plan.sample_stride, "method": method}
    meta.update(metadata or {})
    return Trajectory(times, rec["p_down"], coh, rec["n_mean"], rec["trace"], rec["min_eig"], rec["herm_dev"], meta, rho)
