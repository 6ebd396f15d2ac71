"""Scenario configuration, preset runs, and the full-vs-effective comparison."""

from __future__ import annotations

import dataclasses
import io
import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields
from pathlib import Path

import numpy as np

from .fitting import MIN_SAMPLES, FitResult, fit_damped_cosine
from .integrate import (
    IntegrationPlan,
    StiffnessError,
    Trajectory,
    default_dt,
    integrate,
)
from .lindblad import effective_master_equation, full_master_equation
from .model import PhysicalConfig, Sideband, effective_params, tune_detuning
from .observables import coherent_state, fock_state
from .operators import SystemSpace

log = logging.getLogger(__name__)

TWO_PI = 2.0 * math.pi
AUTO = "auto"
#: Target sample count when ``sample_stride`` is automatic.
AUTO_SAMPLES = 2000


class ConfigError(ValueError):
    """Invalid scenario configuration; the message names the offending key."""


def _bool(text: str) -> bool:
    t = text.strip().lower()
    if t in ("on", "true", "yes", "1"):
        return True
    if t in ("off", "false", "no", "0"):
        return False
    raise ValueError(f"expected on/off, got {text!r}")


def _initial(text: str) -> tuple[str, float]:
    kind, _, val = text.strip().partition(":")
    kind = kind.strip().lower()
    if kind == "fock":
        n = int(val)
        if n < 0:
            raise ValueError("Fock number must be >= 0")
        return ("fock", n)
    if kind == "coherent":
        nbar = float(val)
        if nbar < 0:
            raise ValueError("coherent nbar must be >= 0")
        return ("coherent", nbar)
    raise ValueError(f"expected fock:<n> or coherent:<nbar>, got {text!r}")


def _fmt_initial(v: tuple[str, float]) -> str:
    kind, x = v
    return f"fock:{int(x)}" if kind == "fock" else f"coherent:{x!r}"


def _auto(parse):
    def inner(text: str):
        return AUTO if text.strip().lower() == AUTO else parse(text)

    return inner


def _positive_int(text: str) -> int:
    v = int(text)
    if v < 1:
        raise ValueError("must be a positive integer")
    return v


# key -> (parser, renderer); order is the rendering order
_KEYS = {
    "preset": (str.strip, str),
    "model": (lambda s: {"effective": "effective", "full": "full"}[s.strip()], str),
    "sideband": (lambda s: Sideband(s.strip()).value, str),
    "crossed_terms": (_bool, lambda b: "on" if b else "off"),
    "nu_hz": (float, repr),
    "delta_a_hz": (float, repr),
    "delta_b_hz": (_auto(float), lambda v: v if v == AUTO else repr(v)),
    "g_a_hz": (float, repr),
    "g_b_hz": (float, repr),
    "gamma_sum_hz": (float, repr),
    "gamma_ratio": (float, repr),
    "eta_a": (float, repr),
    "eta_b": (float, repr),
    "fock_dim": (_auto(_positive_int), str),
    "initial": (_initial, _fmt_initial),
    "level": (int, str),
    "t_max_s": (float, repr),
    "dt_s": (_auto(float), lambda v: v if v == AUTO else repr(v)),
    "sample_stride": (_auto(_positive_int), str),
    "out": (str.strip, str),
}

REQUIRED = ("nu_hz", "delta_a_hz", "g_a_hz", "g_b_hz", "initial", "t_max_s", "sideband")


@dataclass(frozen=True)
class ScenarioConfig:
    """A fully resolved scenario; frequencies in Hz, times in s."""

    nu_hz: float
    delta_a_hz: float
    g_a_hz: float
    g_b_hz: float
    initial: tuple[str, float]
    t_max_s: float
    sideband: str
    preset: str = "custom"
    model: str = "effective"
    crossed_terms: bool = True
    delta_b_hz: float | str = AUTO
    gamma_sum_hz: float = 0.0
    gamma_ratio: float = 1.0
    eta_a: float = 0.101
    eta_b: float = -0.101
    fock_dim: int | str = AUTO
    level: int = 0
    dt_s: float | str = AUTO
    sample_stride: int | str = AUTO
    out: str = "trajectory.tsv"

    def __post_init__(self):
        if self.nu_hz <= 0:
            raise ConfigError("nu_hz: trap frequency must be positive")
        if self.t_max_s <= 0:
            raise ConfigError("t_max_s: must be positive")
        if self.gamma_sum_hz < 0:
            raise ConfigError("gamma_sum_hz: must be non-negative")
        if self.gamma_ratio <= 0:
            raise ConfigError("gamma_ratio: must be positive")
        if self.dt_s != AUTO and not 0 < self.dt_s <= self.t_max_s:
            raise ConfigError("dt_s: must satisfy 0 < dt_s <= t_max_s")
        if self.level not in (0, 1):
            raise ConfigError("level: initial internal level must be 0 or 1")
        if self.fock_dim != AUTO and self.fock_dim < 2:
            raise ConfigError("fock_dim: must be >= 2")
        try:
            self.physical()
        except (ValueError, ZeroDivisionError) as exc:
            raise ConfigError(f"physical parameters: {exc}") from exc

    def with_(self, **changes) -> ScenarioConfig:
        return dataclasses.replace(self, **changes)

    @property
    def resolved_fock_dim(self) -> int:
        if self.fock_dim != AUTO:
            return int(self.fock_dim)
        from .operators import default_fock_dim

        kind, x = self.initial
        return default_fock_dim(float(x))

    def physical(self) -> PhysicalConfig:
        """Angular-unit physical parameters with delta_b tuned when automatic."""
        gsum = TWO_PI * self.gamma_sum_hz
        r = self.gamma_ratio
        delta_b = self.delta_a_hz if self.delta_b_hz == AUTO else self.delta_b_hz
        cfg = PhysicalConfig(
            nu=TWO_PI * self.nu_hz,
            delta_a=TWO_PI * self.delta_a_hz,
            delta_b=TWO_PI * delta_b,
            g_a=TWO_PI * self.g_a_hz,
            g_b=TWO_PI * self.g_b_hz,
            gamma_a=gsum * r / (1.0 + r),
            gamma_b=gsum / (1.0 + r),
            eta_a=self.eta_a,
            eta_b=self.eta_b,
            fock_dim=self.resolved_fock_dim,
        )
        if self.delta_b_hz == AUTO:
            cfg = tune_detuning(cfg, self.sideband)
        return cfg


def _g_for(omega_hz: float, delta_hz: float) -> float:
    # symmetric couplings: Omega = 2 g^2 / Delta
    return math.sqrt(omega_hz * delta_hz / 2.0)


_TRAP_PARAMS = dict(
    nu_hz=11.2e6,
    delta_a_hz=12e9,
    g_a_hz=_g_for(475e3, 12e9),
    g_b_hz=_g_for(475e3, 12e9),
    gamma_sum_hz=19.4e6,
    gamma_ratio=1.0,
    eta_a=0.101,
    eta_b=-0.101,
    model="effective",
    crossed_terms=True,
)

PRESETS: dict[str, dict] = {
    "fig2": dict(_TRAP_PARAMS, sideband="blue", initial=("fock", 1), fock_dim=15, t_max_s=120e-6),
    "fig3": dict(_TRAP_PARAMS, sideband="blue", initial=("coherent", 3.0), fock_dim=25, t_max_s=120e-6),
    "fig4": dict(_TRAP_PARAMS, sideband="red", initial=("coherent", 3.0), fock_dim=25, t_max_s=1.2e-3),
    "fig5": dict(_TRAP_PARAMS, sideband="red", initial=("coherent", 3.0), fock_dim=25, t_max_s=1.2e-3),
    # scaled parameters for the full-vs-effective check: Delta = 50 g, nu = 10 Omega
    "crossmodel": dict(
        nu_hz=10 * 2 * 2e6**2 / 100e6,
        delta_a_hz=100e6,
        g_a_hz=2e6,
        g_b_hz=2e6,
        gamma_sum_hz=0.0,
        gamma_ratio=1.0,
        eta_a=0.101,
        eta_b=-0.101,
        model="full",
        crossed_terms=False,
        sideband="red",
        initial=("fock", 1),
        fock_dim=10,
        t_max_s=AUTO,
    ),
}


def preset(name: str, **overrides) -> ScenarioConfig:
    if name not in PRESETS:
        raise ConfigError(f"preset: unknown preset {name!r} (choose from {', '.join(PRESETS)})")
    values = dict(PRESETS[name], preset=name, out=f"{name}_trajectory.tsv")
    values.update(overrides)
    if values.get("t_max_s") == AUTO:
        values["t_max_s"] = _two_rabi_periods(values)
    return ScenarioConfig(**values)


def _two_rabi_periods(values: dict) -> float:
    omega = 2 * values["g_a_hz"] * values["g_b_hz"] / values["delta_a_hz"]
    eta = values.get("eta_a", 0.101) - values.get("eta_b", -0.101)
    return 2.0 / (eta * omega)


def parse_config(text: str) -> ScenarioConfig:
    """Parse a ``key = value`` document (``#`` comments) into a validated config."""
    raw: dict[str, str] = {}
    for lineno, line in enumerate(io.StringIO(text), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key = key.strip()
        if not sep:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {line!r}")
        if key not in _KEYS:
            raise ConfigError(f"{key}: unknown key (line {lineno})")
        if key in raw:
            raise ConfigError(f"{key}: given twice (line {lineno})")
        raw[key] = value.strip()

    values = {}
    for key, text_value in raw.items():
        try:
            values[key] = _KEYS[key][0](text_value)
        except (ValueError, KeyError) as exc:
            raise ConfigError(f"{key}: invalid value {text_value!r} ({exc})") from None
    name = values.pop("preset", None)
    if name is not None:
        return preset(name, **values)
    missing = [k for k in REQUIRED if k not in values]
    if missing:
        raise ConfigError(f"missing required keys: {', '.join(missing)} (or give preset = fig2|fig3|fig4|fig5|crossmodel)")
    try:
        return ScenarioConfig(**values)
    except TypeError as exc:
        raise ConfigError(str(exc)) from None


def render_config(cfg: ScenarioConfig) -> str:
    """Serialize losslessly; ``parse_config(render_config(c)) == c``."""
    lines = []
    for key, (_, fmt) in _KEYS.items():
        value = getattr(cfg, key)
        if key == "preset" and value == "custom":
            continue
        lines.append(f"{key} = {fmt(value)}")
    return "\n".join(lines) + "\n"


def apply_overrides(cfg: ScenarioConfig, overrides: list[str]) -> ScenarioConfig:
    """Apply ``key=value`` strings on top of a config."""
    text = render_config(cfg)
    values = dict(line.split(" = ", 1) for line in text.splitlines())
    for item in overrides:
        key, sep, value = item.partition("=")
        if not sep:
            raise ConfigError(f"override {item!r}: expected key=value")
        key = key.strip()
        if key not in _KEYS:
            raise ConfigError(f"{key}: unknown key")
        if key == "preset":
            raise ConfigError("preset: cannot be overridden")
        values[key] = value.strip()
    name = values.pop("preset", None)
    body = "\n".join(f"{k} = {v}" for k, v in values.items())
    cfg2 = parse_config(body)
    return cfg2.with_(preset=name) if name else cfg2


# ---------------------------------------------------------------- running


@dataclass
class RunSummary:
    config: ScenarioConfig
    fit: FitResult | None
    quasi_stationary_p_down: float
    max_trace_drift: float
    max_herm_dev: float
    min_eigenvalue: float
    wall_clock_s: float
    extra: dict = field(default_factory=dict)

    def render(self) -> str:
        rows = [
            ("preset", self.config.preset),
            ("model", self.config.model),
            ("sideband", self.config.sideband),
            ("crossed_terms", "on" if self.config.crossed_terms else "off"),
            ("samples", self.extra.get("samples", "")),
            ("dt_s", repr(self.extra.get("dt", float("nan")))),
        ]
        if self.fit is not None:
            rows += [
                ("fit_rabi_rad_s", repr(self.fit.rabi)),
                ("fit_decay_per_s", repr(self.fit.decay)),
                ("fit_residual_rms", repr(self.fit.residual_rms)),
                ("fit_converged", str(self.fit.converged).lower()),
            ]
        rows += [
            ("quasi_stationary_p_down", repr(self.quasi_stationary_p_down)),
            ("max_trace_drift", repr(self.max_trace_drift)),
            ("max_hermiticity_dev", repr(self.max_herm_dev)),
            ("min_eigenvalue", repr(self.min_eigenvalue)),
            ("wall_clock_s", f"{self.wall_clock_s:.3f}"),
        ]
        return "".join(f"{k} = {v}\n" for k, v in rows)


def initial_state(cfg: ScenarioConfig, space: SystemSpace) -> np.ndarray:
    kind, x = cfg.initial
    if kind == "fock":
        return fock_state(space, int(x), cfg.level)
    return coherent_state(space, math.sqrt(x), cfg.level)


def build_master_equation(cfg: ScenarioConfig):
    phys = cfg.physical()
    if cfg.model == "full":
        space = SystemSpace(phys.fock_dim, 3)
        return full_master_equation(phys, space), space
    space = SystemSpace(phys.fock_dim, 2)
    return effective_master_equation(phys, cfg.sideband, cfg.crossed_terms, space), space


def make_plan(cfg: ScenarioConfig, me) -> IntegrationPlan:
    dt = default_dt(me) if cfg.dt_s == AUTO else cfg.dt_s
    n_steps = max(1, math.ceil(cfg.t_max_s / dt))
    if cfg.sample_stride == AUTO:
        stride = max(1, n_steps // AUTO_SAMPLES)
    else:
        stride = int(cfg.sample_stride)
    n_steps = stride * math.ceil(n_steps / stride)
    # keep t_max exact; shrink dt so the grid lands on it
    dt = cfg.t_max_s / n_steps
    return IntegrationPlan(cfg.t_max_s, dt, stride)


def quasi_stationary(traj: Trajectory, fraction: float = 0.1) -> float:
    n = len(traj.times)
    k = max(1, int(round(fraction * n)))
    return float(np.mean(traj.p_down[-k:]))


def simulate(cfg: ScenarioConfig, method: str = "auto") -> Trajectory:
    me, space = build_master_equation(cfg)
    plan = make_plan(cfg, me)
    rho0 = initial_state(cfg, space)
    log.info("%s: %s model, %s sideband, dim %d, %d steps", cfg.preset, cfg.model, cfg.sideband, space.dim, plan.n_steps)
    return integrate(me, rho0, plan, space, method=method, metadata={"preset": cfg.preset})


def run_scenario(cfg: ScenarioConfig, fit: bool | None = None, write: bool = True) -> tuple[Trajectory, RunSummary]:
    """Integrate one scenario and (optionally) write trajectory and summary files.

    ``fit=None`` fits the damped cosine when the initial motional state is a
    Fock state and the record is long enough.
    """
    t0 = time.perf_counter()
    try:
        traj = simulate(cfg)
    except (ValueError, RuntimeError) as exc:
        log.error("[%s] %s", cfg.preset, exc)
        raise
    result = None
    if fit is None:
        fit = cfg.initial[0] == "fock" and len(traj) >= MIN_SAMPLES
    if fit:
        try:
            result = fit_damped_cosine(traj)
        except ValueError as exc:
            log.warning("[%s] damped-cosine fit skipped: %s", cfg.preset, exc)
    summary = RunSummary(
        config=cfg,
        fit=result,
        quasi_stationary_p_down=quasi_stationary(traj),
        max_trace_drift=traj.trace_drift,
        max_herm_dev=float(np.max(traj.herm_dev)),
        min_eigenvalue=float(np.min(traj.min_eig)),
        wall_clock_s=time.perf_counter() - t0,
        extra={"samples": len(traj), "dt": traj.metadata["dt"]},
    )
    if write:
        write_trajectory(traj, cfg.out)
        Path(summary_path(cfg.out)).write_text(summary.render())
    return traj, summary


def run_many(cfgs: list[ScenarioConfig], workers: int | None = None, **kwargs) -> list:
    """Independent scenarios, optionally in worker processes."""
    if not workers or workers <= 1:
        return [run_scenario(c, **kwargs) for c in cfgs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(run_scenario, c, **kwargs) for c in cfgs]
        return [f.result() for f in futures]


def summary_path(out: str) -> str:
    p = Path(out)
    return str(p.with_suffix("")) + ".summary.txt"


TRAJECTORY_COLUMNS = ("t_s", "p_down", "coh_re", "coh_im", "coh_abs", "n_mean", "trace", "min_eig")


def trajectory_table(traj: Trajectory) -> np.ndarray:
    return np.column_stack([
        traj.times,
        traj.p_down,
        traj.coherence.real,
        traj.coherence.imag,
        np.abs(traj.coherence),
        traj.n_mean,
        traj.trace,
        traj.min_eig,
    ])


def write_trajectory(traj: Trajectory, path: str | Path):
    np.savetxt(path, trajectory_table(traj), fmt="%.12g", delimiter="\t", header="\t".join(TRAJECTORY_COLUMNS), comments="")


def read_trajectory(path: str | Path) -> dict[str, np.ndarray]:
    data = np.loadtxt(path, delimiter="\t", skiprows=1, ndmin=2)
    with open(path) as fh:
        header = fh.readline().rstrip("\n").split("\t")
    return {name: data[:, i] for i, name in enumerate(header)}


# ---------------------------------------------------------------- cross-model


@dataclass
class CrossModelResult:
    times: np.ndarray
    p_full: np.ndarray
    p_effective: np.ndarray
    max_abs_diff: float
    eps: float
    error_budget: float
    rabi_window_periods: float
    min_eig_full: float

    def render(self) -> str:
        rows = [
            ("eps", repr(self.eps)),
            ("max_abs_dp_down", repr(self.max_abs_diff)),
            ("error_budget_eps", repr(self.error_budget)),
            ("window_rabi_periods", repr(self.rabi_window_periods)),
            ("min_eigenvalue_full", repr(self.min_eig_full)),
        ]
        return "".join(f"{k} = {v}\n" for k, v in rows)


#: dt * fastest rate used for automatic steps in the comparison
CROSSMODEL_STEP = 0.05


def run_crossmodel(cfg: ScenarioConfig, n_samples: int = 400) -> CrossModelResult:
    """Integrate the three-level and effective master equations from one state.

    The effective side keeps the untruncated coupling and Stark-shifted free
    Hamiltonian (``full_exponential``) so both run in the same rotating frame
    and differ only by the second-order rotation.
    """
    phys = cfg.physical()
    n = phys.fock_dim
    space3, space2 = SystemSpace(n, 3), SystemSpace(n, 2)
    me_full = full_master_equation(phys, space3)
    me_eff = effective_master_equation(phys, Sideband.FULL_EXPONENTIAL, False, space2)
    interval = cfg.t_max_s / n_samples
    trajs = []
    for me, space in ((me_full, space3), (me_eff, space2)):
        rate = me.fastest_rate()
        if cfg.dt_s == AUTO:
            stride = max(1, math.ceil(interval * rate / CROSSMODEL_STEP))
        else:
            if cfg.dt_s * rate >= 0.1:
                raise StiffnessError(f"dt_s: dt * fastest rate = {cfg.dt_s * rate:.3g} >= 0.1 for the {me.model_tag} model")
            stride = max(1, round(interval / cfg.dt_s))
        plan = IntegrationPlan(cfg.t_max_s, interval / stride, stride)
        trajs.append(integrate(me, initial_state(cfg, space), plan, space))
    full, eff = trajs
    ep = effective_params(phys)
    diff = np.abs(full.p_down - eff.p_down)
    return CrossModelResult(
        times=full.times,
        p_full=full.p_down,
        p_effective=eff.p_down,
        max_abs_diff=float(diff.max()),
        eps=float(max(abs(ep.eps_a), abs(ep.eps_b))),
        error_budget=float(max(abs(ep.eps_a), abs(ep.eps_b))),
        rabi_window_periods=float(cfg.t_max_s * ep.eta * ep.omega / TWO_PI),
        min_eig_full=float(full.min_eig.min()),
    )


def crossmodel_config(eps: float = 0.02, gamma_over_delta: float = 0.0, **overrides) -> ScenarioConfig:
    """Scaled comparison parameters: ``g = eps Delta``, ``nu = 10 Omega``, two Rabi periods."""
    delta_hz = 100e6
    g = eps * delta_hz
    omega = 2 * g * g / delta_hz
    values = dict(
        g_a_hz=g,
        g_b_hz=g,
        nu_hz=10 * omega,
        delta_a_hz=delta_hz,
        gamma_sum_hz=2 * gamma_over_delta * delta_hz,
        t_max_s=AUTO,
    )
    values.update(overrides)
    return preset("crossmodel", **values)
