"""Master-equation simulation of Raman-driven trapped ions with effective damping."""

from .fitting import DampedCosineFit, FitResult, PowerLawFit, fit_damped_cosine, fit_power_law
from .integrate import (
    IntegrationError,
    IntegrationPlan,
    MonitorViolation,
    StiffnessError,
    Trajectory,
    default_dt,
    integrate,
    step_rk4,
)
from .lindblad import (
    CrossedSpec,
    MasterEquation,
    crossed_apply,
    effective_master_equation,
    full_master_equation,
    lindblad_apply,
    rhs,
    transform_jump_operators,
)
from .model import (
    EffectiveParams,
    LDConvention,
    PhysicalConfig,
    Sideband,
    SidebandMismatch,
    build_effective_hamiltonian,
    build_full_hamiltonian,
    effective_params,
    transformation_error,
    tune_detuning,
)
from .observables import coherence_01, coherent_state, fock_state, mean_phonon, p_down, p_up
from .operators import SystemSpace, atomic_op, boson_annihilate, matrix_exp, tensor
from .scenarios import ConfigError, ScenarioConfig, parse_config, preset, render_config, run_crossmodel, run_scenario

__version__ = "0.1.0"
