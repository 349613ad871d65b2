"""Monte-Carlo and closed-form coherence of a driven two-level spin under
Ornstein-Uhlenbeck detuning and drive-amplitude noise.

The package simulates Ramsey, Hahn, CPMG and XY8 sequences with finite-width
pulses, averages differential readout over noise realizations with
counter-based deterministic RNG (bit-identical results for any thread count),
evaluates the matching closed-form filter-function decay rates, fits decay
curves and correlation times, and maps gate fidelities over static error
grids.  Hot loops run through numba kernels with a pure-numpy fallback
selected by the SPINDECAY_BACKEND environment variable.
"""

from ._backend import ENV_VAR as BACKEND_ENV_VAR
from ._backend import active_backend
from ._rng import RandomStream, derive_key
from .analytic import (
    DecayModelParams,
    gamma_ou,
    hahn_limit,
    ramsey_envelope,
    stretched_exp,
    t2_from_diffusion,
    tau_c_from,
)
from .config import ConfigError, RunConfig
from .dynamics import (
    DriveParams,
    Propagator,
    PulseProgram,
    Segment,
    SpinState,
    StepConfig,
    evolve,
)
from .ensemble import (
    DecayCurve,
    EnsembleConfig,
    EnsembleResult,
    decay_curve,
    differential_signal,
    run_differential,
    run_ensemble,
    state_fidelity,
)
from .estimation import FitResult, RestartEnsemble, estimate_tau_c, fit_decay, r_squared
from .gatemap import ErrorGrid, fidelity_map, gate_fidelity, gate_program
from .noise import (
    NoiseParams,
    NoiseTrajectory,
    OUParams,
    generate_trajectory,
    ou_step,
    sample_initial,
)
from .sequences import (
    SequenceSpec,
    build_program,
    differential_pair,
    initial_state_variant,
    nominal_total_time,
)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    "BACKEND_ENV_VAR",
    "active_backend",
    "RandomStream",
    "derive_key",
    "OUParams",
    "NoiseParams",
    "NoiseTrajectory",
    "ou_step",
    "sample_initial",
    "generate_trajectory",
    "DriveParams",
    "StepConfig",
    "Segment",
    "PulseProgram",
    "SpinState",
    "Propagator",
    "evolve",
    "SequenceSpec",
    "build_program",
    "differential_pair",
    "initial_state_variant",
    "nominal_total_time",
    "EnsembleConfig",
    "EnsembleResult",
    "DecayCurve",
    "run_ensemble",
    "run_differential",
    "decay_curve",
    "differential_signal",
    "state_fidelity",
    "DecayModelParams",
    "gamma_ou",
    "hahn_limit",
    "t2_from_diffusion",
    "tau_c_from",
    "stretched_exp",
    "ramsey_envelope",
    "FitResult",
    "RestartEnsemble",
    "r_squared",
    "fit_decay",
    "estimate_tau_c",
    "ErrorGrid",
    "gate_program",
    "gate_fidelity",
    "fidelity_map",
    "RunConfig",
    "ConfigError",
]
