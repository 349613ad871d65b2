"""Monte-Carlo ensemble engine.

Runs a pulse program over many noise realizations, averages density matrices,
and extracts dark-state populations, fidelities, and differential signals.

Determinism contract: realization k of sweep point p draws from streams
derived as (master_seed, p, k) (or (master_seed, k) for a standalone run),
with separate delta/eps substreams.  Each realization writes into its own
output slot and the reduction is a single index-ordered numpy sum on the
calling thread, so results are bit-identical for any worker thread count.

Differential readout: the plus/minus programs share every segment up to the
readout pulse; the engine propagates the shared prefix once and branches the
two readouts from the same noise state (common random numbers), which is also
what makes the per-realization paired standard error meaningful.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _backend
from ._rng import GOLDEN, mix64, derive_key
from .dynamics import DriveParams, SpinState, StepConfig
from .noise import NoiseParams, OUParams
from .sequences import SequenceSpec, differential_pair, nominal_total_time

__all__ = [
    "EnsembleConfig",
    "EnsembleResult",
    "DecayCurve",
    "run_ensemble",
    "state_fidelity",
    "differential_signal",
    "decay_curve",
]

_COLUMN_NORM_TOL = 1e-9


@dataclass(frozen=True)
class EnsembleConfig:
    """Ensemble size, seeding, integrator steps, and worker threads."""

    n_realizations: int = 2500
    master_seed: int = 0
    steps: StepConfig = field(default_factory=StepConfig)
    threads: int = 1
    backend: str | None = None  # None -> env var / auto

    def __post_init__(self):
        if self.n_realizations < 1:
            raise ValueError("n_realizations must be >= 1")


@dataclass
class EnsembleResult:
    """Averaged outcome of one program over the ensemble.

    `signal` here is the raw mean dark-state population of this single
    program; the normalized differential signal comes from
    `differential_signal` on a plus/minus pair.  `dark_populations` keeps the
    per-realization values so paired statistics stay available downstream.
    """

    rho_avg: SpinState
    state_fidelity: float
    signal: float
    standard_error: float
    dark_populations: np.ndarray
    ideal_dark: float
    rho_ideal: SpinState


@dataclass
class DecayCurve:
    """Differential-signal samples over a sweep, with sweep metadata.

    total_time_s is N tau for DD sequences and the free wait for Ramsey;
    n_pulses and tau_s keep the sweep coordinates needed by the
    correlation-time estimator.
    """

    label: str
    total_time_s: np.ndarray
    signal: np.ndarray
    stderr: np.ndarray
    n_realizations: np.ndarray  # per point; a scalar is broadcast
    n_pulses: np.ndarray
    tau_s: np.ndarray

    def __post_init__(self):
        self.total_time_s = np.asarray(self.total_time_s, dtype=float)
        self.signal = np.asarray(self.signal, dtype=float)
        self.stderr = np.asarray(self.stderr, dtype=float)
        self.n_pulses = np.asarray(self.n_pulses, dtype=np.int64)
        self.tau_s = np.asarray(self.tau_s, dtype=float)
        n_real = np.asarray(self.n_realizations, dtype=np.int64)
        if n_real.ndim == 0:
            n_real = np.full(len(self.total_time_s), int(n_real), dtype=np.int64)
        self.n_realizations = n_real
        lengths = {len(self.total_time_s), len(self.signal), len(self.stderr),
                   len(self.n_pulses), len(self.tau_s), len(self.n_realizations)}
        if lengths != {len(self.total_time_s)}:
            raise ValueError("decay-curve columns must have equal length")
        if len(self.total_time_s) == 0:
            raise ValueError("decay curve is empty")


def _realization_keys(master_seed: int, n: int, point_ids: tuple) -> tuple:
    """Vectorized (delta_keys, eps_keys) for realizations 0..n-1.

    Matches RandomStream.from_seed(master_seed, *point_ids, k).split(ch),
    ch = 0 for the delta channel and 1 for the eps channel.
    """
    base = derive_key(master_seed, *point_ids)
    with np.errstate(over="ignore"):
        ks = mix64(np.uint64(base) ^ ((np.arange(n, dtype=np.uint64) + np.uint64(1)) * GOLDEN))
        keys_d = mix64(ks ^ (np.uint64(1) * GOLDEN))
        keys_e = mix64(ks ^ (np.uint64(2) * GOLDEN))
    return keys_d, keys_e


def _zero_noise(noise: NoiseParams) -> NoiseParams:
    """Stochastic terms removed, deterministic offsets kept."""
    return NoiseParams(
        delta=OUParams(0.0, noise.delta.tau_corr, noise.delta.static_offset),
        epsilon=OUParams(0.0, noise.epsilon.tau_corr, noise.epsilon.static_offset),
    )


def _check_columns(cols: np.ndarray) -> None:
    norms = np.abs(cols[..., 0]) ** 2 + np.abs(cols[..., 1]) ** 2
    worst = float(np.max(np.abs(norms - 1.0)))
    if worst > _COLUMN_NORM_TOL:
        raise RuntimeError(f"propagator column norm defect {worst:.3e} exceeds {_COLUMN_NORM_TOL}")


def _columns_for(programs, noise, cfg: EnsembleConfig, point_ids: tuple) -> np.ndarray:
    keys_d, keys_e = _realization_keys(cfg.master_seed, cfg.n_realizations, point_ids)
    cols = _backend.run_columns(programs, noise, cfg.steps, keys_d, keys_e,
                                threads=cfg.threads, backend=cfg.backend)
    _check_columns(cols)
    return cols


def _ideal_columns(programs, noise, cfg: EnsembleConfig) -> np.ndarray:
    """Single zero-noise realization per variant (the no-noise reference)."""
    keys_d, keys_e = _realization_keys(cfg.master_seed, 1, ())
    cols = _backend.run_columns(programs, _zero_noise(noise), cfg.steps,
                                keys_d, keys_e, threads=1, backend=cfg.backend)
    _check_columns(cols)
    return cols[0]


def _result_from_columns(cols: np.ndarray, ideal_col: np.ndarray) -> EnsembleResult:
    n = cols.shape[0]
    pops = np.abs(cols[:, 0]) ** 2
    rho_avg = np.einsum("ki,kj->ij", cols, cols.conj()) / n
    rho_ideal = np.outer(ideal_col, ideal_col.conj())
    fid = float(np.real(np.trace(rho_ideal @ rho_avg)))
    stderr = float(np.std(pops, ddof=1) / np.sqrt(n)) if n > 1 else 0.0
    return EnsembleResult(
        rho_avg=SpinState(rho_avg).validate(tol=1e-9),
        state_fidelity=fid,
        signal=float(pops.mean()),
        standard_error=stderr,
        dark_populations=pops,
        ideal_dark=float(np.abs(ideal_col[0]) ** 2),
        rho_ideal=SpinState(rho_ideal),
    )


def run_ensemble(program, noise: NoiseParams, cfg: EnsembleConfig,
                 point_ids: tuple = ()) -> EnsembleResult:
    """Average one program over cfg.n_realizations noise realizations.

    point_ids extends the stream derivation path (used by sweeps so that
    every sweep point gets independent realizations); leave empty for a
    standalone run.
    """
    cols = _columns_for([program], noise, cfg, point_ids)[:, 0, :]
    ideal = _ideal_columns([program], noise, cfg)[0]
    return _result_from_columns(cols, ideal)


def state_fidelity(rho_avg: SpinState, rho_ideal: SpinState) -> float:
    """F = Tr(rho_ideal rho_avg) for a pure reference state."""
    rho_avg.validate(tol=1e-9)
    rho_ideal.validate(tol=1e-9)
    purity = float(np.real(np.trace(rho_ideal.rho @ rho_ideal.rho)))
    if abs(purity - 1.0) > 1e-6:
        raise ValueError(f"reference state is not pure (Tr rho^2 = {purity:.6f})")
    return float(np.real(np.trace(rho_ideal.rho @ rho_avg.rho)))


def differential_signal(result_plus: EnsembleResult, result_minus: EnsembleResult) -> float:
    """Normalized differential signal of a readout pair.

    (P_dark(minus) - P_dark(plus)) / contrast, where the contrast is the same
    difference for the zero-noise reference.  1 means full coherence
    preservation, 0 full dephasing.  Antisymmetric under swapping the pair.
    """
    contrast = result_minus.ideal_dark - result_plus.ideal_dark
    if abs(contrast) < 1e-6:
        raise ValueError("degenerate pair: zero-noise contrast is ~0")
    return (result_minus.signal - result_plus.signal) / contrast


def _paired_stats(res_plus: EnsembleResult, res_minus: EnsembleResult) -> tuple:
    contrast = res_minus.ideal_dark - res_plus.ideal_dark
    if abs(contrast) < 1e-6:
        raise ValueError("degenerate pair: zero-noise contrast is ~0")
    d = res_minus.dark_populations - res_plus.dark_populations
    n = len(d)
    stderr = float(np.std(d, ddof=1) / np.sqrt(n) / abs(contrast)) if n > 1 else 0.0
    return float(d.mean() / contrast), stderr


def run_differential(spec: SequenceSpec, drive: DriveParams, noise: NoiseParams,
                     cfg: EnsembleConfig, point_ids: tuple = ()) -> tuple:
    """(signal, stderr, result_plus, result_minus) for one sweep point."""
    programs = list(differential_pair(spec, drive))
    cols = _columns_for(programs, noise, cfg, point_ids)
    ideals = _ideal_columns(programs, noise, cfg)
    res_p = _result_from_columns(cols[:, 0, :], ideals[0])
    res_m = _result_from_columns(cols[:, 1, :], ideals[1])
    signal, stderr = _paired_stats(res_p, res_m)
    return signal, stderr, res_p, res_m


def decay_curve(specs, drive: DriveParams, noise: NoiseParams, cfg: EnsembleConfig,
                label: str = "curve", point_ids: tuple = ()) -> DecayCurve:
    """Differential-signal curve over a sweep of sequence specs.

    Sweep point i derives its realization streams from
    (master_seed, *point_ids, i, k), so curves are deterministic and
    independent of evaluation order; pass a distinct point_ids prefix per
    curve to decorrelate curves sharing one master seed.
    """
    specs = list(specs)
    if not specs:
        raise ValueError("empty sweep")
    signals = np.empty(len(specs))
    stderrs = np.empty(len(specs))
    for i, spec in enumerate(specs):
        signals[i], stderrs[i], _, _ = run_differential(spec, drive, noise, cfg,
                                                        point_ids=point_ids + (i,))
    return DecayCurve(
        label=label,
        total_time_s=np.array([nominal_total_time(s) for s in specs]),
        signal=signals,
        stderr=stderrs,
        n_realizations=cfg.n_realizations,
        n_pulses=np.array([s.n_pulses for s in specs], dtype=np.int64),
        tau_s=np.array([s.tau for s in specs]),
    )
