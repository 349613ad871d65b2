"""Two-level rotating-frame dynamics.

The Hamiltonian is H = (delta/2) sigma_z + (Omega_eff/2)(cos phi sigma_x +
sin phi sigma_y) with Omega_eff = Omega (1 + eps) f, where f is the drive
envelope (1 during pulses, 0 during free evolution).  Propagation is a
time-ordered product of closed-form Pauli exponentials over piecewise-constant
steps: 0.05 ns during pulses, 25 ns during free evolution by default.

`evolve` is the trajectory-driven reference integrator (slow, transparent);
the Monte-Carlo engine in `ensemble` runs a fused kernel that consumes the
same noise draws and must agree with `evolve` to float accuracy, which the
test suite checks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .noise import NoiseTrajectory

__all__ = [
    "DriveParams",
    "StepConfig",
    "Segment",
    "PulseProgram",
    "SpinState",
    "Propagator",
    "step_hamiltonian",
    "step_propagator",
    "evolve",
    "apply",
    "program_grid",
]

_REMAINDER_EPS = 1e-9  # remainder steps below dt * this are dropped as roundoff


@dataclass(frozen=True)
class DriveParams:
    """Resonant drive strength.  rabi_peak is the angular Rabi frequency (rad/s)."""

    rabi_peak: float

    def __post_init__(self):
        if not (math.isfinite(self.rabi_peak) and self.rabi_peak > 0):
            raise ValueError(f"rabi_peak must be positive and finite, got {self.rabi_peak}")

    @property
    def pi_duration(self) -> float:
        """Duration of a pi pulse: pi / Omega."""
        return math.pi / self.rabi_peak

    @property
    def half_pi_duration(self) -> float:
        """Duration of a pi/2 pulse: pi / (2 Omega)."""
        return math.pi / (2.0 * self.rabi_peak)


@dataclass(frozen=True)
class StepConfig:
    """Integrator step sizes (seconds)."""

    dt_pulse: float = 5e-11
    dt_free: float = 2.5e-8

    def __post_init__(self):
        if self.dt_pulse <= 0 or self.dt_free <= 0:
            raise ValueError("step sizes must be positive")


@dataclass(frozen=True)
class Segment:
    """One piecewise-constant-drive interval of a pulse program."""

    duration: float
    drive_on: bool
    phase: float
    kind: str  # "pulse" | "free"

    def __post_init__(self):
        if self.kind not in ("pulse", "free"):
            raise ValueError(f"kind must be 'pulse' or 'free', got {self.kind!r}")
        if not (math.isfinite(self.duration) and self.duration > 0):
            raise ValueError(f"duration must be positive, got {self.duration}")
        if self.kind == "free" and self.drive_on:
            raise ValueError("free segments must have drive_on = False")


@dataclass(frozen=True)
class PulseProgram:
    """Compiled segment list plus the drive it was built for."""

    segments: tuple
    drive: DriveParams

    def __post_init__(self):
        if len(self.segments) == 0:
            raise ValueError("program has no segments")

    @property
    def duration(self) -> float:
        return sum(s.duration for s in self.segments)


@dataclass
class SpinState:
    """2x2 density matrix with physicality checks."""

    rho: np.ndarray

    def __post_init__(self):
        self.rho = np.asarray(self.rho, dtype=complex)
        if self.rho.shape != (2, 2):
            raise ValueError("rho must be 2x2")

    def validate(self, tol: float = 1e-12) -> "SpinState":
        if abs(np.trace(self.rho) - 1.0) > tol:
            raise ValueError(f"trace(rho) = {np.trace(self.rho)}, expected 1")
        if np.max(np.abs(self.rho - self.rho.conj().T)) > tol:
            raise ValueError("rho is not Hermitian")
        eigs = np.linalg.eigvalsh(self.rho)
        if eigs.min() < -1e-9 or eigs.max() > 1 + 1e-9:
            raise ValueError(f"rho eigenvalues {eigs} outside [0, 1]")
        return self

    @classmethod
    def ground(cls) -> "SpinState":
        return cls(np.array([[1.0, 0.0], [0.0, 0.0]], dtype=complex))


@dataclass
class Propagator:
    """2x2 unitary accumulated over a program."""

    u: np.ndarray

    def __post_init__(self):
        self.u = np.asarray(self.u, dtype=complex)
        if self.u.shape != (2, 2):
            raise ValueError("u must be 2x2")

    def validate(self, tol: float = 1e-9) -> "Propagator":
        defect = np.linalg.norm(self.u.conj().T @ self.u - np.eye(2))
        if defect > tol:
            raise ValueError(f"propagator unitarity defect {defect:.3e} > {tol:.1e}")
        return self

    @classmethod
    def identity(cls) -> "Propagator":
        return cls(np.eye(2, dtype=complex))


def step_hamiltonian(delta: float, rabi_eff: float, phase: float) -> np.ndarray:
    """H = (delta/2) sz + (rabi_eff/2)(cos(phase) sx + sin(phase) sy).

    rabi_eff already contains the envelope and amplitude error:
    rabi_eff = Omega (1 + eps) f.
    """
    if not (math.isfinite(delta) and math.isfinite(rabi_eff) and math.isfinite(phase)):
        raise ValueError("step_hamiltonian inputs must be finite")
    hx = 0.5 * rabi_eff * math.cos(phase)
    hy = 0.5 * rabi_eff * math.sin(phase)
    hz = 0.5 * delta
    return np.array([[hz, hx - 1j * hy], [hx + 1j * hy, -hz]], dtype=complex)


def step_propagator(h: np.ndarray, dt: float) -> Propagator:
    """exp(-i H dt) in closed form for Hermitian 2x2 H.

    Decomposes H = c0 I + a . sigma and uses
    exp(-i H dt) = e^{-i c0 dt} (cos(|a| dt) I - i sin(|a| dt) (a_hat . sigma)),
    exactly unitary up to floating error; no series truncation.
    """
    if dt <= 0:
        raise ValueError(f"dt must be > 0, got {dt}")
    h = np.asarray(h, dtype=complex)
    c0 = 0.5 * (h[0, 0].real + h[1, 1].real)
    az = 0.5 * (h[0, 0].real - h[1, 1].real)
    ax = h[1, 0].real
    ay = h[1, 0].imag
    norm = math.sqrt(ax * ax + ay * ay + az * az)
    theta = norm * dt
    c = math.cos(theta)
    # sin(theta)/norm with the removable singularity at norm -> 0
    s = dt if norm == 0.0 else math.sin(theta) / norm
    u = np.array(
        [[c - 1j * az * s, (-1j * ax - ay) * s],
         [(-1j * ax + ay) * s, c + 1j * az * s]],
        dtype=complex,
    )
    if c0 != 0.0:
        u *= np.exp(-1j * c0 * dt)
    return Propagator(u)


def apply(u: Propagator, rho: SpinState) -> SpinState:
    """rho -> U rho U^dagger."""
    u.validate()
    rho.validate()
    return SpinState(u.u @ rho.rho @ u.u.conj().T)


def split_steps(duration: float, dt: float) -> tuple[int, float]:
    """Number of full dt steps and the remainder step for a segment.

    The remainder absorbs the non-integer tail; tails below dt * 1e-9 are
    rounding artifacts of the duration arithmetic and are dropped.
    """
    n_full = int(math.floor(duration / dt + _REMAINDER_EPS))
    rem = duration - n_full * dt
    if rem <= dt * _REMAINDER_EPS:
        rem = 0.0
    return n_full, rem


def _segment_steps(segment: Segment, steps: StepConfig) -> tuple[int, float, float]:
    dt = steps.dt_pulse if segment.drive_on else steps.dt_free
    n_full, rem = split_steps(segment.duration, dt)
    return n_full, dt, rem


def program_grid(program: PulseProgram, steps: StepConfig) -> np.ndarray:
    """All step-start instants of the program plus the final end time.

    Noise trajectories for `evolve` must be sampled on exactly this grid; the
    value at index k is held constant over step k.
    """
    times = [0.0]
    t = 0.0
    for seg in program.segments:
        n_full, dt, rem = _segment_steps(seg, steps)
        for _ in range(n_full):
            t += dt
            times.append(t)
        if rem > 0.0:
            t += rem
            times.append(t)
    return np.array(times)


def _check_trajectory(traj: NoiseTrajectory, grid: np.ndarray, name: str) -> None:
    if len(traj.times) != len(grid):
        raise ValueError(
            f"{name} trajectory has {len(traj.times)} samples, program grid needs {len(grid)}"
        )
    if not np.allclose(traj.times, grid, rtol=0.0, atol=1e-15 + 1e-9 * grid[-1]):
        raise ValueError(f"{name} trajectory grid does not match the program step grid")


def evolve(
    program: PulseProgram,
    drive: DriveParams | None,
    delta_traj: NoiseTrajectory,
    eps_traj: NoiseTrajectory,
    steps: StepConfig = StepConfig(),
    fast_path: bool = True,
    validate: bool = True,
) -> Propagator:
    """Propagator of a program under one noise realization.

    Parameters
    ----------
    program : PulseProgram
    drive : DriveParams or None
        Defaults to the drive the program was compiled with; if given it must
        match (same Rabi frequency) since segment durations depend on it.
    delta_traj, eps_traj : NoiseTrajectory
        Channel values sampled on `program_grid(program, steps)`.
    steps : StepConfig
    fast_path : bool
        If True (default), free segments accumulate the diagonal phase
        phi_z = sum(delta_k dt_k) analytically instead of multiplying
        per-step matrices.  All free steps commute, so both paths are the
        same map; the slow path exists for validation.
    validate : bool
        Check the final unitarity defect (<= 1e-9).
    """
    if drive is None:
        drive = program.drive
    elif drive != program.drive:
        raise ValueError("drive differs from the one the program was compiled with")
    grid = program_grid(program, steps)
    _check_trajectory(delta_traj, grid, "delta")
    _check_trajectory(eps_traj, grid, "eps")
    delta = delta_traj.values
    eps = eps_traj.values

    u = np.eye(2, dtype=complex)
    idx = 0  # global step index == trajectory sample index
    for seg in program.segments:
        n_full, dt, rem = _segment_steps(seg, steps)
        widths = [dt] * n_full + ([rem] if rem > 0.0 else [])
        if seg.drive_on:
            for w in widths:
                h = step_hamiltonian(delta[idx], drive.rabi_peak * (1.0 + eps[idx]), seg.phase)
                u = step_propagator(h, w).u @ u
                idx += 1
        elif fast_path:
            phi = 0.0
            for w in widths:
                phi += delta[idx] * w
                idx += 1
            u = np.array([[np.exp(-0.5j * phi), 0.0], [0.0, np.exp(0.5j * phi)]]) @ u
        else:
            for w in widths:
                h = step_hamiltonian(delta[idx], 0.0, 0.0)
                u = step_propagator(h, w).u @ u
                idx += 1
    out = Propagator(u)
    if validate:
        out.validate()
    return out
