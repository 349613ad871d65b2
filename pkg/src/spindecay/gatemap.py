"""Gate fidelity over a static error grid.

Maps the fidelity of single pulses and full echo trains as a function of a
frozen amplitude error eps and detuning delta.  Because the errors are static,
each segment's Hamiltonian is constant and the propagator is a single closed
form Pauli exponential, so whole grids evaluate as batched 2x2 products with
no time stepping.  The reference gate is the same pulse program evaluated at
(eps, delta) = (0, 0).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dynamics import DriveParams, Propagator, PulseProgram, Segment
from .sequences import xy8_phase_block

__all__ = [
    "ErrorGrid",
    "GATE_NAMES",
    "gate_program",
    "gate_fidelity",
    "fidelity_map",
]

GATE_NAMES = ("pi2", "pi", "cpmg8", "xy8")

# conventional "good gate" cutoff used when annotating maps
FIDELITY_THRESHOLD = 0.9999


@dataclass(frozen=True)
class ErrorGrid:
    """Fidelity samples on an (eps, delta) grid.

    `fidelities[i, j]` belongs to `eps_values[i]`, `delta_values[j]`.
    """

    eps_values: np.ndarray
    delta_values: np.ndarray
    fidelities: np.ndarray

    def __post_init__(self):
        eps = np.asarray(self.eps_values, dtype=float)
        delta = np.asarray(self.delta_values, dtype=float)
        fid = np.asarray(self.fidelities, dtype=float)
        if eps.ndim != 1 or delta.ndim != 1:
            raise ValueError("axis arrays must be 1-D")
        if fid.shape != (len(eps), len(delta)):
            raise ValueError(
                f"fidelities shape {fid.shape} does not match axes "
                f"({len(eps)}, {len(delta)})")
        if np.any(fid < -1e-9) or np.any(fid > 1.0 + 1e-9):
            raise ValueError("fidelities must lie in [0, 1]")
        object.__setattr__(self, "eps_values", eps)
        object.__setattr__(self, "delta_values", delta)
        object.__setattr__(self, "fidelities", fid)

    def min_over_box(self, eps_bound: float, delta_bound: float) -> float:
        """Worst fidelity over |eps| <= eps_bound, |delta| <= delta_bound."""
        sel_e = np.abs(self.eps_values) <= eps_bound
        sel_d = np.abs(self.delta_values) <= delta_bound
        if not (sel_e.any() and sel_d.any()):
            raise ValueError("box contains no grid points")
        return float(self.fidelities[np.ix_(sel_e, sel_d)].min())


def gate_program(gate: str, drive: DriveParams, tau: float = 100e-6) -> PulseProgram:
    """Pulse program for a named gate.

    pi2 / pi are bare phase-0 pulses.  cpmg8 / xy8 are 8-pulse trains at
    inter-pulse spacing tau with the finite pulse width absorbed into the
    free periods (free(tau/2 - t_pi/2), pi, free(tau/2 - t_pi/2) per pulse);
    no state preparation or readout pulses are included, so the ideal train
    is the identity up to a global phase.
    """
    if gate not in GATE_NAMES:
        raise ValueError(f"unknown gate {gate!r}; expected one of {GATE_NAMES}")
    t_pi = drive.pi_duration
    if gate == "pi2":
        return PulseProgram((Segment(drive.half_pi_duration, True, 0.0, "pulse"),), drive)
    if gate == "pi":
        return PulseProgram((Segment(t_pi, True, 0.0, "pulse"),), drive)
    pad = tau / 2.0 - t_pi / 2.0
    if pad <= 0:
        raise ValueError(f"tau = {tau} too short for pulse width {t_pi}")
    phases = (0.0,) * 8 if gate == "cpmg8" else xy8_phase_block(0.0)
    segs = []
    for phase in phases:
        segs.append(Segment(pad, False, 0.0, "free"))
        segs.append(Segment(t_pi, True, phase, "pulse"))
        segs.append(Segment(pad, False, 0.0, "free"))
    return PulseProgram(tuple(segs), drive)


def gate_fidelity(u_actual: Propagator, u_ideal: Propagator) -> float:
    """Global-phase-invariant overlap |Tr(U_ideal^dag U_actual)| / 2."""
    u_actual.validate()
    u_ideal.validate()
    return abs(np.trace(u_ideal.u.conj().T @ u_actual.u)) / 2.0


def _batch_propagators(program: PulseProgram, eps: np.ndarray,
                       delta: np.ndarray) -> np.ndarray:
    """Propagators of `program` under static (eps, delta), shape (len(eps), 2, 2).

    eps and delta are flat arrays of equal length, one grid point each.
    """
    n = len(eps)
    u = np.broadcast_to(np.eye(2, dtype=complex), (n, 2, 2)).copy()
    omega = program.drive.rabi_peak
    for seg in program.segments:
        if seg.drive_on:
            ax = 0.5 * omega * (1.0 + eps) * math.cos(seg.phase)
            ay = 0.5 * omega * (1.0 + eps) * math.sin(seg.phase)
            az = 0.5 * delta
            nrm = np.sqrt(ax * ax + ay * ay + az * az)
            theta = nrm * seg.duration
            sinc = np.where(nrm > 0, np.sin(theta) / np.where(nrm > 0, nrm, 1.0),
                            seg.duration)
            c = np.cos(theta)
            m = np.empty((n, 2, 2), dtype=complex)
            m[:, 0, 0] = c - 1j * az * sinc
            m[:, 0, 1] = (-1j * ax - ay) * sinc
            m[:, 1, 0] = (-1j * ax + ay) * sinc
            m[:, 1, 1] = c + 1j * az * sinc
            u = m @ u
        else:
            phase = np.exp(-0.5j * delta * seg.duration)
            u[:, 0, :] *= phase[:, None]
            u[:, 1, :] *= np.conj(phase)[:, None]
    return u


def fidelity_map(gate: str, eps_values, delta_values, drive: DriveParams,
                 tau: float = 100e-6) -> ErrorGrid:
    """Gate fidelity on the outer grid of eps_values x delta_values.

    delta_values are angular detunings (rad/s).  The ideal target is the same
    gate at zero error, so the map isolates the gate's intrinsic sensitivity.
    """
    eps_values = np.asarray(eps_values, dtype=float)
    delta_values = np.asarray(delta_values, dtype=float)
    if eps_values.ndim != 1 or delta_values.ndim != 1:
        raise ValueError("eps_values and delta_values must be 1-D")
    program = gate_program(gate, drive, tau)

    eps_flat = np.repeat(eps_values, len(delta_values))
    delta_flat = np.tile(delta_values, len(eps_values))
    u = _batch_propagators(program, eps_flat, delta_flat)
    u_ideal = _batch_propagators(program, np.zeros(1), np.zeros(1))[0]

    # |Tr(U_ideal^dag U)| / 2 for the whole batch at once
    tr = np.einsum("ij,kij->k", u_ideal.conj(), u)
    fid = (np.abs(tr) / 2.0).reshape(len(eps_values), len(delta_values))
    return ErrorGrid(eps_values=eps_values, delta_values=delta_values,
                     fidelities=np.minimum(fid, 1.0))
