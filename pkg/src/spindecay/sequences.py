"""Pulse-program constructors: Ramsey, Hahn, CPMG-N, XY8.

Timing convention: pi-pulse centers are separated by exactly tau
(center-to-center), so each tau slot contributes free(tau/2 - t_pi/2) on both
sides of its pi pulse and the total wall time of a DD program is
N tau + 2 t_pi/2 (the pi durations are absorbed into the tau slots; only the
two pi/2 edges add time).

Phase convention: the pi-pulse train of CPMG is shifted +90 deg from the
initial pi/2 (pulse axis parallel to the prepared equator state, the robust
configuration).  XY8 alternates X,Y,X,Y,Y,X,Y,X per 8-pulse block with
X = initial + 90 deg, Y = initial + 180 deg.  For initial-state studies where
the prepared state is rotated while the train stays fixed (e.g. the fragile
"Y state" configuration of CPMG), use `initial_state_variant`, which freezes
the train via the explicit `pi_phases` override.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

from .dynamics import DriveParams, PulseProgram, Segment

__all__ = [
    "SequenceSpec",
    "xy8_phase_block",
    "pi_pulse_phases",
    "build_program",
    "differential_pair",
    "initial_state_variant",
    "nominal_total_time",
]

KINDS = ("ramsey", "hahn", "cpmg", "xy8")

_HALF_PI = math.pi / 2.0
_XY8_REL = (0.0, _HALF_PI, 0.0, _HALF_PI,
            _HALF_PI, 0.0, _HALF_PI, 0.0)  # X,Y,X,Y,Y,X,Y,X relative to X


def xy8_phase_block(x_phase: float) -> tuple:
    """One 8-pulse XY8 block with X pulses at x_phase, Y at x_phase + 90 deg."""
    return tuple(x_phase + off for off in _XY8_REL)


@dataclass(frozen=True)
class SequenceSpec:
    """Declarative description of one measurement sequence.

    Parameters
    ----------
    kind : str
        One of "ramsey", "hahn", "cpmg", "xy8".
    n_pulses : int
        Number of pi pulses N.  0 for ramsey, 1 for hahn, >= 1 for cpmg,
        a positive multiple of 8 for xy8.
    tau : float
        Inter-pulse (center-to-center) spacing in seconds; for ramsey, the
        free-evolution wait.
    initial_phase : float
        Phase of the preparation pi/2 pulse, radians.
    readout_phase : float
        Phase of the readout pi/2 pulse, radians.  The differential partner
        uses readout_phase + pi.
    pi_phases : tuple of float, optional
        Explicit per-pulse phases overriding the kind's rule.  Length must
        equal n_pulses.  Used for user-defined trains and for initial-state
        variants that keep the train anchored.
    """

    kind: str
    n_pulses: int
    tau: float
    initial_phase: float = 0.0
    readout_phase: float = 0.0
    pi_phases: tuple | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"kind must be one of {KINDS}, got {self.kind!r}")
        if self.n_pulses < 0:
            raise ValueError("n_pulses must be >= 0")
        if not (math.isfinite(self.tau) and self.tau > 0):
            raise ValueError(f"tau must be positive, got {self.tau}")
        if self.kind == "ramsey" and self.n_pulses != 0:
            raise ValueError("ramsey has no pi pulses; set n_pulses = 0")
        if self.kind == "hahn" and self.n_pulses != 1:
            raise ValueError("hahn is a single-pi sequence; set n_pulses = 1")
        if self.kind == "cpmg" and self.n_pulses < 1:
            raise ValueError("cpmg needs n_pulses >= 1")
        if self.kind == "xy8" and (self.n_pulses < 8 or self.n_pulses % 8 != 0):
            raise ValueError("xy8 needs n_pulses to be a positive multiple of 8")
        if self.pi_phases is not None:
            phases = tuple(float(p) for p in self.pi_phases)
            object.__setattr__(self, "pi_phases", phases)
            if len(phases) != self.n_pulses:
                raise ValueError(
                    f"pi_phases has {len(phases)} entries for {self.n_pulses} pulses"
                )


def pi_pulse_phases(spec: SequenceSpec) -> tuple:
    """Per-pulse phases: the explicit override if present, else the kind's rule."""
    if spec.pi_phases is not None:
        return spec.pi_phases
    if spec.kind == "ramsey":
        return ()
    if spec.kind in ("hahn", "cpmg"):
        return (spec.initial_phase + _HALF_PI,) * spec.n_pulses
    # xy8: repeat the 8-pulse block, X axis at initial + 90 deg
    block = xy8_phase_block(spec.initial_phase + _HALF_PI)
    return block * (spec.n_pulses // 8)


def build_program(spec: SequenceSpec, drive: DriveParams) -> PulseProgram:
    """Compile a spec into the segment list.

    ramsey: pi/2(init), free(tau), pi/2(readout).
    DD kinds: pi/2(init), [free(tau/2 - t_pi/2), pi(phi_k),
    free(tau/2 - t_pi/2)]^N, pi/2(readout).

    Raises ValueError if tau cannot accommodate a pi pulse
    (tau <= pi duration).
    """
    t_pi = drive.pi_duration
    t_half = drive.half_pi_duration
    segs = [Segment(t_half, True, spec.initial_phase, "pulse")]
    if spec.kind == "ramsey":
        segs.append(Segment(spec.tau, False, 0.0, "free"))
    else:
        if spec.tau <= t_pi:
            raise ValueError(
                f"tau = {spec.tau} s is too short for a {t_pi:.4g} s pi pulse"
            )
        pad = spec.tau / 2.0 - t_pi / 2.0
        for phi in pi_pulse_phases(spec):
            segs.append(Segment(pad, False, 0.0, "free"))
            segs.append(Segment(t_pi, True, phi, "pulse"))
            segs.append(Segment(pad, False, 0.0, "free"))
    segs.append(Segment(t_half, True, spec.readout_phase, "pulse"))
    return PulseProgram(segments=tuple(segs), drive=drive)


def differential_pair(spec: SequenceSpec, drive: DriveParams) -> tuple:
    """The two programs of a differential readout.

    Identical except for the readout pi/2 phase, which differs by 180 deg.
    """
    plus = build_program(spec, drive)
    minus = build_program(replace(spec, readout_phase=spec.readout_phase + math.pi), drive)
    return plus, minus


def initial_state_variant(spec: SequenceSpec, rotation: float) -> SequenceSpec:
    """Rotate the prepared state while keeping the pi-pulse train fixed.

    The returned spec has initial and readout phases shifted by `rotation`
    (radians) and the train pinned, via pi_phases, to the phases the original
    spec would have used.  rotation = pi/2 turns the robust
    state-parallel-to-train configuration into the orthogonal one (the
    fragile "Y state" for CPMG); a plain phase shift of the whole spec would
    instead co-rotate the train and change nothing physical.
    """
    return replace(
        spec,
        initial_phase=spec.initial_phase + rotation,
        readout_phase=spec.readout_phase + rotation,
        pi_phases=pi_pulse_phases(spec),
    )


def nominal_total_time(spec: SequenceSpec) -> float:
    """Decay-curve time coordinate: N tau for DD kinds, tau for ramsey."""
    return spec.tau if spec.kind == "ramsey" else spec.n_pulses * spec.tau
