import math

import numpy as np
import pytest

from spindecay.dynamics import DriveParams
from spindecay.sequences import (
    SequenceSpec,
    build_program,
    differential_pair,
    initial_state_variant,
    nominal_total_time,
    pi_pulse_phases,
    xy8_phase_block,
)

DRIVE = DriveParams(rabi_peak=2 * math.pi * 6.486e6)
HALF_PI = math.pi / 2


def test_kind_validation():
    with pytest.raises(ValueError):
        SequenceSpec("spam", 1, 1e-6)
    with pytest.raises(ValueError):
        SequenceSpec("ramsey", 1, 1e-6)
    with pytest.raises(ValueError):
        SequenceSpec("hahn", 2, 1e-6)
    with pytest.raises(ValueError):
        SequenceSpec("xy8", 12, 1e-6)
    with pytest.raises(ValueError):
        SequenceSpec("cpmg", 4, -1e-6)
    with pytest.raises(ValueError):
        SequenceSpec("cpmg", 4, 1e-6, pi_phases=(0.0, 0.0))


def test_ramsey_structure():
    prog = build_program(SequenceSpec("ramsey", 0, 2e-6), DRIVE)
    kinds = [s.kind for s in prog.segments]
    assert kinds == ["pulse", "free", "pulse"]
    assert prog.segments[1].duration == 2e-6
    assert prog.duration == pytest.approx(2e-6 + 2 * DRIVE.half_pi_duration)


def test_cpmg_structure_and_duration():
    spec = SequenceSpec("cpmg", 8, 100e-6)
    prog = build_program(spec, DRIVE)
    assert len(prog.segments) == 3 * 8 + 2
    # total wall time: N tau + the two pi/2 edges
    assert prog.duration == pytest.approx(8 * 100e-6 + 2 * DRIVE.half_pi_duration,
                                          rel=1e-12)
    # pi centers separated by exactly tau
    t = 0.0
    centers = []
    for seg in prog.segments:
        if seg.kind == "pulse" and seg.duration == DRIVE.pi_duration:
            centers.append(t + seg.duration / 2)
        t += seg.duration
    assert len(centers) == 8
    assert np.allclose(np.diff(centers), 100e-6, rtol=1e-12)


def test_cpmg_train_phase_is_orthogonal_to_prep():
    spec = SequenceSpec("cpmg", 4, 1e-6, initial_phase=0.3)
    assert pi_pulse_phases(spec) == (0.3 + HALF_PI,) * 4


def test_xy8_block_pattern():
    block = xy8_phase_block(0.0)
    assert block == (0.0, HALF_PI, 0.0, HALF_PI, HALF_PI, 0.0, HALF_PI, 0.0)
    phases = pi_pulse_phases(SequenceSpec("xy8", 16, 1e-6, initial_phase=0.0))
    assert len(phases) == 16
    assert phases[:8] == phases[8:]
    # X axis sits 90 deg from the prep pulse
    assert phases[0] == pytest.approx(HALF_PI)
    assert phases[1] == pytest.approx(math.pi)


def test_hahn_is_single_pi_cpmg():
    h = build_program(SequenceSpec("hahn", 1, 10e-6), DRIVE)
    c = build_program(SequenceSpec("cpmg", 1, 10e-6), DRIVE)
    assert [s.duration for s in h.segments] == [s.duration for s in c.segments]
    assert [s.phase for s in h.segments] == [s.phase for s in c.segments]


def test_tau_too_short_for_pulse():
    with pytest.raises(ValueError):
        build_program(SequenceSpec("cpmg", 1, 50e-9), DRIVE)


def test_differential_pair_differs_only_in_readout():
    plus, minus = differential_pair(SequenceSpec("cpmg", 2, 1e-6), DRIVE)
    assert len(plus.segments) == len(minus.segments)
    for sp, sm in zip(plus.segments[:-1], minus.segments[:-1]):
        assert sp == sm
    assert minus.segments[-1].phase == pytest.approx(plus.segments[-1].phase + math.pi)


def test_initial_state_variant_freezes_train():
    spec = SequenceSpec("cpmg", 4, 1e-6, initial_phase=0.0, readout_phase=0.0)
    rotated = initial_state_variant(spec, HALF_PI)
    assert rotated.initial_phase == pytest.approx(HALF_PI)
    assert rotated.readout_phase == pytest.approx(HALF_PI)
    # train keeps the original phases instead of co-rotating
    assert pi_pulse_phases(rotated) == pi_pulse_phases(spec)
    # whereas a plain phase shift would co-rotate everything
    shifted = SequenceSpec("cpmg", 4, 1e-6, initial_phase=HALF_PI,
                           readout_phase=HALF_PI)
    assert pi_pulse_phases(shifted) != pi_pulse_phases(spec)


def test_explicit_pi_phases_override():
    spec = SequenceSpec("cpmg", 3, 1e-6, pi_phases=(0.1, 0.2, 0.3))
    assert pi_pulse_phases(spec) == (0.1, 0.2, 0.3)
    prog = build_program(spec, DRIVE)
    pulse_phases = [s.phase for s in prog.segments
                    if s.kind == "pulse" and s.duration == DRIVE.pi_duration]
    assert pulse_phases == [0.1, 0.2, 0.3]


def test_nominal_total_time():
    assert nominal_total_time(SequenceSpec("ramsey", 0, 3e-6)) == 3e-6
    assert nominal_total_time(SequenceSpec("cpmg", 16, 100e-6)) == pytest.approx(1.6e-3)
    assert nominal_total_time(SequenceSpec("xy8", 8, 100e-6)) == pytest.approx(0.8e-3)
