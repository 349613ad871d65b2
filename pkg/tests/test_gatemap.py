import math

import numpy as np
import pytest

from spindecay.dynamics import DriveParams, Propagator
from spindecay.gatemap import (
    GATE_NAMES,
    ErrorGrid,
    fidelity_map,
    gate_fidelity,
    gate_program,
)

from oracles import IDENTITY, SIGMA_X, SIGMA_Y, rotation

TWO_PI = 2 * math.pi
DRIVE = DriveParams(rabi_peak=TWO_PI * 6.486e6)


class TestGateFidelity:
    def test_identical_unitaries(self):
        u = Propagator(rotation(1.2, 0.3))
        assert gate_fidelity(u, u) == pytest.approx(1.0)

    def test_global_phase_invariance(self):
        u = Propagator(rotation(0.7, 0.0))
        v = Propagator(np.exp(1j * 0.9) * rotation(0.7, 0.0))
        assert gate_fidelity(u, v) == pytest.approx(1.0)

    def test_orthogonal_rotations(self):
        # |Tr(sx sy)| / 2 = 0
        assert gate_fidelity(Propagator(-1j * SIGMA_X),
                             Propagator(-1j * SIGMA_Y)) == pytest.approx(0.0, abs=1e-15)

    def test_half_angle_law(self):
        # F between rotations about the same axis differing by angle a is |cos(a/2)|
        for a in (0.1, 0.5, 1.0, 2.0):
            u = Propagator(rotation(1.0, 0.0))
            v = Propagator(rotation(1.0 + a, 0.0))
            assert gate_fidelity(u, v) == pytest.approx(abs(math.cos(a / 2)), abs=1e-12)

    def test_nonunitary_rejected(self):
        with pytest.raises(ValueError):
            gate_fidelity(Propagator(np.eye(2) * 2.0), Propagator(IDENTITY))


class TestGateProgram:
    def test_pulse_gates(self):
        p2 = gate_program("pi2", DRIVE)
        p = gate_program("pi", DRIVE)
        assert len(p2.segments) == 1 and len(p.segments) == 1
        assert p2.segments[0].duration == pytest.approx(DRIVE.pi_duration / 2)
        assert p.segments[0].duration == pytest.approx(DRIVE.pi_duration)
        assert all(s.drive_on for s in p2.segments + p.segments)

    @pytest.mark.parametrize("gate", ["cpmg8", "xy8"])
    def test_train_structure(self, gate):
        tau = 100e-6
        prog = gate_program(gate, DRIVE, tau=tau)
        assert len(prog.segments) == 24
        assert prog.duration == pytest.approx(8 * tau, rel=1e-12)
        pulses = [s for s in prog.segments if s.drive_on]
        assert len(pulses) == 8
        for s in pulses:
            assert s.duration == pytest.approx(DRIVE.pi_duration)

    def test_train_phase_patterns(self):
        cp = [s.phase for s in gate_program("cpmg8", DRIVE).segments if s.drive_on]
        xy = [s.phase for s in gate_program("xy8", DRIVE).segments if s.drive_on]
        assert cp == [0.0] * 8
        h = math.pi / 2
        assert xy == [0.0, h, 0.0, h, h, 0.0, h, 0.0]

    def test_bad_inputs(self):
        with pytest.raises(ValueError, match="unknown gate"):
            gate_program("hadamard", DRIVE)
        with pytest.raises(ValueError, match="too short"):
            gate_program("xy8", DRIVE, tau=1e-9)


class TestFidelityMap:
    def test_zero_error_is_unit_fidelity(self):
        for gate in GATE_NAMES:
            grid = fidelity_map(gate, [0.0], [0.0], DRIVE)
            assert grid.fidelities[0, 0] == pytest.approx(1.0, abs=1e-12)

    def test_bounded_and_shaped(self):
        eps = np.linspace(-0.03, 0.03, 7)
        delta = TWO_PI * np.linspace(-600e3, 600e3, 5)
        grid = fidelity_map("pi", eps, delta, DRIVE)
        assert grid.fidelities.shape == (7, 5)
        assert np.all(grid.fidelities <= 1.0)
        assert np.all(grid.fidelities >= 0.0)

    def test_detuning_sign_symmetry(self):
        # phase-0 pulses: F(eps, delta) = F(eps, -delta)
        eps = np.array([-0.02, 0.0, 0.01])
        delta = TWO_PI * np.array([-400e3, -100e3, 0.0, 100e3, 400e3])
        for gate in ("pi2", "pi"):
            grid = fidelity_map(gate, eps, delta, DRIVE)
            assert np.allclose(grid.fidelities, grid.fidelities[:, ::-1],
                               atol=1e-12)

    def test_pi_pulse_amplitude_error_quadratic(self):
        # pure amplitude error on a pi pulse: F = |cos(pi eps / 2)|
        eps = np.array([0.0, 0.005, 0.01, 0.02])
        grid = fidelity_map("pi", eps, np.array([0.0]), DRIVE)
        expect = np.abs(np.cos(math.pi * eps / 2))
        assert np.allclose(grid.fidelities[:, 0], expect, atol=1e-10)

    def test_small_static_detuning_off_pulse_is_echoed(self):
        # both 8-pulse trains refocus a static detuning during free periods;
        # sensitivity survives only through the finite pulse width
        delta = TWO_PI * np.array([200e3])
        for gate in ("cpmg8", "xy8"):
            grid = fidelity_map(gate, np.array([0.0]), delta, DRIVE)
            assert grid.fidelities[0, 0] > 0.999

    def test_xy8_beats_cpmg8_under_combined_errors(self):
        eps = np.linspace(-0.015, 0.015, 5)
        delta = TWO_PI * np.linspace(-438e3, 438e3, 5)
        cp = fidelity_map("cpmg8", eps, delta, DRIVE)
        xy = fidelity_map("xy8", eps, delta, DRIVE)
        assert xy.min_over_box(0.015, TWO_PI * 438e3) > cp.min_over_box(
            0.015, TWO_PI * 438e3)

    def test_map_matches_direct_fidelity(self):
        # one off-grid spot check through the scalar route
        eps, delta = 0.012, TWO_PI * 250e3
        grid = fidelity_map("xy8", np.array([eps]), np.array([delta]), DRIVE)
        from spindecay.gatemap import _batch_propagators

        prog = gate_program("xy8", DRIVE)
        u = Propagator(_batch_propagators(prog, np.array([eps]), np.array([delta]))[0])
        u0 = Propagator(_batch_propagators(prog, np.zeros(1), np.zeros(1))[0])
        assert grid.fidelities[0, 0] == pytest.approx(gate_fidelity(u, u0), abs=1e-12)


class TestErrorGrid:
    def test_shape_validation(self):
        with pytest.raises(ValueError, match="shape"):
            ErrorGrid(np.zeros(3), np.zeros(2), np.zeros((2, 3)))

    def test_range_validation(self):
        with pytest.raises(ValueError, match="0, 1"):
            ErrorGrid(np.zeros(1), np.zeros(1), np.array([[1.5]]))

    def test_min_over_box(self):
        eps = np.array([-0.02, 0.0, 0.02])
        delta = np.array([-1.0, 0.0, 1.0])
        fid = np.array([[0.90, 0.95, 0.91],
                        [0.99, 1.00, 0.98],
                        [0.92, 0.96, 0.93]])
        grid = ErrorGrid(eps, delta, fid)
        assert grid.min_over_box(0.05, 2.0) == 0.90
        assert grid.min_over_box(0.001, 0.5) == 1.00
        assert grid.min_over_box(0.001, 2.0) == 0.98
        with pytest.raises(ValueError, match="no grid points"):
            grid.min_over_box(-1.0, -1.0)
