"""Independent oracles used by the test suite.

Everything in this module is derived from first principles with plain numpy,
deliberately *not* reusing any package code, so that agreement between the
package and these functions is meaningful evidence.
"""

from __future__ import annotations

import numpy as np

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
IDENTITY = np.eye(2, dtype=complex)


# ---------------------------------------------------------------------------
# Dephasing exponent for an ideal-pulse echo train under OU noise.
#
# The accumulated phase is phi = int_0^t s(u) delta(u) du with s(u) the
# toggling sign (+1/-1, flipping at each instantaneous pi pulse).  For
# Gaussian noise the coherence is exp(-<phi^2>/2) and
#   <phi^2>/2 = (1/2) sum_ij s_i s_j I_ij,
# where I_ij is the double integral of the OU autocorrelation
# sigma^2 exp(-|u-v|/tau_c) over segment rectangle (i, j).  Both the diagonal
# and off-diagonal rectangles integrate in closed form, so this oracle has no
# discretization error; only float cancellation limits it (worst at very
# small tau/tau_c, where tests switch to series arguments instead).
# ---------------------------------------------------------------------------

def gamma_quadrature(n_pulses: int, tau: float, sigma: float, tau_c: float) -> float:
    """<phi^2>/2 for N equally spaced ideal pi pulses, spacing tau (CPMG timing)."""
    n = int(n_pulses)
    if n < 1:
        raise ValueError("n_pulses >= 1")
    edges = [0.0] + [tau / 2 + k * tau for k in range(n)] + [n * tau]
    segs = [(edges[k], edges[k + 1], 1.0 if k % 2 == 0 else -1.0)
            for k in range(n + 1)]
    total = 0.0
    for i, (ai, bi, si) in enumerate(segs):
        li = bi - ai
        # diagonal rectangle: 2 * (tau_c L + tau_c^2 (e^{-L/tau_c} - 1))
        total += si * si * 2.0 * (tau_c * li + tau_c * tau_c * np.expm1(-li / tau_c))
        for j in range(i):
            aj, bj, sj = segs[j]
            # disjoint rectangles (u in seg i > v in seg j), doubled for (j, i)
            block = (np.exp(-(ai - bj) / tau_c) - np.exp(-(ai - aj) / tau_c)
                     - np.exp(-(bi - bj) / tau_c) + np.exp(-(bi - aj) / tau_c))
            total += 2.0 * si * sj * tau_c * tau_c * block
    return 0.5 * sigma * sigma * total


def fid_gamma(t: float, sigma: float, tau_c: float) -> float:
    """Exact free-induction (no pulses) OU dephasing exponent.

    <phi^2>/2 = sigma^2 tau_c^2 (t/tau_c + expm1(-t/tau_c)); reduces to the
    static Gaussian sigma^2 t^2 / 2 for t << tau_c.
    """
    return sigma * sigma * tau_c * tau_c * (t / tau_c + np.expm1(-t / tau_c))


# ---------------------------------------------------------------------------
# Ideal-pulse sequence propagators (instantaneous rotations, static detuning).
# ---------------------------------------------------------------------------

def rotation(angle: float, phase: float) -> np.ndarray:
    """exp(-i (angle/2)(cos(phase) sx + sin(phase) sy)) via closed form."""
    axis = np.cos(phase) * SIGMA_X + np.sin(phase) * SIGMA_Y
    return np.cos(angle / 2) * IDENTITY - 1j * np.sin(angle / 2) * axis


def free_phase(delta: float, duration: float) -> np.ndarray:
    """exp(-i (delta/2) sz t)."""
    return np.diag([np.exp(-0.5j * delta * duration), np.exp(0.5j * delta * duration)])


def ideal_sequence_propagator(pi_phases, tau: float, delta: float,
                              initial_phase: float, readout_phase: float) -> np.ndarray:
    """pi/2(init) . [free(tau/2) pi(phi_k) free(tau/2)]^N . pi/2(readout),
    all pulses instantaneous, detuning static."""
    u = rotation(np.pi / 2, initial_phase)
    for phi in pi_phases:
        u = free_phase(delta, tau / 2) @ u
        u = rotation(np.pi, phi) @ u
        u = free_phase(delta, tau / 2) @ u
    return rotation(np.pi / 2, readout_phase) @ u


def ideal_train_propagator(pi_phases, tau: float, delta: float) -> np.ndarray:
    """[free(tau/2) pi(phi_k) free(tau/2)]^N with instantaneous pulses (gate form)."""
    u = IDENTITY.copy()
    for phi in pi_phases:
        u = free_phase(delta, tau / 2) @ u
        u = rotation(np.pi, phi) @ u
        u = free_phase(delta, tau / 2) @ u
    return u


# ---------------------------------------------------------------------------
# OU transition moments (for the exact-update consistency property).
# ---------------------------------------------------------------------------

def ou_transition_moments(x0: float, dt: float, sigma: float, tau_c: float):
    """(mean, variance) of the OU value a time dt after observing x0 (offset 0)."""
    decay = np.exp(-dt / tau_c)
    return x0 * decay, sigma * sigma * (1.0 - decay * decay)


def compose_ou_moments(x0: float, dt1: float, dt2: float, sigma: float, tau_c: float):
    """Moments after two chained transitions dt1 then dt2."""
    m1, v1 = ou_transition_moments(x0, dt1, sigma, tau_c)
    d2 = np.exp(-dt2 / tau_c)
    return m1 * d2, v1 * d2 * d2 + sigma * sigma * (1.0 - d2 * d2)


# ---------------------------------------------------------------------------
# Reference splitmix64 (pure Python ints) for RNG known-answer tests.
# ---------------------------------------------------------------------------

def splitmix64_sequence(state: int, count: int):
    """First `count` outputs of splitmix64 seeded with `state`."""
    mask = (1 << 64) - 1
    out = []
    for _ in range(count):
        state = (state + 0x9E3779B97F4A7C15) & mask
        z = state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & mask
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & mask
        out.append(z ^ (z >> 31))
    return out
