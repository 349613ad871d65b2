"""Nonlinear least-squares fitting of decay curves.

Two jobs: extracting T2 (and optionally the stretch exponent beta) from a
decay curve, and estimating the noise correlation time tau_c by fitting the
closed-form OU decay exponent to an echo-train curve with many random
restarts.  The residual surfaces of the tau_c problem are flat and correlated
(restart histograms are multi-modal), so the core minimizer is derivative-free
simplex descent with positive parameters log-transformed, and the reported fit
is the restart with maximum R^2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from ._rng import RandomStream
from .analytic import DecayModelParams, gamma_ou, stretched_exp
from .ensemble import DecayCurve

__all__ = [
    "FitResult",
    "RestartEnsemble",
    "r_squared",
    "fit_decay",
    "estimate_tau_c",
]

_NM_OPTIONS = {"xatol": 1e-10, "fatol": 1e-16, "maxiter": 4000, "maxfev": 8000}
_RESTART_LOG10_RANGE = (-1.0, 3.0)  # tau_c init drawn log-uniformly from [0.1, 1000] s


@dataclass
class FitResult:
    """Fit outcome.

    `params` is set for decay-envelope fits (simple / stretched models);
    `tau_c` for correlation-time fits.  `param_stderr` maps parameter names
    to standard errors from the local quadratic approximation of the residual
    surface (math.inf when the curvature is not usable).
    """

    params: DecayModelParams | None
    tau_c: float | None
    param_stderr: dict
    r_squared: float
    n_restarts: int
    converged: bool

    def __post_init__(self):
        if self.r_squared > 1.0 + 1e-12:
            raise ValueError(f"r_squared = {self.r_squared} exceeds 1")
        for name, err in self.param_stderr.items():
            if not (err >= 0.0):
                raise ValueError(f"stderr[{name}] = {err} is negative or NaN")


@dataclass
class RestartEnsemble:
    """Per-restart tau_c estimates and goodness-of-fit, for histograms."""

    estimates: np.ndarray
    r2_values: np.ndarray
    best_index: int

    def __post_init__(self):
        self.estimates = np.asarray(self.estimates, dtype=float)
        self.r2_values = np.asarray(self.r2_values, dtype=float)
        if len(self.estimates) != len(self.r2_values):
            raise ValueError("estimates and r2_values must have equal length")
        if not (0 <= self.best_index < len(self.estimates)):
            raise ValueError("best_index out of range")


def r_squared(data, model_values) -> float:
    """1 - SS_res / SS_tot.  <= 1; 1 iff residuals vanish; negative when the
    model does worse than the data mean.  Constant data is rejected (SS_tot = 0)."""
    y = np.asarray(data, dtype=float)
    f = np.asarray(model_values, dtype=float)
    if y.shape != f.shape or y.ndim != 1 or len(y) < 2:
        raise ValueError("data and model_values must be equal-length 1-D, length >= 2")
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    if ss_tot == 0.0:
        raise ValueError("constant data: r_squared is undefined")
    ss_res = float(np.sum((y - f) ** 2))
    return 1.0 - ss_res / ss_tot


def _hessian(fun, x: np.ndarray, rel: float = 1e-4) -> np.ndarray:
    """Central-difference Hessian of a scalar function."""
    p = len(x)
    h = rel * np.maximum(np.abs(x), 1.0)
    hess = np.empty((p, p))
    f0 = fun(x)
    for i in range(p):
        ei = np.zeros(p)
        ei[i] = h[i]
        hess[i, i] = (fun(x + ei) - 2.0 * f0 + fun(x - ei)) / (h[i] * h[i])
        for j in range(i):
            ej = np.zeros(p)
            ej[j] = h[j]
            hess[i, j] = hess[j, i] = (
                fun(x + ei + ej) - fun(x + ei - ej) - fun(x - ei + ej) + fun(x - ei - ej)
            ) / (4.0 * h[i] * h[j])
    return hess


def _stderr_from_ssr(ssr_fun, x_opt: np.ndarray, n_points: int) -> np.ndarray:
    """Standard errors from cov = s^2 H^{-1}, H = Hessian of SSR/2, s^2 = SSR/(n-p)."""
    p = len(x_opt)
    dof = n_points - p
    if dof <= 0:
        return np.full(p, math.inf)
    try:
        hess = _hessian(lambda z: 0.5 * ssr_fun(z), x_opt)
        cov = float(ssr_fun(x_opt)) / dof * np.linalg.inv(hess)
    except np.linalg.LinAlgError:
        return np.full(p, math.inf)
    diag = np.diag(cov)
    out = np.sqrt(np.where(diag > 0, diag, np.nan))
    return np.where(np.isfinite(out), out, math.inf)


def _curve_arrays(curve: DecayCurve) -> tuple:
    t = np.asarray(curve.total_time_s, dtype=float)
    y = np.asarray(curve.signal, dtype=float)
    return t, y


def fit_decay(curve: DecayCurve, model: str = "simple") -> FitResult:
    """Least-squares fit of amplitude * exp(-(t/T2)^beta) + offset.

    model = "simple" fixes beta = 1; "stretched" frees it.  T2 (and beta) are
    optimized in log space so positivity needs no constraints.  Non-convergence
    is flagged via `converged`, not raised.
    """
    if model not in ("simple", "stretched"):
        raise ValueError(f"model must be 'simple' or 'stretched', got {model!r}")
    t, y = _curve_arrays(curve)
    if len(t) < 4:
        raise ValueError("need at least 4 points to fit")
    if np.any(t <= 0):
        raise ValueError("times must be positive")

    offset0 = float(y.min())
    amplitude0 = float(y.max() - y.min()) or 1.0
    # crude 1/e crossing of the normalized data as the T2 seed
    norm = (y - offset0) / amplitude0
    below = np.nonzero(norm < math.exp(-1))[0]
    t2_0 = float(t[below[0]]) if len(below) else float(t[-1])

    def unpack(z):
        if model == "simple":
            return DecayModelParams(t2=math.exp(z[0]), beta=1.0,
                                    amplitude=z[1], offset=z[2])
        return DecayModelParams(t2=math.exp(z[0]), beta=math.exp(z[1]),
                                amplitude=z[2], offset=z[3])

    def ssr(z):
        return float(np.sum((y - stretched_exp(t, unpack(z))) ** 2))

    if model == "simple":
        z0 = np.array([math.log(t2_0), amplitude0, offset0])
        names = ["t2", "amplitude", "offset"]
    else:
        z0 = np.array([math.log(t2_0), 0.0, amplitude0, offset0])
        names = ["t2", "beta", "amplitude", "offset"]

    res = minimize(ssr, z0, method="Nelder-Mead", options=_NM_OPTIONS)
    params = unpack(res.x)
    r2 = r_squared(y, stretched_exp(t, params))

    stderr_z = _stderr_from_ssr(ssr, res.x, len(t))
    stderr = dict(zip(names, stderr_z))
    stderr["t2"] = params.t2 * stderr["t2"]  # log -> linear via d(e^z) = e^z dz
    if model == "stretched":
        stderr["beta"] = params.beta * stderr["beta"]
    return FitResult(params=params, tau_c=None, param_stderr=stderr,
                     r_squared=min(r2, 1.0), n_restarts=1, converged=bool(res.success))


def estimate_tau_c(curve: DecayCurve, sigma_delta: float, n_restarts: int,
                   seed: int) -> tuple:
    """Correlation-time estimate from an echo-train decay curve.

    Fits signal = amplitude * exp(-gamma(N, tau; sigma_delta, tau_c)) + offset
    with sigma_delta held fixed and (tau_c, amplitude, offset) free.  Each
    restart draws tau_c log-uniformly from [0.1, 1000] s (amplitude from
    [0.5, 1.5], offset from [-0.2, 0.2]); the reported fit maximizes R^2.
    Restart r uses substream (seed, r), so the ensemble is reproducible and
    order-independent.

    Returns (FitResult, RestartEnsemble).
    """
    if n_restarts < 1:
        raise ValueError("n_restarts must be >= 1")
    if not sigma_delta > 0:
        raise ValueError("sigma_delta must be > 0")
    t, y = _curve_arrays(curve)
    n_pulses = np.asarray(curve.n_pulses, dtype=np.int64)
    tau = np.asarray(curve.tau_s, dtype=float)
    if np.any(n_pulses < 1):
        raise ValueError("tau_c estimation needs echo-train points (n_pulses >= 1)")

    def model_values(z):
        gamma = gamma_ou(n_pulses, tau, sigma_delta, math.exp(z[0]))
        return z[1] * np.exp(-gamma) + z[2]

    def ssr(z):
        return float(np.sum((y - model_values(z)) ** 2))

    lo, hi = _RESTART_LOG10_RANGE
    estimates = np.empty(n_restarts)
    r2_values = np.empty(n_restarts)
    solutions = []
    any_success = False
    for r in range(n_restarts):
        u = RandomStream.from_seed(seed, r).uniforms(3)
        z0 = np.array([
            math.log(10.0) * (lo + (hi - lo) * u[0]),
            0.5 + u[1],
            -0.2 + 0.4 * u[2],
        ])
        res = minimize(ssr, z0, method="Nelder-Mead", options=_NM_OPTIONS)
        any_success = any_success or bool(res.success)
        estimates[r] = math.exp(res.x[0])
        r2_values[r] = r_squared(y, model_values(res.x))
        solutions.append(res.x)

    best = int(np.argmax(r2_values))
    z_best = solutions[best]
    stderr_z = _stderr_from_ssr(ssr, z_best, len(t))
    tau_c_best = math.exp(z_best[0])
    stderr = {
        "tau_c": tau_c_best * stderr_z[0],
        "amplitude": stderr_z[1],
        "offset": stderr_z[2],
    }
    fit = FitResult(params=None, tau_c=tau_c_best, param_stderr=stderr,
                    r_squared=min(float(r2_values[best]), 1.0),
                    n_restarts=n_restarts, converged=any_success)
    return fit, RestartEnsemble(estimates=estimates, r2_values=r2_values,
                                best_index=best)
