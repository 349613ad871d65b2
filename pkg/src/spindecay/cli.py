"""Command-line front end.

Subcommands:

  simulate         Monte-Carlo decay curves, one CSV per configured sequence
  fit              fit a decay-curve CSV (simple / stretched / ou-tau-c)
  analytic         closed-form coherence curves for a set of tau_c presets
  gatemap          gate-fidelity grids over static amplitude/detuning errors
  trajectory-dump  one raw noise trajectory as CSV

Each subcommand takes --config <yaml> plus optional --out, --seed, --threads
overrides.  Outputs are deterministic given the seed; a run_manifest.yaml with
every resolved parameter is written last, and partial outputs are removed if a
command fails.  Exit status is 0 on success, 1 with a diagnostic on stderr
otherwise.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from dataclasses import replace

import numpy as np

from . import _csvio
from ._rng import RandomStream
from .analytic import gamma_ou
from .config import FIT_MODELS, TWO_PI, ConfigError, RunConfig
from .ensemble import decay_curve
from .estimation import estimate_tau_c, fit_decay
from .gatemap import FIDELITY_THRESHOLD, fidelity_map
from .noise import generate_trajectory

__all__ = ["main"]


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="spindecay",
        description="Monte-Carlo and closed-form coherence of a driven spin "
                    "under Ornstein-Uhlenbeck detuning and amplitude noise.")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    def add(name, help_text):
        sp = sub.add_parser(name, help=help_text)
        sp.add_argument("--config", required=True, metavar="PATH",
                        help="YAML run configuration")
        sp.add_argument("--out", metavar="DIR",
                        help="output directory (overrides config output_dir)")
        sp.add_argument("--seed", type=int, metavar="U64",
                        help="master seed (overrides config)")
        sp.add_argument("--threads", type=int, metavar="N",
                        help="worker threads (overrides config)")
        return sp

    add("simulate", "Monte-Carlo decay curves for the configured sequences")
    fit = add("fit", "fit a decay-curve CSV")
    fit.add_argument("--curve", required=True, metavar="CSV",
                     help="decay-curve CSV to fit (simulate output format)")
    fit.add_argument("--model", choices=FIT_MODELS,
                     help="fit model (overrides config fit.model)")
    add("analytic", "closed-form coherence curves for tau_c presets")
    add("gatemap", "gate-fidelity maps over static errors")
    add("trajectory-dump", "write one noise trajectory as CSV")
    return parser


def _effective_config(args) -> tuple:
    cfg = RunConfig.load(args.config)
    if args.seed is not None:
        if args.seed < 0:
            raise ConfigError("--seed must be >= 0")
        cfg = replace(cfg, master_seed=args.seed,
                      fit=replace(cfg.fit, seed=args.seed))
    if args.threads is not None:
        if args.threads < 1:
            raise ConfigError("--threads must be >= 1")
        cfg = replace(cfg, threads=args.threads)
    if args.out is not None:
        cfg = replace(cfg, output_dir=args.out)
    os.makedirs(cfg.output_dir, exist_ok=True)
    return cfg, cfg.output_dir


class _Outputs:
    """Tracks files written by one command so failures leave no partials."""

    def __init__(self, outdir: str):
        self.outdir = outdir
        self.paths: list = []

    def path(self, name: str) -> str:
        p = os.path.join(self.outdir, name)
        self.paths.append(p)
        return p

    def discard(self) -> None:
        for p in self.paths:
            if os.path.exists(p):
                os.unlink(p)

    def finish(self, cfg: RunConfig) -> None:
        # manifest is written last so its presence marks a complete run
        manifest = self.path("run_manifest.yaml")
        _csvio._atomic_write(manifest, cfg.to_yaml())
        for p in self.paths:
            print(f"wrote {p}")


def _cmd_simulate(args) -> int:
    cfg, outdir = _effective_config(args)
    if not cfg.sequences:
        raise ConfigError("config has no 'sequences' entries")
    noise = cfg.noise.to_params()
    drive = cfg.drive_params()
    ens = cfg.ensemble_config()
    out = _Outputs(outdir)
    try:
        for family, entry in enumerate(cfg.sequences):
            curve = decay_curve(entry.expand(), drive, noise, ens,
                                label=entry.name, point_ids=(family,))
            _csvio.write_decay_csv(out.path(f"{entry.name}.csv"), curve)
        out.finish(cfg)
    except BaseException:
        out.discard()
        raise
    return 0


def _cmd_fit(args) -> int:
    cfg, outdir = _effective_config(args)
    model = args.model or cfg.fit.model
    curve = _csvio.read_decay_csv(args.curve)
    out = _Outputs(outdir)
    try:
        if model == "ou-tau-c":
            sigma_delta = TWO_PI * cfg.noise.sigma_delta_hz
            fit, restarts = estimate_tau_c(curve, sigma_delta,
                                           cfg.fit.n_restarts, cfg.fit.seed)
            values = {
                "model": model,
                "tau_c_s": fit.tau_c,
                "r_squared": fit.r_squared,
                "n_restarts": fit.n_restarts,
                "best_restart": restarts.best_index,
                "converged": fit.converged,
            }
            stderr = {"tau_c_s": fit.param_stderr["tau_c"]}
            _csvio.write_fit_csv(out.path("fit_ou_tau_c.csv"), values, stderr)
            _csvio.write_restarts_csv(out.path("tau_c_restarts.csv"), restarts)
        else:
            fit = fit_decay(curve, model=model)
            p = fit.params
            values = {
                "model": model,
                "t2_s": p.t2,
                "beta": p.beta,
                "amplitude": p.amplitude,
                "offset": p.offset,
                "r_squared": fit.r_squared,
                "converged": fit.converged,
            }
            stderr = {
                "t2_s": fit.param_stderr["t2"],
                "amplitude": fit.param_stderr["amplitude"],
                "offset": fit.param_stderr["offset"],
            }
            if model == "stretched":
                stderr["beta"] = fit.param_stderr["beta"]
            _csvio.write_fit_csv(out.path(f"fit_{model}.csv"), values, stderr)
        out.finish(cfg)
    except BaseException:
        out.discard()
        raise
    return 0


def _cmd_analytic(args) -> int:
    cfg, outdir = _effective_config(args)
    if cfg.analytic is None:
        raise ConfigError("config has no 'analytic' section")
    section = cfg.analytic
    sigma = TWO_PI * cfg.noise.sigma_delta_hz
    if not sigma > 0:
        raise ConfigError("config key 'noise.sigma_delta_hz' must be > 0 "
                          "for analytic curves")
    points = section.points()
    out = _Outputs(outdir)
    try:
        for tau_c in section.tau_c_presets_s:
            lines = ["n_pulses,tau_s,total_time_s,gamma,coherence"]
            for tau, n in points:
                gamma = float(gamma_ou(n, tau, sigma, tau_c))
                lines.append(",".join([
                    str(int(n)), repr(float(tau)), repr(float(n * tau)),
                    repr(gamma), repr(math.exp(-gamma)),
                ]))
            name = f"analytic_{section.kind}_tau_c_{tau_c:g}s.csv"
            _csvio._atomic_write(out.path(name), "\n".join(lines) + "\n")
        out.finish(cfg)
    except BaseException:
        out.discard()
        raise
    return 0


def _cmd_gatemap(args) -> int:
    cfg, outdir = _effective_config(args)
    gm = cfg.gatemap
    drive = cfg.drive_params()
    eps_values = np.linspace(-gm.eps_max, gm.eps_max, gm.n_eps)
    delta_values = np.linspace(-TWO_PI * gm.delta_max_hz,
                               TWO_PI * gm.delta_max_hz, gm.n_delta)
    box_eps = 3.0 * cfg.noise.sigma_eps
    box_delta = 3.0 * TWO_PI * cfg.noise.sigma_delta_hz
    out = _Outputs(outdir)
    try:
        for gate in gm.gates:
            grid = fidelity_map(gate, eps_values, delta_values, drive, gm.tau_s)
            _csvio.write_gatemap_csv(out.path(f"gatemap_{gate}.csv"), grid)
            try:
                box_min = grid.min_over_box(box_eps, box_delta)
            except ValueError:
                box_min = None
            meta = {
                "gate": gate,
                "tau_s": gm.tau_s,
                "fidelity_threshold": FIDELITY_THRESHOLD,
                "box": {
                    "eps_abs_max": box_eps,
                    "delta_abs_max_rad_s": box_delta,
                    "note": "3 sigma of each noise channel",
                },
                "min_fidelity_in_box": box_min,
                "grid": gm.to_dict(),
            }
            _csvio.write_json(out.path(f"gatemap_{gate}.json"), meta)
        out.finish(cfg)
    except BaseException:
        out.discard()
        raise
    return 0


def _cmd_trajectory_dump(args) -> int:
    cfg, outdir = _effective_config(args)
    if cfg.trajectory is None:
        raise ConfigError("config has no 'trajectory' section")
    section = cfg.trajectory
    noise = cfg.noise.to_params()
    channel_index = {"delta": 0, "epsilon": 1}[section.channel]
    params = noise.delta if section.channel == "delta" else noise.epsilon
    n_steps = int(round(section.duration_s / section.dt_s))
    times = np.arange(n_steps + 1) * section.dt_s
    stream = RandomStream.from_seed(cfg.master_seed, channel_index)
    traj = generate_trajectory(params, times, stream)
    value_name = "delta_rad_s" if section.channel == "delta" else "epsilon"
    out = _Outputs(outdir)
    try:
        _csvio.write_trajectory_csv(
            out.path(f"trajectory_{section.channel}.csv"),
            traj.times, traj.values, value_name=value_name)
        out.finish(cfg)
    except BaseException:
        out.discard()
        raise
    return 0


_COMMANDS = {
    "simulate": _cmd_simulate,
    "fit": _cmd_fit,
    "analytic": _cmd_analytic,
    "gatemap": _cmd_gatemap,
    "trajectory-dump": _cmd_trajectory_dump,
}


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except (ConfigError, _csvio.CsvFormatError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
