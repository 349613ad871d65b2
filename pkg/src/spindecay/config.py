"""YAML run configuration.

Unit convention: every frequency in a config file is an ordinary frequency in
Hz (field names end in `_hz`), and the single place the 2 pi conversion to
angular units happens is the `to_*` accessors here.  Phases are degrees in the
file, radians internally.  `to_dict` reproduces the file schema with resolved
defaults, in the original units, so a run manifest re-parses to an equal
RunConfig.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import yaml

from .dynamics import DriveParams, StepConfig
from .ensemble import EnsembleConfig
from .gatemap import GATE_NAMES
from .noise import NoiseParams, OUParams
from .sequences import KINDS, SequenceSpec, initial_state_variant

__all__ = [
    "ConfigError",
    "NoiseSection",
    "SequenceEntry",
    "AnalyticSection",
    "FitSection",
    "GatemapSection",
    "TrajectorySection",
    "RunConfig",
]

TWO_PI = 2.0 * math.pi
FIT_MODELS = ("simple", "stretched", "ou-tau-c")
TRAJECTORY_CHANNELS = ("delta", "epsilon")


class ConfigError(Exception):
    """Invalid or missing config entry; message names the dotted key."""


def _key(path: str, name: str) -> str:
    return f"{path}.{name}" if path else name


def _section(data: dict, name: str, path: str = "") -> dict:
    value = data.get(name)
    if not isinstance(value, dict):
        raise ConfigError(f"config key '{_key(path, name)}' must be a mapping")
    return value


def _float(d: dict, name: str, path: str, default=None, minimum=None,
           exclusive=False) -> float:
    if name not in d:
        if default is None:
            raise ConfigError(f"missing config key '{_key(path, name)}'")
        return default
    value = d[name]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"config key '{_key(path, name)}' must be a number")
    value = float(value)
    if not math.isfinite(value):
        raise ConfigError(f"config key '{_key(path, name)}' must be finite")
    if minimum is not None:
        if exclusive and not value > minimum:
            raise ConfigError(f"config key '{_key(path, name)}' must be > {minimum}")
        if not exclusive and value < minimum:
            raise ConfigError(f"config key '{_key(path, name)}' must be >= {minimum}")
    return value


def _int(d: dict, name: str, path: str, default=None, minimum=None) -> int:
    if name not in d:
        if default is None:
            raise ConfigError(f"missing config key '{_key(path, name)}'")
        return default
    value = d[name]
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"config key '{_key(path, name)}' must be an integer")
    if minimum is not None and value < minimum:
        raise ConfigError(f"config key '{_key(path, name)}' must be >= {minimum}")
    return value


def _str(d: dict, name: str, path: str, choices=None, default=None) -> str:
    if name not in d:
        if default is None:
            raise ConfigError(f"missing config key '{_key(path, name)}'")
        return default
    value = d[name]
    if not isinstance(value, str):
        raise ConfigError(f"config key '{_key(path, name)}' must be a string")
    if choices is not None and value not in choices:
        raise ConfigError(
            f"config key '{_key(path, name)}' must be one of {list(choices)}, "
            f"got {value!r}")
    return value


def _number_or_list(d: dict, name: str, path: str, default=None, integer=False):
    """Scalar or nonempty homogeneous list; lists come back as tuples."""
    if name not in d:
        if default is None:
            raise ConfigError(f"missing config key '{_key(path, name)}'")
        return default
    value = d[name]
    if isinstance(value, list):
        if not value:
            raise ConfigError(f"config key '{_key(path, name)}' must be nonempty")
        return tuple(
            _scalar_item(v, _key(path, name), i, integer) for i, v in enumerate(value))
    return _scalar_item(value, _key(path, name), None, integer)


def _scalar_item(value, keyname: str, index, integer: bool):
    where = keyname if index is None else f"{keyname}[{index}]"
    if isinstance(value, bool):
        raise ConfigError(f"config key '{where}' must be a number")
    if integer:
        if not isinstance(value, int):
            raise ConfigError(f"config key '{where}' must be an integer")
        return value
    if not isinstance(value, (int, float)):
        raise ConfigError(f"config key '{where}' must be a number")
    return float(value)


@dataclass(frozen=True)
class NoiseSection:
    sigma_delta_hz: float
    tau_c_s: float
    sigma_eps: float
    tau_omega_s: float
    delta_offset_hz: float = 0.0

    @classmethod
    def from_dict(cls, d: dict) -> "NoiseSection":
        return cls(
            sigma_delta_hz=_float(d, "sigma_delta_hz", "noise", minimum=0.0),
            tau_c_s=_float(d, "tau_c_s", "noise", minimum=0.0, exclusive=True),
            sigma_eps=_float(d, "sigma_eps", "noise", minimum=0.0),
            tau_omega_s=_float(d, "tau_omega_s", "noise", minimum=0.0, exclusive=True),
            delta_offset_hz=_float(d, "delta_offset_hz", "noise", default=0.0),
        )

    def to_dict(self) -> dict:
        return {
            "sigma_delta_hz": self.sigma_delta_hz,
            "tau_c_s": self.tau_c_s,
            "sigma_eps": self.sigma_eps,
            "tau_omega_s": self.tau_omega_s,
            "delta_offset_hz": self.delta_offset_hz,
        }

    def to_params(self) -> NoiseParams:
        return NoiseParams(
            delta=OUParams(sigma=TWO_PI * self.sigma_delta_hz,
                           tau_corr=self.tau_c_s,
                           static_offset=TWO_PI * self.delta_offset_hz),
            epsilon=OUParams(sigma=self.sigma_eps, tau_corr=self.tau_omega_s),
        )


@dataclass(frozen=True)
class SequenceEntry:
    """One simulate family: a sequence kind plus a sweep over tau or N.

    Exactly one of tau_s / n_pulses may be a list; each list element becomes
    one decay-curve point.  state_rotation_deg rotates the prepared state
    while keeping the pi-pulse train anchored (90 selects the orthogonal,
    pulse-error-sensitive initial state).
    """

    name: str
    kind: str
    tau_s: object
    n_pulses: object
    initial_phase_deg: float = 0.0
    readout_phase_deg: float = 0.0
    state_rotation_deg: float = 0.0

    @classmethod
    def from_dict(cls, d: dict, path: str) -> "SequenceEntry":
        kind = _str(d, "kind", path, choices=KINDS)
        default_n = {"ramsey": 0, "hahn": 1}.get(kind)
        n_pulses = _number_or_list(d, "n_pulses", path, integer=True,
                                   default=default_n)
        initial = _float(d, "initial_phase_deg", path, default=0.0)
        entry = cls(
            name=_str(d, "name", path),
            kind=kind,
            tau_s=_number_or_list(d, "tau_s", path),
            n_pulses=n_pulses,
            initial_phase_deg=initial,
            readout_phase_deg=_float(d, "readout_phase_deg", path, default=initial),
            state_rotation_deg=_float(d, "state_rotation_deg", path, default=0.0),
        )
        if isinstance(entry.tau_s, tuple) and isinstance(entry.n_pulses, tuple):
            raise ConfigError(
                f"config key '{path}': only one of tau_s / n_pulses may be a list")
        return entry

    def to_dict(self) -> dict:
        def plain(v):
            return list(v) if isinstance(v, tuple) else v
        return {
            "name": self.name,
            "kind": self.kind,
            "tau_s": plain(self.tau_s),
            "n_pulses": plain(self.n_pulses),
            "initial_phase_deg": self.initial_phase_deg,
            "readout_phase_deg": self.readout_phase_deg,
            "state_rotation_deg": self.state_rotation_deg,
        }

    def expand(self) -> list:
        """The sweep as a list of SequenceSpec, one per curve point."""
        taus = self.tau_s if isinstance(self.tau_s, tuple) else (self.tau_s,)
        ns = self.n_pulses if isinstance(self.n_pulses, tuple) else (self.n_pulses,)
        if len(taus) > 1:
            points = [(t, ns[0]) for t in taus]
        else:
            points = [(taus[0], n) for n in ns]
        init = math.radians(self.initial_phase_deg)
        readout = math.radians(self.readout_phase_deg)
        rotation = math.radians(self.state_rotation_deg)
        specs = []
        for tau, n in points:
            spec = SequenceSpec(kind=self.kind, n_pulses=n, tau=tau,
                                initial_phase=init, readout_phase=readout)
            if rotation != 0.0:
                spec = initial_state_variant(spec, rotation)
            specs.append(spec)
        return specs


@dataclass(frozen=True)
class AnalyticSection:
    """Closed-form coherence curves for a set of tau_c presets."""

    kind: str
    tau_s: object
    n_pulses: object
    tau_c_presets_s: tuple = (12.4, 15.5, 18.7)

    @classmethod
    def from_dict(cls, d: dict) -> "AnalyticSection":
        kind = _str(d, "kind", "analytic", choices=("hahn", "cpmg"), default="cpmg")
        entry = cls(
            kind=kind,
            tau_s=_number_or_list(d, "tau_s", "analytic"),
            n_pulses=_number_or_list(d, "n_pulses", "analytic", integer=True,
                                     default=1 if kind == "hahn" else None),
            tau_c_presets_s=tuple(
                float(v) for v in _as_list(d, "tau_c_presets_s", "analytic",
                                           default=[12.4, 15.5, 18.7])),
        )
        if isinstance(entry.tau_s, tuple) and isinstance(entry.n_pulses, tuple):
            raise ConfigError(
                "config key 'analytic': only one of tau_s / n_pulses may be a list")
        return entry

    def to_dict(self) -> dict:
        def plain(v):
            return list(v) if isinstance(v, tuple) else v
        return {
            "kind": self.kind,
            "tau_s": plain(self.tau_s),
            "n_pulses": plain(self.n_pulses),
            "tau_c_presets_s": list(self.tau_c_presets_s),
        }

    def points(self) -> list:
        taus = self.tau_s if isinstance(self.tau_s, tuple) else (self.tau_s,)
        ns = self.n_pulses if isinstance(self.n_pulses, tuple) else (self.n_pulses,)
        if len(taus) > 1:
            return [(t, ns[0]) for t in taus]
        return [(taus[0], n) for n in ns]


def _as_list(d: dict, name: str, path: str, default):
    if name not in d:
        return default
    value = d[name]
    if not isinstance(value, list) or not value:
        raise ConfigError(f"config key '{_key(path, name)}' must be a nonempty list")
    return value


@dataclass(frozen=True)
class FitSection:
    model: str = "simple"
    n_restarts: int = 500
    seed: int = 0

    @classmethod
    def from_dict(cls, d: dict) -> "FitSection":
        return cls(
            model=_str(d, "model", "fit", choices=FIT_MODELS, default="simple"),
            n_restarts=_int(d, "n_restarts", "fit", default=500, minimum=1),
            seed=_int(d, "seed", "fit", default=0, minimum=0),
        )

    def to_dict(self) -> dict:
        return {"model": self.model, "n_restarts": self.n_restarts, "seed": self.seed}


@dataclass(frozen=True)
class GatemapSection:
    gates: tuple = GATE_NAMES
    tau_s: float = 100e-6
    eps_max: float = 0.03
    delta_max_hz: float = 600e3
    n_eps: int = 121
    n_delta: int = 121

    @classmethod
    def from_dict(cls, d: dict) -> "GatemapSection":
        gates = tuple(_as_list(d, "gates", "gatemap", default=list(GATE_NAMES)))
        for g in gates:
            if g not in GATE_NAMES:
                raise ConfigError(
                    f"config key 'gatemap.gates' has unknown gate {g!r}; "
                    f"expected one of {list(GATE_NAMES)}")
        return cls(
            gates=gates,
            tau_s=_float(d, "tau_s", "gatemap", default=100e-6, minimum=0.0,
                         exclusive=True),
            eps_max=_float(d, "eps_max", "gatemap", default=0.03, minimum=0.0,
                           exclusive=True),
            delta_max_hz=_float(d, "delta_max_hz", "gatemap", default=600e3,
                                minimum=0.0, exclusive=True),
            n_eps=_int(d, "n_eps", "gatemap", default=121, minimum=2),
            n_delta=_int(d, "n_delta", "gatemap", default=121, minimum=2),
        )

    def to_dict(self) -> dict:
        return {
            "gates": list(self.gates),
            "tau_s": self.tau_s,
            "eps_max": self.eps_max,
            "delta_max_hz": self.delta_max_hz,
            "n_eps": self.n_eps,
            "n_delta": self.n_delta,
        }


@dataclass(frozen=True)
class TrajectorySection:
    channel: str
    duration_s: float
    dt_s: float

    @classmethod
    def from_dict(cls, d: dict) -> "TrajectorySection":
        section = cls(
            channel=_str(d, "channel", "trajectory", choices=TRAJECTORY_CHANNELS),
            duration_s=_float(d, "duration_s", "trajectory", minimum=0.0,
                              exclusive=True),
            dt_s=_float(d, "dt_s", "trajectory", minimum=0.0, exclusive=True),
        )
        if section.dt_s > section.duration_s:
            raise ConfigError("config key 'trajectory.dt_s' exceeds duration_s")
        return section

    def to_dict(self) -> dict:
        return {"channel": self.channel, "duration_s": self.duration_s,
                "dt_s": self.dt_s}


@dataclass(frozen=True)
class RunConfig:
    """Everything one run needs; sections unused by a subcommand may be None."""

    noise: NoiseSection
    rabi_hz: float
    n_realizations: int
    master_seed: int
    threads: int = 1
    dt_pulse_s: float = 5e-11
    dt_free_s: float = 2.5e-8
    output_dir: str = "."
    sequences: tuple = ()
    analytic: AnalyticSection | None = None
    fit: FitSection = field(default_factory=FitSection)
    gatemap: GatemapSection = field(default_factory=GatemapSection)
    trajectory: TrajectorySection | None = None

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        if not isinstance(data, dict):
            raise ConfigError("top-level config must be a mapping")
        noise = NoiseSection.from_dict(_section(data, "noise"))
        drive = _section(data, "drive")
        ens = _section(data, "ensemble")
        steps = data.get("steps", {})
        if not isinstance(steps, dict):
            raise ConfigError("config key 'steps' must be a mapping")

        seq_data = data.get("sequences", [])
        if not isinstance(seq_data, list):
            raise ConfigError("config key 'sequences' must be a list")
        sequences = tuple(
            SequenceEntry.from_dict(entry, f"sequences[{i}]")
            if isinstance(entry, dict)
            else _raise(ConfigError(f"config key 'sequences[{i}]' must be a mapping"))
            for i, entry in enumerate(seq_data))
        names = [s.name for s in sequences]
        if len(set(names)) != len(names):
            raise ConfigError("config key 'sequences' has duplicate names")

        return cls(
            noise=noise,
            rabi_hz=_float(drive, "rabi_hz", "drive", minimum=0.0, exclusive=True),
            n_realizations=_int(ens, "n_realizations", "ensemble", minimum=1),
            master_seed=_int(ens, "master_seed", "ensemble", minimum=0),
            threads=_int(ens, "threads", "ensemble", default=1, minimum=1),
            dt_pulse_s=_float(steps, "dt_pulse_s", "steps", default=5e-11,
                              minimum=0.0, exclusive=True),
            dt_free_s=_float(steps, "dt_free_s", "steps", default=2.5e-8,
                             minimum=0.0, exclusive=True),
            output_dir=_str(data, "output_dir", "", default="."),
            sequences=sequences,
            analytic=(AnalyticSection.from_dict(_section(data, "analytic"))
                      if "analytic" in data else None),
            fit=(FitSection.from_dict(_section(data, "fit"))
                 if "fit" in data else FitSection()),
            gatemap=(GatemapSection.from_dict(_section(data, "gatemap"))
                     if "gatemap" in data else GatemapSection()),
            trajectory=(TrajectorySection.from_dict(_section(data, "trajectory"))
                        if "trajectory" in data else None),
        )

    @classmethod
    def load(cls, path: str) -> "RunConfig":
        with open(path) as fh:
            try:
                data = yaml.safe_load(fh)
            except yaml.YAMLError as exc:
                raise ConfigError(f"{path}: not valid YAML: {exc}") from None
        if not isinstance(data, dict):
            raise ConfigError(f"{path}: top-level config must be a mapping")
        return cls.from_dict(data)

    def to_dict(self) -> dict:
        out = {
            "noise": self.noise.to_dict(),
            "drive": {"rabi_hz": self.rabi_hz},
            "ensemble": {
                "n_realizations": self.n_realizations,
                "master_seed": self.master_seed,
                "threads": self.threads,
            },
            "steps": {"dt_pulse_s": self.dt_pulse_s, "dt_free_s": self.dt_free_s},
            "output_dir": self.output_dir,
            "sequences": [s.to_dict() for s in self.sequences],
            "fit": self.fit.to_dict(),
            "gatemap": self.gatemap.to_dict(),
        }
        if self.analytic is not None:
            out["analytic"] = self.analytic.to_dict()
        if self.trajectory is not None:
            out["trajectory"] = self.trajectory.to_dict()
        return out

    def to_yaml(self) -> str:
        return yaml.safe_dump(self.to_dict(), sort_keys=True,
                              default_flow_style=False)

    def drive_params(self) -> DriveParams:
        return DriveParams(rabi_peak=TWO_PI * self.rabi_hz)

    def step_config(self) -> StepConfig:
        return StepConfig(dt_pulse=self.dt_pulse_s, dt_free=self.dt_free_s)

    def ensemble_config(self) -> EnsembleConfig:
        return EnsembleConfig(
            n_realizations=self.n_realizations,
            master_seed=self.master_seed,
            steps=self.step_config(),
            threads=self.threads,
        )


def _raise(exc: Exception):
    raise exc
