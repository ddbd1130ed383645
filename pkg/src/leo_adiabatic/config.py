"""INI-style run configuration.

Sections and keys (all energies in omega1 units, times in 1/omega1)::

    [model]      name, omega1, T, omega, generator
    [evolution]  frame, xi, initial, store_every, energy_shift
    [pulse]      kind, I, delta_steps, tau_steps, eta, a, b, xi, seed,
                 period_steps, s_max, s_reading, s_band
    [mc]         trials, seed, jobs
    [kernel]     points, method
    [sweep]      axis, grid, frame_gap
    [output]     dir, rho

Hyphens and underscores in key names are interchangeable. Unknown sections
or keys are errors. Overrides use dotted keys, e.g. ``pulse.I=20``.
"""
from __future__ import annotations

import configparser
import hashlib
from pathlib import Path

from .evolution import EvolutionConfig, InvariantError
from .models import make_model
from .pulses import PulseTrain


class ConfigError(ValueError):
    """Malformed, missing or inconsistent configuration."""


def _bool(v: str) -> bool:
    v = v.strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {v!r}")


def _floats(v: str) -> tuple[float, ...]:
    return tuple(float(x) for x in v.replace(";", ",").split(",") if x.strip())


def _band(v: str) -> tuple[float, float] | None:
    if v.strip().lower() in ("", "none"):
        return None
    lo, hi = _floats(v)
    return (lo, hi)


def _opt_float(v: str) -> float | None:
    return None if v.strip().lower() in ("", "none", "auto") else float(v)


SCHEMA: dict[str, dict[str, object]] = {
    "model": {"name": str, "omega1": float, "T": float, "omega": _opt_float, "generator": str},
    "evolution": {"frame": str, "xi": float, "initial": str, "store_every": int, "energy_shift": float},
    "pulse": {
        "kind": str, "I": float, "delta_steps": int, "tau_steps": int, "eta": float, "a": float,
        "b": float, "xi": _opt_float, "seed": int, "period_steps": int, "s_max": float,
        "s_reading": str, "s_band": _band,
    },
    "mc": {"trials": int, "seed": int, "jobs": int},
    "kernel": {"points": int, "method": str},
    "sweep": {"axis": str, "grid": _floats, "frame_gap": _bool},
    "output": {"dir": str, "rho": _bool},
}

DEFAULTS = {
    "model": {"name": "two-level", "omega1": "1.0", "T": "1.0", "omega": "auto", "generator": "fixed-gap"},
    "evolution": {"frame": "adiabatic", "xi": "0.005", "initial": "ground", "store_every": "1", "energy_shift": "0"},
    "pulse": {
        "kind": "zero", "I": "0", "delta_steps": "1", "tau_steps": "1", "eta": "0", "a": "0", "b": "0",
        "xi": "auto", "seed": "0", "period_steps": "20", "s_max": "0.1", "s_reading": "period-mean",
        "s_band": "none",
    },
    "mc": {"trials": "1", "seed": "0", "jobs": "1"},
    "kernel": {"points": "20", "method": "numeric"},
    "sweep": {"axis": "I", "grid": "", "frame_gap": "false"},
    "output": {"dir": "", "rho": "false"},
}

KERNEL_METHODS = ("numeric", "closed")


def _raw_from_text(text: str, source: str) -> dict[str, dict[str, str]]:
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    parser.optionxform = str  # keys are case-sensitive (I vs i)
    try:
        parser.read_string(text, source=source)
    except configparser.Error as exc:
        raise ConfigError(f"config parse failure in {source}: {' '.join(str(exc).split())}") from None
    raw = {sec: dict(vals) for sec, vals in DEFAULTS.items()}
    for sec in parser.sections():
        if sec not in SCHEMA:
            raise ConfigError(f"unknown config section [{sec}]")
        for key, val in parser.items(sec):
            key = key.replace("-", "_")
            if key not in SCHEMA[sec]:
                raise ConfigError(f"unknown config key {sec}.{key}")
            raw[sec][key] = val
    return raw


def apply_overrides(raw: dict[str, dict[str, str]], overrides) -> None:
    for item in overrides or ():
        if "=" not in item:
            raise ConfigError(f"override {item!r} is not key=value")
        key, val = item.split("=", 1)
        sec, _, name = key.strip().partition(".")
        name = name.replace("-", "_")
        if sec not in SCHEMA or name not in SCHEMA[sec]:
            raise ConfigError(f"unknown override key {key.strip()!r}")
        raw[sec][name] = val.strip()


def _typed(raw: dict[str, dict[str, str]]) -> dict[str, dict[str, object]]:
    out: dict[str, dict[str, object]] = {}
    for sec, keys in SCHEMA.items():
        out[sec] = {}
        for key, conv in keys.items():
            try:
                out[sec][key] = conv(raw[sec][key])
            except (TypeError, ValueError) as exc:
                raise ConfigError(f"bad value for {sec}.{key}: {raw[sec][key]!r} ({exc})") from None
    return out


class RunConfig:
    """Parsed configuration with builders for the library objects."""

    def __init__(self, raw: dict[str, dict[str, str]]):
        self.raw = raw
        self.values = _typed(raw)
        self.build_evolution()  # validate eagerly
        if self.values["kernel"]["method"] not in KERNEL_METHODS:
            raise ConfigError(f"kernel.method must be one of {KERNEL_METHODS}")

    @classmethod
    def from_text(cls, text: str, overrides=None, source: str = "<string>") -> "RunConfig":
        raw = _raw_from_text(text, source)
        apply_overrides(raw, overrides)
        return cls(raw)

    @classmethod
    def from_file(cls, path, overrides=None) -> "RunConfig":
        path = Path(path)
        if not path.is_file():
            raise ConfigError(f"config not found: {path}")
        return cls.from_text(path.read_text(), overrides, source=str(path))

    @classmethod
    def default(cls, overrides=None) -> "RunConfig":
        return cls.from_text("", overrides)

    def with_overrides(self, overrides) -> "RunConfig":
        raw = {sec: dict(vals) for sec, vals in self.raw.items()}
        apply_overrides(raw, overrides)
        return RunConfig(raw)

    def __getitem__(self, section: str) -> dict[str, object]:
        return self.values[section]

    def build_model(self):
        m = self.values["model"]
        params = {"omega1": m["omega1"], "T": m["T"]}
        if m["name"] == "two-level":
            params["omega"] = m["omega"]
        elif m["name"] == "xy-chain-3":
            params["generator"] = m["generator"]
        try:
            return make_model(m["name"], **params)
        except (TypeError, ValueError) as exc:
            raise ConfigError(str(exc)) from None

    def build_pulse(self) -> PulseTrain:
        p = dict(self.values["pulse"])
        if p["xi"] is None:
            p["xi"] = self.values["evolution"]["xi"]
        p["horizon"] = self.values["model"]["T"]
        try:
            return PulseTrain(**p)
        except (TypeError, ValueError) as exc:
            raise ConfigError(str(exc)) from None

    def build_evolution(self) -> EvolutionConfig:
        e = self.values["evolution"]
        try:
            return EvolutionConfig(
                model=self.build_model(),
                pulse=self.build_pulse(),
                frame=e["frame"],
                xi=e["xi"],
                initial=e["initial"],
                store_every=e["store_every"],
                energy_shift=e["energy_shift"],
            )
        except (ConfigError, InvariantError):
            raise
        except (TypeError, ValueError, RuntimeError) as exc:
            raise ConfigError(str(exc)) from None

    def echo(self) -> list[str]:
        """Canonical 'section.key = value' lines of the full configuration."""
        return [f"{sec}.{key} = {self.raw[sec][key]}" for sec in SCHEMA for key in SCHEMA[sec]]

    def digest(self) -> str:
        return hashlib.sha256("\n".join(self.echo()).encode()).hexdigest()
