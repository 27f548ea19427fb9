"""Flat ``key = value`` run configuration shared by the command-line tools.

Example file::

    # N = 50 levels, searched level 32
    N = 50
    j = 10
    s = 32
    delta = 1e4
    n_min = 0
    n_max = 9

``s = random`` draws the searched level from ``seed``.  A run manifest
(JSON) is accepted wherever a config file is, so a run can be replayed
from its own manifest.
"""
from __future__ import annotations

import dataclasses
import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import InvalidConfiguration
from .model import PHOTON_MODES, PhotonDistribution, SearchConfig, default_dt


@dataclass(frozen=True)
class RunSettings:
    N: int = 50
    j: int = 10
    s: int | str = 32
    lam: float = 1.0
    delta: float = 1e4
    n_min: int = 0
    n_max: int = 9
    photon_mode: str = "mixture"
    dt_factor: float = 40.0
    t_end_over_tau: float = 2.0
    sample_every: int | None = None
    seed: int | None = None
    fock_pad: int = 2
    norm_budget: float = 1e-6
    weights: tuple | None = None

    def resolved(self) -> "RunSettings":
        """Copy with a random ``s`` replaced by the level drawn from ``seed``."""
        if self.s != "random":
            return self
        if self.seed is None:
            raise InvalidConfiguration("s = random needs a seed")
        rng = np.random.default_rng(self.seed)
        choices = [l for l in range(1, self.N + 1) if l != self.j]
        return dataclasses.replace(self, s=int(rng.choice(choices)))

    def photons(self) -> PhotonDistribution:
        if self.weights is not None:
            if len(self.weights) != self.n_max - self.n_min + 1:
                raise InvalidConfiguration("weights must list one entry per photon number n_min..n_max")
            return PhotonDistribution.from_weights(self.weights, self.n_min)
        return PhotonDistribution.uniform(self.n_min, self.n_max)

    def search_config(self) -> SearchConfig:
        r = self.resolved()
        return SearchConfig.create(
            r.N, r.j, r.s, r.delta, lam=r.lam, photons=r.photons(),
            photon_mode=r.photon_mode, fock_pad=r.fock_pad,
        )

    def dt(self, cfg: SearchConfig) -> float:
        return default_dt(cfg, self.dt_factor)

    def t_end(self, cfg: SearchConfig) -> float:
        return self.t_end_over_tau * cfg.tau

    def to_mapping(self) -> dict:
        out = {}
        for f in dataclasses.fields(self):
            key = "lambda" if f.name == "lam" else f.name
            value = getattr(self, f.name)
            out[key] = list(value) if isinstance(value, tuple) else value
        return out


def _int(text):
    value = float(text)
    if value != int(value):
        raise ValueError(f"{text!r} is not an integer")
    return int(value)


def _optional(conv):
    return lambda text: None if str(text).strip().lower() in ("", "none", "auto") else conv(text)


def _positive(conv):
    def check(text):
        value = conv(text)
        if not value > 0 or not math.isfinite(value):
            raise ValueError(f"{text!r} must be positive")
        return value
    return check


def _mode(text):
    text = str(text).strip()
    if text not in PHOTON_MODES:
        raise ValueError(f"photon_mode must be one of {PHOTON_MODES}")
    return text


def _level(text):
    return "random" if str(text).strip() == "random" else _int(text)


def _weights(text):
    if isinstance(text, (list, tuple)):
        return tuple(float(x) for x in text)
    if str(text).strip().lower() in ("", "none"):
        return None
    return tuple(float(x) for x in str(text).replace(",", " ").split())


_PARSERS = {
    "N": _int,
    "j": _int,
    "s": _level,
    "lambda": _positive(float),
    "delta": _positive(float),
    "n_min": _int,
    "n_max": _int,
    "photon_mode": _mode,
    "dt_factor": _positive(float),
    "t_end_over_tau": _positive(float),
    "sample_every": _optional(_int),
    "seed": _optional(_int),
    "fock_pad": _int,
    "norm_budget": _positive(float),
    "weights": _weights,
}


def settings_from_mapping(mapping: dict) -> RunSettings:
    values = {}
    for key, raw in mapping.items():
        if key not in _PARSERS:
            raise InvalidConfiguration(f"unknown config key {key!r}")
        if raw is None:
            if key not in ("sample_every", "seed", "weights"):
                raise InvalidConfiguration(f"{key} cannot be null")
            values[key] = None
            continue
        try:
            parsed = _PARSERS[key](raw)
        except (TypeError, ValueError) as exc:
            raise InvalidConfiguration(f"bad value for {key}: {exc}") from None
        values["lam" if key == "lambda" else key] = parsed
    try:
        return RunSettings(**values)
    except TypeError as exc:
        raise InvalidConfiguration(str(exc)) from None


def parse_config_text(text: str) -> RunSettings:
    mapping = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise InvalidConfiguration(f"line {lineno}: expected 'key = value'")
        key, value = (part.strip() for part in line.split("=", 1))
        if key in mapping:
            raise InvalidConfiguration(f"line {lineno}: duplicate key {key!r}")
        mapping[key] = value
    return settings_from_mapping(mapping)


def load_config(path) -> RunSettings:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise InvalidConfiguration(f"cannot read config {path}: {exc}") from None
    if text.lstrip().startswith("{"):
        try:
            manifest = json.loads(text)
        except json.JSONDecodeError as exc:
            raise InvalidConfiguration(f"{path} is not valid JSON: {exc}") from None
        if "config" not in manifest:
            raise InvalidConfiguration(f"{path} has no 'config' section")
        return settings_from_mapping(manifest["config"])
    return parse_config_text(text)


def dump_config(settings: RunSettings) -> str:
    lines = []
    for key, value in settings.to_mapping().items():
        if value is None:
            continue
        if isinstance(value, list):
            value = " ".join(repr(float(v)) for v in value)
        lines.append(f"{key} = {value}")
    return "\n".join(lines) + "\n"
