"""Experiment configuration: sectioned key-value files with a fixed schema.

A file holds one or more sections named after a CLI subcommand, optionally
with a label (``[chi]``, ``[chi.scan]``). Each key must appear in the schema
below; anything else is rejected. Values are parsed by type, lists are
whitespace or comma separated, and state lists are ``theta phi`` pairs
separated by ``;`` or given as preset names.
"""

from __future__ import annotations

import configparser
import math
import re
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

from ..errors import ConfigError, DomainError
from ..full import FIELD, INTERACTION
from ..symmetric import TopParams

PRESETS = {
    "k1-regular": (2.25, 1.1),
    "k3-regular": (2.25, 2.5),
    "k3-chaotic": (2.25, 1.1),
    "k6-chaotic": (2.25, 1.1),
}

KINDS = ("entropy-time", "revival-scan", "chi-time", "chi-vs-w", "deff-vs-w",
         "phase-space", "spacing-stats", "classical-compare", "fit")

# subcommand -> experiment kinds it may run (first is the default)
COMMAND_KINDS = {
    "evolve": ("entropy-time", "revival-scan"),
    "chi": ("chi-time", "chi-vs-w"),
    "deff": ("deff-vs-w",),
    "phase-space": ("phase-space",),
    "spacing": ("spacing-stats",),
    "classical": ("classical-compare",),
    "fit": ("fit",),
}


@dataclass
class ExperimentConfig:
    """Every run parameter, with desk-scale defaults."""

    kind: str = "entropy-time"
    N: list = field(default_factory=lambda: [10])
    k: float = 1.0
    p: float = math.pi / 2
    disorder: str = INTERACTION
    w: list = field(default_factory=lambda: [0.0])
    realizations: int = 20
    seed: int = 0
    states: list = field(default_factory=lambda: [PRESETS["k1-regular"]])
    kicks: int = 200
    window_start: int = 2000
    window_end: int = 10000
    stride: int = 1
    Q: int = 1
    alpha: float = 1e-4
    grid_theta: int = 32
    grid_phi: int = 32
    sector: int = 1
    bins: int = 50
    s_max: float = 4.0
    unfold_window: int = 10
    collapse_degenerate: bool = False
    density_bins: int = 50
    ensemble_size: int = 10000
    sampling: str = "random"
    frame: str = "tangent"
    model: str = "regular"
    input: str = ""
    column: str = ""
    n_min: float = 0.0
    n_max: float = math.inf
    max_qubits: int = 14
    check_engines: bool = True
    workers: int = 1
    output: str = ""
    plot: str = ""

    def top_params(self, N: int | None = None) -> TopParams:
        return TopParams(k=self.k, p=self.p, N=self.N[0] if N is None else N)

    def as_dict(self) -> dict:
        return asdict(self)

    def echo(self) -> dict:
        """Config rendered back to the textual form it is parsed from."""
        return {f.name: format_value(getattr(self, f.name)) for f in fields(self)}


def _int(text: str) -> int:
    value = float(text)
    if value != int(value):
        raise ValueError(f"{text!r} is not an integer")
    return int(value)


_PI_MULTIPLE = re.compile(r"^([+-]?(?:\d+\.?\d*|\.\d+)?)\s*\*?\s*pi\s*(?:/\s*(\d+\.?\d*))?$")


def _float(text: str) -> float:
    """Parse a float, also accepting multiples of pi such as ``4pi/11``."""
    text = text.strip().lower()
    match = _PI_MULTIPLE.match(text)
    if match:
        coef, denom = match.groups()
        c = {"": 1.0, "+": 1.0, "-": -1.0}.get(coef)
        c = float(coef) if c is None else c
        return c * math.pi / (float(denom) if denom else 1.0)
    return float(text)


def _bool(text: str) -> bool:
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"{text!r} is not a boolean")


def _split(text: str) -> list[str]:
    return [t for t in text.replace(",", " ").split() if t]


def _states(text: str) -> list:
    out = []
    for chunk in text.split(";"):
        chunk = chunk.strip()
        if not chunk:
            continue
        if chunk in PRESETS:
            out.append(PRESETS[chunk])
            continue
        parts = _split(chunk)
        if len(parts) != 2:
            raise ValueError(f"state {chunk!r} must be a preset or a 'theta phi' pair")
        out.append((_float(parts[0]), _float(parts[1])))
    if not out:
        raise ValueError("empty state list")
    return out


PARSERS = {
    "kind": str, "N": lambda t: [_int(x) for x in _split(t)], "k": _float, "p": _float,
    "disorder": str, "w": lambda t: [_float(x) for x in _split(t)],
    "realizations": _int, "seed": _int, "states": _states, "kicks": _int,
    "window_start": _int, "window_end": _int, "stride": _int, "Q": _int, "alpha": _float,
    "grid_theta": _int, "grid_phi": _int, "sector": _int, "bins": _int, "s_max": _float,
    "unfold_window": _int, "collapse_degenerate": _bool, "density_bins": _int,
    "ensemble_size": _int, "sampling": str, "frame": str, "model": str, "input": str,
    "column": str, "n_min": _float, "n_max": _float, "max_qubits": _int,
    "check_engines": _bool, "workers": _int, "output": str, "plot": str,
}


def format_value(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, list):
        if value and isinstance(value[0], tuple):
            return "; ".join(f"{a!r} {b!r}" for a, b in value)
        return " ".join(repr(v) for v in value)
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _validate(cfg: ExperimentConfig, command: str | None):
    if cfg.kind not in KINDS:
        raise ConfigError(f"unknown experiment kind {cfg.kind!r}; expected one of {KINDS}")
    if command is not None and cfg.kind not in COMMAND_KINDS[command]:
        raise ConfigError(f"kind {cfg.kind!r} cannot run under {command!r}; "
                          f"allowed: {COMMAND_KINDS[command]}")
    if cfg.disorder not in (INTERACTION, FIELD):
        raise ConfigError(f"disorder must be {INTERACTION!r} or {FIELD!r}")
    if any(w < 0 for w in cfg.w):
        raise ConfigError("disorder widths must be >= 0")
    if not cfg.N:
        raise ConfigError("N must list at least one qubit count")
    if cfg.realizations < 0:
        raise ConfigError("realizations must be >= 0")
    if cfg.kicks < 0 or cfg.stride < 1:
        raise ConfigError("kicks must be >= 0 and stride >= 1")
    if not 0 <= cfg.window_start <= cfg.window_end:
        raise ConfigError("need 0 <= window_start <= window_end")
    if cfg.sampling not in ("random", "sobol"):
        raise ConfigError("sampling must be 'random' or 'sobol'")
    if cfg.frame not in ("tangent", "angles"):
        raise ConfigError("frame must be 'tangent' or 'angles'")
    if cfg.model not in ("regular", "chaotic", "noisy"):
        raise ConfigError("model must be 'regular', 'chaotic' or 'noisy'")
    if cfg.sector not in (1, -1):
        raise ConfigError("sector must be 1 or -1")
    if cfg.workers < 1:
        raise ConfigError("workers must be >= 1")
    for theta, phi in cfg.states:
        if not (0 <= theta <= math.pi and -math.pi < phi <= math.pi):
            raise ConfigError(f"state ({theta}, {phi}) outside theta in [0, pi], phi in (-pi, pi]")
    if cfg.kind != "fit":
        try:
            for N in cfg.N:
                cfg.top_params(N)
        except DomainError as exc:
            raise ConfigError(str(exc)) from exc
    elif not cfg.input:
        raise ConfigError("fit needs an input table")


def apply_values(cfg: ExperimentConfig, values: dict, source: str) -> ExperimentConfig:
    for raw_key, text in values.items():
        key = raw_key.replace("-", "_")
        if key not in PARSERS:
            raise ConfigError(f"{source}: unknown key {raw_key!r}")
        try:
            setattr(cfg, key, PARSERS[key](str(text)))
        except (ValueError, TypeError, ZeroDivisionError) as exc:
            raise ConfigError(f"{source}: bad value for {raw_key!r}: {exc}") from exc
    return cfg


def load_config(path=None, command: str | None = None, section: str | None = None,
                overrides: dict | None = None) -> ExperimentConfig:
    """Read ``section`` (default: the subcommand name) and apply overrides.

    Raises
    ------
    ConfigError
        Missing file or section, unknown key, unparsable value, or
        inconsistent settings.
    """
    cfg = ExperimentConfig()
    if command is not None:
        cfg.kind = COMMAND_KINDS[command][0]
    if path is not None:
        parser = configparser.ConfigParser(interpolation=None, default_section="\x00")
        parser.optionxform = str
        try:
            with open(path, encoding="utf-8") as fh:
                parser.read_file(fh)
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        except configparser.Error as exc:
            raise ConfigError(f"malformed config {path}: {exc}") from exc
        name = section or command
        if name is None:
            sections = parser.sections()
            if len(sections) != 1:
                raise ConfigError("config has several sections; choose one")
            name = sections[0]
        if not parser.has_section(name):
            raise ConfigError(f"{path}: no section [{name}]")
        apply_values(cfg, dict(parser.items(name)), f"{Path(path).name}[{name}]")
    apply_values(cfg, overrides or {}, "override")
    _validate(cfg, command)
    return cfg
