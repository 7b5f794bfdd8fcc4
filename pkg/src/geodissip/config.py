"""Flat ``key = value`` experiment configuration files.

One assignment per line, ``#`` starts a comment, booleans are true/false.
Angles may be written as multiples of pi (``0.2 pi``, ``0.2*pi``, ``pi``).
Lists are comma separated; ranges are ``start, stop, step`` with the stop
value included.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from .errors import ConfigError

EXPERIMENTS = ("steady-state", "toy", "fig2", "fig3b", "fig3c", "fig3def", "chern", "bounds", "estimate")
REQUIRED = ("experiment", "omega1", "omega2")

_PI = re.compile(r"^\s*([+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)?\s*\*?\s*pi\s*$")


def parse_real(text: str, key: str) -> float:
    s = text.strip()
    mt = _PI.match(s)
    try:
        if mt:
            coef = mt.group(1)
            val = (float(coef) if coef else 1.0) * math.pi
        elif s in ("-pi",):
            val = -math.pi
        else:
            val = float(s)
    except ValueError:
        raise ConfigError(f"{key}: cannot parse {text!r} as a number", key) from None
    if not math.isfinite(val):
        raise ConfigError(f"{key}: value must be finite", key)
    return val


def parse_int(text: str, key: str) -> int:
    try:
        return int(text.strip())
    except ValueError:
        raise ConfigError(f"{key}: expected an integer, got {text!r}", key) from None


def parse_bool(text: str, key: str) -> bool:
    s = text.strip().lower()
    if s not in ("true", "false"):
        raise ConfigError(f"{key}: expected true or false, got {text!r}", key)
    return s == "true"


def parse_list(text: str, key: str) -> list[float]:
    items = [t for t in text.split(",") if t.strip()]
    if not items:
        raise ConfigError(f"{key}: empty list", key)
    return [parse_real(t, key) for t in items]


def expand_range(values: list[float], key: str) -> list[float]:
    if len(values) != 3:
        raise ConfigError(f"{key}: expected 'start, stop, step'", key)
    start, stop, step = values
    if step <= 0 or stop < start:
        raise ConfigError(f"{key}: need step > 0 and stop >= start", key)
    n = int(math.floor((stop - start) / step + 1e-9)) + 1
    return [float(np.round(start + i * step, 12)) for i in range(n)]


# key -> (parser, default); None default means "unset"
SCHEMA: dict[str, tuple[str, Any]] = {
    "experiment": ("str", None),
    "output": ("str", None),
    # model
    "b11": ("real", 1.0),
    "b12": ("real", 0.5),
    "b21": ("real", 0.5),
    "b22": ("real", 1.0),
    "m": ("real", 1.0),
    "theta": ("real", 0.0),
    "phi": ("real", 0.0),
    "omega1": ("real", None),
    "omega2": ("real", None),
    "fixed_gap": ("real", None),
    # dissipator
    "tau1": ("real", None),
    "tau2": ("real", 10.0),
    "s0_mode": ("str", "unity"),
    "beta": ("real", None),
    # numerics
    "n_grid": ("int", 256),
    "n_chern": ("int", 128),
    "n_per_period": ("int", 400),
    "rtol": ("real", 1e-9),
    # sweeps
    "m_values": ("list", None),
    "m_range": ("range", None),
    "tau2_values": ("list", None),
    "n_range": ("range", None),
    "phi_count": ("int", None),
    "phi_values": ("list", None),
    "x_values": ("list", None),
    # toy / steady-state
    "delta0": ("real", 1.0),
    "omega_ratio": ("real", 0.02),
    # estimate
    "field_amplitude": ("real", None),
    "chern": ("int", None),
    "n_atoms": ("int", 1),
    # misc
    "plot": ("bool", False),
}

EXPERIMENT_DEFAULTS: dict[str, dict[str, Any]] = {
    "steady-state": {"x_values": [0.1, 1.0, 10.0, 100.0]},
    "fig2": {"m_values": [0.25, 1.0, 2.0], "n_range": [1.0, 30.0, 1.0]},
    "fig3b": {"m_range": [-2.0, 2.0, 0.05], "tau2_values": [10.0]},
    "fig3c": {"m_range": [-2.0, 2.0, 0.05], "tau2_values": [10.0], "fixed_gap": 1.0},
    "fig3def": {"theta": 0.2 * math.pi, "m": 1.2, "phi_count": 24},
    "chern": {"m_range": [-2.0, 2.0, 0.05]},
}

_PARSERS = {
    "real": parse_real,
    "int": parse_int,
    "bool": parse_bool,
    "list": parse_list,
    "range": parse_list,
    "str": lambda t, k: t.strip(),
}


@dataclass
class ExperimentConfig:
    values: dict[str, Any]
    source: Path | None = None
    explicit: set[str] = field(default_factory=set)

    def __getattr__(self, key):
        try:
            return self.__dict__["values"][key]
        except KeyError:
            raise AttributeError(key) from None

    @property
    def output_path(self) -> Path:
        out = self.values.get("output")
        if out:
            p = Path(out)
            if not p.is_absolute() and self.source is not None:
                p = self.source.parent / p
            return p
        if self.source is None:
            return Path(f"{self.values['experiment']}.csv")
        return self.source.with_suffix(".csv")

    def sweep(self, key: str) -> list[float] | None:
        """Values for a swept quantity: ``<key>_values`` or the expanded ``<key>_range``.

        Explicit entries win over experiment defaults.
        """
        vk, rk = f"{key}_values", f"{key}_range"
        order = [k for k in (vk, rk) if k in self.explicit] + [vk, rk]
        for k in order:
            v = self.values.get(k)
            if v is not None:
                return expand_range(v, k) if k == rk else list(v)
        return None


def parse_text(text: str) -> dict[str, Any]:
    raw: dict[str, Any] = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value'", None)
        key, val = (s.strip() for s in line.split("=", 1))
        if key not in SCHEMA:
            raise ConfigError(f"unknown key {key!r}", key)
        if key in raw:
            raise ConfigError(f"duplicate key {key!r}", key)
        raw[key] = _PARSERS[SCHEMA[key][0]](val, key)
    return raw


def build_config(raw: dict[str, Any], source: Path | None = None,
                 required: tuple[str, ...] = REQUIRED) -> ExperimentConfig:
    for key in required:
        if key not in raw:
            raise ConfigError(f"missing required key {key!r}", key)
    exp = raw.get("experiment")
    if exp is not None and exp not in EXPERIMENTS:
        raise ConfigError(f"experiment must be one of {', '.join(EXPERIMENTS)}", "experiment")
    values = {k: d for k, (_, d) in SCHEMA.items()}
    values.update(EXPERIMENT_DEFAULTS.get(exp, {}))
    values.update(raw)
    if values["tau1"] is None:
        values["tau1"] = values["tau2"]
    cfg = ExperimentConfig(values, source, set(raw))
    validate(cfg)
    return cfg


def validate(cfg: ExperimentConfig):
    v = cfg.values
    for key in ("omega1", "omega2", "tau2", "tau1", "delta0", "omega_ratio", "field_amplitude"):
        if v[key] is not None and not v[key] > 0:
            raise ConfigError(f"{key} must be positive", key)
    for key in ("b11", "b12", "b21", "b22"):
        if v[key] < 0:
            raise ConfigError(f"{key} must be non-negative", key)
    if v["tau2"] > 2 * v["tau1"]:
        raise ConfigError("tau2 must not exceed 2 tau1", "tau2")
    if v["s0_mode"] not in ("unity", "thermal"):
        raise ConfigError("s0_mode must be unity or thermal", "s0_mode")
    if v["s0_mode"] == "thermal" and not (v["beta"] is not None and v["beta"] > 0):
        raise ConfigError("thermal s0_mode needs beta > 0", "beta")
    if v["fixed_gap"] is not None and not v["fixed_gap"] > 0:
        raise ConfigError("fixed_gap must be positive", "fixed_gap")
    for key in ("n_grid", "n_chern"):
        if v[key] < 8:
            raise ConfigError(f"{key} must be at least 8", key)
    if v["n_per_period"] < 8:
        raise ConfigError("n_per_period must be at least 8", "n_per_period")
    if v["phi_count"] is not None and v["phi_count"] < 1:
        raise ConfigError("phi_count must be positive", "phi_count")
    if v["n_atoms"] < 1:
        raise ConfigError("n_atoms must be positive", "n_atoms")
    if "m_values" in cfg.explicit and "m_range" in cfg.explicit:
        raise ConfigError("give either m_values or m_range, not both", "m_range")
    if "phi_values" in cfg.explicit and "phi_count" in cfg.explicit:
        raise ConfigError("give either phi_values or phi_count, not both", "phi_count")
    for key in ("m_range", "n_range"):
        if v[key] is not None:
            expand_range(v[key], key)
    if v["tau2_values"] is not None and any(t <= 0 for t in v["tau2_values"]):
        raise ConfigError("tau2_values must be positive", "tau2_values")
    if v["experiment"] == "estimate":
        for key in ("field_amplitude", "chern"):
            if v[key] is None:
                raise ConfigError(f"missing required key {key!r}", key)


def load_config(path: str | Path, required: tuple[str, ...] = REQUIRED) -> ExperimentConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc.strerror}", None) from None
    return build_config(parse_text(text), path, required)
