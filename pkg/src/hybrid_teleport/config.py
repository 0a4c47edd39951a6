"""Sweep configuration, grid specs and the built-in presets."""

from __future__ import annotations

import ast
import copy
import hashlib
import json
import math
import operator
from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import ConfigError
from .fock import required_dim

EXPERIMENTS = ("teleport-fidelity", "bsm-stats", "verify-ecs", "pauli-x", "kerr-sweep", "wigner-grid")
FORMATS = ("csv", "json")
MODELS = ("ideal", "displaced")

RANGES = {
    "theta": (0.0, math.pi),
    "phi": (0.0, 2.0 * math.pi),
    "alpha": (0.0, 4.0),
    "flux": (-0.5, 0.5),
}

# which grids each experiment consumes
GRIDS_USED = {
    "teleport-fidelity": ("theta", "phi", "alpha"),
    "bsm-stats": ("theta", "phi", "alpha"),
    "verify-ecs": ("alpha",),
    "pauli-x": ("alpha",),
    "kerr-sweep": ("flux",),
    "wigner-grid": (),
}

_OPS = {ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul, ast.Div: operator.truediv}


def parse_number(value, field_name: str = "value") -> float:
    """Numbers or small arithmetic strings such as ``"pi/64"`` or ``"2*pi"``."""
    if isinstance(value, bool):
        raise ConfigError(field_name, "booleans are not numbers")
    if isinstance(value, (int, float)):
        return float(value)
    if not isinstance(value, str):
        raise ConfigError(field_name, f"expected a number, got {value!r}")

    def ev(node):
        if isinstance(node, ast.Expression):
            return ev(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
            return float(node.value)
        if isinstance(node, ast.Name) and node.id == "pi":
            return math.pi
        if isinstance(node, ast.BinOp) and type(node.op) in _OPS:
            return _OPS[type(node.op)](ev(node.left), ev(node.right))
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, ast.USub):
            return -ev(node.operand)
        raise ValueError(node)

    try:
        return float(ev(ast.parse(value, mode="eval")))
    except (SyntaxError, ValueError, ZeroDivisionError):
        raise ConfigError(field_name, f"cannot parse number {value!r}") from None


def expand_grid(spec, name: str) -> np.ndarray:
    """Grid spec -> values.

    Accepted forms: a scalar, a list (entries may themselves be
    ``{"start", "stop", "step"}`` ranges), or a single range mapping.  Ranges
    include ``stop`` when it lies on the step lattice.
    """
    if spec is None:
        raise ConfigError(name, "grid is missing")
    if isinstance(spec, dict):
        try:
            start = parse_number(spec["start"], name)
            stop = parse_number(spec["stop"], name)
            step = parse_number(spec["step"], name)
        except KeyError as exc:
            raise ConfigError(name, f"range needs start/stop/step, missing {exc}") from None
        if step <= 0:
            raise ConfigError(name, "step must be positive")
        if stop < start:
            return np.array([])
        count = int(math.floor((stop - start) / step + 1e-9)) + 1
        return np.round(start + step * np.arange(count), 12)
    if isinstance(spec, (list, tuple)):
        parts = [expand_grid(s, name) for s in spec]
        return np.concatenate(parts) if parts else np.array([])
    return np.array([parse_number(spec, name)])


@dataclass
class SweepConfig:
    experiment: str
    theta: object = 0.0
    phi: object = 0.0
    alpha: object = 2.0
    flux: object = 0.141
    fock_dim: int | None = None
    measurement_model: str = "ideal"
    seed: int = 0
    output_path: str | None = None
    output_format: str = "csv"
    jobs: int | None = None
    options: dict = field(default_factory=dict)
    name: str | None = None

    @classmethod
    def from_dict(cls, data: dict) -> "SweepConfig":
        known = set(cls.__dataclass_fields__)
        unknown = set(data) - known
        if unknown:
            raise ConfigError(sorted(unknown)[0], "unknown configuration field")
        if "experiment" not in data:
            raise ConfigError("experiment", "missing")
        return cls(**copy.deepcopy(data))

    def to_dict(self) -> dict:
        return asdict(self)

    def grid(self, name: str) -> np.ndarray:
        return expand_grid(getattr(self, name), name)

    def validate(self) -> "SweepConfig":
        if self.experiment not in EXPERIMENTS:
            raise ConfigError("experiment", f"must be one of {', '.join(EXPERIMENTS)}")
        if self.output_format not in FORMATS:
            raise ConfigError("output_format", f"must be one of {FORMATS}")
        if self.measurement_model not in MODELS:
            raise ConfigError("measurement_model", f"must be one of {MODELS}")
        if not isinstance(self.seed, int) or self.seed < 0:
            raise ConfigError("seed", "must be a non-negative integer")
        if self.jobs is not None and (not isinstance(self.jobs, int) or self.jobs < 1):
            raise ConfigError("jobs", "must be a positive integer")
        if not isinstance(self.options, dict):
            raise ConfigError("options", "must be a mapping")
        for name in GRIDS_USED[self.experiment]:
            values = self.grid(name)
            if values.size == 0:
                raise ConfigError(name, "grid is empty")
            lo, hi = RANGES[name]
            if values.min() < lo - 1e-12 or values.max() > hi + 1e-12:
                raise ConfigError(name, f"values must lie in [{lo:.6g}, {hi:.6g}]")
        if self.fock_dim is not None:
            if not isinstance(self.fock_dim, int) or self.fock_dim < 2:
                raise ConfigError("fock_dim", "must be an integer >= 2")
            if "alpha" in GRIDS_USED[self.experiment]:
                amax = float(np.max(np.abs(self.grid("alpha"))))
                if self.fock_dim < required_dim(amax):
                    raise ConfigError(
                        "fock_dim", f"{self.fock_dim} too small for alpha={amax:g} (need {required_dim(amax)})"
                    )
        return self

    def fingerprint(self) -> str:
        """Hash of everything that can change the data rows."""
        data = self.to_dict()
        for key in ("output_path", "output_format", "jobs"):
            data.pop(key)
        blob = json.dumps(data, sort_keys=True, separators=(",", ":"), default=str)
        return hashlib.sha256(blob.encode()).hexdigest()[:16]


PRESETS = {
    "fig2": {
        "description": "Quantum and classical teleportation fidelity surfaces over (theta, alpha), phi = 0",
        "config": {
            "experiment": "teleport-fidelity",
            "theta": {"start": 0, "stop": "pi", "step": "pi/64"},
            "phi": 0.0,
            "alpha": [0.01, {"start": 0.05, "stop": 3.0, "step": 0.05}],
        },
    },
    "fig2b": {
        "description": "alpha = 2 cut with full-pipeline simulated fidelity next to the closed form",
        "config": {
            "experiment": "teleport-fidelity",
            "theta": {"start": 0, "stop": "pi", "step": "pi/16"},
            "phi": 0.0,
            "alpha": 2.0,
            "options": {"simulate": True},
        },
    },
    "fig4": {
        "description": "Self-Kerr K versus fluxonium external flux around 0.141, derived couplings",
        "config": {
            "experiment": "kerr-sweep",
            "flux": {"start": 0.10, "stop": 0.20, "step": 0.005},
            "options": {"calibration": "derived"},
        },
    },
    "fig4-crossing": {
        "description": "Self-Kerr sweep across the window where the derived-coupling K changes sign",
        "config": {
            "experiment": "kerr-sweep",
            "flux": {"start": 0.38, "stop": 0.46, "step": 0.0025},
            "options": {"calibration": "derived"},
        },
    },
    "bsm": {
        "description": "Hybrid Bell measurement outcome probabilities at theta = pi/2",
        "config": {
            "experiment": "bsm-stats",
            "theta": "pi/2",
            "phi": 0.0,
            "alpha": [0.3, 0.5, 1.0, 2.0],
            "measurement_model": "displaced",
        },
    },
    "verify": {
        "description": "ECS versus classically correlated mixture: zz, parity and fringe statistics",
        "config": {
            "experiment": "verify-ecs",
            "alpha": [1.5, 2.0],
            "measurement_model": "displaced",
            "options": {"states": ["ecs", "mixture"]},
        },
    },
    "pauli-x": {
        "description": "Repeat-until-success pseudo Pauli-x: success probability and mean rounds",
        "config": {
            "experiment": "pauli-x",
            "alpha": [0.5, 1.0, 2.0],
            "options": {"trials": 10000, "max_rounds": 64},
        },
    },
}


def preset_config(name: str) -> SweepConfig:
    if name not in PRESETS:
        raise ConfigError("preset", f"unknown preset {name!r} (have {', '.join(PRESETS)})")
    cfg = SweepConfig.from_dict(PRESETS[name]["config"])
    cfg.name = name
    return cfg
