"""Experiment configuration: flat key-value text with dotted sections.

No nested programmability: every key is a scalar, lists are comma strings.
Unknown keys are rejected so a config is always fully interpreted.
"""

from __future__ import annotations

from dataclasses import dataclass, field, fields
from typing import Any

from .errors import ConfigError

EXPERIMENT_KINDS = (
    "geodesic",
    "harmonic2d",
    "hym-annulus",
    "envelope-converge",
    "distance-subharmonicity",
    "proportionality",
    "min-lem-audit",
    "duality",
    "invariance-audit",
)

# hard desk-scale budgets
MAX_K = 32
MAX_X_RESOLUTION = 64
MAX_AXIS_NODES = 129
MAX_NS = 64


def parse_config_text(text: str) -> dict[str, str]:
    """Parse ``key = value`` lines; '#' starts a comment; blank lines ok."""
    out: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, _, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if not key or not value:
            raise ConfigError(f"line {lineno}: empty key or value in {raw!r}")
        if key in out:
            raise ConfigError(f"line {lineno}: duplicate key '{key}'")
        out[key] = value
    return out


def _to_int(key: str, value: str) -> int:
    try:
        return int(value)
    except ValueError:
        raise ConfigError(f"{key}: expected integer, got {value!r}")


def _to_float(key: str, value: str) -> float:
    try:
        return float(value)
    except ValueError:
        raise ConfigError(f"{key}: expected number, got {value!r}")


def _to_bool(key: str, value: str) -> bool:
    low = value.lower()
    if low in ("true", "1", "yes", "on"):
        return True
    if low in ("false", "0", "no", "off"):
        return False
    raise ConfigError(f"{key}: expected boolean, got {value!r}")


def _to_int_list(key: str, value: str) -> tuple[int, ...]:
    try:
        return tuple(int(p) for p in value.split(",") if p.strip())
    except ValueError:
        raise ConfigError(f"{key}: expected comma-separated integers, got {value!r}")


def _to_float_list(key: str, value: str) -> tuple[float, ...]:
    try:
        return tuple(float(p) for p in value.split(",") if p.strip())
    except ValueError:
        raise ConfigError(f"{key}: expected comma-separated numbers, got {value!r}")


@dataclass
class ExperimentConfig:
    kind: str
    seed: int = 1234
    threads: int = 1

    t0: float = 0.0
    t1: float = 1.0
    nodes: int = 33
    nodes2: int = 17

    annulus_r0: float = 1.0
    annulus_r1: float = 2.718281828459045
    annulus_nt: int = 17
    annulus_ns: int = 16

    x_resolution: int = 32

    k_value: int = 8
    k_list: tuple[int, ...] = (4, 8)

    boundary_left: str = "zero"
    boundary_right: str = "radial:a=0.8+bump:eps=0.25"
    boundary2_left: str = "const:c=0.4+bump:eps=-0.2"
    boundary2_right: str = "radial:a=-0.5"
    scalar_entry: str = "zero"
    scalar_affine: tuple[float, ...] = (0.0, 0.5, 0.3)

    solver_tol: float = 1e-9
    margin_factor: float = 10.0
    solver_max_sweeps: int = 100_000
    solver_omega: float = 1.0
    solver_init: str = "loginterp"

    n_samples: int = 120
    figures: bool = True
    out_dir: str = "out"

    _KEYMAP = {
        "experiment.kind": ("kind", str),
        "seed": ("seed", _to_int),
        "threads": ("threads", _to_int),
        "domain.t0": ("t0", _to_float),
        "domain.t1": ("t1", _to_float),
        "domain.nodes": ("nodes", _to_int),
        "domain.nodes2": ("nodes2", _to_int),
        "annulus.r0": ("annulus_r0", _to_float),
        "annulus.r1": ("annulus_r1", _to_float),
        "annulus.nt": ("annulus_nt", _to_int),
        "annulus.ns": ("annulus_ns", _to_int),
        "x.resolution": ("x_resolution", _to_int),
        "k.value": ("k_value", _to_int),
        "k.list": ("k_list", _to_int_list),
        "boundary.left": ("boundary_left", str),
        "boundary.right": ("boundary_right", str),
        "boundary2.left": ("boundary2_left", str),
        "boundary2.right": ("boundary2_right", str),
        "boundary.scalar_entry": ("scalar_entry", str),
        "boundary.affine": ("scalar_affine", _to_float_list),
        "tolerances.solver": ("solver_tol", _to_float),
        "tolerances.margin_factor": ("margin_factor", _to_float),
        "solver.max_sweeps": ("solver_max_sweeps", _to_int),
        "solver.omega": ("solver_omega", _to_float),
        "solver.init": ("solver_init", str),
        "audit.samples": ("n_samples", _to_int),
        "output.figures": ("figures", _to_bool),
        "output.dir": ("out_dir", str),
    }

    @classmethod
    def from_text(cls, text: str, kind: str | None = None) -> "ExperimentConfig":
        mapping = parse_config_text(text)
        cfg = cls(kind=kind or "")
        for key, value in mapping.items():
            if key not in cls._KEYMAP:
                raise ConfigError(f"unknown config key '{key}'")
            attr, conv = cls._KEYMAP[key]
            if conv is str:
                setattr(cfg, attr, value)
            elif conv is _to_bool:
                setattr(cfg, attr, _to_bool(key, value))
            else:
                setattr(cfg, attr, conv(key, value))
        if kind is not None and cfg.kind and cfg.kind != kind:
            raise ConfigError(
                f"config kind '{cfg.kind}' conflicts with subcommand '{kind}'")
        if kind is not None:
            cfg.kind = kind
        cfg.validate_budgets()
        return cfg

    def validate_budgets(self) -> None:
        if self.kind not in EXPERIMENT_KINDS:
            raise ConfigError(f"unknown experiment kind '{self.kind}'")
        for k in (self.k_value, *self.k_list):
            if not (1 <= k <= MAX_K):
                raise ConfigError(f"k = {k} outside the budget 1..{MAX_K}")
        if not (8 <= self.x_resolution <= MAX_X_RESOLUTION):
            raise ConfigError(
                f"x.resolution = {self.x_resolution} outside 8..{MAX_X_RESOLUTION}")
        for label, n in (("domain.nodes", self.nodes),
                         ("domain.nodes2", self.nodes2),
                         ("annulus.nt", self.annulus_nt)):
            if not (3 <= n <= MAX_AXIS_NODES):
                raise ConfigError(f"{label} = {n} outside 3..{MAX_AXIS_NODES}")
        if not (4 <= self.annulus_ns <= MAX_NS) or self.annulus_ns % 2:
            raise ConfigError(
                f"annulus.ns = {self.annulus_ns} must be even and within "
                f"4..{MAX_NS}")
        if self.t1 <= self.t0:
            raise ConfigError("domain.t1 must exceed domain.t0")
        if not (0 < self.annulus_r0 < self.annulus_r1):
            raise ConfigError("need 0 < annulus.r0 < annulus.r1")
        if self.solver_init not in ("loginterp", "flat", "perturbed"):
            raise ConfigError(f"unknown solver.init '{self.solver_init}'")
        if not (0.0 < self.solver_omega < 2.0):
            raise ConfigError("solver.omega must lie in (0, 2)")
        if self.n_samples < 1:
            raise ConfigError("audit.samples must be positive")

    def echo(self) -> dict[str, Any]:
        """Resolved configuration as a flat mapping (manifest payload)."""
        out = {}
        for f in fields(self):
            if f.name.startswith("_"):
                continue
            val = getattr(self, f.name)
            out[f.name] = list(val) if isinstance(val, tuple) else val
        return out
