"""Run configuration read from TOML.

Layout::

    s = 0.5
    alpha = 0.0
    p = 4.0
    omega = 0.3

    [potential]
    kind = "constant"    # or "coercive" with expr = "r**2" (and optional v0)
    m = 1.0

    [grid]
    R = 20.0
    N = 511

    [solver]
    M = 40
    tol = 1e-6
    max_iters = 2000
    seed_amplitude = 1.0
    seed_width = 1.0

    [table]
    omegas = [0.1, 1.0, 10.0]
    s_points = 10000

    [spectrum]
    K = 5

Unknown keys are rejected.  With a config file, the four model scalars are
required by the subcommands that use them; without one, the defaults above
apply.
"""

from __future__ import annotations

import sys
from dataclasses import dataclass, field

from .errors import DomainError
from .mountain_pass import SolveOptions
from .params import ModelParams, PotentialSpec
from .radial import RadialGrid

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

__all__ = ["ConfigError", "RunConfig", "load_config", "parse_config"]

MODEL_KEYS = ("s", "alpha", "p", "omega")

_SECTIONS = {
    "potential": {"kind", "m", "expr", "v0"},
    "grid": {"R", "N"},
    "solver": {"M", "tol", "max_iters", "seed_amplitude", "seed_width"},
    "table": {"omegas", "s_points"},
    "spectrum": {"K"},
}

DEFAULTS = {
    "s": 0.5,
    "alpha": 0.0,
    "p": 4.0,
    "omega": 0.3,
    "potential": {"kind": "constant", "m": 1.0},
    "grid": {"R": 20.0, "N": 511},
    "solver": {"M": 40, "tol": 1e-6, "max_iters": 2000, "seed_amplitude": 1.0, "seed_width": 1.0},
    "table": {"omegas": [0.1, 1.0, 10.0], "s_points": 10000},
    "spectrum": {"K": 5},
}


class ConfigError(ValueError):
    """Malformed or invalid configuration."""


@dataclass
class RunConfig:
    model: dict = field(default_factory=dict)
    potential: dict = field(default_factory=dict)
    grid: dict = field(default_factory=dict)
    solver: dict = field(default_factory=dict)
    table: dict = field(default_factory=dict)
    spectrum: dict = field(default_factory=dict)
    missing_model: tuple = ()

    def params(self) -> ModelParams:
        if self.missing_model:
            raise ConfigError("missing required key(s): " + ", ".join(self.missing_model))
        pot = self.potential
        try:
            if pot.get("kind", "constant") == "constant":
                extra = set(pot) - {"kind", "m"}
                if extra:
                    raise ConfigError(f"constant potential does not take {sorted(extra)}")
                spec = PotentialSpec.constant(_num(pot.get("m"), "potential.m"))
            elif pot["kind"] == "coercive":
                if "m" in pot:
                    raise ConfigError("coercive potential does not take m")
                v0 = pot.get("v0")
                spec = PotentialSpec.coercive(str(pot.get("expr", "")), None if v0 is None else _num(v0, "potential.v0"))
            else:
                raise ConfigError(f"unknown potential kind {pot['kind']!r}")
            m = self.model
            return ModelParams(_num(m["s"], "s"), _num(m["alpha"], "alpha"), _num(m["p"], "p"),
                               _num(m["omega"], "omega"), spec)
        except DomainError as exc:
            raise ConfigError(str(exc)) from exc

    def radial_grid(self) -> RadialGrid:
        try:
            return RadialGrid(_num(self.grid["R"], "grid.R"), _int(self.grid["N"], "grid.N"))
        except DomainError as exc:
            raise ConfigError(str(exc)) from exc

    def solve_options(self) -> SolveOptions:
        s = self.solver
        try:
            return SolveOptions(
                M=_int(s["M"], "solver.M"),
                tol=_num(s["tol"], "solver.tol"),
                max_iters=_int(s["max_iters"], "solver.max_iters"),
                seed_amplitude=_num(s["seed_amplitude"], "solver.seed_amplitude"),
                seed_width=_num(s["seed_width"], "solver.seed_width"),
            )
        except DomainError as exc:
            raise ConfigError(str(exc)) from exc

    def table_spec(self) -> tuple:
        omegas = self.table["omegas"]
        if not isinstance(omegas, list) or not omegas:
            raise ConfigError("table.omegas must be a nonempty list")
        omegas = [_num(w, "table.omegas") for w in omegas]
        if any(w <= 0 for w in omegas):
            raise ConfigError("table.omegas must be positive")
        n = _int(self.table["s_points"], "table.s_points")
        if n < 3:
            raise ConfigError("table.s_points must be at least 3")
        return omegas, n

    def spectrum_K(self) -> int:
        K = _int(self.spectrum["K"], "spectrum.K")
        if K < 1:
            raise ConfigError("spectrum.K must be positive")
        return K


def _num(v, name) -> float:
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"{name} must be a number, got {v!r}")
    return float(v)


def _int(v, name) -> int:
    if isinstance(v, bool) or not isinstance(v, int):
        if isinstance(v, float) and v.is_integer():
            return int(v)
        raise ConfigError(f"{name} must be an integer, got {v!r}")
    return v


def parse_config(data: dict | None) -> RunConfig:
    """Validate a parsed TOML table; ``None`` gives the defaults."""
    cfg = RunConfig(
        model={k: DEFAULTS[k] for k in MODEL_KEYS},
        **{sec: dict(DEFAULTS[sec]) for sec in _SECTIONS},
    )
    if data is None:
        return cfg
    unknown = set(data) - set(MODEL_KEYS) - set(_SECTIONS)
    if unknown:
        raise ConfigError(f"unknown key(s): {', '.join(sorted(unknown))}")
    cfg.missing_model = tuple(k for k in MODEL_KEYS if k not in data)
    for k in MODEL_KEYS:
        if k in data:
            cfg.model[k] = _num(data[k], k)
    for sec, allowed in _SECTIONS.items():
        if sec not in data:
            continue
        table = data[sec]
        if not isinstance(table, dict):
            raise ConfigError(f"[{sec}] must be a table")
        bad = set(table) - allowed
        if bad:
            raise ConfigError(f"unknown key(s) in [{sec}]: {', '.join(sorted(bad))}")
        if sec == "potential":
            cfg.potential = dict(table)
        else:
            getattr(cfg, sec).update(table)
    return cfg


def load_config(path) -> RunConfig:
    try:
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"malformed TOML: {exc}") from exc
    return parse_config(data)
