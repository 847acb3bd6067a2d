"""Scenario configuration: TOML or JSON in, validated dataclasses out."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .errors import ConfigError, PFoldError
from .nonlinearity import NonlinearitySpec
from .radial_ode import ProblemSpec


@dataclass(frozen=True)
class Sweep:
    a_min: float = 0.05
    a_max: float = 8.0
    steps: int = 32
    refine: bool = True


@dataclass(frozen=True)
class Tolerances:
    ode: float = 1e-9
    root: float = 1e-10
    quadrature: float = 1e-10

    def solver_kwargs(self) -> dict:
        return {"solver_tol": self.ode, "root_tol": self.root}


@dataclass(frozen=True)
class GridConfig:
    N: int = 1024
    gamma: float | None = None


@dataclass(frozen=True)
class Outputs:
    paths: dict = field(default_factory=dict)
    formats: tuple = ("json", "csv")


@dataclass(frozen=True)
class ScenarioConfig:
    problem: ProblemSpec
    sweep: Sweep = Sweep()
    tolerances: Tolerances = Tolerances()
    grid: GridConfig = GridConfig()
    outputs: Outputs = Outputs()
    seed: int = 0

    def to_dict(self) -> dict:
        return {
            "problem": self.problem.to_dict(),
            "sweep": asdict(self.sweep),
            "tolerances": asdict(self.tolerances),
            "grid": asdict(self.grid),
            "outputs": {"paths": dict(self.outputs.paths), "formats": list(self.outputs.formats)},
            "seed": self.seed,
        }


_SECTIONS = {
    "problem": {"p", "n", "R", "nonlinearity"},
    "sweep": {"a_min", "a_max", "steps", "refine"},
    "tolerances": {"ode", "root", "quadrature"},
    "grid": {"N", "gamma"},
    "outputs": {"paths", "formats"},
}
_OUTPUT_KEYS = {"report", "branch", "profile", "eigenfunction", "plot"}
_FORMATS = {"json", "csv", "gnuplot"}


def _number(value, path, kind=float, positive=False):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(path, f"expected a number, got {type(value).__name__}")
    if kind is int and int(value) != value:
        raise ConfigError(path, "expected an integer")
    value = kind(value)
    if positive and not value > 0:
        raise ConfigError(path, "must be positive")
    return value


def _check_keys(data, allowed, prefix):
    if not isinstance(data, dict):
        raise ConfigError(prefix, "expected a table")
    for key in data:
        if key not in allowed:
            raise ConfigError(f"{prefix}.{key}" if prefix else key, "unknown key")


def from_dict(data: dict) -> ScenarioConfig:
    """Validate a raw mapping; every error names the offending key path."""
    _check_keys(data, set(_SECTIONS) | {"seed"}, "")
    for name, allowed in _SECTIONS.items():
        if name in data:
            _check_keys(data[name], allowed, name)
    if "problem" not in data:
        raise ConfigError("problem", "missing section")
    raw = data["problem"]
    for key in ("p", "n", "nonlinearity"):
        if key not in raw:
            raise ConfigError(f"problem.{key}", "missing key")
    nonlin = raw["nonlinearity"]
    _check_keys(nonlin, {"kind", "m"}, "problem.nonlinearity")
    if "kind" not in nonlin:
        raise ConfigError("problem.nonlinearity.kind", "missing key")
    try:
        spec = NonlinearitySpec.from_dict(nonlin)
    except (PFoldError, TypeError, ValueError) as exc:
        raise ConfigError("problem.nonlinearity", str(exc)) from exc
    try:
        problem = ProblemSpec(
            _number(raw["p"], "problem.p"),
            _number(raw["n"], "problem.n"),
            spec,
            _number(raw.get("R", 1.0), "problem.R", positive=True),
        )
    except ConfigError:
        raise
    except PFoldError as exc:
        raise ConfigError("problem", str(exc)) from exc

    sw = data.get("sweep", {})
    sweep = Sweep(
        _number(sw.get("a_min", Sweep.a_min), "sweep.a_min", positive=True),
        _number(sw.get("a_max", Sweep.a_max), "sweep.a_max", positive=True),
        _number(sw.get("steps", Sweep.steps), "sweep.steps", int, positive=True),
        bool(sw.get("refine", True)),
    )
    if not sweep.a_min < sweep.a_max:
        raise ConfigError("sweep.a_max", "must exceed sweep.a_min")
    tl = data.get("tolerances", {})
    tolerances = Tolerances(*(
        _number(tl.get(key, getattr(Tolerances, key)), f"tolerances.{key}", positive=True)
        for key in ("ode", "root", "quadrature")
    ))
    gr = data.get("grid", {})
    gamma = gr.get("gamma")
    grid = GridConfig(
        _number(gr.get("N", GridConfig.N), "grid.N", int, positive=True),
        None if gamma is None else _number(gamma, "grid.gamma", positive=True),
    )
    out = data.get("outputs", {})
    paths = out.get("paths", {})
    _check_keys(paths, _OUTPUT_KEYS, "outputs.paths")
    formats = tuple(out.get("formats", Outputs.formats))
    for i, fmt in enumerate(formats):
        if fmt not in _FORMATS:
            raise ConfigError(f"outputs.formats[{i}]", f"unknown format {fmt!r}")
    seed = _number(data.get("seed", 0), "seed", int)
    return ScenarioConfig(problem, sweep, tolerances, grid, Outputs(dict(paths), formats), seed)


def load(path) -> ScenarioConfig:
    """Read a .toml or .json scenario file."""
    path = Path(path)
    text = path.read_text()
    try:
        data = json.loads(text) if path.suffix.lower() == ".json" else tomllib.loads(text)
    except (json.JSONDecodeError, tomllib.TOMLDecodeError) as exc:
        raise ConfigError(str(path), f"cannot parse: {exc}") from exc
    return from_dict(data)
