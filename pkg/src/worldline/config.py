"""Run configuration: YAML documents, bundled examples and tolerance names."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from fractions import Fraction
from importlib import resources
from pathlib import Path
from typing import Mapping

import yaml

from worldline.errors import ConfigError, ParseError
from worldline.parser import PolySystem, load_system
from worldline.poly import as_rational

# short name (CLI --tol-<short>, YAML) -> internal key
TOLERANCES = {
    "root": "tol_root",
    "real": "eps_real",
    "conj": "eps_conj",
    "cluster": "eps_cluster",
    "pair": "tol_pair",
    "deriv": "eps_deriv",
    "evt": "delta_evt",
    "halvings": "min_step_halvings",
    "momentum": "tol_momentum",
    "force": "tol_force",
    "energy": "tol_energy",
    "higher": "tol_higher",
    "angular": "tol_angular",
}

KEYS = {"F1", "F2", "t_start", "t_end", "steps", "tolerances", "out", "outputs", "exact_angular",
        "higher_sums_max"}
BUNDLED = ("nine_particles", "six_particles")


@dataclass(frozen=True)
class RunConfig:
    system: PolySystem
    t_start: Fraction
    t_end: Fraction
    steps: int = 200
    tolerances: Mapping[str, float] = field(default_factory=dict)
    out: Path = Path("out")
    exact_angular: bool = False
    higher_sums_max: int | None = None

    def validate(self) -> "RunConfig":
        if not self.t_start < self.t_end:
            raise ConfigError(f"t_start ({self.t_start}) must be below t_end ({self.t_end})")
        if self.steps < 2:
            raise ConfigError(f"steps must be at least 2, got {self.steps}")
        if self.higher_sums_max is not None and self.higher_sums_max < 1:
            raise ConfigError("higher_sums_max must be positive")
        return self

    def with_overrides(self, **kw) -> "RunConfig":
        kw = {k: v for k, v in kw.items() if v is not None}
        if "tolerances" in kw:
            kw["tolerances"] = {**self.tolerances, **kw["tolerances"]}
        return replace(self, **kw).validate()


def _rational(name: str, value) -> Fraction:
    if isinstance(value, bool):
        raise ConfigError(f"{name} must be a number")
    if isinstance(value, float):
        value = str(value)
    try:
        return Fraction(as_rational(value))
    except (ValueError, TypeError, ZeroDivisionError) as exc:
        raise ConfigError(f"{name}: cannot read {value!r} as a rational") from exc


def tolerance_key(name: str) -> str:
    if name in TOLERANCES:
        return TOLERANCES[name]
    if name in TOLERANCES.values():
        return name
    raise ConfigError(f"unknown tolerance {name!r}; known: {', '.join(sorted(TOLERANCES))}")


def from_mapping(doc: Mapping) -> RunConfig:
    if not isinstance(doc, Mapping):
        raise ConfigError("config must be a mapping")
    unknown = set(doc) - KEYS
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    try:
        system = load_system(doc)
    except ParseError as exc:
        raise ConfigError(str(exc)) from exc
    for key in ("t_start", "t_end"):
        if key not in doc:
            raise ConfigError(f"missing key: {key}")
    tols = {}
    raw = doc.get("tolerances") or {}
    if not isinstance(raw, Mapping):
        raise ConfigError("tolerances must be a mapping")
    for k, v in raw.items():
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            raise ConfigError(f"tolerance {k} must be a number")
        tols[tolerance_key(str(k))] = float(v)
    if "out" in doc and "outputs" in doc:
        raise ConfigError("give the output directory as either out or outputs, not both")
    steps = doc.get("steps", 200)
    if isinstance(steps, bool) or not isinstance(steps, int):
        raise ConfigError("steps must be an integer")
    hs = doc.get("higher_sums_max")
    if hs is not None and (isinstance(hs, bool) or not isinstance(hs, int)):
        raise ConfigError("higher_sums_max must be an integer")
    return RunConfig(
        system=system,
        t_start=_rational("t_start", doc["t_start"]),
        t_end=_rational("t_end", doc["t_end"]),
        steps=steps,
        tolerances=tols,
        out=Path(doc.get("outputs", doc.get("out", "out"))),
        exact_angular=bool(doc.get("exact_angular", False)),
        higher_sums_max=hs,
    ).validate()


def bundled_path(name: str):
    return resources.files("worldline.configs").joinpath(f"{name}.yaml")


def read_document(source: str | Path) -> Mapping:
    """YAML document from a path, or from a bundled example name."""
    path = Path(source)
    if path.exists():
        text = path.read_text()
    elif str(source) in BUNDLED:
        text = bundled_path(str(source)).read_text()
    else:
        raise ConfigError(f"no config file {source!r} (bundled examples: {', '.join(BUNDLED)})")
    try:
        return yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"invalid YAML in {source}: {exc}") from exc


def load_config(source: str | Path) -> RunConfig:
    return from_mapping(read_document(source))
