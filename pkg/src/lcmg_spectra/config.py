"""Experiment configuration: JSON file plus command-line overrides."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping

import numpy as np

from .errors import ConfigError, StructuralError
from .expr import parse_element
from .groups import FiniteGroup, GroupModel, Heisenberg, IntegerLattice, QuotientChain
from .ring import RingElement


def build_model(spec: Mapping[str, Any]) -> GroupModel:
    kind = spec.get("model")
    if kind == "lattice":
        dim = int(spec.get("dim", 1))
        if dim < 1:
            raise ConfigError("lattice dimension must be positive")
        return IntegerLattice(dim)
    if kind == "heisenberg":
        return Heisenberg()
    if kind == "finite":
        if "table" in spec:
            try:
                return FiniteGroup(tuple(tuple(r) for r in spec["table"]))
            except StructuralError as exc:
                raise ConfigError(str(exc)) from exc
        if "permutations" in spec:
            return FiniteGroup.from_permutations(spec["permutations"])
        raise ConfigError("finite model needs 'table' or 'permutations'")
    raise ConfigError(f"unknown model {kind!r}; expected lattice, heisenberg or finite")


def build_chain(model: GroupModel, spec: Mapping[str, Any]) -> QuotientChain:
    try:
        if isinstance(model, FiniteGroup):
            subs = spec.get("subgroups")
            if not subs:
                raise ConfigError("finite model needs 'subgroups' (nested normal subgroups)")
            return QuotientChain(model, subgroups=tuple(frozenset(s) for s in subs))
        schedule = spec.get("schedule", "powers")
        if schedule == "powers":
            base = int(spec.get("base", 2))
            levels = int(spec.get("levels", 8))
            if base < 2 or levels < 1:
                raise ConfigError("powers schedule needs base >= 2 and levels >= 1")
            return QuotientChain.powers(model, base, levels)
        if schedule == "explicit":
            return QuotientChain(model, moduli=tuple(spec.get("moduli", ())))
        raise ConfigError(f"unknown schedule {schedule!r}")
    except StructuralError as exc:
        raise ConfigError(f"invalid quotient chain: {exc}") from exc


def parse_model_flag(text: str) -> dict[str, Any]:
    """``lattice:2`` / ``heisenberg`` -> model spec dict."""
    name, _, arg = text.partition(":")
    if name == "lattice":
        return {"model": "lattice", "dim": int(arg or 1)}
    if name == "heisenberg":
        return {"model": "heisenberg"}
    raise ConfigError(f"unknown --model {text!r}; use lattice:<d> or heisenberg (finite via --config)")


def element_from_spec(value: Any, model: GroupModel) -> RingElement:
    if isinstance(value, str):
        return parse_element(value, model)
    if isinstance(value, list):
        return RingElement.from_json(model, value)
    raise ConfigError(f"cannot read a ring element from {value!r}")


@dataclass
class ExperimentConfig:
    group: dict[str, Any] = field(default_factory=lambda: {"model": "lattice", "dim": 1})
    w: Any = None
    z: Any = None
    levels: list[int] | None = None
    grid: tuple[float, float, int] = (0.0, 2.0, 101)
    k: int = 10
    radius: int | None = None
    level: int | None = None
    modulus: int | None = None
    out: str | None = None
    format: str = "text"
    sdf_tol: float = 0.05

    @classmethod
    def load(cls, path: str | Path) -> "ExperimentConfig":
        try:
            data = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        cfg = cls()
        group = {k: v for k, v in data.items() if k in ("model", "dim", "schedule", "base", "levels",
                                                       "moduli", "table", "permutations", "subgroups")}
        if group:
            cfg.group = group
        for key in ("w", "z", "k", "radius", "level", "modulus", "out", "format", "sdf_tol"):
            if key in data:
                setattr(cfg, key, data[key])
        if "grid" in data:
            g = data["grid"]
            cfg.grid = (float(g["min"]), float(g["max"]), int(g["count"])) if isinstance(g, dict) else tuple(g)
        if "run_levels" in data:
            cfg.levels = [int(x) for x in data["run_levels"]]
        return cfg

    def model(self) -> GroupModel:
        return build_model(self.group)

    def chain(self) -> QuotientChain:
        return build_chain(self.model(), self.group)

    def grid_values(self) -> np.ndarray:
        lo, hi, count = self.grid
        if count < 0 or lo < 0 or hi < lo:
            raise ConfigError(f"invalid grid {self.grid}")
        return np.linspace(float(lo), float(hi), int(count))

    def validate(self) -> None:
        chain = self.chain()
        if self.k < 0:
            raise ConfigError("k must be nonnegative")
        if self.format not in ("json", "csv", "text"):
            raise ConfigError(f"unknown format {self.format!r}")
        if self.levels:
            bad = [lv for lv in self.levels if lv not in chain.levels]
            if bad:
                raise ConfigError(f"levels {bad} not in chain 1..{chain.depth}")
        self.grid_values()
