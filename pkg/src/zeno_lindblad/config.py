"""JSON scenario configs.  Field names are exactly the dataclass fields; unknown keys are rejected."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, fields, replace
from pathlib import Path
from typing import Any

from .errors import ArgumentError
from .zeno import TargetSpec


class ConfigError(ArgumentError):
    pass


def _reject_unknown(data: dict, allowed: set[str], where: str):
    if not isinstance(data, dict):
        raise ConfigError(f"{where}: expected an object, got {type(data).__name__}")
    unknown = sorted(set(data) - allowed)
    if unknown:
        raise ConfigError(f"{where}: unknown field(s) {unknown}")


def _number(value: Any, where: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
        raise ConfigError(f"{where}: expected a finite number, got {value!r}")
    return float(value)


def _target(data: Any, where: str) -> TargetSpec:
    _reject_unknown(data, {"theta", "phi", "mu"}, where)
    try:
        return TargetSpec(**{k: _number(v, f"{where}.{k}") for k, v in data.items()})
    except ArgumentError as exc:
        raise ConfigError(f"{where}: {exc}") from None


@dataclass(frozen=True)
class ScenarioConfig:
    n_sites: int
    couplings: tuple[float, float, float]
    left: TargetSpec
    right: TargetSpec | None = None
    gamma: float = 50.0
    t_end: float = 3000.0
    dt_record: float = 10.0
    initial_R_diagonal: tuple[float, ...] | None = None
    seed: int = 0

    def __post_init__(self):
        if isinstance(self.n_sites, bool) or not isinstance(self.n_sites, int) or self.n_sites < 3:
            raise ConfigError(f"n_sites must be an integer >= 3, got {self.n_sites!r}")
        if len(self.couplings) != 3:
            raise ConfigError("couplings must be [jx, jy, jz]")
        if not self.gamma > 0:
            raise ConfigError(f"gamma must be positive, got {self.gamma}")
        if not self.t_end >= 0 or not self.dt_record > 0:
            raise ConfigError("need t_end >= 0 and dt_record > 0")
        if self.initial_R_diagonal is not None:
            p = self.initial_R_diagonal
            n_free = self.n_sites - (1 if self.right is None else 2)
            if len(p) != 2 ** n_free:
                raise ConfigError(f"initial_R_diagonal needs {2 ** n_free} entries, got {len(p)}")
            if any(x < 0 for x in p) or abs(sum(p) - 1) > 1e-9:
                raise ConfigError("initial_R_diagonal entries must be >= 0 and sum to 1")

    @classmethod
    def from_dict(cls, data: dict, where: str = "config") -> "ScenarioConfig":
        _reject_unknown(data, {f.name for f in fields(cls)}, where)
        for key in ("n_sites", "couplings", "left"):
            if key not in data:
                raise ConfigError(f"{where}: missing required field {key!r}")
        kw: dict[str, Any] = {}
        n = data["n_sites"]
        if isinstance(n, bool) or not isinstance(n, int):
            raise ConfigError(f"{where}.n_sites: expected an integer, got {n!r}")
        kw["n_sites"] = n
        c = data["couplings"]
        if not isinstance(c, list) or len(c) != 3:
            raise ConfigError(f"{where}.couplings: expected [jx, jy, jz]")
        kw["couplings"] = tuple(_number(x, f"{where}.couplings") for x in c)
        kw["left"] = _target(data["left"], f"{where}.left")
        if data.get("right") is not None:
            kw["right"] = _target(data["right"], f"{where}.right")
        for key in ("gamma", "t_end", "dt_record"):
            if key in data:
                kw[key] = _number(data[key], f"{where}.{key}")
        if data.get("initial_R_diagonal") is not None:
            p = data["initial_R_diagonal"]
            if not isinstance(p, list):
                raise ConfigError(f"{where}.initial_R_diagonal: expected a list")
            kw["initial_R_diagonal"] = tuple(_number(x, f"{where}.initial_R_diagonal") for x in p)
        if "seed" in data:
            s = data["seed"]
            if isinstance(s, bool) or not isinstance(s, int):
                raise ConfigError(f"{where}.seed: expected an integer")
            kw["seed"] = s
        return cls(**kw)

    def to_dict(self) -> dict:
        out: dict[str, Any] = {
            "n_sites": self.n_sites,
            "couplings": list(self.couplings),
            "left": vars(self.left).copy(),
            "right": None if self.right is None else vars(self.right).copy(),
            "gamma": self.gamma,
            "t_end": self.t_end,
            "dt_record": self.dt_record,
            "initial_R_diagonal": None if self.initial_R_diagonal is None else list(self.initial_R_diagonal),
            "seed": self.seed,
        }
        return out

    def with_gamma(self, gamma: float) -> "ScenarioConfig":
        return replace(self, gamma=float(gamma))


@dataclass(frozen=True)
class SweepConfig:
    base: ScenarioConfig
    gamma_values: tuple[float, ...]

    def __post_init__(self):
        g = self.gamma_values
        if not g:
            raise ConfigError("gamma_values must be nonempty")
        if any(x <= 0 for x in g) or any(b <= a for a, b in zip(g, g[1:])):
            raise ConfigError("gamma_values must be positive and strictly increasing")

    @classmethod
    def from_dict(cls, data: dict) -> "SweepConfig":
        _reject_unknown(data, {"base", "gamma_values"}, "sweep")
        if "base" not in data or "gamma_values" not in data:
            raise ConfigError("sweep needs 'base' and 'gamma_values'")
        if not isinstance(data["gamma_values"], list):
            raise ConfigError("sweep.gamma_values: expected a list")
        gammas = tuple(_number(x, "sweep.gamma_values") for x in data["gamma_values"])
        return cls(ScenarioConfig.from_dict(data["base"], "sweep.base"), gammas)

    def to_dict(self) -> dict:
        return {"base": self.base.to_dict(), "gamma_values": list(self.gamma_values)}


def read_json(path: str | Path) -> dict:
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON in {path}: {exc}") from None


def load_scenario(path: str | Path) -> ScenarioConfig:
    return ScenarioConfig.from_dict(read_json(path))


def load_sweep(path: str | Path) -> SweepConfig:
    return SweepConfig.from_dict(read_json(path))
