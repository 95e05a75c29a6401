"""Structured run configuration: YAML with nested blocks, unknown keys rejected."""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import yaml

__all__ = [
    "ConfigError",
    "ScenarioBlock",
    "SolverBlock",
    "DataBlock",
    "PotentialBlock",
    "NonlinearityBlock",
    "ScatterBlock",
    "VerifyBlock",
    "SweepBlock",
    "OutputBlock",
    "RunConfig",
    "load_config",
    "dump_config",
    "config_hash",
]


class ConfigError(ValueError):
    pass


def _build(cls, raw, where: str):
    if raw is None:
        raw = {}
    if not isinstance(raw, dict):
        raise ConfigError(f"{where}: expected a mapping, got {type(raw).__name__}")
    names = {f.name for f in fields(cls)}
    unknown = sorted(set(raw) - names)
    if unknown:
        raise ConfigError(f"{where}: unknown keys {unknown}; allowed {sorted(names)}")
    try:
        obj = cls(**raw)
    except TypeError as exc:
        raise ConfigError(f"{where}: {exc}") from None
    obj.check(where)
    return obj


def _num(where, name, v, allow_none=False):
    if v is None and allow_none:
        return
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"{where}.{name}: expected a number, got {v!r}")


@dataclass
class ScenarioBlock:
    n: int = 5
    p: float = 1.9
    k: float = 2.3
    kappa: float = 2.5
    eps: float = 1e-3
    V0: float = 1e-3

    def check(self, where):
        if isinstance(self.n, bool) or not isinstance(self.n, int):
            raise ConfigError(f"{where}.n: expected an integer, got {self.n!r}")
        for name in ("p", "k", "kappa", "eps", "V0"):
            _num(where, name, getattr(self, name))


@dataclass
class SolverBlock:
    dr: float = 0.125
    r_max: float | None = None
    t_min: float = -80.0
    t_max: float = 80.0
    report_radius: float = 60.0
    cfl: float | None = None
    scheme: str = "auto"

    def check(self, where):
        for name in ("dr", "t_min", "t_max", "report_radius"):
            _num(where, name, getattr(self, name))
        _num(where, "r_max", self.r_max, allow_none=True)
        _num(where, "cfl", self.cfl, allow_none=True)
        if self.scheme not in ("auto", "descent", "flux"):
            raise ConfigError(f"{where}.scheme: expected auto, descent or flux")


@dataclass
class DataBlock:
    profile: str = "power"
    eps: float | None = None
    k: float | None = None

    def check(self, where):
        if self.profile not in ("power", "power_pair", "bump"):
            raise ConfigError(f"{where}.profile: expected power, power_pair or bump")
        _num(where, "eps", self.eps, allow_none=True)
        _num(where, "k", self.k, allow_none=True)


@dataclass
class PotentialBlock:
    shape: str = "power"
    v0: float | None = None
    kappa: float | None = None

    def check(self, where):
        if self.shape not in ("power", "bump"):
            raise ConfigError(f"{where}.shape: expected power or bump")
        _num(where, "v0", self.v0, allow_none=True)
        _num(where, "kappa", self.kappa, allow_none=True)


@dataclass
class NonlinearityBlock:
    A: float = 1.0

    def check(self, where):
        _num(where, "A", self.A)


@dataclass
class ScatterBlock:
    tol: float = 1e-8
    max_iter: int = 30
    tail_tol: float = 1e-3
    fit_lo: float = 2.0
    fit_hi: float = 40.0

    def check(self, where):
        for name in ("tol", "tail_tol", "fit_lo", "fit_hi"):
            _num(where, name, getattr(self, name))
        if isinstance(self.max_iter, bool) or not isinstance(self.max_iter, int) or self.max_iter < 1:
            raise ConfigError(f"{where}.max_iter: expected a positive integer")


@dataclass
class VerifyBlock:
    lemmas: list[str] = field(default_factory=lambda: ["all"])
    box: float = 50.0
    levels: list[int] = field(default_factory=lambda: [0, 1, 2])
    workers: int = 1
    params: dict | None = None
    where: dict | None = None

    def check(self, where):
        if not isinstance(self.lemmas, list) or not all(isinstance(x, str) for x in self.lemmas):
            raise ConfigError(f"{where}.lemmas: expected a list of lemma ids")
        _num(where, "box", self.box)
        if not isinstance(self.levels, list) or len(self.levels) < 2:
            raise ConfigError(f"{where}.levels: expected a list of at least two levels")
        if self.where is not None and not (isinstance(self.where, dict)
                                           and all(isinstance(v, list) for v in self.where.values())):
            raise ConfigError(f"{where}.where: expected a mapping of coordinate names to value lists")
        if self.params is not None:
            need = {"a", "m", "nu", "kappa", "p"}
            if not isinstance(self.params, dict) or set(self.params) != need:
                raise ConfigError(f"{where}.params: expected exactly the keys {sorted(need)}")


@dataclass
class SweepBlock:
    grid: dict = field(default_factory=dict)
    command: str = "scatter"
    workers: int = 1

    def check(self, where):
        if not isinstance(self.grid, dict):
            raise ConfigError(f"{where}.grid: expected a mapping of scenario keys to lists")
        allowed = {f.name for f in fields(ScenarioBlock)}
        bad = sorted(set(self.grid) - allowed)
        if bad:
            raise ConfigError(f"{where}.grid: unknown scenario keys {bad}")
        for key, vals in self.grid.items():
            if not isinstance(vals, list) or not vals:
                raise ConfigError(f"{where}.grid.{key}: expected a non-empty list")
        if self.command not in ("scatter", "certify", "scenario"):
            raise ConfigError(f"{where}.command: expected scatter, certify or scenario")


@dataclass
class OutputBlock:
    dir: str = "out"
    cadence: int = 40
    r_stride: int = 8

    def check(self, where):
        for name in ("cadence", "r_stride"):
            v = getattr(self, name)
            if isinstance(v, bool) or not isinstance(v, int) or v < 1:
                raise ConfigError(f"{where}.{name}: expected a positive integer")


_BLOCKS = {
    "scenario": ScenarioBlock,
    "solver": SolverBlock,
    "data": DataBlock,
    "potential": PotentialBlock,
    "nonlinearity": NonlinearityBlock,
    "scatter": ScatterBlock,
    "verify": VerifyBlock,
    "sweep": SweepBlock,
    "output": OutputBlock,
}


@dataclass
class RunConfig:
    scenario: ScenarioBlock = field(default_factory=ScenarioBlock)
    solver: SolverBlock = field(default_factory=SolverBlock)
    data: DataBlock = field(default_factory=DataBlock)
    potential: PotentialBlock = field(default_factory=PotentialBlock)
    nonlinearity: NonlinearityBlock = field(default_factory=NonlinearityBlock)
    scatter: ScatterBlock = field(default_factory=ScatterBlock)
    verify: VerifyBlock = field(default_factory=VerifyBlock)
    sweep: SweepBlock = field(default_factory=SweepBlock)
    output: OutputBlock = field(default_factory=OutputBlock)

    @classmethod
    def from_dict(cls, raw) -> "RunConfig":
        if raw is None:
            raw = {}
        if not isinstance(raw, dict):
            raise ConfigError("config: expected a mapping at the top level")
        unknown = sorted(set(raw) - set(_BLOCKS))
        if unknown:
            raise ConfigError(f"config: unknown blocks {unknown}; allowed {sorted(_BLOCKS)}")
        return cls(**{name: _build(b, raw.get(name), name) for name, b in _BLOCKS.items()})

    def to_dict(self) -> dict:
        return asdict(self)


def load_config(source: str | Path) -> RunConfig:
    """Parse a YAML file path or YAML text."""
    p = Path(source) if not isinstance(source, str) or "\n" not in source else None
    if p is not None and p.exists():
        text = p.read_text()
    elif isinstance(source, str) and "\n" in source:
        text = source
    else:
        raise ConfigError(f"config file {source} not found")
    try:
        raw = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"config is not valid YAML: {exc}") from None
    return RunConfig.from_dict(raw)


def dump_config(cfg: RunConfig) -> str:
    return yaml.safe_dump(cfg.to_dict(), sort_keys=False, default_flow_style=False)


def config_hash(cfg: RunConfig) -> str:
    canon = json.dumps(cfg.to_dict(), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode()).hexdigest()
