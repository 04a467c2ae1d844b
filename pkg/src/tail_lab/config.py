"""Run configuration: a versioned JSON document validated before any compute."""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

from .evolve import CInfBump, GaussianBump, Grid, InitialData
from .geometry import FixedR, GeometryError, NullOffset, Ray, Trajectory
from .spectrum import CouplingError, ModeSpec, Problem

__all__ = ["SCHEMA_VERSION", "ConfigError", "DataConfig", "TrajectoryConfig", "RunConfig"]

SCHEMA_VERSION = 1


class ConfigError(ValueError):
    """Invalid configuration; ``field`` names the offending entry."""

    def __init__(self, field_name: str, message: str):
        self.field = field_name
        super().__init__(f"{field_name}: {message}")


_TRAJ_KINDS = {"fixed_r": FixedR, "ray": Ray, "null": NullOffset}


@dataclass(frozen=True)
class TrajectoryConfig:
    kind: str
    value: float

    def build(self) -> Trajectory:
        return _TRAJ_KINDS[self.kind](self.value)

    @property
    def slug(self) -> str:
        return f"{self.kind}_{self.value:g}"


@dataclass(frozen=True)
class DataConfig:
    profile: str = "gaussian"
    center: float = 6.0
    width: float = 1.0
    r1: float = 2.0
    r2: float = 10.0
    amplitude: float = 1.0
    wave_seed: str = "velocity"
    dirac_seed: str = "both"

    def build(self) -> InitialData:
        if self.profile == "gaussian":
            prof = GaussianBump(self.center, self.width, self.amplitude)
        elif self.profile == "cinf":
            prof = CInfBump(self.r1, self.r2, self.amplitude)
        else:
            raise ConfigError("data.profile", f"unknown profile {self.profile!r}")
        return InitialData((prof,), self.wave_seed, self.dirac_seed)

    @property
    def core_extent(self) -> float:
        """Radius beyond which the profile is below 1e-12 of its amplitude."""
        if self.profile == "gaussian":
            return self.center + math.sqrt(12.0 * math.log(10.0)) * self.width
        return self.r2


def _default_trajectories():
    return [TrajectoryConfig("fixed_r", 2.0), TrajectoryConfig("ray", 0.5)]


@dataclass
class RunConfig:
    problem: str = "wave"
    n: int = 3
    coupling: float = 1.0
    modes: list[int] = field(default_factory=lambda: [0])
    h: float = 0.02
    dt: float | None = None
    t_max: float = 400.0
    sample_dt: float = 0.2
    trajectories: list[TrajectoryConfig] = field(default_factory=_default_trajectories)
    data: DataConfig = field(default_factory=DataConfig)
    output_dir: str = "runs/default"
    tolerance: float = 0.1
    t_lo: float | None = None
    t_hi: float | None = None
    extrapolation_order: int = 2
    min_decades: float = 1.0
    schema_version: int = SCHEMA_VERSION

    # -- validation

    def validate(self) -> "RunConfig":
        if self.schema_version != SCHEMA_VERSION:
            raise ConfigError("schema_version",
                              f"unsupported version {self.schema_version}, expected {SCHEMA_VERSION}")
        try:
            Problem(self.problem)
        except ValueError:
            raise ConfigError("problem", f"must be 'wave' or 'dirac', got {self.problem!r}") from None
        if not self.modes:
            raise ConfigError("modes", "at least one mode is required")
        if self.problem == "wave":
            if self.n < 3:
                raise ConfigError("n", f"must be >= 3, got {self.n}")
            if self.coupling <= -((self.n - 2) / 2.0) ** 2:
                raise ConfigError("coupling", f"must exceed {-((self.n - 2) / 2.0) ** 2}")
        else:
            if self.n != 3:
                raise ConfigError("n", "Dirac-Coulomb is posed in n = 3 only")
            if abs(self.coupling) >= 0.5:
                raise ConfigError("coupling", f"|Z| must be < 1/2, got {self.coupling}")
        for m in self.modes:
            try:
                self.spec(m)
            except CouplingError as exc:
                raise ConfigError("modes", str(exc)) from None
        if self.h <= 0:
            raise ConfigError("h", "must be positive")
        if self.t_max <= 0:
            raise ConfigError("t_max", "must be positive")
        if self.sample_dt <= 0:
            raise ConfigError("sample_dt", "must be positive")
        if self.dt is not None:
            if self.problem == "wave" and not 0 < self.dt <= 0.4 * self.h:
                raise ConfigError("dt", f"wave runs need 0 < dt <= 0.4 h = {0.4 * self.h}")
            if self.problem == "dirac" and abs(self.dt - self.h) > 1e-12 * self.h:
                raise ConfigError("dt", "Dirac runs step with dt = h")
        if self.tolerance <= 0:
            raise ConfigError("tolerance", "must be positive")
        if self.extrapolation_order not in (1, 2):
            raise ConfigError("extrapolation_order", "must be 1 or 2")
        if self.min_decades <= 0:
            raise ConfigError("min_decades", "must be positive")
        if not self.trajectories:
            raise ConfigError("trajectories", "at least one trajectory is required")
        for i, tr in enumerate(self.trajectories):
            if tr.kind not in _TRAJ_KINDS:
                raise ConfigError(f"trajectories[{i}].kind", f"unknown kind {tr.kind!r}")
            try:
                tr.build()
            except GeometryError as exc:
                raise ConfigError(f"trajectories[{i}].value", str(exc)) from None
        try:
            self.data.build()
        except ConfigError:
            raise
        except ValueError as exc:
            raise ConfigError("data", str(exc)) from None
        return self

    # -- builders

    def spec(self, mode: int) -> ModeSpec:
        if self.problem == "wave":
            return ModeSpec.wave(self.n, self.coupling, mode)
        if self.n != 3:
            raise CouplingError("Dirac-Coulomb is posed in n = 3 only")
        return ModeSpec.dirac(self.coupling, mode)

    def built_trajectories(self) -> list[Trajectory]:
        return [tr.build() for tr in self.trajectories]

    def grid(self) -> Grid:
        return Grid.for_run(self.t_max, self.built_trajectories(), self.data.build(),
                            h=self.h, dt=self.dt)

    # -- serialization

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    @classmethod
    def from_dict(cls, d: dict) -> "RunConfig":
        if not isinstance(d, dict):
            raise ConfigError("<root>", "config must be a JSON object")
        known = {f.name for f in fields(cls)}
        for key in d:
            if key not in known:
                raise ConfigError(key, "unknown field")
        kw = dict(d)
        if "trajectories" in kw:
            trs = []
            for i, item in enumerate(kw["trajectories"]):
                if not isinstance(item, dict) or set(item) != {"kind", "value"}:
                    raise ConfigError(f"trajectories[{i}]", "expected {kind, value}")
                trs.append(TrajectoryConfig(str(item["kind"]), _num(f"trajectories[{i}].value",
                                                                     item["value"])))
            kw["trajectories"] = trs
        if "data" in kw:
            dd = kw["data"]
            dknown = {f.name for f in fields(DataConfig)}
            if not isinstance(dd, dict):
                raise ConfigError("data", "expected an object")
            for key in dd:
                if key not in dknown:
                    raise ConfigError(f"data.{key}", "unknown field")
            kw["data"] = DataConfig(**dd)
        for name in ("coupling", "h", "t_max", "sample_dt", "tolerance", "min_decades"):
            if name in kw:
                kw[name] = _num(name, kw[name])
        for name in ("dt", "t_lo", "t_hi"):
            if kw.get(name) is not None:
                kw[name] = _num(name, kw[name])
        if "modes" in kw:
            if not isinstance(kw["modes"], list) or not all(isinstance(m, int) for m in kw["modes"]):
                raise ConfigError("modes", "expected a list of integers")
        return cls(**kw)

    @classmethod
    def from_json(cls, text: str) -> "RunConfig":
        try:
            d = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError("<file>", f"invalid JSON: {exc}") from None
        return cls.from_dict(d)

    @classmethod
    def load(cls, path) -> "RunConfig":
        return cls.from_json(Path(path).read_text())

    def save(self, path) -> None:
        Path(path).write_text(self.to_json() + "\n")


def _num(name: str, value) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(name, f"expected a number, got {value!r}")
    return float(value)
