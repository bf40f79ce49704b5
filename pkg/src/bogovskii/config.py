"""Experiment configuration: JSON schema, validation and assembly of the numerical objects."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, replace
from functools import cached_property
from pathlib import Path

import numpy as np

from .errors import BogovskiiError, ConfigError
from .geometry import DomainPair, check_distance_oracle, normalize, shape_from_json
from .kernel import Bump, QuadConfig
from .measure import AdmissiblePair, DiscreteMeasure, validate_pair
from .paths import build_path_system
from .whitney import decompose

EXPERIMENT_DIR = Path(__file__).parent / "experiments"


@dataclass(frozen=True)
class WhitneyConfig:
    min_side: float  # in normalized units


@dataclass(frozen=True)
class GridConfig:
    field: int = 64
    weak: tuple = (64, 128)
    weight: tuple = (128, 256)
    poincare: tuple = (64, 128)


@dataclass(frozen=True)
class CombConfig:
    teeth: int = 6  # number of channels analyzed; the comb carries teeth + 1 slits
    eps: float = 0.1
    h_power: float = 3.0
    columns: int = 20
    rows: int = 4
    samples: int = 400
    min_side: float = 0.002


@dataclass(frozen=True)
class SingularConfig:
    a: tuple
    r0: float
    s: float
    levels: int
    per_level: int = 8
    shells: int = 6


@dataclass(frozen=True)
class ExperimentConfig:
    name: str
    omega: dict
    cover: dict | None
    x0: tuple
    mu0: list
    mu: list
    kappa: float
    whitney: WhitneyConfig
    quad: QuadConfig = QuadConfig()
    grids: GridConfig = GridConfig()
    seed: int = 0
    outputs: str = "out"
    comb: CombConfig | None = None
    singular: SingularConfig | None = None

    # -- serialization ---------------------------------------------------------
    def to_dict(self):
        d = {
            "name": self.name,
            "domain": {"omega": self.omega, "cover": self.cover, "x0": list(self.x0)},
            "mu0": self.mu0,
            "mu": self.mu,
            "kappa": self.kappa,
            "whitney": asdict(self.whitney),
            "quad": asdict(self.quad),
            "grids": {k: list(v) if isinstance(v, tuple) else v for k, v in asdict(self.grids).items()},
            "seed": self.seed,
            "outputs": {"dir": self.outputs},
        }
        if self.comb is not None:
            d["comb"] = asdict(self.comb)
        if self.singular is not None:
            s = asdict(self.singular)
            s["a"] = list(s["a"])
            d["singular"] = s
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_dict(cls, d):
        cfg = _parse(d)
        cfg.validate()
        return cfg

    @classmethod
    def from_json(cls, text):
        try:
            d = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError("$", f"invalid JSON: {exc}") from exc
        return cls.from_dict(d)

    @classmethod
    def load(cls, path):
        return cls.from_json(Path(path).read_text())

    def with_overrides(self, gauss_nodes=None, scan_nodes=None, min_side=None, seed=None):
        quad = self.quad
        if gauss_nodes is not None:
            quad = replace(quad, gauss_nodes=gauss_nodes)
        if scan_nodes is not None:
            quad = replace(quad, scan_nodes=scan_nodes)
        whitney = self.whitney if min_side is None else WhitneyConfig(min_side)
        cfg = replace(self, quad=quad, whitney=whitney, seed=self.seed if seed is None else seed)
        cfg.validate()
        return cfg

    # -- validation ----------------------------------------------------------
    def validate(self):
        if self.kappa <= 0:
            raise ConfigError("kappa", "must be positive")
        if self.whitney.min_side <= 0:
            raise ConfigError("whitney.min_side", "must be positive")
        if self.quad.gauss_nodes < 2:
            raise ConfigError("quad.gauss_nodes", "need at least 2 nodes")
        if self.quad.scan_nodes < 1:
            raise ConfigError("quad.scan_nodes", "need at least 1 node")
        if self.grids.field < 8:
            raise ConfigError("grids.field", "grid resolution must be at least 8")
        omega = _shape(self.omega, "domain.omega")
        cover = omega if self.cover is None else _shape(self.cover, "domain.cover")
        if len(self.x0) != omega.dim:
            raise ConfigError("domain.x0", f"expected {omega.dim} coordinates")
        for name, shape in (("domain.omega", omega), ("domain.cover", cover)):
            if not shape.inner_exact:
                try:
                    check_distance_oracle(shape)
                except ValueError as exc:
                    raise ConfigError(name, str(exc)) from exc
        if not omega.contains(np.asarray(self.x0, float)):
            raise ConfigError("domain.x0", "base point is not inside omega")
        for key, items in (("mu0", self.mu0), ("mu", self.mu)):
            for i, it in enumerate(items):
                if len(it.get("point", ())) != omega.dim:
                    raise ConfigError(f"{key}[{i}].point", f"expected {omega.dim} coordinates")
                if not omega.contains(np.asarray(it["point"], float)):
                    raise ConfigError(f"{key}[{i}].point", "atom is not inside omega")
                if key == "mu0" and not it["weight"] > 0:
                    raise ConfigError(f"{key}[{i}].weight", "mu0 weights must be positive")
        if not self.mu0:
            raise ConfigError("mu0", "mu0 needs at least one atom")
        try:
            validate_pair(self.admissible_pair_original())
        except BogovskiiError as exc:
            raise ConfigError("mu", str(exc)) from exc

    def admissible_pair_original(self):
        mu0 = DiscreteMeasure.from_json(self.mu0, positive=True)
        mu = DiscreteMeasure.from_json(self.mu) if self.mu else DiscreteMeasure(np.zeros((0, len(self.x0))), np.zeros(0))
        return AdmissiblePair(mu0, mu, self.kappa)


def _shape(obj, path):
    try:
        return shape_from_json(obj)
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(path, f"invalid CSG tree: {exc}") from exc


def _get(d, key, path, default=...):
    if key not in d:
        if default is ...:
            raise ConfigError(path + key, "missing field")
        return default
    return d[key]


def _tuple(v):
    return tuple(v) if isinstance(v, list) else v


def _sub(cls, d, path):
    if d is None:
        return None
    if not isinstance(d, dict):
        raise ConfigError(path, "expected an object")
    known = set(cls.__dataclass_fields__)
    for k in d:
        if k not in known:
            raise ConfigError(f"{path}.{k}", "unknown field")
    try:
        return cls(**{k: _tuple(v) for k, v in d.items()})
    except TypeError as exc:
        raise ConfigError(path, str(exc)) from exc


def _parse(d):
    if not isinstance(d, dict):
        raise ConfigError("$", "expected an object")
    dom = _get(d, "domain", "")
    if not isinstance(dom, dict):
        raise ConfigError("domain", "expected an object")
    whitney = _sub(WhitneyConfig, _get(d, "whitney", ""), "whitney")
    return ExperimentConfig(
        name=str(_get(d, "name", "")),
        omega=_get(dom, "omega", "domain."),
        cover=dom.get("cover"),
        x0=tuple(float(v) for v in _get(dom, "x0", "domain.")),
        mu0=list(_get(d, "mu0", "")),
        mu=list(_get(d, "mu", "", [])),
        kappa=float(_get(d, "kappa", "")),
        whitney=whitney,
        quad=_sub(QuadConfig, d.get("quad", {}), "quad"),
        grids=_sub(GridConfig, d.get("grids", {}), "grids"),
        seed=int(d.get("seed", 0)),
        outputs=str(d.get("outputs", {}).get("dir", "out")),
        comb=_sub(CombConfig, d.get("comb"), "comb"),
        singular=_sub(SingularConfig, d.get("singular"), "singular"),
    )


class Experiment:
    """Normalized domain, Whitney complex, path system and measures built from a config."""

    def __init__(self, config: ExperimentConfig):
        self.config = config
        omega = shape_from_json(config.omega)
        cover = omega if config.cover is None else shape_from_json(config.cover)
        self.original = DomainPair(omega, cover, tuple(config.x0))
        self.pair = normalize(self.original)

    @property
    def scale(self):
        return self.pair.scale

    @cached_property
    def complex(self):
        return decompose(self.pair, self.config.whitney.min_side)

    @cached_property
    def system(self):
        return build_path_system(self.complex, self.pair)

    @cached_property
    def bump(self):
        return Bump(tuple(float(v) for v in self.pair.x0), self.pair.dim)

    @cached_property
    def measures(self) -> AdmissiblePair:
        orig = self.config.admissible_pair_original()
        to_norm = self.pair.from_original
        return AdmissiblePair(orig.mu0.mapped(to_norm), orig.mu.mapped(to_norm), orig.kappa)

    @cached_property
    def field(self):
        from .solver import solve

        return solve(self.measures, self.system, self.bump, self.config.quad)


def shipped_experiments():
    return sorted(p.stem for p in EXPERIMENT_DIR.glob("*.json"))


def load_shipped(name) -> ExperimentConfig:
    return ExperimentConfig.load(EXPERIMENT_DIR / f"{name}.json")
