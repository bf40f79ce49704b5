"""Bounded open sets as CSG trees over balls and boxes.

Every node answers two distance queries on point arrays of shape ``(..., n)``:

* ``inner(x)`` -> ``(d, p)``: distance from ``x`` to the complement of the open
  set, together with a nearest complement point ``p`` (``p = x`` outside).
* ``outer(x)`` -> ``(d, p)``: distance from ``x`` to the closure of the set
  (a lower bound for intersections and differences).

Membership is ``inner(x)[0] > 0``, so ``contains`` and ``dist_to_complement``
can never disagree. Differences subtract the closure of the subtrahend, which
keeps the result open and lets zero-thickness boxes act as slits.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np

from .errors import BasePointOutside

# d_hat(x0) after normalization, and the closed unit ball margin around x0
NORMALIZED_DHAT = 15.0
UNIT_BALL_MARGIN = 1.01


def _as_points(x, dim):
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != dim:
        raise ValueError(f"expected points of dimension {dim}, got shape {x.shape}")
    return x.reshape(-1, dim), x.shape[:-1]


def _lex_less(a, b):
    """Row-wise lexicographic ``a < b`` for arrays of shape (N, n)."""
    less = np.zeros(a.shape[0], dtype=bool)
    equal = np.ones(a.shape[0], dtype=bool)
    for i in range(a.shape[1]):
        less |= equal & (a[:, i] < b[:, i])
        equal &= a[:, i] == b[:, i]
    return less


def _take_min(da, pa, db, pb):
    use_b = (db < da) | ((db == da) & _lex_less(pb, pa))
    return np.where(use_b, db, da), np.where(use_b[:, None], pb, pa)


def _take_max(da, pa, db, pb):
    use_b = (db > da) | ((db == da) & _lex_less(pb, pa))
    return np.where(use_b, db, da), np.where(use_b[:, None], pb, pa)


class CsgShape:
    """Base class for CSG nodes. Subclasses implement the flat ``_inner``/``_outer``."""

    dim: int

    def inner(self, x):
        pts, shape = _as_points(x, self.dim)
        d, p = self._inner(pts)
        return d.reshape(shape), p.reshape(shape + (self.dim,))

    def outer(self, x):
        pts, shape = _as_points(x, self.dim)
        d, p = self._outer(pts)
        return d.reshape(shape), p.reshape(shape + (self.dim,))

    def contains(self, x):
        return self.inner(x)[0] > 0

    def dist_to_complement(self, x):
        return self.inner(x)[0]

    def grad_dist(self, x):
        """Gradient of the distance to the complement.

        Unit vector from the (tie-broken) nearest complement point to ``x``;
        zero where the distance vanishes.
        """
        pts, shape = _as_points(x, self.dim)
        d, p = self._inner(pts)
        g = np.zeros_like(pts)
        pos = d > 0
        g[pos] = (pts[pos] - p[pos]) / d[pos, None]
        return g.reshape(shape + (self.dim,))

    @property
    def inner_exact(self) -> bool:
        return True

    @property
    def outer_exact(self) -> bool:
        return True

    def to_json(self) -> dict:
        raise NotImplementedError

    def primitives(self):
        raise NotImplementedError


@dataclass(frozen=True)
class Ball(CsgShape):
    center: tuple
    radius: float

    @property
    def dim(self):
        return len(self.center)

    def _inner(self, x):
        c = np.asarray(self.center)
        v = x - c
        r = np.linalg.norm(v, axis=1)
        d = np.maximum(self.radius - r, 0.0)
        u = np.zeros_like(v)
        nz = r > 0
        u[nz] = v[nz] / r[nz, None]
        # at the center every sphere point is nearest; pick the lexicographically smallest
        u[~nz, 0] = -1.0
        p = np.where((d > 0)[:, None], c + self.radius * u, x)
        return d, p

    def _outer(self, x):
        c = np.asarray(self.center)
        v = x - c
        r = np.linalg.norm(v, axis=1)
        d = np.maximum(r - self.radius, 0.0)
        p = x.copy()
        out = d > 0
        p[out] = c + self.radius * v[out] / r[out, None]
        return d, p

    def dilate(self, center, lam):
        c = np.asarray(center) + lam * (np.asarray(self.center) - np.asarray(center))
        return Ball(tuple(float(v) for v in c), float(self.radius * lam))

    def bbox(self):
        c = np.asarray(self.center)
        return c - self.radius, c + self.radius

    def to_json(self):
        return {"type": "ball", "center": list(self.center), "radius": self.radius}

    def primitives(self):
        yield self


@dataclass(frozen=True)
class Box(CsgShape):
    """Open axis-aligned box; ``lo[i] == hi[i]`` gives an empty open set whose closure is a slab."""

    lo: tuple
    hi: tuple

    @property
    def dim(self):
        return len(self.lo)

    def _inner(self, x):
        lo, hi = np.asarray(self.lo), np.asarray(self.hi)
        n = x.shape[0]
        d = np.full(n, np.inf)
        p = x.copy()
        for i in range(self.dim):
            for face, dist in ((lo[i], x[:, i] - lo[i]), (hi[i], hi[i] - x[:, i])):
                q = x.copy()
                q[:, i] = face
                d, p = _take_min(d, p, dist, q)
        inside = d > 0
        return np.where(inside, d, 0.0), np.where(inside[:, None], p, x)

    def _outer(self, x):
        p = np.clip(x, np.asarray(self.lo), np.asarray(self.hi))
        return np.linalg.norm(x - p, axis=1), p

    def dilate(self, center, lam):
        c = np.asarray(center)
        lo = c + lam * (np.asarray(self.lo) - c)
        hi = c + lam * (np.asarray(self.hi) - c)
        return Box(tuple(float(v) for v in lo), tuple(float(v) for v in hi))

    def bbox(self):
        return np.asarray(self.lo, dtype=float), np.asarray(self.hi, dtype=float)

    def to_json(self):
        return {"type": "box", "min": list(self.lo), "max": list(self.hi)}

    def primitives(self):
        yield self


@dataclass(frozen=True)
class Union(CsgShape):
    children: tuple

    @property
    def dim(self):
        return self.children[0].dim

    def _inner(self, x):
        # max of child distances is a lower bound; exact for a single child
        d, p = self.children[0]._inner(x)
        for c in self.children[1:]:
            d, p = _take_max(d, p, *c._inner(x))
        return d, p

    def _outer(self, x):
        d, p = self.children[0]._outer(x)
        for c in self.children[1:]:
            d, p = _take_min(d, p, *c._outer(x))
        return d, p

    @property
    def inner_exact(self):
        return len(self.children) == 1 and self.children[0].inner_exact

    @property
    def outer_exact(self):
        return all(c.outer_exact for c in self.children)

    def dilate(self, center, lam):
        return Union(tuple(c.dilate(center, lam) for c in self.children))

    def bbox(self):
        boxes = [c.bbox() for c in self.children]
        return np.min([b[0] for b in boxes], axis=0), np.max([b[1] for b in boxes], axis=0)

    def to_json(self):
        return {"type": "union", "children": [c.to_json() for c in self.children]}

    def primitives(self):
        for c in self.children:
            yield from c.primitives()


@dataclass(frozen=True)
class Intersection(CsgShape):
    children: tuple

    @property
    def dim(self):
        return self.children[0].dim

    def _inner(self, x):
        d, p = self.children[0]._inner(x)
        for c in self.children[1:]:
            d, p = _take_min(d, p, *c._inner(x))
        return d, p

    def _outer(self, x):
        d, p = self.children[0]._outer(x)
        for c in self.children[1:]:
            d, p = _take_max(d, p, *c._outer(x))
        return d, p

    @property
    def inner_exact(self):
        return all(c.inner_exact for c in self.children)

    @property
    def outer_exact(self):
        return len(self.children) == 1 and self.children[0].outer_exact

    def dilate(self, center, lam):
        return Intersection(tuple(c.dilate(center, lam) for c in self.children))

    def bbox(self):
        boxes = [c.bbox() for c in self.children]
        return np.max([b[0] for b in boxes], axis=0), np.min([b[1] for b in boxes], axis=0)

    def to_json(self):
        return {"type": "intersection", "children": [c.to_json() for c in self.children]}

    def primitives(self):
        for c in self.children:
            yield from c.primitives()


@dataclass(frozen=True)
class Difference(CsgShape):
    """``children[0]`` minus the closures of all remaining children."""

    children: tuple

    @property
    def dim(self):
        return self.children[0].dim

    def _inner(self, x):
        d, p = self.children[0]._inner(x)
        for c in self.children[1:]:
            d, p = _take_min(d, p, *c._outer(x))
        inside = d > 0
        return d, np.where(inside[:, None], p, x)

    def _outer(self, x):
        d, p = self.children[0]._outer(x)
        for c in self.children[1:]:
            dc, _ = c._inner(x)
            d = np.maximum(d, dc)
        return d, p

    @property
    def inner_exact(self):
        return self.children[0].inner_exact and all(c.outer_exact for c in self.children[1:])

    @property
    def outer_exact(self):
        return False

    def dilate(self, center, lam):
        return Difference(tuple(c.dilate(center, lam) for c in self.children))

    def bbox(self):
        return self.children[0].bbox()

    def to_json(self):
        return {"type": "difference", "children": [c.to_json() for c in self.children]}

    def primitives(self):
        for c in self.children:
            yield from c.primitives()


_COMBINERS = {"union": Union, "intersection": Intersection, "difference": Difference}


def shape_from_json(obj) -> CsgShape:
    kind = obj["type"]
    if kind == "ball":
        return Ball(tuple(float(v) for v in obj["center"]), float(obj["radius"]))
    if kind == "box":
        return Box(tuple(float(v) for v in obj["min"]), tuple(float(v) for v in obj["max"]))
    if kind in _COMBINERS:
        children = tuple(shape_from_json(c) for c in obj["children"])
        if not children:
            raise ValueError(f"{kind} node needs at least one child")
        if len({c.dim for c in children}) != 1:
            raise ValueError("mixed dimensions in CSG tree")
        return _COMBINERS[kind](children)
    raise ValueError(f"unknown CSG node type {kind!r}")


# -- brute-force distance oracle ---------------------------------------------


def _primitive_boundary(prim, spacing):
    n = prim.dim
    if isinstance(prim, Ball):
        c = np.asarray(prim.center)
        if n == 2:
            m = max(16, int(np.ceil(2 * np.pi * prim.radius / spacing)))
            th = 2 * np.pi * np.arange(m) / m
            return c + prim.radius * np.stack([np.cos(th), np.sin(th)], axis=1)
        m = max(64, int(np.ceil(4 * np.pi * prim.radius**2 / spacing**2)))
        k = np.arange(m) + 0.5
        phi = np.arccos(1 - 2 * k / m)
        th = np.pi * (1 + 5**0.5) * k
        u = np.stack([np.cos(th) * np.sin(phi), np.sin(th) * np.sin(phi), np.cos(phi)], axis=1)
        return c + prim.radius * u
    lo, hi = np.asarray(prim.lo), np.asarray(prim.hi)
    axes = [np.linspace(lo[i], hi[i], max(2, int(np.ceil((hi[i] - lo[i]) / spacing)) + 1)) for i in range(n)]
    out = []
    for i in range(n):
        for face in (lo[i], hi[i]):
            grids = [axes[j] if j != i else np.array([face]) for j in range(n)]
            mesh = np.stack(np.meshgrid(*grids, indexing="ij"), axis=-1).reshape(-1, n)
            out.append(mesh)
    return np.unique(np.concatenate(out), axis=0)


def boundary_samples(shape: CsgShape, spacing: float):
    """Points on primitive boundaries that lie outside the open set (hence on or beyond its boundary)."""
    pts = np.concatenate([_primitive_boundary(p, spacing) for p in shape.primitives()])
    return pts[~shape.contains(pts)]


def brute_force_distance(shape: CsgShape, x, spacing: float, samples=None):
    """Distance to the complement by minimizing over a dense boundary sample.

    Converges to the exact value from above as ``spacing -> 0``; independent of
    the closed-form combination rules used by ``inner``.
    """
    b = boundary_samples(shape, spacing) if samples is None else samples
    pts, sh = _as_points(x, shape.dim)
    out = np.empty(len(pts))
    for s in range(0, len(pts), 256):
        chunk = pts[s : s + 256]
        dist = np.linalg.norm(chunk[:, None, :] - b[None, :, :], axis=2).min(axis=1)
        out[s : s + 256] = dist
    out[~shape.contains(pts)] = 0.0
    return out.reshape(sh)


def check_distance_oracle(shape: CsgShape, n_points=400, seed=0, rel_tol=0.02):
    """Compare closed-form and brute-force distances on random interior points.

    Returns the worst relative underestimate; raises ``ValueError`` above ``rel_tol``.
    """
    lo, hi = shape.bbox()
    rng = np.random.default_rng(seed)
    x = rng.uniform(lo, hi, size=(n_points * 4, shape.dim))
    x = x[shape.contains(x)][:n_points]
    if len(x) == 0:
        return 0.0
    spacing = float(np.max(hi - lo)) / 2000
    exact = shape.dist_to_complement(x)
    brute = brute_force_distance(shape, x, spacing)
    worst = float(np.max((brute - exact) / np.maximum(brute, 1e-300)))
    if worst > rel_tol:
        raise ValueError(f"CSG distance underestimates the true complement distance by {worst:.3%}")
    return worst


# -- domain pair ----------------------------------------------------------------


@dataclass(frozen=True)
class DomainPair:
    """The domain ``omega``, its open cover, a base point and the accumulated dilation factor."""

    omega: CsgShape
    cover: CsgShape
    x0: tuple
    scale: float = 1.0
    origin: tuple = field(default=None)

    def __post_init__(self):
        if self.omega.dim not in (2, 3):
            raise ValueError("only dimensions 2 and 3 are supported")
        if self.origin is None:
            object.__setattr__(self, "origin", tuple(self.x0))

    @property
    def dim(self):
        return self.omega.dim

    def d_hat(self, x):
        return self.cover.dist_to_complement(x)

    def grad_d_hat(self, x):
        return self.cover.grad_dist(x)

    def d_omega(self, x):
        return self.omega.dist_to_complement(x)

    def to_original(self, x):
        x0 = np.asarray(self.x0)
        return np.asarray(self.origin) + (np.asarray(x) - x0) / self.scale

    def from_original(self, x):
        x0 = np.asarray(self.x0)
        return x0 + self.scale * (np.asarray(x) - np.asarray(self.origin))

    def diameter(self):
        lo, hi = self.cover.bbox()
        return float(np.linalg.norm(hi - lo))

    def check_inclusion(self, samples=10_000, seed=0):
        """Fraction of sampled points of omega that fall outside the cover (should be 0)."""
        lo, hi = self.omega.bbox()
        x = np.random.default_rng(seed).uniform(lo, hi, size=(samples, self.dim))
        x = x[self.omega.contains(x)]
        return float(np.mean(~self.cover.contains(x))) if len(x) else 0.0


def normalize(pair: DomainPair) -> DomainPair:
    """Dilate about ``x0`` so that the closed unit ball sits in omega and ``d_hat(x0) >= 15``."""
    x0 = np.asarray(pair.x0, dtype=float)
    d_om = float(pair.d_omega(x0))
    if d_om <= 0:
        raise BasePointOutside(f"base point {tuple(x0)} is not inside the domain")
    d_hat = float(pair.d_hat(x0))
    lam = max(NORMALIZED_DHAT / d_hat, UNIT_BALL_MARGIN / d_om)
    if lam <= 1.0 + 1e-9:
        return pair
    return replace(
        pair,
        omega=pair.omega.dilate(x0, lam),
        cover=pair.cover.dilate(x0, lam),
        scale=pair.scale * lam,
    )


def epsilon_interior(pair: DomainPair, eps: float) -> Callable:
    if eps < 0:
        raise ValueError("eps must be non-negative")
    return lambda x: pair.d_hat(x) > eps


@dataclass(frozen=True)
class CoverReport:
    estimate: float
    stderr: float
    samples_in_cover: int

    @property
    def valid(self):
        return self.estimate <= 3 * self.stderr


def sample_interior(shape: CsgShape, count: int, rng, min_dist=0.0, batch=4096):
    """``count`` uniform points of ``shape`` with distance to the complement above ``min_dist``."""
    lo, hi = shape.bbox()
    out, got = [], 0
    while got < count:
        x = rng.uniform(lo, hi, size=(batch, shape.dim))
        x = x[shape.dist_to_complement(x) > min_dist]
        out.append(x)
        got += len(x)
    return np.concatenate(out)[:count]


def validate_cover(pair: DomainPair, samples=10_000, seed=0) -> CoverReport:
    """Monte Carlo estimate of vol(cover minus omega) / vol(cover)."""
    if samples < 1000:
        raise ValueError("need at least 1000 samples")
    lo, hi = pair.cover.bbox()
    x = np.random.default_rng(seed).uniform(lo, hi, size=(samples, pair.dim))
    x = x[pair.cover.contains(x)]
    if pair.cover == pair.omega:
        return CoverReport(0.0, 0.0, len(x))
    p = float(np.mean(~pair.omega.contains(x)))
    return CoverReport(p, float(np.sqrt(p * (1 - p) / len(x))), len(x))
