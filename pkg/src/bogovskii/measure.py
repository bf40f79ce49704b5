"""Atomic measures and the weight w0 = I1 mu0 + omega * d_hat^(1-n)."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy.spatial import cKDTree

from .errors import AtomCoincidence, DominationViolated, SkinViolation, ZeroSumViolated
from .paths import PathSystem, geodesic_distance

ZERO_SUM_RTOL = 1e-12


@dataclass(frozen=True, eq=False)
class DiscreteMeasure:
    points: np.ndarray  # (N, n)
    weights: np.ndarray  # (N,)
    positive: bool = False

    def __post_init__(self):
        pts = np.atleast_2d(np.asarray(self.points, dtype=float))
        w = np.atleast_1d(np.asarray(self.weights, dtype=float))
        if len(pts) != len(w):
            raise ValueError("points and weights differ in length")
        if self.positive and np.any(w <= 0):
            raise ValueError("a positive measure needs strictly positive weights")
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "weights", w)

    @property
    def dim(self):
        return self.points.shape[1]

    @cached_property
    def mass(self) -> float:
        return float(np.sum(self.weights))

    @cached_property
    def total_variation(self) -> float:
        return float(np.sum(np.abs(self.weights)))

    def scaled(self, factor):
        return DiscreteMeasure(self.points, self.weights * factor, self.positive and factor > 0)

    def mapped(self, fn):
        return DiscreteMeasure(fn(self.points), self.weights, self.positive)

    def to_json(self):
        return [{"point": [float(v) for v in p], "weight": float(w)} for p, w in zip(self.points, self.weights)]

    @classmethod
    def from_json(cls, items, positive=False):
        pts = np.array([it["point"] for it in items], dtype=float)
        w = np.array([it["weight"] for it in items], dtype=float)
        return cls(pts, w, positive)


@dataclass(frozen=True, eq=False)
class AdmissiblePair:
    mu0: DiscreteMeasure
    mu: DiscreteMeasure
    kappa: float


@dataclass(frozen=True)
class PairReport:
    zero_sum_residual: float
    slack: np.ndarray = field(repr=False)  # kappa * mu0 weight - |mu weight| per mu atom


def validate_pair(pair: AdmissiblePair) -> PairReport:
    mu, mu0 = pair.mu, pair.mu0
    scale = max(mu.total_variation, 1e-300)
    resid = abs(mu.mass) / scale
    if resid > ZERO_SUM_RTOL and mu.total_variation > 0:
        raise ZeroSumViolated(f"mu(Omega) = {mu.mass:g} is not zero")
    slack = np.empty(len(mu.weights))
    for i, (p, w) in enumerate(zip(mu.points, mu.weights)):
        hit = np.flatnonzero(np.all(mu0.points == p, axis=1))
        if len(hit) == 0:
            if w == 0:
                slack[i] = 0.0
                continue
            raise DominationViolated(f"mu atom at {tuple(p)} is not an atom of mu0")
        slack[i] = pair.kappa * mu0.weights[hit].sum() - abs(w)
        if slack[i] < -1e-12 * max(abs(w), 1.0):
            raise DominationViolated(f"|mu| > kappa mu0 at {tuple(p)}")
    return PairReport(resid, slack)


def riesz_potential(mu0: DiscreteMeasure, x, block=2_000_000):
    """sum_i w_i |x - y_i|^(1-n), vectorized over points ``x`` in blocks of about ``block`` pairs."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    n = x.shape[1]
    out = np.zeros(len(x))
    step = max(1, block // max(len(mu0.weights), 1))
    for s in range(0, len(x), step):
        d = np.linalg.norm(x[s : s + step, None, :] - mu0.points[None, :, :], axis=2)
        if np.any(d == 0):
            raise AtomCoincidence("evaluation point coincides with an atom")
        out[s : s + step] = (d ** (1 - n)) @ mu0.weights
    return out


def _segment_distance(x, a, b):
    """Distances (M, U) from points x (M, n) to segments [a_u, b_u]."""
    ab = b - a
    L2 = np.sum(ab * ab, axis=1)
    L2 = np.where(L2 > 0, L2, 1.0)
    ax = x[:, None, :] - a[None, :, :]
    t = np.clip(np.einsum("mun,un->mu", ax, ab) / L2, 0.0, 1.0)
    return np.linalg.norm(ax - t[..., None] * ab[None, :, :], axis=2)


def _segment_ball_pairs(x, radius, a, b):
    """All pairs (m, u) with dist(x_m, [a_u, b_u]) <= radius_m, found through KD-trees.

    Segments are grouped by length so that each group is searched with a
    radius padded by its own longest half-length only.
    """
    if len(a) == 0 or len(x) == 0:
        return np.zeros(0, dtype=np.int64), np.zeros(0, dtype=np.int64)
    mid = (a + b) / 2
    half = np.linalg.norm(b - a, axis=1) / 2
    cls = np.floor(np.log2(np.maximum(half, 1e-300))).astype(np.int64)
    cls = np.maximum(cls, cls.max() - 40)
    ms, us = [], []
    for c in np.unique(cls):
        idx = np.flatnonzero(cls == c)
        pad = float(half[idx].max())
        tree = cKDTree(mid[idx])
        cand = tree.query_ball_point(x, radius + pad * (1 + 1e-12) + 1e-12)
        counts = np.fromiter((len(v) for v in cand), dtype=np.int64, count=len(x))
        if counts.sum() == 0:
            continue
        m = np.repeat(np.arange(len(x)), counts)
        u = idx[np.concatenate([np.asarray(v, dtype=np.int64) for v in cand if len(v)])]
        ab = b[u] - a[u]
        L2 = np.sum(ab * ab, axis=1)
        t = np.clip(np.sum((x[m] - a[u]) * ab, axis=1) / np.where(L2 > 0, L2, 1.0), 0.0, 1.0)
        d = np.linalg.norm(x[m] - a[u] - t[:, None] * ab, axis=1)
        hit = d <= radius[m]
        ms.append(m[hit])
        us.append(u[hit])
    if not ms:
        return np.zeros(0, dtype=np.int64), np.zeros(0, dtype=np.int64)
    return np.concatenate(ms), np.concatenate(us)


class PathIndex:
    """Tree-edge bookkeeping to decide which atom paths meet a ball, for many balls at once.

    Paths share their tail in the shortest-path tree, so a path meets a ball iff
    its first segment or some tree edge above its cube does.
    """

    def __init__(self, system: PathSystem, measure: DiscreteMeasure):
        self.system = system
        self.measure = measure
        cx = system.complex
        pts = measure.points
        cubes = cx.locate(pts)
        if np.any(cubes < 0):
            raise SkinViolation("measure atoms must lie above the truncation skin")
        self.straight = system.is_straight(pts)
        self.cubes = cubes
        used = np.zeros(len(cx), dtype=bool)
        for k in np.unique(cubes[~self.straight]):
            k = int(k)
            while k >= 0 and not used[k]:
                used[k] = True
                k = int(system.parent[k])
        nodes = np.flatnonzero(used)
        depth = system.depth[nodes]
        order = np.lexsort((nodes, depth))
        self.nodes = nodes[order]
        self.node_depth = depth[order]
        pos = np.full(len(cx), -1, dtype=np.int64)
        pos[self.nodes] = np.arange(len(self.nodes))
        self.pos = pos
        par = system.parent[self.nodes]
        self.parent_pos = np.where(par >= 0, pos[np.maximum(par, 0)], -1)
        self.edge_a = cx.centers[self.nodes]
        self.edge_b = np.where((par >= 0)[:, None], cx.centers[np.maximum(par, 0)], system.x0)
        self.first_a = pts
        self.first_b = np.where(self.straight[:, None], system.x0, cx.centers[cubes])
        bounds = np.flatnonzero(np.diff(self.node_depth)) + 1
        self.depth_groups = np.split(np.arange(len(self.nodes)), bounds)
        self._subtree_order()

    def _subtree_order(self):
        """Preorder ranks so that the curved atoms below any tree node form one contiguous run."""
        m = len(self.nodes)
        children = [[] for _ in range(m)]
        roots = []
        for i, p in enumerate(self.parent_pos.tolist()):
            (roots if p < 0 else children[p]).append(i)
        tin = np.zeros(m, dtype=np.int64)
        tout = np.zeros(m, dtype=np.int64)
        clock = 0
        stack = [(r, False) for r in reversed(roots)]
        while stack:
            v, done = stack.pop()
            if done:
                tout[v] = clock
                continue
            tin[v] = clock
            clock += 1
            stack.append((v, True))
            stack.extend((c, False) for c in reversed(children[v]))
        curved = np.flatnonzero(~self.straight)
        key = tin[self.pos[self.cubes[curved]]]
        order = np.argsort(key, kind="stable")
        self.sorted_atoms = curved[order]
        self.sorted_key = key[order]
        self.atom_rank = np.full(len(self.cubes), -1, dtype=np.int64)
        self.atom_rank[self.sorted_atoms] = np.arange(len(curved))
        # node v covers sorted atoms [lo[v], hi[v])
        self.run_lo = np.searchsorted(self.sorted_key, tin, side="left")
        self.run_hi = np.searchsorted(self.sorted_key, tout, side="left")

    def hits(self, x, radius):
        """Boolean (M, N_atoms): does the path of atom i meet the closed ball B(x_m, radius_m)?"""
        x = np.atleast_2d(x)
        radius = np.asarray(radius)[:, None]
        chain = _segment_distance(x, self.edge_a, self.edge_b) <= radius
        for grp in self.depth_groups[1:]:
            chain[:, grp] |= chain[:, self.parent_pos[grp]]
        first = np.empty((len(x), len(self.first_a)), dtype=bool)
        for s in range(0, len(self.first_a), 1024):
            sl = slice(s, s + 1024)
            first[:, sl] = _segment_distance(x, self.first_a[sl], self.first_b[sl]) <= radius
        tree = np.zeros_like(first)
        curved = ~self.straight
        tree[:, curved] = chain[:, self.pos[self.cubes[curved]]]
        return first | tree

    def mass(self, x, radius, weights=None):
        """Weighted count of atoms whose path meets B(x_m, radius_m); same answer as ``hits(x, radius) @ weights``."""
        x = np.atleast_2d(x)
        radius = np.asarray(radius, dtype=float)
        w = self.measure.weights if weights is None else np.asarray(weights)
        M = len(x)
        # tree edges: a hit on node v covers the run of atoms below v
        pm, pv = _segment_ball_pairs(x, radius, self.edge_a, self.edge_b)
        lo, hi = self.run_lo[pv], self.run_hi[pv]
        keep = hi > lo
        pm, lo, hi = pm[keep], lo[keep], hi[keep]
        order = np.lexsort((-hi, lo, pm))
        pm, lo, hi = pm[order], lo[order], hi[order]
        span = len(self.sorted_atoms) + 1
        # subtree runs are nested or disjoint: keep the ones not inside an earlier run of the same point
        reach = np.maximum.accumulate(pm * span + hi)
        prev = np.concatenate([[-1], reach[:-1]])
        top = pm * span + lo >= prev
        pm, lo, hi = pm[top], lo[top], hi[top]
        csum = np.concatenate([[0.0], np.cumsum(w[self.sorted_atoms])])
        out = np.bincount(pm, weights=csum[hi] - csum[lo], minlength=M).astype(float)
        # first segments, counted unless the atom already lies in a kept run
        fm, fi = _segment_ball_pairs(x, radius, self.first_a, self.first_b)
        rank = self.atom_rank[fi]
        covered = np.zeros(len(fm), dtype=bool)
        if len(pm):
            keys = pm * span + lo
            j = np.searchsorted(keys, fm * span + rank, side="right") - 1
            ok = (j >= 0) & (rank >= 0)
            jj = np.maximum(j, 0)
            covered = ok & (pm[jj] == fm) & (rank < hi[jj])
        fm, fi = fm[~covered], fi[~covered]
        out += np.bincount(fm, weights=w[fi], minlength=M)
        return out


def omega_weight(system: PathSystem, mu0: DiscreteMeasure, x, index: PathIndex | None = None, chunk=20000):
    """mu0-mass of atoms whose path meets the closed ball B(x, d_hat(x)/2)."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    index = index or PathIndex(system, mu0)
    r = system.pair.d_hat(x) / 2
    out = np.empty(len(x))
    for s in range(0, len(x), chunk):
        out[s : s + chunk] = index.mass(x[s : s + chunk], r[s : s + chunk])
    return out


@dataclass(frozen=True)
class WeightParts:
    riesz: np.ndarray
    omega: np.ndarray
    d_hat: np.ndarray

    @property
    def omega_term(self):
        n_minus_1 = 1 if self.dim == 2 else 2
        return self.omega * self.d_hat ** (-n_minus_1)

    dim: int = 2

    @property
    def w0(self):
        return self.riesz + self.omega_term


def weight_parts(system: PathSystem, mu0: DiscreteMeasure, x, index=None) -> WeightParts:
    x = np.atleast_2d(np.asarray(x, dtype=float))
    return WeightParts(
        riesz=riesz_potential(mu0, x),
        omega=omega_weight(system, mu0, x, index=index),
        d_hat=system.pair.d_hat(x),
        dim=x.shape[1],
    )


def weight_w0(system: PathSystem, mu0: DiscreteMeasure, x, index=None):
    return weight_parts(system, mu0, x, index=index).w0


def check_dOmega_integrability(system: PathSystem, mu0, families=None):
    """sum_i w_i d(y_i) for mu0, or the sequence of such sums over refining atom families."""
    if families is None:
        return float(geodesic_distance(system, mu0.points) @ mu0.weights)
    return [float(geodesic_distance(system, m.points) @ m.weights) for m in families]


def grid_measure(shape, lo, hi, cells, total_mass=None, positive=True):
    """Midpoint discretization of Lebesgue measure on ``shape`` over the box [lo, hi]."""
    lo, hi = np.asarray(lo, float), np.asarray(hi, float)
    n = len(lo)
    cells = np.broadcast_to(np.asarray(cells), (n,))
    h = (hi - lo) / cells
    axes = [lo[i] + (np.arange(cells[i]) + 0.5) * h[i] for i in range(n)]
    pts = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, n)
    pts = pts[shape.contains(pts)]
    w = np.full(len(pts), float(np.prod(h)))
    if total_mass is not None:
        w *= total_mass / w.sum()
    return DiscreteMeasure(pts, w, positive)
