"""Polyline path system through Whitney cube centers and the radius profile rho(t, y)."""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy.sparse.csgraph import dijkstra

from .errors import DegeneratePath, DisconnectedComplex, OutsideDecomposition
from .geometry import DomainPair
from .whitney import CubeComplex


@dataclass(frozen=True)
class Polyline:
    """Piecewise-linear path on [0, 1], parametrized proportionally to arclength."""

    vertices: np.ndarray  # (m, n), first vertex y, last vertex x0
    straight: bool = False

    @cached_property
    def seg_lengths(self):
        return np.linalg.norm(np.diff(self.vertices, axis=0), axis=1)

    @cached_property
    def cumlen(self):
        return np.concatenate([[0.0], np.cumsum(self.seg_lengths)])

    @property
    def length(self) -> float:
        return float(self.cumlen[-1])

    @property
    def degenerate(self) -> bool:
        return len(self.vertices) < 2

    @cached_property
    def directions(self):
        L = self.seg_lengths
        return np.diff(self.vertices, axis=0) / L[:, None]

    def _segment(self, s):
        j = np.searchsorted(self.cumlen, s, side="right") - 1
        return np.clip(j, 0, len(self.seg_lengths) - 1)

    def at_arclength(self, s):
        s = np.asarray(s, dtype=float)
        if self.degenerate:
            return np.broadcast_to(self.vertices[0], s.shape + self.vertices.shape[1:]).copy()
        j = self._segment(s)
        return self.vertices[j] + (s - self.cumlen[j])[..., None] * self.directions[j]

    def tangent(self, s):
        """Unit tangent (derivative with respect to arclength); right-continuous at vertices."""
        j = self._segment(np.asarray(s, dtype=float))
        return self.directions[j]

    def __call__(self, t):
        return self.at_arclength(np.asarray(t, dtype=float) * self.length)

    def velocity(self, t):
        return self.length * self.tangent(np.asarray(t, dtype=float) * self.length)

    def length_in_ball(self, center, r) -> float:
        """Exact length of the part of the polyline inside the closed ball."""
        if self.degenerate:
            return 0.0
        P = self.vertices[:-1]
        e = self.directions
        b = P - np.asarray(center)
        be = np.sum(b * e, axis=1)
        disc = be**2 - (np.sum(b * b, axis=1) - r * r)
        ok = disc > 0
        sq = np.sqrt(np.where(ok, disc, 0.0))
        lo = np.clip(-be - sq, 0.0, self.seg_lengths)
        hi = np.clip(-be + sq, 0.0, self.seg_lengths)
        return float(np.sum(np.where(ok, hi - lo, 0.0)))

    def distance_to(self, x):
        """Distance from each point of ``x`` (M, n) to the polyline."""
        x = np.atleast_2d(x)
        if self.degenerate:
            return np.linalg.norm(x - self.vertices[0], axis=1)
        best = np.full(len(x), np.inf)
        for P, e, L in zip(self.vertices[:-1], self.directions, self.seg_lengths):
            s = np.clip((x - P) @ e, 0.0, L)
            best = np.minimum(best, np.linalg.norm(x - P - s[:, None] * e, axis=1))
        return best


@dataclass(frozen=True)
class PathSystem:
    pair: DomainPair
    complex: CubeComplex
    parent: np.ndarray  # tree predecessor, -1 at the root
    dist: np.ndarray  # graph distance from each cube center to the root center

    @property
    def x0(self):
        return np.asarray(self.pair.x0, dtype=float)

    @cached_property
    def d_hat_x0(self) -> float:
        return float(self.pair.d_hat(self.x0))

    @cached_property
    def root_hop(self) -> float:
        return float(np.linalg.norm(self.complex.centers[self.complex.root] - self.x0))

    @cached_property
    def depth(self):
        depth = np.full(len(self.parent), -1, dtype=np.int64)
        depth[self.complex.root] = 0
        order = np.argsort(self.dist, kind="stable")
        for k in order:
            if depth[k] < 0:
                depth[k] = depth[self.parent[k]] + 1
        return depth

    def chain(self, k):
        """Cube indices from ``k`` up to the root, inclusive."""
        out = [k]
        while self.parent[out[-1]] >= 0:
            out.append(int(self.parent[out[-1]]))
        return out

    def is_straight(self, y):
        y = np.atleast_2d(y)
        return np.linalg.norm(y - self.x0, axis=1) <= self.pair.d_hat(y) / 2


def build_path_system(complex: CubeComplex, pair: DomainPair) -> PathSystem:
    """Shortest-path tree over cube centers rooted at the cube containing x0."""
    root = complex.root
    dist = dijkstra(complex.adjacency, directed=False, indices=root)
    if not np.all(np.isfinite(dist)):
        raise DisconnectedComplex("the Whitney cube graph is not connected")
    # deterministic predecessor: smallest index among neighbours realizing the distance
    a = complex.adjacency.tocoo()
    tol = 1e-12 * (1.0 + dist.max())
    realizes = dist[a.col] + a.data <= dist[a.row] + tol
    realizes &= a.row != root
    parent = np.full(len(dist), np.iinfo(np.int64).max, dtype=np.int64)
    np.minimum.at(parent, a.row[realizes], a.col[realizes])
    parent[root] = -1
    if np.any(parent == np.iinfo(np.int64).max):
        raise DisconnectedComplex("could not build a predecessor tree")
    return PathSystem(pair=pair, complex=complex, parent=parent, dist=dist)


def path(system: PathSystem, y) -> Polyline:
    y = np.asarray(y, dtype=float)
    x0 = system.x0
    if np.array_equal(y, x0):
        return Polyline(x0[None, :].copy(), straight=True)
    k = system.complex.locate_one(y)
    if k is None:
        raise OutsideDecomposition(f"{tuple(y)} is outside the Whitney decomposition")
    if system.is_straight(y)[0]:
        return Polyline(np.stack([y, x0]), straight=True)
    verts = [y] + [system.complex.centers[j] for j in system.chain(k)] + [x0]
    verts = np.asarray(verts)
    keep = np.concatenate([[True], np.any(np.diff(verts, axis=0) != 0, axis=1)])
    return Polyline(verts[keep])


def geodesic_distance(system: PathSystem, y):
    """Length of the path of each point; an upper bound for the geodesic distance to x0."""
    y = np.atleast_2d(np.asarray(y, dtype=float))
    k = system.complex.locate(y)
    if np.any(k < 0):
        raise OutsideDecomposition("point outside the Whitney decomposition")
    cx = system.complex
    direct = np.linalg.norm(y - system.x0, axis=1)
    tree = np.linalg.norm(y - cx.centers[k], axis=1) + system.dist[k] + system.root_hop
    return np.where(system.is_straight(y), direct, tree)


@dataclass(frozen=True)
class RadiusProfile:
    """rho(t, y) and its derivative along the path of ``y``."""

    y: np.ndarray
    polyline: Polyline
    case: int
    tau: float
    alpha: float
    d_hat_x0: float
    pair: DomainPair

    @property
    def s_tau(self) -> float:
        return self.tau * self.polyline.length

    def rho(self, t):
        t = np.asarray(t, dtype=float)
        if self.case == 2:
            return t.copy()
        g = self.polyline(t)
        near = self.alpha * np.linalg.norm(g - self.y, axis=-1)
        far = self.pair.d_hat(g) / self.d_hat_x0
        return np.where(t <= self.tau, near, far)

    def rho_dot(self, t):
        t = np.asarray(t, dtype=float)
        if self.case == 2:
            return np.ones_like(t)
        g = self.polyline(t)
        gd = self.polyline.velocity(t)
        v = g - self.y
        r = np.linalg.norm(v, axis=-1)
        near = self.alpha * np.sum(v * gd, axis=-1) / np.where(r > 0, r, 1.0)
        near = np.where(r > 0, near, self.alpha * self.polyline.length)
        far = np.sum(self.pair.grad_d_hat(g) * gd, axis=-1) / self.d_hat_x0
        return np.where(t <= self.tau, near, far)


def first_exit(polyline: Polyline, y, radius):
    """Arclength of the first point of the polyline on the sphere |z - y| = radius, or None."""
    for P, e, L, s0 in zip(polyline.vertices[:-1], polyline.directions, polyline.seg_lengths, polyline.cumlen):
        b = P - y
        be = float(b @ e)
        disc = be * be - (float(b @ b) - radius * radius)
        if disc < 0:
            continue
        s = -be + np.sqrt(disc)
        if 0 <= s <= L:
            return float(s0 + s)
    return None


def radius_profile(system: PathSystem, y) -> RadiusProfile:
    y = np.asarray(y, dtype=float)
    if np.array_equal(y, system.x0):
        raise DegeneratePath("the radius profile is undefined at the base point")
    poly = path(system, y)
    R = float(system.pair.d_hat(y)) / 2
    D0 = system.d_hat_x0
    s_exit = None if poly.straight else first_exit(poly, y, R)
    if s_exit is None:
        return RadiusProfile(y, poly, 2, 1.0, 0.0, D0, system.pair)
    g_tau = poly.at_arclength(s_exit)
    alpha = 2.0 / D0 * float(system.pair.d_hat(g_tau)) / (2 * R)
    return RadiusProfile(y, poly, 1, s_exit / poly.length, alpha, D0, system.pair)


def min_d_hat_along(pair: DomainPair, polyline: Polyline, per_segment=64) -> float:
    """Sampled minimum of d_hat along the path."""
    if polyline.degenerate:
        return float(pair.d_hat(polyline.vertices[0]))
    u = np.linspace(0.0, 1.0, per_segment + 1)
    P = polyline.vertices[:-1, None, :]
    Q = polyline.vertices[1:, None, :]
    pts = (P + u[None, :, None] * (Q - P)).reshape(-1, polyline.vertices.shape[1])
    return float(np.min(pair.d_hat(pts)))
