"""Dyadic Whitney decomposition of the cover with a cube adjacency graph."""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np
from scipy import sparse
from scipy.sparse.csgraph import connected_components
from scipy.spatial import cKDTree

from .errors import RootNotCovered
from .geometry import DomainPair

# accepted cubes satisfy LOWER * sqrt(n) * side <= d_hat(center) <= UPPER * sqrt(n) * side
LOWER, UPPER = 1.0, 5.0
MAX_LEVEL = 20


@dataclass(frozen=True)
class CubeComplex:
    centers: np.ndarray  # (N, n)
    sides: np.ndarray  # (N,)
    levels: np.ndarray  # (N,)
    index: np.ndarray  # (N, n) integer position within its level
    d_hat: np.ndarray  # (N,) distance to the complement at the center
    adjacency: sparse.csr_matrix  # symmetric, weights = center distances
    root: int
    min_side: float
    origin: np.ndarray
    side0: float

    @property
    def dim(self):
        return self.centers.shape[1]

    def __len__(self):
        return len(self.sides)

    def locate(self, y):
        """Index of the cube whose half-open box contains each point, or -1."""
        y = np.atleast_2d(np.asarray(y, dtype=float))
        out = np.full(len(y), -1, dtype=np.int64)
        rel = (y - self.origin) / self.side0
        inside = np.all((rel >= 0) & (rel < 1), axis=1)
        for level, (keys, ids) in self._lookup.items():
            pos = np.floor(rel * 2**level).astype(np.int64)
            k = _encode(pos, level)
            j = np.searchsorted(keys, k)
            j = np.minimum(j, len(keys) - 1)
            hit = inside & (keys[j] == k) & (out < 0)
            out[hit] = ids[j[hit]]
        return out

    def locate_one(self, y):
        k = int(self.locate(y)[0])
        return None if k < 0 else k

    def component_check(self) -> bool:
        n, _ = connected_components(self.adjacency, directed=False)
        return n == 1

    def max_side_ratio(self) -> float:
        a = self.adjacency.tocoo()
        if a.nnz == 0:
            return 1.0
        return float(np.max(self.sides[a.row] / self.sides[a.col]))

    def to_csv(self) -> str:
        n = self.dim
        head = ["index"] + [f"c{i + 1}" for i in range(n)] + ["side", "d_hat_center"]
        rows = [",".join(head)]
        for k in range(len(self)):
            vals = [str(k)] + [repr(float(v)) for v in self.centers[k]]
            vals += [repr(float(self.sides[k])), repr(float(self.d_hat[k]))]
            rows.append(",".join(vals))
        return "\n".join(rows) + "\n"


def _encode(pos, level):
    base = np.int64(2) ** level
    key = np.zeros(len(pos), dtype=np.int64)
    for i in range(pos.shape[1] - 1, -1, -1):
        key = key * base + pos[:, i]
    return key


def _build_lookup(levels, index):
    lookup = {}
    for level in np.unique(levels):
        ids = np.flatnonzero(levels == level)
        keys = _encode(index[ids], int(level))
        order = np.argsort(keys)
        lookup[int(level)] = (keys[order], ids[order])
    return lookup


def _adjacency(centers, sides, levels, side0):
    n = centers.shape[1]
    tol = 1e-9 * side0
    rows, cols = [], []
    uniq = np.unique(levels)
    trees = {int(l): (np.flatnonzero(levels == l), cKDTree(centers[levels == l])) for l in uniq}
    for a, b in itertools.combinations_with_replacement(uniq.tolist(), 2):
        ia, ta = trees[a]
        ib, tb = trees[b]
        reach = (side0 / 2**a + side0 / 2**b) / 2 + tol
        if a == b:
            pairs = ta.query_pairs(reach, p=np.inf, output_type="ndarray")
            if len(pairs):
                rows.append(ia[pairs[:, 0]])
                cols.append(ia[pairs[:, 1]])
        else:
            m = ta.sparse_distance_matrix(tb, reach, p=np.inf, output_type="ndarray")
            if len(m):
                rows.append(ia[m["i"]])
                cols.append(ib[m["j"]])
    if rows:
        r = np.concatenate(rows)
        c = np.concatenate(cols)
    else:
        r = c = np.zeros(0, dtype=np.int64)
    w = np.linalg.norm(centers[r] - centers[c], axis=1)
    N = len(sides)
    adj = sparse.coo_matrix((np.concatenate([w, w]), (np.concatenate([r, c]), np.concatenate([c, r]))), shape=(N, N))
    return adj.tocsr()


def decompose(pair: DomainPair, min_side: float) -> CubeComplex:
    """Top-down dyadic subdivision of a bounding cube of the cover.

    A cube is accepted when ``sqrt(n) l <= d_hat(center) <= 5 sqrt(n) l``;
    cubes that would need to be split below ``min_side`` are dropped.
    """
    if min_side <= 0:
        raise ValueError("min_side must be positive")
    n = pair.dim
    lo, hi = pair.cover.bbox()
    side0 = float(np.max(hi - lo))
    origin = np.asarray(lo, dtype=float)
    sq = np.sqrt(n)
    offsets = np.array(list(itertools.product((0, 1), repeat=n)), dtype=np.int64)

    acc_idx, acc_lvl = [], []
    idx = np.zeros((1, n), dtype=np.int64)
    level = 0
    while len(idx) and level <= MAX_LEVEL:
        side = side0 / 2**level
        c = origin + (idx + 0.5) * side
        d = pair.d_hat(c)
        gap = pair.cover.outer(c)[0]
        alive = gap <= sq * side / 2
        ok = alive & (d >= LOWER * sq * side) & (d <= UPPER * sq * side)
        if ok.any():
            acc_idx.append(idx[ok])
            acc_lvl.append(np.full(ok.sum(), level))
        split = alive & ~ok
        if side / 2 < min_side:
            break
        parents = idx[split]
        idx = (2 * parents[:, None, :] + offsets[None, :, :]).reshape(-1, n)
        level += 1

    if not acc_idx:
        raise RootNotCovered("no Whitney cube above the truncation scale")
    index = np.concatenate(acc_idx)
    levels = np.concatenate(acc_lvl)
    order = np.lexsort(tuple(index[:, i] for i in range(n - 1, -1, -1)) + (levels,))
    index, levels = index[order], levels[order]
    sides = side0 / 2.0**levels
    centers = origin + (index + 0.5) * sides[:, None]
    d_hat = pair.d_hat(centers)
    adjacency = _adjacency(centers, sides, levels, side0)
    cx = CubeComplex(
        centers=centers,
        sides=sides,
        levels=levels,
        index=index,
        d_hat=d_hat,
        adjacency=adjacency,
        root=-1,
        min_side=float(min_side),
        origin=origin,
        side0=side0,
    )
    object.__setattr__(cx, "_lookup", _build_lookup(levels, index))
    root = cx.locate_one(np.asarray(pair.x0))
    if root is None:
        raise RootNotCovered("the base point lies in the truncation skin; decrease min_side")
    object.__setattr__(cx, "root", root)
    return cx
