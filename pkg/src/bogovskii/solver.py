"""The field u(x) = sum_i mu_i G(x, y_i) and its comparison with the weight w0."""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import AtomCoincidence, DegeneratePath
from .kernel import Bump, PathKernel, QuadConfig
from .measure import AdmissiblePair, PathIndex, validate_pair, weight_parts
from .paths import PathSystem

# sample rows closer than this fraction of the diameter to an atom are skipped
ATOM_CLEARANCE = 1e-3


class FieldEvaluator:
    """Lazy pointwise evaluation of u and w0 for one admissible pair."""

    def __init__(self, pair: AdmissiblePair, system: PathSystem, bump: Bump, quad: QuadConfig = QuadConfig()):
        self.pair = pair
        self.system = system
        self.bump = bump
        self.quad = quad
        self.dim = system.pair.dim
        keep = pair.mu.weights != 0
        self.atoms = pair.mu.points[keep]
        self.weights = pair.mu.weights[keep]
        if np.any(np.all(self.atoms == system.x0, axis=1)):
            raise DegeneratePath("an atom of mu sits at the base point")

    @cached_property
    def kernels(self):
        return [PathKernel(self.system, self.bump, y, self.quad) for y in self.atoms]

    @cached_property
    def path_index(self):
        return PathIndex(self.system, self.pair.mu0)

    def __call__(self, x, chunk=4096):
        x = np.atleast_2d(np.asarray(x, dtype=float))
        out = np.zeros_like(x)
        for y, K in zip(self.atoms, self.kernels):
            if np.any(np.all(x == y, axis=1)):
                raise AtomCoincidence("u evaluated at an atom of mu")
        for s in range(0, len(x), chunk):
            xs = x[s : s + chunk]
            for w, K in zip(self.weights, self.kernels):
                out[s : s + chunk] += w * K(xs)
        return out

    def weight(self, x):
        return weight_parts(self.system, self.pair.mu0, x, index=self.path_index)

    def w0(self, x):
        return self.weight(x).w0


def solve(pair: AdmissiblePair, system: PathSystem, bump: Bump, quad: QuadConfig = QuadConfig()) -> FieldEvaluator:
    validate_pair(pair)
    return FieldEvaluator(pair, system, bump, quad)


@dataclass(frozen=True)
class FieldTable:
    points: np.ndarray  # (M, n)
    u: np.ndarray  # (M, n)
    w0: np.ndarray
    d_hat: np.ndarray
    skipped: int  # rows dropped for being too close to an atom

    def __len__(self):
        return len(self.w0)

    def to_csv(self, scale_back=None) -> str:
        n = self.points.shape[1]
        head = [f"x{i + 1}" for i in range(n)] + [f"u{i + 1}" for i in range(n)] + ["w0", "d_hat"]
        rows = [",".join(head)]
        for p, v, w, d in zip(self.points, self.u, self.w0, self.d_hat):
            rows.append(",".join(repr(float(a)) for a in (*p, *v, w, d)))
        return "\n".join(rows) + "\n"


def grid_points(lo, hi, R):
    """Cell midpoints of an R^n tensor grid over [lo, hi], in C order."""
    lo, hi = np.asarray(lo, float), np.asarray(hi, float)
    n = len(lo)
    h = (hi - lo) / R
    axes = [lo[i] + (np.arange(R) + 0.5) * h[i] for i in range(n)]
    return np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, n), h


def sample_field(u: FieldEvaluator, R: int) -> FieldTable:
    if R < 8:
        raise ValueError("grid resolution must be at least 8")
    pair = u.system.pair
    lo, hi = pair.omega.bbox()
    x, _ = grid_points(lo, hi, R)
    x = x[pair.omega.contains(x)]
    x = x[u.system.complex.locate(x) >= 0]
    atoms = u.pair.mu0.points
    clear = ATOM_CLEARANCE * pair.diameter()
    near = np.zeros(len(x), dtype=bool)
    for s in range(0, len(atoms), 256):
        d = np.linalg.norm(x[:, None, :] - atoms[None, s : s + 256, :], axis=2)
        near |= np.any(d < clear, axis=1)
    skipped = int(near.sum())
    x = x[~near]
    parts = u.weight(x)
    return FieldTable(points=x, u=u(x), w0=parts.w0, d_hat=parts.d_hat, skipped=skipped)


def weighted_sup(table: FieldTable, kappa: float) -> float:
    """max |u(x)| / (kappa w0(x)) over the sampled rows."""
    if len(table) == 0:
        raise ValueError("empty sample table")
    return float(np.max(np.linalg.norm(table.u, axis=1) / (kappa * table.w0)))
