"""Smooth bump and the path kernel G(x, y).

The kernel is an integral over the path of ``y``; the integrand only lives where
``|x - gamma(t)| < rho(t)``. All integrals are rewritten in arclength ``s`` so
the tangent is a unit vector (the integrand is a 1-form, so this changes nothing).

* near part (``s <= s_tau``): ``rho = alpha |y - gamma|``; on a segment the
  support condition is a quadratic inequality in ``s`` and is solved exactly.
* far part (``s > s_tau``): ``rho = d_hat(gamma) / d_hat(x0)``; the support is
  found by scanning nodes near ``x`` (KD-tree) and bisecting sign changes.
* straight case: with ``s = 1/t`` the kernel is
  ``(x - y) * int_1^inf s^(n-1) chi(y + s (x - y)) ds`` and the support is again
  a quadratic inequality.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy import integrate
from scipy.spatial import cKDTree

from .errors import DegeneratePath, DiagonalEvaluation, SkinViolation
from .paths import PathSystem, Polyline, RadiusProfile, path, radius_profile

BISECT_ITERS = 50
SPHERE_AREA = {2: 2 * np.pi, 3: 4 * np.pi}


@dataclass(frozen=True)
class QuadConfig:
    gauss_nodes: int = 32
    scan_nodes: int = 16
    tol: float = 1e-6


@dataclass(frozen=True)
class Bump:
    """chi(z) = exp(-1 / (1 - |z - x0|^2)) / Z on the open unit ball around x0."""

    center: tuple
    dim: int = 2

    @cached_property
    def Z(self) -> float:
        f = lambda r: r ** (self.dim - 1) * np.exp(-1.0 / (1.0 - r * r)) if r < 1 else 0.0
        val, _ = integrate.quad(f, 0.0, 1.0, epsabs=1e-15, epsrel=1e-13, limit=200)
        return SPHERE_AREA[self.dim] * val

    def profile(self, r2):
        """chi as a function of the squared radius."""
        r2 = np.asarray(r2, dtype=float)
        inside = r2 < 1.0
        out = np.zeros_like(r2)
        out[inside] = np.exp(-1.0 / (1.0 - r2[inside])) / self.Z
        return out

    def __call__(self, z):
        z = np.asarray(z, dtype=float)
        r2 = np.sum((z - np.asarray(self.center)) ** 2, axis=-1)
        return self.profile(r2)

    def eval(self, z):
        """(value, gradient) at points ``z``."""
        z = np.asarray(z, dtype=float)
        v = z - np.asarray(self.center)
        r2 = np.sum(v * v, axis=-1)
        val = self.profile(r2)
        inside = r2 < 1.0
        coef = np.zeros_like(r2)
        coef[inside] = -2.0 / (1.0 - r2[inside]) ** 2
        return val, (coef * val)[..., None] * v


@dataclass
class KernelEval:
    value: np.ndarray
    near: np.ndarray  # near-part contribution (zero in the straight case)
    far: np.ndarray  # far-part contribution, or the straight-case value
    case: int
    intervals: int
    nodes: int
    error: float


def _gauss(q):
    u, w = np.polynomial.legendre.leggauss(q)
    return (u + 1) / 2, w / 2


def _quadratic_window(A, B, C, lo, hi):
    """Where A s^2 + B s + C < 0 (A > 0), clipped to [lo, hi]; returns (a, b, nonempty)."""
    disc = B * B - 4 * A * C
    ok = disc > 0
    sq = np.sqrt(np.where(ok, disc, 0.0))
    # numerically stable roots
    qq = -0.5 * (B + np.copysign(sq, B))
    r1 = np.where(qq != 0, qq / A, 0.0)
    r2 = np.where(qq != 0, C / np.where(qq != 0, qq, 1.0), 0.0)
    a = np.maximum(np.minimum(r1, r2), lo)
    b = np.minimum(np.maximum(r1, r2), hi)
    return a, b, ok & (b > a)


class PathKernel:
    """Kernel G(., y) for one source point ``y``, vectorized over evaluation points."""

    def __init__(self, system: PathSystem, bump: Bump, y, quad: QuadConfig = QuadConfig()):
        self.system = system
        self.pair = system.pair
        self.bump = bump
        self.quad = quad
        self.y = np.asarray(y, dtype=float)
        self.n = len(self.y)
        self.profile: RadiusProfile = radius_profile(system, self.y)
        self.poly: Polyline = self.profile.polyline
        self.D0 = system.d_hat_x0
        self.x0 = system.x0
        self._scan = None

    @property
    def case(self):
        return self.profile.case

    # -- straight case ---------------------------------------------------------
    def _straight(self, x, q):
        d = x - self.y
        c = self.y - self.x0
        A = np.sum(d * d, axis=1)
        B = 2 * d @ c
        C = np.full(len(x), c @ c - 1.0)
        a, b, ok = _quadratic_window(A, B, C, 1.0, np.inf)
        u, w = _gauss(q)
        out = np.zeros_like(x)
        idx = np.flatnonzero(ok)
        if len(idx):
            s = a[idx, None] + (b - a)[idx, None] * u[None, :]
            z = self.y + s[..., None] * d[idx, None, :]
            f = s ** (self.n - 1) * self.bump(z)
            out[idx] = d[idx] * ((f @ w) * (b - a)[idx])[:, None]
        return out, len(idx)

    # -- near part ------------------------------------------------------------
    def _near(self, x, q):
        poly, alpha = self.poly, self.profile.alpha
        s_tau = self.profile.s_tau
        u, w = _gauss(q)
        out = np.zeros_like(x)
        count = 0
        for P, e, s0, L in zip(poly.vertices[:-1], poly.directions, poly.cumlen[:-1], poly.seg_lengths):
            hi = min(L, s_tau - s0)
            if hi <= 0:
                break
            b_ = x - P
            c_ = self.y - P
            A = 1 - alpha**2
            B = -2 * (b_ @ e - alpha**2 * (c_ @ e))
            C = np.sum(b_ * b_, axis=1) - alpha**2 * (c_ @ c_)
            a, b, ok = _quadratic_window(A, B, C, 0.0, hi)
            idx = np.flatnonzero(ok)
            if not len(idx):
                continue
            count += len(idx)
            s = a[idx, None] + (b - a)[idx, None] * u[None, :]  # (m, q)
            g = P + s[..., None] * e  # (m, q, n)
            v = self.y - g
            r2 = np.sum(v * v, axis=-1)
            xg = x[idx, None, :] - g
            bracket = e - ((v @ e) / r2)[..., None] * xg
            rho = alpha * np.sqrt(r2)
            chi = self.bump.profile(np.sum(xg * xg, axis=-1) / rho**2)
            f = bracket * (chi / rho**self.n)[..., None]
            out[idx] += np.einsum("mqn,q->mn", f, w) * (b - a)[idx, None]
        return out, count

    # -- far part ---------------------------------------------------------------
    def _scan_nodes(self):
        """Scan nodes on [s_tau, L] with spacing at most a fraction of the local radius."""
        if self._scan is not None:
            return self._scan
        poly = self.poly
        s_tau = self.profile.s_tau
        K = self.quad.scan_nodes
        chunks, seg_ids = [], []
        for j, (s0, L) in enumerate(zip(poly.cumlen[:-1], poly.seg_lengths)):
            a = max(s0, s_tau)
            b = s0 + L
            if b <= a:
                continue
            probe = np.linspace(a, b, K + 1)
            rho_min = float(np.min(self.pair.d_hat(poly.at_arclength(probe)))) / self.D0
            h = min((b - a) / K, max(rho_min, 1e-12) / 16)
            m = int(np.ceil((b - a) / h))
            s = np.linspace(a, b, m + 1)
            chunks.append(s[:-1])
            seg_ids.append(np.full(m, j))
        s_end = poly.length
        s = np.concatenate(chunks + [[s_end]])
        seg = np.concatenate(seg_ids + [[len(poly.seg_lengths) - 1]])
        # intervals [s_i, s_{i+1}] lie in segment seg[i]
        pts = self._gamma(s, seg)
        self._scan = (s, seg, pts, cKDTree(pts))
        return self._scan

    def _gamma(self, s, seg):
        poly = self.poly
        return poly.vertices[seg] + (s - poly.cumlen[seg])[..., None] * poly.directions[seg]

    def _g(self, x, s, seg):
        """rho(s) - |x - gamma(s)| for paired arrays."""
        g = self._gamma(s, seg)
        return self.pair.d_hat(g) / self.D0 - np.linalg.norm(x - g, axis=-1)

    def _far(self, x, q):
        s, seg, pts, tree = self._scan_nodes()
        if len(s) < 2:
            return np.zeros_like(x), 0
        dx = self.pair.d_hat(x)
        # g > 0 forces |x - gamma| < d_hat(x) / (D0 - 1); pad for neighbouring scan nodes
        radius = 1.5 * dx / (self.D0 - 1)
        lists = tree.query_ball_point(x, radius)
        xi = np.repeat(np.arange(len(x)), [len(l) for l in lists])
        ni = np.concatenate([np.asarray(l, dtype=np.int64) for l in lists]) if len(xi) else np.zeros(0, np.int64)
        if not len(xi):
            return np.zeros_like(x), 0
        order = np.lexsort((ni, xi))
        xi, ni = xi[order], ni[order]
        gv = self.pair.d_hat(pts[ni]) / self.D0 - np.linalg.norm(x[xi] - pts[ni], axis=1)
        # pieces: consecutive scan nodes both present for the same x
        nxt = (xi[1:] == xi[:-1]) & (ni[1:] == ni[:-1] + 1)
        k = np.flatnonzero(nxt)
        gl, gr = gv[k], gv[k + 1]
        active = (gl > 0) | (gr > 0)
        k, gl, gr = k[active], gl[active], gr[active]
        if not len(k):
            return np.zeros_like(x), 0
        px = xi[k]
        i = ni[k]
        sl, sr, sg = s[i], s[i + 1], seg[i]
        a = sl.copy()
        b = sr.copy()
        # bisection for sign changes
        for side, sel in (("left", gl <= 0), ("right", gr <= 0)):
            idx = np.flatnonzero(sel)
            if not len(idx):
                continue
            lo, hi = sl[idx].copy(), sr[idx].copy()
            X = x[px[idx]]
            for _ in range(BISECT_ITERS):
                mid = 0.5 * (lo + hi)
                pos = self._g(X, mid, sg[idx]) > 0
                if side == "left":  # negative at lo, positive at hi
                    hi = np.where(pos, mid, hi)
                    lo = np.where(pos, lo, mid)
                else:  # positive at lo, negative at hi
                    lo = np.where(pos, mid, lo)
                    hi = np.where(pos, hi, mid)
            if side == "left":
                a[idx] = hi
            else:
                b[idx] = lo
        # merge consecutive pieces into runs inside one segment
        is_vertex = np.zeros(len(s), dtype=bool)
        is_vertex[1:] = seg[1:] != seg[:-1]
        cont = np.zeros(len(k), dtype=bool)
        cont[1:] = (px[1:] == px[:-1]) & (i[1:] == i[:-1] + 1) & (gl[1:] > 0) & ~is_vertex[i[1:]]
        starts = np.flatnonzero(~cont)
        ra = a[starts]
        rb = b[np.append(starts[1:], len(k)) - 1]
        rx = px[starts]
        rseg = sg[starts]
        keep = rb > ra
        ra, rb, rx, rseg = ra[keep], rb[keep], rx[keep], rseg[keep]
        u, w = _gauss(q)
        out = np.zeros_like(x)
        for c0 in range(0, len(ra), max(1, 200_000 // q)):
            sl_ = slice(c0, c0 + max(1, 200_000 // q))
            A, Bb, X, J = ra[sl_], rb[sl_], x[rx[sl_]], rseg[sl_]
            ss = A[:, None] + (Bb - A)[:, None] * u[None, :]
            e = self.poly.directions[J][:, None, :]
            g = self._gamma(ss, np.broadcast_to(J[:, None], ss.shape))
            d, p = self.pair.cover.inner(g)
            grad = (g - p) / d[..., None]
            xg = X[:, None, :] - g
            bracket = e + (np.sum(e * grad, axis=-1) / d)[..., None] * xg
            chi = self.bump.profile(np.sum(xg * xg, axis=-1) * (self.D0 / d) ** 2)
            f = bracket * (chi * (self.D0 / d) ** self.n)[..., None]
            contrib = np.einsum("mqn,q->mn", f, w) * (Bb - A)[:, None]
            np.add.at(out, rx[sl_], contrib)
        return out, len(ra)

    # -- public -------------------------------------------------------------
    def parts(self, x, q=None):
        """(near, far, intervals) at points ``x`` (M, n)."""
        q = q or self.quad.gauss_nodes
        x = np.atleast_2d(np.asarray(x, dtype=float))
        if self.case == 2:
            val, cnt = self._straight(x, q)
            return np.zeros_like(x), val, cnt
        n1, c1 = self._near(x, q)
        n2, c2 = self._far(x, q)
        return n1, n2, c1 + c2

    def __call__(self, x, q=None):
        near, far, _ = self.parts(x, q)
        return near + far


def _check_points(system: PathSystem, x, y):
    diam = system.pair.diameter()
    x = np.atleast_2d(np.asarray(x, dtype=float))
    if np.any(np.linalg.norm(x - y, axis=1) <= 1e-14 * diam):
        raise DiagonalEvaluation("kernel evaluated on the diagonal x = y")
    if np.any(system.complex.locate(x) < 0):
        raise SkinViolation("evaluation point outside the Whitney decomposition")
    return x


def kernel_G(system: PathSystem, bump: Bump, x, y, quad: QuadConfig = QuadConfig()) -> KernelEval:
    """G(x, y) at a single pair with an error estimate from doubling the Gauss nodes."""
    y = np.asarray(y, dtype=float)
    x = _check_points(system, x, y)
    K = PathKernel(system, bump, y, quad)
    q = quad.gauss_nodes
    n1, n2, cnt = K.parts(x, q)
    m1, m2, _ = K.parts(x, 2 * q)
    v = (n1 + n2)[0]
    err = float(np.linalg.norm((m1 + m2)[0] - v))
    return KernelEval(
        value=(m1 + m2)[0],
        near=m1[0],
        far=m2[0],
        case=K.case,
        intervals=int(cnt),
        nodes=int(cnt) * 3 * q,
        error=err,
    )


def kernel_G_batch(system: PathSystem, bump: Bump, xs, y, quad: QuadConfig = QuadConfig()):
    """G(x, y) for many ``x`` and one ``y``; returns (M, n)."""
    y = np.asarray(y, dtype=float)
    xs = _check_points(system, xs, y)
    return PathKernel(system, bump, y, quad)(xs)


def kernel_G_reference(system: PathSystem, bump: Bump, x, y, reparam=None, scan=20_000, epsrel=1e-10):
    """Direct adaptive integration of the kernel in the path parameter ``t``.

    Uses the radius profile as a black box (rho and its derivative), locates the
    support by dense sampling and integrates with QUADPACK. ``reparam`` is an
    optional increasing map of [0, 1] onto itself given as ``(phi, dphi)``.
    """
    x = np.asarray(x, dtype=float)
    prof = radius_profile(system, np.asarray(y, dtype=float))
    poly = prof.polyline
    x0 = system.x0
    n = len(x)
    phi, dphi = reparam if reparam is not None else (lambda u: u, lambda u: np.ones_like(u))

    def integrand(u):
        u = np.atleast_1d(u)
        t = phi(u)
        g = poly(t)
        gd = poly.velocity(t) * dphi(u)[:, None]
        r = prof.rho(t)
        rd = prof.rho_dot(t) * dphi(u)
        xg = x - g
        chi = bump(x0 + xg / r[:, None])
        return (gd + (rd / r)[:, None] * xg) * (chi / r**n)[:, None]

    u = np.linspace(0.0, 1.0, scan + 1)
    t = phi(u)
    inside = np.linalg.norm(x - poly(t), axis=1) < prof.rho(np.maximum(t, 1e-300))
    if not inside.any():
        return np.zeros(n)
    # breakpoints: vertices and tau, mapped back to u
    brk_t = np.concatenate([poly.cumlen / max(poly.length, 1e-300), [prof.tau]])
    brk_u = np.interp(brk_t, t, u)
    total = np.zeros(n)
    edges = np.flatnonzero(np.diff(np.concatenate([[0], inside.astype(int), [0]])))
    for lo_i, hi_i in zip(edges[::2], edges[1::2]):
        a = u[max(lo_i - 1, 0)]
        b = u[min(hi_i, scan)]
        pts = [p for p in brk_u if a < p < b]
        val, _ = integrate.quad_vec(lambda s: integrand(s)[0], a, b, epsrel=epsrel, epsabs=0, points=pts or None, limit=2000)
        total += val
    return total


def g1_bound_check(system: PathSystem, bump: Bump, samples=100, seed=0, quad: QuadConfig = QuadConfig(), near_diagonal=0.0):
    """max over random pairs of |near part of G(x, y)| * |x - y|^(n-1).

    Sources are drawn in case-1 configuration; evaluation points either uniformly
    or (``near_diagonal`` > 0) at that fraction of the diameter from the source.
    """
    from .geometry import sample_interior

    pair = system.pair
    rng = np.random.default_rng(seed)
    n = pair.dim
    skin = 10 * np.sqrt(n) * system.complex.min_side
    best = 0.0
    got = 0
    diam = pair.diameter()
    while got < samples:
        y = sample_interior(pair.cover, 1, rng, min_dist=skin)[0]
        if system.is_straight(y)[0] or np.array_equal(y, system.x0):
            continue
        if near_diagonal > 0:
            v = rng.normal(size=n)
            x = y + near_diagonal * diam * v / np.linalg.norm(v)
            if pair.d_hat(x) <= skin:
                continue
        else:
            x = sample_interior(pair.cover, 1, rng, min_dist=skin)[0]
        try:
            K = PathKernel(system, bump, y, quad)
        except DegeneratePath:
            continue
        near, _, _ = K.parts(x[None, :])
        best = max(best, float(np.linalg.norm(near[0]) * np.linalg.norm(x - y) ** (n - 1)))
        got += 1
    return best
