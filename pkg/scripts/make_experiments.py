"""Write the four shipped experiment configs into src/bogovskii/experiments/."""

import argparse
from dataclasses import asdict
from pathlib import Path

import numpy as np

from bogovskii.config import EXPERIMENT_DIR, CombConfig, ExperimentConfig, GridConfig, SingularConfig, WhitneyConfig
from bogovskii.kernel import QuadConfig
from bogovskii.verify import comb_mu0, comb_shape, comb_x0, dyadic_mu0


def atoms(points, weights):
    return [{"point": [float(v) for v in p], "weight": float(w)} for p, w in zip(points, weights)]


def lattice(lo, hi, step, keep):
    """Points (k + 1/2) * step inside [lo, hi]^2 accepted by ``keep``."""
    k = np.arange(np.floor(lo / step), np.ceil(hi / step))
    ax = (k + 0.5) * step
    pts = np.stack(np.meshgrid(ax, ax, indexing="ij"), axis=-1).reshape(-1, 2)
    return pts[keep(pts)]


def dipole(name, omega, x0, p, q, background, min_side):
    pts = np.concatenate([[p, q], background])
    w = np.concatenate([[1.0, 1.0], np.full(len(background), 1.0 / len(background))])
    return ExperimentConfig(
        name=name,
        omega=omega,
        cover=None,
        x0=tuple(x0),
        mu0=atoms(pts, w),
        mu=atoms([p, q], [1.0, -1.0]),
        kappa=1.0,
        whitney=WhitneyConfig(min_side),
        quad=QuadConfig(),
        grids=GridConfig(),
        seed=0,
        outputs=f"out/{name}",
    )


def ball_dipole():
    # atoms sit on vertices of every grid with R >= 32 over [-1, 1]^2
    bg = lattice(-1, 1, 0.25, lambda x: np.linalg.norm(x, axis=1) < 0.9)
    omega = {"type": "ball", "center": [0.0, 0.0], "radius": 1.0}
    return dipole("ball-dipole", omega, (0.0, 0.0), (0.5, 0.25), (-0.125, 0.25), bg, 15 * 2.0**-6)


def square_dipole():
    bg = lattice(0, 1, 0.125, lambda x: np.all((x > 0) & (x < 1), axis=1))
    omega = {"type": "box", "min": [0.0, 0.0], "max": [1.0, 1.0]}
    return dipole("square-dipole", omega, (0.5, 0.5), (0.75, 0.625), (0.3125, 0.25), bg, 30 * 2.0**-7)


def comb():
    cc = CombConfig()
    mu0 = comb_mu0(cc)
    pts, w = mu0.points, mu0.weights
    # dipole between an atom of the top channel and one two channels down
    top = np.flatnonzero((pts[:, 1] > 1 / 8) & (np.isclose(pts[:, 0], 0.525)))[0]
    low = np.flatnonzero((pts[:, 1] < 1 / 27) & (pts[:, 1] > 1 / 64) & np.isclose(pts[:, 0], 0.525))[-1]
    m = float(min(w[top], w[low]))
    return ExperimentConfig(
        name="comb",
        omega=comb_shape(cc).to_json(),
        cover=None,
        x0=comb_x0(cc),
        mu0=atoms(pts, w),
        mu=atoms(pts[[top, low]], [m, -m]),
        kappa=1.0,
        whitney=WhitneyConfig(cc.min_side),
        grids=GridConfig(field=64, weak=(64, 128), weight=(128, 256), poincare=(64, 128)),
        outputs="out/comb",
        comb=cc,
    )


def singular_probe():
    sc = SingularConfig(a=(0.3, 0.2), r0=0.25, s=0.5, levels=6)
    dy = dyadic_mu0(sc.a, sc.r0, sc.s, sc.levels, sc.per_level)
    bg = lattice(-1, 1, 0.25, lambda x: np.linalg.norm(x, axis=1) < 0.9)
    bg_mass = 4.0
    pts = np.concatenate([dy.points, bg])
    w = np.concatenate([dy.weights, np.full(len(bg), bg_mass / len(bg))])
    # balance the mass near a against the rest, scaled so that |mu| <= mu0
    inside = np.linalg.norm(pts - np.asarray(sc.a), axis=1) <= sc.r0 * (1 + 1e-9)
    m0 = w[inside].sum()
    coef = m0 / (w.sum() - m0)
    assert coef <= 1.0
    mu_w = np.where(inside, w, -coef * w)
    omega = {"type": "ball", "center": [0.0, 0.0], "radius": 1.0}
    return ExperimentConfig(
        name="singular-probe",
        omega=omega,
        cover=None,
        x0=(0.0, 0.0),
        mu0=atoms(pts, w),
        mu=atoms(pts, mu_w),
        kappa=1.0,
        whitney=WhitneyConfig(15 * 2.0**-6),
        outputs="out/singular-probe",
        singular=sc,
    )


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--dir", type=Path, default=EXPERIMENT_DIR)
    args = ap.parse_args()
    args.dir.mkdir(parents=True, exist_ok=True)
    for build in (ball_dipole, square_dipole, comb, singular_probe):
        cfg = build()
        cfg.validate()
        path = args.dir / f"{cfg.name}.json"
        path.write_text(cfg.to_json())
        print(f"wrote {path} ({len(cfg.mu0)} mu0 atoms, {len(cfg.mu)} mu atoms)")


if __name__ == "__main__":
    main()
