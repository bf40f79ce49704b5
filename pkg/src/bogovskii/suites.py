"""Named verification suites run against an experiment; each returns a JSON-ready report with pass flags."""

from __future__ import annotations

from dataclasses import replace

import numpy as np

from .config import Experiment, ExperimentConfig
from .errors import BogovskiiError
from .measure import PathIndex, riesz_potential, weight_parts
from .solver import FieldEvaluator, sample_field, weighted_sup
from .verify import (
    PoincareCheck,
    WeakCheck,
    comb_experiment,
    cone,
    distance_to_point,
    domain_quadrature,
    dyadic_mu0,
    lipschitz_family,
    path_diagnostics,
    random_lipschitz_family,
    shifted_positive_part,
    singular_weight_probe,
    smooth_family,
    truncated,
)

RESIDUAL_TOL = 0.05
RESIDUAL_DECAY = 1.5
BOUND_DRIFT = 2.0
WEIGHT_DRIFT = 0.10
RIESZ_POWER = 1.2


def _weak(exp: Experiment, family):
    cfg = exp.config
    grids = sorted(cfg.grids.weak)
    u = exp.field
    funcs = [phi.pulled_back(exp.pair) for phi in family(exp.pair)]
    rows = {phi.name: {} for phi in funcs}
    for R in grids:
        check = WeakCheck(u, R)
        for phi in funcs:
            r = check.residual(phi)
            rows[phi.name][str(R)] = {"lhs": r.lhs, "rhs": r.rhs, "residual": r.residual}
    lo, hi = str(grids[0]), str(grids[-1])
    ok_tol = all(v[hi]["residual"] <= RESIDUAL_TOL for v in rows.values())
    decay = {k: v[lo]["residual"] / max(v[hi]["residual"], 1e-300) for k, v in rows.items()}
    ok_decay = all(d >= RESIDUAL_DECAY for d in decay.values())
    return {
        "experiment": cfg.name,
        "grids": grids,
        "functions": rows,
        "decay": decay,
        "pass": {"residual_tol": ok_tol, "residual_decay": ok_decay},
    }


def weak_suite(exp):
    return _weak(exp, smooth_family)


def lipschitz_suite(exp):
    return _weak(exp, lipschitz_family)


def bound_suite(exp: Experiment, R=None):
    """weighted_sup at (R, q) and at (2R, 2q)."""
    cfg = exp.config
    R = R or cfg.grids.field
    u = exp.field
    c1 = weighted_sup(sample_field(u, R), cfg.kappa)
    quad2 = replace(cfg.quad, gauss_nodes=2 * cfg.quad.gauss_nodes)
    u2 = FieldEvaluator(exp.measures, exp.system, exp.bump, quad2)
    c2 = weighted_sup(sample_field(u2, 2 * R), cfg.kappa)
    finite = bool(np.isfinite(c1) and np.isfinite(c2))
    drift = max(c1, c2) / max(min(c1, c2), 1e-300)
    return {
        "experiment": cfg.name,
        "grids": [R, 2 * R],
        "gauss_nodes": [cfg.quad.gauss_nodes, 2 * cfg.quad.gauss_nodes],
        "weighted_sup": [c1, c2],
        "drift": drift,
        "pass": {"finite": finite, "stable": finite and drift < BOUND_DRIFT},
    }


def weight_suite(exp: Experiment):
    """Quadratures of omega d_hat^(1-n) and (I1 mu0)^1.2 under grid refinement."""
    cfg = exp.config
    mu0 = exp.measures.mu0
    index = PathIndex(exp.system, mu0)
    vals = {"omega_term": [], "riesz_power": []}
    grids = sorted(cfg.grids.weight)
    for R in grids:
        q = domain_quadrature(exp.pair.omega, R, atoms=mu0.points)
        parts = weight_parts(exp.system, mu0, q.points, index=index)
        vals["omega_term"].append(q.integrate(parts.omega_term))
        vals["riesz_power"].append(q.integrate(parts.riesz**RIESZ_POWER))
    change = {k: abs(v[-1] - v[-2]) / abs(v[-1]) for k, v in vals.items()}
    return {
        "experiment": cfg.name,
        "grids": grids,
        "integrals": vals,
        "relative_change": change,
        "pass": {k: c <= WEIGHT_DRIFT for k, c in change.items()},
    }


def paths_suite(exp: Experiment, samples=100, t_nodes=1000):
    rep = path_diagnostics(exp.system, samples=samples, t_nodes=t_nodes, seed=exp.config.seed)
    return {
        "experiment": exp.config.name,
        "samples": rep.samples,
        "c_path": rep.c_path,
        "ahlfors": rep.ahlfors,
        "delta": {str(k): v for k, v in rep.delta.items()},
        "alpha_max": rep.alpha_max,
        "rho_violations": rep.rho_violations,
        "rho_ratio_max": rep.rho_ratio_max,
        "pass": {
            "rho_bound": rep.rho_violations == 0,
            "alpha_bound": rep.alpha_max <= 0.2,
            "c_path_finite": bool(np.isfinite(rep.c_path)),
            "ahlfors_finite": bool(np.isfinite(rep.ahlfors)),
            "delta_positive": all(v > 0 for v in rep.delta.values()),
        },
    }


def poincare_suite(exp: Experiment, family_size=20):
    """Equivalence chain: dOmega integrability, weighted sup, and (P1) ratios, under refinement."""
    from .measure import check_dOmega_integrability

    cfg = exp.config
    system = exp.system
    mu0 = exp.measures.mu0
    index = PathIndex(system, mu0)
    w = lambda x: weight_parts(system, mu0, x, index=index).w0
    a = check_dOmega_integrability(system, mu0)
    bound = bound_suite(exp)
    lo, hi = exp.original.omega.bbox()
    family = [f.pulled_back(exp.pair) for f in random_lipschitz_family(family_size, lo, hi, seed=cfg.seed)]
    # (d' - r0)_+ with d' the distance to an atom of mu0 (geodesic = Euclidean on convex sets)
    y0 = exp.original.x0
    r0 = 0.25 * float(np.max(np.asarray(hi) - np.asarray(lo)))
    drive = shifted_positive_part(distance_to_point(y0), r0)
    ratios, star = {}, {}
    for R in sorted(cfg.grids.poincare):
        check = PoincareCheck(exp.pair.omega, mu0, w, R)
        rs = []
        for f in family:
            try:
                rs.append(check.ratio(f))
            except BogovskiiError:
                rs.append(float("inf"))
        ratios[str(R)] = {"max": max(rs), "values": rs}
        d = drive.pulled_back(exp.pair)
        entry = {"p1": check.ratio(d)}
        try:
            entry["p1_star"] = check.star_ratio(d)
            entry["truncations"] = [check.star_ratio(truncated(d, N)) for N in (0.1 * r0, 0.5 * r0, 2 * r0)]
        except BogovskiiError as exc:
            entry["p1_star_error"] = str(exc)
        star[str(R)] = entry
    maxima = [v["max"] for v in ratios.values()]
    finite = all(np.isfinite(maxima))
    stable = finite and max(maxima) / max(min(maxima), 1e-300) < 2.0
    return {
        "experiment": cfg.name,
        "a_dOmega_integral": a,
        "b_weighted_sup": bound["weighted_sup"],
        "c_p1_ratios": ratios,
        "driving_function": star,
        "pass": {
            "a_finite": bool(np.isfinite(a)),
            "b_finite": bound["pass"]["finite"],
            "b_stable": bound["pass"]["stable"],
            "c_finite": finite,
            "c_stable": stable,
        },
    }


def comb_suite(exp: Experiment | None = None, cfg=None):
    cc = cfg if cfg is not None else exp.config.comb
    if cc is None:
        raise ValueError("experiment has no comb section")
    return comb_experiment(cc)


def singular_suite(exp: Experiment):
    cfg = exp.config
    sc = cfg.singular
    if sc is None:
        raise ValueError("experiment has no singular section")
    to_n = exp.pair.from_original
    sing = dyadic_mu0(sc.a, sc.r0, sc.s, sc.levels, sc.per_level).mapped(to_n)
    # uniform contrast: cell-centred lattice with a at a cell centre, far from every atom
    from .measure import DiscreteMeasure

    # nearest lattice atom sits at step / sqrt(2) from a, beyond the largest shell radius r0 / sqrt(2)
    step = 1.5 * sc.r0
    a = np.asarray(sc.a)
    k = np.arange(-8, 8)
    grid = np.stack(np.meshgrid(k, k, indexing="ij"), axis=-1).reshape(-1, 2) * step + a + step / 2
    grid = grid[exp.original.omega.dist_to_complement(grid) > 0.05]
    unif = DiscreteMeasure(to_n(grid), np.full(len(grid), 1.0 / len(grid)), True)
    rep = singular_weight_probe(exp.system, sing, unif, to_n(a), sc.r0 * exp.scale, sc.levels)
    rep["experiment"] = cfg.name
    rep["pass"] = {
        "singular_diverges": rep["singular_exponent"] < -0.2,
        "uniform_bounded": rep["uniform_exponent"] > -0.2,
    }
    return rep


SUITES = {
    "weak": weak_suite,
    "lipschitz": lipschitz_suite,
    "bound": bound_suite,
    "weights": weight_suite,
    "paths": paths_suite,
    "poincare": poincare_suite,
    "comb": comb_suite,
    "singular": singular_suite,
}


def all_passed(report) -> bool:
    return all(bool(v) for v in report.get("pass", {}).values())
