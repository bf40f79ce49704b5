"""Command line entry point: ``bogovskii <command> --experiment NAME|PATH [options]``.

Every command writes its artifact (CSV or JSON) to ``--out`` when given and a
JSON summary to stdout. All coordinates in artifacts are normalized ones.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from .config import Experiment, ExperimentConfig, load_shipped, shipped_experiments
from .errors import BogovskiiError, ConfigError
from .geometry import sample_interior
from .paths import path
from .solver import grid_points, sample_field, weighted_sup
from .suites import SUITES, all_passed

COMMANDS = ("decompose", "paths", "weight", "solve", "verify", "comb", "singular")
SKIN_GRID = 256


def _plain(obj):
    """Recursively convert numpy scalars/arrays and tuples to JSON-native values."""
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else repr(v)
    return obj


def dumps(obj) -> str:
    return json.dumps(_plain(obj), indent=2, sort_keys=True) + "\n"


def load_config(ref: str) -> ExperimentConfig:
    p = Path(ref)
    if p.suffix == ".json" or p.exists():
        return ExperimentConfig.load(p)
    if ref in shipped_experiments():
        return load_shipped(ref)
    raise ConfigError("--experiment", f"no such file or shipped experiment: {ref!r}")


def _emit(text: str, out: str | None):
    if out:
        Path(out).parent.mkdir(parents=True, exist_ok=True)
        Path(out).write_text(text)


# -- commands --------------------------------------------------------------------


def skin_fraction(exp: Experiment, R=SKIN_GRID) -> float:
    """Fraction of cover grid midpoints left outside every cube."""
    lo, hi = exp.pair.cover.bbox()
    x, _ = grid_points(lo, hi, R)
    x = x[exp.pair.cover.contains(x)]
    return float(np.mean(exp.complex.locate(x) < 0)) if len(x) else 0.0


def cmd_decompose(exp: Experiment, args):
    cx = exp.complex
    _emit(cx.to_csv(), args.out)
    return {
        "experiment": exp.config.name,
        "cubes": len(cx),
        "min_side": cx.min_side,
        "root": cx.root,
        "connected": cx.component_check(),
        "max_side_ratio": cx.max_side_ratio(),
        "skin_fraction": skin_fraction(exp),
    }


def cmd_paths(exp: Experiment, args):
    rng = np.random.default_rng(exp.config.seed)
    skin = 2 * np.sqrt(exp.pair.dim) * exp.complex.min_side
    ys = sample_interior(exp.pair.omega, args.sample, rng, min_dist=skin)
    n = exp.pair.dim
    rows = [",".join(["sample", "vertex"] + [f"x{i + 1}" for i in range(n)] + ["straight"])]
    lengths, straight = [], 0
    for s, y in enumerate(ys):
        poly = path(exp.system, y)
        lengths.append(poly.length)
        straight += int(poly.straight)
        for v, p in enumerate(poly.vertices):
            rows.append(",".join([str(s), str(v)] + [repr(float(a)) for a in p] + [str(int(poly.straight))]))
    _emit("\n".join(rows) + "\n", args.out)
    return {
        "experiment": exp.config.name,
        "samples": len(ys),
        "straight": straight,
        "max_length": max(lengths) if lengths else 0.0,
    }


def cmd_weight(exp: Experiment, args):
    R = args.grid or exp.config.grids.field
    lo, hi = exp.pair.omega.bbox()
    x, _ = grid_points(lo, hi, R)
    x = x[exp.pair.omega.contains(x)]
    x = x[exp.complex.locate(x) >= 0]
    mu0 = exp.measures.mu0
    x = x[~np.any(np.all(x[:, None, :] == mu0.points[None], axis=2), axis=1)]
    parts = exp.field.weight(x)
    n = exp.pair.dim
    rows = [",".join([f"x{i + 1}" for i in range(n)] + ["I1", "omega", "d_hat", "w0"])]
    for p, a, b, c, d in zip(x, parts.riesz, parts.omega, parts.d_hat, parts.w0):
        rows.append(",".join(repr(float(v)) for v in (*p, a, b, c, d)))
    _emit("\n".join(rows) + "\n", args.out)
    return {"experiment": exp.config.name, "grid": R, "rows": len(x), "w0_max": float(parts.w0.max())}


def cmd_solve(exp: Experiment, args):
    R = args.grid or exp.config.grids.field
    table = sample_field(exp.field, R)
    _emit(table.to_csv(), args.out)
    return {
        "experiment": exp.config.name,
        "grid": R,
        "rows": len(table),
        "skipped": table.skipped,
        "weighted_sup": weighted_sup(table, exp.config.kappa),
    }


def cmd_verify(exp: Experiment, args):
    names = list(SUITES) if args.suite == "all" else [args.suite]
    reports = {}
    for name in names:
        if name == "comb" and exp.config.comb is None:
            continue
        if name == "singular" and exp.config.singular is None:
            continue
        if name == "bound" and args.grid:
            reports[name] = SUITES[name](exp, args.grid)
        else:
            reports[name] = SUITES[name](exp)
    report = reports[names[0]] if len(names) == 1 else {"experiment": exp.config.name, "suites": reports}
    ok = all(all_passed(r) for r in reports.values())
    report["passed"] = ok
    return report


def cmd_comb(exp: Experiment, args):
    rep = SUITES["comb"](exp)
    rep["passed"] = all_passed(rep)
    return rep


def cmd_singular(exp: Experiment, args):
    rep = SUITES["singular"](exp)
    rep["passed"] = all_passed(rep)
    return rep


HANDLERS = {
    "decompose": cmd_decompose,
    "paths": cmd_paths,
    "weight": cmd_weight,
    "solve": cmd_solve,
    "verify": cmd_verify,
    "comb": cmd_comb,
    "singular": cmd_singular,
}
DEFAULT_EXPERIMENT = {"comb": "comb", "singular": "singular-probe"}


def build_parser():
    ap = argparse.ArgumentParser(prog="bogovskii", description="Constructive solutions of div u = mu with measure data.")
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("--experiment", help="config JSON path or shipped experiment name")
    ap.add_argument("--grid", type=int, help="grid resolution R")
    ap.add_argument("--out", help="artifact path (CSV, or JSON for verify/comb/singular)")
    ap.add_argument("--suite", default="weak", choices=[*SUITES, "all"])
    ap.add_argument("--seed", type=int)
    ap.add_argument("--sample", type=int, default=20, help="number of sampled paths")
    ap.add_argument("--quad.gauss_nodes", dest="gauss_nodes", type=int)
    ap.add_argument("--quad.scan_nodes", dest="scan_nodes", type=int)
    ap.add_argument("--whitney.min_side", dest="min_side", type=float)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    ref = args.experiment or DEFAULT_EXPERIMENT.get(args.command)
    try:
        if ref is None:
            raise ConfigError("--experiment", "required for this command")
        if args.grid is not None and args.grid < 8:
            raise ConfigError("--grid", "grid resolution must be at least 8")
        cfg = load_config(ref).with_overrides(args.gauss_nodes, args.scan_nodes, args.min_side, args.seed)
        exp = Experiment(cfg)
        summary = HANDLERS[args.command](exp, args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except BogovskiiError as exc:
        print(f"experiment {ref}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3
    text = dumps(summary)
    if args.command in ("verify", "comb", "singular"):
        _emit(text, args.out)
    sys.stdout.write(text)
    if args.command in ("verify", "comb", "singular") and not summary["passed"]:
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
