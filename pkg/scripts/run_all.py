"""Run every CLI command on every shipped experiment and collect the artifacts under out/.

    python3 scripts/run_all.py [--out out] [--only ball-dipole ...]
"""

import argparse
import json
import time
from pathlib import Path

from bogovskii.cli import main
from bogovskii.config import shipped_experiments


def run(argv):
    t = time.time()
    code = main(argv)
    return code, time.time() - t


def main_all():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--out", type=Path, default=Path("out"))
    ap.add_argument("--only", nargs="*")
    args = ap.parse_args()
    summary = {}
    for name in args.only or shipped_experiments():
        d = args.out / name
        steps = [
            ["decompose", "--out", str(d / "cubes.csv")],
            ["paths", "--sample", "20", "--out", str(d / "paths.csv")],
            ["weight", "--out", str(d / "weight.csv")],
            ["solve", "--out", str(d / "field.csv")],
            ["verify", "--suite", "all", "--out", str(d / "verify.json")],
        ]
        if name == "comb":
            steps.append(["comb", "--out", str(d / "comb.json")])
        if name == "singular-probe":
            steps.append(["singular", "--out", str(d / "singular.json")])
        summary[name] = {}
        for step in steps:
            code, dt = run([step[0], "--experiment", name, *step[1:]])
            summary[name][step[0]] = {"exit": code, "seconds": round(dt, 1)}
            print(f"{name:16s} {step[0]:10s} exit={code} {dt:7.1f}s", flush=True)
    args.out.mkdir(parents=True, exist_ok=True)
    (args.out / "run_all.json").write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")


if __name__ == "__main__":
    main_all()
