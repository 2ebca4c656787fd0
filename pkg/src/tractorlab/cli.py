"""Batch orchestration: run verification suites on a metric and emit reports.

    tractorlab run --metric round_sphere --suite all --points 20 --seed 7 \
        --report out.json --format json

Exit code 0 iff every check passes.  Reports are deterministic for a fixed
(config, seed) apart from the timing field.  TRACTORLAB_THREADS caps the
number of concurrently running checks.
"""

from __future__ import annotations

import argparse
import json
import sys
import time

import numpy as np

from . import __version__, jets, metrics, suites


def parse_params(pairs):
    out = {}
    for pair in pairs or []:
        if "=" not in pair:
            raise SystemExit(f"--param expects key=value, got {pair!r}")
        key, value = pair.split("=", 1)
        try:
            parsed = json.loads(value)
        except json.JSONDecodeError:
            parsed = value
        out[key] = parsed
    return out


def parse_tol_overrides(pairs):
    out = {}
    for pair in pairs or []:
        if "=" not in pair:
            raise SystemExit(f"--tol-override expects check=value, got {pair!r}")
        key, value = pair.split("=", 1)
        if key not in suites.META:
            raise SystemExit(f"unknown check id {key!r}")
        tol = float(value)
        if tol < 1e-12:
            raise SystemExit(f"tolerance for {key} must be >= 1e-12, got {tol}")
        out[key] = tol
    return out


def build_report(args):
    params = parse_params(args.param)
    tolerances = parse_tol_overrides(args.tol_override)
    metric = metrics.load_metric(args.metric, **params)
    suite_names = args.suite if args.suite != ["all"] and "all" not in args.suite else "all"
    start = time.time()
    results = suites.run_suites(
        metric, suite_names, seed=args.seed, npoints=args.points, tolerances=tolerances,
    )
    elapsed = time.time() - start
    report = {
        "environment": {
            "version": __version__,
            "seed": args.seed,
            "backend": jets.backend_name(),
            "numpy": np.__version__,
            "timing_s": round(elapsed, 3),
        },
        "config": {
            "metric": args.metric,
            "params": params,
            "suites": list(suites.SUITES) if suite_names == "all" else list(suite_names),
            "points": args.points,
            "tol_overrides": tolerances,
        },
        "checks": [r.to_dict() for r in results],
        "passed": all(r.passed for r in results),
    }
    return report, results


def format_text(report):
    lines = []
    env = report["environment"]
    lines.append(
        f"tractorlab {env['version']} | metric={report['config']['metric']} "
        f"seed={env['seed']} points={report['config']['points']} backend={env['backend']}"
    )
    for c in report["checks"]:
        status = "PASS" if c["passed"] else "FAIL"
        lines.append(
            f"[{status}] {c['suite']}/{c['check_id']}: max={c['max_residual']:.3e} "
            f"tol={c['tolerance']:.1e}  ({c['law']})"
        )
        if not c["passed"]:
            lines.append(f"       worst point: {c.get('worst_point')}")
            for k, v in (c.get("block_diff") or {}).items():
                lines.append(f"       block {k}: {v:.3e}")
        if c.get("note"):
            lines.append(f"       note: {c['note']}")
    n_pass = sum(1 for c in report["checks"] if c["passed"])
    lines.append(f"{n_pass}/{len(report['checks'])} checks passed")
    return "\n".join(lines)


def emit_report(report, path=None, fmt="json"):
    text = json.dumps(report, indent=2, sort_keys=True) if fmt == "json" else format_text(report)
    if path:
        with open(path, "w") as fh:
            fh.write(text + "\n")
    return text


def main(argv=None):
    parser = argparse.ArgumentParser(prog="tractorlab", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="run verification suites on a metric")
    run.add_argument("--metric", required=True,
                     help=f"catalog name ({', '.join(metrics.CATALOG)}) or spec file path")
    run.add_argument("--param", action="append", metavar="K=V",
                     help="metric parameter (factor=..., amplitude=..., seed=..., mass=..., n=...)")
    run.add_argument("--suite", action="append", default=None,
                     help=f"suite name or 'all' ({', '.join(suites.SUITES)})")
    run.add_argument("--points", type=int, default=20)
    run.add_argument("--seed", type=int, default=0)
    run.add_argument("--tol-override", action="append", metavar="CHECK=TOL")
    run.add_argument("--report", default=None, help="write the report to this path")
    run.add_argument("--format", choices=("json", "text"), default="json")
    run.add_argument("--quiet", action="store_true", help="suppress the stdout summary")
    args = parser.parse_args(argv)

    if args.suite is None:
        args.suite = ["all"]
    report, results = build_report(args)
    if args.report:
        emit_report(report, args.report, args.format)
    if not args.quiet:
        print(format_text(report))
    return 0 if report["passed"] else 1


if __name__ == "__main__":
    sys.exit(main())
