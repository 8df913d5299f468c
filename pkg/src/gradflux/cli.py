"""Command line entry point: ``gradflux run | riemann | check``."""

from __future__ import annotations

import argparse
import glob
import json
import logging
import os
import re
import sys
from dataclasses import replace

from .config import parse_config
from .diagnostics import structural_checks
from .errors import GradfluxError, ParseError, ValidationError
from .flux import make_flux_pair
from .profile import read_snapshot_csv
from .riemann import solve_riemann
from .trajectory import Trajectory

EXIT_OK, EXIT_SOLVER, EXIT_CONFIG = 0, 1, 2
_SNAP = re.compile(r"^(semi|visc)_t([0-9.eE+-]+)\.csv$")


def _cmd_run(args) -> int:
    from .scenarios import run_scenario

    try:
        with open(args.config) as fh:
            cfg = parse_config(fh.read())
    except ParseError as exc:
        print(f"{args.config}:{exc.line}: {exc.message}", file=sys.stderr)
        return EXIT_CONFIG
    except ValidationError as exc:
        print(f"{args.config}: invalid {exc.key}: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"cannot read {args.config}: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if args.out:
        cfg = replace(cfg, out=args.out)
    try:
        res = run_scenario(cfg, jobs=args.jobs)
    except GradfluxError as exc:
        print(f"run failed: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    print(res.summary)
    print(f"artifacts in {res.run_dir}")
    return res.status


def _cmd_riemann(args) -> int:
    try:
        f, g = (s.strip() for s in args.flux.split(",", 1))
        fp = make_flux_pair(f, g)
    except (ValueError, GradfluxError) as exc:
        print(f"bad --flux: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        fan = solve_riemann(args.ul, args.ur, fp, rarefaction_step=args.step)
    except GradfluxError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    print(fan.table())
    return EXIT_OK


def load_run(run_dir: str, prefix: str, domain, label: str) -> Trajectory:
    """Trajectory rebuilt from the ``<prefix>_t*.csv`` snapshots of a run directory."""
    found = []
    for path in glob.glob(os.path.join(run_dir, f"{prefix}_t*.csv")):
        m = _SNAP.match(os.path.basename(path))
        if m:
            found.append((float(m.group(2)), path))
    found.sort()
    profiles, thetas = [], []
    for _, path in found:
        p, th = read_snapshot_csv(path, domain)
        profiles.append(p)
        thetas.append(th)
    return Trajectory(domain, [t for t, _ in found], profiles, thetas, label=label)


def check_dir(run_dir: str):
    """Re-run structural diagnostics on every run stored below ``run_dir``."""
    reports = []
    for root, _, files in sorted(os.walk(run_dir)):
        if "config.txt" not in files:
            continue
        if not any(_SNAP.match(f) for f in files):
            continue
        with open(os.path.join(root, "config.txt")) as fh:
            cfg = parse_config(fh.read())
        fp = cfg.flux_pair()
        dom = cfg.make_domain()
        for prefix, label, h in (("semi", "semigroup", cfg.h), ("visc", "viscous", cfg.dx)):
            traj = load_run(root, prefix, dom, label)
            if len(traj) < 2:
                continue
            theta_scale = 4 * cfg.dx if prefix == "visc" else None
            rep = structural_checks(traj, fp, scenario=cfg.scenario, h=h,
                                    theta_scale=theta_scale)
            rep.label = f"{os.path.relpath(root, run_dir)}:{label}"
            reports.append(rep)
    return reports


def _cmd_check(args) -> int:
    if not os.path.isdir(args.run_dir):
        print(f"not a directory: {args.run_dir}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        reports = check_dir(args.run_dir)
    except (ParseError, ValidationError) as exc:
        print(f"stored config is invalid: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except GradfluxError as exc:
        print(f"check failed: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    if not reports:
        print(f"no runs found under {args.run_dir}", file=sys.stderr)
        return EXIT_CONFIG
    out = os.path.join(args.run_dir, "check.json")
    with open(out, "w") as fh:
        json.dump({r.label: r.to_dict() for r in reports}, fh, indent=2, sort_keys=True)
        fh.write("\n")
    for r in reports:
        print(r.summary())
    print(f"report written to {out}")
    if args.strict and not all(r.passed for r in reports):
        return EXIT_SOLVER
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="gradflux",
                                 description="Gradient-switched conservation laws.")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="run a scenario from a config file")
    r.add_argument("config")
    r.add_argument("--jobs", type=int, default=1, help="parallel independent runs")
    r.add_argument("--out", default=None, help="output root (default $GRADFLUX_OUT or ./runs)")
    r.set_defaults(func=_cmd_run)

    q = sub.add_parser("riemann", help="print the wave fan of a Riemann problem")
    q.add_argument("--ul", type=float, required=True)
    q.add_argument("--ur", type=float, required=True)
    q.add_argument("--flux", default="burgers,burgers_plus_1", help="f,g flux specs")
    q.add_argument("--step", type=float, default=0.05, help="rarefaction value step")
    q.set_defaults(func=_cmd_riemann)

    c = sub.add_parser("check", help="re-run diagnostics on a stored run directory")
    c.add_argument("run_dir")
    c.add_argument("--strict", action="store_true", help="exit 1 when any flag is raised")
    c.set_defaults(func=_cmd_check)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if getattr(args, "jobs", 1) < 1:
        print("--jobs must be at least 1", file=sys.stderr)
        return EXIT_CONFIG
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
