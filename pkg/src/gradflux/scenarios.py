"""Scenario execution and artifact persistence.

Every run writes into its own directory:

``config.txt``          the configuration that produced the run
``semi_t<time>.csv``    front-tracking snapshots (x,u,theta)
``visc_t<time>.csv``    viscous snapshots
``events.jsonl``        front-tracking interactions
``viscous_meta.json``   viscous run parameters (epsilon, delta, dx, dt, cfl, t_end)
``pairwise_l1.csv``     L1 distance between two trajectories per snapshot
``diagnostics.json``    structural reports
``summary.txt``         the text summary also printed to stdout
"""

from __future__ import annotations

import csv
import json
import logging
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Dict, List, Optional

from .config import RunConfig, serialize
from .diagnostics import DiagnosticsReport, pairwise_l1, structural_checks
from .fronttrack import burgers_embedded, run_semigroup
from .profile import write_snapshot_csv
from .trajectory import Trajectory
from .viscous import GridRun, ViscousParams, run_viscous

log = logging.getLogger(__name__)

CONVERGENCE_LEVELS = 3
RIEMANN_SUITE = ((1.0, -1.0), (-1.0, 1.0), (0.5, -1.0), (-1.0, 0.5), (1.0, 0.0), (0.0, -1.0))


@dataclass
class ScenarioResult:
    status: int
    run_dir: str
    reports: Dict[str, DiagnosticsReport] = field(default_factory=dict)
    summary: str = ""
    extra: dict = field(default_factory=dict)


# ----------------------------------------------------------------------
# solvers


def semigroup_trajectory(cfg: RunConfig) -> Trajectory:
    return run_semigroup(cfg.initial_profile(), cfg.flux_pair(), cfg.h, cfg.t_end,
                         cfg.snapshots)


def burgers_embedded_solution(cfg: RunConfig) -> Trajectory:
    """Negative control: f-evolution of the rising parts, g-shock at the downward jump."""
    return burgers_embedded(cfg.initial_profile(), cfg.flux_pair(), cfg.h, cfg.t_end,
                            cfg.snapshots)


def viscous_params(cfg: RunConfig) -> ViscousParams:
    return ViscousParams(epsilon=cfg.epsilon, delta=cfg.delta, cfl=cfg.cfl, t_end=cfg.t_end,
                         dx=cfg.dx, snapshot_times=cfg.snapshots)


def viscous_run(cfg: RunConfig) -> GridRun:
    return run_viscous(cfg.initial_profile(), cfg.flux_pair(), viscous_params(cfg))


# ----------------------------------------------------------------------
# writers


def snapshot_name(prefix: str, t: float) -> str:
    return f"{prefix}_t{t:.6f}.csv"


def write_trajectory(traj: Trajectory, run_dir: str, prefix: str) -> List[str]:
    paths = []
    for t, p, th in zip(traj.times, traj.profiles, traj.thetas):
        path = os.path.join(run_dir, snapshot_name(prefix, t))
        write_snapshot_csv(path, p, th)
        paths.append(path)
    return paths


def write_events(events, path: str):
    with open(path, "w") as fh:
        for ev in events:
            fh.write(json.dumps({k: ev[k] for k in
                                 ("t", "kind", "position", "tv_before", "tv_after")}) + "\n")


def write_viscous_meta(run: GridRun, path: str):
    p = run.params
    meta = {"epsilon": p.epsilon, "delta": p.delta, "dx": p.dx, "dt": run.dt, "cfl": p.cfl,
            "t_end": p.t_end}
    with open(path, "w") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)
        fh.write("\n")


def write_pairwise(series, path: str):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t", "l1"])
        for t, d in series:
            w.writerow([repr(float(t)), repr(float(d))])


def _write_text(path: str, text: str):
    with open(path, "w") as fh:
        fh.write(text if text.endswith("\n") else text + "\n")


def _write_config(run_dir: str, cfg: RunConfig):
    # the output root is left out so that a run is independent of where it was written
    _write_text(os.path.join(run_dir, "config.txt"), serialize(replace(cfg, out=None)))


def _write_reports(run_dir: str, reports: Dict[str, DiagnosticsReport], extra=None):
    data = {name: rep.to_dict() for name, rep in reports.items()}
    if extra:
        data.update(extra)
    with open(os.path.join(run_dir, "diagnostics.json"), "w") as fh:
        json.dump(data, fh, indent=2, sort_keys=True)
        fh.write("\n")


# ----------------------------------------------------------------------
# single runs


def _single_run(cfg: RunConfig, run_dir: str) -> ScenarioResult:
    """Run the configured solver(s) and write all artifacts into ``run_dir``."""
    os.makedirs(run_dir, exist_ok=True)
    _write_config(run_dir, cfg)
    fp = cfg.flux_pair()
    reports = {}
    trajs = {}
    if cfg.solver in ("semigroup", "both"):
        semi = semigroup_trajectory(cfg)
        write_trajectory(semi, run_dir, "semi")
        write_events(semi.events, os.path.join(run_dir, "events.jsonl"))
        trajs["semigroup"] = semi
    if cfg.solver in ("viscous", "both"):
        run = viscous_run(cfg)
        visc = run.to_trajectory()
        write_trajectory(visc, run_dir, "visc")
        write_viscous_meta(run, os.path.join(run_dir, "viscous_meta.json"))
        trajs["viscous"] = visc
    pair = None
    if len(trajs) == 2:
        pair = pairwise_l1(trajs["viscous"], trajs["semigroup"])
        write_pairwise(pair, os.path.join(run_dir, "pairwise_l1.csv"))
    for name, tr in trajs.items():
        other = trajs.get("semigroup") if name == "viscous" else None
        reports[name] = structural_checks(tr, fp, scenario=cfg.scenario, other=other)
    summary = "\n".join(r.summary() for r in reports.values())
    _write_reports(run_dir, reports)
    _write_text(os.path.join(run_dir, "summary.txt"), summary)
    return ScenarioResult(0, run_dir, reports, summary,
                          {"pairwise": pair, "trajectories": trajs})


def _discriminator(cfg: RunConfig, run_dir: str) -> ScenarioResult:
    """Front-tracking run against the embedded control on the same data."""
    os.makedirs(run_dir, exist_ok=True)
    _write_config(run_dir, cfg)
    fp = cfg.flux_pair()
    semi = semigroup_trajectory(cfg)
    ctrl = burgers_embedded_solution(cfg)
    out = {}
    for name, tr in (("semigroup", semi), ("embedded", ctrl)):
        sub = os.path.join(run_dir, name)
        os.makedirs(sub, exist_ok=True)
        _write_config(sub, cfg)
        write_trajectory(tr, sub, "semi")
        write_events(tr.events, os.path.join(sub, "events.jsonl"))
        out[name] = structural_checks(tr, fp, scenario=cfg.scenario,
                                      other=ctrl if name == "semigroup" else None)
    pair = pairwise_l1(semi, ctrl)
    write_pairwise(pair, os.path.join(run_dir, "pairwise_l1.csv"))
    dist = [d for t, d in pair if t > 0]
    positive = all(d > 0 for d in dist)
    growing = all(b >= a for a, b in zip(dist, dist[1:]))
    verdict = {
        "semigroup_theta_clear": not out["semigroup"].flags["theta_jump"],
        "embedded_theta_raised": out["embedded"].flags["theta_jump"],
        "l1_positive": positive,
        "l1_growing": growing,
    }
    lines = [out["semigroup"].summary(), out["embedded"].summary(),
             "discriminator: " + ", ".join(f"{k}={'yes' if v else 'no'}"
                                           for k, v in verdict.items())]
    summary = "\n".join(lines)
    _write_reports(run_dir, out, {"discriminator": verdict})
    _write_text(os.path.join(run_dir, "summary.txt"), summary)
    return ScenarioResult(0, run_dir, out, summary,
                          {"pairwise": pair, "verdict": verdict,
                           "trajectories": {"semigroup": semi, "embedded": ctrl}})


def level_config(cfg: RunConfig, level: int, levels: int = CONVERGENCE_LEVELS) -> RunConfig:
    """Joint coarsening of (epsilon, delta, dx, h); the last level is ``cfg`` itself."""
    f = 2.0 ** (levels - 1 - level)
    return replace(cfg, epsilon=cfg.epsilon * f, delta=cfg.delta * f, dx=cfg.dx * f,
                   h=cfg.h * f, solver="both")


def _level_job(args):
    cfg, run_dir = args
    res = _single_run(cfg, run_dir)
    return res.extra["pairwise"][-1][1], res.summary


def _map(fn, jobs_args, jobs):
    if jobs > 1 and len(jobs_args) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            return list(ex.map(fn, jobs_args))
    return [fn(a) for a in jobs_args]


def _convergence(cfg: RunConfig, run_dir: str, jobs: int) -> ScenarioResult:
    os.makedirs(run_dir, exist_ok=True)
    _write_config(run_dir, cfg)
    cfgs = [level_config(cfg, k) for k in range(CONVERGENCE_LEVELS)]
    args = [(c, os.path.join(run_dir, f"level_{k}")) for k, c in enumerate(cfgs)]
    results = _map(_level_job, args, jobs)
    rows = []
    prev = None
    for k, (c, (d, _)) in enumerate(zip(cfgs, results)):
        ratio = prev / d if prev is not None and d > 0 else None
        rows.append({"level": k, "epsilon": c.epsilon, "delta": c.delta, "dx": c.dx,
                     "h": c.h, "l1": d, "ratio": ratio})
        prev = d
    with open(os.path.join(run_dir, "convergence.csv"), "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["level", "epsilon", "delta", "dx", "h", "l1", "ratio"])
        for r in rows:
            w.writerow([r["level"], repr(r["epsilon"]), repr(r["delta"]), repr(r["dx"]),
                        repr(r["h"]), repr(r["l1"]),
                        "" if r["ratio"] is None else repr(r["ratio"])])
    lines = [f"viscous convergence at t={cfg.t_end:g} (L1 viscous vs front tracking)"]
    for r in rows:
        rt = "-" if r["ratio"] is None else f"{r['ratio']:.3f}"
        lines.append(f"  level {r['level']}: eps={r['epsilon']:.4g} dx={r['dx']:.4g} "
                     f"h={r['h']:.4g}  L1={r['l1']:.5g}  ratio={rt}")
    decreasing = all(r["ratio"] is not None and r["ratio"] > 1 for r in rows[1:])
    lines.append(f"  L1 decreasing under refinement: {'yes' if decreasing else 'no'}")
    summary = "\n".join(lines)
    with open(os.path.join(run_dir, "diagnostics.json"), "w") as fh:
        json.dump({"convergence": rows}, fh, indent=2, sort_keys=True)
        fh.write("\n")
    _write_text(os.path.join(run_dir, "summary.txt"), summary)
    return ScenarioResult(0, run_dir, {}, summary, {"convergence": rows})


def _riemann_job(args):
    cfg, run_dir = args
    return _single_run(cfg, run_dir).summary


def _riemann_suite(cfg: RunConfig, run_dir: str, jobs: int) -> ScenarioResult:
    os.makedirs(run_dir, exist_ok=True)
    _write_config(run_dir, cfg)
    args = []
    for k, (ul, ur) in enumerate(RIEMANN_SUITE):
        c = replace(cfg, initial=f"riemann:{ul!r},{ur!r}")
        args.append((c, os.path.join(run_dir, f"riemann_{k}")))
    summaries = _map(_riemann_job, args, jobs)
    summary = "\n".join(f"riemann {ul:g},{ur:g}:\n{s}"
                        for (ul, ur), s in zip(RIEMANN_SUITE, summaries))
    _write_text(os.path.join(run_dir, "summary.txt"), summary)
    return ScenarioResult(0, run_dir, {}, summary)


def run_scenario(cfg: RunConfig, out_root: Optional[str] = None, jobs: int = 1) -> ScenarioResult:
    """Execute ``cfg`` and write its artifacts under ``out_root/<scenario>``."""
    root = out_root or cfg.output_root()
    run_dir = os.path.join(root, cfg.scenario)
    log.info("scenario %s -> %s", cfg.scenario, run_dir)
    if cfg.scenario == "example11_discriminator":
        return _discriminator(cfg, run_dir)
    if cfg.scenario == "viscous_convergence":
        return _convergence(cfg, run_dir, jobs)
    if cfg.scenario == "riemann_suite":
        return _riemann_suite(cfg, run_dir, jobs)
    return _single_run(cfg, run_dir)
