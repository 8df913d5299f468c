"""Verdicts on trajectories: contraction, TV decay, conservation, theta continuity.

Every report is a pure function of its input trajectories.  Flags are
violation flags: ``True`` means the criterion failed.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np

from .errors import SnapshotMismatch
from .flux import FluxPair
from .fronttrack import FrontState, run_semigroup
from .profile import (l1_distance, plateau_count, theta_discontinuity, total_variation)
from .riemann import LIU_TOL, interpolant_admissible, liu_admissible
from .trajectory import Trajectory
from .viscous import GridState

TIME_TOL = 1e-12
RH_TOL = 1e-12


@dataclass
class DiagnosticsReport:
    scenario: str
    label: str
    times: List[float]
    tv: List[float]
    conservation: List[float]
    plateau_count: List[int]
    theta_jump: List[float]
    thresholds: Dict[str, float]
    flags: Dict[str, bool]
    details: Dict[str, float] = field(default_factory=dict)
    pairwise: Optional[Dict[str, object]] = None

    @property
    def passed(self) -> bool:
        return not any(self.flags.values())

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self, indent: Optional[int] = 2) -> str:
        return json.dumps(self.to_dict(), indent=indent, sort_keys=True)

    def summary(self) -> str:
        lines = [f"scenario {self.scenario or '-'} [{self.label}]: "
                 f"{len(self.times)} snapshots, t_end={self.times[-1]:g}"]
        lines.append(f"  TV {self.tv[0]:.6g} -> {self.tv[-1]:.6g}; "
                     f"plateaus {self.plateau_count[0]} -> {self.plateau_count[-1]}; "
                     f"max theta jump (t >= {self.thresholds['theta_t_min']:g}) "
                     f"{self.details.get('theta_jump_max', 0.0):.3g}")
        for name in sorted(self.flags):
            state = "FLAG" if self.flags[name] else "ok"
            lines.append(f"  {name:<20s} {state}")
        if self.pairwise is not None:
            l1 = self.pairwise["l1"]
            lines.append(f"  L1 to {self.pairwise['other']}: {l1[0]:.4g} -> {l1[-1]:.4g}")
        return "\n".join(lines)


def _check_times(a: Trajectory, b: Trajectory):
    if a.domain != b.domain:
        raise SnapshotMismatch(f"domains differ: {a.domain} vs {b.domain}")
    if len(a.times) != len(b.times) or any(
            abs(s - t) > TIME_TOL * max(1.0, abs(t)) for s, t in zip(a.times, b.times)):
        raise SnapshotMismatch("trajectories have different snapshot times")


def pairwise_l1(a: Trajectory, b: Trajectory) -> List[Tuple[float, float]]:
    """(t, ||a(t) - b(t)||_1) at the common snapshot times."""
    _check_times(a, b)
    return [(t, l1_distance(p, q)) for t, p, q in zip(a.times, a.profiles, b.profiles)]


def contraction_gap(traj_u: Trajectory, traj_v: Trajectory) -> List[Tuple[float, float]]:
    """(t, ||u(t) - v(t)||_1 - ||u(0) - v(0)||_1) per snapshot."""
    series = pairwise_l1(traj_u, traj_v)
    d0 = series[0][1]
    return [(t, d - d0) for t, d in series]


def semigroup_defect(traj: Trajectory, fp: FluxPair, h_reference: float
                     ) -> List[Tuple[float, float]]:
    """Forward difference quotient against a fresh front-tracking restart.

    For each snapshot time tau with a successor tau + dt, restarts the
    front tracker (step ``h_reference``) from traj(tau) and returns
    ||traj(tau + dt) - S_dt traj(tau)||_1 / dt.
    """
    out = []
    for k in range(len(traj.times) - 1):
        tau, dt = traj.times[k], traj.times[k + 1] - traj.times[k]
        ref = run_semigroup(traj.profiles[k], fp, h_reference, dt)
        out.append((tau, l1_distance(traj.profiles[k + 1], ref.profiles[-1]) / dt))
    return out


def front_checks(state: FrontState, fp: FluxPair) -> Dict[str, float]:
    """Rankine-Hugoniot residual and Liu admissibility of every front.

    A front passes Liu when it is admissible for the piecewise-linear flux
    the tracker uses (interpolant on hZ plus both states) and, unless it is
    a single rarefaction step (|jump| <= h), also for the exact flux.
    """
    worst = 0.0
    liu_fail = 0
    h = state.h
    for fr in state.fronts(fp):
        flux = fp.branch(fr.u_right > fr.u_left)
        res = abs(fr.speed * (fr.u_right - fr.u_left)
                  - (float(flux(fr.u_right)) - float(flux(fr.u_left))))
        worst = max(worst, res)
        ok = interpolant_admissible(fr.u_left, fr.u_right, flux, h)
        if ok and abs(fr.u_right - fr.u_left) > h * (1 + 1e-9):
            ok = liu_admissible(fr.u_left, fr.u_right, flux, tol=LIU_TOL)
        liu_fail += not ok
    return {"fronts": float(state.n), "rh_residual": worst, "liu_failures": float(liu_fail)}


def _boundary_flux(p, th, fp: FluxPair, x):
    u = float(p(np.array([x]))[0])
    t = float(th(np.array([x]))[0]) if th is not None else 1.0
    return t * float(fp.f(u)) + (1.0 - t) * float(fp.g(u))


def conservation_series(traj: Trajectory, fp: Optional[FluxPair] = None) -> List[float]:
    """Integral of u over the window, plus the net boundary inflow on bounded domains.

    The boundary fluxes use u and theta at the window ends and are integrated
    over time by the trapezoid rule across snapshots.
    """
    mass = [p.integral() for p in traj.profiles]
    if traj.domain.periodic or fp is None:
        return mass
    lo, hi = traj.domain.lo, traj.domain.hi
    net = [_boundary_flux(p, th, fp, hi) - _boundary_flux(p, th, fp, lo)
           for p, th in zip(traj.profiles, traj.thetas)]
    out = [mass[0]]
    acc = 0.0
    for k in range(1, len(mass)):
        acc += 0.5 * (net[k] + net[k - 1]) * (traj.times[k] - traj.times[k - 1])
        out.append(mass[k] + acc)
    return out


def _resolution(traj: Trajectory):
    """(h, is_grid): value step of a front-tracked run or cell size of a grid run."""
    st = traj.states[0] if traj.states else None
    if isinstance(st, FrontState):
        return st.h, False
    if isinstance(st, GridState):
        return st.dx, True
    return None, False


def structural_checks(traj: Trajectory, fp: Optional[FluxPair] = None, *,
                      scenario: str = "", h: Optional[float] = None,
                      theta_scale: Optional[float] = None, theta_threshold: float = 0.6,
                      theta_t_min: Optional[float] = None, tv_tol: float = 1e-12,
                      drift_factor: float = 10.0,
                      other: Optional[Trajectory] = None) -> DiagnosticsReport:
    """Series and violation flags for one trajectory.

    Checks: TV nonincreasing (``tv_tol``), plateau count nonincreasing,
    conservation drift per unit time at most ``drift_factor * h``, theta
    oscillation over windows of ``theta_scale`` at most ``theta_threshold``
    for t >= ``theta_t_min``, and (front-tracked runs with ``fp``) RH residual
    below 1e-12 with every front Liu admissible.
    """
    if len(traj.times) < 2:
        raise ValueError("structural checks need at least two snapshots")
    h_run, is_grid = _resolution(traj)
    h = h if h is not None else (h_run if h_run is not None else 0.01)
    if theta_scale is None:
        theta_scale = 4 * h if is_grid else 0.05
    if theta_t_min is None:
        theta_t_min = 0.1 * traj.times[-1]
    times = [float(t) for t in traj.times]
    tv = [total_variation(p) for p in traj.profiles]
    cons = conservation_series(traj, fp)
    pc = [plateau_count(th) if th is not None else 0 for th in traj.thetas]
    tj = [theta_discontinuity(th, theta_scale) if th is not None else 0.0
          for th in traj.thetas]

    drift = max((abs(c - cons[0]) / t for c, t in zip(cons[1:], times[1:]) if t > 0),
                default=0.0)
    late = [j for j, t in zip(tj, times) if t >= theta_t_min]
    details = {
        "tv_max_increase": float(max(0.0, max(np.diff(tv)))),
        "conservation_drift_rate": float(drift),
        "theta_jump_max": float(max(late, default=0.0)),
    }
    flags = {
        "tv_increase": details["tv_max_increase"] > tv_tol,
        "plateau_increase": bool(np.any(np.diff(pc) > 0)),
        "conservation_drift": drift > drift_factor * h,
        "theta_jump": details["theta_jump_max"] > theta_threshold,
    }
    if fp is not None and traj.states and isinstance(traj.states[0], FrontState):
        checks = [front_checks(st, fp) for st in traj.states]
        details["rh_residual_max"] = max(c["rh_residual"] for c in checks)
        details["liu_failures"] = sum(c["liu_failures"] for c in checks)
        flags["front_admissibility"] = (details["rh_residual_max"] >= RH_TOL
                                        or details["liu_failures"] > 0)
    pairwise = None
    if other is not None:
        series = pairwise_l1(traj, other)
        pairwise = {"other": other.label, "times": [t for t, _ in series],
                    "l1": [d for _, d in series]}
    thresholds = {"tv_tol": tv_tol, "conservation_drift": drift_factor * h,
                  "theta_threshold": theta_threshold, "theta_scale": theta_scale,
                  "theta_t_min": theta_t_min, "rh_residual": RH_TOL}
    return DiagnosticsReport(scenario, traj.label, times, tv, cons, pc, tj, thresholds,
                             flags, details, pairwise)
