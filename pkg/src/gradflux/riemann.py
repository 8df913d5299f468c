"""Single-jump problems under the two-flux rule.

An upward jump (u+ > u-) is governed by ``f``, a downward one by ``g``.
Fans are built from the lower-convex envelope of ``f`` (upward) or the
upper-concave envelope of ``g`` (downward).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import EqualStates
from .flux import Flux, FluxPair, flux_envelope, lower_hull_points

LIU_TOL = 1e-12


@dataclass(frozen=True)
class Wave:
    speed: float
    u_before: float
    u_after: float
    kind: str  # "shock" or "rarefaction"


@dataclass(frozen=True)
class WaveFan:
    u_left: float
    u_right: float
    waves: tuple
    flux_used: str  # "f" or "g"

    def speeds(self):
        return np.array([w.speed for w in self.waves])

    def table(self) -> str:
        lines = [f"{'speed':>14} {'u_before':>14} {'u_after':>14}  kind"]
        for w in self.waves:
            lines.append(f"{w.speed + 0.0:14.8g} {w.u_before:14.8g} {w.u_after:14.8g}  {w.kind}")
        return "\n".join(lines)


def chord_slope(flux: Flux, a: float, b: float) -> float:
    return float((flux(b) - flux(a)) / (b - a))


def branch_flux(u_minus, u_plus, fp: FluxPair) -> Flux:
    return fp.f if u_plus > u_minus else fp.g


def rh_speed(u_minus: float, u_plus: float, fp: FluxPair) -> float:
    """Rankine-Hugoniot speed with f for upward and g for downward jumps."""
    if u_minus == u_plus:
        raise EqualStates(f"u- == u+ == {u_minus}")
    return chord_slope(branch_flux(u_minus, u_plus, fp), u_minus, u_plus)


def liu_admissible(u_minus: float, u_plus: float, flux: Flux, n_scan: int = 1000,
                   tol: float = LIU_TOL, endpoint_check: bool = True) -> bool:
    """Chord-slope (Liu) test for a jump from u- to u+ under ``flux``.

    Checks (flux(u*) - flux(u-)) / (u* - u-) >= s for ``n_scan`` uniformly
    spaced u* between u- (excluded) and u+ (included), where s is the slope
    of the full chord.  Equality within ``tol`` counts as admissible.  With
    ``endpoint_check`` the one-sided limits of the slope function at both
    ends are also tested through flux', which catches violations confined to
    a sliver shorter than the scan spacing.
    """
    if u_minus == u_plus:
        raise EqualStates(f"u- == u+ == {u_minus}")
    if n_scan < 2:
        raise ValueError("n_scan must be >= 2")
    d = u_plus - u_minus
    fm = flux(u_minus)
    s = (flux(u_plus) - fm) / d
    scale = max(1.0, abs(s))
    us = u_minus + d * (np.arange(1, n_scan + 1) / n_scan)
    us[-1] = u_plus
    slopes = (flux(us) - fm) / (us - u_minus)
    if np.any(slopes < s - tol * scale):
        return False
    if endpoint_check:
        dtol = 1e-9 * scale
        if flux.d1(u_plus) > s + dtol or flux.d1(u_minus) < s - dtol:
            return False
    return True


def solve_riemann(u_minus: float, u_plus: float, fp: FluxPair,
                  rarefaction_step: float) -> WaveFan:
    """Entropy fan for a single jump; rarefactions become steps of height <= step."""
    if u_minus == u_plus:
        raise EqualStates(f"u- == u+ == {u_minus}")
    if not rarefaction_step > 0:
        raise ValueError("rarefaction_step must be positive")
    up = u_plus > u_minus
    flux = fp.f if up else fp.g
    env = flux_envelope(flux, u_minus, u_plus, "lower" if up else "upper")
    segs = list(env.segments) if up else [(b, a, k) for a, b, k in reversed(env.segments)]
    waves = []
    for a, b, kind in segs:
        if kind == "chord":
            waves.append(Wave(chord_slope(flux, a, b), a, b, "shock"))
            continue
        n = max(1, math.ceil(abs(b - a) / rarefaction_step - 1e-9))
        pts = np.linspace(a, b, n + 1)
        pts[0], pts[-1] = a, b
        for k in range(n):
            waves.append(Wave(chord_slope(flux, pts[k], pts[k + 1]),
                              float(pts[k]), float(pts[k + 1]), "rarefaction"))
    return WaveFan(float(u_minus), float(u_plus), tuple(waves), "f" if up else "g")


# ----------------------------------------------------------------------
# fans on a value grid (front tracking)


def grid_nodes(u_a: float, u_b: float, h: float) -> np.ndarray:
    """Sorted states: both endpoints plus every multiple of h strictly between."""
    lo, hi = min(u_a, u_b), max(u_a, u_b)
    k0 = math.floor(lo / h) + 1
    k1 = math.ceil(hi / h) - 1
    inner = h * np.arange(k0, k1 + 1, dtype=float)
    gap = 1e-9 * h
    inner = inner[(inner > lo + gap) & (inner < hi - gap)]
    return np.concatenate([[lo], inner, [hi]])


def discrete_fan(u_minus: float, u_plus: float, flux: Flux, h: float):
    """Exact fan for the piecewise-linear interpolant of ``flux`` on the h-grid.

    Returns a list of ``(speed, u_before, u_after)`` ordered left to right.
    """
    nodes = grid_nodes(u_minus, u_plus, h)
    vals = flux(nodes)
    up = u_plus > u_minus
    hull = lower_hull_points(nodes, vals if up else -vals)
    edges = [(nodes[hull[k]], nodes[hull[k + 1]]) for k in range(len(hull) - 1)]
    if not up:
        edges = [(b, a) for a, b in reversed(edges)]
    # endpoints exactly as given (the node array stores sorted copies)
    out = []
    for a, b in edges:
        a = u_minus if a == nodes[0 if up else -1] else a
        b = u_plus if b == nodes[-1 if up else 0] else b
        out.append((chord_slope(flux, a, b), float(a), float(b)))
    return out


def interpolant_admissible(u_minus: float, u_plus: float, flux: Flux, h: float,
                           tol: float = LIU_TOL) -> bool:
    """Liu test against the interpolant of ``flux`` on the h-grid plus both states.

    The slope function of a piecewise-linear flux is monotone between nodes,
    so checking at the nodes is exact.
    """
    if u_minus == u_plus:
        raise EqualStates(f"u- == u+ == {u_minus}")
    nodes = grid_nodes(u_minus, u_plus, h)
    us = nodes[(nodes != u_minus)]
    fm = flux(u_minus)
    s = (flux(u_plus) - fm) / (u_plus - u_minus)
    slopes = (flux(us) - fm) / (us - u_minus)
    return bool(np.all(slopes >= s - tol * max(1.0, abs(s))))
