"""Explicit finite-volume solver for the regularized switched-flux equation

    u_t + [theta_eps(u_x) f(u) + (1 - theta_eps(u_x)) g(u)]_x = delta u_xx.

Face fluxes blend local Lax-Friedrichs fluxes of f and g with theta_eps of the
one-sided face gradient.  Polynomial fluxes run through a compiled kernel.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence

import numpy as np

from .errors import BlowUp
from .flux import FluxPair
from .profile import Bounded, Periodic, Profile, ThetaField
from .trajectory import Trajectory

try:
    import numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None

log = logging.getLogger(__name__)


def theta_eps(s, epsilon):
    """Cubic smoothstep switch: 0 for s <= -eps, 1 for s >= eps, 1/2 at 0."""
    t = np.clip((np.asarray(s, dtype=float) / epsilon + 1.0) * 0.5, 0.0, 1.0)
    return t * t * (3.0 - 2.0 * t)


@dataclass
class GridState:
    x_lo: float
    dx: float
    u: np.ndarray
    t: float = 0.0
    periodic: bool = True

    def __post_init__(self):
        self.u = np.asarray(self.u, dtype=float)
        if self.u.size < 8:
            raise ValueError("grid needs at least 8 cells")
        if not np.all(np.isfinite(self.u)):
            raise ValueError("grid values must be finite")

    @property
    def n(self):
        return self.u.size

    @property
    def centers(self):
        return self.x_lo + (np.arange(self.n) + 0.5) * self.dx

    @property
    def domain(self):
        L = self.n * self.dx
        return Periodic(L) if self.periodic else Bounded(self.x_lo, self.x_lo + L)

    def copy(self):
        return GridState(self.x_lo, self.dx, self.u.copy(), self.t, self.periodic)

    def face_gradients(self):
        """(u_{j+1} - u_j)/dx at interior faces; periodic includes the wrap face last."""
        if self.periodic:
            return (np.roll(self.u, -1) - self.u) / self.dx
        return np.diff(self.u) / self.dx

    def mass(self):
        return float(np.sum(self.u) * self.dx)


@dataclass
class ViscousParams:
    epsilon: float = 1e-3
    delta: float = 1e-3
    cfl: float = 0.45
    t_end: float = 0.5
    dx: float = 1.0 / 400
    snapshot_every: Optional[float] = None
    snapshot_times: Optional[Sequence[float]] = None

    def __post_init__(self):
        if not self.epsilon > 0:
            raise ValueError("epsilon must be positive")
        if not self.delta > 0:
            raise ValueError("delta must be positive")
        if not 0 < self.cfl <= 0.9:
            raise ValueError("cfl must lie in (0, 0.9]")
        if not self.t_end > 0:
            raise ValueError("t_end must be positive")
        if not self.dx > 0:
            raise ValueError("dx must be positive")

    def output_times(self):
        if self.snapshot_times is not None:
            ts = sorted(float(t) for t in self.snapshot_times if 0 < t <= self.t_end)
        elif self.snapshot_every:
            k = int(math.floor(self.t_end / self.snapshot_every + 1e-9))
            ts = [self.snapshot_every * i for i in range(1, k + 1)]
        else:
            ts = []
        if not ts or ts[-1] < self.t_end - 1e-12:
            ts.append(self.t_end)
        return ts


@dataclass
class GridRun:
    params: ViscousParams
    dt: float
    snapshots: List[tuple] = field(default_factory=list)  # (GridState, theta at faces)
    conservation: List[float] = field(default_factory=list)

    @property
    def times(self):
        return [s.t for s, _ in self.snapshots]

    def to_trajectory(self, label="viscous") -> Trajectory:
        profiles, thetas = [], []
        for state, th in self.snapshots:
            profiles.append(grid_profile(state))
            thetas.append(grid_theta(state, th))
        dom = self.snapshots[0][0].domain
        return Trajectory(dom, list(self.times), profiles, thetas, label=label,
                          states=[s for s, _ in self.snapshots])


def grid_profile(state: GridState) -> Profile:
    return Profile.from_samples(state.domain, state.centers, state.u)


def grid_theta(state: GridState, theta_faces: np.ndarray) -> ThetaField:
    """Face values of theta as a piecewise-affine field."""
    if state.periodic:
        # face j+1/2 sits at x_lo + (j+1) dx; the wrap face is at x_lo
        xs = state.x_lo + state.dx * np.arange(state.n)
        ths = np.roll(theta_faces, 1)
    else:
        xs = state.x_lo + state.dx * np.arange(state.n + 1)
        ths = theta_faces
    return ThetaField(state.domain, xs, ths)


def grid_from_profile(p0: Profile, dx: float) -> GridState:
    dom = p0.domain
    n = int(round(dom.length / dx))
    if abs(n * dx - dom.length) > 1e-9 * dom.length:
        raise ValueError(f"dx={dx} does not divide the domain length {dom.length}")
    xc = dom.lo + (np.arange(n) + 0.5) * dx
    return GridState(dom.lo, dx, p0(xc), 0.0, dom.periodic)


def stable_dt(u, fp: FluxPair, params: ViscousParams, margin=0.0) -> float:
    """cfl * min(dx / Lambda, dx^2 / (2 delta)) over the data range."""
    lo, hi = float(np.min(u)) - margin, float(np.max(u)) + margin
    us = np.linspace(lo, hi, 257) if hi > lo else np.array([lo])
    lam = max(float(np.max(np.abs(fp.f.d1(us)))), float(np.max(np.abs(fp.g.d1(us)))),
              float(np.max(np.abs(fp.f(us) - fp.g(us)))) / params.epsilon, 1e-12)
    dx = params.dx
    return params.cfl * min(dx / lam, dx * dx / (2.0 * params.delta))


# ----------------------------------------------------------------------
# face fluxes


def _boundary_gradients(s_inner, eps):
    """Switching gradients for the two boundary faces of a bounded grid.

    Each boundary face copies the nearest interior face whose gradient is
    decided (|s| >= eps), so a flat end region carries the switch value of
    its flank, as the constant extension beyond the window does.
    """
    decided = np.flatnonzero(np.abs(s_inner) >= eps)
    if decided.size == 0:
        return 0.0, 0.0
    return s_inner[decided[0]], s_inner[decided[-1]]


def _faces(u, periodic, dx, eps):
    """Left/right states and gradients at all n+1 faces (j-1/2 for j = 0..n)."""
    if periodic:
        ext = np.concatenate([u[-1:], u, u[:1]])
        ul, ur = ext[:-1], ext[1:]
        s = (ur - ul) / dx
    else:
        ul = np.concatenate([u[:1], u])
        ur = np.concatenate([u, u[-1:]])
        s = (ur - ul) / dx
        s[0], s[-1] = _boundary_gradients(s[1:-1], eps)
    return ul, ur, s


def _step_numpy(u, dt, dx, fp, eps, delta, periodic):
    ul, ur, s = _faces(u, periodic, dx, eps)
    th = theta_eps(s, eps)
    af = np.maximum(np.abs(fp.f.d1(ul)), np.abs(fp.f.d1(ur)))
    ag = np.maximum(np.abs(fp.g.d1(ul)), np.abs(fp.g.d1(ur)))
    fh = 0.5 * (fp.f(ul) + fp.f(ur)) - 0.5 * af * (ur - ul)
    gh = 0.5 * (fp.g(ul) + fp.g(ur)) - 0.5 * ag * (ur - ul)
    F = th * fh + (1.0 - th) * gh
    diff = ur - ul  # u_j - u_{j-1} at face j-1/2
    # same operation order as the compiled kernel, so both paths agree bitwise
    return u - (dt / dx) * (F[1:] - F[:-1]) + (delta * dt / (dx * dx)) * (diff[1:] - diff[:-1])


def face_theta(state: GridState, eps: float) -> np.ndarray:
    _, _, s = _faces(state.u, state.periodic, state.dx, eps)
    if state.periodic:
        # faces j+1/2, j = 0..n-1 (the last is the wrap face)
        return theta_eps(s[1:], eps)
    return theta_eps(s, eps)


if numba is not None:
    @numba.njit(cache=True, fastmath=False)
    def _horner(c, x):
        acc = 0.0
        for k in range(c.size - 1, -1, -1):
            acc = acc * x + c[k]
        return acc

    @numba.njit(cache=True, fastmath=False)
    def _advance_poly(u, nsteps, dt, dx, eps, delta, cf, cfd, cg, cgd, periodic):
        n = u.size
        F = np.empty(n + 1)
        D = np.empty(n + 1)
        lam = dt / dx
        mu = delta * dt / (dx * dx)
        for _ in range(nsteps):
            sb0 = 0.0
            sb1 = 0.0
            if not periodic:
                for j in range(n - 1):
                    sj = (u[j + 1] - u[j]) / dx
                    if abs(sj) >= eps:
                        sb0 = sj
                        break
                for j in range(n - 2, -1, -1):
                    sj = (u[j + 1] - u[j]) / dx
                    if abs(sj) >= eps:
                        sb1 = sj
                        break
            for j in range(n + 1):
                if periodic:
                    a = u[j - 1] if j > 0 else u[n - 1]
                    b = u[j] if j < n else u[0]
                    s = (b - a) / dx
                else:
                    a = u[j - 1] if j > 0 else u[0]
                    b = u[j] if j < n else u[n - 1]
                    if j == 0:
                        s = sb0
                    elif j == n:
                        s = sb1
                    else:
                        s = (b - a) / dx
                t = (s / eps + 1.0) * 0.5
                if t < 0.0:
                    t = 0.0
                elif t > 1.0:
                    t = 1.0
                th = t * t * (3.0 - 2.0 * t)
                af = max(abs(_horner(cfd, a)), abs(_horner(cfd, b)))
                ag = max(abs(_horner(cgd, a)), abs(_horner(cgd, b)))
                fh = 0.5 * (_horner(cf, a) + _horner(cf, b)) - 0.5 * af * (b - a)
                gh = 0.5 * (_horner(cg, a) + _horner(cg, b)) - 0.5 * ag * (b - a)
                F[j] = th * fh + (1.0 - th) * gh
                D[j] = b - a
            for j in range(n):
                u[j] = u[j] - lam * (F[j + 1] - F[j]) + mu * (D[j + 1] - D[j])


def _poly_arrays(flux):
    c = np.asarray(flux.coeffs, dtype=float)
    cd = np.polynomial.polynomial.polyder(c) if c.size > 1 else np.zeros(1)
    return c, np.asarray(cd, dtype=float)


def _use_kernel(fp: FluxPair):
    return numba is not None and fp.f.coeffs is not None and fp.g.coeffs is not None


def _advance(u, nsteps, dt, dx, fp, params, periodic, kernel):
    if nsteps <= 0:
        return u
    eps, delta = params.epsilon, params.delta
    if kernel:
        cf, cfd = _poly_arrays(fp.f)
        cg, cgd = _poly_arrays(fp.g)
        _advance_poly(u, nsteps, dt, dx, eps, delta, cf, cfd, cg, cgd, periodic)
        return u
    for _ in range(nsteps):
        u = _step_numpy(u, dt, dx, fp, eps, delta, periodic)
    return u


def viscous_step(state: GridState, fp: FluxPair, p: ViscousParams,
                 dt: Optional[float] = None) -> GridState:
    """One explicit conservative step (dt defaults to the stability rule)."""
    if dt is None:
        dt = stable_dt(state.u, fp, p)
    u = _step_numpy(state.u, dt, state.dx, fp, p.epsilon, p.delta, state.periodic)
    if not np.all(np.isfinite(u)):
        raise BlowUp(f"non-finite values at t={state.t + dt:.6g}")
    return GridState(state.x_lo, state.dx, u, state.t + dt, state.periodic)


def run_viscous(p0: Profile, fp: FluxPair, params: ViscousParams,
                use_kernel: Optional[bool] = None, chunk: int = 2000) -> GridRun:
    state = grid_from_profile(p0, params.dx)
    u = state.u.copy()
    u_scale = max(float(np.max(np.abs(u))), float(np.ptp(u)), 1e-12)
    bound = 10.0 * u_scale
    dt = stable_dt(u, fp, params)
    kernel = _use_kernel(fp) if use_kernel is None else use_kernel
    run = GridRun(params, dt)
    run.snapshots.append((state.copy(), face_theta(state, params.epsilon)))
    run.conservation.append(state.mass())
    t = 0.0
    log.info("viscous run: n=%d dx=%.3g dt=%.3g eps=%.3g delta=%.3g",
             state.n, params.dx, dt, params.epsilon, params.delta)
    for t_out in params.output_times():
        remaining = t_out - t
        nfull = int(math.floor(remaining / dt * (1 + 1e-12)))
        last = remaining - nfull * dt
        done = 0
        while done < nfull:
            k = min(chunk, nfull - done)
            u = _advance(u, k, dt, params.dx, fp, params, state.periodic, kernel)
            done += k
            if not np.all(np.isfinite(u)) or np.max(np.abs(u)) > bound:
                raise BlowUp(f"|u| exceeded {bound:.3g} near t={t + done * dt:.6g}")
        if last > 1e-14 * max(1.0, t_out):
            u = _advance(u, 1, last, params.dx, fp, params, state.periodic, kernel)
        t = t_out
        snap = GridState(state.x_lo, state.dx, u.copy(), t, state.periodic)
        run.snapshots.append((snap, face_theta(snap, params.epsilon)))
        run.conservation.append(snap.mass())
    return run
