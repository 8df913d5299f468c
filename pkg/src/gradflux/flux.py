"""Flux laws, the f/g pair, and convex/concave envelopes of a flux.

Flux specs are plain strings:

    burgers          u**2 / 2
    burgers_plus_1   u**2 / 2 + 1
    poly:c0,c1,...   c0 + c1*u + c2*u**2 + ...

Arbitrary smooth fluxes can also be built from Python callables with
:meth:`Flux.from_callables`.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
from numpy.polynomial import polynomial as P
from scipy.optimize import brentq

from .errors import DegenerateInterval, EnvelopeFailure, GapViolation, ParseError

BUILTIN_FLUXES = {
    "burgers": (0.0, 0.0, 0.5),
    "burgers_plus_1": (1.0, 0.0, 0.5),
}


def _horner(coeffs):
    """Polynomial evaluator for scalars and arrays (ascending coefficients)."""
    c = tuple(float(a) for a in coeffs)

    def fn(u):
        u = np.asarray(u, dtype=float)
        r = c[-1] + 0.0 * u
        for a in c[-2::-1]:
            r = r * u + a
        return float(r) if r.ndim == 0 else r

    return fn


@dataclass(frozen=True, eq=False)
class Flux:
    """A C^2 scalar flux with its first two derivatives.

    Polynomial fluxes keep their coefficients (``coeffs``) so that fast
    kernels can evaluate them without Python callbacks.
    """

    name: str
    fn: Callable = field(repr=False)
    d1: Callable = field(repr=False)
    d2: Callable = field(repr=False)
    coeffs: Optional[tuple] = None

    def __call__(self, u):
        return self.fn(u)

    @classmethod
    def polynomial(cls, coeffs: Sequence[float], name: Optional[str] = None) -> "Flux":
        c = np.trim_zeros(np.asarray(coeffs, dtype=float), "b")
        if c.size == 0:
            c = np.zeros(1)
        c1 = P.polyder(c) if c.size > 1 else np.zeros(1)
        c2 = P.polyder(c1) if c1.size > 1 else np.zeros(1)
        if name is None:
            name = "poly:" + ",".join(repr(float(x)) for x in c)
        return cls(
            name=name,
            fn=_horner(c),
            d1=_horner(c1),
            d2=_horner(c2),
            coeffs=tuple(float(x) for x in c),
        )

    @classmethod
    def from_callables(cls, fn, d1=None, d2=None, name="custom") -> "Flux":
        """Wrap Python callables; missing derivatives use central differences."""
        if d1 is None:
            def d1(u, _h=1e-6):
                return (fn(u + _h) - fn(u - _h)) / (2 * _h)
        if d2 is None:
            def d2(u, _h=1e-4):
                return (fn(u + _h) - 2 * fn(u) + fn(u - _h)) / (_h * _h)
        return cls(name=name, fn=fn, d1=d1, d2=d2)

    def shifted(self, c: float) -> "Flux":
        """The flux u -> self(u) + c."""
        if self.coeffs is not None:
            co = list(self.coeffs)
            co[0] += c
            return Flux.polynomial(co)
        fn, d1, d2 = self.fn, self.d1, self.d2
        return Flux(f"{self.name}+{c}", lambda u: fn(u) + c, d1, d2)


def parse_flux(spec) -> Flux:
    if isinstance(spec, Flux):
        return spec
    if not isinstance(spec, str):
        raise ParseError(f"flux spec must be a string, got {type(spec).__name__}")
    text = spec.strip()
    if text in BUILTIN_FLUXES:
        return Flux.polynomial(BUILTIN_FLUXES[text], name=text)
    if text.startswith("poly:"):
        body = text[5:].strip()
        if not body:
            raise ParseError(f"empty coefficient list in {spec!r}")
        try:
            coeffs = [float(tok) for tok in body.split(",")]
        except ValueError:
            raise ParseError(f"malformed polynomial flux {spec!r}") from None
        if not all(np.isfinite(coeffs)):
            raise ParseError(f"non-finite coefficient in {spec!r}")
        return Flux.polynomial(coeffs, name=text)
    raise ParseError(f"unknown flux spec {spec!r}")


@dataclass(frozen=True)
class FluxPair:
    """Flux ``f`` (used where u_x > 0) and ``g`` (where u_x < 0), with g - f >= c0 > 0."""

    f: Flux
    g: Flux
    u_lo: float
    u_hi: float
    c0: float

    @property
    def f_spec(self) -> str:
        return self.f.name

    @property
    def g_spec(self) -> str:
        return self.g.name

    def branch(self, upward: bool) -> Flux:
        return self.f if upward else self.g


def make_flux_pair(f_spec, g_spec, u_lo=-3.0, u_hi=3.0, n_samples=1000,
                   check_gap=True) -> FluxPair:
    """Build a flux pair and estimate c0 = min(g - f) on a sample grid.

    ``check_gap=False`` skips the gap requirement; only test harnesses that
    deliberately evolve a single flux should use it.
    """
    if not u_lo < u_hi:
        raise ValueError("u_lo must be < u_hi")
    if n_samples < 2:
        raise ValueError("n_samples must be >= 2")
    f = parse_flux(f_spec)
    g = parse_flux(g_spec)
    us = np.linspace(u_lo, u_hi, int(n_samples))
    c0 = float(np.min(g(us) - f(us)))
    if check_gap and not c0 > 0:
        raise GapViolation(f"min(g - f) = {c0:.6g} <= 0 on [{u_lo}, {u_hi}]")
    return FluxPair(f, g, float(u_lo), float(u_hi), c0)


# ----------------------------------------------------------------------
# envelopes


@dataclass(frozen=True)
class Envelope:
    """Lower-convex or upper-concave envelope of a flux on [u_a, u_b].

    ``segments`` is a list of ``(u0, u1, kind)`` with ``u0 < u1`` covering the
    interval in increasing order; ``kind`` is ``"flux"`` where the envelope
    follows the flux and ``"chord"`` where it bridges it with a straight line.
    """

    flux: Flux = field(repr=False)
    kind: str
    u_a: float
    u_b: float
    segments: tuple

    @property
    def breakpoints(self):
        us = [self.segments[0][0]] + [s[1] for s in self.segments]
        return [(u, float(self.flux(u))) for u in us]

    def __call__(self, u):
        u = np.asarray(u, dtype=float)
        out = np.empty_like(u)
        for u0, u1, kind in self.segments:
            m = (u >= u0) & (u <= u1)
            if kind == "flux":
                out[m] = self.flux(u[m])
            else:
                f0, f1 = self.flux(u0), self.flux(u1)
                out[m] = f0 + (f1 - f0) * (u[m] - u0) / (u1 - u0)
        return out

    def slopes(self):
        """Slopes at every breakpoint, left to right (one-sided where needed)."""
        out = []
        for u0, u1, kind in self.segments:
            if kind == "flux":
                out.extend([float(self.flux.d1(u0)), float(self.flux.d1(u1))])
            else:
                s = (self.flux(u1) - self.flux(u0)) / (u1 - u0)
                out.extend([float(s), float(s)])
        return out


def _lower_hull(us, vs, tol=0.0):
    """Indices of the lower convex hull of points sorted by u (monotone chain).

    Points within ``tol`` (in value units) of a hull edge count as collinear
    and are dropped.
    """
    hull = []
    for i in range(len(us)):
        while len(hull) >= 2:
            i0, i1 = hull[-2], hull[-1]
            cross = (us[i1] - us[i0]) * (vs[i] - vs[i0]) - (vs[i1] - vs[i0]) * (us[i] - us[i0])
            if cross <= tol * (us[i] - us[i0]):
                hull.pop()
            else:
                break
        hull.append(i)
    return hull


def lower_hull_points(us, vs):
    """Lower convex hull of a finite point set; returns hull indices."""
    return _lower_hull(np.asarray(us, float), np.asarray(vs, float))


def _refine_tangent(fn, d1, p_lo, p_hi, q):
    """Point p in [p_lo, p_hi] where the line from (p, fn(p)) to (q, fn(q)) is tangent at p."""
    def phi(p):
        return fn(q) - fn(p) - d1(p) * (q - p)
    a, b = phi(p_lo), phi(p_hi)
    if a == 0.0:
        return p_lo
    if b == 0.0:
        return p_hi
    if np.sign(a) == np.sign(b):
        return None
    return brentq(phi, p_lo, p_hi, xtol=1e-15, rtol=4 * np.finfo(float).eps)


def _lower_envelope_segments(fn, d1, lo, hi, n):
    us = np.linspace(lo, hi, n)
    vs = fn(us)
    # roundoff-level wiggles must not split a straight stretch into many chords;
    # the tolerance follows the size of the values, which may be far below 1
    hull = _lower_hull(us, vs, 64 * np.finfo(float).eps * float(np.max(np.abs(vs))))
    # group into maximal runs of adjacent-sample edges (flux) and chords
    segs = []
    for k in range(len(hull) - 1):
        i, j = hull[k], hull[k + 1]
        kind = "flux" if j == i + 1 else "chord"
        if segs and segs[-1][2] == kind == "flux":
            segs[-1][1] = j
        else:
            segs.append([i, j, kind])
    pts = [[us[i], us[j], kind] for i, j, kind in segs]
    # move interior chord endpoints onto exact tangency points
    for _ in range(4):
        for k, (i, j, kind) in enumerate(segs):
            if kind != "chord":
                continue
            if i > 0:
                p = _refine_tangent(fn, d1, us[i - 1], us[i + 1], pts[k][1])
                if p is not None:
                    pts[k][0] = p
            if j < n - 1:
                q = _refine_tangent(fn, d1, us[j - 1], us[j + 1], pts[k][0])
                if q is not None:
                    pts[k][1] = q
    # keep neighbours consistent with refined endpoints
    for k in range(len(pts) - 1):
        if pts[k][2] == "flux" and pts[k + 1][2] == "chord":
            pts[k][1] = pts[k + 1][0]
        else:
            pts[k + 1][0] = pts[k][1]
    pts[0][0], pts[-1][1] = lo, hi
    return [(float(a), float(b), kind) for a, b, kind in pts if b > a]


def flux_envelope(flux: Flux, u_a: float, u_b: float, kind: str = "lower",
                  tol: float = 1e-10, n_initial: int = 2049, max_refine: int = 6) -> Envelope:
    """Lower-convex (``kind="lower"``) or upper-concave (``"upper"``) envelope.

    The interval may be given in either order.  Chord endpoints are solved to
    exact tangency; sampling is doubled until the envelope stays below (above)
    the flux within ``tol`` on a check grid four times finer.
    """
    if kind not in ("lower", "upper"):
        raise ValueError(f"kind must be 'lower' or 'upper', got {kind!r}")
    lo, hi = (u_a, u_b) if u_a < u_b else (u_b, u_a)
    if hi - lo <= 1e-13 * max(1.0, abs(lo), abs(hi)):
        raise DegenerateInterval(f"interval [{u_a}, {u_b}] is degenerate")
    sign = 1.0 if kind == "lower" else -1.0

    def fn(u):
        return sign * flux(u)

    def d1(u):
        return sign * flux.d1(u)

    scale = max(1.0, float(np.max(np.abs(flux(np.linspace(lo, hi, 9))))))
    n = n_initial
    for _ in range(max_refine):
        segs = _lower_envelope_segments(fn, d1, lo, hi, n)
        env = Envelope(flux, kind, float(lo), float(hi), tuple(segs))
        check = np.linspace(lo, hi, 4 * n + 1)
        gap = sign * (flux(check) - env(check))
        if np.min(gap) >= -tol * scale:
            return env
        n = 2 * n - 1
    raise EnvelopeFailure(f"envelope of {flux.name} on [{lo}, {hi}] did not converge")
