"""Piecewise-linear BV profiles u(x) with explicit jumps, and switch fields theta(x).

A :class:`Profile` stores nodes ``x`` (strictly increasing) with one-sided
values ``ul`` / ``ur``; ``ul != ur`` marks a jump.  Between consecutive nodes
the profile is affine from ``ur[i]`` to ``ul[i+1]``.  On a periodic domain the
last segment wraps to the first node; on a bounded window the profile is
extended by constants beyond its first and last node.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence, Union

import numpy as np

from .errors import AmbiguousTheta, DomainMismatch, InconsistentPlateau, ParseError


@dataclass(frozen=True)
class Periodic:
    period: float = 1.0

    @property
    def lo(self):
        return 0.0

    @property
    def hi(self):
        return self.period

    @property
    def length(self):
        return self.period

    periodic = True


@dataclass(frozen=True)
class Bounded:
    x_min: float
    x_max: float

    @property
    def lo(self):
        return self.x_min

    @property
    def hi(self):
        return self.x_max

    @property
    def length(self):
        return self.x_max - self.x_min

    periodic = False


Domain = Union[Periodic, Bounded]


def _check_domain(domain):
    if domain.length <= 0:
        raise ValueError(f"empty domain {domain}")


@dataclass(frozen=True, eq=False)
class Profile:
    domain: Domain
    x: np.ndarray
    ul: np.ndarray
    ur: np.ndarray

    def __post_init__(self):
        _check_domain(self.domain)
        x = np.asarray(self.x, dtype=float)
        ul = np.asarray(self.ul, dtype=float)
        ur = np.asarray(self.ur, dtype=float)
        if x.ndim != 1 or x.size == 0 or ul.shape != x.shape or ur.shape != x.shape:
            raise ValueError("x, ul, ur must be equal-length non-empty 1d arrays")
        if np.any(np.diff(x) <= 0):
            raise ValueError("node abscissae must be strictly increasing")
        if not (np.all(np.isfinite(ul)) and np.all(np.isfinite(ur))):
            raise ValueError("profile values must be finite")
        if self.domain.periodic and (x[0] < 0 or x[-1] >= self.domain.period):
            raise ValueError("periodic nodes must lie in [0, period)")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "ul", ul)
        object.__setattr__(self, "ur", ur)

    # -- constructors ---------------------------------------------------

    @classmethod
    def constant(cls, domain, c):
        return cls(domain, [domain.lo], [c], [c])

    @classmethod
    def from_samples(cls, domain, xs, us):
        """Continuous piecewise-linear interpolant of samples."""
        us = np.asarray(us, dtype=float)
        return cls(domain, xs, us, us.copy())

    @classmethod
    def from_function(cls, domain, fn, n=1000, jumps=()):
        """Sample ``fn`` on a uniform grid; points in ``jumps`` become exact jumps.

        At a jump point the one-sided values are taken as limits of ``fn``.
        """
        lo, hi = domain.lo, domain.hi
        if domain.periodic:
            xs = lo + (hi - lo) * np.arange(n) / n
        else:
            xs = np.linspace(lo, hi, n + 1)
        jumps = sorted(float(j) for j in jumps)
        if jumps:
            keep = np.ones(xs.size, bool)
            for j in jumps:
                keep &= np.abs(xs - j) > 1e-12 * max(1.0, abs(j))
            xs = np.sort(np.concatenate([xs[keep], jumps]))
        ul = np.asarray(fn(xs), dtype=float)
        ur = ul.copy()
        eps = 1e-12 * max(1.0, domain.length)
        for j in jumps:
            k = int(np.argmin(np.abs(xs - j)))
            ul[k] = float(fn(np.array([j - eps]))[0])
            ur[k] = float(fn(np.array([j + eps]))[0])
        return cls(domain, xs, ul, ur)

    @classmethod
    def step(cls, domain, x0, left, right):
        """Single jump from ``left`` to ``right`` at ``x0`` (constant elsewhere)."""
        if domain.periodic:
            raise ValueError("a single step is not periodic; use two jumps")
        return cls(domain, [x0], [left], [right])

    @classmethod
    def piecewise_constant(cls, domain, breaks, values):
        """Constant ``values[k]`` between consecutive ``breaks``.

        Periodic: ``len(values) == len(breaks)``, value k holds on
        [breaks[k], breaks[k+1]) with wrap.  Bounded: ``len(values) ==
        len(breaks) + 1`` and values[0] holds left of breaks[0].
        """
        breaks = np.asarray(breaks, float)
        values = np.asarray(values, float)
        if domain.periodic:
            if values.size != breaks.size:
                raise ValueError("periodic data needs one value per break")
            return cls(domain, breaks, np.roll(values, 1), values)
        if values.size != breaks.size + 1:
            raise ValueError("bounded data needs len(breaks) + 1 values")
        return cls(domain, breaks, values[:-1], values[1:])

    # -- evaluation -----------------------------------------------------

    def _extended(self):
        """Nodes and one-sided values covering [lo, hi] (periodic copies added)."""
        x, ul, ur = self.x, self.ul, self.ur
        if self.domain.periodic:
            L = self.domain.period
            return (np.concatenate([x - L, x, x + L]),
                    np.tile(ul, 3), np.tile(ur, 3))
        return x, ul, ur

    def limits(self, xq):
        """Left and right limits of the profile at points ``xq``."""
        xq = np.atleast_1d(np.asarray(xq, dtype=float))
        X, UL, UR = self._extended()
        if self.domain.periodic:
            xq = self.domain.lo + np.mod(xq - self.domain.lo, self.domain.period)
        i = np.searchsorted(X, xq, side="left")
        at = (i < X.size) & (X[np.minimum(i, X.size - 1)] == xq)
        left = np.empty_like(xq)
        right = np.empty_like(xq)
        # strictly between nodes X[i-1] < xq < X[i]
        j = np.clip(i, 1, X.size - 1)
        x0, x1 = X[j - 1], X[j]
        w = np.where(x1 > x0, (xq - x0) / np.where(x1 > x0, x1 - x0, 1.0), 0.0)
        val = UR[j - 1] + (UL[j] - UR[j - 1]) * w
        below = i == 0
        above = i >= X.size
        val = np.where(below, UL[0], val)
        val = np.where(above, UR[-1], val)
        left[:] = val
        right[:] = val
        k = np.minimum(i, X.size - 1)
        left[at] = UL[k[at]]
        right[at] = UR[k[at]]
        return left, right

    def __call__(self, xq):
        """Point values (right limits at jumps)."""
        return self.limits(xq)[1]

    def breakpoints(self, extra: Sequence[float] = ()):
        """Window partition ``X`` (incl. both ends) with left/right limits there."""
        lo, hi = self.domain.lo, self.domain.hi
        X = np.concatenate([[lo, hi], self.x, np.asarray(extra, float)])
        X = np.unique(X[(X >= lo) & (X <= hi)])
        # periodic: limits at hi are those at lo (wrap), which is what the
        # integrand needs from the left
        L, R = self.limits(X)
        return X, L, R

    @property
    def is_piecewise_constant(self):
        X, L, R = self.breakpoints()
        return bool(np.all(np.abs(L[1:] - R[:-1]) == 0.0))

    def integral(self):
        X, L, R = self.breakpoints()
        return float(np.sum(0.5 * (R[:-1] + L[1:]) * np.diff(X)))


def total_variation(p: Profile) -> float:
    X, L, R = p.breakpoints()
    seg = np.sum(np.abs(L[1:] - R[:-1]))
    jumps = np.abs(R - L)
    if p.domain.periodic:
        # the node at hi coincides with the node at lo
        jumps = jumps[:-1]
    return float(seg + np.sum(jumps))


def _abs_affine_integral(d0, d1, width):
    d0 = np.asarray(d0, float)
    d1 = np.asarray(d1, float)
    same = d0 * d1 >= 0
    a0, a1 = np.abs(d0), np.abs(d1)
    tot = a0 + a1
    cross = np.where(tot > 0, (d0 * d0 + d1 * d1) / (2 * np.where(tot > 0, tot, 1.0)), 0.0)
    return np.sum(np.where(same, 0.5 * tot, cross) * width)


def l1_distance(p: Profile, q: Profile) -> float:
    """Exact integral of |p - q| over one period or the bounded window."""
    if p.domain != q.domain:
        raise DomainMismatch(f"{p.domain} vs {q.domain}")
    extra = np.concatenate([p.x, q.x])
    X, pl, pr = p.breakpoints(extra)
    _, ql, qr = q.breakpoints(extra)
    d0 = pr[:-1] - qr[:-1]
    d1 = pl[1:] - ql[1:]
    return float(_abs_affine_integral(d0, d1, np.diff(X)))


def grid_total_variation(values, periodic=False):
    v = np.asarray(values, float)
    tv = np.sum(np.abs(np.diff(v)))
    if periodic:
        tv += abs(v[0] - v[-1])
    return float(tv)


# ----------------------------------------------------------------------
# theta fields


@dataclass(frozen=True, eq=False)
class ThetaField:
    """Piecewise-affine theta(x) in [0, 1].

    ``x`` is nondecreasing; repeated abscissae encode a jump, listed as left
    limit, optional point value, right limit.  Between distinct abscissae
    theta is affine.
    """

    domain: Domain
    x: np.ndarray
    theta: np.ndarray

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float)
        th = np.asarray(self.theta, dtype=float)
        if x.shape != th.shape or x.ndim != 1 or x.size == 0:
            raise ValueError("x and theta must be equal-length 1d arrays")
        if np.any(np.diff(x) < 0):
            raise ValueError("theta abscissae must be nondecreasing")
        if np.any(th < -1e-12) or np.any(th > 1 + 1e-12):
            raise ValueError("theta must lie in [0, 1]")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "theta", np.clip(th, 0.0, 1.0))

    @classmethod
    def constant(cls, domain, value):
        return cls(domain, [domain.lo], [value])

    def _extended(self):
        if self.domain.periodic:
            L = self.domain.period
            return (np.concatenate([self.x - L, self.x, self.x + L]),
                    np.tile(self.theta, 3))
        return self.x, self.theta

    def __call__(self, xq):
        X, T = self._extended()
        xq = np.asarray(xq, float)
        if self.domain.periodic:
            xq = np.mod(xq, self.domain.period)
        return np.interp(xq, X, T)


def plateau_count(theta: ThetaField) -> int:
    """Number of ramps of theta: maximal runs where it moves strictly between 0 and 1."""
    X, T = theta.x, theta.theta
    if theta.domain.periodic:
        X = np.append(X, X[0] + theta.domain.period)
        T = np.append(T, T[0])
    if X.size < 2:
        return 0
    moving = (np.diff(X) > 0) & (T[1:] != T[:-1])
    at_bound = (T[:-1] <= 0.0) | (T[:-1] >= 1.0)
    if theta.domain.periodic:
        if moving.all() and not at_bound.any():
            return 1
        prev = np.roll(moving, 1)
    else:
        prev = np.concatenate([[False], moving[:-1]])
    starts = moving & (~prev | at_bound)
    return int(np.sum(starts))


def theta_discontinuity(theta: ThetaField, scale: float) -> float:
    """Largest oscillation (max - min) of theta over any window of width ``scale``."""
    if scale <= 0:
        raise ValueError("scale must be positive")
    X, T = theta._extended()
    if X.size == 1:
        return 0.0
    lo, hi = theta.domain.lo, theta.domain.hi
    if not theta.domain.periodic:
        # constant extension beyond the listed entries
        X = np.concatenate([[min(lo, X[0]) - scale], X, [max(hi, X[-1]) + scale]])
        T = np.concatenate([[T[0]], T, [T[-1]]])
    ux, first = np.unique(X, return_index=True)
    # theta value used for interpolation strictly between entries
    last = np.concatenate([first[1:] - 1, [X.size - 1]])
    starts = np.concatenate([theta.x, theta.x - scale])
    starts = starts[(starts >= lo - scale) & (starts <= hi)]
    best = 0.0
    for c in np.unique(starts):
        d = c + scale
        i0 = np.searchsorted(X, c, side="left")
        i1 = np.searchsorted(X, d, side="right")
        vals = list(T[i0:i1])
        for e in (c, d):
            k = np.searchsorted(ux, e)
            if k < ux.size and ux[k] == e:
                continue
            # strictly between ux[k-1] and ux[k]
            if 0 < k < ux.size:
                x0, x1 = ux[k - 1], ux[k]
                t0, t1 = T[last[k - 1]], T[first[k]]
                vals.append(t0 + (t1 - t0) * (e - x0) / (x1 - x0))
        if vals:
            best = max(best, max(vals) - min(vals))
    return float(best)


def _atoms(p: Profile):
    """Ordered atoms: ('pt', x, jump_sign) and ('seg', x0, x1, slope_sign)."""
    x, ul, ur = p.x, p.ul, p.ur
    n = x.size
    atoms = []
    if not p.domain.periodic:
        atoms.append(("seg", -np.inf, x[0], 0))
    for i in range(n):
        atoms.append(("pt", x[i], int(np.sign(ur[i] - ul[i]))))
        if i < n - 1:
            x1, v1 = x[i + 1], ul[i + 1]
        elif p.domain.periodic:
            x1, v1 = x[0] + p.domain.period, ul[0]
        else:
            atoms.append(("seg", x[i], np.inf, 0))
            break
        atoms.append(("seg", x[i], x1, int(np.sign(v1 - ur[i]))))
    return atoms


def _atom_theta(atom):
    s = atom[-1]
    return None if s == 0 else (1.0 if s > 0 else 0.0)


def reconstruct_theta(p: Profile, plateaus: Iterable = (), tol: float = 1e-9) -> ThetaField:
    """Switch field paired with ``p``.

    theta is 1 where p increases (or jumps up), 0 where it decreases (or
    jumps down), affine across each declared plateau ``(a, b)`` joining the
    flank values, and equal to the common flank value on other constant
    stretches.
    """
    atoms = _atoms(p)
    n = len(atoms)
    periodic = p.domain.periodic
    L = p.domain.length
    theta_of = [_atom_theta(a) if (a[0] == "seg" and a[-1] != 0) or
                (a[0] == "pt" and a[-1] != 0) else None for a in atoms]
    determined = [t is not None for t in theta_of]
    plateaus = [tuple(map(float, pl[:2])) for pl in plateaus]
    used = [False] * len(plateaus)
    for pa, pb in plateaus:
        if not pb > pa:
            raise InconsistentPlateau(f"plateau ({pa}, {pb}) has no positive width")
        nodes = np.concatenate([p.x - L, p.x, p.x + L]) if periodic else p.x
        pad = tol * max(1.0, L)
        inner = nodes[(nodes > pa + pad) & (nodes < pb - pad)]
        left, right = p.limits(np.concatenate([[pa + pad], inner, [pb - pad]]))
        vals = np.concatenate([left, right])
        if np.ptp(vals) > tol * max(1.0, float(np.max(np.abs(vals)))):
            raise InconsistentPlateau(f"p is not constant on the plateau ({pa}, {pb})")

    if not any(determined):
        for pl in plateaus:
            raise InconsistentPlateau(f"plateau {pl} declared on a profile with no flanks")
        return ThetaField.constant(p.domain, 1.0)

    # constant stretches: maximal runs of undetermined atoms
    if periodic:
        start = next(i for i in range(n) if determined[i])
        order = [(start + k) % n for k in range(n)]
    else:
        order = list(range(n))
    # per-atom affine description: (theta at left end, theta at right end)
    desc = [None] * n
    k = 0
    while k < n:
        i = order[k]
        if determined[i]:
            t = theta_of[i]
            desc[i] = (t, t)
            k += 1
            continue
        run = []
        while k < n and not determined[order[k]]:
            run.append(order[k])
            k += 1
        left_nb = order[(order.index(run[0]) - 1)] if periodic or order.index(run[0]) > 0 else None
        right_idx = order.index(run[-1]) + 1
        if periodic:
            right_nb = order[right_idx % n]
        else:
            right_nb = order[right_idx] if right_idx < n else None
        tl = theta_of[left_nb] if left_nb is not None else None
        tr = theta_of[right_nb] if right_nb is not None else None
        # geometric extent of the stretch (unwrapped)
        xs = []
        for j in run:
            a = atoms[j]
            xs.extend([a[1], a[2]] if a[0] == "seg" else [a[1]])
        a_st, b_st = xs[0], xs[-1]
        if periodic and b_st < a_st:
            b_st += L
        match = None
        for m, (pa, pb) in enumerate(plateaus):
            if _same_interval(pa, pb, a_st, b_st, L if periodic else None, tol):
                match = m
        if match is not None:
            used[match] = True
            if tl is None or tr is None or tl == tr:
                raise InconsistentPlateau(
                    f"plateau {plateaus[match]} is not a local extremum of the profile")
            _fill_ramp(desc, atoms, run, a_st, b_st, tl, tr, L if periodic else None)
        elif b_st == a_st and tl is not None and tr is not None:
            # corner extremum without a jump: theta switches at a point
            for j in run:
                desc[j] = (tl, tr)
        else:
            if tl is None and tr is None:
                t = 1.0
            elif tl is None or tr is None:
                t = tl if tl is not None else tr
            elif tl == tr:
                t = tl
            else:
                raise AmbiguousTheta(
                    f"constant stretch [{a_st:.6g}, {b_st:.6g}] has flanks {tl}/{tr} "
                    "and no plateau declared")
            for j in run:
                desc[j] = (t, t)
    for m, ok in enumerate(used):
        if not ok:
            raise InconsistentPlateau(f"declared plateau {plateaus[m]} is not a constant stretch of p")
    return _assemble_theta(p, atoms, desc)


def _same_interval(pa, pb, a, b, period, tol):
    if period is None:
        return abs(pa - a) <= tol and abs(pb - b) <= tol
    w1, w2 = pb - pa, b - a
    if abs(w1 - w2) > tol:
        return False
    d = (pa - a) % period
    return min(d, period - d) <= tol


def _fill_ramp(desc, atoms, run, a, b, tl, tr, period):
    width = b - a

    def th(x):
        if period is not None and x < a - 1e-12:
            x += period
        return tl + (tr - tl) * (x - a) / width

    for j in run:
        at = atoms[j]
        if at[0] == "seg":
            desc[j] = (th(at[1]), th(at[2]))
        else:
            t = th(at[1])
            desc[j] = (t, t)


def _assemble_theta(p, atoms, desc):
    xs, ts = [], []
    for at, d in zip(atoms, desc):
        if at[0] == "pt":
            xs.extend([at[1], at[1]])
            ts.extend([d[0], d[1]])
        else:
            for x, t in ((at[1], d[0]), (at[2], d[1])):
                if np.isfinite(x):
                    xs.append(x)
                    ts.append(t)
    xs = np.array(xs)
    ts = np.array(ts)
    if p.domain.periodic:
        L = p.domain.period
        xs = np.where(xs >= L, xs - L, xs)
        # undo rounding from the wrap shift so shared nodes compare equal
        k = np.clip(np.searchsorted(p.x, xs), 0, p.x.size - 1)
        for kk in (k, np.maximum(k - 1, 0)):
            close = np.abs(p.x[kk] - xs) <= 1e-12 * L
            xs = np.where(close, p.x[kk], xs)
        # entries at x == L (wrapped to 0) must precede entries already at 0
        wrapped = np.array([at_x >= L for at_x in _raw_x(atoms)])
        xs, ts = _periodic_sort(xs, ts, wrapped)
    keep = np.ones(xs.size, bool)
    for k in range(1, xs.size):
        if xs[k] == xs[k - 1] and ts[k] == ts[k - 1]:
            keep[k] = False
    return ThetaField(p.domain, xs[keep], ts[keep])


def _raw_x(atoms):
    out = []
    for at in atoms:
        if at[0] == "pt":
            out.extend([at[1], at[1]])
        else:
            for x in (at[1], at[2]):
                if np.isfinite(x):
                    out.append(x)
    return out


def _periodic_sort(xs, ts, wrapped):
    # rotate so that the wrapped tail comes first; order is otherwise preserved
    idx = np.arange(xs.size)
    key = np.where(wrapped, -1, 0)
    order = np.lexsort((idx, key))
    xs, ts = xs[order], ts[order]
    order = np.argsort(xs, kind="stable")
    return xs[order], ts[order]


# ----------------------------------------------------------------------
# CSV snapshots


def _rows(p: Profile, theta: Optional[ThetaField]):
    X = np.unique(np.concatenate([p.x, theta.x if theta is not None else []]))
    if not p.domain.periodic:
        X = X[(X >= p.domain.lo) & (X <= p.domain.hi)]
    UL, UR = p.limits(X)
    rows = []
    for k, x in enumerate(X):
        if theta is None:
            tl = tp = tr = float("nan")
        else:
            tl, tp, tr = _theta_at(theta, x)
        group = [(x, UL[k], tl)]
        if tp != tl and tp != tr:
            group.append((x, UL[k], tp))
        if UR[k] != UL[k] or tr != tl:
            group.append((x, UR[k], tr))
        rows.extend(group)
    return rows


def _theta_at(theta: ThetaField, x):
    """(left limit, point value, right limit) of theta at x."""
    X, T = theta._extended()
    i0 = np.searchsorted(X, x, side="left")
    i1 = np.searchsorted(X, x, side="right")
    vals = T[i0:i1]
    if vals.size == 0:
        v = float(np.interp(x, X, T))
        return v, v, v
    mid = vals[1] if vals.size >= 3 else vals[0]
    return float(vals[0]), float(mid), float(vals[-1])


def write_snapshot_csv(path_or_buf, p: Profile, theta: Optional[ThetaField] = None):
    own = isinstance(path_or_buf, (str, bytes)) or hasattr(path_or_buf, "__fspath__")
    fh = open(path_or_buf, "w", newline="") if own else path_or_buf
    try:
        w = csv.writer(fh)
        w.writerow(["x", "u", "theta"])
        for x, u, t in _rows(p, theta):
            w.writerow([repr(float(x)), repr(float(u)), repr(float(t))])
    finally:
        if own:
            fh.close()


def read_snapshot_csv(path_or_buf, domain):
    """Parse a snapshot CSV into ``(Profile, ThetaField)``."""
    own = isinstance(path_or_buf, (str, bytes)) or hasattr(path_or_buf, "__fspath__")
    fh = open(path_or_buf, newline="") if own else path_or_buf
    try:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != ["x", "u", "theta"]:
            raise ParseError(f"bad snapshot header {header!r}", line=1)
        rows = []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 3:
                raise ParseError(f"expected 3 fields, got {len(row)}", line=lineno)
            try:
                rows.append(tuple(float(v) for v in row))
            except ValueError:
                raise ParseError(f"non-numeric field in {row!r}", line=lineno) from None
    finally:
        if own:
            fh.close()
    if not rows:
        raise ParseError("snapshot has no rows")
    xs, ul, ur, tx, tt = [], [], [], [], []
    k = 0
    while k < len(rows):
        x = rows[k][0]
        group = [rows[k]]
        k += 1
        while k < len(rows) and rows[k][0] == x:
            group.append(rows[k])
            k += 1
        xs.append(x)
        ul.append(group[0][1])
        ur.append(group[-1][1])
        for g in group:
            tx.append(x)
            tt.append(g[2])
    p = Profile(domain, xs, ul, ur)
    tt = np.array(tt)
    theta = None if np.all(np.isnan(tt)) else ThetaField(domain, tx, tt)
    return p, theta


def snapshot_csv_text(p: Profile, theta: Optional[ThetaField] = None) -> str:
    buf = io.StringIO()
    write_snapshot_csv(buf, p, theta)
    return buf.getvalue()
