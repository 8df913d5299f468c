"""Front tracking for the switched-flux law.

A state is a list of front positions ``x`` and the constant values ``v`` of
the pieces between them.  Piece ``i`` lies left of front ``i``.  On a
bounded domain there are ``n + 1`` pieces and the two end pieces extend to
infinity; on a periodic domain there are ``n`` pieces and piece 0 wraps
around (it sits between the last front, shifted by -L, and front 0).

Upward fronts move with the chord speed of ``f``, downward fronts with that
of ``g``.  Every finite piece that is a local extremum is a plateau whose
level moves at (f - g)/width (max) or (g - f)/width (min).  Front positions
and plateau masses are integrated together with RK4.  The mass is a linear
function of that state and its time derivative vanishes identically, so RK4
conserves it to rounding.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import List, Optional, Sequence

import numpy as np
from scipy.optimize import brentq

from .errors import EventOverflow, PreconditionViolation, ZeroWidth
from .flux import FluxPair
from .profile import Profile, ThetaField, reconstruct_theta
from .riemann import discrete_fan, interpolant_admissible
from .trajectory import Trajectory

log = logging.getLogger(__name__)

MAX_EVENTS = 10_000_000
LEVEL_CAP = 0.5   # a plateau level moves at most LEVEL_CAP * h per step
WIDTH_CAP = 0.25  # a plateau width changes by at most this fraction per step
REL_TOL = 1e-12   # event tolerance, relative to the length / value scale


@dataclass(frozen=True)
class Front:
    x: float
    u_left: float
    u_right: float
    branch: str  # "f" for upward jumps, "g" for downward ones
    speed: float


@dataclass(frozen=True)
class Plateau:
    a: float
    b: float
    level: float
    orientation: str  # "max" (theta 1 -> 0) or "min" (theta 0 -> 1)


def plateau_rate(fp: FluxPair, level: float, a: float, b: float, orientation: str) -> float:
    """d(level)/dt of a plateau occupying [a, b]."""
    if not b > a:
        raise ZeroWidth(f"plateau [{a}, {b}] has no width")
    d = float(fp.f(level) - fp.g(level))
    if orientation == "max":
        return d / (b - a)
    if orientation == "min":
        return -d / (b - a)
    raise ValueError(f"orientation must be 'max' or 'min', got {orientation!r}")


# ----------------------------------------------------------------------
# state


@dataclass
class FrontState:
    domain: object
    h: float
    x: np.ndarray
    v: np.ndarray
    t: float = 0.0
    frozen_levels: bool = False  # extremum levels held fixed (single-branch control)
    tv_mark: Optional[float] = None  # total variation at the last logged event

    def __post_init__(self):
        self.x = np.asarray(self.x, dtype=float)
        self.v = np.asarray(self.v, dtype=float)
        n = self.x.size
        expect = max(n, 1) if self.domain.periodic else n + 1
        if self.v.size != expect:
            raise ValueError(f"{n} fronts need {expect} pieces, got {self.v.size}")
        if self.tv_mark is None:
            self.tv_mark = self.total_variation()

    def copy(self) -> "FrontState":
        return FrontState(self.domain, self.h, self.x.copy(), self.v.copy(), self.t,
                          self.frozen_levels, self.tv_mark)

    @property
    def n(self) -> int:
        return self.x.size

    @property
    def periodic(self) -> bool:
        return self.domain.periodic

    def states(self):
        """(u_left, u_right) of every front."""
        return _front_states(self.v, self.periodic, self.n)

    def widths(self, x=None):
        return _widths(self.x if x is None else x, self.periodic, self.domain.length)

    def kinds(self):
        """Per piece: +1 local max, -1 local min, 0 monotone."""
        return _kinds(self.v, self.periodic)

    def plateau_mask(self):
        if self.frozen_levels or self.n == 0:
            return np.zeros(self.v.size, bool)
        return (self.kinds() != 0) & np.isfinite(self.widths())

    def total_variation(self) -> float:
        ul, ur = self.states()
        return float(np.sum(np.abs(ur - ul)))

    def mass(self) -> float:
        """Integral of u over the finite pieces (one period when periodic)."""
        if self.n == 0:
            return float(self.v[0] * self.domain.length) if self.periodic else 0.0
        w = self.widths()
        fin = np.isfinite(w)
        return float(np.sum(self.v[fin] * w[fin]))

    def fronts(self, fp: FluxPair) -> List[Front]:
        ul, ur = self.states()
        sp = _speeds(ul, ur, fp)
        return [Front(float(x), float(a), float(b), "f" if b > a else "g", float(s))
                for x, a, b, s in zip(self.x, ul, ur, sp)]

    def plateaus(self) -> List[Plateau]:
        if self.n == 0 or self.frozen_levels:
            return []
        kinds = self.kinds()
        w = self.widths()
        out = []
        for i in np.flatnonzero((kinds != 0) & np.isfinite(w)):
            a, b = _piece_bounds(self.x, int(i), self.periodic, self.domain.length)
            out.append(Plateau(a, b, float(self.v[i]), "max" if kinds[i] > 0 else "min"))
        return out


def _next(a):
    """Cyclic shift: element i of the result is a[i + 1]."""
    return np.concatenate((a[1:], a[:1]))


def _prev(a):
    """Cyclic shift: element i of the result is a[i - 1]."""
    return np.concatenate((a[-1:], a[:-1]))


def _front_states(v, periodic, n):
    if n == 0:
        return np.empty(0), np.empty(0)
    if periodic:
        return v, _next(v)
    return v[:-1], v[1:]


def _widths(x, periodic, L):
    n = x.size
    if n == 0:
        return np.array([L if periodic else np.inf])
    if periodic:
        w = x - _prev(x)
        w[0] += L
        return w
    w = np.empty(n + 1)
    w[0] = w[-1] = np.inf
    w[1:-1] = np.diff(x)
    return w


def _kinds(v, periodic):
    if v.size == 1:
        return np.zeros(1, int)
    if periodic:
        left, right = _prev(v), _next(v)
    else:
        left = np.concatenate([[v[1]], v[:-1]])
        right = np.concatenate([v[1:], [v[-2]]])
    return np.where((v > left) & (v > right), 1, np.where((v < left) & (v < right), -1, 0))


def _piece_bounds(x, i, periodic, L):
    if periodic:
        return (float(x[-1] - L) if i == 0 else float(x[i - 1])), float(x[i])
    a = -np.inf if i == 0 else float(x[i - 1])
    b = np.inf if i == x.size else float(x[i])
    return a, b


def _speeds(ul, ur, fp: FluxPair):
    """Chord speed of the branch flux; its derivative when the states coincide."""
    d = ur - ul
    up = d > 0
    n = ul.size
    both = np.concatenate((ul, ur))
    fv, gv = fp.f(both), fp.g(both)
    num = np.where(up, fv[n:] - fv[:n], gv[n:] - gv[:n])
    tiny = np.abs(d) <= 1e-13 * np.maximum(1.0, np.abs(ul))
    s = num / np.where(tiny, 1.0, d)
    if np.any(tiny):
        mid = 0.5 * (ul + ur)
        s = np.where(tiny, np.where(up, fp.f.d1(mid), fp.g.d1(mid)), s)
    return s


# ----------------------------------------------------------------------
# structural edits on (positions, value right of each front)


def _to_pairs(s: FrontState):
    """Front positions, value left of the first front, values right of each front."""
    xs = [float(x) for x in s.x]
    rs = [float(r) for r in (np.roll(s.v, -1) if s.periodic else s.v[1:])] if s.n else []
    return xs, float(s.v[0]), rs


def _from_pairs(s: FrontState, xs, left, rs):
    if s.periodic:
        if len(xs) <= 1:
            # a single front on a circle joins a piece to itself
            s.x, s.v = np.empty(0), np.array([rs[0] if rs else left], float)
            return
        s.x = np.array(xs, float)
        s.v = np.roll(np.array(rs, float), 1)
        _normalize(s)
    else:
        s.x = np.array(xs, float)
        s.v = np.array([left] + list(rs), float)


def _normalize(s: FrontState):
    """Rotate periodic fronts so that positions lie in [lo, lo + L)."""
    if not s.periodic or s.n == 0:
        return
    L, lo = s.domain.length, s.domain.lo
    x, v = s.x, s.v
    top = np.nextafter(lo + L, -np.inf)
    for _ in range(2 * x.size):
        if x[-1] >= lo + L:
            x = np.concatenate([[max(x[-1] - L, lo)], x[:-1]])
            v = np.roll(v, 1)
        elif x[0] < lo:
            x = np.concatenate([x[1:], [min(x[0] + L, top)]])
            v = np.roll(v, -1)
        else:
            break
    s.x, s.v = x, v


def _merge_value(va, wa, vb, wb):
    """Mass-weighted value of two merged pieces; an infinite piece keeps its value."""
    if np.isinf(wa):
        return va
    if np.isinf(wb):
        return vb
    if wa + wb <= 0:
        return 0.5 * (va + vb)
    return (va * wa + vb * wb) / (wa + wb)


def _drop_fronts(s: FrontState, k: int, l: int, val: float):
    """Delete fronts k..l and give the joined piece the value ``val``."""
    xs, left, rs = _to_pairs(s)
    del xs[k:l + 1]
    del rs[k:l + 1]
    if k > 0:
        rs[k - 1] = val
    elif s.periodic and rs:
        rs[-1] = val
    else:
        left = val
    if s.periodic and rs:
        left = rs[-1]
    _from_pairs(s, xs, left, rs)


def _remove_front(s: FrontState, k: int):
    """Delete front k, merging the pieces on either side of it."""
    w = s.widths()
    il, ir = k, ((k + 1) % s.n if s.periodic else k + 1)
    _drop_fronts(s, k, k, _merge_value(s.v[il], w[il], s.v[ir], w[ir]))


def _replace_cluster(s: FrontState, k: int, l: int, fp: FluxPair, xc: float):
    """Replace fronts k..l (contiguous, not wrapping) by the fan of their outer states."""
    xs, left, rs = _to_pairs(s)
    a = left if k == 0 else rs[k - 1]
    b = rs[l]
    if a == b:
        # equal outer states: the fronts cancel and the outer pieces join
        w = s.widths()
        ir = (l + 1) % s.v.size if s.periodic else l + 1
        _drop_fronts(s, k, l, _merge_value(s.v[k], w[k], s.v[ir], w[ir]))
        return
    fan = discrete_fan(a, b, fp.branch(b > a), s.h)
    xs[k:l + 1] = [xc] * len(fan)
    rs[k:l + 1] = [ub for _, _, ub in fan]
    if s.periodic:
        left = rs[-1]
    _from_pairs(s, xs, left, rs)


def _rotate_to(s: FrontState, k: int):
    """Periodic relabelling that makes front k the first one (positions unwrapped)."""
    if k == 0:
        return
    L = s.domain.length
    xs, _, rs = _to_pairs(s)
    xs = xs[k:] + [x + L for x in xs[:k]]
    rs = rs[k:] + rs[:k]
    s.x = np.array(xs, float)
    s.v = np.roll(np.array(rs, float), 1)


# ----------------------------------------------------------------------
# initial data


class _Quantizer:
    """Nearest-point map onto hZ plus a few exact extra levels (monotone)."""

    def __init__(self, h, extra=()):
        self.h = h
        self.extra = np.unique(np.asarray(list(extra), float))

    def __call__(self, u):
        q = self.h * round(u / self.h)
        if self.extra.size:
            k = int(np.argmin(np.abs(self.extra - u)))
            e = float(self.extra[k])
            if abs(e - u) < abs(q - u) or (abs(e - u) == abs(q - u) and e < q):
                q = e
        return q

    def levels_between(self, lo, hi):
        """Sorted levels in [lo, hi] (both ends included)."""
        h = self.h
        gap = 1e-9 * h
        grid = [h * k for k in range(math.floor(lo / h), math.ceil(hi / h) + 1)
                if lo + gap < h * k < hi - gap]
        ex = [float(e) for e in self.extra if lo < e < hi]
        inner = sorted(set(grid) | set(ex))
        return [lo] + inner + [hi]


def _quantize_segment(xa, ua, xb, ub, q: _Quantizer):
    """Staircase approximation of the affine piece from (xa, ua) to (xb, ub).

    Each switch sits where the affine function crosses the mean of two
    consecutive quantization levels.
    """
    sa, sb = q(ua), q(ub)
    if sa == sb:
        return [(xa, sa)]
    levels = q.levels_between(min(sa, sb), max(sa, sb))
    if sb < sa:
        levels.reverse()
    pieces = [(xa, levels[0])]
    for lo, hi in zip(levels[:-1], levels[1:]):
        r = (0.5 * (lo + hi) - ua) / (ub - ua)
        pieces.append((xa + min(max(r, 0.0), 1.0) * (xb - xa), hi))
    return pieces


def _staircase(p0: Profile, h):
    """Piecewise-constant approximation of ``p0`` as a list of (start, value).

    Bounded data starts with a piece at -inf.  Constant pieces of ``p0`` keep
    their exact values, and an affine piece joining a constant one
    continuously may use that value as a level, so no spurious step appears
    at the junction.
    """
    x, ul, ur = p0.x, p0.ul, p0.ur
    n = x.size
    periodic = p0.domain.periodic
    L = p0.domain.length
    segs = []
    for k in range(n):
        if k + 1 < n:
            segs.append((x[k], ur[k], x[k + 1], ul[k + 1]))
        elif periodic:
            segs.append((x[k], ur[k], x[0] + L, ul[0]))
    const = [a == b for (_, a, _, b) in segs]
    # constant levels reached continuously from an affine piece
    extra = set()
    cont = ul == ur
    for k, c in enumerate(const):
        if c:
            continue
        before = const[k - 1] if (k > 0 or periodic) else True
        after = const[(k + 1) % len(segs)] if (k + 1 < len(segs) or periodic) else True
        if before and cont[k]:
            extra.add(float(ur[k]))
        if after and cont[(k + 1) % n]:
            extra.add(float(ul[(k + 1) % n]))
    q = _Quantizer(h, extra)
    out = [] if periodic else [(-np.inf, ul[0])]
    for k, (xa, ua, xb, ub) in enumerate(segs):
        if const[k]:
            out.append((xa, ua))
        else:
            out.extend(_quantize_segment(xa, ua, xb, ub, q))
    if not periodic:
        out.append((x[-1], ur[-1]))
    clean = []
    for k, (xs, val) in enumerate(out):
        nxt = out[k + 1][0] if k + 1 < len(out) else (out[0][0] + L if periodic else np.inf)
        if nxt <= xs:
            continue
        if clean and clean[-1][1] == val:
            continue
        clean.append((xs, val))
    if periodic and len(clean) > 1 and clean[0][1] == clean[-1][1]:
        # the last piece continues across the wrap
        clean.pop(0)
    return clean


def init_fronts(p0: Profile, fp: FluxPair, h: float, frozen_levels: bool = False) -> FrontState:
    """Quantize ``p0`` on the value grid hZ and resolve each jump into fronts.

    Constant data gives the trivial state with no fronts.
    """
    if not h > 0:
        raise ValueError("h must be positive")
    dom = p0.domain
    pieces = _staircase(p0, h)
    s = FrontState(dom, h, np.empty(0), np.array([pieces[0][1]]), 0.0, frozen_levels)
    if len(pieces) == 1:
        return s
    xs, rs = [], []
    prev = pieces[-1][1] if dom.periodic else pieces[0][1]
    for x0, val in (pieces if dom.periodic else pieces[1:]):
        for _, _, ub in discrete_fan(prev, val, fp.branch(val > prev), h):
            xs.append(float(x0))
            rs.append(float(ub))
        prev = val
    _from_pairs(s, xs, rs[-1] if dom.periodic else pieces[0][1], rs)
    s.tv_mark = s.total_variation()
    return s


# ----------------------------------------------------------------------
# dynamics


class _Stepper:
    """RK4 map of (front positions, plateau masses) over a step of length tau."""

    def __init__(self, s: FrontState, fp: FluxPair):
        self.s = s
        self.fp = fp
        self.L = s.domain.length
        self.P = np.flatnonzero(s.plateau_mask())
        self.sigma = s.kinds()[self.P].astype(float)
        self.m0 = s.v[self.P] * s.widths()[self.P]

    def values(self, x, m):
        if not self.P.size:
            return self.s.v
        w = _widths(x, self.s.periodic, self.L)[self.P]
        if np.any(w <= 0):
            return None
        v = self.s.v.copy()
        v[self.P] = m / w
        return v

    def rates(self, x, m):
        v = self.values(x, m)
        if v is None:
            return None
        ul, ur = _front_states(v, self.s.periodic, self.s.n)
        xd = _speeds(ul, ur, self.fp)
        if not self.P.size:
            return xd, np.empty(0)
        wd = _widths(xd, self.s.periodic, 0.0)[self.P]
        vp = v[self.P]
        return xd, vp * wd + self.sigma * (self.fp.f(vp) - self.fp.g(vp))

    def step(self, tau):
        x0, m0 = self.s.x, self.m0
        k1 = self.rates(x0, m0)
        k2 = k1 and self.rates(x0 + 0.5 * tau * k1[0], m0 + 0.5 * tau * k1[1])
        k3 = k2 and self.rates(x0 + 0.5 * tau * k2[0], m0 + 0.5 * tau * k2[1])
        k4 = k3 and self.rates(x0 + tau * k3[0], m0 + tau * k3[1])
        if k4 is None:
            return None
        x1 = x0 + tau / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0])
        m1 = m0 + tau / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1])
        v1 = self.values(x1, m1)
        if v1 is None:
            return None
        return x1, v1


def _scales(s: FrontState):
    return max(1.0, s.domain.length), max(1.0, float(np.max(np.abs(s.v))))


def _watch(s: FrontState):
    """Pieces whose width must stay positive and plateau/neighbour pairs whose gap must."""
    xs, _ = _scales(s)
    w = s.widths()
    watch_w = np.flatnonzero(np.isfinite(w) & (w > REL_TOL * xs))
    pairs = []
    m = s.v.size
    if not s.frozen_levels and s.n:
        kinds = s.kinds()
        for i in np.flatnonzero((kinds != 0) & np.isfinite(w)):
            for j in (i - 1, i + 1):
                if s.periodic:
                    pairs.append((i, j % m, kinds[i]))
                elif 0 <= j < m:
                    pairs.append((i, j, kinds[i]))
    return watch_w, np.array(pairs, dtype=int).reshape(-1, 3)


def _margin(s: FrontState, out, watch_w, watch_a):
    """Smallest normalized distance to an event; negative once one is passed."""
    if out is None:
        return -1.0
    x1, v1 = out
    xs, vs = _scales(s)
    c = np.inf
    if watch_w.size:
        c = min(c, float(np.min(_widths(x1, s.periodic, s.domain.length)[watch_w])) / xs)
    if watch_a.size:
        i, j, sig = watch_a[:, 0], watch_a[:, 1], watch_a[:, 2]
        c = min(c, float(np.min(sig * (v1[i] - v1[j]))) / vs)
    return c


def _step_length(s: FrontState, st: _Stepper, dt):
    r = st.rates(s.x, st.m0)
    if r is None:
        return 0.0
    xd, md = r
    w = s.widths()
    wdot = _widths(xd, s.periodic, 0.0)
    cap = dt
    if st.P.size:
        wp, wd = w[st.P], wdot[st.P]
        vd = (md - s.v[st.P] * wd) / wp
        with np.errstate(divide="ignore"):
            cap = min(cap, float(np.min(LEVEL_CAP * s.h / np.abs(vd))),
                      float(np.min(WIDTH_CAP * wp / np.abs(wd))))
    # linear forecast of the next collision; aim a little past it so that the
    # trial step brackets it
    closing = np.isfinite(w) & (wdot < 0) & (w > 0)
    if np.any(closing):
        cap = min(cap, 1.05 * float(np.min(w[closing] / -wdot[closing])))
    return cap


def _event(s: FrontState, kind, position):
    tv = s.total_variation()
    ev = {"t": float(s.t), "kind": kind, "position": float(position),
          "tv_before": float(s.tv_mark), "tv_after": tv}
    s.tv_mark = tv
    return ev


def _collision_cluster(s: FrontState, fp: FluxPair):
    """First maximal run of coincident fronts that contains a closing piece.

    Returns (k, l, wraps) or None.
    """
    n = s.n
    if n < 2:
        return None
    xs, _ = _scales(s)
    wtol = REL_TOL * xs
    w = s.widths()
    ul, ur = s.states()
    wdot = _widths(_speeds(ul, ur, fp), s.periodic, 0.0)
    # piece i sits between fronts i-1 and i; record the left front of each
    # zero-width piece
    idx = range(n) if s.periodic else range(1, n)
    zero = {(i - 1) % n for i in idx if w[i] <= wtol}
    closing = [(i - 1) % n for i in idx if w[i] <= wtol and wdot[i] <= 0]
    if not closing:
        return None
    if s.periodic and len(zero) == n:
        return 0, n - 1, False
    start = min(closing)
    k = start
    for _ in range(n):
        prev = (k - 1) % n if s.periodic else k - 1
        if prev not in zero:
            break
        k = prev
    l = start
    while l in zero:
        l = (l + 1) % n if s.periodic else l + 1
    return k, l, l < k


def _wrap(s: FrontState, x):
    if s.periodic:
        return s.domain.lo + (x - s.domain.lo) % s.domain.length
    return x


def _absorb_one(s: FrontState, events, vs):
    """Remove the first front whose strength has vanished.

    This happens when a plateau level reaches a neighbouring state.  The
    event is an absorption when the joined piece is still an extremum and a
    merge (a max and a min plateau meeting) when it is not.
    """
    if s.frozen_levels or s.n == 0:
        return False
    ul, ur = s.states()
    weak = np.flatnonzero(np.abs(ur - ul) <= REL_TOL * vs)
    if not weak.size:
        return False
    k = int(weak[0])
    pos = float(s.x[k])
    kind = _join_kind(s, k, REL_TOL * vs)
    _remove_front(s, k)
    events.append(_event(s, kind, pos))
    return True


def _join_kind(s: FrontState, k: int, vtol: float) -> str:
    """'absorption' if removing front k leaves an extremum piece, else 'merge'.

    The joined piece is the maximal run of (numerically) equal pieces around
    front k, so fronts vanishing at the same instant are judged together.
    """
    m = s.v.size
    val = 0.5 * (s.v[k] + s.v[(k + 1) % m])
    same = np.abs(s.v - val) <= vtol
    if s.periodic:
        if same.all():
            return "merge"
        lo_i = k
        while same[lo_i % m]:
            lo_i -= 1
        hi_i = k + 1
        while same[hi_i % m]:
            hi_i += 1
        lo, hi = s.v[lo_i % m], s.v[hi_i % m]
    else:
        lo_i = k
        while lo_i >= 0 and same[lo_i]:
            lo_i -= 1
        hi_i = k + 1
        while hi_i < m and same[hi_i]:
            hi_i += 1
        if lo_i < 0 or hi_i >= m:
            return "absorption"  # joins an end piece
        lo, hi = s.v[lo_i], s.v[hi_i]
    return "absorption" if (lo - val) * (hi - val) > 0 else "merge"


def _split_one(s: FrontState, fp: FluxPair):
    """Re-solve a plateau-adjacent front that is no longer admissible."""
    if s.frozen_levels or s.n == 0:
        return False
    mask = s.plateau_mask()
    if not mask.any():
        return False
    ul, ur = s.states()
    m = s.v.size
    for k in range(s.n):
        right_piece = (k + 1) % m if s.periodic else k + 1
        if not (mask[k] or mask[right_piece]):
            continue
        a, b = ul[k], ur[k]
        if interpolant_admissible(a, b, fp.branch(b > a), s.h):
            continue
        _replace_cluster(s, k, k, fp, float(s.x[k]))
        _normalize(s)
        return True
    return False


def _resolve(s: FrontState, fp: FluxPair, events: list):
    """Process every interaction pending at the current time."""
    for _ in range(10 * (s.n + 10)):
        if s.n == 0:
            return
        _, vs = _scales(s)
        cl = _collision_cluster(s, fp)
        if cl is not None:
            k, l, wraps = cl
            if wraps:
                _rotate_to(s, k)
                l = (l - k) % s.n
                k = 0
            pos = float(np.mean(s.x[k:l + 1]))
            _replace_cluster(s, k, l, fp, pos)
            _normalize(s)
            events.append(_event(s, "collision", _wrap(s, pos)))
            continue
        if _absorb_one(s, events, vs):
            continue
        if _split_one(s, fp):
            continue
        return
    raise EventOverflow(f"interactions at t={s.t} did not settle")


def advance(s: FrontState, fp: FluxPair, dt_max: float) -> list:
    """Advance ``s`` in place by at most ``dt_max``, stopping at the first interaction.

    Returns the events processed at the end of the step.
    """
    events: list = []
    if dt_max <= 0:
        return events
    if s.n == 0:
        s.t += dt_max
        return events
    st = _Stepper(s, fp)
    dt = _step_length(s, st, dt_max)
    watch_w, watch_a = _watch(s)
    out = st.step(dt)
    if _margin(s, out, watch_w, watch_a) <= 0:
        def phi(tau):
            return _margin(s, st.step(tau), watch_w, watch_a)

        r = brentq(phi, 0.0, dt, xtol=1e-15, rtol=4 * np.finfo(float).eps)
        # land on or just past the event so that it is detected below
        tau = r
        for k in range(60):
            if tau >= dt or phi(tau) <= 0.5 * REL_TOL:
                break
            tau = min(dt, tau + max(tau * 1e-15, 1e-16) * 2.0 ** k)
        out = st.step(tau)
        if out is None:
            tau = r
            out = st.step(tau)
        dt = tau
    s.x, s.v = out
    s.t = s.t + dt if dt < dt_max else s.t + dt_max
    _normalize(s)
    _resolve(s, fp, events)
    return events


# ----------------------------------------------------------------------
# snapshots and runs


def snapshot_to_profile(s: FrontState) -> Profile:
    """Piecewise-constant profile of a state; coincident fronts share one node."""
    dom = s.domain
    if s.n == 0:
        return Profile.constant(dom, float(s.v[0]))
    ul, ur = s.states()
    xs, ls, rs = [], [], []
    for x, a, b in zip(s.x, ul, ur):
        if xs and x <= xs[-1]:
            rs[-1] = float(b)
            continue
        xs.append(float(x))
        ls.append(float(a))
        rs.append(float(b))
    keep = [i for i in range(len(xs)) if ls[i] != rs[i]]
    if not keep:
        return Profile.constant(dom, ls[0])
    return Profile(dom, np.array(xs)[keep], np.array(ls)[keep], np.array(rs)[keep])


def embedded_theta(p: Profile) -> ThetaField:
    """theta = 1 everywhere except the point value 0 at each downward jump."""
    down = p.x[p.ur < p.ul]
    if down.size == 0:
        return ThetaField.constant(p.domain, 1.0)
    return ThetaField(p.domain, np.repeat(down, 3), np.tile([1.0, 0.0, 1.0], down.size))


def snapshot_theta(s: FrontState, p: Optional[Profile] = None) -> ThetaField:
    p = snapshot_to_profile(s) if p is None else p
    if s.frozen_levels:
        return embedded_theta(p)
    return reconstruct_theta(p, [(pl.a, pl.b) for pl in s.plateaus()])


def _output_times(t_end, snapshot_times):
    ts = {0.0, float(t_end)}
    if snapshot_times is not None:
        ts.update(float(t) for t in snapshot_times if 0.0 <= t <= t_end)
    return sorted(ts)


def _close_to(a, b):
    return abs(a - b) <= 1e-15 * max(1.0, abs(b))


def advance_to(s: FrontState, fp: FluxPair, target: float) -> list:
    """Advance ``s`` in place to exactly ``target``; returns the events."""
    events = []
    count = 0
    while s.t < target:
        ev = advance(s, fp, target - s.t)
        if _close_to(s.t, target):
            s.t = target
        events.extend(ev)
        count += max(1, len(ev))
        if count > MAX_EVENTS:
            raise EventOverflow(f"more than {MAX_EVENTS} steps before t={target}")
    return events


def run_semigroup(p0: Profile, fp: FluxPair, h: float, t_end: float,
                  snapshot_times: Optional[Sequence[float]] = None,
                  frozen_levels: bool = False, label: str = "semigroup") -> Trajectory:
    """Front-tracking run to ``t_end``; t = 0 and t_end are always recorded.

    Snapshots come from copies of the running state, so the internal step
    sequence does not depend on which snapshot times are requested.
    """
    if not t_end > 0:
        raise ValueError("t_end must be positive")
    s = init_fronts(p0, fp, h, frozen_levels)
    times = _output_times(t_end, snapshot_times)
    out_t, profiles, thetas, states = [], [], [], []
    events: list = []
    count = 0

    def record(state):
        p = snapshot_to_profile(state)
        out_t.append(state.t)
        profiles.append(p)
        thetas.append(snapshot_theta(state, p))
        states.append(state.copy())

    k = 0
    while True:
        while k < len(times) and times[k] <= s.t:
            c = s.copy()
            c.t = times[k]
            record(c)
            k += 1
        if k >= len(times):
            break
        nxt = s.copy()
        ev = advance(nxt, fp, t_end - nxt.t)
        if _close_to(nxt.t, t_end):
            nxt.t = t_end
        count += max(1, len(ev))
        if count > MAX_EVENTS:
            raise EventOverflow(f"more than {MAX_EVENTS} steps")
        while k < len(times) and times[k] < nxt.t:
            c = s.copy()
            advance_to(c, fp, times[k])
            record(c)
            k += 1
        events.extend(ev)
        s = nxt
    log.debug("semigroup run: %d events, %d fronts at t=%g", len(events), s.n, s.t)
    return Trajectory(p0.domain, out_t, profiles, thetas, label=label, states=states,
                      events=events)


def burgers_embedded(p0: Profile, fp: FluxPair, h: float, t_end: float,
                     snapshot_times: Optional[Sequence[float]] = None) -> Trajectory:
    """Control run: rising parts move with f and the single downward jump with g.

    Requires data that is nondecreasing apart from exactly one downward jump.
    """
    n = p0.x.size
    down = np.flatnonzero(p0.ur < p0.ul)
    if p0.domain.periodic:
        drops = [p0.ul[(k + 1) % n] < p0.ur[k] for k in range(n)]
    else:
        drops = [p0.ul[k + 1] < p0.ur[k] for k in range(n - 1)]
    if down.size != 1 or any(drops):
        raise PreconditionViolation(
            "the embedded control needs nondecreasing data with one downward jump")
    return run_semigroup(p0, fp, h, t_end, snapshot_times, frozen_levels=True,
                         label="burgers_embedded")
