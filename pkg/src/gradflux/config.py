"""Run configuration: flat ``key=value`` lines.

Blank lines and lines starting with ``#`` are ignored.  Numbers may be
written as fractions (``dx = 1/400``).  ``snapshots`` is a comma-separated
list of times or ``every:<dt>``.  ``flux = f,g`` is accepted as shorthand
for ``flux_f`` and ``flux_g``.

Initial data specs:

``example11``                 e^x for x < 0, -e^-x for x > 0 (on [-5, 5] by default)
``sine[:A]``                  A sin(2 pi x / period), A = 0.5 by default
``constant:c``                the constant c
``riemann:ul,ur[,x0]``        a single jump at x0 (periodic: ul on the first half)
``pc:b1,...,bk;v0,...``       piecewise constant with breaks b and values v
``nodes:x1:u1,x2:u2,...``     continuous piecewise-linear interpolant
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Optional, Tuple

import numpy as np

from .errors import GradfluxError, ParseError, ValidationError
from .flux import FluxPair, make_flux_pair, parse_flux
from .profile import Bounded, Periodic, Profile

SOLVERS = ("viscous", "semigroup", "both")
DOMAINS = ("bounded", "periodic")
SAMPLES = 4000  # nodes used to sample analytic initial data
KEY_ORDER = ("scenario", "domain", "x_min", "x_max", "period", "flux_f", "flux_g",
             "initial", "solver", "epsilon", "delta", "dx", "cfl", "h", "t_end",
             "snapshots", "out")
FLOAT_KEYS = ("x_min", "x_max", "period", "epsilon", "delta", "dx", "cfl", "h", "t_end")


@dataclass(frozen=True)
class RunConfig:
    scenario: str
    initial: str
    t_end: float
    flux_f: str = "burgers"
    flux_g: str = "burgers_plus_1"
    domain: str = "bounded"
    x_min: float = -1.0
    x_max: float = 1.0
    period: float = 1.0
    solver: str = "semigroup"
    epsilon: float = 1e-3
    delta: float = 1e-3
    dx: float = 1.0 / 400
    cfl: float = 0.45
    h: float = 0.02
    snapshots: Tuple[float, ...] = ()
    out: Optional[str] = None

    def make_domain(self):
        if self.domain == "periodic":
            return Periodic(self.period)
        return Bounded(self.x_min, self.x_max)

    def flux_pair(self) -> FluxPair:
        return make_flux_pair(self.flux_f, self.flux_g)

    def initial_profile(self) -> Profile:
        return initial_profile(self.initial, self.make_domain())

    def output_root(self) -> str:
        return self.out or os.environ.get("GRADFLUX_OUT") or "runs"


# ----------------------------------------------------------------------
# initial data


def _example11(x):
    x = np.asarray(x, float)
    return np.where(x < 0, np.exp(np.minimum(x, 0.0)), -np.exp(-np.maximum(x, 0.0)))


def _floats(text):
    return [_number(v) for v in text.split(",") if v.strip()]


def initial_profile(spec: str, domain) -> Profile:
    """Build the initial profile named by ``spec`` (see the module docstring)."""
    name, _, arg = spec.strip().partition(":")
    name = name.strip().lower()
    if name == "example11":
        if domain.periodic:
            raise ValueError("example11 needs a bounded domain")
        return Profile.from_function(domain, _example11, n=SAMPLES, jumps=[0.0])
    if name == "sine":
        amp = _number(arg) if arg else 0.5
        L, lo = domain.length, domain.lo
        return Profile.from_function(
            domain, lambda x: amp * np.sin(2 * np.pi * (x - lo) / L), n=SAMPLES)
    if name == "constant":
        return Profile.constant(domain, _number(arg))
    if name == "riemann":
        vals = _floats(arg)
        if len(vals) not in (2, 3):
            raise ValueError("riemann needs ul,ur[,x0]")
        if domain.periodic:
            x0 = vals[2] if len(vals) == 3 else domain.lo
            a = domain.lo + (x0 - domain.lo) % domain.length
            b = domain.lo + (a - domain.lo + 0.5 * domain.length) % domain.length
            br, vv = (a, b), (vals[1], vals[0])
            order = np.argsort(br)
            return Profile.piecewise_constant(domain, np.array(br)[order], np.array(vv)[order])
        x0 = vals[2] if len(vals) == 3 else 0.5 * (domain.lo + domain.hi)
        return Profile.step(domain, x0, vals[0], vals[1])
    if name == "pc":
        b, _, v = arg.partition(";")
        return Profile.piecewise_constant(domain, _floats(b), _floats(v))
    if name == "nodes":
        pts = [p.split(":") for p in arg.split(",") if p.strip()]
        if any(len(p) != 2 for p in pts):
            raise ValueError("nodes entries must be x:u")
        xs = [_number(p[0]) for p in pts]
        us = [_number(p[1]) for p in pts]
        return Profile.from_samples(domain, xs, us)
    raise ValueError(f"unknown initial data {spec!r}")


# ----------------------------------------------------------------------
# parsing


def _number(text) -> float:
    text = str(text).strip()
    if "/" in text:
        a, _, b = text.partition("/")
        return float(Fraction(a.strip()) / Fraction(b.strip()))
    return float(text)


def _snapshots(text, t_end) -> Tuple[float, ...]:
    text = text.strip()
    if not text:
        return ()
    if text.startswith("every:"):
        dt = _number(text[6:])
        if not dt > 0:
            raise ValueError("snapshot spacing must be positive")
        k = int(math.floor(t_end / dt + 1e-9))
        return tuple(float(round(dt * i, 12)) for i in range(k + 1))
    return tuple(_floats(text))


def parse_config(text: str) -> RunConfig:
    """Parse and validate a configuration; omitted optional keys take defaults."""
    raw = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        s = line.strip()
        if not s or s.startswith("#"):
            continue
        if "=" not in s:
            raise ParseError(f"expected key=value, got {s!r}", line=lineno)
        key, _, val = s.partition("=")
        key, val = key.strip(), val.strip()
        if key == "flux":
            parts = [p.strip() for p in val.split(",")]
            if len(parts) != 2:
                raise ParseError("flux needs two specs: f,g", line=lineno)
            items = [("flux_f", parts[0]), ("flux_g", parts[1])]
        elif key in KEY_ORDER:
            items = [(key, val)]
        else:
            raise ParseError(f"unknown key {key!r}", line=lineno)
        for k, v in items:
            if k in raw:
                raise ParseError(f"duplicate key {k!r}", line=lineno)
            raw[k] = (v, lineno)

    for req in ("scenario", "initial", "t_end"):
        if req not in raw:
            raise ValidationError(req, "missing required key")
    kw = {}
    for key, (val, lineno) in raw.items():
        if key in FLOAT_KEYS:
            try:
                kw[key] = _number(val)
            except (ValueError, ZeroDivisionError):
                raise ParseError(f"{key}: not a number: {val!r}", line=lineno) from None
        elif key == "snapshots":
            continue
        elif key == "out":
            kw[key] = val or None
        else:
            kw[key] = val
    if "initial" in kw and kw["initial"].split(":")[0].strip().lower() == "example11":
        kw.setdefault("x_min", -5.0)
        kw.setdefault("x_max", 5.0)
    if "snapshots" in raw:
        val, lineno = raw["snapshots"]
        try:
            kw["snapshots"] = _snapshots(val, kw["t_end"])
        except (ValueError, ZeroDivisionError):
            raise ParseError(f"snapshots: cannot parse {val!r}", line=lineno) from None
    cfg = RunConfig(**kw)
    if "snapshots" not in raw and cfg.t_end > 0:
        cfg = replace(cfg, snapshots=tuple(round(cfg.t_end * i / 10, 12) for i in range(11)))
    validate(cfg)
    return cfg


def validate(cfg: RunConfig) -> RunConfig:
    """Raise ValidationError naming the first offending key."""
    if not cfg.scenario or any(c in cfg.scenario for c in "/\\"):
        raise ValidationError("scenario", "must be a plain name")
    if not cfg.t_end > 0:
        raise ValidationError("t_end", f"must be positive, got {cfg.t_end}")
    for key in ("epsilon", "delta", "dx", "h", "period"):
        if not getattr(cfg, key) > 0:
            raise ValidationError(key, f"must be positive, got {getattr(cfg, key)}")
    if not 0 < cfg.cfl <= 0.9:
        raise ValidationError("cfl", f"must lie in (0, 0.9], got {cfg.cfl}")
    if cfg.domain not in DOMAINS:
        raise ValidationError("domain", f"must be one of {DOMAINS}")
    if cfg.domain == "bounded" and not cfg.x_max > cfg.x_min:
        raise ValidationError("x_max", "must exceed x_min")
    if cfg.solver not in SOLVERS:
        raise ValidationError("solver", f"must be one of {SOLVERS}")
    if any(not 0 <= t <= cfg.t_end for t in cfg.snapshots):
        raise ValidationError("snapshots", "times must lie in [0, t_end]")
    if list(cfg.snapshots) != sorted(set(cfg.snapshots)):
        raise ValidationError("snapshots", "times must be strictly increasing")
    for key in ("flux_f", "flux_g"):
        try:
            parse_flux(getattr(cfg, key))
        except (GradfluxError, ValueError) as exc:
            raise ValidationError(key, str(exc)) from None
    try:
        cfg.flux_pair()
    except GradfluxError as exc:
        raise ValidationError("flux_g", str(exc)) from None
    try:
        cfg.initial_profile()
    except (GradfluxError, ValueError) as exc:
        raise ValidationError("initial", str(exc)) from None
    L = cfg.make_domain().length
    n = round(L / cfg.dx)
    if cfg.solver != "semigroup" and abs(n * cfg.dx - L) > 1e-9 * L:
        raise ValidationError("dx", f"{cfg.dx} does not divide the domain length {L}")
    return cfg


def serialize(cfg: RunConfig) -> str:
    """Text that ``parse_config`` maps back to ``cfg``."""
    lines = []
    for key in KEY_ORDER:
        val = getattr(cfg, key)
        if key == "out" and val is None:
            continue
        if key == "snapshots":
            val = ",".join(repr(float(t)) for t in val)
        elif key in FLOAT_KEYS:
            val = repr(float(val))
        lines.append(f"{key}={val}")
    return "\n".join(lines) + "\n"
