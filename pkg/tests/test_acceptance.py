"""Acceptance criteria, one test each, at their stated tolerances.

Each test prints a PASS/FAIL line; the lines are repeated in the pytest
terminal summary.  Frozen reference numbers come from independent
computations (see scripts/oracle_example11.py).
"""

import time

import numpy as np
import pytest

from gradflux.config import initial_profile
from gradflux.diagnostics import contraction_gap, semigroup_defect, structural_checks
from gradflux.flux import Flux, make_flux_pair
from gradflux.fronttrack import burgers_embedded, run_semigroup
from gradflux.profile import (Bounded, Periodic, Profile, l1_distance, theta_discontinuity,
                              total_variation)
from gradflux.riemann import liu_admissible
from gradflux.viscous import ViscousParams, run_viscous

FP = make_flux_pair("burgers", "burgers_plus_1")
FROZEN = make_flux_pair("poly:0", "poly:1")
WINDOW = Bounded(-5.0, 5.0)

# L1(semigroup, embedded control) at t = 0.5 for the exponential data: front tracking at
# h = 0.0025 against the characteristic solution, midpoint rule with dx = 1/2000.
EXAMPLE11_L1_ORACLE = 0.7572802899346253


def _example11_runs(h, t_end=0.5, step=0.05):
    p0 = initial_profile("example11", WINDOW)
    times = np.round(np.arange(0.0, t_end + step / 2, step), 12)
    semi = run_semigroup(p0, FP, h, t_end, times)
    ctrl = burgers_embedded(p0, FP, h, t_end, times)
    return semi, ctrl


@pytest.fixture(scope="module")
def example11():
    t0 = time.perf_counter()
    semi, ctrl = _example11_runs(0.01)
    return semi, ctrl, time.perf_counter() - t0


def test_example11_discriminates_theta(example11, verdict):
    semi, ctrl, elapsed = example11
    semi_j = [theta_discontinuity(th, 0.05) for t, th in zip(semi.times, semi.thetas)
              if t >= 0.05 - 1e-12]
    ctrl_j = [theta_discontinuity(th, 0.05) for th in ctrl.thetas]
    ok = max(semi_j) < 0.3 and min(ctrl_j) >= 0.9 and elapsed < 60
    verdict("example11_theta", ok,
            f"semigroup max jump {max(semi_j):.4f} (<0.3), control min jump "
            f"{min(ctrl_j):.4f} (>=0.9), {elapsed:.1f}s (<60s)")
    assert ok


def test_example11_l1_gap_reaches_oracle(example11, verdict):
    semi, ctrl, _ = example11
    d = l1_distance(semi.profiles[-1], ctrl.profiles[-1])
    ok = d >= 0.8 * EXAMPLE11_L1_ORACLE
    verdict("example11_l1", ok,
            f"L1 at t=0.5 {d:.4f} vs floor 0.8*{EXAMPLE11_L1_ORACLE:.4f}")
    assert ok


def test_frozen_flank_level(verdict):
    t0 = time.perf_counter()
    p0 = Profile.piecewise_constant(Bounded(-1, 1), [0.0, 0.5], [0.0, 1.0, 0.0])
    times = np.linspace(0.0, 0.1, 21)
    tr = run_semigroup(p0, FROZEN, 0.1, 0.1, times)
    elapsed = time.perf_counter() - t0
    err = max(abs(p(np.array([0.25]))[0] - (1 - 2 * t)) for t, p in zip(tr.times, tr.profiles))
    ok = err <= 1e-6 and elapsed < 1.0
    verdict("frozen_flank", ok, f"max level error {err:.2e} (<=1e-6), {elapsed:.3f}s (<1s)")
    assert ok


def _riemann_viscous_l1(level):
    """Level 0 is the target (eps = delta = 1e-3, dx = 1/800); each lower level doubles all three."""
    f = 2 ** level
    p0 = Profile.step(Bounded(-1, 1), 0.0, 1.0, -1.0)
    run = run_viscous(p0, FP, ViscousParams(epsilon=1e-3 * f, delta=1e-3 * f,
                                           dx=f / 800, t_end=0.5))
    return l1_distance(run.to_trajectory().profiles[-1], p0)


def test_riemann_shock(verdict):
    t0 = time.perf_counter()
    p0 = Profile.step(Bounded(-1, 1), 0.0, 1.0, -1.0)
    tr = run_semigroup(p0, FP, 0.02, 0.5, np.linspace(0, 0.5, 11))
    fixed = all(list(s.x) == [0.0] for s in tr.states)
    dists = [_riemann_viscous_l1(k) for k in (2, 1, 0)]
    elapsed = time.perf_counter() - t0
    ratios = [a / b for a, b in zip(dists, dists[1:])]
    ok = fixed and dists[-1] <= 0.05 and min(ratios) >= 1.3 and elapsed < 120
    verdict("riemann_shock", ok,
            f"shock fixed={fixed}, viscous L1 {', '.join(f'{d:.4f}' for d in dists)} "
            f"(finest <=0.05), ratios {', '.join(f'{r:.3f}' for r in ratios)} (>=1.3), "
            f"{elapsed:.1f}s (<120s)")
    assert ok


def _random_periodic(rng, tv_max=4.0):
    n = int(rng.integers(2, 9))
    breaks = np.sort(rng.choice(np.arange(1, 200), n, replace=False)) / 200.0
    vals = rng.uniform(-1, 1, n)
    p = Profile.piecewise_constant(Periodic(1.0), breaks, vals)
    tv = total_variation(p)
    if tv > tv_max:
        p = Profile.piecewise_constant(Periodic(1.0), breaks, vals * (tv_max / tv))
    return p


def test_random_pairs_contract(verdict):
    rng = np.random.default_rng(2024)
    h = 0.02
    times = np.linspace(0, 0.3, 7)
    t0 = time.perf_counter()
    worst = -np.inf
    for _ in range(50):
        u0, v0 = _random_periodic(rng), _random_periodic(rng)
        assert total_variation(u0) <= 4 + 1e-12 and total_variation(v0) <= 4 + 1e-12
        a = run_semigroup(u0, FP, h, 0.3, times)
        b = run_semigroup(v0, FP, h, 0.3, times)
        worst = max(worst, max(g for _, g in contraction_gap(a, b)))
    elapsed = time.perf_counter() - t0
    ok = worst <= 10 * h and elapsed < 120
    verdict("random_contraction", ok,
            f"max contraction gap {worst:.4f} (<={10 * h:g}), {elapsed:.1f}s (<120s)")
    assert ok


def _suite():
    """(label, trajectory, h) for the semigroup runs of the scenario suite."""
    out = []
    semi, _ = _example11_runs(0.01)
    out.append(("example11", semi, 0.01))
    sine = initial_profile("sine", Periodic(1.0))
    out.append(("sine", run_semigroup(sine, FP, 0.005, 0.3, np.linspace(0, 0.3, 7)), 0.005))
    for ul, ur in ((1, -1), (-1, 1), (0.5, -1), (-1, 0.5), (1, 0), (0, -1)):
        p0 = Profile.step(Bounded(-1, 1), 0.0, float(ul), float(ur))
        out.append((f"riemann({ul},{ur})",
                    run_semigroup(p0, FP, 0.02, 0.5, np.linspace(0, 0.5, 6)), 0.02))
    rng = np.random.default_rng(99)
    for k in range(10):
        out.append((f"random{k}", run_semigroup(_random_periodic(rng), FP, 0.02, 0.3,
                                                np.linspace(0, 0.3, 7)), 0.02))
    return out


def test_structural_suite(verdict):
    failures = []
    for label, tr, h in _suite():
        rep = structural_checks(tr, FP, scenario=label, h=h)
        raised = [k for k in ("tv_increase", "plateau_increase", "conservation_drift",
                              "front_admissibility") if rep.flags.get(k, True)]
        if raised:
            failures.append(f"{label}: {','.join(raised)}")
    ok = not failures
    verdict("structural_suite", ok, "all runs clean" if ok else "; ".join(failures))
    assert ok


def test_sine_joint_refinement(verdict):
    p0 = initial_profile("sine", Periodic(1.0))
    t0 = time.perf_counter()
    dists = []
    for f in (4, 2, 1):
        semi = run_semigroup(p0, FP, 0.005 * f, 0.3)
        visc = run_viscous(p0, FP, ViscousParams(epsilon=1e-3 * f, delta=1e-3 * f,
                                                dx=f / 2000, t_end=0.3))
        dists.append(l1_distance(semi.profiles[-1], visc.to_trajectory().profiles[-1]))
    elapsed = time.perf_counter() - t0
    ratios = [a / b for a, b in zip(dists, dists[1:])]
    ok = min(ratios) >= 1.5 and elapsed < 300
    verdict("sine_refinement", ok,
            f"L1 {', '.join(f'{d:.4f}' for d in dists)}, ratios "
            f"{', '.join(f'{r:.3f}' for r in ratios)} (>=1.5), {elapsed:.1f}s (<300s)")
    assert ok


def _liu_brute(um, up, flux, n=10**6, tol=1e-12):
    d = up - um
    fm = flux(um)
    s = (flux(up) - fm) / d
    us = um + d * (np.arange(1, n + 1) / n)
    us[-1] = up
    return bool(np.all((flux(us) - fm) / (us - um) >= s - tol * max(1.0, abs(s))))


def test_liu_scan_matches_brute_force(verdict):
    rng = np.random.default_rng(11)
    agree = 0
    admissible = 0
    for _ in range(1000):
        flux = Flux.polynomial(tuple(rng.uniform(-2, 2, 4)))
        um, up = rng.uniform(-2, 2, 2)
        fast = liu_admissible(um, up, flux, n_scan=1000, tol=1e-12)
        agree += fast == _liu_brute(um, up, flux)
        admissible += fast
    ok = agree == 1000
    verdict("liu_oracle", ok, f"{agree}/1000 agree ({admissible} admissible)")
    assert ok


def test_semigroup_defect_discriminates(verdict):
    h = 0.01
    semi, ctrl = _example11_runs(h, t_end=0.35)
    window = lambda series: [d for t, d in series if 0.05 - 1e-12 <= t <= 0.3 + 1e-12]
    ds = window(semigroup_defect(semi, FP, h))
    dc = window(semigroup_defect(ctrl, FP, h))
    ok = max(ds) <= 10 * h and min(dc) > 5 * 10 * h
    verdict("semigroup_defect", ok,
            f"semigroup max {max(ds):.2e} (<={10 * h:g}), control min {min(dc):.3f} "
            f"(>{50 * h:g})")
    assert ok
