import math

import numpy as np
import pytest
from hypothesis import assume, example, given, settings, strategies as st

from gradflux.errors import EqualStates
from gradflux.flux import Flux, FluxPair, make_flux_pair, parse_flux
from gradflux.riemann import (discrete_fan, interpolant_admissible, liu_admissible, rh_speed,
                              solve_riemann)

FP = make_flux_pair("burgers", "burgers_plus_1")


def scan_oracle(um, up, flux, n):
    s = (flux(up) - flux(um)) / (up - um)
    us = um + (up - um) * np.arange(1, n + 1) / n
    slopes = (flux(us) - flux(um)) / (us - um)
    return bool(np.all(slopes >= s - 1e-12 * max(1.0, abs(s))))


def test_rh_speed_examples():
    assert rh_speed(1, -1, FP) == 0.0
    assert rh_speed(-1, 1, FP) == 0.0
    assert rh_speed(0, -1, FP) == pytest.approx(-0.5, abs=1e-15)
    with pytest.raises(EqualStates):
        rh_speed(0.2, 0.2, FP)


def test_liu_examples():
    assert liu_admissible(1, -1, FP.g)
    assert not liu_admissible(-1, 1, FP.f)
    assert not scan_oracle(-1, 1, FP.f, 100_000)
    concave = parse_flux("poly:0,0,-0.5")
    assert not liu_admissible(1, -1, concave)
    assert not scan_oracle(1, -1, concave, 100_000)
    with pytest.raises(EqualStates):
        liu_admissible(0.0, 0.0, FP.f)


def test_stationary_shock_fan():
    fan = solve_riemann(1, -1, FP, 0.1)
    assert fan.flux_used == "g"
    assert len(fan.waves) == 1
    w = fan.waves[0]
    assert (w.speed, w.u_before, w.u_after, w.kind) == (0.0, 1.0, -1.0, "shock")


def test_rarefaction_fan_has_twenty_steps():
    fan = solve_riemann(-1, 1, FP, 0.1)
    assert fan.flux_used == "f"
    assert len(fan.waves) == 20
    assert all(w.kind == "rarefaction" for w in fan.waves)
    u = np.linspace(-1, 1, 21)
    np.testing.assert_allclose(fan.speeds(), 0.5 * (u[:-1] + u[1:]), atol=1e-12)
    assert fan.speeds().min() >= -1 and fan.speeds().max() <= 1


def test_composite_fan_double_well():
    f = parse_flux("poly:0,0,-0.5,0,0.25")
    g = parse_flux("poly:1,0,-0.5,0,0.25")
    fp = make_flux_pair(f, g)
    fan = solve_riemann(0, 1, fp, 0.05)
    # tangency from u=0: (3/4) p^3 = p / 2
    p = math.sqrt(2.0 / 3.0)
    shock = fan.waves[0]
    assert shock.kind == "shock"
    assert shock.u_after == pytest.approx(p, abs=1e-9)
    assert shock.speed == pytest.approx(p ** 3 - p, abs=1e-9)
    rest = fan.waves[1:]
    assert all(w.kind == "rarefaction" for w in rest)
    assert len(rest) == math.ceil((1 - p) / 0.05)
    assert rest[-1].u_after == 1.0


def test_table_lists_every_wave():
    text = solve_riemann(-1, 1, FP, 0.5).table()
    lines = text.splitlines()
    assert lines[0].split() == ["speed", "u_before", "u_after", "kind"]
    assert len(lines) == 5


def test_discrete_fan_matches_interpolant_hull():
    fan = discrete_fan(-0.3, 0.45, FP.f, 0.1)
    states = [fan[0][1]] + [w[2] for w in fan]
    np.testing.assert_allclose(states, [-0.3, -0.2, -0.1, 0.0, 0.1, 0.2, 0.3, 0.4, 0.45])
    assert all(b[0] > a[0] for a, b in zip(fan, fan[1:]))


def random_cubic(draw_coeffs):
    return Flux.polynomial(draw_coeffs)


coeffs = st.tuples(*[st.floats(-2, 2) for _ in range(4)])
states = st.floats(-2, 2)


@settings(max_examples=80, deadline=None)
@given(coeffs, states, states, st.floats(0.02, 0.5))
@example(c=(0.0, 0.0, 0.0, 1.0), um=0.0, up=0.03125, step=0.5)
@example(c=(0.0, 0.75, -1e-12, 0.0), um=1.2956775032582568, up=0.0, step=0.5)
def test_fan_invariants(c, um, up, step):
    assume(abs(um - up) > 1e-3)
    f = Flux.polynomial(c)
    fp = FluxPair(f, f.shifted(1.0), -3.0, 3.0, 1.0)
    fan = solve_riemann(um, up, fp, step)
    sp = fan.speeds()
    assert np.all(np.diff(sp) >= -1e-9 * max(1.0, np.max(np.abs(sp))))
    assert fan.waves[0].u_before == um and fan.waves[-1].u_after == up
    for a, b in zip(fan.waves, fan.waves[1:]):
        assert a.u_after == b.u_before
    flux = fp.f if up > um else fp.g
    for w in fan.waves:
        if w.kind == "shock":
            assert liu_admissible(w.u_before, w.u_after, flux, tol=1e-9)
        else:
            assert abs(w.u_after - w.u_before) <= step * (1 + 1e-9)


@settings(max_examples=80, deadline=None)
@given(states, states, coeffs)
def test_rh_speed_swap_identity(a, b, c):
    assume(a != b)
    f = Flux.polynomial(c)
    g = f.shifted(1.0)
    fp = FluxPair(f, g, -3, 3, 1.0)
    swapped = FluxPair(g, f, -3, 3, -1.0)
    assert rh_speed(a, b, fp) == pytest.approx(rh_speed(b, a, swapped), rel=1e-12, abs=1e-12)


@settings(max_examples=60, deadline=None)
@given(coeffs, states, states, st.floats(0.02, 0.5))
def test_discrete_fan_fronts_pass_interpolant_test(c, um, up, h):
    assume(abs(um - up) > 1e-6)
    f = Flux.polynomial(c)
    fan = discrete_fan(um, up, f, h)
    for _, a, b in fan:
        assert interpolant_admissible(a, b, f, h)
