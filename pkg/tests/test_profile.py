import io

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gradflux.errors import AmbiguousTheta, DomainMismatch, InconsistentPlateau
from gradflux.profile import (Bounded, Periodic, Profile, ThetaField, l1_distance,
                              plateau_count, read_snapshot_csv, reconstruct_theta,
                              snapshot_csv_text, theta_discontinuity, total_variation,
                              write_snapshot_csv)

P1 = Periodic(1.0)
B01 = Bounded(0.0, 1.0)


def test_total_variation_examples():
    assert total_variation(Profile.constant(P1, 0.3)) == 0.0
    saw = Profile.from_samples(P1, [0.0, 0.5], [0.0, 1.0])
    assert total_variation(saw) == pytest.approx(2.0)
    assert total_variation(Profile.step(Bounded(-1, 1), 0.0, 1.0, -1.0)) == pytest.approx(2.0)


def test_l1_examples():
    p = Profile.constant(P1, 0.0)
    assert l1_distance(p, p) == 0.0
    assert l1_distance(p, Profile.constant(P1, 0.3)) == pytest.approx(0.3)
    a = Profile.step(B01, 0.5, 1.0, -1.0)
    b = Profile.step(B01, 0.6, 1.0, -1.0)
    assert l1_distance(a, b) == pytest.approx(0.2, abs=1e-14)
    # Riemann-sum oracle at dx = 1e-5
    xs = (np.arange(100_000) + 0.5) * 1e-5
    assert np.sum(np.abs(a(xs) - b(xs))) * 1e-5 == pytest.approx(0.2, abs=1e-4)


def test_l1_domain_mismatch():
    with pytest.raises(DomainMismatch):
        l1_distance(Profile.constant(P1, 0.0), Profile.constant(Periodic(2.0), 0.0))


def test_l1_of_crossing_affine_pieces():
    p = Profile.from_samples(B01, [0.0, 1.0], [-1.0, 1.0])
    q = Profile.constant(B01, 0.0)
    assert l1_distance(p, q) == pytest.approx(0.5, abs=1e-15)


def test_periodic_wrap_values():
    p = Profile.from_samples(P1, [0.25, 0.75], [1.0, -1.0])
    # segment from 0.75 (-1) wraps to 1.25 (1): value 0 at x = 1.0 == 0.0
    assert p(np.array([0.0]))[0] == pytest.approx(0.0)
    assert p(np.array([1.0]))[0] == pytest.approx(0.0)
    assert p.integral() == pytest.approx(0.0, abs=1e-15)


def test_theta_monotone_profile_is_one():
    p = Profile.from_samples(B01, [0.0, 1.0], [0.0, 1.0])
    th = reconstruct_theta(p)
    np.testing.assert_allclose(th(np.linspace(0, 1, 11)), 1.0)


def test_theta_max_plateau_is_affine():
    p = Profile.from_samples(B01, [0.0, 0.4, 0.6, 1.0], [0.0, 1.0, 1.0, 0.0])
    th = reconstruct_theta(p, [(0.4, 0.6)])
    np.testing.assert_allclose(th(np.array([0.2, 0.4, 0.5, 0.6, 0.8])),
                               [1.0, 1.0, 0.5, 0.0, 0.0], atol=1e-12)
    assert plateau_count(th) == 1


def test_theta_min_plateau_slope_five():
    p = Profile.from_samples(P1, [0.1, 0.3, 0.5, 0.8], [1.0, -1.0, -1.0, 0.9])
    th = reconstruct_theta(p, [(0.3, 0.5)])
    xs = np.array([0.32, 0.4, 0.48])
    slope = np.diff(th(xs)) / np.diff(xs)
    np.testing.assert_allclose(slope, 5.0, rtol=1e-9)


def test_theta_errors():
    p = Profile.from_samples(B01, [0.0, 0.4, 0.6, 1.0], [0.0, 1.0, 1.0, 0.0])
    with pytest.raises(InconsistentPlateau):
        reconstruct_theta(p, [(0.1, 0.6)])
    with pytest.raises(AmbiguousTheta):
        reconstruct_theta(p)


def test_theta_constant_stretch_between_equal_flanks():
    p = Profile.from_samples(B01, [0.0, 0.3, 0.6, 1.0], [0.0, 0.5, 0.5, 1.0])
    th = reconstruct_theta(p)
    np.testing.assert_allclose(th(np.array([0.4, 0.5])), 1.0)


def test_theta_discontinuity_examples():
    assert theta_discontinuity(ThetaField.constant(B01, 1.0), 0.01) == 0.0
    jump = ThetaField(Bounded(-1, 1), [0.0, 0.0], [1.0, 0.0])
    assert theta_discontinuity(jump, 0.01) == pytest.approx(1.0)
    ramp = ThetaField(B01, [0.25, 0.75], [1.0, 0.0])
    assert theta_discontinuity(ramp, 0.01) == pytest.approx(0.02, abs=1e-12)


def test_csv_roundtrip_with_jump_and_point_value():
    p = Profile(Bounded(-1, 1), [-0.5, 0.0, 0.5], [0.0, 1.0, 0.0], [0.0, -1.0, 0.0])
    th = ThetaField(Bounded(-1, 1), [-1.0, 0.0, 0.0, 0.0, 1.0], [1.0, 1.0, 0.0, 1.0, 1.0])
    text = snapshot_csv_text(p, th)
    assert text.splitlines()[0] == "x,u,theta"
    rows = [r for r in text.splitlines()[1:] if r.startswith("0.0,")]
    assert len(rows) == 3
    q, th2 = read_snapshot_csv(io.StringIO(text), Bounded(-1, 1))
    assert l1_distance(p, q) == 0.0
    xs = np.linspace(-1, 1, 41)
    np.testing.assert_allclose(th2(xs), th(xs))
    buf = io.StringIO()
    write_snapshot_csv(buf, q, th2)
    assert buf.getvalue() == text


def _random_periodic(seed, n=6):
    rng = np.random.default_rng(seed)
    x = np.sort(rng.choice(np.arange(1, 100), n, replace=False)) / 100.0
    ul = rng.uniform(-1, 1, n)
    ur = np.where(rng.random(n) < 0.5, ul, rng.uniform(-1, 1, n))
    return Profile(P1, x, ul, ur)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000))
def test_tv_matches_fine_grid_tv(seed):
    p = _random_periodic(seed)
    # grid at dx = 1e-4 plus both one-sided limits at the nodes
    xs = np.union1d(np.arange(10_000) * 1e-4, p.x)
    left, right = p.limits(xs)
    vals = np.column_stack([left, right]).ravel()
    grid_tv = np.sum(np.abs(np.diff(np.append(vals, vals[0]))))
    tv = total_variation(p)
    assert abs(grid_tv - tv) <= 1e-3 * max(tv, 1e-12) + 1e-12


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000), st.integers(0, 10_000), st.integers(0, 10_000))
def test_l1_metric_axioms(a, b, c):
    p, q, r = _random_periodic(a), _random_periodic(b), _random_periodic(c)
    assert l1_distance(p, q) == l1_distance(q, p)
    assert l1_distance(p, r) <= l1_distance(p, q) + l1_distance(q, r) + 1e-12
    assert l1_distance(p, p) == 0.0


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000))
def test_reconstructed_theta_respects_monotonicity(seed):
    rng = np.random.default_rng(seed)
    n = 5
    x = np.sort(rng.choice(np.arange(1, 50), n, replace=False)) / 50.0
    u = rng.uniform(-1, 1, n)
    p = Profile.from_samples(P1, x, u)
    th = reconstruct_theta(p)
    xs = np.linspace(0, 1, 401, endpoint=False)
    vals = th(xs)
    assert np.all((vals >= 0) & (vals <= 1))
    d = p(xs + 1e-7) - p(xs - 1e-7)
    assert np.all(vals[d > 1e-12] == 1.0)
    assert np.all(vals[d < -1e-12] == 0.0)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10_000), st.floats(1e-3, 0.2), st.floats(1e-3, 0.2))
def test_theta_discontinuity_monotone_in_scale(seed, s1, s2):
    rng = np.random.default_rng(seed)
    x = np.sort(rng.uniform(0, 1, 6))
    th = ThetaField(P1, x, rng.uniform(0, 1, 6))
    lo, hi = min(s1, s2), max(s1, s2)
    assert theta_discontinuity(th, lo) <= theta_discontinuity(th, hi) + 1e-12
