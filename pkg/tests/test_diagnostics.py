import numpy as np
import pytest

from gradflux.config import initial_profile
from gradflux.diagnostics import (contraction_gap, conservation_series, pairwise_l1,
                                  semigroup_defect, structural_checks)
from gradflux.errors import SnapshotMismatch
from gradflux.flux import make_flux_pair
from gradflux.fronttrack import burgers_embedded, run_semigroup
from gradflux.profile import Bounded, Periodic, Profile
from gradflux.viscous import ViscousParams, run_viscous

FP = make_flux_pair("burgers", "burgers_plus_1")
EX11 = initial_profile("example11", Bounded(-5, 5))
TIMES = np.round(np.arange(0, 0.31, 0.05), 12)


@pytest.fixture(scope="module")
def ex11_pair():
    semi = run_semigroup(EX11, FP, 0.01, 0.3, TIMES)
    ctrl = burgers_embedded(EX11, FP, 0.01, 0.3, TIMES)
    return semi, ctrl


def const_traj(c, t_end=0.2):
    return run_semigroup(Profile.constant(Periodic(1.0), c), FP, 0.02, t_end, [0.1])


def test_contraction_gap_trivial_cases():
    a = const_traj(0.1)
    assert all(d == 0.0 for _, d in contraction_gap(a, a))
    b = const_traj(0.4)
    assert [d for _, d in contraction_gap(a, b)] == pytest.approx([0.0, 0.0, 0.0], abs=1e-15)
    assert [d for _, d in pairwise_l1(a, b)] == pytest.approx([0.3] * 3)


def test_shifted_shocks_keep_their_distance():
    dom = Bounded(-1, 1)
    ts = [0.0, 0.25, 0.5]
    a = run_semigroup(Profile.step(dom, 0.0, 0.5, -0.3), FP, 0.02, 0.5, ts)
    b = run_semigroup(Profile.step(dom, 0.1, 0.5, -0.3), FP, 0.02, 0.5, ts)
    gap = contraction_gap(a, b)
    assert all(d <= 10 * 0.02 for _, d in gap)
    assert [d for _, d in gap] == pytest.approx([0.0] * 3, abs=1e-12)


def test_snapshot_mismatch():
    with pytest.raises(SnapshotMismatch):
        pairwise_l1(const_traj(0.1), const_traj(0.1, t_end=0.3))


def test_defect_of_constant_is_zero():
    assert all(d == 0.0 for _, d in semigroup_defect(const_traj(0.2), FP, 0.02))


def test_defect_separates_semigroup_from_control(ex11_pair):
    semi, ctrl = ex11_pair
    h = 0.01
    ds = semigroup_defect(semi, FP, h)
    dc = semigroup_defect(ctrl, FP, h)
    assert max(d for _, d in ds) <= 10 * h
    assert min(d for _, d in dc) > 5 * 10 * h


def test_structural_checks_constant():
    rep = structural_checks(const_traj(0.3), FP)
    assert rep.passed
    assert rep.tv == [0.0, 0.0, 0.0]


def test_structural_checks_example11(ex11_pair):
    semi, ctrl = ex11_pair
    rs = structural_checks(semi, FP, scenario="ex11", other=ctrl)
    assert rs.passed, rs.flags
    assert all(b < a for a, b in zip(rs.tv, rs.tv[1:]))
    assert rs.pairwise["other"] == "burgers_embedded"
    rc = structural_checks(ctrl, FP, scenario="ex11")
    assert rc.flags["theta_jump"]
    assert rc.details["theta_jump_max"] == pytest.approx(1.0)
    assert [k for k, v in rc.flags.items() if v] == ["theta_jump"]


def test_reports_are_pure(ex11_pair):
    semi, ctrl = ex11_pair
    a = structural_checks(semi, FP, scenario="x", other=ctrl).to_json()
    b = structural_checks(semi, FP, scenario="x", other=ctrl).to_json()
    assert a == b
    assert "theta_jump" in structural_checks(semi, FP).summary()


def test_bounded_conservation_accounts_for_boundary_flux():
    # a rarefaction reaching the right boundary of a small window
    dom = Bounded(-0.5, 0.5)
    p0 = Profile.step(dom, 0.0, 0.0, 1.0)
    tr = run_semigroup(p0, FP, 0.01, 0.4, [0.1, 0.2, 0.3])
    raw = [p.integral() for p in tr.profiles]
    corrected = conservation_series(tr, FP)
    assert abs(raw[-1] - raw[0]) > 0.1
    assert max(abs(c - corrected[0]) for c in corrected) < 10 * 0.01 * 0.4


def test_viscous_run_infers_grid_scale():
    p0 = initial_profile("sine", Periodic(1.0))
    par = ViscousParams(epsilon=0.01, delta=0.01, dx=1 / 100, t_end=0.05, snapshot_every=0.025)
    rep = structural_checks(run_viscous(p0, FP, par).to_trajectory(), FP)
    assert rep.thresholds["theta_scale"] == pytest.approx(0.04)
    assert "front_admissibility" not in rep.flags
