import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gradflux.config import RunConfig, initial_profile, parse_config, serialize, validate
from gradflux.errors import ParseError, ValidationError
from gradflux.profile import Bounded, Periodic, total_variation

MINIMAL = """scenario = demo
flux = burgers,burgers_plus_1
initial = sine
t_end = 0.3
"""


def test_minimal_config_defaults():
    cfg = parse_config(MINIMAL)
    assert cfg.dx == 1 / 400 and cfg.h == 0.02
    assert cfg.epsilon == cfg.delta == 1e-3
    assert cfg.cfl == 0.45
    assert cfg.solver == "semigroup"
    assert cfg.snapshots[0] == 0.0 and cfg.snapshots[-1] == pytest.approx(0.3)


def test_negative_end_time():
    with pytest.raises(ValidationError) as exc:
        parse_config(MINIMAL.replace("t_end = 0.3", "t_end = -1"))
    assert exc.value.key == "t_end"


@pytest.mark.parametrize("text, line", [
    ("scenario = a\ninitial = sine\nnot a pair\nt_end = 1\n", 3),
    ("# c\nscenario = a\ninitial = sine\nt_end = 1\ncolour = red\n", 5),
    ("scenario = a\nscenario = b\n", 2),
    ("scenario = a\ninitial = sine\nt_end = 1\ndx = 1/0\n", 4),
    ("scenario = a\ninitial = sine\nt_end = 1\nsnapshots = every:x\n", 4),
])
def test_parse_errors_carry_line(text, line):
    with pytest.raises(ParseError) as exc:
        parse_config(text)
    assert exc.value.line == line


@pytest.mark.parametrize("key, text", [
    ("cfl", "cfl = 0.95"), ("solver", "solver = magic"), ("flux_g", "flux_g = burgers"),
    ("initial", "initial = nothing"), ("dx", "dx = 0.3"),
    ("snapshots", "snapshots = 0.5"), ("scenario", "scenario = a/b"),
])
def test_validation_names_the_key(key, text):
    base = "scenario = s\ninitial = sine\ndomain = periodic\nsolver = both\nt_end = 0.3\n"
    lines = [ln for ln in base.splitlines() if not ln.startswith(text.split("=")[0].strip())]
    with pytest.raises(ValidationError) as exc:
        parse_config("\n".join(lines + [text]))
    assert exc.value.key == key


def test_example11_data_and_window():
    cfg = parse_config("scenario = e\ninitial = example11\nt_end = 0.5\n")
    assert (cfg.x_min, cfg.x_max) == (-5.0, 5.0)
    p = cfg.initial_profile()
    x = np.array([-2.0, -0.5, 0.5, 2.0])
    np.testing.assert_allclose(p(x), [math.exp(-2), math.exp(-0.5), -math.exp(-0.5),
                                      -math.exp(-2)], rtol=1e-5)
    left, right = p.limits(np.array([0.0]))
    assert left[0] == pytest.approx(1.0) and right[0] == pytest.approx(-1.0)


def test_initial_specs():
    P = Periodic(1.0)
    assert total_variation(initial_profile("constant:0.25", P)) == 0.0
    r = initial_profile("riemann:1,-1", Bounded(-1, 1))
    assert list(r.x) == [0.0]
    pc = initial_profile("pc:0.2,0.7;1,-1", P)
    assert total_variation(pc) == pytest.approx(4.0)
    nodes = initial_profile("nodes:0:0,0.5:1", P)
    assert total_variation(nodes) == pytest.approx(2.0)
    s = initial_profile("sine:0.2", P)
    assert s(np.array([0.25]))[0] == pytest.approx(0.2)


def test_fractions_and_snapshot_spacing():
    cfg = parse_config(MINIMAL + "dx = 1/800\nsnapshots = every:0.1\n")
    assert cfg.dx == 1 / 800
    assert cfg.snapshots == (0.0, 0.1, 0.2, 0.3)


def test_output_root(monkeypatch):
    cfg = parse_config(MINIMAL)
    monkeypatch.delenv("GRADFLUX_OUT", raising=False)
    assert cfg.output_root() == "runs"
    monkeypatch.setenv("GRADFLUX_OUT", "/tmp/elsewhere")
    assert cfg.output_root() == "/tmp/elsewhere"
    assert parse_config(MINIMAL + "out = mine\n").output_root() == "mine"


pos = st.floats(1e-4, 10, allow_nan=False)


@st.composite
def configs(draw):
    periodic = draw(st.booleans())
    t_end = draw(st.floats(0.01, 5))
    snaps = sorted(set(draw(st.lists(st.floats(0, 1), max_size=5))))
    x_min = draw(st.floats(-10, 0))
    cfg = RunConfig(
        scenario=draw(st.text("abcdefxyz_0123456789", min_size=1, max_size=12)),
        initial=draw(st.sampled_from(["sine", "constant:0.5", "sine:0.3",
                                      "pc:0.1,0.6;1,-1" if periodic else "pc:0.1,0.6;1,-1,0"])),
        t_end=t_end,
        flux_f="burgers",
        flux_g=draw(st.sampled_from(["burgers_plus_1", "poly:2,0.1,0.5"])),
        domain="periodic" if periodic else "bounded",
        x_min=x_min, x_max=x_min + draw(st.floats(0.5, 10)),
        period=1.0,
        solver="semigroup",
        epsilon=draw(pos), delta=draw(pos), dx=draw(pos), cfl=draw(st.floats(0.01, 0.9)),
        h=draw(pos),
        snapshots=tuple(sorted({t * t_end for t in snaps})),
        out=draw(st.sampled_from([None, "runs/x", "/tmp/o"])),
    )
    return validate(cfg)


@settings(max_examples=60, deadline=None)
@given(configs())
def test_serialize_roundtrip(cfg):
    assert parse_config(serialize(cfg)) == cfg
