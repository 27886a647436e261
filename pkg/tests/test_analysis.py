import csv

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cauchyleray.analysis import (
    DomainRegion,
    EmptyPairsError,
    Interval,
    PairSet,
    UnsupportedExponentError,
    check_exponent,
    gain_report,
    holder_seminorm,
    rough_datum,
    structured_pairs,
    sup_norm,
    write_gain_csv,
)
from cauchyleray.checks import CALIBRATION, calibration_study
from cauchyleray.geometry import Ball
from oracles import brute_force_pair_max

UNIT = Interval(0.0, 1.0)
PAIRS = structured_pairs(UNIT, 20000, seed=1)


@pytest.mark.parametrize("name", sorted(CALIBRATION))
def test_calibration_against_brute_force(name):
    f, a, true = CALIBRATION[name]
    brute = brute_force_pair_max(f, np.linspace(0, 1, 801), a)
    assert abs(brute - true) < 1e-12          # the oracle confirms the closed-form value
    est = holder_seminorm(f, a, PAIRS, region=UNIT).seminorm
    assert est <= true + 1e-12
    assert est >= 0.9 * true


@pytest.mark.parametrize("b", [0.6, 0.8])
def test_power_function_seminorm_brute_force(b):
    f = lambda x: x ** b
    brute = brute_force_pair_max(f, np.linspace(0, 1, 801), 0.5)
    est = holder_seminorm(f, 0.5, PAIRS, region=UNIT).seminorm
    assert 0.9 * brute <= est <= brute * (1 + 1e-9)


def test_first_derivative_exponent():
    # f = x^1.5: f' = 1.5 sqrt(x), whose 1/2-seminorm is 1.5
    est = holder_seminorm(lambda x: np.abs(x) ** 1.5, 1.5, PAIRS, region=UNIT)
    assert est.derivatives == 1
    assert 0.9 * 1.5 <= est.seminorm <= 1.5 * (1 + 1e-4)
    assert est.dropped > 0                      # stencils at the endpoints leave [0, 1]


def test_calibration_study_passes():
    rows = calibration_study(pairs=20000, seed=3)
    assert all(r["passed"] for r in rows)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10_000), st.integers(1, 300))
def test_more_pairs_never_lower_the_estimate(seed, extra):
    f = lambda x: np.abs(x - 0.37) ** 0.6
    base = structured_pairs(UNIT, 200, seed=seed)
    more = base + structured_pairs(UNIT, extra, seed=seed + 1)
    assert holder_seminorm(f, 0.4, more).seminorm >= holder_seminorm(f, 0.4, base).seminorm


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10_000), st.floats(-5, 5).filter(lambda c: abs(c) > 1e-3))
def test_seminorm_scales_and_is_symmetric(seed, c):
    f = lambda x: np.sin(3 * x)
    ps = structured_pairs(UNIT, 300, seed=seed)
    base = holder_seminorm(f, 0.7, ps).seminorm
    assert np.isclose(holder_seminorm(lambda x: c * f(x), 0.7, ps).seminorm, abs(c) * base, rtol=1e-12)
    swapped = PairSet(ps.y, ps.x, ps.scale)
    assert holder_seminorm(f, 0.7, swapped).seminorm == base


def test_constant_and_lipschitz_in_domain():
    ball = Ball(2)
    region = DomainRegion(ball)
    ps = structured_pairs(region, 4000, seed=2)
    assert holder_seminorm(lambda z: np.ones(len(z)), 0.5, ps).seminorm == 0
    est = holder_seminorm(lambda z: z[:, 0].real, 0.5, ps).seminorm
    assert 1.0 < est <= np.sqrt(2) + 1e-12       # sup is |x1 - y1| / |x - y|^(1/2) <= sqrt(2)
    for pts in (ps.x, ps.y):                         # closure: anchors sit on the boundary
        assert np.all(ball.r.value(pts) <= 1e-12)


def test_witness_is_reported_and_lexicographic():
    ps = PairSet(np.array([[0.5], [0.0], [0.25]]), np.array([[0.75], [0.25], [0.5]]), np.ones(3))
    est = holder_seminorm(lambda x: x, 0.5, ps)          # all three pairs tie
    assert est.witness[0][0] == 0.0 and est.witness[1][0] == 0.25
    assert est.pair_count == 3


def test_exponent_errors():
    assert check_exponent(0.5) == 0 and check_exponent(1.5) == 1
    for a in (1.0, 2.0, 2.5, 0.0, -0.5):
        with pytest.raises(UnsupportedExponentError):
            check_exponent(a)
    with pytest.raises(UnsupportedExponentError):
        holder_seminorm(lambda x: x, 1, PAIRS)


def test_empty_pairs():
    empty = PairSet(np.zeros((0, 1)), np.zeros((0, 1)), np.zeros(0))
    with pytest.raises(EmptyPairsError):
        holder_seminorm(lambda x: x, 0.5, empty)
    with pytest.raises(EmptyPairsError):
        structured_pairs(UNIT, 0)


def test_structured_pairs_strata():
    ps = structured_pairs(UNIT, 1500, seed=4, scales=(1.0, 0.1, 0.01))
    d = np.abs(ps.x - ps.y)[:, 0]
    for s in (0.1, 0.01):
        sel = ps.scale == s
        assert np.all(d[sel] <= s + 1e-15)
    assert np.all((ps.x >= 0) & (ps.x <= 1) & (ps.y >= 0) & (ps.y <= 1))
    assert np.any(ps.x[:, 0] == 0.0) or np.any(ps.x[:, 0] == 1.0)        # anchors used


def test_gain_report_zero_data_and_sup_norm():
    ps = structured_pairs(UNIT, 500, seed=5)
    rep = gain_report(lambda x: np.zeros(len(x)), lambda x: x, 0.0, ps)
    assert rep.data_norm == 0 and rep.ratio == 0
    assert sup_norm(lambda x: -3 * x[:, 0], np.array([[0.5], [1.0]])) == 3.0
    rep = gain_report(lambda x: 2 * np.ones(len(x)), lambda x: np.sqrt(x), 0.0, ps)
    assert rep.data_norm == 2 and 0.45 <= rep.ratio <= 0.5 + 1e-12


def test_rough_datum_and_csv(tmp_path):
    ball = Ball(2)
    phi = rough_datum(ball, 0.5)
    v = phi(np.array([[1.0, 0.0], [0.0, 0.5j]]))
    assert np.allclose(v[:, 0], [0.0, 1.0]) and np.all(v[:, 1] == 0)
    ps = structured_pairs(UNIT, 200, seed=6)
    rep = gain_report(lambda x: np.ones(len(x)), lambda x: x ** 0.7, 0.0, ps, label="demo")
    write_gain_csv([rep], tmp_path / "gain.csv")
    rows = list(csv.DictReader(open(tmp_path / "gain.csv")))
    assert rows[0]["label"] == "demo" and float(rows[0]["ratio"]) == pytest.approx(rep.ratio, rel=1e-15)
