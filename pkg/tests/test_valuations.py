import numpy as np
import pytest

from smoothval import bodies, valuations
from smoothval.bodies import PlanarBody
from smoothval.valuations import (AREA, CHI, V1, InvariantValuation,
                                  format_valuation, parse_valuation)


def test_parse_simple():
    v = parse_valuation("2*chi + 0.5*v1 - area")
    assert v.coeffs == (2.0, 0.5, -1.0)


def test_parse_without_stars_and_repeats():
    v = parse_valuation("chi+chi-3v1")
    assert v.coeffs == (2.0, -3.0, 0.0)


def test_parse_rejects_garbage():
    for bad in ("2*vol", "chi++", "", "1.5"):
        with pytest.raises(ValueError):
            parse_valuation(bad)


def test_format_parse_roundtrip():
    v = InvariantValuation((1.25, -0.5, 3.0))
    assert parse_valuation(format_valuation(v)).coeffs == v.coeffs


def test_invariant_evaluation():
    sq = PlanarBody.polygon([(0, 0), (1, 0), (1, 1), (0, 1)])
    assert CHI(sq) == 1.0
    assert V1(sq) == 2.0
    assert AREA(sq) == 1.0
    assert (2 * CHI - V1)(sq) == 0.0
    assert CHI(bodies.EMPTY) == 0.0


def test_intrinsic_volumes_match_cycle_evaluation():
    for body in (PlanarBody.polygon([(0, 0), (1.5, 0.2), (0.8, 1.1), (-0.2, 0.7)]),
                 PlanarBody.disk((0.3, 0.1), 0.7)):
        closed = valuations.intrinsic_volumes(body)
        via = valuations.intrinsic_volumes_by_cycle(body)
        assert np.allclose(closed, via, rtol=1e-9, atol=1e-12)


def test_rep_arithmetic_matches_evaluation():
    basis = valuations.standard_basis()
    body = PlanarBody.polygon([(0, 0), (1, 0), (0.3, 0.9)])
    combo = basis["chi"] * 2.0 + basis["area"] * (-1.5)
    val = valuations.evaluate(combo, body)
    assert val == pytest.approx(2.0 - 1.5 * body.area, rel=1e-9)


def test_euler_verdier_involution():
    rng = np.random.default_rng(7)
    rep = valuations.random_valuation_rep(rng)
    body = PlanarBody.polygon([(0, 0), (1, 0), (1, 1), (0, 1)])
    twice = valuations.euler_verdier(valuations.euler_verdier(rep))
    v0 = valuations.evaluate(rep, body)
    v2 = valuations.evaluate(twice, body)
    assert v2 == pytest.approx(v0, rel=1e-6, abs=1e-9)


def test_euler_verdier_fixes_chi():
    basis = valuations.standard_basis()
    body = PlanarBody.polygon([(0, 0), (1.2, 0), (0.9, 0.8), (0.1, 1.0)])
    flipped = valuations.euler_verdier(basis["chi"])
    assert valuations.evaluate(flipped, body) == pytest.approx(1.0, rel=1e-8)


def test_seminorm_scaling():
    basis = valuations.standard_basis()
    rep = basis["v1"]
    s1 = valuations.seminorm(rep, order=0)
    s3 = valuations.seminorm(rep * 3.0, order=0)
    assert s1 > 0
    assert s3 == pytest.approx(3 * s1, rel=1e-9)


def test_seminorm_monotone_in_order():
    rng = np.random.default_rng(2)
    rep = valuations.random_valuation_rep(rng)
    s0 = valuations.seminorm(rep, order=0)
    s2 = valuations.seminorm(rep, order=2)
    assert s2 >= s0 > 0
