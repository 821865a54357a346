import numpy as np
import pytest

from smoothval import bodies, currents
from smoothval.bodies import PlanarBody, normal_cycle
from smoothval.errors import NotTransversal


def offset_squares(dx=0.5, dy=0.5):
    a = PlanarBody.polygon([(0, 0), (1, 0), (1, 1), (0, 1)])
    return a, a.transform(translation=(dx, dy))


def test_fiber_intersection_signs():
    a, b = offset_squares()
    ws = currents.fiber_intersection(a, b)
    assert len(ws) == 2
    assert sorted(p["weight"] for p in ws.points) == [-1, 1]


def test_three_term_equals_direct_offset_squares():
    a, b = offset_squares()
    current = currents.three_term_product(a, b)
    direct = normal_cycle(bodies.intersect_transversal(a, b))
    assert current.closure_defect() < 1e-9
    assert currents.compare_currents(current, direct, k=10, seed=0) < 1e-9


def test_three_term_rotated_pair():
    a = PlanarBody.polygon([(0, 0), (1.4, 0.1), (1.1, 1.2), (-0.1, 0.9)])
    b = PlanarBody.polygon([(0.3, -0.45), (1.3, 0.5), (0.4, 1.45), (-0.55, 0.5)])
    current = currents.three_term_product(a, b)
    direct = normal_cycle(bodies.intersect_transversal(a, b))
    assert currents.compare_currents(current, direct, k=10, seed=1) < 1e-9


def test_containment_reduces_to_inner_cycle():
    big = PlanarBody.polygon([(-3, -3), (3, -3), (3, 3), (-3, 3)])
    small = PlanarBody.polygon([(0, 0), (1, 0), (0.4, 0.9)])
    current = currents.three_term_product(big, small)
    # no crossings: the current is exactly N(small)
    assert all(p.provenance == "restricted-N2" for p in current.pieces)
    direct = normal_cycle(small)
    assert currents.compare_currents(current, direct, k=10, seed=2) < 1e-12


def test_disjoint_is_zero_current():
    a = PlanarBody.polygon([(0, 0), (1, 0), (1, 1), (0, 1)])
    b = a.transform(translation=(5.0, 0.0))
    current = currents.three_term_product(a, b)
    assert len(current.pieces) == 0
    rng = np.random.default_rng(0)
    omega = currents.random_test_form(rng)
    assert current.integrate(omega) == 0.0


def test_nontransversal_raises():
    a = PlanarBody.polygon([(0, 0), (1, 0), (1, 1), (0, 1)])
    b = PlanarBody.polygon([(1, 0.2), (2, 0.2), (2, 0.8), (1, 0.8)])
    with pytest.raises(NotTransversal):
        currents.three_term_product(a, b)


def test_pushforward_is_boundary():
    a, b = offset_squares()
    current = currents.three_term_product(a, b)
    inter = bodies.intersect_transversal(a, b)
    assert currents.pushforward_boundary_defect(current, inter) < 1e-8


def test_piece_provenance_bookkeeping():
    a, b = offset_squares()
    current = currents.three_term_product(a, b)
    tags = {p.provenance for p in current.pieces}
    assert tags == {"gt-arc", "restricted-N1", "restricted-N2"}
