import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from smoothval import forms
from smoothval.errors import ChartMismatch, DegreeError

R2 = forms.Chart("R2", 2, ("x", "y"))
R3 = forms.Chart("R3", 3, ("x", "y", "z"))


def poly_form(chart, degree, coeff_rows):
    rows = [np.asarray(r, dtype=float) for r in coeff_rows]

    def coeffs(pts):
        cols = []
        for r in rows:
            cols.append(r[0] + pts @ r[1:1 + chart.dim])
        return np.stack(cols, axis=1)

    return forms.DifferentialForm(chart, degree, coeffs)


def rand_pts(rng, dim, n=7, scale=1.5):
    return rng.uniform(-scale, scale, size=(n, dim))


def test_combo_index_roundtrip():
    for dim in (2, 3, 4):
        for k in range(dim + 1):
            cs = forms.combos(dim, k)
            lookup = forms.combo_index(dim, k)
            for i, c in enumerate(cs):
                assert lookup[c] == i


def test_zero_form_components():
    z = forms.zero_form(R3, 2)
    pts = np.zeros((4, 3))
    assert np.all(z.components(pts) == 0.0)
    assert z.n_components == 3


def test_negative_degree_rejected():
    with pytest.raises(DegreeError):
        forms.DifferentialForm(R2, -1, lambda p: p)


def test_wedge_chart_mismatch():
    a = forms.form_from_components(R2, 1, {(0,): 1.0})
    b = forms.form_from_components(R3, 1, {(0,): 1.0})
    with pytest.raises(ChartMismatch):
        forms.wedge(a, b)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2 ** 31 - 1))
def test_wedge_one_forms_antisymmetric(seed):
    rng = np.random.default_rng(seed)
    a = poly_form(R3, 1, rng.normal(size=(3, 4)))
    b = poly_form(R3, 1, rng.normal(size=(3, 4)))
    pts = rand_pts(rng, 3)
    ab = forms.wedge(a, b).components(pts)
    ba = forms.wedge(b, a).components(pts)
    assert np.allclose(ab, -ba, atol=1e-12)


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 2 ** 31 - 1))
def test_wedge_associative(seed):
    rng = np.random.default_rng(seed)
    a = poly_form(R3, 1, rng.normal(size=(3, 4)))
    b = poly_form(R3, 1, rng.normal(size=(3, 4)))
    c = poly_form(R3, 1, rng.normal(size=(3, 4)))
    pts = rand_pts(rng, 3)
    left = forms.wedge(forms.wedge(a, b), c).components(pts)
    right = forms.wedge(a, forms.wedge(b, c)).components(pts)
    assert np.allclose(left, right, atol=1e-12)


@settings(max_examples=10, deadline=None)
@given(st.integers(0, 2 ** 31 - 1))
def test_d_squared_zero(seed):
    rng = np.random.default_rng(seed)

    def coeffs(pts):
        x, y, z = pts[:, 0], pts[:, 1], pts[:, 2]
        c = np.stack([np.sin(x) * y, x * z ** 2, np.cos(y + z)], axis=1)
        return c

    a = forms.DifferentialForm(R3, 1, coeffs)
    dda = forms.exterior_derivative(forms.exterior_derivative(a))
    pts = rand_pts(rng, 3, scale=1.0)
    assert np.max(np.abs(dda.components(pts))) < 1e-6


def test_exterior_derivative_polynomial_exact():
    # d(x y dx) = -x dx^dy up to FD error
    a = forms.form_from_components(R2, 1, {(0,): lambda p: p[:, 0] * p[:, 1]})
    da = forms.exterior_derivative(a)
    pts = np.array([[0.3, -0.7], [1.1, 0.4]])
    assert np.allclose(da.components(pts)[:, 0], -pts[:, 0], atol=1e-8)


def test_leibniz_rule():
    rng = np.random.default_rng(3)
    a = poly_form(R3, 1, rng.normal(size=(3, 4)))
    b = poly_form(R3, 1, rng.normal(size=(3, 4)))
    pts = rand_pts(rng, 3)
    lhs = forms.exterior_derivative(forms.wedge(a, b))
    rhs = forms.wedge(forms.exterior_derivative(a), b) \
        - forms.wedge(a, forms.exterior_derivative(b))
    assert np.allclose(lhs.components(pts), rhs.components(pts), atol=1e-6)


def test_pullback_composition():
    rng = np.random.default_rng(9)

    f = forms.SmoothMap(R3, R2, lambda p: np.stack(
        [p[:, 0] + p[:, 2] ** 2, p[:, 1] * p[:, 2]], axis=1))
    g = forms.SmoothMap(R2, R2, lambda p: np.stack(
        [np.sin(p[:, 0]), p[:, 0] + p[:, 1]], axis=1))
    a = poly_form(R2, 1, rng.normal(size=(2, 3)))
    pts = rand_pts(rng, 3, scale=0.8)
    via_compose = forms.pullback(forms.compose(f, g), a).components(pts)
    stepwise = forms.pullback(f, forms.pullback(g, a)).components(pts)
    assert np.allclose(via_compose, stepwise, atol=1e-6)


def test_pullback_top_degree_jacobian():
    # pulling back dx^dy along a linear map multiplies by the determinant
    A = np.array([[2.0, 1.0], [0.5, 3.0]])
    f = forms.SmoothMap(R2, R2, lambda p: p @ A.T,
                        jacobian=lambda p: np.broadcast_to(A, (p.shape[0], 2, 2)))
    vol = forms.form_from_components(R2, 2, {(0, 1): 1.0})
    back = forms.pullback(f, vol)
    pts = np.array([[0.1, 0.2], [1.0, -1.0]])
    assert np.allclose(back.components(pts)[:, 0], np.linalg.det(A))


def test_evaluate_matches_components():
    rng = np.random.default_rng(4)
    a = poly_form(R2, 2, rng.normal(size=(1, 3)))
    pts = rand_pts(rng, 2)
    u = rng.normal(size=(pts.shape[0], 2))
    v = rng.normal(size=(pts.shape[0], 2))
    det = u[:, 0] * v[:, 1] - u[:, 1] * v[:, 0]
    expected = a.components(pts)[:, 0] * det
    assert np.allclose(a.evaluate(pts, [u, v]), expected)


def test_fiber_integrate_constant():
    # pushing f(x, y) dx^dtheta down the circle fiber gives 2 pi f dx
    from smoothval.contact import COSPHERE, fiber_push
    a = forms.form_from_components(COSPHERE, 2,
                                   {(0, 2): lambda p: 1.0 + 0.0 * p[:, 0]})
    pushed = fiber_push(a)
    pts = np.array([[0.0, 0.0], [1.0, 2.0]])
    assert np.allclose(pushed.components(pts)[:, 0], 2 * np.pi, atol=1e-10)
