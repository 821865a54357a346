"""The cosphere bundle of the plane and its contact calculus.

Chart (x, y, theta) with contact form alpha = cos(theta) dx + sin(theta) dy.
The contact plane ker(alpha) is spanned by the frame
e_beta = (-sin t, cos t, 0) and e_gamma = (0, 0, 1); d(alpha) = -beta^gamma
pairs them non-degenerately, which is what makes the pointwise solve inside
the Rumin projection a scalar division.
"""

import numpy as np

from . import forms
from .errors import ContactDegeneracy
from .forms import (Chart, DifferentialForm, FiberBundle, SmoothMap,
                    exterior_derivative, form_from_components, pullback,
                    product_chart, wedge)
from .quadrature import panel_rule

PLANE = Chart("R2", 2, ("x", "y"))
COSPHERE = Chart("SR2", 3, ("x", "y", "theta"))

TWO_PI = 2.0 * np.pi


def alpha_form(chart=COSPHERE):
    return form_from_components(chart, 1, {
        (0,): lambda p: np.cos(p[:, 2]),
        (1,): lambda p: np.sin(p[:, 2]),
    })


def beta_form(chart=COSPHERE):
    return form_from_components(chart, 1, {
        (0,): lambda p: -np.sin(p[:, 2]),
        (1,): lambda p: np.cos(p[:, 2]),
    })


def gamma_form(chart=COSPHERE):
    return form_from_components(chart, 1, {(2,): 1.0})


def contact_frame(pts):
    """Vectors spanning ker(alpha) at each point, shapes (N, 3) each."""
    pts = np.atleast_2d(pts)
    t = pts[:, 2]
    e_beta = np.stack([-np.sin(t), np.cos(t), np.zeros_like(t)], axis=1)
    e_gamma = np.zeros_like(e_beta)
    e_gamma[:, 2] = 1.0
    return e_beta, e_gamma


def projection_map():
    """pi: cosphere bundle -> plane."""

    def jac(pts):
        pts = np.atleast_2d(pts)
        J = np.zeros((pts.shape[0], 2, 3))
        J[:, 0, 0] = 1.0
        J[:, 1, 1] = 1.0
        return J

    return SmoothMap(COSPHERE, PLANE, lambda p: np.atleast_2d(p)[:, :2].copy(),
                     jac, name="pi")


def involution_map():
    """s: (x, y, theta) -> (x, y, theta + pi)."""

    def ev(pts):
        out = np.atleast_2d(pts).copy()
        out[:, 2] += np.pi
        return out

    def jac(pts):
        pts = np.atleast_2d(pts)
        return np.broadcast_to(np.eye(3), (pts.shape[0], 3, 3)).copy()

    return SmoothMap(COSPHERE, COSPHERE, ev, jac, name="s")


def circle_bundle(panels=8, order=12):
    """pi as a fiber bundle with the S^1 fiber parametrized by theta."""
    prod = product_chart(PLANE, ("theta",))

    def ev(pts):
        return np.atleast_2d(pts).copy()

    def jac(pts):
        pts = np.atleast_2d(pts)
        return np.broadcast_to(np.eye(3), (pts.shape[0], 3, 3)).copy()

    param = SmoothMap(prod, COSPHERE, ev, jac, name="circle_param")

    def rule():
        nodes, weights = panel_rule(0.0, TWO_PI, panels, order)
        return nodes.reshape(-1, 1), weights

    return FiberBundle(PLANE, COSPHERE, 1, param, rule)


def fiber_push(a, panels=8, order=12):
    """pi_* for forms on the cosphere chart."""
    return forms.fiber_integrate(a, circle_bundle(panels, order))


def is_vertical(a, samples, tol=None):
    """Check that a form vanishes on the contact distribution.

    Returns (verdict, max_residual). tol defaults to 1e-6 times the sup of
    the form's coefficients on the sample set.
    """
    pts = np.atleast_2d(samples)
    e_beta, e_gamma = contact_frame(pts)
    if a.degree == 1:
        residual = max(np.max(np.abs(a.evaluate(pts, [e_beta]))),
                       np.max(np.abs(a.evaluate(pts, [e_gamma]))))
    elif a.degree == 2:
        residual = np.max(np.abs(a.evaluate(pts, [e_beta, e_gamma])))
    elif a.degree >= 3:
        residual = 0.0
    else:
        raise ValueError("verticality is defined for forms of degree >= 1")
    if tol is None:
        tol = 1e-6 * max(np.max(np.abs(a.components(pts))), 1.0)
    return bool(residual < tol), float(residual)


def rumin_Q(a, h=forms.DEFAULT_STEP):
    """Projection adding the unique vertical correction f*alpha to a 1-form.

    The correction solves (da + f d(alpha))(e_beta, e_gamma) = 0 pointwise.
    """
    if a.chart != COSPHERE or a.degree != 1:
        raise ValueError("rumin_Q expects a 1-form on the cosphere chart")
    alpha = alpha_form()
    da = exterior_derivative(a, h)
    dalpha = exterior_derivative(alpha, h)

    def f(pts):
        pts = np.atleast_2d(pts)
        e_beta, e_gamma = contact_frame(pts)
        num = da.evaluate(pts, [e_beta, e_gamma])
        den = dalpha.evaluate(pts, [e_beta, e_gamma])
        if np.any(np.abs(den) < 1e-8):
            raise ContactDegeneracy("d(alpha) degenerate on the contact plane")
        return -num / den

    a_coeffs = a.coeffs
    alpha_coeffs = alpha.coeffs

    def coeffs(pts):
        pts = np.atleast_2d(pts)
        return np.asarray(a_coeffs(pts)) + f(pts)[:, None] * np.asarray(alpha_coeffs(pts))

    return DifferentialForm(COSPHERE, 1, coeffs)


def rumin_D(a, h=forms.DEFAULT_STEP):
    """Second-order operator d o Q on 1-forms of the cosphere chart."""
    return exterior_derivative(rumin_Q(a, h), h)


def sample_grid(window, n_side=5, theta_count=8):
    """Grid of cosphere points over a planar window [x0, x1, y0, y1]."""
    x0, x1, y0, y1 = window
    xs = np.linspace(x0, x1, n_side)
    ys = np.linspace(y0, y1, n_side)
    ts = np.linspace(0.0, TWO_PI, theta_count, endpoint=False)
    X, Y, T = np.meshgrid(xs, ys, ts, indexing="ij")
    return np.stack([X.ravel(), Y.ravel(), T.ravel()], axis=1)


def check_trivial_pair(omega, phi, bodies, window=(-1.5, 1.5, -1.5, 1.5),
                       h=forms.DEFAULT_STEP):
    """Residual report for the triviality characterization of a pair.

    Reports (i) sup |D(omega) + pi^* phi| on a grid, (ii) sup |pi_* omega|
    on a planar grid, (iii) max |evaluation on the test bodies|. The pair
    represents the zero valuation iff (i) and (ii) vanish.
    """
    from .valuations import ValuationRep, evaluate  # deferred: avoids cycle

    pi = projection_map()
    grid = sample_grid(window)
    lhs = rumin_D(omega, h) + pullback(pi, phi)
    rumin_residual = float(np.max(np.abs(lhs.components(grid))))

    pushed = fiber_push(omega)
    x0, x1, y0, y1 = window
    xs, ys = np.meshgrid(np.linspace(x0, x1, 7), np.linspace(y0, y1, 7), indexing="ij")
    base_grid = np.stack([xs.ravel(), ys.ravel()], axis=1)
    push_residual = float(np.max(np.abs(pushed.components(base_grid))))

    rep = ValuationRep(omega, phi)
    evals = [evaluate(rep, body) for body in bodies]
    eval_residual = float(max((abs(v) for v in evals), default=0.0))
    return {
        "rumin_residual": rumin_residual,
        "pushforward_residual": push_residual,
        "max_body_evaluation": eval_residual,
        "body_evaluations": evals,
    }


class SphereCosphere:
    """Embedded cosphere bundle of the unit sphere.

    Points are pairs (p, v) in R^3 x R^3 with |p| = 1, <p, v> = 0, |v| = 1.
    Only constraint bookkeeping is needed here; the sphere-side experiments
    evaluate valuations geometrically rather than through chart forms.
    """

    @staticmethod
    def check(p, v, tol=1e-10):
        p = np.atleast_2d(p)
        v = np.atleast_2d(v)
        r1 = np.abs(np.linalg.norm(p, axis=1) - 1.0)
        r2 = np.abs(np.einsum("ij,ij->i", p, v))
        r3 = np.abs(np.linalg.norm(v, axis=1) - 1.0)
        return bool(np.max(np.concatenate([r1, r2, r3])) < tol)

    @staticmethod
    def project(p, v):
        """Nearest point on the constraint manifold."""
        p = np.atleast_2d(p).astype(float)
        v = np.atleast_2d(v).astype(float)
        p = p / np.linalg.norm(p, axis=1, keepdims=True)
        v = v - np.einsum("ij,ij->i", p, v)[:, None] * p
        v = v / np.linalg.norm(v, axis=1, keepdims=True)
        return p, v
