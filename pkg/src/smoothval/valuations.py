"""Smooth valuations on convex bodies of the plane.

A valuation is carried by a representing pair (omega, phi): a 1-form on the
cosphere chart and a 2-form on the plane. Its value on a body is the normal
cycle integral of omega plus the bulk integral of phi. Translation-invariant
valuations are handled in closed form through the (chi, v1, area) basis.
"""

import re
from dataclasses import dataclass

import numpy as np

from . import bodies, contact, forms, quadrature
from .contact import COSPHERE, PLANE, alpha_form, beta_form, gamma_form
from .errors import DegreeError
from .forms import DifferentialForm, form_from_components, pullback, zero_form

TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class ValuationRep:
    """Representing pair of a smooth valuation."""

    omega: DifferentialForm
    phi: DifferentialForm

    def __post_init__(self):
        if self.omega.chart != COSPHERE or self.omega.degree != 1:
            raise DegreeError("omega must be a 1-form on the cosphere chart")
        if self.phi.chart != PLANE or self.phi.degree != 2:
            raise DegreeError("phi must be a 2-form on the plane")

    def __add__(self, other):
        return ValuationRep(self.omega + other.omega, self.phi + other.phi)

    def __mul__(self, c):
        return ValuationRep(self.omega * c, self.phi * c)

    __rmul__ = __mul__

    def __sub__(self, other):
        return self + other * (-1.0)


def rep_from_forms(omega=None, phi=None):
    if omega is None:
        omega = zero_form(COSPHERE, 1)
    if phi is None:
        phi = zero_form(PLANE, 2)
    return ValuationRep(omega, phi)


def evaluate(rep, body, rel_tol=1e-10, budget=quadrature.DEFAULT_BUDGET):
    """Value of the valuation on a planar body."""
    if body is bodies.EMPTY or isinstance(body, bodies.EmptyBody):
        return 0.0
    cyc = bodies.normal_cycle(body)
    val = cyc.integrate(rep.omega, rel_tol=rel_tol, budget=budget)
    val += bodies.integrate_density(body, rep.phi, rel_tol=max(rel_tol, 1e-9),
                                    budget=budget)
    return float(val)


def standard_basis():
    """Representing pairs for chi, v1 (half perimeter) and area.

    chi is gamma/(2*pi) on the cycle (total turning over 2*pi), v1 is beta/2
    (arc length of the projected boundary over 2) and area is the bulk form.
    """
    area = form_from_components(PLANE, 2, {(0, 1): 1.0})
    return {
        "chi": rep_from_forms(omega=gamma_form() * (1.0 / TWO_PI)),
        "v1": rep_from_forms(omega=beta_form() * 0.5),
        "area": rep_from_forms(phi=area),
    }


BASIS_NAMES = ("chi", "v1", "area")


@dataclass(frozen=True)
class InvariantValuation:
    """Linear combination over the invariant basis (chi, v1, area)."""

    coeffs: tuple  # (c_chi, c_v1, c_area)

    def __call__(self, body):
        if body is bodies.EMPTY or isinstance(body, bodies.EmptyBody):
            return 0.0
        c0, c1, c2 = self.coeffs
        return c0 * body.chi + c1 * 0.5 * body.perimeter + c2 * body.area

    def rep(self):
        basis = standard_basis()
        out = basis["chi"] * self.coeffs[0]
        out = out + basis["v1"] * self.coeffs[1]
        out = out + basis["area"] * self.coeffs[2]
        return out

    def __add__(self, other):
        return InvariantValuation(tuple(a + b for a, b in zip(self.coeffs, other.coeffs)))

    def __mul__(self, c):
        return InvariantValuation(tuple(c * a for a in self.coeffs))

    __rmul__ = __mul__

    def __sub__(self, other):
        return self + other * (-1.0)


CHI = InvariantValuation((1.0, 0.0, 0.0))
V1 = InvariantValuation((0.0, 1.0, 0.0))
AREA = InvariantValuation((0.0, 0.0, 1.0))

_TERM = re.compile(r"([+-]?)\s*(?:(\d+(?:\.\d+)?(?:[eE][+-]?\d+)?)\s*\*?\s*)?(chi|v1|area)")


def parse_valuation(text):
    """Parse strings like '2*chi + 0.5*v1 - area' into an InvariantValuation."""
    coeffs = dict.fromkeys(BASIS_NAMES, 0.0)
    stripped = text.replace(" ", "")
    pos = 0
    for m in _TERM.finditer(stripped):
        if m.start() != pos:
            raise ValueError(f"cannot parse valuation {text!r}")
        pos = m.end()
        sign = -1.0 if m.group(1) == "-" else 1.0
        mag = float(m.group(2)) if m.group(2) else 1.0
        coeffs[m.group(3)] += sign * mag
    if pos != len(stripped) or pos == 0:
        raise ValueError(f"cannot parse valuation {text!r}")
    return InvariantValuation((coeffs["chi"], coeffs["v1"], coeffs["area"]))


def format_valuation(val, digits=12):
    parts = []
    for c, name in zip(val.coeffs, BASIS_NAMES):
        if c != 0.0:
            parts.append(f"{c:+.{digits}g}*{name}")
    return " ".join(parts) if parts else "0"


def intrinsic_volumes(body):
    """(V0, V1, V2) = (chi, half perimeter, area) in closed form."""
    if body is bodies.EMPTY or isinstance(body, bodies.EmptyBody):
        return 0.0, 0.0, 0.0
    return float(body.chi), 0.5 * body.perimeter, float(body.area)


def intrinsic_volumes_by_cycle(body, rel_tol=1e-10):
    """Same triple, but computed by integrating the representing pairs."""
    basis = standard_basis()
    return tuple(evaluate(basis[name], body, rel_tol=rel_tol)
                 for name in BASIS_NAMES)


def euler_verdier(rep):
    """Involution sigma: pull omega back along the fiberwise antipode.

    On the plane (even dimension) the bulk form keeps its sign and the
    boundary form picks up the antipodal pullback only.
    """
    s = contact.involution_map()
    return ValuationRep(pullback(s, rep.omega), rep.phi)


def seminorm(rep, order=0, window=(-1.5, 1.5, -1.5, 1.5), n_side=6,
             theta_count=12, h=1e-3):
    """C^order sup seminorm of the representing pair over a window.

    Measures the given representative: sup over sample points of all
    coefficient values of omega and phi together with their coordinate
    derivatives up to the requested order (finite differences).
    """
    grid3 = contact.sample_grid(window, n_side=n_side, theta_count=theta_count)
    x0, x1, y0, y1 = window
    xs, ys = np.meshgrid(np.linspace(x0, x1, n_side),
                         np.linspace(y0, y1, n_side), indexing="ij")
    grid2 = np.stack([xs.ravel(), ys.ravel()], axis=1)

    def sup_derivs(coeffs, pts, dim):
        def grad_of(base):
            def d(q):
                outs = []
                for ax in range(dim):
                    sh = np.zeros(dim)
                    sh[ax] = h
                    outs.append((np.asarray(base(q + sh), dtype=float)
                                 - np.asarray(base(q - sh), dtype=float)) / (2 * h))
                return np.concatenate([np.atleast_2d(o.T).T for o in outs], axis=-1)
            return d

        cur = coeffs
        worst = float(np.max(np.abs(np.asarray(cur(pts), dtype=float))))
        for _ in range(order):
            cur = grad_of(cur)
            worst = max(worst, float(np.max(np.abs(cur(pts)))))
        return worst

    return max(sup_derivs(rep.omega.coeffs, grid3, 3),
               sup_derivs(rep.phi.coeffs, grid2, 2))


def random_valuation_rep(rng, scale=1.0):
    """Smooth representing pair with bounded trigonometric coefficients."""
    def make_coeff(key):
        a = rng.normal(size=6) * scale

        def f(p):
            x, y = p[:, 0], p[:, 1]
            t = p[:, 2] if p.shape[1] == 3 else 0.0 * x
            return (a[0] + a[1] * np.sin(x) + a[2] * np.cos(y)
                    + a[3] * np.sin(t) + a[4] * np.cos(t)
                    + a[5] * np.sin(x + y))
        return f

    omega = form_from_components(COSPHERE, 1, {
        (0,): make_coeff("dx"), (1,): make_coeff("dy"), (2,): make_coeff("dt"),
    })
    phi = form_from_components(PLANE, 2, {(0, 1): make_coeff("dxdy")})
    return ValuationRep(omega, phi)
