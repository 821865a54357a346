"""Intersection normal cycles of transversal polygons, piece by piece.

The normal cycle of P1 inter P2 is assembled from three groups of pieces
without ever constructing the intersection polygon:

  gt-arc         a corner arc over each boundary crossing, swept between
                 the two outward normals, weighted by the crossing sign
  restricted-N1  pieces of N(P1) cut down to the part over P2
  restricted-N2  pieces of N(P2) cut down to the part over P1

Equality with the directly built normal cycle is tested weakly, on seeded
random smooth 1-forms.
"""

from dataclasses import dataclass

import numpy as np

from . import bodies
from .bodies import (CyclePiece, NormalCycle, _corner_arc, _edge_lift,
                     boundary_crossings, normal_cycle, wrap_angle)
from .contact import COSPHERE, alpha_form
from .errors import AntipodalCrossing, NotTransversal
from .forms import form_from_components

TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class WeightedPointSet:
    """Signed boundary crossings with their two outward normal angles."""

    points: tuple  # of dicts: x (2,), theta1, theta2, weight

    def __len__(self):
        return len(self.points)


def fiber_intersection(p1, p2):
    """Crossing points of the two boundaries as a signed 0-current.

    The weight is the orientation sign of the crossing, the sign of
    det(tangent1, tangent2) of the two edges.
    """
    ok, report = bodies.is_transversal(p1, p2)
    if not ok:
        raise NotTransversal(str(report["violations"]))
    pts = []
    for c in boundary_crossings(p1, p2):
        t1, t2 = c["tangent1"], c["tangent2"]
        w = int(np.sign(t1[0] * t2[1] - t1[1] * t2[0]))
        pts.append({"x": c["point"], "theta1": c["theta1"],
                    "theta2": c["theta2"], "weight": w})
    return WeightedPointSet(tuple(pts))


def gt_arcs(point_set):
    """Corner arcs over the crossing points.

    Each crossing contributes the arc of directions between the two edge
    normals, swept the short way, with the traversal direction flipped by
    the crossing weight: at a positively crossed corner of the intersection
    body the new arc runs from the normal of the P2 edge to the normal of
    the P1 edge.
    """
    pieces = []
    for p in point_set.points:
        gap = wrap_angle(p["theta2"] - p["theta1"])
        if abs(abs(gap) - np.pi) < 1e-9:
            raise AntipodalCrossing("crossing with antipodal normals")
        if p["weight"] > 0:
            start, sweep = p["theta1"], gap
        else:
            start, sweep = p["theta2"], -gap
        pieces.append(_corner_arc(p["x"], start, sweep, 1, "gt-arc"))
    return pieces


def _split_edge_piece(v0, v1, theta, inside_fn, cuts):
    """Sub-pieces of an edge lift restricted to {inside_fn}."""
    params = sorted({0.0, 1.0, *cuts})
    out = []
    for a, b in zip(params[:-1], params[1:]):
        if b - a < 1e-12:
            continue
        mid = 0.5 * (a + b)
        pt = (1 - mid) * np.asarray(v0) + mid * np.asarray(v1)
        if inside_fn(pt):
            pa = (1 - a) * np.asarray(v0) + a * np.asarray(v1)
            pb = (1 - b) * np.asarray(v0) + b * np.asarray(v1)
            out.append((pa, pb, theta))
    return out


def three_term_product(p1, p2):
    """The intersection normal cycle from the three-term current formula."""
    crossings = fiber_intersection(p1, p2)
    pieces = list(gt_arcs(crossings))
    pieces += _restricted_pieces(p1, p2, crossings, provenance="restricted-N1")
    pieces += _restricted_pieces(p2, p1, crossings, provenance="restricted-N2")
    return NormalCycle(tuple(pieces))


def _restricted_pieces(body, other, crossings, provenance):
    """Pieces of N(body) over the closed region of `other`.

    Edge lifts are split at crossing parameters and kept when their
    projection midpoint lies in `other`; vertex arcs are kept when the
    vertex itself is interior to `other`.
    """
    v = body.vertices
    k = v.shape[0]
    normals = bodies._edge_normals(v)
    jumps = bodies._corner_jumps(v)
    # crossing parameters per edge of this body
    per_edge = {i: [] for i in range(k)}
    for c in crossings.points:
        # recover the edge index by distance; crossings store edges of both
        # bodies, so match by point-on-edge test
        for i in range(k):
            a, b = v[i], v[(i + 1) % k]
            e = b - a
            L2 = float(e @ e)
            t = float((c["x"] - a) @ e) / L2
            if -1e-9 < t < 1 + 1e-9:
                d = np.linalg.norm(c["x"] - (a + t * e))
                if d < 1e-9 * max(1.0, np.sqrt(L2)):
                    per_edge[i].append(min(max(t, 0.0), 1.0))
    def inside(pt):
        return bool(other.contains(pt[None, :])[0])

    pieces = []
    for i in range(k):
        for pa, pb, theta in _split_edge_piece(v[i], v[(i + 1) % k],
                                               normals[i], inside,
                                               per_edge[i]):
            piece = _edge_lift(pa, pb, theta)
            pieces.append(CyclePiece(piece.curve, piece.velocity, 1,
                                     "edge", provenance))
        vert = v[(i + 1) % k]
        if inside(vert):
            arc = _corner_arc(vert, normals[i], jumps[i], 1, provenance)
            pieces.append(arc)
    return pieces


def random_test_form(rng, scale=1.0):
    """Smooth 1-form on the cosphere chart with mixed polynomial and
    trigonometric coefficients, for weak comparison of currents."""
    c = rng.normal(size=(3, 5)) * scale

    def make(row):
        def f(p):
            x, y, t = p[:, 0], p[:, 1], p[:, 2]
            return (row[0] + row[1] * x + row[2] * y
                    + row[3] * np.sin(t + row[4]) + row[4] * np.cos(x - y))
        return f

    return form_from_components(COSPHERE, 1, {
        (0,): make(c[0]), (1,): make(c[1]), (2,): make(c[2]),
    })


def compare_currents(a, b, k=20, seed=0, rel_tol=1e-9):
    """Max relative difference of two currents on k seeded random 1-forms."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(k):
        omega = random_test_form(rng)
        va = a.integrate(omega, rel_tol=rel_tol)
        vb = b.integrate(omega, rel_tol=rel_tol)
        worst = max(worst, abs(va - vb) / (1.0 + abs(vb)))
    return worst


def pushforward_boundary_defect(current, region, k=10, seed=1, rel_tol=1e-9):
    """Weak check that the current projects onto the region's boundary.

    Integrates pi-pulled-back planar 1-forms over the current and compares
    with the line integral over the (counterclockwise) boundary of `region`,
    a planar polygon body. Returns the max relative difference.
    """
    from .contact import PLANE, projection_map
    from .forms import pullback
    from .quadrature import integrate_1d

    pi = projection_map()
    rng = np.random.default_rng(seed)
    verts = region.vertices
    m = verts.shape[0]
    worst = 0.0
    for _ in range(k):
        c = rng.normal(size=(2, 4))

        def make(row):
            def f(p):
                x, y = p[:, 0], p[:, 1]
                return row[0] + row[1] * x + row[2] * y + row[3] * np.sin(x + y)
            return f

        eta = form_from_components(PLANE, 1, {(0,): make(c[0]), (1,): make(c[1])})
        via_current = current.integrate(pullback(pi, eta), rel_tol=rel_tol)
        line = 0.0
        for i in range(m):
            a, b = verts[i], verts[(i + 1) % m]
            d = b - a

            def integrand(t, a=a, d=d):
                pts = a[None, :] + t[:, None] * d[None, :]
                vel = np.broadcast_to(d, pts.shape)
                return eta.evaluate(pts, [vel])

            line += float(integrate_1d(integrand, 0.0, 1.0, rel_tol=rel_tol))
        worst = max(worst, abs(via_current - line) / (1.0 + abs(line)))
    return worst
