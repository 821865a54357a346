"""Compact planar and spherical bodies, stratified boundaries, normal cycles.

Planar bodies are simple polygons (counterclockwise) or disks. The normal
cycle of a polygon lifts every edge at its constant outward-normal angle and
inserts a rotation arc at every corner; reflex corners get arcs swept in the
negative direction, which is exactly what makes the total turning equal
2*pi for any simple body.
"""

import json
from dataclasses import dataclass, field

import numpy as np

from . import quadrature
from .contact import COSPHERE
from .errors import (DegenerateBody, DomainError, NotTransversal,
                     QuadratureBudgetExceeded)

TWO_PI = 2.0 * np.pi

EVAL_REL_TOL = 1e-10


def wrap_angle(a):
    """Wrap to (-pi, pi]."""
    w = np.mod(np.asarray(a) + np.pi, TWO_PI) - np.pi
    return np.where(w == -np.pi, np.pi, w)


# ---------------------------------------------------------------------------
# planar bodies


class EmptyBody:
    """Signal value for an empty intersection."""

    area = 0.0
    perimeter = 0.0
    chi = 0.0

    def __repr__(self):
        return "EmptyBody()"


EMPTY = EmptyBody()


@dataclass(frozen=True)
class PlanarBody:
    kind: str                  # "polygon" or "disk"
    vertices: np.ndarray = None    # (k, 2), counterclockwise, polygons only
    center: np.ndarray = None
    radius: float = 0.0
    vertex_tags: tuple = None  # stratification provenance after intersection

    @staticmethod
    def polygon(vertices, tags=None, tol=1e-12):
        v = np.asarray(vertices, dtype=float).reshape(-1, 2)
        if v.shape[0] < 3:
            raise DegenerateBody("polygon needs at least 3 vertices")
        if _signed_area(v) < 0:
            v = v[::-1].copy()
            tags = tuple(reversed(tags)) if tags is not None else None
        edges = np.roll(v, -1, axis=0) - v
        lengths = np.linalg.norm(edges, axis=1)
        scale = max(np.max(np.abs(v)), 1.0)
        if np.any(lengths < tol * scale):
            raise DegenerateBody("polygon has a degenerate edge")
        if _self_intersects(v):
            raise DegenerateBody("polygon boundary is not simple")
        jumps = _corner_jumps(v)
        if np.any(np.isclose(np.abs(jumps), np.pi, atol=1e-9)) or np.any(jumps == 0.0):
            raise DegenerateBody("corner with normal jump 0 or +-pi")
        return PlanarBody("polygon", vertices=v,
                          vertex_tags=tuple(tags) if tags is not None else None)

    @staticmethod
    def disk(center, radius):
        if radius <= 0:
            raise DegenerateBody("disk radius must be positive")
        return PlanarBody("disk", center=np.asarray(center, dtype=float),
                          radius=float(radius))

    # -- basic measures ----------------------------------------------------

    @property
    def area(self):
        if self.kind == "disk":
            return np.pi * self.radius ** 2
        return _signed_area(self.vertices)

    @property
    def perimeter(self):
        if self.kind == "disk":
            return TWO_PI * self.radius
        return float(np.sum(np.linalg.norm(
            np.roll(self.vertices, -1, axis=0) - self.vertices, axis=1)))

    @property
    def chi(self):
        return 1.0

    @property
    def diameter(self):
        if self.kind == "disk":
            return 2.0 * self.radius
        d = self.vertices[:, None, :] - self.vertices[None, :, :]
        return float(np.max(np.linalg.norm(d, axis=2)))

    def bbox(self):
        if self.kind == "disk":
            cx, cy = self.center
            r = self.radius
            return np.array([cx - r, cx + r, cy - r, cy + r])
        v = self.vertices
        return np.array([v[:, 0].min(), v[:, 0].max(), v[:, 1].min(), v[:, 1].max()])

    def contains(self, pts, tol=0.0):
        pts = np.atleast_2d(pts)
        if self.kind == "disk":
            return np.linalg.norm(pts - self.center, axis=1) <= self.radius + tol
        return _points_in_polygon(pts, self.vertices, tol)

    def edge_normal_angles(self):
        """Outward normal angle of every polygon edge (ccw orientation)."""
        return _edge_normals(self.vertices)

    def transform(self, rotation=0.0, translation=(0.0, 0.0)):
        c, s = np.cos(rotation), np.sin(rotation)
        R = np.array([[c, -s], [s, c]])
        t = np.asarray(translation, dtype=float)
        if self.kind == "disk":
            return PlanarBody.disk(R @ self.center + t, self.radius)
        return PlanarBody.polygon(self.vertices @ R.T + t)


def _signed_area(v):
    x, y = v[:, 0], v[:, 1]
    return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))


def _corner_jumps(v):
    angles = _edge_normals(v)
    return wrap_angle(np.roll(angles, -1) - angles)


def _edge_normals(v):
    e = np.roll(v, -1, axis=0) - v
    t = np.arctan2(e[:, 1], e[:, 0])
    return wrap_angle(t - np.pi / 2.0)


def _self_intersects(v, tol=1e-12):
    k = v.shape[0]
    for i in range(k):
        a1, a2 = v[i], v[(i + 1) % k]
        for j in range(i + 1, k):
            if j == i or (j + 1) % k == i or (i + 1) % k == j:
                continue
            b1, b2 = v[j], v[(j + 1) % k]
            if _segments_cross(a1, a2, b1, b2, tol):
                return True
    return False


def _segments_cross(a1, a2, b1, b2, tol=1e-12):
    hit = _segment_intersection(a1, a2, b1, b2)
    if hit is None:
        return False
    s, t, _ = hit
    return tol < s < 1 - tol and tol < t < 1 - tol


def _segment_intersection(a1, a2, b1, b2):
    """Parameters (s, t, point) with a1+s(a2-a1) = b1+t(b2-b1), or None."""
    d1 = a2 - a1
    d2 = b2 - b1
    den = d1[0] * d2[1] - d1[1] * d2[0]
    if abs(den) < 1e-14 * max(np.linalg.norm(d1) * np.linalg.norm(d2), 1e-30):
        return None
    r = b1 - a1
    s = (r[0] * d2[1] - r[1] * d2[0]) / den
    t = (r[0] * d1[1] - r[1] * d1[0]) / den
    return s, t, a1 + s * d1


def _points_in_polygon(pts, v, tol=0.0):
    """Crossing-number test, vectorized over points."""
    x, y = pts[:, 0], pts[:, 1]
    inside = np.zeros(len(pts), dtype=bool)
    on_edge = np.zeros(len(pts), dtype=bool)
    k = v.shape[0]
    for i in range(k):
        x1, y1 = v[i]
        x2, y2 = v[(i + 1) % k]
        cond = (y1 > y) != (y2 > y)
        with np.errstate(divide="ignore", invalid="ignore"):
            xs = x1 + (y - y1) * (x2 - x1) / (y2 - y1)
        inside ^= cond & (x < np.where(cond, xs, np.inf))
        if tol > 0:
            ex, ey = x2 - x1, y2 - y1
            L2 = ex * ex + ey * ey
            tproj = np.clip(((x - x1) * ex + (y - y1) * ey) / L2, 0.0, 1.0)
            d2 = (x - (x1 + tproj * ex)) ** 2 + (y - (y1 + tproj * ey)) ** 2
            on_edge |= d2 <= tol * tol
    return inside | on_edge


# ---------------------------------------------------------------------------
# normal cycles


@dataclass(frozen=True)
class CyclePiece:
    curve: object       # t (M,) in [0,1] -> (M, 3) cosphere points
    velocity: object    # t (M,) -> (M, 3)
    multiplicity: int = 1
    kind: str = "edge"  # edge | arc | loop
    provenance: str = "body"


@dataclass(frozen=True)
class NormalCycle:
    pieces: tuple

    def integrate(self, omega, rel_tol=1e-10, budget=quadrature.DEFAULT_BUDGET):
        """Integrate a 1-form on the cosphere chart over the cycle."""
        total = 0.0
        for piece in self.pieces:
            curve, vel = piece.curve, piece.velocity

            def integrand(t):
                pts = curve(t)
                return omega.evaluate(pts, [vel(t)])

            val = quadrature.integrate_1d(integrand, 0.0, 1.0,
                                          rel_tol=rel_tol, budget=budget)
            total += piece.multiplicity * float(val)
        return total

    def endpoints(self):
        out = []
        for piece in self.pieces:
            ends = piece.curve(np.array([0.0, 1.0]))
            out.append((_embed(ends[0]), _embed(ends[1]), piece.multiplicity))
        return out

    def closure_defect(self):
        """Max norm of the boundary 0-chain (endpoint mismatch)."""
        chain = {}
        for start, end, mult in self.endpoints():
            for key, w in ((tuple(np.round(start, 9)), -mult),
                           (tuple(np.round(end, 9)), mult)):
                chain[key] = chain.get(key, 0) + w
        return max((abs(w) for w in chain.values()), default=0)

    def legendrian_defect(self, alpha, samples=64):
        t = np.linspace(0.0, 1.0, samples)
        worst = 0.0
        for piece in self.pieces:
            vals = alpha.evaluate(piece.curve(t), [piece.velocity(t)])
            worst = max(worst, float(np.max(np.abs(vals))))
        return worst

    def reversed(self):
        out = []
        for p in self.pieces:
            out.append(_reverse_piece(p))
        return NormalCycle(tuple(out))


def _reverse_piece(p):
    curve, vel = p.curve, p.velocity
    return CyclePiece(lambda t: curve(1.0 - np.asarray(t)),
                      lambda t: -vel(1.0 - np.asarray(t)),
                      p.multiplicity, p.kind, p.provenance)


def _embed(pt):
    """(x, y, theta) -> (x, y, cos t, sin t) so angle identification is exact."""
    return np.array([pt[0], pt[1], np.cos(pt[2]), np.sin(pt[2])])


def _edge_lift(p0, p1, theta):
    p0 = np.asarray(p0, dtype=float)
    d = np.asarray(p1, dtype=float) - p0

    def curve(t):
        t = np.atleast_1d(np.asarray(t, dtype=float))
        out = np.empty((t.size, 3))
        out[:, 0] = p0[0] + t * d[0]
        out[:, 1] = p0[1] + t * d[1]
        out[:, 2] = theta
        return out

    def velocity(t):
        t = np.atleast_1d(np.asarray(t, dtype=float))
        out = np.zeros((t.size, 3))
        out[:, 0] = d[0]
        out[:, 1] = d[1]
        return out

    return CyclePiece(curve, velocity, 1, "edge")


def _corner_arc(vertex, theta_from, sweep, multiplicity=1, provenance="body"):
    vx, vy = float(vertex[0]), float(vertex[1])

    def curve(t):
        t = np.atleast_1d(np.asarray(t, dtype=float))
        out = np.empty((t.size, 3))
        out[:, 0] = vx
        out[:, 1] = vy
        out[:, 2] = theta_from + t * sweep
        return out

    def velocity(t):
        t = np.atleast_1d(np.asarray(t, dtype=float))
        out = np.zeros((t.size, 3))
        out[:, 2] = sweep
        return out

    return CyclePiece(curve, velocity, multiplicity, "arc", provenance)


def normal_cycle(body):
    """Oriented piecewise-smooth lift of the boundary to the cosphere chart."""
    if body is EMPTY or isinstance(body, EmptyBody):
        return NormalCycle(())
    if body.kind == "disk":
        cx, cy = body.center
        r = body.radius

        def curve(t):
            t = np.atleast_1d(np.asarray(t, dtype=float))
            th = TWO_PI * t
            return np.stack([cx + r * np.cos(th), cy + r * np.sin(th), th], axis=1)

        def velocity(t):
            t = np.atleast_1d(np.asarray(t, dtype=float))
            th = TWO_PI * t
            return np.stack([-TWO_PI * r * np.sin(th), TWO_PI * r * np.cos(th),
                             np.full(t.size, TWO_PI)], axis=1)

        return NormalCycle((CyclePiece(curve, velocity, 1, "loop"),))

    v = body.vertices
    normals = _edge_normals(v)
    jumps = _corner_jumps(v)
    pieces = []
    k = v.shape[0]
    for i in range(k):
        pieces.append(_edge_lift(v[i], v[(i + 1) % k], normals[i]))
        # corner at v[i+1], rotating from this edge normal to the next
        pieces.append(_corner_arc(v[(i + 1) % k], normals[i], jumps[i]))
    return NormalCycle(tuple(pieces))


def integrate_over_cycle(cycle, omega, rel_tol=1e-10,
                         budget=quadrature.DEFAULT_BUDGET):
    if isinstance(cycle, (PlanarBody, EmptyBody)):
        cycle = normal_cycle(cycle)
    return cycle.integrate(omega, rel_tol=rel_tol, budget=budget)


def integrate_density(body, phi, rel_tol=1e-9, budget=quadrature.DEFAULT_BUDGET):
    """Integral of a 2-form over the body (fan decomposition + quadrature)."""
    if body is EMPTY or isinstance(body, EmptyBody):
        return 0.0
    if phi.degree != 2:
        raise ValueError("integrate_density expects a 2-form on the plane")
    if body.kind == "disk":
        cx, cy = body.center
        r = body.radius

        def f(u, v):
            rho = r * u
            th = TWO_PI * v
            pts = np.stack([cx + rho * np.cos(th), cy + rho * np.sin(th)], axis=1)
            return phi.components(pts)[:, 0] * (r * rho * TWO_PI)

        val, _ = quadrature.integrate_unit_square(f, rel_tol=rel_tol, budget=budget)
        return float(val)

    v = body.vertices
    centroid = v.mean(axis=0)
    total = 0.0
    for i in range(v.shape[0]):
        a, b = v[i], v[(i + 1) % v.shape[0]]
        e1 = a - centroid
        e2 = b - centroid
        det = e1[0] * e2[1] - e1[1] * e2[0]

        def f(u, w, e1=e1, e2=e2, det=det):
            # map the unit square onto the triangle (centroid, a, b)
            s = u
            t = w * (1.0 - u)
            pts = centroid[None, :] + np.outer(s, e1) + np.outer(t, e2)
            jac = det * (1.0 - u)
            return phi.components(pts)[:, 0] * jac

        val, _ = quadrature.integrate_unit_square(f, rel_tol=rel_tol, budget=budget)
        total += float(val)
    return total


# ---------------------------------------------------------------------------
# transversality and intersection


def is_transversal(p1, p2, dist_tol=None, angle_tol=1e-6):
    """Stratum-by-stratum transversality for planar bodies.

    True iff no vertex of either body sits on the other's boundary and every
    boundary crossing is at an angle above tolerance. Returns (bool, report).
    """
    if p1.kind == "disk" and p2.kind == "disk":
        d = float(np.linalg.norm(p1.center - p2.center))
        scale = max(p1.diameter, p2.diameter)
        tol = dist_tol if dist_tol is not None else 1e-9 * scale
        sep = min(abs(d - (p1.radius + p2.radius)), abs(d - abs(p1.radius - p2.radius)))
        return sep > tol, {"violations": [] if sep > tol else ["tangent circles"]}
    if p1.kind != "polygon" or p2.kind != "polygon":
        raise NotImplementedError("mixed disk/polygon transversality is not supported")
    scale = max(p1.diameter, p2.diameter)
    tol = dist_tol if dist_tol is not None else 1e-9 * scale
    violations = []
    for body, other, name in ((p1, p2, "P1"), (p2, p1, "P2")):
        for vert in body.vertices:
            d = _distance_to_boundary(vert, other.vertices)
            if d < tol:
                violations.append(f"vertex of {name} at {vert} lies on the other boundary (d={d:.2e})")
    va, vb = p1.vertices, p2.vertices
    for i in range(va.shape[0]):
        a1, a2 = va[i], va[(i + 1) % va.shape[0]]
        for j in range(vb.shape[0]):
            b1, b2 = vb[j], vb[(j + 1) % vb.shape[0]]
            hit = _segment_intersection(a1, a2, b1, b2)
            if hit is None:
                # parallel; coincident overlapping edges are a violation
                if _segments_overlap(a1, a2, b1, b2, tol):
                    violations.append(f"edges {i}/{j} overlap")
                continue
            s, t, _ = hit
            if -tol < s < 1 + tol and -tol < t < 1 + tol:
                if not (tol < s < 1 - tol and tol < t < 1 - tol):
                    continue  # endpoint hits are caught by the vertex test
                ta = (a2 - a1) / np.linalg.norm(a2 - a1)
                tb = (b2 - b1) / np.linalg.norm(b2 - b1)
                ang = abs(np.arcsin(np.clip(ta[0] * tb[1] - ta[1] * tb[0], -1, 1)))
                if ang < angle_tol:
                    violations.append(f"edges {i}/{j} cross at angle {ang:.2e}")
    return len(violations) == 0, {"violations": violations}


def _distance_to_boundary(pt, verts):
    k = verts.shape[0]
    best = np.inf
    for i in range(k):
        a, b = verts[i], verts[(i + 1) % k]
        e = b - a
        t = np.clip(np.dot(pt - a, e) / np.dot(e, e), 0.0, 1.0)
        best = min(best, float(np.linalg.norm(pt - (a + t * e))))
    return best


def _segments_overlap(a1, a2, b1, b2, tol):
    ta = a2 - a1
    n = np.array([-ta[1], ta[0]]) / np.linalg.norm(ta)
    if abs(np.dot(b1 - a1, n)) > tol or abs(np.dot(b2 - a1, n)) > tol:
        return False
    L = np.dot(ta, ta)
    s1 = np.dot(b1 - a1, ta) / L
    s2 = np.dot(b2 - a1, ta) / L
    lo, hi = min(s1, s2), max(s1, s2)
    return hi > tol and lo < 1 - tol


def boundary_crossings(p1, p2):
    """All transversal crossings of the two polygon boundaries.

    Each entry: dict with point, edge indices, edge tangents and the two
    outward normal angles.
    """
    out = []
    va, vb = p1.vertices, p2.vertices
    na, nb = _edge_normals(va), _edge_normals(vb)
    for i in range(va.shape[0]):
        a1, a2 = va[i], va[(i + 1) % va.shape[0]]
        for j in range(vb.shape[0]):
            b1, b2 = vb[j], vb[(j + 1) % vb.shape[0]]
            hit = _segment_intersection(a1, a2, b1, b2)
            if hit is None:
                continue
            s, t, pt = hit
            if 0.0 < s < 1.0 and 0.0 < t < 1.0:
                out.append({
                    "point": pt, "edge1": i, "edge2": j, "s": s, "t": t,
                    "tangent1": (a2 - a1), "tangent2": (b2 - b1),
                    "theta1": float(na[i]), "theta2": float(nb[j]),
                })
    return out


def intersect_transversal(p1, p2):
    """Intersection body of two transversal planar bodies.

    Polygon/polygon uses boundary traversal and records, per output vertex,
    whether it is a crossing-type corner or inherited from an input body.
    Returns EMPTY when disjoint and the contained body under containment.
    """
    ok, report = is_transversal(p1, p2)
    if not ok:
        raise NotTransversal(str(report["violations"]))
    if p1.kind == "disk" and p2.kind == "disk":
        return _intersect_disks(p1, p2)
    crossings = boundary_crossings(p1, p2)
    if not crossings:
        if p2.contains(p1.vertices[:1])[0]:
            return p1
        if p1.contains(p2.vertices[:1])[0]:
            return p2
        return EMPTY
    # walk: split each boundary at crossing parameters, keep chains inside
    # the other body, stitch chains at crossings
    chains = _inside_chains(p1, p2, crossings, which=1) + \
        _inside_chains(p2, p1, crossings, which=2)
    loops = _stitch_chains(chains)
    if len(loops) != 1:
        bodies = [PlanarBody.polygon([pt for pt, _ in loop],
                                     tags=[tag for _, tag in loop])
                  for loop in loops]
        return bodies
    verts = [pt for pt, _ in loops[0]]
    tags = [tag for _, tag in loops[0]]
    return PlanarBody.polygon(verts, tags=tags)


def _intersect_disks(p1, p2):
    d = float(np.linalg.norm(p1.center - p2.center))
    if d >= p1.radius + p2.radius:
        return EMPTY
    if d <= abs(p1.radius - p2.radius):
        return p1 if p1.radius <= p2.radius else p2
    return _Lens(p1, p2, d)


class _Lens:
    """Intersection of two overlapping disks (closed-form measures)."""

    kind = "lens"
    chi = 1.0

    def __init__(self, d1, d2, d):
        self.d1, self.d2, self.d = d1, d2, d
        r1, r2 = d1.radius, d2.radius
        a1 = np.arccos(np.clip((d * d + r1 * r1 - r2 * r2) / (2 * d * r1), -1, 1))
        a2 = np.arccos(np.clip((d * d + r2 * r2 - r1 * r1) / (2 * d * r2), -1, 1))
        self.perimeter = 2 * r1 * a1 + 2 * r2 * a2
        tri = 0.5 * np.sqrt(max((-d + r1 + r2) * (d + r1 - r2)
                                * (d - r1 + r2) * (d + r1 + r2), 0.0))
        self.area = r1 * r1 * a1 + r2 * r2 * a2 - tri


def _inside_chains(body, other, crossings, which):
    """Maximal boundary sub-chains of `body` lying inside `other`.

    Each chain is a list of (point, tag) pairs, endpoints being crossings.
    """
    v = body.vertices
    k = v.shape[0]
    per_edge = {i: [] for i in range(k)}
    for c in crossings:
        idx = c["edge1"] if which == 1 else c["edge2"]
        par = c["s"] if which == 1 else c["t"]
        per_edge[idx].append((par, c))
    # boundary as a list of (position, tag) nodes in traversal order
    nodes = []
    for i in range(k):
        nodes.append((v[i], ("inherited", which, i)))
        for par, c in sorted(per_edge[i], key=lambda e: e[0]):
            nodes.append((c["point"], ("crossing", _crossing_key(c))))
    # break into chains at crossings, keep chains whose interior is inside
    cross_positions = [idx for idx, (_, tag) in enumerate(nodes) if tag[0] == "crossing"]
    chains = []
    m = len(nodes)
    for ci in range(len(cross_positions)):
        start = cross_positions[ci]
        end = cross_positions[(ci + 1) % len(cross_positions)]
        chain = [nodes[start]]
        idx = (start + 1) % m
        while idx != end:
            chain.append(nodes[idx])
            idx = (idx + 1) % m
        chain.append(nodes[end])
        mids = _chain_midpoint(chain)
        if other.contains(mids[None, :])[0]:
            chains.append(chain)
    return chains


def _crossing_key(c):
    return (c["edge1"], c["edge2"], round(c["s"], 12))


def _chain_midpoint(chain):
    pts = np.array([p for p, _ in chain])
    segs = np.linalg.norm(np.diff(pts, axis=0), axis=1)
    total = segs.sum()
    target = total / 2.0
    acc = 0.0
    for i, L in enumerate(segs):
        if acc + L >= target:
            f = (target - acc) / L
            return pts[i] * (1 - f) + pts[i + 1] * f
        acc += L
    return pts[0]


def _stitch_chains(chains):
    """Join chains end-to-start at shared crossing keys into closed loops."""
    unused = list(range(len(chains)))
    loops = []
    while unused:
        i = unused.pop(0)
        loop = list(chains[i])
        start_key = loop[0][1]
        while True:
            end_key = loop[-1][1]
            if end_key == start_key:
                loop.pop()  # closed; drop the duplicate node
                break
            nxt = None
            for j in unused:
                if chains[j][0][1] == end_key:
                    nxt = j
                    break
            if nxt is None:
                raise NotTransversal("failed to stitch intersection boundary")
            unused.remove(nxt)
            loop = loop[:-1] + list(chains[nxt])
        loops.append([(pt, tag[0]) for pt, tag in loop])
    return loops


def intersection_measures(p1, p2):
    """(chi, perimeter, area) of the intersection of two planar bodies."""
    body = intersect_transversal(p1, p2)
    if body is EMPTY:
        return 0.0, 0.0, 0.0
    if isinstance(body, list):
        return (float(len(body)), sum(b.perimeter for b in body),
                sum(b.area for b in body))
    return 1.0, body.perimeter, body.area


# ---------------------------------------------------------------------------
# spherical bodies


@dataclass(frozen=True)
class SphericalBody:
    kind: str                  # "spolygon" | "cap" | "sphere"
    vertices: np.ndarray = None  # (k, 3) unit vectors, counterclockwise
    center: np.ndarray = None
    radius: float = 0.0

    @staticmethod
    def polygon(vertices):
        v = np.asarray(vertices, dtype=float).reshape(-1, 3)
        v = v / np.linalg.norm(v, axis=1, keepdims=True)
        if v.shape[0] < 3:
            raise DegenerateBody("spherical polygon needs >= 3 vertices")
        dots = np.einsum("ij,ij->i", v, np.roll(v, -1, axis=0))
        if np.any(dots <= -1 + 1e-12):
            raise DegenerateBody("antipodal consecutive vertices")
        body = SphericalBody("spolygon", vertices=v)
        if body.area < 0:
            body = SphericalBody("spolygon", vertices=v[::-1].copy())
        return body

    @staticmethod
    def cap(center, radius):
        c = np.asarray(center, dtype=float)
        c = c / np.linalg.norm(c)
        if not 0.0 < radius < np.pi:
            raise DegenerateBody("cap radius must lie in (0, pi)")
        return SphericalBody("cap", center=c, radius=float(radius))

    @staticmethod
    def sphere():
        return SphericalBody("sphere")

    @property
    def chi(self):
        return 2.0 if self.kind == "sphere" else 1.0

    @property
    def area(self):
        if self.kind == "sphere":
            return 4.0 * np.pi
        if self.kind == "cap":
            return TWO_PI * (1.0 - np.cos(self.radius))
        return _spherical_polygon_area(self.vertices)

    @property
    def perimeter(self):
        if self.kind == "sphere":
            return 0.0
        if self.kind == "cap":
            return TWO_PI * np.sin(self.radius)
        v = self.vertices
        dots = np.clip(np.einsum("ij,ij->i", v, np.roll(v, -1, axis=0)), -1, 1)
        return float(np.sum(np.arccos(dots)))

    def is_convex(self):
        if self.kind in ("cap", "sphere"):
            return True
        v = self.vertices
        k = v.shape[0]
        normals = np.cross(v, np.roll(v, -1, axis=0))
        for i in range(k):
            if np.any(v @ normals[i] < -1e-9):
                return False
        return True

    def rotate(self, R):
        if self.kind == "sphere":
            return self
        if self.kind == "cap":
            return SphericalBody("cap", center=R @ self.center, radius=self.radius)
        return SphericalBody("spolygon", vertices=self.vertices @ R.T)


def _spherical_polygon_area(v):
    """Signed spherical excess: sum of interior angles minus (k-2)*pi."""
    k = v.shape[0]
    total = 0.0
    for i in range(k):
        a, b, c = v[(i - 1) % k], v[i], v[(i + 1) % k]
        ta = a - np.dot(a, b) * b
        tc = c - np.dot(c, b) * b
        ta /= np.linalg.norm(ta)
        tc /= np.linalg.norm(tc)
        ang = np.arctan2(np.dot(b, np.cross(tc, ta)), np.dot(ta, tc))
        total += np.mod(ang, TWO_PI)
    return float(total - (k - 2) * np.pi)


def cap_intersection_measures(cos_d, r1, r2):
    """(chi, perimeter, area) of the intersection of two caps.

    cos_d is the cosine of the angular distance between the cap centers.
    Vectorized over cos_d. Uses Gauss-Bonnet for the lens area: each cap
    boundary circle has geodesic curvature cot(r).
    """
    from .kernels import cap_lens_stats
    return cap_lens_stats(np.atleast_1d(np.asarray(cos_d, dtype=float)),
                          float(r1), float(r2))


def intersect_spherical_convex(b1, b2):
    """Intersection of two geodesically convex spherical polygons."""
    if b1.kind == "sphere":
        return b2
    if b2.kind == "sphere":
        return b1
    if b1.kind == "cap" and b2.kind == "cap":
        raise NotImplementedError("use cap_intersection_measures for cap pairs")
    if b1.kind != "spolygon" or b2.kind != "spolygon":
        raise NotImplementedError("mixed cap/polygon intersection is not supported")
    verts = list(b1.vertices)
    clip = b2.vertices
    k = clip.shape[0]
    for i in range(k):
        n = np.cross(clip[i], clip[(i + 1) % k])
        n = n / np.linalg.norm(n)
        verts = _clip_by_hemisphere(verts, n)
        if len(verts) < 3:
            return EMPTY
    return SphericalBody.polygon(np.array(verts))


def _clip_by_hemisphere(verts, n, tol=1e-12):
    """Clip a spherical polygon by the hemisphere <p, n> >= 0."""
    out = []
    k = len(verts)
    for i in range(k):
        a, b = verts[i], verts[(i + 1) % k]
        da, db = np.dot(a, n), np.dot(b, n)
        if da >= -tol:
            out.append(a)
        if (da > tol and db < -tol) or (da < -tol and db > tol):
            # great-circle point between a and b on the clip plane
            p = a * db - b * da
            norm = np.linalg.norm(p)
            if norm > tol:
                out.append(p / norm)
    # remove near-duplicates
    dedup = []
    for p in out:
        if not dedup or np.linalg.norm(p - dedup[-1]) > 1e-12:
            dedup.append(p)
    if len(dedup) > 1 and np.linalg.norm(dedup[0] - dedup[-1]) <= 1e-12:
        dedup.pop()
    return dedup


def spherical_intersection_measures(b1, b2):
    """(chi, perimeter, area) of the intersection of spherical bodies."""
    if b1.kind == "cap" and b2.kind == "cap":
        chi, per, area = cap_intersection_measures(
            np.dot(b1.center, b2.center), b1.radius, b2.radius)
        return float(chi[0]), float(per[0]), float(area[0])
    body = intersect_spherical_convex(b1, b2)
    if body is EMPTY:
        return 0.0, 0.0, 0.0
    return body.chi, body.perimeter, body.area


# ---------------------------------------------------------------------------
# body I/O


def body_from_dict(spec):
    kind = spec.get("type")
    if kind == "polygon":
        return PlanarBody.polygon(spec["vertices"])
    if kind == "disk":
        return PlanarBody.disk(spec["center"], spec["radius"])
    if kind == "spolygon":
        return SphericalBody.polygon(spec["vertices"])
    if kind == "cap":
        return SphericalBody.cap(spec["center"], spec["radius"])
    if kind == "sphere":
        return SphericalBody.sphere()
    raise ValueError(f"unknown body type {kind!r}")


def load_body(path):
    with open(path) as fh:
        return body_from_dict(json.load(fh))


def body_to_dict(body):
    if isinstance(body, PlanarBody):
        if body.kind == "polygon":
            return {"type": "polygon", "vertices": body.vertices.tolist()}
        return {"type": "disk", "center": body.center.tolist(), "radius": body.radius}
    if isinstance(body, SphericalBody):
        if body.kind == "spolygon":
            return {"type": "spolygon", "vertices": body.vertices.tolist()}
        if body.kind == "cap":
            return {"type": "cap", "center": body.center.tolist(), "radius": body.radius}
        return {"type": "sphere"}
    raise ValueError("cannot serialize this body")
