"""Chart-based numerical exterior calculus.

Forms are stored over strictly increasing multi-indices of the chart axes:
a degree-k form on a d-dimensional chart is a vectorized coefficient
function mapping points (N, d) to components (N, C(d, k)), ordered like
itertools.combinations(range(d), k). Alternation therefore holds by
construction. Exterior derivatives are central differences with one
Richardson extrapolation level.
"""

import itertools
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .errors import ChartMismatch, DegreeError, DomainError

DEFAULT_STEP = 1e-4


@dataclass(frozen=True)
class Chart:
    name: str
    dim: int
    coord_names: tuple
    domain: object = None  # optional predicate, pts (N, dim) -> bool (N,)

    def __post_init__(self):
        if self.dim < 1 or len(self.coord_names) != self.dim:
            raise ValueError("chart dim / coord_names mismatch")

    def check(self, pts):
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        if pts.shape[1] != self.dim:
            raise DomainError(f"points have dim {pts.shape[1]}, chart {self.name} has dim {self.dim}")
        if self.domain is not None:
            ok = np.asarray(self.domain(pts))
            if not np.all(ok):
                bad = pts[~ok][0]
                raise DomainError(f"point {bad} outside domain of chart {self.name}")
        return pts


@lru_cache(maxsize=None)
def combos(dim, k):
    return tuple(itertools.combinations(range(dim), k))


@lru_cache(maxsize=None)
def combo_index(dim, k):
    return {c: i for i, c in enumerate(combos(dim, k))}


def _merge_sign(i_combo, j_combo):
    """Sign of sorting the concatenation of two disjoint increasing tuples."""
    seq = list(i_combo) + list(j_combo)
    sign = 1
    for a in range(len(seq)):
        for b in range(a + 1, len(seq)):
            if seq[a] > seq[b]:
                sign = -sign
    return sign


@dataclass(frozen=True)
class DifferentialForm:
    chart: Chart
    degree: int
    coeffs: object  # pts (N, dim) -> (N, C(dim, degree))

    def __post_init__(self):
        if self.degree < 0:
            raise DegreeError("negative form degree")

    @property
    def n_components(self):
        if self.degree > self.chart.dim:
            return 1
        return len(combos(self.chart.dim, self.degree))

    def components(self, pts):
        pts = self.chart.check(pts)
        out = np.asarray(self.coeffs(pts), dtype=float)
        out = out.reshape(pts.shape[0], self.n_components)
        return out

    def evaluate(self, pts, vectors):
        """Evaluate on k tangent vector fields, each of shape (N, dim)."""
        pts = self.chart.check(pts)
        k = self.degree
        if len(vectors) != k:
            raise DegreeError(f"need {k} vectors, got {len(vectors)}")
        comp = self.components(pts)
        if k == 0:
            return comp[:, 0]
        vecs = [np.atleast_2d(np.asarray(v, dtype=float)) for v in vectors]
        total = np.zeros(pts.shape[0])
        for idx, I in enumerate(combos(self.chart.dim, k)):
            mat = np.stack([np.stack([vecs[c][:, r] for c in range(k)], axis=-1)
                            for r in I], axis=-2)
            total += comp[:, idx] * np.linalg.det(mat)
        return total

    def __add__(self, other):
        if not isinstance(other, DifferentialForm):
            return NotImplemented
        if other.chart != self.chart or other.degree != self.degree:
            raise ChartMismatch("cannot add forms of different charts/degrees")
        a, b = self.coeffs, other.coeffs
        return DifferentialForm(self.chart, self.degree,
                                lambda pts: np.asarray(a(pts)) + np.asarray(b(pts)))

    def __sub__(self, other):
        return self + (-1.0) * other

    def __mul__(self, scalar):
        s = float(scalar)
        c = self.coeffs
        return DifferentialForm(self.chart, self.degree,
                                lambda pts: s * np.asarray(c(pts)))

    __rmul__ = __mul__

    def __neg__(self):
        return (-1.0) * self


def zero_form(chart, degree):
    n = len(combos(chart.dim, degree)) if degree <= chart.dim else 1

    def coeffs(pts):
        pts = np.atleast_2d(pts)
        return np.zeros((pts.shape[0], max(n, 1)))

    return DifferentialForm(chart, degree, coeffs)


def form_from_components(chart, degree, component_map):
    """Build a form from {increasing multi-index tuple: callable or constant}."""
    table = combo_index(chart.dim, degree)
    entries = []
    for key, val in component_map.items():
        key = tuple(key) if not isinstance(key, int) else (key,)
        if key not in table:
            raise DegreeError(f"{key} is not an increasing {degree}-index of {chart.name}")
        entries.append((table[key], val))
    n = len(table)

    def coeffs(pts):
        pts = np.atleast_2d(pts)
        out = np.zeros((pts.shape[0], n))
        for idx, val in entries:
            out[:, idx] += val(pts) if callable(val) else float(val)
        return out

    return DifferentialForm(chart, degree, coeffs)


def wedge(a, b):
    """Exterior product; returns the zero form when the degree exceeds dim."""
    if a.chart != b.chart:
        raise ChartMismatch(f"wedge on charts {a.chart.name} vs {b.chart.name}")
    chart = a.chart
    deg = a.degree + b.degree
    if deg > chart.dim:
        return zero_form(chart, deg)
    table = combo_index(chart.dim, deg)
    ia = combo_index(chart.dim, a.degree)
    ib = combo_index(chart.dim, b.degree)
    plan = []
    for I in combos(chart.dim, a.degree):
        for J in combos(chart.dim, b.degree):
            if set(I) & set(J):
                continue
            K = tuple(sorted(I + J))
            plan.append((ia[I], ib[J], table[K], _merge_sign(I, J)))
    ca, cb = a.coeffs, b.coeffs

    def coeffs(pts):
        pts = np.atleast_2d(pts)
        va = np.asarray(ca(pts)).reshape(pts.shape[0], -1)
        vb = np.asarray(cb(pts)).reshape(pts.shape[0], -1)
        out = np.zeros((pts.shape[0], len(table)))
        for i, j, k, s in plan:
            out[:, k] += s * va[:, i] * vb[:, j]
        return out

    return DifferentialForm(chart, deg, coeffs)


def _partials(coeffs, pts, dim, h, axes=None):
    """Richardson-extrapolated central differences of a coefficient array.

    Returns d[j][n, c] = d(coeff_c)/dx_j at pts[n] for each requested axis.
    All stencil evaluations go through a single vectorized call.
    """
    pts = np.atleast_2d(pts)
    axes = range(dim) if axes is None else axes
    axes = list(axes)
    stencil = []
    for j in axes:
        for step in (h, h / 2.0):
            for sgn in (1.0, -1.0):
                shifted = pts.copy()
                shifted[:, j] += sgn * step
                stencil.append(shifted)
    big = np.concatenate(stencil, axis=0)
    vals = np.asarray(coeffs(big))
    vals = vals.reshape(len(stencil), pts.shape[0], -1)
    out = {}
    for i, j in enumerate(axes):
        fp, fm, fp2, fm2 = vals[4 * i], vals[4 * i + 1], vals[4 * i + 2], vals[4 * i + 3]
        d_h = (fp - fm) / (2.0 * h)
        d_h2 = (fp2 - fm2) / h
        out[j] = (4.0 * d_h2 - d_h) / 3.0
    return out


def exterior_derivative(a, h=DEFAULT_STEP):
    """d by central differences; result degree a.degree + 1."""
    chart = a.chart
    if a.degree >= chart.dim:
        return zero_form(chart, a.degree + 1)
    k = a.degree
    src = combo_index(chart.dim, k)
    dst = combo_index(chart.dim, k + 1)
    # coefficient of dx_K is sum over j in K of sign * d(a_{K\j})/dx_j
    plan = []
    for K in combos(chart.dim, k + 1):
        for pos, j in enumerate(K):
            rest = tuple(x for x in K if x != j)
            plan.append((dst[K], j, src[rest], (-1.0) ** pos))
    ca = a.coeffs

    def coeffs(pts):
        pts = np.atleast_2d(pts)
        d = _partials(ca, pts, chart.dim, h)
        out = np.zeros((pts.shape[0], len(dst)))
        for kidx, j, ridx, s in plan:
            out[:, kidx] += s * d[j][:, ridx]
        return out

    return DifferentialForm(chart, k + 1, coeffs)


@dataclass(frozen=True)
class SmoothMap:
    source: Chart
    target: Chart
    eval: object              # pts (N, s) -> (N, t)
    jacobian: object = None   # pts (N, s) -> (N, t, s); finite differences if None
    name: str = ""

    def __call__(self, pts):
        pts = self.source.check(pts)
        out = np.atleast_2d(np.asarray(self.eval(pts), dtype=float))
        return out.reshape(pts.shape[0], self.target.dim)

    def jac(self, pts, h=DEFAULT_STEP):
        pts = self.source.check(pts)
        if self.jacobian is not None:
            J = np.asarray(self.jacobian(pts), dtype=float)
            return J.reshape(pts.shape[0], self.target.dim, self.source.dim)
        return self.fd_jacobian(pts, h)

    def fd_jacobian(self, pts, h=DEFAULT_STEP):
        pts = np.atleast_2d(pts)
        n, s = pts.shape
        ev = self.eval
        cols = []
        for j in range(s):
            p = pts.copy()
            m = pts.copy()
            p[:, j] += h
            m[:, j] -= h
            cols.append((np.asarray(ev(p)) - np.asarray(ev(m))) / (2.0 * h))
        return np.stack(cols, axis=-1)


def compose(f, g):
    """The map g o f (apply f first)."""
    if f.target != g.source:
        raise ChartMismatch("cannot compose maps: chart mismatch")

    def ev(pts):
        return g(f(pts))

    def jac(pts):
        Jf = f.jac(pts)
        Jg = g.jac(f(pts))
        return np.einsum("nij,njk->nik", Jg, Jf)

    return SmoothMap(f.source, g.target, ev, jac, name=f"{g.name}o{f.name}")


def identity_map(chart):
    def jac(pts):
        pts = np.atleast_2d(pts)
        return np.broadcast_to(np.eye(chart.dim), (pts.shape[0], chart.dim, chart.dim)).copy()

    return SmoothMap(chart, chart, lambda pts: np.atleast_2d(pts).copy(), jac, name="id")


def pullback(f, a):
    """Pull a form on f.target back to f.source."""
    if a.chart != f.target:
        raise ChartMismatch(f"pullback: form lives on {a.chart.name}, map targets {f.target.name}")
    k = a.degree
    src_chart = f.source
    if k > src_chart.dim:
        return zero_form(src_chart, k)
    src_combos = combos(src_chart.dim, k)
    tgt_combos = combos(f.target.dim, k) if k <= f.target.dim else ()

    def coeffs(pts):
        pts = np.atleast_2d(pts)
        if k > f.target.dim:
            return np.zeros((pts.shape[0], max(len(src_combos), 1)))
        q = f(pts)
        J = f.jac(pts)
        aq = a.components(q)
        out = np.zeros((pts.shape[0], len(src_combos)))
        if k == 0:
            return aq
        for si, S in enumerate(src_combos):
            sub = J[:, :, S]
            for ti, T in enumerate(tgt_combos):
                minor = np.linalg.det(sub[:, T, :])
                out[:, si] += aq[:, ti] * minor
        return out

    return DifferentialForm(src_chart, k, coeffs)


def product_chart(base, fiber_names, domain=None):
    return Chart(f"{base.name}x{'_'.join(fiber_names)}",
                 base.dim + len(fiber_names),
                 tuple(base.coord_names) + tuple(fiber_names),
                 domain)


@dataclass(frozen=True)
class FiberBundle:
    """Compact-fiber bundle described by an explicit fiber parametrization.

    `param` maps the product chart (base coords, then fiber coords) into the
    total chart and must be a section over the base: projecting param(b, f)
    recovers b. `rule()` yields fiber quadrature nodes (M, fiber_dim) and
    weights (M,), already including any domain Jacobian.
    """
    base: Chart
    total: Chart
    fiber_dim: int
    param: SmoothMap
    rule: object

    def __post_init__(self):
        if self.param.source.dim != self.base.dim + self.fiber_dim:
            raise ChartMismatch("bundle param must start on base x fiber chart")
        if self.param.target != self.total:
            raise ChartMismatch("bundle param must land in the total chart")


def fiber_integrate(a, bundle, weight_sign=1.0):
    """Push a form down along the bundle by fiber quadrature.

    Result degree is a.degree - fiber_dim. The coefficient over a base
    multi-index I is the fiber integral of the pulled-back coefficient over
    (I, fiber axes); with fiber axes stored last this is already increasing.
    """
    l = bundle.fiber_dim
    if a.chart != bundle.total:
        raise ChartMismatch("form does not live on the bundle total space")
    if a.degree < l:
        raise DegreeError(f"cannot fiber-integrate degree {a.degree} along {l}-dim fibers")
    k = a.degree - l
    base = bundle.base
    prod = bundle.param.source
    pb = pullback(bundle.param, a)
    fiber_axes = tuple(range(base.dim, base.dim + l))
    table = combo_index(prod.dim, a.degree)
    sel = [table[tuple(I) + fiber_axes] for I in combos(base.dim, k)]
    nodes, weights = bundle.rule()
    nodes = np.atleast_2d(np.asarray(nodes, dtype=float)).reshape(-1, l)
    weights = np.asarray(weights, dtype=float)

    # cap on rows of the expanded (point, fiber-node) batch; keeps memory
    # bounded when nested derivative stencils multiply the point count
    max_rows = 100_000

    def coeffs(pts):
        pts = np.atleast_2d(pts)
        n, m = pts.shape[0], nodes.shape[0]
        step = max(max_rows // m, 1)
        chunks = []
        for lo in range(0, n, step):
            part = pts[lo:lo + step]
            q = part.shape[0]
            big = np.concatenate(
                [np.repeat(part, m, axis=0), np.tile(nodes, (q, 1))], axis=1)
            vals = pb.coeffs(big).reshape(q, m, -1)
            chunks.append(np.tensordot(vals[:, :, sel], weights, axes=(1, 0)))
        return weight_sign * np.concatenate(chunks, axis=0)

    return DifferentialForm(base, k, coeffs)
