"""Monte Carlo kinematic integrals on S^2 and the windowed planar motion group.

Rotations are Haar-distributed via normalized 4-dimensional Gaussians read
as quaternions. Planar motions use a translation window large enough that
the intersection vanishes outside it, with the classical measure dx dy dt.
Estimates come in fixed-size batches with per-batch child seeds, so a
result depends only on the master seed, never on worker count.

The commutative-diagram check expresses the kinematic coefficients through
the sphere's invariant product structure; those structure constants are
solved from a training split of the Monte Carlo data itself and validated
on held-out pairs.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import least_squares

from . import bodies
from .bodies import SphericalBody
from .errors import FitConditioning, PairingSingular, SamplingDegeneracy
from .kernels import cap_lens_stats, disk_disk_stats, polygon_disk_stats
from .valuations import BASIS_NAMES

TWO_PI = 2.0 * np.pi

DEFAULT_BATCH = 50_000

# whole-sphere evaluations of the invariant basis (chi, v1, area)
SPHERE_BASIS_VALUES = np.array([2.0, 0.0, 4.0 * np.pi])


def quaternions_to_matrices(q):
    """Unit quaternions (N, 4) to rotation matrices (N, 3, 3)."""
    w, x, y, z = q[:, 0], q[:, 1], q[:, 2], q[:, 3]
    R = np.empty((q.shape[0], 3, 3))
    R[:, 0, 0] = 1 - 2 * (y * y + z * z)
    R[:, 0, 1] = 2 * (x * y - w * z)
    R[:, 0, 2] = 2 * (x * z + w * y)
    R[:, 1, 0] = 2 * (x * y + w * z)
    R[:, 1, 1] = 1 - 2 * (x * x + z * z)
    R[:, 1, 2] = 2 * (y * z - w * x)
    R[:, 2, 0] = 2 * (x * z - w * y)
    R[:, 2, 1] = 2 * (y * z + w * x)
    R[:, 2, 2] = 1 - 2 * (x * x + y * y)
    return R


def sample_group(space, rng, n, window=None):
    """Draw n group elements.

    SO(3) ("sphere"): Haar rotations as (N, 3, 3) matrices.
    SE(2) ("plane"): dict with translations (N, 2) uniform over the window
    and angles (N,) uniform over [0, 2 pi).
    """
    if space == "sphere":
        q = rng.normal(size=(n, 4))
        q /= np.linalg.norm(q, axis=1, keepdims=True)
        return quaternions_to_matrices(q)
    if space == "plane":
        if window is None:
            raise ValueError("plane sampling needs a translation window")
        x0, x1, y0, y1 = window
        tau = np.stack([rng.uniform(x0, x1, n), rng.uniform(y0, y1, n)], axis=1)
        ang = rng.uniform(0.0, TWO_PI, n)
        return {"translations": tau, "angles": ang}
    raise ValueError(f"unknown space {space!r}")


def translation_window(p1, p2, margin=1e-6):
    """Window of translations outside which P1 and gP2 cannot meet."""
    x0, x1, y0, y1 = p1.bbox()
    if p2.kind == "disk":
        reach = float(np.linalg.norm(p2.center) + p2.radius)
    else:
        reach = float(np.max(np.linalg.norm(p2.vertices, axis=1)))
    reach += margin
    return (x0 - reach, x1 + reach, y0 - reach, y1 + reach)


def _sphere_pair_stats(p1, p2, rotations):
    """(chi, perimeter, area) of P1 inter R P2 for a batch of rotations."""
    if p2.kind == "sphere":
        n = rotations.shape[0]
        return (np.full(n, p1.chi), np.full(n, p1.perimeter), np.full(n, p1.area))
    if p1.kind == "cap" and p2.kind == "cap":
        moved = rotations @ p2.center
        cos_d = moved @ p1.center
        return cap_lens_stats(cos_d, p1.radius, p2.radius)
    # generic fallback: per-draw convex clipping
    n = rotations.shape[0]
    chi = np.zeros(n)
    per = np.zeros(n)
    area = np.zeros(n)
    for i in range(n):
        g2 = p2.rotate(rotations[i])
        chi[i], per[i], area[i] = bodies.spherical_intersection_measures(p1, g2)
    return chi, per, area


def _plane_pair_stats(p1, p2, tau, ang):
    """(chi, perimeter, area) of P1 inter gP2 for planar motions g."""
    if p1.kind == "disk" and p2.kind == "disk":
        c, s = np.cos(ang), np.sin(ang)
        moved = np.stack([c * p2.center[0] - s * p2.center[1] + tau[:, 0],
                          s * p2.center[0] + c * p2.center[1] + tau[:, 1]], axis=1)
        d = np.linalg.norm(moved - p1.center, axis=1)
        return disk_disk_stats(d, p1.radius, p2.radius)
    if p1.kind == "polygon" and p2.kind == "disk":
        c, s = np.cos(ang), np.sin(ang)
        zx = c * p2.center[0] - s * p2.center[1] + tau[:, 0]
        zy = s * p2.center[0] + c * p2.center[1] + tau[:, 1]
        return polygon_disk_stats(zx, zy, p1.vertices, p2.radius)
    # generic fallback through the polygon intersection pipeline
    n = tau.shape[0]
    chi = np.zeros(n)
    per = np.zeros(n)
    area = np.zeros(n)
    rejects = 0
    for i in range(n):
        g2 = p2.transform(rotation=ang[i], translation=tau[i])
        try:
            chi[i], per[i], area[i] = bodies.intersection_measures(p1, g2)
        except Exception:
            rejects += 1
            chi[i] = np.nan
    return chi, per, area, rejects


@dataclass
class McEstimate:
    estimate: float
    stderr: float
    n: int
    seed: int
    rejects: int = 0


def mc_kinematic_integral(mu, p1, p2, n=100_000, seed=0, space="sphere",
                          batch=DEFAULT_BATCH, window=None,
                          return_triple=False):
    """Monte Carlo kinematic integral of mu(P1 inter g P2).

    Sphere: probability Haar on the rotation group. Plane: the measure
    dx dy dtheta over window x [0, 2 pi); the window defaults to the
    Minkowski-enlarged bounding box of the pair, outside which the
    integrand vanishes. Returns an McEstimate (or three, one per basis
    valuation, if return_triple is set).
    """
    mu_idx = BASIS_NAMES.index(mu) if mu in BASIS_NAMES else None
    if mu_idx is None and not return_triple:
        raise ValueError(f"unknown valuation {mu!r}")
    if space == "plane" and window is None:
        window = translation_window(p1, p2)
    weight = 1.0
    if space == "plane":
        x0, x1, y0, y1 = window
        weight = (x1 - x0) * (y1 - y0) * TWO_PI

    seq = np.random.SeedSequence(seed)
    n_batches = (n + batch - 1) // batch
    children = seq.spawn(n_batches)
    sums = np.zeros(3)
    sums2 = np.zeros(3)
    total = 0
    rejects = 0
    for bi in range(n_batches):
        m = min(batch, n - bi * batch)
        rng = np.random.default_rng(children[bi])
        if space == "sphere":
            rots = sample_group("sphere", rng, m)
            chi, per, area = _sphere_pair_stats(p1, p2, rots)
        else:
            g = sample_group("plane", rng, m, window=window)
            out = _plane_pair_stats(p1, p2, g["translations"], g["angles"])
            if len(out) == 4:
                chi, per, area, rej = out
                rejects += rej
                keep = ~np.isnan(chi)
                chi, per, area = chi[keep], per[keep], area[keep]
                m = chi.shape[0]
            else:
                chi, per, area = out
        vals = np.stack([chi, 0.5 * per, area], axis=0)
        sums += vals.sum(axis=1)
        sums2 += (vals ** 2).sum(axis=1)
        total += m
    if rejects > 0.01 * n:
        raise SamplingDegeneracy(f"{rejects} of {n} draws rejected")
    mean = sums / total
    var = np.maximum(sums2 / total - mean ** 2, 0.0)
    est = weight * mean
    err = weight * np.sqrt(var / total)
    if return_triple:
        return [McEstimate(float(est[i]), float(err[i]), total, seed, rejects)
                for i in range(3)]
    return McEstimate(float(est[mu_idx]), float(err[mu_idx]), total, seed, rejects)


def basis_values(body):
    """(chi, v1, area) of a spherical or planar body."""
    return np.array([body.chi, 0.5 * body.perimeter, body.area])


@dataclass
class KinematicCoefficients:
    mu: str
    matrix: np.ndarray        # (3, 3)
    stderr: np.ndarray        # (3, 3)
    condition: float
    residual: float


def fit_coefficients(mu, pairs, estimates, cond_limit=1e6):
    """Least-squares fit of the kinematic expansion coefficients.

    pairs: list of (P1, P2); estimates: matching McEstimate list for mu.
    The design row of a pair is the outer product of the basis values of
    the two bodies.
    """
    X = np.array([np.outer(basis_values(a), basis_values(b)).ravel()
                  for a, b in pairs])
    y = np.array([e.estimate for e in estimates])
    sig = np.array([max(e.stderr, 1e-12) for e in estimates])
    Xw = X / sig[:, None]
    yw = y / sig
    cond = np.linalg.cond(Xw)
    if cond > cond_limit:
        raise FitConditioning(f"kinematic design condition {cond:.2e}")
    coef, *_ = np.linalg.lstsq(Xw, yw, rcond=None)
    resid = float(np.max(np.abs(X @ coef - y)))
    cov = np.linalg.inv(Xw.T @ Xw)
    err = np.sqrt(np.diag(cov))
    return KinematicCoefficients(mu, coef.reshape(3, 3), err.reshape(3, 3),
                                 float(cond), resid)


# ---------------------------------------------------------------------------
# the commutative-diagram identity


def _sym_table(params):
    """Symmetric structure table with the Euler column pinned to identity."""
    m = np.zeros((3, 3, 3))
    m[0, 0] = (1.0, 0.0, 0.0)
    m[0, 1] = m[1, 0] = (0.0, 1.0, 0.0)
    m[0, 2] = m[2, 0] = (0.0, 0.0, 1.0)
    m[1, 1] = params[0:3]
    m[1, 2] = m[2, 1] = params[3:6]
    m[2, 2] = params[6:9]
    return m


def pairing_matrix(table):
    """Poincare pairing g_ij = (phi_i . phi_j)(S^2) from a structure table."""
    g = np.einsum("ijk,k->ij", table, SPHERE_BASIS_VALUES)
    cond = float(np.linalg.cond(g))
    if not np.isfinite(cond) or abs(np.linalg.det(g)) < 1e-12:
        raise PairingSingular("pairing matrix is singular")
    return g, cond


def predicted_coefficients(table, mu_idx):
    """c^mu_ij implied by the diagram identity for a structure table."""
    g, _ = pairing_matrix(table)
    ginv = np.linalg.inv(g)
    # <mu . phi_k . phi_l>(S^2), for all k, l
    inner = np.zeros((3, 3))
    for k in range(3):
        for l in range(3):
            prod_kl = table[k, l]
            coords = np.einsum("i,ijk,j->k", prod_kl, table,
                               np.eye(3)[mu_idx])
            inner[k, l] = coords @ SPHERE_BASIS_VALUES
    return ginv @ inner @ ginv.T


def _diagram_residuals(params, pairs, data):
    table = _sym_table(params)
    res = []
    for mu_idx in range(3):
        c = predicted_coefficients(table, mu_idx)
        for (p1, p2), est in zip(pairs, data[mu_idx]):
            pred = basis_values(p1) @ c @ basis_values(p2)
            res.append((pred - est.estimate) / max(est.stderr, 1e-12))
    return np.array(res)


def solve_structure_constants(pairs, data, x0=None):
    """Solve the sphere's structure constants from kinematic MC data.

    data[mu_idx] is the list of McEstimates for basis valuation mu_idx over
    the pairs. Returns (table, optimizer result).
    """
    if x0 is None:
        x0 = np.array([0.0, 0.1, 0.0, 0.0, 0.0, 0.1, 0.0, 0.0, 0.0])
    sol = least_squares(_diagram_residuals, x0, args=(pairs, data),
                        method="lm", xtol=1e-14, ftol=1e-14)
    return _sym_table(sol.x), sol


def diagram_residual(table, pairs, data):
    """Held-out residual of the diagram identity, in units of MC sigma.

    Returns (max |pred - est| / sigma, per-mu detail).
    """
    detail = {}
    worst = 0.0
    for mu_idx, name in enumerate(BASIS_NAMES):
        c = predicted_coefficients(table, mu_idx)
        rows = []
        for (p1, p2), est in zip(pairs, data[mu_idx]):
            pred = float(basis_values(p1) @ c @ basis_values(p2))
            z = abs(pred - est.estimate) / max(est.stderr, 1e-12)
            rows.append({"pred": pred, "estimate": est.estimate,
                         "stderr": est.stderr, "z": z})
            worst = max(worst, z)
        detail[name] = rows
    return worst, detail


def collect_kinematic_data(pairs, n=100_000, seed=0):
    """All three basis integrals for every pair, with split child seeds."""
    seq = np.random.SeedSequence(seed)
    children = seq.spawn(len(pairs))
    data = [[], [], []]
    for (p1, p2), child in zip(pairs, children):
        triple = mc_kinematic_integral(None, p1, p2, n=n,
                                       seed=int(child.generate_state(1)[0] % 2**31),
                                       space="sphere", return_triple=True)
        for i in range(3):
            data[i].append(triple[i])
    return data


def cap_pair_suite(count=28, seed=5):
    """Deterministic suite of cap pairs with varied radii and centers."""
    rng = np.random.default_rng(seed)
    pairs = []
    for _ in range(count):
        r1 = rng.uniform(0.3, 1.3)
        r2 = rng.uniform(0.3, 1.3)
        c1 = rng.normal(size=3)
        c2 = rng.normal(size=3)
        pairs.append((SphericalBody.cap(c1 / np.linalg.norm(c1), r1),
                      SphericalBody.cap(c2 / np.linalg.norm(c2), r2)))
    return pairs


def chi_cap_oracle(r1, r2):
    """Exact chi kinematic integral for caps under probability Haar."""
    if r1 + r2 >= np.pi:
        raise ValueError("cap oracle needs r1 + r2 < pi")
    return 0.5 * (1.0 - np.cos(r1 + r2))


def disk_chi_oracle(p1, p2):
    """Exact chi integral for planar disks under the windowed motion measure."""
    a1, a2 = p1.area, p2.area
    l1, l2 = p1.perimeter, p2.perimeter
    return TWO_PI * (a1 + a2) + l1 * l2
