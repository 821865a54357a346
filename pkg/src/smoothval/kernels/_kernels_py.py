"""Pure-numpy reference implementations of the sampling kernels.

Each kernel maps a batch of sample parameters to the triple
(chi, perimeter, area) of an intersection body, all in closed form:

  polygon_disk_stats  convex polygon cut by a disk (Green's theorem
                      around chords and arcs)
  disk_disk_stats     planar lens of two disks
  cap_lens_stats      spherical lens of two caps (Gauss-Bonnet)
"""

import numpy as np

TWO_PI = 2.0 * np.pi


def polygon_disk_stats(zx, zy, verts, r):
    """(chi, perimeter, area) of K cut by the disk of radius r at (zx, zy).

    K is a convex counterclockwise polygon with vertices `verts` of shape
    (k, 2); zx, zy are sample arrays of shape (N,). The boundary of the
    intersection is walked as chord pieces (edge parts inside the disk)
    plus circle arcs between an exit crossing and the next entry crossing.
    """
    zx = np.asarray(zx, dtype=float)
    zy = np.asarray(zy, dtype=float)
    verts = np.asarray(verts, dtype=float)
    n = zx.shape[0]
    k = verts.shape[0]
    r = float(r)

    if r == 0.0:
        chi = _inside_convex(zx, zy, verts).astype(float)
        return chi, np.zeros(n), np.zeros(n)

    # per-edge chord data, samples vectorized
    area = np.zeros(n)
    per = np.zeros(n)
    entry_ang = np.full((k, n), np.nan)
    exit_ang = np.full((k, n), np.nan)
    any_cross = np.zeros(n, dtype=bool)
    all_verts_in = np.ones(n, dtype=bool)

    for i in range(k):
        a = verts[i]
        b = verts[(i + 1) % k]
        ax = a[0] - zx
        ay = a[1] - zy
        ex = b[0] - a[0]
        ey = b[1] - a[1]
        aa = ex * ex + ey * ey
        bb = 2.0 * (ax * ex + ay * ey)
        cc = ax * ax + ay * ay - r * r
        all_verts_in &= cc <= 0.0
        disc = bb * bb - 4.0 * aa * cc
        has_line = disc > 0.0
        sq = np.sqrt(np.where(has_line, disc, 0.0))
        t_lo = (-bb - sq) / (2.0 * aa)
        t_hi = (-bb + sq) / (2.0 * aa)
        t0 = np.clip(t_lo, 0.0, 1.0)
        t1 = np.clip(t_hi, 0.0, 1.0)
        # fully inside edges (no real crossing of the circle line)
        inside_edge = (~has_line) & (cc < 0.0)
        t0 = np.where(inside_edge, 0.0, t0)
        t1 = np.where(inside_edge, 1.0, np.where(has_line, t1, 0.0))
        overlap = t1 > t0
        p0x = ax + t0 * ex
        p0y = ay + t0 * ey
        p1x = ax + t1 * ex
        p1y = ay + t1 * ey
        area += np.where(overlap, 0.5 * (p0x * p1y - p0y * p1x), 0.0)
        per += np.where(overlap, (t1 - t0) * np.sqrt(aa), 0.0)
        entering = overlap & has_line & (t_lo > 0.0) & (t_lo < 1.0)
        exiting = overlap & has_line & (t_hi > 0.0) & (t_hi < 1.0)
        entry_ang[i] = np.where(entering, np.arctan2(p0y, p0x), np.nan)
        exit_ang[i] = np.where(exiting, np.arctan2(p1y, p1x), np.nan)
        any_cross |= entering | exiting

    # pair each exit with the next entry in cyclic edge order
    has_entry = ~np.isnan(entry_ang)
    arc_total = np.zeros(n)
    for i in range(k):
        pending = ~np.isnan(exit_ang[i])
        if not np.any(pending):
            continue
        start = exit_ang[i]
        matched = np.zeros(n, dtype=bool)
        for off in range(1, k + 1):
            j = (i + off) % k
            take = pending & ~matched & has_entry[j]
            if np.any(take):
                gap = np.mod(entry_ang[j][take] - start[take], TWO_PI)
                idx = np.where(take)[0]
                arc_total[idx] += gap
                matched |= take
        # unmatched exits cannot occur for convex data; ignore silently

    area += 0.5 * r * r * arc_total
    per += r * arc_total

    # no boundary interaction: containment one way, the other, or disjoint
    quiet = ~any_cross
    if np.any(quiet):
        poly_area = _shoelace(verts)
        poly_per = float(np.sum(np.linalg.norm(np.roll(verts, -1, axis=0) - verts, axis=1)))
        z_in = _inside_convex(zx, zy, verts)
        poly_in_disk = quiet & all_verts_in
        disk_in_poly = quiet & z_in & ~all_verts_in
        area = np.where(poly_in_disk, poly_area, area)
        per = np.where(poly_in_disk, poly_per, per)
        area = np.where(disk_in_poly, np.pi * r * r, area)
        per = np.where(disk_in_poly, TWO_PI * r, per)
        empty = quiet & ~poly_in_disk & ~disk_in_poly
        area = np.where(empty, 0.0, area)
        per = np.where(empty, 0.0, per)
        chi = (~empty).astype(float)
    else:
        chi = np.ones(n)
    return chi, per, area


def _inside_convex(zx, zy, verts):
    inside = np.ones(zx.shape[0], dtype=bool)
    k = verts.shape[0]
    for i in range(k):
        a = verts[i]
        b = verts[(i + 1) % k]
        inside &= (b[0] - a[0]) * (zy - a[1]) - (b[1] - a[1]) * (zx - a[0]) >= 0.0
    return inside


def _shoelace(v):
    x, y = v[:, 0], v[:, 1]
    return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))


def disk_disk_stats(d, r1, r2):
    """(chi, perimeter, area) of the lens of two disks at center distance d."""
    d = np.asarray(d, dtype=float)
    r1, r2 = float(r1), float(r2)
    chi = np.zeros_like(d)
    per = np.zeros_like(d)
    area = np.zeros_like(d)

    contained = d <= abs(r1 - r2)
    rmin = min(r1, r2)
    chi[contained] = 1.0
    per[contained] = TWO_PI * rmin
    area[contained] = np.pi * rmin * rmin

    lens = (~contained) & (d < r1 + r2)
    dl = d[lens]
    with np.errstate(invalid="ignore"):
        a1 = np.arccos(np.clip((dl * dl + r1 * r1 - r2 * r2) / (2 * dl * r1), -1, 1))
        a2 = np.arccos(np.clip((dl * dl + r2 * r2 - r1 * r1) / (2 * dl * r2), -1, 1))
    tri = 0.5 * np.sqrt(np.clip((-dl + r1 + r2) * (dl + r1 - r2)
                                * (dl - r1 + r2) * (dl + r1 + r2), 0.0, None))
    chi[lens] = 1.0
    per[lens] = 2 * r1 * a1 + 2 * r2 * a2
    area[lens] = r1 * r1 * a1 + r2 * r2 * a2 - tri
    return chi, per, area


def cap_lens_stats(cos_d, r1, r2):
    """(chi, perimeter, area) of the intersection of two spherical caps.

    cos_d is the cosine of the angular distance between cap centers on the
    unit sphere; r1, r2 are the angular cap radii in (0, pi). The lens area
    comes from Gauss-Bonnet: 2*pi minus the geodesic-curvature integrals
    of the two circular arcs minus the two equal exterior corner angles.
    """
    cos_d = np.asarray(cos_d, dtype=float)
    r1, r2 = float(r1), float(r2)
    d = np.arccos(np.clip(cos_d, -1.0, 1.0))
    chi = np.zeros_like(d)
    per = np.zeros_like(d)
    area = np.zeros_like(d)

    contained = d <= abs(r1 - r2)
    rmin = min(r1, r2)
    chi[contained] = 1.0
    per[contained] = TWO_PI * np.sin(rmin)
    area[contained] = TWO_PI * (1.0 - np.cos(rmin))

    lens = (~contained) & (d < r1 + r2)
    dl = d[lens]
    sd = np.sin(dl)
    # half-angles of the two arcs, seen from the respective cap axes
    psi1 = np.arccos(np.clip((np.cos(r2) - np.cos(r1) * np.cos(dl))
                             / (np.sin(r1) * sd), -1.0, 1.0))
    psi2 = np.arccos(np.clip((np.cos(r1) - np.cos(r2) * np.cos(dl))
                             / (np.sin(r2) * sd), -1.0, 1.0))
    # interior corner angle between the two circles at a crossing point
    cos_int = (np.cos(r1) * np.cos(r2) - np.cos(dl)) / (np.sin(r1) * np.sin(r2))
    interior = np.arccos(np.clip(cos_int, -1.0, 1.0))
    exterior = np.pi - interior
    chi[lens] = 1.0
    per[lens] = 2 * psi1 * np.sin(r1) + 2 * psi2 * np.sin(r2)
    area[lens] = TWO_PI - 2 * psi1 * np.cos(r1) - 2 * psi2 * np.cos(r2) - 2 * exterior
    return chi, per, area
