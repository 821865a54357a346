# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled versions of the sampling kernels (_kernels_py is the reference).

Same signatures and bitwise-comparable results as the numpy fallback: both
consume pre-drawn sample arrays and use only elementary double arithmetic.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport M_PI, acos, atan2, cos, fabs, fmod, sin, sqrt

cnp.import_array()

cdef double TWO_PI = 2.0 * M_PI


cdef inline double _wrap_pos(double a) nogil:
    cdef double w = fmod(a, TWO_PI)
    if w < 0.0:
        w += TWO_PI
    return w


def polygon_disk_stats(zx, zy, verts, double r):
    """(chi, perimeter, area) of a convex ccw polygon cut by disks."""
    cdef cnp.ndarray[cnp.float64_t, ndim=1] x = np.ascontiguousarray(zx, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] y = np.ascontiguousarray(zy, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] v = np.ascontiguousarray(verts, dtype=np.float64)
    cdef Py_ssize_t n = x.shape[0]
    cdef Py_ssize_t k = v.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] chi = np.zeros(n)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] per = np.zeros(n)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] area = np.zeros(n)

    cdef double poly_area = 0.0, poly_per = 0.0
    cdef Py_ssize_t i, j, s, m, off
    for i in range(k):
        j = (i + 1) % k
        poly_area += 0.5 * (v[i, 0] * v[j, 1] - v[i, 1] * v[j, 0])
        poly_per += sqrt((v[j, 0] - v[i, 0]) ** 2 + (v[j, 1] - v[i, 1]) ** 2)

    # per-edge scratch: entry/exit angles (NaN-free via flags)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] ent = np.zeros(k)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] ext = np.zeros(k)
    cdef cnp.ndarray[cnp.npy_uint8, ndim=1] has_ent = np.zeros(k, dtype=np.uint8)
    cdef cnp.ndarray[cnp.npy_uint8, ndim=1] has_ext = np.zeros(k, dtype=np.uint8)

    cdef double ax, ay, ex, ey, aa, bb, cc, disc, sq, t_lo, t_hi, t0, t1
    cdef double p0x, p0y, p1x, p1y, a_acc, p_acc, arc, gap, start
    cdef bint any_cross, all_in, z_in, inside_edge, overlap
    cdef double cr

    if r == 0.0:
        for s in range(n):
            z_in = True
            for i in range(k):
                j = (i + 1) % k
                cr = (v[j, 0] - v[i, 0]) * (y[s] - v[i, 1]) - (v[j, 1] - v[i, 1]) * (x[s] - v[i, 0])
                if cr < 0.0:
                    z_in = False
                    break
            chi[s] = 1.0 if z_in else 0.0
        return chi, per, area

    for s in range(n):
        a_acc = 0.0
        p_acc = 0.0
        any_cross = False
        all_in = True
        for i in range(k):
            has_ent[i] = 0
            has_ext[i] = 0
            j = (i + 1) % k
            ax = v[i, 0] - x[s]
            ay = v[i, 1] - y[s]
            ex = v[j, 0] - v[i, 0]
            ey = v[j, 1] - v[i, 1]
            aa = ex * ex + ey * ey
            bb = 2.0 * (ax * ex + ay * ey)
            cc = ax * ax + ay * ay - r * r
            if cc > 0.0:
                all_in = False
            disc = bb * bb - 4.0 * aa * cc
            if disc > 0.0:
                sq = sqrt(disc)
                t_lo = (-bb - sq) / (2.0 * aa)
                t_hi = (-bb + sq) / (2.0 * aa)
                t0 = t_lo if t_lo > 0.0 else 0.0
                t1 = t_hi if t_hi < 1.0 else 1.0
                overlap = t1 > t0
                if overlap:
                    p0x = ax + t0 * ex
                    p0y = ay + t0 * ey
                    p1x = ax + t1 * ex
                    p1y = ay + t1 * ey
                    a_acc += 0.5 * (p0x * p1y - p0y * p1x)
                    p_acc += (t1 - t0) * sqrt(aa)
                    if 0.0 < t_lo < 1.0:
                        ent[i] = atan2(p0y, p0x)
                        has_ent[i] = 1
                        any_cross = True
                    if 0.0 < t_hi < 1.0:
                        ext[i] = atan2(p1y, p1x)
                        has_ext[i] = 1
                        any_cross = True
            elif cc < 0.0:
                # whole edge inside the disk
                p1x = ax + ex
                p1y = ay + ey
                a_acc += 0.5 * (ax * p1y - ay * p1x)
                p_acc += sqrt(aa)

        if any_cross:
            arc = 0.0
            for i in range(k):
                if not has_ext[i]:
                    continue
                start = ext[i]
                for off in range(1, k + 1):
                    m = (i + off) % k
                    if has_ent[m]:
                        gap = _wrap_pos(ent[m] - start)
                        arc += gap
                        break
            area[s] = a_acc + 0.5 * r * r * arc
            per[s] = p_acc + r * arc
            chi[s] = 1.0
        else:
            z_in = True
            for i in range(k):
                j = (i + 1) % k
                cr = (v[j, 0] - v[i, 0]) * (y[s] - v[i, 1]) - (v[j, 1] - v[i, 1]) * (x[s] - v[i, 0])
                if cr < 0.0:
                    z_in = False
                    break
            if all_in:
                area[s] = poly_area
                per[s] = poly_per
                chi[s] = 1.0
            elif z_in:
                area[s] = M_PI * r * r
                per[s] = TWO_PI * r
                chi[s] = 1.0
    return chi, per, area


def disk_disk_stats(d, double r1, double r2):
    """(chi, perimeter, area) of the planar lens of two disks."""
    cdef cnp.ndarray[cnp.float64_t, ndim=1] dd = np.ascontiguousarray(d, dtype=np.float64)
    cdef Py_ssize_t n = dd.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] chi = np.zeros(n)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] per = np.zeros(n)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] area = np.zeros(n)
    cdef double rmin = r1 if r1 < r2 else r2
    cdef double dl, a1, a2, tri, u
    cdef Py_ssize_t s
    for s in range(n):
        dl = dd[s]
        if dl <= fabs(r1 - r2):
            chi[s] = 1.0
            per[s] = TWO_PI * rmin
            area[s] = M_PI * rmin * rmin
        elif dl < r1 + r2:
            u = (dl * dl + r1 * r1 - r2 * r2) / (2.0 * dl * r1)
            a1 = acos(1.0 if u > 1.0 else (-1.0 if u < -1.0 else u))
            u = (dl * dl + r2 * r2 - r1 * r1) / (2.0 * dl * r2)
            a2 = acos(1.0 if u > 1.0 else (-1.0 if u < -1.0 else u))
            u = (-dl + r1 + r2) * (dl + r1 - r2) * (dl - r1 + r2) * (dl + r1 + r2)
            tri = 0.5 * sqrt(u if u > 0.0 else 0.0)
            chi[s] = 1.0
            per[s] = 2.0 * r1 * a1 + 2.0 * r2 * a2
            area[s] = r1 * r1 * a1 + r2 * r2 * a2 - tri
    return chi, per, area


def cap_lens_stats(cos_d, double r1, double r2):
    """(chi, perimeter, area) of the lens of two spherical caps."""
    cdef cnp.ndarray[cnp.float64_t, ndim=1] cd = np.ascontiguousarray(cos_d, dtype=np.float64)
    cdef Py_ssize_t n = cd.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] chi = np.zeros(n)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] per = np.zeros(n)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] area = np.zeros(n)
    cdef double rmin = r1 if r1 < r2 else r2
    cdef double c1 = cos(r1), c2 = cos(r2), s1 = sin(r1), s2 = sin(r2)
    cdef double dl, sd, u, psi1, psi2, interior
    cdef Py_ssize_t s
    for s in range(n):
        u = cd[s]
        dl = acos(1.0 if u > 1.0 else (-1.0 if u < -1.0 else u))
        if dl <= fabs(r1 - r2):
            chi[s] = 1.0
            per[s] = TWO_PI * sin(rmin)
            area[s] = TWO_PI * (1.0 - cos(rmin))
        elif dl < r1 + r2:
            sd = sin(dl)
            u = (c2 - c1 * cos(dl)) / (s1 * sd)
            psi1 = acos(1.0 if u > 1.0 else (-1.0 if u < -1.0 else u))
            u = (c1 - c2 * cos(dl)) / (s2 * sd)
            psi2 = acos(1.0 if u > 1.0 else (-1.0 if u < -1.0 else u))
            u = (c1 * c2 - cos(dl)) / (s1 * s2)
            interior = acos(1.0 if u > 1.0 else (-1.0 if u < -1.0 else u))
            chi[s] = 1.0
            per[s] = 2.0 * psi1 * s1 + 2.0 * psi2 * s2
            area[s] = TWO_PI - 2.0 * psi1 * c1 - 2.0 * psi2 * c2 \
                - 2.0 * (M_PI - interior)
    return chi, per, area
