import importlib

import numpy as np
import pytest

from smoothval import kernels
from smoothval.kernels import _kernels_py as pyk

SQUARE = np.array([(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)])
TRI = np.array([(0.0, 0.0), (1.6, 0.2), (0.5, 1.3)])

try:
    from smoothval.kernels import _kernels as ck
except ImportError:
    ck = None


def mc_polygon_disk(cx, cy, verts, r, n=400_000, seed=0):
    """Brute-force area of polygon inter disk by rejection sampling."""
    rng = np.random.default_rng(seed)
    ang = rng.uniform(0, 2 * np.pi, n)
    rad = r * np.sqrt(rng.uniform(0, 1, n))
    pts = np.stack([cx + rad * np.cos(ang), cy + rad * np.sin(ang)], axis=1)
    from smoothval.bodies import _points_in_polygon
    frac = np.mean(_points_in_polygon(pts, verts))
    return np.pi * r * r * frac


def test_polygon_disk_containment_cases():
    # disk well inside the polygon
    chi, per, area = pyk.polygon_disk_stats(np.array([0.5]), np.array([0.5]),
                                            SQUARE, 0.2)
    assert chi[0] == 1.0
    assert per[0] == pytest.approx(2 * np.pi * 0.2)
    assert area[0] == pytest.approx(np.pi * 0.04)
    # disk far away
    chi, per, area = pyk.polygon_disk_stats(np.array([5.0]), np.array([5.0]),
                                            SQUARE, 0.2)
    assert (chi[0], per[0], area[0]) == (0.0, 0.0, 0.0)
    # polygon inside a huge disk
    chi, per, area = pyk.polygon_disk_stats(np.array([0.5]), np.array([0.5]),
                                            SQUARE, 10.0)
    assert chi[0] == 1.0
    assert per[0] == pytest.approx(4.0)
    assert area[0] == pytest.approx(1.0)


def test_polygon_disk_half_overlap():
    # disk centered on an edge midpoint, small enough to see a half disk
    chi, per, area = pyk.polygon_disk_stats(np.array([0.5]), np.array([0.0]),
                                            SQUARE, 0.3)
    assert chi[0] == 1.0
    assert area[0] == pytest.approx(0.5 * np.pi * 0.09, rel=1e-12)
    assert per[0] == pytest.approx(np.pi * 0.3 + 0.6, rel=1e-12)


@pytest.mark.parametrize("center", [(0.9, 0.5), (0.1, 0.95), (1.2, 1.2),
                                    (0.7, -0.15)])
def test_polygon_disk_area_against_rejection_mc(center):
    r = 0.4
    _, _, area = pyk.polygon_disk_stats(np.array([center[0]]),
                                        np.array([center[1]]), SQUARE, r)
    mc = mc_polygon_disk(center[0], center[1], SQUARE, r)
    sigma = np.pi * r * r / np.sqrt(400_000)
    assert abs(area[0] - mc) < 5 * sigma


def test_disk_disk_lens():
    d = np.array([1.0])
    chi, per, area = pyk.disk_disk_stats(d, 1.0, 1.0)
    expected = 2 * (np.arccos(0.5) - 0.5 * np.sqrt(0.75))
    assert chi[0] == 1.0
    assert area[0] == pytest.approx(expected, rel=1e-12)
    assert per[0] == pytest.approx(4 * np.arccos(0.5), rel=1e-12)


def test_cap_lens_nested_and_disjoint():
    # the first argument is the cosine of the center distance
    chi, per, area = pyk.cap_lens_stats(np.array([1.0]), 0.3, 1.0)
    assert area[0] == pytest.approx(2 * np.pi * (1 - np.cos(0.3)))
    chi, per, area = pyk.cap_lens_stats(np.array([np.cos(3.0)]), 0.3, 0.3)
    assert (chi[0], per[0], area[0]) == (0.0, 0.0, 0.0)


def test_cap_lens_symmetric_crossing():
    chi, per, area = pyk.cap_lens_stats(np.array([np.cos(1.0)]), 0.8, 0.8)
    assert chi[0] == 1.0
    # lens area by the spherical formula, checked against its own pieces
    cosd = np.cos(1.0)
    psi = np.arccos((np.cos(0.8) - np.cos(0.8) * cosd)
                    / (np.sin(0.8) * np.sin(1.0)))
    interior = np.arccos((np.cos(0.8) ** 2 - cosd)
                         / (np.sin(0.8) ** 2))
    expected = 2 * np.pi - 4 * psi * np.cos(0.8) - 2 * (np.pi - interior)
    assert per[0] == pytest.approx(4 * psi * np.sin(0.8), rel=1e-10)
    assert area[0] == pytest.approx(expected, rel=1e-10)


@pytest.mark.skipif(ck is None, reason="compiled kernels unavailable")
def test_compiled_matches_python():
    rng = np.random.default_rng(12)
    for verts in (SQUARE, TRI):
        cx = rng.uniform(-1, 2, 300)
        cy = rng.uniform(-1, 2, 300)
        for r in (0.2, 0.7, 2.5):
            a = pyk.polygon_disk_stats(cx, cy, verts, r)
            b = ck.polygon_disk_stats(cx, cy, verts, r)
            for u, v in zip(a, b):
                assert np.allclose(u, v, atol=1e-12)
    d = rng.uniform(0, 3, 500)
    for r1, r2 in ((1.0, 0.4), (0.9, 0.9)):
        a = pyk.disk_disk_stats(d, r1, r2)
        b = ck.disk_disk_stats(d, r1, r2)
        for u, v in zip(a, b):
            assert np.allclose(u, v, atol=1e-12)
    cos_d = rng.uniform(-1, 1, 500)
    a = pyk.cap_lens_stats(cos_d, 0.7, 1.1)
    b = ck.cap_lens_stats(cos_d, 0.7, 1.1)
    for u, v in zip(a, b):
        assert np.allclose(u, v, atol=1e-12)


def test_backend_env_override(monkeypatch):
    monkeypatch.setenv("SMOOTHVAL_PURE_PYTHON", "1")
    mod = importlib.reload(kernels)
    try:
        assert mod.BACKEND == "python"
    finally:
        monkeypatch.delenv("SMOOTHVAL_PURE_PYTHON")
        importlib.reload(kernels)
