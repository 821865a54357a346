"""Acceptance gate: one test per shipping criterion, tolerances pinned.

Shared expensive objects (the two transform-backed products evaluated on
the body suite, the kinematic Monte Carlo data) come from session fixtures
in conftest.py, which report their own elapsed time so the runtime budgets
below account for the shared work.
"""

import json
import time

import numpy as np
import pytest

from smoothval import (bodies, cli, contact, currents, forms, kinematics,
                       product, valuations)
from smoothval.bodies import PlanarBody, SphericalBody, normal_cycle
from smoothval.contact import COSPHERE, alpha_form
from smoothval.forms import DifferentialForm, exterior_derivative
from smoothval.valuations import BASIS_NAMES, InvariantValuation, ValuationRep


def test_criterion_1_intrinsic_volumes():
    t0 = time.perf_counter()
    cases = [(PlanarBody.polygon([(0, 0), (1, 0), (1, 1), (0, 1)]),
              (1.0, 2.0, 1.0))]
    for r in (0.5, 1.0, 2.0):
        cases.append((PlanarBody.disk((0.0, 0.0), r),
                      (1.0, np.pi * r, np.pi * r * r)))
    for body, expected in cases:
        got = valuations.intrinsic_volumes_by_cycle(body)
        for g, e in zip(got, expected):
            assert abs(g - e) / abs(e) < 1e-6
    assert time.perf_counter() - t0 < 5.0


def test_criterion_2_rumin_and_gauge():
    t0 = time.perf_counter()
    grid = contact.sample_grid((-1.2, 1.2, -1.2, 1.2), n_side=4,
                               theta_count=7)
    h = forms.DEFAULT_STEP
    tol = 100.0 * h

    def scalar(fn):
        return forms.form_from_components(COSPHERE, 0, {(): fn})

    def g1(p):
        return 1.2 + 0.4 * np.sin(p[:, 0] + p[:, 2]) * np.cos(p[:, 1])

    ga = DifferentialForm(COSPHERE, 1,
                          lambda p: g1(p)[:, None] * alpha_form().coeffs(p))
    assert np.max(np.abs(contact.rumin_D(ga, h).components(grid))) < tol

    dg = exterior_derivative(scalar(lambda p: np.sin(p[:, 0]) * p[:, 1]
                                    + 0.3 * np.cos(p[:, 2])))
    assert np.max(np.abs(contact.rumin_D(dg, h).components(grid))) < tol

    rng = np.random.default_rng(0)
    for _ in range(50):
        omega = valuations.random_valuation_rep(rng).omega
        q = contact.rumin_Q(omega, h)
        qq = contact.rumin_Q(q, h)
        assert np.max(np.abs(q.components(grid) - qq.components(grid))) < tol
        ok, residual = contact.is_vertical(contact.rumin_D(omega, h), grid)
        assert ok and residual < tol

    # gauge independence: omega + dg + f*alpha evaluates identically
    suite = product.default_suite()
    polygons = [b for b in suite if b.kind == "polygon"]
    extra = [PlanarBody.polygon([(0, 0), (1.8, 0.3), (0.6, 1.5)]),
             PlanarBody.polygon([(-0.7, -0.2), (0.9, -0.6), (1.1, 0.8),
                                 (-0.3, 1.0)])]
    polygons = (polygons + extra)[:10]
    assert len(polygons) == 10
    base = valuations.standard_basis()["v1"]
    rng = np.random.default_rng(1)
    for _ in range(5):
        c = rng.normal(size=6)

        def g(p, c=c):
            return c[0] * np.sin(p[:, 0] + c[1]) * p[:, 1] \
                + c[2] * np.cos(p[:, 2])

        def f(p, c=c):
            return c[3] + c[4] * p[:, 0] + c[5] * np.sin(p[:, 2] - p[:, 1])

        fa = DifferentialForm(COSPHERE, 1,
                              lambda p, f=f: f(p)[:, None]
                              * alpha_form().coeffs(p))
        gauged = ValuationRep(base.omega + exterior_derivative(scalar(g)) + fa,
                              base.phi)
        for body in polygons:
            ref = 0.5 * body.perimeter
            val = valuations.evaluate(gauged, body, rel_tol=1e-9)
            assert abs(val - ref) / abs(ref) < 1e-6
    assert time.perf_counter() - t0 < 30.0


def test_criterion_3_product(suite, basis, suite_vals, constants,
                             prod_v1_v1):
    vals, shared_elapsed = suite_vals
    t0 = time.perf_counter()
    design = np.array([[b.chi, 0.5 * b.perimeter, b.area] for b in suite])
    scale = np.max(np.abs(design))

    # chi-identity: (chi . v1)(K) = v1(K)
    ref = design[:, 1]
    assert np.max(np.abs(vals["chi*v1"] - ref) / np.abs(ref)) < 1e-4

    # commutativity: v1 . chi evaluates identically to chi . v1
    swapped = product.alesker_product(basis["v1"], basis["chi"])
    sw = np.array([valuations.evaluate(swapped, b, rel_tol=1e-6)
                   for b in suite])
    assert np.max(np.abs(sw - vals["chi*v1"]) / np.abs(ref)) < 1e-4

    # degree truncation: products of total degree above the dimension vanish
    for na, nb in (("v1", "area"), ("area", "area")):
        rep = product.alesker_product(basis[na], basis[nb])
        zero = np.array([valuations.evaluate(rep, b, rel_tol=1e-6)
                         for b in suite])
        assert np.max(np.abs(zero)) / scale < 1e-4

    # associativity, checked through the fitted structure table on the suite
    m = constants.table
    assoc = np.einsum("ijl,lkm->ijkm", m, m) - np.einsum("jkl,ilm->ijkm", m, m)
    assoc_vals = np.einsum("ijkm,nm->ijkn", assoc, design)
    assert np.max(np.abs(assoc_vals)) / scale < 1e-4

    # independent volume-template oracle, 1 percent on every pair
    for a, na in enumerate(BASIS_NAMES):
        for b, nb in enumerate(BASIS_NAMES):
            if b < a:
                continue
            oracle = product.template_product(na, nb, n_samples=2_000_000)
            pair_scale = max(1.0, float(np.max(np.abs(constants.table[a, b]))))
            delta = np.max(np.abs(constants.table[a, b]
                                  - np.asarray(oracle.coeffs)))
            assert delta < 0.01 * pair_scale, (na, nb, delta)

    # compatibility identities of the representing pair of v1 . v1
    res = product.verify_prop64(basis["v1"], basis["v1"], prod_v1_v1)
    assert max(res.values()) < 1e3 * forms.DEFAULT_STEP

    assert shared_elapsed + time.perf_counter() - t0 < 600.0


def test_criterion_4_currents():
    t0 = time.perf_counter()
    rng = np.random.default_rng(14)
    made = 0
    while made < 10:
        k1 = int(rng.integers(3, 7))
        k2 = int(rng.integers(3, 7))
        th1 = 2 * np.pi * np.arange(k1) / k1 + rng.uniform(0, 2 * np.pi)
        th2 = 2 * np.pi * np.arange(k2) / k2 + rng.uniform(0, 2 * np.pi)
        r1 = rng.uniform(0.7, 1.2, k1)
        r2 = rng.uniform(0.7, 1.2, k2)
        c2 = rng.uniform(-0.5, 0.5, 2)
        a = PlanarBody.polygon(np.stack([r1 * np.cos(th1),
                                         r1 * np.sin(th1)], axis=1))
        b = PlanarBody.polygon(np.stack([c2[0] + r2 * np.cos(th2),
                                         c2[1] + r2 * np.sin(th2)], axis=1))
        ok, _ = bodies.is_transversal(a, b)
        if not ok:
            continue
        inter = bodies.intersect_transversal(a, b)
        if inter is bodies.EMPTY:
            continue
        made += 1
        current = currents.three_term_product(a, b)
        direct = normal_cycle(inter)
        err = currents.compare_currents(current, direct, k=5, seed=made)
        assert err < 1e-6, err

    # containment and disjoint cases are exact
    big = PlanarBody.polygon([(-3, -3), (3, -3), (3, 3), (-3, 3)])
    small = PlanarBody.polygon([(0, 0), (1, 0), (0.4, 0.9)])
    cur = currents.three_term_product(big, small)
    assert currents.compare_currents(cur, normal_cycle(small), k=5,
                                     seed=0) < 1e-12
    far = small.transform(translation=(20.0, 0.0))
    assert len(currents.three_term_product(big, far).pieces) == 0
    assert time.perf_counter() - t0 < 60.0


def test_criterion_5_kinematic_oracles():
    t0 = time.perf_counter()
    # sphere caps against the closed-form chi integral
    radius_pairs = ((0.3, 0.4), (0.5, 0.7), (0.9, 0.6), (1.1, 1.2), (0.4, 1.0))
    for i, (r1, r2) in enumerate(radius_pairs):
        c1 = SphericalBody.cap((0, 0, 1), r1)
        c2 = SphericalBody.cap((0, 1, 0), r2)
        est = kinematics.mc_kinematic_integral("chi", c1, c2, n=100_000,
                                               seed=100 + i)
        oracle = kinematics.chi_cap_oracle(r1, r2)
        assert abs(est.estimate - oracle) < 3 * est.stderr

    # planar disks against the principal kinematic formula
    p1 = PlanarBody.disk((0, 0), 0.6)
    p2 = PlanarBody.disk((0, 0), 0.9)
    est = kinematics.mc_kinematic_integral("chi", p1, p2, n=1_000_000,
                                           seed=200, space="plane")
    assert abs(est.estimate - kinematics.disk_chi_oracle(p1, p2)) \
        < 3 * est.stderr

    # Fubini factorization of the area integral on the sphere
    c1 = SphericalBody.cap((0, 0, 1), 0.8)
    c2 = SphericalBody.cap((1, 0, 0), 1.1)
    est = kinematics.mc_kinematic_integral("area", c1, c2, n=100_000,
                                           seed=300)
    oracle = c1.area * c2.area / (4 * np.pi)
    assert abs(est.estimate - oracle) < 3 * est.stderr
    assert time.perf_counter() - t0 < 300.0


def test_criterion_6_diagram(kinematic_data):
    pairs, data, shared_elapsed = kinematic_data
    t0 = time.perf_counter()
    n_train = 20
    train_pairs = pairs[:n_train]
    train_data = [d[:n_train] for d in data]
    table, sol = kinematics.solve_structure_constants(train_pairs, train_data)
    assert sol.success

    held_pairs = pairs[n_train:]
    held_data = [d[n_train:] for d in data]
    z, _ = kinematics.diagram_residual(table, held_pairs, held_data)
    assert z < 3.0, z

    # perturbing any significant structure constant breaks the identity
    idx = np.argwhere(np.abs(table) > 0.5)
    assert len(idx) > 0
    for i, j, k in idx:
        bad = table.copy()
        bad[i, j, k] *= 1.1
        bad[j, i, k] = bad[i, j, k]
        z_bad, _ = kinematics.diagram_residual(bad, held_pairs, held_data)
        assert z_bad > 10.0, (i, j, k, z_bad)
    assert shared_elapsed + time.perf_counter() - t0 < 900.0


def test_criterion_7_functional_calculus(constants_clean):
    rng = np.random.default_rng(33)
    for _ in range(5):
        mu = InvariantValuation(tuple(rng.normal(size=3)))
        e = product.exp_valuation(mu, constants_clean)
        einv = product.exp_valuation(mu * (-1.0), constants_clean)
        back = product.invariant_product(e, einv, constants_clean)
        assert np.max(np.abs(np.asarray(back.coeffs)
                             - (1.0, 0.0, 0.0))) < 1e-10

    # empirical constant of the product seminorm bound, two grid levels
    def max_c(n_side, theta_count):
        rng = np.random.default_rng(77)
        worst = 0.0
        for _ in range(20):
            m1 = InvariantValuation(tuple(rng.normal(size=3)))
            m2 = InvariantValuation(tuple(rng.normal(size=3)))
            prod12 = product.invariant_product(m1, m2, constants_clean)
            num = valuations.seminorm(prod12.rep(), 0, n_side=n_side,
                                      theta_count=theta_count)
            den = valuations.seminorm(m1.rep(), 0, n_side=n_side,
                                      theta_count=theta_count) \
                * valuations.seminorm(m2.rep(), 2, n_side=n_side,
                                      theta_count=theta_count)
            worst = max(worst, num / den)
        return worst

    coarse = max_c(6, 12)
    fine = max_c(9, 18)
    assert np.isfinite(coarse) and coarse > 0
    assert abs(fine - coarse) / coarse < 0.2


def test_criterion_8_cli_byte_reproducibility(tmp_path):
    sq = tmp_path / "sq.json"
    sq.write_text(json.dumps({"type": "polygon",
                              "vertices": [[0, 0], [1, 0], [1, 1], [0, 1]]}))
    off = tmp_path / "off.json"
    off.write_text(json.dumps({"type": "polygon",
                               "vertices": [[0.5, 0.5], [1.5, 0.5],
                                            [1.5, 1.5], [0.5, 1.5]]}))
    runs = [
        ["intrinsic", str(sq)],
        ["ncycle-intersect", str(sq), str(off), "--seed", "3"],
        ["kinematic", "--space", "plane", "--samples", "20000", "--seed", "8"],
        ["rumin-check", "--seed", "2"],
    ]
    for i, argv in enumerate(runs):
        a = tmp_path / f"a{i}.out"
        b = tmp_path / f"b{i}.out"
        assert cli.main(argv + ["--out", str(a)]) == 0
        assert cli.main(argv + ["--out", str(b)]) == 0
        assert a.read_bytes() == b.read_bytes()
