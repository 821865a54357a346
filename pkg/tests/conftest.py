"""Shared fixtures.

The two Gelfand-transform products and the kinematic Monte Carlo data are
by far the most expensive objects in the suite, so they are built once per
session and reused by the unit tests and the acceptance checks alike. The
fixtures also record how long they took, so the acceptance tests can
account for the shared work in their runtime budgets.
"""

import time

import numpy as np
import pytest

from smoothval import kinematics, product, valuations


@pytest.fixture(scope="session")
def suite():
    return product.default_suite()


@pytest.fixture(scope="session")
def basis():
    return valuations.standard_basis()


@pytest.fixture(scope="session")
def prod_chi_v1(basis):
    return product.alesker_product(basis["chi"], basis["v1"])


@pytest.fixture(scope="session")
def prod_v1_v1(basis):
    return product.alesker_product(basis["v1"], basis["v1"])


@pytest.fixture(scope="session")
def suite_vals(suite, prod_chi_v1, prod_v1_v1):
    """Evaluations of the two transform-backed products on the body suite.

    Returns (values dict, elapsed seconds). Evaluating the Gelfand-transform
    coefficient along every normal cycle dominates the session runtime.
    """
    t0 = time.perf_counter()
    out = {}
    # 1e-6 quadrature leaves two orders of margin under the 1e-4 checks
    for name, rep in (("chi*v1", prod_chi_v1), ("v1*v1", prod_v1_v1)):
        out[name] = np.array([valuations.evaluate(rep, b, rel_tol=1e-6)
                              for b in suite])
    return out, time.perf_counter() - t0


@pytest.fixture(scope="session")
def constants(basis, suite, suite_vals):
    """Structure-constant table, reusing the expensive suite evaluations."""
    vals, _ = suite_vals
    design = np.array([[b.chi, 0.5 * b.perimeter, b.area] for b in suite])
    table = np.zeros((3, 3, 3))
    residuals = {}

    def fit(values):
        coords, *_ = np.linalg.lstsq(design, values, rcond=None)
        return coords, float(np.max(np.abs(design @ coords - values)))

    table[0, 1], residuals["chi*v1"] = fit(vals["chi*v1"])
    table[1, 1], residuals["v1*v1"] = fit(vals["v1*v1"])
    cheap = (("chi", "chi", 0, 0), ("chi", "area", 0, 2),
             ("v1", "area", 1, 2), ("area", "area", 2, 2))
    for na, nb, a, b in cheap:
        rep = product.alesker_product(basis[na], basis[nb])
        coords, res = product.fit_invariant_coordinates(rep, suite,
                                                        rel_tol=1e-6)
        table[a, b] = coords
        residuals[f"{na}*{nb}"] = res
    for a in range(3):
        for b in range(a):
            table[a, b] = table[b, a]
    meta = {"h": 1e-4, "gt_rel_tol": 1e-6, "eval_rel_tol": 1e-7,
            "fit_residuals": residuals}
    return product.StructureConstants(table, meta)


@pytest.fixture(scope="session")
def constants_clean(constants):
    return constants.cleaned(tol=1e-4)


@pytest.fixture(scope="session")
def kinematic_data():
    """Cap-pair suite with Monte Carlo kinematic integrals at N = 1e5.

    Returns (pairs, data, elapsed seconds).
    """
    t0 = time.perf_counter()
    pairs = kinematics.cap_pair_suite(28, seed=5)
    data = kinematics.collect_kinematic_data(pairs, n=100_000, seed=11)
    return pairs, data, time.perf_counter() - t0
