import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gibtools.polyclass import IntMatrix, classify_matrix, companion_matrix, IntPolynomial
from gibtools.simstruct import (
    NoPositiveDefiniteSolution,
    NotSemisimpleOnClass,
    Tolerances,
    bieberbach_ratio_check,
    build_gib_data,
    conformal_factor_check,
    invariant_subspaces,
    ratio_identity_residual,
    similarity_gram,
)

PHI = (1 + math.sqrt(5)) / 2


def test_cat_map_eigenlines(cat_matrix):
    cert = classify_matrix(cat_matrix)
    sub = invariant_subspaces(cat_matrix, cert, "expanding")
    assert sub.dims == (1, 1)
    # expanding eigenvector of [[2,1],[1,1]] is (1, (sqrt5-1)/2) up to scale
    e = sub.basisE[:, 0]
    assert abs(e[1] / e[0] - (math.sqrt(5) - 1) / 2) < 1e-14
    f = sub.basisF[:, 0]
    assert abs(f[1] / f[0] + (math.sqrt(5) + 1) / 2) < 1e-13


def test_ablock_subspaces(ablock, ablock_cert):
    sub = invariant_subspaces(ablock, ablock_cert, "expanding")
    assert sub.dims == (2, 2)
    a = ablock.to_numpy().astype(float)
    lam = PHI ** 2
    assert np.allclose(a @ sub.basisE, lam * sub.basisE, atol=1e-13)
    assert np.allclose(a @ sub.basisF, sub.basisF / lam, atol=1e-13)
    assert max(sub.residualsE + sub.residualsF) < 1e-8


def test_s0_subspaces(s0_matrix, s0_cert):
    sub = invariant_subspaces(s0_matrix, s0_cert, "A")
    assert sub.dims == (1, 2)
    # the real-root line: eigenvalues of the restriction match the real root
    t = sub.basisE.T @ s0_matrix.to_numpy() @ sub.basisE
    assert abs(t[0, 0] - 0.3611030805286474) < 1e-14
    sub2 = invariant_subspaces(s0_matrix, s0_cert, "B")
    assert sub2.dims == (2, 1)


def test_non_semisimple_rejected():
    # companion of (X^2 - 3X + 1)^2 is a single Jordan-type block per root
    p = IntPolynomial((1, -3, 1)) ** 2
    a = companion_matrix(p)
    cert = classify_matrix(a)
    with pytest.raises(NotSemisimpleOnClass):
        invariant_subspaces(a, cert)


def test_mismatched_certificate(s0_cert, ablock):
    with pytest.raises(ValueError):
        invariant_subspaces(ablock, s0_cert)


def test_gram_one_dim():
    g = similarity_gram(np.array([[-2.5]]), 2.5)
    assert g.G.tolist() == [[1.0]]


@settings(max_examples=40, deadline=None)
@given(st.floats(0.2, 5), st.floats(0.01, 3.1))
def test_gram_rotation_is_identity(lam, theta):
    c, s = math.cos(theta), math.sin(theta)
    g = similarity_gram(lam * np.array([[c, -s], [s, c]]), lam)
    assert np.allclose(g.G, np.eye(2), atol=1e-10)


@settings(max_examples=40, deadline=None)
@given(st.floats(0.3, 3), st.floats(0.1, 3.0), st.lists(st.floats(-2, 2), min_size=4, max_size=4))
def test_gram_conjugated_similarity(lam, theta, entries):
    p = np.array(entries).reshape(2, 2) + 3 * np.eye(2)
    if abs(np.linalg.det(p)) < 0.5:
        return
    c, s = math.cos(theta), math.sin(theta)
    t = p @ (lam * np.array([[c, -s], [s, c]])) @ np.linalg.inv(p)
    g = similarity_gram(t, lam)
    assert g.min_eig > 0 and g.residual < 1e-10
    assert abs(np.trace(g.G) - 2) < 1e-12


def test_gram_degenerate_kernel_uses_average():
    # lam * identity: every symmetric form is invariant; the average picks the identity
    g = similarity_gram(2.0 * np.eye(3), 2.0)
    assert np.allclose(g.G, np.eye(3))


def test_gram_jordan_block_fails():
    with pytest.raises(NoPositiveDefiniteSolution):
        similarity_gram(np.array([[2.0, 1.0], [0.0, 2.0]]), 2.0)


def test_gram_wrong_ratio_fails():
    with pytest.raises(NoPositiveDefiniteSolution):
        similarity_gram(np.array([[0.0, -2.0], [2.0, 0.0]]), 3.0)


@pytest.mark.parametrize("which", ["expanding", "contracting"])
def test_worked_example_grams(which, s0_matrix, s0_cert, ablock, ablock_cert):
    for a, c in ((s0_matrix, s0_cert), (ablock, ablock_cert)):
        d = build_gib_data(a, c, which)
        for g in (d.gramE, d.gramF):
            assert g.min_eig > 0 and g.residual < 1e-10
            assert np.allclose(g.G, g.G.T)


def test_s0_data(s0_matrix, s0_cert):
    d = build_gib_data(s0_matrix, s0_cert, "expanding")
    assert (d.q, d.m) == (2, 1)
    assert abs(d.lambdaE ** 2 * d.lambdaF - 1) < 1e-14
    assert d.tScale == d.lambdaF
    assert abs(d.lambdaE - 1.664119092564781) < 1e-14


def test_ablock_data(ablock, ablock_cert):
    d = build_gib_data(ablock, ablock_cert, "expanding")
    assert (d.q, d.m) == (2, 2)
    assert abs(d.tScale - 1 / d.lambdaE) < 1e-15
    assert d.tScale == d.literal_t_scale or abs(d.tScale - d.literal_t_scale) < 1e-15


def test_cat_data(cat_matrix):
    d = build_gib_data(cat_matrix, classify_matrix(cat_matrix), "expanding")
    assert (d.q, d.m) == (1, 1)
    assert abs(d.lambdaE - PHI ** 2) < 1e-14


def test_e_class_swap(s0_matrix, s0_cert):
    a = build_gib_data(s0_matrix, s0_cert, "A")
    b = build_gib_data(s0_matrix, s0_cert, "B")
    assert (a.q, a.m) == (b.m, b.q)
    assert abs(a.lambdaE - b.lambdaF) < 1e-15
    for d in (a, b):
        assert bieberbach_ratio_check(d).passed
        assert conformal_factor_check(d, 50, 1).passed


def test_bieberbach(s0_matrix, s0_cert, ablock, ablock_cert):
    for a, c in ((s0_matrix, s0_cert), (ablock, ablock_cert)):
        rep = bieberbach_ratio_check(build_gib_data(a, c, "expanding"))
        assert rep.passed
        assert rep["bieberbach ratio"].residual < 1e-12
    assert ratio_identity_residual(1.0, 1.0, 3) == 0.0


def test_bieberbach_ablock_values(ablock, ablock_cert):
    rep = bieberbach_ratio_check(build_gib_data(ablock, ablock_cert, "expanding"))
    lam = PHI ** 2
    assert abs(rep.values["phi"] - lam ** -2) < 1e-14
    assert abs(rep.values["rho"] - lam) < 1e-14


def test_conformal_checks_pass(s0_matrix, s0_cert):
    rep = conformal_factor_check(build_gib_data(s0_matrix, s0_cert, "expanding"), samples=100, seed=0)
    assert rep.passed
    assert all(e.residual <= 1e-9 for e in rep.entries)


def test_conformal_fault_injection(s0_matrix, s0_cert):
    good = build_gib_data(s0_matrix, s0_cert, "expanding")
    bad = build_gib_data(s0_matrix, s0_cert, "expanding", t_scale=good.tScale * 1.01)
    rep = conformal_factor_check(bad, 100, 0)
    assert not rep.passed
    assert abs(rep["equivariance f=t"].residual - 0.01) < 1e-12
    assert rep["translation invariance"].passed


def test_tolerances_recorded(s0_matrix, s0_cert):
    d = build_gib_data(s0_matrix, s0_cert, tol=Tolerances(pullback=1e-7))
    assert d.to_json()["tolerances"]["pullback"] == 1e-7
    assert d.to_json()["tScale"] == d.tScale


def test_non_unimodular_refused(s0_cert):
    with pytest.raises(ValueError):
        build_gib_data(IntMatrix.from_rows([[2, 0], [0, 1]]), s0_cert)
