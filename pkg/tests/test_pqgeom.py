import time

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from convexcore.cloud import PointCloud
from convexcore.errors import BadDimension, InputError, NotOnBoundary, NotTransverse, OutsideChart
from convexcore.pqgeom import (
    PQForm,
    bn_form,
    bn_gram,
    classify,
    classify_many,
    expected_signature,
    flatten_many,
    is_transverse,
    negativity,
    pq_dual,
    pq_dual_inverse,
    random_null_points,
    sphere_equation_residual,
    sphere_flatten,
    tau_n,
    veronese,
    veronese_cloud,
)
from convexcore.projlin import chordal_distance, normalize_point

F21 = PQForm.standard(2, 1)


def _rand_sl2(rng):
    M = rng.standard_normal((2, 2))
    d = np.linalg.det(M)
    if d < 0:
        M[:, 0] *= -1
        d = -d
    return M / np.sqrt(d)


# --- forms ---------------------------------------------------------------------------


def test_form_from_gram_signature():
    F = PQForm.from_gram(np.diag([3.0, -1, 2, -5]))
    assert (F.p, F.q) == (2, 2)
    with pytest.raises(InputError):
        PQForm.from_gram([[1, 2], [0, 1]])
    with pytest.raises(InputError):
        PQForm.from_gram(np.diag([1.0, 0.0, -1.0]))


def test_classify_examples():
    assert classify(F21, [0, 0, 1]) == "Hpq"
    assert classify(F21, [1, 0, 0]) == "Spq"
    assert classify(F21, np.array([1, 0, 1]) / np.sqrt(2)) == "Boundary"


def test_classify_invariant_under_preserving_elements(schottky, rng):
    F = schottky.form
    X = rng.standard_normal((300, 3))
    base = classify_many(F, X)
    for g in schottky.group.generators:
        assert F.preserved_by(g.mat)
        assert classify_many(F, X @ g.mat.T) == base


# --- transversality ---------------------------------------------------------------------


def test_transverse_examples():
    y, z = np.array([1.0, 0, 1]), np.array([-1.0, 0, 1])
    assert F21.pair(y, z)[0] == -2.0
    assert is_transverse(F21, PointCloud(np.vstack([y, z]))).transverse
    # a point nearly equal to y is nearly orthogonal to it
    tr = is_transverse(F21, PointCloud(np.vstack([y, z, [1.0, 1e-9, 1.0]])))
    assert not tr.transverse
    assert (0, 2) in tr.failing_pairs


def test_transverse_requires_boundary():
    with pytest.raises(NotOnBoundary):
        is_transverse(F21, PointCloud(np.array([[0.0, 0, 1], [1.0, 0, 1]])))


# --- negativity ---------------------------------------------------------------------------


def test_two_point_cloud_negative():
    res = negativity(F21, PointCloud(np.array([[1.0, 0, 1], [-1.0, 0, 1]])))
    assert res.verdict == "Negative"
    assert res.triples_checked == 0


def test_non_transverse_cloud_raises():
    with pytest.raises(NotTransverse):
        negativity(F21, PointCloud(np.array([[1.0, 0, 1], [-1.0, 0, 1], [1.0, 1e-10, 1.0]])))


def test_veronese_negative_and_positive():
    cloud = veronese_cloud(5, 64)
    B = bn_form(5)
    neg = negativity(B, cloud)
    assert neg.verdict == "Negative"
    assert neg.sign_lift == "Negative" and neg.triple_test == "Negative"
    assert neg.triples_checked == 10_000
    assert set(neg.signatures) == {"(2,1)"}
    pos = negativity(-B, cloud)
    assert pos.verdict == "Positive"
    assert pos.sign_lift == "Positive" and pos.triple_test == "Positive"


def test_disk_conic_cloud_negative():
    th = np.linspace(0, 2 * np.pi, 40, endpoint=False)
    cloud = PointCloud(np.c_[np.cos(th), np.sin(th), np.ones_like(th)])
    assert negativity(F21, cloud).verdict == "Negative"


@pytest.mark.parametrize("seed", range(5))
def test_verdict_combines_sub_tests(seed):
    F = PQForm.standard(2, 2)
    X = random_null_points(F, 12, np.random.default_rng(seed))
    res = negativity(F, PointCloud(X))
    if res.sign_lift == res.triple_test:
        assert res.verdict == res.sign_lift
    else:
        assert res.verdict == "Inconclusive"


# --- sphere flattening ---------------------------------------------------------------------------


def test_flatten_identity_at_zero(rng):
    F = PQForm.standard(3, 2)
    for x in random_null_points(F, 50, rng):
        p = normalize_point(x)
        assert sphere_flatten(F, p, 0.0) is p
        assert np.array_equal(sphere_flatten(F, x, 0.0).rep, x / np.linalg.norm(x))


def test_flatten_fixes_sphere_points():
    F = PQForm.standard(2, 2)
    x = np.array([0.6, 0.8, 0.0, 1.0])
    for t in np.linspace(0, 1, 11):
        assert chordal_distance(sphere_flatten(F, x, t), normalize_point(x)) < 1e-15


@pytest.mark.parametrize("pq", [(2, 2), (3, 2)])
def test_flatten_lands_on_sphere(pq, rng):
    F = PQForm.standard(*pq)
    X = random_null_points(F, 1000, rng)
    Y = np.vstack([sphere_flatten(F, x, 1.0).rep for x in X])
    assert np.max(np.abs(sphere_equation_residual(F, Y))) < 1e-9
    Z = flatten_many(F, X, 1.0)
    same_line = np.abs(np.sum(Z * Y, axis=1)) / (np.linalg.norm(Z, axis=1) * np.linalg.norm(Y, axis=1))
    assert np.min(same_line) > 1 - 1e-12


def test_flatten_is_a_homotopy_on_the_boundary(rng):
    F = PQForm.standard(3, 2)
    X = random_null_points(F, 100, rng)
    dt = 0.01
    prev = X
    for t in np.arange(1, 101) * dt:
        Y = flatten_many(F, X, min(t, 1.0))
        assert np.max(np.abs(F.pair(Y, Y))) < 1e-8
        step = np.linalg.norm(Y - prev, axis=1)
        assert np.max(step) <= 10 * dt
        prev = Y


def test_flatten_errors():
    F = PQForm.standard(2, 1)
    with pytest.raises(NotOnBoundary):
        sphere_flatten(F, [0, 0, 1], 0.5)
    F = PQForm.standard(2, 2)
    with pytest.raises(OutsideChart):
        sphere_flatten(F, [1.0, 0, 1.0, 0.0], 0.5)
    with pytest.raises(OutsideChart):
        flatten_many(F, [[1.0, 0, 1.0, 0.0]], 0.5)
    with pytest.raises(NotOnBoundary):
        flatten_many(F, [[1.0, 0, 0, 0]], 0.5)
    with pytest.raises(InputError):
        flatten_many(F, [[0.6, 0.8, 0, 1.0]], 1.5)


# --- duality -------------------------------------------------------------------------------------


def test_pq_dual_examples(rng):
    np.testing.assert_allclose(pq_dual(F21, [0, 0, 1]).covector, [0, 0, 1])
    x = np.array([1.0, 0, 1]) / np.sqrt(2)
    assert abs(pq_dual(F21, x).covector @ x) < 1e-15
    F = PQForm.from_gram(bn_gram(5) + bn_gram(5).T)
    for _ in range(100):
        v = rng.standard_normal(5)
        back = pq_dual_inverse(F, pq_dual(F, v))
        assert chordal_distance(back, normalize_point(v)) < 1e-10


# --- SL(2) representations and B_n ------------------------------------------------------------------


def test_tau_is_a_homomorphism(rng):
    for n in (2, 3, 5, 6):
        for _ in range(20):
            g, h = _rand_sl2(rng), _rand_sl2(rng)
            np.testing.assert_allclose(tau_n(g @ h, n), tau_n(g, n) @ tau_n(h, n), atol=1e-9)


def test_tau_veronese_equivariance(rng):
    for n in (3, 5):
        g = _rand_sl2(rng)
        v = rng.standard_normal(2)
        np.testing.assert_allclose(tau_n(g, n) @ veronese(v, n), veronese(g @ v, n), atol=1e-9)


@pytest.mark.parametrize("n", [3, 4, 5, 6, 7])
def test_bn_invariance(n, rng):
    B = bn_gram(n)
    for _ in range(10):
        T = tau_n(_rand_sl2(rng), n)
        np.testing.assert_allclose(T.T @ B @ T, B, atol=1e-9 * max(1.0, np.abs(T).max() ** 2))


def test_bn_signatures_and_runtime():
    t0 = time.perf_counter()
    sigs = [(bn_form(n).p, bn_form(n).q) for n in (3, 5, 7, 9)]
    assert time.perf_counter() - t0 < 1.0
    assert sigs == [(2, 1), (2, 3), (4, 3), (4, 5)]
    assert [expected_signature(n) for n in (3, 5, 7, 9)] == sigs


def test_bn_even_dimension_rejected():
    with pytest.raises(BadDimension):
        bn_form(4)


def test_veronese_cloud_null_and_transverse():
    cloud = veronese_cloud(5, 64)
    B = bn_form(5)
    assert np.max(np.abs(B.pair(cloud.points, cloud.points))) < 1e-9
    assert is_transverse(B, cloud).transverse


@settings(max_examples=25, deadline=None)
@given(st.integers(3, 6), st.integers(0, 10_000))
def test_null_sampler_and_flatten_property(n, seed):
    rng = np.random.default_rng(seed)
    p = int(rng.integers(1, n))
    F = PQForm.standard(p, n - p)
    X = random_null_points(F, 20, rng)
    assert np.max(np.abs(F.pair(X, X))) < 1e-12
    Y = flatten_many(F, X, float(rng.uniform()))
    assert np.max(np.abs(F.pair(Y, Y))) < 1e-8
