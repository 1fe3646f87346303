import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from cpmeans import (
    ContractError,
    DomainError,
    MeanFunction,
    ParameterError,
    catalog_samples,
    derive_rng,
    eig_herm,
    fun_calc,
    inverse_mean_matrix,
    loewner_matrix,
    matrix_mean,
    mean_matrix,
    monotone_pair_test,
    psd_check,
    random_psd,
)
from oracles import min_eig_lapack, random_hermitian, random_pd


@pytest.mark.parametrize("n", [1, 2, 5, 12, 25])
@pytest.mark.parametrize("complex_", [False, True])
def test_eig_herm_against_lapack(n, complex_):
    rng = np.random.default_rng(n)
    M = random_hermitian(n, rng, complex_)
    w, V = eig_herm(M)
    np.testing.assert_allclose(w, np.linalg.eigvalsh(M), atol=1e-12 * max(1, np.abs(M).max()))
    assert np.all(np.diff(w) >= 0)
    np.testing.assert_allclose(V.conj().T @ V, np.eye(n), atol=1e-13)
    np.testing.assert_allclose(M @ V, V * w, atol=1e-12)


def test_eig_herm_degenerate_and_diagonal():
    w, V = eig_herm(np.eye(4))
    np.testing.assert_array_equal(w, np.ones(4))
    w, _ = eig_herm(np.diag([3.0, -1.0, 2.0]))
    np.testing.assert_array_equal(w, [-1.0, 2.0, 3.0])


def test_eig_herm_rejects_non_hermitian():
    with pytest.raises(ContractError):
        eig_herm(np.array([[1.0, 2.0], [0.0, 1.0]]))
    with pytest.raises(ContractError):
        eig_herm(np.ones((2, 3)))


def test_psd_check_cauchy():
    lam = np.array([1.0, 2.0, 3.0])
    rep = psd_check(2.0 / (lam[:, None] + lam[None, :]))
    assert rep.is_psd and rep.witness is None and rep.min_eig > 0


def test_psd_check_sum_matrix_witness():
    lam = np.array([1.0, 2.0, 3.0])
    L = lam[:, None] + lam[None, :]
    rep = psd_check(L)
    assert not rep.is_psd
    assert rep.form_value == pytest.approx(rep.min_eig, rel=1e-12)
    v = rep.witness
    assert np.real(np.vdot(v, L @ v)) < 0 and np.linalg.norm(v) == pytest.approx(1.0)
    x = np.array([-2.0, 0.0, 1.0])
    assert x @ L @ x == -2.0


def test_psd_check_tolerance_is_relative():
    M = np.diag([1e6, -1e-5])
    assert psd_check(M).is_psd
    assert not psd_check(np.diag([1.0, -1e-5])).is_psd
    assert psd_check(M).to_dict()["min_eig"] == repr(-1e-5)


def test_mean_matrix_examples():
    X = mean_matrix("arithmetic", [1.0, 3.0])
    np.testing.assert_array_equal(X, [[1.0, 2.0], [2.0, 3.0]])
    assert np.linalg.det(X) == pytest.approx(-1.0)
    assert not psd_check(X).is_psd
    T = inverse_mean_matrix("arithmetic", [1.0, 3.0])
    np.testing.assert_allclose(T, [[1.0, 0.5], [0.5, 1.0 / 3.0]], rtol=1e-15)
    assert np.linalg.det(T) == pytest.approx(1.0 / 12.0)
    T = inverse_mean_matrix("geometric", [1.0, 4.0])
    np.testing.assert_allclose(T, [[1.0, 0.5], [0.5, 0.25]], rtol=1e-15)
    rep = psd_check(T)
    assert rep.is_psd and abs(rep.min_eig) < 1e-15


@pytest.mark.parametrize("fn", catalog_samples(3), ids=str)
def test_mean_matrix_reciprocal_and_scaling(fn):
    rng = np.random.default_rng(1)
    lam = np.exp(rng.uniform(-3, 3, 5))
    X = mean_matrix(fn, lam)
    T = inverse_mean_matrix(fn, lam)
    np.testing.assert_allclose(X * T, np.ones((5, 5)), rtol=1e-14)
    np.testing.assert_array_equal(X, X.T)
    np.testing.assert_array_equal(np.diag(X), lam)
    np.testing.assert_allclose(inverse_mean_matrix(fn, 7.5 * lam), T / 7.5, rtol=1e-13)


def test_mean_matrix_rejects_bad_spectrum():
    for bad in ([1.0, 0.0], [1.0, -2.0], [[1.0, 2.0]], [], [np.inf]):
        with pytest.raises((DomainError, ParameterError, ContractError)):
            mean_matrix("logarithmic", bad)


def test_loewner_examples():
    L = loewner_matrix(np.sqrt, [1.0, 4.0])
    np.testing.assert_allclose(L, [[0.5, 1 / 3], [1 / 3, 0.25]], rtol=1e-8)
    assert np.linalg.det(L) == pytest.approx(1 / 72, rel=1e-6)
    L = loewner_matrix(np.square, [1.0, 2.0, 3.0], dg=lambda x: 2 * x)
    np.testing.assert_array_equal(L, [[2, 3, 4], [3, 4, 5], [4, 5, 6]])
    assert not psd_check(L).is_psd


def test_loewner_degenerate_switch():
    lam = np.array([2.0, 2.0 * (1 + 1e-10), 5.0])
    L = loewner_matrix(np.log, lam, dg=lambda x: 1.0 / x)
    assert L[0, 1] == pytest.approx(1.0 / lam[:2].mean(), rel=1e-15)
    assert np.all(np.isfinite(L))


def test_fun_calc_sqrt():
    np.testing.assert_allclose(fun_calc(np.sqrt, np.array([[5.0, 4.0], [4.0, 5.0]])), [[2.0, 1.0], [1.0, 2.0]], atol=1e-14)
    with pytest.raises(DomainError):
        fun_calc(np.sqrt, np.diag([1.0, -1.0]))


def test_fun_calc_composition():
    rng = np.random.default_rng(3)
    A = random_pd(4, rng)
    lhs = fun_calc(np.exp, fun_calc(np.log, A), domain=(-np.inf, np.inf))
    np.testing.assert_allclose(lhs, A, atol=1e-11 * np.abs(A).max())
    sq = fun_calc(np.sqrt, A)
    np.testing.assert_allclose(sq @ sq, A, atol=1e-11 * np.abs(A).max())


def test_matrix_mean_arithmetic_and_symmetry():
    for seed in range(10):
        rng = derive_rng(seed, 5)
        n = 2 + seed % 5
        A, B = random_pd(n, rng), random_pd(n, rng)
        np.testing.assert_allclose(matrix_mean("arithmetic", A, B), 0.5 * (A + B), atol=1e-11)
        for fn in ("logarithmic", "heinz:0.3", "geometric"):
            M1, M2 = matrix_mean(fn, A, B), matrix_mean(fn, B, A)
            assert np.abs(M1 - M2).max() <= 1e-10 * np.abs(A + B).max()


def test_matrix_mean_commuting():
    a, b = np.array([1.0, 2.0, 5.0]), np.array([4.0, 3.0, 0.5])
    M = matrix_mean("logarithmic", np.diag(a), np.diag(b))
    np.testing.assert_allclose(M, np.diag(MeanFunction("logarithmic").mean(a, b)), atol=1e-13)


def test_derive_rng_reproducible_and_independent():
    assert derive_rng(5, 1, 2).random() == derive_rng(5, 1, 2).random()
    assert derive_rng(5, 1, 2).random() != derive_rng(5, 2, 1).random()
    P = random_psd(4, derive_rng(0))
    assert min_eig_lapack(P) > 0 and np.array_equal(P, P.T)


def test_monotone_pair_sqrt_and_square():
    rep = monotone_pair_test(np.sqrt, 4, trials=50, seed=1)
    assert rep.violations == 0 and rep.witness is None
    rep = monotone_pair_test(np.square, 2, trials=100, seed=0)
    assert rep.violations > 0
    A, B = rep.witness
    assert min_eig_lapack(B - A) > 0
    assert min_eig_lapack(B @ B - A @ A) < 0


def test_monotone_pair_stolarsky_and_jobs():
    rep = monotone_pair_test("stolarsky:2", 4, trials=30)
    assert rep.violations == 0
    parallel = monotone_pair_test("logarithmic", 3, trials=8, seed=2, jobs=2)
    serial = monotone_pair_test("logarithmic", 3, trials=8, seed=2)
    assert (parallel.worst_min_eig, parallel.worst_trial, parallel.violations) == (serial.worst_min_eig, serial.worst_trial, serial.violations)
    with pytest.raises(ParameterError):
        monotone_pair_test(np.sqrt, 9)


@settings(max_examples=50, deadline=None)
@given(arrays(np.float64, (4, 4), elements=st.floats(-10, 10)))
def test_psd_check_agrees_with_lapack(G):
    M = G @ G.T - np.diag(np.full(4, 2.0))
    rep = psd_check(M)
    ref = min_eig_lapack(M)
    assert rep.min_eig == pytest.approx(ref, abs=1e-10 * max(1, np.abs(M).max()))
    if abs(ref) > 1e-6 * max(1, np.abs(M).sum(axis=1).max()):
        assert rep.is_psd == (ref > 0)
