import numpy as np
import pytest
from hypothesis import given, strategies as st

from conftest import noisy_synthetic
from oracles import svd_gesvd, tikhonov_dense
from regdiag import (Geometric, PowerLaw, ValidationError, add_noise, compute_svd, gen_shaw,
                     make_problem, picard_data, tikhonov_solve, transition_index,
                     tsvd_error_curve, tsvd_solve)
from regdiag.experiments import noise_seed
from regdiag.svdtools import PicardData, tikhonov_filters


def test_identity_and_diagonal():
    assert np.allclose(compute_svd(np.eye(5)).sigma, 1.0)
    svd = compute_svd(np.diag([3.0, 2.0, 1.0]))
    assert np.allclose(svd.sigma, [3, 2, 1])
    assert np.allclose(np.abs(svd.V), np.eye(3))


def test_sign_convention_largest_entry_positive(rng):
    svd = compute_svd(rng.standard_normal((9, 6)))
    idx = np.argmax(np.abs(svd.V), axis=0)
    assert np.all(svd.V[idx, np.arange(6)] > 0)


def test_matches_gesvd_oracle_and_reconstructs_shaw():
    A = gen_shaw(32).A
    svd = compute_svd(A)
    s, U, V = svd_gesvd(A)
    assert np.allclose(svd.sigma, s, rtol=0, atol=1e-14 * s[0])
    assert np.linalg.norm(svd.reconstruct() - A, 2) <= 1e-10 * svd.sigma[0]
    # shaw is centro-symmetric, so odd vectors tie in their largest entry and
    # the sign convention is only defined up to that tie: compare up to sign
    dots = np.abs(np.sum(svd.V[:, :8] * V[:, :8], axis=0))
    assert np.allclose(dots, 1.0, atol=1e-8)


@pytest.mark.parametrize("A, code", [
    (np.array([[1.0, np.nan], [0, 1]]), "invalid-matrix"),
    (np.ones((2, 3)), "invalid-dimension"),
    (np.ones((3, 1)), "invalid-dimension"),
])
def test_compute_svd_validation(A, code):
    with pytest.raises(ValidationError) as err:
        compute_svd(A)
    assert err.value.code == code


def test_tsvd_small_examples():
    svd = compute_svd(np.diag([2.0, 1.0]))
    assert np.allclose(tsvd_solve(svd, np.array([2.0, 1.0]), 1), [1.0, 0.0])
    for k in (0, 3):
        with pytest.raises(ValidationError) as err:
            tsvd_solve(svd, np.ones(2), k)
        assert err.value.code == "invalid-truncation"


def test_tsvd_full_expansion_is_pseudoinverse_solution(rng):
    A = rng.standard_normal((8, 6))
    b = A @ rng.standard_normal(6)
    x = tsvd_solve(compute_svd(A), b, 6)
    assert np.linalg.norm(A @ x - b) <= 1e-8 * np.linalg.norm(b)


def test_tsvd_best_index_at_noise_drop():
    # frozen: seed 0 coefficients over eta are 5653, 101.7, 0.92, ... so the
    # coefficients reach the noise floor at k = 3, where the error is smallest
    nz = noisy_synthetic(32, Geometric(np.e ** 2), seed=0)
    svd = compute_svd(nz.A)
    curve = tsvd_error_curve(svd, nz.b, nz.x_true)
    c = np.abs(svd.U.T @ nz.b) / nz.eta
    assert int(np.argmax(c < 1.5)) + 1 == curve.best_k == 3


def test_shaw_best_index_and_residual_plateau():
    nz = add_noise(gen_shaw(64), 1e-3, noise_seed(0))
    curve = tsvd_error_curve(compute_svd(nz.A), nz.b, nz.x_true)
    assert 6 <= curve.best_k <= 12
    k = curve.best_k
    ratio = curve.residual_norm[k:k + 3] / np.linalg.norm(nz.e)
    assert np.all((ratio > 0.5) & (ratio < 2.0))


def test_error_curve_noise_free_is_nonincreasing():
    p = make_problem("synthetic", 16, decay=PowerLaw(1, 1), seed=1)
    curve = tsvd_error_curve(p.svd, p.b_true, p.x_true)
    assert np.all(np.diff(curve.rel_error) <= 1e-8)
    assert curve.rel_error[-1] <= 1e-12


def test_error_curve_matches_explicit_solutions():
    nz = noisy_synthetic(24, PowerLaw(1, 2), seed=4)
    svd = compute_svd(nz.A)
    curve = tsvd_error_curve(svd, nz.b, nz.x_true)
    for k in (1, 5, 12, 24):
        x = tsvd_solve(svd, nz.b, k)
        assert curve.rel_error[k - 1] == pytest.approx(
            np.linalg.norm(x - nz.x_true) / np.linalg.norm(nz.x_true), rel=1e-10)
        assert curve.residual_norm[k - 1] == pytest.approx(np.linalg.norm(nz.A @ x - nz.b),
                                                           rel=1e-8)


def test_error_curve_rejects_zero_truth():
    svd = compute_svd(np.diag([2.0, 1.0]))
    with pytest.raises(ValidationError) as err:
        tsvd_error_curve(svd, np.ones(2), np.zeros(2))
    assert err.value.code == "degenerate-truth"


def test_tikhonov_examples():
    svd = compute_svd(np.diag([2.0, 1.0]))
    assert np.allclose(tikhonov_solve(svd, np.array([2.0, 1.0]), 1.0), [0.8, 0.5])
    with pytest.raises(ValidationError) as err:
        tikhonov_solve(svd, np.ones(2), 0.0)
    assert err.value.code == "invalid-parameter"


def test_tikhonov_agrees_with_stacked_least_squares(rng):
    A = rng.standard_normal((10, 6)) @ np.diag(np.logspace(0, -3, 6))
    b = rng.standard_normal(10)
    svd = compute_svd(A)
    for lam in (1e-2, 0.3):
        assert np.allclose(tikhonov_solve(svd, b, lam), tikhonov_dense(A, b, lam), rtol=1e-9)
    lam = 1e-14 * svd.sigma[-1]
    x_t, x_k = tikhonov_solve(svd, b, lam), tsvd_solve(svd, b, 6)
    assert np.linalg.norm(x_t - x_k) <= 1e-6 * np.linalg.norm(x_k)


def test_tikhonov_grid_matches_best_tsvd():
    # frozen from a 400-point grid: best Tikhonov / best TSVD = 0.954 for this instance
    nz = noisy_synthetic(32, PowerLaw(1, 1), seed=0)
    curve = tsvd_error_curve(nz.base.svd, nz.b, nz.x_true)
    errs = [np.linalg.norm(tikhonov_solve(nz.base.svd, nz.b, lam) - nz.x_true)
            for lam in np.logspace(-12, 0, 400)]
    ratio = min(errs) / np.linalg.norm(nz.x_true) / curve.best_rel_error
    assert abs(ratio - 1) <= 0.15
    assert ratio == pytest.approx(0.954, abs=2e-3)


def test_transition_index_examples():
    eta = 1.0
    pic = PicardData(sigma=np.ones(6), coeff=np.array([10, 5, 2, 1, 1, 1.0]), ratio=np.ones(6))
    assert transition_index(pic, eta).k0 == 3
    low = PicardData(sigma=np.ones(4), coeff=np.full(4, 0.5), ratio=np.ones(4))
    rep = transition_index(low, eta)
    assert (rep.k0, rep.rule) == (1, "noise-floor-everywhere")
    with pytest.raises(ValidationError):
        transition_index(pic, 0.0)


def test_transition_index_noise_free_is_n_minus_one():
    p = make_problem("synthetic", 20, decay=PowerLaw(1, 1), seed=0)
    assert transition_index(picard_data(p.svd, p.b_true), 1e-300).k0 == 19


@pytest.mark.parametrize("seed", range(5))
def test_transition_index_near_best_tsvd_index(seed):
    nz = noisy_synthetic(32, Geometric(np.e ** 2), seed=seed)
    svd = compute_svd(nz.A)
    k0 = transition_index(picard_data(svd, nz.b), nz.eta).k0
    assert abs(k0 - tsvd_error_curve(svd, nz.b, nz.x_true).best_k) <= 1


def test_picard_coefficients_through_computed_svd():
    p = make_problem("synthetic", 24, decay=PowerLaw(1, 1.5), beta=1.0, seed=2)
    svd = compute_svd(p.A)
    c = p.svd.sigma ** 2
    assert np.allclose(picard_data(svd, p.b_true).coeff, c, rtol=1e-8, atol=1e-14 * c[0])


@given(seed=st.integers(0, 1000), n=st.integers(3, 20))
def test_tsvd_increments_are_single_terms(seed, n):
    A = np.random.default_rng(seed).standard_normal((n + 2, n))
    b = np.random.default_rng(seed + 1).standard_normal(n + 2)
    svd = compute_svd(A)
    for k in range(2, n + 1):
        step = tsvd_solve(svd, b, k) - tsvd_solve(svd, b, k - 1)
        term = (svd.U[:, k - 1] @ b / svd.sigma[k - 1]) * svd.V[:, k - 1]
        assert np.allclose(step, term, atol=1e-12 * max(1.0, np.linalg.norm(term)))


@given(lam=st.floats(1e-6, 1e3), sigma=st.lists(st.floats(1e-3, 1e3), min_size=2, max_size=12))
def test_tikhonov_filters_in_unit_interval_and_monotone(lam, sigma):
    s = np.sort(np.unique(sigma))
    f = tikhonov_filters(s, lam)
    assert np.all((f > 0) & (f <= 1))
    assert np.all(np.diff(f) >= 0)


@given(seed=st.integers(0, 1000), n=st.integers(3, 20))
def test_tsvd_residual_nonincreasing(seed, n):
    nz = noisy_synthetic(n, PowerLaw(1, 1.5), seed=seed, eps=1e-2)
    curve = tsvd_error_curve(nz.base.svd, nz.b, nz.x_true)
    assert np.all(np.diff(curve.residual_norm) <= 1e-14 * curve.residual_norm[0])


@given(seed=st.integers(0, 1000))
def test_transition_index_within_bounds(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, 30))
    pic = PicardData(sigma=np.ones(n), coeff=np.abs(rng.standard_normal(n)) * 10 ** rng.uniform(-3, 3, n),
                     ratio=np.ones(n))
    k0 = transition_index(pic, 1.0).k0
    assert 1 <= k0 <= n - 1
