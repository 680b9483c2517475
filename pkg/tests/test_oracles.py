import numpy as np
import pytest

from maxent_inversion import (
    DegenerateSlab,
    InversionProblem,
    NotPositiveDefinite,
    PriorKind,
    ShapeError,
    conditional_mean_mc,
    dense_map,
    levinson,
    levinson_ar_spectrum,
    periodogram_bins,
    solve_gaussian,
)


def test_periodogram_examples():
    np.testing.assert_allclose(periodogram_bins(np.ones(4)), [16, 0, 0], atol=1e-12)
    np.testing.assert_allclose(periodogram_bins([1.0, 0, 0, 0]), [1, 1, 1])
    with pytest.raises(ShapeError):
        periodogram_bins(np.ones(5))


def test_periodogram_parseval(rng):
    s = rng.standard_normal(64)
    x = periodogram_bins(s)
    assert (x[0] + 2 * x[1:-1].sum() + x[-1]) / 64 == pytest.approx(np.sum(s * s), rel=1e-12)


def test_levinson_ar1():
    a = 0.6
    r = a ** np.arange(4) / (1 - a * a)
    model = levinson(r)
    np.testing.assert_allclose(model.coeffs, [1, -a, 0, 0], atol=1e-14)
    assert model.error_var == pytest.approx(1.0)


def test_levinson_matches_toeplitz_solve(rng):
    s = rng.standard_normal(256)
    r = np.array([np.dot(s[: 256 - k], s[k:]) for k in range(6)]) / 256
    model = levinson(r)
    t = np.array([[r[abs(i - j)] for j in range(5)] for i in range(5)])
    np.testing.assert_allclose(model.coeffs[1:], np.linalg.solve(t, -r[1:]), rtol=1e-10)
    assert np.all(np.diff(model.error_vars) <= 0)


def test_levinson_not_positive_definite():
    with pytest.raises(NotPositiveDefinite):
        levinson([1.0, 1.5])
    with pytest.raises(NotPositiveDefinite):
        levinson([0.0])


def test_white_noise_spectrum_is_flat():
    np.testing.assert_allclose(levinson_ar_spectrum([1.0, 0.0, 0.0], 16), 16.0)


def test_order_zero_spectrum():
    np.testing.assert_allclose(levinson_ar_spectrum([2.5], 8), 8 * 2.5)


def test_ar_spectrum_reproduces_acf():
    # the inverse transform of the AR spectrum reproduces the given lags
    r = np.array([2.0, 1.2, 0.5])
    nfft = 512
    p = levinson_ar_spectrum(r, nfft)
    full = np.r_[p, p[-2:0:-1]]
    lags = np.fft.ifft(full).real / nfft
    np.testing.assert_allclose(lags[:3], r, rtol=1e-6)


def _ted(w, z):
    lmap = dense_map(np.atleast_2d(w).T)
    return InversionProblem(lmap, PriorKind.TED, [z])


def test_mc_symmetry_two_elements():
    mean, se = conditional_mean_mc(_ted([1.0, 1.0], 1.0), 20000, seed=1)
    assert np.all(np.abs(mean - 0.5) <= 3 * se + 1e-3)


def test_mc_symmetry_three_elements():
    mean, se = conditional_mean_mc(_ted([1.0, 1.0, 1.0], 1.5), 20000, seed=2)
    assert np.all(np.abs(mean - 0.5) <= 3 * se + 1e-3)


def test_mc_gaussian_matches_closed_form():
    lmap = dense_map(np.array([[1.0], [0.5], [-0.3]]))
    problem = InversionProblem(lmap, PriorKind.GAUSSIAN, [0.4])
    mean, se = conditional_mean_mc(problem, 20000, seed=3)
    exact = solve_gaussian(lmap, [0.4]).x_bar
    assert np.all(np.abs(mean - exact) <= 4 * se + 2e-3)


def test_mc_deterministic_and_stderr_rate():
    problem = _ted([1.0, 2.0], 1.2)
    a = conditional_mean_mc(problem, 5000, seed=7)
    b = conditional_mean_mc(problem, 5000, seed=7)
    np.testing.assert_array_equal(a[0], b[0])
    _, se4 = conditional_mean_mc(problem, 20000, seed=8)
    ratio = a[1] / se4
    assert np.all((ratio > 2 * 0.7) & (ratio < 2 * 1.3))


def test_mc_degenerate_slab():
    with pytest.raises(DegenerateSlab):
        conditional_mean_mc(_ted([1.0, 1.0], 1.999), 1000, slab_eps=1e-6, max_draws=10000)


def test_mc_rejects_large_or_mixed():
    big = InversionProblem(dense_map(np.ones((7, 1)) + np.eye(7)[:, :1]), PriorKind.TED, [1.0])
    with pytest.raises(ValueError):
        conditional_mean_mc(big, 100)
    mixed = InversionProblem(dense_map(np.array([[1.0], [2.0]])), ["ted", "tg"], [1.0])
    with pytest.raises(ValueError):
        conditional_mean_mc(mixed, 100)
