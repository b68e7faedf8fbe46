import numpy as np
import pytest

from sigtopo.lasso import (
    DesignMatrix,
    LassoError,
    LassoFit,
    fit_lasso,
    lambda_max,
    objective,
    r_squared,
    select,
    standardize_columns,
)

X1 = DesignMatrix(np.array([[1.0], [0.0], [-1.0]]), ("x",))
Y1 = np.array([2.0, 0.0, -2.0])


def random_problem(rng, m, p):
    X, _ = standardize_columns(DesignMatrix(rng.normal(size=(m, p)), range(p)))
    beta = np.where(rng.random(p) < 0.3, rng.normal(size=p), 0.0)
    y = X.columns @ beta + 0.3 * rng.normal(size=m)
    return X, y - y.mean()


# --- standardize_columns -------------------------------------------------------------

def test_standardize_unit_column():
    X, info = standardize_columns(DesignMatrix(np.array([[1.0], [2.0], [3.0]]), ("a",)))
    col = X.columns[:, 0]
    assert col.mean() == pytest.approx(0.0, abs=1e-15)
    assert col.std(ddof=1) == pytest.approx(1.0)
    assert info.mean[0] == 2.0 and not info.constant[0]


def test_standardize_flags_constant_column():
    X, info = standardize_columns(DesignMatrix(np.array([[5.0, 1.0], [5.0, 2.0]]), ("c", "v")))
    assert not X.columns[:, 0].any()
    assert info.constant.tolist() == [True, False]


def test_standardize_is_idempotent():
    X, _ = standardize_columns(DesignMatrix(np.random.default_rng(0).normal(size=(10, 4)), range(4)))
    again, _ = standardize_columns(X)
    np.testing.assert_allclose(again.columns, X.columns, atol=1e-12)


def test_design_matrix_validation():
    with pytest.raises(LassoError):
        DesignMatrix(np.zeros((3, 2)), ("a", "a"))
    with pytest.raises(LassoError):
        DesignMatrix(np.zeros((3, 2)), ("a",))
    with pytest.raises(LassoError):
        standardize_columns(DesignMatrix(np.zeros((1, 2)), ("a", "b")))


# --- fit_lasso --------------------------------------------------------------------------

def test_unpenalized_fit_is_least_squares():
    fit = fit_lasso(X1, Y1, 0.0)
    assert fit.beta[0] == pytest.approx(2.0)
    assert fit.r2 == pytest.approx(1.0)


def test_full_shrinkage_at_lambda_max():
    assert lambda_max(X1, Y1) == 8.0
    fit = fit_lasso(X1, Y1, 8.0)
    assert fit.beta[0] == 0.0


def test_intermediate_penalty_matches_grid_search():
    # frozen from a dense grid search of 2(2 - b)^2 + 4|b| over [-5, 5], step 1e-5
    fit = fit_lasso(X1, Y1, 4.0)
    assert fit.beta[0] == pytest.approx(1.0, abs=1e-6)
    grid = np.linspace(-5, 5, 1_000_001)
    values = ((Y1[:, None] - X1.columns[:, :1] * grid) ** 2).sum(axis=0) + 4.0 * np.abs(grid)
    assert grid[values.argmin()] == pytest.approx(fit.beta[0], abs=1e-5)


def test_fit_rejects_bad_input():
    with pytest.raises(LassoError):
        fit_lasso(X1, Y1[:2], 1.0)
    with pytest.raises(LassoError):
        fit_lasso(X1, Y1, -1.0)
    with pytest.raises(LassoError):
        fit_lasso(X1, np.array([np.nan, 0.0, 1.0]), 1.0)


def test_empty_design_fits_nothing():
    fit = fit_lasso(DesignMatrix(np.zeros((3, 0)), ()), Y1, 1.0)
    assert fit.beta.size == 0 and fit.r2 == 0.0


@pytest.mark.parametrize("seed", range(10))
def test_kkt_conditions(seed):
    rng = np.random.default_rng(seed)
    X, y = random_problem(rng, 30, 50)
    lam = 0.2 * lambda_max(X, y)
    fit = fit_lasso(X, y, lam, tol=1e-12, max_iter=100_000)
    assert fit.converged
    corr = X.columns.T @ (y - X.columns @ fit.beta)
    zero = fit.beta == 0
    assert np.all(np.abs(corr[zero]) <= lam / 2 + 1e-6)
    np.testing.assert_allclose(2 * corr[~zero], lam * np.sign(fit.beta[~zero]), atol=1e-6)


def test_l1_norm_shrinks_with_penalty():
    rng = np.random.default_rng(11)
    X, y = random_problem(rng, 40, 20)
    top = lambda_max(X, y)
    norms = [np.abs(fit_lasso(X, y, lam, tol=1e-12).beta).sum() for lam in np.linspace(0, top, 12)]
    assert all(b <= a + 1e-8 for a, b in zip(norms, norms[1:]))
    assert norms[-1] == 0.0


def test_objective_never_increases_across_sweeps():
    rng = np.random.default_rng(12)
    X, y = random_problem(rng, 25, 40)
    lam = 0.1 * lambda_max(X, y)
    values = [objective(X, y, fit_lasso(X, y, lam, tol=0.0, max_iter=k).beta, lam) for k in range(1, 30)]
    assert all(b <= a + 1e-10 for a, b in zip(values, values[1:]))


def test_zero_penalty_residual_is_orthogonal():
    rng = np.random.default_rng(13)
    X, y = random_problem(rng, 60, 8)
    fit = fit_lasso(X, y, 0.0, tol=1e-14, max_iter=100_000)
    np.testing.assert_allclose(X.columns.T @ (y - X.columns @ fit.beta), 0.0, atol=1e-8)


# --- r_squared / select ---------------------------------------------------------------------

def test_r_squared_cases():
    assert r_squared(X1, Y1, [2.0]) == 1.0
    assert r_squared(X1, Y1, [0.0]) == 0.0
    assert r_squared(X1, Y1, [1.0]) == pytest.approx(0.75)
    flat = np.zeros(3)
    assert r_squared(X1, flat, [0.0]) == 1.0
    assert r_squared(X1, flat, [1.0]) == 0.0


def fake_fit(r2, beta):
    return LassoFit(np.array(beta), r2, 1.0, 1, True, tuple(range(1, len(beta) + 1)))


def test_select_fails_gate():
    assert select(fake_fit(0.5, [1.0, 2.0]), 0.67) == {}


def test_select_gate_is_strict():
    assert select(fake_fit(0.67, [1.0]), 0.67) == {}


def test_select_returns_absolute_weights():
    assert select(fake_fit(0.9, [0.3, 0.0, -0.1]), 0.67) == {1: 0.3, 3: 0.1}


def test_select_snaps_tiny_coefficients():
    assert select(fake_fit(0.9, [1e-11, 0.2]), 0.67) == {2: 0.2}
