import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from plscast import models
from plscast.errors import ConvergenceError, DomainError, SingularMatrixError
from plscast.models import PenaltySpec, fit_ar1, fit_ols, fit_penalised, fit_pls, predict
from plscast.synthgen import oracle_objective, oracle_pls

from .oracles import grid_refine

X3 = np.array([[-1.0], [0.0], [1.0]])
Y3 = np.array([-1.0, 0.0, 1.0])


def _line_search(f, lo=-3.0, hi=3.0):
    return grid_refine(lambda b: f(b), [0.5 * (lo + hi)], width=0.5 * (hi - lo))[0]


# --- OLS ---------------------------------------------------------------


def test_ols_exact_line():
    m = fit_ols([[1], [2], [3]], [2, 4, 6])
    assert m.intercept == pytest.approx(0, abs=1e-12)
    np.testing.assert_allclose(m.coefficients, [2], rtol=1e-12)
    assert predict(m, [[10]])[0] == pytest.approx(20)


def test_ols_constant_response(rng):
    X = rng.normal(size=(10, 2))
    m = fit_ols(X, np.full(10, 3.5))
    np.testing.assert_allclose(m.coefficients, 0, atol=1e-12)
    assert m.intercept == pytest.approx(3.5)


def test_ols_two_predictors_vs_grid():
    X = np.array([[0.1, 1.0], [1.3, -0.2], [2.0, 0.4], [-0.7, 0.9], [0.5, -1.1]])
    y = np.array([1.0, 2.2, 3.9, -0.3, 0.8])

    def rss(a, b1, b2):
        return sum((y[i] - a - b1 * X[i, 0] - b2 * X[i, 1]) ** 2 for i in range(5))

    ref = grid_refine(rss, [0, 0, 0], width=4, points=21)
    m = fit_ols(X, y)
    np.testing.assert_allclose([m.intercept, *m.coefficients], ref, atol=1e-6)


def test_ols_rank_deficient():
    X = np.column_stack([np.arange(6.0), 2 * np.arange(6.0)])
    with pytest.raises(SingularMatrixError) as info:
        fit_ols(X, np.arange(6.0))
    assert info.value.column == 1


def test_ols_needs_observations():
    with pytest.raises(DomainError):
        fit_ols(np.eye(3), [1, 2, 3])


# --- penalised ---------------------------------------------------------


def test_ridge_closed_form_example():
    ref = _line_search(lambda b: sum((Y3[i] - X3[i, 0] * b) ** 2 for i in range(3)) + 2 * b * b)
    assert ref == pytest.approx(0.5, abs=1e-7)  # sqrt(eps) resolution of a line search
    m = fit_penalised(X3, Y3, PenaltySpec(lam=2.0, alpha=1.0))
    assert m.coefficients[0] == pytest.approx(0.5, abs=1e-12)


@pytest.mark.parametrize("lam", [4.0, 5.0, 40.0])
def test_lasso_zero_at_threshold(lam):
    ref = _line_search(lambda b: sum((Y3[i] - X3[i, 0] * b) ** 2 for i in range(3)) + lam * np.abs(b))
    assert ref == pytest.approx(0.0, abs=1e-7)
    m = fit_penalised(X3, Y3, PenaltySpec(lam=lam, alpha=0.0))
    assert m.coefficients[0] == 0.0


def test_lasso_below_threshold_is_soft_threshold():
    m = fit_penalised(X3, Y3, PenaltySpec(lam=2.0, alpha=0.0))
    assert m.coefficients[0] == pytest.approx(0.5, abs=1e-12)  # (2 - 1) / 2


@pytest.mark.parametrize("alpha", [0.0, 0.5, 1.0])
def test_lambda_zero_is_ols(rng, alpha):
    X = rng.normal(size=(30, 4))
    y = X @ [1, -2, 0.5, 0] + rng.normal(size=30)
    a = fit_penalised(X, y, PenaltySpec(0.0, alpha))
    b = fit_ols(X, y)
    np.testing.assert_allclose(a.coefficients, b.coefficients, atol=1e-8)
    assert a.intercept == pytest.approx(b.intercept, abs=1e-8)


def test_huge_ridge_predicts_mean(rng):
    X = rng.normal(size=(25, 3))
    y = rng.normal(size=25)
    m = fit_penalised(X, y, PenaltySpec(1e12, 1.0))
    np.testing.assert_allclose(predict(m, rng.normal(size=(4, 3))), y.mean(), atol=1e-6)


def test_ridge_norm_monotone(rng):
    X = rng.normal(size=(40, 5))
    X = (X - X.mean(0)) / X.std(0, ddof=1)
    y = X @ rng.normal(size=5) + rng.normal(size=40)
    norms = [np.linalg.norm(fit_penalised(X, y, PenaltySpec(lam, 1.0)).coefficients) for lam in np.logspace(-3, 3, 20)]
    assert all(a >= b for a, b in zip(norms, norms[1:]))


def test_lasso_above_lambda_max_all_zero(rng):
    X = rng.normal(size=(30, 4))
    y = rng.normal(size=30)
    Z = (X - X.mean(0)) / X.std(0, ddof=1)
    lam_max = 2 * np.max(np.abs(Z.T @ (y - y.mean())))
    m = fit_penalised(X, y, PenaltySpec(lam_max * 1.0000001, 0.0))
    assert np.all(m.coefficients == 0)
    m = fit_penalised(X, y, PenaltySpec(lam_max * 0.9, 0.0))
    assert np.any(m.coefficients != 0)


def test_coordinate_descent_objective_non_increasing(rng):
    X = rng.normal(size=(30, 6))
    X[:, 1] += 0.8 * X[:, 0]
    y = X @ [1, 0, 0.5, 0, -1, 0] + rng.normal(size=30)
    Z = (X - X.mean(0)) / X.std(0, ddof=1)
    p = PenaltySpec(5.0, 0.3)
    trace = []
    fit_penalised(X, y, p, trace=trace)
    values = [oracle_objective(Z, y - y.mean(), b, 0.0, p) for b in [np.zeros(6), *trace]]
    assert all(b <= a + 1e-12 for a, b in zip(values, values[1:]))


def test_coordinate_descent_convergence_error(rng, monkeypatch):
    monkeypatch.setattr(models, "CD_MAX_SWEEPS", 1)
    X = rng.normal(size=(30, 3))
    X[:, 1] = X[:, 0] + 0.01 * X[:, 1]
    with pytest.raises(ConvergenceError) as info:
        fit_penalised(X, X[:, 0] + rng.normal(size=30), PenaltySpec(0.1, 0.5))
    assert info.value.last_delta > 0


def test_penalty_spec_validation():
    with pytest.raises(DomainError):
        PenaltySpec(-1.0, 0.5)
    with pytest.raises(DomainError):
        PenaltySpec(1.0, 1.5)


def test_penalised_zero_variance_column(rng):
    X = np.column_stack([rng.normal(size=10), np.ones(10)])
    with pytest.raises(DomainError, match="column 1"):
        fit_penalised(X, rng.normal(size=10), PenaltySpec(1.0, 1.0))


# --- PLS ---------------------------------------------------------------


def test_pls_single_predictor_is_simple_regression(rng):
    x = rng.normal(size=(30, 1))
    y = 2 * x[:, 0] + rng.normal(size=30)
    np.testing.assert_allclose(fit_pls(x, y, 1).fitted, fit_ols(x, y).fitted, atol=1e-12)


def test_pls_duplicated_predictor(rng):
    x = rng.normal(size=(30, 1))
    y = x[:, 0] + rng.normal(size=30)
    a = fit_pls(np.hstack([x, x]), y, 1)
    b = fit_pls(x, y, 1)
    np.testing.assert_allclose(a.fitted, b.fitted, atol=1e-12)
    assert a.directions.slopes[0] == pytest.approx(b.directions.slopes[0] / 2)


def _design(rng, n=60, q=3):
    X = rng.normal(size=(n, q)) + rng.normal(size=q) * 3
    X[:, 1] += 0.5 * X[:, 0]
    y = X @ rng.normal(size=q) + rng.normal(size=n) + 2
    return X, y


def test_pls_converges_to_ols(rng):
    X, y = _design(rng)
    assert np.max(np.abs(fit_pls(X, y, 50).fitted - fit_ols(X, y).fitted)) < 1e-4


@pytest.mark.parametrize("d", [1, 2, 3])
def test_pls_matches_oracle(rng, d):
    X, y = _design(rng, q=4)
    np.testing.assert_allclose(fit_pls(X, y, d).fitted, oracle_pls(X, y, d), atol=1e-10, rtol=0)


@pytest.mark.parametrize("d", [1, 2])
def test_pls_first_direction_intercept_mode_matches_oracle(rng, d):
    X, y = _design(rng, q=4)
    a = fit_pls(X, y, d, center_each_direction=False).fitted
    np.testing.assert_allclose(a, oracle_pls(X, y, d, center_each_direction=False), atol=1e-10, rtol=0)
    if d == 1:
        np.testing.assert_allclose(a, fit_pls(X, y, 1).fitted, atol=1e-12)


def test_pls_first_direction_intercept_mode_is_not_shift_invariant(rng):
    X, y = _design(rng, q=4)
    Xs = X + [0, 100, 0, 0]
    lit = fit_pls(X, y, 2, center_each_direction=False).fitted
    assert np.max(np.abs(fit_pls(Xs, y, 2, center_each_direction=False).fitted - lit)) > 1e-6


def test_pls_predict_training_rows_reproduces_fitted(rng):
    X, y = _design(rng, q=5)
    m = fit_pls(X, y, 3)
    assert predict(m, X).tobytes() == m.fitted.tobytes()
    np.testing.assert_allclose(m.intercept + X @ m.coefficients, m.fitted, atol=1e-10)


def test_pls_residual_orthogonal_to_factor(rng):
    X, y = _design(rng, q=5)
    dirs = fit_pls(X, y, 3).directions
    for d in range(1, 4):
        partial = fit_pls(X, y, d)
        z = X @ dirs.loadings[d - 1]
        eps = y - partial.fitted
        assert abs(np.cov(z, eps)[0, 1]) < 1e-9 * max(1.0, np.std(z) * np.std(eps))


@settings(max_examples=40, deadline=None)
@given(
    seed=st.integers(0, 2**32 - 1),
    d=st.integers(1, 3),
    col=st.integers(0, 3),
    scale=st.sampled_from([1e-3, 1.0, 1e3, -2.0]),
    shift=st.sampled_from([-100.0, 0.0, 100.0]),
)
def test_pls_affine_invariance(seed, d, col, scale, shift):
    r = np.random.default_rng(seed)
    X, y = _design(r, n=40, q=4)
    base = fit_pls(X, y, d)
    Xt = X.copy()
    Xt[:, col] = scale * Xt[:, col] + shift
    new = r.normal(size=(5, 4)) * 3
    newt = new.copy()
    newt[:, col] = scale * newt[:, col] + shift
    a = predict(base, new)
    b = predict(fit_pls(Xt, y, d), newt)
    assert np.max(np.abs(a - b)) <= 1e-9 * max(1.0, np.max(np.abs(a)))


def test_pls_allows_collinear_but_not_constant(rng):
    x = rng.normal(size=(20, 1))
    fit_pls(np.hstack([x, 3 * x]), x[:, 0] + rng.normal(size=20), 2)
    with pytest.raises(DomainError, match="column 1"):
        fit_pls(np.hstack([x, np.ones((20, 1))]), x[:, 0], 1)
    with pytest.raises(DomainError):
        fit_pls(np.hstack([x, x]), x[:, 0], 0)


# --- AR(1) -------------------------------------------------------------


def test_ar_constant():
    m = fit_ar1([1, 1, 1, 1])
    assert (m.intercept, m.coefficients[0]) == (1.0, 0.0)


def test_ar_alternating():
    m = fit_ar1([1, -1] * 5)
    assert m.coefficients[0] == pytest.approx(-1.0)
    assert m.intercept == pytest.approx(0.0, abs=1e-12)


def test_ar_simulated():
    # documented generator: PCG64 seed 11, phi 0.6, unit innovations
    rng = np.random.Generator(np.random.PCG64(11))
    e = rng.standard_normal(200)
    y = np.empty(200)
    y[0] = e[0]
    for t in range(1, 200):
        y[t] = 0.6 * y[t - 1] + e[t]
    m = fit_ar1(y)
    assert abs(m.coefficients[0] - 0.6) <= 0.15
    ref = grid_refine(lambda a, b: sum((y[t] - a - b * y[t - 1]) ** 2 for t in range(1, 200)), [0, 0], width=2, points=21)
    np.testing.assert_allclose([m.intercept, m.coefficients[0]], ref, atol=1e-6)


def test_ar_too_short():
    with pytest.raises(DomainError):
        fit_ar1([1.0, 2.0])


# --- shared contract -----------------------------------------------------


def test_predict_width_mismatch(rng):
    m = fit_ols(rng.normal(size=(10, 2)), rng.normal(size=10))
    with pytest.raises(DomainError):
        predict(m, np.ones((1, 3)))


@pytest.mark.parametrize(
    "fit",
    [
        lambda X, y: fit_ols(X, y),
        lambda X, y: fit_penalised(X, y, PenaltySpec(3.0, 1.0)),
        lambda X, y: fit_penalised(X, y, PenaltySpec(3.0, 0.0)),
        lambda X, y: fit_penalised(X, y, PenaltySpec(3.0, 0.5)),
        lambda X, y: fit_pls(X, y, 2),
    ],
)
def test_fit_predict_roundtrip(rng, fit):
    X = rng.normal(size=(30, 4))
    y = X @ [1, 0, 2, 0] + rng.normal(size=30)
    m = fit(X, y)
    assert predict(m, X).tobytes() == m.fitted.tobytes()


def test_ar_fit_predict_roundtrip(rng):
    y = rng.normal(size=20)
    m = fit_ar1(y)
    assert predict(m, y[:-1]).tobytes() == m.fitted.tobytes()
