import numpy as np
import pytest

from xq.errors import DataError, ModelError
from xq.predictor import (
    KnnModel,
    LinearModel,
    ProductModel,
    build_model,
    fit_knn,
    fit_linear,
)
from xq.tabular import ColumnMeta, from_columns

from conftest import numeric_dataset


def _solve_normal_equations(design, y):
    """Independent OLS oracle: Gaussian elimination on the normal equations."""
    a = design.T @ design
    b = design.T @ y
    n = a.shape[0]
    aug = np.hstack([a, b[:, None]]).astype(np.float64)
    for col in range(n):
        pivot = col + np.argmax(np.abs(aug[col:, col]))
        aug[[col, pivot]] = aug[[pivot, col]]
        aug[col] = aug[col] / aug[col, col]
        for row in range(n):
            if row != col:
                aug[row] -= aug[row, col] * aug[col]
    return aug[:, -1]


class TestFitLinear:
    def test_exact_line(self):
        d = numeric_dataset("line", target="y", x=[0, 1, 2], y=[1, 3, 5])
        model = fit_linear(d)
        assert model.intercept == pytest.approx(1.0, abs=1e-9)
        assert model.coefficients[0] == pytest.approx(2.0, abs=1e-9)

    def test_constant_target(self):
        d = numeric_dataset("const", target="y", x=[0, 1, 2, 3], y=[4, 4, 4, 4])
        model = fit_linear(d)
        assert model.coefficients[0] == pytest.approx(0.0, abs=1e-9)
        assert model.intercept == pytest.approx(4.0, abs=1e-9)

    def test_noisy_fit_matches_normal_equations_oracle(self):
        rng = np.random.default_rng(1)
        x1 = rng.standard_normal(50)
        x2 = rng.standard_normal(50)
        y = 3.0 * x1 - x2 + 1e-3 * rng.standard_normal(50)
        d = numeric_dataset("noisy", target="y", x1=x1, x2=x2, y=y)
        model = fit_linear(d)
        assert model.coefficients[0] == pytest.approx(3.0, abs=1e-2)
        assert model.coefficients[1] == pytest.approx(-1.0, abs=1e-2)
        design = np.hstack([np.ones((50, 1)), np.column_stack([x1, x2])])
        oracle = _solve_normal_equations(design, y)
        np.testing.assert_allclose(
            np.concatenate([[model.intercept], model.coefficients]), oracle, atol=1e-9
        )

    def test_residual_orthogonality(self):
        rng = np.random.default_rng(2)
        x1, x2 = rng.standard_normal(30), rng.standard_normal(30)
        y = x1 + 2 * x2 + rng.standard_normal(30)
        d = numeric_dataset("orth", target="y", x1=x1, x2=x2, y=y)
        model = fit_linear(d)
        residuals = y - model.predict_batch(np.column_stack([x1, x2]))
        assert abs(residuals @ x1) < 1e-9
        assert abs(residuals @ x2) < 1e-9

    def test_rank_deficient_rejected(self):
        x = np.arange(6.0)
        d = numeric_dataset("rank", target="y", x1=x, x2=2 * x, y=x)
        with pytest.raises(ModelError, match="rank"):
            fit_linear(d)

    def test_needs_more_rows_than_features(self):
        d = numeric_dataset("small", target="y", x1=[1, 2], x2=[3, 5], y=[1, 2])
        with pytest.raises(ModelError, match="rows"):
            fit_linear(d)


class TestPredictBatch:
    def test_linear_definition(self):
        model = LinearModel(1.0, [2.0])
        np.testing.assert_allclose(
            model.predict_batch([[0.0], [1.0], [2.0]]), [1.0, 3.0, 5.0], atol=1e-12
        )

    def test_product_definition(self):
        assert ProductModel(0, 1).predict_row([3.0, 4.0]) == pytest.approx(12.0)

    def test_knn_training_point_self(self, rng):
        X = rng.standard_normal((12, 3))
        y = rng.standard_normal(12)
        cols = {f"x{i}": X[:, i] for i in range(3)}
        d = numeric_dataset("knn", target="y", y=y, **cols)
        model = fit_knn(d, k=1)
        np.testing.assert_allclose(model.predict_batch(X), y, rtol=1e-12)

    def test_determinism_bitwise(self, rng):
        X = rng.standard_normal((20, 3))
        y = rng.standard_normal(20)
        cols = {f"x{i}": X[:, i] for i in range(3)}
        d = numeric_dataset("det", target="y", y=y, **cols)
        for model in (fit_knn(d, k=3), fit_linear(d)):
            q = rng.standard_normal((15, 3))
            np.testing.assert_array_equal(model.predict_batch(q), model.predict_batch(q))

    def test_linear_closed_form_tight(self, rng):
        coef = rng.standard_normal(4)
        model = LinearModel(0.7, coef)
        rows = rng.standard_normal((25, 4))
        np.testing.assert_allclose(
            model.predict_batch(rows), rows @ coef + 0.7, rtol=1e-12, atol=1e-12
        )

    def test_signature_mismatch(self):
        sig = (ColumnMeta("a", "numeric"), ColumnMeta("b", "numeric"))
        model = LinearModel(0.0, [1.0, 1.0], sig)
        with pytest.raises(ModelError, match="columns"):
            model.predict_batch(np.zeros((2, 3)))

    def test_categorical_code_validation(self):
        sig = (ColumnMeta("a", "numeric"), ColumnMeta("c", "categorical", ("x", "y")))
        X = np.array([[0.0, 0.0], [1.0, 1.0]])
        model = KnnModel(1, X, np.array([1.0, 2.0]), sig)
        with pytest.raises(ModelError, match="level codes"):
            model.predict_batch(np.array([[0.0, 5.0]]))


class TestKnnConventions:
    def test_zero_variance_feature_contributes_nothing(self):
        # Second feature constant in training: distances must ignore it.
        X = np.array([[0.0, 7.0], [1.0, 7.0], [4.0, 7.0]])
        y = np.array([10.0, 20.0, 30.0])
        sig = (ColumnMeta("a", "numeric"), ColumnMeta("b", "numeric"))
        model = KnnModel(1, X, y, sig)
        out = model.predict_batch(np.array([[0.9, -999.0]]))
        assert out[0] == pytest.approx(20.0)

    def test_tie_breaks_toward_lower_row(self):
        X = np.array([[0.0], [0.0], [0.0]])
        y = np.array([5.0, 7.0, 9.0])
        model = KnnModel(2, X, y, (ColumnMeta("a", "numeric"),))
        assert model.predict_row([0.0]) == pytest.approx(6.0)

    def test_one_hot_distance(self):
        # Identical category -> nearer than different category.
        sig = (ColumnMeta("c", "categorical", ("u", "v")),)
        X = np.array([[0.0], [1.0]])
        y = np.array([100.0, 200.0])
        model = KnnModel(1, X, y, sig)
        assert model.predict_row([0.0]) == pytest.approx(100.0)
        assert model.predict_row([1.0]) == pytest.approx(200.0)

    def test_k_bounds(self):
        X = np.zeros((3, 1))
        with pytest.raises(ModelError):
            KnnModel(0, X, np.zeros(3), (ColumnMeta("a", "numeric"),))
        with pytest.raises(ModelError):
            KnnModel(4, X, np.zeros(3), (ColumnMeta("a", "numeric"),))


class TestBuildModel:
    def test_specs(self):
        d = numeric_dataset("b", target="y", x1=[0, 1, 2, 3], x2=[1, 3, 2, 5], y=[0, 1, 1, 0])
        assert build_model("knn:2", d).k == 2
        assert build_model("linear", d).coefficients.size == 2
        product = build_model("product:0,1", d)
        assert (product.j, product.k) == (0, 1)

    def test_bad_specs(self):
        d = numeric_dataset("b", target="y", x=[0, 1], y=[0, 1])
        for bad in ("knn:none", "product:1", "external:", "mystery"):
            with pytest.raises(DataError):
                build_model(bad, d)
