"""Black-box prediction contract plus the built-in reference predictors.

Every predictor maps feature rows (dataset code space: numeric values,
categorical level codes) to one finite scalar per row, deterministically.
Categorical features are one-hot encoded at the predictor boundary; datasets
keep their original columns so chunk counting is unaffected.
"""

from __future__ import annotations

from abc import ABC, abstractmethod

import numpy as np

from . import kernels
from .errors import DataError, ModelError
from .tabular import CATEGORICAL, NUMERIC, ColumnMeta, Dataset


class Predictor(ABC):
    """Scalar-output prediction over feature rows.

    Subclasses implement :meth:`_predict_valid`; the public entry point
    validates the row matrix against the feature signature (when one is
    attached) and checks output finiteness.
    """

    feature_signature: tuple[ColumnMeta, ...] | None = None

    @abstractmethod
    def _predict_valid(self, rows: np.ndarray) -> np.ndarray:
        ...

    def predict_batch(self, rows: np.ndarray) -> np.ndarray:
        rows = np.atleast_2d(np.asarray(rows, dtype=np.float64))
        self._check_signature(rows)
        out = np.asarray(self._predict_valid(rows), dtype=np.float64)
        if out.shape != (rows.shape[0],):
            raise ModelError(
                f"predictor returned {out.shape} scores for {rows.shape[0]} rows"
            )
        if not np.all(np.isfinite(out)):
            raise ModelError("predictor returned a non-finite score")
        return out

    def predict_row(self, row) -> float:
        return float(self.predict_batch(np.asarray(row, dtype=np.float64)[None, :])[0])

    def _check_signature(self, rows: np.ndarray) -> None:
        sig = self.feature_signature
        if sig is None:
            return
        if rows.shape[1] != len(sig):
            raise ModelError(
                f"row matrix has {rows.shape[1]} columns, signature expects {len(sig)}"
            )
        for j, meta in enumerate(sig):
            if meta.kind == CATEGORICAL:
                col = rows[:, j]
                if np.any(col != np.round(col)) or col.min() < 0 or col.max() >= len(meta.levels):
                    raise ModelError(
                        f"column {meta.name!r}: values are not valid level codes"
                    )


# ---------------------------------------------------------------------------
# Encoding at the predictor boundary
# ---------------------------------------------------------------------------


def one_hot_encode(rows: np.ndarray, signature: tuple[ColumnMeta, ...]) -> np.ndarray:
    """Expand categorical code columns into indicator columns."""
    blocks = []
    for j, meta in enumerate(signature):
        if meta.kind == NUMERIC:
            blocks.append(rows[:, j : j + 1])
        else:
            codes = rows[:, j].astype(np.intp)
            blocks.append(np.eye(len(meta.levels))[codes])
    return np.ascontiguousarray(np.hstack(blocks))


# ---------------------------------------------------------------------------
# Built-in reference predictors
# ---------------------------------------------------------------------------


class LinearModel(Predictor):
    """intercept + coefficients . row, exactly."""

    def __init__(
        self,
        intercept: float,
        coefficients,
        signature: tuple[ColumnMeta, ...] | None = None,
    ) -> None:
        self.intercept = float(intercept)
        self.coefficients = np.asarray(coefficients, dtype=np.float64).ravel()
        if signature is not None:
            if len(signature) != self.coefficients.size:
                raise ModelError(
                    f"{self.coefficients.size} coefficients for {len(signature)} columns"
                )
            bad = [m.name for m in signature if m.kind != NUMERIC]
            if bad:
                raise ModelError(f"linear model needs numeric columns, got categorical {bad}")
        self.feature_signature = signature

    def _predict_valid(self, rows: np.ndarray) -> np.ndarray:
        if rows.shape[1] != self.coefficients.size:
            raise ModelError(
                f"row matrix has {rows.shape[1]} columns, model has "
                f"{self.coefficients.size} coefficients"
            )
        return rows @ self.coefficients + self.intercept


class ProductModel(Predictor):
    """Prediction is the product of two feature columns; the canonical
    nonzero-interaction reference."""

    def __init__(
        self,
        j: int,
        k: int,
        signature: tuple[ColumnMeta, ...] | None = None,
    ) -> None:
        if j == k:
            raise ModelError("product model needs two distinct feature indices")
        self.j, self.k = int(j), int(k)
        if signature is not None:
            for idx in (self.j, self.k):
                if not 0 <= idx < len(signature):
                    raise ModelError(f"feature index {idx} out of range")
                if signature[idx].kind != NUMERIC:
                    raise ModelError(f"column {signature[idx].name!r} is not numeric")
        self.feature_signature = signature

    def _predict_valid(self, rows: np.ndarray) -> np.ndarray:
        if rows.shape[1] <= max(self.j, self.k):
            raise ModelError(
                f"row matrix has {rows.shape[1]} columns, product model uses "
                f"features {self.j} and {self.k}"
            )
        return rows[:, self.j] * rows[:, self.k]


class KnnModel(Predictor):
    """Mean target of the k nearest training rows.

    Distances are Euclidean over standardized encoded features (training
    mean/stdev; zero-stdev features contribute 0 distance). Ties break toward
    the lower training-row index.
    """

    def __init__(
        self,
        k: int,
        train_rows: np.ndarray,
        targets: np.ndarray,
        signature: tuple[ColumnMeta, ...],
    ) -> None:
        train_rows = np.atleast_2d(np.asarray(train_rows, dtype=np.float64))
        targets = np.asarray(targets, dtype=np.float64).ravel()
        if not 1 <= k <= train_rows.shape[0]:
            raise ModelError(f"k must be in [1, {train_rows.shape[0]}], got {k}")
        if targets.size != train_rows.shape[0]:
            raise ModelError("one target per training row required")
        self.k = int(k)
        self.feature_signature = signature
        self._targets = targets
        encoded = one_hot_encode(train_rows, signature)
        mean = encoded.mean(axis=0)
        std = encoded.std(axis=0)
        inv_scale = np.zeros_like(std)
        nonzero = std > 0.0
        inv_scale[nonzero] = 1.0 / std[nonzero]
        self._mean = mean
        self._inv_scale = inv_scale
        self._train_std = np.ascontiguousarray((encoded - mean) * inv_scale)

    def _standardize(self, rows: np.ndarray) -> np.ndarray:
        encoded = one_hot_encode(rows, self.feature_signature)
        return np.ascontiguousarray((encoded - self._mean) * self._inv_scale)

    def _predict_valid(self, rows: np.ndarray) -> np.ndarray:
        return kernels.knn_predict(
            self._train_std, self._targets, self._standardize(rows), self.k
        )


# ---------------------------------------------------------------------------
# Fitting
# ---------------------------------------------------------------------------


def _fit_frame(d: Dataset, target: int | str | None) -> tuple[np.ndarray, np.ndarray, tuple[ColumnMeta, ...]]:
    ds = d if target is None else d.with_target(target)
    if ds.target is None:
        raise DataError("no target column given for fitting")
    if ds.columns[ds.target].kind != NUMERIC:
        raise ModelError("target column must be numeric for built-in fitting")
    return ds.feature_matrix(), ds.target_values(), ds.feature_signature()


def fit_linear(d: Dataset, target: int | str | None = None) -> LinearModel:
    """Ordinary least squares with intercept over all (numeric) features."""
    X, y, signature = _fit_frame(d, target)
    bad = [m.name for m in signature if m.kind != NUMERIC]
    if bad:
        raise ModelError(f"fit_linear needs numeric features, got categorical {bad}")
    n, m = X.shape
    if n <= m:
        raise ModelError(f"need more rows ({n}) than features ({m}) for OLS")
    design = np.hstack([np.ones((n, 1)), X])
    coef, _, rank, _ = np.linalg.lstsq(design, y, rcond=None)
    if rank < m + 1:
        raise ModelError("design matrix is rank-deficient")
    return LinearModel(coef[0], coef[1:], signature)


def fit_knn(d: Dataset, k: int, target: int | str | None = None) -> KnnModel:
    X, y, signature = _fit_frame(d, target)
    return KnnModel(k, X, y, signature)


# ---------------------------------------------------------------------------
# Model selection syntax used by the CLI and the experiment harness
# ---------------------------------------------------------------------------


def build_model(spec: str, d: Dataset, target: int | str | None = None) -> Predictor:
    """Construct a predictor from ``linear | knn:<k> | product:<j>,<k> |
    external:<command>`` against (and, where applicable, fitted on) ``d``."""
    kind, _, rest = spec.partition(":")
    if kind == "linear":
        return fit_linear(d, target)
    if kind == "knn":
        try:
            k = int(rest)
        except ValueError:
            raise DataError(f"bad model spec {spec!r}: knn needs an integer k") from None
        return fit_knn(d, k, target)
    if kind == "product":
        try:
            j, k = (int(tok) for tok in rest.split(","))
        except ValueError:
            raise DataError(f"bad model spec {spec!r}: product needs two indices") from None
        ds = d if target is None else d.with_target(target)
        return ProductModel(j, k, ds.feature_signature())
    if kind == "external":
        if not rest.strip():
            raise DataError(f"bad model spec {spec!r}: external needs a command")
        import shlex

        from .external import connect_external

        ds = d if target is None else d.with_target(target)
        return connect_external(shlex.split(rest), ds.feature_signature())
    raise DataError(f"unknown model spec {spec!r}")
