"""One- and two-dimensional partial dependence over a dataset.

PD of feature j at value v is the mean prediction over the evaluation rows
with feature j forced to v. Numeric grids are empirical quantiles at equally
spaced probability levels (endpoints pinned to the observed min/max);
categorical grids enumerate all levels. Centered curves subtract the sample
mean of the curve evaluated at the rows' own feature values, so centered PD
has mean zero over the evaluation rows.

Evaluation rows are the full dataset up to ``sample_cap`` rows, else a seeded
sample; grid-point reductions run in a fixed order, so results are
deterministic per (predictor, dataset, seed, grid size).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DataError
from .predictor import Predictor
from .tabular import CATEGORICAL, NUMERIC, Dataset

DEFAULT_GRID_SIZE = 20
DEFAULT_SAMPLE_CAP = 500

# Upper bound on rows per predict_batch call inside pairwise loops.
_BATCH_ROWS = 200_000


def evaluation_rows(d: Dataset, sample_cap: int = DEFAULT_SAMPLE_CAP, seed: int = 0) -> np.ndarray:
    """Row indices PD averages over: all rows, or a seeded sample past the cap."""
    if sample_cap < 1:
        raise DataError(f"sample cap must be >= 1, got {sample_cap}")
    if d.n_rows <= sample_cap:
        return np.arange(d.n_rows)
    rng = np.random.default_rng(seed)
    return np.sort(rng.choice(d.n_rows, size=sample_cap, replace=False))


def quantile_points(values: np.ndarray, grid_size: int, name: str) -> np.ndarray:
    """Unique empirical quantiles at ``grid_size`` equally spaced levels in [0, 1]."""
    if grid_size < 2:
        raise DataError(f"grid size must be >= 2, got {grid_size}")
    levels = np.linspace(0.0, 1.0, grid_size)
    points = np.unique(np.quantile(values, levels))
    if points.size < 2:
        raise DataError(f"feature {name!r}: grid degenerates to a single point")
    return points


def _interp1(points: np.ndarray, values: np.ndarray, kind: str, at: np.ndarray) -> np.ndarray:
    """Fixed instance-evaluation rule: linear interpolation for numeric grids
    (clamped to the grid hull), exact level lookup for categorical ones."""
    at = np.asarray(at, dtype=np.float64)
    if kind == NUMERIC:
        return np.interp(at, points, values)
    idx = np.searchsorted(points, at)
    if np.any(idx >= points.size) or np.any(points[np.minimum(idx, points.size - 1)] != at):
        raise DataError("categorical PD lookup: value is not a known level code")
    return values[idx]


@dataclass(frozen=True)
class PDGrid:
    """Partial dependence of one feature on a fixed evaluation-row set."""

    feature: str
    kind: str
    points: np.ndarray
    values: np.ndarray
    centered_values: np.ndarray
    center: float
    n_eval_rows: int

    def __post_init__(self) -> None:
        if not (self.points.size == self.values.size == self.centered_values.size >= 1):
            raise DataError("PD grid arrays must have equal, nonzero length")

    def evaluate(self, at) -> np.ndarray:
        return _interp1(self.points, self.values, self.kind, at)

    def evaluate_centered(self, at) -> np.ndarray:
        return _interp1(self.points, self.centered_values, self.kind, at)


@dataclass(frozen=True)
class PDGrid2:
    """Two-way partial dependence surface for a feature pair."""

    features: tuple[str, str]
    kinds: tuple[str, str]
    points_a: np.ndarray
    points_b: np.ndarray
    values: np.ndarray
    centered_values: np.ndarray
    center: float
    n_eval_rows: int

    def __post_init__(self) -> None:
        if self.values.shape != (self.points_a.size, self.points_b.size):
            raise DataError("PD surface shape does not match its grids")

    def evaluate(self, at_a, at_b) -> np.ndarray:
        return _interp2(self.points_a, self.points_b, self.values, self.kinds, at_a, at_b)

    def evaluate_centered(self, at_a, at_b) -> np.ndarray:
        return _interp2(
            self.points_a, self.points_b, self.centered_values, self.kinds, at_a, at_b
        )


def _axis_weights(points: np.ndarray, kind: str, at: np.ndarray):
    """(lower index, upper index, upper weight) for one interpolation axis."""
    at = np.asarray(at, dtype=np.float64)
    if kind == NUMERIC:
        clipped = np.clip(at, points[0], points[-1])
        hi = np.clip(np.searchsorted(points, clipped, side="left"), 1, points.size - 1)
        lo = hi - 1
        span = points[hi] - points[lo]
        w = np.where(span > 0, (clipped - points[lo]) / np.where(span > 0, span, 1.0), 0.0)
        return lo, hi, w
    idx = np.searchsorted(points, at)
    if np.any(idx >= points.size) or np.any(points[np.minimum(idx, points.size - 1)] != at):
        raise DataError("categorical PD lookup: value is not a known level code")
    return idx, idx, np.zeros(at.shape)


def _interp2(points_a, points_b, grid, kinds, at_a, at_b) -> np.ndarray:
    lo_a, hi_a, wa = _axis_weights(points_a, kinds[0], at_a)
    lo_b, hi_b, wb = _axis_weights(points_b, kinds[1], at_b)
    top = grid[hi_a, lo_b] * (1 - wb) + grid[hi_a, hi_b] * wb
    bottom = grid[lo_a, lo_b] * (1 - wb) + grid[lo_a, hi_b] * wb
    return bottom * (1 - wa) + top * wa


# ---------------------------------------------------------------------------
# Grid construction and evaluation
# ---------------------------------------------------------------------------


def _feature_position(d: Dataset, feature: int | str) -> int:
    j = d._resolve(feature)
    if j == d.target:
        raise DataError("partial dependence of the target column is undefined")
    return d.feature_indices.index(j)


def _grid_for(d: Dataset, pos: int, grid_size: int) -> np.ndarray:
    j = d.feature_indices[pos]
    meta = d.columns[j]
    if meta.kind == CATEGORICAL:
        return np.arange(len(meta.levels), dtype=np.float64)
    return quantile_points(d.column_values(j), grid_size, meta.name)


def _mean_prediction_per_point(
    p: Predictor, base: np.ndarray, pos: int, points: np.ndarray
) -> np.ndarray:
    n = base.shape[0]
    per_batch = max(1, _BATCH_ROWS // n)
    means = np.empty(points.size, dtype=np.float64)
    for start in range(0, points.size, per_batch):
        pts = points[start : start + per_batch]
        block = np.tile(base, (pts.size, 1))
        block[:, pos] = np.repeat(pts, n)
        means[start : start + pts.size] = p.predict_batch(block).reshape(pts.size, n).mean(axis=1)
    return means


def pd_curve(
    p: Predictor,
    d: Dataset,
    feature: int | str,
    grid_size: int = DEFAULT_GRID_SIZE,
    sample_cap: int = DEFAULT_SAMPLE_CAP,
    seed: int = 0,
) -> PDGrid:
    """One-dimensional partial dependence of ``feature`` under predictor ``p``."""
    pos = _feature_position(d, feature)
    meta = d.columns[d.feature_indices[pos]]
    points = _grid_for(d, pos, grid_size)
    rows = evaluation_rows(d, sample_cap, seed)
    base = d.feature_matrix()[rows]
    values = _mean_prediction_per_point(p, base, pos, points)
    center = float(_interp1(points, values, meta.kind, base[:, pos]).mean())
    return PDGrid(
        feature=meta.name,
        kind=meta.kind,
        points=points,
        values=values,
        centered_values=values - center,
        center=center,
        n_eval_rows=rows.size,
    )


def pd_surface(
    p: Predictor,
    d: Dataset,
    feature_a: int | str,
    feature_b: int | str,
    grid_size: int = DEFAULT_GRID_SIZE,
    sample_cap: int = DEFAULT_SAMPLE_CAP,
    seed: int = 0,
) -> PDGrid2:
    """Two-way partial dependence over the cross product of two grids."""
    pos_a = _feature_position(d, feature_a)
    pos_b = _feature_position(d, feature_b)
    if pos_a == pos_b:
        raise DataError("two-way PD needs two distinct features")
    meta_a = d.columns[d.feature_indices[pos_a]]
    meta_b = d.columns[d.feature_indices[pos_b]]
    points_a = _grid_for(d, pos_a, grid_size)
    points_b = _grid_for(d, pos_b, grid_size)
    rows = evaluation_rows(d, sample_cap, seed)
    base = d.feature_matrix()[rows]
    n = base.shape[0]
    values = np.empty((points_a.size, points_b.size), dtype=np.float64)
    for ga, va in enumerate(points_a):
        block = np.tile(base, (points_b.size, 1))
        block[:, pos_a] = va
        block[:, pos_b] = np.repeat(points_b, n)
        values[ga] = p.predict_batch(block).reshape(points_b.size, n).mean(axis=1)
    kinds = (meta_a.kind, meta_b.kind)
    center = float(
        _interp2(points_a, points_b, values, kinds, base[:, pos_a], base[:, pos_b]).mean()
    )
    return PDGrid2(
        features=(meta_a.name, meta_b.name),
        kinds=kinds,
        points_a=points_a,
        points_b=points_b,
        values=values,
        centered_values=values - center,
        center=center,
        n_eval_rows=n,
    )


# ---------------------------------------------------------------------------
# Exact (grid-free) block PD used by the H-statistic and chunk contributions
# ---------------------------------------------------------------------------


def pairwise_block_pd(p: Predictor, base: np.ndarray, positions: list[int]) -> np.ndarray:
    """P[i, l] = prediction of row l with the block columns replaced by row
    i's block values, over all row pairs of ``base``.

    Row means give the block's PD at each row's own block values; column
    means give the complement's PD at each row's complement values; both
    share the grand mean, which is the centering constant.
    """
    n = base.shape[0]
    pairs = np.empty((n, n), dtype=np.float64)
    per_batch = max(1, _BATCH_ROWS // n)
    for start in range(0, n, per_batch):
        donors = base[start : start + per_batch]
        block = np.tile(base, (donors.shape[0], 1))
        for pos in positions:
            block[:, pos] = np.repeat(donors[:, pos], n)
        pairs[start : start + donors.shape[0]] = p.predict_batch(block).reshape(
            donors.shape[0], n
        )
    return pairs


def block_pd_at(
    p: Predictor, base: np.ndarray, positions: list[int], block_values: np.ndarray
) -> float:
    """Exact block PD at one jointly observed value combination."""
    block = base.copy()
    for pos in positions:
        block[:, pos] = block_values[pos]
    return float(p.predict_batch(block).mean())
