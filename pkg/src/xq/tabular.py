"""Column-typed tabular datasets: CSV ingestion, sampling, correlation.

A :class:`Dataset` is immutable after construction. Cell storage is a single
float64 matrix; categorical cells hold integer level codes and the original
level strings live in :class:`ColumnMeta`. Chunk counting and reports always
refer to original columns, never to any encoding a predictor may apply.
"""

from __future__ import annotations

import csv
import hashlib
import io
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DataError, UndefinedCorrelationError

NUMERIC = "numeric"
CATEGORICAL = "categorical"

# Empty cells are missing; tokens that parse to non-finite floats (nan/inf)
# are treated the same way because no downstream math accepts them.
_MISSING = ""


@dataclass(frozen=True)
class ColumnMeta:
    """Name, kind and (for categoricals) the ordered distinct levels."""

    name: str
    kind: str
    levels: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if self.kind not in (NUMERIC, CATEGORICAL):
            raise DataError(f"column {self.name!r}: unknown kind {self.kind!r}")
        if self.kind == CATEGORICAL:
            if len(set(self.levels)) != len(self.levels):
                raise DataError(f"column {self.name!r}: duplicate categorical levels")
            if any(lvl == "" for lvl in self.levels):
                raise DataError(f"column {self.name!r}: empty categorical level")


@dataclass(frozen=True, eq=False)
class Dataset:
    """Immutable table of n rows by m typed columns.

    ``data[i, j]`` is the float value of a numeric column or the level code of
    a categorical one. ``target`` is a column index excluded from all feature
    operations.
    """

    name: str
    columns: tuple[ColumnMeta, ...]
    data: np.ndarray
    target: int | None = None
    dropped_rows: int = 0
    _colindex: dict[str, int] = field(init=False, repr=False)

    def __post_init__(self) -> None:
        data = np.asarray(self.data, dtype=np.float64)
        object.__setattr__(self, "data", data)
        if data.ndim != 2:
            raise DataError("dataset matrix must be 2-dimensional")
        n, m = data.shape
        if n < 1 or m < 1:
            raise DataError(f"dataset needs at least one row and one column, got {n}x{m}")
        if m != len(self.columns):
            raise DataError(f"{len(self.columns)} column metas for {m} data columns")
        names = [c.name for c in self.columns]
        if len(set(names)) != len(names):
            raise DataError("column names must be unique")
        if not np.all(np.isfinite(data)):
            raise DataError("dataset contains non-finite values after ingestion")
        if self.target is not None and not 0 <= self.target < m:
            raise DataError(f"target index {self.target} out of range for {m} columns")
        for j, col in enumerate(self.columns):
            if col.kind == CATEGORICAL:
                codes = data[:, j]
                if np.any(codes != np.round(codes)) or codes.min() < 0 or (
                    col.levels and codes.max() >= len(col.levels)
                ):
                    raise DataError(f"column {col.name!r}: invalid categorical codes")
        data.setflags(write=False)
        object.__setattr__(self, "_colindex", {c.name: j for j, c in enumerate(self.columns)})

    # -- basic shape -------------------------------------------------------

    @property
    def n_rows(self) -> int:
        return self.data.shape[0]

    @property
    def n_columns(self) -> int:
        return self.data.shape[1]

    def column_index(self, name: str) -> int:
        try:
            return self._colindex[name]
        except KeyError:
            raise DataError(f"unknown column {name!r}") from None

    def column_values(self, col: int | str) -> np.ndarray:
        return self.data[:, self._resolve(col)]

    def _resolve(self, col: int | str) -> int:
        if isinstance(col, str):
            return self.column_index(col)
        if not 0 <= col < self.n_columns:
            raise DataError(f"column index {col} out of range")
        return col

    # -- feature view (target excluded) ------------------------------------

    @property
    def feature_indices(self) -> tuple[int, ...]:
        return tuple(j for j in range(self.n_columns) if j != self.target)

    @property
    def feature_names(self) -> tuple[str, ...]:
        return tuple(self.columns[j].name for j in self.feature_indices)

    def feature_signature(self) -> tuple[ColumnMeta, ...]:
        return tuple(self.columns[j] for j in self.feature_indices)

    def feature_matrix(self) -> np.ndarray:
        """Feature cells (target column dropped), categoricals as codes."""
        return self.data[:, list(self.feature_indices)]

    def target_values(self) -> np.ndarray:
        if self.target is None:
            raise DataError(f"dataset {self.name!r} has no target column")
        return self.data[:, self.target]

    # -- derived datasets ---------------------------------------------------

    def with_target(self, col: int | str) -> "Dataset":
        return Dataset(self.name, self.columns, self.data, self._resolve(col), self.dropped_rows)

    def take(self, rows: np.ndarray | list[int]) -> "Dataset":
        idx = np.asarray(rows, dtype=np.intp)
        return Dataset(self.name, self.columns, self.data[idx], self.target, self.dropped_rows)

    def select_columns(self, cols: list[str], keep_target: bool = True) -> "Dataset":
        """Dataset restricted to ``cols`` (plus the target when present)."""
        idx = [self._resolve(c) for c in cols]
        target = None
        if keep_target and self.target is not None and self.target not in idx:
            idx.append(self.target)
            target = len(idx) - 1
        elif self.target in idx:
            target = idx.index(self.target)
        metas = tuple(self.columns[j] for j in idx)
        return Dataset(self.name, metas, self.data[:, idx], target, self.dropped_rows)

    def level_of(self, col: int | str, code: float) -> str:
        meta = self.columns[self._resolve(col)]
        return meta.levels[int(code)]

    # -- fingerprinting ------------------------------------------------------

    def content_hash(self) -> str:
        """SHA-256 over the canonical CSV serialization."""
        buf = io.StringIO()
        _write_csv_stream(self, buf)
        return "sha256:" + hashlib.sha256(buf.getvalue().encode("utf-8")).hexdigest()

    def fingerprint(self) -> dict:
        return {
            "name": self.name,
            "n_rows": int(self.n_rows),
            "n_columns": int(self.n_columns),
            "target": None if self.target is None else self.columns[self.target].name,
            "dropped_rows": int(self.dropped_rows),
            "content_hash": self.content_hash(),
        }


def from_columns(
    name: str,
    columns: list[tuple[ColumnMeta, np.ndarray]],
    target: str | None = None,
) -> Dataset:
    """Assemble a Dataset from per-column arrays (synthetic data, tests)."""
    metas = tuple(meta for meta, _ in columns)
    data = np.column_stack([np.asarray(vals, dtype=np.float64) for _, vals in columns])
    ds = Dataset(name, metas, data)
    return ds.with_target(target) if target is not None else ds


# ---------------------------------------------------------------------------
# CSV ingestion
# ---------------------------------------------------------------------------


def _parse_number(token: str) -> float | None:
    """Finite float for a numeric token, else None. Locale-independent."""
    try:
        value = float(token)
    except ValueError:
        return None
    return value if math.isfinite(value) else None


def _is_missing(token: str) -> bool:
    if token == _MISSING:
        return True
    try:
        return not math.isfinite(float(token))
    except ValueError:
        return False


def load_csv(
    path,
    schema: dict[str, str] | None = None,
    drop_missing: bool = False,
    name: str | None = None,
) -> Dataset:
    """Load an RFC-4180-style CSV with a header row into a Dataset.

    Column kinds come from ``schema`` overrides when given, otherwise a column
    is numeric iff every non-missing cell parses as a finite number. Rows with
    missing cells are dropped when ``drop_missing`` is set (count recorded on
    the Dataset), otherwise they raise :class:`DataError`.
    """
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            reader = csv.reader(fh)
            table = list(reader)
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc
    if not table:
        raise DataError(f"{path}: empty file, header row required")
    header, rows = table[0], table[1:]
    if len(set(header)) != len(header):
        raise DataError(f"{path}: duplicate column names in header")
    if not rows:
        raise DataError(f"{path}: no data rows")
    m = len(header)
    for i, row in enumerate(rows):
        if len(row) != m:
            raise DataError(f"{path}: row {i + 2} has {len(row)} cells, expected {m}")

    schema = dict(schema or {})
    for col in schema:
        if col not in header:
            raise DataError(f"schema override for unknown column {col!r}")

    missing_mask = np.zeros(len(rows), dtype=bool)
    for i, row in enumerate(rows):
        if any(_is_missing(tok) for tok in row):
            missing_mask[i] = True
    n_missing = int(missing_mask.sum())
    if n_missing and not drop_missing:
        first = int(np.argmax(missing_mask))
        raise DataError(
            f"{path}: row {first + 2} has a missing or non-finite value "
            "(pass drop_missing to drop such rows)"
        )
    kept = [row for row, bad in zip(rows, missing_mask) if not bad]
    if not kept:
        raise DataError(f"{path}: all {len(rows)} data rows dropped as missing")

    kinds: list[str] = []
    for j, col in enumerate(header):
        if col in schema:
            kind = schema[col]
            if kind not in (NUMERIC, CATEGORICAL):
                raise DataError(f"schema override for {col!r}: unknown kind {kind!r}")
        else:
            kind = NUMERIC if all(_parse_number(row[j]) is not None for row in kept) else CATEGORICAL
        kinds.append(kind)

    data = np.empty((len(kept), m), dtype=np.float64)
    metas: list[ColumnMeta] = []
    for j, col in enumerate(header):
        if kinds[j] == NUMERIC:
            for i, row in enumerate(kept):
                value = _parse_number(row[j])
                if value is None:
                    raise DataError(f"{path}: column {col!r} row {i + 2}: {row[j]!r} is not numeric")
                data[i, j] = value
            metas.append(ColumnMeta(col, NUMERIC))
        else:
            levels: dict[str, int] = {}
            for i, row in enumerate(kept):
                code = levels.setdefault(row[j], len(levels))
                data[i, j] = code
            metas.append(ColumnMeta(col, CATEGORICAL, tuple(levels)))

    dataset_name = name if name is not None else str(path)
    return Dataset(dataset_name, tuple(metas), data, dropped_rows=n_missing)


def _format_cell(meta: ColumnMeta, value: float) -> str:
    if meta.kind == CATEGORICAL:
        return meta.levels[int(value)]
    if value == int(value) and abs(value) < 1e16:
        return str(int(value))
    return repr(float(value))


def _write_csv_stream(d: Dataset, fh) -> None:
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow([c.name for c in d.columns])
    for i in range(d.n_rows):
        writer.writerow([_format_cell(c, d.data[i, j]) for j, c in enumerate(d.columns)])


def write_csv(d: Dataset, path) -> None:
    """Canonical CSV serialization; round-trips through :func:`load_csv`."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        _write_csv_stream(d, fh)


# ---------------------------------------------------------------------------
# Statistics over columns
# ---------------------------------------------------------------------------


def pearson_correlation(d: Dataset, col_a: int | str, col_b: int | str) -> float:
    """Standard Pearson r between two numeric columns.

    Raises :class:`UndefinedCorrelationError` for a zero-variance column
    instead of returning a silent 0.
    """
    ja, jb = d._resolve(col_a), d._resolve(col_b)
    for j in (ja, jb):
        if d.columns[j].kind != NUMERIC:
            raise DataError(f"column {d.columns[j].name!r} is not numeric")
    if d.n_rows < 2:
        raise DataError("correlation needs at least 2 rows")
    xa = d.data[:, ja] - d.data[:, ja].mean()
    xb = d.data[:, jb] - d.data[:, jb].mean()
    ssa, ssb = float(xa @ xa), float(xb @ xb)
    for j, ss in ((ja, ssa), (jb, ssb)):
        if ss == 0.0:
            raise UndefinedCorrelationError(
                f"column {d.columns[j].name!r} is constant; correlation undefined"
            )
    r = float(xa @ xb) / math.sqrt(ssa * ssb)
    return float(min(1.0, max(-1.0, r)))


def sample_rows(d: Dataset, k: int, seed: int) -> Dataset:
    """k rows sampled without replacement, deterministic per seed.

    Returns all rows in original order when k >= n. Sampled rows keep their
    original relative order so downstream reductions are reproducible.
    """
    if k < 1:
        raise DataError(f"sample size must be >= 1, got {k}")
    if k >= d.n_rows:
        return d
    rng = np.random.default_rng(seed)
    idx = np.sort(rng.choice(d.n_rows, size=k, replace=False))
    out = d.take(idx)
    return out
