"""Cognitive chunks: declarations, counts, constructed features, breakdowns.

Input chunks group dataset columns; output chunks name the pieces shown in an
explanation. A constructed feature aggregates a group of related columns into
one value per row: the sum of member value times the member's correlation
with the target, with correlations frozen at construction time.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .errors import DataError, UndefinedCorrelationError
from .partial_dependence import (
    DEFAULT_GRID_SIZE,
    DEFAULT_SAMPLE_CAP,
    block_pd_at,
    evaluation_rows,
    pairwise_block_pd,
    pd_curve,
)
from .predictor import Predictor
from .tabular import CATEGORICAL, NUMERIC, ColumnMeta, Dataset, from_columns

PROVENANCES = ("original", "domain_grouped", "constructed")


@dataclass(frozen=True)
class Chunk:
    name: str
    columns: tuple[str, ...]


@dataclass(frozen=True)
class ChunkSpec:
    """Input chunks, output chunks, and optional constructed chunks.

    Output chunk names must reference either an input chunk or a constructed
    chunk: an explanation cannot cite a chunk its representation does not
    contain.
    """

    input_chunks: tuple[Chunk, ...]
    output_chunks: tuple[str, ...]
    provenance: str
    constructed_chunks: tuple[Chunk, ...] = ()

    def chunk_columns(self, name: str) -> tuple[str, ...]:
        for chunk in self.input_chunks + self.constructed_chunks:
            if chunk.name == name:
                return chunk.columns
        raise DataError(f"unknown chunk {name!r}")


def count_chunks(spec: ChunkSpec) -> tuple[int, int]:
    """(number of input chunks, number of output chunks)."""
    return len(spec.input_chunks), len(spec.output_chunks)


def validate_chunk_spec(spec: ChunkSpec, d: Dataset, where: str = "chunk spec") -> ChunkSpec:
    if spec.provenance not in PROVENANCES:
        raise DataError(f"{where}: provenance must be one of {PROVENANCES}, got {spec.provenance!r}")
    if not spec.input_chunks:
        raise DataError(f"{where}: input_chunks must not be empty")
    if not spec.output_chunks:
        raise DataError(f"{where}: output_chunks must not be empty")

    target_name = None if d.target is None else d.columns[d.target].name
    known = {c.name for c in d.columns}
    seen_cols: set[str] = set()
    names: set[str] = set()
    for kind, chunks in (("input_chunks", spec.input_chunks),
                         ("constructed_chunks", spec.constructed_chunks)):
        for chunk in chunks:
            path = f"{where}: {kind}.{chunk.name}"
            if chunk.name in names:
                raise DataError(f"{path}: duplicate chunk name")
            names.add(chunk.name)
            if not chunk.columns:
                raise DataError(f"{path}: empty column list")
            for i, col in enumerate(chunk.columns):
                if col not in known:
                    raise DataError(f"{path}[{i}]: unknown column {col!r}")
                if col == target_name:
                    raise DataError(f"{path}[{i}]: target column {col!r} cannot be a member")
                if kind == "input_chunks":
                    if col in seen_cols:
                        raise DataError(f"{path}[{i}]: column {col!r} appears in two input chunks")
                    seen_cols.add(col)

    for i, name in enumerate(spec.output_chunks):
        if name not in names:
            raise DataError(
                f"{where}: output_chunks[{i}]: {name!r} is not a declared chunk"
            )
    if len(set(spec.output_chunks)) != len(spec.output_chunks):
        raise DataError(f"{where}: output_chunks contains duplicates")
    return spec


def load_chunk_spec(source, d: Dataset) -> ChunkSpec:
    """Parse and validate a declarative chunk-spec JSON file or dict."""
    if isinstance(source, dict):
        raw, where = source, "chunk spec"
    else:
        where = f"chunk spec {source}"
        try:
            with open(source, encoding="utf-8") as fh:
                raw = json.load(fh)
        except OSError as exc:
            raise DataError(f"{where}: cannot read: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise DataError(f"{where}: invalid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise DataError(f"{where}: top level must be an object")
    unknown_keys = set(raw) - {"input_chunks", "output_chunks", "provenance", "constructed_chunks"}
    if unknown_keys:
        raise DataError(f"{where}: unknown keys {sorted(unknown_keys)}")

    def _chunks(key: str, required: bool) -> tuple[Chunk, ...]:
        block = raw.get(key, {} if not required else None)
        if block is None:
            raise DataError(f"{where}: missing required key {key!r}")
        if not isinstance(block, dict):
            raise DataError(f"{where}: {key} must map chunk names to column lists")
        chunks = []
        for name, cols in block.items():
            if not isinstance(cols, list) or not all(isinstance(c, str) for c in cols):
                raise DataError(f"{where}: {key}.{name}: must be a list of column names")
            chunks.append(Chunk(str(name), tuple(cols)))
        return tuple(chunks)

    inputs = _chunks("input_chunks", required=True)
    constructed = _chunks("constructed_chunks", required=False)
    outputs = raw.get("output_chunks")
    if not isinstance(outputs, list) or not all(isinstance(o, str) for o in outputs):
        raise DataError(f"{where}: output_chunks must be a list of chunk names")
    provenance = raw.get("provenance")
    if not isinstance(provenance, str):
        raise DataError(f"{where}: provenance must be a string")
    spec = ChunkSpec(inputs, tuple(outputs), provenance, constructed)
    return validate_chunk_spec(spec, d, where)


def singleton_spec(d: Dataset, provenance: str = "original") -> ChunkSpec:
    """One chunk per feature column, all of them in the representation."""
    chunks = tuple(Chunk(name, (name,)) for name in d.feature_names)
    return ChunkSpec(chunks, tuple(d.feature_names), provenance)


# ---------------------------------------------------------------------------
# Constructed features
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ConstructedFeature:
    """One aggregate feature: sum of member value times frozen member-target
    correlation."""

    name: str
    member_columns: tuple[str, ...]
    member_correlations: tuple[float, ...]
    values: np.ndarray


def _pearson_arrays(x: np.ndarray, y: np.ndarray, x_name: str, y_name: str) -> float:
    xc = x - x.mean()
    yc = y - y.mean()
    ssx, ssy = float(xc @ xc), float(yc @ yc)
    if ssx == 0.0:
        raise UndefinedCorrelationError(f"column {x_name!r} is constant; correlation undefined")
    if ssy == 0.0:
        raise UndefinedCorrelationError(f"column {y_name!r} is constant; correlation undefined")
    r = float(xc @ yc) / math.sqrt(ssx * ssy)
    return float(min(1.0, max(-1.0, r)))


def _target_for_correlation(d: Dataset, target: int | str) -> tuple[np.ndarray, str]:
    j = d._resolve(target)
    meta = d.columns[j]
    if meta.kind == NUMERIC:
        return d.data[:, j], meta.name
    if len(meta.levels) == 2:
        # Point-biserial: Pearson over the 0/1 level codes.
        return d.data[:, j], meta.name
    raise DataError(
        f"target {meta.name!r} must be numeric or binary categorical for feature construction"
    )


def construct_features(
    d: Dataset,
    target: int | str,
    groups,
) -> tuple[Dataset, list[ConstructedFeature]]:
    """Aggregate each named column group into one constructed feature.

    Correlations of members with the target are computed once on ``d`` and
    frozen in the returned records; the output dataset has one numeric column
    per group, rows aligned with the input.
    """
    chunks = _as_chunks(groups)
    if not chunks:
        raise DataError("at least one group required")
    seen: set[str] = set()
    for chunk in chunks:
        if not chunk.columns:
            raise DataError(f"group {chunk.name!r} is empty")
        overlap = seen.intersection(chunk.columns)
        if overlap:
            raise DataError(f"group {chunk.name!r}: columns {sorted(overlap)} already grouped")
        seen.update(chunk.columns)
    y, y_name = _target_for_correlation(d, target)

    features: list[ConstructedFeature] = []
    cols: list[tuple[ColumnMeta, np.ndarray]] = []
    for chunk in chunks:
        correlations = []
        values = np.zeros(d.n_rows, dtype=np.float64)
        for col in chunk.columns:
            j = d._resolve(col)
            if d.columns[j].kind != NUMERIC:
                raise DataError(f"group {chunk.name!r}: member {col!r} is not numeric")
            if j == d._resolve(target):
                raise DataError(f"group {chunk.name!r}: target cannot be a member")
            r = _pearson_arrays(d.data[:, j], y, col, y_name)
            correlations.append(r)
            values = values + d.data[:, j] * r
        feature = ConstructedFeature(
            chunk.name, chunk.columns, tuple(correlations), values
        )
        features.append(feature)
        cols.append((ColumnMeta(chunk.name, NUMERIC), values))
    return from_columns(f"{d.name}:constructed", cols), features


def apply_construction(d: Dataset, features: list[ConstructedFeature]) -> Dataset:
    """Rebuild constructed columns on ``d`` using frozen correlations."""
    cols: list[tuple[ColumnMeta, np.ndarray]] = []
    for feat in features:
        values = np.zeros(d.n_rows, dtype=np.float64)
        for col, r in zip(feat.member_columns, feat.member_correlations):
            values = values + d.column_values(col) * r
        cols.append((ColumnMeta(feat.name, NUMERIC), values))
    return from_columns(f"{d.name}:constructed", cols)


def _as_chunks(groups) -> tuple[Chunk, ...]:
    if isinstance(groups, dict):
        return tuple(Chunk(str(name), tuple(cols)) for name, cols in groups.items())
    return tuple(
        g if isinstance(g, Chunk) else Chunk(str(g[0]), tuple(g[1])) for g in groups
    )


# ---------------------------------------------------------------------------
# Per-chunk contribution breakdown
# ---------------------------------------------------------------------------


def contribution_breakdown(
    p: Predictor,
    d: Dataset,
    spec: ChunkSpec,
    instance,
    grid_size: int = DEFAULT_GRID_SIZE,
    sample_cap: int = DEFAULT_SAMPLE_CAP,
    seed: int = 0,
) -> list[tuple[str, float]]:
    """Signed contribution of every output chunk at one instance.

    The contribution of a chunk is its centered PD at the instance's value:
    single-column chunks use the quantile-grid curve with the fixed
    interpolation rule; multi-column chunks replace all member columns
    jointly with the instance's observed combination (exact evaluation, no
    grid). Sorted by |contribution| descending, ties broken by chunk name.
    """
    row = _instance_row(d, instance)
    contributions: list[tuple[str, float]] = []
    for name in spec.output_chunks:
        columns = spec.chunk_columns(name)
        positions = [d.feature_indices.index(d._resolve(c)) for c in columns]
        if len(positions) == 1:
            grid = pd_curve(p, d, columns[0], grid_size, sample_cap, seed)
            value = float(grid.evaluate_centered(row[positions[0]]))
        else:
            rows = evaluation_rows(d, sample_cap, seed)
            base = d.feature_matrix()[rows]
            pairs = pairwise_block_pd(p, base, positions)
            center = float(pairs.mean())
            value = block_pd_at(p, base, positions, row) - center
        contributions.append((name, value))
    contributions.sort(key=lambda item: (-abs(item[1]), item[0]))
    return contributions


def _instance_row(d: Dataset, instance) -> np.ndarray:
    if isinstance(instance, (int, np.integer)):
        if not 0 <= int(instance) < d.n_rows:
            raise DataError(f"instance index {instance} out of range for {d.n_rows} rows")
        return d.feature_matrix()[int(instance)]
    row = np.asarray(instance, dtype=np.float64).ravel()
    if row.size != len(d.feature_indices):
        raise DataError(
            f"instance row has {row.size} features, dataset has {len(d.feature_indices)}"
        )
    for pos, j in enumerate(d.feature_indices):
        meta = d.columns[j]
        if meta.kind == CATEGORICAL:
            code = row[pos]
            if code != round(code) or not 0 <= code < len(meta.levels):
                raise DataError(f"instance column {meta.name!r}: invalid level code {code!r}")
    return row
