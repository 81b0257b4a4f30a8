"""Per-feature interaction strength via a one-vs-rest H-statistic.

For feature (or chunk) j, with predictions, one-dimensional PD of j, and PD
of the complement all mean-centered over the same evaluation rows:

    H_j^2 = sum_i [ f_c(x_i) - PD_j_c(x_ij) - PD_rest_c(x_i,rest) ]^2
            / sum_i f_c(x_i)^2

All PD terms are evaluated exactly at the rows' own values (no grid
approximation), so additive predictors yield H_j = 0 up to rounding. The
ratio is clipped into [0, 1]; a near-zero denominator (constant predictor)
defines H_j = 0 with a flag. The scalar interaction strength I is the
arithmetic mean of the per-feature values.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DataError
from .partial_dependence import DEFAULT_GRID_SIZE, DEFAULT_SAMPLE_CAP, evaluation_rows, pairwise_block_pd
from .predictor import Predictor
from .tabular import Dataset

# Denominators below this are treated as a constant predictor.
_CONSTANT_DENOM = 1e-12

FeatureBlock = tuple[str, tuple[int, ...]]


@dataclass(frozen=True)
class InteractionReport:
    """Per-feature H values plus their aggregate I in [0, 1]."""

    per_feature_h: dict[str, float]
    aggregate_i: float
    method: str
    n_eval_rows: int
    grid_size: int
    seed: int
    pre_clip: dict[str, float]
    flags: tuple[str, ...]

    def to_dict(self) -> dict:
        return {
            "method": self.method,
            "per_chunk_h": {k: float(v) for k, v in self.per_feature_h.items()},
            "aggregate_i": float(self.aggregate_i),
            "pre_clip_h_squared": {k: float(v) for k, v in self.pre_clip.items()},
            "flags": list(self.flags),
            "evaluation": {
                "n_rows": int(self.n_eval_rows),
                "grid_size": int(self.grid_size),
                "seed": int(self.seed),
            },
        }


def _normalize_blocks(d: Dataset, features) -> list[FeatureBlock]:
    """Feature selectors -> named blocks of feature-matrix positions."""
    if features is None:
        features = list(d.feature_names)
    blocks: list[FeatureBlock] = []
    for entry in features:
        if isinstance(entry, (int, str)):
            j = d._resolve(entry)
            if j == d.target:
                raise DataError("target column cannot appear in an interaction block")
            blocks.append((d.columns[j].name, (d.feature_indices.index(j),)))
            continue
        name, cols = entry
        positions = []
        for col in cols:
            j = d._resolve(col)
            if j == d.target:
                raise DataError(f"block {name!r}: target column cannot be a member")
            positions.append(d.feature_indices.index(j))
        if not positions:
            raise DataError(f"block {name!r} is empty")
        blocks.append((str(name), tuple(positions)))
    if not blocks:
        raise DataError("at least one feature block required")
    seen: set[int] = set()
    for name, positions in blocks:
        if seen.intersection(positions):
            raise DataError(f"block {name!r} overlaps another block")
        seen.update(positions)
    return blocks


def _h_from_pairs(f: np.ndarray, pairs: np.ndarray) -> tuple[float, float, bool]:
    """(H, pre-clip H^2, constant flag) from predictions and the pair matrix."""
    f_c = f - f.mean()
    denom = float(f_c @ f_c)
    if denom < _CONSTANT_DENOM:
        return 0.0, 0.0, True
    grand = pairs.mean()
    pd_own = pairs.mean(axis=1) - grand
    pd_rest = pairs.mean(axis=0) - grand
    residual = f_c - pd_own - pd_rest
    h_squared = float(residual @ residual) / denom
    return float(np.sqrt(min(1.0, max(0.0, h_squared)))), h_squared, False


def h_one_vs_rest(
    p: Predictor,
    d: Dataset,
    feature,
    grid_size: int = DEFAULT_GRID_SIZE,
    seed: int = 0,
    sample_cap: int = DEFAULT_SAMPLE_CAP,
) -> float:
    """H statistic of one feature (or named block) against all others."""
    if len(d.feature_indices) < 2:
        raise DataError("one-vs-rest interaction needs at least 2 features")
    blocks = _normalize_blocks(d, [feature])
    rows = evaluation_rows(d, sample_cap, seed)
    base = d.feature_matrix()[rows]
    f = p.predict_batch(base)
    pairs = pairwise_block_pd(p, base, list(blocks[0][1]))
    h, _, _ = _h_from_pairs(f, pairs)
    return h


def interaction_strength(
    p: Predictor,
    d: Dataset,
    features=None,
    grid_size: int = DEFAULT_GRID_SIZE,
    sample_cap: int = DEFAULT_SAMPLE_CAP,
    seed: int = 0,
) -> InteractionReport:
    """H per feature block and their mean I.

    ``features`` may name single columns or (name, [columns]) chunk blocks;
    omitted, every feature column is its own block. A single block has no
    interaction partner, so I = 0 by convention.
    """
    blocks = _normalize_blocks(d, features)
    rows = evaluation_rows(d, sample_cap, seed)
    flags: list[str] = []
    if len(blocks) == 1:
        name = blocks[0][0]
        return InteractionReport(
            per_feature_h={name: 0.0},
            aggregate_i=0.0,
            method="one_vs_rest",
            n_eval_rows=int(rows.size),
            grid_size=grid_size,
            seed=seed,
            pre_clip={name: 0.0},
            flags=("single_feature",),
        )
    base = d.feature_matrix()[rows]
    f = p.predict_batch(base)
    per_h: dict[str, float] = {}
    pre_clip: dict[str, float] = {}
    for name, positions in blocks:
        h, h_squared, constant = _h_from_pairs(f, pairwise_block_pd(p, base, list(positions)))
        per_h[name] = h
        pre_clip[name] = h_squared
        if constant and "constant_predictor" not in flags:
            flags.append("constant_predictor")
        if h_squared > 1.0 and "clipped_h" not in flags:
            flags.append("clipped_h")
    return InteractionReport(
        per_feature_h=per_h,
        aggregate_i=float(np.mean(list(per_h.values()))),
        method="one_vs_rest",
        n_eval_rows=int(rows.size),
        grid_size=grid_size,
        seed=seed,
        pre_clip=pre_clip,
        flags=tuple(flags),
    )
