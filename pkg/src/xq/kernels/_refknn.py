"""NumPy reference implementation of the k-NN prediction kernel."""

from __future__ import annotations

import numpy as np

# Queries are processed in chunks so the (chunk, n_train) distance matrix
# stays small regardless of batch size.
_QUERY_CHUNK = 512


def knn_predict(
    train: np.ndarray,
    targets: np.ndarray,
    query: np.ndarray,
    k: int,
) -> np.ndarray:
    """Mean target of the k nearest training rows for each query row.

    Distances are squared Euclidean accumulated feature by feature; ties are
    broken toward the lower training-row index (stable argsort).
    """
    train = np.ascontiguousarray(train, dtype=np.float64)
    targets = np.ascontiguousarray(targets, dtype=np.float64)
    query = np.ascontiguousarray(query, dtype=np.float64)
    n_train, m = train.shape
    if not 1 <= k <= n_train:
        raise ValueError(f"k must be in [1, {n_train}], got {k}")
    if query.shape[1] != m:
        raise ValueError(f"query has {query.shape[1]} features, train has {m}")

    out = np.empty(query.shape[0], dtype=np.float64)
    for start in range(0, query.shape[0], _QUERY_CHUNK):
        q = query[start : start + _QUERY_CHUNK]
        dist = np.zeros((q.shape[0], n_train), dtype=np.float64)
        for f in range(m):
            diff = q[:, f, None] - train[None, :, f]
            dist += diff * diff
        nearest = np.argsort(dist, axis=1, kind="stable")[:, :k]
        out[start : start + q.shape[0]] = targets[np.sort(nearest, axis=1)].mean(axis=1)
    return out
