# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled k-NN prediction kernel.

Same contract as ``_refknn.knn_predict``: squared Euclidean distances
accumulated in feature order, ties broken toward the lower training-row
index, mean target over the selected neighbours.
"""

import numpy as np


def knn_predict(const double[:, ::1] train, const double[::1] targets,
                const double[:, ::1] query, Py_ssize_t k):
    cdef Py_ssize_t n_train = train.shape[0]
    cdef Py_ssize_t m = train.shape[1]
    cdef Py_ssize_t n_query = query.shape[0]
    if k < 1 or k > n_train:
        raise ValueError(f"k must be in [1, {n_train}], got {k}")
    if query.shape[1] != m:
        raise ValueError(f"query has {query.shape[1]} features, train has {m}")

    out_arr = np.empty(n_query, dtype=np.float64)
    best_d_arr = np.empty(k, dtype=np.float64)
    best_i_arr = np.empty(k, dtype=np.intp)
    cdef double[::1] out = out_arr
    cdef double[::1] best_d = best_d_arr
    cdef Py_ssize_t[::1] best_i = best_i_arr

    cdef Py_ssize_t i, t, f, pos, size, worst, tmp_i
    cdef double s, diff, acc, tmp_d

    for i in range(n_query):
        size = 0
        worst = 0
        for t in range(n_train):
            s = 0.0
            for f in range(m):
                diff = query[i, f] - train[t, f]
                s += diff * diff
            if size < k:
                best_d[size] = s
                best_i[size] = t
                size += 1
                if size == k:
                    worst = _worst_slot(best_d, best_i, k)
            elif s < best_d[worst]:
                best_d[worst] = s
                best_i[worst] = t
                worst = _worst_slot(best_d, best_i, k)
        # Sum targets in ascending neighbour-index order (matches reference).
        for pos in range(1, size):
            tmp_i = best_i[pos]
            tmp_d = best_d[pos]
            t = pos - 1
            while t >= 0 and best_i[t] > tmp_i:
                best_i[t + 1] = best_i[t]
                best_d[t + 1] = best_d[t]
                t -= 1
            best_i[t + 1] = tmp_i
            best_d[t + 1] = tmp_d
        acc = 0.0
        for pos in range(size):
            acc += targets[best_i[pos]]
        out[i] = acc / size
    return out_arr


cdef inline Py_ssize_t _worst_slot(double[::1] best_d, Py_ssize_t[::1] best_i,
                                   Py_ssize_t k):
    # Slot holding the lexicographically largest (distance, train index):
    # evicting it preserves the lowest-index tie-break.
    cdef Py_ssize_t pos, worst = 0
    for pos in range(1, k):
        if best_d[pos] > best_d[worst] or (
            best_d[pos] == best_d[worst] and best_i[pos] > best_i[worst]
        ):
            worst = pos
    return worst
