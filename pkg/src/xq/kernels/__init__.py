"""k-NN prediction kernel with a compiled fast path.

The Cython extension ``_fastknn`` is built when the package is installed with
Cython available; otherwise the NumPy reference implementation serves every
call. Both compute squared Euclidean distances accumulating in feature order
and break distance ties toward the lower training-row index, so they agree to
floating-point rounding. ``benchmarks/bench_knn.py`` compares the two.
"""

from . import _refknn

reference_knn_predict = _refknn.knn_predict

try:
    from . import _fastknn

    native_knn_predict = _fastknn.knn_predict
    BACKEND = "cython"
    knn_predict = native_knn_predict
except ImportError:
    native_knn_predict = None
    BACKEND = "numpy"
    knn_predict = reference_knn_predict

__all__ = ["knn_predict", "reference_knn_predict", "native_knn_predict", "BACKEND"]
