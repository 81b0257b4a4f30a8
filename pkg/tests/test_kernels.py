import numpy as np
import pytest

from xq import kernels


def _case(rng, n_train=120, n_query=40, m=6):
    return (
        rng.standard_normal((n_train, m)),
        rng.standard_normal(n_train),
        rng.standard_normal((n_query, m)),
    )


def _all_backends():
    backends = [("numpy", kernels.reference_knn_predict)]
    if kernels.native_knn_predict is not None:
        backends.append(("cython", kernels.native_knn_predict))
    return backends


@pytest.mark.parametrize("name,impl", _all_backends())
class TestKernelContract:
    def test_k1_returns_nearest_target(self, name, impl, rng):
        train, targets, query = _case(rng)
        out = impl(train, targets, query, 1)
        dists = ((query[:, None, :] - train[None, :, :]) ** 2).sum(axis=2)
        np.testing.assert_allclose(out, targets[dists.argmin(axis=1)], rtol=1e-12)

    def test_k_equals_n_is_global_mean(self, name, impl, rng):
        train, targets, query = _case(rng, n_train=30)
        out = impl(train, targets, query, 30)
        np.testing.assert_allclose(out, targets.mean(), rtol=1e-12)

    def test_tie_break_prefers_lower_index(self, name, impl):
        # Three identical training rows; k=2 must pick indices 0 and 1.
        train = np.zeros((3, 2))
        targets = np.array([1.0, 2.0, 100.0])
        out = impl(train, targets, np.zeros((1, 2)), 2)
        assert out[0] == pytest.approx(1.5)

    def test_deterministic_bitwise(self, name, impl, rng):
        train, targets, query = _case(rng)
        a = impl(train, targets, query, 7)
        b = impl(train, targets, query, 7)
        np.testing.assert_array_equal(a, b)

    def test_k_out_of_range(self, name, impl, rng):
        train, targets, query = _case(rng, n_train=5)
        with pytest.raises(ValueError):
            impl(train, targets, query, 0)
        with pytest.raises(ValueError):
            impl(train, targets, query, 6)


@pytest.mark.skipif(kernels.native_knn_predict is None, reason="extension not built")
class TestBackendParity:
    def test_same_results_random(self, rng):
        for k in (1, 3, 17):
            train, targets, query = _case(rng, n_train=200, n_query=64, m=9)
            ref = kernels.reference_knn_predict(train, targets, query, k)
            fast = kernels.native_knn_predict(train, targets, query, k)
            np.testing.assert_allclose(fast, ref, rtol=1e-12, atol=1e-15)

    def test_same_results_with_exact_ties(self, rng):
        # Duplicated rows produce bitwise-equal distances; both backends
        # must resolve them identically.
        train = np.repeat(rng.standard_normal((20, 4)), 3, axis=0)
        targets = rng.standard_normal(60)
        query = train[::2] .copy()
        for k in (1, 4, 9):
            ref = kernels.reference_knn_predict(train, targets, query, k)
            fast = kernels.native_knn_predict(train, targets, query, k)
            np.testing.assert_allclose(fast, ref, rtol=1e-12, atol=1e-15)
