import numpy as np
import pytest

from xq.errors import ProtocolError, PurityViolationError
from xq.external import connect_external
from xq.tabular import ColumnMeta

from conftest import LINE_MODEL

SIG = (ColumnMeta("a", "numeric"), ColumnMeta("b", "numeric"))


def _connect(*extra, **kwargs):
    return connect_external(LINE_MODEL + list(extra), SIG, timeout=20.0, **kwargs)


class TestHappyPath:
    def test_constant_model(self):
        with _connect("--mode", "const", "--value", "0.5") as model:
            out = model.predict_batch(np.zeros((3, 2)))
        np.testing.assert_array_equal(out, [0.5, 0.5, 0.5])

    def test_sum_model_round_trips_values(self, rng):
        rows = rng.standard_normal((8, 2))
        with _connect("--mode", "sum") as model:
            out = model.predict_batch(rows)
        np.testing.assert_allclose(out, rows.sum(axis=1), rtol=1e-12)

    def test_cache_returns_equal_results(self):
        with _connect("--mode", "const", "--value", "2.5") as model:
            rows = np.ones((4, 2))
            first = model.predict_batch(rows)
            second = model.predict_batch(rows)
        np.testing.assert_array_equal(first, second)

    def test_teardown_is_clean(self):
        model = _connect("--mode", "const")
        model.predict_batch(np.zeros((2, 2)))
        model.close()
        assert model._proc.returncode == 0


class TestProtocolErrors:
    def test_short_response(self):
        with pytest.raises(ProtocolError, match="line 3 of 3"):
            with _connect("--mode", "short") as model:
                model.predict_batch(np.zeros((3, 2)))

    def test_garbage_response_cites_line(self):
        with pytest.raises(ProtocolError, match="line 1 of 2.*banana"):
            with _connect("--mode", "garbage") as model:
                model.predict_batch(np.zeros((2, 2)))

    def test_nonfinite_response(self):
        with pytest.raises(ProtocolError, match="non-finite"):
            with _connect("--mode", "nonfinite") as model:
                model.predict_batch(np.zeros((2, 2)))

    def test_handshake_failure(self):
        with pytest.raises(ProtocolError, match="expected 'OK'"):
            _connect("--mode", "badshake")

    def test_unspawnable_command(self):
        with pytest.raises(ProtocolError, match="cannot spawn"):
            connect_external(["/no/such/binary"], SIG)


class TestPurity:
    def test_stochastic_model_rejected(self):
        with pytest.raises(PurityViolationError, match="not pure"):
            with _connect("--mode", "random") as model:
                model.predict_batch(np.zeros((3, 2)))

    def test_purity_check_can_be_disabled(self):
        with _connect("--mode", "random", verify_purity=False) as model:
            out = model.predict_batch(np.zeros((3, 2)))
        assert out.shape == (3,)
