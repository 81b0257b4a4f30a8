import numpy as np
import pytest

from xq.errors import DataError, UndefinedCorrelationError
from xq.tabular import load_csv, pearson_correlation, sample_rows, write_csv

from conftest import numeric_dataset


def _write(tmp_path, text, name="d.csv"):
    path = tmp_path / name
    path.write_text(text, encoding="utf-8")
    return path


class TestLoadCsv:
    def test_numeric_parse(self, tmp_path):
        d = load_csv(_write(tmp_path, "a,b\n1,2\n3,4\n5,6\n"))
        assert d.n_rows == 3 and d.n_columns == 2
        assert [c.kind for c in d.columns] == ["numeric", "numeric"]
        np.testing.assert_array_equal(d.data, [[1, 2], [3, 4], [5, 6]])

    def test_categorical_levels_first_appearance(self, tmp_path):
        d = load_csv(_write(tmp_path, "color\nred\nblue\nred\n"))
        assert d.columns[0].kind == "categorical"
        assert d.columns[0].levels == ("red", "blue")
        np.testing.assert_array_equal(d.data[:, 0], [0, 1, 0])

    def test_drop_missing_counts(self, tmp_path):
        d = load_csv(_write(tmp_path, "a,b,c\n1,,3\n4,5,6\n"), drop_missing=True)
        assert d.n_rows == 1 and d.dropped_rows == 1

    def test_missing_without_flag_fails(self, tmp_path):
        with pytest.raises(DataError, match="missing"):
            load_csv(_write(tmp_path, "a,b\n1,\n2,3\n"))

    def test_nonfinite_treated_as_missing(self, tmp_path):
        d = load_csv(_write(tmp_path, "a,b\ninf,1\n2,3\n"), drop_missing=True)
        assert d.n_rows == 1 and d.dropped_rows == 1
        assert d.columns[0].kind == "numeric"

    def test_ragged_row_fails(self, tmp_path):
        with pytest.raises(DataError, match="row 3"):
            load_csv(_write(tmp_path, "a,b\n1,2\n3\n"))

    def test_zero_rows_fails(self, tmp_path):
        with pytest.raises(DataError, match="no data rows"):
            load_csv(_write(tmp_path, "a,b\n"))

    def test_unreadable_fails(self, tmp_path):
        with pytest.raises(DataError, match="cannot read"):
            load_csv(tmp_path / "absent.csv")

    def test_duplicate_header_fails(self, tmp_path):
        with pytest.raises(DataError, match="duplicate"):
            load_csv(_write(tmp_path, "a,a\n1,2\n"))

    def test_schema_override(self, tmp_path):
        d = load_csv(_write(tmp_path, "code\n1\n2\n1\n"), schema={"code": "categorical"})
        assert d.columns[0].kind == "categorical"
        assert d.columns[0].levels == ("1", "2")

    def test_scientific_notation(self, tmp_path):
        d = load_csv(_write(tmp_path, "a\n1e-3\n2.5E2\n"))
        np.testing.assert_allclose(d.data[:, 0], [1e-3, 250.0])


class TestRoundTrip:
    def test_write_load_reproduces_cells(self, tmp_path, rng):
        values = rng.standard_normal(17)
        values[3] = 1.0 / 3.0
        d = numeric_dataset("rt", x=values, y=rng.integers(0, 5, 17).astype(float))
        out = tmp_path / "rt.csv"
        write_csv(d, out)
        back = load_csv(out)
        np.testing.assert_array_equal(back.data, d.data)
        assert [c.kind for c in back.columns] == [c.kind for c in d.columns]

    def test_categorical_with_commas_quoted(self, tmp_path):
        src = _write(tmp_path, 'label\n"a,b"\nplain\n"a,b"\n')
        d = load_csv(src)
        assert d.columns[0].levels == ("a,b", "plain")
        out = tmp_path / "out.csv"
        write_csv(d, out)
        back = load_csv(out)
        assert back.columns[0].levels == d.columns[0].levels
        np.testing.assert_array_equal(back.data, d.data)


class TestPearson:
    def test_perfect_linear(self):
        d = numeric_dataset("p", x=[1, 2, 3], y=[2, 4, 6])
        assert pearson_correlation(d, "x", "y") == pytest.approx(1.0)

    def test_perfect_inverse(self):
        d = numeric_dataset("p", x=[1, 2, 3], y=[3, 2, 1])
        assert pearson_correlation(d, "x", "y") == pytest.approx(-1.0)

    def test_hand_computed_value(self):
        # Textbook formula by hand: sum of cross products 4.0 over
        # sqrt(5 * 5), so r = 0.8.
        d = numeric_dataset("p", x=[1, 2, 3, 4], y=[1, 3, 2, 4])
        assert pearson_correlation(d, "x", "y") == pytest.approx(0.8, abs=1e-12)

    def test_symmetry_and_self(self):
        d = numeric_dataset("p", x=[1, 2, 3, 4], y=[1, 3, 2, 4])
        assert pearson_correlation(d, "x", "y") == pearson_correlation(d, "y", "x")
        assert pearson_correlation(d, "x", "x") == 1.0

    def test_constant_column_rejected(self):
        d = numeric_dataset("p", x=[1, 1, 1], y=[1, 2, 3])
        with pytest.raises(UndefinedCorrelationError, match="'x'"):
            pearson_correlation(d, "x", "y")

    def test_bounds_on_random_data(self, rng):
        for _ in range(50):
            d = numeric_dataset("p", x=rng.standard_normal(9), y=rng.standard_normal(9))
            assert -1.0 <= pearson_correlation(d, "x", "y") <= 1.0

    def test_categorical_rejected(self, tmp_path):
        path = tmp_path / "c.csv"
        path.write_text("a,b\nred,1\nblue,2\n", encoding="utf-8")
        with pytest.raises(DataError, match="not numeric"):
            pearson_correlation(load_csv(path), "a", "b")


class TestSampleRows:
    def test_small_returns_all_in_order(self, rng):
        d = numeric_dataset("s", x=np.arange(5.0))
        out = sample_rows(d, 10, seed=0)
        np.testing.assert_array_equal(out.data, d.data)

    def test_deterministic_per_seed(self, rng):
        d = numeric_dataset("s", x=rng.standard_normal(100))
        a = sample_rows(d, 10, seed=7)
        b = sample_rows(d, 10, seed=7)
        np.testing.assert_array_equal(a.data, b.data)
        assert a.n_rows == 10

    def test_invalid_k(self):
        d = numeric_dataset("s", x=[1.0, 2.0])
        with pytest.raises(DataError):
            sample_rows(d, 0, seed=1)


class TestDatasetInvariants:
    def test_feature_view_excludes_target(self):
        d = numeric_dataset("t", target="y", x=[1, 2], y=[3, 4])
        assert d.feature_names == ("x",)
        np.testing.assert_array_equal(d.feature_matrix(), [[1], [2]])

    def test_unknown_column(self):
        d = numeric_dataset("t", x=[1, 2])
        with pytest.raises(DataError, match="unknown column"):
            d.column_index("nope")

    def test_content_hash_changes_with_data(self):
        a = numeric_dataset("t", x=[1, 2])
        b = numeric_dataset("t", x=[1, 3])
        assert a.content_hash() != b.content_hash()
        assert a.content_hash() == numeric_dataset("t", x=[1, 2]).content_hash()
