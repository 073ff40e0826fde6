"""
Dataset ingestion.
"""
import numpy as np
import pytest

from eicsr.core.dataset import Dataset
from eicsr.core.exceptions import DatasetError


class TestFromArrays:
    def test_layout_is_columns_by_rows(self):
        data = Dataset.from_arrays([[1, 2], [3, 4], [5, 6]], [7, 8, 9])
        assert data.arity == 2
        assert data.n_rows == 3
        assert data.X[1].tolist() == [2.0, 4.0, 6.0]
        assert data.names == ("x1", "x2")

    def test_one_dimensional_input(self):
        assert Dataset.from_arrays([1.0, 2.0, 3.0], [1.0, 2.0, 3.0]).arity == 1

    def test_non_finite_rows_are_dropped(self):
        data = Dataset.from_arrays([[1, 2], [np.nan, 4], [5, 6]], [7, np.inf, 9])
        assert data.n_rows == 2
        assert data.dropped_rows == 1

    def test_all_rows_bad(self):
        with pytest.raises(DatasetError):
            Dataset.from_arrays([[np.nan]], [1.0])

    def test_row_mismatch(self):
        with pytest.raises(DatasetError):
            Dataset.from_arrays([[1.0], [2.0]], [1.0])

    def test_name_collision(self):
        with pytest.raises(DatasetError):
            Dataset.from_arrays([[1.0, 2.0]], [1.0], names=["a", "a"])

    def test_arrays_are_read_only(self):
        data = Dataset.from_arrays([[1.0]], [1.0])
        with pytest.raises(ValueError):
            data.X[0, 0] = 2.0


class TestFromCsv:
    def test_target_defaults_to_last_column(self, tmp_path):
        path = tmp_path / "data.csv"
        path.write_text("a,b,out\n1,2,3\n4,5,9\n", encoding="utf-8")
        data = Dataset.from_csv(path)
        assert data.names == ("a", "b")
        assert data.target_name == "out"
        assert data.y.tolist() == [3.0, 9.0]

    def test_explicit_target(self, tmp_path):
        path = tmp_path / "data.csv"
        path.write_text("y,a\n1,2\n3,4\n", encoding="utf-8")
        data = Dataset.from_csv(path, target="y")
        assert data.names == ("a",)
        assert data.y.tolist() == [1.0, 3.0]

    def test_duplicate_header(self, tmp_path):
        path = tmp_path / "data.csv"
        path.write_text("a,a,y\n1,2,3\n", encoding="utf-8")
        with pytest.raises(DatasetError):
            Dataset.from_csv(path)

    def test_missing_target(self, tmp_path):
        path = tmp_path / "data.csv"
        path.write_text("a,y\n1,2\n", encoding="utf-8")
        with pytest.raises(DatasetError):
            Dataset.from_csv(path, target="z")

    def test_non_numeric_cell(self, tmp_path):
        path = tmp_path / "data.csv"
        path.write_text("a,y\n1,2\nfoo,3\n", encoding="utf-8")
        with pytest.raises(DatasetError):
            Dataset.from_csv(path)


def test_uniform_probe_is_seeded():
    a = Dataset.uniform(3, 50, 1.0, 5.0, np.random.default_rng(4))
    b = Dataset.uniform(3, 50, 1.0, 5.0, np.random.default_rng(4))
    assert np.array_equal(a.X, b.X)
    assert a.X.min() >= 1.0 and a.X.max() < 5.0


def test_subset_and_with_target(linear_data):
    part = linear_data.subset([0, 2])
    assert part.n_rows == 2
    assert part.X[0, 1] == linear_data.X[0, 2]
    replaced = linear_data.with_target(np.zeros(linear_data.n_rows))
    assert replaced.y.sum() == 0.0
    assert np.array_equal(replaced.X, linear_data.X)
