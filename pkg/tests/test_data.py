"""Dataset container and CSV interchange tests."""

import numpy as np
import pytest

from evsurv.data import DataFormatError, Dataset, read_csv, write_csv


def sample_dataset(n=7, p=3, with_true=True, seed=0):
    rng = np.random.default_rng(seed)
    x = rng.normal(size=(n, p))
    t_true = np.exp(rng.normal(size=n))
    d = (rng.uniform(size=n) < 0.6).astype(int)
    t_star = np.where(d == 1, t_true, t_true * 0.5)
    return Dataset(x, t_star, d, t_true if with_true else None)


class TestDataset:
    def test_basic_shape_accessors(self):
        data = sample_dataset(n=5, p=2)
        assert len(data) == 5
        assert data.p == 2
        assert data.feature_names == ["f0", "f1"]

    def test_censor_rate(self):
        data = Dataset(np.zeros((4, 1)), np.ones(4), [1, 0, 0, 1])
        assert data.censor_rate == 0.5

    def test_record_accessor(self):
        data = sample_dataset(n=3)
        rec = data.record(1)
        assert rec.t_star == data.t_star[1]
        assert rec.d == data.d[1]
        assert rec.t_true == data.t_true[1]
        np.testing.assert_array_equal(rec.x, data.x[1])

    def test_subset_keeps_alignment(self):
        data = sample_dataset(n=6)
        sub = data.subset([4, 1])
        assert len(sub) == 2
        np.testing.assert_array_equal(sub.x, data.x[[4, 1]])
        np.testing.assert_array_equal(sub.t_star, data.t_star[[4, 1]])
        np.testing.assert_array_equal(sub.d, data.d[[4, 1]])
        np.testing.assert_array_equal(sub.t_true, data.t_true[[4, 1]])

    def test_one_dim_x_promoted(self):
        data = Dataset(np.ones(3), np.ones(3), np.ones(3, dtype=int))
        assert data.x.shape == (3, 1)

    def test_rejects_nonpositive_duration(self):
        with pytest.raises(DataFormatError):
            Dataset(np.zeros((2, 1)), [1.0, 0.0], [1, 1])

    def test_rejects_bad_event_flag(self):
        with pytest.raises(DataFormatError):
            Dataset(np.zeros((2, 1)), [1.0, 1.0], [1, 2])

    def test_rejects_length_mismatch(self):
        with pytest.raises(DataFormatError):
            Dataset(np.zeros((2, 1)), [1.0, 1.0, 1.0], [1, 1, 1])

    def test_rejects_nonfinite_features(self):
        with pytest.raises(DataFormatError):
            Dataset(np.array([[np.inf]]), [1.0], [1])


class TestRoundTrip:
    def test_lossless_with_true_duration(self, tmp_path):
        data = sample_dataset(n=9, p=4, with_true=True, seed=3)
        path = tmp_path / "d.csv"
        write_csv(data, path)
        back = read_csv(path)
        np.testing.assert_array_equal(back.x, data.x)
        np.testing.assert_array_equal(back.t_star, data.t_star)
        np.testing.assert_array_equal(back.d, data.d)
        np.testing.assert_array_equal(back.t_true, data.t_true)
        assert back.feature_names == data.feature_names

    def test_lossless_without_true_duration(self, tmp_path):
        data = sample_dataset(n=4, with_true=False, seed=4)
        path = tmp_path / "d.csv"
        write_csv(data, path)
        back = read_csv(path)
        assert back.t_true is None
        np.testing.assert_array_equal(back.t_star, data.t_star)

    def test_feature_names_preserved(self, tmp_path):
        data = Dataset(np.ones((2, 2)), [1.0, 2.0], [1, 0],
                       feature_names=["age", "grade"])
        path = tmp_path / "d.csv"
        write_csv(data, path)
        assert read_csv(path).feature_names == ["age", "grade"]


class TestReadErrors:
    def write(self, tmp_path, text):
        path = tmp_path / "bad.csv"
        path.write_text(text)
        return path

    def test_empty_file(self, tmp_path):
        with pytest.raises(DataFormatError, match="empty"):
            read_csv(self.write(tmp_path, ""))

    def test_missing_duration(self, tmp_path):
        with pytest.raises(DataFormatError, match="duration"):
            read_csv(self.write(tmp_path, "f0,event\n1.0,1\n"))

    def test_missing_event(self, tmp_path):
        with pytest.raises(DataFormatError, match="event"):
            read_csv(self.write(tmp_path, "f0,duration\n1.0,1.0\n"))

    def test_ragged_row(self, tmp_path):
        text = "f0,duration,event\n1.0,2.0,1\n1.0,2.0\n"
        with pytest.raises(DataFormatError, match="row 3"):
            read_csv(self.write(tmp_path, text))

    def test_non_numeric_cell(self, tmp_path):
        text = "f0,duration,event\nabc,2.0,1\n"
        with pytest.raises(DataFormatError, match="non-numeric"):
            read_csv(self.write(tmp_path, text))

    def test_non_binary_event(self, tmp_path):
        text = "f0,duration,event\n1.0,2.0,0.5\n"
        with pytest.raises(DataFormatError, match="0 or 1"):
            read_csv(self.write(tmp_path, text))

    def test_nonpositive_duration(self, tmp_path):
        text = "f0,duration,event\n1.0,-2.0,1\n"
        with pytest.raises(DataFormatError):
            read_csv(self.write(tmp_path, text))

    def test_extra_columns_become_features(self, tmp_path):
        text = "age,duration,grade,event\n3.0,2.0,1.5,1\n"
        data = read_csv(self.write(tmp_path, text))
        assert data.feature_names == ["age", "grade"]
        np.testing.assert_array_equal(data.x, [[3.0, 1.5]])
