import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from olma.data import (DataError, NormStats, TimeSeriesFrame, chronological_split, load_csv,
                       make_windows, split_lengths, split_windows, zscore_fit_apply)


def write(tmp_path, text, name="d.csv"):
    p = tmp_path / name
    p.write_text(text)
    return p


class TestLoadCsv:
    def test_plain_numeric(self, tmp_path):
        f = load_csv(write(tmp_path, "1,2\n3,4\n5,6\n"), has_header=False)
        assert (f.T, f.c) == (3, 2)
        np.testing.assert_array_equal(f.values, [[1, 2], [3, 4], [5, 6]])

    def test_header_and_date_column(self, tmp_path):
        f = load_csv(write(tmp_path, "date,a,b\n2020-01-01,1,2\n2020-01-02,3,4\n"), date_column=0)
        assert f.c == 2
        assert f.channel_names == ["a", "b"]
        assert f.timestamps == ["2020-01-01", "2020-01-02"]

    def test_nan_cell_names_position(self, tmp_path):
        with pytest.raises(DataError, match=r"row 3, column 2"):
            load_csv(write(tmp_path, "a,b\n1,2\n3,NaN\n"))

    def test_unparseable_cell(self, tmp_path):
        with pytest.raises(DataError, match="cannot parse 'x'"):
            load_csv(write(tmp_path, "1,x\n"), has_header=False)

    @pytest.mark.parametrize("text", ["", "a,b\n"])
    def test_empty(self, tmp_path, text):
        with pytest.raises(DataError):
            load_csv(write(tmp_path, text))

    def test_ragged_row(self, tmp_path):
        with pytest.raises(DataError, match="columns"):
            load_csv(write(tmp_path, "1,2\n3\n"), has_header=False)


class TestSplit:
    @pytest.mark.parametrize("T, expected", [(100, (60, 20, 20)), (10, (6, 2, 2)), (11, (6, 2, 3))])
    def test_lengths(self, T, expected):
        assert split_lengths(T, (0.6, 0.2, 0.2)) == expected

    def test_floor_rule_oracle(self):
        # remainder always goes to test
        for T in range(10, 300):
            n_tr, n_va, n_te = split_lengths(T, (0.7, 0.1, 0.2))
            assert n_tr == int(np.floor(0.7 * T + 1e-9)) and n_va == int(np.floor(0.1 * T + 1e-9))
            assert n_tr + n_va + n_te == T

    def test_empty_segment_rejected(self):
        with pytest.raises(DataError, match="empty"):
            split_lengths(3, (0.6, 0.2, 0.2))

    @pytest.mark.parametrize("ratios", [(0.5, 0.5, 0.0), (0.6, 0.3, 0.3), (1.2, -0.1, -0.1)])
    def test_bad_ratios(self, ratios):
        with pytest.raises(DataError):
            split_lengths(100, ratios)

    @given(T=st.integers(10, 500), c=st.integers(1, 4))
    @settings(max_examples=50, deadline=None)
    def test_concatenation_reconstructs(self, T, c):
        vals = np.arange(T * c, dtype=float).reshape(T, c)
        parts = chronological_split(TimeSeriesFrame.from_array(vals))
        np.testing.assert_array_equal(np.concatenate([p.values for p in parts]), vals)
        np.testing.assert_array_equal(np.concatenate([p.step_index for p in parts]), np.arange(T))


class TestZScore:
    def test_population_std(self):
        train = TimeSeriesFrame.from_array([0.0, 2.0])
        stats, (norm,) = zscore_fit_apply(train)
        assert stats.mean[0] == 1.0 and stats.std[0] == 1.0
        np.testing.assert_array_equal(norm.values[:, 0], [-1.0, 1.0])

    def test_apply_to_other(self):
        stats = NormStats(np.array([1.0]), np.array([1.0]))
        assert stats.apply(TimeSeriesFrame.from_array([3.0])).values[0, 0] == 2.0

    def test_constant_channel_named(self):
        f = TimeSeriesFrame([[5, 1], [5, 2], [5, 3]], ["flat", "ok"])
        with pytest.raises(DataError, match="'flat'"):
            zscore_fit_apply(f)

    def test_others_use_train_stats(self, rng):
        train = TimeSeriesFrame.from_array(rng.normal(3, 2, (50, 2)))
        other = TimeSeriesFrame.from_array(rng.normal(0, 1, (10, 2)))
        stats, (_, o) = zscore_fit_apply(train, [other])
        np.testing.assert_allclose(o.values, (other.values - train.values.mean(0)) / train.values.std(0))

    @given(st.lists(st.floats(-1e6, 1e6), min_size=3, max_size=60), st.floats(0.1, 100))
    @settings(max_examples=60, deadline=None)
    def test_inverse_roundtrip(self, xs, spread):
        vals = np.asarray(xs) + spread * np.arange(len(xs))  # never constant
        f = TimeSeriesFrame.from_array(vals)
        stats, (n,) = zscore_fit_apply(f)
        back = stats.invert(n).values
        scale = np.maximum(np.abs(vals), np.abs(vals).max())[:, None]
        assert np.all(np.abs(back - f.values) <= 1e-12 * scale)


class TestWindows:
    def test_enumeration(self):
        f = TimeSeriesFrame.from_array(np.arange(5.0))
        ws = make_windows(f, 2, 1, 1)
        assert len(ws) == 3
        np.testing.assert_array_equal(ws.inputs[0, :, 0], [0, 1])
        np.testing.assert_array_equal(ws.labels[0, :, 0], [2])
        np.testing.assert_array_equal(ws.origin_indices, [0, 1, 2])

    def test_too_short(self):
        with pytest.raises(DataError):
            make_windows(TimeSeriesFrame.from_array(np.arange(3.0)), 2, 2)

    def test_single_window(self):
        assert len(make_windows(TimeSeriesFrame.from_array(np.arange(4.0)), 2, 2)) == 1

    @given(T=st.integers(4, 120), l_in=st.integers(1, 10), l_out=st.integers(1, 10), stride=st.integers(1, 7))
    @settings(max_examples=80, deadline=None)
    def test_windows_match_slices(self, T, l_in, l_out, stride):
        if T < l_in + l_out:
            return
        vals = np.random.default_rng(T).standard_normal((T, 2))
        ws = make_windows(TimeSeriesFrame.from_array(vals), l_in, l_out, stride)
        assert len(ws) == (T - l_in - l_out) // stride + 1
        assert np.all(np.diff(ws.origin_indices) > 0)
        for b, s in enumerate(ws.origin_indices):
            assert np.array_equal(ws.inputs[b], vals[s:s + l_in])
            assert np.array_equal(ws.labels[b], vals[s + l_in:s + l_in + l_out])

    def test_history_reaches_back_but_labels_stay(self):
        f = TimeSeriesFrame.from_array(np.arange(20.0))
        _, val, _ = chronological_split(f, (0.5, 0.25, 0.25))
        train = f.slice(0, 10)
        ws = make_windows(val, 4, 2, history=train)
        assert ws.origin_indices[0] == 6          # inputs start 4 steps before the boundary
        assert ws.labels[:, :, 0].min() >= 10     # labels never leave the val segment
        assert ws.labels[:, :, 0].max() <= 14

    def test_split_windows_normalizes_with_train(self):
        f = TimeSeriesFrame.from_array(np.arange(100.0) ** 1.5)
        stats, (tr, va, te) = split_windows(f, (0.6, 0.2, 0.2), 8, 4)
        assert len(tr) == 60 - 12 + 1 and len(va) == 20 - 4 + 1 and len(te) == 20 - 4 + 1
        assert abs(stats.mean[0] - f.values[:60].mean()) < 1e-12
