"""Ingestion, scaling, splitting, windowing and the synthetic generator."""

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from gradsift.data import (
    RawSeries,
    ScalerParams,
    SynthProfile,
    apply_scaler,
    build_supervised,
    chrono_split,
    fit_scaler,
    ingest_csv,
    invert_scaler,
    make_windows,
    synth_series,
    write_series_csv,
)
from gradsift.errors import DataError


def _write_csv(path, rows, header="timestamp,value"):
    path.write_text(header + "\n" + "\n".join(rows) + "\n", encoding="utf-8")


class TestIngest:
    def test_well_formed_passthrough(self, tmp_path):
        f = tmp_path / "ok.csv"
        _write_csv(f, ["1000,1.5", "2000,2.5", "3000,3.5"])
        series = ingest_csv(f)
        assert len(series) == 3
        assert series.dropped_rows == 0
        np.testing.assert_array_equal(series.values, [1.5, 2.5, 3.5])

    def test_shuffled_rows_sorted(self, tmp_path):
        f = tmp_path / "shuffled.csv"
        _write_csv(f, ["3000,3.0", "1000,1.0", "2000,2.0"])
        series = ingest_csv(f)
        np.testing.assert_array_equal(series.timestamps, [1000, 2000, 3000])
        np.testing.assert_array_equal(series.values, [1.0, 2.0, 3.0])

    def test_corrupt_row_dropped_and_counted(self, tmp_path):
        f = tmp_path / "corrupt.csv"
        rows = [f"{i * 1000},{float(i)}" for i in range(1, 10)]
        rows.insert(4, "5500,not-a-number")
        _write_csv(f, rows)
        series = ingest_csv(f)
        assert len(series) == 9
        assert series.dropped_rows == 1

    def test_missing_column_rejected(self, tmp_path):
        f = tmp_path / "cols.csv"
        _write_csv(f, ["1,2"], header="time,value")
        with pytest.raises(DataError):
            ingest_csv(f)

    def test_empty_result_rejected(self, tmp_path):
        f = tmp_path / "empty.csv"
        _write_csv(f, ["x,y"])
        with pytest.raises(DataError):
            ingest_csv(f)

    def test_missing_file_rejected(self, tmp_path):
        with pytest.raises(DataError):
            ingest_csv(tmp_path / "nope.csv")

    def test_custom_columns(self, tmp_path):
        f = tmp_path / "custom.csv"
        _write_csv(f, ["10,7.5"], header="t,activity")
        series = ingest_csv(f, value_column="activity", timestamp_column="t")
        assert series.values[0] == 7.5

    def test_write_round_trip(self, tmp_path):
        series = synth_series(3, 50)
        f = tmp_path / "rt.csv"
        write_series_csv(series, f)
        back = ingest_csv(f)
        np.testing.assert_array_equal(back.timestamps, series.timestamps)
        np.testing.assert_array_equal(back.values, series.values)


class TestScaler:
    def test_endpoints(self):
        sp = fit_scaler([2.0, 4.0, 6.0])
        np.testing.assert_allclose(apply_scaler([2.0, 4.0, 6.0], sp), [0.0, 0.5, 1.0])

    @given(
        st.lists(
            st.floats(min_value=-1e6, max_value=1e6, allow_nan=False),
            min_size=2,
            max_size=40,
        ).filter(lambda v: max(v) > min(v))
    )
    def test_round_trip(self, values):
        sp = fit_scaler(values)
        back = invert_scaler(apply_scaler(values, sp), sp)
        np.testing.assert_allclose(back, values, atol=1e-12 * max(1.0, sp.max - sp.min))

    def test_constant_series_maps_to_half(self):
        sp = fit_scaler([5.0, 5.0, 5.0])
        np.testing.assert_array_equal(apply_scaler([5.0, 5.0, 5.0], sp), [0.5, 0.5, 0.5])
        # inversion of the degenerate scaler returns the constant
        np.testing.assert_array_equal(invert_scaler([0.5, 0.5, 0.5], sp), [5.0, 5.0, 5.0])

    def test_empty_rejected(self):
        with pytest.raises(DataError):
            fit_scaler([])

    def test_fit_ignores_test_content(self):
        # identical train head, different tails: same ScalerParams
        head = np.linspace(0.0, 10.0, 80)
        s1 = RawSeries(np.arange(100, dtype=np.int64), np.concatenate([head, np.full(20, 99.0)]))
        s2 = RawSeries(np.arange(100, dtype=np.int64), np.concatenate([head, np.full(20, -99.0)]))
        t1, _ = chrono_split(s1, 0.8)
        t2, _ = chrono_split(s2, 0.8)
        assert fit_scaler(t1.values) == fit_scaler(t2.values)

    def test_invalid_bounds_rejected(self):
        with pytest.raises(DataError):
            ScalerParams(min=1.0, max=0.0)


class TestChronoSplit:
    def _series(self, n):
        return RawSeries(np.arange(n, dtype=np.int64) * 100, np.arange(n, dtype=float))

    def test_len10(self):
        train, test = chrono_split(self._series(10), 0.8)
        assert (len(train), len(test)) == (8, 2)

    def test_len5_floor(self):
        train, test = chrono_split(self._series(5), 0.8)
        assert (len(train), len(test)) == (4, 1)

    def test_partition(self):
        s = self._series(23)
        train, test = chrono_split(s, 0.8)
        np.testing.assert_array_equal(np.concatenate([train.values, test.values]), s.values)
        np.testing.assert_array_equal(
            np.concatenate([train.timestamps, test.timestamps]), s.timestamps
        )

    def test_too_short_rejected(self):
        with pytest.raises(DataError):
            chrono_split(self._series(1), 0.8)

    def test_bad_fraction_rejected(self):
        with pytest.raises(DataError):
            chrono_split(self._series(10), 1.0)

    def test_no_look_ahead(self):
        train, test = chrono_split(self._series(50), 0.8)
        assert train.timestamps.max() < test.timestamps.min()


class TestWindows:
    def test_lag1_matches_definition(self):
        ds = make_windows(np.array([1.0, 2.0, 3.0, 4.0]), window=1)
        np.testing.assert_array_equal(ds.X[:, :, 0], [[1.0], [2.0], [3.0]])
        np.testing.assert_array_equal(ds.y, [2.0, 3.0, 4.0])
        np.testing.assert_array_equal(ds.origin_index, [0, 1, 2])

    def test_window2(self):
        ds = make_windows(np.array([1.0, 2.0, 3.0, 4.0]), window=2)
        np.testing.assert_array_equal(ds.X[:, :, 0], [[1.0, 2.0], [2.0, 3.0]])
        np.testing.assert_array_equal(ds.y, [3.0, 4.0])

    def test_too_short_rejected(self):
        with pytest.raises(DataError):
            make_windows(np.array([1.0]), window=1)

    @given(st.integers(min_value=2, max_value=60), st.integers(min_value=0, max_value=2**31))
    def test_adjacency(self, n, seed):
        values = np.random.default_rng(seed).random(n)
        ds = make_windows(values, window=1)
        for i in range(len(ds) - 1):
            assert ds.y[i] == ds.X[i + 1, 0, 0]

    def test_take_preserves_order(self):
        ds = make_windows(np.arange(10.0), window=1)
        sub = ds.take([1, 4, 7])
        np.testing.assert_array_equal(sub.y, ds.y[[1, 4, 7]])
        np.testing.assert_array_equal(sub.origin_index, [1, 4, 7])


class TestSynth:
    def test_deterministic(self):
        a = synth_series(9, 300)
        b = synth_series(9, 300)
        np.testing.assert_array_equal(a.values, b.values)
        np.testing.assert_array_equal(a.timestamps, b.timestamps)

    def test_noiseless_closed_form(self):
        profile = SynthProfile(noise_std=0.0, spike_rate=0.0)
        series = synth_series(4, 500, profile)
        i = np.arange(500, dtype=float)
        spd = float(profile.samples_per_day)
        expected = profile.base + profile.daily_amplitude * np.sin(
            2.0 * np.pi * i / spd
        ) * (1.0 + profile.weekly_amplitude * np.sin(2.0 * np.pi * i / (7.0 * spd)))
        np.testing.assert_allclose(series.values, expected, rtol=1e-15)

    def test_spike_count_matches_rng_replay(self):
        # independent replay of the documented draw order
        profile = SynthProfile(noise_std=1.0, spike_rate=0.01, spike_scale=25.0)
        n = 10_000
        seed = 77
        series = synth_series(seed, n, profile)

        replay = np.random.default_rng(seed)
        noise = replay.normal(0.0, profile.noise_std, size=n)
        mask = replay.random(n) < profile.spike_rate
        expected_count = int(mask.sum())

        i = np.arange(n, dtype=float)
        spd = float(profile.samples_per_day)
        smooth = profile.base + profile.daily_amplitude * np.sin(
            2.0 * np.pi * i / spd
        ) * (1.0 + profile.weekly_amplitude * np.sin(2.0 * np.pi * i / (7.0 * spd)))
        residual = series.values - smooth - noise
        assert int(np.sum(residual > 1e-9)) == expected_count
        assert expected_count > 0

    def test_bad_length_rejected(self):
        with pytest.raises(DataError):
            synth_series(0, 0)

    def test_timestamps_strictly_increasing(self):
        series = synth_series(1, 100)
        assert np.all(np.diff(series.timestamps) > 0)


class TestBuildSupervised:
    def test_no_straddling_and_no_look_ahead(self):
        series = synth_series(5, 200)
        train_ds, test_ds, scaler = build_supervised(series, 0.8, window=1)
        # 160 train points -> 159 windows; 40 test points -> 39 windows
        assert len(train_ds) == 159
        assert len(test_ds) == 39
        # scaler fit on train only: train targets stay inside [0, 1]
        assert train_ds.y.min() >= 0.0 and train_ds.y.max() <= 1.0

    def test_scaler_from_train_only(self):
        values = np.concatenate([np.linspace(0, 1, 80), np.full(20, 50.0)])
        series = RawSeries(np.arange(100, dtype=np.int64), values)
        _, test_ds, scaler = build_supervised(series, 0.8, window=1)
        assert scaler.max == pytest.approx(1.0)  # the 50s never leak in
        assert test_ds.y.max() > 1.0  # test values exceed the train range
