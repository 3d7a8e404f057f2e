import numpy as np
import pytest

from emissionscope.errors import (
    AllWindowsDropped,
    EmptyWindow,
    MissingChannel,
    NoTemporalOverlap,
    SeriesTooShort,
)
from emissionscope.gases import GasId
from emissionscope.ingest import EmissionSeries, SensorSeries
from emissionscope.windowing import (
    ChannelMask,
    LabelPolicy,
    Window,
    WindowConfig,
    build_dataset,
    dataset_from_csv,
    dataset_sidecar,
    dataset_to_csv,
    extract_features,
    label_windows,
    segment,
)


def make_series(n, sensor_id="s1", rate=100.0, accel=None, gyro=None, t0=0.0):
    t = np.arange(n) / rate + t0
    accel = np.zeros((n, 3)) if accel is None else accel
    gyro = np.zeros((n, 3)) if gyro is None else gyro
    return SensorSeries(sensor_id=sensor_id, rate_hz=rate, t=t, accel=accel, gyro=gyro)


def make_window(accel_x, accel_y=None, accel_z=None, gyro=None):
    n = len(accel_x)
    accel = np.zeros((n, 3))
    accel[:, 0] = accel_x
    if accel_y is not None:
        accel[:, 1] = accel_y
    if accel_z is not None:
        accel[:, 2] = accel_z
    g = np.zeros((n, 3)) if gyro is None else gyro
    return Window(start_index=0, t=np.arange(n) / 100.0, accel=accel, gyro=g)


def emissions_at(times, values, gas=GasId.CO):
    return EmissionSeries(
        t=np.asarray(times, dtype=float),
        values={gas: np.asarray(values, dtype=float)},
    )


class TestSegment:
    def test_counts_match_brute_force(self):
        series = make_series(100)
        windows = segment(series, WindowConfig())
        starts = [w.start_index for w in windows]
        # oracle: enumerate every valid start index directly
        expected = [s for s in range(0, 100, 12) if s + 25 <= 100]
        assert starts == expected == [0, 12, 24, 36, 48, 60, 72]

    def test_exact_fit_single_window(self):
        assert len(segment(make_series(25), WindowConfig())) == 1

    def test_too_short(self):
        with pytest.raises(SeriesTooShort):
            segment(make_series(24), WindowConfig())

    def test_default_stride_is_12(self):
        assert WindowConfig().stride == 12

    def test_every_window_has_exact_length(self):
        for n in (25, 37, 60, 100, 123):
            for w in segment(make_series(n), WindowConfig()):
                assert len(w) == 25

    def test_count_formula(self):
        rng = np.random.default_rng(0)
        for _ in range(20):
            n = int(rng.integers(25, 400))
            cfg = WindowConfig()
            count = len(segment(make_series(n), cfg))
            assert count == (n - cfg.window_len) // cfg.stride + 1

    def test_interior_sample_coverage(self):
        # stride 12, length 25: interior samples land in at most ceil(25/12)=3 windows
        windows = segment(make_series(200), WindowConfig())
        hits = np.zeros(200, dtype=int)
        for w in windows:
            hits[w.start_index : w.start_index + 25] += 1
        assert hits.max() <= 3


class TestExtractFeatures:
    def test_constant_window(self):
        w = make_window(np.ones(25))
        feats = extract_features(w)
        np.testing.assert_allclose(feats, [0, 0, 1, 0, 0, 0, 1])

    def test_integer_ramp_quantiles(self):
        # accel_x = 1..25: mean 13, Q1 = 7, Q3 = 19, iqr 12, peak 25
        w = make_window(np.arange(1.0, 26.0))
        feats = extract_features(w)
        assert feats[2] == 13.0
        assert feats[5] == 12.0
        assert feats[6] == 25.0

    def test_quantile_against_numpy_percentile(self):
        rng = np.random.default_rng(5)
        for _ in range(50):
            x = rng.normal(size=int(rng.integers(2, 40)))
            w = make_window(x)
            iqr = extract_features(w)[5]
            expected = np.percentile(x, 75) - np.percentile(x, 25)
            assert iqr == pytest.approx(expected, abs=1e-12)

    def test_peak_is_max_absolute(self):
        x = np.ones(25)
        x[0] = -3.0
        assert extract_features(make_window(x))[6] == 3.0

    def test_empty_window(self):
        with pytest.raises(EmptyWindow):
            extract_features(make_window(np.array([])))

    def test_permutation_invariance(self):
        rng = np.random.default_rng(7)
        accel = rng.normal(size=(25, 3))
        gyro = rng.normal(size=(25, 3))
        w = Window(0, np.arange(25) / 100, accel, gyro)
        base = extract_features(w)
        for _ in range(10):
            p = rng.permutation(25)
            wp = Window(0, np.arange(25) / 100, accel[p], gyro[p])
            np.testing.assert_allclose(extract_features(wp), base, rtol=1e-12)

    def test_sign_flip_on_accel_x(self):
        rng = np.random.default_rng(8)
        x = rng.normal(size=25)
        a = extract_features(make_window(x))
        b = extract_features(make_window(-x))
        assert b[5] == pytest.approx(a[5], abs=1e-12)   # iqr even
        assert b[6] == pytest.approx(a[6], abs=1e-12)   # peak even
        assert b[2] == pytest.approx(-a[2], abs=1e-12)  # mean odd


class TestLabelWindows:
    def test_nearest_picks_closest(self):
        windows = segment(make_series(25), WindowConfig())
        assert windows[0].center_t == pytest.approx(0.12)
        em = emissions_at([0.0, 1.0], [10.0, 20.0])
        result = label_windows(windows, em, GasId.CO)
        assert result.values[0] == 10.0

    def test_nearest_tie_goes_earlier(self):
        w = Window(0, np.array([0.4, 0.5, 0.6]), np.zeros((3, 3)), np.zeros((3, 3)))
        em = emissions_at([0.0, 1.0], [10.0, 20.0])
        result = label_windows([w], em, GasId.CO, LabelPolicy())
        assert result.values[0] == 10.0  # center 0.5 equidistant, earlier wins

    def test_interpolate_midpoint(self):
        w = Window(0, np.array([0.4, 0.5, 0.6]), np.zeros((3, 3)), np.zeros((3, 3)))
        em = emissions_at([0.0, 1.0], [10.0, 20.0])
        result = label_windows([w], em, GasId.CO, LabelPolicy(mode="interpolate"))
        assert result.values[0] == pytest.approx(15.0)

    def test_interpolate_exact_on_affine(self):
        rng = np.random.default_rng(4)
        a, b = 5.0, 3.0
        times = np.sort(rng.uniform(0, 10, 40))
        em = emissions_at(times, a + b * times)
        windows = segment(make_series(900, t0=1.0), WindowConfig())
        res = label_windows(windows, em, GasId.CO, LabelPolicy(mode="interpolate"))
        centers = np.array([w.center_t for w in windows])[res.kept]
        np.testing.assert_allclose(res.values, a + b * centers, rtol=1e-12)

    def test_window_mean_and_fallback(self):
        w = Window(0, np.array([0.0, 0.5, 1.0]), np.zeros((3, 3)), np.zeros((3, 3)))
        em = emissions_at([0.25, 0.75, 5.0], [10.0, 20.0, 99.0])
        res = label_windows([w], em, GasId.CO, LabelPolicy(mode="window_mean", max_gap_s=10))
        assert res.values[0] == pytest.approx(15.0)
        # no records inside the span -> nearest record (t=0.75) supplies the value
        w2 = Window(0, np.array([2.0, 2.1, 2.2]), np.zeros((3, 3)), np.zeros((3, 3)))
        res2 = label_windows([w2], em, GasId.CO, LabelPolicy(mode="window_mean", max_gap_s=10))
        assert res2.values[0] == 20.0

    def test_gap_drop(self):
        w = Window(0, np.array([3.0, 3.1, 3.2]), np.zeros((3, 3)), np.zeros((3, 3)))
        w_ok = Window(0, np.array([0.0, 0.1, 0.2]), np.zeros((3, 3)), np.zeros((3, 3)))
        em = emissions_at([0.0], [10.0])
        res = label_windows([w_ok, w], em, GasId.CO, LabelPolicy(max_gap_s=2.0))
        assert res.n_dropped == 1
        assert list(res.kept) == [True, False]

    def test_all_dropped(self):
        w = Window(0, np.array([30.0, 30.1]), np.zeros((2, 3)), np.zeros((2, 3)))
        with pytest.raises(AllWindowsDropped):
            label_windows([w], emissions_at([0.0], [1.0]), GasId.CO)

    def test_missing_channel(self):
        w = Window(0, np.array([0.0, 0.1]), np.zeros((2, 3)), np.zeros((2, 3)))
        with pytest.raises(MissingChannel):
            label_windows([w], emissions_at([0.0], [1.0]), GasId.NO2)


class TestBuildDataset:
    def test_two_sensors_full_mask_14_columns(self, small_scenario, small_dataset):
        assert small_dataset.X.shape[1] == 14
        assert small_dataset.feature_names[0] == "cabin_mean_gyro_z"
        assert small_dataset.feature_names[7] == "stick_mean_gyro_z"

    def test_one_sensor_accel_only_5_columns(self, small_scenario):
        (cabin, _), emissions, _ = small_scenario
        ds = build_dataset([cabin], emissions, mask=ChannelMask(accel_only=True))
        assert ds.X.shape[1] == 5
        assert ds.feature_names == (
            "cabin_mean_accel_x",
            "cabin_mean_accel_y",
            "cabin_mean_accel_z",
            "cabin_iqr_accel_x",
            "cabin_peak_accel_x",
        )

    def test_no_temporal_overlap(self):
        s = make_series(50)
        em = emissions_at([100.0, 101.0], [1.0, 2.0])
        with pytest.raises(NoTemporalOverlap):
            build_dataset([s], em)

    def test_rows_match_targets(self, small_dataset):
        for vec in small_dataset.y.values():
            assert vec.shape[0] == small_dataset.n_rows
        assert np.all(np.isfinite(small_dataset.X))

    def test_modeled_gases_present(self, small_dataset):
        assert set(small_dataset.y) == {
            GasId.CO, GasId.NO, GasId.NO2, GasId.NOX, GasId.CO2
        }

    def test_second_sensor_offset_clock_pairs_nearest(self):
        rng = np.random.default_rng(2)
        accel = rng.uniform(-1, 1, (100, 3))
        s1 = make_series(100, "a", accel=accel)
        # same signal, clock shifted by a third of a sample
        s2 = make_series(100, "b", accel=accel, t0=0.00333)
        em = emissions_at([0.0, 0.5, 1.0], [1.0, 2.0, 3.0])
        ds = build_dataset([s1, s2], em)
        assert ds.X.shape[1] == 14
        assert np.all(np.isfinite(ds.X))

    def test_csv_round_trip(self, small_dataset):
        data = dataset_to_csv(small_dataset)
        back = dataset_from_csv(data)
        np.testing.assert_array_equal(back.X, small_dataset.X)
        np.testing.assert_array_equal(back.center_t, small_dataset.center_t)
        assert back.feature_names == small_dataset.feature_names
        for gas in small_dataset.y:
            np.testing.assert_array_equal(back.y[gas], small_dataset.y[gas])
        assert back.fingerprint() == small_dataset.fingerprint()

    def test_sidecar_fields(self, small_dataset):
        import json

        doc = json.loads(
            dataset_sidecar(small_dataset, WindowConfig(), LabelPolicy(), ChannelMask())
        )
        assert doc["window"]["stride"] == 12
        assert doc["n_rows"] == small_dataset.n_rows
        assert doc["fingerprint"] == small_dataset.fingerprint()
