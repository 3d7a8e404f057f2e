"""Fixed-size overlapping windows, the seven-feature extraction, and label
attachment that pairs motion windows with gas-analyzer records.

Defaults reproduce 25-sample windows with 50% overlap (stride 12).  The
seven per-sensor features, in fixed order: gyro z/x means, accelerometer
x/y/z means, interquartile range of accel x (linear interpolation between
order statistics), and the peak (maximum absolute) accel x.
"""

from __future__ import annotations

import hashlib
import io
import json
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import (
    AllWindowsDropped,
    EmptyWindow,
    InvalidConfig,
    MalformedHeader,
    MalformedRow,
    MissingChannel,
    NoTemporalOverlap,
    SeriesTooShort,
)
from .gases import MODELED_GASES, GasId
from .ingest import EmissionSeries, SensorSeries

FEATURE_NAMES = (
    "mean_gyro_z",
    "mean_gyro_x",
    "mean_accel_x",
    "mean_accel_y",
    "mean_accel_z",
    "iqr_accel_x",
    "peak_accel_x",
)
ACCEL_ONLY_NAMES = (
    "mean_accel_x",
    "mean_accel_y",
    "mean_accel_z",
    "iqr_accel_x",
    "peak_accel_x",
)
LABEL_MODES = ("nearest", "window_mean", "interpolate")


@dataclass(frozen=True)
class WindowConfig:
    window_len: int = 25
    overlap_fraction: float = 0.5

    def __post_init__(self):
        if self.window_len < 1:
            raise InvalidConfig("window_len must be >= 1")
        if not (0.0 <= self.overlap_fraction < 1.0):
            raise InvalidConfig("overlap_fraction must be in [0, 1)")

    @property
    def stride(self) -> int:
        return max(1, math.floor(self.window_len * (1.0 - self.overlap_fraction)))


@dataclass(frozen=True)
class LabelPolicy:
    mode: str = "nearest"
    max_gap_s: float = 2.0

    def __post_init__(self):
        if self.mode not in LABEL_MODES:
            raise InvalidConfig(f"mode must be one of {LABEL_MODES}, got {self.mode!r}")
        if not self.max_gap_s > 0:
            raise InvalidConfig("max_gap_s must be > 0")


@dataclass(frozen=True)
class ChannelMask:
    """Feature-subset selector: which sensors, and optionally accel-only."""

    sensors: tuple[str, ...] | None = None  # None -> all, in input order
    accel_only: bool = False

    @property
    def feature_subset(self) -> tuple[str, ...]:
        return ACCEL_ONLY_NAMES if self.accel_only else FEATURE_NAMES


@dataclass(frozen=True)
class Window:
    start_index: int
    t: np.ndarray       # (w,)
    accel: np.ndarray   # (w, 3)
    gyro: np.ndarray    # (w, 3)

    def __len__(self) -> int:
        return self.t.shape[0]

    @property
    def start_t(self) -> float:
        return float(self.t[0])

    @property
    def end_t(self) -> float:
        return float(self.t[-1])

    @property
    def center_t(self) -> float:
        return 0.5 * (self.start_t + self.end_t)


@dataclass(frozen=True)
class LabelResult:
    values: np.ndarray    # labels for kept windows only
    kept: np.ndarray      # (n_windows,) bool
    n_dropped: int


@dataclass(frozen=True)
class Dataset:
    """Feature matrix plus per-gas targets with window provenance."""

    feature_names: tuple[str, ...]
    X: np.ndarray                  # (n, d)
    y: dict[GasId, np.ndarray]     # gas -> (n,)
    center_t: np.ndarray           # (n,) window centers
    sensor_ids: tuple[str, ...]
    n_dropped: int = 0

    def __post_init__(self):
        n, d = self.X.shape
        if len(self.feature_names) != d:
            raise InvalidConfig("feature_names length must equal X column count")
        if self.center_t.shape[0] != n:
            raise InvalidConfig("center_t length must equal X row count")
        for gas, vec in self.y.items():
            if vec.shape[0] != n:
                raise InvalidConfig(f"target {gas.key} length differs from X rows")
            if not np.all(np.isfinite(vec)):
                raise InvalidConfig(f"non-finite values in target {gas.key}")
        if n and not np.all(np.isfinite(self.X)):
            raise InvalidConfig("non-finite values in X")

    @property
    def n_rows(self) -> int:
        return self.X.shape[0]

    def take(self, rows: np.ndarray) -> "Dataset":
        return Dataset(
            feature_names=self.feature_names,
            X=self.X[rows].copy(),
            y={gas: vec[rows].copy() for gas, vec in self.y.items()},
            center_t=self.center_t[rows].copy(),
            sensor_ids=self.sensor_ids,
            n_dropped=self.n_dropped,
        )

    def fingerprint(self) -> str:
        h = hashlib.sha256()
        h.update(",".join(self.feature_names).encode())
        h.update(self.center_t.tobytes())
        h.update(np.ascontiguousarray(self.X).tobytes())
        for gas in sorted(self.y, key=lambda g: g.key):
            h.update(gas.key.encode())
            h.update(self.y[gas].tobytes())
        return h.hexdigest()


def segment(series: SensorSeries, cfg: WindowConfig | None = None) -> list[Window]:
    """Cut the series into overlapping fixed-length windows.

    Window k starts at sample index k * stride; the count is
    floor((N - window_len) / stride) + 1.
    """
    cfg = cfg or WindowConfig()
    n = len(series)
    w = cfg.window_len
    if n < w:
        raise SeriesTooShort(f"{n} samples < window length {w}")
    stride = cfg.stride
    starts = range(0, n - w + 1, stride)
    return [
        Window(
            start_index=s,
            t=series.t[s : s + w],
            accel=series.accel[s : s + w],
            gyro=series.gyro[s : s + w],
        )
        for s in starts
    ]


def _interp_quantile(sorted_vals: np.ndarray, p: float) -> float:
    """Order-statistic quantile with linear interpolation, h = (n-1)p."""
    h = (sorted_vals.shape[0] - 1) * p
    lo = math.floor(h)
    hi = math.ceil(h)
    frac = h - lo
    return float(sorted_vals[lo] + frac * (sorted_vals[hi] - sorted_vals[lo]))


def extract_features(window: Window) -> np.ndarray:
    """The seven per-sensor features, in FEATURE_NAMES order."""
    if len(window) == 0:
        raise EmptyWindow("cannot extract features from an empty window")
    ax = window.accel[:, 0]
    ax_sorted = np.sort(ax)
    return np.array(
        [
            np.mean(window.gyro[:, 2]),
            np.mean(window.gyro[:, 0]),
            np.mean(ax),
            np.mean(window.accel[:, 1]),
            np.mean(window.accel[:, 2]),
            _interp_quantile(ax_sorted, 0.75) - _interp_quantile(ax_sorted, 0.25),
            np.max(np.abs(ax)),
        ],
        dtype=np.float64,
    )


def _nearest_indices(times: np.ndarray, queries: np.ndarray) -> np.ndarray:
    """Index of the record nearest each query time; ties pick the earlier."""
    pos = np.searchsorted(times, queries)
    pos = np.clip(pos, 0, times.shape[0] - 1)
    prev = np.clip(pos - 1, 0, times.shape[0] - 1)
    d_prev = np.abs(queries - times[prev])
    d_here = np.abs(times[pos] - queries)
    return np.where(d_prev <= d_here, prev, pos)


def label_windows(
    windows: Sequence[Window],
    emissions: EmissionSeries,
    gas: GasId,
    policy: LabelPolicy | None = None,
) -> LabelResult:
    """Attach one gas label per window; drop windows beyond the gap limit."""
    policy = policy or LabelPolicy()
    if not windows:
        raise EmptyWindow("no windows to label")
    if gas not in emissions.values:
        raise MissingChannel(f"emission series has no {gas.key} channel")
    centers = np.array([w.center_t for w in windows])
    values = _label_values(windows, centers, emissions, gas, policy)
    kept = _gap_mask(centers, emissions.t, policy)
    n_dropped = int(np.sum(~kept))
    if not kept.any():
        raise AllWindowsDropped(
            f"all {len(windows)} windows farther than {policy.max_gap_s}s "
            "from the nearest emission record"
        )
    return LabelResult(values=values[kept], kept=kept, n_dropped=n_dropped)


def _gap_mask(centers, times, policy: LabelPolicy) -> np.ndarray:
    near = _nearest_indices(times, centers)
    return np.abs(times[near] - centers) <= policy.max_gap_s


def _label_values(windows, centers, emissions, gas, policy) -> np.ndarray:
    times = emissions.t
    mags = emissions.values[gas]
    near = _nearest_indices(times, centers)
    if policy.mode == "nearest":
        return mags[near].copy()
    if policy.mode == "interpolate":
        return np.interp(centers, times, mags)
    # window_mean: average records inside the window span, nearest fallback
    out = np.empty(centers.shape[0])
    for i, w in enumerate(windows):
        lo = np.searchsorted(times, w.start_t, side="left")
        hi = np.searchsorted(times, w.end_t, side="right")
        out[i] = np.mean(mags[lo:hi]) if hi > lo else mags[near[i]]
    return out


def _nearest_pair_window(series: SensorSeries, ref: Window) -> Window:
    """Sensor-2 window on sensor-1's clock.

    Takes the run of samples inside the reference span when its length
    already matches; otherwise pairs each reference sample time with the
    nearest sample (duplicates allowed).
    """
    lo = np.searchsorted(series.t, ref.start_t, side="left")
    hi = np.searchsorted(series.t, ref.end_t, side="right")
    if hi - lo == len(ref):
        sel = np.arange(lo, hi)
    else:
        sel = _nearest_indices(series.t, ref.t)
    return Window(
        start_index=int(sel[0]),
        t=series.t[sel],
        accel=series.accel[sel],
        gyro=series.gyro[sel],
    )


def _restrict(series: SensorSeries, t0: float, t1: float) -> SensorSeries:
    lo = np.searchsorted(series.t, t0, side="left")
    hi = np.searchsorted(series.t, t1, side="right")
    return SensorSeries(
        sensor_id=series.sensor_id,
        rate_hz=series.rate_hz,
        t=series.t[lo:hi].copy(),
        accel=series.accel[lo:hi].copy(),
        gyro=series.gyro[lo:hi].copy(),
    )


def build_dataset(
    sensors: Sequence[SensorSeries],
    emissions: EmissionSeries,
    cfg: WindowConfig | None = None,
    policy: LabelPolicy | None = None,
    mask: ChannelMask | None = None,
) -> Dataset:
    """Window the sensors over their common span, featurize, and label.

    Windows are indexed on the first selected sensor's clock; remaining
    sensors contribute the nearest-paired run of samples per window.
    Feature blocks concatenate in sensor order.  Every modeled gas present
    in the emission series receives a target vector; windows dropped by the
    label gap rule are dropped from X and every target consistently.
    """
    cfg = cfg or WindowConfig()
    policy = policy or LabelPolicy()
    mask = mask or ChannelMask()

    if not sensors:
        raise InvalidConfig("at least one sensor series is required")
    if mask.sensors is None:
        selected = list(sensors)
    else:
        by_id = {s.sensor_id: s for s in sensors}
        missing = [sid for sid in mask.sensors if sid not in by_id]
        if missing:
            raise InvalidConfig(f"mask names unknown sensors: {missing}")
        selected = [by_id[sid] for sid in mask.sensors]

    t0 = max(s.start_t for s in selected)
    t1 = min(s.end_t for s in selected)
    if t0 > t1:
        raise NoTemporalOverlap("sensor series do not overlap in time")
    if emissions.t[-1] < t0 or emissions.t[0] > t1:
        raise NoTemporalOverlap(
            "emission records do not overlap the sensors' common span"
        )

    primary = _restrict(selected[0], t0, t1)
    windows = segment(primary, cfg)

    blocks = []
    for s in selected:
        if s is selected[0]:
            per_sensor = windows
        else:
            per_sensor = [_nearest_pair_window(s, w) for w in windows]
        feats = np.stack([extract_features(w) for w in per_sensor])
        if mask.accel_only:
            keep = [FEATURE_NAMES.index(name) for name in ACCEL_ONLY_NAMES]
            feats = feats[:, keep]
        blocks.append(feats)
    X = np.hstack(blocks)
    names = tuple(
        f"{s.sensor_id}_{name}" for s in selected for name in mask.feature_subset
    )

    centers = np.array([w.center_t for w in windows])
    kept = _gap_mask(centers, emissions.t, policy)
    if not kept.any():
        raise AllWindowsDropped(
            f"all {len(windows)} windows farther than {policy.max_gap_s}s "
            "from the nearest emission record"
        )
    targets = {}
    for gas in MODELED_GASES:
        if gas in emissions.values:
            full = _label_values(windows, centers, emissions, gas, policy)
            targets[gas] = full[kept]

    return Dataset(
        feature_names=names,
        X=X[kept],
        y=targets,
        center_t=centers[kept],
        sensor_ids=tuple(s.sensor_id for s in selected),
        n_dropped=int(np.sum(~kept)),
    )


# --- dataset CSV + sidecar ------------------------------------------------


def dataset_to_csv(ds: Dataset) -> bytes:
    gas_cols = [g for g in MODELED_GASES if g in ds.y]
    header = ["window_center_t", *ds.feature_names] + [f"y_{g.key}" for g in gas_cols]
    out = io.StringIO()
    out.write(",".join(header) + "\n")
    for i in range(ds.n_rows):
        row = [ds.center_t[i], *ds.X[i]] + [ds.y[g][i] for g in gas_cols]
        out.write(",".join(repr(float(v)) for v in row) + "\n")
    return out.getvalue().encode("utf-8")


def dataset_sidecar(
    ds: Dataset,
    cfg: WindowConfig,
    policy: LabelPolicy,
    mask: ChannelMask,
) -> bytes:
    doc = {
        "window": {
            "window_len": cfg.window_len,
            "overlap_fraction": cfg.overlap_fraction,
            "stride": cfg.stride,
        },
        "labels": {"mode": policy.mode, "max_gap_s": policy.max_gap_s},
        "mask": {"sensors": mask.sensors, "accel_only": mask.accel_only},
        "sensor_ids": list(ds.sensor_ids),
        "n_rows": ds.n_rows,
        "n_dropped": ds.n_dropped,
        "fingerprint": ds.fingerprint(),
    }
    return json.dumps(doc, sort_keys=True, indent=2).encode("utf-8")


def dataset_from_csv(data: bytes | str, sensor_ids: tuple[str, ...] = ()) -> Dataset:
    text = data.decode("utf-8") if isinstance(data, (bytes, bytearray)) else data
    lines = [ln for ln in text.replace("\r\n", "\n").split("\n") if ln]
    if not lines:
        raise MalformedHeader("empty dataset CSV")
    header = lines[0].split(",")
    if header[0] != "window_center_t":
        raise MalformedHeader("dataset CSV must start with window_center_t")
    y_start = next(
        (j for j, name in enumerate(header) if name.startswith("y_")), len(header)
    )
    feature_names = tuple(header[1:y_start])
    gas_cols = [GasId.from_key(name[2:]) for name in header[y_start:]]

    rows = np.empty((len(lines) - 1, len(header)))
    for i, line in enumerate(lines[1:]):
        fields = line.split(",")
        if len(fields) != len(header):
            raise MalformedRow(f"line {i + 2}: expected {len(header)} fields")
        try:
            rows[i] = [float(f) for f in fields]
        except ValueError:
            raise MalformedRow(f"line {i + 2}: unparseable numeric") from None
    return Dataset(
        feature_names=feature_names,
        X=rows[:, 1:y_start].copy(),
        y={g: rows[:, y_start + j].copy() for j, g in enumerate(gas_cols)},
        center_t=rows[:, 0].copy(),
        sensor_ids=sensor_ids,
    )
