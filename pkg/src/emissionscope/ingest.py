"""CSV ingestion for inertial and gas-analyzer streams.

Parsers are total and deterministic: identical bytes produce identical
series or identical errors.  All type invariants (full-scale ranges,
strictly increasing time, sampling-gap tolerance) are enforced here, never
assumed downstream.  Returned series are marked read-only and safe to share
across threads.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field
from typing import BinaryIO, Iterator

import numpy as np

from .errors import (
    EmptyStream,
    MalformedHeader,
    MalformedRow,
    MissingChannel,
    NonMonotonicTime,
    RangeViolation,
    TimingGap,
    UnitMismatch,
)
from .gases import GAS_RANGES, GAS_UNITS, GasId, Unit

INERTIAL_HEADER = "t_s,accel_x_g,accel_y_g,accel_z_g,gyro_x_dps,gyro_y_dps,gyro_z_dps"

# Full PEMS header; trailing columns from so2_ppm onward may be absent.
PEMS_COLUMNS: tuple[tuple[str, GasId], ...] = (
    ("no_ppm", GasId.NO),
    ("no2_ppm", GasId.NO2),
    ("co_ppm", GasId.CO),
    ("co2_pct", GasId.CO2),
    ("o2_pct", GasId.O2),
    ("so2_ppm", GasId.SO2),
    ("ch4_ppm", GasId.CH4),
    ("h2s_ppm", GasId.H2S),
    ("t_air_c", GasId.T_AIR),
    ("t_gas_c", GasId.T_GAS),
)
_PEMS_MIN_COLUMNS = 5  # no, no2, co, co2, o2 are mandatory

ACCEL_FULL_SCALE_G = 200.0
GYRO_FULL_SCALE_DPS = 7000.0
RATE_TOLERANCE = 0.2  # successive deltas must be within +/-20% of 1/rate_hz


@dataclass(frozen=True)
class SensorSample:
    """One inertial sample: acceleration in g, angular velocity in deg/s."""

    t: float
    accel_x: float
    accel_y: float
    accel_z: float
    gyro_x: float
    gyro_y: float
    gyro_z: float


@dataclass(frozen=True)
class SensorSeries:
    """Uniform-rate inertial stream from one physical sensor."""

    sensor_id: str
    rate_hz: float
    t: np.ndarray          # (n,) seconds since stream start (+ epoch offset)
    accel: np.ndarray      # (n, 3) x, y, z in g
    gyro: np.ndarray       # (n, 3) x, y, z in deg/s

    def __post_init__(self):
        _validate_sensor_arrays(self.t, self.accel, self.gyro, self.rate_hz)
        for arr in (self.t, self.accel, self.gyro):
            arr.setflags(write=False)

    def __len__(self) -> int:
        return self.t.shape[0]

    @property
    def start_t(self) -> float:
        return float(self.t[0])

    @property
    def end_t(self) -> float:
        return float(self.t[-1])

    def sample(self, i: int) -> SensorSample:
        return SensorSample(
            float(self.t[i]),
            float(self.accel[i, 0]), float(self.accel[i, 1]), float(self.accel[i, 2]),
            float(self.gyro[i, 0]), float(self.gyro[i, 1]), float(self.gyro[i, 2]),
        )

    @property
    def samples(self) -> Iterator[SensorSample]:
        return (self.sample(i) for i in range(len(self)))


@dataclass(frozen=True)
class EmissionRecord:
    """One gas-analyzer record: per-gas (magnitude, unit) at time t."""

    t: float
    values: dict[GasId, tuple[float, Unit]]


@dataclass(frozen=True)
class EmissionSeries:
    """Time-stamped gas concentrations; every record carries the same gas set."""

    t: np.ndarray                       # (m,) seconds
    values: dict[GasId, np.ndarray]     # gas -> (m,) magnitudes
    units: dict[GasId, Unit] = field(default_factory=dict)

    def __post_init__(self):
        if not self.units:
            object.__setattr__(
                self, "units", {g: GAS_UNITS[g] for g in self.values}
            )
        _validate_emission_arrays(self.t, self.values)
        self.t.setflags(write=False)
        for arr in self.values.values():
            arr.setflags(write=False)

    def __len__(self) -> int:
        return self.t.shape[0]

    @property
    def gases(self) -> frozenset[GasId]:
        return frozenset(self.values)

    def record(self, i: int) -> EmissionRecord:
        return EmissionRecord(
            float(self.t[i]),
            {g: (float(v[i]), self.units[g]) for g, v in self.values.items()},
        )

    @property
    def records(self) -> Iterator[EmissionRecord]:
        return (self.record(i) for i in range(len(self)))


def _validate_sensor_arrays(t, accel, gyro, rate_hz) -> None:
    if t.shape[0] == 0:
        raise EmptyStream("sensor series has no samples")
    if not np.all(np.isfinite(t)):
        raise MalformedRow("non-finite timestamp in sensor series")
    deltas = np.diff(t)
    if deltas.size and not np.all(deltas > 0):
        i = int(np.argmin(deltas > 0))
        raise NonMonotonicTime(f"t not strictly increasing at sample {i + 1}")
    nominal = 1.0 / rate_hz
    if deltas.size:
        bad = (deltas < nominal * (1 - RATE_TOLERANCE)) | (
            deltas > nominal * (1 + RATE_TOLERANCE)
        )
        if np.any(bad):
            i = int(np.argmax(bad))
            raise TimingGap(
                f"sample interval {deltas[i]:.6g}s at sample {i + 1} outside "
                f"+/-20% of nominal {nominal:.6g}s"
            )
    if not np.all(np.abs(accel) <= ACCEL_FULL_SCALE_G):
        raise RangeViolation(f"acceleration outside +/-{ACCEL_FULL_SCALE_G:g} g")
    if not np.all(np.abs(gyro) <= GYRO_FULL_SCALE_DPS):
        raise RangeViolation(f"angular velocity outside +/-{GYRO_FULL_SCALE_DPS:g} deg/s")


def _validate_emission_arrays(t, values) -> None:
    if t.shape[0] == 0:
        raise EmptyStream("emission series has no records")
    if not np.all(np.isfinite(t)):
        raise MalformedRow("non-finite timestamp in emission series")
    deltas = np.diff(t)
    if deltas.size and not np.all(deltas > 0):
        i = int(np.argmin(deltas > 0))
        raise NonMonotonicTime(f"t not strictly increasing at record {i + 1}")
    for gas, mags in values.items():
        if mags.shape != t.shape:
            raise MalformedRow(f"channel {gas.key} length differs from timestamps")
        lo, hi = GAS_RANGES[gas]
        ok = (mags >= lo) & (mags <= hi)
        if not np.all(ok):
            i = int(np.argmin(ok))
            raise RangeViolation(
                f"{gas.key} value {mags[i]:g} outside analyzer range [{lo:g}, {hi:g}]"
            )


def _read_lines(source: bytes | bytearray | BinaryIO) -> list[str]:
    if isinstance(source, (bytes, bytearray)):
        raw = bytes(source)
    else:
        raw = source.read()
    text = raw.decode("utf-8")
    lines = text.replace("\r\n", "\n").split("\n")
    return [ln for ln in lines if ln != ""]


def _parse_float(token: str, line_no: int, column: str) -> float:
    try:
        value = float(token)
    except ValueError:
        raise MalformedRow(
            f"line {line_no}: cannot parse {column}={token!r} as a number"
        ) from None
    if not np.isfinite(value) and column == "t_s":
        raise MalformedRow(f"line {line_no}: non-finite timestamp {token!r}")
    return value


def parse_inertial_csv(
    source: bytes | bytearray | BinaryIO,
    sensor_id: str,
    rate_hz: float = 100.0,
    epoch_offset_s: float = 0.0,
) -> SensorSeries:
    """Parse one inertial CSV stream into a validated SensorSeries.

    The header must exactly match ``t_s,accel_x_g,...,gyro_z_dps``.  Rows
    with unparseable numerics reject the whole stream.  ``epoch_offset_s``
    shifts all timestamps, making cross-device alignment explicit.
    """
    lines = _read_lines(source)
    if not lines:
        raise EmptyStream("no bytes in input")
    header = lines[0].strip()
    if header != INERTIAL_HEADER:
        raise MalformedHeader(
            f"expected header {INERTIAL_HEADER!r}, got {header!r}"
        )
    body = lines[1:]
    if not body:
        raise EmptyStream("no data rows after header")

    names = INERTIAL_HEADER.split(",")
    rows = np.empty((len(body), 7), dtype=np.float64)
    for i, line in enumerate(body):
        fields = line.split(",")
        if len(fields) != 7:
            raise MalformedRow(
                f"line {i + 2}: expected 7 fields, got {len(fields)}"
            )
        for j, token in enumerate(fields):
            rows[i, j] = _parse_float(token.strip(), i + 2, names[j])

    return SensorSeries(
        sensor_id=sensor_id,
        rate_hz=rate_hz,
        t=rows[:, 0] + epoch_offset_s,
        accel=rows[:, 1:4].copy(),
        gyro=rows[:, 4:7].copy(),
    )


def parse_pems_csv(
    source: bytes | bytearray | BinaryIO,
    epoch_offset_s: float = 0.0,
) -> EmissionSeries:
    """Parse a gas-analyzer CSV stream into a validated EmissionSeries.

    Optional trailing columns (so2_ppm onward) may be absent; the gas set of
    the result is exactly the set of columns present.  Units follow the
    analyzer channel definitions (ppm / percent / celsius).
    """
    lines = _read_lines(source)
    if not lines:
        raise EmptyStream("no bytes in input")
    header_fields = [f.strip() for f in lines[0].split(",")]
    full = ["t_s"] + [name for name, _ in PEMS_COLUMNS]
    n_cols = len(header_fields)
    if (
        n_cols < 1 + _PEMS_MIN_COLUMNS
        or n_cols > len(full)
        or header_fields != full[:n_cols]
    ):
        raise MalformedHeader(
            f"expected a prefix of {','.join(full)!r} with at least the "
            f"first {_PEMS_MIN_COLUMNS} gas columns, got {lines[0]!r}"
        )
    body = lines[1:]
    if not body:
        raise EmptyStream("no data rows after header")

    rows = np.empty((len(body), n_cols), dtype=np.float64)
    for i, line in enumerate(body):
        fields = line.split(",")
        if len(fields) != n_cols:
            raise MalformedRow(
                f"line {i + 2}: expected {n_cols} fields, got {len(fields)}"
            )
        for j, token in enumerate(fields):
            rows[i, j] = _parse_float(token.strip(), i + 2, header_fields[j])

    gases = [gas for (_, gas) in PEMS_COLUMNS[: n_cols - 1]]
    values = {gas: rows[:, j + 1].copy() for j, gas in enumerate(gases)}
    return EmissionSeries(t=rows[:, 0] + epoch_offset_s, values=values)


def derive_nox(series: EmissionSeries) -> EmissionSeries:
    """Return a copy of ``series`` with a NOX channel equal to NO + NO2.

    The sum is a single float addition per record; the input is unchanged.
    """
    if GasId.NO not in series.values or GasId.NO2 not in series.values:
        missing = [g.key for g in (GasId.NO, GasId.NO2) if g not in series.values]
        raise MissingChannel(f"cannot derive nox without {', '.join(missing)}")
    if series.units[GasId.NO] != Unit.PPM or series.units[GasId.NO2] != Unit.PPM:
        raise UnitMismatch("no and no2 must both be in ppm to derive nox")
    values = dict(series.values)
    values[GasId.NOX] = series.values[GasId.NO] + series.values[GasId.NO2]
    return EmissionSeries(t=series.t.copy(), values=values)


def _format_float(x: float) -> str:
    return repr(float(x))


def write_inertial_csv(series: SensorSeries) -> bytes:
    """Serialize back to the inertial CSV schema (shortest exact floats)."""
    out = io.StringIO()
    out.write(INERTIAL_HEADER + "\n")
    for i in range(len(series)):
        row = [series.t[i]] + list(series.accel[i]) + list(series.gyro[i])
        out.write(",".join(_format_float(v) for v in row) + "\n")
    return out.getvalue().encode("utf-8")


def write_pems_csv(series: EmissionSeries) -> bytes:
    """Serialize back to the gas-analyzer CSV schema (raw channels only)."""
    cols = [(name, gas) for name, gas in PEMS_COLUMNS if gas in series.values]
    out = io.StringIO()
    out.write(",".join(["t_s"] + [name for name, _ in cols]) + "\n")
    for i in range(len(series)):
        row = [series.t[i]] + [series.values[gas][i] for _, gas in cols]
        out.write(",".join(_format_float(v) for v in row) + "\n")
    return out.getvalue().encode("utf-8")
