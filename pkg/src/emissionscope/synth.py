"""Seeded synthetic excavator scenario with closed-form ground truth.

Two sensor streams (an attenuated cabin sensor and a full-amplitude stick
sensor) are sums of per-activity sinusoids plus Gaussian noise; emissions
are per-gas base levels times a per-activity multiplier, sampled at the
analyzer rate.  Everything is deterministic in the seed, and all outputs
satisfy the ingestion invariants.

The default activity states share one waveform shape scaled by a per-state
intensity, while the default emission multipliers are non-monotone in that
intensity.  Tree learners can isolate the states; a single hyperplane
cannot, which keeps the linear baseline honest.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import InvalidConfig
from .fileio import atomic_write_bytes
from .gases import GAS_RANGES, GasId
from .ingest import (
    ACCEL_FULL_SCALE_G,
    GYRO_FULL_SCALE_DPS,
    EmissionSeries,
    SensorSeries,
    write_inertial_csv,
    write_pems_csv,
)


class ActivityState(enum.Enum):
    IDLE = "idle"
    DIG = "dig"
    SWING = "swing"
    DUMP = "dump"


@dataclass(frozen=True)
class StateMotion:
    """Per-axis sinusoid parameters of one activity state."""

    accel_amp_g: tuple[float, float, float]
    accel_dc_g: tuple[float, float, float]
    gyro_amp_dps: tuple[float, float, float]
    gyro_dc_dps: tuple[float, float, float]
    accel_freq_hz: float = 5.0
    gyro_freq_hz: float = 2.0


@dataclass(frozen=True)
class GasProfile:
    base: float
    multipliers: dict[ActivityState, float]


def _scaled_motion(k: float) -> StateMotion:
    return StateMotion(
        accel_amp_g=(0.18 * k, 0.10 * k, 0.14 * k),
        accel_dc_g=(0.012 * k, 0.03 * k, 0.02 * k),
        gyro_amp_dps=(9.0 * k, 5.0 * k, 13.0 * k),
        gyro_dc_dps=(0.8 * k, 0.4 * k, 1.6 * k),
    )


# Engine intensities: idle 1, swing 2.5, dump 4, dig 6.
DEFAULT_MOTION: dict[ActivityState, StateMotion] = {
    ActivityState.IDLE: _scaled_motion(1.0),
    ActivityState.SWING: _scaled_motion(2.5),
    ActivityState.DUMP: _scaled_motion(4.0),
    ActivityState.DIG: _scaled_motion(6.0),
}

# Multipliers are deliberately not ordered like the intensities above
# (swing emits more than dump despite gentler motion).
DEFAULT_GASES: dict[GasId, GasProfile] = {
    GasId.CO: GasProfile(40.0, {
        ActivityState.IDLE: 1.0, ActivityState.SWING: 4.2,
        ActivityState.DUMP: 2.0, ActivityState.DIG: 5.0,
    }),
    GasId.NO: GasProfile(100.0, {
        ActivityState.IDLE: 1.0, ActivityState.SWING: 3.8,
        ActivityState.DUMP: 1.8, ActivityState.DIG: 4.6,
    }),
    GasId.NO2: GasProfile(8.0, {
        ActivityState.IDLE: 1.0, ActivityState.SWING: 3.5,
        ActivityState.DUMP: 2.2, ActivityState.DIG: 4.2,
    }),
    GasId.CO2: GasProfile(1.8, {
        ActivityState.IDLE: 1.0, ActivityState.SWING: 3.2,
        ActivityState.DUMP: 1.9, ActivityState.DIG: 4.4,
    }),
    GasId.O2: GasProfile(20.9, {
        ActivityState.IDLE: 0.995, ActivityState.SWING: 0.97,
        ActivityState.DUMP: 0.95, ActivityState.DIG: 0.93,
    }),
}

DEFAULT_CYCLE: tuple[tuple[ActivityState, float], ...] = (
    (ActivityState.IDLE, 20.0),
    (ActivityState.DIG, 15.0),
    (ActivityState.SWING, 8.0),
    (ActivityState.DUMP, 7.0),
)

_ACCEL_PHASES = (0.0, 1.1, 2.3)
_GYRO_PHASES = (0.7, 1.9, 3.1)
_EMISSION_NOISE_FRACTION = 0.5  # per-gas noise std = noise_std * base * this
_GYRO_NOISE_SCALE = 50.0        # gyro noise std = noise_std * this (deg/s)


@dataclass(frozen=True)
class SynthConfig:
    duration_s: float
    rate_hz: float = 100.0
    pems_rate_hz: float = 1.0
    cycle: tuple[tuple[ActivityState, float], ...] = DEFAULT_CYCLE
    motion: dict[ActivityState, StateMotion] = field(
        default_factory=lambda: dict(DEFAULT_MOTION)
    )
    gases: dict[GasId, GasProfile] = field(
        default_factory=lambda: dict(DEFAULT_GASES)
    )
    cabin_attenuation: float = 0.3
    noise_std: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if not self.duration_s > 0:
            raise InvalidConfig("duration_s must be > 0")
        if not (self.rate_hz > 0 and self.pems_rate_hz > 0):
            raise InvalidConfig("sampling rates must be > 0")
        if self.noise_std < 0:
            raise InvalidConfig("noise_std must be >= 0")
        if not self.cycle or any(dwell <= 0 for _, dwell in self.cycle):
            raise InvalidConfig("cycle must be non-empty with positive dwell times")
        for state, _ in self.cycle:
            if state not in self.motion:
                raise InvalidConfig(f"no motion parameters for state {state.value}")
            for profile in self.gases.values():
                if state not in profile.multipliers:
                    raise InvalidConfig(f"no gas multiplier for state {state.value}")


@dataclass(frozen=True)
class GroundTruth:
    """Noiseless emission function and the latent activity timeline."""

    segment_ends: np.ndarray                       # (k,) segment end times
    segment_states: tuple[ActivityState, ...]      # (k,)
    levels: dict[GasId, dict[ActivityState, float]]

    def state_at(self, t) -> np.ndarray:
        idx = np.searchsorted(self.segment_ends, np.asarray(t, dtype=np.float64),
                              side="right")
        idx = np.minimum(idx, len(self.segment_states) - 1)
        return np.asarray([self.segment_states[i] for i in np.atleast_1d(idx)])

    def emission_at(self, gas: GasId, t) -> np.ndarray:
        table = self.levels[gas]
        return np.asarray([table[s] for s in self.state_at(t)])

    def to_json(self) -> bytes:
        doc = {
            "segments": [
                {"end_t": float(end), "state": state.value}
                for end, state in zip(self.segment_ends, self.segment_states)
            ],
            "levels": {
                gas.key: {state.value: level for state, level in table.items()}
                for gas, table in self.levels.items()
            },
        }
        return json.dumps(doc, sort_keys=True, indent=2).encode("utf-8")


def _timeline(cfg: SynthConfig) -> tuple[np.ndarray, list[ActivityState]]:
    ends: list[float] = []
    states: list[ActivityState] = []
    t = 0.0
    while t < cfg.duration_s:
        for state, dwell in cfg.cycle:
            t += dwell
            ends.append(t)
            states.append(state)
            if t >= cfg.duration_s:
                break
    return np.asarray(ends), states


def _state_index_at(ends: np.ndarray, t: np.ndarray) -> np.ndarray:
    idx = np.searchsorted(ends, t, side="right")
    return np.minimum(idx, ends.shape[0] - 1)


def _sensor_stream(
    cfg: SynthConfig,
    sensor_id: str,
    attenuation: float,
    seg_ends: np.ndarray,
    seg_states: list[ActivityState],
    rng: np.random.Generator,
) -> SensorSeries:
    n = int(round(cfg.duration_s * cfg.rate_hz))
    t = np.arange(n) / cfg.rate_hz
    seg = _state_index_at(seg_ends, t)
    order = [s for s, _ in cfg.cycle]
    unique_states = list(dict.fromkeys(order))

    def per_sample(getter) -> np.ndarray:
        table = np.array([getter(cfg.motion[s]) for s in unique_states])
        state_pos = {s: i for i, s in enumerate(unique_states)}
        lookup = np.array([state_pos[seg_states[k]] for k in range(len(seg_states))])
        return table[lookup[seg]]

    accel = np.empty((n, 3))
    gyro = np.empty((n, 3))
    for j in range(3):
        amp = per_sample(lambda m, j=j: m.accel_amp_g[j])
        dc = per_sample(lambda m, j=j: m.accel_dc_g[j])
        freq = per_sample(lambda m: m.accel_freq_hz)
        accel[:, j] = attenuation * (
            amp * np.sin(2 * np.pi * freq * t + _ACCEL_PHASES[j]) + dc
        )
    for j in range(3):
        amp = per_sample(lambda m, j=j: m.gyro_amp_dps[j])
        dc = per_sample(lambda m, j=j: m.gyro_dc_dps[j])
        freq = per_sample(lambda m: m.gyro_freq_hz)
        gyro[:, j] = attenuation * (
            amp * np.sin(2 * np.pi * freq * t + _GYRO_PHASES[j]) + dc
        )
    if cfg.noise_std > 0:
        for j in range(3):
            accel[:, j] += rng.normal(0.0, cfg.noise_std, size=n)
        for j in range(3):
            gyro[:, j] += rng.normal(0.0, cfg.noise_std * _GYRO_NOISE_SCALE, size=n)
    np.clip(accel, -ACCEL_FULL_SCALE_G, ACCEL_FULL_SCALE_G, out=accel)
    np.clip(gyro, -GYRO_FULL_SCALE_DPS, GYRO_FULL_SCALE_DPS, out=gyro)
    return SensorSeries(
        sensor_id=sensor_id, rate_hz=cfg.rate_hz, t=t, accel=accel, gyro=gyro
    )


def _emission_stream(
    cfg: SynthConfig,
    seg_ends: np.ndarray,
    seg_states: list[ActivityState],
    rng: np.random.Generator,
) -> EmissionSeries:
    m = max(1, int(round(cfg.duration_s * cfg.pems_rate_hz)))
    t = np.arange(m) / cfg.pems_rate_hz
    seg = _state_index_at(seg_ends, t)
    values = {}
    for gas, profile in cfg.gases.items():
        mult = np.array([profile.multipliers[seg_states[k]] for k in range(len(seg_states))])
        v = profile.base * mult[seg]
        if cfg.noise_std > 0:
            v = v + rng.normal(
                0.0, cfg.noise_std * profile.base * _EMISSION_NOISE_FRACTION, size=m
            )
        lo, hi = GAS_RANGES[gas]
        values[gas] = np.clip(v, lo, hi)
    return EmissionSeries(t=t, values=values)


def generate(cfg: SynthConfig) -> tuple[tuple[SensorSeries, SensorSeries], EmissionSeries, GroundTruth]:
    """Generate (cabin, stick) sensor streams, emissions, and ground truth."""
    seg_ends, seg_states = _timeline(cfg)
    cabin = _sensor_stream(
        cfg, "cabin", cfg.cabin_attenuation, seg_ends, seg_states,
        np.random.default_rng([cfg.seed, 0]),
    )
    stick = _sensor_stream(
        cfg, "stick", 1.0, seg_ends, seg_states,
        np.random.default_rng([cfg.seed, 1]),
    )
    emissions = _emission_stream(
        cfg, seg_ends, seg_states, np.random.default_rng([cfg.seed, 2])
    )
    truth = GroundTruth(
        segment_ends=seg_ends,
        segment_states=tuple(seg_states),
        levels={
            gas: {
                state: profile.base * profile.multipliers[state]
                for state, _ in cfg.cycle
            }
            for gas, profile in cfg.gases.items()
        },
    )
    return (cabin, stick), emissions, truth


def write_scenario(cfg: SynthConfig, out_dir: str | Path) -> dict[str, Path]:
    """Write s1.csv (cabin), s2.csv (stick), pems.csv, and truth.json."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (cabin, stick), emissions, truth = generate(cfg)
    paths = {
        "s1": out / "s1.csv",
        "s2": out / "s2.csv",
        "pems": out / "pems.csv",
        "truth": out / "truth.json",
    }
    atomic_write_bytes(paths["s1"], write_inertial_csv(cabin))
    atomic_write_bytes(paths["s2"], write_inertial_csv(stick))
    atomic_write_bytes(paths["pems"], write_pems_csv(emissions))
    atomic_write_bytes(paths["truth"], truth.to_json())
    return paths
