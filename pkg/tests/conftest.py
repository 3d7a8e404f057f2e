import numpy as np
import pytest

from emissionscope.ingest import derive_nox
from emissionscope.synth import SynthConfig, generate
from emissionscope.windowing import build_dataset


def inertial_csv(rows):
    """Build inertial CSV bytes from (t, ax, ay, az, gx, gy, gz) tuples."""
    header = "t_s,accel_x_g,accel_y_g,accel_z_g,gyro_x_dps,gyro_y_dps,gyro_z_dps"
    lines = [header] + [",".join(repr(float(v)) for v in row) for row in rows]
    return ("\n".join(lines) + "\n").encode()


def pems_csv(rows, n_cols=6):
    """Build gas-analyzer CSV bytes; rows are sequences of n_cols floats."""
    header = "t_s,no_ppm,no2_ppm,co_ppm,co2_pct,o2_pct,so2_ppm,ch4_ppm,h2s_ppm,t_air_c,t_gas_c"
    head = ",".join(header.split(",")[:n_cols])
    lines = [head] + [",".join(repr(float(v)) for v in row) for row in rows]
    return ("\n".join(lines) + "\n").encode()


def steady_rows(n, rate=100.0, accel=(0.1, 0.2, 1.0), gyro=(1.0, 2.0, 3.0)):
    return [(i / rate, *accel, *gyro) for i in range(n)]


@pytest.fixture(scope="session")
def small_scenario():
    """60 s noisy scenario: cheap enough for most integration tests."""
    cfg = SynthConfig(duration_s=60.0, noise_std=0.05, seed=11)
    (cabin, stick), emissions, truth = generate(cfg)
    return (cabin, stick), derive_nox(emissions), truth


@pytest.fixture(scope="session")
def small_dataset(small_scenario):
    (cabin, stick), emissions, _ = small_scenario
    return build_dataset([cabin, stick], emissions)


@pytest.fixture(scope="session")
def regression_problem():
    """Random 60x5 problem with a nonlinear signal, shared across model tests."""
    rng = np.random.default_rng(42)
    X = rng.uniform(-2.0, 2.0, size=(60, 5))
    y = 3.0 * X[:, 0] - 2.0 * X[:, 1] + np.sin(2.0 * X[:, 2]) + 0.1 * rng.normal(size=60)
    return X, y
