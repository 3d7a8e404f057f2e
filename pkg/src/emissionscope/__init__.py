"""Inertial-sensor to exhaust-emission regression pipeline.

Ingest accelerometer/gyroscope and gas-analyzer CSV streams, window and
featurize the motion data, train four regressor families, and score them
with R², RMSE, MAE, and NRMSE.  A seeded synthetic scenario with known
ground truth stands in for field data.
"""

__version__ = "0.1.0"

from .gases import GasId, Unit
from .ingest import (
    EmissionSeries,
    SensorSeries,
    derive_nox,
    parse_inertial_csv,
    parse_pems_csv,
)
from .metrics import MetricReport, compute_metrics
from .windowing import (
    ChannelMask,
    Dataset,
    LabelPolicy,
    WindowConfig,
    build_dataset,
    extract_features,
    label_windows,
    segment,
)

__all__ = [
    "ChannelMask",
    "Dataset",
    "EmissionSeries",
    "GasId",
    "LabelPolicy",
    "MetricReport",
    "SensorSeries",
    "Unit",
    "WindowConfig",
    "__version__",
    "build_dataset",
    "compute_metrics",
    "derive_nox",
    "extract_features",
    "label_windows",
    "parse_inertial_csv",
    "parse_pems_csv",
    "segment",
]
