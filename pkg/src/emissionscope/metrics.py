"""The four evaluation metrics with explicit undefined-value semantics.

R² uses the standard coefficient of determination (deviations of the
actual values about the actual mean).  NRMSE divides by the predicted-value
range by default, with the actual-value range as an option since a constant
predictor makes the literal form degenerate.  Degenerate denominators yield
``None`` (serialized as the string ``undefined``), never NaN and never an
exception, so sweep rows always materialize.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import LengthMismatch, TooFewRows

DENOMINATOR_MODES = ("predicted_range", "actual_range")


@dataclass(frozen=True)
class MetricReport:
    r2: float | None          # None when actual has zero variance
    rmse: float
    mae: float
    nrmse_pct: float | None   # None when the chosen range is zero
    n: int
    denominator_mode: str


def compute_metrics(
    actual: np.ndarray,
    predicted: np.ndarray,
    mode: str = "predicted_range",
) -> MetricReport:
    if mode not in DENOMINATOR_MODES:
        raise ValueError(f"mode must be one of {DENOMINATOR_MODES}, got {mode!r}")
    a = np.asarray(actual, dtype=np.float64)
    p = np.asarray(predicted, dtype=np.float64)
    if a.shape != p.shape or a.ndim != 1:
        raise LengthMismatch(f"actual {a.shape} and predicted {p.shape} differ")
    n = a.shape[0]
    if n < 2:
        raise TooFewRows(f"need at least 2 samples, got {n}")
    if not (np.all(np.isfinite(a)) and np.all(np.isfinite(p))):
        raise ValueError("metrics require finite inputs")

    err = a - p
    rmse = float(np.sqrt(np.mean(err**2)))
    mae = float(np.mean(np.abs(err)))

    ss_tot = float(np.sum((a - a.mean()) ** 2))
    r2 = None if ss_tot == 0.0 else 1.0 - float(np.sum(err**2)) / ss_tot

    ref = p if mode == "predicted_range" else a
    span = float(ref.max() - ref.min())
    nrmse = None if span == 0.0 else rmse / span * 100.0

    return MetricReport(
        r2=r2, rmse=rmse, mae=mae, nrmse_pct=nrmse, n=n, denominator_mode=mode
    )
