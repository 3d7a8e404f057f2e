"""Experimental protocol: 70/30 splits, per-family hyperparameter sweeps,
forest-size convergence, and the cross-family best-model comparison.

Every sweep evaluates all configs against one split computed once per
report; training failures become failed rows rather than aborting, so a
24-config grid always yields 24 rows.  Emitted reports are deterministic:
stable key order and 6-significant-digit numbers.
"""

from __future__ import annotations

import enum
import io
import json
import time
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import (
    EmissionscopeError,
    EmptyInput,
    InvalidConfig,
    MissingChannel,
    TooFewRows,
)
from .gases import GasId
from .metrics import MetricReport, compute_metrics
from .models import ForestConfig, fit_forest, fit_linear, fit_mlp, fit_tree
from .windowing import Dataset


class ModelFamily(enum.Enum):
    LR = "lr"
    NN = "nn"
    DTR = "dtr"
    RF = "rf"


# Column order of the cross-family comparison table.
FAMILY_ORDER = (ModelFamily.NN, ModelFamily.DTR, ModelFamily.RF, ModelFamily.LR)


@dataclass(frozen=True)
class SplitSpec:
    train_fraction: float = 0.7
    strategy: str = "random"  # "random" | "chronological"
    seed: int = 0

    def __post_init__(self):
        if not (0.0 < self.train_fraction < 1.0):
            raise InvalidConfig("train_fraction must be in (0, 1)")
        if self.strategy not in ("random", "chronological"):
            raise InvalidConfig(f"unknown split strategy {self.strategy!r}")


@dataclass(frozen=True)
class SweepRow:
    gas: GasId
    family: ModelFamily
    config: str
    metrics: MetricReport | None
    error: str | None = None
    runtime_s: float = 0.0


@dataclass(frozen=True)
class SweepReport:
    gas: GasId
    family: ModelFamily
    rows: tuple[SweepRow, ...]
    split: SplitSpec
    dataset_fingerprint: str


@dataclass(frozen=True)
class ConvergenceCurve:
    gas: GasId
    points: tuple[tuple[int, float | None], ...]
    selected_n_trees: int
    tolerance: float
    split: SplitSpec
    dataset_fingerprint: str


@dataclass(frozen=True)
class ComparisonTable:
    gases: tuple[GasId, ...]
    families: tuple[ModelFamily, ...]
    best_r2: dict[tuple[GasId, ModelFamily], float | None]
    best_config: dict[tuple[GasId, ModelFamily], str | None] = field(default_factory=dict)


def split_dataset(ds: Dataset, spec: SplitSpec) -> tuple[Dataset, Dataset]:
    """Disjoint, exhaustive train/test partition per the split strategy."""
    n = ds.n_rows
    if n < 2:
        raise TooFewRows(f"need at least 2 rows to split, got {n}")
    n_train = int(np.floor(spec.train_fraction * n + 0.5))
    n_train = min(max(n_train, 1), n - 1)
    if spec.strategy == "random":
        order = np.random.default_rng(spec.seed).permutation(n)
    else:
        order = np.argsort(ds.center_t, kind="stable")
    return ds.take(order[:n_train]), ds.take(order[n_train:])


def _fit_and_predict(family: ModelFamily, config, X_tr, y_tr, X_te):
    if family is ModelFamily.LR:
        return fit_linear(X_tr, y_tr).predict(X_te)
    if family is ModelFamily.NN:
        return fit_mlp(X_tr, y_tr, config).predict(X_te)
    if family is ModelFamily.DTR:
        return fit_tree(X_tr, y_tr, config).predict(X_te)
    if family is ModelFamily.RF:
        return fit_forest(X_tr, y_tr, config).predict(X_te)
    raise InvalidConfig(f"unknown family {family!r}")


def describe_config(family: ModelFamily, config) -> str:
    """Bracketed row descriptor for report tables, e.g. "[100 90 80]"."""
    if family is ModelFamily.LR:
        return "lr"
    if family is ModelFamily.NN:
        return "[" + " ".join(str(h) for h in config.hidden_layers) + "]"
    if family is ModelFamily.DTR:
        return f"[{config.min_leaf_size} {config.min_parent_size}]"
    if family is ModelFamily.RF:
        return str(config.n_trees)
    raise InvalidConfig(f"unknown family {family!r}")


def run_sweep(
    ds: Dataset,
    gas: GasId,
    family: ModelFamily,
    grid,
    spec: SplitSpec | None = None,
    mode: str = "predicted_range",
) -> SweepReport:
    """Fit and score every config in the grid on one shared split."""
    grid = list(grid)
    if not grid:
        raise EmptyInput("sweep grid is empty")
    if gas not in ds.y:
        raise MissingChannel(f"dataset has no {gas.key} target")
    spec = spec or SplitSpec()
    train, test = split_dataset(ds, spec)
    y_tr = train.y[gas]
    y_te = test.y[gas]

    rows = []
    for config in grid:
        started = time.perf_counter()
        desc = describe_config(family, config)
        try:
            preds = _fit_and_predict(family, config, train.X, y_tr, test.X)
            report = compute_metrics(y_te, preds, mode=mode)
            rows.append(
                SweepRow(
                    gas=gas,
                    family=family,
                    config=desc,
                    metrics=report,
                    runtime_s=time.perf_counter() - started,
                )
            )
        except EmissionscopeError as exc:
            rows.append(
                SweepRow(
                    gas=gas,
                    family=family,
                    config=desc,
                    metrics=None,
                    error=f"{type(exc).__name__}: {exc}",
                    runtime_s=time.perf_counter() - started,
                )
            )
    return SweepReport(
        gas=gas,
        family=family,
        rows=tuple(rows),
        split=spec,
        dataset_fingerprint=ds.fingerprint(),
    )


def forest_convergence(
    ds: Dataset,
    gas: GasId,
    tree_counts,
    base: ForestConfig | None = None,
    spec: SplitSpec | None = None,
    tolerance: float = 0.005,
) -> ConvergenceCurve:
    """R² against ensemble size on one fixed split.

    Because tree i is seeded by (master seed, i), a k-tree forest is a
    prefix of the largest one, so all counts are evaluated from a single
    fit.  Selects the smallest count whose R² is within ``tolerance`` of
    the largest count's.
    """
    counts = [int(c) for c in tree_counts]
    if not counts:
        raise EmptyInput("tree_counts is empty")
    if any(b <= a for a, b in zip(counts, counts[1:])):
        raise InvalidConfig("tree_counts must be strictly increasing")
    if gas not in ds.y:
        raise MissingChannel(f"dataset has no {gas.key} target")
    base = base or ForestConfig()
    spec = spec or SplitSpec()
    train, test = split_dataset(ds, spec)

    full = fit_forest(train.X, train.y[gas], replace(base, n_trees=counts[-1]))
    acc = np.zeros(test.X.shape[0])
    per_count_r2: list[float | None] = []
    want = set(counts)
    for i, tree in enumerate(full.trees, start=1):
        acc += (tree.predict(test.X) - acc) / i
        if i in want:
            report = compute_metrics(test.y[gas], acc.copy())
            per_count_r2.append(report.r2)

    final = per_count_r2[-1]
    selected = counts[-1]
    if final is not None:
        for count, r2 in zip(counts, per_count_r2):
            if r2 is not None and abs(r2 - final) <= tolerance:
                selected = count
                break
    return ConvergenceCurve(
        gas=gas,
        points=tuple(zip(counts, per_count_r2)),
        selected_n_trees=selected,
        tolerance=tolerance,
        split=spec,
        dataset_fingerprint=ds.fingerprint(),
    )


def compare_best(reports) -> ComparisonTable:
    """Best R² per (gas, family), arranged as a gas x family matrix."""
    reports = list(reports)
    if not reports:
        raise EmptyInput("no sweep reports to compare")
    best_r2: dict[tuple[GasId, ModelFamily], float | None] = {}
    best_config: dict[tuple[GasId, ModelFamily], str | None] = {}
    gases: list[GasId] = []
    families: list[ModelFamily] = []
    for report in reports:
        key = (report.gas, report.family)
        if report.gas not in gases:
            gases.append(report.gas)
        if report.family not in families:
            families.append(report.family)
        top_r2, top_cfg = None, None
        for row in report.rows:
            if row.metrics is None or row.metrics.r2 is None:
                continue
            if top_r2 is None or row.metrics.r2 > top_r2:
                top_r2, top_cfg = row.metrics.r2, row.config
        best_r2[key] = top_r2
        best_config[key] = top_cfg
    families.sort(key=FAMILY_ORDER.index)
    return ComparisonTable(
        gases=tuple(gases),
        families=tuple(families),
        best_r2=best_r2,
        best_config=best_config,
    )


# --- deterministic serialization -------------------------------------------


def _fmt(v: float | None) -> str:
    return "undefined" if v is None else f"{v:.6g}"


def _jnum(v: float | None):
    return "undefined" if v is None else float(f"{v:.6g}")


def _row_cells(row: SweepRow) -> list[str]:
    m = row.metrics
    if m is None:
        return [row.config, "undefined", "undefined", "undefined", "undefined"]
    return [row.config, _fmt(m.r2), _fmt(m.rmse), _fmt(m.mae), _fmt(m.nrmse_pct)]


def _split_doc(spec: SplitSpec) -> dict:
    return {
        "train_fraction": spec.train_fraction,
        "strategy": spec.strategy,
        "seed": spec.seed,
    }


def emit_report(report, fmt: str = "csv") -> bytes:
    """Serialize a sweep report, comparison table, or convergence curve.

    Output is deterministic byte-for-byte: numbers carry 6 significant
    digits and undefined metrics render as the literal ``undefined``.
    """
    if fmt not in ("csv", "json"):
        raise InvalidConfig(f"format must be csv or json, got {fmt!r}")
    if isinstance(report, SweepReport):
        if fmt == "csv":
            out = io.StringIO()
            out.write("config,r2,rmse,mae,nrmse_pct\n")
            for row in report.rows:
                out.write(",".join(_row_cells(row)) + "\n")
            return out.getvalue().encode("utf-8")
        doc = {
            "kind": "sweep",
            "gas": report.gas.key,
            "family": report.family.value,
            "split": _split_doc(report.split),
            "dataset_fingerprint": report.dataset_fingerprint,
            "rows": [
                {
                    "config": row.config,
                    "r2": _jnum(row.metrics.r2) if row.metrics else "undefined",
                    "rmse": _jnum(row.metrics.rmse) if row.metrics else "undefined",
                    "mae": _jnum(row.metrics.mae) if row.metrics else "undefined",
                    "nrmse_pct": _jnum(row.metrics.nrmse_pct) if row.metrics else "undefined",
                    "error": row.error,
                }
                for row in report.rows
            ],
        }
    elif isinstance(report, ComparisonTable):
        if fmt == "csv":
            out = io.StringIO()
            out.write("gas," + ",".join(f.value for f in report.families) + "\n")
            for gas in report.gases:
                cells = [
                    _fmt(report.best_r2.get((gas, f))) for f in report.families
                ]
                out.write(gas.key + "," + ",".join(cells) + "\n")
            return out.getvalue().encode("utf-8")
        doc = {
            "kind": "comparison",
            "families": [f.value for f in report.families],
            "gases": [g.key for g in report.gases],
            "best_r2": {
                g.key: {
                    f.value: _jnum(report.best_r2.get((g, f)))
                    for f in report.families
                }
                for g in report.gases
            },
            "best_config": {
                g.key: {
                    f.value: report.best_config.get((g, f))
                    for f in report.families
                }
                for g in report.gases
            },
        }
    elif isinstance(report, ConvergenceCurve):
        if fmt == "csv":
            out = io.StringIO()
            out.write("n_trees,r2\n")
            for count, r2 in report.points:
                out.write(f"{count},{_fmt(r2)}\n")
            return out.getvalue().encode("utf-8")
        doc = {
            "kind": "convergence",
            "gas": report.gas.key,
            "points": [[c, _jnum(r2)] for c, r2 in report.points],
            "selected_n_trees": report.selected_n_trees,
            "tolerance": report.tolerance,
            "split": _split_doc(report.split),
            "dataset_fingerprint": report.dataset_fingerprint,
        }
    else:
        raise InvalidConfig(f"cannot emit object of type {type(report).__name__}")
    return json.dumps(doc, sort_keys=True, indent=2).encode("utf-8")


def report_sidecar(report: SweepReport) -> bytes:
    """Audit sidecar: fingerprint, split, library version, per-row runtimes.

    Runtimes are wall clock, so this file sits outside the byte-identical
    determinism contract that covers emit_report output.
    """
    from . import __version__ as library_version

    doc = {
        "kind": "sweep-sidecar",
        "library_version": library_version,
        "gas": report.gas.key,
        "family": report.family.value,
        "split": _split_doc(report.split),
        "dataset_fingerprint": report.dataset_fingerprint,
        "note": (
            "random splits of 50%-overlap windows share samples across "
            "train and test; use the chronological strategy for leakage-free "
            "evaluation"
        ),
        "rows": [
            {"config": row.config, "runtime_s": row.runtime_s, "error": row.error}
            for row in report.rows
        ],
    }
    return json.dumps(doc, sort_keys=True, indent=2).encode("utf-8")


def load_report_json(data: bytes | str) -> SweepReport | ConvergenceCurve | ComparisonTable:
    """Rebuild a report object from emit_report's JSON form."""
    doc = json.loads(data)
    kind = doc.get("kind")

    def _num(v):
        return None if v == "undefined" or v is None else float(v)

    if kind == "sweep":
        split = SplitSpec(**doc["split"])
        gas = GasId.from_key(doc["gas"])
        family = ModelFamily(doc["family"])
        rows = []
        for r in doc["rows"]:
            if r.get("error") or r["rmse"] == "undefined":
                metrics = None
            else:
                metrics = MetricReport(
                    r2=_num(r["r2"]),
                    rmse=float(r["rmse"]),
                    mae=float(r["mae"]),
                    nrmse_pct=_num(r["nrmse_pct"]),
                    n=0,
                    denominator_mode="predicted_range",
                )
            rows.append(
                SweepRow(
                    gas=gas,
                    family=family,
                    config=r["config"],
                    metrics=metrics,
                    error=r.get("error"),
                )
            )
        return SweepReport(
            gas=gas,
            family=family,
            rows=tuple(rows),
            split=split,
            dataset_fingerprint=doc["dataset_fingerprint"],
        )
    if kind == "convergence":
        return ConvergenceCurve(
            gas=GasId.from_key(doc["gas"]),
            points=tuple((int(c), _num(r2)) for c, r2 in doc["points"]),
            selected_n_trees=int(doc["selected_n_trees"]),
            tolerance=float(doc["tolerance"]),
            split=SplitSpec(**doc["split"]),
            dataset_fingerprint=doc["dataset_fingerprint"],
        )
    if kind == "comparison":
        gases = tuple(GasId.from_key(g) for g in doc["gases"])
        families = tuple(ModelFamily(f) for f in doc["families"])
        best_r2 = {
            (g, f): _num(doc["best_r2"][g.key][f.value])
            for g in gases
            for f in families
        }
        best_config = {
            (g, f): doc.get("best_config", {}).get(g.key, {}).get(f.value)
            for g in gases
            for f in families
        }
        return ComparisonTable(
            gases=gases, families=families, best_r2=best_r2, best_config=best_config
        )
    raise InvalidConfig(f"unknown report kind {kind!r}")
