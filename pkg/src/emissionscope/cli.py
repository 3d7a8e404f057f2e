"""Command-line frontend: synthesize, build datasets, train, sweep, report.

Exit codes: 0 success, 1 domain error (the module error name is printed
verbatim), 2 usage error.  All randomness flows from ``--seed``; outputs go
to files via write-to-temp-then-rename, so failures leave no partial
artifacts.  ``EMISSIONSCOPE_THREADS`` caps internal parallelism.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass
from pathlib import Path

from .errors import EmissionscopeError, InvalidConfig, MissingChannel
from .experiment import (
    ModelFamily,
    SplitSpec,
    compare_best,
    emit_report,
    forest_convergence,
    load_report_json,
    report_sidecar,
    run_sweep,
)
from .fileio import atomic_write_bytes
from .gases import MODELED_GASES, GasId
from .ingest import derive_nox, parse_inertial_csv, parse_pems_csv
from .metrics import DENOMINATOR_MODES
from .models import (
    ForestConfig,
    MlpConfig,
    TreeConfig,
    fit_forest,
    fit_linear,
    fit_mlp,
    fit_tree,
    model_to_json,
)
from .synth import SynthConfig, write_scenario
from .windowing import (
    ChannelMask,
    LabelPolicy,
    WindowConfig,
    build_dataset,
    dataset_from_csv,
    dataset_sidecar,
    dataset_to_csv,
)

GAS_CHOICES = tuple(g.key for g in MODELED_GASES)
FAMILY_CHOICES = ("lr", "nn", "mlp", "dtr", "rf")

NN_DEFAULT_GRID = ("40,30", "40,30,20", "100,90,80", "200,190,180")
DTR_DEFAULT_LEAVES = (1, 2, 3)
DTR_DEFAULT_PARENTS = (5, 10)
RF_DEFAULT_TREES = (150, 85, 90)


@dataclass(frozen=True)
class Command:
    verb: str
    options: dict

    def canonical_argv(self) -> list[str]:
        """Fully explicit argument list that re-parses to this command."""
        argv = [self.verb]
        for key in sorted(self.options):
            value = self.options[key]
            flag = "--in" if key == "inputs" else "--" + key.replace("_", "-")
            if value is None or value is False:
                continue
            if value is True:
                argv.append(flag)
            elif key == "arch" and isinstance(value, (list, tuple)):
                for item in value:
                    argv.extend([flag, item])
            elif isinstance(value, (list, tuple)):
                argv.append(flag)
                argv.extend(str(v) for v in value)
            else:
                argv.extend([flag, str(value)])
        return argv


def _arch(text: str) -> str:
    """Validate a layer spec like ``100,90,80`` and canonicalize it."""
    try:
        sizes = [int(tok) for tok in text.replace(",", " ").split()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid arch value: {text!r}") from None
    if not sizes or any(s < 1 for s in sizes):
        raise argparse.ArgumentTypeError(f"invalid arch value: {text!r}")
    return ",".join(str(s) for s in sizes)


def _positive_float(text: str) -> float:
    value = float(text)
    if value <= 0:
        raise argparse.ArgumentTypeError(f"must be > 0, got {text}")
    return value


def _nonneg_float(text: str) -> float:
    value = float(text)
    if value < 0:
        raise argparse.ArgumentTypeError(f"must be >= 0, got {text}")
    return value


def _nonneg_int(text: str) -> int:
    value = int(text)
    if value < 0:
        raise argparse.ArgumentTypeError(f"must be >= 0, got {text}")
    return value


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {text}")
    return value


def _add_split_options(p: argparse.ArgumentParser) -> None:
    p.add_argument("--train-frac", type=_positive_float, default=0.7,
                   help="training fraction of the split (default 0.7)")
    p.add_argument("--strategy", choices=("random", "chronological"),
                   default="random", help="split strategy")


def _add_tree_options(p: argparse.ArgumentParser, grid: bool) -> None:
    nargs = "+" if grid else None
    default_leaf = list(DTR_DEFAULT_LEAVES) if grid else 1
    default_parent = list(DTR_DEFAULT_PARENTS) if grid else 10
    p.add_argument("--min-leaf", type=_positive_int, nargs=nargs,
                   default=default_leaf, help="minimum rows per leaf")
    p.add_argument("--min-parent", type=_positive_int, nargs=nargs,
                   default=default_parent, help="minimum rows to split a node")
    p.add_argument("--max-splits", type=_nonneg_int, default=None,
                   help="global split budget (default: training rows - 1)")


def _add_forest_options(p: argparse.ArgumentParser) -> None:
    p.add_argument("--mtry", type=_positive_int, default=None,
                   help="features considered per split (default: all)")
    p.add_argument("--no-bootstrap", action="store_true",
                   help="train every tree on the full training set")


def _add_nn_options(p: argparse.ArgumentParser, grid: bool) -> None:
    if grid:
        p.add_argument("--arch", type=_arch, action="append", default=None,
                       help="hidden layer sizes, e.g. 100,90,80; repeat for a grid "
                            f"(default grid: {' '.join(NN_DEFAULT_GRID)})")
    else:
        p.add_argument("--arch", type=_arch, default="100,90,80",
                       help="hidden layer sizes, e.g. 100,90,80")
    p.add_argument("--lr", type=_positive_float, default=0.01,
                   help="gradient-descent learning rate (default 0.01)")
    p.add_argument("--epochs", type=_nonneg_int, default=1000,
                   help="full-batch epochs (default 1000)")
    p.add_argument("--no-normalize", action="store_true",
                   help="skip min-max input normalization")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="emissionscope",
        description="Inertial-sensor emission regression pipeline.",
    )
    sub = parser.add_subparsers(dest="verb", required=True)

    p = sub.add_parser("synth", help="generate a seeded synthetic scenario")
    p.add_argument("--duration", type=_positive_float, required=True,
                   help="scenario length in seconds")
    p.add_argument("--rate", type=_positive_float, default=100.0,
                   help="inertial sampling rate in Hz (default 100)")
    p.add_argument("--pems-rate", type=_positive_float, default=1.0,
                   help="gas analyzer rate in Hz (default 1)")
    p.add_argument("--noise-std", type=_nonneg_float, default=0.05,
                   help="noise level (default 0.05; 0 = noiseless)")
    p.add_argument("--seed", type=_nonneg_int, default=0)
    p.add_argument("--out", required=True,
                   help="output directory for s1.csv, s2.csv, pems.csv, truth.json")

    p = sub.add_parser("dataset", help="window, featurize, and label streams")
    p.add_argument("--sensors", nargs="+", required=True, metavar="CSV",
                   help="inertial CSV files, primary sensor first")
    p.add_argument("--sensor-ids", nargs="+", default=None,
                   help="sensor identifiers (default: file stems)")
    p.add_argument("--pems", required=True, help="gas analyzer CSV file")
    p.add_argument("--rate", type=_positive_float, default=100.0,
                   help="nominal inertial rate in Hz (default 100)")
    p.add_argument("--window-len", type=_positive_int, default=25,
                   help="samples per window (default 25)")
    p.add_argument("--overlap", type=_nonneg_float, default=0.5,
                   help="window overlap fraction (default 0.5)")
    p.add_argument("--label-mode", choices=("nearest", "window_mean", "interpolate"),
                   default="nearest")
    p.add_argument("--max-gap", type=_positive_float, default=2.0,
                   help="drop windows farther than this from any record (s)")
    p.add_argument("--accel-only", action="store_true",
                   help="use only the five accelerometer features per sensor")
    p.add_argument("--no-nox", action="store_true",
                   help="do not derive the nox channel from no + no2")
    p.add_argument("--out", required=True, help="dataset CSV path (sidecar: .json)")

    p = sub.add_parser("train", help="fit one model on a full dataset")
    p.add_argument("--data", required=True, help="dataset CSV")
    p.add_argument("--gas", choices=GAS_CHOICES, required=True)
    p.add_argument("--family", choices=FAMILY_CHOICES, required=True)
    _add_nn_options(p, grid=False)
    _add_tree_options(p, grid=False)
    _add_forest_options(p)
    p.add_argument("--trees", type=_positive_int, default=100,
                   help="forest size (rf only)")
    p.add_argument("--seed", type=_nonneg_int, default=0)
    p.add_argument("--out", required=True, help="model JSON path")

    p = sub.add_parser("sweep", help="grid-sweep one family on one gas")
    p.add_argument("--data", required=True)
    p.add_argument("--gas", choices=GAS_CHOICES, required=True)
    p.add_argument("--family", choices=FAMILY_CHOICES, required=True)
    _add_nn_options(p, grid=True)
    _add_tree_options(p, grid=True)
    _add_forest_options(p)
    p.add_argument("--trees", type=_positive_int, nargs="+",
                   default=list(RF_DEFAULT_TREES), help="forest sizes (rf grid)")
    _add_split_options(p)
    p.add_argument("--denominator", choices=DENOMINATOR_MODES,
                   default="predicted_range", help="NRMSE range source")
    p.add_argument("--seed", type=_nonneg_int, default=0)
    p.add_argument("--format", choices=("csv", "json"), default="json")
    p.add_argument("--out", required=True,
                   help="report path (audit sidecar: <out>.meta.json)")

    p = sub.add_parser("converge", help="R² versus forest size")
    p.add_argument("--data", required=True)
    p.add_argument("--gas", choices=GAS_CHOICES, required=True)
    p.add_argument("--trees", type=_positive_int, nargs="+", required=True,
                   help="strictly increasing tree counts")
    p.add_argument("--tolerance", type=_positive_float, default=0.005,
                   help="convergence tolerance on R² (default 0.005)")
    _add_tree_options(p, grid=False)
    _add_forest_options(p)
    _add_split_options(p)
    p.add_argument("--seed", type=_nonneg_int, default=0)
    p.add_argument("--format", choices=("csv", "json"), default="json")
    p.add_argument("--out", required=True)

    p = sub.add_parser("compare", help="best-R² gas x family matrix")
    p.add_argument("--in", dest="inputs", nargs="+", required=True,
                   metavar="REPORT_JSON", help="sweep reports to combine")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--out", required=True)

    p = sub.add_parser("report", help="re-serialize a JSON report")
    p.add_argument("--in", dest="inputs", required=True, metavar="REPORT_JSON")
    p.add_argument("--format", choices=("csv", "json"), required=True)
    p.add_argument("--out", required=True)

    return parser


def parse_args(argv=None) -> Command:
    ns = build_parser().parse_args(argv)
    options = vars(ns)
    verb = options.pop("verb")
    if options.get("family") == "mlp":
        options["family"] = "nn"
    if verb == "sweep" and options.get("family") == "nn" and options.get("arch") is None:
        options["arch"] = list(NN_DEFAULT_GRID)
    return Command(verb=verb, options=options)


# --- execution --------------------------------------------------------------


def _hidden_layers(spec: str) -> tuple[int, ...]:
    return tuple(int(tok) for tok in spec.split(","))


def _scalar(value, flag: str, grid_default=None, fallback=None) -> int:
    """Collapse a possibly-list option to one value.

    Sweep parsers declare --min-leaf/--min-parent as grids for the dtr
    family; a forest needs scalars, so an untouched grid default falls back
    to the single-tree default instead.
    """
    if isinstance(value, (list, tuple)):
        if len(value) == 1:
            return value[0]
        if grid_default is not None and list(value) == list(grid_default):
            return fallback
        raise InvalidConfig(f"{flag} takes a single value here, got {value}")
    return value


def _tree_config(opt: dict, seed: int) -> TreeConfig:
    return TreeConfig(
        max_splits=opt.get("max_splits"),
        min_leaf_size=_scalar(opt["min_leaf"], "--min-leaf", DTR_DEFAULT_LEAVES, 1),
        min_parent_size=_scalar(opt["min_parent"], "--min-parent", DTR_DEFAULT_PARENTS, 10),
        seed=seed,
    )


def _forest_config(opt: dict, n_trees: int) -> ForestConfig:
    return ForestConfig(
        n_trees=n_trees,
        tree=_tree_config(opt, seed=opt["seed"]),
        bootstrap=not opt.get("no_bootstrap", False),
        mtry=opt.get("mtry"),
        seed=opt["seed"],
    )


def _load_dataset(path: str):
    return dataset_from_csv(Path(path).read_bytes())


def _execute_synth(opt: dict) -> int:
    cfg = SynthConfig(
        duration_s=opt["duration"],
        rate_hz=opt["rate"],
        pems_rate_hz=opt["pems_rate"],
        noise_std=opt["noise_std"],
        seed=opt["seed"],
    )
    write_scenario(cfg, opt["out"])
    return 0


def _execute_dataset(opt: dict) -> int:
    paths = [Path(p) for p in opt["sensors"]]
    ids = opt["sensor_ids"] or [p.stem for p in paths]
    if len(ids) != len(paths):
        raise InvalidConfig(
            f"--sensor-ids names {len(ids)} sensors but {len(paths)} files given"
        )
    sensors = [
        parse_inertial_csv(path.read_bytes(), sensor_id=sid, rate_hz=opt["rate"])
        for path, sid in zip(paths, ids)
    ]
    emissions = parse_pems_csv(Path(opt["pems"]).read_bytes())
    if not opt["no_nox"]:
        emissions = derive_nox(emissions)
    cfg = WindowConfig(window_len=opt["window_len"], overlap_fraction=opt["overlap"])
    policy = LabelPolicy(mode=opt["label_mode"], max_gap_s=opt["max_gap"])
    mask = ChannelMask(accel_only=opt["accel_only"])
    ds = build_dataset(sensors, emissions, cfg, policy, mask)
    out = Path(opt["out"])
    atomic_write_bytes(out, dataset_to_csv(ds))
    atomic_write_bytes(out.with_suffix(".json"), dataset_sidecar(ds, cfg, policy, mask))
    return 0


def _execute_train(opt: dict) -> int:
    ds = _load_dataset(opt["data"])
    gas = GasId.from_key(opt["gas"])
    if gas not in ds.y:
        raise MissingChannel(f"dataset has no {gas.key} target")
    X, y = ds.X, ds.y[gas]
    family = opt["family"]
    if family == "lr":
        model = fit_linear(X, y)
    elif family == "nn":
        model = fit_mlp(X, y, MlpConfig(
            hidden_layers=_hidden_layers(opt["arch"]),
            learning_rate=opt["lr"],
            epochs=opt["epochs"],
            seed=opt["seed"],
            normalize_inputs=not opt["no_normalize"],
        ))
    elif family == "dtr":
        model = fit_tree(X, y, _tree_config(opt, seed=opt["seed"]))
    else:
        model = fit_forest(X, y, _forest_config(opt, n_trees=opt["trees"]))
    atomic_write_bytes(opt["out"], model_to_json(model))
    return 0


def _sweep_grid(opt: dict):
    family = ModelFamily(opt["family"])
    if family is ModelFamily.LR:
        return family, [None]
    if family is ModelFamily.NN:
        return family, [
            MlpConfig(
                hidden_layers=_hidden_layers(spec),
                learning_rate=opt["lr"],
                epochs=opt["epochs"],
                seed=opt["seed"],
                normalize_inputs=not opt["no_normalize"],
            )
            for spec in opt["arch"] or NN_DEFAULT_GRID
        ]
    if family is ModelFamily.DTR:
        leaves = opt["min_leaf"]
        parents = opt["min_parent"]
        return family, [
            TreeConfig(
                max_splits=opt.get("max_splits"),
                min_leaf_size=leaf,
                min_parent_size=parent,
                seed=opt["seed"],
            )
            for leaf in leaves
            for parent in parents
        ]
    return family, [_forest_config(opt, n_trees=n) for n in opt["trees"]]


def _execute_sweep(opt: dict) -> int:
    ds = _load_dataset(opt["data"])
    family, grid = _sweep_grid(opt)
    spec = SplitSpec(
        train_fraction=opt["train_frac"],
        strategy=opt["strategy"],
        seed=opt["seed"],
    )
    report = run_sweep(
        ds, GasId.from_key(opt["gas"]), family, grid, spec,
        mode=opt["denominator"],
    )
    out = Path(opt["out"])
    atomic_write_bytes(out, emit_report(report, opt["format"]))
    atomic_write_bytes(out.with_name(out.stem + ".meta.json"), report_sidecar(report))
    return 0


def _execute_converge(opt: dict) -> int:
    ds = _load_dataset(opt["data"])
    spec = SplitSpec(
        train_fraction=opt["train_frac"],
        strategy=opt["strategy"],
        seed=opt["seed"],
    )
    curve = forest_convergence(
        ds,
        GasId.from_key(opt["gas"]),
        opt["trees"],
        base=_forest_config(opt, n_trees=opt["trees"][-1]),
        spec=spec,
        tolerance=opt["tolerance"],
    )
    atomic_write_bytes(opt["out"], emit_report(curve, opt["format"]))
    return 0


def _execute_compare(opt: dict) -> int:
    reports = [load_report_json(Path(p).read_bytes()) for p in opt["inputs"]]
    table = compare_best(reports)
    atomic_write_bytes(opt["out"], emit_report(table, opt["format"]))
    return 0


def _execute_report(opt: dict) -> int:
    report = load_report_json(Path(opt["inputs"]).read_bytes())
    atomic_write_bytes(opt["out"], emit_report(report, opt["format"]))
    return 0


_EXECUTORS = {
    "synth": _execute_synth,
    "dataset": _execute_dataset,
    "train": _execute_train,
    "sweep": _execute_sweep,
    "converge": _execute_converge,
    "compare": _execute_compare,
    "report": _execute_report,
}


def execute(cmd: Command) -> int:
    return _EXECUTORS[cmd.verb](cmd.options)


def main(argv=None) -> int:
    try:
        cmd = parse_args(argv)
    except SystemExit as exc:  # argparse has printed usage/help already
        code = exc.code
        return code if isinstance(code, int) else 2
    try:
        return execute(cmd)
    except EmissionscopeError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
