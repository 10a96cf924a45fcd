"""Replicated experiment harness and report writers.

Two studies are provided: a synthetic node-recovery study (replicated
datasets from a random teacher network, comparing the two-stage selection
against its first stage alone) and a real-data study (repeated train/test
splits of a CSV dataset, optionally including the unpenalized full network
as a baseline).  Each replicate is a pure function of a per-replicate seed
derived from the master seed, so a work pool cannot change any result, and
every summary statistic is recomputed from the written results.csv rows
rather than from in-memory state.
"""

from __future__ import annotations

import csv
import dataclasses
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import rng
from .datasets import (
    SimSpec,
    SplitSpec,
    load_csv,
    save_csv,
    simulate_dataset,
    split_standardize,
)
from .figures import emit_error_bars_svg, emit_histogram_svg
from .network import Dataset, predict
from .optimizer import TrainConfig, prox_gradient_fit, random_init, write_objective_trace_csv
from .penalty import PenaltySpec
from .selection import (
    DEFAULT_REG_GRID,
    GridSpec,
    PipelineError,
    two_step_fit,
    write_aic_trace_csv,
)
from .structure import distance_to_embedded_reference

__all__ = [
    "ExperimentConfig",
    "DataSource",
    "ConfigError",
    "AllReplicatesFailedError",
    "MODES",
    "config_from_dict",
    "config_to_dict",
    "cmd_simulate",
    "cmd_fit",
    "cmd_experiment_sim",
    "cmd_experiment_real",
    "cmd_report",
]

MODES = ("simulate", "fit", "experiment_sim", "experiment_real", "report")

# grid used by the real-data study at full scale
FULL_REAL_GRID = (0.1, 0.3, 0.5, 0.7, 1.0)


class ConfigError(ValueError):
    """The configuration file or flags do not form a valid experiment setup."""


class AllReplicatesFailedError(RuntimeError):
    """No replicate produced a result; reports beyond results.csv are impossible."""


@dataclass(frozen=True)
class DataSource:
    csv: str
    target: str


@dataclass(frozen=True)
class ExperimentConfig:
    mode: str
    seed: int
    replicates: int
    H: int
    include_erm: bool
    output_dir: str
    threads: int
    sim: SimSpec
    grids: GridSpec
    train: TrainConfig
    split: SplitSpec
    data: DataSource | None

    def __post_init__(self):
        if self.mode not in MODES:
            raise ConfigError(f"unknown mode {self.mode!r}")
        if self.replicates < 1:
            raise ConfigError("replicates must be at least 1")
        if self.H < 1:
            raise ConfigError("H must be at least 1")
        if self.threads < 1:
            raise ConfigError("threads must be at least 1")
        uses_sim = self.mode == "experiment_sim" or (self.mode == "fit" and self.data is None)
        if uses_sim and self.H < self.sim.h_star:
            raise ConfigError(
                f"oversized width H={self.H} must be at least the teacher's h_star={self.sim.h_star}"
            )
        if self.mode == "experiment_real" and self.data is None:
            raise ConfigError("experiment_real needs a data section with csv path and target")


def _defaults(mode: str, full: bool) -> dict:
    base = {
        "seed": 0,
        "replicates": 20,
        "H": 8,
        "include_erm": False,
        "output_dir": "out",
        "threads": 1,
        "sim": {"d": 5, "h_star": 3, "n": 2000, "sigma2": 1.0},
        "grids": {
            "gl_grid": list(DEFAULT_REG_GRID),
            "agl_grid": list(DEFAULT_REG_GRID),
            "gamma": 2.0,
        },
        "train": {"epochs": 10000, "learning_rate": 0.01, "box_w": None, "rel_tol": 1e-9},
        "split": {"test_fraction": 0.25},
        "data": None,
    }
    if mode == "experiment_real":
        base["replicates"] = 10
        base["H"] = 10
        base["include_erm"] = True
    if full:
        base["train"]["rel_tol"] = 0.0
        if mode in ("simulate", "fit", "experiment_sim"):
            base["sim"] = {"d": 5, "h_star": 10, "n": 5000, "sigma2": 1.0}
            base["H"] = 20
            base["replicates"] = 100
        if mode == "experiment_real":
            base["replicates"] = 50
            base["H"] = 50
            base["grids"]["gl_grid"] = list(FULL_REAL_GRID)
            base["grids"]["agl_grid"] = list(FULL_REAL_GRID)
    return base


def _merge_strict(base: dict, override: dict, section: str = "") -> None:
    for key, value in override.items():
        where = f"{section}.{key}" if section else key
        if key not in base:
            raise ConfigError(f"unknown config key {where!r}")
        if isinstance(base[key], dict) and base[key] is not None:
            if not isinstance(value, dict):
                raise ConfigError(f"config key {where!r} must be an object")
            _merge_strict(base[key], value, where)
        elif key == "data":
            if value is not None and not isinstance(value, dict):
                raise ConfigError("config key 'data' must be an object or null")
            base[key] = value
        else:
            base[key] = value


def config_from_dict(
    mode: str,
    file_obj: dict | None = None,
    full: bool = False,
    seed: int | None = None,
    output_dir: str | None = None,
    threads: int | None = None,
) -> ExperimentConfig:
    """Assemble a config: mode defaults, then file values, then flag overrides."""
    if mode not in MODES:
        raise ConfigError(f"unknown mode {mode!r}")
    merged = _defaults(mode, full)
    if file_obj is not None:
        if not isinstance(file_obj, dict):
            raise ConfigError("config file must hold a JSON object")
        file_obj = dict(file_obj)
        file_mode = file_obj.pop("mode", None)
        if file_mode is not None and file_mode != mode:
            raise ConfigError(f"config declares mode {file_mode!r} but {mode!r} was invoked")
        _merge_strict(merged, file_obj)
    if seed is not None:
        merged["seed"] = seed
    if output_dir is not None:
        merged["output_dir"] = str(output_dir)
    if threads is not None:
        merged["threads"] = threads

    data = merged["data"]
    if data is not None:
        extra = set(data) - {"csv", "target"}
        if extra:
            raise ConfigError(f"unknown keys in data section: {sorted(extra)}")
        if "csv" not in data or "target" not in data:
            raise ConfigError("data section needs both 'csv' and 'target'")
        data = DataSource(csv=str(data["csv"]), target=str(data["target"]))
    try:
        return ExperimentConfig(
            mode=mode,
            seed=int(merged["seed"]),
            replicates=int(merged["replicates"]),
            H=int(merged["H"]),
            include_erm=bool(merged["include_erm"]),
            output_dir=str(merged["output_dir"]),
            threads=int(merged["threads"]),
            sim=SimSpec(
                d=int(merged["sim"]["d"]),
                h_star=int(merged["sim"]["h_star"]),
                n=int(merged["sim"]["n"]),
                sigma2=float(merged["sim"]["sigma2"]),
            ),
            grids=GridSpec(
                gl_grid=tuple(merged["grids"]["gl_grid"]),
                agl_grid=tuple(merged["grids"]["agl_grid"]),
                gamma=float(merged["grids"]["gamma"]),
            ),
            train=TrainConfig(
                epochs=int(merged["train"]["epochs"]),
                learning_rate=float(merged["train"]["learning_rate"]),
                box_w=None if merged["train"]["box_w"] is None else float(merged["train"]["box_w"]),
                rel_tol=float(merged["train"]["rel_tol"]),
            ),
            split=SplitSpec(test_fraction=float(merged["split"]["test_fraction"])),
            data=data,
        )
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc


def config_to_dict(cfg: ExperimentConfig) -> dict:
    return {
        "mode": cfg.mode,
        "seed": cfg.seed,
        "replicates": cfg.replicates,
        "H": cfg.H,
        "include_erm": cfg.include_erm,
        "output_dir": cfg.output_dir,
        "threads": cfg.threads,
        "sim": {
            "d": cfg.sim.d,
            "h_star": cfg.sim.h_star,
            "n": cfg.sim.n,
            "sigma2": cfg.sim.sigma2,
        },
        "grids": {
            "gl_grid": list(cfg.grids.gl_grid),
            "agl_grid": list(cfg.grids.agl_grid),
            "gamma": cfg.grids.gamma,
        },
        "train": {
            "epochs": cfg.train.epochs,
            "learning_rate": cfg.train.learning_rate,
            "box_w": cfg.train.box_w,
            "rel_tol": cfg.train.rel_tol,
        },
        "split": {"test_fraction": cfg.split.test_fraction},
        "data": None if cfg.data is None else {"csv": cfg.data.csv, "target": cfg.data.target},
    }


def _map_indices(fn, count: int, threads: int) -> list:
    if threads <= 1:
        return [fn(i) for i in range(count)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, range(count)))


def _out_dir(cfg: ExperimentConfig) -> Path:
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write_rows(path: Path, columns: list[str], rows: list[dict]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([row.get(col, "") for col in columns])


def _write_json(path: Path, obj: dict) -> None:
    path.write_text(json.dumps(obj, indent=2) + "\n")


def _node_counts(values: list[int]) -> dict[str, int]:
    out: dict[str, int] = {}
    for value in sorted(set(values)):
        out[str(value)] = values.count(value)
    return out


def _histogram_input(rows: list[dict]) -> dict[str, dict[int, int]]:
    gl = [int(r["gl_nodes"]) for r in rows]
    agl = [int(r["agl_nodes"]) for r in rows]
    return {
        "group_lasso": {v: gl.count(v) for v in sorted(set(gl))},
        "adaptive": {v: agl.count(v) for v in sorted(set(agl))},
    }


# ---------------------------------------------------------------------------
# synthetic study


_SIM_COLUMNS = [
    "replicate",
    "seed",
    "status",
    "zeta",
    "lambda",
    "gl_nodes",
    "agl_nodes",
    "gl_distance",
    "agl_distance",
    "gl_risk",
    "agl_risk",
    "agl_minimal",
]


def _run_sim_replicate(cfg: ExperimentConfig, index: int) -> dict:
    seed = rng.derive_seed(cfg.seed, index)
    row = {"replicate": index, "seed": seed}
    try:
        data, truth = simulate_dataset(dataclasses.replace(cfg.sim, seed=seed))
        result = two_step_fit(data, cfg.H, cfg.grids, dataclasses.replace(cfg.train, seed=seed))
        gl_fit = result.gl_choice.fit
        agl_fit = result.agl_choice.fit
        row.update(
            {
                "status": "ok",
                "zeta": repr(result.gl_choice.reg),
                "lambda": repr(result.agl_choice.reg),
                "gl_nodes": gl_fit.nonzero_nodes,
                "agl_nodes": result.selected_nodes,
                "gl_distance": repr(distance_to_embedded_reference(gl_fit.params, truth)),
                "agl_distance": repr(distance_to_embedded_reference(agl_fit.params, truth)),
                "gl_risk": repr(gl_fit.final_risk),
                "agl_risk": repr(agl_fit.final_risk),
                "agl_minimal": "true" if result.minimality.minimal else "false",
            }
        )
    except Exception as exc:
        row["status"] = f"failed: {exc}"
    return row


def _sim_summary(cfg: ExperimentConfig, rows: list[dict]) -> dict:
    ok = [r for r in rows if r["status"] == "ok"]
    summary = {
        "mode": "experiment_sim",
        "replicates": len(rows),
        "failed": len(rows) - len(ok),
        "agl_node_counts": _node_counts([int(r["agl_nodes"]) for r in ok]),
        "gl_node_counts": _node_counts([int(r["gl_nodes"]) for r in ok]),
        "agl_median_nodes": float(np.median([int(r["agl_nodes"]) for r in ok])),
        "gl_median_nodes": float(np.median([int(r["gl_nodes"]) for r in ok])),
        "agl_median_distance": float(np.median([float(r["agl_distance"]) for r in ok])),
        "gl_median_distance": float(np.median([float(r["gl_distance"]) for r in ok])),
        "agl_median_risk": float(np.median([float(r["agl_risk"]) for r in ok])),
        "gl_median_risk": float(np.median([float(r["gl_risk"]) for r in ok])),
        "config": config_to_dict(cfg),
    }
    return summary


def cmd_experiment_sim(cfg: ExperimentConfig) -> list[Path]:
    """Run the replicated synthetic study and write its report files."""
    out = _out_dir(cfg)
    rows = _map_indices(lambda i: _run_sim_replicate(cfg, i), cfg.replicates, cfg.threads)
    results = out / "results.csv"
    _write_rows(results, _SIM_COLUMNS, rows)
    ok = [r for r in rows if r["status"] == "ok"]
    if not ok:
        raise AllReplicatesFailedError(f"all {len(rows)} replicates failed; see {results}")
    summary = out / "summary.json"
    _write_json(summary, _sim_summary(cfg, rows))
    histogram = out / "histogram.svg"
    emit_histogram_svg(_histogram_input(ok), histogram)
    return [results, summary, histogram]


# ---------------------------------------------------------------------------
# real-data study


_REAL_COLUMNS = [
    "split",
    "seed",
    "status",
    "zeta",
    "lambda",
    "gl_nodes",
    "agl_nodes",
    "initial_train_err",
    "agl_train_err",
    "agl_test_err",
    "gl_train_err",
    "gl_test_err",
    "erm_train_err",
    "erm_test_err",
    "agl_minimal",
]


def _run_real_split(cfg: ExperimentConfig, data_raw: Dataset, index: int) -> dict:
    seed = rng.derive_seed(cfg.seed, index)
    row = {"split": index, "seed": seed}
    try:
        train_std, test_std, stats = split_standardize(
            data_raw, dataclasses.replace(cfg.split, seed=seed)
        )
        train_cfg = dataclasses.replace(cfg.train, seed=seed)

        def raw_scale_mse(params, data_std: Dataset) -> float:
            pred = stats.invert_targets(predict(params, data_std.X))
            actual = stats.invert_targets(data_std.Y)
            res = pred - actual
            return float(res @ res) / data_std.n_samples

        result = two_step_fit(train_std, cfg.H, cfg.grids, train_cfg)
        init = random_init(cfg.H, train_std.n_features, seed)
        row.update(
            {
                "status": "ok",
                "zeta": repr(result.gl_choice.reg),
                "lambda": repr(result.agl_choice.reg),
                "gl_nodes": result.gl_choice.fit.nonzero_nodes,
                "agl_nodes": result.selected_nodes,
                "initial_train_err": repr(raw_scale_mse(init, train_std)),
                "agl_train_err": repr(raw_scale_mse(result.agl_choice.fit.params, train_std)),
                "agl_test_err": repr(raw_scale_mse(result.agl_choice.fit.params, test_std)),
                "gl_train_err": repr(raw_scale_mse(result.gl_choice.fit.params, train_std)),
                "gl_test_err": repr(raw_scale_mse(result.gl_choice.fit.params, test_std)),
                "agl_minimal": "true" if result.minimality.minimal else "false",
            }
        )
        if cfg.include_erm:
            erm = prox_gradient_fit(
                train_std, init, PenaltySpec.unpenalized(cfg.H), train_cfg
            )
            row["erm_train_err"] = repr(raw_scale_mse(erm.params, train_std))
            row["erm_test_err"] = repr(raw_scale_mse(erm.params, test_std))
    except Exception as exc:
        row["status"] = f"failed: {exc}"
    return row


def _real_summary(cfg: ExperimentConfig, rows: list[dict]) -> dict:
    ok = [r for r in rows if r["status"] == "ok"]
    mean_errors = {
        "group_lasso": {
            "train": float(np.mean([float(r["gl_train_err"]) for r in ok])),
            "test": float(np.mean([float(r["gl_test_err"]) for r in ok])),
        },
        "adaptive": {
            "train": float(np.mean([float(r["agl_train_err"]) for r in ok])),
            "test": float(np.mean([float(r["agl_test_err"]) for r in ok])),
        },
    }
    with_erm = [r for r in ok if r.get("erm_train_err", "") != ""]
    if with_erm:
        mean_errors["erm"] = {
            "train": float(np.mean([float(r["erm_train_err"]) for r in with_erm])),
            "test": float(np.mean([float(r["erm_test_err"]) for r in with_erm])),
        }
    return {
        "mode": "experiment_real",
        "replicates": len(rows),
        "failed": len(rows) - len(ok),
        "agl_node_counts": _node_counts([int(r["agl_nodes"]) for r in ok]),
        "gl_node_counts": _node_counts([int(r["gl_nodes"]) for r in ok]),
        "agl_median_nodes": float(np.median([int(r["agl_nodes"]) for r in ok])),
        "gl_median_nodes": float(np.median([int(r["gl_nodes"]) for r in ok])),
        "mean_errors": mean_errors,
        "standardized": True,
        "config": config_to_dict(cfg),
    }


def cmd_experiment_real(cfg: ExperimentConfig) -> list[Path]:
    """Run the repeated-split real-data study and write its report files."""
    data_raw = load_csv(cfg.data.csv, cfg.data.target)
    out = _out_dir(cfg)
    rows = _map_indices(
        lambda i: _run_real_split(cfg, data_raw, i), cfg.replicates, cfg.threads
    )
    results = out / "results.csv"
    _write_rows(results, _REAL_COLUMNS, rows)
    ok = [r for r in rows if r["status"] == "ok"]
    if not ok:
        raise AllReplicatesFailedError(f"all {len(rows)} splits failed; see {results}")
    summary_obj = _real_summary(cfg, rows)
    summary = out / "summary.json"
    _write_json(summary, summary_obj)
    nodes_hist = out / "nodes_hist.svg"
    emit_histogram_svg(_histogram_input(ok), nodes_hist)
    errors_fig = out / "errors.svg"
    emit_error_bars_svg(summary_obj["mean_errors"], errors_fig)
    return [results, summary, nodes_hist, errors_fig]


# ---------------------------------------------------------------------------
# single-shot commands


def cmd_simulate(cfg: ExperimentConfig) -> list[Path]:
    """Write one synthetic dataset as CSV plus the generating network sidecar."""
    out = _out_dir(cfg)
    data, truth = simulate_dataset(dataclasses.replace(cfg.sim, seed=cfg.seed))
    dataset = out / "dataset.csv"
    save_csv(data, dataset, true_params=truth)
    return [dataset, dataset.with_suffix(".truth.json")]


def cmd_fit(cfg: ExperimentConfig) -> list[Path]:
    """Fit one dataset (from the data section, or simulated) and write the
    selection report with its AIC and objective traces."""
    if cfg.data is not None:
        data = load_csv(cfg.data.csv, cfg.data.target)
    else:
        data, _ = simulate_dataset(dataclasses.replace(cfg.sim, seed=cfg.seed))
    out = _out_dir(cfg)
    result = two_step_fit(data, cfg.H, cfg.grids, dataclasses.replace(cfg.train, seed=cfg.seed))
    selection = out / "selection.json"
    _write_json(selection, result.to_dict())
    aic_trace = out / "aic_trace.csv"
    write_aic_trace_csv(result, aic_trace)
    gl_trace = out / "gl_objective_trace.csv"
    write_objective_trace_csv(result.gl_choice.fit, gl_trace)
    agl_trace = out / "agl_objective_trace.csv"
    write_objective_trace_csv(result.agl_choice.fit, agl_trace)
    return [selection, aic_trace, gl_trace, agl_trace]


def cmd_report(cfg: ExperimentConfig) -> list[Path]:
    """Rebuild summary.json and the figures from an existing results.csv.

    All statistics and figures are functions of the stored rows alone; the
    config block embedded in the rebuilt summary records this report
    invocation, not the run that produced the rows.
    """
    out = Path(cfg.output_dir)
    results = out / "results.csv"
    if not results.exists():
        raise FileNotFoundError(f"no results.csv in {out}")
    with open(results, newline="") as fh:
        reader = csv.DictReader(fh)
        rows = list(reader)
        columns = reader.fieldnames or []
    if not rows:
        raise AllReplicatesFailedError(f"{results} holds no replicate rows")
    ok = [r for r in rows if r["status"] == "ok"]
    if not ok:
        raise AllReplicatesFailedError(f"all rows in {results} are failures")

    written = [results]
    summary = out / "summary.json"
    if "split" in columns:
        summary_obj = _real_summary(cfg, rows)
        _write_json(summary, summary_obj)
        nodes_hist = out / "nodes_hist.svg"
        emit_histogram_svg(_histogram_input(ok), nodes_hist)
        errors_fig = out / "errors.svg"
        emit_error_bars_svg(summary_obj["mean_errors"], errors_fig)
        written += [summary, nodes_hist, errors_fig]
    else:
        _write_json(summary, _sim_summary(cfg, rows))
        histogram = out / "histogram.svg"
        emit_histogram_svg(_histogram_input(ok), histogram)
        written += [summary, histogram]
    return written
