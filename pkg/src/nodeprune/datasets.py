"""Synthetic regression data from a random minimal tanh network, CSV ingestion
with strict validation, and seeded train/test splitting with standardization.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import rng
from .network import Dataset, NetworkParams, predict, to_dict as params_to_dict
from .structure import StructureTolerances, check_minimal

__all__ = [
    "SimSpec",
    "SplitSpec",
    "Standardizer",
    "CsvFormatError",
    "UnknownTargetError",
    "simulate_dataset",
    "load_csv",
    "save_csv",
    "split_standardize",
]

# stream tags under one seed; see the registry note in rng.py
_PARAMS_STREAM = 0
_INPUTS_STREAM = 1
_NOISE_STREAM = 2
_SPLIT_STREAM = 4

# training-column spread below this (relative to the mean's size) counts as constant
_CONST_COL_RTOL = 1e-12


class CsvFormatError(ValueError):
    """The file is not a fully numeric CSV of the expected shape."""


class UnknownTargetError(KeyError):
    """The requested target column is not in the header."""


@dataclass(frozen=True)
class SimSpec:
    """Design of one synthetic dataset: a random H_star-node teacher network
    on d standard-normal features, with N(0, sigma2) output noise."""

    d: int
    h_star: int
    n: int
    sigma2: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if self.d < 1 or self.h_star < 1 or self.n < 1:
            raise ValueError("d, h_star, and n must be positive")
        if self.sigma2 < 0:
            raise ValueError("noise variance must be nonnegative")


@dataclass(frozen=True)
class SplitSpec:
    test_fraction: float = 0.25
    seed: int = 0

    def __post_init__(self):
        if not 0.0 < self.test_fraction < 1.0:
            raise ValueError("test_fraction must lie strictly between 0 and 1")


@dataclass(frozen=True)
class Standardizer:
    """Training-split means and scales for features and target.

    Stored so fits run on standardized data while errors are reported on the
    original scale.  `warnings` lists any constant training columns whose
    scale was pinned at 1.
    """

    x_mean: np.ndarray
    x_scale: np.ndarray
    y_mean: float
    y_scale: float
    warnings: tuple[str, ...] = ()

    def __post_init__(self):
        for name in ("x_mean", "x_scale"):
            arr = np.array(getattr(self, name), dtype=float)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    def transform(self, data: Dataset) -> Dataset:
        return Dataset(
            X=(data.X - self.x_mean) / self.x_scale,
            Y=(data.Y - self.y_mean) / self.y_scale,
        )

    def invert_targets(self, y_standardized) -> np.ndarray:
        """Map standardized targets or predictions back to the original scale."""
        return np.asarray(y_standardized, dtype=float) * self.y_scale + self.y_mean

    def to_dict(self) -> dict:
        return {
            "x_mean": self.x_mean.tolist(),
            "x_scale": self.x_scale.tolist(),
            "y_mean": self.y_mean,
            "y_scale": self.y_scale,
            "warnings": list(self.warnings),
        }


def simulate_dataset(spec: SimSpec) -> tuple[Dataset, NetworkParams]:
    """Draw a teacher network and a noisy sample of its outputs.

    All teacher entries are i.i.d. N(0,1); a draw failing the minimality check
    is discarded and redrawn from the next attempt's stream (a probability-0
    event for continuous draws, so in practice the first attempt wins).  The
    result is a pure function of the seed.
    """
    tol = StructureTolerances()
    for attempt in range(64):
        gen = rng.stream(spec.seed, _PARAMS_STREAM, attempt)
        truth = NetworkParams(
            u=rng.standard_normal(gen, (spec.h_star, spec.d)),
            v=rng.standard_normal(gen, spec.h_star),
            b1=rng.standard_normal(gen, spec.h_star),
            b2=float(rng.standard_normal(gen)),
        )
        if check_minimal(truth, tol).minimal:
            break
    else:
        raise RuntimeError("could not draw a minimal teacher network in 64 attempts")

    X = rng.standard_normal(rng.stream(spec.seed, _INPUTS_STREAM), (spec.n, spec.d))
    noise = np.sqrt(spec.sigma2) * rng.standard_normal(
        rng.stream(spec.seed, _NOISE_STREAM), spec.n
    )
    return Dataset(X=X, Y=predict(truth, X) + noise), truth


def load_csv(path, target_column: str) -> Dataset:
    """Read a numeric CSV with a header row into a Dataset.

    Features are all non-target columns in file order.  Any missing,
    non-numeric, or non-finite cell fails the load with its 1-based row number
    and column name; an absent target column raises UnknownTargetError.
    """
    path = Path(path)
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise CsvFormatError(f"{path}: file is empty, expected a header row") from None
        header = [name.strip() for name in header]
        if len(set(header)) != len(header):
            raise CsvFormatError(f"{path}: duplicate column names in header")
        if target_column not in header:
            raise UnknownTargetError(
                f"{path}: no column named {target_column!r}; available: {', '.join(header)}"
            )
        if len(header) < 2:
            raise CsvFormatError(f"{path}: need at least one feature column besides the target")
        target_idx = header.index(target_column)

        rows = []
        for line_no, row in enumerate(reader, start=2):
            if len(row) != len(header):
                raise CsvFormatError(
                    f"{path}: row {line_no} has {len(row)} fields, expected {len(header)}"
                )
            values = []
            for col, cell in zip(header, row):
                try:
                    value = float(cell)
                except ValueError:
                    value = np.nan
                if not np.isfinite(value):
                    raise CsvFormatError(
                        f"{path}: row {line_no}, column {col!r}: "
                        f"cannot parse {cell.strip()!r} as a finite number"
                    )
                values.append(value)
            rows.append(values)

    if not rows:
        raise CsvFormatError(f"{path}: no data rows after the header")
    table = np.array(rows)
    feature_cols = [i for i in range(len(header)) if i != target_idx]
    return Dataset(X=table[:, feature_cols], Y=table[:, target_idx])


def save_csv(data: Dataset, path, true_params: NetworkParams | None = None) -> None:
    """Write a dataset as CSV (features x1..xd, target y) loadable by load_csv.

    Floats are written with round-trip precision.  When the generating network
    is supplied, it is stored next to the CSV in a .truth.json sidecar.
    """
    path = Path(path)
    names = [f"x{j + 1}" for j in range(data.n_features)] + ["y"]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(names)
        for i in range(data.n_samples):
            writer.writerow([repr(float(value)) for value in data.X[i]] + [repr(float(data.Y[i]))])
    if true_params is not None:
        sidecar = path.with_suffix(".truth.json")
        sidecar.write_text(json.dumps(params_to_dict(true_params), indent=2) + "\n")


def split_standardize(data: Dataset, spec: SplitSpec) -> tuple[Dataset, Dataset, Standardizer]:
    """Split rows uniformly at random, then standardize both sides with
    training statistics.

    The test side gets floor(test_fraction * n) rows.  Feature and target
    means/scales come from the training split only; a constant training
    column keeps scale 1 and is reported in the transform's warnings.
    """
    n = data.n_samples
    if n < 4:
        raise ValueError("need at least 4 rows to split")
    n_test = int(np.floor(spec.test_fraction * n))
    if n_test < 1 or n - n_test < 1:
        raise ValueError(f"test_fraction {spec.test_fraction} leaves an empty side for n={n}")

    perm = rng.stream(spec.seed, _SPLIT_STREAM).permutation(n)
    test_idx = np.sort(perm[:n_test])
    train_idx = np.sort(perm[n_test:])
    train_raw = Dataset(X=data.X[train_idx], Y=data.Y[train_idx])
    test_raw = Dataset(X=data.X[test_idx], Y=data.Y[test_idx])

    warnings = []
    x_mean = train_raw.X.mean(axis=0)
    x_scale = train_raw.X.std(axis=0)
    for j in np.flatnonzero(x_scale <= _CONST_COL_RTOL * np.maximum(1.0, np.abs(x_mean))):
        warnings.append(f"training column {int(j)} is constant; scale pinned at 1")
        x_scale[j] = 1.0
    y_mean = float(train_raw.Y.mean())
    y_scale = float(train_raw.Y.std())
    if y_scale <= _CONST_COL_RTOL * max(1.0, abs(y_mean)):
        warnings.append("training target is constant; scale pinned at 1")
        y_scale = 1.0

    stats = Standardizer(
        x_mean=x_mean, x_scale=x_scale, y_mean=y_mean, y_scale=y_scale, warnings=tuple(warnings)
    )
    return stats.transform(train_raw), stats.transform(test_raw), stats
