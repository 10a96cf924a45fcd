"""Two-step node selection: a Group Lasso stage picks the initial estimate,
its group norms set adaptive weights, and an Adaptive Group Lasso stage
refits; AIC chooses the regularizer at each stage.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from .network import Dataset
from .optimizer import FitReport, TrainConfig, prox_gradient_fit, random_init
from .penalty import PenaltySpec, adaptive_weights
from .structure import MinimalityReport, StructureTolerances, check_minimal, drop_zero_nodes

__all__ = [
    "GridSpec",
    "RegChoice",
    "AicTraceEntry",
    "SelectionResult",
    "PipelineError",
    "DEFAULT_REG_GRID",
    "aic",
    "two_step_fit",
    "write_aic_trace_csv",
]

# regularizer candidates used by the reference experiments, shared by both stages
DEFAULT_REG_GRID = (0.001, 0.005, 0.01, 0.025, 0.05, 0.075, 0.1)

_RISK_FLOOR = 1e-12


class PipelineError(RuntimeError):
    """Every grid point of a selection stage diverged; no model can be chosen."""


@dataclass(frozen=True)
class GridSpec:
    """Regularizer candidates for both stages plus the adaptive-weight exponent."""

    gl_grid: tuple[float, ...] = DEFAULT_REG_GRID
    agl_grid: tuple[float, ...] = DEFAULT_REG_GRID
    gamma: float = 2.0

    def __post_init__(self):
        object.__setattr__(self, "gl_grid", tuple(float(z) for z in self.gl_grid))
        object.__setattr__(self, "agl_grid", tuple(float(z) for z in self.agl_grid))
        if not self.gl_grid or not self.agl_grid:
            raise ValueError("regularizer grids must be nonempty")
        if min(self.gl_grid) <= 0 or min(self.agl_grid) <= 0:
            raise ValueError("regularizer candidates must be positive")
        if self.gamma <= 0:
            raise ValueError("gamma must be positive")


@dataclass(frozen=True)
class RegChoice:
    """The grid point a stage settled on."""

    reg: float
    fit: FitReport
    aic: float

    def to_dict(self, reg_key: str) -> dict:
        return {reg_key: self.reg, "aic": self.aic, "fit": self.fit.to_dict(include_trace=False)}


@dataclass(frozen=True)
class AicTraceEntry:
    reg: float
    aic: float
    nonzero_nodes: int
    risk: float

    def to_dict(self) -> dict:
        return {
            "reg": self.reg,
            "aic": self.aic,
            "nonzero_nodes": self.nonzero_nodes,
            "risk": self.risk,
        }


@dataclass(frozen=True)
class SelectionResult:
    gl_choice: RegChoice
    agl_choice: RegChoice
    gl_aic_trace: tuple[AicTraceEntry, ...]
    agl_aic_trace: tuple[AicTraceEntry, ...]
    selected_nodes: int
    minimality: MinimalityReport
    warnings: tuple[str, ...] = ()

    def to_dict(self) -> dict:
        return {
            "gl_choice": self.gl_choice.to_dict("zeta"),
            "agl_choice": self.agl_choice.to_dict("lambda"),
            "gl_aic_trace": [e.to_dict() for e in self.gl_aic_trace],
            "agl_aic_trace": [e.to_dict() for e in self.agl_aic_trace],
            "selected_nodes": self.selected_nodes,
            "minimality": self.minimality.to_dict(),
            "warnings": list(self.warnings),
        }


def aic(fit: FitReport, n: int) -> float:
    """n·ln(risk) + 2k with k the coordinate count of surviving groups plus one.

    The risk is floored at 1e-12 so an interpolating fit stays comparable.
    """
    if n < 2:
        raise ValueError("AIC needs at least two samples")
    k = (fit.params.n_features + 2) * fit.nonzero_nodes + 1
    return n * math.log(max(fit.final_risk, _RISK_FLOOR)) + 2 * k


def _run_stage(
    data: Dataset, start, specs, cfg: TrainConfig, stage: str, warnings: list
) -> tuple[RegChoice, tuple[AicTraceEntry, ...]]:
    """Fit every grid point, drop diverged ones, pick min AIC (ties to larger reg)."""
    best = None
    trace = []
    for reg, spec in specs:
        fit = prox_gradient_fit(data, start, spec, cfg)
        if fit.diverged:
            warnings.append(f"{stage} fit at reg={reg:g} diverged and was excluded")
            continue
        score = aic(fit, data.n_samples)
        trace.append(AicTraceEntry(reg=reg, aic=score, nonzero_nodes=fit.nonzero_nodes, risk=fit.final_risk))
        if best is None or score < best.aic or (score == best.aic and reg > best.reg):
            best = RegChoice(reg=reg, fit=fit, aic=score)
    if best is None:
        raise PipelineError(f"every {stage} grid point diverged")
    return best, tuple(trace)


def _zero_frozen(params, frozen: np.ndarray):
    """Snap frozen groups to exact zero so the warm start meets the fit precondition."""
    from .network import NetworkParams

    if not frozen.any():
        return params
    u = params.u.copy()
    v = params.v.copy()
    b1 = params.b1.copy()
    u[frozen] = 0.0
    v[frozen] = 0.0
    b1[frozen] = 0.0
    return NetworkParams(u=u, v=v, b1=b1, b2=params.b2)


def two_step_fit(
    data: Dataset,
    H: int,
    grids: GridSpec,
    cfg: TrainConfig,
    tol: StructureTolerances | None = None,
) -> SelectionResult:
    """Run both selection stages on the dataset with an oversized network.

    Stage one fits a Group Lasso model for every candidate in `gl_grid` from
    one shared random initialization (so AIC differences reflect the
    regularizer, not init luck) and keeps the min-AIC fit.  Its group norms
    give the adaptive weights; groups it zeroed out are frozen.  Stage two
    refits over `agl_grid`, warm-started at the stage-one estimate.  Diverged
    grid points are excluded with a warning; if a whole stage diverges,
    PipelineError is raised.  The returned result also carries a minimality
    report of the final network restricted to its nonzero nodes.
    """
    if H < 1:
        raise ValueError("network must have at least one hidden node")
    tol = tol or StructureTolerances()
    warnings: list[str] = []

    init = random_init(H, data.n_features, cfg.seed)
    gl_specs = [(z, PenaltySpec.group_lasso(z, H)) for z in grids.gl_grid]
    gl_choice, gl_trace = _run_stage(data, init, gl_specs, cfg, "group_lasso", warnings)

    weights, frozen = adaptive_weights(gl_choice.fit.params, grids.gamma)
    warm = _zero_frozen(gl_choice.fit.params, frozen)
    agl_specs = [
        (lam, PenaltySpec.adaptive(lam, weights, frozen, grids.gamma)) for lam in grids.agl_grid
    ]
    agl_choice, agl_trace = _run_stage(data, warm, agl_specs, cfg, "adaptive", warnings)

    pruned = drop_zero_nodes(agl_choice.fit.params, StructureTolerances(zero_tol=0.0, dup_tol=tol.dup_tol))
    return SelectionResult(
        gl_choice=gl_choice,
        agl_choice=agl_choice,
        gl_aic_trace=gl_trace,
        agl_aic_trace=agl_trace,
        selected_nodes=agl_choice.fit.nonzero_nodes,
        minimality=check_minimal(pruned, tol),
        warnings=tuple(warnings),
    )


def write_aic_trace_csv(result: SelectionResult, path) -> None:
    """Write both AIC traces as CSV with columns step, reg, aic, nonzero_nodes, risk."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["step", "reg", "aic", "nonzero_nodes", "risk"])
        for step, trace in (("group_lasso", result.gl_aic_trace), ("adaptive", result.agl_aic_trace)):
            for e in trace:
                writer.writerow([step, repr(e.reg), repr(e.aic), e.nonzero_nodes, repr(e.risk)])
