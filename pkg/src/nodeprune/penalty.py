"""Group norms, node-group penalties, adaptive weights, and the block prox."""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .network import NetworkParams

__all__ = [
    "PenaltyKind",
    "PenaltySpec",
    "group_norms",
    "penalty_value",
    "adaptive_weights",
    "block_soft_threshold",
]


class PenaltyKind(enum.Enum):
    NONE = "none"
    GROUP_LASSO = "group_lasso"
    ADAPTIVE_GROUP_LASSO = "adaptive_group_lasso"


@dataclass(frozen=True)
class PenaltySpec:
    """A node-group penalty: reg * sum_i weights[i] * ||block_i||.

    `frozen[i]` pins node i at exactly zero: the group is excluded from the
    objective and from optimization entirely, which realizes the 0/0 = 0
    convention for groups whose first-stage norm vanished.  The output bias
    b2 belongs to no group and is never penalized.
    """

    kind: PenaltyKind
    reg: float
    weights: np.ndarray
    frozen: np.ndarray
    gamma: float = 2.0

    def __post_init__(self):
        weights = np.array(self.weights, dtype=float)
        frozen = np.array(self.frozen, dtype=bool)
        weights.setflags(write=False)
        frozen.setflags(write=False)
        if self.reg < 0:
            raise ValueError("regularizer must be nonnegative")
        if self.gamma <= 0:
            raise ValueError("gamma must be positive")
        if weights.ndim != 1 or frozen.ndim != 1 or weights.shape != frozen.shape:
            raise ValueError("weights and frozen must be 1-D arrays of equal length")
        if (weights < 0).any():
            raise ValueError("adaptive weights must be nonnegative")
        if self.kind is PenaltyKind.GROUP_LASSO and ((weights != 1.0).any() or frozen.any()):
            raise ValueError("group lasso uses unit weights and no frozen groups")
        if self.kind is PenaltyKind.ADAPTIVE_GROUP_LASSO and (frozen != (weights == 0.0)).any():
            raise ValueError("frozen must mark exactly the groups with undefined weight")
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "frozen", frozen)
        object.__setattr__(self, "reg", float(self.reg))
        object.__setattr__(self, "gamma", float(self.gamma))

    @property
    def n_nodes(self) -> int:
        return self.weights.shape[0]

    @classmethod
    def unpenalized(cls, n_nodes: int) -> "PenaltySpec":
        return cls(PenaltyKind.NONE, 0.0, np.ones(n_nodes), np.zeros(n_nodes, dtype=bool))

    @classmethod
    def group_lasso(cls, reg: float, n_nodes: int) -> "PenaltySpec":
        return cls(PenaltyKind.GROUP_LASSO, reg, np.ones(n_nodes), np.zeros(n_nodes, dtype=bool))

    @classmethod
    def adaptive(cls, reg: float, weights, frozen, gamma: float = 2.0) -> "PenaltySpec":
        return cls(PenaltyKind.ADAPTIVE_GROUP_LASSO, reg, weights, frozen, gamma)

    def to_dict(self) -> dict:
        return {
            "kind": self.kind.value,
            "reg": self.reg,
            "weights": self.weights.tolist(),
            "frozen": self.frozen.tolist(),
            "gamma": self.gamma,
        }


def group_norms(params: NetworkParams) -> np.ndarray:
    """Euclidean norm of each node's parameter block; b2 never contributes."""
    blocks = params.node_group_matrix()
    return np.sqrt((blocks * blocks).sum(axis=1))


def penalty_value(params: NetworkParams, spec: PenaltySpec) -> float:
    """Penalty of `params` under `spec`; frozen groups must sit at exact zero."""
    if spec.n_nodes != params.n_nodes:
        raise ValueError(f"spec covers {spec.n_nodes} groups but network has {params.n_nodes}")
    if spec.kind is PenaltyKind.NONE or spec.reg == 0.0:
        return 0.0
    norms = group_norms(params)
    if (norms[spec.frozen] > 0.0).any():
        bad = int(np.nonzero(spec.frozen & (norms > 0.0))[0][0])
        raise ValueError(f"frozen group {bad} has nonzero norm {norms[bad]:g}")
    live = ~spec.frozen
    return spec.reg * float(spec.weights[live] @ norms[live])


def adaptive_weights(gl_params: NetworkParams, gamma: float, zero_tol: float = 1e-8):
    """Per-group weights ||block_i||^(-gamma) anchored at a first-stage estimate.

    Groups whose first-stage norm is at most `zero_tol` get no finite weight;
    they are marked frozen and stay pinned at zero in the second stage.

    Returns (weights, frozen).
    """
    if gamma <= 0:
        raise ValueError("gamma must be positive")
    if zero_tol < 0:
        raise ValueError("zero_tol must be nonnegative")
    norms = group_norms(gl_params)
    frozen = norms <= zero_tol
    weights = np.zeros_like(norms)
    weights[~frozen] = norms[~frozen] ** (-gamma)
    return weights, frozen


def block_soft_threshold(group: np.ndarray, threshold: float) -> np.ndarray:
    """Proximal map of threshold * ||.||: shrink the block, or kill it exactly.

    Returns group * max(0, 1 - threshold/||group||), with an exact zero vector
    whenever ||group|| <= threshold, so the support needs no post-hoc
    thresholding.
    """
    if threshold < 0:
        raise ValueError("threshold must be nonnegative")
    group = np.asarray(group, dtype=float)
    norm = float(np.linalg.norm(group))
    if norm <= threshold:
        return np.zeros_like(group)
    return group * (1.0 - threshold / norm)
