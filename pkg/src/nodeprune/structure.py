"""Minimality checks, node counting, duplicate-node merging, and the
symmetry-aware distance from a fitted network to an embedded reference.

A one-hidden-layer tanh network leaves its input-output map unchanged under
node permutations and under negating a node's full parameter block
(tanh oddness).  Everything here treats networks modulo that symmetry group.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment

from .network import NetworkParams

__all__ = [
    "ViolationKind",
    "Violation",
    "MinimalityReport",
    "StructureTolerances",
    "NodeCounts",
    "check_minimal",
    "count_nodes",
    "canonical_reduce",
    "drop_zero_nodes",
    "distance_to_embedded_reference",
]


class ViolationKind(enum.Enum):
    ZERO_U_COLUMN = "zero_u_column"
    ZERO_V_ENTRY = "zero_v_entry"
    SIGN_DUPLICATE_PAIR = "sign_duplicate_pair"


@dataclass(frozen=True)
class Violation:
    kind: ViolationKind
    nodes: tuple[int, ...]

    def to_dict(self) -> dict:
        return {"kind": self.kind.value, "nodes": list(self.nodes)}


@dataclass(frozen=True)
class MinimalityReport:
    minimal: bool
    violations: tuple[Violation, ...]

    def to_dict(self) -> dict:
        return {"minimal": self.minimal, "violations": [v.to_dict() for v in self.violations]}


@dataclass(frozen=True)
class StructureTolerances:
    """Thresholds standing in for the exact-arithmetic conditions.

    `zero_tol` bounds norms treated as zero; `dup_tol` bounds the Euclidean
    gap under which two (input weights, hidden bias) pairs count as equal up
    to sign.  Both sit well below O(1) parameter scales and above float noise.
    """

    zero_tol: float = 1e-8
    dup_tol: float = 1e-6

    def __post_init__(self):
        if self.zero_tol < 0 or self.dup_tol < 0:
            raise ValueError("tolerances must be nonnegative")


@dataclass(frozen=True)
class NodeCounts:
    zero: int
    non_significant: int
    nonzero: int

    def to_dict(self) -> dict:
        return {"zero": self.zero, "non_significant": self.non_significant, "nonzero": self.nonzero}


def _input_side(params: NetworkParams) -> np.ndarray:
    """Per-node (input weights, hidden bias) rows, the part compared for duplicates."""
    if params.n_nodes == 0:
        return np.zeros((0, params.n_features + 1))
    return np.column_stack([params.u, params.b1])


def check_minimal(params: NetworkParams, tol: StructureTolerances | None = None) -> MinimalityReport:
    """Test the three conditions for no smaller network computing the same map.

    A network is minimal iff every node has nonzero input weights, every
    output weight is nonzero, and no two nodes share their (input weights,
    hidden bias) pair up to sign.  All violations are reported, zero-input
    nodes first, then zero output weights, then duplicate pairs in index order.
    """
    tol = tol or StructureTolerances()
    violations = []
    u_norms = np.sqrt((params.u * params.u).sum(axis=1))
    for i in np.flatnonzero(u_norms <= tol.zero_tol):
        violations.append(Violation(ViolationKind.ZERO_U_COLUMN, (int(i),)))
    for i in np.flatnonzero(np.abs(params.v) <= tol.zero_tol):
        violations.append(Violation(ViolationKind.ZERO_V_ENTRY, (int(i),)))
    P = _input_side(params)
    if params.n_nodes >= 2:
        gap = ((P[:, None, :] - P[None, :, :]) ** 2).sum(axis=2)
        gap_flipped = ((P[:, None, :] + P[None, :, :]) ** 2).sum(axis=2)
        near = np.sqrt(np.minimum(gap, gap_flipped)) <= tol.dup_tol
        for i, j in zip(*np.triu_indices(params.n_nodes, k=1)):
            if near[i, j]:
                violations.append(Violation(ViolationKind.SIGN_DUPLICATE_PAIR, (int(i), int(j))))
    return MinimalityReport(minimal=not violations, violations=tuple(violations))


def count_nodes(params: NetworkParams, tol: StructureTolerances | None = None) -> NodeCounts:
    """Count zero, non-significant, and nonzero nodes.

    A zero node has its whole parameter block at zero; a non-significant node
    has zero input weights or a zero output weight (every zero node is also
    non-significant); nonzero is the complement of zero.
    """
    tol = tol or StructureTolerances()
    blocks = params.node_group_matrix()
    block_norms = np.sqrt((blocks * blocks).sum(axis=1))
    u_norms = np.sqrt((params.u * params.u).sum(axis=1))
    zero = block_norms <= tol.zero_tol
    non_sig = (u_norms <= tol.zero_tol) | (np.abs(params.v) <= tol.zero_tol) | zero
    return NodeCounts(
        zero=int(zero.sum()),
        non_significant=int(non_sig.sum()),
        nonzero=int(params.n_nodes - zero.sum()),
    )


def canonical_reduce(params: NetworkParams, tol: StructureTolerances | None = None) -> NetworkParams:
    """Merge sign-duplicate nodes and absorb non-significant ones.

    Nodes with near-zero input weights contribute a constant, which is folded
    into the output bias before their slot is cleared; nodes with near-zero
    output weight are dropped outright.  Remaining nodes are partitioned into
    classes whose (input weights, hidden bias) agree up to sign within
    `dup_tol`; each class collapses onto its lowest-index member, whose output
    weight becomes the signed sum over the class (negated for flipped
    orientation).  A representative whose merged output weight lands at zero
    is cleared too.  Freed slots are exact zero nodes, so the result has the
    same node count and, up to merge rounding, the same input-output map.
    """
    tol = tol or StructureTolerances()
    u = params.u.copy()
    v = params.v.copy()
    b1 = params.b1.copy()
    b2 = params.b2

    u_norms = np.sqrt((u * u).sum(axis=1))
    significant = (u_norms > tol.zero_tol) & (np.abs(v) > tol.zero_tol)

    def clear(i):
        u[i] = 0.0
        v[i] = 0.0
        b1[i] = 0.0

    for i in np.flatnonzero(~significant):
        if u_norms[i] <= tol.zero_tol:
            b2 += v[i] * np.tanh(b1[i])
        clear(i)

    P = np.column_stack([u, b1])
    reps: list[int] = []
    merged_v: dict[int, float] = {}
    for i in np.flatnonzero(significant):
        i = int(i)
        for r in reps:
            d_same = np.linalg.norm(P[i] - P[r])
            d_flip = np.linalg.norm(P[i] + P[r])
            if min(d_same, d_flip) <= tol.dup_tol:
                merged_v[r] += v[i] if d_same <= d_flip else -v[i]
                clear(i)
                break
        else:
            reps.append(i)
            merged_v[i] = v[i]

    for r in reps:
        v[r] = merged_v[r]
        if abs(v[r]) <= tol.zero_tol:
            clear(r)

    return NetworkParams(u=u, v=v, b1=b1, b2=b2)


def drop_zero_nodes(params: NetworkParams, tol: StructureTolerances | None = None) -> NetworkParams:
    """Remove nodes whose whole parameter block is within `zero_tol` of zero."""
    tol = tol or StructureTolerances()
    blocks = params.node_group_matrix()
    keep = np.sqrt((blocks * blocks).sum(axis=1)) > tol.zero_tol
    return NetworkParams(u=params.u[keep], v=params.v[keep], b1=params.b1[keep], b2=params.b2)


def distance_to_embedded_reference(
    candidate: NetworkParams,
    reference: NetworkParams,
    tol: StructureTolerances | None = None,
) -> float:
    """Distance from `candidate` to the symmetry orbit of `reference` padded
    with zero nodes up to the candidate's size.

    Solved as an assignment problem: each reference node may land in any
    candidate slot with either sign (cost = squared block difference, better
    sign chosen per pair), and unmatched candidate slots pay their own squared
    block norm, standing in for the zero padding.  The squared output-bias gap
    is added outside the assignment.  The per-pair sign choice is valid
    because the total cost separates over pairs.
    """
    tol = tol or StructureTolerances()
    if candidate.n_features != reference.n_features:
        raise ValueError(
            f"candidate has {candidate.n_features} features, reference {reference.n_features}"
        )
    if candidate.n_nodes < reference.n_nodes:
        raise ValueError(
            f"candidate must have at least {reference.n_nodes} nodes, got {candidate.n_nodes}"
        )
    report = check_minimal(reference, tol)
    if not report.minimal:
        raise ValueError(
            "reference network must be minimal: "
            + "; ".join(f"{w.kind.value} at {w.nodes}" for w in report.violations)
        )

    Wc = candidate.node_group_matrix()
    Wr = reference.node_group_matrix()
    h, h_star = candidate.n_nodes, reference.n_nodes
    cand_sq = (Wc * Wc).sum(axis=1)
    cost = np.empty((h, h))
    if h_star:
        gap = ((Wc[:, None, :] - Wr[None, :, :]) ** 2).sum(axis=2)
        gap_flipped = ((Wc[:, None, :] + Wr[None, :, :]) ** 2).sum(axis=2)
        cost[:, :h_star] = np.minimum(gap, gap_flipped)
    cost[:, h_star:] = cand_sq[:, None]
    rows, cols = linear_sum_assignment(cost)
    total = float(cost[rows, cols].sum()) + (candidate.b2 - reference.b2) ** 2
    return float(np.sqrt(total))
