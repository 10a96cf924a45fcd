"""One-hidden-layer tanh networks: parameters, evaluation, risk, risk gradient."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "NetworkParams",
    "Dataset",
    "forward",
    "predict",
    "empirical_risk",
    "risk_gradient",
    "to_dict",
    "from_dict",
]


def _frozen_array(values, dtype=float) -> np.ndarray:
    out = np.array(values, dtype=dtype)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class NetworkParams:
    """Parameters of a tanh network computing v . tanh(u x + b1) + b2.

    Row i of `u` holds the input weights of hidden node i; `v[i]` and `b1[i]`
    are its output weight and hidden bias.  The parameter block of node i is
    the length d+2 vector (u[i], v[i], b1[i]): the unit over which group
    penalties and pruning act.  Arrays are copied and made read-only so
    instances can be shared across concurrent fits.
    """

    u: np.ndarray
    v: np.ndarray
    b1: np.ndarray
    b2: float

    def __post_init__(self):
        u = _frozen_array(self.u)
        v = _frozen_array(self.v)
        b1 = _frozen_array(self.b1)
        b2 = float(self.b2)
        if u.ndim != 2:
            raise ValueError(f"u must be a 2-D (nodes x features) array, got ndim={u.ndim}")
        if v.ndim != 1 or b1.ndim != 1:
            raise ValueError("v and b1 must be 1-D arrays")
        if not (u.shape[0] == v.shape[0] == b1.shape[0]):
            raise ValueError(
                f"inconsistent node counts: u has {u.shape[0]} rows, "
                f"v has {v.shape[0]} entries, b1 has {b1.shape[0]}"
            )
        if not (np.isfinite(u).all() and np.isfinite(v).all() and np.isfinite(b1).all() and np.isfinite(b2)):
            raise ValueError("network parameters must be finite")
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "v", v)
        object.__setattr__(self, "b1", b1)
        object.__setattr__(self, "b2", b2)

    @property
    def n_nodes(self) -> int:
        return self.u.shape[0]

    @property
    def n_features(self) -> int:
        return self.u.shape[1]

    def node_group(self, i: int) -> np.ndarray:
        """The parameter block (u[i], v[i], b1[i]) of hidden node i."""
        return np.concatenate([self.u[i], [self.v[i]], [self.b1[i]]])

    def node_group_matrix(self) -> np.ndarray:
        """All node parameter blocks stacked as an H x (d+2) array."""
        return np.column_stack([self.u, self.v, self.b1]) if self.n_nodes else np.zeros((0, self.n_features + 2))

    def vectorize(self) -> np.ndarray:
        """Node-major flattening (block_1, ..., block_H, b2).

        Group blocks stay contiguous, so distances between parameter vectors
        decompose over nodes plus the output bias.
        """
        return np.concatenate([self.node_group_matrix().ravel(), [self.b2]])


@dataclass(frozen=True)
class Dataset:
    """Paired inputs and targets; X is n x d, Y has length n."""

    X: np.ndarray
    Y: np.ndarray

    def __post_init__(self):
        X = _frozen_array(self.X)
        Y = _frozen_array(self.Y)
        if X.ndim != 2 or Y.ndim != 1:
            raise ValueError("X must be 2-D and Y 1-D")
        if X.shape[0] != Y.shape[0]:
            raise ValueError(f"X has {X.shape[0]} rows but Y has {Y.shape[0]} entries")
        if X.shape[0] == 0:
            raise ValueError("dataset must contain at least one row")
        if not (np.isfinite(X).all() and np.isfinite(Y).all()):
            raise ValueError("dataset entries must be finite")
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "Y", Y)

    @property
    def n_samples(self) -> int:
        return self.X.shape[0]

    @property
    def n_features(self) -> int:
        return self.X.shape[1]


def forward(params: NetworkParams, x) -> float:
    """Evaluate the network at a single input vector."""
    x = np.asarray(x, dtype=float)
    if x.ndim != 1 or x.shape[0] != params.n_features:
        raise ValueError(f"expected input of shape ({params.n_features},), got {x.shape}")
    return float(params.v @ np.tanh(params.u @ x + params.b1) + params.b2)


def predict(params: NetworkParams, X) -> np.ndarray:
    """Evaluate the network at every row of an n x d input matrix."""
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[1] != params.n_features:
        raise ValueError(f"expected inputs of shape (n, {params.n_features}), got {X.shape}")
    return np.tanh(X @ params.u.T + params.b1) @ params.v + params.b2


def empirical_risk(params: NetworkParams, data: Dataset) -> float:
    """Mean squared residual of the network on the dataset."""
    if data.n_features != params.n_features:
        raise ValueError(
            f"dataset has {data.n_features} features but network expects {params.n_features}"
        )
    r = predict(params, data.X) - data.Y
    return float(r @ r) / data.n_samples


def risk_gradient(params: NetworkParams, data: Dataset) -> NetworkParams:
    """Analytic gradient of the empirical risk, in NetworkParams layout.

    With residual r_k = f(X_k) - Y_k and hidden activations t_k = tanh(u X_k + b1):

        dR/dv  = (2/n) sum_k r_k t_k
        dR/db2 = (2/n) sum_k r_k
        dR/du  = (2/n) sum_k r_k (1 - t_k^2) v X_k^T   (per node)
        dR/db1 = (2/n) sum_k r_k (1 - t_k^2) v
    """
    if data.n_features != params.n_features:
        raise ValueError(
            f"dataset has {data.n_features} features but network expects {params.n_features}"
        )
    X, Y = data.X, data.Y
    T = np.tanh(X @ params.u.T + params.b1)
    r = T @ params.v + params.b2 - Y
    c = 2.0 / data.n_samples
    back = (r[:, None] * (1.0 - T * T)) * params.v
    return NetworkParams(
        u=c * (back.T @ X),
        v=c * (T.T @ r),
        b1=c * back.sum(axis=0),
        b2=c * r.sum(),
    )


def to_dict(params: NetworkParams) -> dict:
    """JSON-ready form: {"d", "H", "u", "v", "b1", "b2"} with u row-major."""
    return {
        "d": params.n_features,
        "H": params.n_nodes,
        "u": params.u.tolist(),
        "v": params.v.tolist(),
        "b1": params.b1.tolist(),
        "b2": params.b2,
    }


def from_dict(obj: dict) -> NetworkParams:
    """Rebuild parameters from their JSON form, validating declared dimensions."""
    try:
        d, h = int(obj["d"]), int(obj["H"])
        u = np.array(obj["u"], dtype=float)
        if h == 0:
            u = u.reshape(0, d)
        if u.shape != (h, d):
            raise ValueError(f"u has shape {u.shape}, declared {(h, d)}")
        params = NetworkParams(u=u, v=obj["v"], b1=obj["b1"], b2=obj["b2"])
    except (KeyError, TypeError, ValueError) as exc:
        raise ValueError(f"invalid network parameter record: {exc}") from exc
    if params.n_nodes != h or params.n_features != d:
        raise ValueError("declared dimensions do not match array shapes")
    return params
