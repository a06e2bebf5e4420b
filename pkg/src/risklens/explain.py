"""Local explanations anchored at a query state.

All four operations share the same locality notion: the set of nodes reachable
from the query's node within n hops along logged transitions. A linear model
fitted on that set (labels from binary risk, or values from probabilistic
risk) gives a direction-of-risk gradient in normalized feature space; graph
search gives the hop distance to the nearest risky node.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np

from .risk import BinaryRiskLabeling, ProbabilisticRisk

if TYPE_CHECKING:
    from .graph import TransitionGraph
    from .logmodel import Normalizer


class _CapExceeded:
    """Singleton sentinel: no risky node within the search cap."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "CAP_EXCEEDED"


CAP_EXCEEDED = _CapExceeded()

LOGISTIC_STEP = 0.1


@dataclass(frozen=True)
class ReachableSet:
    """Nodes within a hop budget of an origin node, with their hop depths."""

    origin: int
    budget: int
    depths: dict[int, int]

    def __contains__(self, node_id: int) -> bool:
        return node_id in self.depths

    def __len__(self) -> int:
        return len(self.depths)

    def node_ids(self) -> list[int]:
        """Member node ids in ascending order."""
        return sorted(self.depths)


@dataclass(frozen=True)
class Explanation:
    """A fitted direction of risk: linear weights in normalized feature space.

    ``g[i] > 0`` means increasing feature i moves the local model toward risk.
    ``mode`` records whether the surrogate was a classifier over binary labels
    or a regressor over probabilistic risk values.
    """

    g: np.ndarray
    bias: float
    mode: str
    sample_size: int
    risky_count: int

    def denormalized(self, normalizer: Normalizer) -> np.ndarray:
        """Rescale weights to raw feature units (zero for degenerate dims).

        A unit move in raw feature i is a move of 1/span[i] in normalized
        space, so raw-unit weights are g / span.
        """
        span = normalizer.span
        out = np.zeros_like(self.g)
        nz = span > 0
        out[nz] = self.g[nz] / span[nz]
        return out


@dataclass(frozen=True)
class NoDirection:
    """Returned when the local sample cannot support a direction.

    For classification that means every sampled point carries the same
    binary label; for regression, a single-node reachable set.
    """

    sample_size: int
    risky_count: int
    reason: str


def reachable(graph: TransitionGraph, state: np.ndarray, n: int) -> ReachableSet:
    """Breadth-first set of nodes within n hops of the query's node.

    Follows outgoing edges only. The origin is always included at depth 0.
    """
    if n < 0:
        raise ValueError("hop budget must be non-negative")
    origin = graph.find_node(state)
    depths = {origin: 0}
    frontier = deque([origin])
    while frontier:
        u = frontier.popleft()
        du = depths[u]
        if du == n:
            continue
        for v in graph.out_neighbors(u):
            if v not in depths:
                depths[v] = du + 1
                frontier.append(v)
    return ReachableSet(origin, n, depths)


def _sigmoid(z: np.ndarray) -> np.ndarray:
    # Piecewise form keeps exp() off large positive arguments.
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def fit_logistic(
    X: np.ndarray,
    y: np.ndarray,
    reg: float = 1e-3,
    step: float = LOGISTIC_STEP,
    iters: int = 500,
) -> tuple[np.ndarray, float]:
    """L2-regularized logistic regression by full-batch gradient descent.

    Deterministic by construction: zero initialization, fixed step, fixed
    iteration count. The penalty applies to the weights, not the bias.
    Features are centered internally so that under imbalanced labels the
    early descent learns the class contrast rather than the data centroid;
    the returned bias is re-expressed for raw inputs. Returns (weights, bias).
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    m, d = X.shape
    mu = X.mean(axis=0)
    Xc = X - mu
    w = np.zeros(d)
    b = 0.0
    for _ in range(iters):
        err = _sigmoid(Xc @ w + b) - y
        w = w - step * (Xc.T @ err / m + reg * w)
        b = b - step * float(err.mean())
    return w, b - float(w @ mu)


def fit_ridge(X: np.ndarray, y: np.ndarray, reg: float = 0.0) -> tuple[np.ndarray, float]:
    """Least squares with optional L2 penalty, solved exactly.

    Minimizes mean squared error plus reg * ||w||^2 over centered data; the
    bias absorbs the means. Solved via SVD on the penalty-augmented system,
    which also yields the minimum-norm solution when reg is 0 and the data
    are rank-deficient.
    """
    if reg < 0:
        raise ValueError("reg must be non-negative")
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    m, d = X.shape
    x_mean = X.mean(axis=0)
    y_mean = float(y.mean())
    Xc = X - x_mean
    yc = y - y_mean
    if reg > 0:
        A = np.vstack([Xc, np.sqrt(reg * m) * np.eye(d)])
        t = np.concatenate([yc, np.zeros(d)])
    else:
        A, t = Xc, yc
    w, *_ = np.linalg.lstsq(A, t, rcond=None)
    b = y_mean - float(x_mean @ w)
    return w, b


def direction_of_risk(
    graph: TransitionGraph,
    risk: BinaryRiskLabeling,
    state: np.ndarray,
    n: int,
    reg: float = 1e-3,
    iters: int = 500,
) -> Explanation | NoDirection:
    """Fit a local linear classifier separating risky from safe reachable nodes.

    Training points are the representatives of the n-hop reachable set,
    labeled by the binary risk flags. If only one class is present there is
    no direction to report and NoDirection is returned.
    """
    rs = reachable(graph, state, n)
    ids = rs.node_ids()
    X = graph.representatives[ids]
    y = risk.risky[ids].astype(float)
    k = int(y.sum())
    if k == 0 or k == len(ids):
        return NoDirection(len(ids), k, "all reachable nodes share one label")
    w, b = fit_logistic(X, y, reg=reg, iters=iters)
    return Explanation(w, b, "classification", len(ids), k)


def direction_of_risk_regression(
    graph: TransitionGraph,
    risk: ProbabilisticRisk,
    state: np.ndarray,
    n: int,
    reg: float = 0.0,
) -> Explanation | NoDirection:
    """Fit a local linear regressor onto probabilistic risk values.

    Unlike the classifier this degrades gracefully when all reachable nodes
    are risky to some degree; only a single-node reachable set is refused.
    Constant risk over the set yields a zero direction to numerical precision.
    """
    rs = reachable(graph, state, n)
    ids = rs.node_ids()
    if len(ids) < 2:
        k = int((risk.values[ids] > 0).sum())
        return NoDirection(len(ids), k, "reachable set has a single node")
    X = graph.representatives[ids]
    y = risk.values[ids]
    w, b = fit_ridge(X, y, reg=reg)
    return Explanation(w, b, "regression", len(ids), int((y > 0).sum()))


def distance_to_risk(
    graph: TransitionGraph,
    risk: BinaryRiskLabeling,
    state: np.ndarray,
    cap: int,
):
    """Minimum hops along logged transitions from the query's node to any
    risky node: 0 if that node is itself risky, CAP_EXCEEDED if no risky node
    lies within cap hops."""
    if cap < 0:
        raise ValueError("cap must be non-negative")
    origin = graph.find_node(state)
    if risk.risky[origin]:
        return 0
    depths = {origin: 0}
    frontier = deque([origin])
    while frontier:
        u = frontier.popleft()
        du = depths[u]
        if du == cap:
            continue
        for v in graph.out_neighbors(u):
            if v not in depths:
                if risk.risky[v]:
                    return du + 1
                depths[v] = du + 1
                frontier.append(v)
    return CAP_EXCEEDED


@dataclass(frozen=True)
class EpisodeTrace:
    """Per-step risk view of one episode: hop distances plus local directions.

    ``distances[t]`` is an int or CAP_EXCEEDED; ``directions[t]`` is a weight
    vector or None when the step's local model had no direction to offer.
    """

    feature_names: tuple[str, ...]
    distances: tuple
    directions: tuple
    cap: int

    def __len__(self) -> int:
        return len(self.distances)


def trace_episode(
    graph: TransitionGraph,
    risk: BinaryRiskLabeling,
    states: np.ndarray,
    n: int,
    cap: int,
    mode: str = "classification",
    prob_risk: ProbabilisticRisk | None = None,
    reg: float | None = None,
    iters: int = 500,
) -> EpisodeTrace:
    """Run distance_to_risk and a direction fit at every step of an episode.

    ``states`` is the episode's raw state sequence, row per step. ``mode``
    selects the direction surrogate: "classification" uses the binary labels,
    "regression" needs ``prob_risk``. The hop distance always comes from the
    binary labels.
    """
    if mode not in ("classification", "regression"):
        raise ValueError(f"unknown mode {mode!r}")
    if mode == "regression" and prob_risk is None:
        raise ValueError("regression mode needs a probabilistic risk labeling")
    states = np.asarray(states, dtype=float)
    distances = []
    directions = []
    for s in states:
        distances.append(distance_to_risk(graph, risk, s, cap))
        if mode == "classification":
            ex = direction_of_risk(
                graph, risk, s, n, reg=1e-3 if reg is None else reg, iters=iters
            )
        else:
            ex = direction_of_risk_regression(
                graph, prob_risk, s, n, reg=0.0 if reg is None else reg
            )
        directions.append(ex.g if isinstance(ex, Explanation) else None)
    return EpisodeTrace(
        graph.schema.names, tuple(distances), tuple(directions), cap
    )
