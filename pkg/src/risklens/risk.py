"""Risk labeling over a transition graph.

Binary labels are the least fixed point of: a node is risky if a fatal state
was merged into it, or if it has outgoing transitions and every successor is
risky. Probabilistic labels start from per-node fatality rates and relax
toward the root-mean-square risk of successors.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np

if TYPE_CHECKING:
    from .graph import TransitionGraph


@dataclass(frozen=True)
class BinaryRiskLabeling:
    """Per-node risky flags plus the dead-end convention they were computed under."""

    risky: np.ndarray
    dead_ends_risky: bool = False

    def __post_init__(self):
        object.__setattr__(self, "risky", np.asarray(self.risky, dtype=bool))

    @property
    def n_risky(self) -> int:
        return int(self.risky.sum())

    def risky_ids(self) -> list[int]:
        return [int(i) for i in np.flatnonzero(self.risky)]


@dataclass(frozen=True)
class ProbabilisticRisk:
    """Per-node risk values in [0, 1] after some number of relaxation steps."""

    values: np.ndarray
    iterations: int
    learning_rate: float | None

    def __post_init__(self):
        object.__setattr__(self, "values", np.asarray(self.values, dtype=float))


def label_binary(graph: TransitionGraph, dead_ends_risky: bool = False) -> BinaryRiskLabeling:
    """Compute binary risky flags as a least fixed point.

    Seeds are the fatal-containing nodes (plus, under ``dead_ends_risky=True``,
    every node without outgoing edges). The propagation rule marks a node
    risky once all of its distinct successors are risky; with the default
    convention a node with no successors never triggers the rule, so states
    where logging merely stopped are not blamed.
    """
    n = graph.n_nodes
    risky = graph.fatal_counts > 0
    out_remaining = np.array(
        [len(graph.out_neighbors(i)) for i in range(n)], dtype=int
    )
    has_out = out_remaining > 0
    if dead_ends_risky:
        risky = risky | ~has_out

    preds: list[list[int]] = [[] for _ in range(n)]
    for u in range(n):
        for v in graph.out_neighbors(u):
            preds[v].append(u)

    queue = deque(int(i) for i in np.flatnonzero(risky))
    while queue:
        v = queue.popleft()
        for u in preds[v]:
            if risky[u]:
                continue
            out_remaining[u] -= 1
            if out_remaining[u] == 0 and has_out[u]:
                risky[u] = True
                queue.append(u)
    return BinaryRiskLabeling(risky, dead_ends_risky)


def risk_init(graph: TransitionGraph) -> ProbabilisticRisk:
    """Initial risk: 0.5 + fatal/(2*total) where fatalities were seen, else 0."""
    total = graph.total_counts.astype(float)
    fatal = graph.fatal_counts.astype(float)
    values = np.where(fatal > 0, 0.5 + fatal / (2.0 * total), 0.0)
    return ProbabilisticRisk(values, 0, None)


def risk_iterate(
    graph: TransitionGraph,
    risk: ProbabilisticRisk,
    learning_rate: float,
    iterations: int,
) -> ProbabilisticRisk:
    """Run synchronous relaxation steps of the probabilistic risk update.

    Each step moves every node with successors toward the root mean square of
    its successors' current risk, weighted by transition multiplicity:

        r'(s) = (1 - l) * r(s) + l * sqrt(sum_k r(k)^2 V(s,k) / sum_k V(s,k))

    All nodes update from the same snapshot. Nodes without successors keep
    their value. Values remain in [0, 1].
    """
    if not (0.0 < learning_rate < 1.0):
        raise ValueError("learning_rate must lie strictly between 0 and 1")
    if iterations < 0:
        raise ValueError("iterations must be non-negative")
    n = graph.n_nodes
    src, dst, mult = graph.edge_arrays()
    weight = mult.astype(float)
    denom = np.bincount(src, weights=weight, minlength=n)
    has_out = denom > 0

    values = risk.values.copy()
    l = float(learning_rate)
    for _ in range(iterations):
        num = np.bincount(src, weights=weight * values[dst] ** 2, minlength=n)
        nxt = values.copy()
        nxt[has_out] = (1.0 - l) * values[has_out] + l * np.sqrt(
            num[has_out] / denom[has_out]
        )
        values = nxt
    return ProbabilisticRisk(values, risk.iterations + iterations, l)
