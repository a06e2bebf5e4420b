"""Epsilon-radius state-transition graph.

States from a log are greedily merged into nodes: a normalized state joins the
nearest existing node within Euclidean distance epsilon, otherwise it founds a
new node with itself as the representative. Consecutive records of an episode
add a directed edge between their nodes, counted with multiplicity. The result
is a small discrete abstraction of the logged dynamics that risk labeling and
local explanations operate on.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .logmodel import (
    FeatureSchema,
    Normalizer,
    OutOfRangeWarning,
    TransitionLog,
)
from .risk import BinaryRiskLabeling, ProbabilisticRisk

GRAPH_FORMAT_VERSION = 1


class GraphFormatError(ValueError):
    """A persisted graph file is unreadable or from an unsupported version."""


@dataclass(frozen=True)
class GraphNode:
    """View of one node: its id, representative point, and visit counts."""

    id: int
    representative: np.ndarray
    total: int
    fatal: int


@dataclass(frozen=True)
class GraphEdge:
    src: int
    dst: int
    multiplicity: int


class TransitionGraph:
    """Nodes, counted directed edges, and the normalizer queries pass through.

    Representatives live in normalized [0, 1] coordinates and are pairwise
    more than epsilon apart. Raw query states are normalized (and clamped,
    with a warning) before any nearest-node lookup.
    """

    def __init__(
        self,
        epsilon: float,
        schema: FeatureSchema,
        normalizer: Normalizer,
        representatives: np.ndarray,
        total_counts: np.ndarray,
        fatal_counts: np.ndarray,
        successors: list[dict[int, int]],
        metric: str = "euclidean",
        binary_risk: BinaryRiskLabeling | None = None,
        prob_risk: ProbabilisticRisk | None = None,
    ):
        if metric != "euclidean":
            raise ValueError(f"unsupported metric {metric!r}")
        if epsilon <= 0:
            raise ValueError("epsilon must be positive")
        self.epsilon = float(epsilon)
        self.metric = metric
        self.schema = schema
        self.normalizer = normalizer
        self.representatives = np.asarray(representatives, dtype=float)
        self.total_counts = np.asarray(total_counts, dtype=int)
        self.fatal_counts = np.asarray(fatal_counts, dtype=int)
        self._successors = successors
        self.binary_risk = binary_risk
        self.prob_risk = prob_risk
        n = self.representatives.shape[0]
        if not (len(successors) == n == self.total_counts.shape[0] == self.fatal_counts.shape[0]):
            raise ValueError("node arrays disagree on the number of nodes")
        self._edge_cache: tuple[np.ndarray, np.ndarray, np.ndarray] | None = None

    @property
    def n_nodes(self) -> int:
        return self.representatives.shape[0]

    @property
    def n_edges(self) -> int:
        return sum(len(s) for s in self._successors)

    def node(self, node_id: int) -> GraphNode:
        return GraphNode(
            int(node_id),
            self.representatives[node_id],
            int(self.total_counts[node_id]),
            int(self.fatal_counts[node_id]),
        )

    def out_neighbors(self, node_id: int) -> dict[int, int]:
        """Successor node id -> transition multiplicity."""
        return self._successors[node_id]

    def edges(self) -> list[GraphEdge]:
        """All edges, sorted by (src, dst)."""
        out = []
        for u in range(self.n_nodes):
            for v in sorted(self._successors[u]):
                out.append(GraphEdge(u, v, self._successors[u][v]))
        return out

    def edge_arrays(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Edges as parallel (src, dst, multiplicity) arrays, sorted by (src, dst)."""
        if self._edge_cache is None:
            es = self.edges()
            src = np.array([e.src for e in es], dtype=int)
            dst = np.array([e.dst for e in es], dtype=int)
            mult = np.array([e.multiplicity for e in es], dtype=int)
            self._edge_cache = (src, dst, mult)
        return self._edge_cache

    def nearest(self, z: np.ndarray) -> tuple[int, float]:
        """Nearest node to a normalized point: (node id, squared distance).

        Ties in distance resolve to the lowest node id.
        """
        if self.n_nodes == 0:
            raise ValueError("graph has no nodes")
        d2 = _sq_dists(self.representatives, z)
        i = int(np.argmin(d2))
        return i, float(d2[i])

    def find_node(self, state: np.ndarray) -> int:
        """Map a raw query state to the id of the nearest node.

        The state is normalized with the graph's normalizer; components
        outside the fitted bounds are clamped into [0, 1] and an
        OutOfRangeWarning is emitted.
        """
        z, clamped = self.normalizer.transform_query(state)
        if clamped:
            warnings.warn(
                "query state outside the normalization bounds was clamped",
                OutOfRangeWarning,
                stacklevel=2,
            )
        i, _ = self.nearest(z)
        return i


def _sq_dists(points: np.ndarray, z: np.ndarray) -> np.ndarray:
    d = points - z
    return (d * d).sum(axis=1)


def build(
    log: TransitionLog,
    epsilon: float,
    metric: str = "euclidean",
    normalizer: Normalizer | None = None,
) -> TransitionGraph:
    """Build the graph from a log by greedy single-pass insertion.

    Every state is normalized, then assigned to the nearest node whose
    representative lies within epsilon (ties to the lowest id), founding a new
    node otherwise. Representatives are never moved once placed, so the result
    depends on record order but needs only one pass. Fatal records increment
    their node's fatal count; consecutive records add one to the edge between
    their nodes (self-loops included).

    By default the normalizer is fitted from this log; pass one explicitly to
    reuse bounds (e.g. ``Normalizer.identity(dim)`` for pre-normalized data).
    """
    if metric != "euclidean":
        raise ValueError(f"unsupported metric {metric!r}")
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    if log.n_records == 0:
        raise ValueError("cannot build a graph from an empty log")
    if normalizer is None:
        from .logmodel import fit_normalizer

        normalizer = fit_normalizer(log)

    dim = log.schema.dim
    z_all = normalizer.transform(log.states())
    eps2 = epsilon * epsilon

    cap = 256
    reps = np.empty((cap, dim), dtype=float)
    n = 0
    total: list[int] = []
    fatal: list[int] = []
    successors: list[dict[int, int]] = []

    # Distances to the nodes existing at a block's start are batched; only
    # nodes founded inside the current block need a per-state scan, and that
    # group is small. A tie between the two groups goes to the batched
    # (older, lower-id) group, so assignment matches a full argmin scan. For
    # 2-d states the scan runs in scalar float math, which performs the same
    # IEEE operations as _sq_dists on a single row.
    block = 2048
    block_lo, n_block = -block, 0
    block_jo = block_do = None

    row = 0
    for episode in log.episodes:
        prev = -1
        for rec in episode:
            z = z_all[row]
            if row - block_lo >= block:
                block_lo, n_block = row, n
                if n > 0:
                    blk = z_all[row : row + block]
                    diff = blk[:, None, :] - reps[None, :n, :]
                    d2b = (diff * diff).sum(axis=2)
                    block_jo = d2b.argmin(axis=1)
                    block_do = d2b[np.arange(blk.shape[0]), block_jo]
            if n_block > 0:
                j, dmin = int(block_jo[row - block_lo]), float(block_do[row - block_lo])
            else:
                j, dmin = -1, np.inf
            row += 1
            if n > n_block:
                if dim == 2 and n - n_block <= 8:
                    z0, z1 = float(z[0]), float(z[1])
                    for k in range(n_block, n):
                        d0 = z0 - reps[k, 0]
                        d1 = z1 - reps[k, 1]
                        d2k = d0 * d0 + d1 * d1
                        if d2k < dmin:
                            j, dmin = k, d2k
                else:
                    d2new = _sq_dists(reps[n_block:n], z)
                    jn = int(np.argmin(d2new))
                    if d2new[jn] < dmin:
                        j, dmin = n_block + jn, float(d2new[jn])
            if j >= 0 and dmin <= eps2:
                node = j
            else:
                if n == cap:
                    cap *= 2
                    grown = np.empty((cap, dim), dtype=float)
                    grown[:n] = reps[:n]
                    reps = grown
                reps[n] = z
                total.append(0)
                fatal.append(0)
                successors.append({})
                node = n
                n += 1
            total[node] += 1
            if rec.fatal:
                fatal[node] += 1
            if prev >= 0:
                succ = successors[prev]
                succ[node] = succ.get(node, 0) + 1
            prev = node

    return TransitionGraph(
        epsilon,
        log.schema,
        normalizer,
        reps[:n].copy(),
        np.array(total, dtype=int),
        np.array(fatal, dtype=int),
        successors,
        metric=metric,
    )


def save(graph: TransitionGraph, path: str | Path) -> None:
    """Write a graph (and any attached risk labelings) as versioned JSON.

    The payload uses sorted keys and sorted edge order, so saving the same
    graph always produces identical bytes.
    """
    payload: dict = {
        "version": GRAPH_FORMAT_VERSION,
        "epsilon": graph.epsilon,
        "metric": graph.metric,
        "schema": {"features": list(graph.schema.names)},
        "normalizer": {
            "lo": [float(v) for v in graph.normalizer.lo],
            "hi": [float(v) for v in graph.normalizer.hi],
        },
        "nodes": [
            {
                "id": i,
                "representative": [float(v) for v in graph.representatives[i]],
                "total": int(graph.total_counts[i]),
                "fatal": int(graph.fatal_counts[i]),
            }
            for i in range(graph.n_nodes)
        ],
        "edges": [
            {"from": e.src, "to": e.dst, "count": e.multiplicity}
            for e in graph.edges()
        ],
    }
    risk_block: dict = {}
    if graph.binary_risk is not None:
        risk_block["binary"] = {
            "risky": graph.binary_risk.risky_ids(),
            "dead_ends_risky": graph.binary_risk.dead_ends_risky,
        }
    if graph.prob_risk is not None:
        risk_block["probabilistic"] = {
            "values": [float(v) for v in graph.prob_risk.values],
            "iterations": graph.prob_risk.iterations,
            "learning_rate": graph.prob_risk.learning_rate,
        }
    if risk_block:
        payload["risk"] = risk_block
    Path(path).write_text(
        json.dumps(payload, sort_keys=True, indent=2) + "\n", encoding="utf-8"
    )


def load(path: str | Path) -> TransitionGraph:
    """Read a graph written by save(). Round-trips exactly.

    Raises GraphFormatError for malformed files or an unsupported version.
    """
    path = Path(path)
    try:
        payload = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise GraphFormatError(f"{path}: invalid JSON ({exc.msg})") from exc
    if not isinstance(payload, dict):
        raise GraphFormatError(f"{path}: graph file must hold a JSON object")
    version = payload.get("version")
    if version != GRAPH_FORMAT_VERSION:
        raise GraphFormatError(
            f"{path}: unsupported graph format version {version!r} "
            f"(this release reads version {GRAPH_FORMAT_VERSION})"
        )
    try:
        schema = FeatureSchema(tuple(payload["schema"]["features"]))
        normalizer = Normalizer(
            np.array(payload["normalizer"]["lo"], dtype=float),
            np.array(payload["normalizer"]["hi"], dtype=float),
        )
        nodes = payload["nodes"]
        n = len(nodes)
        reps = np.zeros((n, schema.dim), dtype=float)
        total = np.zeros(n, dtype=int)
        fatal = np.zeros(n, dtype=int)
        for entry in nodes:
            i = int(entry["id"])
            reps[i] = np.array(entry["representative"], dtype=float)
            total[i] = int(entry["total"])
            fatal[i] = int(entry["fatal"])
        successors: list[dict[int, int]] = [{} for _ in range(n)]
        for entry in payload["edges"]:
            successors[int(entry["from"])][int(entry["to"])] = int(entry["count"])
        binary = None
        prob = None
        risk_block = payload.get("risk", {})
        if "binary" in risk_block:
            flags = np.zeros(n, dtype=bool)
            flags[np.array(risk_block["binary"]["risky"], dtype=int)] = True
            binary = BinaryRiskLabeling(
                flags, bool(risk_block["binary"]["dead_ends_risky"])
            )
        if "probabilistic" in risk_block:
            prob = ProbabilisticRisk(
                np.array(risk_block["probabilistic"]["values"], dtype=float),
                int(risk_block["probabilistic"]["iterations"]),
                risk_block["probabilistic"]["learning_rate"],
            )
        return TransitionGraph(
            float(payload["epsilon"]),
            schema,
            normalizer,
            reps,
            total,
            fatal,
            successors,
            metric=str(payload["metric"]),
            binary_risk=binary,
            prob_risk=prob,
        )
    except (KeyError, TypeError, IndexError) as exc:
        raise GraphFormatError(f"{path}: malformed graph file ({exc!r})") from exc
