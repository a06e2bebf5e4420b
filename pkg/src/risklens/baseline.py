"""Transition-blind perturbation baseline.

The contrast case for graph-aware explanations: sample random integer offsets
around the query state, keep the ones that land on positions the environment
considers valid, label each by an immediate-hazard oracle, and fit the same
logistic surrogate on the offsets. No logged dynamics are consulted, which is
exactly why it can blame unreachable hazards.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .explain import Explanation, NoDirection, fit_logistic
from .toyenvs import TILE_LAVA, TILE_WALL, GridMap


@dataclass(frozen=True)
class PerturbationSpec:
    """How to perturb and judge states without a transition graph.

    ``offsets`` lists, per feature, the integer offsets to draw from
    uniformly. ``is_valid`` rejects perturbed states that do not exist in the
    environment; ``label`` marks an existing state 1 (hazard) or 0.
    """

    offsets: tuple[tuple[int, ...], ...]
    is_valid: Callable[[np.ndarray], bool]
    label: Callable[[np.ndarray], int]

    def __post_init__(self):
        object.__setattr__(
            self, "offsets", tuple(tuple(int(o) for o in row) for row in self.offsets)
        )
        if not self.offsets or any(len(row) == 0 for row in self.offsets):
            raise ValueError("every feature needs at least one candidate offset")

    @property
    def dim(self) -> int:
        return len(self.offsets)


def grid_spec(grid: GridMap, reach: int = 3) -> PerturbationSpec:
    """Perturbation rules for a gridworld with (x, y) offset features.

    Offsets span -reach..+reach per feature. A perturbed position is invalid
    when it falls on a wall or off the map; a position on lava is labeled 1.
    """
    if reach < 1:
        raise ValueError("reach must be at least 1")
    span = tuple(range(-reach, reach + 1))

    def is_valid(state: np.ndarray) -> bool:
        tile = grid.tile_at_offset(state[0], state[1])
        return tile is not None and tile != TILE_WALL

    def label(state: np.ndarray) -> int:
        return int(grid.tile_at_offset(state[0], state[1]) == TILE_LAVA)

    return PerturbationSpec((span, span), is_valid, label)


def perturb_explain(
    state: np.ndarray,
    spec: PerturbationSpec,
    samples: int = 1000,
    seed: int = 0,
    reg: float = 1e-3,
    iters: int = 500,
) -> Explanation | NoDirection:
    """Fit a logistic direction on labeled random perturbations of one state.

    Draws one offset per feature per sample, drops samples whose perturbed
    state is invalid, labels the rest, and runs the shared logistic fit on
    the offset vectors. Raises ValueError when every sample was invalid;
    returns NoDirection when the valid samples are single-class.
    """
    state = np.asarray(state, dtype=float)
    if state.shape != (spec.dim,):
        raise ValueError(f"state has {state.shape} features, spec expects {spec.dim}")
    if samples < 1:
        raise ValueError("samples must be at least 1")
    rng = np.random.default_rng(seed)
    deltas = np.column_stack(
        [rng.choice(np.array(row, dtype=float), size=samples) for row in spec.offsets]
    )
    points = state + deltas
    valid = np.array([spec.is_valid(p) for p in points], dtype=bool)
    if not valid.any():
        raise ValueError("every perturbation landed on an invalid state")
    deltas = deltas[valid]
    labels = np.array([spec.label(p) for p in points[valid]], dtype=float)
    k = int(labels.sum())
    if k == 0 or k == len(labels):
        return NoDirection(len(labels), k, "all valid perturbations share one label")
    w, b = fit_logistic(deltas, labels, reg=reg, iters=iters)
    return Explanation(w, b, "classification", len(labels), k)
