"""Canonical interaction-log model: feature schema, transition records, JSONL
ingestion, and min-max state normalization fitted from a log."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np


class LogFormatError(ValueError):
    """A log file or in-memory log violates the canonical record format."""


class OutOfRangeWarning(UserWarning):
    """A query state fell outside the fitted bounds and was clamped."""


@dataclass(frozen=True)
class FeatureSchema:
    """Ordered, named state features.

    The order of ``names`` fixes the layout of every state vector in a log,
    so two logs are only comparable under the same schema.
    """

    names: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "names", tuple(str(n) for n in self.names))
        if len(self.names) == 0:
            raise ValueError("schema must declare at least one feature")
        if any(n == "" for n in self.names):
            raise ValueError("feature names must be non-empty")
        if len(set(self.names)) != len(self.names):
            raise ValueError("feature names must be unique")

    @property
    def dim(self) -> int:
        return len(self.names)


@dataclass
class TransitionRecord:
    """One observed step of one episode."""

    episode_id: str
    step: int
    state: np.ndarray
    fatal: bool
    terminal: bool

    def __post_init__(self):
        self.state = np.asarray(self.state, dtype=float)
        if self.state.ndim != 1:
            raise ValueError("state must be a flat vector")
        # cheaper than np.isfinite(...).all() for the tiny vectors logs carry
        if not all(map(math.isfinite, self.state.tolist())):
            raise LogFormatError("state components must be finite numbers")
        if self.step < 0:
            raise LogFormatError("step index must be non-negative")
        # A fatal outcome always ends the episode.
        if self.fatal and not self.terminal:
            raise LogFormatError("fatal record must also be terminal")


@dataclass
class TransitionLog:
    """Episodes of transition records under one feature schema.

    Within an episode, steps run 0, 1, 2, ... with no gaps, and no record may
    follow a terminal one. Consecutive records form the observed transitions;
    nothing is inferred across episode boundaries.
    """

    schema: FeatureSchema
    episodes: list[list[TransitionRecord]]

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        seen_ids: set[str] = set()
        for episode in self.episodes:
            if not episode:
                raise LogFormatError("empty episode")
            eid = episode[0].episode_id
            if eid in seen_ids:
                raise LogFormatError(f"episode id {eid!r} is not contiguous in the log")
            seen_ids.add(eid)
            for i, rec in enumerate(episode):
                if rec.episode_id != eid:
                    raise LogFormatError(
                        f"episode {eid!r} mixes records from {rec.episode_id!r}"
                    )
                if rec.step != i:
                    raise LogFormatError(
                        f"episode {eid!r}: expected step {i}, found {rec.step}"
                    )
                if rec.state.shape != (self.schema.dim,):
                    raise LogFormatError(
                        f"episode {eid!r} step {i}: state has {rec.state.shape[0]} "
                        f"features, schema declares {self.schema.dim}"
                    )
                if rec.terminal and i != len(episode) - 1:
                    raise LogFormatError(
                        f"episode {eid!r}: record follows terminal step {i}"
                    )

    @property
    def n_records(self) -> int:
        return sum(len(ep) for ep in self.episodes)

    @property
    def n_episodes(self) -> int:
        return len(self.episodes)

    @property
    def n_transitions(self) -> int:
        return sum(len(ep) - 1 for ep in self.episodes)

    def states(self) -> np.ndarray:
        """All states stacked into an (n_records, dim) array, episode order."""
        return np.array(
            [rec.state for ep in self.episodes for rec in ep], dtype=float
        ).reshape(self.n_records, self.schema.dim)


def ingest(path: str | Path, schema: FeatureSchema) -> TransitionLog:
    """Read a JSONL log, one record object per line.

    Each line carries ``episode`` (string), ``step`` (int), ``state`` (list of
    floats matching the schema), ``fatal`` and ``terminal`` (bools). Records of
    an episode must be contiguous and in step order. Violations raise
    LogFormatError naming the offending line.
    """
    path = Path(path)
    episodes: list[list[TransitionRecord]] = []
    order: dict[str, int] = {}
    closed: set[str] = set()
    with path.open("r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise LogFormatError(f"line {lineno}: invalid JSON ({exc.msg})") from exc
            if not isinstance(obj, dict):
                raise LogFormatError(f"line {lineno}: record must be a JSON object")
            missing = {"episode", "step", "state", "fatal", "terminal"} - obj.keys()
            if missing:
                raise LogFormatError(
                    f"line {lineno}: missing fields {sorted(missing)}"
                )
            eid = obj["episode"]
            if not isinstance(eid, str):
                raise LogFormatError(f"line {lineno}: episode id must be a string")
            if not isinstance(obj["step"], int) or isinstance(obj["step"], bool):
                raise LogFormatError(f"line {lineno}: step must be an integer")
            if not isinstance(obj["fatal"], bool) or not isinstance(obj["terminal"], bool):
                raise LogFormatError(f"line {lineno}: fatal/terminal must be booleans")
            state = obj["state"]
            if not isinstance(state, list) or len(state) != schema.dim:
                raise LogFormatError(
                    f"line {lineno}: state must list {schema.dim} features"
                )
            try:
                rec = TransitionRecord(eid, obj["step"], state, obj["fatal"], obj["terminal"])
            except (LogFormatError, ValueError, TypeError) as exc:
                raise LogFormatError(f"line {lineno}: {exc}") from exc

            if eid in order and order[eid] != len(episodes) - 1:
                raise LogFormatError(
                    f"line {lineno}: episode {eid!r} is not contiguous"
                )
            if eid not in order:
                order[eid] = len(episodes)
                episodes.append([])
            episode = episodes[order[eid]]
            if eid in closed:
                raise LogFormatError(
                    f"line {lineno}: record after terminal step of episode {eid!r}"
                )
            if rec.step != len(episode):
                raise LogFormatError(
                    f"line {lineno}: episode {eid!r} expected step {len(episode)}, "
                    f"found {rec.step}"
                )
            episode.append(rec)
            if rec.terminal:
                closed.add(eid)
    if not episodes:
        raise LogFormatError(f"{path}: log contains no records")
    return TransitionLog(schema, episodes)


def emit(log: TransitionLog, path: str | Path) -> None:
    """Write a log back to JSONL in canonical field order."""
    path = Path(path)
    with path.open("w", encoding="utf-8", newline="\n") as fh:
        for episode in log.episodes:
            for rec in episode:
                fh.write(
                    json.dumps(
                        {
                            "episode": rec.episode_id,
                            "step": rec.step,
                            "state": [float(v) for v in rec.state],
                            "fatal": rec.fatal,
                            "terminal": rec.terminal,
                        },
                        sort_keys=True,
                    )
                )
                fh.write("\n")


def write_schema(schema: FeatureSchema, path: str | Path) -> None:
    Path(path).write_text(
        json.dumps({"features": list(schema.names)}, sort_keys=True) + "\n",
        encoding="utf-8",
    )


def read_schema(path: str | Path) -> FeatureSchema:
    try:
        obj = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise LogFormatError(f"{path}: invalid schema JSON ({exc.msg})") from exc
    if not isinstance(obj, dict) or "features" not in obj:
        raise LogFormatError(f"{path}: schema must be an object with a 'features' list")
    return FeatureSchema(tuple(obj["features"]))


@dataclass(frozen=True)
class Normalizer:
    """Per-dimension min-max map onto [0, 1].

    Bounds come from the data the normalizer was fitted on. A dimension whose
    observed min equals its max carries no information; it maps to 0.
    """

    lo: np.ndarray
    hi: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "lo", np.asarray(self.lo, dtype=float))
        object.__setattr__(self, "hi", np.asarray(self.hi, dtype=float))
        if self.lo.shape != self.hi.shape or self.lo.ndim != 1:
            raise ValueError("bounds must be matching flat vectors")
        if np.any(self.hi < self.lo):
            raise ValueError("upper bounds must not be below lower bounds")

    @property
    def dim(self) -> int:
        return self.lo.shape[0]

    @property
    def span(self) -> np.ndarray:
        return self.hi - self.lo

    @staticmethod
    def identity(dim: int) -> "Normalizer":
        """Pass-through bounds [0, 1] for data that is already normalized."""
        return Normalizer(np.zeros(dim), np.ones(dim))

    def transform(self, states: np.ndarray) -> np.ndarray:
        states = np.asarray(states, dtype=float)
        span = self.span
        safe = np.where(span > 0, span, 1.0)
        out = (states - self.lo) / safe
        # Degenerate dimensions collapse to 0 rather than dividing by zero.
        if np.any(span == 0):
            out[..., span == 0] = 0.0
        return out

    def transform_query(self, state: np.ndarray) -> tuple[np.ndarray, bool]:
        """Normalize one query state, clamping into [0, 1].

        Returns the normalized state and whether clamping occurred.
        """
        state = np.asarray(state, dtype=float)
        if state.shape != (self.dim,):
            raise ValueError(
                f"query has {state.shape} features, normalizer expects {self.dim}"
            )
        z = self.transform(state)
        clamped = bool(np.any(z < 0.0) or np.any(z > 1.0))
        return np.clip(z, 0.0, 1.0), clamped

    def inverse(self, normalized: np.ndarray) -> np.ndarray:
        """Map normalized coordinates back to raw units (degenerate dims to lo)."""
        normalized = np.asarray(normalized, dtype=float)
        return self.lo + normalized * self.span


def fit_normalizer(log: TransitionLog) -> Normalizer:
    """Fit per-dimension min-max bounds over every state in the log."""
    if log.n_records == 0:
        raise ValueError("cannot fit a normalizer on an empty log")
    states = log.states()
    return Normalizer(states.min(axis=0), states.max(axis=0))
