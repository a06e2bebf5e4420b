"""Trace serialization: CSV tables and binary PPM heatmaps.

The heatmap paints one pixel column per step and one band of rows per
feature: each step's direction vector is normalized to [-1, 1] by its own max
absolute value, positive values shade toward blue, negative toward red, zero
(or a missing direction) stays white.
"""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

from .explain import CAP_EXCEEDED, EpisodeTrace


def direction_matrix(trace: EpisodeTrace) -> np.ndarray:
    """Stack a trace's directions into a (features, steps) matrix.

    Steps without a direction contribute a zero column.
    """
    dim = len(trace.feature_names)
    out = np.zeros((dim, len(trace)), dtype=float)
    for t, g in enumerate(trace.directions):
        if g is not None:
            out[:, t] = g
    return out


def normalize_columns(matrix: np.ndarray) -> np.ndarray:
    """Scale each column of a (features, steps) matrix into [-1, 1] by the
    column's max absolute value; all-zero columns stay zero."""
    matrix = np.asarray(matrix, dtype=float)
    peaks = np.abs(matrix).max(axis=0)
    safe = np.where(peaks > 0, peaks, 1.0)
    return matrix / safe[None, :]


def _round_half_up(x: np.ndarray) -> np.ndarray:
    # Plain decimal rounding; np.round's bankers ties would shift pixel values.
    return np.floor(x + 0.5)


def heatmap_pixels(matrix: np.ndarray) -> np.ndarray:
    """Map a [-1, 1] matrix to RGB rows: +1 blue, -1 red, 0 white.

    Returns a (rows, cols, 3) uint8 array, one pixel row per matrix row.
    """
    matrix = np.asarray(matrix, dtype=float)
    if np.any(np.abs(matrix) > 1.0):
        raise ValueError("heatmap values must lie in [-1, 1]")
    pos = np.clip(matrix, 0.0, 1.0)
    neg = np.clip(-matrix, 0.0, 1.0)
    fade_pos = _round_half_up(255.0 * (1.0 - pos)).astype(np.uint8)
    fade_neg = _round_half_up(255.0 * (1.0 - neg)).astype(np.uint8)
    rgb = np.empty(matrix.shape + (3,), dtype=np.uint8)
    positive = matrix >= 0
    # Toward blue: damp R and G. Toward red: damp G and B.
    rgb[..., 0] = np.where(positive, fade_pos, 255)
    rgb[..., 1] = np.where(positive, fade_pos, fade_neg)
    rgb[..., 2] = np.where(positive, 255, fade_neg)
    return rgb


def write_ppm(pixels: np.ndarray, path: str | Path) -> None:
    """Write an (h, w, 3) uint8 array as a binary P6 PPM."""
    pixels = np.asarray(pixels, dtype=np.uint8)
    if pixels.ndim != 3 or pixels.shape[2] != 3:
        raise ValueError("pixels must have shape (height, width, 3)")
    h, w = pixels.shape[:2]
    with Path(path).open("wb") as fh:
        fh.write(f"P6\n{w} {h}\n255\n".encode("ascii"))
        fh.write(pixels.tobytes())


def render_heatmap(
    trace: EpisodeTrace,
    path: str | Path,
    vscale: int = 5,
    exclude: tuple[str, ...] = (),
) -> None:
    """Render a trace's direction weights as a PPM heatmap file.

    Each kept feature occupies ``vscale`` pixel rows; excluded feature names
    are dropped before per-step normalization, so the remaining weights still
    span the full color range.
    """
    if vscale < 1:
        raise ValueError("vscale must be at least 1")
    if len(trace) == 0:
        raise ValueError("cannot render an empty trace")
    unknown = set(exclude) - set(trace.feature_names)
    if unknown:
        raise ValueError(f"unknown feature names in exclude: {sorted(unknown)}")
    keep = [i for i, name in enumerate(trace.feature_names) if name not in exclude]
    if not keep:
        raise ValueError("cannot render a heatmap with every feature excluded")
    matrix = direction_matrix(trace)[keep]
    pixels = heatmap_pixels(normalize_columns(matrix))
    write_ppm(np.repeat(pixels, vscale, axis=0), path)


def trace_csv(trace: EpisodeTrace, path: str | Path) -> None:
    """Write a trace as CSV: step, distance_to_risk, capped, then one g_<name>
    column per feature.

    A capped distance is serialized as the cap value with capped=true. Steps
    without a direction leave their g columns empty.
    """
    with Path(path).open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(
            ["step", "distance_to_risk", "capped"]
            + [f"g_{name}" for name in trace.feature_names]
        )
        for t in range(len(trace)):
            d = trace.distances[t]
            capped = d is CAP_EXCEEDED
            row = [t, trace.cap if capped else int(d), "true" if capped else "false"]
            g = trace.directions[t]
            if g is None:
                row += [""] * len(trace.feature_names)
            else:
                row += [repr(float(v)) for v in g]
            writer.writerow(row)


def read_trace_csv(path: str | Path) -> EpisodeTrace:
    """Read a trace written by trace_csv back into an EpisodeTrace.

    The cap is recovered from the capped rows when any exist; otherwise the
    largest finite distance is used, which is a lower bound on the original.
    """
    with Path(path).open("r", encoding="utf-8", newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise ValueError(f"{path}: empty trace file")
    header = rows[0]
    if header[:3] != ["step", "distance_to_risk", "capped"] or not all(
        h.startswith("g_") for h in header[3:]
    ):
        raise ValueError(f"{path}: unrecognized trace header {header!r}")
    names = tuple(h[2:] for h in header[3:])
    distances: list = []
    directions: list = []
    cap = 0
    for lineno, row in enumerate(rows[1:], start=2):
        if len(row) != len(header):
            raise ValueError(f"{path}: line {lineno} has {len(row)} fields")
        value, capped = int(row[1]), row[2] == "true"
        if capped:
            cap = max(cap, value)
            distances.append(CAP_EXCEEDED)
        else:
            cap = max(cap, value)
            distances.append(value)
        if all(cell == "" for cell in row[3:]):
            directions.append(None)
        else:
            directions.append(np.array([float(cell) for cell in row[3:]]))
    return EpisodeTrace(names, tuple(distances), tuple(directions), cap)
