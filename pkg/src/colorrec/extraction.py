"""Palette extraction from pixel grids.

Clusters image colors in CIELAB and returns up to five representatives
ordered by how much of the image they cover, with every returned pair at
least deltaE 10 apart.  The clustering runs over the color histogram
(unique colors weighted by pixel count) rather than raw pixels, which
makes the result independent of pixel iteration order, and each centroid
is snapped to the nearest actual image color so pure regions come back
exactly.
"""

from __future__ import annotations

import random
from collections import Counter
from typing import Iterable, Sequence

import numpy as np

from .colors import Color, color_to_lab
from .document import Palette
from .errors import ValidationError

MIN_DELTA_E = 10.0
_MAX_UNIQUE = 10_000
_MAX_ITERATIONS = 50
_INIT_SEED = 0x5EED


def _flatten(pixels) -> list[Color]:
    if not pixels:
        return []
    first = pixels[0] if isinstance(pixels, Sequence) else None
    if isinstance(first, Color):
        return list(pixels)
    flat: list[Color] = []
    for row in pixels:
        flat.extend(row)
    return flat


def _lab_matrix(colors: Iterable[Color]) -> np.ndarray:
    return np.array(
        [(lab.l_star, lab.a_star, lab.b_star) for lab in map(color_to_lab, colors)]
    )


def _kmeans_pp_init(points: np.ndarray, weights: np.ndarray, k: int, rng: random.Random) -> np.ndarray:
    """Weighted k-means++ seeding over the histogram points."""
    chosen = [_weighted_pick(weights, rng)]
    d2 = np.sum((points - points[chosen[0]]) ** 2, axis=1)
    while len(chosen) < k:
        probs = weights * d2
        if probs.sum() <= 0:
            remaining = [i for i in range(len(points)) if i not in chosen]
            chosen.append(remaining[0])
        else:
            chosen.append(_weighted_pick(probs, rng))
        d2 = np.minimum(d2, np.sum((points - points[chosen[-1]]) ** 2, axis=1))
    return points[chosen].copy()


def _weighted_pick(weights: np.ndarray, rng: random.Random) -> int:
    total = float(weights.sum())
    target = rng.random() * total
    cumulative = np.cumsum(weights)
    return int(np.searchsorted(cumulative, target, side="right").clip(0, len(weights) - 1))


def _lloyd(points: np.ndarray, weights: np.ndarray, centroids: np.ndarray) -> np.ndarray:
    assignment = None
    for _ in range(_MAX_ITERATIONS):
        d2 = ((points[:, None, :] - centroids[None, :, :]) ** 2).sum(axis=2)
        new_assignment = d2.argmin(axis=1)
        if assignment is not None and np.array_equal(new_assignment, assignment):
            break
        assignment = new_assignment
        for j in range(len(centroids)):
            mask = assignment == j
            w = weights[mask]
            if w.sum() > 0:
                centroids[j] = (points[mask] * w[:, None]).sum(axis=0) / w.sum()
    return assignment


def extract_palette(pixels, max_colors: int = 5) -> Palette:
    """Reduce a pixel grid to at most max_colors well-separated colors.

    Accepts a rectangular grid (rows of Colors) or a flat sequence.
    Returned slots are ordered by descending coverage; any two satisfy
    deltaE >= 10.  Deterministic for a fixed multiset of pixels.
    """
    if not 1 <= max_colors <= 5:
        raise ValidationError("max_colors must be between 1 and 5")
    flat = _flatten(pixels)
    if not flat:
        raise ValidationError("pixel grid is empty")

    histogram = Counter(c.as_tuple() for c in flat)
    ranked = sorted(histogram.items(), key=lambda item: (-item[1], item[0]))[:_MAX_UNIQUE]
    colors = [Color(*rgb) for rgb, _ in ranked]
    weights = np.array([count for _, count in ranked], dtype=float)
    points = _lab_matrix(colors)

    k = min(max_colors, len(colors))
    if k == len(colors):
        assignment = np.arange(len(colors))
    else:
        rng = random.Random(_INIT_SEED)
        centroids = _kmeans_pp_init(points, weights, k, rng)
        assignment = _lloyd(points, weights, centroids)

    clusters = []
    for j in sorted(set(assignment.tolist())):
        member_idx = np.flatnonzero(assignment == j)
        w = weights[member_idx]
        centroid = (points[member_idx] * w[:, None]).sum(axis=0) / w.sum()
        d2 = ((points[member_idx] - centroid) ** 2).sum(axis=1)
        snap = member_idx[int(d2.argmin())]
        clusters.append((float(w.sum()), colors[snap], points[snap]))

    clusters.sort(key=lambda c: (-c[0], c[1].as_tuple()))
    kept: list[tuple[float, Color, np.ndarray]] = []
    for weight, color, lab in clusters:
        merged = False
        for i, (kw, kc, klab) in enumerate(kept):
            if float(np.linalg.norm(lab - klab)) < MIN_DELTA_E:
                kept[i] = (kw + weight, kc, klab)
                merged = True
                break
        if not merged:
            kept.append((weight, color, lab))

    kept.sort(key=lambda c: (-c[0], c[1].as_tuple()))
    return Palette(tuple(color for _, color, _ in kept))


def load_pixels(path) -> list[list[Color]]:
    """Decode a PNG/BMP image into a row-major grid of Colors."""
    from PIL import Image

    with Image.open(path) as img:
        grid = np.asarray(img.convert("RGB"), dtype=np.uint8)
    return [[Color(*map(int, px)) for px in row] for row in grid]
