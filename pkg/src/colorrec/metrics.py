"""Evaluation measures: binned accuracy, distribution, similarity, diversity.

Accuracy and distribution share the 16x16x16 RGB binning; similarity and
diversity measure CIELAB distances (an RGB alternative exists for
calibration against published tables, selected by the `space` argument).
All functions are pure; aggregation over cases happens in the bench.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import permutations, product
from typing import Iterable, Sequence

from .colors import Color, color_to_lab, delta_e, quantize
from .document import Palette
from .errors import ValidationError

_SPACES = ("lab", "rgb")


def _distance(x: Color, y: Color, space: str) -> float:
    if space == "lab":
        return delta_e(color_to_lab(x), color_to_lab(y))
    return math.sqrt((x.r - y.r) ** 2 + (x.g - y.g) ** 2 + (x.b - y.b) ** 2)


def _check_space(space: str):
    if space not in _SPACES:
        raise ValidationError(f"unknown color space {space!r}")


def bin_accuracy(cases: Sequence[tuple[Sequence[Color], Sequence[Color]]]) -> float:
    """Percentage of cases where every predicted color lands in its ground
    truth's bin.  A case with any mismatched slot counts as incorrect."""
    if not cases:
        raise ValidationError("accuracy needs at least one case")
    correct = 0
    for i, (predicted, truth) in enumerate(cases):
        if len(predicted) != len(truth):
            raise ValidationError(
                f"case {i}: predicted {len(predicted)} colors for {len(truth)} slots"
            )
        if not truth:
            raise ValidationError(f"case {i} is empty")
        if all(quantize(p) == quantize(t) for p, t in zip(predicted, truth)):
            correct += 1
    return 100.0 * correct / len(cases)


def distribution(colors: Sequence[Color]) -> float:
    """Shannon entropy (nats) of the empirical distribution over occupied
    16^3 bins.  Zero when everything falls into a single bin."""
    if not colors:
        raise ValidationError("distribution needs at least one color")
    counts: dict = {}
    for c in colors:
        b = quantize(c)
        counts[b] = counts.get(b, 0) + 1
    total = len(colors)
    entropy = -sum((n / total) * math.log(n / total) for n in counts.values())
    return entropy + 0.0


def _filled_colors(p: Palette, what: str) -> list[Color]:
    colors = []
    for s in p.slots:
        if s is None:
            raise ValidationError(f"{what} palette contains a masked slot")
        colors.append(s)
    return colors


def _min_assignment(a: list[Color], b: list[Color], space: str) -> float:
    """Exact minimal mean distance over slot matchings.

    Equal lengths: minimum over all bijections (at most 120 permutations
    for n=5).  Unequal: the shorter palette is padded by duplicating its
    colors, equivalent to the cheapest surjection of the longer palette
    onto the shorter one, enumerated exactly (at most 4^5 maps).
    """
    if len(a) < len(b):
        a, b = b, a
    # a is now the longer (or equal) palette.
    cost = [[_distance(x, y, space) for y in b] for x in a]
    if len(a) == len(b):
        best = min(
            sum(cost[i][j] for i, j in enumerate(perm))
            for perm in permutations(range(len(b)))
        )
    else:
        everyone = frozenset(range(len(b)))
        best = min(
            sum(cost[i][j] for i, j in enumerate(mapping))
            for mapping in product(range(len(b)), repeat=len(a))
            if frozenset(mapping) == everyone
        )
    return best / len(a)


def _chamfer(a: list[Color], b: list[Color], space: str) -> float:
    """Symmetric mean nearest-neighbor distance, pooled over both palettes."""
    forward = [min(_distance(x, y, space) for y in b) for x in a]
    backward = [min(_distance(y, x, space) for x in a) for y in b]
    pooled = forward + backward
    return sum(pooled) / len(pooled)


def palette_similarity(
    p: Palette, q: Palette, strategy: str = "min_assignment", space: str = "lab"
) -> float:
    """Distance between two fully filled palettes; 0 means equal content."""
    _check_space(space)
    a = _filled_colors(p, "first")
    b = _filled_colors(q, "second")
    if strategy == "min_assignment":
        return _min_assignment(a, b, space)
    if strategy == "chamfer":
        return _chamfer(a, b, space)
    raise ValidationError(f"unknown similarity strategy {strategy!r}")


def palette_diversity(p: Palette, space: str = "lab") -> float:
    """Mean pairwise distance among the palette's colors."""
    _check_space(space)
    colors = _filled_colors(p, "diversity")
    if len(colors) < 2:
        raise ValidationError("diversity needs at least 2 colors")
    total = 0.0
    pairs = 0
    for i in range(len(colors)):
        for j in range(i + 1, len(colors)):
            total += _distance(colors[i], colors[j], space)
            pairs += 1
    return total / pairs


def mean_std(values: Iterable[float]) -> tuple[float, float]:
    """Population mean and standard deviation (ddof 0)."""
    values = list(values)
    if not values:
        raise ValidationError("mean over empty input")
    mean = sum(values) / len(values)
    variance = sum((v - mean) ** 2 for v in values) / len(values)
    return mean, math.sqrt(variance)


@dataclass(frozen=True)
class MetricsReport:
    """Aggregated benchmark results plus the metadata needed to rerun.

    Accuracy/distribution are keyed by mask count; the element breakdown
    holds (accuracy, case-share percentage) per element kind; similarity
    and diversity hold (mean, std) pairs per strategy.  Numbers stay at
    full precision here; rounding to 2 decimals happens at emission.
    """

    task: str
    accuracy: dict = field(default_factory=dict)
    distribution: dict = field(default_factory=dict)
    element_breakdown: dict = field(default_factory=dict)
    similarity: dict = field(default_factory=dict)
    diversity: tuple[float, float] | None = None
    case_counts: dict = field(default_factory=dict)
    parse_failures: int = 0
    incomplete: bool = False
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        for table in (self.accuracy,):
            for k, v in table.items():
                if not 0.0 <= v <= 100.0:
                    raise ValidationError(f"accuracy[{k}]={v} outside [0, 100]")
        for kind, (acc, ratio) in self.element_breakdown.items():
            if not 0.0 <= acc <= 100.0:
                raise ValidationError(f"element accuracy for {kind} outside [0, 100]")
            if not 0.0 <= ratio <= 100.0:
                raise ValidationError(f"element ratio for {kind} outside [0, 100]")
