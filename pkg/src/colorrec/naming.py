"""Word <-> hex conversion backed by a color-name dictionary.

The dictionary file is UTF-8 lines of `name<TAB>#rrggbb` (the xkcd rgb.txt
layout). hex->word picks the nearest dictionary color in plain RGB space;
word->hex falls back to a 5-nearest-neighbor blend in sentence-embedding
space, weighted by reciprocal distance.
"""

from __future__ import annotations

import math
import re
import threading
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import IO, Iterable

from .colors import Color, hex_to_color
from .errors import ValidationError

_WS_RE = re.compile(r"\s+")

BLEND_NEIGHBORS = 5


def normalize_word(word: str) -> str:
    """Lowercase, trim, and collapse internal whitespace."""
    return _WS_RE.sub(" ", word.strip().lower())


@dataclass
class ColorDictionary:
    """Immutable word/color table with a lazily filled embedding cache.

    entries keeps file order, which is the tie-break anchor for nearest
    searches. The embedding cache is keyed by provider name so different
    embedders never mix, and guarded by a lock for concurrent lookups.
    """

    entries: list[tuple[str, Color]]
    _word_lookup: dict[str, Color] = field(init=False, repr=False)
    _color_lookup: dict[tuple[int, int, int], str] = field(init=False, repr=False)
    _embedding_cache: dict[str, list[list[float]]] = field(default_factory=dict, repr=False)
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False)

    def __post_init__(self):
        self._word_lookup = {}
        self._color_lookup = {}
        for word, color in self.entries:
            self._word_lookup.setdefault(word, color)
            self._color_lookup.setdefault(color.as_tuple(), word)

    def __len__(self) -> int:
        return len(self.entries)

    def lookup_word(self, word: str) -> Color | None:
        return self._word_lookup.get(normalize_word(word))

    def lookup_color(self, c: Color) -> str | None:
        return self._color_lookup.get(c.as_tuple())

    def word_vectors(self, embedder) -> list[list[float]]:
        """Unit-normalized embedding of every entry word, cached per provider."""
        with self._lock:
            cached = self._embedding_cache.get(embedder.name)
            if cached is not None:
                return cached
            vectors = [_unit(v) for v in embedder.embed([w for w, _ in self.entries])]
            self._embedding_cache[embedder.name] = vectors
            return vectors


def _unit(vec: Iterable[float]) -> list[float]:
    v = list(float(x) for x in vec)
    norm = math.sqrt(sum(x * x for x in v))
    if norm == 0.0:
        return v
    return [x / norm for x in v]


def load_dictionary(source: str | Path | IO[bytes] | IO[str]) -> ColorDictionary:
    """Load `name<TAB>#rrggbb` lines; blank and '#'-prefixed lines skipped.

    Duplicate words keep their first occurrence. Malformed lines raise with
    the offending line number.
    """
    if isinstance(source, (str, Path)):
        with open(source, "r", encoding="utf-8") as fh:
            text = fh.read()
    else:
        raw = source.read()
        text = raw.decode("utf-8") if isinstance(raw, bytes) else raw

    entries: list[tuple[str, Color]] = []
    seen: set[str] = set()
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) != 2:
            raise ValidationError(f"line {lineno}: expected 'name<TAB>#rrggbb', got {line!r}")
        word = normalize_word(parts[0])
        if not word:
            raise ValidationError(f"line {lineno}: empty color name")
        try:
            color = hex_to_color(parts[1].strip())
        except ValidationError as exc:
            raise ValidationError(f"line {lineno}: {exc}") from exc
        if word in seen:
            continue
        seen.add(word)
        entries.append((word, color))
    return ColorDictionary(entries)


def default_dictionary_path() -> Path:
    """Prefer ./data/xkcd_rgb.txt, falling back to the packaged copy."""
    local = Path("data/xkcd_rgb.txt")
    if local.exists():
        return local
    return Path(str(resources.files("colorrec").joinpath("data/xkcd_rgb.txt")))


def hex_to_word(c: Color, dictionary: ColorDictionary) -> str:
    """Closest dictionary word by RGB Euclidean distance; exact hex wins.

    Ties break toward the earliest dictionary entry.
    """
    if len(dictionary) == 0:
        raise ValidationError("color dictionary is empty")
    exact = dictionary.lookup_color(c)
    if exact is not None:
        return exact
    best_word = dictionary.entries[0][0]
    best_dist = None
    for word, entry in dictionary.entries:
        d = (
            (c.r - entry.r) ** 2
            + (c.g - entry.g) ** 2
            + (c.b - entry.b) ** 2
        )
        if best_dist is None or d < best_dist:
            best_dist = d
            best_word = word
    return best_word


def word_to_hex(word: str, dictionary: ColorDictionary, embedder) -> Color:
    """Dictionary word -> its color; unknown word -> 5-NN embedding blend.

    The blend embeds the query and all dictionary words, takes the
    BLEND_NEIGHBORS nearest by Euclidean distance over unit vectors, and
    returns the per-channel mean weighted by reciprocal distance, rounded
    half away from zero. A zero distance (duplicate embedding) returns that
    entry's color directly.
    """
    query = normalize_word(word)
    if not query:
        raise ValidationError("empty color word")
    if len(dictionary) == 0:
        raise ValidationError("color dictionary is empty")
    exact = dictionary.lookup_word(query)
    if exact is not None:
        return exact

    query_vec = _unit(embedder.embed([query])[0])
    vectors = dictionary.word_vectors(embedder)
    distances = []
    for idx, vec in enumerate(vectors):
        d = math.sqrt(sum((a - b) ** 2 for a, b in zip(query_vec, vec)))
        distances.append((d, idx))
    distances.sort(key=lambda t: (t[0], t[1]))
    nearest = distances[:BLEND_NEIGHBORS]

    for d, idx in nearest:
        if d == 0.0:
            return dictionary.entries[idx][1]

    inv = [1.0 / d for d, _ in nearest]
    total = sum(inv)
    weights = [w / total for w in inv]
    channels = []
    for pick in range(3):
        acc = 0.0
        for w, (_, idx) in zip(weights, nearest):
            acc += w * dictionary.entries[idx][1].as_tuple()[pick]
        channels.append(int(math.floor(acc + 0.5)))
    return Color(*channels)
