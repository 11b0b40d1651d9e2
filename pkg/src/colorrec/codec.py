"""Render colors as representation strings and read them back.

Every color travels through prompts and replies as text.  The canonical
in-memory form is always :class:`~colorrec.colors.Color`; this module owns
the string views for each representation:

    word     "cerulean"
    hexcode  "#0485d1"
    rgb      "[4, 133, 209]"
    cielab   "(53.64, -4.69, -48.02)"
    wordhex  "cerulean (#0485d1)"

Encoding is strict and canonical.  Decoding is mildly lenient about
whitespace, bracket style, and numeric spelling, because replies arrive
from language models, but anything ambiguous raises ColorFormatError.
"""

from __future__ import annotations

import re

from .colors import (
    Color,
    LabColor,
    Representation,
    color_to_hex,
    color_to_lab,
    hex_to_color,
    lab_to_color,
)
from .errors import ColorFormatError, ValidationError
from .naming import ColorDictionary, hex_to_word, normalize_word, word_to_hex

_WORDHEX_RE = re.compile(r"^(.+?)\s*\(\s*(#?[0-9a-fA-F]{6})\s*\)$")
_HEX_BARE_RE = re.compile(r"^#?[0-9a-fA-F]{6}$")
_TRIPLE_RE = re.compile(
    r"^[\[\(]?\s*(-?\d+(?:\.\d+)?)\s*,\s*(-?\d+(?:\.\d+)?)\s*,\s*(-?\d+(?:\.\d+)?)\s*[\]\)]?$"
)


def _format_number(value: float) -> str:
    """Format with at most two decimals and no trailing zeros: 100, 0, 53.24."""
    text = f"{value:.2f}".rstrip("0").rstrip(".")
    return "0" if text == "-0" else text


def encode_color(
    c: Color,
    representation: Representation,
    dictionary: ColorDictionary | None = None,
) -> str:
    """Render a color as its representation string.

    The word-bearing forms (word, wordhex) need a dictionary to name the
    color; the nearest entry is used when there is no exact match.
    """
    kind = representation.kind
    if kind == "hexcode":
        return color_to_hex(c)
    if kind == "rgb":
        return f"[{c.r}, {c.g}, {c.b}]"
    if kind == "cielab":
        lab = color_to_lab(c)
        parts = ", ".join(_format_number(v) for v in (lab.l_star, lab.a_star, lab.b_star))
        return f"({parts})"
    if dictionary is None:
        raise ValidationError(f"{representation.label} encoding requires a color dictionary")
    word = hex_to_word(c, dictionary)
    if kind == "word":
        return word
    return f"{word} ({color_to_hex(c)})"


def _decode_triple(text: str, kind: str) -> tuple[float, float, float]:
    match = _TRIPLE_RE.match(text)
    if not match:
        raise ColorFormatError(f"not a {kind} triple: {text!r}")
    return tuple(float(g) for g in match.groups())


def _coerce_text(value: object) -> str:
    if isinstance(value, str):
        return value.strip()
    if isinstance(value, (list, tuple)) and len(value) == 3:
        return "[" + ", ".join(str(v) for v in value) + "]"
    raise ColorFormatError(f"not a color value: {value!r}")


def _rgb_from_triple(triple: tuple[float, float, float], source: str) -> Color:
    channels = []
    for v in triple:
        rounded = int(v + 0.5) if v >= 0 else -int(-v + 0.5)
        if abs(v - rounded) > 1e-6:
            raise ColorFormatError(f"non-integer RGB channel in {source!r}")
        if not 0 <= rounded <= 255:
            raise ColorFormatError(f"RGB channel out of range in {source!r}")
        channels.append(rounded)
    return Color(*channels)


def decode_color(
    value: object,
    representation: Representation,
    dictionary: ColorDictionary | None = None,
    embedder=None,
) -> Color:
    """Read a representation string (or bare JSON triple) back into a Color.

    Word decoding needs the dictionary, and an embedder for words outside
    it.  Raises ColorFormatError when the text does not parse in the given
    representation.
    """
    kind = representation.kind
    text = _coerce_text(value)
    if not text:
        raise ColorFormatError("empty color value")

    if kind == "hexcode":
        if not _HEX_BARE_RE.match(text):
            raise ColorFormatError(f"not a hex color: {text!r}")
        return hex_to_color(text if text.startswith("#") else "#" + text)

    if kind == "rgb":
        return _rgb_from_triple(_decode_triple(text, "RGB"), text)

    if kind == "cielab":
        l_star, a_star, b_star = _decode_triple(text, "CIELAB")
        return lab_to_color(LabColor(l_star, a_star, b_star))

    if kind == "word":
        return _decode_word(text, dictionary, embedder)

    match = _WORDHEX_RE.match(text)
    if not match:
        raise ColorFormatError(f"not a word (#hex) value: {text!r}")
    word_part, hex_part = match.groups()
    if representation.output_mode == "H":
        return hex_to_color(hex_part if hex_part.startswith("#") else "#" + hex_part)
    return _decode_word(word_part, dictionary, embedder)


def _decode_word(text: str, dictionary: ColorDictionary | None, embedder) -> Color:
    if dictionary is None:
        raise ValidationError("word decoding requires a color dictionary")
    word = normalize_word(text)
    if not word:
        raise ColorFormatError("empty color word")
    exact = dictionary.lookup_word(word)
    if exact is not None:
        return exact
    if embedder is None:
        raise ValidationError(f"word {word!r} is not in the dictionary and no embedder was given")
    return word_to_hex(word, dictionary, embedder)
