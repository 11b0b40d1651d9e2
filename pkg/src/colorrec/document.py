"""Structured design documents and the masking/recoloring lifecycle.

A document is a canvas plus an ordered list of elements (text, colored
background, SVG, raster), each carrying a palette of one to five color
slots.  Slots are either filled with a Color or masked; masked slots
serialize as the literal string "[MASK]".

Everything here is an immutable value.  Operations return new documents
and never touch their inputs, so values can be shared freely across
threads.  The `extras` mappings exist only to round-trip unknown JSON
fields; treat them as read-only.
"""

from __future__ import annotations

import json
import math
import random
from dataclasses import dataclass, field, replace
from typing import Sequence

from .codec import decode_color, encode_color
from .colors import HEXCODE, Color, Representation
from .errors import ValidationError

MASK_TOKEN = "[MASK]"

ELEMENT_KINDS = ("text", "colored_background", "svg", "raster")

_ELEMENT_KNOWN_KEYS = frozenset(("id", "type", "layout", "opacity", "text", "color_palette"))
_DOCUMENT_KNOWN_KEYS = frozenset(("id", "title", "category", "keywords", "layout", "elements"))


@dataclass(frozen=True)
class Canvas:
    """Canvas size in unit space; the longer side is exactly 1.0."""

    width: float
    height: float

    def __post_init__(self):
        for name in ("width", "height"):
            v = getattr(self, name)
            if not isinstance(v, (int, float)) or not math.isfinite(v) or v <= 0:
                raise ValidationError(f"canvas {name} must be a positive finite number")
            object.__setattr__(self, name, float(v))
        if abs(max(self.width, self.height) - 1.0) > 1e-6:
            raise ValidationError("canvas longer side must equal 1.0")


@dataclass(frozen=True)
class Frame:
    """Element placement in unit space."""

    x: float
    y: float
    width: float
    height: float

    def __post_init__(self):
        for name in ("x", "y", "width", "height"):
            v = getattr(self, name)
            if not isinstance(v, (int, float)) or not math.isfinite(v):
                raise ValidationError(f"frame {name} must be a finite number")
            object.__setattr__(self, name, float(v))
        if self.width < 0 or self.height < 0:
            raise ValidationError("frame width and height must be non-negative")


@dataclass(frozen=True)
class Palette:
    """Ordered color slots; a None slot is masked."""

    slots: tuple[Color | None, ...]

    def __post_init__(self):
        slots = tuple(self.slots)
        object.__setattr__(self, "slots", slots)
        if not 1 <= len(slots) <= 5:
            raise ValidationError("palette must hold between 1 and 5 slots")
        for i, s in enumerate(slots):
            if s is not None and not isinstance(s, Color):
                raise ValidationError(f"palette slot {i} must be a Color or None")

    def __len__(self) -> int:
        return len(self.slots)

    @property
    def filled_indices(self) -> tuple[int, ...]:
        return tuple(i for i, s in enumerate(self.slots) if s is not None)

    @property
    def masked_indices(self) -> tuple[int, ...]:
        return tuple(i for i, s in enumerate(self.slots) if s is None)


@dataclass(frozen=True)
class Element:
    id: str
    kind: str
    frame: Frame
    opacity: float
    text_content: str | None
    palette: Palette
    extras: dict = field(default_factory=dict)

    def __post_init__(self):
        if not isinstance(self.id, str) or not self.id:
            raise ValidationError("element id must be a non-empty string")
        if self.kind not in ELEMENT_KINDS:
            raise ValidationError(f"element {self.id!r}: unknown type {self.kind!r}")
        v = self.opacity
        if not isinstance(v, (int, float)) or not math.isfinite(v) or not 0 <= v <= 1:
            raise ValidationError(f"element {self.id!r}: opacity must be within [0, 1]")
        object.__setattr__(self, "opacity", float(v))
        if self.text_content is not None:
            if self.kind != "text":
                raise ValidationError(f"element {self.id!r}: text only applies to text elements")
            if not isinstance(self.text_content, str):
                raise ValidationError(f"element {self.id!r}: text must be a string")


@dataclass(frozen=True)
class Document:
    id: str
    title: str
    category: str
    keywords: tuple[str, ...]
    canvas: Canvas
    elements: tuple[Element, ...]
    extras: dict = field(default_factory=dict)

    def __post_init__(self):
        for name in ("id", "title", "category"):
            if not isinstance(getattr(self, name), str):
                raise ValidationError(f"document {name} must be a string")
        if not self.id:
            raise ValidationError("document id must be non-empty")
        keywords = tuple(self.keywords)
        object.__setattr__(self, "keywords", keywords)
        for kw in keywords:
            if not isinstance(kw, str):
                raise ValidationError("document keywords must be strings")
        elements = tuple(self.elements)
        object.__setattr__(self, "elements", elements)
        seen = set()
        for e in elements:
            if e.id in seen:
                raise ValidationError(f"duplicate element id {e.id!r}")
            seen.add(e.id)

    def element_by_id(self, element_id: str) -> Element:
        for e in self.elements:
            if e.id == element_id:
                return e
        raise ValidationError(f"document {self.id!r} has no element {element_id!r}")

    def filled_slots(self) -> tuple[tuple[str, int], ...]:
        """All (element id, slot index) pairs with a color, in document order."""
        return tuple(
            (e.id, i) for e in self.elements for i in e.palette.filled_indices
        )

    def masked_slots(self) -> tuple[tuple[str, int], ...]:
        return tuple(
            (e.id, i) for e in self.elements for i in e.palette.masked_indices
        )


@dataclass(frozen=True)
class MaskEntry:
    """One masked slot: where it is and, when known, what was there."""

    element_id: str
    slot_index: int
    ground_truth: Color | None = None

    def __post_init__(self):
        if self.slot_index < 0:
            raise ValidationError("slot index must be non-negative")


@dataclass(frozen=True)
class MaskRecord:
    document_id: str
    entries: tuple[MaskEntry, ...]
    seed: int
    k: int

    def __post_init__(self):
        entries = tuple(self.entries)
        object.__setattr__(self, "entries", entries)
        if self.k != len(entries):
            raise ValidationError("mask record k must equal the number of entries")
        if self.k not in (1, 2, 3):
            raise ValidationError("mask count k must be 1, 2, or 3")
        targets = {(e.element_id, e.slot_index) for e in entries}
        if len(targets) != len(entries):
            raise ValidationError("mask record targets the same slot twice")


def _require(data: dict, key: str, context: str):
    if key not in data:
        raise ValidationError(f"{context} missing field {key!r}")
    return data[key]


def _number(value, context: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ValidationError(f"{context} must be a number")
    return float(value)


def _parse_layout(value, keys: tuple[str, ...], context: str) -> dict[str, float]:
    if not isinstance(value, dict):
        raise ValidationError(f"{context} layout must be an object")
    unknown = set(value) - set(keys)
    if unknown:
        raise ValidationError(f"{context} layout has unknown field {sorted(unknown)[0]!r}")
    return {k: _number(_require(value, k, f"{context} layout"), f"{context} layout {k}") for k in keys}


def _element_from_value(
    data,
    representation: Representation,
    dictionary,
    embedder,
) -> Element:
    if not isinstance(data, dict):
        raise ValidationError("element must be a JSON object")
    element_id = _require(data, "id", "element")
    if not isinstance(element_id, str):
        raise ValidationError("element id must be a string")
    context = f"element {element_id!r}"
    kind = _require(data, "type", context)
    layout = _parse_layout(_require(data, "layout", context), ("x", "y", "width", "height"), context)
    opacity = _number(_require(data, "opacity", context), f"{context} opacity")
    text = data.get("text")
    raw_palette = _require(data, "color_palette", context)
    if not isinstance(raw_palette, list):
        raise ValidationError(f"{context} color_palette must be an array")
    slots: list[Color | None] = []
    for i, entry in enumerate(raw_palette):
        if entry == MASK_TOKEN:
            slots.append(None)
            continue
        try:
            slots.append(decode_color(entry, representation, dictionary, embedder))
        except ValidationError as exc:
            raise ValidationError(f"{context} color_palette slot {i}: {exc}") from None
    extras = {k: data[k] for k in data if k not in _ELEMENT_KNOWN_KEYS}
    return Element(
        id=element_id,
        kind=kind,
        frame=Frame(**layout),
        opacity=opacity,
        text_content=text,
        palette=Palette(tuple(slots)),
        extras=extras,
    )


def document_from_value(
    data,
    representation: Representation = HEXCODE,
    dictionary=None,
    embedder=None,
) -> Document:
    """Build a Document from an already-parsed JSON value."""
    if not isinstance(data, dict):
        raise ValidationError("document must be a JSON object")
    doc_id = _require(data, "id", "document")
    title = _require(data, "title", "document")
    category = _require(data, "category", "document")
    keywords = _require(data, "keywords", "document")
    if not isinstance(keywords, list):
        raise ValidationError("document keywords must be an array")
    layout = _parse_layout(_require(data, "layout", "document"), ("width", "height"), "document")
    raw_elements = _require(data, "elements", "document")
    if not isinstance(raw_elements, list):
        raise ValidationError("document elements must be an array")
    elements = tuple(
        _element_from_value(e, representation, dictionary, embedder) for e in raw_elements
    )
    extras = {k: data[k] for k in data if k not in _DOCUMENT_KNOWN_KEYS}
    return Document(
        id=doc_id,
        title=title,
        category=category,
        keywords=tuple(keywords),
        canvas=Canvas(**layout),
        elements=elements,
        extras=extras,
    )


def parse_document(
    json_text: str,
    representation: Representation = HEXCODE,
    dictionary=None,
    embedder=None,
) -> Document:
    """Parse one document from JSON text, validating every invariant."""
    try:
        data = json.loads(json_text)
    except json.JSONDecodeError as exc:
        raise ValidationError(
            f"document JSON syntax error at line {exc.lineno} column {exc.colno}: {exc.msg}"
        ) from None
    return document_from_value(data, representation, dictionary, embedder)


def element_to_value(e: Element, representation: Representation = HEXCODE, dictionary=None) -> dict:
    value = {
        "id": e.id,
        "type": e.kind,
        "layout": {
            "x": e.frame.x,
            "y": e.frame.y,
            "width": e.frame.width,
            "height": e.frame.height,
        },
        "opacity": e.opacity,
        "text": e.text_content,
        "color_palette": [
            MASK_TOKEN if s is None else encode_color(s, representation, dictionary)
            for s in e.palette.slots
        ],
    }
    for key in sorted(e.extras):
        value[key] = e.extras[key]
    return value


def document_to_value(d: Document, representation: Representation = HEXCODE, dictionary=None) -> dict:
    value = {
        "id": d.id,
        "title": d.title,
        "category": d.category,
        "keywords": list(d.keywords),
        "layout": {"width": d.canvas.width, "height": d.canvas.height},
        "elements": [element_to_value(e, representation, dictionary) for e in d.elements],
    }
    for key in sorted(d.extras):
        value[key] = d.extras[key]
    return value


def serialize_document(
    d: Document,
    representation: Representation = HEXCODE,
    dictionary=None,
    indent: int | None = None,
) -> str:
    """Canonical JSON: fixed key order, "[MASK]" for masked slots.

    Colors render per the given representation (hexcode by default).
    With the default single-line form, serialize and parse are inverses
    on canonical corpus files.
    """
    return json.dumps(
        document_to_value(d, representation, dictionary),
        ensure_ascii=False,
        indent=indent,
    )


def mask_palette(d: Document, k: int, seed: int) -> tuple[Document, MaskRecord]:
    """Mask k uniformly chosen filled slots; returns the masked copy and record.

    Slots are drawn without replacement from the flattened (element, slot)
    list in document order using a PRNG seeded with `seed`.  Record entries
    are kept in document order.
    """
    if k not in (1, 2, 3):
        raise ValidationError("mask count k must be 1, 2, or 3")
    filled = d.filled_slots()
    if k > len(filled):
        raise ValidationError(f"k={k} exceeds the {len(filled)} filled slots of document {d.id!r}")
    rng = random.Random(seed)
    positions = sorted(rng.sample(range(len(filled)), k))
    targets = [filled[i] for i in positions]

    by_element: dict[str, list[int]] = {}
    for element_id, slot in targets:
        by_element.setdefault(element_id, []).append(slot)

    entries = []
    new_elements = []
    for e in d.elements:
        hit = by_element.get(e.id)
        if not hit:
            new_elements.append(e)
            continue
        slots = list(e.palette.slots)
        for slot in hit:
            entries.append(MaskEntry(e.id, slot, slots[slot]))
            slots[slot] = None
        new_elements.append(replace(e, palette=Palette(tuple(slots))))

    masked = replace(d, elements=tuple(new_elements))
    return masked, MaskRecord(document_id=d.id, entries=tuple(entries), seed=seed, k=k)


def fill_slots(
    d: Document, targets: Sequence[tuple[str, int]], colors: Sequence[Color]
) -> Document:
    """Fill arbitrary (element id, slot index) targets with colors, in order.

    Unlike apply_colors this does not go through a mask record, so any
    number of slots can be filled at once.
    """
    if len(targets) != len(colors):
        raise ValidationError("one color per target required")
    fills: dict[str, dict[int, Color]] = {}
    for (element_id, slot), color in zip(targets, colors):
        if not isinstance(color, Color):
            raise ValidationError("fill colors must be Colors")
        fills.setdefault(element_id, {})[slot] = color
    new_elements = []
    for e in d.elements:
        hit = fills.get(e.id)
        if not hit:
            new_elements.append(e)
            continue
        slots = list(e.palette.slots)
        for slot, color in hit.items():
            if slot >= len(slots):
                raise ValidationError(f"element {e.id!r} has no slot {slot}")
            slots[slot] = color
        new_elements.append(replace(e, palette=Palette(tuple(slots))))
    return replace(d, elements=tuple(new_elements))


def apply_colors(d: Document, record: MaskRecord, suggestions: list[Color]) -> Document:
    """Fill the recorded masked slots with suggestions, in record order."""
    if len(suggestions) != record.k:
        raise ValidationError(
            f"expected {record.k} suggestions, got {len(suggestions)}"
        )
    if record.document_id != d.id:
        raise ValidationError(
            f"mask record targets document {record.document_id!r}, not {d.id!r}"
        )
    fills: dict[str, dict[int, Color]] = {}
    for entry, color in zip(record.entries, suggestions):
        if not isinstance(color, Color):
            raise ValidationError("suggestions must be Colors")
        fills.setdefault(entry.element_id, {})[entry.slot_index] = color

    new_elements = []
    for e in d.elements:
        hit = fills.get(e.id)
        if not hit:
            new_elements.append(e)
            continue
        slots = list(e.palette.slots)
        for slot, color in hit.items():
            if slot >= len(slots):
                raise ValidationError(f"element {e.id!r} has no slot {slot}")
            if slots[slot] is not None:
                raise ValidationError(f"element {e.id!r} slot {slot} is not masked")
            slots[slot] = color
        new_elements.append(replace(e, palette=Palette(tuple(slots))))

    for element_id in fills:
        d.element_by_id(element_id)
    return replace(d, elements=tuple(new_elements))
