"""Prompt construction and reply parsing for both color tasks.

A prompt has three parts: a task profile (the system text), output format
guidance, and an optional in-context exemplar, followed by the case
payload.  The payload always comes last so the case document (or the
"Description:" line) is the final thing the model reads.  All wording
lives in versioned template files under templates/; the hash of that set
is recorded in benchmark reports.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from hashlib import blake2b
from importlib import resources
from typing import Sequence

from .codec import decode_color, encode_color
from .colors import HEXCODE, WORDHEX_H, Color, Representation
from .document import (
    MASK_TOKEN,
    Document,
    MaskRecord,
    Palette,
    mask_palette,
    parse_document,
    serialize_document,
)
from .errors import (
    ReplyCountError,
    ReplyFormatError,
    ReplyStructureError,
    ValidationError,
)
from .llm import fingerprint as request_fingerprint
from .llm import make_request

_TASKS = ("completion", "generation")
_PROFILES = ("short", "long")
_STRUCTURES = ("json", "flat")
_POLICIES = ("similarity", "random", "none")

_PLACEHOLDER_RE = re.compile(r"\{\{(\w+)\}\}")

_FORMAT_HINTS = {
    "word": 'a color word (e.g. "cerulean")',
    "hexcode": 'a lowercase hex string (e.g. "#0485d1")',
    "rgb": 'an RGB triple (e.g. "[4, 133, 209]")',
    "cielab": 'a CIELAB triple (e.g. "(53.6, -4.7, -48.0)")',
    "wordhex": 'a color word with its hex code (e.g. "cerulean (#0485d1)")',
}


def stable_seed(*parts) -> int:
    """Deterministic 64-bit seed from any mix of strings and numbers."""
    h = blake2b(digest_size=8)
    for p in parts:
        h.update(str(p).encode("utf-8"))
        h.update(b"\x1f")
    return int.from_bytes(h.digest(), "big")


def load_template(name: str) -> str:
    path = resources.files("colorrec").joinpath("templates").joinpath(f"{name}.txt")
    return path.read_text(encoding="utf-8").rstrip("\n")


def render_template(text: str, mapping: dict[str, str]) -> str:
    def substitute(match):
        key = match.group(1)
        if key not in mapping:
            raise ValidationError(f"template placeholder {{{{{key}}}}} has no value")
        return mapping[key]

    return _PLACEHOLDER_RE.sub(substitute, text)


def template_set_hash() -> str:
    """Stable hash over every shipped template, recorded in reports."""
    root = resources.files("colorrec").joinpath("templates")
    h = blake2b(digest_size=8)
    for entry in sorted(root.iterdir(), key=lambda e: e.name):
        if entry.name.endswith(".txt"):
            h.update(entry.name.encode("utf-8"))
            h.update(b"\x1f")
            h.update(entry.read_text(encoding="utf-8").encode("utf-8"))
            h.update(b"\x1e")
    return h.hexdigest()


@dataclass(frozen=True)
class PromptConfig:
    """One point in the prompt ablation space.

    representation defaults per task: hexcode for completion, the
    combined word-hex form for generation.
    """

    task: str
    representation: Representation | None = None
    profile_variant: str = "short"
    structure: str = "json"
    exemplar_policy: str = "similarity"
    exemplar_count: int = 1

    def __post_init__(self):
        if self.task not in _TASKS:
            raise ValidationError(f"unknown task {self.task!r}")
        if self.profile_variant not in _PROFILES:
            raise ValidationError(f"unknown profile variant {self.profile_variant!r}")
        if self.structure not in _STRUCTURES:
            raise ValidationError(f"unknown structure {self.structure!r}")
        if self.structure == "flat" and self.task != "completion":
            raise ValidationError("flat structure only applies to completion")
        if self.exemplar_policy not in _POLICIES:
            raise ValidationError(f"unknown exemplar policy {self.exemplar_policy!r}")
        if self.exemplar_count < 0:
            raise ValidationError("exemplar count must be non-negative")
        if self.representation is None:
            default = HEXCODE if self.task == "completion" else WORDHEX_H
            object.__setattr__(self, "representation", default)


@dataclass(frozen=True)
class PromptBundle:
    system: str
    user: str
    exemplar_block: str
    fingerprint: str


def _bundle(system: str, user_parts: list[str], exemplar_block: str) -> PromptBundle:
    user = "\n\n".join(part for part in user_parts if part)
    return PromptBundle(
        system=system,
        user=user,
        exemplar_block=exemplar_block,
        fingerprint=request_fingerprint(make_request(system, user)),
    )


def _format_hint(representation: Representation) -> str:
    return _FORMAT_HINTS[representation.kind]


def _normalize_exemplars(exemplar, cfg: PromptConfig) -> list:
    if cfg.exemplar_policy == "none" or cfg.exemplar_count == 0:
        return []
    if exemplar is None:
        raise ValidationError(
            f"exemplar policy {cfg.exemplar_policy!r} needs at least one exemplar"
        )
    exemplars = list(exemplar) if isinstance(exemplar, (list, tuple)) else [exemplar]
    if not exemplars:
        raise ValidationError(
            f"exemplar policy {cfg.exemplar_policy!r} needs at least one exemplar"
        )
    return exemplars[: cfg.exemplar_count]


def _render_exemplar_block(pairs: list[tuple[str, str]]) -> str:
    template = load_template("exemplar_block")
    return "\n\n".join(
        render_template(template, {"input": pin, "output": pout}) for pin, pout in pairs
    )


def flat_payload(doc: Document, representation: Representation, dictionary=None) -> str:
    """Brace-free rendering of a document: header lines plus one bracketed
    palette list per element, with "_" marking masked slots."""
    lines = [
        f"Document: {doc.id}",
        f"Title: {doc.title}",
        f"Category: {doc.category}",
        f"Keywords: {', '.join(doc.keywords)}",
        "Palettes:",
    ]
    for e in doc.elements:
        entries = ", ".join(
            "_" if s is None else encode_color(s, representation, dictionary)
            for s in e.palette.slots
        )
        lines.append(f"{e.id}: [{entries}]")
    return "\n".join(lines)


def _exemplar_completion_pair(
    exemplar, k: int, cfg: PromptConfig, dictionary=None
) -> tuple[str, str]:
    solved = parse_document(exemplar.payload)
    available = len(solved.filled_slots())
    if available == 0:
        raise ValidationError(f"exemplar {exemplar.id!r} has no filled slots")
    k_ex = min(k, available, 3)
    masked, record = mask_palette(solved, k_ex, seed=stable_seed(exemplar.id, k_ex))
    if cfg.structure == "flat":
        shown = flat_payload(masked, cfg.representation, dictionary)
        answer = json.dumps(
            [
                encode_color(e.ground_truth, cfg.representation, dictionary)
                for e in record.entries
            ],
            ensure_ascii=False,
        )
    else:
        shown = serialize_document(masked, cfg.representation, dictionary)
        answer = serialize_document(solved, cfg.representation, dictionary)
    return shown, answer


def build_completion_prompt(
    doc_masked: Document,
    exemplar,
    cfg: PromptConfig,
    dictionary=None,
) -> PromptBundle:
    """Assemble the completion prompt: guidance, exemplar block, masked doc."""
    if cfg.task != "completion":
        raise ValidationError("config task must be completion")
    k = len(doc_masked.masked_slots())
    if k == 0:
        raise ValidationError(f"document {doc_masked.id!r} has no masked slots")

    system = load_template(f"profile_completion_{cfg.profile_variant}")
    guidance = render_template(
        load_template(f"format_completion_{cfg.structure}"),
        {"format_hint": _format_hint(cfg.representation)},
    )
    pairs = [
        _exemplar_completion_pair(ex, k, cfg, dictionary)
        for ex in _normalize_exemplars(exemplar, cfg)
    ]
    block = _render_exemplar_block(pairs) if pairs else ""
    if cfg.structure == "flat":
        payload = flat_payload(doc_masked, cfg.representation, dictionary)
    else:
        payload = serialize_document(doc_masked, cfg.representation, dictionary)
    return _bundle(system, [guidance, block, payload], block)


def _exemplar_generation_pair(exemplar, cfg: PromptConfig, dictionary=None) -> tuple[str, str]:
    try:
        payload = json.loads(exemplar.payload)
        description = payload["description"]
        palette = payload["palette"]
    except (ValueError, TypeError, KeyError) as exc:
        raise ValidationError(f"exemplar {exemplar.id!r} has no description/palette payload: {exc}")
    colors = [decode_color(c, HEXCODE) for c in palette]
    answer = json.dumps(
        [encode_color(c, cfg.representation, dictionary) for c in colors],
        ensure_ascii=False,
    )
    return f"Description: {description}", answer


def build_generation_prompt(
    text: str,
    exemplar,
    cfg: PromptConfig,
    dictionary=None,
) -> PromptBundle:
    """Assemble the generation prompt: guidance, exemplar block, description."""
    if cfg.task != "generation":
        raise ValidationError("config task must be generation")
    if not text or not text.strip():
        raise ValidationError("generation needs a non-empty description")

    system = load_template(f"profile_generation_{cfg.profile_variant}")
    guidance = render_template(
        load_template("format_generation"),
        {"format_hint": _format_hint(cfg.representation)},
    )
    pairs = [
        _exemplar_generation_pair(ex, cfg, dictionary)
        for ex in _normalize_exemplars(exemplar, cfg)
    ]
    block = _render_exemplar_block(pairs) if pairs else ""
    payload = f"Description: {text.strip()}"
    return _bundle(system, [guidance, block, payload], block)


def _decode_reply_color(value, representation, dictionary, embedder, where: str):
    try:
        return decode_color(value, representation, dictionary, embedder)
    except ValidationError as exc:
        raise ReplyFormatError(f"{where}: {exc}") from None


def extract_slot_colors(
    value,
    targets: Sequence[tuple[str, int]],
    representation: Representation,
    dictionary=None,
    embedder=None,
    structure: str = "json",
) -> list[Color]:
    """Pull the targeted (element id, slot index) colors out of a reply.

    In json structure the reply is the solved document and the targets are
    looked up in it; in flat structure the reply is an array with exactly
    one color per target.  Returns colors in target order.
    """
    if structure == "flat":
        if not isinstance(value, list):
            raise ReplyStructureError("flat reply must be a JSON array")
        if len(value) != len(targets):
            raise ReplyCountError(
                f"expected {len(targets)} colors, reply has {len(value)}"
            )
        return [
            _decode_reply_color(v, representation, dictionary, embedder, f"entry {i}")
            for i, v in enumerate(value)
        ]

    if not isinstance(value, dict):
        raise ReplyStructureError("completion reply must be a JSON document object")
    raw_elements = value.get("elements")
    if not isinstance(raw_elements, list):
        raise ReplyStructureError("reply document has no elements array")
    palettes: dict[str, list] = {}
    for raw in raw_elements:
        if isinstance(raw, dict) and isinstance(raw.get("id"), str):
            palettes[raw["id"]] = raw.get("color_palette")

    colors = []
    for element_id, slot_index in targets:
        where = f"element {element_id!r} slot {slot_index}"
        palette = palettes.get(element_id)
        if palette is None:
            raise ReplyStructureError(f"reply is missing {where}")
        if not isinstance(palette, list) or slot_index >= len(palette):
            raise ReplyStructureError(f"reply is missing {where}")
        slot = palette[slot_index]
        if slot == MASK_TOKEN:
            raise ReplyFormatError(f"{where} is still masked in the reply")
        colors.append(_decode_reply_color(slot, representation, dictionary, embedder, where))
    return colors


def parse_completion_reply(
    value,
    record: MaskRecord,
    representation: Representation,
    dictionary=None,
    embedder=None,
    structure: str = "json",
) -> list[Color]:
    """Decode a completion reply against a mask record, in record order."""
    targets = [(e.element_id, e.slot_index) for e in record.entries]
    return extract_slot_colors(value, targets, representation, dictionary, embedder, structure)


def parse_generation_reply(
    value,
    representation: Representation,
    dictionary=None,
    embedder=None,
) -> Palette:
    """Decode a generated five-color palette reply, order preserved."""
    if isinstance(value, dict):
        for key in ("palette", "colors"):
            if isinstance(value.get(key), list):
                value = value[key]
                break
    if not isinstance(value, list):
        raise ReplyStructureError("generation reply must be a JSON array of colors")
    if len(value) != 5:
        raise ReplyCountError(f"expected 5 colors, reply has {len(value)}")
    return Palette(
        tuple(
            _decode_reply_color(v, representation, dictionary, embedder, f"entry {i}")
            for i, v in enumerate(value)
        )
    )


def derive_query_text(doc: Document) -> str:
    """Retrieval query: title, category, keywords, element texts, each as a
    period-terminated part with whitespace collapsed."""
    parts = [doc.title, doc.category, ", ".join(doc.keywords)]
    for e in doc.elements:
        if e.text_content:
            parts.append(e.text_content)
    sentences = []
    for part in parts:
        collapsed = " ".join(part.split())
        if collapsed:
            sentences.append(f"{collapsed}.")
    return " ".join(sentences)
