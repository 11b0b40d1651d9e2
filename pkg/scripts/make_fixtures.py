#!/usr/bin/env python3
"""Regenerate the test fixtures: a 20-document completion corpus, a 10-pair
text-to-palette set, and a manifest of expected metrics.

The corpus is built so the fixed-color mock's scores are checkable by plain
arithmetic: within each test document either every palette slot falls in the
16x16x16 bin of the probe color #123456 or none does, so case correctness
never depends on which slots get masked.  The generation constants are
computed here with scipy's assignment solver and numpy aggregation, separate
from the library's own metric code.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import numpy as np
from scipy.optimize import linear_sum_assignment

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from colorrec.colors import Color, color_to_hex, color_to_lab, delta_e, hex_to_color, quantize
from colorrec.document import Canvas, Document, Element, Frame, Palette, serialize_document

ROOT = Path(__file__).resolve().parent.parent
FIXTURES = ROOT / "tests" / "fixtures"

PROBE = "#123456"
PROBE_BIN = quantize(hex_to_color(PROBE))

GRAYS = ["#000000", "#404040", "#808080", "#bfbfbf", "#ffffff"]

# Six distinct colors sharing the probe's bin (r 16-31, g 48-63, b 80-95).
MATCH_COLORS = ["#103050", "#143454", "#183858", "#1c3c5c", "#1f3f5f", "#123252"]


def element(eid, kind, colors, text=None, x=0.1, y=0.1, w=0.5, h=0.3, opacity=1.0):
    return Element(
        id=eid,
        kind=kind,
        frame=Frame(x, y, w, h),
        opacity=opacity,
        text_content=text,
        palette=Palette(tuple(hex_to_color(c) for c in colors)),
    )


def doc(did, title, category, keywords, elements, portrait=False):
    canvas = Canvas(0.75, 1.0) if portrait else Canvas(1.0, 0.75)
    return Document(
        id=did,
        title=title,
        category=category,
        keywords=tuple(keywords),
        canvas=canvas,
        elements=tuple(elements),
    )


def two_up(did, kind, colors, texts=(None, None)):
    """Two same-kind elements splitting six colors three and three."""
    return [
        element(f"{did}e1", kind, colors[:3], texts[0], x=0.05, y=0.05, w=0.9, h=0.4),
        element(f"{did}e2", kind, colors[3:], texts[1], x=0.05, y=0.5, w=0.9, h=0.4),
    ]


def build_train_docs():
    return [
        doc(
            "d01", "Summer Beach Party", "event", ["summer", "beach", "party"],
            [
                element("d01e1", "text", ["#ff7f50", "#ffd700", "#00ced1"],
                        "Join us at the shore", y=0.08, h=0.25),
                element("d01e2", "svg", ["#f4a460", "#87ceeb", "#fffacd"], y=0.45, h=0.45),
            ],
        ),
        doc(
            "d02", "Tech Conference Badge", "business", ["tech", "conference"],
            [
                element("d02e1", "text", ["#222831", "#00adb5", "#eeeeee"],
                        "Innovate 2025", y=0.1, h=0.3),
                element("d02e2", "colored_background", ["#393e46", "#00adb5"],
                        y=0.0, x=0.0, w=1.0, h=1.0, opacity=0.9),
            ],
            portrait=True,
        ),
        doc(
            "d03", "Autumn Harvest Menu", "food", ["autumn", "menu", "restaurant"],
            [
                element("d03e1", "text", ["#8b4513", "#d2691e", "#f5deb3"],
                        "Seasonal specials", y=0.12, h=0.2),
                element("d03e2", "raster", ["#a0522d", "#cd853f", "#deb887"], y=0.4, h=0.5),
            ],
        ),
        doc(
            "d04", "Yoga Studio Flyer", "health", ["yoga", "wellness"],
            [
                element("d04e1", "text", ["#9dc183", "#f6f1e9", "#5f7161"],
                        "Find your balance", y=0.1, h=0.25),
                element("d04e2", "svg", ["#b5c99a", "#e8e4d9", "#6e7f62"], y=0.5, h=0.4),
            ],
            portrait=True,
        ),
    ]


def build_test_docs():
    text_specs = [
        ("d05", True, "Midnight Jazz Club", "music", ["jazz", "night"],
         ("Live every Friday", "Doors at nine")),
        ("d06", True, "Deep Sea Lecture", "education", ["ocean", "science"],
         ("Into the abyss", "Marine biology talk")),
        ("d07", False, "Farmers Market Sunday", "community", ["market", "organic"],
         ("Fresh local produce", "Every Sunday morning")),
        ("d08", False, "Spring Wedding Invite", "event", ["wedding", "spring"],
         ("Save the date", "Celebrate with us")),
        ("d09", False, "Coffee Roasters Promo", "food", ["coffee", "roast"],
         ("Small batch roasts", "Taste the difference")),
        ("d10", False, "City Marathon", "sports", ["running", "city"],
         ("Race through downtown", "Sign up today")),
        ("d11", False, "Art Gallery Opening", "culture", ["art", "gallery"],
         ("New exhibition", "Opening night")),
        ("d12", False, "Kids Science Fair", "education", ["kids", "science"],
         ("Young inventors", "Projects on display")),
    ]
    svg_specs = [
        ("d13", True, "Nautical Logo Set", "branding", ["nautical", "logo"]),
        ("d14", False, "Tropical Sticker Pack", "illustration", ["tropical", "stickers"]),
        ("d15", False, "Geometric Pattern Sheet", "design", ["geometry", "pattern"]),
        ("d16", False, "Holiday Icon Bundle", "illustration", ["holiday", "icons"]),
    ]
    raster_specs = [
        ("d17", True, "Night Sky Photo Series", "photography", ["stars", "night"]),
        ("d18", False, "Desert Road Trip Album", "travel", ["desert", "road"]),
        ("d19", False, "Forest Trail Collection", "nature", ["forest", "hiking"]),
        ("d20", False, "Street Food Gallery", "food", ["street", "tasty"]),
    ]
    other_colors = {
        "d07": ["#7cb342", "#fdd835", "#6d4c41", "#aed581", "#fff176", "#8d6e63"],
        "d08": ["#f8bbd0", "#ce93d8", "#fffde7", "#f48fb1", "#b39ddb", "#f5f5dc"],
        "d09": ["#4e342e", "#d7ccc8", "#ff8f00", "#6d4c41", "#efebe9", "#ffa726"],
        "d10": ["#e53935", "#fdd835", "#f5f5f5", "#d32f2f", "#ffee58", "#eeeeee"],
        "d11": ["#212121", "#fafafa", "#c2185b", "#424242", "#f5f5f5", "#e91e63"],
        "d12": ["#29b6f6", "#ffca28", "#66bb6a", "#4fc3f7", "#ffd54f", "#81c784"],
        "d14": ["#ff7043", "#26a69a", "#ffee58", "#ff8a65", "#4db6ac", "#fff59d"],
        "d15": ["#5e35b1", "#00acc1", "#ffb300", "#7e57c2", "#26c6da", "#ffca28"],
        "d16": ["#c62828", "#2e7d32", "#f9a825", "#ef5350", "#43a047", "#fbc02d"],
        "d18": ["#bf360c", "#ffcc80", "#8d6e63", "#d84315", "#ffe0b2", "#a1887f"],
        "d19": ["#33691e", "#7cb342", "#dcedc8", "#558b2f", "#9ccc65", "#f1f8e9"],
        "d20": ["#ef6c00", "#ffd600", "#d32f2f", "#ff9800", "#ffea00", "#e53935"],
    }
    docs = []
    match_flags = {}
    kinds = {}
    for did, match, title, category, keywords, texts in text_specs:
        colors = MATCH_COLORS if match else other_colors[did]
        docs.append(doc(did, title, category, keywords,
                        two_up(did, "text", colors, texts), portrait=(int(did[1:]) % 2)))
        match_flags[did] = match
        kinds[did] = "text"
    for did, match, title, category, keywords in svg_specs:
        colors = MATCH_COLORS if match else other_colors[did]
        docs.append(doc(did, title, category, keywords, two_up(did, "svg", colors)))
        match_flags[did] = match
        kinds[did] = "svg"
    for did, match, title, category, keywords in raster_specs:
        colors = MATCH_COLORS if match else other_colors[did]
        docs.append(doc(did, title, category, keywords, two_up(did, "raster", colors)))
        match_flags[did] = match
        kinds[did] = "raster"
    return docs, match_flags, kinds


def check_uniform_bins(docs, match_flags):
    for d in docs:
        if d.id not in match_flags:
            continue
        in_bin = [
            quantize(slot) == PROBE_BIN
            for e in d.elements
            for slot in e.palette.slots
        ]
        if match_flags[d.id]:
            assert all(in_bin), f"{d.id}: every slot must share the probe bin"
        else:
            assert not any(in_bin), f"{d.id}: no slot may share the probe bin"


def completion_constants(match_flags, kinds):
    test_ids = sorted(match_flags)
    total = len(test_ids)
    matches = sum(1 for i in test_ids if match_flags[i])
    accuracy = 100.0 * matches / total
    breakdown = {}
    for kind in ("text", "svg", "raster"):
        of_kind = [i for i in test_ids if kinds[i] == kind]
        correct = sum(1 for i in of_kind if match_flags[i])
        breakdown[kind] = [
            100.0 * correct / len(of_kind),
            100.0 * len(of_kind) / total,
        ]
    return {
        "color": PROBE,
        "accuracy": {str(k): accuracy for k in (1, 2, 3)},
        "distribution": {str(k): 0.0 for k in (1, 2, 3)},
        "element_breakdown": breakdown,
    }


PAIRS = [
    ("g01", "train", "warm sunset over the ocean",
     ["#ff6f61", "#ff9a76", "#ffd166", "#7b2d5e", "#2a1a5e"]),
    ("g02", "train", "fresh spring garden with blooming flowers",
     ["#88c057", "#f7a8b8", "#fff3a8", "#5a8f3c", "#e86aa6"]),
    ("g03", "train", "modern minimalist office interior",
     ["#f2f0eb", "#d8d3c8", "#8a8578", "#3f3c36", "#b8a88a"]),
    ("g04", "test", "cozy autumn afternoon in the park",
     ["#b5651d", "#e8a33d", "#7a4419", "#d9c097", "#4f3b21"]),
    ("g05", "test", "neon city nightlife",
     ["#0d0221", "#ff2079", "#04f8f8", "#f9f002", "#7b1fa2"]),
    ("g06", "test", "calm nordic winter morning",
     ["#dce8f2", "#9db8cc", "#5e7a8e", "#f4f7f9", "#37485a"]),
    ("g07", "test", "vintage circus poster",
     ["#a4243b", "#d8973c", "#f2e3bc", "#273e47", "#bd632f"]),
    ("g08", "test", "deep tropical rainforest",
     ["#0b3d2e", "#1f7a4d", "#66b032", "#c2d076", "#17301c"]),
    ("g09", "test", "pastel birthday celebration",
     ["#ffd1dc", "#a8e6cf", "#fdfd96", "#c7ceea", "#ffdac1"]),
    ("g10", "test", "industrial loft kitchen",
     ["#454545", "#8c8c88", "#c0b49e", "#2b2b2b", "#a65b2a"]),
]


def independent_min_assignment(a, b):
    cost = np.array(
        [[delta_e(color_to_lab(x), color_to_lab(y)) for y in b] for x in a]
    )
    rows, cols = linear_sum_assignment(cost)
    return float(cost[rows, cols].sum()) / len(a)


def independent_diversity(colors):
    labs = [color_to_lab(c) for c in colors]
    pairs = [
        delta_e(labs[i], labs[j])
        for i in range(len(labs))
        for j in range(i + 1, len(labs))
    ]
    return float(np.mean(pairs))


def generation_constants():
    test_palettes = [
        [hex_to_color(h) for h in palette]
        for _, split, _, palette in PAIRS
        if split == "test"
    ]
    grays = [hex_to_color(h) for h in GRAYS]
    sims = [independent_min_assignment(grays, p) for p in test_palettes]
    gray_div = independent_diversity(grays)
    gt_div = [independent_diversity(p) for p in test_palettes]
    return {
        "echo": {
            "similarity_mean": 0.0,
            "similarity_std": 0.0,
            "diversity_mean": float(np.mean(gt_div)),
            "diversity_std": float(np.std(gt_div)),
        },
        "fixed": {
            "palette": GRAYS,
            "similarity_mean": float(np.mean(sims)),
            "similarity_std": float(np.std(sims)),
            "diversity_mean": gray_div,
            "diversity_std": 0.0,
        },
    }


def main():
    train = build_train_docs()
    test, match_flags, kinds = build_test_docs()
    check_uniform_bins(test, match_flags)
    docs = train + test
    assert len(docs) == 20
    assert all(len(d.filled_slots()) >= 3 for d in docs)

    completion_dir = FIXTURES / "completion"
    generation_dir = FIXTURES / "generation"
    completion_dir.mkdir(parents=True, exist_ok=True)
    generation_dir.mkdir(parents=True, exist_ok=True)

    corpus_path = completion_dir / "corpus.jsonl"
    corpus_path.write_text(
        "".join(serialize_document(d) + "\n" for d in docs), encoding="utf-8"
    )
    splits = {
        "train": [d.id for d in train],
        "val": [],
        "test": [d.id for d in test],
    }
    (completion_dir / "splits.json").write_text(
        json.dumps(splits, indent=2) + "\n", encoding="utf-8"
    )

    pair_lines = []
    for pid, split, text, palette in PAIRS:
        for h in palette:
            hex_to_color(h)
        pair_lines.append(json.dumps(
            {"id": pid, "text": text, "palette": palette, "split": split},
            ensure_ascii=False,
        ))
    (generation_dir / "pairs.jsonl").write_text(
        "\n".join(pair_lines) + "\n", encoding="utf-8"
    )

    manifest = {
        "completion": {
            "corpus": "completion/corpus.jsonl",
            "splits": "completion/splits.json",
            "documents": len(docs),
            "split_sizes": {name: len(ids) for name, ids in splits.items()},
            "echo": {"accuracy": {str(k): 100.0 for k in (1, 2, 3)}},
            "fixed": completion_constants(match_flags, kinds),
        },
        "generation": {
            "pairs": "generation/pairs.jsonl",
            "pair_count": len(PAIRS),
            "split_sizes": {
                "train": sum(1 for _, s, _, _ in PAIRS if s == "train"),
                "val": 0,
                "test": sum(1 for _, s, _, _ in PAIRS if s == "test"),
            },
            **generation_constants(),
        },
    }
    (FIXTURES / "manifest.json").write_text(
        json.dumps(manifest, indent=2) + "\n", encoding="utf-8"
    )
    print(f"wrote {corpus_path}")
    print(f"wrote {completion_dir / 'splits.json'}")
    print(f"wrote {generation_dir / 'pairs.jsonl'}")
    print(f"wrote {FIXTURES / 'manifest.json'}")


if __name__ == "__main__":
    main()
