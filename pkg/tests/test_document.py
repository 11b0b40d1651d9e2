import json
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from colorrec.colors import CIELAB, HEXCODE, RGB, Color
from colorrec.document import (
    MASK_TOKEN,
    Canvas,
    Document,
    Element,
    Frame,
    MaskEntry,
    MaskRecord,
    Palette,
    apply_colors,
    mask_palette,
    parse_document,
    serialize_document,
)
from colorrec.errors import ValidationError


def make_element(eid="e1", kind="colored_background", colors=("#112233",), text=None):
    return Element(
        id=eid,
        kind=kind,
        frame=Frame(0.0, 0.0, 1.0, 1.0),
        opacity=1.0,
        text_content=text,
        palette=Palette(tuple(Color(*bytes.fromhex(c[1:])) for c in colors)),
    )


def make_document(elements=None, doc_id="d1"):
    if elements is None:
        elements = (make_element(),)
    return Document(
        id=doc_id,
        title="T",
        category="c",
        keywords=(),
        canvas=Canvas(1.0, 1.0),
        elements=tuple(elements),
    )


MINIMAL_JSON = (
    '{"id": "d1", "title": "T", "category": "c", "keywords": [], '
    '"layout": {"width": 1.0, "height": 1.0}, "elements": '
    '[{"id": "e1", "type": "colored_background", '
    '"layout": {"x": 0.0, "y": 0.0, "width": 1.0, "height": 1.0}, '
    '"opacity": 1.0, "text": null, "color_palette": ["#010203"]}]}'
)


def test_parse_minimal_document():
    d = parse_document(MINIMAL_JSON)
    assert d.id == "d1"
    assert len(d.elements) == 1
    assert d.elements[0].palette.slots == (Color(1, 2, 3),)


def test_serialize_is_canonical_golden():
    # The golden string above was written by hand from the canonical key
    # order, so this asserts bytes, not just structure.
    d = parse_document(MINIMAL_JSON)
    assert serialize_document(d) == MINIMAL_JSON


def test_parse_serialize_round_trip_structural():
    d = make_document(
        (
            make_element("e1", "text", ("#112233", "#ffcc00"), text="Big Sale"),
            make_element("e2", "svg", ("#ffffff", "#336699", "#000000")),
        )
    )
    again = parse_document(serialize_document(d))
    assert again == d
    assert serialize_document(again) == serialize_document(d)


def test_empty_string_is_parse_error():
    with pytest.raises(ValidationError):
        parse_document("")


def test_syntax_error_reports_location():
    with pytest.raises(ValidationError) as exc:
        parse_document('{"id": "d1",\n  broken}')
    assert "line 2" in str(exc.value)


def test_duplicate_element_ids_rejected():
    with pytest.raises(ValidationError) as exc:
        make_document((make_element("e1"), make_element("e1")))
    assert "e1" in str(exc.value)


def test_missing_field_named_in_error():
    data = json.loads(MINIMAL_JSON)
    del data["category"]
    with pytest.raises(ValidationError) as exc:
        parse_document(json.dumps(data))
    assert "category" in str(exc.value)


def test_canvas_longer_side_must_be_unit():
    with pytest.raises(ValidationError):
        Canvas(0.9, 0.8)
    assert Canvas(1.0, 0.5).height == 0.5


def test_opacity_bounds():
    with pytest.raises(ValidationError):
        Element(
            id="e1",
            kind="svg",
            frame=Frame(0.0, 0.0, 0.1, 0.1),
            opacity=1.5,
            text_content=None,
            palette=Palette((Color(0, 0, 0),)),
        )


def test_text_only_on_text_elements():
    with pytest.raises(ValidationError):
        make_element("e1", "svg", ("#ffffff",), text="nope")


def test_palette_length_bounds():
    with pytest.raises(ValidationError):
        Palette(())
    with pytest.raises(ValidationError):
        Palette(tuple(Color(i, i, i) for i in range(6)))


def test_masked_slot_serializes_as_mask_token():
    d = make_document((make_element("e1", "svg", ("#ffffff", "#336699")),))
    masked, record = mask_palette(d, 1, seed=7)
    text = serialize_document(masked)
    raw = json.loads(text)
    slot = record.entries[0].slot_index
    assert raw["elements"][0]["color_palette"][slot] == MASK_TOKEN
    assert parse_document(text) == masked


def test_serialize_with_other_representations():
    d = make_document((make_element("e1", "svg", ("#ff0000",)),))
    raw_rgb = json.loads(serialize_document(d, RGB))
    assert raw_rgb["elements"][0]["color_palette"] == ["[255, 0, 0]"]
    raw_lab = json.loads(serialize_document(d, CIELAB))
    entry = raw_lab["elements"][0]["color_palette"][0]
    assert entry.startswith("(") and entry.endswith(")")
    assert parse_document(serialize_document(d, CIELAB), CIELAB) is not None


def test_unknown_fields_round_trip():
    data = json.loads(MINIMAL_JSON)
    data["source"] = {"dataset": "internal"}
    data["elements"][0]["role"] = "backdrop"
    text = json.dumps(data)
    d = parse_document(text)
    assert d.extras == {"source": {"dataset": "internal"}}
    assert d.elements[0].extras == {"role": "backdrop"}
    again = json.loads(serialize_document(d))
    assert again == data
    assert parse_document(serialize_document(d)) == d


def test_unknown_layout_key_rejected():
    data = json.loads(MINIMAL_JSON)
    data["layout"]["depth"] = 3
    with pytest.raises(ValidationError) as exc:
        parse_document(json.dumps(data))
    assert "depth" in str(exc.value)


def test_bad_palette_entry_names_slot():
    data = json.loads(MINIMAL_JSON)
    data["elements"][0]["color_palette"] = ["#010203", "not-a-color"]
    with pytest.raises(ValidationError) as exc:
        parse_document(json.dumps(data))
    assert "slot 1" in str(exc.value)


def five_slot_pair():
    return (
        make_element("e1", "svg", ("#000001", "#000002", "#000003", "#000004", "#000005")),
        make_element("e2", "raster", ("#000006", "#000007", "#000008", "#000009", "#00000a")),
    )


def test_mask_is_deterministic():
    d = make_document(five_slot_pair())
    first = mask_palette(d, 2, seed=99)
    second = mask_palette(d, 2, seed=99)
    assert first == second


def test_mask_exhaustion_masks_everything():
    d = make_document((make_element("e1", "svg", ("#111111", "#222222", "#333333")),))
    masked, record = mask_palette(d, 3, seed=1)
    assert masked.elements[0].palette.slots == (None, None, None)
    assert record.k == 3
    assert [e.ground_truth for e in record.entries] == [
        Color(17, 17, 17),
        Color(34, 34, 34),
        Color(51, 51, 51),
    ]


def test_mask_leaves_original_untouched():
    d = make_document(five_slot_pair())
    masked, _ = mask_palette(d, 3, seed=5)
    assert all(s is not None for e in d.elements for s in e.palette.slots)
    assert masked != d


def test_mask_only_touches_palettes():
    d = make_document(five_slot_pair())
    masked, _ = mask_palette(d, 2, seed=11)
    for before, after in zip(d.elements, masked.elements):
        assert before.id == after.id
        assert before.frame == after.frame
        assert before.opacity == after.opacity
        assert before.text_content == after.text_content


def test_mask_k_bounds():
    d = make_document((make_element("e1", "svg", ("#111111",)),))
    with pytest.raises(ValidationError):
        mask_palette(d, 0, seed=1)
    with pytest.raises(ValidationError):
        mask_palette(d, 4, seed=1)
    with pytest.raises(ValidationError):
        mask_palette(d, 2, seed=1)


def test_mask_record_entries_in_document_order():
    d = make_document(five_slot_pair())
    for seed in range(25):
        _, record = mask_palette(d, 3, seed=seed)
        positions = [(e.element_id, e.slot_index) for e in record.entries]
        assert positions == sorted(positions)


def test_mask_uniform_over_slots():
    # Seed sweep: with 10 filled slots and k=1 each slot should be hit
    # about 10% of the time.
    d = make_document(five_slot_pair())
    counts = {pos: 0 for pos in d.filled_slots()}
    trials = 10_000
    for seed in range(trials):
        _, record = mask_palette(d, 1, seed=seed)
        entry = record.entries[0]
        counts[(entry.element_id, entry.slot_index)] += 1
    for hit in counts.values():
        assert abs(hit / trials - 0.1) <= 0.02


def test_apply_ground_truth_restores_original():
    d = make_document(five_slot_pair())
    masked, record = mask_palette(d, 3, seed=42)
    restored = apply_colors(masked, record, [e.ground_truth for e in record.entries])
    assert restored == d
    assert serialize_document(restored) == serialize_document(d)


def test_apply_changes_exactly_k_slots():
    d = make_document(five_slot_pair())
    masked, record = mask_palette(d, 2, seed=3)
    filled = apply_colors(masked, record, [Color(9, 9, 9), Color(8, 8, 8)])
    diffs = sum(
        1
        for before, after in zip(masked.elements, filled.elements)
        for s1, s2 in zip(before.palette.slots, after.palette.slots)
        if s1 != s2
    )
    assert diffs == 2


def test_apply_on_duplicate_colored_element_targets_recorded_slot_only():
    d = make_document((make_element("e1", "svg", ("#ff0000", "#ff0000", "#ff0000")),))
    masked, record = mask_palette(d, 1, seed=0)
    slot = record.entries[0].slot_index
    filled = apply_colors(masked, record, [Color(0, 255, 0)])
    for i, s in enumerate(filled.elements[0].palette.slots):
        assert s == (Color(0, 255, 0) if i == slot else Color(255, 0, 0))


def test_apply_length_mismatch():
    d = make_document(five_slot_pair())
    masked, record = mask_palette(d, 2, seed=3)
    with pytest.raises(ValidationError):
        apply_colors(masked, record, [Color(1, 1, 1)])


def test_apply_rejects_unmasked_target():
    d = make_document((make_element("e1", "svg", ("#111111", "#222222")),))
    record = MaskRecord("d1", (MaskEntry("e1", 0, Color(17, 17, 17)),), seed=0, k=1)
    with pytest.raises(ValidationError):
        apply_colors(d, record, [Color(1, 1, 1)])


def test_apply_rejects_wrong_document():
    d = make_document(five_slot_pair())
    masked, record = mask_palette(d, 1, seed=3)
    other = make_document(five_slot_pair(), doc_id="d2")
    with pytest.raises(ValidationError):
        apply_colors(other, record, [Color(1, 1, 1)])


def test_mask_record_validation():
    with pytest.raises(ValidationError):
        MaskRecord("d", (MaskEntry("e", 0),), seed=0, k=2)
    with pytest.raises(ValidationError):
        MaskRecord("d", (MaskEntry("e", 0), MaskEntry("e", 0)), seed=0, k=2)


colors_st = st.builds(
    Color,
    st.integers(0, 255),
    st.integers(0, 255),
    st.integers(0, 255),
)


def element_st(index):
    return st.builds(
        lambda cs: Element(
            id=f"e{index}",
            kind="svg",
            frame=Frame(0.0, 0.0, 0.5, 0.5),
            opacity=1.0,
            text_content=None,
            palette=Palette(tuple(cs)),
        ),
        st.lists(colors_st, min_size=1, max_size=5),
    )


documents_st = st.integers(1, 3).flatmap(
    lambda n: st.tuples(*[element_st(i) for i in range(n)]).map(
        lambda es: make_document(es)
    )
)


@settings(max_examples=60, deadline=None)
@given(doc=documents_st, seed=st.integers(0, 2**32 - 1), k=st.integers(1, 3))
def test_mask_then_apply_is_identity(doc, seed, k):
    if k > len(doc.filled_slots()):
        return
    masked, record = mask_palette(doc, k, seed)
    assert len(masked.masked_slots()) == k
    restored = apply_colors(masked, record, [e.ground_truth for e in record.entries])
    assert restored == doc


@settings(max_examples=40, deadline=None)
@given(doc=documents_st)
def test_serialize_parse_identity_property(doc):
    assert parse_document(serialize_document(doc)) == doc
