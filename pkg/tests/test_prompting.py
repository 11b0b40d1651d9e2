import io
import json

import pytest

from colorrec.codec import encode_color
from colorrec.colors import CIELAB, HEXCODE, RGB, WORD, WORDHEX_H, WORDHEX_W, Color
from colorrec.document import (
    MASK_TOKEN,
    mask_palette,
    parse_document,
    serialize_document,
)
from colorrec.errors import (
    ReplyCountError,
    ReplyFormatError,
    ReplyStructureError,
    ValidationError,
)
from colorrec.naming import load_dictionary
from colorrec.prompting import (
    PromptBundle,
    PromptConfig,
    build_completion_prompt,
    build_generation_prompt,
    derive_query_text,
    flat_payload,
    parse_completion_reply,
    parse_generation_reply,
    stable_seed,
    template_set_hash,
)
from colorrec.retrieval import Exemplar, FallbackEmbedder

DOC_JSON = (
    '{"id": "case-1", "title": "Summer Sale", "category": "sale", '
    '"keywords": ["summer", "beach"], "layout": {"width": 1.0, "height": 0.75}, '
    '"elements": ['
    '{"id": "e1", "type": "text", "layout": {"x": 0.1, "y": 0.1, "width": 0.8, "height": 0.2}, '
    '"opacity": 1.0, "text": "Big Summer Sale", "color_palette": ["#112233", "#ffcc00"]}, '
    '{"id": "e2", "type": "svg", "layout": {"x": 0.0, "y": 0.4, "width": 1.0, "height": 0.35}, '
    '"opacity": 0.9, "text": null, "color_palette": ["#ffffff", "#336699", "#000000"]}]}'
)

EXEMPLAR_DOC_JSON = (
    '{"id": "ex-1", "title": "Beach Party", "category": "event", '
    '"keywords": ["beach"], "layout": {"width": 1.0, "height": 1.0}, "elements": ['
    '{"id": "x1", "type": "colored_background", '
    '"layout": {"x": 0.0, "y": 0.0, "width": 1.0, "height": 1.0}, '
    '"opacity": 1.0, "text": null, "color_palette": ["#fa8072", "#20b2aa", "#fffacd"]}]}'
)


@pytest.fixture()
def case_doc():
    return parse_document(DOC_JSON)


@pytest.fixture()
def completion_exemplar():
    return Exemplar(id="ex-1", query_text="beach party event", payload=EXEMPLAR_DOC_JSON, vector=(1.0,))


@pytest.fixture()
def generation_exemplar():
    payload = json.dumps(
        {"description": "calm ocean sunrise", "palette": ["#0a2a43", "#1f6f8b", "#99d0c7", "#f4d06f", "#f18805"]}
    )
    return Exemplar(id="pat-1", query_text="calm ocean sunrise", payload=payload, vector=(1.0,))


@pytest.fixture(scope="module")
def xkcd():
    from colorrec.naming import default_dictionary_path

    return load_dictionary(default_dictionary_path())


def test_prompt_config_validation():
    with pytest.raises(ValidationError):
        PromptConfig(task="summarize")
    with pytest.raises(ValidationError):
        PromptConfig(task="generation", structure="flat")
    with pytest.raises(ValidationError):
        PromptConfig(task="completion", exemplar_count=-1)
    with pytest.raises(ValidationError):
        PromptConfig(task="completion", exemplar_policy="telepathy")


def test_prompt_config_default_representations():
    assert PromptConfig(task="completion").representation == HEXCODE
    assert PromptConfig(task="generation").representation == WORDHEX_H


def test_completion_prompt_structure(case_doc, completion_exemplar):
    masked, record = mask_palette(case_doc, 1, seed=5)
    cfg = PromptConfig(task="completion")
    bundle = build_completion_prompt(masked, completion_exemplar, cfg)

    assert bundle.system.startswith("You are a color expert.")
    # Order: guidance, exemplar block, masked payload last.
    guidance_at = bundle.user.find("Reply with the JSON object only")
    block_at = bundle.user.find("### Example")
    payload_at = bundle.user.rfind('{"id": "case-1"')
    assert 0 <= guidance_at < block_at < payload_at
    assert bundle.user.count("### Example") == 1
    # The case payload carries exactly the case's own mask token.
    payload = bundle.user[payload_at:]
    assert payload.count(MASK_TOKEN) == 1
    assert parse_document(payload) == masked
    # The exemplar block is a masked-input/solved-output pair.
    assert bundle.exemplar_block.count(MASK_TOKEN) == 1
    assert '"id": "ex-1"' in bundle.exemplar_block


def test_completion_prompt_without_exemplar(case_doc):
    masked, _ = mask_palette(case_doc, 1, seed=5)
    cfg = PromptConfig(task="completion", exemplar_policy="none")
    bundle = build_completion_prompt(masked, None, cfg)
    assert bundle.exemplar_block == ""
    assert "### Example" not in bundle.user
    assert bundle.user.count(MASK_TOKEN) == 1


def test_completion_prompt_requires_mask(case_doc):
    cfg = PromptConfig(task="completion", exemplar_policy="none")
    with pytest.raises(ValidationError):
        build_completion_prompt(case_doc, None, cfg)


def test_completion_prompt_requires_exemplar_for_policy(case_doc):
    masked, _ = mask_palette(case_doc, 1, seed=5)
    with pytest.raises(ValidationError):
        build_completion_prompt(masked, None, PromptConfig(task="completion"))


def test_flat_mode_has_no_braces(case_doc, completion_exemplar):
    masked, _ = mask_palette(case_doc, 1, seed=5)
    cfg = PromptConfig(task="completion", structure="flat", representation=WORD)
    xk = load_dictionary(io.StringIO("red\t#ff0000\nwhite\t#ffffff\nnavy\t#001146\n"))
    bundle = build_completion_prompt(masked, completion_exemplar, cfg, dictionary=xk)
    assert "{" not in bundle.user and "}" not in bundle.user
    assert "_" in bundle.user
    assert "Document: case-1" in bundle.user


def test_flat_payload_rendering(case_doc):
    masked, record = mask_palette(case_doc, 2, seed=9)
    text = flat_payload(masked, HEXCODE)
    assert text.splitlines()[0] == "Document: case-1"
    assert text.count("_") == 2
    assert "e1: [" in text and "e2: [" in text


def test_completion_prompt_deterministic(case_doc, completion_exemplar):
    masked, _ = mask_palette(case_doc, 2, seed=3)
    cfg = PromptConfig(task="completion")
    b1 = build_completion_prompt(masked, completion_exemplar, cfg)
    b2 = build_completion_prompt(masked, completion_exemplar, cfg)
    assert b1 == b2
    assert b1.fingerprint == b2.fingerprint


def test_completion_exemplar_round_trips(case_doc, completion_exemplar):
    masked, _ = mask_palette(case_doc, 1, seed=5)
    bundle = build_completion_prompt(masked, completion_exemplar, PromptConfig(task="completion"))
    # Both documents inside the user text re-parse.
    lines = [ln for ln in bundle.user.splitlines() if ln.startswith("{")]
    assert len(lines) == 3  # exemplar input, exemplar output, case payload
    for ln in lines:
        parse_document(ln)


def test_generation_prompt_structure(generation_exemplar, xkcd):
    cfg = PromptConfig(task="generation")
    bundle = build_generation_prompt("green grass field", generation_exemplar, cfg, dictionary=xkcd)
    assert "exactly 5" in bundle.user
    assert bundle.user.rstrip().endswith("Description: green grass field")
    assert "Description: calm ocean sunrise" in bundle.exemplar_block
    assert '(#0a2a43)' in bundle.exemplar_block  # wordhex rendering of the exemplar palette


def test_generation_prompt_cielab_hint():
    cfg = PromptConfig(task="generation", representation=CIELAB, exemplar_policy="none")
    bundle = build_generation_prompt("sunset", None, cfg)
    assert "CIELAB triple" in bundle.user


def test_generation_prompt_empty_text(generation_exemplar):
    with pytest.raises(ValidationError):
        build_generation_prompt("   ", generation_exemplar, PromptConfig(task="generation"))


def test_generation_exemplar_verbatim(generation_exemplar, xkcd):
    cfg = PromptConfig(task="generation")
    bundle = build_generation_prompt("calm ocean sunrise", generation_exemplar, cfg, dictionary=xkcd)
    assert bundle.user.count("Description: calm ocean sunrise") == 2


def test_parse_completion_reply_echo_every_representation(case_doc, xkcd):
    embedder = FallbackEmbedder()
    for representation in (HEXCODE, RGB, CIELAB, WORD, WORDHEX_H, WORDHEX_W):
        masked, record = mask_palette(case_doc, 2, seed=11)
        reply = json.loads(serialize_document(case_doc, representation, xkcd))
        colors = parse_completion_reply(reply, record, representation, xkcd, embedder)
        assert len(colors) == 2
        if representation in (HEXCODE, RGB):
            assert colors == [e.ground_truth for e in record.entries]


def test_parse_completion_reply_hexcode_exact(case_doc):
    masked, record = mask_palette(case_doc, 3, seed=2)
    reply = json.loads(serialize_document(case_doc))
    assert parse_completion_reply(reply, record, HEXCODE) == [
        e.ground_truth for e in record.entries
    ]


def test_parse_completion_reply_wordhex_h(case_doc, xkcd):
    masked, record = mask_palette(case_doc, 1, seed=5)
    entry = record.entries[0]
    reply = json.loads(serialize_document(case_doc))
    for raw in reply["elements"]:
        if raw["id"] == entry.element_id:
            raw["color_palette"][entry.slot_index] = "white (#ffffff)"
    colors = parse_completion_reply(reply, record, WORDHEX_H, xkcd)
    assert colors == [Color(255, 255, 255)]


def test_parse_completion_reply_missing_element(case_doc):
    masked, record = mask_palette(case_doc, 1, seed=5)
    reply = json.loads(serialize_document(case_doc))
    reply["elements"] = [e for e in reply["elements"] if e["id"] != record.entries[0].element_id]
    with pytest.raises(ReplyStructureError):
        parse_completion_reply(reply, record, HEXCODE)


def test_parse_completion_reply_unresolved_mask(case_doc):
    masked, record = mask_palette(case_doc, 1, seed=5)
    reply = json.loads(serialize_document(masked))
    with pytest.raises(ReplyFormatError):
        parse_completion_reply(reply, record, HEXCODE)


def test_parse_completion_reply_bad_color(case_doc):
    masked, record = mask_palette(case_doc, 1, seed=5)
    entry = record.entries[0]
    reply = json.loads(serialize_document(case_doc))
    for raw in reply["elements"]:
        if raw["id"] == entry.element_id:
            raw["color_palette"][entry.slot_index] = "#zzz"
    with pytest.raises(ReplyFormatError):
        parse_completion_reply(reply, record, HEXCODE)


def test_parse_completion_reply_flat(case_doc):
    masked, record = mask_palette(case_doc, 2, seed=7)
    reply = [encode_color(e.ground_truth, HEXCODE) for e in record.entries]
    assert parse_completion_reply(reply, record, HEXCODE, structure="flat") == [
        e.ground_truth for e in record.entries
    ]
    with pytest.raises(ReplyCountError):
        parse_completion_reply(reply[:1], record, HEXCODE, structure="flat")
    with pytest.raises(ReplyStructureError):
        parse_completion_reply({"colors": reply}, record, HEXCODE, structure="flat")


def test_parse_generation_reply_hex():
    reply = ["#000000", "#ffffff", "#ff0000", "#00ff00", "#0000ff"]
    palette = parse_generation_reply(reply, HEXCODE)
    assert [c.as_tuple() for c in palette.slots] == [
        (0, 0, 0),
        (255, 255, 255),
        (255, 0, 0),
        (0, 255, 0),
        (0, 0, 255),
    ]


def test_parse_generation_reply_wordhex_h(xkcd):
    reply = ["white (#ffffff)"] * 5
    palette = parse_generation_reply(reply, WORDHEX_H, xkcd)
    assert palette.slots == (Color(255, 255, 255),) * 5


def test_parse_generation_reply_count_error():
    with pytest.raises(ReplyCountError):
        parse_generation_reply(["#000000"] * 4, HEXCODE)


def test_parse_generation_reply_bad_entry():
    with pytest.raises(ReplyFormatError):
        parse_generation_reply(["#000000"] * 4 + ["mud"], HEXCODE)


def test_parse_generation_reply_accepts_wrapped_object():
    reply = {"palette": ["#000000", "#ffffff", "#ff0000", "#00ff00", "#0000ff"]}
    assert len(parse_generation_reply(reply, HEXCODE)) == 5


def test_derive_query_text(case_doc):
    assert (
        derive_query_text(case_doc)
        == "Summer Sale. sale. summer, beach. Big Summer Sale."
    )


def test_derive_query_text_empty_parts(case_doc):
    from dataclasses import replace

    bare = replace(case_doc, title="", keywords=())
    assert derive_query_text(bare) == "sale. Big Summer Sale."


def test_derive_query_text_is_order_sensitive(case_doc):
    from dataclasses import replace

    swapped = replace(case_doc, elements=tuple(reversed(case_doc.elements)))
    assert derive_query_text(swapped) == derive_query_text(case_doc)
    two_texts = replace(
        case_doc,
        elements=(
            replace(case_doc.elements[0], id="a", text_content="first"),
            replace(case_doc.elements[0], id="b", text_content="second"),
        ),
    )
    flipped = replace(two_texts, elements=tuple(reversed(two_texts.elements)))
    assert derive_query_text(two_texts) != derive_query_text(flipped)


def test_derive_query_text_collapses_whitespace(case_doc):
    from dataclasses import replace

    messy = replace(case_doc, title="  Summer \n  Sale  ")
    assert derive_query_text(messy).startswith("Summer Sale.")


def test_stable_seed_deterministic():
    assert stable_seed("doc-1", 2) == stable_seed("doc-1", 2)
    assert stable_seed("doc-1", 2) != stable_seed("doc-1", 3)
    assert stable_seed("doc-12") != stable_seed("doc-1", 2)


def test_template_hash_stable():
    assert template_set_hash() == template_set_hash()
    assert len(template_set_hash()) == 16


def test_golden_prompt_snapshot(case_doc, completion_exemplar, tmp_path):
    # Byte stability across runs: the full bundle for a fixed fixture and
    # config hashes to the same fingerprint when rebuilt from scratch.
    masked, _ = mask_palette(case_doc, 1, seed=5)
    cfg = PromptConfig(task="completion")
    fingerprints = {
        build_completion_prompt(masked, completion_exemplar, cfg).fingerprint
        for _ in range(3)
    }
    assert len(fingerprints) == 1


ALL_REPRESENTATIONS = (WORD, HEXCODE, RGB, CIELAB, WORDHEX_H, WORDHEX_W)


def test_every_ablation_arm_is_reachable(case_doc, completion_exemplar, generation_exemplar, xkcd):
    masked, _ = mask_palette(case_doc, 1, seed=5)
    for representation in ALL_REPRESENTATIONS:
        for profile in ("short", "long"):
            for structure in ("json", "flat"):
                for policy in ("similarity", "random", "none"):
                    cfg = PromptConfig(
                        task="completion",
                        representation=representation,
                        profile_variant=profile,
                        structure=structure,
                        exemplar_policy=policy,
                    )
                    ex = None if policy == "none" else completion_exemplar
                    bundle = build_completion_prompt(masked, ex, cfg, dictionary=xkcd)
                    assert isinstance(bundle, PromptBundle)
    for representation in ALL_REPRESENTATIONS:
        cfg = PromptConfig(task="generation", representation=representation)
        bundle = build_generation_prompt("x", generation_exemplar, cfg, dictionary=xkcd)
        assert isinstance(bundle, PromptBundle)
