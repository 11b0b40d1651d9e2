import io

import pytest

from colorrec.codec import decode_color, encode_color
from colorrec.colors import (
    CIELAB,
    HEXCODE,
    RGB,
    WORD,
    WORDHEX_H,
    WORDHEX_W,
    Color,
    color_to_lab,
)
from colorrec.errors import ColorFormatError, ValidationError
from colorrec.naming import load_dictionary
from colorrec.retrieval import FallbackEmbedder


@pytest.fixture(scope="module")
def tiny_dict():
    return load_dictionary(
        io.StringIO(
            "white\t#ffffff\nblack\t#000000\nred\t#ff0000\ncerulean\t#0485d1\n"
        )
    )


def test_encode_hexcode():
    assert encode_color(Color(255, 127, 0), HEXCODE) == "#ff7f00"


def test_encode_rgb():
    assert encode_color(Color(255, 255, 255), RGB) == "[255, 255, 255]"


def test_encode_cielab_white_matches_reference():
    assert encode_color(Color(255, 255, 255), CIELAB) == "(100, 0, 0)"


def test_encode_word_and_wordhex(tiny_dict):
    c = Color(4, 133, 209)
    assert encode_color(c, WORD, tiny_dict) == "cerulean"
    assert encode_color(c, WORDHEX_H, tiny_dict) == "cerulean (#0485d1)"
    assert encode_color(c, WORDHEX_W, tiny_dict) == "cerulean (#0485d1)"


def test_encode_word_nearest_when_inexact(tiny_dict):
    assert encode_color(Color(250, 1, 2), WORD, tiny_dict) == "red"


def test_encode_word_requires_dictionary():
    with pytest.raises(ValidationError):
        encode_color(Color(0, 0, 0), WORD)


def test_decode_hexcode_lenient():
    assert decode_color("#ff7f00", HEXCODE) == Color(255, 127, 0)
    assert decode_color("  FF7F00 ", HEXCODE) == Color(255, 127, 0)
    with pytest.raises(ColorFormatError):
        decode_color("#ff7f0", HEXCODE)


def test_decode_rgb_forms():
    expected = Color(12, 34, 56)
    for text in ("[12, 34, 56]", "(12,34,56)", "12, 34, 56"):
        assert decode_color(text, RGB) == expected
    assert decode_color([12, 34, 56], RGB) == expected


def test_decode_rgb_rejects_bad_values():
    with pytest.raises(ColorFormatError):
        decode_color("[12, 34]", RGB)
    with pytest.raises(ColorFormatError):
        decode_color("[300, 0, 0]", RGB)
    with pytest.raises(ColorFormatError):
        decode_color("[1.5, 0, 0]", RGB)


def test_decode_cielab_round_trips_within_one():
    c = Color(180, 40, 90)
    text = encode_color(c, CIELAB)
    back = decode_color(text, CIELAB)
    assert all(abs(a - b) <= 1 for a, b in zip(c.as_tuple(), back.as_tuple()))


def test_decode_cielab_clamps_out_of_gamut():
    assert decode_color("(200, 0, 0)", CIELAB) == Color(255, 255, 255)


def test_decode_word_exact(tiny_dict):
    assert decode_color("White", WORD, tiny_dict) == Color(255, 255, 255)


def test_decode_word_out_of_dictionary_uses_embedder(tiny_dict):
    c = decode_color("whitish", WORD, tiny_dict, FallbackEmbedder())
    assert isinstance(c, Color)


def test_decode_word_without_embedder_fails(tiny_dict):
    with pytest.raises(ValidationError):
        decode_color("nonexistent shade", WORD, tiny_dict)


def test_decode_wordhex_modes(tiny_dict):
    text = "white (#fefefe)"
    assert decode_color(text, WORDHEX_H, tiny_dict) == Color(254, 254, 254)
    assert decode_color(text, WORDHEX_W, tiny_dict) == Color(255, 255, 255)


def test_decode_wordhex_requires_pattern():
    with pytest.raises(ColorFormatError):
        decode_color("#ffffff", WORDHEX_H)
    with pytest.raises(ColorFormatError):
        decode_color("white", WORDHEX_H)


def test_decode_rejects_non_color_values():
    with pytest.raises(ColorFormatError):
        decode_color({"r": 1}, RGB)
    with pytest.raises(ColorFormatError):
        decode_color("", HEXCODE)


def test_round_trip_every_representation(tiny_dict):
    embedder = FallbackEmbedder()
    c = Color(255, 0, 0)
    for representation in (HEXCODE, RGB, CIELAB, WORD, WORDHEX_H, WORDHEX_W):
        text = encode_color(c, representation, tiny_dict)
        back = decode_color(text, representation, tiny_dict, embedder)
        assert back == c, representation.label
