"""colorrec: LLM-driven color palette completion and generation toolkit."""

__version__ = "0.1.0"

from .colors import (  # noqa: F401
    CIELAB,
    HEXCODE,
    RGB,
    WORD,
    WORDHEX_H,
    WORDHEX_W,
    BinIndex,
    Color,
    LabColor,
    Representation,
    color_to_hex,
    color_to_lab,
    delta_e,
    hex_to_color,
    lab_to_color,
    quantize,
)
