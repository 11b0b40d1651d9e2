"""Canonical color values and conversions.

The canonical storage form everywhere in this package is an integer sRGB
triple. CIELAB conversion assumes the standard sRGB transfer curve and the
D65 reference white (2-degree observer); hex strings are lowercase on
output and case-insensitive on input.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass

from .errors import ColorFormatError, ValidationError

_HEX_RE = re.compile(r"^#([0-9a-fA-F]{6})$")

# sRGB <-> XYZ (linear, D65)
_RGB_TO_XYZ = (
    (0.4124564, 0.3575761, 0.1804375),
    (0.2126729, 0.7151522, 0.0721750),
    (0.0193339, 0.1191920, 0.9503041),
)
_XYZ_TO_RGB = (
    (3.2404542, -1.5371385, -0.4985314),
    (-0.9692660, 1.8760108, 0.0415560),
    (0.0556434, -0.2040259, 1.0572252),
)
_WHITE = (0.95047, 1.0, 1.08883)
_EPS = 216.0 / 24389.0  # (6/29)^3
_KAPPA = 24389.0 / 27.0


@dataclass(frozen=True)
class Color:
    """An sRGB color with integer channels in [0, 255]."""

    r: int
    g: int
    b: int

    def __post_init__(self):
        for name, v in (("r", self.r), ("g", self.g), ("b", self.b)):
            if not isinstance(v, int) or isinstance(v, bool):
                raise ValidationError(f"channel {name} must be an integer, got {v!r}")
            if not 0 <= v <= 255:
                raise ValidationError(f"channel {name}={v} outside [0, 255]")

    def as_tuple(self) -> tuple[int, int, int]:
        return (self.r, self.g, self.b)


@dataclass(frozen=True)
class LabColor:
    """CIELAB coordinates; l_star in [0, 100] for in-gamut sRGB inputs."""

    l_star: float
    a_star: float
    b_star: float


@dataclass(frozen=True)
class BinIndex:
    """Coordinates of a 16x16x16 RGB quantization bin."""

    br: int
    bg: int
    bb: int

    def __post_init__(self):
        for name, v in (("br", self.br), ("bg", self.bg), ("bb", self.bb)):
            if not 0 <= v <= 15:
                raise ValidationError(f"bin coordinate {name}={v} outside [0, 15]")


@dataclass(frozen=True)
class Representation:
    """How colors are written in prompts and replies.

    kind is one of "word", "hexcode", "rgb", "cielab", "wordhex"; the
    combined "wordhex" form additionally carries an output_mode: "H" reads
    back the hex part, "W" the word part.
    """

    kind: str
    output_mode: str | None = None

    _KINDS = ("word", "hexcode", "rgb", "cielab", "wordhex")

    def __post_init__(self):
        if self.kind not in self._KINDS:
            raise ValidationError(f"unknown representation kind {self.kind!r}")
        if self.kind == "wordhex":
            if self.output_mode not in ("H", "W"):
                raise ValidationError("wordhex requires output_mode 'H' or 'W'")
        elif self.output_mode is not None:
            raise ValidationError(f"output_mode only applies to wordhex, not {self.kind}")

    @property
    def label(self) -> str:
        names = {"word": "Word", "hexcode": "Hexcode", "rgb": "RGB", "cielab": "CIELAB"}
        if self.kind == "wordhex":
            return f"Word(Hex)-{self.output_mode}"
        return names[self.kind]

    @classmethod
    def from_string(cls, s: str) -> "Representation":
        key = s.strip().lower().replace("_", "-")
        table = {
            "word": cls("word"),
            "hexcode": cls("hexcode"),
            "hex": cls("hexcode"),
            "rgb": cls("rgb"),
            "cielab": cls("cielab"),
            "lab": cls("cielab"),
            "wordhex-h": cls("wordhex", "H"),
            "wordhex-w": cls("wordhex", "W"),
            "word(hex)-h": cls("wordhex", "H"),
            "word(hex)-w": cls("wordhex", "W"),
        }
        if key not in table:
            raise ValidationError(f"unknown representation {s!r}")
        return table[key]


WORD = Representation("word")
HEXCODE = Representation("hexcode")
RGB = Representation("rgb")
CIELAB = Representation("cielab")
WORDHEX_H = Representation("wordhex", "H")
WORDHEX_W = Representation("wordhex", "W")


def hex_to_color(hex_str: str) -> Color:
    """Parse "#RRGGBB" (case-insensitive) into a Color."""
    if not isinstance(hex_str, str):
        raise ColorFormatError(f"expected hex string, got {type(hex_str).__name__}")
    m = _HEX_RE.match(hex_str)
    if m is None:
        raise ColorFormatError(f"malformed hex color {hex_str!r}")
    digits = m.group(1)
    return Color(int(digits[0:2], 16), int(digits[2:4], 16), int(digits[4:6], 16))


def color_to_hex(c: Color) -> str:
    """Format as lowercase "#rrggbb"."""
    return f"#{c.r:02x}{c.g:02x}{c.b:02x}"


def _srgb_decode(u: float) -> float:
    if u <= 0.04045:
        return u / 12.92
    return ((u + 0.055) / 1.055) ** 2.4


def _srgb_encode(u: float) -> float:
    if u <= 0.0031308:
        return u * 12.92
    return 1.055 * (u ** (1.0 / 2.4)) - 0.055


def _lab_f(t: float) -> float:
    if t > _EPS:
        return t ** (1.0 / 3.0)
    return (_KAPPA * t + 16.0) / 116.0


def color_to_lab(c: Color) -> LabColor:
    """sRGB -> CIELAB (D65). White maps to (100, 0, 0)."""
    rl = _srgb_decode(c.r / 255.0)
    gl = _srgb_decode(c.g / 255.0)
    bl = _srgb_decode(c.b / 255.0)
    xyz = [0.0, 0.0, 0.0]
    for i, row in enumerate(_RGB_TO_XYZ):
        xyz[i] = row[0] * rl + row[1] * gl + row[2] * bl
    fx = _lab_f(xyz[0] / _WHITE[0])
    fy = _lab_f(xyz[1] / _WHITE[1])
    fz = _lab_f(xyz[2] / _WHITE[2])
    return LabColor(116.0 * fy - 16.0, 500.0 * (fx - fy), 200.0 * (fy - fz))


def lab_to_color(lab: LabColor) -> Color:
    """CIELAB -> sRGB, clamping out-of-gamut values to [0, 255].

    Clamping (rather than raising) matters because model-produced CIELAB
    triples are often slightly outside the sRGB gamut.
    """
    fy = (lab.l_star + 16.0) / 116.0
    fx = fy + lab.a_star / 500.0
    fz = fy - lab.b_star / 200.0

    def f_inv(f: float) -> float:
        f3 = f ** 3
        if f3 > _EPS:
            return f3
        return (116.0 * f - 16.0) / _KAPPA

    yr = ((lab.l_star + 16.0) / 116.0) ** 3 if lab.l_star > _KAPPA * _EPS else lab.l_star / _KAPPA
    x = f_inv(fx) * _WHITE[0]
    y = yr * _WHITE[1]
    z = f_inv(fz) * _WHITE[2]
    channels = []
    for row in _XYZ_TO_RGB:
        lin = row[0] * x + row[1] * y + row[2] * z
        lin = min(max(lin, 0.0), 1.0)
        channels.append(int(math.floor(_srgb_encode(lin) * 255.0 + 0.5)))
    return Color(*(min(max(v, 0), 255) for v in channels))


def delta_e(x: LabColor, y: LabColor) -> float:
    """Euclidean distance in CIELAB (CIE76); black-white spans 100."""
    return math.sqrt(
        (x.l_star - y.l_star) ** 2
        + (x.a_star - y.a_star) ** 2
        + (x.b_star - y.b_star) ** 2
    )


def quantize(c: Color) -> BinIndex:
    """Map a color to its 16x16x16 bin: floor(channel / 16) per channel."""
    return BinIndex(c.r // 16, c.g // 16, c.b // 16)
