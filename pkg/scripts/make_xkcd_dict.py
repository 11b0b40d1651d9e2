#!/usr/bin/env python3
"""Regenerate data/xkcd_rgb.txt from matplotlib's bundled xkcd color list.

matplotlib ships the 949-name xkcd color survey results; this writes them
back out in the plain `name<TAB>#rrggbb` layout the dictionary loader
expects. Run from the repository root.
"""

from pathlib import Path

import matplotlib._color_data as mcd

HEADER = "#xkcd color survey results, names -> hex\n#License: http://creativecommons.org/publicdomain/zero/1.0/\n"


def main():
    lines = [HEADER]
    for key, value in mcd.XKCD_COLORS.items():
        name = key.removeprefix("xkcd:")
        lines.append(f"{name}\t{value.lower()}\n")
    for out in (Path("data/xkcd_rgb.txt"), Path("src/colorrec/data/xkcd_rgb.txt")):
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_text("".join(lines), encoding="utf-8")
        print(f"wrote {out} ({len(lines) - 1} colors)")


if __name__ == "__main__":
    main()
