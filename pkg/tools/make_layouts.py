"""Regenerate the shipped layout files under src/sycamore_ooc/data/layouts."""

from pathlib import Path

from sycamore_ooc.circuit import QubitLayout, grid_layout, save_layout

OUT = Path(__file__).resolve().parents[1] / "src" / "sycamore_ooc" / "data" / "layouts"

# Rotated-lattice chip outline (one character per grid site, '-' = no qubit).
CHIP = """\
-----AB---
----ABCD--
---ABCDEF-
--ABCDEFGH
-ABCDEFGHI
ABCDEFGHI-
-CDEFGHI--
--EFGHI---
---GHI----
----I-----"""


def sycamore_layout(drop=()):
    sites = [
        (r, c)
        for r, line in enumerate(CHIP.splitlines())
        for c, ch in enumerate(line)
        if ch != "-" and (r, c) not in drop
    ]

    # drawing frame: one row per anti-diagonal, columns staggered every other row
    def draw(site):
        r, c = site
        row = r + c - 5
        return row, r - row // 2

    sites.sort(key=draw)
    index = {s: i for i, s in enumerate(sites)}
    couplings = []
    for (r, c), i in index.items():
        down, right = (r + 1, c), (r, c + 1)
        if down in index:
            couplings.append((i, index[down], "A" if r % 2 == 0 else "B"))
        if right in index:
            couplings.append((i, index[right], "C" if c % 2 == 0 else "D"))
    couplings.sort(key=lambda t: (t[2], t[0], t[1]))
    return QubitLayout(len(sites), tuple(couplings), tuple(draw(s) for s in sites))


def main():
    OUT.mkdir(parents=True, exist_ok=True)
    save_layout(sycamore_layout(), OUT / "sycamore54.json")
    save_layout(sycamore_layout(drop={(5, 0)}), OUT / "sycamore53.json")
    for rows, cols in [(2, 2), (2, 3), (3, 3), (3, 4), (4, 4), (4, 5), (4, 6), (5, 5), (5, 6), (6, 6)]:
        save_layout(grid_layout(rows, cols), OUT / f"grid{rows}x{cols}.json")


if __name__ == "__main__":
    main()
