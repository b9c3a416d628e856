#!/usr/bin/env python3
"""Regenerate the committed scene fixtures under tests/fixtures/scenes."""

from pathlib import Path

from dmalign.imaging import save_image, write_pgm
from dmalign.toydata import SCENES, square_image, write_scene


def main():
    root = Path(__file__).resolve().parents[1] / "tests" / "fixtures" / "scenes"
    for name in SCENES:
        write_scene(name, root / name)
        print(f"wrote {name} scene")
    img, bits = square_image("red", 20, 20, 24)
    save_image(img, root / "red_square.png")
    write_pgm(bits, root / "square.pgm")
    print("wrote red_square fixture")


if __name__ == "__main__":
    main()
