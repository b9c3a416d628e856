"""Synthetic images for training and fixtures.

The shapes dataset is solid-color squares on a gray background with
captions like "a red square"; it is what the bundled denoiser weights
are trained on. The scene builders produce the demo fixtures (an image
plus per-noun region masks) used by tests and by the CLI quickstart.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .imaging import save_image, write_pgm

COLORS = {
    "red": (0.9, 0.1, 0.1),
    "green": (0.1, 0.9, 0.1),
    "blue": (0.1, 0.1, 0.9),
}
BACKGROUND = 0.5
DEFAULT_SIZE = 64


def square_image(
    color: str, top: int, left: int, side: int, size: int = DEFAULT_SIZE
) -> tuple[np.ndarray, np.ndarray]:
    """One colored square on gray; returns (image, region bits)."""
    img = np.full((3, size, size), BACKGROUND)
    bits = np.zeros((size, size), dtype=np.uint8)
    r, g, b = COLORS[color]
    img[0, top : top + side, left : left + side] = r
    img[1, top : top + side, left : left + side] = g
    img[2, top : top + side, left : left + side] = b
    bits[top : top + side, left : left + side] = 1
    return img, bits


def shapes_dataset(
    n: int = 60, size: int = DEFAULT_SIZE, seed: int = 0
) -> list[tuple[np.ndarray, str]]:
    """n (image, caption) pairs cycling through the square colors."""
    rng = np.random.default_rng(seed)
    names = list(COLORS)
    margin = max(2, size // 16)
    dataset = []
    for k in range(n):
        color = names[k % len(names)]
        side = int(rng.integers(size // 4, size // 2 + 1))
        top = int(rng.integers(margin, size - side - margin))
        left = int(rng.integers(margin, size - side - margin))
        img, _ = square_image(color, top, left, side, size)
        dataset.append((img, f"a {color} square"))
    return dataset


def write_shapes_dataset(directory, n: int = 60, size: int = DEFAULT_SIZE, seed: int = 0) -> None:
    """Materialize the dataset as PNG + caption .txt pairs."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    for k, (img, caption) in enumerate(shapes_dataset(n, size, seed)):
        stem_name = f"shape_{k:03d}"
        save_image(img, directory / f"{stem_name}.png")
        (directory / f"{stem_name}.txt").write_text(caption + "\n", "utf-8")


def load_image_caption_dir(directory) -> list[tuple[np.ndarray, str]]:
    """Read a dataset directory of <name>.png + <name>.txt pairs."""
    from .imaging import load_image

    directory = Path(directory)
    dataset = []
    for png in sorted(directory.glob("*.png")):
        caption_file = png.with_suffix(".txt")
        if not caption_file.exists():
            raise FileNotFoundError(f"no caption file next to {png}")
        dataset.append((load_image(png), caption_file.read_text("utf-8").strip()))
    if not dataset:
        raise FileNotFoundError(f"no .png/.txt pairs found in {directory}")
    return dataset


def beach_scene(size: int = DEFAULT_SIZE):
    """Sky over sand with a ship on the horizon; masks per noun."""
    horizon = size // 2
    img = np.zeros((3, size, size))
    img[:, :horizon, :] = np.array([0.55, 0.75, 0.95])[:, None, None]  # sky
    img[:, horizon:, :] = np.array([0.85, 0.75, 0.55])[:, None, None]  # sand
    ship = np.zeros((size, size), dtype=np.uint8)
    top, bottom = size * 5 // 16, size * 9 // 16
    left, right = size * 3 // 8, size * 5 // 8
    ship[top:bottom, left:right] = 1
    img[0][ship == 1] = 0.45
    img[1][ship == 1] = 0.30
    img[2][ship == 1] = 0.20
    sky = np.zeros_like(ship)
    sky[:horizon, :] = 1
    sky &= 1 - ship
    sand = np.zeros_like(ship)
    sand[horizon:, :] = 1
    sand &= 1 - ship
    return img, {"sky": sky, "ship": ship, "sand": sand}


def jacket_scene(size: int = DEFAULT_SIZE):
    """A figure with a head and a red jacket torso; masks per noun."""
    img = np.full((3, size, size), 0.92)
    head = np.zeros((size, size), dtype=np.uint8)
    ys, xs = np.ogrid[:size, :size]
    cy, cx, radius = size * 5 // 16, size // 2, size // 8
    head[(ys - cy) ** 2 + (xs - cx) ** 2 <= radius**2] = 1
    img[0][head == 1] = 0.9
    img[1][head == 1] = 0.75
    img[2][head == 1] = 0.6
    jacket = np.zeros_like(head)
    jacket[size * 7 // 16 : size * 12 // 16, size * 5 // 16 : size * 11 // 16] = 1
    img[0][jacket == 1] = 0.85
    img[1][jacket == 1] = 0.12
    img[2][jacket == 1] = 0.12
    return img, {"woman": head, "jacket": jacket}


def motorcycle_scene(size: int = DEFAULT_SIZE):
    """A motorcycle on the left, a man on the right; masks per noun."""
    img = np.full((3, size, size), 0.80)
    motorcycle = np.zeros((size, size), dtype=np.uint8)
    motorcycle[size * 9 // 16 : size * 13 // 16, size // 8 : size * 7 // 16] = 1
    img[0][motorcycle == 1] = 0.15
    img[1][motorcycle == 1] = 0.15
    img[2][motorcycle == 1] = 0.2
    man = np.zeros_like(motorcycle)
    man[size * 5 // 16 : size * 13 // 16, size * 9 // 16 : size * 12 // 16] = 1
    img[0][man == 1] = 0.3
    img[1][man == 1] = 0.5
    img[2][man == 1] = 0.45
    return img, {"motorcycle": motorcycle, "man": man}


SCENES = {
    "beach": beach_scene,
    "jacket": jacket_scene,
    "motorcycle": motorcycle_scene,
}


def write_scene(name: str, directory, size: int = DEFAULT_SIZE) -> None:
    """Write a scene's image.png and its <noun>.pgm masks."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    img, masks = SCENES[name](size)
    save_image(img, directory / "image.png")
    for noun, bits in masks.items():
        write_pgm(bits, directory / f"{noun}.pgm")
