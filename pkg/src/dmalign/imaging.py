"""Image and mask file I/O.

Images travel through the pipeline as float64 arrays of shape (3, H, W)
with values in [0, 1]. Binary masks are uint8 arrays of shape (H, W) with
values in {0, 1}; soft masks are float64 (H, W) grids in [0, 1].

File formats:
  - images: 8-bit RGB PNG
  - binary masks: PGM P5, maxval 255, 0/255 semantics
  - soft masks: PGM P5, maxval 65535 (value = round(soft * 65535))
  - latent dumps: DMG1 (magic "DMG1", u32-LE C,H,W, then C*H*W float32-LE)
"""

from __future__ import annotations

import io
import struct

import numpy as np
from PIL import Image

from .errors import DimensionMismatch

DMG1_MAGIC = b"DMG1"


def load_image(path) -> np.ndarray:
    """Load an RGB PNG into a (3, H, W) float64 array in [0, 1]."""
    with Image.open(path) as img:
        rgb = img.convert("RGB")
        arr = np.asarray(rgb, dtype=np.float64) / 255.0
    return arr.transpose(2, 0, 1)


def image_to_bytes(image: np.ndarray) -> bytes:
    """Encode a (3, H, W) float array in [0, 1] as PNG bytes."""
    buf = io.BytesIO()
    Image.fromarray(image_to_uint8(image).transpose(1, 2, 0)).save(buf, format="PNG")
    return buf.getvalue()


def image_from_bytes(data: bytes) -> np.ndarray:
    with Image.open(io.BytesIO(data)) as img:
        arr = np.asarray(img.convert("RGB"), dtype=np.float64) / 255.0
    return arr.transpose(2, 0, 1)


def save_image(image: np.ndarray, path) -> None:
    with open(path, "wb") as fh:
        fh.write(image_to_bytes(image))


def image_to_uint8(image: np.ndarray) -> np.ndarray:
    return np.clip(np.round(image * 255.0), 0, 255).astype(np.uint8)


def write_pgm(mask: np.ndarray, path) -> None:
    """Write a {0,1} uint8 mask as a binary PGM (0/255)."""
    data = pgm_bytes(mask)
    with open(path, "wb") as fh:
        fh.write(data)


def pgm_bytes(mask: np.ndarray) -> bytes:
    if mask.ndim != 2:
        raise DimensionMismatch(f"mask must be 2-D, got shape {mask.shape}")
    h, w = mask.shape
    body = (np.asarray(mask, dtype=np.uint8) * 255).tobytes()
    return b"P5\n%d %d\n255\n" % (w, h) + body


def write_pgm16(soft: np.ndarray, path) -> None:
    """Write a [0,1] float grid as a 16-bit PGM (big-endian samples)."""
    if soft.ndim != 2:
        raise DimensionMismatch(f"soft mask must be 2-D, got shape {soft.shape}")
    h, w = soft.shape
    values = np.round(np.clip(soft, 0.0, 1.0) * 65535.0).astype(">u2")
    with open(path, "wb") as fh:
        fh.write(b"P5\n%d %d\n65535\n" % (w, h))
        fh.write(values.tobytes())


def read_pgm(path) -> np.ndarray:
    """Read a PGM mask file; returns {0,1} uint8 for maxval 255 and
    [0,1] float64 for maxval 65535."""
    with open(path, "rb") as fh:
        data = fh.read()
    return pgm_from_bytes(data)


def pgm_from_bytes(data: bytes) -> np.ndarray:
    fields: list[bytes] = []
    pos = 0
    # header = magic, width, height, maxval separated by whitespace/comments
    while len(fields) < 4:
        while pos < len(data) and data[pos : pos + 1].isspace():
            pos += 1
        if data[pos : pos + 1] == b"#":
            pos = data.index(b"\n", pos) + 1
            continue
        start = pos
        while pos < len(data) and not data[pos : pos + 1].isspace():
            pos += 1
        fields.append(data[start:pos])
    if fields[0] != b"P5":
        raise ValueError(f"unsupported PGM magic {fields[0]!r}")
    w, h, maxval = int(fields[1]), int(fields[2]), int(fields[3])
    pos += 1  # single whitespace byte after maxval
    if maxval == 255:
        raw = np.frombuffer(data, dtype=np.uint8, count=h * w, offset=pos)
        return (raw.reshape(h, w) >= 128).astype(np.uint8)
    if maxval == 65535:
        raw = np.frombuffer(data, dtype=">u2", count=h * w, offset=pos)
        return raw.reshape(h, w).astype(np.float64) / 65535.0
    raise ValueError(f"unsupported PGM maxval {maxval}")


def write_dmg1(grid: np.ndarray, path) -> None:
    """Dump a (C, H, W) float grid in the DMG1 container."""
    if grid.ndim != 3:
        raise DimensionMismatch(f"DMG1 grids are 3-D, got shape {grid.shape}")
    c, h, w = grid.shape
    with open(path, "wb") as fh:
        fh.write(DMG1_MAGIC)
        fh.write(struct.pack("<III", c, h, w))
        fh.write(np.asarray(grid, dtype="<f4").tobytes())


def read_dmg1(path) -> np.ndarray:
    with open(path, "rb") as fh:
        magic = fh.read(4)
        if magic != DMG1_MAGIC:
            raise ValueError(f"bad DMG1 magic {magic!r}")
        c, h, w = struct.unpack("<III", fh.read(12))
        raw = np.frombuffer(fh.read(4 * c * h * w), dtype="<f4")
    return raw.reshape(c, h, w).astype(np.float64)
