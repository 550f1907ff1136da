"""Binary PGM (P5) export for importance maps, patterns, reconstructions.

Values in [0, 1] map linearly onto 0..255; 1 renders white, 0 black.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np


def write_pgm(path, image: np.ndarray) -> None:
    """Write a 2-D array with entries in [0, 1] as an 8-bit P5 file."""
    image = np.asarray(image, dtype=np.float64)
    if image.ndim != 2:
        raise ValueError("PGM export needs a 2-D image")
    h, w = image.shape
    levels = np.rint(np.clip(image, 0.0, 1.0) * 255.0).astype(np.uint8)
    with open(path, "wb") as fh:
        fh.write(f"P5\n{w} {h}\n255\n".encode("ascii"))
        fh.write(levels.tobytes())


def read_pgm(path) -> np.ndarray:
    """Read a binary P5 file back into a float array in [0, 1]."""
    raw = Path(path).read_bytes()
    fields = []
    pos = 0
    while len(fields) < 4:
        # Header tokens are whitespace-separated; '#' starts a comment line.
        while pos < len(raw) and raw[pos : pos + 1].isspace():
            pos += 1
        if raw[pos : pos + 1] == b"#":
            while pos < len(raw) and raw[pos : pos + 1] != b"\n":
                pos += 1
            continue
        start = pos
        while pos < len(raw) and not raw[pos : pos + 1].isspace():
            pos += 1
        fields.append(raw[start:pos])
    if fields[0] != b"P5":
        raise ValueError(f"{path} is not a binary PGM file")
    w, h, maxval = int(fields[1]), int(fields[2]), int(fields[3])
    pos += 1
    pixels = np.frombuffer(raw, dtype=np.uint8, count=w * h, offset=pos)
    return pixels.reshape(h, w).astype(np.float64) / maxval


def normalize_unit(values: np.ndarray) -> np.ndarray:
    """Min-max rescale into [0, 1]; a constant array maps to 0.5."""
    values = np.asarray(values, dtype=np.float64)
    lo, hi = values.min(), values.max()
    if hi == lo:
        return np.full_like(values, 0.5)
    return (values - lo) / (hi - lo)


def tile_grid(tiles: np.ndarray, shape: tuple[int, int], columns: int,
              gap: int = 1, gap_value: float = 0.5) -> np.ndarray:
    """Lay out row-vectors as (h, w) tiles in a grid, separated by gap pixels."""
    tiles = np.asarray(tiles, dtype=np.float64)
    if tiles.ndim != 2:
        raise ValueError("tiles must be a matrix of flattened images")
    h, w = shape
    if tiles.shape[1] != h * w:
        raise ValueError("tile width does not match the image shape")
    n = tiles.shape[0]
    rows = max(1, -(-n // columns))
    grid = np.full((rows * h + gap * (rows - 1),
                    columns * w + gap * (columns - 1)), gap_value)
    for i in range(n):
        r, c = divmod(i, columns)
        grid[r * (h + gap): r * (h + gap) + h,
             c * (w + gap): c * (w + gap) + w] = tiles[i].reshape(h, w)
    return grid
