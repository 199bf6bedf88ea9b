"""Pure-numpy implementations of the per-pixel feature kernels.

These are the fallback twins of the compiled routines in ``_kernels.pyx``;
both backends produce identical integer codes, and float accumulations that
agree to rounding noise (the accumulation order differs slightly).
"""

from __future__ import annotations

import numpy as np

BACKEND = "python"

# neighbor offsets (dy, dx): right, bottom-right, bottom, bottom-left, left,
# top-left, top, top-right -- clockwise starting right of the center pixel.
_NEIGHBOR_OFFSETS = (
    (0, 1),
    (1, 1),
    (1, 0),
    (1, -1),
    (0, -1),
    (-1, -1),
    (-1, 0),
    (-1, 1),
)


def lbp_code_image(img: np.ndarray) -> np.ndarray:
    """Per-pixel binary codes over all interior pixels of an 8-bit image.

    Bit 0 is the most significant and corresponds to the right neighbor; the
    remaining bits follow clockwise. A neighbor >= center sets its bit.
    Returns a (h-2, w-2) uint8 array.
    """
    img = np.asarray(img, dtype=np.uint8)
    h, w = img.shape
    center = img[1 : h - 1, 1 : w - 1]
    codes = np.zeros((h - 2, w - 2), dtype=np.uint8)
    for bit, (dy, dx) in enumerate(_NEIGHBOR_OFFSETS):
        neighbor = img[1 + dy : h - 1 + dy, 1 + dx : w - 1 + dx]
        codes |= ((neighbor >= center).astype(np.uint8)) << (7 - bit)
    return codes


def hog_cell_histograms(
    mag: np.ndarray, theta: np.ndarray, cell: int, bins: int
) -> np.ndarray:
    """Accumulate per-cell orientation histograms with linear bin interpolation.

    ``theta`` is in degrees folded to [0, 180). Each pixel's magnitude is
    split between the two bin centers bracketing its orientation (circular
    over the half turn). Returns float64 (cells_y, cells_x, bins).
    """
    mag = np.asarray(mag, dtype=np.float64)
    theta = np.asarray(theta, dtype=np.float64)
    h, w = mag.shape
    cy, cx = h // cell, w // cell
    bin_width = 180.0 / bins

    pos = theta / bin_width - 0.5
    lo = np.floor(pos)
    frac = pos - lo
    lo_bin = (lo.astype(np.int64)) % bins
    hi_bin = (lo_bin + 1) % bins

    rows = np.repeat(np.arange(h) // cell, w).reshape(h, w)
    cols = np.tile(np.arange(w) // cell, h).reshape(h, w)

    hist = np.zeros((cy, cx, bins), dtype=np.float64)
    flat = hist.reshape(-1)
    base = (rows * cx + cols) * bins
    np.add.at(flat, (base + lo_bin).ravel(), (mag * (1.0 - frac)).ravel())
    np.add.at(flat, (base + hi_bin).ravel(), (mag * frac).ravel())
    return hist
