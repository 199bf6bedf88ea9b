"""Image and timing preprocessing.

Two image paths exist: Otsu-based foreground segmentation (feeding the
texture descriptors) and resize / center-crop / normalize (feeding external
embedding producers). Timing preprocessing is plain standardization against
training statistics.
"""

from __future__ import annotations

import enum
import warnings
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .dataset import GrayImage
from .errors import FitError

GRAY_LEVELS = 256


def _pixels(img) -> np.ndarray:
    return img.pixels if isinstance(img, GrayImage) else np.asarray(img)


class Polarity(enum.Enum):
    DARK_FOREGROUND = "dark"
    LIGHT_FOREGROUND = "light"


@dataclass(frozen=True)
class OtsuStats:
    """Histogram statistics plus the between-class-variance maximizer."""

    histogram: np.ndarray  # 256 counts
    total: int
    global_mean: float
    best_k: int
    best_variance: float
    degenerate: bool = False


def between_class_variance(histogram: np.ndarray) -> np.ndarray:
    """Between-class variance for every threshold k in [0, 255].

    Uses the numerically stable single-pass form
    ``(m * P1 - cumulative_mean)^2 / (P1 * (1 - P1))``; thresholds leaving
    one class empty get variance 0.
    """
    counts = np.asarray(histogram, dtype=np.float64)
    total = counts.sum()
    p = counts / total
    levels = np.arange(GRAY_LEVELS, dtype=np.float64)
    p1 = np.cumsum(p)
    mean_cum = np.cumsum(levels * p)
    m = mean_cum[-1]
    denom = p1 * (1.0 - p1)
    with np.errstate(divide="ignore", invalid="ignore"):
        sigma2 = np.where(denom > 0.0, (m * p1 - mean_cum) ** 2 / denom, 0.0)
    return sigma2


def otsu_threshold(img: GrayImage | np.ndarray) -> OtsuStats:
    """Pick the threshold maximizing between-class variance.

    The smallest maximizing k in [0, 254] wins ties. A single-gray-level
    image is degenerate: its own value is reported with variance 0.
    """
    px = _pixels(img)
    if px.size == 0:
        raise ValueError("empty image")
    counts = np.bincount(px.ravel(), minlength=GRAY_LEVELS).astype(np.int64)
    total = int(counts.sum())
    levels = np.arange(GRAY_LEVELS, dtype=np.float64)
    global_mean = float((levels * counts).sum() / total)
    nonzero = np.nonzero(counts)[0]
    if nonzero.size == 1:
        return OtsuStats(
            counts, total, global_mean, int(nonzero[0]), 0.0, degenerate=True
        )
    sigma2 = between_class_variance(counts)[: GRAY_LEVELS - 1]
    best_k = int(np.argmax(sigma2))  # argmax returns the first maximizer
    return OtsuStats(counts, total, global_mean, best_k, float(sigma2[best_k]))


def segment(
    img: GrayImage | np.ndarray,
    stats: OtsuStats,
    polarity: Polarity = Polarity.DARK_FOREGROUND,
    binarize: bool = False,
) -> GrayImage:
    """Erase the background side of the threshold to white (255).

    Foreground pixels keep their intensity; with ``binarize`` they are forced
    to 0 instead (offered for experimentation, masking is the default).
    Degenerate stats leave the image unchanged and emit a warning.
    """
    px = _pixels(img)
    source_id = img.source_id if isinstance(img, GrayImage) else None
    if stats.degenerate:
        warnings.warn("degenerate threshold statistics; image left unsegmented")
        return GrayImage(px.copy(), source_id=source_id)
    if polarity is Polarity.DARK_FOREGROUND:
        foreground = px <= stats.best_k
    else:
        foreground = px > stats.best_k
    out = np.where(foreground, np.uint8(0) if binarize else px, np.uint8(255))
    return GrayImage(out.astype(np.uint8), source_id=source_id)


def bilinear_resize(values: np.ndarray, out_h: int, out_w: int) -> np.ndarray:
    """Bilinear resample with half-pixel centers (identity when sizes match)."""
    values = np.asarray(values, dtype=np.float64)
    in_h, in_w = values.shape

    def _axis_coords(n_out, n_in):
        scale = n_in / n_out
        src = (np.arange(n_out) + 0.5) * scale - 0.5
        src = np.clip(src, 0.0, n_in - 1.0)
        lo = np.floor(src).astype(np.int64)
        lo = np.minimum(lo, n_in - 2) if n_in > 1 else np.zeros_like(lo)
        frac = src - lo
        return lo, frac

    ylo, yfrac = _axis_coords(out_h, in_h)
    xlo, xfrac = _axis_coords(out_w, in_w)
    tl = values[np.ix_(ylo, xlo)]
    tr = values[np.ix_(ylo, xlo + 1)] if in_w > 1 else tl
    bl = values[np.ix_(ylo + 1, xlo)] if in_h > 1 else tl
    br = values[np.ix_(ylo + 1, xlo + 1)] if in_h > 1 and in_w > 1 else tl
    top = tl * (1 - xfrac) + tr * xfrac
    bot = bl * (1 - xfrac) + br * xfrac
    return top * (1 - yfrac[:, None]) + bot * yfrac[:, None]


@dataclass(frozen=True)
class NormalizedImage:
    """Real-valued image produced by resize / crop / scale / standardize."""

    values: np.ndarray

    @property
    def width(self) -> int:
        return self.values.shape[1]

    @property
    def height(self) -> int:
        return self.values.shape[0]


def prepro2(
    img: GrayImage | np.ndarray,
    resize_to: int = 224,
    crop_to: int = 224,
    mean: float = 0.485,
    std: float = 0.229,
) -> NormalizedImage:
    """Bilinear resize, center crop, scale to [0, 1], then (v - mean) / std."""
    if crop_to > resize_to:
        raise ValueError(f"crop_to {crop_to} exceeds resize_to {resize_to}")
    if std <= 0:
        raise ValueError("std must be positive")
    px = _pixels(img).astype(np.float64)
    if px.shape != (resize_to, resize_to):
        px = bilinear_resize(px, resize_to, resize_to)
    start = (resize_to - crop_to) // 2
    px = px[start : start + crop_to, start : start + crop_to]
    return NormalizedImage((px / 255.0 - mean) / std)


@dataclass(frozen=True)
class TimingStandardizer:
    """Maps an interval t to (t - mu) / sigma using training statistics."""

    mu: float
    sigma: float

    def standardize(self, t: float) -> float:
        return (t - self.mu) / self.sigma

    def standardize_many(self, ts: Sequence[float]) -> np.ndarray:
        return (np.asarray(ts, dtype=np.float64) - self.mu) / self.sigma


def fit_timing(train_intervals: Sequence[float]) -> TimingStandardizer:
    """Fit mean and population standard deviation (divisor N) on intervals."""
    values = np.asarray(train_intervals, dtype=np.float64)
    if values.size < 2:
        raise FitError("need at least 2 intervals to standardize timing")
    mu = float(values.mean())
    sigma = float(values.std())  # population form
    if sigma == 0.0:
        raise FitError("degenerate training timing: all intervals identical")
    return TimingStandardizer(mu, sigma)
