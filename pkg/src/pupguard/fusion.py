"""Combining the image feature vector with the standardized timing scalar.

Two schemes: concatenation (timing appended as one extra coordinate) and
cross (every image coordinate multiplied by the timing scalar). Because the
standardized timing has mean 0 on training data, the literal cross zeroes
the image channel for perfectly average intervals; ``offset`` shifts the
multiplier (offset=1 is the recommended practical setting) while the default
0 keeps the literal formula.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .errors import FitError


class FusionScheme(enum.Enum):
    CONCAT = "concat"
    CROSS = "cross"


@dataclass(frozen=True)
class FusedSample:
    values: np.ndarray
    scheme: FusionScheme
    source_pair_id: str


def fuse_concat(img: np.ndarray, t_star: float, pair_id: str = "") -> FusedSample:
    """Image vector with the timing scalar appended as the final entry."""
    values = np.append(np.asarray(img, dtype=np.float64), t_star)
    return FusedSample(values, FusionScheme.CONCAT, pair_id)


def fuse_cross(
    img: np.ndarray, t_star: float, offset: float = 0.0, pair_id: str = ""
) -> FusedSample:
    """Every image coordinate multiplied by (t_star + offset)."""
    values = np.asarray(img, dtype=np.float64) * (t_star + offset)
    return FusedSample(values, FusionScheme.CROSS, pair_id)


@dataclass(frozen=True)
class FeatureScaler:
    """Per-dimension standardization fitted on training fused vectors.

    Applied before the distance-based detectors so the single timing
    coordinate is not drowned by thousands of image dimensions.
    Zero-variance dimensions pass through unscaled.
    """

    mean: np.ndarray
    scale: np.ndarray

    def transform(self, X: np.ndarray) -> np.ndarray:
        return (np.asarray(X, dtype=np.float64) - self.mean) / self.scale


def fit_scaler(X: np.ndarray) -> FeatureScaler:
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] < 2:
        raise FitError("need a 2-D matrix with at least 2 rows to fit a scaler")
    mean = X.mean(axis=0)
    scale = X.std(axis=0)
    scale = np.where(scale == 0.0, 1.0, scale)
    return FeatureScaler(mean, scale)
