"""Image feature extraction: texture codes, gradient histograms, external
embeddings, and PCA-based selection.

All extractors return plain float64 vectors; pairing concatenates the two
per-press vectors in press order (the acquisition protocol makes the order
meaningful, so the encoding must not be symmetric).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Mapping

import numpy as np

from . import kernels
from .dataset import GrayImage, PressPair
from .errors import EmbeddingError
from .preprocess import _pixels

HOG_BLOCK_EPS = 1e-5

# clockwise from the right neighbor, as (dy, dx)
LBP_NEIGHBOR_OFFSETS = (
    (0, 1),
    (1, 1),
    (1, 0),
    (1, -1),
    (0, -1),
    (-1, -1),
    (-1, 0),
    (-1, 1),
)


def lbp_code(patch: np.ndarray) -> int:
    """Binary code of the center pixel of a full 3x3 window.

    Bit 0 (most significant) is the right neighbor, following clockwise;
    a neighbor >= center contributes 1.
    """
    patch = np.asarray(patch)
    if patch.shape != (3, 3):
        raise ValueError("lbp_code expects a 3x3 patch")
    center = patch[1, 1]
    code = 0
    for bit, (dy, dx) in enumerate(LBP_NEIGHBOR_OFFSETS):
        if patch[1 + dy, 1 + dx] >= center:
            code |= 1 << (7 - bit)
    return code


def lbp_histogram(img: GrayImage | np.ndarray, grid: int = 1) -> np.ndarray:
    """L1-normalized histogram of the codes of all interior pixels.

    With ``grid`` > 1 the interior is partitioned into grid x grid regions
    and one normalized 256-bin histogram per region is concatenated.
    """
    px = _pixels(img)
    if px.shape[0] < 3 or px.shape[1] < 3:
        raise ValueError("image must be at least 3x3 for texture codes")
    codes = kernels.lbp_code_image(px)
    if grid <= 1:
        counts = np.bincount(codes.ravel(), minlength=256)
        return counts / counts.sum()
    h, w = codes.shape
    rows = np.minimum(np.arange(h) * grid // h, grid - 1)
    cols = np.minimum(np.arange(w) * grid // w, grid - 1)
    region = rows[:, None] * grid + cols[None, :]
    out = np.zeros(grid * grid * 256, dtype=np.float64)
    for r in range(grid * grid):
        counts = np.bincount(codes[region == r].ravel(), minlength=256)
        total = counts.sum()
        if total > 0:
            out[r * 256 : (r + 1) * 256] = counts / total
    return out


@dataclass(frozen=True)
class GradientField:
    """Sobel gradients with magnitudes and unsigned orientations."""

    gx: np.ndarray
    gy: np.ndarray
    magnitude: np.ndarray
    orientation: np.ndarray  # degrees in [0, 180)


def gradient_field(img: GrayImage | np.ndarray) -> GradientField:
    """Sobel gradients with edge replication so every pixel contributes."""
    px = _pixels(img).astype(np.float64)
    p = np.pad(px, 1, mode="edge")
    gx = (
        p[:-2, 2:] + 2.0 * p[1:-1, 2:] + p[2:, 2:]
        - p[:-2, :-2] - 2.0 * p[1:-1, :-2] - p[2:, :-2]
    )
    gy = (
        p[2:, :-2] + 2.0 * p[2:, 1:-1] + p[2:, 2:]
        - p[:-2, :-2] - 2.0 * p[:-2, 1:-1] - p[:-2, 2:]
    )
    magnitude = np.sqrt(gx * gx + gy * gy)
    orientation = np.degrees(np.arctan2(gy, gx)) % 180.0
    return GradientField(gx, gy, magnitude, orientation)


def hog_descriptor(
    img: GrayImage | np.ndarray,
    cell: int = 8,
    block: int = 2,
    stride: int = 1,
    bins: int = 9,
) -> np.ndarray:
    """Histogram-of-oriented-gradients descriptor.

    Per-cell histograms of orientation (unsigned, [0, 180)) weighted by
    gradient magnitude with linear interpolation between neighboring bins;
    blocks of ``block`` x ``block`` cells at ``stride``-cell steps, each
    L2-normalized, concatenated in row-major block order.
    """
    px = _pixels(img)
    h, w = px.shape
    if h % cell or w % cell:
        raise ValueError(f"image {h}x{w} not divisible by cell size {cell}")
    grad = gradient_field(px)
    hist = kernels.hog_cell_histograms(grad.magnitude, grad.orientation, cell, bins)
    cy, cx, _ = hist.shape
    if cy < block or cx < block:
        raise ValueError("image too small for the requested block size")
    blocks = []
    for by in range(0, cy - block + 1, stride):
        for bx in range(0, cx - block + 1, stride):
            v = hist[by : by + block, bx : bx + block].ravel()
            blocks.append(v / np.sqrt(v @ v + HOG_BLOCK_EPS**2))
    return np.concatenate(blocks)


def hog_length(size: int, cell: int = 8, block: int = 2, stride: int = 1, bins: int = 9) -> int:
    n_cells = size // cell
    n_blocks = (n_cells - block) // stride + 1
    return n_blocks * n_blocks * block * block * bins


# ---------------------------------------------------------------------------
# External embeddings


@dataclass(frozen=True)
class EmbeddingTable:
    """Precomputed per-image feature vectors keyed by image id."""

    dim: int
    vectors: Mapping[str, np.ndarray]

    def lookup(self, image_id: str) -> np.ndarray:
        try:
            return self.vectors[image_id]
        except KeyError:
            raise EmbeddingError(f"no embedding for image {image_id!r}") from None


def load_embeddings(path: str) -> EmbeddingTable:
    """Parse the embedding text format.

    First line ``#dim=<d>``, then one ``<image_id>,v1,...,vd`` line per image
    (image_id = image filename without extension). Ragged rows, duplicate
    ids and non-numeric fields raise with the 1-based line number.
    """
    vectors: dict[str, np.ndarray] = {}
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().rstrip("\n")
        if not header.startswith("#dim="):
            raise EmbeddingError(f"{path}: first line must be '#dim=<d>'", line=1)
        try:
            dim = int(header[5:])
        except ValueError:
            raise EmbeddingError(f"{path}: bad dimension {header[5:]!r}", line=1) from None
        if dim <= 0:
            raise EmbeddingError(f"{path}: dimension must be positive", line=1)
        for line_no, line in enumerate(fh, start=2):
            line = line.strip()
            if not line:
                continue
            parts = line.split(",")
            image_id = parts[0]
            if image_id in vectors:
                raise EmbeddingError(
                    f"{path}: line {line_no}: duplicate id {image_id!r}", line=line_no
                )
            if len(parts) - 1 != dim:
                raise EmbeddingError(
                    f"{path}: line {line_no}: {len(parts) - 1} values, expected {dim}",
                    line=line_no,
                )
            try:
                vec = np.array([float(v) for v in parts[1:]], dtype=np.float64)
            except ValueError:
                raise EmbeddingError(
                    f"{path}: line {line_no}: non-numeric value", line=line_no
                ) from None
            vectors[image_id] = vec
    return EmbeddingTable(dim, vectors)


# ---------------------------------------------------------------------------
# PCA feature selection


@dataclass(frozen=True)
class PcaModel:
    """Top-k principal directions of the training features.

    ``components`` holds the directions as rows (k, d), variance-ordered;
    each row's largest-magnitude entry is made positive so the decomposition
    is reproducible across eigensolvers.
    """

    mean: np.ndarray
    components: np.ndarray
    explained_variance: np.ndarray
    rank_deficient: bool = False


def pca_fit(X: np.ndarray, k: int) -> PcaModel:
    """Eigendecompose the mean-centered covariance and keep the top k axes.

    The symmetric eigenproblem is solved on whichever of the covariance
    (d x d) or Gram (n x n) matrix is smaller. Variances use the sample
    convention (divisor n - 1). Rank deficiency below k yields trailing
    zero variances and sets ``rank_deficient``.
    """
    X = np.asarray(X, dtype=np.float64)
    n, d = X.shape
    if n < 2:
        raise ValueError("need at least 2 samples")
    if not 1 <= k <= min(n - 1, d):
        raise ValueError(f"k={k} outside [1, min(n-1, d)] = [1, {min(n - 1, d)}]")
    mean = X.mean(axis=0)
    Xc = X - mean
    if d <= n:
        cov = (Xc.T @ Xc) / (n - 1)
        eigvals, eigvecs = np.linalg.eigh(cov)
        order = np.argsort(eigvals)[::-1][:k]
        variances = eigvals[order]
        components = eigvecs[:, order].T
    else:
        gram = Xc @ Xc.T
        eigvals, eigvecs = np.linalg.eigh(gram)
        order = np.argsort(eigvals)[::-1][:k]
        scale = np.max(np.abs(eigvals)) if eigvals.size else 0.0
        components = np.zeros((k, d))
        variances = np.zeros(k)
        for row, idx in enumerate(order):
            sigma = eigvals[idx]
            if sigma > max(scale, 1.0) * 1e-12:
                components[row] = (Xc.T @ eigvecs[:, idx]) / np.sqrt(sigma)
                variances[row] = sigma / (n - 1)
            else:
                components[row] = _complete_direction(components[:row], d)
    cutoff = max(float(variances[0]), 0.0) * 1e-12 if k else 0.0
    rank_deficient = bool(np.any(variances <= cutoff))
    variances = np.where(variances <= cutoff, 0.0, variances)
    # reproducible sign: largest-magnitude entry of each direction positive
    flips = np.sign(components[np.arange(k), np.argmax(np.abs(components), axis=1)])
    flips[flips == 0] = 1.0
    components = components * flips[:, None]
    return PcaModel(mean, components, variances, rank_deficient)


def _complete_direction(existing: np.ndarray, d: int) -> np.ndarray:
    """First standard-basis vector made orthonormal to the given rows."""
    for j in range(d):
        v = np.zeros(d)
        v[j] = 1.0
        if len(existing):
            v -= existing.T @ (existing @ v)
        norm = np.linalg.norm(v)
        if norm > 0.5:
            return v / norm
    raise RuntimeError("orthonormal completion failed")  # pragma: no cover


def pca_transform(model: PcaModel, x: np.ndarray) -> np.ndarray:
    """Project onto the principal directions: components @ (x - mean)."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape[-1] != model.mean.shape[0]:
        raise ValueError(
            f"dimension mismatch: {x.shape[-1]} vs model {model.mean.shape[0]}"
        )
    return (x - model.mean) @ model.components.T


def pca_inverse_transform(model: PcaModel, z: np.ndarray) -> np.ndarray:
    return np.asarray(z, dtype=np.float64) @ model.components + model.mean


# ---------------------------------------------------------------------------
# Per-pair feature assembly


def image_features(
    img: GrayImage,
    extractor: str,
    embeddings: EmbeddingTable | None = None,
    lbp_grid: int = 1,
    preprocess: Callable[[GrayImage], GrayImage] | None = None,
) -> np.ndarray:
    if extractor == "embedding":
        if embeddings is None:
            raise ValueError("embedding extractor requires an EmbeddingTable")
        if img.source_id is None:
            raise EmbeddingError("image has no id to match against embeddings")
        return embeddings.lookup(img.source_id)
    if preprocess is not None:
        img = preprocess(img)
    if extractor == "lbp":
        return lbp_histogram(img, grid=lbp_grid)
    if extractor == "hog":
        return hog_descriptor(img)
    raise ValueError(f"unknown extractor {extractor!r}")


def pair_features(
    pair: PressPair,
    extractor: str = "lbp",
    pca: PcaModel | None = None,
    embeddings: EmbeddingTable | None = None,
    lbp_grid: int = 1,
    preprocess: Callable[[GrayImage], GrayImage] | None = None,
) -> np.ndarray:
    """Per-image vectors concatenated in press order, optionally PCA-reduced.

    The PCA model, when given, must have been fitted on training pair
    vectors of the same extractor.
    """
    v1 = image_features(pair.first, extractor, embeddings, lbp_grid, preprocess)
    v2 = image_features(pair.second, extractor, embeddings, lbp_grid, preprocess)
    vec = np.concatenate([v1, v2])
    if pca is not None:
        vec = pca_transform(pca, vec)
    return vec
