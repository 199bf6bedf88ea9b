"""Isolation forest built from scratch on seeded random binary trees.

Anomalies isolate in few random splits, so their expected path length from
the root is short; scores are normalized by the average unsuccessful-search
path length c(n) of a binary search tree, giving s(x) = 2^(-E[h(x)]/c(psi))
in (0, 1) with higher = more isolated.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from math import ceil, log2

import numpy as np

from ..errors import FitError

DEFAULT_TREES = 100
DEFAULT_PSI = 256


@lru_cache(maxsize=None)
def average_path_length(n: int) -> float:
    """c(n) = 2 H(n-1) - 2 (n-1)/n with exact harmonic numbers; c(1) = 0."""
    if n <= 1:
        return 0.0
    harmonic = float(np.sum(1.0 / np.arange(1, n)))
    return 2.0 * harmonic - 2.0 * (n - 1) / n


@dataclass(frozen=True)
class IsoForestModel:
    trees: tuple[dict, ...]
    psi: int
    n_train: int
    seed: int
    dim: int
    threshold: float = 0.5

    def decision_margin(self, x: np.ndarray) -> float:
        """Normality margin: >= 0 means normal."""
        return self.threshold - iforest_score(self, x)


def _build_tree(X: np.ndarray, idx: np.ndarray, depth: int, cap: int, rng) -> dict:
    if len(idx) <= 1 or depth >= cap:
        return {"size": int(len(idx))}
    d = X.shape[1]
    for _ in range(d):
        dim = int(rng.integers(0, d))
        col = X[idx, dim]
        lo, hi = float(col.min()), float(col.max())
        if hi > lo:
            break
    else:
        return {"size": int(len(idx))}  # no separating split exists
    split = float(rng.uniform(lo, hi))
    mask = X[idx, dim] < split
    return {
        "dim": dim,
        "split": split,
        "left": _build_tree(X, idx[mask], depth + 1, cap, rng),
        "right": _build_tree(X, idx[~mask], depth + 1, cap, rng),
    }


def iforest_fit(
    X: np.ndarray,
    trees: int = DEFAULT_TREES,
    psi: int | None = None,
    seed: int = 0,
    threshold: float = 0.5,
) -> IsoForestModel:
    """Build ``trees`` isolation trees, each on a fresh seeded subsample.

    Every node splits a uniformly random dimension at a uniform point
    between the subsample's min and max; zero-range dimensions are resampled
    up to d times before the node becomes a leaf. Recursion stops at depth
    ceil(log2 psi) or at single-point nodes.
    """
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] < 2:
        raise FitError("need at least 2 training samples")
    n = X.shape[0]
    if psi is None:
        psi = min(DEFAULT_PSI, n)
    psi = min(psi, n)
    cap = ceil(log2(psi)) if psi > 1 else 0
    forest = []
    for child in np.random.SeedSequence(seed).spawn(trees):
        rng = np.random.default_rng(child)
        sub = rng.choice(n, size=psi, replace=False)
        forest.append(_build_tree(X, sub, 0, cap, rng))
    return IsoForestModel(
        trees=tuple(forest), psi=psi, n_train=n, seed=seed, dim=X.shape[1],
        threshold=threshold,
    )


def _path_length(tree: dict, x: np.ndarray) -> float:
    depth = 0
    node = tree
    while "dim" in node:
        node = node["left"] if x[node["dim"]] < node["split"] else node["right"]
        depth += 1
    return depth + average_path_length(node["size"])


def iforest_score(model: IsoForestModel, x: np.ndarray) -> float:
    """Anomaly score in (0, 1); normal iff <= the model threshold."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape[0] != model.dim:
        raise ValueError(f"dimension mismatch: {x.shape[0]} vs model {model.dim}")
    mean_path = float(np.mean([_path_length(t, x) for t in model.trees]))
    return 2.0 ** (-mean_path / average_path_length(model.psi))
