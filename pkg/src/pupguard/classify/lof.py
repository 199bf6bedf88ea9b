"""Local outlier factor in novelty mode.

Density around a query is compared against the density around its training
neighbors; a ratio near 1 means the query sits in territory as dense as its
neighborhood, while values well above 1 flag it as isolated. Test points are
never inserted into the reference set. Reachability distances (the max of
the neighbor's k-distance and the true distance) smooth the density
estimate for points deep inside clusters.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import FitError

DEFAULT_K = 20
DEFAULT_THRESHOLD = 1.5
LRD_CAP = 1e12  # lrd of a point whose neighbors all coincide with it


@dataclass(frozen=True)
class LofModel:
    train_points: np.ndarray  # (n, d)
    k: int
    k_distances: np.ndarray  # (n,)
    neighbors: np.ndarray  # (n, k) indices, distance then index order
    lrd: np.ndarray  # (n,) local reachability density per training point
    threshold: float

    def decision_margin(self, x: np.ndarray) -> float:
        """Normality margin: >= 0 means normal."""
        return self.threshold - lof_score(self, x)


def _nearest(dists: np.ndarray, k: int) -> np.ndarray:
    """Indices of the k smallest entries; ties broken by index."""
    order = np.lexsort((np.arange(dists.shape[0]), dists))
    return order[:k]


def lof_fit(
    X: np.ndarray, k: int | None = None, threshold: float = DEFAULT_THRESHOLD
) -> LofModel:
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] < 2:
        raise FitError("need at least 2 training samples")
    n = X.shape[0]
    if k is None:
        k = min(DEFAULT_K, n - 1)
    if not 1 <= k <= n - 1:
        raise ValueError(f"k={k} outside [1, {n - 1}]")
    if threshold <= 0:
        raise ValueError("threshold must be positive")
    sq = np.sum(X * X, axis=1)
    D = np.sqrt(np.maximum(sq[:, None] + sq[None, :] - 2.0 * (X @ X.T), 0.0))
    np.fill_diagonal(D, np.inf)  # a training point is not its own neighbor
    neighbors = np.empty((n, k), dtype=np.int64)
    for i in range(n):
        neighbors[i] = _nearest(D[i], k)
    k_distances = D[np.arange(n), neighbors[:, -1]]
    # local reachability density of every training point
    lrd = np.empty(n)
    for i in range(n):
        reach = np.maximum(k_distances[neighbors[i]], D[i, neighbors[i]])
        mean_reach = reach.mean()
        lrd[i] = 1.0 / mean_reach if mean_reach > 0.0 else LRD_CAP
    return LofModel(X.copy(), k, k_distances, neighbors, lrd, threshold)


def lof_score(model: LofModel, x: np.ndarray) -> float:
    """Ratio of the neighbors' density to the query's; normal iff <= threshold."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape[0] != model.train_points.shape[1]:
        raise ValueError(
            f"dimension mismatch: {x.shape[0]} vs model "
            f"{model.train_points.shape[1]}"
        )
    diff = model.train_points - x
    dists = np.sqrt(np.sum(diff * diff, axis=1))
    nn = _nearest(dists, model.k)
    reach = np.maximum(model.k_distances[nn], dists[nn])
    mean_reach = reach.mean()
    lrd_x = 1.0 / mean_reach if mean_reach > 0.0 else LRD_CAP
    return float(model.lrd[nn].mean() / lrd_x)
