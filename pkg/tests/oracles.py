"""Independent brute-force oracles used to pin expected values.

Each oracle recomputes a quantity from first principles through a different
route than the library takes, so agreement is meaningful. They are slow on
purpose and must stay free of pupguard internals (numpy only).
"""

import numpy as np


def otsu_brute_force(img: np.ndarray) -> tuple[int, float]:
    """Exhaustive scan of all thresholds using the explicit two-class form.

    sigma_B^2(k) = P1 P2 (m1 - m2)^2 with the class probabilities and means
    computed by direct summation; smallest maximizing k in [0, 254] wins.
    """
    counts = np.bincount(np.asarray(img).ravel(), minlength=256)
    total = counts.sum()
    p = counts / total
    best_k, best_var = 0, -1.0
    for k in range(255):
        p1 = p[: k + 1].sum()
        p2 = 1.0 - p1
        if p1 <= 0.0 or p2 <= 0.0:
            var = 0.0
        else:
            m1 = (np.arange(k + 1) * p[: k + 1]).sum() / p1
            m2 = (np.arange(k + 1, 256) * p[k + 1 :]).sum() / p2
            var = p1 * p2 * (m1 - m2) ** 2
        if var > best_var:
            best_k, best_var = k, var
    return best_k, best_var


def lbp_code_naive(patch: np.ndarray) -> int:
    """Bit-by-bit code of a 3x3 window, spelled out neighbor by neighbor."""
    p = patch[1, 1]
    neighbors = [
        patch[1, 2],  # right
        patch[2, 2],  # bottom-right
        patch[2, 1],  # bottom
        patch[2, 0],  # bottom-left
        patch[1, 0],  # left
        patch[0, 0],  # top-left
        patch[0, 1],  # top
        patch[0, 2],  # top-right
    ]
    code = 0
    for i, q in enumerate(neighbors):
        code += (1 if q >= p else 0) * 2 ** (7 - i)
    return code


def lbp_histogram_naive(img: np.ndarray) -> np.ndarray:
    """Per-pixel recomputation of every interior code, then normalize."""
    img = np.asarray(img)
    h, w = img.shape
    hist = np.zeros(256)
    for y in range(1, h - 1):
        for x in range(1, w - 1):
            hist[lbp_code_naive(img[y - 1 : y + 2, x - 1 : x + 2])] += 1
    return hist / hist.sum()


def pca_eigenvalues_dense(X: np.ndarray, k: int) -> np.ndarray:
    """Top-k eigenvalues of the full sample covariance (divisor n-1)."""
    cov = np.cov(np.asarray(X, dtype=np.float64), rowvar=False)
    eigvals = np.linalg.eigvalsh(cov)
    return np.sort(eigvals)[::-1][:k]


def lof_direct(train: np.ndarray, x: np.ndarray, k: int) -> float:
    """Textbook local-outlier-factor computation, exact-k neighbors.

    Ties broken by index, matching the library's stated convention, but the
    arithmetic is organized independently (explicit loops, no caching).
    """
    train = np.asarray(train, dtype=np.float64)
    n = len(train)

    def dist(a, b):
        return float(np.sqrt(np.sum((a - b) ** 2)))

    def neighbors_of_point(i):
        ds = [(dist(train[i], train[j]), j) for j in range(n) if j != i]
        ds.sort()
        return [j for _, j in ds[:k]]

    def k_dist(i):
        return dist(train[i], train[neighbors_of_point(i)[-1]])

    def lrd(i):
        nn = neighbors_of_point(i)
        reach = [max(k_dist(j), dist(train[i], train[j])) for j in nn]
        mean_reach = sum(reach) / k
        return 1.0 / mean_reach if mean_reach > 0 else 1e12

    ds = [(dist(x, train[j]), j) for j in range(n)]
    ds.sort()
    nn_x = [j for _, j in ds[:k]]
    reach_x = [max(k_dist(j), dist(x, train[j])) for j in nn_x]
    mean_reach_x = sum(reach_x) / k
    lrd_x = 1.0 / mean_reach_x if mean_reach_x > 0 else 1e12
    return sum(lrd(j) for j in nn_x) / k / lrd_x
