"""One-class SVM with an RBF kernel, solved by pairwise coordinate descent.

The dual being solved (after rescaling the usual 1/(nu*n) box):

    minimize   0.5 * a' K a
    subject to 0 <= a_i <= 1/(nu*n),  sum(a) = 1

Each step picks the maximal-KKT-violating pair (the index free to increase
with the smallest gradient and the index free to decrease with the largest)
and solves the two-variable subproblem analytically. The selection rule is
deterministic, so the fit is reproducible. nu upper-bounds the fraction of
training margin errors and lower-bounds the support-vector fraction.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ConvergenceError, FitError


def rbf_kernel(A: np.ndarray, B: np.ndarray, gamma: float) -> np.ndarray:
    """exp(-gamma * ||a - b||^2) for all row pairs."""
    A = np.atleast_2d(np.asarray(A, dtype=np.float64))
    B = np.atleast_2d(np.asarray(B, dtype=np.float64))
    sq = (
        np.sum(A * A, axis=1)[:, None]
        + np.sum(B * B, axis=1)[None, :]
        - 2.0 * (A @ B.T)
    )
    return np.exp(-gamma * np.maximum(sq, 0.0))


def auto_gamma(X: np.ndarray) -> float:
    """1 / (d * mean per-dimension variance); 1.0 on zero-variance data."""
    X = np.asarray(X, dtype=np.float64)
    mean_var = float(X.var(axis=0).mean())
    d = X.shape[1]
    if mean_var <= 0.0:
        return 1.0
    return 1.0 / (d * mean_var)


@dataclass(frozen=True)
class OcSvmModel:
    support_vectors: np.ndarray  # (m, d)
    alphas: np.ndarray  # (m,), each in (0, 1/(nu*n)]
    support_indices: np.ndarray  # positions in the training set
    rho: float
    gamma: float
    nu: float
    n_train: int
    kkt_residual: float  # max violation at the returned solution

    def decision_function(self, X: np.ndarray) -> np.ndarray:
        K = rbf_kernel(np.atleast_2d(X), self.support_vectors, self.gamma)
        return K @ self.alphas - self.rho

    def decision_margin(self, x: np.ndarray) -> float:
        """Normality margin: >= 0 means normal."""
        return float(self.decision_function(x)[0])


def ocsvm_fit(
    X: np.ndarray,
    nu: float = 0.1,
    gamma: float | str = "auto",
    tol: float = 1e-6,
    max_iter: int | None = None,
) -> OcSvmModel:
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] < 2:
        raise FitError("need at least 2 training samples")
    if not np.all(np.isfinite(X)):
        raise FitError("training data contains non-finite values")
    if not 0.0 < nu <= 1.0:
        raise ValueError(f"nu={nu} outside (0, 1]")
    n = X.shape[0]
    if gamma == "auto":
        gamma = auto_gamma(X)
    gamma = float(gamma)
    if gamma <= 0.0:
        raise ValueError("gamma must be positive")
    if max_iter is None:
        max_iter = 10_000 * n
    C = 1.0 / (nu * n)

    K = rbf_kernel(X, X, gamma)
    alpha = np.zeros(n)
    n_at_bound = int(np.floor(nu * n))
    alpha[:n_at_bound] = C
    if n_at_bound < n:
        alpha[n_at_bound] = 1.0 - n_at_bound * C
    grad = K @ alpha

    bound_eps = C * 1e-12
    residual = np.inf
    for _ in range(max_iter):
        can_up = alpha < C - bound_eps
        can_down = alpha > bound_eps
        gi = np.where(can_up, grad, np.inf)
        gj = np.where(can_down, grad, -np.inf)
        i = int(np.argmin(gi))
        j = int(np.argmax(gj))
        residual = grad[j] - grad[i]
        if residual <= tol:
            break
        eta = K[i, i] + K[j, j] - 2.0 * K[i, j]
        if eta <= 0.0:
            eta = 1e-12
        step = min(residual / eta, C - alpha[i], alpha[j])
        alpha[i] += step
        alpha[j] -= step
        grad += step * (K[:, i] - K[:, j])
    else:
        raise ConvergenceError(
            f"pairwise optimization did not reach tol={tol} in {max_iter} steps",
            residual=float(residual),
        )

    free = (alpha > bound_eps) & (alpha < C - bound_eps)
    if np.any(free):
        # the optimal rho equals every free gradient up to the convergence
        # residual; take the lower edge so free support vectors land on the
        # normal side and only bound-constrained points can score negative
        rho = float(grad[free].min())
    else:
        lo = grad[alpha >= C - bound_eps]
        hi = grad[alpha <= bound_eps]
        if lo.size and hi.size:
            rho = float((lo.max() + hi.min()) / 2.0)
        elif lo.size:
            rho = float(lo.max())
        else:
            rho = float(hi.min())

    sv = alpha > 0.0
    return OcSvmModel(
        support_vectors=X[sv].copy(),
        alphas=alpha[sv].copy(),
        support_indices=np.nonzero(sv)[0],
        rho=rho,
        gamma=gamma,
        nu=nu,
        n_train=n,
        kkt_residual=float(max(residual, 0.0)),
    )


def ocsvm_score(model: OcSvmModel, x: np.ndarray) -> float:
    """Decision value f(x); normal iff >= 0."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim == 1 and x.shape[0] != model.support_vectors.shape[1]:
        raise ValueError(
            f"dimension mismatch: {x.shape[0]} vs model "
            f"{model.support_vectors.shape[1]}"
        )
    return float(model.decision_function(x)[0])


@dataclass(frozen=True)
class KktReport:
    """Validation of a returned dual solution, without re-solving."""

    feasible: bool
    stationarity_residual: float
    sum_alpha: float
    box_violation: float
    rho_low: float
    rho_high: float

    @property
    def ok(self) -> bool:
        return self.feasible and self.stationarity_residual <= self.residual_limit

    residual_limit: float = 1e-5


def check_kkt(model: OcSvmModel, X_train: np.ndarray, tol: float = 1e-6) -> KktReport:
    """Verify dual feasibility and stationarity of a fitted model.

    Recomputes the kernel and gradient from scratch; the stationarity
    residual is the gap between the most and least profitable directions and
    must be <= 10*tol at a solution the solver reports as converged.
    """
    X_train = np.asarray(X_train, dtype=np.float64)
    n = X_train.shape[0]
    if n != model.n_train:
        raise ValueError("training set size does not match the model")
    C = 1.0 / (model.nu * n)
    alpha = np.zeros(n)
    alpha[model.support_indices] = model.alphas
    box_violation = float(
        max(np.max(-alpha, initial=0.0), np.max(alpha - C, initial=0.0), 0.0)
    )
    sum_alpha = float(alpha.sum())
    K = rbf_kernel(X_train, X_train, model.gamma)
    grad = K @ alpha
    bound_eps = C * 1e-9
    can_up = alpha < C - bound_eps
    can_down = alpha > bound_eps
    residual = float(
        np.max(grad[can_down], initial=-np.inf) - np.min(grad[can_up], initial=np.inf)
    )
    residual = max(residual, 0.0)
    # rho must sit between the gradients of the two bound groups
    lo = float(np.max(grad[alpha >= C - bound_eps], initial=-np.inf))
    hi = float(np.min(grad[alpha <= bound_eps], initial=np.inf))
    feasible = (
        box_violation <= C * 1e-7
        and abs(sum_alpha - 1.0) <= 1e-9
        and lo - 10 * tol <= model.rho <= hi + 10 * tol
    )
    return KktReport(
        feasible=feasible,
        stationarity_residual=residual,
        sum_alpha=sum_alpha,
        box_violation=box_violation,
        rho_low=lo,
        rho_high=hi,
        residual_limit=10 * tol,
    )
