"""Distance-induced Gaussian kernels, Gram matrices, and bandwidths.

The kernel is kappa(x, y) = exp(-gamma * d(x, y)^2) for the metric at
hand.  Centered Gram matrices G = Q K Q (Q = I - n^{-1} 1 1^T) feed the
estimator; out-of-sample points enter through kernel vectors against the
training sample.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from .errors import MsirError
from .metrics import (
    MetricKind,
    Point,
    VectorPoint,
    as_metric_kind,
    cross_distances,
    pairwise_distances,
)

__all__ = [
    "KernelConfig",
    "GramPair",
    "gaussian_kernel",
    "center_gram",
    "gram_matrix",
    "kernel_vector",
    "median_heuristic_bandwidth",
    "loocv_bandwidth",
]


@dataclass(frozen=True)
class KernelConfig:
    """Gaussian kernel parameters: inverse squared length-scale and metric."""

    gamma: float
    metric: MetricKind

    def __post_init__(self):
        if not np.isfinite(self.gamma) or self.gamma <= 0.0:
            raise MsirError(f"gamma must be a positive real, got {self.gamma!r}")
        object.__setattr__(self, "metric", as_metric_kind(self.metric))


@dataclass(frozen=True)
class GramPair:
    """Raw kernel matrix K and its centered companion G = Q K Q.

    K has unit diagonal and entries in (0, 1] whenever the metric has zero
    self-distance; the symmetrized KL divergence (self-dissimilarity p/2)
    yields a constant sub-unit diagonal instead.
    """

    K: np.ndarray
    G: np.ndarray
    config: KernelConfig
    n: int


def gaussian_kernel(d, gamma: float):
    """Evaluate exp(-gamma * d^2); scalar in, scalar out (arrays pass through).

    Strictly decreasing in d, equal to 1 exactly when d = 0.
    """
    d = np.asarray(d, dtype=float)
    if not np.all(np.isfinite(d)):
        raise MsirError("distance must be finite")
    if np.any(d < 0.0):
        raise MsirError("distance must be nonnegative")
    if not np.isfinite(gamma) or gamma <= 0.0:
        raise MsirError(f"gamma must be a positive real, got {gamma!r}")
    out = np.exp(-gamma * d * d)
    return float(out) if out.ndim == 0 else out


def center_gram(k) -> np.ndarray:
    """Double-center a symmetric matrix: returns Q K Q.

    Row and column sums of the result vanish, and re-centering a centered
    matrix is a no-op (Q is idempotent).
    """
    k = np.asarray(k, dtype=float)
    if k.ndim != 2 or k.shape[0] != k.shape[1]:
        raise MsirError(f"Gram matrix must be square, got shape {k.shape}")
    row_mean = k.mean(axis=1, keepdims=True)
    col_mean = k.mean(axis=0, keepdims=True)
    return k - row_mean - col_mean + k.mean()


def gram_matrix(points: Sequence[Point], config: KernelConfig) -> GramPair:
    """Kernel Gram matrix of a sample, raw and centered.

    ``K[i, j] = exp(-gamma * d(X_i, X_j)^2)`` under the configured metric.
    """
    n = len(points)
    if n < 2:
        raise MsirError(f"need at least 2 points to form a Gram matrix, got {n}")
    d = pairwise_distances(config.metric, points)
    k = np.exp(-config.gamma * d * d)
    return GramPair(K=k, G=center_gram(k), config=config, n=n)


def kernel_vector(x: Point, training: Sequence[Point], config: KernelConfig) -> np.ndarray:
    """Kernel evaluations of one point against the training sample.

    For ``x`` equal to training point i this reproduces row i of the
    training Gram matrix exactly (same code path).
    """
    d = cross_distances(config.metric, [x], training)[0]
    return np.exp(-config.gamma * d * d)


def median_heuristic_bandwidth(points: Sequence[Point], metric) -> float:
    """gamma = 1 / (2 m^2) with m the median of all n(n-1)/2 pairwise distances."""
    n = len(points)
    if n < 2:
        raise MsirError(f"need at least 2 points, got {n}")
    d = pairwise_distances(metric, points)
    upper = d[np.triu_indices(n, k=1)]
    m = float(np.median(upper))
    if m <= 0.0:
        raise MsirError("degenerate sample: median pairwise distance is zero")
    return 1.0 / (2.0 * m * m)


def _response_kernel_matrix(points, metric_y) -> np.ndarray:
    """Gram matrix of a metric-valued response under its median-heuristic
    bandwidth; used as the prediction target for metric responses."""
    gamma_y = median_heuristic_bandwidth(points, metric_y)
    d = pairwise_distances(metric_y, points)
    return np.exp(-gamma_y * d * d)


def loocv_bandwidth(dataset, metric, grid: Sequence[float], metric_y=None) -> float:
    """Pick gamma from a grid by leave-one-out Nadaraya-Watson error.

    For each candidate, every observation is predicted from the remaining
    ones with weights exp(-gamma d^2): squared error on scalar responses,
    misclassification on categorical ones, and squared kernel-feature
    distance for metric-valued responses (an approximation; the response
    feature uses its own median-heuristic bandwidth).  Ties go to the
    smallest gamma.
    """
    grid = [float(g) for g in grid]
    if not grid:
        raise MsirError("bandwidth grid must be nonempty")
    if any(not np.isfinite(g) or g <= 0.0 for g in grid):
        raise MsirError("bandwidth grid entries must be positive reals")
    n = dataset.n
    if n < 3:
        raise MsirError(f"need at least 3 observations for LOOCV, got {n}")
    metric = as_metric_kind(metric)
    d = pairwise_distances(metric, dataset.x)
    d2 = d * d
    if float(d2.max()) <= 0.0:
        raise MsirError("degenerate sample: all pairwise distances are zero")

    if dataset.y_kind == "scalar":
        y = np.asarray(dataset.y, dtype=float)
    elif dataset.y_kind == "labels":
        y = np.asarray(dataset.y)
        classes = np.unique(y)
        onehot = (y[:, None] == classes[None, :]).astype(float)
    else:
        if metric_y is None:
            if isinstance(dataset.y[0], VectorPoint):
                metric_y = MetricKind.EUCLIDEAN
            else:
                raise MsirError("metric_y must be given for SPD-valued responses")
        ky = _response_kernel_matrix(dataset.y, as_metric_kind(metric_y))

    best_gamma, best_err = None, np.inf
    for gamma in sorted(grid):
        w = np.exp(-gamma * d2)
        np.fill_diagonal(w, 0.0)
        totals = w.sum(axis=1)
        ok = totals > 0.0
        if dataset.y_kind == "scalar":
            pred = np.empty(n)
            pred[ok] = (w @ y)[ok] / totals[ok]
            pred[~ok] = (y.sum() - y[~ok]) / (n - 1)
            err = float(np.mean((pred - y) ** 2))
        elif dataset.y_kind == "labels":
            scores = w @ onehot
            scores[~ok] = onehot.sum(axis=0)[None, :] - onehot[~ok]
            pred = classes[np.argmax(scores, axis=1)]
            err = float(np.mean(pred != y))
        else:
            wn = np.full((n, n), 1.0 / (n - 1))
            np.fill_diagonal(wn, 0.0)
            wn[ok] = w[ok] / totals[ok, None]
            # Squared feature-space residual via the kernel trick.
            term_self = np.diag(ky)
            term_cross = np.einsum("ij,ij->i", wn, ky)
            term_pair = np.einsum("ij,jk,ik->i", wn, ky, wn)
            err = float(np.mean(term_self - 2.0 * term_cross + term_pair))
        if err < best_err:
            best_gamma, best_err = gamma, err
    return float(best_gamma)
