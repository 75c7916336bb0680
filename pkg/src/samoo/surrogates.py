"""Distance-kernel surrogate models trained on archive samples.

Gaussian radial basis interpolants approximate each objective; a
Parzen-window probabilistic classifier predicts non-domination rank
labels. Inputs are used exactly as given: callers are expected to
normalize decision vectors to the unit box first so kernel scales are
comparable across heterogeneous variable ranges. Fitted models are
immutable and safe to share across threads.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "FitError",
    "SurrogateSettings",
    "RbfModel",
    "rbf_fit",
    "rbf_predict",
    "PnnModel",
    "pnn_fit",
    "pnn_predict",
]


class FitError(RuntimeError):
    """Raised when a surrogate cannot be fitted (singular or degenerate data)."""


@dataclass(frozen=True)
class SurrogateSettings:
    """Model hyperparameters threaded through the optimizer.

    ``None`` widths select the data-driven defaults: median pairwise
    center distance for the RBF, mean nearest-neighbor distance for the
    classifier. The small ridge keeps late-run kernel matrices (built
    from tightly clustered archive points) solvable.
    """

    rbf_width: float | None = None
    rbf_regularization: float = 1e-10
    pnn_sigma: float | None = None


def _pairwise_sq_dists(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    diff = A[:, None, :] - B[None, :, :]
    return (diff * diff).sum(axis=-1)


@dataclass(frozen=True)
class RbfModel:
    """Gaussian-basis interpolant: sum_i weights[i] * exp(-(r_i / width)^2)."""

    centers: np.ndarray
    weights: np.ndarray
    width: float
    regularization: float

    @property
    def dim(self) -> int:
        return self.centers.shape[1]


def rbf_fit(X, y, width: float | None = None, regularization: float = 0.0) -> RbfModel:
    """Fit weights by solving the (ridge-regularized) kernel system.

    Centers must be pairwise distinct; duplicates make the kernel matrix
    singular by construction and raise FitError. With zero regularization
    the model interpolates the training targets.
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    y = np.asarray(y, dtype=float).ravel()
    if X.shape[0] != y.size or y.size < 1:
        raise ValueError("need equally many centers and targets, at least one")
    if regularization < 0:
        raise ValueError("regularization must be non-negative")
    sq = _pairwise_sq_dists(X, X)
    if X.shape[0] > 1:
        off_diag = sq[~np.eye(X.shape[0], dtype=bool)]
        if off_diag.min() < 1e-24:
            raise FitError("duplicate centers; deduplicate before fitting")
    if width is None:
        if X.shape[0] > 1:
            med = float(np.median(np.sqrt(off_diag)))
            width = med if med > 0 else 1.0
        else:
            width = 1.0
    elif width <= 0:
        raise ValueError("width must be positive")
    phi = np.exp(-sq / (width * width))
    system = phi + regularization * np.eye(X.shape[0])
    try:
        weights = np.linalg.solve(system, y)
    except np.linalg.LinAlgError as exc:
        raise FitError(f"kernel system is singular: {exc}") from exc
    if not np.all(np.isfinite(weights)):
        raise FitError("kernel system produced non-finite weights")
    return RbfModel(
        centers=X.copy(), weights=weights, width=float(width), regularization=float(regularization)
    )


def rbf_predict(model: RbfModel, x) -> float | np.ndarray:
    """Evaluate the interpolant at one point (D,) or a batch (n, D)."""
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    X = np.atleast_2d(x)
    if X.shape[1] != model.dim:
        raise ValueError(f"expected dimension {model.dim}, got {X.shape[1]}")
    phi = np.exp(-_pairwise_sq_dists(X, model.centers) / (model.width * model.width))
    out = phi @ model.weights
    return float(out[0]) if single else out


@dataclass(frozen=True)
class PnnModel:
    """Parzen-window class-density classifier over stored patterns."""

    patterns: np.ndarray
    labels: np.ndarray
    class_labels: np.ndarray  # distinct labels, ascending
    sigma: float

    @property
    def dim(self) -> int:
        return self.patterns.shape[1]


def pnn_fit(X, labels, sigma: float | None = None) -> PnnModel:
    """Group patterns by label; smoothing defaults to the mean nearest-neighbor distance."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    labels = np.asarray(labels).ravel()
    if X.shape[0] != labels.size or labels.size < 1:
        raise ValueError("need equally many patterns and labels, at least one")
    if sigma is None:
        if X.shape[0] > 1:
            sq = _pairwise_sq_dists(X, X)
            np.fill_diagonal(sq, np.inf)
            mean_nn = float(np.sqrt(sq.min(axis=1)).mean())
            sigma = mean_nn if mean_nn > 0 else 1.0
        else:
            sigma = 1.0
    elif sigma <= 0:
        raise ValueError("sigma must be positive")
    return PnnModel(
        patterns=X.copy(),
        labels=labels.copy(),
        class_labels=np.unique(labels),
        sigma=float(sigma),
    )


def pnn_predict(model: PnnModel, x):
    """Most likely class label for one point (D,) or a batch (n, D).

    Class densities are averaged Gaussian kernels; the shared normalization
    constant is dropped since it cancels in the argmax. Exponents are
    shifted by the per-query minimum squared distance so the nearest
    pattern always contributes exp(0), which keeps tiny sigmas exact
    (degenerating to nearest-pattern classification) instead of
    underflowing. Ties go to the smallest label.
    """
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    X = np.atleast_2d(x)
    if X.shape[1] != model.dim:
        raise ValueError(f"expected dimension {model.dim}, got {X.shape[1]}")
    sq = _pairwise_sq_dists(X, model.patterns)
    shift = sq.min(axis=1, keepdims=True)
    kernel = np.exp(-(sq - shift) / (2.0 * model.sigma * model.sigma))
    densities = np.empty((X.shape[0], model.class_labels.size))
    for k, label in enumerate(model.class_labels):
        mask = model.labels == label
        densities[:, k] = kernel[:, mask].mean(axis=1)
    best = np.argmax(densities, axis=1)  # first max wins: smallest label
    out = model.class_labels[best]
    return out[0] if single else out
