"""Quality indicators: exact hypervolume (2 and 3 objectives), a Monte
Carlo hypervolume estimator usable as an independent cross-check, single
point hypervolume improvement, and inverted generational distance.

All functions are pure; the Monte Carlo estimator takes an explicit
seeded generator.
"""

from __future__ import annotations

import numpy as np

__all__ = [
    "UnsupportedDimension",
    "hypervolume",
    "mc_hypervolume",
    "hv_improvement",
    "igd",
    "adaptive_reference",
]


class UnsupportedDimension(ValueError):
    """Exact hypervolume is only implemented for 2 and 3 objectives."""


def _inside(front: np.ndarray, ref: np.ndarray) -> np.ndarray:
    """Drop points with any coordinate at or beyond the reference point."""
    if front.size == 0:
        return front.reshape(0, ref.size)
    return front[(front < ref).all(axis=1)]


def _staircase_2d(points: np.ndarray, ref: np.ndarray) -> float:
    """Swept area of the union of boxes [point, ref] for minimization."""
    if points.shape[0] == 0:
        return 0.0
    order = np.lexsort((points[:, 1], points[:, 0]))
    pts = points[order]
    area = 0.0
    best_f2 = ref[1]
    for f1, f2 in pts:
        if f2 < best_f2:
            area += (ref[0] - f1) * (best_f2 - f2)
            best_f2 = f2
    return float(area)


def _sliced_3d(points: np.ndarray, ref: np.ndarray) -> float:
    """Volume by slicing on the third objective; each slab is a 2-D sweep."""
    if points.shape[0] == 0:
        return 0.0
    levels = np.unique(points[:, 2])
    volume = 0.0
    for k, z in enumerate(levels):
        top = levels[k + 1] if k + 1 < levels.size else ref[2]
        active = points[points[:, 2] <= z]
        volume += _staircase_2d(active[:, :2], ref[:2]) * (top - z)
    return float(volume)


def hypervolume(front, ref) -> float:
    """Exact Lebesgue measure dominated by the front and bounded by ref.

    Points not strictly inside the reference box contribute nothing and
    are discarded. Deterministic; raises UnsupportedDimension for more
    than three objectives.
    """
    ref = np.asarray(ref, dtype=float).ravel()
    front = np.asarray(front, dtype=float).reshape(-1, ref.size)
    if ref.size == 2:
        return _staircase_2d(_inside(front, ref), ref)
    if ref.size == 3:
        return _sliced_3d(_inside(front, ref), ref)
    raise UnsupportedDimension(f"exact hypervolume supports 2 or 3 objectives, got {ref.size}")


def mc_hypervolume(front, ref, n_samples: int, rng: np.random.Generator) -> tuple[float, float]:
    """Monte Carlo hypervolume estimate and its standard error.

    Uniform samples are drawn in the box spanned by the componentwise
    minimum of the front and the reference point; the dominated fraction
    scales the box volume. Any number of objectives.
    """
    ref = np.asarray(ref, dtype=float).ravel()
    front = _inside(np.asarray(front, dtype=float).reshape(-1, ref.size), ref)
    if front.shape[0] == 0:
        return 0.0, 0.0
    low = front.min(axis=0)
    box = np.prod(ref - low)
    if box <= 0:
        return 0.0, 0.0
    samples = low + rng.random((n_samples, ref.size)) * (ref - low)
    dominated = (front[None, :, :] <= samples[:, None, :]).all(axis=-1).any(axis=1)
    p = dominated.mean()
    stderr = float(box * np.sqrt(p * (1.0 - p) / n_samples))
    return float(box * p), stderr


def hv_improvement(existing_front, candidate, ref) -> float:
    """Hypervolume gained by adding one candidate to an existing front.

    Zero iff the candidate is weakly dominated by the front or lies
    outside the reference box.
    """
    ref = np.asarray(ref, dtype=float).ravel()
    existing = np.asarray(existing_front, dtype=float).reshape(-1, ref.size)
    if existing.shape[0] == 0:
        raise ValueError("existing front must be non-empty")
    candidate = np.asarray(candidate, dtype=float).ravel()
    base = hypervolume(existing, ref)
    return hypervolume(np.vstack([existing, candidate]), ref) - base


def igd(reference_front, solutions) -> float:
    """Mean distance from each reference point to its nearest solution."""
    reference = np.atleast_2d(np.asarray(reference_front, dtype=float))
    sols = np.atleast_2d(np.asarray(solutions, dtype=float))
    if sols.shape[0] == 0 or sols.size == 0:
        raise ValueError("solutions must be non-empty")
    diff = reference[:, None, :] - sols[None, :, :]
    dists = np.sqrt((diff * diff).sum(axis=-1))
    return float(dists.min(axis=1).mean())


def adaptive_reference(objectives, scale: float = 1.1, shift: float = 0.1) -> np.ndarray:
    """Reference point just beyond the componentwise worst of the given points.

    Positive coordinates are scaled outward; non-positive ones are shifted,
    so the point stays dominated-by-all in either sign regime.
    """
    F = np.atleast_2d(np.asarray(objectives, dtype=float))
    worst = F.max(axis=0)
    return np.where(worst > 0, worst * scale, worst + shift)
