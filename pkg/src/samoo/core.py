"""Evolutionary machinery shared by every search strategy.

Pareto dominance, non-dominated sorting, crowding distance, survivor
selection, Latin hypercube sampling, and the variation operators.
Everything here is a pure function of its inputs plus an explicitly
passed ``numpy.random.Generator``; there is no module-level state.
Minimization is assumed throughout.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "DUPLICATE_TOL",
    "Bounds",
    "EvaluatedSample",
    "Archive",
    "RankedPopulation",
    "dominates",
    "nondominated_sort",
    "crowding_distance",
    "rank_population",
    "environmental_selection",
    "latin_hypercube_sample",
    "sbx_crossover",
    "sbx_crossover_batch",
    "polynomial_mutation",
    "polynomial_mutation_batch",
    "differential_mutation",
]

# Two decision vectors closer than this (Euclidean, raw units) count as the
# same sample; the evaluation budget is never spent on a known point.
DUPLICATE_TOL = 1e-12


@dataclass(frozen=True)
class Bounds:
    """Axis-aligned box constraints on the decision space."""

    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        lower = np.atleast_1d(np.asarray(self.lower, dtype=float))
        upper = np.atleast_1d(np.asarray(self.upper, dtype=float))
        if lower.ndim != 1 or upper.ndim != 1 or lower.shape != upper.shape:
            raise ValueError("lower and upper must be 1-D arrays of equal length")
        if lower.size < 1:
            raise ValueError("bounds need at least one dimension")
        if not np.all(lower < upper):
            raise ValueError("every lower bound must be strictly below its upper bound")
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)

    @classmethod
    def unit(cls, dim: int) -> "Bounds":
        return cls(np.zeros(dim), np.ones(dim))

    @classmethod
    def uniform(cls, dim: int, low: float, high: float) -> "Bounds":
        return cls(np.full(dim, float(low)), np.full(dim, float(high)))

    @property
    def dim(self) -> int:
        return self.lower.size

    @property
    def width(self) -> np.ndarray:
        return self.upper - self.lower

    def clip(self, x: np.ndarray) -> np.ndarray:
        return np.clip(x, self.lower, self.upper)

    def normalize(self, x: np.ndarray) -> np.ndarray:
        """Map points from the box to the unit cube."""
        return (np.asarray(x, dtype=float) - self.lower) / self.width

    def denormalize(self, u: np.ndarray) -> np.ndarray:
        return self.lower + np.asarray(u, dtype=float) * self.width

    def contains(self, x: np.ndarray, tol: float = 0.0) -> bool:
        x = np.asarray(x, dtype=float)
        return bool(np.all(x >= self.lower - tol) and np.all(x <= self.upper + tol))


@dataclass(frozen=True)
class EvaluatedSample:
    """A decision vector paired with its truly evaluated objectives."""

    x: np.ndarray
    f: np.ndarray
    fe_index: int


class Archive:
    """Ordered record of every real function evaluation.

    The archive is the single source of surrogate training data and of
    budget accounting: its length equals the number of evaluations spent.
    Near-duplicate decision vectors (closer than ``DUPLICATE_TOL``) are
    rejected so no evaluation is ever repeated.
    """

    def __init__(self):
        self._samples: list[EvaluatedSample] = []

    def __len__(self) -> int:
        return len(self._samples)

    def __iter__(self):
        return iter(self._samples)

    @property
    def samples(self) -> list[EvaluatedSample]:
        return list(self._samples)

    @property
    def X(self) -> np.ndarray:
        """Decision vectors as an (n, D) array in insertion order."""
        return np.array([s.x for s in self._samples], dtype=float)

    @property
    def F(self) -> np.ndarray:
        """Objective vectors as an (n, M) array in insertion order."""
        return np.array([s.f for s in self._samples], dtype=float)

    def add(self, x: np.ndarray, f: np.ndarray) -> EvaluatedSample:
        x = np.asarray(x, dtype=float).copy()
        f = np.asarray(f, dtype=float).copy()
        if self._samples:
            if x.shape != self._samples[0].x.shape:
                raise ValueError("decision vector length differs from archive")
            if f.shape != self._samples[0].f.shape:
                raise ValueError("objective vector length differs from archive")
            if self.min_distance(x) < DUPLICATE_TOL:
                raise ValueError("duplicate decision vector rejected by archive")
        sample = EvaluatedSample(x=x, f=f, fe_index=len(self._samples) + 1)
        self._samples.append(sample)
        return sample

    def min_distance(self, x: np.ndarray) -> float:
        """Euclidean distance from x to the nearest archived decision vector."""
        if not self._samples:
            raise ValueError("archive is empty")
        diff = self.X - np.asarray(x, dtype=float)
        return float(np.sqrt((diff * diff).sum(axis=1)).min())

    def is_duplicate(self, x: np.ndarray) -> bool:
        return self.min_distance(x) < DUPLICATE_TOL

    def front_indices(self) -> list[int]:
        """Indices of the archive's non-dominated samples."""
        return nondominated_sort(self.F)[0]


def dominates(a: np.ndarray, b: np.ndarray) -> bool:
    """True iff a is no worse than b everywhere and strictly better somewhere."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape or a.ndim != 1:
        raise ValueError("objective vectors must be 1-D and of equal length")
    return bool(np.all(a <= b) and np.any(a < b))


def _domination_matrix(F: np.ndarray) -> np.ndarray:
    """dom[i, j] is True iff row i dominates row j."""
    le = (F[:, None, :] <= F[None, :, :]).all(axis=-1)
    lt = (F[:, None, :] < F[None, :, :]).any(axis=-1)
    return le & lt


def nondominated_sort(objectives) -> list[list[int]]:
    """Partition points into successive non-dominated fronts.

    Returns index lists, best front first, preserving input order within
    each front. Every index appears in exactly one front.
    """
    F = np.asarray(objectives, dtype=float)
    if F.ndim != 2 or F.shape[0] == 0:
        raise ValueError("objectives must be a non-empty (n, M) array")
    dom = _domination_matrix(F)
    n_dominators = dom.sum(axis=0).astype(int)
    fronts: list[list[int]] = []
    remaining = np.ones(F.shape[0], dtype=bool)
    while remaining.any():
        current = np.where(remaining & (n_dominators == 0))[0]
        fronts.append(current.tolist())
        remaining[current] = False
        n_dominators -= dom[current].sum(axis=0)
        n_dominators[~remaining] = 1  # keep settled points out of later fronts
    return fronts


def crowding_distance(front_objectives) -> np.ndarray:
    """Crowding distance of each member of a single front.

    Per-objective extremes get +inf; interior members accumulate the
    max-min normalized gap between their neighbors. An objective whose
    values are all equal contributes nothing.
    """
    F = np.asarray(front_objectives, dtype=float)
    if F.size == 0:
        return np.empty(0)
    n, m = F.shape
    dist = np.zeros(n)
    for j in range(m):
        order = np.argsort(F[:, j], kind="stable")
        dist[order[0]] = np.inf
        dist[order[-1]] = np.inf
        span = F[order[-1], j] - F[order[0], j]
        if span > 0 and n > 2:
            dist[order[1:-1]] += (F[order[2:], j] - F[order[:-2], j]) / span
    return dist


@dataclass(frozen=True)
class RankedPopulation:
    """Non-domination level (1-based) and crowding distance per member."""

    front_index: np.ndarray
    crowding: np.ndarray
    fronts: list[list[int]] = field(repr=False)


def rank_population(objectives) -> RankedPopulation:
    F = np.asarray(objectives, dtype=float)
    fronts = nondominated_sort(F)
    front_index = np.empty(F.shape[0], dtype=int)
    crowding = np.empty(F.shape[0])
    for level, front in enumerate(fronts, start=1):
        front_index[front] = level
        crowding[front] = crowding_distance(F[front])
    return RankedPopulation(front_index=front_index, crowding=crowding, fronts=fronts)


def environmental_selection(objectives, n_select: int) -> np.ndarray:
    """Pick min(n_select, n) members by front index, then crowding.

    Whole fronts are admitted while they fit; the boundary front is
    truncated by descending crowding distance with ties kept in input
    order.
    """
    F = np.asarray(objectives, dtype=float)
    fronts = nondominated_sort(F)
    selected: list[int] = []
    for front in fronts:
        room = n_select - len(selected)
        if room <= 0:
            break
        if len(front) <= room:
            selected.extend(front)
        else:
            cd = crowding_distance(F[front])
            order = sorted(range(len(front)), key=lambda i: -cd[i])
            selected.extend(front[i] for i in order[:room])
            break
    return np.array(selected, dtype=int)


def latin_hypercube_sample(n: int, bounds: Bounds, rng: np.random.Generator) -> np.ndarray:
    """n stratified samples: one point per equal-width stratum per dimension."""
    if n < 1:
        raise ValueError("need at least one sample")
    u = np.empty((n, bounds.dim))
    for j in range(bounds.dim):
        u[:, j] = (rng.permutation(n) + rng.random(n)) / n
    return bounds.denormalize(u)


def sbx_crossover_batch(
    P1: np.ndarray,
    P2: np.ndarray,
    eta_c: float,
    p_c: float,
    bounds: Bounds,
    rng: np.random.Generator,
) -> tuple[np.ndarray, np.ndarray]:
    """Row-wise simulated binary crossover of two (n, D) parent blocks."""
    P1 = np.atleast_2d(np.asarray(P1, dtype=float))
    P2 = np.atleast_2d(np.asarray(P2, dtype=float))
    if P1.shape != P2.shape:
        raise ValueError("parents must have equal dimension")
    cross = rng.random(P1.shape) < p_c
    u = rng.random(P1.shape)
    beta = np.where(
        u <= 0.5,
        (2.0 * u) ** (1.0 / (eta_c + 1.0)),
        (1.0 / (2.0 * (1.0 - u))) ** (1.0 / (eta_c + 1.0)),
    )
    C1 = np.where(cross, 0.5 * ((1 + beta) * P1 + (1 - beta) * P2), P1)
    C2 = np.where(cross, 0.5 * ((1 - beta) * P1 + (1 + beta) * P2), P2)
    return bounds.clip(C1), bounds.clip(C2)


def sbx_crossover(
    p1: np.ndarray,
    p2: np.ndarray,
    eta_c: float,
    p_c: float,
    bounds: Bounds,
    rng: np.random.Generator,
) -> tuple[np.ndarray, np.ndarray]:
    """Simulated binary crossover, applied per variable with probability p_c.

    Crossed variables preserve the parents' mean before clipping; children
    are clipped to the bounds.
    """
    C1, C2 = sbx_crossover_batch(
        np.asarray(p1, dtype=float)[None, :], np.asarray(p2, dtype=float)[None, :],
        eta_c, p_c, bounds, rng,
    )
    return C1[0], C2[0]


def polynomial_mutation_batch(
    X: np.ndarray,
    eta_m: float,
    p_m: float,
    bounds: Bounds,
    rng: np.random.Generator,
) -> np.ndarray:
    """Row-wise bounded polynomial mutation of an (n, D) block."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    width = bounds.width
    mutate = rng.random(X.shape) < p_m
    u = rng.random(X.shape)
    d_low = (X - bounds.lower) / width
    d_high = (bounds.upper - X) / width
    exponent = 1.0 / (eta_m + 1.0)
    delta = np.where(
        u <= 0.5,
        (2.0 * u + (1.0 - 2.0 * u) * (1.0 - d_low) ** (eta_m + 1.0)) ** exponent - 1.0,
        1.0 - (2.0 * (1.0 - u) + 2.0 * (u - 0.5) * (1.0 - d_high) ** (eta_m + 1.0)) ** exponent,
    )
    return bounds.clip(np.where(mutate, X + delta * width, X))


def polynomial_mutation(
    x: np.ndarray,
    eta_m: float,
    p_m: float,
    bounds: Bounds,
    rng: np.random.Generator,
) -> np.ndarray:
    """Bounded polynomial mutation, applied per variable with probability p_m."""
    return polynomial_mutation_batch(np.asarray(x, dtype=float)[None, :], eta_m, p_m, bounds, rng)[0]


def differential_mutation(
    base: np.ndarray, a: np.ndarray, b: np.ndarray, weight: float
) -> np.ndarray:
    """Difference step base + weight * (a - b); caller clips to bounds."""
    base = np.asarray(base, dtype=float)
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if not (base.shape == a.shape == b.shape):
        raise ValueError("donor vectors must have equal dimension")
    return base + weight * (a - b)
