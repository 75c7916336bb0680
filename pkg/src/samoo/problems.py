"""Scalable benchmark problems and their analytic Pareto fronts.

DTLZ1-7 (two or three objectives) and ZDT1-4, ZDT6 (two objectives) in
their canonical forms, each paired with a generator of densely, evenly
spaced reference points on the true front. Evaluations are pure and
deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .core import Bounds

__all__ = ["UnsupportedProblem", "Problem", "make_problem", "PROBLEM_NAMES"]


class UnsupportedProblem(ValueError):
    """No analytic Pareto front is available for this problem."""


@dataclass(frozen=True)
class Problem:
    """A box-bounded minimization problem with m objectives over d variables."""

    name: str
    m: int
    d: int
    bounds: Bounds
    _evaluate: Callable[[np.ndarray], np.ndarray]
    _front: Callable[[int], np.ndarray] | None

    def evaluate(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.shape != (self.d,):
            raise ValueError(f"{self.name}: expected {self.d} variables, got shape {x.shape}")
        if not self.bounds.contains(x):
            raise ValueError(f"{self.name}: decision vector outside bounds")
        return self._evaluate(x)

    def reference_front(self, count: int | None = None) -> np.ndarray:
        """At least `count` mutually non-dominated points on the true front."""
        if self._front is None:
            raise UnsupportedProblem(f"{self.name}: true Pareto front unknown")
        if count is None:
            count = 1000 if self.m == 2 else 990
        return self._front(count)


# ---------------------------------------------------------------------------
# objective functions


def _dtlz_rastrigin_g(xm: np.ndarray) -> float:
    return 100.0 * (xm.size + float(np.sum((xm - 0.5) ** 2 - np.cos(20.0 * np.pi * (xm - 0.5)))))


def _dtlz_sphere_g(xm: np.ndarray) -> float:
    return float(np.sum((xm - 0.5) ** 2))


def _dtlz1(x: np.ndarray, m: int) -> np.ndarray:
    g = _dtlz_rastrigin_g(x[m - 1 :])
    f = np.empty(m)
    for i in range(m):
        v = 0.5 * (1.0 + g) * float(np.prod(x[: m - 1 - i]))
        if i > 0:
            v *= 1.0 - x[m - 1 - i]
        f[i] = v
    return f


def _dtlz_angular(theta: np.ndarray, g: float, m: int) -> np.ndarray:
    f = np.empty(m)
    for i in range(m):
        v = (1.0 + g) * float(np.prod(np.cos(theta[: m - 1 - i])))
        if i > 0:
            v *= np.sin(theta[m - 1 - i])
        f[i] = v
    return f


def _dtlz2(x: np.ndarray, m: int, alpha: float = 1.0) -> np.ndarray:
    g = _dtlz_sphere_g(x[m - 1 :])
    theta = (x[: m - 1] ** alpha) * (np.pi / 2.0)
    return _dtlz_angular(theta, g, m)


def _dtlz3(x: np.ndarray, m: int) -> np.ndarray:
    g = _dtlz_rastrigin_g(x[m - 1 :])
    theta = x[: m - 1] * (np.pi / 2.0)
    return _dtlz_angular(theta, g, m)


def _dtlz5_like(x: np.ndarray, m: int, g: float) -> np.ndarray:
    theta = np.empty(m - 1)
    theta[0] = x[0] * (np.pi / 2.0)
    if m > 2:
        theta[1:] = (np.pi / (4.0 * (1.0 + g))) * (1.0 + 2.0 * g * x[1 : m - 1])
    return _dtlz_angular(theta, g, m)


def _dtlz5(x: np.ndarray, m: int) -> np.ndarray:
    return _dtlz5_like(x, m, _dtlz_sphere_g(x[m - 1 :]))


def _dtlz6(x: np.ndarray, m: int) -> np.ndarray:
    return _dtlz5_like(x, m, float(np.sum(x[m - 1 :] ** 0.1)))


def _dtlz7(x: np.ndarray, m: int) -> np.ndarray:
    g = 1.0 + 9.0 * float(np.mean(x[m - 1 :]))
    f = np.empty(m)
    f[: m - 1] = x[: m - 1]
    h = m - float(np.sum(f[: m - 1] / (1.0 + g) * (1.0 + np.sin(3.0 * np.pi * f[: m - 1]))))
    f[m - 1] = (1.0 + g) * h
    return f


def _zdt_g(x: np.ndarray) -> float:
    return 1.0 + 9.0 * float(np.sum(x[1:])) / (x.size - 1)


def _zdt1(x: np.ndarray) -> np.ndarray:
    g = _zdt_g(x)
    return np.array([x[0], g * (1.0 - np.sqrt(x[0] / g))])


def _zdt2(x: np.ndarray) -> np.ndarray:
    g = _zdt_g(x)
    return np.array([x[0], g * (1.0 - (x[0] / g) ** 2)])


def _zdt3(x: np.ndarray) -> np.ndarray:
    g = _zdt_g(x)
    return np.array([x[0], g * (1.0 - np.sqrt(x[0] / g) - x[0] / g * np.sin(10.0 * np.pi * x[0]))])


def _zdt4(x: np.ndarray) -> np.ndarray:
    g = 1.0 + 10.0 * (x.size - 1) + float(np.sum(x[1:] ** 2 - 10.0 * np.cos(4.0 * np.pi * x[1:])))
    return np.array([x[0], g * (1.0 - np.sqrt(x[0] / g))])


def _zdt6(x: np.ndarray) -> np.ndarray:
    f1 = 1.0 - np.exp(-4.0 * x[0]) * np.sin(6.0 * np.pi * x[0]) ** 6
    g = 1.0 + 9.0 * (float(np.sum(x[1:])) / (x.size - 1)) ** 0.25
    return np.array([f1, g * (1.0 - (f1 / g) ** 2)])


# ---------------------------------------------------------------------------
# reference front generators


def _curve_points(fn: Callable[[np.ndarray], np.ndarray], t_lo: float, t_hi: float,
                  count: int, dense: int = 32) -> np.ndarray:
    """`count` points of a parametric curve, spaced evenly by arc length.

    The parameter is resampled at uniform chord-length quantiles of a dense
    grid and the curve re-evaluated there, so every returned point lies
    exactly on the curve.
    """
    t = np.linspace(t_lo, t_hi, max(count * dense, 2))
    pts = fn(t)
    seg = np.sqrt(((pts[1:] - pts[:-1]) ** 2).sum(axis=1))
    cum = np.concatenate([[0.0], np.cumsum(seg)])
    targets = np.linspace(0.0, cum[-1], count)
    return fn(np.interp(targets, cum, t))


def _record_regions(t: np.ndarray, u: np.ndarray) -> list[tuple[float, float]]:
    """Parameter intervals where u strictly exceeds every earlier value."""
    prev_max = np.concatenate([[-np.inf], np.maximum.accumulate(u)[:-1]])
    mask = u > prev_max
    regions = []
    idx = np.flatnonzero(mask)
    start = idx[0]
    for a, b in zip(idx[:-1], idx[1:]):
        if b != a + 1:
            regions.append((t[start], t[a]))
            start = b
    regions.append((t[start], t[idx[-1]]))
    return regions


def _disconnected_front(fn, u_of_t, count: int, grid: int = 200_001) -> np.ndarray:
    """Efficient segments of a curve whose second coordinate falls as u rises."""
    t = np.linspace(0.0, 1.0, grid)
    regions = _record_regions(t, u_of_t(t))
    lengths = []
    for lo, hi in regions:
        p = fn(np.linspace(lo, hi, 64))
        lengths.append(np.sqrt(((p[1:] - p[:-1]) ** 2).sum(axis=1)).sum())
    total = sum(lengths)
    parts = []
    for (lo, hi), ln in zip(regions, lengths):
        k = max(2, int(np.ceil(count * ln / total)))
        parts.append(_curve_points(fn, lo, hi, k))
    return np.vstack(parts)


def _simplex_lattice(m: int, count: int) -> np.ndarray:
    """Smallest simplex lattice with at least `count` weight vectors."""
    h = 1
    while _lattice_size(m, h) < count:
        h += 1
    if m == 2:
        w = np.array([[i, h - i] for i in range(h + 1)], dtype=float)
    else:
        w = np.array(
            [[i, j, h - i - j] for i in range(h + 1) for j in range(h + 1 - i)], dtype=float
        )
    return w / h


def _lattice_size(m: int, h: int) -> int:
    return h + 1 if m == 2 else (h + 1) * (h + 2) // 2


def _front_dtlz1(m: int, count: int) -> np.ndarray:
    return 0.5 * _simplex_lattice(m, count)


def _front_sphere(m: int, count: int) -> np.ndarray:
    if m == 2:
        theta = np.linspace(0.0, np.pi / 2.0, count)
        return np.column_stack([np.cos(theta), np.sin(theta)])
    w = _simplex_lattice(3, count)
    return w / np.sqrt((w * w).sum(axis=1, keepdims=True))


def _front_dtlz5(m: int, count: int) -> np.ndarray:
    if m == 2:
        return _front_sphere(2, count)
    theta = np.linspace(0.0, np.pi / 2.0, count)
    c = np.cos(np.pi / 4.0)
    return np.column_stack([np.cos(theta) * c, np.cos(theta) * c, np.sin(theta)])


def _dtlz7_u(t: np.ndarray) -> np.ndarray:
    return 0.5 * t * (1.0 + np.sin(3.0 * np.pi * t))


def _front_dtlz7(m: int, count: int) -> np.ndarray:
    if m == 2:
        def fn(t):
            t = np.asarray(t, dtype=float)
            return np.column_stack([t, 2.0 * (2.0 - _dtlz7_u(t))])

        return _disconnected_front(fn, _dtlz7_u, count)

    # The 3-objective front is the product of the per-coordinate efficient
    # sets; sample each axis evenly in the lifted (t, 2u) metric.
    def axis_fn(t):
        t = np.asarray(t, dtype=float)
        return np.column_stack([t, 2.0 * _dtlz7_u(t)])

    per_axis = int(np.ceil(np.sqrt(count)))
    axis = _disconnected_front(axis_fn, _dtlz7_u, per_axis)[:, 0]
    t1, t2 = np.meshgrid(axis, axis, indexing="ij")
    t1, t2 = t1.ravel(), t2.ravel()
    f3 = 2.0 * (3.0 - _dtlz7_u(t1) - _dtlz7_u(t2))
    return np.column_stack([t1, t2, f3])


def _front_zdt_sqrt(count: int) -> np.ndarray:
    def fn(t):
        t = np.asarray(t, dtype=float)
        return np.column_stack([t * t, 1.0 - t])

    return _curve_points(fn, 0.0, 1.0, count)


def _front_zdt2(count: int) -> np.ndarray:
    def fn(t):
        t = np.asarray(t, dtype=float)
        return np.column_stack([t, 1.0 - t * t])

    return _curve_points(fn, 0.0, 1.0, count)


def _zdt3_u(t: np.ndarray) -> np.ndarray:
    return np.sqrt(t) + t * np.sin(10.0 * np.pi * t)


def _front_zdt3(count: int) -> np.ndarray:
    def fn(t):
        t = np.asarray(t, dtype=float)
        return np.column_stack([t, 1.0 - _zdt3_u(t)])

    return _disconnected_front(fn, _zdt3_u, count)


def _zdt6_f1_min() -> float:
    """Smallest attainable first objective of ZDT6, located numerically."""
    t = np.linspace(0.0, 1.0, 2_000_001)
    f1 = 1.0 - np.exp(-4.0 * t) * np.sin(6.0 * np.pi * t) ** 6
    i = int(np.argmin(f1))
    lo, hi = t[max(i - 1, 0)], t[min(i + 1, t.size - 1)]
    for _ in range(200):  # golden-section refinement
        a = lo + 0.381966011250105 * (hi - lo)
        b = hi - 0.381966011250105 * (hi - lo)
        fa = 1.0 - np.exp(-4.0 * a) * np.sin(6.0 * np.pi * a) ** 6
        fb = 1.0 - np.exp(-4.0 * b) * np.sin(6.0 * np.pi * b) ** 6
        if fa < fb:
            hi = b
        else:
            lo = a
    mid = 0.5 * (lo + hi)
    return float(1.0 - np.exp(-4.0 * mid) * np.sin(6.0 * np.pi * mid) ** 6)


def _front_zdt6(count: int) -> np.ndarray:
    f1_min = _zdt6_f1_min()

    def fn(t):
        t = np.asarray(t, dtype=float)
        return np.column_stack([t, 1.0 - t * t])

    return _curve_points(fn, f1_min, 1.0, count)


# ---------------------------------------------------------------------------
# registry

_DTLZ = {
    "dtlz1": (_dtlz1, _front_dtlz1),
    "dtlz2": (_dtlz2, _front_sphere),
    "dtlz3": (_dtlz3, _front_sphere),
    "dtlz4": (lambda x, m: _dtlz2(x, m, alpha=100.0), _front_sphere),
    "dtlz5": (_dtlz5, _front_dtlz5),
    "dtlz6": (_dtlz6, _front_dtlz5),
    "dtlz7": (_dtlz7, _front_dtlz7),
}

_ZDT = {
    "zdt1": (_zdt1, _front_zdt_sqrt),
    "zdt2": (_zdt2, _front_zdt2),
    "zdt3": (_zdt3, _front_zdt3),
    "zdt4": (_zdt4, _front_zdt_sqrt),
    "zdt6": (_zdt6, _front_zdt6),
}

PROBLEM_NAMES = tuple(sorted(_DTLZ) + sorted(_ZDT))


def make_problem(name: str, m: int = 2, d: int = 30) -> Problem:
    """Build a benchmark problem by name, e.g. make_problem("dtlz2", m=2, d=30)."""
    key = name.lower()
    if key in _DTLZ:
        if m not in (2, 3):
            raise ValueError(f"{name}: supported objective counts are 2 and 3")
        if d < m:
            raise ValueError(f"{name}: need at least {m} variables")
        fn, front = _DTLZ[key]
        return Problem(
            name=key,
            m=m,
            d=d,
            bounds=Bounds.unit(d),
            _evaluate=lambda x, _fn=fn, _m=m: _fn(x, _m),
            _front=lambda count, _front=front, _m=m: _front(_m, count),
        )
    if key in _ZDT:
        if m != 2:
            raise ValueError(f"{name}: defined for exactly 2 objectives")
        if d < 2:
            raise ValueError(f"{name}: need at least 2 variables")
        fn, front = _ZDT[key]
        if key == "zdt4":
            lower = np.concatenate([[0.0], np.full(d - 1, -5.0)])
            upper = np.concatenate([[1.0], np.full(d - 1, 5.0)])
            bounds = Bounds(lower, upper)
        else:
            bounds = Bounds.unit(d)
        return Problem(name=key, m=2, d=d, bounds=bounds, _evaluate=fn, _front=front)
    raise ValueError(f"unknown problem {name!r}; known: {', '.join(PROBLEM_NAMES)}")
