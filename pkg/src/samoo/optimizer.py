"""The optimization loop: seeded initialization, per-objective extreme
bootstrap, and the rotating three-strategy infill cycle, plus the
single-strategy ablation variants.

A run is fully determined by (problem, config): every random draw comes
from a generator derived from the config seed and a fixed per-phase,
per-iteration label, so repeated executions produce identical traces.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .core import Archive, latin_hypercube_sample
from .indicators import hypervolume, igd
from .strategies import (
    InfillBatch,
    StrategyParams,
    classifier_rank_prescreen,
    hv_nondominated_search,
    sparse_local_search,
)
from .surrogates import SurrogateSettings, rbf_fit, rbf_predict

__all__ = [
    "RunConfig",
    "RunResult",
    "TraceRecord",
    "EvaluationError",
    "VARIANTS",
    "initialize",
    "bootstrap_extremes",
    "run",
    "run_variant",
]

VARIANTS = {
    "full": ("prescreen", "hv_search", "local_search"),
    "s1": ("prescreen",),
    "s2": ("hv_search",),
    "s3": ("local_search",),
}

_PHASE_IDS = {"init": 0, "bootstrap": 1, "prescreen": 2, "hv_search": 3, "local_search": 4}


@dataclass(frozen=True)
class RunConfig:
    """Everything that determines a run besides the problem itself.

    ``n_init`` defaults to 100 below 100 variables, else 200. The
    ``bootstrap`` switch chooses between minimizing a per-objective
    surrogate for the extreme points ("surrogate", the default) and
    looking the extremes up in the archive ("archive", which spends no
    evaluations because the archive already contains its own minima).
    """

    n_init: int | None = None
    max_fes: int = 300
    strategy: StrategyParams = field(default_factory=StrategyParams)
    variant: str = "full"
    seed: int = 0
    surrogates: SurrogateSettings = field(default_factory=SurrogateSettings)
    ref_scale: float = 1.1
    ref_shift: float = 0.1
    bootstrap: str = "surrogate"
    de_pop_size: int = 50
    de_generations: int = 50
    de_crossover_rate: float = 0.9

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValueError(f"variant must be one of {sorted(VARIANTS)}")
        if self.bootstrap not in ("surrogate", "archive"):
            raise ValueError("bootstrap must be 'surrogate' or 'archive'")
        if self.seed < 0:
            raise ValueError("seed must be non-negative")
        if self.max_fes < 1:
            raise ValueError("max_fes must be positive")

    def resolved_n_init(self, dim: int) -> int:
        if self.n_init is not None:
            return self.n_init
        return 100 if dim < 100 else 200


@dataclass(frozen=True)
class TraceRecord:
    """One real function evaluation, with indicators taken just after it."""

    fe: int
    tag: str
    x: tuple
    f: tuple
    score: float | None
    igd: float | None
    igd_best: float | None
    hv: float | None


@dataclass
class RunResult:
    problem_name: str
    variant: str
    seed: int
    archive: Archive
    front_X: np.ndarray
    front_F: np.ndarray
    trace: list[TraceRecord]
    wall_clock: dict[str, float]


class EvaluationError(RuntimeError):
    """An evaluator failed; carries the evaluation index and partial trace."""

    def __init__(self, message: str, fe_index: int, partial: RunResult | None = None):
        super().__init__(message)
        self.fe_index = fe_index
        self.partial = partial


def _rng_for(seed: int, phase: str, iteration: int) -> np.random.Generator:
    return np.random.default_rng((seed, _PHASE_IDS[phase], iteration))


class _Tracer:
    """Appends evaluations to the archive and records per-FE indicators."""

    def __init__(self, problem, reference_front, hv_ref_point):
        self.problem = problem
        self.reference_front = reference_front
        self.hv_ref_point = hv_ref_point
        self.archive = Archive()
        self.trace: list[TraceRecord] = []
        self._best_igd = np.inf

    def evaluate(self, x: np.ndarray, tag: str, score: float | None = None) -> np.ndarray:
        fe = len(self.archive) + 1
        try:
            f = self.problem.evaluate(x)
        except Exception as exc:
            raise EvaluationError(f"evaluation {fe} failed: {exc}", fe_index=fe) from exc
        self.archive.add(x, f)
        igd_val = hv_val = None
        if self.reference_front is not None or self.hv_ref_point is not None:
            front_F = self.archive.F[self.archive.front_indices()]
            if self.reference_front is not None:
                igd_val = igd(self.reference_front, front_F)
                self._best_igd = min(self._best_igd, igd_val)
            if self.hv_ref_point is not None:
                hv_val = hypervolume(front_F, self.hv_ref_point)
        self.trace.append(
            TraceRecord(
                fe=fe,
                tag=tag,
                x=tuple(float(v) for v in x),
                f=tuple(float(v) for v in f),
                score=None if score is None or not np.isfinite(score) else float(score),
                igd=igd_val,
                igd_best=None if igd_val is None else self._best_igd,
                hv=hv_val,
            )
        )
        return f


def initialize(problem, config: RunConfig, rng: np.random.Generator, tracer: _Tracer | None = None) -> Archive:
    """Evaluate a Latin hypercube design of the configured size."""
    tracer = tracer or _Tracer(problem, None, None)
    for x in latin_hypercube_sample(config.resolved_n_init(problem.d), problem.bounds, rng):
        tracer.evaluate(x, "init")
    return tracer.archive


def _de_minimize(predict, bounds, rng, pop_size: int, generations: int, weight: float, cr: float):
    """DE/rand/1 with binomial crossover on a scalar predictor.

    Returns the final population and predictions sorted best-first.
    """
    X = latin_hypercube_sample(pop_size, bounds, rng)
    y = np.asarray(predict(X), dtype=float)
    for _ in range(generations):
        donors = np.empty((pop_size, 3), dtype=int)
        for i in range(pop_size):
            picks = rng.choice(pop_size - 1, size=3, replace=False)
            picks[picks >= i] += 1
            donors[i] = picks
        V = bounds.clip(X[donors[:, 0]] + weight * (X[donors[:, 1]] - X[donors[:, 2]]))
        mask = rng.random((pop_size, bounds.dim)) < cr
        mask[np.arange(pop_size), rng.integers(bounds.dim, size=pop_size)] = True
        T = np.where(mask, V, X)
        yT = np.asarray(predict(T), dtype=float)
        better = yT <= y
        X = np.where(better[:, None], T, X)
        y = np.where(better, yT, y)
    order = np.argsort(y, kind="stable")
    return X[order], y[order]


def bootstrap_extremes(
    archive: Archive,
    problem,
    config: RunConfig,
    rng: np.random.Generator,
    tracer: _Tracer | None = None,
    objective_override=None,
) -> Archive:
    """Spend one evaluation per objective near its predicted minimum.

    For each objective a surrogate is fitted on the archive and minimized
    with DE; the incumbent is truly evaluated (duplicates fall through to
    the next-best population member, then to a fresh sample).
    ``objective_override`` maps raw (n, D) points to (n, M) objectives and
    replaces the surrogates for testing. In "archive" bootstrap mode the
    extremes are archive lookups, which are already evaluated, so no
    budget is spent.
    """
    if len(archive) < 2:
        raise ValueError("bootstrap needs an archive of at least 2 samples")
    if config.bootstrap == "archive":
        return archive
    if tracer is None:
        tracer = _Tracer(problem, None, None)
        tracer.archive = archive
    for j in range(problem.m):
        if objective_override is not None:
            predict = lambda Q, _j=j: np.asarray(objective_override(Q))[:, _j]
        else:
            model = rbf_fit(
                problem.bounds.normalize(archive.X),
                archive.F[:, j],
                width=config.surrogates.rbf_width,
                regularization=config.surrogates.rbf_regularization,
            )
            predict = lambda Q, _m=model: rbf_predict(_m, problem.bounds.normalize(Q))
        X_sorted, _ = _de_minimize(
            predict,
            problem.bounds,
            rng,
            config.de_pop_size,
            config.de_generations,
            config.strategy.diff_weight,
            config.de_crossover_rate,
        )
        chosen = None
        for x in X_sorted:
            if not archive.is_duplicate(x):
                chosen = x
                break
        while chosen is None:
            x = latin_hypercube_sample(1, problem.bounds, rng)[0]
            if not archive.is_duplicate(x):
                chosen = x
        tracer.evaluate(chosen, "bootstrap")
    return archive


def run(problem, config: RunConfig, reference_front=None, hv_ref_point=None) -> RunResult:
    """Execute one full optimization run under the configured variant.

    Per-evaluation IGD (against ``reference_front``) and hypervolume
    (against the fixed ``hv_ref_point``) are recorded in the trace when
    those references are supplied. On evaluator failure the partial trace
    is preserved on the raised EvaluationError.
    """
    n_init = config.resolved_n_init(problem.d)
    budget_floor = n_init + (problem.m if config.bootstrap == "surrogate" else 0)
    if budget_floor > config.max_fes:
        raise ValueError(
            f"initialization plus bootstrap needs {budget_floor} evaluations "
            f"but max_fes is {config.max_fes}"
        )
    strategies = VARIANTS[config.variant]
    tracer = _Tracer(problem, reference_front, hv_ref_point)
    wall: dict[str, float] = {}

    def result() -> RunResult:
        archive = tracer.archive
        front = archive.front_indices() if len(archive) else []
        return RunResult(
            problem_name=problem.name,
            variant=config.variant,
            seed=config.seed,
            archive=archive,
            front_X=archive.X[front] if len(archive) else np.empty((0, problem.d)),
            front_F=archive.F[front] if len(archive) else np.empty((0, problem.m)),
            trace=list(tracer.trace),
            wall_clock=dict(wall),
        )

    try:
        t0 = time.perf_counter()
        initialize(problem, config, _rng_for(config.seed, "init", 0), tracer)
        wall["init"] = time.perf_counter() - t0

        t0 = time.perf_counter()
        bootstrap_extremes(tracer.archive, problem, config, _rng_for(config.seed, "bootstrap", 0), tracer)
        wall["bootstrap"] = time.perf_counter() - t0

        iteration = 0
        while len(tracer.archive) < config.max_fes:
            iteration += 1
            for tag in strategies:
                remaining = config.max_fes - len(tracer.archive)
                if remaining <= 0:
                    break
                rng = _rng_for(config.seed, tag, iteration)
                t0 = time.perf_counter()
                batch = _invoke_strategy(tag, tracer.archive, config, problem.bounds, rng)
                wall[tag] = wall.get(tag, 0.0) + (time.perf_counter() - t0)
                for x, score in zip(batch.candidates[:remaining], batch.scores[:remaining]):
                    tracer.evaluate(x, tag, score=score)
    except EvaluationError as exc:
        exc.partial = result()
        raise
    return result()


def _invoke_strategy(tag: str, archive: Archive, config: RunConfig, bounds, rng) -> InfillBatch:
    if tag == "prescreen":
        return classifier_rank_prescreen(archive, config.strategy, bounds, rng, config.surrogates)
    if tag == "hv_search":
        return hv_nondominated_search(
            archive, config.strategy, bounds, rng, config.surrogates,
            ref_scale=config.ref_scale, ref_shift=config.ref_shift,
        )
    return sparse_local_search(archive, config.strategy, bounds, rng, config.surrogates)


def run_variant(problem, config: RunConfig, reference_front=None, hv_ref_point=None) -> RunResult:
    """Run a single-strategy ablation; config.variant must be s1, s2, or s3."""
    if config.variant not in ("s1", "s2", "s3"):
        raise ValueError("run_variant expects variant 's1', 's2', or 's3'")
    return run(problem, config, reference_front=reference_front, hv_ref_point=hv_ref_point)
