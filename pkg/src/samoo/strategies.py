"""The three infill-sampling strategies of the optimizer.

Each strategy screens cheap surrogate predictions to propose a handful of
decision vectors worth a real evaluation:

* ``classifier_rank_prescreen`` breeds offspring from classifier-predicted
  top ranks until most of the pool looks first-rank, then picks the points
  farthest from everything already evaluated (decision-space uncertainty).
* ``hv_nondominated_search`` evolves a population against per-objective
  interpolants and picks the candidates adding the most hypervolume over
  the archive's current front.
* ``sparse_local_search`` rebuilds local surrogates around the most
  isolated front member and picks the candidate whose predicted objectives
  are farthest from anything evaluated (objective-space uncertainty).

A strategy invocation is a pure function of the archive snapshot, its
parameters, and the passed generator. Returned candidates are always
inside bounds, pairwise distinct, and distinct from every archived point;
when a pool is exhausted by deduplication a fresh Latin hypercube point is
substituted so the evaluation budget is never spent on a known vector.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import (
    DUPLICATE_TOL,
    Archive,
    Bounds,
    crowding_distance,
    differential_mutation,
    environmental_selection,
    latin_hypercube_sample,
    nondominated_sort,
    polynomial_mutation_batch,
    rank_population,
    sbx_crossover_batch,
)
from .indicators import adaptive_reference, hypervolume
from .surrogates import SurrogateSettings, pnn_fit, pnn_predict, rbf_fit, rbf_predict

__all__ = [
    "StrategyParams",
    "InfillBatch",
    "decision_space_uncertainty",
    "objective_space_uncertainty",
    "select_sparse_indices",
    "classifier_rank_prescreen",
    "hv_nondominated_search",
    "sparse_local_search",
]


@dataclass(frozen=True)
class StrategyParams:
    """Tunables shared by the infill strategies.

    ``local_train_size`` and ``p_m`` default to dimension-dependent values
    (100 below 100 variables else 200, and 1/D) resolved at call time.
    """

    pop_size: int = 50
    n_infill: int = 1
    hv_generations: int = 50
    local_generations: int = 10
    diff_weight: float = 0.5
    first_rank_threshold: float = 0.9
    prescreen_max_loops: int = 20
    local_train_size: int | None = None
    eta_c: float = 20.0
    p_c: float = 1.0
    eta_m: float = 20.0
    p_m: float | None = None

    def __post_init__(self):
        if self.pop_size < 4:
            raise ValueError("pop_size must be at least 4 (three donors plus a base)")
        if self.n_infill < 1:
            raise ValueError("n_infill must be at least 1")
        if not 0.0 < self.first_rank_threshold <= 1.0:
            raise ValueError("first_rank_threshold must lie in (0, 1]")
        if self.prescreen_max_loops < 1:
            raise ValueError("prescreen_max_loops must be at least 1")

    def resolved_p_m(self, dim: int) -> float:
        return self.p_m if self.p_m is not None else 1.0 / dim

    def resolved_local_train_size(self, dim: int) -> int:
        if self.local_train_size is not None:
            return self.local_train_size
        return 100 if dim < 100 else 200


@dataclass(frozen=True)
class InfillBatch:
    """Candidates chosen by one strategy invocation.

    ``pool`` and ``pool_scores`` hold the scored, archive-deduplicated set
    the top candidate was drawn from, so selections can be audited against
    a brute-force recomputation of the score.
    """

    candidates: np.ndarray
    scores: np.ndarray
    provenance: list[str]
    pool: np.ndarray = field(repr=False)
    pool_scores: np.ndarray = field(repr=False)
    meta: dict = field(default_factory=dict, repr=False)


def _archive_arrays(archive) -> tuple[np.ndarray, np.ndarray]:
    if isinstance(archive, Archive):
        return archive.X, archive.F
    raise TypeError("expected an Archive")


def _min_dists(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """Per-row minimum Euclidean distance from rows of A to rows of B."""
    diff = A[:, None, :] - B[None, :, :]
    return np.sqrt((diff * diff).sum(axis=-1).min(axis=1))


def decision_space_uncertainty(u, archive, bounds: Bounds):
    """Distance from u to the nearest evaluated point, in the unit box.

    Accepts a single vector or an (n, D) batch.
    """
    X, _ = _archive_arrays(archive)
    if X.shape[0] == 0:
        raise ValueError("archive is empty")
    u = np.asarray(u, dtype=float)
    single = u.ndim == 1
    out = _min_dists(bounds.normalize(np.atleast_2d(u)), bounds.normalize(X))
    return float(out[0]) if single else out


def _objective_scaler(F: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    lo = F.min(axis=0)
    span = F.max(axis=0) - lo
    return lo, np.where(span > 0, span, 1.0)


def objective_space_uncertainty(f_hat, archive):
    """Distance from predicted objectives to the nearest evaluated ones.

    Objectives are min-max normalized by the archive's per-objective range.
    Accepts a single vector or an (n, M) batch.
    """
    _, F = _archive_arrays(archive)
    if F.shape[0] == 0:
        raise ValueError("archive is empty")
    lo, span = _objective_scaler(F)
    f_hat = np.asarray(f_hat, dtype=float)
    single = f_hat.ndim == 1
    out = _min_dists((np.atleast_2d(f_hat) - lo) / span, (F - lo) / span)
    return float(out[0]) if single else out


def _pick_candidates(
    pool_X: np.ndarray,
    scores: np.ndarray,
    n: int,
    archive_X: np.ndarray,
    bounds: Bounds,
    rng: np.random.Generator,
    tag: str,
):
    """Best-scored, archive-distinct, pairwise-distinct candidates.

    Returns the chosen rows plus the deduplicated pool they were ranked in.
    Falls back to fresh Latin hypercube points when the pool is exhausted.
    """
    keep = _min_dists(pool_X, archive_X) >= DUPLICATE_TOL
    pool = pool_X[keep]
    pool_scores = scores[keep]
    order = np.argsort(-pool_scores, kind="stable")
    chosen: list[np.ndarray] = []
    chosen_scores: list[float] = []
    provenance: list[str] = []
    for i in order:
        x = pool[i]
        if any(np.linalg.norm(x - c) < DUPLICATE_TOL for c in chosen):
            continue
        chosen.append(x)
        chosen_scores.append(float(pool_scores[i]))
        provenance.append(tag)
        if len(chosen) == n:
            break
    while len(chosen) < n:
        x = latin_hypercube_sample(1, bounds, rng)[0]
        near_archive = _min_dists(x[None, :], archive_X)[0] < DUPLICATE_TOL
        near_chosen = any(np.linalg.norm(x - c) < DUPLICATE_TOL for c in chosen)
        if near_archive or near_chosen:
            continue
        chosen.append(x)
        chosen_scores.append(float("nan"))
        provenance.append("lhs_fallback")
    return (
        np.array(chosen),
        np.array(chosen_scores),
        provenance,
        pool,
        pool_scores,
    )


def _paired_offspring(
    pop_X: np.ndarray, params: StrategyParams, bounds: Bounds, rng: np.random.Generator, p_m: float
) -> np.ndarray:
    """One offspring per parent from shuffled pairs, crossover then mutation."""
    n = pop_X.shape[0]
    order = rng.permutation(n)
    k = n // 2
    C1, C2 = sbx_crossover_batch(
        pop_X[order[:k]], pop_X[order[k : 2 * k]], params.eta_c, params.p_c, bounds, rng
    )
    off = np.vstack([C1, C2])
    if n % 2:
        extra, _ = sbx_crossover_batch(
            pop_X[order[-1]][None, :], pop_X[order[0]][None, :], params.eta_c, params.p_c, bounds, rng
        )
        off = np.vstack([off, extra])
    return polynomial_mutation_batch(off, params.eta_m, p_m, bounds, rng)


def _pick_donors(level1: np.ndarray, level12: np.ndarray, rng: np.random.Generator):
    """Donor triple: base and difference head from the top level, tail from
    the top two levels; sampled without replacement when sizes permit."""
    if level1.size >= 2:
        i, j = rng.choice(level1.size, size=2, replace=False)
        r1, r2 = int(level1[i]), int(level1[j])
    else:
        r1 = r2 = int(level1[0])
    rest = level12[(level12 != r1) & (level12 != r2)]
    if rest.size:
        r3 = int(rest[rng.integers(rest.size)])
    else:
        r3 = int(level12[rng.integers(level12.size)])
    return r1, r2, r3


def _donor_pools(labels: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    present = np.unique(labels)
    level1 = np.flatnonzero(labels == present[0])
    if present.size > 1:
        level12 = np.flatnonzero(labels <= present[1])
    else:
        level12 = level1
    return level1, level12


def classifier_rank_prescreen(
    archive: Archive,
    params: StrategyParams,
    bounds: Bounds,
    rng: np.random.Generator,
    surrogates: SurrogateSettings | None = None,
) -> InfillBatch:
    """Breed promising offspring under a rank classifier, pick the most novel.

    The top-ranked archive members are labeled by non-domination level and
    a Parzen classifier is trained on them. Offspring pools are generated
    by a difference step among top-level donors plus crossover and
    mutation, re-predicted, and regenerated until at least
    ``first_rank_threshold`` of the pool is predicted first-level (or the
    loop cap is hit). The final pool is ranked by decision-space
    uncertainty.
    """
    if len(archive) < 4:
        raise ValueError("prescreening needs an archive of at least 4 samples")
    if surrogates is None:
        surrogates = SurrogateSettings()
    X, F = archive.X, archive.F
    selected = environmental_selection(F, min(params.pop_size, len(archive)))
    pop_X = X[selected]
    labels = rank_population(F[selected]).front_index
    model = pnn_fit(bounds.normalize(pop_X), labels, sigma=surrogates.pnn_sigma)

    p_m = params.resolved_p_m(bounds.dim)
    cur_X, cur_labels = pop_X, labels
    loops = 0
    fraction = 0.0
    while True:
        loops += 1
        level1, level12 = _donor_pools(cur_labels)
        donors = np.array([_pick_donors(level1, level12, rng) for _ in range(params.pop_size)])
        mutants = bounds.clip(
            differential_mutation(
                cur_X[donors[:, 0]], cur_X[donors[:, 1]], cur_X[donors[:, 2]], params.diff_weight
            )
        )
        crossed, _ = sbx_crossover_batch(
            mutants, cur_X[donors[:, 0]], params.eta_c, params.p_c, bounds, rng
        )
        offspring = polynomial_mutation_batch(crossed, params.eta_m, p_m, bounds, rng)
        predicted = pnn_predict(model, bounds.normalize(offspring))
        fraction = float(np.mean(predicted == 1))
        cur_X, cur_labels = offspring, predicted
        if fraction >= params.first_rank_threshold or loops >= params.prescreen_max_loops:
            break

    scores = decision_space_uncertainty(cur_X, archive, bounds)
    cands, cscores, prov, pool, pool_scores = _pick_candidates(
        cur_X, scores, params.n_infill, X, bounds, rng, "prescreen"
    )
    return InfillBatch(
        candidates=cands,
        scores=cscores,
        provenance=prov,
        pool=pool,
        pool_scores=pool_scores,
        meta={"loops": loops, "first_rank_fraction": fraction},
    )


def _fit_objective_models(X, F, bounds, surrogates):
    Xn = bounds.normalize(X)
    models = [
        rbf_fit(Xn, F[:, j], width=surrogates.rbf_width, regularization=surrogates.rbf_regularization)
        for j in range(F.shape[1])
    ]

    def predict(Q: np.ndarray) -> np.ndarray:
        Qn = bounds.normalize(np.atleast_2d(Q))
        return np.column_stack([rbf_predict(m, Qn) for m in models])

    return predict


def hv_nondominated_search(
    archive: Archive,
    params: StrategyParams,
    bounds: Bounds,
    rng: np.random.Generator,
    surrogates: SurrogateSettings | None = None,
    predict_override=None,
    ref_scale: float = 1.1,
    ref_shift: float = 0.1,
) -> InfillBatch:
    """Evolve a population on the objective surrogates, pick by HV gain.

    ``predict_override`` (a callable mapping raw (n, D) points to (n, M)
    objectives) replaces the fitted interpolants; it exists for testing
    against the true functions.
    """
    if len(archive) < 2:
        raise ValueError("hypervolume search needs an archive of at least 2 samples")
    if surrogates is None:
        surrogates = SurrogateSettings()
    X, F = archive.X, archive.F
    predict = predict_override or _fit_objective_models(X, F, bounds, surrogates)

    selected = environmental_selection(F, min(params.pop_size, len(archive)))
    pop_X = X[selected]
    pop_F = predict(pop_X)
    p_m = params.resolved_p_m(bounds.dim)
    for _ in range(params.hv_generations):
        off_X = _paired_offspring(pop_X, params, bounds, rng, p_m)
        off_F = predict(off_X)
        comb_X = np.vstack([pop_X, off_X])
        comb_F = np.vstack([pop_F, off_F])
        keep = environmental_selection(comb_F, pop_X.shape[0])
        pop_X, pop_F = comb_X[keep], comb_F[keep]

    front_F = F[archive.front_indices()]
    ref = adaptive_reference(np.vstack([front_F, pop_F]), ref_scale, ref_shift)
    base = hypervolume(front_F, ref)
    scores = np.array([hypervolume(np.vstack([front_F, f]), ref) - base for f in pop_F])
    cands, cscores, prov, pool, pool_scores = _pick_candidates(
        pop_X, scores, params.n_infill, X, bounds, rng, "hv_search"
    )
    return InfillBatch(
        candidates=cands,
        scores=cscores,
        provenance=prov,
        pool=pool,
        pool_scores=pool_scores,
        meta={"reference_point": ref, "base_hypervolume": base},
    )


def select_sparse_indices(front_objectives, n: int) -> list[int]:
    """Members of a front in refinement priority order, at most n of them.

    Interior members come first by descending crowding distance; the
    per-objective extremes are used only when no interior member exists.
    """
    F = np.atleast_2d(np.asarray(front_objectives, dtype=float))
    cd = crowding_distance(F)
    finite = np.flatnonzero(np.isfinite(cd))
    order = finite[np.argsort(-cd[finite], kind="stable")]
    result = [int(i) for i in order[:n]]
    if len(result) < n:
        for i in np.flatnonzero(np.isinf(cd)):
            result.append(int(i))
            if len(result) == n:
                break
    return result


def sparse_local_search(
    archive: Archive,
    params: StrategyParams,
    bounds: Bounds,
    rng: np.random.Generator,
    surrogates: SurrogateSettings | None = None,
    predict_override=None,
) -> InfillBatch:
    """Refine the most isolated front region with local surrogates.

    For each sparse point, local models are fitted on its objective-space
    neighborhood and a short evolution is seeded there (the sparse point
    parents the first generation). Evolved members landing on the merged
    first front are preferred; selection maximizes objective-space
    uncertainty, or decision-space uncertainty when the archive front is
    too small to measure objective spread.
    """
    if len(archive) < 2:
        raise ValueError("local search needs an archive of at least 2 samples")
    if surrogates is None:
        surrogates = SurrogateSettings()
    X, F = archive.X, archive.F
    front_idx = np.array(archive.front_indices())
    front_F = F[front_idx]
    use_decision_space = front_idx.size < 2

    lo, span = _objective_scaler(F)
    Fn = (F - lo) / span
    train_size = min(len(archive), params.resolved_local_train_size(bounds.dim))
    p_m = params.resolved_p_m(bounds.dim)

    sparse_order = select_sparse_indices(front_F, params.n_infill)
    chosen: list[np.ndarray] = []
    chosen_scores: list[float] = []
    provenance: list[str] = []
    first_pool = None
    first_pool_scores = None
    meta: dict = {"sparse_indices": [int(front_idx[i]) for i in sparse_order],
                  "train_size": train_size}

    for si in sparse_order:
        sparse_x = X[front_idx[si]]
        sparse_fn = Fn[front_idx[si]]
        near = np.argsort(np.sqrt(((Fn - sparse_fn) ** 2).sum(axis=1)), kind="stable")[:train_size]
        predict = predict_override or _fit_objective_models(X[near], F[near], bounds, surrogates)

        pop_X = X[near[: min(params.pop_size, near.size)]]
        pop_F = predict(pop_X)
        for gen in range(params.local_generations):
            if gen == 0:
                partners = pop_X[rng.integers(pop_X.shape[0], size=params.pop_size)]
                seeds = np.repeat(sparse_x[None, :], params.pop_size, axis=0)
                crossed, _ = sbx_crossover_batch(seeds, partners, params.eta_c, params.p_c, bounds, rng)
                off_X = polynomial_mutation_batch(crossed, params.eta_m, p_m, bounds, rng)
            else:
                off_X = _paired_offspring(pop_X, params, bounds, rng, p_m)
            off_F = predict(off_X)
            comb_X = np.vstack([pop_X, off_X])
            comb_F = np.vstack([pop_F, off_F])
            keep = environmental_selection(comb_F, min(params.pop_size, comb_X.shape[0]))
            pop_X, pop_F = comb_X[keep], comb_F[keep]

        merged = np.vstack([front_F, pop_F])
        first = nondominated_sort(merged)[0]
        evolved_on_front = [i - front_F.shape[0] for i in first if i >= front_F.shape[0]]
        if evolved_on_front:
            elig_X, elig_F = pop_X[evolved_on_front], pop_F[evolved_on_front]
        else:
            elig_X, elig_F = pop_X, pop_F
        if use_decision_space:
            scores = decision_space_uncertainty(elig_X, archive, bounds)
        else:
            scores = objective_space_uncertainty(elig_F, archive)

        already = np.vstack(chosen) if chosen else np.empty((0, bounds.dim))
        avoid = np.vstack([X, already])
        cand, cscore, prov, pool, pool_scores = _pick_candidates(
            elig_X, scores, 1, avoid, bounds, rng, "local_search"
        )
        chosen.append(cand[0])
        chosen_scores.append(float(cscore[0]))
        provenance.append(prov[0])
        if first_pool is None:
            first_pool, first_pool_scores = pool, pool_scores

    while len(chosen) < params.n_infill:  # front smaller than requested infills
        already = np.vstack(chosen) if chosen else np.empty((0, bounds.dim))
        x = latin_hypercube_sample(1, bounds, rng)[0]
        if _min_dists(x[None, :], np.vstack([X, already]))[0] < DUPLICATE_TOL:
            continue
        chosen.append(x)
        chosen_scores.append(float("nan"))
        provenance.append("lhs_fallback")

    return InfillBatch(
        candidates=np.array(chosen),
        scores=np.array(chosen_scores),
        provenance=provenance,
        pool=first_pool if first_pool is not None else np.empty((0, bounds.dim)),
        pool_scores=first_pool_scores if first_pool_scores is not None else np.empty(0),
        meta=meta,
    )
