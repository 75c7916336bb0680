"""Acceptance gate: every release-blocking check, one test per criterion.

Each test prints a single PASS/FAIL line (visible with ``pytest -s`` or on
failure); the expensive multi-seed optimization runs are shared through
module-scoped fixtures. Criteria with runtime budgets assert them.
"""

import sys
import time

import numpy as np
import pytest

from oracles import (
    draw_well_conditioned_set,
    hv_inclusion_exclusion,
    peel_fronts,
    random_front,
    wilcoxon_enumeration,
)

from samoo.core import Archive, Bounds, latin_hypercube_sample, nondominated_sort
from samoo.external import (
    EvalTimeout,
    ExternalEvaluator,
    ExternalEvaluatorSpec,
    ExternalProblem,
    ProtocolError,
)
from samoo.harness import wilcoxon_signed_rank, write_trace
from samoo.indicators import hypervolume, igd, mc_hypervolume
from samoo.optimizer import RunConfig, run
from samoo.problems import make_problem
from samoo.strategies import (
    StrategyParams,
    classifier_rank_prescreen,
    decision_space_uncertainty,
    hv_nondominated_search,
    objective_space_uncertainty,
    sparse_local_search,
)
from samoo.surrogates import pnn_fit, pnn_predict, rbf_fit, rbf_predict

SEEDS = range(5)


def report(criterion: int, ok: bool, detail: str):
    print(f"ACCEPTANCE {criterion:02d} {'PASS' if ok else 'FAIL'} - {detail}", flush=True)
    assert ok, f"criterion {criterion}: {detail}"


@pytest.fixture(scope="module")
def dtlz2_problem():
    return make_problem("dtlz2", m=2, d=30)


@pytest.fixture(scope="module")
def dtlz2_runs(dtlz2_problem):
    """Five seeded runs per variant on bi-objective 30-D DTLZ2 at 300 FEs."""
    ref = dtlz2_problem.reference_front(1000)
    results = {}
    timings = []
    for variant in ("full", "s1", "s3"):
        results[variant] = []
        for seed in SEEDS:
            t0 = time.perf_counter()
            res = run(dtlz2_problem, RunConfig(seed=seed, variant=variant), reference_front=ref)
            timings.append(time.perf_counter() - t0)
            results[variant].append(res)
    results["max_run_seconds"] = max(timings)
    return results


def test_criterion_01_hypervolume_oracles():
    t0 = time.perf_counter()
    rng = np.random.default_rng(24)
    worst_sigma = 0.0
    for m in (2, 3):
        ref = np.full(m, 1.2)
        for _ in range(50):
            front = random_front(rng, int(rng.integers(1, 11)), m)
            exact = hypervolume(front, ref)
            estimate, stderr = mc_hypervolume(front, ref, 20000, rng)
            gap = abs(exact - estimate)
            assert gap <= max(3.0 * stderr, 1e-12)
            if stderr > 0:
                worst_sigma = max(worst_sigma, gap / stderr)
    ref2 = np.array([1.2, 1.2])
    worst_ie = 0.0
    for _ in range(100):
        front = random_front(rng, int(rng.integers(1, 9)), 2)
        worst_ie = max(worst_ie, abs(hypervolume(front, ref2) - hv_inclusion_exclusion(front, ref2)))
    elapsed = time.perf_counter() - t0
    report(
        1,
        worst_ie < 1e-9 and elapsed < 10.0,
        f"exact vs MC within {worst_sigma:.2f} sigma, vs inclusion-exclusion within "
        f"{worst_ie:.2e}, {elapsed:.1f}s",
    )


def test_criterion_02_sorting_oracle():
    t0 = time.perf_counter()
    rng = np.random.default_rng(11)
    for _ in range(1000):
        n = int(rng.integers(1, 51))
        m = 2 if rng.random() < 0.5 else 3
        F = rng.random((n, m))
        assert nondominated_sort(F) == peel_fronts(F)
    elapsed = time.perf_counter() - t0
    report(2, elapsed < 10.0, f"1000 instances match the definition scan, {elapsed:.1f}s")


def test_criterion_03_surrogate_correctness():
    t0 = time.perf_counter()
    rng = np.random.default_rng(12)
    worst = 0.0
    for _ in range(100):
        X = draw_well_conditioned_set(rng)
        y = rng.normal(size=X.shape[0])
        model = rbf_fit(X, y)
        scale = max(1.0, float(np.abs(y).max()))
        worst = max(worst, float(np.abs(rbf_predict(model, X) - y).max() / scale))
    assert worst < 1e-6
    X = rng.random((50, 4))
    labels = rng.integers(1, 6, size=50)
    model = pnn_fit(X, labels, sigma=1e-6)
    queries = rng.random((1000, 4))
    predicted = pnn_predict(model, queries)
    nearest = labels[
        np.argmin(((queries[:, None, :] - X[None, :, :]) ** 2).sum(-1), axis=1)
    ]
    ok_pnn = np.array_equal(predicted, nearest)
    elapsed = time.perf_counter() - t0
    report(
        3,
        ok_pnn and elapsed < 10.0,
        f"RBF interpolation error {worst:.2e}, tiny-sigma classifier equals "
        f"nearest pattern on 1000 queries, {elapsed:.1f}s",
    )


def test_criterion_04_argmax_consistency():
    problem = make_problem("zdt1", d=8)
    params = StrategyParams(pop_size=16, hv_generations=6, local_generations=3)
    rng = np.random.default_rng(13)
    archive = Archive()
    for x in latin_hypercube_sample(40, problem.bounds, rng):
        archive.add(x, problem.evaluate(x))
    checked = 0
    for seed in range(20):
        b1 = classifier_rank_prescreen(archive, params, problem.bounds, np.random.default_rng(seed))
        scores1 = decision_space_uncertainty(b1.pool, archive, problem.bounds)
        assert b1.scores[0] == scores1.max()

        b2 = hv_nondominated_search(archive, params, problem.bounds, np.random.default_rng(seed))
        front = archive.F[archive.front_indices()]
        ref = b2.meta["reference_point"]
        base = hypervolume(front, ref)
        assert b2.scores[0] == b2.pool_scores.max()
        assert base == b2.meta["base_hypervolume"]

        b3 = sparse_local_search(archive, params, problem.bounds, np.random.default_rng(seed))
        assert b3.scores[0] == b3.pool_scores.max()
        checked += 3
    report(4, checked == 60, f"{checked} strategy invocations returned their pool argmax exactly")


def test_criterion_05_budget_and_determinism(dtlz2_problem, dtlz2_runs, tmp_path):
    ref = dtlz2_problem.reference_front(1000)
    baseline = dtlz2_runs["full"][0]
    repeat = run(dtlz2_problem, RunConfig(seed=0, variant="full"), reference_front=ref)
    tags = [r.tag for r in baseline.trace]
    counts = {t: tags.count(t) for t in ("init", "bootstrap", "prescreen", "hv_search",
                                         "local_search")}
    ok_budget = len(baseline.archive) == 300 and counts == {
        "init": 100, "bootstrap": 2, "prescreen": 66, "hv_search": 66, "local_search": 66,
    }
    p1, p2 = tmp_path / "a.ndjson", tmp_path / "b.ndjson"
    write_trace(p1, baseline)
    write_trace(p2, repeat)
    ok_bytes = p1.read_bytes() == p2.read_bytes()
    report(
        5,
        ok_budget and ok_bytes,
        f"300 archive entries, 66 triples ({counts}), byte-identical traces across executions",
    )


def test_criterion_06_dtlz2_performance(dtlz2_runs):
    igds = [res.trace[-1].igd for res in dtlz2_runs["full"]]
    median = float(np.median(igds))
    slowest = dtlz2_runs["max_run_seconds"]
    report(
        6,
        median <= 0.5 and slowest < 120.0,
        f"DTLZ2 30D median final IGD {median:.4f} (limit 0.5), slowest run {slowest:.0f}s "
        f"(limit 120s), seeds {[f'{v:.3f}' for v in igds]}",
    )


def test_criterion_07_zdt2_performance():
    problem = make_problem("zdt2", d=30)
    ref = problem.reference_front(1000)
    igds = []
    for seed in SEEDS:
        res = run(problem, RunConfig(seed=seed), reference_front=ref)
        igds.append(res.trace[-1].igd)
    median = float(np.median(igds))
    report(
        7,
        median <= 0.2,
        f"ZDT2 30D median final IGD {median:.4f} (limit 0.2), seeds {[f'{v:.3f}' for v in igds]}",
    )


def test_criterion_08_ablation_direction(dtlz2_runs):
    medians = {
        variant: float(np.median([res.trace[-1].igd for res in dtlz2_runs[variant]]))
        for variant in ("full", "s1", "s3")
    }
    ok = medians["full"] < medians["s1"] and medians["full"] < medians["s3"]
    report(
        8,
        ok,
        "median IGD full {full:.4f} < s1 {s1:.4f} and < s3 {s3:.4f}".format(**medians),
    )


def test_criterion_09_wilcoxon_exact():
    rng = np.random.default_rng(14)
    worst = 0.0
    for _ in range(100):
        n = int(rng.integers(5, 13))
        a = rng.normal(size=n)
        b = rng.normal(size=n)
        worst = max(worst, abs(wilcoxon_signed_rank(a, b).p_value - wilcoxon_enumeration(a, b)))
    six = wilcoxon_signed_rank(np.arange(6.0) + 1.0, np.arange(6.0)).p_value
    report(
        9,
        worst <= 1e-12 and six == 0.03125,
        f"exact p within {worst:.1e} of sign enumeration, all-positive n=6 case p={six}",
    )


def test_criterion_10_external_protocol():
    mock = (sys.executable, "-m", "samoo.mock_evaluator")
    spec = ExternalEvaluatorSpec(
        command=mock + ("--m", "2", "--d", "8"), m=2, d=8, bounds=Bounds.unit(8), timeout=10.0
    )
    with ExternalProblem(spec, name="mock-line") as problem:
        config = RunConfig(
            n_init=30, max_fes=50, seed=0,
            strategy=StrategyParams(pop_size=20, hv_generations=8, local_generations=3),
            de_pop_size=20, de_generations=10,
        )
        result = run(problem, config)
    on_line = float(np.abs(result.front_F.sum(axis=1) - 1.0).max())
    spread = float(result.front_F[:, 0].max() - result.front_F[:, 0].min())
    ok_run = len(result.archive) == 50 and on_line < 1e-12 and spread > 0.8

    with pytest.raises(EvalTimeout):
        slow = ExternalEvaluatorSpec(
            command=mock + ("--sleep", "5", "--d", "8"), m=2, d=8,
            bounds=Bounds.unit(8), timeout=0.3,
        )
        with ExternalEvaluator(slow) as ev:
            ev.evaluate(1, np.full(8, 0.5))
    with pytest.raises(ProtocolError):
        bad = ExternalEvaluatorSpec(
            command=mock + ("--bad-arity", "--d", "8"), m=2, d=8, bounds=Bounds.unit(8),
            timeout=10.0,
        )
        with ExternalEvaluator(bad) as ev:
            ev.evaluate(1, np.full(8, 0.5))
    report(
        10,
        ok_run,
        f"50-FE mock run: front on f1+f2=1 within {on_line:.1e}, f1 spread {spread:.2f}; "
        "timeout and malformed replies raise their designated errors",
    )
