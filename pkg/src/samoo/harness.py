"""Batch experiment harness: JSON-configured multi-seed studies with
machine-readable exports and rank statistics.

Per run, one newline-delimited JSON trace (a record per evaluation); per
output directory, a fixed-header ``summary.csv`` and a long-format
``convergence.csv``. Summaries are always recomputed from the trace files
on disk, so re-running ``stats`` reproduces ``run``'s tables byte for
byte. Timing is reported on stdout only, keeping every exported file
deterministic for a given configuration.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .core import Bounds
from .external import ExternalEvaluatorSpec, ExternalProblem
from .optimizer import EvaluationError, RunConfig, RunResult, run
from .problems import UnsupportedProblem, make_problem
from .strategies import StrategyParams

__all__ = [
    "ConfigError",
    "JobSpec",
    "ExperimentConfig",
    "load_config",
    "run_experiment",
    "summarize",
    "write_summary",
    "convergence_table",
    "WilcoxonResult",
    "wilcoxon_signed_rank",
    "aggregate_stats",
    "compare_dirs",
    "read_trace",
    "trace_front",
]

SUMMARY_HEADER = (
    "job,problem,m,d,variant,runs,failures,"
    "igd_mean,igd_median,igd_std,hv_mean,hv_median,hv_std,best"
)
CONVERGENCE_HEADER = "job,run,fe,igd,igd_best,hv"

VERDICT_BETTER = "+"
VERDICT_WORSE = "-"
VERDICT_SIMILAR = "≈"


class ConfigError(ValueError):
    """A configuration file could not be parsed; message names the field."""


@dataclass(frozen=True)
class JobSpec:
    id: str
    problem: dict
    variant: str = "full"
    max_fes: int = 300
    n_init: int | None = None
    hv_reference: tuple[float, ...] | None = None
    strategy: dict = field(default_factory=dict)
    run_options: dict = field(default_factory=dict)


@dataclass(frozen=True)
class ExperimentConfig:
    output_dir: str
    jobs: tuple[JobSpec, ...]
    n_runs: int = 20
    base_seed: int = 0
    reference_front_size: int | None = None


def _field(mapping: dict, key: str, kind, where: str, default=..., optional: bool = False):
    if key not in mapping:
        if optional:
            return default if default is not ... else None
        raise ConfigError(f"{where}: missing required field '{key}'")
    value = mapping[key]
    try:
        return kind(value)
    except (TypeError, ValueError):
        raise ConfigError(f"{where}: field '{key}' has invalid value {value!r}") from None


def load_config(path) -> ExperimentConfig:
    """Parse and validate an experiment configuration file."""
    path = Path(path)
    try:
        raw = json.loads(path.read_text())
    except FileNotFoundError:
        raise ConfigError(f"{path}: no such file") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    if not isinstance(raw, dict):
        raise ConfigError(f"{path}: top level must be a JSON object")
    jobs_raw = raw.get("jobs", [])
    if not isinstance(jobs_raw, list):
        raise ConfigError(f"{path}: 'jobs' must be a list")
    jobs = []
    seen = set()
    for i, job in enumerate(jobs_raw):
        where = f"{path}: jobs[{i}]"
        if not isinstance(job, dict):
            raise ConfigError(f"{where}: must be an object")
        job_id = _field(job, "id", str, where)
        if job_id in seen:
            raise ConfigError(f"{where}: duplicate job id '{job_id}'")
        seen.add(job_id)
        problem = job.get("problem")
        if not isinstance(problem, dict) or "name" not in problem:
            raise ConfigError(f"{where}: 'problem' must be an object with a 'name'")
        hv_ref = job.get("hv_reference")
        if hv_ref is not None:
            try:
                hv_ref = tuple(float(v) for v in hv_ref)
            except (TypeError, ValueError):
                raise ConfigError(f"{where}: 'hv_reference' must be a list of numbers") from None
        strategy = job.get("strategy", {})
        if not isinstance(strategy, dict):
            raise ConfigError(f"{where}: 'strategy' must be an object")
        run_options = {
            k: job[k]
            for k in ("bootstrap", "ref_scale", "ref_shift", "de_pop_size",
                      "de_generations", "de_crossover_rate")
            if k in job
        }
        jobs.append(
            JobSpec(
                id=job_id,
                problem=dict(problem),
                variant=_field(job, "variant", str, where, default="full", optional=True),
                max_fes=_field(job, "max_fes", int, where, default=300, optional=True),
                n_init=_field(job, "n_init", int, where, default=None, optional=True),
                hv_reference=hv_ref,
                strategy=dict(strategy),
                run_options=run_options,
            )
        )
    return ExperimentConfig(
        output_dir=_field(raw, "output_dir", str, str(path), default="results", optional=True),
        jobs=tuple(jobs),
        n_runs=_field(raw, "n_runs", int, str(path), default=20, optional=True),
        base_seed=_field(raw, "base_seed", int, str(path), default=0, optional=True),
        reference_front_size=_field(raw, "reference_front_size", int, str(path),
                                    default=None, optional=True),
    )


def _build_problem(spec: dict, where: str = "problem"):
    name = spec["name"].lower()
    if name == "external":
        for key in ("command", "m", "d"):
            if key not in spec:
                raise ConfigError(f"{where}: external problem needs '{key}'")
        d = int(spec["d"])
        lower = spec.get("lower", 0.0)
        upper = spec.get("upper", 1.0)
        lower = np.full(d, float(lower)) if np.isscalar(lower) else np.asarray(lower, dtype=float)
        upper = np.full(d, float(upper)) if np.isscalar(upper) else np.asarray(upper, dtype=float)
        ext = ExternalEvaluatorSpec(
            command=tuple(str(c) for c in spec["command"]),
            m=int(spec["m"]),
            d=d,
            bounds=Bounds(lower, upper),
            timeout=float(spec.get("timeout", 30.0)),
            senses=tuple(spec.get("senses", ())),
        )
        return ExternalProblem(ext)
    try:
        return make_problem(name, m=int(spec.get("m", 2)), d=int(spec.get("d", 30)))
    except ValueError as exc:
        raise ConfigError(f"{where}: {exc}") from None


def _run_config(job: JobSpec, seed: int) -> RunConfig:
    try:
        strategy = StrategyParams(**job.strategy)
    except TypeError as exc:
        raise ConfigError(f"job '{job.id}': bad strategy field ({exc})") from None
    return RunConfig(
        n_init=job.n_init,
        max_fes=job.max_fes,
        strategy=strategy,
        variant=job.variant,
        seed=seed,
        **job.run_options,
    )


def _json_line(record: dict) -> str:
    return json.dumps(record, sort_keys=True, separators=(",", ":"))


def write_trace(path: Path, result: RunResult):
    lines = []
    for rec in result.trace:
        lines.append(
            _json_line(
                {
                    "fe": rec.fe,
                    "tag": rec.tag,
                    "x": list(rec.x),
                    "f": list(rec.f),
                    "score": rec.score,
                    "igd": rec.igd,
                    "igd_best": rec.igd_best,
                    "hv": rec.hv,
                }
            )
        )
    path.write_text("\n".join(lines) + ("\n" if lines else ""))


def read_trace(path) -> list[dict]:
    records = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if line:
                records.append(json.loads(line))
    return records


@dataclass
class ExperimentReport:
    output_dir: Path
    completed: int
    failures: list[dict]


def run_experiment(
    config: ExperimentConfig,
    output_dir: str | None = None,
    n_runs: int | None = None,
    base_seed: int | None = None,
    job_filter: list[str] | None = None,
    log=print,
) -> ExperimentReport:
    """Execute every (job, run) pair and write traces plus summary tables.

    A failed run is recorded (partial trace kept under a .partial.ndjson
    name) and does not stop the remaining runs.
    """
    out = Path(output_dir or config.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    runs = n_runs if n_runs is not None else config.n_runs
    seed0 = base_seed if base_seed is not None else config.base_seed
    jobs = [j for j in config.jobs if job_filter is None or j.id in job_filter]
    if job_filter is not None:
        missing = set(job_filter) - {j.id for j in jobs}
        if missing:
            raise ConfigError(f"unknown job ids: {', '.join(sorted(missing))}")

    failures: list[dict] = []
    completed = 0
    for job in jobs:
        job_dir = out / job.id
        job_dir.mkdir(parents=True, exist_ok=True)
        meta = {
            "id": job.id,
            "problem": job.problem,
            "variant": job.variant,
            "max_fes": job.max_fes,
            "n_init": job.n_init,
            "hv_reference": list(job.hv_reference) if job.hv_reference else None,
            "strategy": job.strategy,
            "run_options": job.run_options,
            "n_runs": runs,
            "base_seed": seed0,
            "reference_front_size": config.reference_front_size,
        }
        (job_dir / "job.json").write_text(json.dumps(meta, sort_keys=True, indent=2) + "\n")
        for run_index in range(runs):
            problem = _build_problem(job.problem, where=f"job '{job.id}'")
            reference_front = None
            try:
                reference_front = problem.reference_front(config.reference_front_size)
            except UnsupportedProblem:
                pass
            seed = seed0 + run_index
            trace_path = job_dir / f"run_{run_index:03d}.ndjson"
            try:
                result = run(
                    problem,
                    _run_config(job, seed),
                    reference_front=reference_front,
                    hv_ref_point=job.hv_reference,
                )
                write_trace(trace_path, result)
                completed += 1
                last = result.trace[-1]
                log(
                    f"[{job.id}] run {run_index}: {len(result.archive)} evaluations"
                    + (f", final igd {last.igd:.6g}" if last.igd is not None else "")
                    + (f", final hv {last.hv:.6g}" if last.hv is not None else "")
                    + f", {sum(result.wall_clock.values()):.1f}s"
                )
            except EvaluationError as exc:
                failures.append({"job": job.id, "run": run_index, "fe_index": exc.fe_index,
                                 "error": str(exc)})
                if exc.partial is not None and exc.partial.trace:
                    write_trace(job_dir / f"run_{run_index:03d}.partial.ndjson", exc.partial)
                log(f"[{job.id}] run {run_index}: FAILED at evaluation {exc.fe_index}: {exc}")
            finally:
                if hasattr(problem, "close"):
                    problem.close()
        if failures:
            rows = [_json_line(f) for f in failures if f["job"] == job.id]
            if rows:
                (job_dir / "failures.ndjson").write_text("\n".join(rows) + "\n")
    write_summary(out)
    return ExperimentReport(output_dir=out, completed=completed, failures=failures)


# ---------------------------------------------------------------------------
# summaries


def _fmt(value) -> str:
    if value is None:
        return ""
    return repr(float(value))


def _stats(values: list[float]) -> tuple[float, float, float] | None:
    if not values:
        return None
    arr = np.asarray(values, dtype=float)
    std = float(arr.std(ddof=1)) if arr.size > 1 else 0.0
    return float(arr.mean()), float(np.median(arr)), std


@dataclass(frozen=True)
class JobStats:
    job: str
    problem: str
    m: int
    d: int
    variant: str
    runs: int
    failures: int
    igd: tuple[float, float, float] | None  # mean, median, std
    hv: tuple[float, float, float] | None
    best: bool = False


@dataclass(frozen=True)
class StatsSummary:
    rows: tuple[JobStats, ...]


def aggregate_stats(per_job: dict[str, dict]) -> StatsSummary:
    """Mean/median/sample-std of final indicators, best job flagged per problem.

    ``per_job`` maps job id to {"meta": job.json dict, "igd": [...],
    "hv": [...], "failures": int}.
    """
    rows = []
    for job_id in sorted(per_job):
        info = per_job[job_id]
        meta = info["meta"]
        problem = meta["problem"]
        rows.append(
            JobStats(
                job=job_id,
                problem=str(problem.get("name", "?")),
                m=int(problem.get("m", 0)),
                d=int(problem.get("d", 0)),
                variant=str(meta.get("variant", "full")),
                runs=len(info["igd"]) or len(info["hv"]),
                failures=int(info.get("failures", 0)),
                igd=_stats(info["igd"]),
                hv=_stats(info["hv"]),
            )
        )
    # flag the best job within each (problem, m, d) group
    flagged = []
    by_group: dict[tuple, list[JobStats]] = {}
    for row in rows:
        by_group.setdefault((row.problem, row.m, row.d), []).append(row)
    best_ids = set()
    for group in by_group.values():
        with_igd = [r for r in group if r.igd is not None]
        if with_igd:
            best_ids.add(min(with_igd, key=lambda r: r.igd[0]).job)
        else:
            with_hv = [r for r in group if r.hv is not None]
            if with_hv:
                best_ids.add(max(with_hv, key=lambda r: r.hv[0]).job)
    for row in rows:
        flagged.append(
            JobStats(**{**row.__dict__, "best": row.job in best_ids})
        )
    return StatsSummary(rows=tuple(flagged))


def _job_dirs(output_dir: Path) -> list[Path]:
    return sorted(p for p in output_dir.iterdir() if p.is_dir() and (p / "job.json").exists())


def _collect(output_dir: Path) -> dict[str, dict]:
    per_job: dict[str, dict] = {}
    for job_dir in _job_dirs(output_dir):
        meta = json.loads((job_dir / "job.json").read_text())
        igd_vals: list[float] = []
        hv_vals: list[float] = []
        for trace_path in sorted(job_dir.glob("run_[0-9][0-9][0-9].ndjson")):
            records = read_trace(trace_path)
            if not records:
                continue
            last = records[-1]
            if last.get("igd") is not None:
                igd_vals.append(float(last["igd"]))
            if last.get("hv") is not None:
                hv_vals.append(float(last["hv"]))
        n_failures = 0
        fail_path = job_dir / "failures.ndjson"
        if fail_path.exists():
            n_failures = sum(1 for line in fail_path.read_text().splitlines() if line.strip())
        per_job[meta["id"]] = {"meta": meta, "igd": igd_vals, "hv": hv_vals,
                               "failures": n_failures}
    return per_job


def summarize(output_dir) -> StatsSummary:
    """Recompute the per-job summary from the trace files on disk."""
    return aggregate_stats(_collect(Path(output_dir)))


def summary_csv(summary: StatsSummary) -> str:
    lines = [SUMMARY_HEADER]
    for r in summary.rows:
        igd = r.igd or (None, None, None)
        hv = r.hv or (None, None, None)
        lines.append(
            ",".join(
                [
                    r.job, r.problem, str(r.m), str(r.d), r.variant,
                    str(r.runs), str(r.failures),
                    _fmt(igd[0]), _fmt(igd[1]), _fmt(igd[2]),
                    _fmt(hv[0]), _fmt(hv[1]), _fmt(hv[2]),
                    "1" if r.best else "0",
                ]
            )
        )
    return "\n".join(lines) + "\n"


def convergence_table(output_dir) -> str:
    """Long-format per-evaluation indicator series for every stored run."""
    lines = [CONVERGENCE_HEADER]
    for job_dir in _job_dirs(Path(output_dir)):
        job_id = json.loads((job_dir / "job.json").read_text())["id"]
        for trace_path in sorted(job_dir.glob("run_[0-9][0-9][0-9].ndjson")):
            run_index = int(trace_path.stem.split("_")[1])
            for rec in read_trace(trace_path):
                lines.append(
                    ",".join(
                        [
                            job_id, str(run_index), str(rec["fe"]),
                            _fmt(rec.get("igd")), _fmt(rec.get("igd_best")),
                            _fmt(rec.get("hv")),
                        ]
                    )
                )
    return "\n".join(lines) + "\n"


def write_summary(output_dir) -> StatsSummary:
    out = Path(output_dir)
    summary = summarize(out)
    (out / "summary.csv").write_text(summary_csv(summary))
    (out / "convergence.csv").write_text(convergence_table(out))
    return summary


# ---------------------------------------------------------------------------
# rank statistics


@dataclass(frozen=True)
class WilcoxonResult:
    verdict: str
    p_value: float
    n_effective: int
    flagged: bool = False  # too few nonzero differences for the test


def _average_ranks(values: np.ndarray) -> np.ndarray:
    order = np.argsort(values, kind="stable")
    ranks = np.empty(values.size)
    i = 0
    while i < values.size:
        j = i
        while j + 1 < values.size and values[order[j + 1]] == values[order[i]]:
            j += 1
        ranks[order[i : j + 1]] = 0.5 * (i + j) + 1.0
        i = j + 1
    return ranks


def _exact_cdf_le(doubled_ranks: np.ndarray, doubled_w: int) -> float:
    """P(W+ <= w) under random signs, by dynamic programming.

    Ranks are doubled so tied (half-integer) average ranks stay integral.
    """
    total = int(doubled_ranks.sum())
    counts = np.zeros(total + 1)
    counts[0] = 1.0
    for r in doubled_ranks:
        shifted = np.zeros_like(counts)
        shifted[r:] = counts[: counts.size - r]
        counts = counts + shifted
    w = min(doubled_w, total)
    return float(counts[: w + 1].sum() / 2.0 ** doubled_ranks.size)


def wilcoxon_signed_rank(a, b, alpha: float = 0.05) -> WilcoxonResult:
    """Two-sided paired signed-rank test with zero differences dropped.

    Exact distribution up to 25 nonzero differences, normal approximation
    with continuity and tie corrections above. The verdict is "+" when the
    first sample is significantly lower (better, minimization), "-" when
    higher, and the similarity mark otherwise; fewer than five nonzero
    differences always yield the similarity mark, flagged.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape or a.ndim != 1:
        raise ValueError("paired samples must be 1-D and of equal length")
    diff = a - b
    diff = diff[diff != 0.0]
    n = diff.size
    if n < 5:
        return WilcoxonResult(VERDICT_SIMILAR, 1.0, n, flagged=True)
    ranks = _average_ranks(np.abs(diff))
    w_plus = float(ranks[diff > 0].sum())
    w_minus = float(ranks[diff < 0].sum())
    w = min(w_plus, w_minus)
    if n <= 25:
        doubled = np.rint(2.0 * ranks).astype(int)
        p = min(1.0, 2.0 * _exact_cdf_le(doubled, int(round(2.0 * w))))
    else:
        mean = n * (n + 1) / 4.0
        _, tie_counts = np.unique(np.abs(diff), return_counts=True)
        tie_term = float(((tie_counts**3 - tie_counts).sum())) / 48.0
        sigma = math.sqrt(n * (n + 1) * (2 * n + 1) / 24.0 - tie_term)
        z = (w - mean + 0.5) / sigma
        p = min(1.0, 2.0 * 0.5 * math.erfc(-z / math.sqrt(2.0)))
    if p <= alpha:
        med = float(np.median(diff))
        if med == 0.0:
            med = w_plus - w_minus
        verdict = VERDICT_BETTER if med < 0 else VERDICT_WORSE
    else:
        verdict = VERDICT_SIMILAR
    return WilcoxonResult(verdict, p, n)


def compare_dirs(dir_a, dir_b, alpha: float = 0.05) -> list[dict]:
    """Per-job verdicts comparing runs in two output directories.

    Runs are paired by run index; final IGD is compared when both sides
    have it, final hypervolume otherwise.
    """
    a_jobs = _collect(Path(dir_a))
    b_jobs = _collect(Path(dir_b))
    rows = []
    for job_id in sorted(set(a_jobs) & set(b_jobs)):
        ja, jb = a_jobs[job_id], b_jobs[job_id]
        if ja["igd"] and jb["igd"]:
            metric, va, vb, better_low = "igd", ja["igd"], jb["igd"], True
        elif ja["hv"] and jb["hv"]:
            metric, va, vb, better_low = "hv", ja["hv"], jb["hv"], False
        else:
            continue
        n = min(len(va), len(vb))
        res = wilcoxon_signed_rank(va[:n], vb[:n], alpha=alpha)
        verdict = res.verdict
        if not better_low and verdict in (VERDICT_BETTER, VERDICT_WORSE):
            verdict = VERDICT_WORSE if verdict == VERDICT_BETTER else VERDICT_BETTER
        rows.append(
            {
                "job": job_id,
                "metric": metric,
                "n": res.n_effective,
                "p_value": res.p_value,
                "verdict": verdict,
                "flagged": res.flagged,
            }
        )
    return rows


def trace_front(trace_path) -> tuple[np.ndarray, np.ndarray]:
    """Final non-dominated set (X, F) reconstructed from one trace file."""
    from .core import nondominated_sort

    records = read_trace(trace_path)
    if not records:
        raise ValueError(f"{trace_path}: empty trace")
    X = np.array([r["x"] for r in records], dtype=float)
    F = np.array([r["f"] for r in records], dtype=float)
    front = nondominated_sort(F)[0]
    return X[front], F[front]
