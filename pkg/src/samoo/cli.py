"""Command-line interface for the experiment harness.

Subcommands: run a configured study, recompute statistics, compare two
output directories with the signed-rank test, export a trace's final
front, and render report figures. Exit codes: 0 on success, 1 for
configuration errors, 2 when some runs failed.
"""

from __future__ import annotations

import argparse
import sys
import time
from pathlib import Path

from . import harness

__all__ = ["main", "main_entry"]


def _cmd_run(args) -> int:
    try:
        config = harness.load_config(args.config)
        job_filter = args.jobs.split(",") if args.jobs else None
        t0 = time.perf_counter()
        report = harness.run_experiment(
            config,
            output_dir=args.output,
            n_runs=args.runs,
            base_seed=args.seed,
            job_filter=job_filter,
        )
    except harness.ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 1
    print(f"completed {report.completed} run(s) in {time.perf_counter() - t0:.1f}s "
          f"-> {report.output_dir}")
    if report.failures:
        print(f"{len(report.failures)} run(s) failed:", file=sys.stderr)
        for f in report.failures:
            print(f"  {f['job']} run {f['run']}: {f['error']}", file=sys.stderr)
        return 2
    return 0


def _cmd_stats(args) -> int:
    out = Path(args.output_dir)
    if not out.is_dir():
        print(f"configuration error: {out} is not a directory", file=sys.stderr)
        return 1
    summary = harness.write_summary(out)
    sys.stdout.write(harness.summary_csv(summary))
    return 0


def _cmd_compare(args) -> int:
    rows = harness.compare_dirs(args.dir_a, args.dir_b, alpha=args.alpha)
    print("job,metric,n,p_value,verdict")
    tally = {v: 0 for v in (harness.VERDICT_BETTER, harness.VERDICT_WORSE,
                            harness.VERDICT_SIMILAR)}
    for r in rows:
        tally[r["verdict"]] += 1
        print(f"{r['job']},{r['metric']},{r['n']},{r['p_value']!r},{r['verdict']}")
    print(
        f"# {args.dir_a} vs {args.dir_b}: "
        f"{tally[harness.VERDICT_BETTER]}{harness.VERDICT_BETTER} / "
        f"{tally[harness.VERDICT_WORSE]}{harness.VERDICT_WORSE} / "
        f"{tally[harness.VERDICT_SIMILAR]}{harness.VERDICT_SIMILAR}"
    )
    return 0


def _cmd_front(args) -> int:
    try:
        X, F = harness.trace_front(args.trace)
    except (OSError, ValueError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 1
    header = [f"x{i + 1}" for i in range(X.shape[1])] + [f"f{j + 1}" for j in range(F.shape[1])]
    lines = [",".join(header)]
    for xi, fi in zip(X, F):
        lines.append(",".join(repr(float(v)) for v in list(xi) + list(fi)))
    Path(args.out).write_text("\n".join(lines) + "\n")
    print(f"wrote {X.shape[0]} non-dominated point(s) to {args.out}")
    return 0


def _cmd_report(args) -> int:
    from . import plots  # deferred: pulls in matplotlib

    out = Path(args.output_dir)
    if not out.is_dir():
        print(f"configuration error: {out} is not a directory", file=sys.stderr)
        return 1
    written = plots.render_report(out, out_dir=args.out)
    for path in written:
        print(f"wrote {path}")
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="samoo", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run every job in a configuration file")
    p_run.add_argument("config", help="path to the JSON experiment configuration")
    p_run.add_argument("--output", help="override the configured output directory")
    p_run.add_argument("--seed", type=int, help="override the configured base seed")
    p_run.add_argument("--runs", type=int, help="override the configured runs per job")
    p_run.add_argument("--jobs", help="comma-separated job ids to run (default: all)")
    p_run.set_defaults(func=_cmd_run)

    p_stats = sub.add_parser("stats", help="recompute summary tables from stored traces")
    p_stats.add_argument("output_dir")
    p_stats.set_defaults(func=_cmd_stats)

    p_cmp = sub.add_parser("compare", help="signed-rank comparison of two output directories")
    p_cmp.add_argument("dir_a")
    p_cmp.add_argument("dir_b")
    p_cmp.add_argument("--alpha", type=float, default=0.05)
    p_cmp.set_defaults(func=_cmd_compare)

    p_front = sub.add_parser("front", help="export a trace's final non-dominated set as CSV")
    p_front.add_argument("trace")
    p_front.add_argument("--out", required=True, help="destination CSV path")
    p_front.set_defaults(func=_cmd_front)

    p_report = sub.add_parser("report", help="refresh tables and render figures")
    p_report.add_argument("output_dir")
    p_report.add_argument("--out", help="figure directory (default: <output_dir>/figures)")
    p_report.set_defaults(func=_cmd_report)

    args = parser.parse_args(argv)
    return args.func(args)


def main_entry():
    sys.exit(main())


if __name__ == "__main__":
    main_entry()
