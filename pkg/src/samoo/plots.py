"""Figure rendering for experiment reports.

Renders per-job convergence curves and final-front scatter plots as PNG
files next to the CSV exports. The CSV/NDJSON files remain the
authoritative record; figures are a convenience view of the same data.
"""

from __future__ import annotations

import json
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .harness import _job_dirs, read_trace, trace_front, write_summary
from .problems import UnsupportedProblem, make_problem

__all__ = ["render_job_figures", "render_report"]


def _load_series(job_dir: Path) -> list[list[dict]]:
    return [read_trace(p) for p in sorted(job_dir.glob("run_[0-9][0-9][0-9].ndjson"))]


def render_job_figures(job_dir, out_dir) -> list[Path]:
    """Write convergence and front figures for one job; returns the paths."""
    job_dir = Path(job_dir)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    meta = json.loads((job_dir / "job.json").read_text())
    traces = [t for t in _load_series(job_dir) if t]
    written: list[Path] = []
    if not traces:
        return written

    has_igd = any(r.get("igd") is not None for r in traces[0])
    has_hv = any(r.get("hv") is not None for r in traces[0])
    panels = [name for name, present in (("igd", has_igd), ("hv", has_hv)) if present]
    if panels:
        fig, axes = plt.subplots(1, len(panels), figsize=(5.5 * len(panels), 4.0), squeeze=False)
        for ax, metric in zip(axes[0], panels):
            curves = []
            for trace in traces:
                fe = [r["fe"] for r in trace if r.get(metric) is not None]
                val = [r[metric] for r in trace if r.get(metric) is not None]
                if fe:
                    ax.plot(fe, val, color="steelblue", alpha=0.35, linewidth=0.8)
                    curves.append((fe, val))
            if curves:
                common = min(len(fe) for fe, _ in curves)
                med = np.median([val[:common] for _, val in curves], axis=0)
                ax.plot(curves[0][0][:common], med, color="crimson", linewidth=1.8, label="median")
                ax.legend(frameon=False)
            ax.set_xlabel("function evaluations")
            ax.set_ylabel(metric.upper())
            if metric == "igd":
                ax.set_yscale("log")
            ax.set_title(f"{meta['id']}: {metric.upper()}")
        fig.tight_layout()
        path = out_dir / f"{meta['id']}_convergence.png"
        fig.savefig(path, dpi=150)
        plt.close(fig)
        written.append(path)

    m = int(meta["problem"].get("m", 2))
    if m in (2, 3):
        fig = plt.figure(figsize=(5.0, 4.5))
        ax = fig.add_subplot(111, projection="3d" if m == 3 else None)
        try:
            problem = make_problem(
                meta["problem"]["name"], m=m, d=int(meta["problem"].get("d", 30))
            )
            ref = problem.reference_front()
            if m == 2:
                order = np.argsort(ref[:, 0])
                ax.plot(ref[order, 0], ref[order, 1], ".", color="0.8", markersize=2,
                        label="true front")
            else:
                ax.scatter(ref[:, 0], ref[:, 1], ref[:, 2], color="0.85", s=2, label="true front")
        except (UnsupportedProblem, ValueError, KeyError):
            pass
        for trace_path in sorted(job_dir.glob("run_[0-9][0-9][0-9].ndjson")):
            _, front_f = trace_front(trace_path)
            if m == 2:
                ax.scatter(front_f[:, 0], front_f[:, 1], s=14, alpha=0.7)
            else:
                ax.scatter(front_f[:, 0], front_f[:, 1], front_f[:, 2], s=14, alpha=0.7)
        ax.set_xlabel("f1")
        ax.set_ylabel("f2")
        if m == 3:
            ax.set_zlabel("f3")
        ax.set_title(f"{meta['id']}: final non-dominated sets")
        if ax.get_legend_handles_labels()[0]:
            ax.legend(frameon=False)
        fig.tight_layout()
        path = out_dir / f"{meta['id']}_front.png"
        fig.savefig(path, dpi=150)
        plt.close(fig)
        written.append(path)
    return written


def render_report(output_dir, out_dir=None) -> list[Path]:
    """Refresh the CSV tables and render figures for every job in a directory."""
    output_dir = Path(output_dir)
    out_dir = Path(out_dir) if out_dir is not None else output_dir / "figures"
    write_summary(output_dir)
    written: list[Path] = []
    for job_dir in _job_dirs(output_dir):
        written.extend(render_job_figures(job_dir, out_dir))
    return written
