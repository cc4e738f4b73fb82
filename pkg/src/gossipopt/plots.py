"""Convergence figures rendered from trace CSV files.

Plotting is a downstream view of the CSV contract: figures are rebuilt from
the written traces, never from in-memory run state, so `gossipopt plot` on
an existing output directory reproduces exactly what `run --plots` emitted.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .dataio import Trace, read_trace

__all__ = ["load_run_traces", "render_convergence"]

_AXES = [
    ("comm_rounds", "communication rounds"),
    ("grad_evals", "gradient computations"),
    ("iteration", "iterations"),
]


def load_run_traces(run_dir: str | Path) -> dict[str, Trace]:
    """Read every `<algorithm>.csv` trace in a run directory."""
    run_dir = Path(run_dir)
    traces = {}
    for csv_path in sorted(run_dir.glob("*.csv")):
        with open(csv_path, encoding="utf-8") as fh:
            traces[csv_path.stem] = read_trace(fh)
    if not traces:
        raise FileNotFoundError(f"no trace CSV files in {run_dir}")
    return traces


def render_convergence(traces: dict[str, Trace], out_dir: str | Path) -> list[Path]:
    """One semilog figure per counting axis, all algorithms overlaid."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for attr, label in _AXES:
        fig, ax = plt.subplots(figsize=(6.0, 4.0))
        for name in sorted(traces):
            recs = [r for r in traces[name].records if r.sq_dist > 0.0]
            if not recs:
                continue
            ax.semilogy(
                [getattr(r, attr) for r in recs],
                [r.sq_dist for r in recs],
                label=name,
                linewidth=1.4,
            )
        ax.set_xlabel(label)
        ax.set_ylabel("squared distance to solution")
        ax.grid(True, which="both", alpha=0.3)
        ax.legend()
        fig.tight_layout()
        path = out_dir / f"convergence_{attr}.png"
        fig.savefig(path, dpi=130)
        plt.close(fig)
        written.append(path)
    return written
