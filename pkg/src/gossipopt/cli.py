"""Experiment runner CLI.

Subcommands:
  run       execute a JSON experiment config: build the graph, validate the
            Laplacian, solve once per configured algorithm, write one trace
            CSV per solver plus summary.json (and convergence figures unless
            --no-plots is given)
  spectrum  print the spectral summary and Chebyshev parameters of a graph
  plot      re-render convergence figures from an existing run directory
  gen-data  emit a synthetic classification dataset as LIBSVM text

Exit codes: 0 success, 1 validation error, 2 I/O error.

Config schema (JSON, ``"schema": 1``):
  seed            global seed, default for all sub-seeds
  graph           topology descriptor (see topology.build_graph)
  objective       {kind: quadratic|logistic, d, reg, samples_per_node or
                   dataset_path, seed, scale_range: [lo, hi] for quadratic}
  solvers         list of {algorithm, max_iters, eps, record_every}
  reference_tol   gradient-norm tolerance of the reference solve
  output_dir      where traces, summary.json and figures are written
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import asdict
from pathlib import Path

import numpy as np

from . import dataio, diagnostics, plots, solver, topology
from .gossip import chebyshev_params
from .oracle import LogisticOracle, Oracle, QuadraticOracle
from .spectral import eigendecompose, spectral_summary

__all__ = ["main", "run_experiment", "spectrum_report"]


class ConfigError(ValueError):
    pass


def _require(cond: bool, message: str) -> None:
    if not cond:
        raise ConfigError(message)


def load_config(path: str | Path) -> dict:
    with open(path, encoding="utf-8") as fh:
        cfg = json.load(fh)
    _require(isinstance(cfg, dict), "config must be a JSON object")
    _require(cfg.get("schema") == 1, "config must declare \"schema\": 1")
    for key in ("graph", "objective", "solvers", "output_dir"):
        _require(key in cfg, f"config is missing {key!r}")
    _require(isinstance(cfg["solvers"], list) and cfg["solvers"], "solvers must be a non-empty list")
    for entry in cfg["solvers"]:
        algo = entry.get("algorithm")
        _require(algo in solver.ALGORITHMS, f"unknown algorithm {algo!r}")
        _require(float(entry.get("eps", 0.0)) > 0.0, f"{algo}: eps must be > 0")
        _require(int(entry.get("max_iters", -1)) >= 0, f"{algo}: max_iters must be >= 0")
        _require(int(entry.get("record_every", 1)) >= 1, f"{algo}: record_every must be >= 1")
    return cfg


def _build_objective(obj: dict, n: int, default_seed: int) -> Oracle:
    kind = obj.get("kind")
    seed = int(obj.get("seed", default_seed))
    d = int(obj.get("d", 0))
    if kind == "quadratic":
        _require(d >= 1, "quadratic objective needs d >= 1")
        rng = np.random.default_rng(seed)
        targets = rng.standard_normal((n, d))
        lo, hi = obj.get("scale_range", [1.0, 1.0])
        _require(0 < lo <= hi, "scale_range must satisfy 0 < lo <= hi")
        scales = np.geomspace(lo, hi, n) if hi > lo else float(lo)
        return QuadraticOracle(targets, scales)
    if kind == "logistic":
        reg = float(obj.get("reg", 0.0))
        _require(reg > 0.0, "logistic objective needs reg > 0")
        if "dataset_path" in obj:
            with open(obj["dataset_path"], encoding="utf-8") as fh:
                ds = dataio.parse_libsvm(fh)
        else:
            spn = int(obj.get("samples_per_node", 0))
            _require(spn >= 1, "logistic objective needs samples_per_node or dataset_path")
            _require(d >= 1, "synthetic logistic objective needs d >= 1")
            ds = dataio.synth_classification(n * spn, d, seed)
        shards = dataio.partition(ds, n, seed)
        return LogisticOracle(shards.features, shards.labels, reg)
    raise ConfigError(f"unknown objective kind: {kind!r}")


def run_experiment(cfg: dict, make_plots: bool = True) -> dict:
    """Execute one experiment config; returns the summary dictionary."""
    global_seed = int(cfg.get("seed", 0))
    graph_spec = dict(cfg["graph"])
    if graph_spec.get("kind") == "erdos_renyi":
        graph_spec.setdefault("seed", global_seed)
    g = topology.build_graph(graph_spec)
    _require(g.is_connected(), "graph is not connected")
    w = topology.laplacian(g)
    report = topology.validate_gossip(w, g)
    _require(report.passed, f"gossip validation failed: {report}")
    spectrum = eigendecompose(w)
    summary_spec = spectral_summary(spectrum)

    base_oracle = _build_objective(cfg["objective"], g.n, global_seed)
    reference = diagnostics.reference_solution(base_oracle, tol=float(cfg.get("reference_tol", 1e-12)))

    out_dir = Path(cfg["output_dir"])
    out_dir.mkdir(parents=True, exist_ok=True)

    summary: dict = {
        "schema": 1,
        "seed": global_seed,
        "spectral": asdict(summary_spec),
        "solvers": {},
    }
    traces: dict[str, dataio.Trace] = {}
    for entry in cfg["solvers"]:
        algo = entry["algorithm"]
        oracle = base_oracle.clone()  # fresh counter per solver
        trace = solver.run(
            algo,
            oracle,
            w,
            spectrum,
            eps=float(entry["eps"]),
            max_iters=int(entry["max_iters"]),
            reference=reference,
            record_every=int(entry.get("record_every", 1)),
        )
        traces[algo] = trace
        csv_path = out_dir / f"{algo}.csv"
        with open(csv_path, "w", encoding="utf-8") as fh:
            dataio.write_trace(trace, fh)
        final = trace.records[-1]
        solver_summary = {
            "final_sq_dist": final.sq_dist,
            "iterations": trace.meta["iterations"],
            "grad_evals": trace.meta["grad_evals"],
            "comm_rounds": trace.meta["comm_rounds"],
            "converged": trace.meta["converged"],
            "aborted": trace.meta["aborted"],
        }
        try:
            fit = diagnostics.empirical_rate(trace, tail_fraction=0.5, x_axis="iter")
            solver_summary["rate_per_iteration"] = fit.rate
            solver_summary["rate_r_squared"] = fit.r_squared
        except ValueError:
            solver_summary["rate_per_iteration"] = None
            solver_summary["rate_r_squared"] = None
        summary["solvers"][algo] = solver_summary

    with open(out_dir / "summary.json", "w", encoding="utf-8") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")
    if make_plots:
        plots.render_convergence(traces, out_dir)
    return summary


def spectrum_report(graph_spec: dict) -> dict:
    """Spectral and Chebyshev quantities of a topology descriptor."""
    g = topology.build_graph(graph_spec)
    s = spectral_summary(eigendecompose(topology.laplacian(g)))
    cheb = chebyshev_params(s)
    return {
        "n": g.n,
        "edges": len(g.edges),
        "lambda_max": s.lambda_max,
        "lambda_min_plus": s.lambda_min_plus,
        "chi": s.chi,
        "chebyshev": {
            "T": cheb.T,
            "c1": cheb.c1,
            "c2": cheb.c2,
            "c3": cheb.c3,
            "chi_eff": cheb.chi_eff,
            "degenerate": cheb.degenerate,
        },
    }


def _cmd_run(args: argparse.Namespace) -> int:
    cfg = load_config(args.config)
    summary = run_experiment(cfg, make_plots=not args.no_plots)
    print(json.dumps(summary, indent=2, sort_keys=True))
    return 0


def _cmd_spectrum(args: argparse.Namespace) -> int:
    spec = json.loads(args.graph)
    print(json.dumps(spectrum_report(spec), indent=2, sort_keys=True))
    return 0


def _cmd_plot(args: argparse.Namespace) -> int:
    traces = plots.load_run_traces(args.run_dir)
    out_dir = args.out_dir if args.out_dir else args.run_dir
    for path in plots.render_convergence(traces, out_dir):
        print(path)
    return 0


def _cmd_gen_data(args: argparse.Namespace) -> int:
    if args.kind != "synth":
        raise ConfigError(f"unknown dataset kind: {args.kind!r}")
    ds = dataio.synth_classification(args.n, args.d, args.seed)
    with open(args.out, "w", encoding="utf-8") as fh:
        dataio.serialize_libsvm(ds, fh)
    print(f"wrote {len(ds.samples)} samples to {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gossipopt", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run an experiment config")
    p_run.add_argument("--config", required=True, help="path to the JSON config")
    p_run.add_argument("--no-plots", action="store_true", help="skip figure rendering")
    p_run.set_defaults(func=_cmd_run)

    p_spec = sub.add_parser("spectrum", help="print spectral summary of a graph")
    p_spec.add_argument("--graph", required=True, help="topology descriptor as JSON text")
    p_spec.set_defaults(func=_cmd_spectrum)

    p_plot = sub.add_parser("plot", help="render figures from an existing run directory")
    p_plot.add_argument("--run-dir", required=True)
    p_plot.add_argument("--out-dir", default=None)
    p_plot.set_defaults(func=_cmd_plot)

    p_gen = sub.add_parser("gen-data", help="generate a synthetic LIBSVM dataset")
    p_gen.add_argument("--kind", default="synth")
    p_gen.add_argument("--n", type=int, required=True)
    p_gen.add_argument("--d", type=int, required=True)
    p_gen.add_argument("--seed", type=int, required=True)
    p_gen.add_argument("--out", required=True)
    p_gen.set_defaults(func=_cmd_gen_data)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, RuntimeError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
