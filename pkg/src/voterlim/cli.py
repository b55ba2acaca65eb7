"""Command-line front end: JSON configs in, CSV/JSON artifacts out.

Exit codes: 0 success, 2 config or validation problem, 3 size guard,
4 numerical non-convergence.  Failures leave a machine-readable
error.json in the output directory.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from ._version import __version__
from .dynamics import (
    CONSENSUS_EPS,
    average_initial,
    consensus_diameter,
    default_horizon,
    detect_consensus,
    make_initial,
    solve_continuum,
    solve_finite,
    write_trajectory,
)
from .errors import (
    DomainError,
    SizeLimitError,
    SolverConvergenceError,
    UnsupportedVariantError,
    ValidationError,
)
from .experiments import (
    ExperimentConfig,
    consensus_proximity,
    convergence_study,
    experiment_metadata,
    random_consensus_mc,
)
from .graphs import WeightedGraph, discretize_kernel, write_edge_list
from .kernels import make_kernel
from .structure import structure_report

OUT_DIR_ENV = "VOTERLIM_OUT"

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_SIZE = 3
EXIT_SOLVER = 4


def _write_json(path, payload) -> None:
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _load_config(path) -> dict:
    try:
        with open(path) as fh:
            data = json.load(fh)
    except FileNotFoundError as exc:
        raise ValidationError(f"config file not found: {path}") from exc
    except json.JSONDecodeError as exc:
        raise ValidationError(f"config file is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ValidationError("config must be a JSON object")
    return data


def _resolve_times(config, kernel):
    if "times" in config:
        times = np.asarray(config["times"], dtype=float)
        return times, float(times[-1]), "config"
    horizon = config.get("horizon")
    source = "config"
    if horizon is None:
        horizon, source = default_horizon(kernel)
    num_times = int(config.get("num_times", 201))
    return np.linspace(0.0, float(horizon), num_times), float(horizon), source


def _cmd_simulate(config, out_dir, threads) -> None:
    initial = make_initial(config["initial"])
    method = config.get("method", "expm")
    eps = float(config.get("eps", CONSENSUS_EPS))
    solver_opts = {}
    if "rk_tol" in config:
        solver_opts["rk_tol"] = float(config["rk_tol"])
    if "max_halvings" in config:
        solver_opts["max_halvings"] = int(config["max_halvings"])
    if "kernel" in config:
        kernel = make_kernel(config["kernel"])
        if "n" not in config:
            raise ValidationError("simulate with a kernel needs a resolution n")
        n = int(config["n"])
        times, horizon, source = _resolve_times(config, kernel)
        traj = solve_continuum(kernel, initial, n, times, method=method, **solver_opts)
    elif "graph" in config:
        gspec = config["graph"]
        if isinstance(gspec, dict) and "path" in gspec:
            with open(gspec["path"]) as fh:
                graph = WeightedGraph.from_json(fh.read())
        else:
            graph = WeightedGraph.from_json(json.dumps(gspec))
        n = graph.n
        times, horizon, source = _resolve_times(config, None)
        traj = solve_finite(
            graph, average_initial(initial, n), times, method=method, **solver_opts
        )
        traj.metadata["initial"] = initial.spec()
    else:
        raise ValidationError("simulate config needs a 'kernel' or a 'graph'")
    traj.metadata.update(
        {
            "library_version": __version__,
            "resolved": {
                "method": method,
                "n": n,
                "horizon": horizon,
                "horizon_source": source,
                "num_times": int(times.size),
                "eps": eps,
            },
            "summary": {
                "final_diameter": consensus_diameter(traj.states[-1]),
                "consensus_time": detect_consensus(traj, eps),
            },
        }
    )
    write_trajectory(
        traj,
        os.path.join(out_dir, "trajectory.csv"),
        os.path.join(out_dir, "trajectory_meta.json"),
    )


def _cmd_discretize(config, out_dir, threads) -> None:
    kernel = make_kernel(config["kernel"])
    n = int(config["n"])
    graph = discretize_kernel(kernel, n)
    with open(os.path.join(out_dir, "graph.json"), "w") as fh:
        fh.write(graph.to_json())
        fh.write("\n")
    if graph.is_simple():
        write_edge_list(graph, os.path.join(out_dir, "edges.csv"))
    _write_json(
        os.path.join(out_dir, "graph_meta.json"),
        {
            "kernel": kernel.spec(),
            "n": n,
            "simple": graph.is_simple(),
            "library_version": __version__,
        },
    )


def _cmd_structure(config, out_dir, threads) -> None:
    kernel = make_kernel(config["kernel"])
    initial = make_initial(config["initial"]) if "initial" in config else None
    report = structure_report(
        kernel,
        initial,
        zero_tol=float(config.get("zero_tol", 0.0)),
        prop_tol=float(config.get("prop_tol", 1e-10)),
    )
    _write_json(os.path.join(out_dir, "structure.json"), report)
    _write_json(
        os.path.join(out_dir, "structure_meta.json"),
        {
            "kernel": kernel.spec(),
            "initial": initial.spec() if initial is not None else None,
            "zero_tol": float(config.get("zero_tol", 0.0)),
            "prop_tol": float(config.get("prop_tol", 1e-10)),
            "library_version": __version__,
        },
    )


def _cmd_convergence(config, out_dir, threads) -> None:
    cfg = ExperimentConfig.from_dict(config)
    reference_n = config.get("reference_n")
    table = convergence_study(cfg, reference_n)
    table.write_csv(os.path.join(out_dir, "error_table.csv"))
    _write_json(
        os.path.join(out_dir, "convergence_meta.json"),
        experiment_metadata(cfg, reference=table.reference),
    )


def _cmd_proximity(config, out_dir, threads) -> None:
    cfg = ExperimentConfig.from_dict(config)
    report = consensus_proximity(cfg, config.get("reference_n"))
    with open(os.path.join(out_dir, "proximity.csv"), "w", newline="") as fh:
        fh.write(report.csv_text())
    _write_json(
        os.path.join(out_dir, "proximity_meta.json"),
        experiment_metadata(cfg, report=report.to_dict()),
    )


def _cmd_mc_random(config, out_dir, threads) -> None:
    cfg = ExperimentConfig.from_dict(config)
    result = random_consensus_mc(cfg, threads=threads)
    result.write_csv(os.path.join(out_dir, "mc.csv"))
    _write_json(
        os.path.join(out_dir, "mc_meta.json"),
        experiment_metadata(cfg, **result.diagnostics()),
    )


_HANDLERS = {
    "simulate": _cmd_simulate,
    "discretize": _cmd_discretize,
    "structure": _cmd_structure,
    "convergence": _cmd_convergence,
    "proximity": _cmd_proximity,
    "mc-random": _cmd_mc_random,
}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="voterlim",
        description="Voter dynamics on weighted graphs and graph limits.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _HANDLERS:
        cmd = sub.add_parser(name)
        cmd.add_argument("--config", required=True, help="path to the JSON config")
        cmd.add_argument(
            "--out",
            default=None,
            help=f"output directory (default: ${OUT_DIR_ENV} or the working directory)",
        )
        cmd.add_argument(
            "--threads", type=int, default=1, help="worker threads for trial loops"
        )
    return parser


def _fail(out_dir, exc, code: int) -> int:
    payload = {
        "error": {
            "type": type(exc).__name__,
            "message": str(exc),
            "exit_code": code,
        }
    }
    try:
        _write_json(os.path.join(out_dir, "error.json"), payload)
    except OSError:
        pass
    print(json.dumps(payload), file=sys.stderr)
    return code


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    out_dir = args.out or os.environ.get(OUT_DIR_ENV) or "."
    os.makedirs(out_dir, exist_ok=True)
    try:
        config = _load_config(args.config)
        _HANDLERS[args.command](config, out_dir, args.threads)
    except KeyError as exc:
        return _fail(out_dir, ValidationError(f"config missing field {exc}"), EXIT_CONFIG)
    except (ValidationError, DomainError, UnsupportedVariantError) as exc:
        return _fail(out_dir, exc, EXIT_CONFIG)
    except SizeLimitError as exc:
        return _fail(out_dir, exc, EXIT_SIZE)
    except SolverConvergenceError as exc:
        return _fail(out_dir, exc, EXIT_SOLVER)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
