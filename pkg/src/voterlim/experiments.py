"""Reproducible experiment harnesses for the finite-to-continuum story.

Three studies: finite-to-continuum convergence, approximate consensus
over a measurement window, and Monte Carlo over random graphs sampled
from a graphon.  Every run is driven by one config, derives all
randomness from the base seed, and writes plot-ready CSV plus a metadata
JSON that echoes each resolved default.
"""

from __future__ import annotations

import csv
import io
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from ._version import __version__
from .dynamics import (
    CONSENSUS_EPS,
    BipartiteClosedForm,
    InitialCondition,
    SOLVER_METHODS,
    Trajectory,
    average_initial,
    consensus_diameter,
    default_horizon,
    exceptional_measure,
    make_initial,
    solve_continuum,
    solve_finite,
    step_exceedance_measure,
    step_l2_distance,
)
from .errors import ValidationError
from .graphs import RNG_ALGORITHM, sample_w_random
from .kernels import BipartiteKernel, Kernel, Partition, make_kernel

MC_MIN_TRIALS = 30


@dataclass
class ExperimentConfig:
    """Parameters shared by the experiment harnesses.

    `window` is the measurement window length after the consensus
    time, `eps` the consensus resolution and `c` the tolerated share of
    exceptional mass (the success cut-off is c squared).
    """

    kernel: Kernel
    initial: InitialCondition
    n_ladder: tuple[int, ...]
    horizon: float
    window: float = 1.0
    eps: float = CONSENSUS_EPS
    c: float = 0.1
    trials: int = 50
    base_seed: int = 0
    method: str = "expm"
    num_times: int = 201
    horizon_source: str = "config"

    def __post_init__(self):
        ladder = tuple(int(n) for n in self.n_ladder)
        if not ladder or any(n < 1 for n in ladder):
            raise ValidationError("n_ladder must list positive sizes")
        if any(b <= a for a, b in zip(ladder, ladder[1:])):
            raise ValidationError("n_ladder must be strictly increasing")
        self.n_ladder = ladder
        for name in ("horizon", "window", "eps", "c"):
            if getattr(self, name) <= 0.0:
                raise ValidationError(f"{name} must be positive")
        if self.trials < 1:
            raise ValidationError("trials must be at least 1")
        if self.num_times < 2:
            raise ValidationError("num_times must be at least 2")
        if self.method not in SOLVER_METHODS:
            raise ValidationError(f"method must be one of {SOLVER_METHODS}")

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        if not isinstance(data, dict):
            raise ValidationError("experiment config must be a JSON object")
        try:
            kernel = make_kernel(data["kernel"])
            initial = make_initial(data["initial"])
            ladder = data["n_ladder"]
        except KeyError as exc:
            raise ValidationError(f"experiment config missing field {exc}") from exc
        horizon = data.get("horizon")
        source = "config"
        if horizon is None:
            horizon, source = default_horizon(kernel)
        return cls(
            kernel=kernel,
            initial=initial,
            n_ladder=tuple(ladder),
            horizon=float(horizon),
            window=float(data.get("window", 1.0)),
            eps=float(data.get("eps", CONSENSUS_EPS)),
            c=float(data.get("c", 0.1)),
            trials=int(data.get("trials", 50)),
            base_seed=int(data.get("base_seed", 0)),
            method=data.get("method", "expm"),
            num_times=int(data.get("num_times", 201)),
            horizon_source=source,
        )

    def times(self) -> np.ndarray:
        return np.linspace(0.0, self.horizon, self.num_times)

    def resolved(self) -> dict:
        """Every effective parameter, for the metadata echo."""
        return {
            "kernel": self.kernel.spec(),
            "initial": self.initial.spec(),
            "n_ladder": list(self.n_ladder),
            "horizon": self.horizon,
            "horizon_source": self.horizon_source,
            "window": self.window,
            "eps": self.eps,
            "c": self.c,
            "trials": self.trials,
            "base_seed": self.base_seed,
            "method": self.method,
            "num_times": self.num_times,
        }


def experiment_metadata(cfg: ExperimentConfig, **extra) -> dict:
    meta = {
        "config": cfg.resolved(),
        "library_version": __version__,
        "rng_algorithm": RNG_ALGORITHM,
    }
    meta.update(extra)
    return meta


def _csv_cell(value) -> str:
    if isinstance(value, bool):
        return str(int(value))
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _csv_text(header: list[str], rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_csv_cell(v) for v in row])
    return buf.getvalue()


class _Reference:
    """Common view of the comparison solution: closed form or large-n solve."""

    def __init__(self, cfg: ExperimentConfig, times: np.ndarray, reference_n=None):
        kernel = cfg.kernel
        if isinstance(kernel, BipartiteKernel) and cfg.initial.has_balanced_blocks(
            kernel.r
        ):
            cf = BipartiteClosedForm(kernel.r, cfg.initial)
            self.kind = "closed_form"
            self.n = None
            self.boundaries = cf.partition.boundaries
            self._values = np.array([cf.values_at(t) for t in times])
        else:
            if reference_n is None:
                raise ValidationError(
                    "no closed form applies; a reference_n is required"
                )
            traj = solve_continuum(
                kernel, cfg.initial, int(reference_n), times, method=cfg.method
            )
            self.kind = f"finite_n_{int(reference_n)}"
            self.n = int(reference_n)
            self.boundaries = Partition.uniform(int(reference_n)).boundaries
            self._values = traj.states

    def values_at(self, k: int) -> np.ndarray:
        return self._values[k]

    def diameters(self) -> np.ndarray:
        return self._values.max(axis=1) - self._values.min(axis=1)


@dataclass(frozen=True)
class ErrorRow:
    n: int
    sup_l2_error: float
    diameter_at_T: float
    exceptional_measure: float


@dataclass(frozen=True)
class ErrorTable:
    rows: tuple[ErrorRow, ...]
    reference: str

    def csv_text(self) -> str:
        return _csv_text(
            ["n", "sup_l2_error", "diameter_at_T", "exceptional_measure"],
            [
                (r.n, r.sup_l2_error, r.diameter_at_T, r.exceptional_measure)
                for r in self.rows
            ],
        )

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            fh.write(self.csv_text())


def convergence_study(cfg: ExperimentConfig, reference_n: int | None = None) -> ErrorTable:
    """Sup-over-time L2 error of each ladder size against the reference.

    The reference is the closed form when the kernel is the two-block
    family and the start is block-balanced; otherwise a solve at
    `reference_n`, which must be at least 4x the largest ladder entry.
    Rows are reported raw, even when the error column is not monotone.
    """
    times = cfg.times()
    if reference_n is not None and reference_n < 4 * max(cfg.n_ladder):
        raise ValidationError("reference_n must be at least 4x the largest ladder n")
    ref = _Reference(cfg, times, reference_n)
    rows = []
    for n in cfg.n_ladder:
        traj = solve_continuum(cfg.kernel, cfg.initial, n, times, method=cfg.method)
        bounds = Partition.uniform(n).boundaries
        sup_err = max(
            step_l2_distance(bounds, traj.states[k], ref.boundaries, ref.values_at(k))
            for k in range(times.size)
        )
        final = traj.states[-1]
        rows.append(
            ErrorRow(
                n,
                float(sup_err),
                consensus_diameter(final),
                exceptional_measure(final, cfg.eps),
            )
        )
    return ErrorTable(tuple(rows), ref.kind)


@dataclass(frozen=True)
class ProximityRow:
    n: int
    max_exceptional_measure: float


@dataclass(frozen=True)
class ProximityReport:
    """Exceptional mass over the window [T, T+D] per ladder size.

    `status` is "ok" when the reference diameter drops below eps/3 at
    some grid time T with the full window inside the horizon; otherwise
    it names what failed and the rows are empty.
    """

    status: str
    t_eps: float | None
    eps: float
    window: float
    reference: str
    rows: tuple[ProximityRow, ...]

    def csv_text(self) -> str:
        return _csv_text(
            ["n", "max_exceptional_measure"],
            [(r.n, r.max_exceptional_measure) for r in self.rows],
        )

    def to_dict(self) -> dict:
        return {
            "status": self.status,
            "t_eps": self.t_eps,
            "eps": self.eps,
            "window": self.window,
            "reference": self.reference,
            "rows": [
                {"n": r.n, "max_exceptional_measure": r.max_exceptional_measure}
                for r in self.rows
            ],
        }


def consensus_proximity(
    cfg: ExperimentConfig, reference_n: int | None = None
) -> ProximityReport:
    """Measure how much mass stays outside an eps window after consensus.

    T is the first grid time the reference diameter is at most eps/3
    (the eps/3 margin leaves triangle-inequality headroom for the finite
    solves to differ from the reference); for each
    ladder n the report carries the max exceptional measure at eps over
    grid times in [T, T + window].
    """
    times = cfg.times()
    ref = _Reference(cfg, times, reference_n)
    diam = ref.diameters()
    hit = np.nonzero(diam <= cfg.eps / 3.0)[0]
    if hit.size == 0:
        return ProximityReport(
            "consensus-not-reached-in-horizon", None, cfg.eps, cfg.window, ref.kind, ()
        )
    t_eps = float(times[hit[0]])
    if t_eps + cfg.window > cfg.horizon + 1e-12:
        return ProximityReport(
            "window-exceeds-horizon", t_eps, cfg.eps, cfg.window, ref.kind, ()
        )
    in_window = (times >= t_eps) & (times <= t_eps + cfg.window + 1e-12)
    rows = []
    for n in cfg.n_ladder:
        traj = solve_continuum(cfg.kernel, cfg.initial, n, times, method=cfg.method)
        worst = max(
            exceptional_measure(traj.states[k], cfg.eps)
            for k in np.nonzero(in_window)[0]
        )
        rows.append(ProximityRow(n, float(worst)))
    return ProximityReport("ok", t_eps, cfg.eps, cfg.window, ref.kind, tuple(rows))


@dataclass(frozen=True)
class MCTrialRow:
    n: int
    trial: int
    seed: int
    diameter_at_T: float
    exceptional_measure: float
    success: bool
    exceedance_fraction: float
    chebyshev_bound: float


@dataclass(frozen=True)
class MCResult:
    rows: tuple[MCTrialRow, ...]
    success_fractions: tuple[tuple[int, float], ...]
    reference: str

    def csv_text(self) -> str:
        # Diagnostics (exceedance vs Chebyshev) live in the metadata, not
        # the CSV, whose schema is fixed.
        return _csv_text(
            ["n", "trial", "seed", "diameter_at_T", "exceptional_measure", "success"],
            [
                (r.n, r.trial, r.seed, r.diameter_at_T, r.exceptional_measure, r.success)
                for r in self.rows
            ],
        )

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            fh.write(self.csv_text())

    def diagnostics(self) -> dict:
        return {
            "success_fractions": [list(pair) for pair in self.success_fractions],
            "reference": self.reference,
            "max_exceedance_minus_bound": max(
                (r.exceedance_fraction - r.chebyshev_bound for r in self.rows),
                default=0.0,
            ),
            "trials": [
                {
                    "n": r.n,
                    "trial": r.trial,
                    "exceedance_fraction": r.exceedance_fraction,
                    "chebyshev_bound": r.chebyshev_bound,
                }
                for r in self.rows
            ],
        }


def random_consensus_mc(cfg: ExperimentConfig, threads: int = 1) -> MCResult:
    """Monte Carlo consensus study over graphs sampled from a graphon.

    Trial j of every ladder size uses seed base_seed + j, so any subset
    of trials can be reproduced independently.  A trial succeeds when
    the exceptional measure at eps of the final state stays below c^2.
    Each trial also records the measure where it deviates from the
    deterministic reference solve by more than eps, next to the
    Chebyshev bound (L2 distance / eps)^2 that must dominate it.
    """
    if not cfg.kernel.is_graphon():
        raise ValidationError("Monte Carlo sampling requires a graphon kernel")
    if cfg.trials < MC_MIN_TRIALS:
        raise ValidationError(f"fraction estimates need at least {MC_MIN_TRIALS} trials")
    times = np.array([0.0, cfg.horizon])
    ref_n = max(cfg.n_ladder)
    ref = solve_continuum(cfg.kernel, cfg.initial, ref_n, times, method=cfg.method)
    ref_bounds = Partition.uniform(ref_n).boundaries
    ref_final = ref.states[-1]
    c_squared = cfg.c * cfg.c

    def one_trial(task) -> MCTrialRow:
        n, trial = task
        seed = cfg.base_seed + trial
        graph = sample_w_random(cfg.kernel, n, seed)
        traj = solve_finite(
            graph, average_initial(cfg.initial, n), times, method=cfg.method
        )
        final = traj.states[-1]
        bounds = Partition.uniform(n).boundaries
        exc = exceptional_measure(final, cfg.eps)
        exceed = step_exceedance_measure(bounds, final, ref_bounds, ref_final, cfg.eps)
        l2 = step_l2_distance(bounds, final, ref_bounds, ref_final)
        return MCTrialRow(
            n=n,
            trial=trial,
            seed=seed,
            diameter_at_T=consensus_diameter(final),
            exceptional_measure=exc,
            success=bool(exc < c_squared),
            exceedance_fraction=float(exceed),
            chebyshev_bound=float((l2 / cfg.eps) ** 2),
        )

    tasks = [(n, trial) for n in cfg.n_ladder for trial in range(cfg.trials)]
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            rows = tuple(pool.map(one_trial, tasks))  # map preserves task order
    else:
        rows = tuple(one_trial(t) for t in tasks)
    fractions = tuple(
        (n, sum(r.success for r in rows if r.n == n) / cfg.trials)
        for n in cfg.n_ladder
    )
    return MCResult(rows, fractions, f"finite_n_{ref_n}")


def randcond_evaluate(kernel: Kernel, traj: Trajectory, variant: str = "literal") -> float:
    """Min over grid times of the pairwise-difference functional against W(1-W).

    literal: integrand (u(y,t) - u(x,t)) W(x,y)(1 - W(x,y)), which is
    antisymmetric in (x, y) against a symmetric weight and therefore
    integrates to exactly zero; the variant exists to document that.
    absolute: same with |u(y,t) - u(x,t)|, the form experiments gate on.
    Both are exact cellwise double sums.
    """
    if variant not in ("literal", "absolute"):
        raise ValidationError("variant must be 'literal' or 'absolute'")
    step = kernel.as_step()
    uniform = Partition.uniform(traj.n)
    merged = step.partition.refined_with(uniform)
    mids = merged.midpoints()
    kc = step.partition.cell_of(mids)
    uc = uniform.cell_of(mids)
    w = step.values[np.ix_(kc, kc)]
    weight = w * (1.0 - w)
    m = merged.measures
    best = np.inf
    for k in range(traj.times.size):
        u = traj.states[k][uc]
        diff = u[None, :] - u[:, None]
        if variant == "absolute":
            diff = np.abs(diff)
        best = min(best, float(m @ (diff * weight) @ m))
    return best
