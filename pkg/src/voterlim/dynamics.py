"""Voter/consensus dynamics: solvers, reference solutions and diagnostics.

The finite model is the linear ODE du/dt = D u with D the graph's
dynamics generator; the continuum model is reached by discretising a
kernel first.  Two independent solvers (symmetric eigendecomposition and
fixed-step RK4) plus a Volterra integral-equation residual keep each
other honest.
"""

from __future__ import annotations

import csv
import io
import json
import math

import numpy as np

from .errors import SolverConvergenceError, ValidationError
from .graphs import DEFAULT_N_MAX, WeightedGraph, discretize_kernel, laplacian
from .kernels import Kernel, Partition, overlap_matrix

# Default tolerances; every consumer that overrides them records the value
# it used in its output metadata.
RK_TOL = 1e-9
RK_MAX_HALVINGS = 12
LIMIT_TOL = 1e-8
CONSENSUS_EPS = 1e-3
ZERO_MEAN_TOL = 1e-12

SOLVER_METHODS = ("expm", "rk")


class StateVector:
    """Opinion profile on n uniform cells, read as a step function on [0,1]."""

    def __init__(self, values):
        v = np.asarray(values, dtype=float)
        if v.ndim != 1 or v.size < 1:
            raise ValidationError("state must be a non-empty 1-D array")
        if not np.all(np.isfinite(v)):
            raise ValidationError("state entries must be finite")
        v = v.copy()
        v.setflags(write=False)
        self.values = v

    @property
    def n(self) -> int:
        return self.values.size

    def inf_norm(self) -> float:
        return float(np.max(np.abs(self.values)))

    def __repr__(self):
        return f"StateVector(n={self.n})"


class InitialCondition:
    """Bounded step function on [0,1] describing the initial opinions.

    Stored canonically: adjacent cells with exactly equal values are
    merged, so equality of profiles is equality of representations.
    """

    def __init__(self, boundaries, values):
        part = boundaries if isinstance(boundaries, Partition) else Partition(boundaries)
        v = np.asarray(values, dtype=float)
        if v.shape != (part.size,):
            raise ValidationError("need one value per cell")
        if not np.all(np.isfinite(v)):
            raise ValidationError("initial values must be finite")
        keep = np.ones(part.size, dtype=bool)
        keep[1:] = v[1:] != v[:-1]
        bounds = np.concatenate([part.boundaries[:-1][keep], [1.0]])
        self.partition = Partition(bounds)
        v = v[keep].copy()
        v.setflags(write=False)
        self.values = v

    def inf_norm(self) -> float:
        return float(np.max(np.abs(self.values)))

    @classmethod
    def constant(cls, c: float) -> "InitialCondition":
        return cls([0.0, 1.0], [c])

    @classmethod
    def from_cell_values(cls, values) -> "InitialCondition":
        """Step function on the uniform partition with the given cell values."""
        values = np.asarray(values, dtype=float)
        return cls(Partition.uniform(values.size), values)

    @classmethod
    def balanced_blocks(
        cls, r: float, left_amp: float = 0.5, right_amp: float = 0.5
    ) -> "InitialCondition":
        """Profile with zero mean on [0, r) and on [r, 1] separately.

        Each block is split in half and assigned +/- its amplitude, the
        simplest member of the family the two-block closed form needs.
        """
        if not (0.0 < r < 1.0):
            raise ValidationError("split point r must lie in (0, 1)")
        bounds = [0.0, r / 2.0, r, (1.0 + r) / 2.0, 1.0]
        return cls(bounds, [left_amp, -left_amp, right_amp, -right_amp])

    def evaluate(self, x):
        return self.values[self.partition.cell_of(x)]

    def integral(self, a: float = 0.0, b: float = 1.0) -> float:
        """Exact integral of the step function over [a, b]."""
        if not (0.0 <= a <= b <= 1.0):
            raise ValidationError("integration limits must satisfy 0 <= a <= b <= 1")
        lo = np.maximum(self.partition.boundaries[:-1], a)
        hi = np.minimum(self.partition.boundaries[1:], b)
        return float(np.maximum(hi - lo, 0.0) @ self.values)

    def mean(self) -> float:
        return self.integral(0.0, 1.0)

    def has_balanced_blocks(self, r: float, tol: float = ZERO_MEAN_TOL) -> bool:
        """True when the profile integrates to ~0 over [0, r) and over [r, 1]."""
        return abs(self.integral(0.0, r)) <= tol and abs(self.integral(r, 1.0)) <= tol

    def spec(self) -> dict:
        return {
            "type": "step",
            "boundaries": self.partition.boundaries.tolist(),
            "values": self.values.tolist(),
        }

    def __repr__(self):
        return f"InitialCondition({self.partition.size} pieces)"


def make_initial(spec: dict) -> InitialCondition:
    """Build an initial condition from its JSON description."""
    if not isinstance(spec, dict):
        raise ValidationError("initial-condition spec must be a JSON object")
    kind = spec.get("type")
    try:
        if kind == "step":
            return InitialCondition(spec["boundaries"], spec["values"])
        if kind == "constant":
            return InitialCondition.constant(spec["c"])
        if kind == "uniform_cells":
            return InitialCondition.from_cell_values(spec["values"])
        if kind == "balanced_blocks":
            return InitialCondition.balanced_blocks(
                spec["r"],
                left_amp=spec.get("left_amp", 0.5),
                right_amp=spec.get("right_amp", 0.5),
            )
    except KeyError as exc:
        raise ValidationError(f"initial-condition spec missing field {exc}") from exc
    except (TypeError, ValueError) as exc:
        raise ValidationError(f"malformed initial-condition spec: {exc}") from exc
    raise ValidationError(f"unknown initial-condition type {kind!r}")


class Trajectory:
    """Solution samples on a time grid: states[k] is the profile at times[k]."""

    def __init__(self, times, states, metadata=None):
        t = np.asarray(times, dtype=float)
        s = np.asarray(states, dtype=float)
        if t.ndim != 1 or t.size < 1:
            raise ValidationError("time grid must be a non-empty 1-D array")
        if t[0] != 0.0 or np.any(np.diff(t) <= 0.0):
            raise ValidationError("time grid must start at 0 and strictly increase")
        if s.ndim != 2 or s.shape[0] != t.size:
            raise ValidationError("need one state row per grid time")
        t = t.copy()
        t.setflags(write=False)
        s = s.copy()
        s.setflags(write=False)
        self.times = t
        self.states = s
        self.metadata = dict(metadata or {})

    @property
    def n(self) -> int:
        return self.states.shape[1]

    def state(self, k: int) -> StateVector:
        return StateVector(self.states[k])

    @property
    def final_state(self) -> StateVector:
        return StateVector(self.states[-1])

    def diameters(self) -> np.ndarray:
        return self.states.max(axis=1) - self.states.min(axis=1)

    def __repr__(self):
        return f"Trajectory(n={self.n}, times={self.times.size})"


def _state_values(state) -> np.ndarray:
    v = state.values if isinstance(state, StateVector) else state
    return np.asarray(v, dtype=float)


def average_initial(g: InitialCondition, n: int) -> StateVector:
    """Cell averages of g on the uniform n-partition: n * integral over each cell."""
    if n < 1:
        raise ValidationError("averaging needs n >= 1")
    overlap = overlap_matrix(Partition.uniform(n), g.partition)
    return StateVector(n * (overlap @ g.values))


def _validate_times(times) -> np.ndarray:
    t = np.asarray(times, dtype=float)
    if t.ndim != 1 or t.size < 1:
        raise ValidationError("time grid must be a non-empty 1-D array")
    if t[0] != 0.0:
        raise ValidationError("time grid must start at 0")
    if np.any(np.diff(t) <= 0.0):
        raise ValidationError("time grid must be strictly increasing")
    return t


def _solve_expm(D: np.ndarray, u0: np.ndarray, times: np.ndarray) -> np.ndarray:
    # D is symmetric, so the matrix exponential reduces to eigenmodes.
    eigvals, eigvecs = np.linalg.eigh(D)
    coeffs = eigvecs.T @ u0
    modes = np.exp(np.outer(times, eigvals))
    return (modes * coeffs) @ eigvecs.T


def _rk4_pass(D: np.ndarray, u0: np.ndarray, times: np.ndarray, substeps) -> np.ndarray:
    states = np.empty((times.size, u0.size))
    states[0] = u = u0.copy()
    for k in range(times.size - 1):
        h = (times[k + 1] - times[k]) / substeps[k]
        for _ in range(substeps[k]):
            k1 = D @ u
            k2 = D @ (u + 0.5 * h * k1)
            k3 = D @ (u + 0.5 * h * k2)
            k4 = D @ (u + h * k3)
            u = u + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        states[k + 1] = u
    return states


def _solve_rk(
    D: np.ndarray,
    u0: np.ndarray,
    times: np.ndarray,
    rk_tol: float,
    max_halvings: int,
) -> tuple[np.ndarray, dict]:
    norm1 = float(np.max(np.abs(D).sum(axis=0), initial=0.0))
    deltas = np.diff(times)
    if norm1 > 0.0:
        h_max = 0.1 / norm1  # keeps h * ||D||_1 <= 0.1
        base = np.maximum(np.ceil(deltas / h_max).astype(int), 1)
    else:
        base = np.ones(deltas.size, dtype=int)
    prev_final = None
    for halving in range(max_halvings + 1):
        states = _rk4_pass(D, u0, times, base * (2**halving))
        final = states[-1]
        if prev_final is not None and np.max(np.abs(final - prev_final)) < rk_tol:
            return states, {"halvings": halving, "substeps": int((base * 2**halving).sum())}
        prev_final = final
    raise SolverConvergenceError(
        f"RK4 grid refinement did not meet {rk_tol:g} within {max_halvings} halvings"
    )


def solve_finite(
    graph: WeightedGraph,
    u0,
    times,
    method: str = "expm",
    rk_tol: float = RK_TOL,
    max_halvings: int = RK_MAX_HALVINGS,
    n_max: int = DEFAULT_N_MAX,
) -> Trajectory:
    """Solve du/dt = D u on the given time grid.

    `method` selects the solver: "expm" diagonalises the symmetric
    generator exactly; "rk" runs classical fixed-step RK4 with the step
    bounded by 0.1 / ||D||_1 and halved until two successive refinements
    agree at the final time to within `rk_tol`.
    """
    t = _validate_times(times)
    u = _state_values(u0)
    if u.size != graph.n:
        raise ValidationError(f"state has {u.size} cells, graph has {graph.n}")
    if graph.n > n_max:
        raise SizeLimitError(f"n={graph.n} exceeds n_max={n_max}")
    if method not in SOLVER_METHODS:
        raise ValidationError(f"method must be one of {SOLVER_METHODS}")
    D = laplacian(graph).matrix
    meta: dict = {"solver": method, "n": graph.n}
    if method == "expm":
        states = _solve_expm(D, u, t)
    else:
        states, detail = _solve_rk(D, u, t, rk_tol, max_halvings)
        meta.update(detail)
        meta["rk_tol"] = rk_tol
    states[0] = u  # t=0 is the given state, not a reconstruction of it
    if not np.all(np.isfinite(states)):
        raise SolverConvergenceError(
            "trajectory left the representable range; shorten the horizon"
        )
    return Trajectory(t, states, meta)


def solve_continuum(
    kernel: Kernel,
    g: InitialCondition,
    n: int,
    times,
    method: str = "expm",
    **solver_kwargs,
) -> Trajectory:
    """Finite-n approximation of the kernel dynamics started from g.

    Discretises the kernel exactly at resolution n, averages g per cell
    and delegates to `solve_finite`.
    """
    graph = discretize_kernel(kernel, n)
    traj = solve_finite(graph, average_initial(g, n), times, method=method, **solver_kwargs)
    try:
        traj.metadata["kernel"] = kernel.spec()
    except NotImplementedError:
        traj.metadata["kernel"] = None
    traj.metadata["initial"] = g.spec()
    return traj


def default_horizon(kernel: Kernel | None = None, probe_n: int = 64) -> tuple[float, str]:
    """Config default for the horizon: 10 / spectral gap when estimable, else 20.

    The gap is the slowest strictly decaying rate of the generator at a
    probe discretisation.  Kernels with divergent modes or no decaying
    mode fall back to the flat default.  Returns (horizon, source) so
    callers can echo the provenance into metadata.
    """
    if kernel is None:
        return 20.0, "fallback"
    d = laplacian(discretize_kernel(kernel, probe_n)).matrix
    eigvals = np.linalg.eigvalsh(d)
    if eigvals[-1] > 1e-12:
        return 20.0, "fallback"
    decaying = eigvals[eigvals < -1e-12]
    if decaying.size == 0:
        return 20.0, "fallback"
    return float(10.0 / -decaying.max()), "spectral_gap"


def closed_form_bipartite(r: float, g: InitialCondition, x, t):
    """Exact solution on the two-block kernel for block-balanced starts.

    Requires g to integrate to zero over [0, r) and over [r, 1]; then the
    profile decays in place, at rate 1 on [r, 1] and rate 1 - 2r on [0, r).
    """
    if not (0.0 < r < 0.5):
        raise ValidationError("block boundary r must lie strictly in (0, 1/2)")
    if not g.has_balanced_blocks(r):
        raise ValidationError("initial condition must have zero mean on both blocks")
    xa = np.asarray(x, dtype=float)
    ta = np.asarray(t, dtype=float)
    rate = np.where(xa >= r, 1.0, 1.0 - 2.0 * r)
    out = g.evaluate(xa) * np.exp(-rate * ta)
    return float(out) if out.ndim == 0 else out


class BipartiteClosedForm:
    """Step-function view of the two-block closed form, for exact comparisons."""

    def __init__(self, r: float, g: InitialCondition):
        if not (0.0 < r < 0.5):
            raise ValidationError("block boundary r must lie strictly in (0, 1/2)")
        if not g.has_balanced_blocks(r):
            raise ValidationError("initial condition must have zero mean on both blocks")
        self.r = r
        part = g.partition.refined_with(Partition([0.0, r, 1.0]))
        self.partition = part
        mids = part.midpoints()
        self.base = g.values[g.partition.cell_of(mids)]
        self.rates = np.where(mids >= r, 1.0, 1.0 - 2.0 * r)

    def values_at(self, t: float) -> np.ndarray:
        return self.base * np.exp(-self.rates * float(t))

    def diameter(self, t: float) -> float:
        v = self.values_at(t)
        return float(v.max() - v.min())


def consensus_diameter(state) -> float:
    """Spread of opinions: max minus min cell value."""
    v = _state_values(state)
    return float(v.max() - v.min())


def mean_value(state) -> float:
    """Average opinion; conserved along every trajectory."""
    return float(_state_values(state).mean())


def exceptional_measure(state, eps: float) -> float:
    """Smallest fraction of cells to remove so the rest span at most eps.

    Exact: sorts the values and keeps the largest group fitting in a
    closed window of width eps, so the result is (n - kept) / n.
    """
    if eps <= 0.0:
        raise ValidationError("eps must be positive")
    v = np.sort(_state_values(state))
    n = v.size
    kept = np.searchsorted(v, v + eps, side="right") - np.arange(n)
    return float(n - kept.max()) / n


def detect_consensus(traj: Trajectory, eps: float):
    """Earliest grid time from which the diameter stays at or below eps.

    Returns None when the diameter exceeds eps at the final time or never
    settles below it for good within the grid.
    """
    if eps <= 0.0:
        raise ValidationError("eps must be positive")
    ok = traj.diameters() <= eps
    if not ok[-1]:
        return None
    bad = np.nonzero(~ok)[0]
    start = int(bad[-1]) + 1 if bad.size else 0
    return float(traj.times[start])


def limit_state(
    traj: Trajectory, tail_fraction: float = 0.2, limit_tol: float = LIMIT_TOL
) -> tuple[StateVector, bool]:
    """Final state plus a convergence flag from the trailing grid window.

    The flag is set when every cell's oscillation (max minus min) over the
    trailing `tail_fraction` of grid times stays within `limit_tol`.
    """
    if not (0.0 < tail_fraction < 1.0):
        raise ValidationError("tail_fraction must lie in (0, 1)")
    k = traj.times.size
    if k < 10:
        raise ValidationError("limit detection needs at least 10 grid times")
    count = max(2, math.ceil(tail_fraction * k))
    tail = traj.states[-count:]
    osc = float(np.max(tail.max(axis=0) - tail.min(axis=0)))
    return StateVector(traj.states[-1]), osc <= limit_tol


def _phi_a(z: np.ndarray) -> np.ndarray:
    # (1 - exp(-z)) / z with a series branch near 0.
    out = np.empty_like(z)
    small = np.abs(z) < 1e-5
    zs = z[small]
    out[small] = 1.0 - zs / 2.0 + zs * zs / 6.0
    zb = z[~small]
    out[~small] = -np.expm1(-zb) / zb
    return out


def _phi_b(z: np.ndarray) -> np.ndarray:
    # (1 - exp(-z) (1 + z)) / z^2 with a series branch near 0.
    out = np.empty_like(z)
    small = np.abs(z) < 1e-5
    zs = z[small]
    out[small] = 0.5 - zs / 3.0 + zs * zs / 8.0
    zb = z[~small]
    out[~small] = (1.0 - np.exp(-zb) * (1.0 + zb)) / (zb * zb)
    return out


def volterra_residual(kernel: Kernel, traj: Trajectory) -> float:
    """Worst deviation of a trajectory from its integral-equation form.

    Each cell value must satisfy
    u_i(t) = exp(-d_i t) g_i + integral_0^t exp(d_i (s - t)) h_i(s) ds,
    where d_i is the cell degree and h_i the exact cell integral of
    W(x_i, .) u(., s), both taken on the pixel restriction of the kernel
    at the trajectory's resolution.  h is interpolated linearly between
    grid times and integrated against the exponential factor in closed
    form per interval, so constant trajectories give zero residual and
    the residual of a smooth one shrinks as O(dt^2).

    This is an oracle for the solvers: it never runs them.
    """
    beta = discretize_kernel(kernel, traj.n).weights
    d = beta.sum(axis=1) / traj.n
    h = traj.states @ beta / traj.n
    u0 = traj.states[0]
    acc = np.zeros(traj.n)
    worst = 0.0
    for k in range(traj.times.size - 1):
        dt = traj.times[k + 1] - traj.times[k]
        z = d * dt
        acc = np.exp(-z) * acc + dt * (h[k] * _phi_a(z) + (h[k + 1] - h[k]) * _phi_b(z))
        model = np.exp(-d * traj.times[k + 1]) * u0 + acc
        worst = max(worst, float(np.max(np.abs(traj.states[k + 1] - model))))
    return worst


def step_l2_distance(bounds_a, values_a, bounds_b, values_b) -> float:
    """Exact L2([0,1]) distance between two step functions."""
    pa = bounds_a if isinstance(bounds_a, Partition) else Partition(bounds_a)
    pb = bounds_b if isinstance(bounds_b, Partition) else Partition(bounds_b)
    merged = pa.refined_with(pb)
    mids = merged.midpoints()
    va = np.asarray(values_a, dtype=float)[pa.cell_of(mids)]
    vb = np.asarray(values_b, dtype=float)[pb.cell_of(mids)]
    diff = va - vb
    return float(np.sqrt(merged.measures @ (diff * diff)))


def step_exceedance_measure(bounds_a, values_a, bounds_b, values_b, threshold: float) -> float:
    """Exact measure of { x : |f(x) - g(x)| > threshold } for step functions."""
    pa = bounds_a if isinstance(bounds_a, Partition) else Partition(bounds_a)
    pb = bounds_b if isinstance(bounds_b, Partition) else Partition(bounds_b)
    merged = pa.refined_with(pb)
    mids = merged.midpoints()
    va = np.asarray(values_a, dtype=float)[pa.cell_of(mids)]
    vb = np.asarray(values_b, dtype=float)[pb.cell_of(mids)]
    return float(merged.measures[np.abs(va - vb) > threshold].sum())


def trajectory_csv_text(traj: Trajectory) -> str:
    """Render a trajectory as CSV with header t,cell_0,...,cell_{n-1}.

    Floats are written with shortest round-trip repr, so equal trajectories
    produce byte-identical text.
    """
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["t"] + [f"cell_{i}" for i in range(traj.n)])
    for t, row in zip(traj.times, traj.states):
        writer.writerow([repr(float(t))] + [repr(float(v)) for v in row])
    return buf.getvalue()


def write_trajectory(traj: Trajectory, csv_path, meta_path=None) -> None:
    """Write the trajectory CSV, optionally with a JSON metadata sidecar."""
    with open(csv_path, "w", newline="") as fh:
        fh.write(trajectory_csv_text(traj))
    if meta_path is not None:
        with open(meta_path, "w") as fh:
            json.dump(traj.metadata, fh, indent=2, sort_keys=True)
            fh.write("\n")


def read_trajectory(csv_path, meta_path=None) -> Trajectory:
    """Read a trajectory CSV written by `write_trajectory`."""
    with open(csv_path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if not header or header[0] != "t" or len(header) < 2:
            raise ValidationError("trajectory CSV must start with t,cell_0,...")
        rows = [row for row in reader if row]
    try:
        data = np.asarray([[float(v) for v in row] for row in rows])
    except ValueError as exc:
        raise ValidationError(f"malformed trajectory CSV: {exc}") from exc
    if data.ndim != 2 or data.shape[1] != len(header):
        raise ValidationError("trajectory CSV rows disagree with header width")
    metadata = None
    if meta_path is not None:
        with open(meta_path) as fh:
            metadata = json.load(fh)
    return Trajectory(data[:, 0], data[:, 1:], metadata)
