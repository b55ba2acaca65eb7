"""Structural analysis of step kernels: components, twins and limit prediction.

Connectivity is decided on the support graph of the cells, which for a
step kernel agrees with the measure-theoretic definition (any separating
set can be replaced by a union of cells).  Twin-sets group cells whose
kernel rows are proportional; they are the structure behind closed-form
limit predictions and behind the counterexamples where consensus fails.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dynamics import (
    InitialCondition,
    Trajectory,
    average_initial,
    solve_finite,
)
from .errors import UnsupportedVariantError, ValidationError
from .graphs import discretize_kernel
from .kernels import DirectSumKernel, Kernel, StepKernel

PROPORTIONALITY_TOL = 1e-10
MEAN_MATCH_TOL = 1e-10


class _UnionFind:
    def __init__(self, n: int):
        self.parent = list(range(n))

    def find(self, i: int) -> int:
        while self.parent[i] != i:
            self.parent[i] = self.parent[self.parent[i]]
            i = self.parent[i]
        return i

    def union(self, i: int, j: int) -> None:
        ri, rj = self.find(i), self.find(j)
        if ri != rj:
            self.parent[max(ri, rj)] = min(ri, rj)

    def groups(self) -> list[list[int]]:
        by_root: dict[int, list[int]] = {}
        for i in range(len(self.parent)):
            by_root.setdefault(self.find(i), []).append(i)
        return [by_root[r] for r in sorted(by_root)]


@dataclass(frozen=True)
class Component:
    """One connected piece of a step kernel.

    `cells` are the original cell indices, `interval` the contiguous block
    the component occupies after relabelling, `kernel` the induced step
    kernel rescaled onto [0,1]^2 (values unchanged).
    """

    cells: tuple[int, ...]
    weight: float
    interval: tuple[float, float]
    kernel: StepKernel


@dataclass(frozen=True)
class ComponentDecomposition:
    source: StepKernel
    components: tuple[Component, ...]
    permutation: tuple[int, ...]  # new cell p came from source cell permutation[p]

    def reassembled(self) -> DirectSumKernel:
        """Direct sum of the components; equals the source up to cell order."""
        return DirectSumKernel([(c.weight, c.kernel) for c in self.components])


@dataclass(frozen=True)
class TwinSet:
    """Cells whose kernel rows are pairwise proportional.

    `multipliers[k]` relates row cells[k] to the representative row:
    row_cells[k] = multipliers[k] * row_representative.  A set of zero
    rows carries unit multipliers by convention.
    """

    cells: tuple[int, ...]
    representative: int
    multipliers: tuple[float, ...]


@dataclass(frozen=True)
class TwinSetPartition:
    source: StepKernel
    sets: tuple[TwinSet, ...]

    @property
    def is_twin_kernel(self) -> bool:
        # The maximal sets always cover every cell of a step kernel.
        return True


@dataclass(frozen=True)
class NecessaryConditionReport:
    """Per-component means of the initial condition and their agreement."""

    satisfied: bool
    component_means: tuple[float, ...]
    spread: float

    def to_dict(self) -> dict:
        return {
            "satisfied": self.satisfied,
            "component_means": list(self.component_means),
            "spread": self.spread,
        }


def connected_components(kernel: Kernel, zero_tol: float = 0.0) -> ComponentDecomposition:
    """Support-graph components of the step refinement, smallest cell first."""
    step = kernel.as_step()
    v = step.values
    m = step.partition.size
    uf = _UnionFind(m)
    for i in range(m):
        for j in range(i + 1, m):
            if abs(v[i, j]) > zero_tol:
                uf.union(i, j)
    measures = step.partition.measures
    components = []
    permutation: list[int] = []
    offset = 0.0
    for cells in uf.groups():
        cells = sorted(cells)
        weight = float(measures[cells].sum())
        inner = np.concatenate([[0.0], np.cumsum(measures[cells]) / weight])
        inner[-1] = 1.0
        sub = StepKernel(inner, v[np.ix_(cells, cells)])
        components.append(
            Component(tuple(cells), weight, (offset, offset + weight), sub)
        )
        permutation.extend(cells)
        offset += weight
    return ComponentDecomposition(step, tuple(components), tuple(permutation))


def is_connected(kernel: Kernel, zero_tol: float = 0.0) -> bool:
    """True when the cell support graph is connected.

    Note the degenerate edge: an all-zero kernel refines to a single cell,
    and a one-cell support graph counts as connected here even though no
    mass crosses any split of it.
    """
    return len(connected_components(kernel, zero_tol).components) == 1


def find_maximal_twin_sets(
    kernel: Kernel, prop_tol: float = PROPORTIONALITY_TOL
) -> TwinSetPartition:
    """Partition of the cells into maximal sets with proportional rows.

    Rows i and j pass the pairwise test when
    | v_i * ||v_j|| - sigma * v_j * ||v_i|| | <= prop_tol componentwise,
    with the sign sigma read off the dominant entry; zero rows (norm at
    most prop_tol) form their own single set.  Maximal sets are the
    transitive closure of the pairwise relation.
    """
    step = kernel.as_step()
    v = step.values
    m = step.partition.size
    norms = np.linalg.norm(v, axis=1)
    zero = norms <= prop_tol
    uf = _UnionFind(m)
    zero_cells = np.nonzero(zero)[0]
    for i in zero_cells[1:]:
        uf.union(int(zero_cells[0]), int(i))
    for i in range(m):
        if zero[i]:
            continue
        for j in range(i + 1, m):
            if zero[j]:
                continue
            p = int(np.argmax(np.abs(v[j])))
            sigma = np.sign(v[i, p]) * np.sign(v[j, p])
            if sigma == 0.0:
                continue
            if np.max(np.abs(v[i] * norms[j] - sigma * v[j] * norms[i])) <= prop_tol:
                uf.union(i, j)
    sets = []
    for cells in uf.groups():
        cells = sorted(cells)
        rep = cells[0]
        if zero[rep]:
            mult = [1.0] * len(cells)
        else:
            p = int(np.argmax(np.abs(v[rep])))
            mult = [float(v[i, p] / v[rep, p]) for i in cells]
        sets.append(TwinSet(tuple(cells), rep, tuple(mult)))
    return TwinSetPartition(step, tuple(sets))


def _component_mean(g: InitialCondition, step: StepKernel, cells) -> float:
    bounds = step.partition.boundaries
    total = 0.0
    weight = 0.0
    for c in cells:
        total += g.integral(bounds[c], bounds[c + 1])
        weight += bounds[c + 1] - bounds[c]
    return total / weight


def necessary_condition(
    kernel: Kernel, g: InitialCondition, tol: float = MEAN_MATCH_TOL
) -> NecessaryConditionReport:
    """Check the consensus prerequisite: equal initial means on all components.

    Consensus forces the limit to be the conserved mean of each component,
    so differing component means rule it out.  The converse fails, so a
    satisfied report is necessary, not sufficient.
    """
    decomp = connected_components(kernel)
    means = tuple(
        _component_mean(g, decomp.source, comp.cells) for comp in decomp.components
    )
    spread = float(max(means) - min(means)) if means else 0.0
    return NecessaryConditionReport(spread <= tol, means, spread)


def predict_limit(kernel: Kernel, g: InitialCondition) -> InitialCondition:
    """Long-time profile predicted from the component structure of a graphon.

    Each component with any mass relaxes to the mean of g over it; a
    component with an all-zero kernel has frozen dynamics and keeps g
    unchanged there.  Requires nonnegative values.
    """
    step = kernel.as_step()
    if step.values.min() < 0.0:
        raise UnsupportedVariantError(
            "limit prediction requires a graphon (no negative values)"
        )
    decomp = connected_components(step)
    comp_of_cell = np.empty(step.partition.size, dtype=int)
    frozen = []
    means = []
    for ci, comp in enumerate(decomp.components):
        comp_of_cell[list(comp.cells)] = ci
        frozen.append(float(np.max(np.abs(comp.kernel.values))) == 0.0)
        means.append(_component_mean(g, step, comp.cells))
    merged = step.partition.refined_with(g.partition)
    mids = merged.midpoints()
    comp_idx = comp_of_cell[step.partition.cell_of(mids)]
    values = np.asarray(means)[comp_idx]
    frozen_mask = np.asarray(frozen)[comp_idx]
    values[frozen_mask] = g.values[g.partition.cell_of(mids)][frozen_mask]
    return InitialCondition(merged, values)


def decompose_solution(
    kernel: Kernel,
    g: InitialCondition,
    n: int,
    times,
    method: str = "expm",
) -> Trajectory:
    """Solve per component and reassemble; must match the direct solve.

    Each component is solved on its own rescaled kernel multiplied by the
    component weight (a block of width a interacts a-fold slower than the
    same kernel on all of [0,1]) with the restriction of the averaged
    initial condition.  The resolution n must align with the kernel cells
    so each component receives a proportional whole number of cells.
    """
    step = kernel.as_step()
    scaled_bounds = step.partition.boundaries * n
    if np.max(np.abs(scaled_bounds - np.round(scaled_bounds))) > 1e-9:
        raise ValidationError(
            "cell allocation is not proportional: every kernel cell boundary "
            f"must be a multiple of 1/{n}"
        )
    decomp = connected_components(step)
    comp_of_cell = np.empty(step.partition.size, dtype=int)
    for ci, comp in enumerate(decomp.components):
        comp_of_cell[list(comp.cells)] = ci
    mids = (np.arange(n) + 0.5) / n
    comp_idx = comp_of_cell[step.partition.cell_of(mids)]
    u0 = average_initial(g, n).values
    times = np.asarray(times, dtype=float)
    out = np.empty((times.size, n))
    detail = []
    for ci, comp in enumerate(decomp.components):
        idx = np.nonzero(comp_idx == ci)[0]
        n_c = idx.size
        a_c = n_c / n
        graph_c = discretize_kernel(comp.kernel.scaled(a_c), n_c)
        traj_c = solve_finite(graph_c, u0[idx], times, method=method)
        out[:, idx] = traj_c.states
        detail.append({"cells": int(n_c), "weight": a_c})
    meta = {"solver": method, "n": n, "decomposition": detail}
    try:
        meta["kernel"] = kernel.spec()
    except NotImplementedError:
        meta["kernel"] = None
    return Trajectory(times, out, meta)


def structure_report(
    kernel: Kernel,
    g: InitialCondition | None = None,
    zero_tol: float = 0.0,
    prop_tol: float = PROPORTIONALITY_TOL,
) -> dict:
    """JSON-ready summary: components, twin-sets and the optional mean check."""
    decomp = connected_components(kernel, zero_tol)
    twins = find_maximal_twin_sets(kernel, prop_tol)
    report = {
        "connected": len(decomp.components) == 1,
        "twin_kernel": twins.is_twin_kernel,
        "components": [
            {
                "cells": list(c.cells),
                "weight": c.weight,
                "interval": list(c.interval),
            }
            for c in decomp.components
        ],
        "twin_sets": [
            {
                "cells": list(s.cells),
                "representative": s.representative,
                "multipliers": list(s.multipliers),
            }
            for s in twins.sets
        ],
        "necessary_condition": None,
    }
    if g is not None:
        report["necessary_condition"] = necessary_condition(kernel, g).to_dict()
    return report
