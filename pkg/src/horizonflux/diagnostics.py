"""Discrete norms and invariant checks, each producing a serializable verdict.

Every check is pure: it reads a trajectory (a list of states ordered in time)
and returns an :class:`InvariantReport` with the worst violation magnitude and
where it happened.  Tolerances scale with (1 + data magnitude) so the verdicts
stay meaningful across problem scales.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .fluxes import TwoPointFlux
from .kernels import QuadratureWeights
from .solver import GridState

__all__ = [
    "InvariantReport",
    "cell_entropy_residual",
    "check_conservation",
    "check_entropy",
    "check_l1_contraction",
    "check_max_principle",
    "check_ordering",
    "check_tvd",
    "discrete_bv_norm",
    "discrete_l1_norm",
    "entropy_residuals",
    "kruzhkov_constants",
    "l1_distance",
    "total_variation",
]


@dataclass(frozen=True)
class InvariantReport:
    """Verdict of one invariant check.

    ``violation`` is the worst observed excess over the invariant (clamped at
    zero), ``location`` identifies where it occurred: (step,), (step, cell),
    or (step, cell, c) for entropy checks with a Kruzhkov constant.
    """

    name: str
    passed: bool
    violation: float
    tolerance: float
    location: tuple | None = None

    def as_dict(self) -> dict:
        return {
            "name": self.name,
            "passed": bool(self.passed),
            "violation": float(self.violation),
            "tolerance": float(self.tolerance),
            "location": None if self.location is None else list(self.location),
        }


def _report(name, violation, tolerance, location) -> InvariantReport:
    violation = max(float(violation), 0.0)
    return InvariantReport(
        name=name,
        passed=violation <= tolerance,
        violation=violation,
        tolerance=float(tolerance),
        location=location,
    )


# -- norms -------------------------------------------------------------------


def discrete_l1_norm(state: GridState) -> float:
    """dx * sum_j |u_j|."""
    return state.dx * float(np.sum(np.abs(state.values)))


def total_variation(state: GridState) -> float:
    """sum_j |u_{j+1} - u_j| (no dx factor); wraps around on periodic grids.

    With constant extension the ghost differences vanish, so only interior
    jumps contribute.
    """
    u = state.values
    tv = float(np.sum(np.abs(np.diff(u))))
    if state.boundary == "periodic":
        tv += abs(float(u[0] - u[-1]))
    return tv


def discrete_bv_norm(state: GridState) -> float:
    """dx-weighted total variation, dx * sum_j |u_{j+1} - u_j|."""
    return state.dx * total_variation(state)


def l1_distance(a: GridState, b: GridState) -> float:
    """dx * sum_j |a_j - b_j| for two states on the same grid."""
    if a.n_cells != b.n_cells or abs(a.dx - b.dx) > 1e-12 * a.dx:
        raise ValueError("states live on different grids")
    return a.dx * float(np.sum(np.abs(a.values - b.values)))


# -- trajectory checks ---------------------------------------------------------


def check_max_principle(trajectory: Sequence[GridState]) -> InvariantReport:
    """Values must stay inside the initial data range at every step."""
    u0 = trajectory[0].values
    b1, b2 = float(np.min(u0)), float(np.max(u0))
    tol = 1e-12 * (1.0 + max(abs(b1), abs(b2)))
    worst, where = 0.0, None
    for n, state in enumerate(trajectory):
        excess = np.maximum(state.values - b2, b1 - state.values)
        j = int(np.argmax(excess))
        if excess[j] > worst:
            worst, where = float(excess[j]), (n, j)
    return _report("max_principle", worst, tol, where)


def check_tvd(trajectory: Sequence[GridState]) -> InvariantReport:
    """Total variation must not increase from one step to the next."""
    tvs = [total_variation(s) for s in trajectory]
    tol = 1e-12 * (1.0 + tvs[0])
    worst, where = 0.0, None
    for n in range(len(tvs) - 1):
        growth = tvs[n + 1] - tvs[n]
        if growth > worst:
            worst, where = growth, (n + 1,)
    return _report("tvd", worst, tol, where)


def check_conservation(trajectory: Sequence[GridState]) -> InvariantReport:
    """Total mass dx * sum_j u_j is constant on periodic grids.

    The per-step round-off budget is 1e-13 * scale, so the reported violation
    is the worst mass drift divided by the step count at which it occurred.
    """
    if trajectory[0].boundary != "periodic":
        raise ValueError("conservation check requires a periodic grid")
    dx = trajectory[0].dx
    mass0 = dx * float(np.sum(trajectory[0].values))
    scale = 1.0 + dx * float(np.sum(np.abs(trajectory[0].values)))
    tol = 1e-13 * scale
    worst, where = 0.0, None
    for n, state in enumerate(trajectory[1:], start=1):
        drift = abs(dx * float(np.sum(state.values)) - mass0) / n
        if drift > worst:
            worst, where = drift, (n,)
    return _report("conservation", worst, tol, where)


def check_l1_contraction(
    traj_a: Sequence[GridState], traj_b: Sequence[GridState]
) -> InvariantReport:
    """The discrete L1 distance of two runs must be non-increasing in time."""
    if len(traj_a) != len(traj_b):
        raise ValueError("trajectories have different lengths")
    dists = [l1_distance(a, b) for a, b in zip(traj_a, traj_b)]
    tol = 1e-12 * (1.0 + dists[0])
    worst, where = 0.0, None
    for n in range(len(dists) - 1):
        growth = dists[n + 1] - dists[n]
        if growth > worst:
            worst, where = growth, (n + 1,)
    return _report("l1_contraction", worst, tol, where)


def check_ordering(
    traj_a: Sequence[GridState], traj_b: Sequence[GridState]
) -> InvariantReport:
    """If u0 <= v0 componentwise, the ordering must persist at every step."""
    if len(traj_a) != len(traj_b):
        raise ValueError("trajectories have different lengths")
    scale = 1.0 + max(
        float(np.max(np.abs(traj_a[0].values))), float(np.max(np.abs(traj_b[0].values)))
    )
    tol = 1e-12 * scale
    if np.any(traj_a[0].values > traj_b[0].values + tol):
        raise ValueError("initial data not ordered: need u0 <= v0")
    worst, where = 0.0, None
    for n, (a, b) in enumerate(zip(traj_a, traj_b)):
        excess = a.values - b.values
        j = int(np.argmax(excess))
        if excess[j] > worst:
            worst, where = float(excess[j]), (n, j)
    return _report("monotone_ordering", worst, tol, where)


# -- cell entropy inequality ---------------------------------------------------


def kruzhkov_constants(state: GridState, n: int = 17, margin: float = 0.1) -> np.ndarray:
    """Uniform grid of Kruzhkov constants spanning the data range plus a margin.

    The per-cell entropy residual is piecewise linear in c between data
    values, so a modest uniform grid is a faithful probe.
    """
    lo = float(np.min(state.values)) - margin
    hi = float(np.max(state.values)) + margin
    return np.linspace(lo, hi, n)


def _entropy_residual_matrix(
    state_n: GridState,
    state_np1: GridState,
    weights: QuadratureWeights,
    flux: TwoPointFlux,
    constants,
) -> np.ndarray:
    """Full residual matrix, one row per Kruzhkov constant, one column per cell."""
    if state_n.n_cells != state_np1.n_cells or abs(state_n.dx - state_np1.dx) > 1e-12 * state_n.dx:
        raise ValueError("states live on different grids")
    dt = state_np1.time - state_n.time
    if not dt > 0.0:
        raise ValueError("states are not one step apart (need increasing times)")
    cs = np.atleast_1d(np.asarray(constants, dtype=float))
    n = state_n.n_cells
    pad = weights.n_terms
    ext = state_n.extended(pad)
    col = cs[:, None]
    w = weights.weights
    # q(a, b; c) = g(a v c, b v c) - g(a ^ c, b ^ c); the lattice clips are
    # shared by every shift k, so take them (and the pair evaluators) once.
    ev_hi = flux.shifted_pair_evaluator(np.maximum(ext[None, :], col))
    ev_lo = flux.shifted_pair_evaluator(np.minimum(ext[None, :], col))
    acc = np.zeros((cs.size, n))
    for k in range(1, pad + 1):
        qk = ev_hi(k) - ev_lo(k)
        acc += (qk[:, pad : pad + n] - qk[:, pad - k : pad - k + n]) * w[k - 1]
    return (
        np.abs(state_np1.values[None, :] - col)
        - np.abs(state_n.values[None, :] - col)
        + dt * acc
    )


def entropy_residuals(
    state_n: GridState,
    state_np1: GridState,
    weights: QuadratureWeights,
    flux: TwoPointFlux,
    constants,
) -> np.ndarray:
    """Worst cell entropy residual for each Kruzhkov constant.

    residual_j(c) = |u^{n+1}_j - c| - |u^n_j - c|
                    + dt * sum_k [q(u_j, u_{j+k}; c) - q(u_{j-k}, u_j; c)] W_k

    and entropy satisfaction means max_j residual_j(c) <= 0 up to round-off.
    Returns max_j residual_j(c) for every c in ``constants``.
    """
    matrix = _entropy_residual_matrix(state_n, state_np1, weights, flux, constants)
    return matrix.max(axis=1)


def cell_entropy_residual(
    state_n: GridState,
    state_np1: GridState,
    weights: QuadratureWeights,
    flux: TwoPointFlux,
    c: float,
) -> float:
    """Worst cell entropy residual for a single Kruzhkov constant."""
    return float(entropy_residuals(state_n, state_np1, weights, flux, [c])[0])


def check_entropy(
    trajectory: Sequence[GridState],
    weights: QuadratureWeights,
    flux: TwoPointFlux,
    constants=None,
) -> InvariantReport:
    """Cell entropy inequality over every step and every Kruzhkov constant."""
    if constants is None:
        constants = kruzhkov_constants(trajectory[0])
    constants = np.atleast_1d(np.asarray(constants, dtype=float))
    scale = 1.0 + float(np.max(np.abs(trajectory[0].values)))
    tol = 1e-10 * scale
    worst, where = 0.0, None
    for n in range(len(trajectory) - 1):
        matrix = _entropy_residual_matrix(
            trajectory[n], trajectory[n + 1], weights, flux, constants
        )
        ic, j = np.unravel_index(int(np.argmax(matrix)), matrix.shape)
        if matrix[ic, j] > worst:
            worst, where = float(matrix[ic, j]), (n + 1, int(j), float(constants[ic]))
    return _report("cell_entropy", worst, tol, where)
