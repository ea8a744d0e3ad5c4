"""Trace-one decomposable entanglement witnesses via the conic solver.

A decomposable witness is W = P + Q^Gamma with P, Q PSD (Gamma = partial
transpose on the second factor). Minimizing Tr(W rho) over trace-one W of
this form is a semidefinite program; a negative optimum certifies that rho
violates the PPT criterion. The pair (P, Q) is optimized as the diagonal
blocks of a single 2d x 2d PSD variable: off-diagonal blocks affect neither
the objective nor the constraints, so the reduction is exact.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import linalg
from .linalg import InvalidInputError
from .solver import OPTIMAL, ConicProgram, LinOp, SolverSettings, solve


class UndefinedFractionError(InvalidInputError):
    """Entanglement fraction is undefined for a separable reference state."""


class WitnessFailedError(RuntimeError):
    """The witness program did not reach a certified optimum."""


@dataclass(eq=False)
class WitnessResult:
    witness: np.ndarray
    value: float
    entanglement: float
    p_block: np.ndarray
    q_block: np.ndarray
    gap: float
    solver_status: str


def decomposable_witness(
    rho: np.ndarray,
    dims: tuple[int, int],
    settings: SolverSettings = SolverSettings(),
) -> WitnessResult:
    """Optimal trace-one decomposable witness for the given bipartition."""
    da, db = dims
    d = da * db
    if rho.shape != (d, d):
        raise InvalidInputError(f"state shape {rho.shape} incompatible with dims {dims}")
    rho = linalg.hermitian_part(rho)
    rho_pt = linalg.partial_transpose(rho, dims, "B")
    cost = np.zeros((2 * d, 2 * d), dtype=complex)
    cost[:d, :d] = rho
    cost[d:, d:] = rho_pt
    prog = ConicProgram(
        psd_dim=2 * d,
        nonneg_count=0,
        objective=LinOp(matrix=cost),
        equalities=[(LinOp(matrix=np.eye(2 * d, dtype=complex)), 1.0)],
    )
    sol = solve(prog, settings)
    if sol.status != OPTIMAL:
        raise WitnessFailedError(f"witness program ended with status {sol.status}")
    p_block = linalg.hermitian_part(sol.psd[:d, :d])
    q_block = linalg.hermitian_part(sol.psd[d:, d:])
    w = p_block + linalg.partial_transpose(q_block, dims, "B")
    value = float(np.vdot(w, rho).real)
    return WitnessResult(
        witness=w,
        value=value,
        entanglement=min(value, 0.0),
        p_block=p_block,
        q_block=q_block,
        gap=sol.gap,
        solver_status=sol.status,
    )


def entanglement_value(
    rho: np.ndarray,
    dims: tuple[int, int],
    settings: SolverSettings = SolverSettings(),
) -> float:
    """Witnessed entanglement: min(Tr(W rho), 0) at the optimal witness."""
    return decomposable_witness(rho, dims, settings).entanglement


def entanglement_fraction(
    estimate: np.ndarray,
    truth: np.ndarray,
    dims: tuple[int, int],
    settings: SolverSettings = SolverSettings(),
) -> float:
    """E(estimate) / E(truth); raises when the truth carries no entanglement."""
    e_truth = entanglement_value(truth, dims, settings)
    if e_truth == 0.0:
        raise UndefinedFractionError("reference state has witnessed entanglement 0")
    return entanglement_value(estimate, dims, settings) / e_truth
