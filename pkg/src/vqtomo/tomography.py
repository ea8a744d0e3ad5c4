"""Variational reconstruction of a density matrix from measurement records.

The estimate solves, over trace-one PSD matrices and nonnegative per-record
relaxations Delta,

    minimize  Tr(H rho) + sum_k Delta_k
    s.t.      f_k - eps_k - Delta_k <= Tr(rho P_k) <= f_k + eps_k + Delta_k,

where H sums the unmeasured projectors, f_k is the recorded frequency and
eps_k its declared noise bound. The declared bound is a free allowance, so
recorded noise is never chased: a state compatible with every record within
its stated uncertainty fits with all Delta at zero, and the interior-point
center of that feasible set is the estimate. Delta prices only relaxation
beyond the declared bounds, which is what incompatible data requires. With
noiseless records (eps = 0) the program reduces to the plain two-sided
relaxed form and exactly consistent data pins the state.

Records with frequency zero get no relaxation column: their two inequalities
collapse to Tr(rho P) = 0 regardless of Delta.

Incompatibility detection is a two-round leave-one-class-out consensus (see
detect_incompatible); the signal "the relaxation a record needs exceeds its
declared noise bound by threshold_factor" is evaluated against
cross-validated reference fits rather than the joint fit, which would
compromise toward the incompatible records and hide them.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from . import linalg, witness
from .bases import ProjectorSet
from .linalg import InvalidInputError
from .solver import (
    MAX_ITERATIONS,
    OPTIMAL,
    ConicProgram,
    LinOp,
    SolverSettings,
    solve,
)
from .states import MeasurementRecord

DETECT_FLOOR = 0.02
_REFERENCE_SETTINGS = SolverSettings(gap_tol=1e-6, feas_tol=1e-6, max_iters=100)


class ReconstructionFailedError(RuntimeError):
    """The interior-point solver failed on a reconstruction program."""


@dataclass(frozen=True, eq=False)
class TomographyProblem:
    projector_set: ProjectorSet
    measured: list[MeasurementRecord]
    unmeasured_indices: tuple[int, ...]

    def __post_init__(self):
        n = self.projector_set.n_projectors
        seen = {r.projector_index for r in self.measured}
        unmeasured = set(self.unmeasured_indices)
        if seen & unmeasured:
            raise InvalidInputError("measured and unmeasured index sets overlap")
        if seen | unmeasured != set(range(n)):
            raise InvalidInputError("index sets must cover the whole projector range")


def problem_from_records(
    ps: ProjectorSet, records: list[MeasurementRecord]
) -> TomographyProblem:
    """Problem whose unknown set is the complement of the recorded projectors."""
    seen = {r.projector_index for r in records}
    unmeasured = tuple(lam for lam in range(ps.n_projectors) if lam not in seen)
    return TomographyProblem(ps, list(records), unmeasured)


@dataclass(eq=False)
class TomographyResult:
    estimate: np.ndarray
    deltas: np.ndarray          # relaxation beyond each record's declared bound
    cost: float                 # Tr(H estimate)
    objective: float            # cost + sum(deltas)
    solver_status: str
    incompatible: list[int]
    certified: bool
    problem: TomographyProblem | None = None
    diagnostics: dict | None = None
    solver_info: dict = field(default_factory=dict)


def cost_operator(ps: ProjectorSet, unmeasured: tuple[int, ...]) -> np.ndarray:
    """Sum of the unmeasured projectors (PSD by construction)."""
    d = ps.dim
    h = np.zeros((d, d), dtype=complex)
    by_class: dict[int, list[int]] = {}
    for lam in unmeasured:
        l, i = ps.class_member(lam)
        by_class.setdefault(l, []).append(i)
    for l, members in by_class.items():
        cols = ps.bases[l][:, members]
        h += cols @ cols.conj().T
    return linalg.hermitian_part(h)


def assemble_sdp(tp: TomographyProblem) -> ConicProgram:
    """Conic program for the reconstruction; see the module docstring."""
    ps = tp.projector_set
    d = ps.dim
    n_rec = len(tp.measured)
    h = cost_operator(ps, tp.unmeasured_indices)
    objective = LinOp(matrix=h, nonneg={k: 1.0 for k in range(n_rec)})
    equalities = [(LinOp(matrix=np.eye(d, dtype=complex)), 1.0)]
    inequalities = []
    for k, rec in enumerate(tp.measured):
        v = ps.vector(rec.projector_index)
        f, eps = rec.frequency, rec.epsilon
        coef = 1.0 if f > 0 else 0.0
        inequalities.append((LinOp(vec=v, nonneg={k: coef}), f - eps, ">="))
        inequalities.append((LinOp(vec=v, nonneg={k: -coef}), f + eps, "<="))
    return ConicProgram(
        psd_dim=d,
        nonneg_count=n_rec,
        objective=objective,
        equalities=equalities,
        inequalities=inequalities,
    )


def _solve_records(
    ps: ProjectorSet, records: list[MeasurementRecord], settings: SolverSettings
) -> np.ndarray:
    tp = problem_from_records(ps, records)
    sol = solve(assemble_sdp(tp), settings)
    if sol.status not in (OPTIMAL, MAX_ITERATIONS):
        raise ReconstructionFailedError(f"reference fit returned {sol.status}")
    return linalg.project_to_density(sol.psd)


def _stress_flags(
    ps: ProjectorSet,
    records: list[MeasurementRecord],
    reference: np.ndarray,
    threshold_factor: float,
    floor: float,
) -> list[int]:
    """Records deviating from the reference beyond declared noise and factor.

    The threshold charges the declared bound twice: once for the record and
    once (scaled to the reference value) for the reference itself, which was
    fit through records of the same noise level.
    """
    flags = []
    for rec in records:
        v = ps.vector(rec.projector_index)
        q = float((v.conj() @ reference @ v).real)
        f = rec.frequency
        stress = abs(q - f) * f / max(q, 1e-9)
        thr = threshold_factor * rec.epsilon * (1.0 + (q / f if f > 0 else 0.0)) + floor
        if stress > thr:
            flags.append(rec.projector_index)
    return flags


def detect_incompatible(
    result: TomographyResult,
    records: list[MeasurementRecord] | None = None,
    threshold_factor: float = 3.0,
    floor: float = DETECT_FLOOR,
) -> list[int]:
    """Projector indices whose records cannot be reconciled with the rest.

    Two-round leave-one-class-out consensus. Round one refits the state
    without each complete measurement in turn and flags that measurement's
    records whose relaxation against the refit exceeds threshold_factor times
    the declared bound (plus an absolute floor covering solver dust). Round
    two refits on the never-suspected classes only and keeps the flags that
    survive against this consensus, discarding round-one artifacts caused by
    incompatible records contaminating the reference fits.

    Returns an empty list for mutually compatible data.
    """
    if result.problem is None:
        raise InvalidInputError("result carries no problem; rerun reconstruct")
    tp = result.problem
    if records is None:
        records = tp.measured
    if [r.projector_index for r in records] != [
        r.projector_index for r in tp.measured
    ]:
        raise InvalidInputError("records do not match the reconstructed problem")
    ps = tp.projector_set
    by_class: dict[int, list[MeasurementRecord]] = {}
    for rec in records:
        cl, _ = ps.class_member(rec.projector_index)
        by_class.setdefault(cl, []).append(rec)
    if len(by_class) < 2:
        return []

    candidates: dict[int, list[int]] = {}
    for cl, recs_cl in by_class.items():
        rest = [r for r in records if ps.class_member(r.projector_index)[0] != cl]
        ref = _solve_records(ps, rest, _REFERENCE_SETTINGS)
        flagged = _stress_flags(ps, recs_cl, ref, threshold_factor, floor)
        if flagged:
            candidates[cl] = flagged
    if not candidates:
        return []

    clean = [
        r for r in records if ps.class_member(r.projector_index)[0] not in candidates
    ]
    if len({ps.class_member(r.projector_index)[0] for r in clean}) >= 2:
        consensus = _solve_records(ps, clean, _REFERENCE_SETTINGS)
        flags: list[int] = []
        for cl in candidates:
            flags += _stress_flags(
                ps, by_class[cl], consensus, threshold_factor, floor
            )
        return sorted(flags)
    # almost everything suspect: keep the cross-validated round-one verdicts
    return sorted(lam for fl in candidates.values() for lam in fl)


def diagnostics(
    estimate: np.ndarray,
    reference: np.ndarray,
    dims: tuple[int, int] | None = None,
) -> dict:
    """Purity/fidelity/trace-distance bundle, plus the estimate's witnessed
    entanglement when a bipartition is given."""
    out = {
        "purity": linalg.purity(estimate),
        "fidelity": linalg.fidelity(estimate, reference),
        "trace_distance": linalg.trace_distance(estimate, reference),
    }
    if dims is not None:
        out["witnessed_entanglement"] = witness.entanglement_value(estimate, dims)
    return out


def reconstruct(
    tp: TomographyProblem,
    settings: SolverSettings = SolverSettings(),
    reference: np.ndarray | None = None,
    witness_dims: tuple[int, int] | None = None,
    detect: bool = False,
    threshold_factor: float = 3.0,
) -> TomographyResult:
    """Solve the reconstruction program and post-process the estimate.

    The solver's PSD block is symmetrized, eigenvalue-clipped at zero and
    trace-renormalized. Diagnostics are computed against `reference` when
    given; incompatibility detection (leave-one-class-out refits, one solve
    per measured class) runs only when `detect` is set.
    """
    prog = assemble_sdp(tp)
    sol = solve(prog, settings)
    if sol.status not in (OPTIMAL, MAX_ITERATIONS):
        raise ReconstructionFailedError(
            f"solver returned {sol.status} on a reconstruction program"
        )
    estimate = linalg.project_to_density(sol.psd)
    deltas = np.maximum(sol.nonneg, 0.0)
    cost = float(
        np.vdot(cost_operator(tp.projector_set, tp.unmeasured_indices), estimate).real
    )
    result = TomographyResult(
        estimate=estimate,
        deltas=deltas,
        cost=cost,
        objective=cost + float(deltas.sum()),
        solver_status=sol.status,
        incompatible=[],
        certified=sol.status == OPTIMAL,
        problem=tp,
        solver_info={"iterations": sol.iterations, "gap": sol.gap, **sol.metadata},
    )
    if detect:
        result.incompatible = detect_incompatible(
            result, tp.measured, threshold_factor
        )
    if reference is not None:
        result.diagnostics = diagnostics(estimate, reference, witness_dims)
    return result


def _matrix_to_json(m: np.ndarray) -> list:
    return [[{"re": float(z.real), "im": float(z.imag)} for z in row] for row in m]


def matrix_from_json(data: list) -> np.ndarray:
    return np.array([[e["re"] + 1j * e["im"] for e in row] for row in data])


def result_to_json(result: TomographyResult) -> dict:
    return {
        "estimate": _matrix_to_json(result.estimate),
        "deltas": [float(v) for v in result.deltas],
        "cost": result.cost,
        "objective": result.objective,
        "status": result.solver_status,
        "certified": result.certified,
        "incompatible": list(map(int, result.incompatible)),
        "diagnostics": result.diagnostics,
    }


def save_result(result: TomographyResult, path: str) -> None:
    with open(path, "w") as fh:
        json.dump(result_to_json(result), fh, sort_keys=True)
