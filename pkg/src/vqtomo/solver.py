"""Primal-dual interior-point solver for one Hermitian PSD block plus a
nonnegative orthant under linear constraints.

The algorithm is path following on the homogeneous self-dual embedding with
Nesterov-Todd scaling and a Mehrotra predictor-corrector step. Inequalities
are converted to equalities with nonnegative slacks, so the internal form is

    minimize <c, x>  subject to  A x = b,  x in H_+^d (+) R_+^n.

Infeasibility is reported through the embedding's certificates: a dual ray
with b.y > 0 (primal infeasible) or a primal ray with <c, x> < 0 (dual
infeasible / unbounded).

Constraint functionals carry an optional rank-one factorization of their
Hermitian part; the Schur complement assembly exploits it, which is what
makes the tomography programs (whose rows are all projectors) cheap.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.linalg import cho_factor, cho_solve
from threadpoolctl import threadpool_limits

from .linalg import InvalidInputError, check_hermitian, hermitian_part

# BLAS thread fan-out loses badly on the small dense factorizations this
# solver runs; limit to one thread unless the Schur system is genuinely large
_BLAS_SINGLE_THREAD_CUTOFF = 768

OPTIMAL = "Optimal"
PRIMAL_INFEASIBLE = "PrimalInfeasible"
DUAL_INFEASIBLE = "DualInfeasible"
MAX_ITERATIONS = "MaxIterations"
NUMERICAL_FAILURE = "NumericalFailure"


@dataclass(frozen=True)
class SolverSettings:
    gap_tol: float = 1e-8
    feas_tol: float = 1e-8
    max_iters: int = 200
    step_fraction: float = 0.99

    def __post_init__(self):
        if min(self.gap_tol, self.feas_tol, self.max_iters) <= 0:
            raise InvalidInputError("tolerances and iteration budget must be positive")
        if not 0.0 < self.step_fraction < 1.0:
            raise InvalidInputError("step_fraction must lie in (0, 1)")


@dataclass(frozen=True, eq=False)
class LinOp:
    """Linear functional on (Hermitian block, nonnegative vector).

    The Hermitian part is either a dense Hermitian matrix or the rank-one
    form vec_scale * vec vec^dagger; nonneg maps orthant indices to
    coefficients.
    """

    matrix: np.ndarray | None = None
    vec: np.ndarray | None = None
    vec_scale: float = 1.0
    nonneg: dict[int, float] = field(default_factory=dict)

    def dense_matrix(self, d: int) -> np.ndarray:
        if self.matrix is not None:
            return self.matrix
        if self.vec is not None:
            return self.vec_scale * np.outer(self.vec, self.vec.conj())
        return np.zeros((d, d), dtype=complex)


@dataclass(eq=False)
class ConicProgram:
    psd_dim: int
    nonneg_count: int
    objective: LinOp
    equalities: list[tuple[LinOp, float]] = field(default_factory=list)
    inequalities: list[tuple[LinOp, float, str]] = field(default_factory=list)

    def __post_init__(self):
        if self.psd_dim < 0 or self.nonneg_count < 0:
            raise InvalidInputError("block sizes must be nonnegative")
        if self.psd_dim == 0 and self.nonneg_count == 0:
            raise InvalidInputError("program has no variables")
        for op in self._all_ops():
            self._check_op(op)
        for _, _, sense in self.inequalities:
            if sense not in ("<=", ">="):
                raise InvalidInputError(f"unknown inequality sense {sense!r}")

    def _all_ops(self):
        yield self.objective
        for op, _ in self.equalities:
            yield op
        for op, _, _ in self.inequalities:
            yield op

    def _check_op(self, op: LinOp) -> None:
        if op.matrix is not None and op.vec is not None:
            raise InvalidInputError("functional cannot carry both dense and rank-one parts")
        if op.matrix is not None:
            if op.matrix.shape != (self.psd_dim, self.psd_dim):
                raise InvalidInputError("functional matrix has wrong shape")
            check_hermitian(op.matrix, tol=1e-9)
        if op.vec is not None and op.vec.shape != (self.psd_dim,):
            raise InvalidInputError("functional vector has wrong shape")
        for idx in op.nonneg:
            if not 0 <= idx < self.nonneg_count:
                raise InvalidInputError(f"orthant index {idx} out of range")


@dataclass(eq=False)
class ConicSolution:
    status: str
    psd: np.ndarray | None
    nonneg: np.ndarray | None
    dual: np.ndarray | None
    slacks: np.ndarray | None
    objective_value: float
    gap: float
    iterations: int
    metadata: dict = field(default_factory=dict)


class _Compiled:
    """Internal equality-form program with structured PSD rows."""

    def __init__(self, prog: ConicProgram):
        self.d = prog.psd_dim
        self.m0 = prog.nonneg_count
        self.n_ineq = len(prog.inequalities)
        self.n = self.m0 + self.n_ineq
        rows: list[LinOp] = [op for op, _ in prog.equalities]
        rhs: list[float] = [r for _, r in prog.equalities]
        senses: list[float] = [0.0] * len(prog.equalities)
        for op, r, sense in prog.inequalities:
            rows.append(op)
            rhs.append(r)
            senses.append(1.0 if sense == "<=" else -1.0)
        self.p = len(rows)
        self.b = np.array(rhs, dtype=float)

        d = self.d
        dense_idx, dense_mats, r1_idx, r1_vecs, r1_scales = [], [], [], [], []
        g_rows, g_cols, g_vals = [], [], []
        for i, op in enumerate(rows):
            if op.matrix is not None:
                dense_idx.append(i)
                dense_mats.append(hermitian_part(op.matrix.astype(complex)))
            elif op.vec is not None:
                r1_idx.append(i)
                r1_vecs.append(op.vec.astype(complex))
                r1_scales.append(op.vec_scale)
            for j, vcoef in op.nonneg.items():
                g_rows.append(i)
                g_cols.append(j)
                g_vals.append(vcoef)
        for k, s in enumerate(senses[len(prog.equalities):]):
            g_rows.append(len(prog.equalities) + k)
            g_cols.append(self.m0 + k)
            g_vals.append(s)
        self.dense_idx = np.array(dense_idx, dtype=int)
        self.dense_mats = (
            np.stack(dense_mats) if dense_mats else np.zeros((0, d, d), dtype=complex)
        )
        self.r1_idx = np.array(r1_idx, dtype=int)
        self.r1_vecs = (
            np.stack(r1_vecs, axis=1) if r1_vecs else np.zeros((d, 0), dtype=complex)
        )
        self.r1_scales = np.array(r1_scales, dtype=float)
        self.G = sp.csr_matrix(
            (g_vals, (g_rows, g_cols)), shape=(self.p, self.n), dtype=float
        )
        self.GT = self.G.T.tocsr()

        self.c_mat = prog.objective.dense_matrix(d) if d else np.zeros((0, 0), complex)
        self.c_mat = hermitian_part(self.c_mat) if d else self.c_mat
        self.c_orth = np.zeros(self.n)
        for j, vcoef in prog.objective.nonneg.items():
            self.c_orth[j] = vcoef
        self.n_eq = len(prog.equalities)

    # -- linear maps ---------------------------------------------------------

    def apply_A(self, xmat: np.ndarray, xorth: np.ndarray) -> np.ndarray:
        out = self.G @ xorth if self.n else np.zeros(self.p)
        if self.d:
            if len(self.dense_idx):
                out[self.dense_idx] += np.einsum(
                    "ikl,kl->i", self.dense_mats.conj(), xmat
                ).real
            if len(self.r1_idx):
                quad = np.einsum(
                    "ij,ik,kj->j", self.r1_vecs.conj(), xmat, self.r1_vecs
                ).real
                out[self.r1_idx] += self.r1_scales * quad
        return out

    def apply_At_mat(self, y: np.ndarray) -> np.ndarray:
        if not self.d:
            return np.zeros((0, 0), dtype=complex)
        out = np.zeros((self.d, self.d), dtype=complex)
        if len(self.dense_idx):
            out += np.einsum("i,ikl->kl", y[self.dense_idx], self.dense_mats)
        if len(self.r1_idx):
            w = y[self.r1_idx] * self.r1_scales
            out += (self.r1_vecs * w) @ self.r1_vecs.conj().T
        return out

    def apply_At_orth(self, y: np.ndarray) -> np.ndarray:
        return self.GT @ y if self.n else np.zeros(0)

    def schur(self, rw: np.ndarray | None, w2_orth: np.ndarray) -> np.ndarray:
        m = np.zeros((self.p, self.p))
        if self.n:
            m += (self.G.multiply(w2_orth) @ self.GT).toarray()
        if self.d:
            kd, kr = len(self.dense_idx), len(self.r1_idx)
            if kd:
                t = (rw @ self.dense_mats) @ rw
                mdd = np.einsum("ikl,jkl->ij", self.dense_mats.conj(), t).real
                m[np.ix_(self.dense_idx, self.dense_idx)] += mdd
            if kr:
                k = self.r1_vecs.conj().T @ rw @ self.r1_vecs
                mrr = np.outer(self.r1_scales, self.r1_scales) * (
                    k.real**2 + k.imag**2
                )
                m[np.ix_(self.r1_idx, self.r1_idx)] += mrr
            if kd and kr:
                u = rw @ self.r1_vecs
                mdr = (
                    np.einsum("kj,ikl,lj->ij", u.conj(), self.dense_mats, u).real
                    * self.r1_scales
                )
                m[np.ix_(self.dense_idx, self.r1_idx)] += mdr
                m[np.ix_(self.r1_idx, self.dense_idx)] += mdr.T
        return m

    def inner(self, amat, aorth, bmat, borth) -> float:
        out = float(aorth @ borth) if self.n else 0.0
        if self.d:
            out += float(np.vdot(amat, bmat).real)
        return out


def _min_eig(m: np.ndarray) -> float:
    return float(np.linalg.eigvalsh(hermitian_part(m))[0]) if m.size else np.inf


def _norm_pair(mat: np.ndarray, orth: np.ndarray) -> float:
    s = float(np.vdot(mat, mat).real) if mat.size else 0.0
    s += float(orth @ orth) if orth.size else 0.0
    return np.sqrt(s)


class _NTScaling:
    """Nesterov-Todd scaling point of the current (x, z) pair."""

    def __init__(self, xmat, zmat, xorth, zorth):
        self.has_psd = xmat.size > 0
        if self.has_psd:
            lx = np.linalg.cholesky(hermitian_part(xmat))
            lz = np.linalg.cholesky(hermitian_part(zmat))
            u, sv, vt = np.linalg.svd(lz.conj().T @ lx)
            isq = 1.0 / np.sqrt(sv)
            self.lam = sv
            self.r = lx @ vt.conj().T * isq[np.newaxis, :]
            self.r_inv = isq[:, np.newaxis] * (u.conj().T @ lz.conj().T)
            self.rw = self.r @ self.r.conj().T
            self.lam_den = (sv[:, np.newaxis] + sv[np.newaxis, :]) / 2.0
            self.lam_sqrt_inv = isq
        else:
            self.rw = None
            self.lam = np.zeros(0)
        self.w_orth = np.sqrt(xorth / zorth) if xorth.size else np.zeros(0)
        self.lam_orth = np.sqrt(xorth * zorth) if xorth.size else np.zeros(0)
        self.w2_orth = self.w_orth**2

    def to_scaled_x(self, dxmat):
        return self.r_inv @ dxmat @ self.r_inv.conj().T

    def to_scaled_z(self, dzmat):
        return self.r.conj().T @ dzmat @ self.r

    def from_scaled_x(self, m):
        return self.r @ m @ self.r.conj().T

    def w2(self, m):
        return self.rw @ m @ self.rw


def _step_to_boundary(scaled_dir: np.ndarray, lam_sqrt_inv: np.ndarray) -> float:
    s = hermitian_part(scaled_dir) * lam_sqrt_inv[:, np.newaxis] * lam_sqrt_inv
    emin = float(np.linalg.eigvalsh(s)[0])
    return np.inf if emin >= 0 else -1.0 / emin


def _orth_step(x: np.ndarray, dx: np.ndarray) -> float:
    neg = dx < 0
    if not np.any(neg):
        return np.inf
    return float(np.min(-x[neg] / dx[neg]))


def solve(prog: ConicProgram, settings: SolverSettings = SolverSettings()) -> ConicSolution:
    """Solve a conic program; see module docstring for the algorithm."""
    cp = _Compiled(prog)
    limit = 1 if cp.p <= _BLAS_SINGLE_THREAD_CUTOFF else None
    with threadpool_limits(limits=limit):
        return _solve_compiled(cp, settings)


def _solve_compiled(cp: _Compiled, settings: SolverSettings) -> ConicSolution:
    d, n, p = cp.d, cp.n, cp.p
    nu = d + n

    xmat = np.eye(d, dtype=complex) if d else np.zeros((0, 0), complex)
    zmat = np.eye(d, dtype=complex) if d else np.zeros((0, 0), complex)
    xorth = np.ones(n)
    zorth = np.ones(n)
    y = np.zeros(p)
    tau, kappa = 1.0, 1.0

    bnorm, cnorm = 1.0 + np.linalg.norm(cp.b), 1.0 + _norm_pair(cp.c_mat, cp.c_orth)
    best = None
    status = MAX_ITERATIONS
    iters_done = 0

    def current_metrics():
        xs_mat, xs_orth, ys = xmat / tau, xorth / tau, y / tau
        zs_mat, zs_orth = zmat / tau, zorth / tau
        pres_v = cp.apply_A(xs_mat, xs_orth) - cp.b
        dres_mat = cp.c_mat - cp.apply_At_mat(ys) - zs_mat if d else np.zeros((0, 0))
        dres_orth = cp.c_orth - cp.apply_At_orth(ys) - zs_orth
        pobj = cp.inner(cp.c_mat, cp.c_orth, xs_mat, xs_orth)
        dobj = float(cp.b @ ys)
        pres = np.linalg.norm(pres_v) / bnorm
        dres = _norm_pair(dres_mat, dres_orth) / cnorm
        gap_rel = abs(pobj - dobj) / (1.0 + abs(pobj) + abs(dobj))
        return pres, dres, gap_rel, pobj, dobj

    debug = bool(os.environ.get("VQTOMO_SOLVER_DEBUG"))
    for it in range(settings.max_iters):
        iters_done = it
        pres, dres, gap_rel, pobj, dobj = current_metrics()
        if debug:
            print(
                f"it={it:3d} pres={pres:9.2e} dres={dres:9.2e} gap={gap_rel:9.2e} "
                f"tau={tau:9.2e} kappa={kappa:9.2e} pobj={pobj:9.2e} dobj={dobj:9.2e}"
            )
        score = max(pres, dres, gap_rel)
        if best is None or score < best[0]:
            best = (score, xmat.copy(), xorth.copy(), y.copy(), tau, pobj, dobj, pres, dres, gap_rel)
        if pres <= settings.feas_tol and dres <= settings.feas_tol and gap_rel <= settings.gap_tol:
            status = OPTIMAL
            break

        # infeasibility certificates from the embedding
        by = float(cp.b @ y)
        if by > 0:
            cert_mat = cp.apply_At_mat(y) + zmat if d else np.zeros((0, 0))
            cert_orth = cp.apply_At_orth(y) + zorth
            if _norm_pair(cert_mat, cert_orth) / by <= settings.feas_tol:
                status = PRIMAL_INFEASIBLE
                break
        cx = cp.inner(cp.c_mat, cp.c_orth, xmat, xorth)
        if -cx > 0:
            if np.linalg.norm(cp.apply_A(xmat, xorth)) / (-cx) <= settings.feas_tol:
                status = DUAL_INFEASIBLE
                break

        mu = (cp.inner(xmat, xorth, zmat, zorth) + tau * kappa) / (nu + 1)

        try:
            scal = _NTScaling(xmat, zmat, xorth, zorth)
        except np.linalg.LinAlgError:
            status = MAX_ITERATIONS if best is not None else NUMERICAL_FAILURE
            break

        m_schur = cp.schur(scal.rw if d else None, scal.w2_orth)
        if p:
            jitter = 0.0
            factor = None
            for _ in range(6):
                try:
                    factor = cho_factor(
                        m_schur + jitter * np.eye(p) if jitter else m_schur, lower=True
                    )
                    break
                except np.linalg.LinAlgError:
                    jitter = max(
                        jitter * 100, 1e-14 * (1 + np.trace(m_schur) / max(p, 1))
                    )
            if factor is None:
                status = MAX_ITERATIONS if best is not None else NUMERICAL_FAILURE
                break

            def msolve(rhs):
                sol = cho_solve(factor, rhs)
                # one refinement pass keeps late iterations honest
                sol += cho_solve(factor, rhs - m_schur @ sol)
                return sol

        else:

            def msolve(rhs):
                return rhs

        # residual vectors of the embedding
        r_p = cp.apply_A(xmat, xorth) - cp.b * tau
        r_d_mat = cp.c_mat * tau - cp.apply_At_mat(y) - zmat if d else np.zeros((0, 0))
        r_d_orth = cp.c_orth * tau - cp.apply_At_orth(y) - zorth
        r_g = float(cp.b @ y) - cp.inner(cp.c_mat, cp.c_orth, xmat, xorth) - kappa

        w2c_mat = scal.w2(cp.c_mat) if d else np.zeros((0, 0))
        w2c_orth = scal.w2_orth * cp.c_orth
        rhs2 = cp.apply_A(w2c_mat, w2c_orth) + cp.b
        dy2 = msolve(rhs2)
        dx2_mat = scal.w2(cp.apply_At_mat(dy2) - cp.c_mat) if d else np.zeros((0, 0))
        dx2_orth = scal.w2_orth * (cp.apply_At_orth(dy2) - cp.c_orth)
        denom = (
            float(cp.b @ dy2)
            - cp.inner(cp.c_mat, cp.c_orth, dx2_mat, dx2_orth)
            + kappa / tau
        )

        def direction(gamma, corr_mat, corr_orth, corr_tk):
            """Newton step targeting residual factor (1-gamma) and centering gamma*mu."""
            eta1 = (gamma - 1.0) * r_p
            eta2_mat = (gamma - 1.0) * r_d_mat
            eta2_orth = (gamma - 1.0) * r_d_orth
            eta3 = (gamma - 1.0) * r_g
            if d:
                h4 = np.diag(gamma * mu / scal.lam - scal.lam).astype(complex)
                if corr_mat is not None:
                    h4 -= corr_mat / scal.lam_den
                hmat = scal.from_scaled_x(h4)
            else:
                hmat = np.zeros((0, 0), dtype=complex)
            if n:
                h4o = (gamma * mu - scal.lam_orth**2) / scal.lam_orth
                if corr_orth is not None:
                    h4o -= corr_orth / scal.lam_orth
                horth = scal.w_orth * h4o
            else:
                horth = np.zeros(0)
            eta5 = gamma * mu - tau * kappa - corr_tk

            w2e_mat = scal.w2(eta2_mat) if d else np.zeros((0, 0), complex)
            w2e_orth = scal.w2_orth * eta2_orth
            rhs1 = eta1 - cp.apply_A(hmat + w2e_mat, horth + w2e_orth)
            dy1 = msolve(rhs1)
            dx1_mat = (
                hmat + scal.w2(cp.apply_At_mat(dy1) + eta2_mat) if d else hmat
            )
            dx1_orth = horth + scal.w2_orth * (cp.apply_At_orth(dy1) + eta2_orth)
            num = (
                eta3
                + eta5 / tau
                - float(cp.b @ dy1)
                + cp.inner(cp.c_mat, cp.c_orth, dx1_mat, dx1_orth)
            )
            dtau = num / denom
            dy = dy1 + dtau * dy2
            dxmat = dx1_mat + dtau * dx2_mat
            dxorth = dx1_orth + dtau * dx2_orth
            dzmat = (
                -cp.apply_At_mat(dy) + cp.c_mat * dtau - eta2_mat
                if d
                else np.zeros((0, 0), complex)
            )
            dzorth = -cp.apply_At_orth(dy) + cp.c_orth * dtau - eta2_orth
            dkappa = (eta5 - kappa * dtau) / tau
            return dxmat, dxorth, dy, dzmat, dzorth, dtau, dkappa

        def max_step(dxmat, dxorth, dzmat, dzorth, dtau, dkappa):
            alpha = np.inf
            if d:
                alpha = min(
                    alpha,
                    _step_to_boundary(scal.to_scaled_x(dxmat), scal.lam_sqrt_inv),
                    _step_to_boundary(scal.to_scaled_z(dzmat), scal.lam_sqrt_inv),
                )
            if n:
                alpha = min(alpha, _orth_step(xorth, dxorth), _orth_step(zorth, dzorth))
            if dtau < 0:
                alpha = min(alpha, -tau / dtau)
            if dkappa < 0:
                alpha = min(alpha, -kappa / dkappa)
            return alpha

        # predictor
        aff = direction(0.0, None, None, 0.0)
        a_aff = min(1.0, max_step(aff[0], aff[1], aff[3], aff[4], aff[5], aff[6]))
        mu_aff = (
            cp.inner(
                xmat + a_aff * aff[0],
                xorth + a_aff * aff[1],
                zmat + a_aff * aff[3],
                zorth + a_aff * aff[4],
            )
            + (tau + a_aff * aff[5]) * (kappa + a_aff * aff[6])
        ) / (nu + 1)
        sigma = min(1.0, max(0.0, mu_aff / mu)) ** 3

        # corrector
        if d:
            dxh = scal.to_scaled_x(aff[0])
            dzh = scal.to_scaled_z(aff[3])
            prod = dxh @ dzh
            corr_mat = hermitian_part(prod)
        else:
            corr_mat = None
        # scaled orthant corrector: the w factors cancel pairwise
        corr_orth = aff[1] * aff[4] if n else None
        corr_tk = aff[5] * aff[6]
        comb = direction(sigma, corr_mat, corr_orth, corr_tk)
        alpha = settings.step_fraction * max_step(
            comb[0], comb[1], comb[3], comb[4], comb[5], comb[6]
        )
        alpha = min(1.0, alpha)
        if not np.isfinite(alpha) or alpha <= 1e-13:
            # step collapse: endgame stall, report the best iterate uncertified
            status = MAX_ITERATIONS if best is not None else NUMERICAL_FAILURE
            break

        for _ in range(30):
            nxmat = hermitian_part(xmat + alpha * comb[0]) if d else xmat
            nzmat = hermitian_part(zmat + alpha * comb[3]) if d else zmat
            nxorth = xorth + alpha * comb[1]
            nzorth = zorth + alpha * comb[4]
            ntau = tau + alpha * comb[5]
            nkappa = kappa + alpha * comb[6]
            ok = ntau > 0 and nkappa > 0
            if ok and n:
                ok = np.all(nxorth > 0) and np.all(nzorth > 0)
            if ok and d:
                ok = _min_eig(nxmat) > 0 and _min_eig(nzmat) > 0
            if ok:
                break
            alpha *= 0.8
        else:
            status = MAX_ITERATIONS if best is not None else NUMERICAL_FAILURE
            break
        xmat, zmat, xorth, zorth = nxmat, nzmat, nxorth, nzorth
        y = y + alpha * comb[2]
        tau, kappa = ntau, nkappa
        iters_done = it + 1

    # assemble the user-facing solution from the best iterate seen
    if status in (OPTIMAL, MAX_ITERATIONS, NUMERICAL_FAILURE) and best is not None:
        if status != OPTIMAL:
            _, xmat, xorth, y, tau, pobj, dobj, pres, dres, gap_rel = best
        else:
            pres, dres, gap_rel, pobj, dobj = current_metrics()
        xs_mat = hermitian_part(xmat / tau) if d else None
        xs_orth = xorth / tau
        ys = y / tau
        sol_nonneg = xs_orth[: cp.m0] if cp.m0 else np.zeros(0)
        slacks = xs_orth[cp.m0 :] if cp.n_ineq else np.zeros(0)
        return ConicSolution(
            status=status,
            psd=xs_mat,
            nonneg=sol_nonneg,
            dual=ys,
            slacks=slacks,
            objective_value=float(pobj),
            gap=abs(pobj - dobj),
            iterations=iters_done,
            metadata={
                "direction": "NT",
                "embedding": "homogeneous-self-dual",
                "primal_residual": float(pres),
                "dual_residual": float(dres),
                "relative_gap": float(gap_rel),
            },
        )

    if status == PRIMAL_INFEASIBLE:
        scale = float(cp.b @ y)
        return ConicSolution(
            status=status,
            psd=None,
            nonneg=None,
            dual=y / scale,
            slacks=None,
            objective_value=np.nan,
            gap=np.nan,
            iterations=iters_done,
            metadata={"certificate": "b.y = 1, A^T y <= 0 (cone order)"},
        )
    # dual infeasible
    cx = cp.inner(cp.c_mat, cp.c_orth, xmat, xorth)
    xs_mat = hermitian_part(xmat / -cx) if d else None
    return ConicSolution(
        status=DUAL_INFEASIBLE,
        psd=xs_mat,
        nonneg=xorth[: cp.m0] / -cx,
        dual=None,
        slacks=None,
        objective_value=np.nan,
        gap=np.nan,
        iterations=iters_done,
        metadata={"certificate": "A x = 0, <c, x> = -1, x in cone"},
    )


def kkt_residuals(prog: ConicProgram, sol: ConicSolution) -> tuple[float, float, float]:
    """Recompute (primal_res, dual_res, gap) from scratch.

    Residuals are worst-case violations: constraint residuals and cone
    negativity on the primal side; dual-slack cone negativity and multiplier
    sign violations on the dual side. Gap is |<c,x> - b.y|.
    """
    if sol.psd is None and prog.psd_dim:
        raise InvalidInputError("solution carries no PSD block")
    d = prog.psd_dim
    x = sol.psd if d else np.zeros((0, 0))
    u = sol.nonneg if sol.nonneg is not None else np.zeros(0)
    y = sol.dual

    def apply_op(op: LinOp) -> float:
        val = 0.0
        if d:
            if op.matrix is not None:
                val += float(np.vdot(op.matrix, x).real)
            elif op.vec is not None:
                val += op.vec_scale * float((op.vec.conj() @ x @ op.vec).real)
        for j, coef in op.nonneg.items():
            val += coef * u[j]
        return val

    primal = 0.0
    for op, rhs in prog.equalities:
        primal = max(primal, abs(apply_op(op) - rhs))
    for op, rhs, sense in prog.inequalities:
        v = apply_op(op)
        primal = max(primal, max(0.0, v - rhs) if sense == "<=" else max(0.0, rhs - v))
    if d:
        primal = max(primal, max(0.0, -_min_eig(x)))
    if u.size:
        primal = max(primal, max(0.0, -float(u.min())))

    rows = [op for op, _ in prog.equalities] + [op for op, _, _ in prog.inequalities]
    rhs_all = np.array(
        [r for _, r in prog.equalities] + [r for _, r, _ in prog.inequalities]
    )
    zmat = prog.objective.dense_matrix(d).astype(complex) if d else np.zeros((0, 0))
    zorth = np.zeros(prog.nonneg_count)
    for j, coef in prog.objective.nonneg.items():
        zorth[j] = coef
    for yi, op in zip(y, rows):
        if d:
            zmat = zmat - yi * op.dense_matrix(d)
        for j, coef in op.nonneg.items():
            zorth[j] -= yi * coef
    dual = 0.0
    if d:
        dual = max(dual, max(0.0, -_min_eig(zmat)))
    if prog.nonneg_count:
        dual = max(dual, max(0.0, -float(zorth.min())))
    for yi, (_, _, sense) in zip(y[len(prog.equalities):], prog.inequalities):
        dual = max(dual, max(0.0, yi) if sense == "<=" else max(0.0, -yi))

    pobj = apply_op(prog.objective)
    gap = abs(pobj - float(y @ rhs_all))
    return float(primal), float(dual), float(gap)


def dump_program(prog: ConicProgram, path: str) -> None:
    """Debug dump with dense constraint matrices, for cross-solver comparison."""

    def op_json(op: LinOp) -> dict:
        out: dict = {"nonneg": {str(k): v for k, v in op.nonneg.items()}}
        if prog.psd_dim:
            m = op.dense_matrix(prog.psd_dim)
            out["matrix"] = [
                [{"re": float(z.real), "im": float(z.imag)} for z in row] for row in m
            ]
        return out

    data = {
        "psd_dim": prog.psd_dim,
        "nonneg_count": prog.nonneg_count,
        "objective": op_json(prog.objective),
        "equalities": [
            {"op": op_json(op), "rhs": rhs} for op, rhs in prog.equalities
        ],
        "inequalities": [
            {"op": op_json(op), "rhs": rhs, "sense": sense}
            for op, rhs, sense in prog.inequalities
        ],
    }
    with open(path, "w") as fh:
        json.dump(data, fh, sort_keys=True)
