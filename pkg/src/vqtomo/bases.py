"""Informationally complete measurement sets and linear inversion.

Two families are provided: mutually unbiased bases for prime-power
dimensions (d+1 complete measurements whose cross-basis overlaps are all
1/d), and the generalized Gell-Mann observable set for arbitrary dimension,
turned into projective measurements through its eigenbases.

A ProjectorSet stores one unitary matrix per complete measurement; column i
of class l is the unit vector of the rank-one projector with flat index
lambda = l*d + i.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .gf import GaloisField, factor_prime_power
from .linalg import InvalidInputError, check_hermitian

MUB_TOL = 1e-10
COND_LIMIT = 1e12


class UnsupportedDimensionError(InvalidInputError):
    """Requested construction does not exist at this dimension."""


class SingularBasisError(InvalidInputError):
    """Overlap matrix is numerically singular."""


@dataclass(frozen=True, eq=False)
class ProjectorSet:
    """Ordered rank-one projectors grouped into complete measurements."""

    dim: int
    bases: tuple[np.ndarray, ...]  # unitary d x d per class; columns are vectors
    metadata: dict = field(default_factory=dict)

    @property
    def n_classes(self) -> int:
        return len(self.bases)

    @property
    def n_projectors(self) -> int:
        return self.n_classes * self.dim

    def class_member(self, lam: int) -> tuple[int, int]:
        """Flat index -> (class, member)."""
        if not 0 <= lam < self.n_projectors:
            raise InvalidInputError(f"projector index {lam} out of range")
        return divmod(lam, self.dim)

    def vector(self, lam: int) -> np.ndarray:
        l, i = self.class_member(lam)
        return self.bases[l][:, i]

    def projector(self, lam: int) -> np.ndarray:
        v = self.vector(lam)
        return np.outer(v, v.conj())

    @property
    def independent_subset(self) -> tuple[int, ...]:
        """First d-1 projectors of each class: a minimal spanning set with I."""
        d = self.dim
        return tuple(l * d + i for l in range(self.n_classes) for i in range(d - 1))

    def class_indices(self, l: int) -> range:
        return range(l * self.dim, (l + 1) * self.dim)


def _verify_projector_set(ps: ProjectorSet, unbiased: bool) -> None:
    d = ps.dim
    for basis in ps.bases:
        gram = basis.conj().T @ basis
        if np.max(np.abs(gram - np.eye(d))) > MUB_TOL:
            raise RuntimeError("class is not an orthonormal basis")
    if unbiased:
        for a in range(ps.n_classes):
            for b in range(a + 1, ps.n_classes):
                ov = np.abs(ps.bases[a].conj().T @ ps.bases[b]) ** 2
                if np.max(np.abs(ov - 1.0 / d)) > MUB_TOL:
                    raise RuntimeError(f"classes {a},{b} are not mutually unbiased")


def _mub_odd_prime_power(p: int, n: int) -> ProjectorSet:
    """Character-sum construction over GF(p^n), odd p."""
    gf = GaloisField(p**n)
    q = gf.q
    omega = np.exp(2j * np.pi / p)
    bases = [np.eye(q, dtype=complex)]
    for a in range(q):
        basis = np.empty((q, q), dtype=complex)
        for b in range(q):
            col = np.empty(q, dtype=complex)
            for x in range(q):
                expo = gf.trace(gf.add(gf.mul(a, gf.mul(x, x)), gf.mul(b, x)))
                col[x] = omega**expo
            basis[:, b] = col / np.sqrt(q)
        bases.append(basis)
    return ProjectorSet(
        dim=q,
        bases=tuple(bases),
        metadata={
            "construction": "mub-character-sum",
            "field_polynomial": list(gf.modulus),
            "characteristic": p,
        },
    )


def _weyl_x(gf: GaloisField, alpha: int) -> np.ndarray:
    """Shift operator X(alpha)|x> = |x + alpha> on the field-labelled basis."""
    q = gf.q
    m = np.zeros((q, q))
    for x in range(q):
        m[gf.add(x, alpha), x] = 1.0
    return m


def _weyl_z_phases(gf: GaloisField, beta: int) -> np.ndarray:
    return np.array([(-1.0) ** gf.trace(gf.mul(beta, x)) for x in range(gf.q)])


def _mub_char2(n: int) -> ProjectorSet:
    """Common eigenbases of the d+1 maximal commuting Weyl classes, d = 2^n.

    The operators W(alpha, a*alpha) = X(alpha) Z(a*alpha), alpha != 0, commute
    exactly within a class; a generic Hermitian combination is degeneracy-free
    and its eigenbasis is the class measurement. The unbiasedness check below
    is the contract, independent of the combination used.
    """
    gf = GaloisField(2**n)
    q = gf.q
    bases = [np.eye(q, dtype=complex)]  # the Z-class (computational basis)
    for a in range(q):
        for attempt in range(8):
            rng = np.random.default_rng(0xB10C + 7919 * a + attempt)
            coeffs = rng.standard_normal(q - 1)
            h = np.zeros((q, q), dtype=complex)
            for k, alpha in enumerate(range(1, q)):
                beta = gf.mul(a, alpha)
                w = _weyl_x(gf, alpha) * _weyl_z_phases(gf, beta)[np.newaxis, :]
                if gf.trace(gf.mul(alpha, beta)) % 2:
                    w = 1j * w  # anti-Hermitian Weyl operator, rotate to Hermitian
                h += coeffs[k] * w
            evals, basis = np.linalg.eigh(h)
            if np.min(np.diff(evals)) > 1e-8 * max(1.0, np.max(np.abs(evals))):
                bases.append(basis)
                break
        else:
            raise RuntimeError(f"no non-degenerate combination found for class {a}")
    return ProjectorSet(
        dim=q,
        bases=tuple(bases),
        metadata={
            "construction": "mub-weyl-eigenbasis",
            "field_polynomial": list(gf.modulus),
            "characteristic": 2,
        },
    )


def mub(d: int) -> ProjectorSet:
    """d+1 mutually unbiased complete measurements for prime-power d <= 64."""
    pn = factor_prime_power(d)
    if pn is None:
        raise UnsupportedDimensionError(
            f"d = {d} is not a prime power; use gell_mann_observables instead"
        )
    p, n = pn
    ps = _mub_char2(n) if p == 2 else _mub_odd_prime_power(p, n)
    _verify_projector_set(ps, unbiased=True)
    return ps


def gell_mann_observables(d: int) -> list[np.ndarray]:
    """The d^2 - 1 generalized Gell-Mann matrices plus the identity (last).

    Traceless members satisfy Tr(s_i s_j) = 2 delta_ij.
    """
    if d < 2:
        raise InvalidInputError("dimension must be at least 2")
    obs: list[np.ndarray] = []
    for j in range(d):
        for k in range(j + 1, d):
            m = np.zeros((d, d), dtype=complex)
            m[j, k] = m[k, j] = 1.0
            obs.append(m)
            m = np.zeros((d, d), dtype=complex)
            m[j, k] = -1j
            m[k, j] = 1j
            obs.append(m)
    for l in range(1, d):
        m = np.zeros((d, d), dtype=complex)
        m[np.arange(l), np.arange(l)] = 1.0
        m[l, l] = -l
        obs.append(np.sqrt(2.0 / (l * (l + 1))) * m)
    obs.append(np.eye(d, dtype=complex))
    return obs


def observables_to_projectors(observables: list[np.ndarray]) -> ProjectorSet:
    """One complete measurement per observable, from its eigenbasis.

    Degenerate eigenvalues are resolved into the orthonormal eigenbasis that
    the decomposition returns, so every class has exactly d rank-one members.
    """
    if not observables:
        raise InvalidInputError("need at least one observable")
    d = observables[0].shape[0]
    bases = []
    for ob in observables:
        ob = check_hermitian(ob)
        if ob.shape != (d, d):
            raise InvalidInputError("observables must share one dimension")
        _, v = np.linalg.eigh(ob)
        bases.append(v.astype(complex))
    ps = ProjectorSet(dim=d, bases=tuple(bases), metadata={"construction": "eigenprojectors"})
    _verify_projector_set(ps, unbiased=False)
    return ps


class OverlapMatrix:
    """Gram matrix S_mu_nu = Tr(P_mu P_nu) of a projector subset."""

    def __init__(self, entries: np.ndarray):
        self.entries = entries
        self.size = entries.shape[0]
        cond = np.linalg.cond(entries)
        if not np.isfinite(cond) or cond > COND_LIMIT:
            raise SingularBasisError(f"overlap matrix condition number {cond:.3e}")
        self.condition_number = float(cond)
        self._cho = None

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        from scipy.linalg import cho_factor, cho_solve

        if self._cho is None:
            self._cho = cho_factor(self.entries)
        return cho_solve(self._cho, rhs)


def overlap_matrix(ps: ProjectorSet, subset: list[int] | None = None) -> OverlapMatrix:
    if subset is None:
        subset = list(ps.independent_subset)
    vecs = np.stack([ps.vector(lam) for lam in subset], axis=1)
    s = np.abs(vecs.conj().T @ vecs) ** 2
    return OverlapMatrix(s)


def linear_inversion(
    probabilities: np.ndarray, ps: ProjectorSet, subset: list[int] | None = None
) -> np.ndarray:
    """Reconstruct the expansion C0 I + sum_l C_l P_l from exact probabilities.

    Solves the Gram system of the basis {I, P_l} (the identity row enforces
    C0 = (1 - sum C)/d). The output is Hermitian with unit trace but is not
    positive unless the probabilities are exactly consistent with a state.
    """
    if subset is None:
        subset = list(ps.independent_subset)
    probabilities = np.asarray(probabilities, dtype=float)
    if probabilities.shape != (len(subset),):
        raise InvalidInputError(
            f"expected {len(subset)} probabilities, got {probabilities.shape}"
        )
    d = ps.dim
    m = len(subset)
    s = overlap_matrix(ps, subset).entries
    gram = np.empty((m + 1, m + 1))
    gram[0, 0] = d
    gram[0, 1:] = 1.0
    gram[1:, 0] = 1.0
    gram[1:, 1:] = s
    cond = np.linalg.cond(gram)
    if not np.isfinite(cond) or cond > COND_LIMIT:
        raise SingularBasisError(f"augmented overlap matrix condition number {cond:.3e}")
    rhs = np.concatenate(([1.0], probabilities))
    coeff = np.linalg.solve(gram, rhs)
    out = np.eye(d, dtype=complex) * coeff[0]
    for c, lam in zip(coeff[1:], subset):
        v = ps.vector(lam)
        out += c * np.outer(v, v.conj())
    return out


def projector_set_to_json(ps: ProjectorSet) -> dict:
    """JSON-compatible dict: explicit projector matrices plus metadata."""

    def mat_entries(m: np.ndarray) -> list:
        return [[{"re": float(z.real), "im": float(z.imag)} for z in row] for row in m]

    classes = []
    for l in range(ps.n_classes):
        classes.append([mat_entries(ps.projector(lam)) for lam in ps.class_indices(l)])
    return {"dim": ps.dim, "classes": classes, "metadata": dict(ps.metadata)}


def projector_set_from_json(data: dict) -> ProjectorSet:
    d = int(data["dim"])
    bases = []
    for cls in data["classes"]:
        if len(cls) != d:
            raise InvalidInputError("each class must contain d projectors")
        basis = np.empty((d, d), dtype=complex)
        for i, mat in enumerate(cls):
            m = np.array([[e["re"] + 1j * e["im"] for e in row] for row in mat])
            w, v = np.linalg.eigh(check_hermitian(m, tol=1e-9))
            if abs(w[-1] - 1.0) > 1e-8 or abs(w[-2]) > 1e-8:
                raise InvalidInputError("class entry is not a rank-one projector")
            basis[:, i] = v[:, -1]
        bases.append(basis)
    ps = ProjectorSet(dim=d, bases=tuple(bases), metadata=dict(data.get("metadata", {})))
    _verify_projector_set(ps, unbiased=False)
    return ps


def save_projector_set(ps: ProjectorSet, path: str) -> None:
    with open(path, "w") as fh:
        json.dump(projector_set_to_json(ps), fh, sort_keys=True)


def load_projector_set(path: str) -> ProjectorSet:
    with open(path) as fh:
        return projector_set_from_json(json.load(fh))
