"""Dense complex/Hermitian linear algebra primitives shared by all modules.

Conventions: operators are square complex ndarrays; density matrices are
trace-one PSD Hermitian matrices. Hermiticity is validated at 1e-12
elementwise, positivity at -1e-9 on the spectrum, and every spectral call
symmetrizes its input first (interior-point output carries ~1e-9 asymmetry).
"""

from __future__ import annotations

import numpy as np

HERM_TOL = 1e-12
PSD_TOL = 1e-9
TRACE_TOL = 1e-10


class InvalidInputError(ValueError):
    """Input violates an operation's preconditions."""


class NotPSDError(InvalidInputError):
    """Matrix has an eigenvalue below the PSD tolerance."""


def hermitian_part(m: np.ndarray) -> np.ndarray:
    """Return (M + M^dagger)/2."""
    return (m + m.conj().T) / 2


def is_hermitian(m: np.ndarray, tol: float = HERM_TOL) -> bool:
    return m.ndim == 2 and m.shape[0] == m.shape[1] and bool(
        np.max(np.abs(m - m.conj().T)) <= tol
    )


def check_hermitian(m: np.ndarray, tol: float = HERM_TOL) -> np.ndarray:
    """Validate Hermiticity and return the symmetrized matrix."""
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise InvalidInputError(f"expected a square matrix, got shape {m.shape}")
    if np.max(np.abs(m - m.conj().T)) > tol:
        raise InvalidInputError("matrix is not Hermitian within tolerance")
    return hermitian_part(m)


def check_density(rho: np.ndarray) -> np.ndarray:
    """Validate density-matrix invariants (Hermitian, trace one, PSD)."""
    rho = check_hermitian(rho)
    tr = np.trace(rho).real
    if abs(tr - 1.0) > TRACE_TOL:
        raise InvalidInputError(f"trace is {tr}, expected 1")
    if np.linalg.eigvalsh(rho)[0] < -PSD_TOL:
        raise NotPSDError("density matrix has a negative eigenvalue")
    return rho


def herm_eig(m: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition of a Hermitian matrix.

    Returns (eigenvalues ascending, unitary eigenvector matrix V) with
    M = V diag(w) V^dagger.
    """
    m = check_hermitian(m)
    w, v = np.linalg.eigh(m)
    return w, v


def matrix_sqrt(m: np.ndarray, clip_negative: bool = True) -> np.ndarray:
    """Principal square root of a PSD Hermitian matrix.

    Eigenvalues in [-PSD_TOL, 0) are clipped to 0 when clip_negative is set;
    anything below -PSD_TOL raises NotPSDError.
    """
    w, v = herm_eig(m)
    if w[0] < -PSD_TOL:
        raise NotPSDError(f"minimum eigenvalue {w[0]:.3e} below PSD tolerance")
    if clip_negative:
        w = np.maximum(w, 0.0)
    elif w[0] < 0:
        raise NotPSDError("negative eigenvalue and clipping disabled")
    return hermitian_part((v * np.sqrt(w)) @ v.conj().T)


def _check_same_dims(a: np.ndarray, b: np.ndarray) -> None:
    if a.shape != b.shape:
        raise InvalidInputError(f"dimension mismatch: {a.shape} vs {b.shape}")


def fidelity(a: np.ndarray, b: np.ndarray) -> float:
    """Uhlmann fidelity Tr sqrt(sqrt(a) b sqrt(a)) of two density matrices."""
    _check_same_dims(a, b)
    ra = matrix_sqrt(a)
    w = np.linalg.eigvalsh(hermitian_part(ra @ b @ ra))
    return float(np.sum(np.sqrt(np.maximum(w, 0.0))))


def trace_distance(a: np.ndarray, b: np.ndarray) -> float:
    """Half the trace norm of (a - b)."""
    _check_same_dims(a, b)
    w = np.linalg.eigvalsh(hermitian_part(a - b))
    return float(0.5 * np.sum(np.abs(w)))


def trace_norm(m: np.ndarray) -> float:
    """Sum of absolute eigenvalues of a Hermitian matrix."""
    return float(np.sum(np.abs(np.linalg.eigvalsh(hermitian_part(m)))))


def purity(rho: np.ndarray) -> float:
    """Tr(rho^2)."""
    return float(np.sum(np.abs(rho) ** 2))


def kron(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Kronecker product."""
    return np.kron(a, b)


def partial_transpose(m: np.ndarray, dims: tuple[int, int], subsystem: str = "B") -> np.ndarray:
    """Transpose one tensor factor of an operator on C^dA (x) C^dB.

    subsystem is "A" or "B" (default "B", the standard PPT convention).
    """
    da, db = dims
    m = np.asarray(m, dtype=complex)
    if m.shape != (da * db, da * db):
        raise InvalidInputError(f"matrix shape {m.shape} incompatible with dims {dims}")
    t = m.reshape(da, db, da, db)
    if subsystem == "B":
        t = t.transpose(0, 3, 2, 1)
    elif subsystem == "A":
        t = t.transpose(2, 1, 0, 3)
    else:
        raise InvalidInputError(f"subsystem must be 'A' or 'B', got {subsystem!r}")
    return t.reshape(da * db, da * db)


def project_to_density(m: np.ndarray) -> np.ndarray:
    """Clip negative eigenvalues to zero and renormalize the trace to one."""
    w, v = np.linalg.eigh(hermitian_part(m))
    w = np.maximum(w, 0.0)
    s = w.sum()
    if s <= 0:
        raise NotPSDError("matrix projects to zero")
    return hermitian_part((v * (w / s)) @ v.conj().T)
