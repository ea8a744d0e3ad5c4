"""Benchmark state factories and measurement simulation.

The noise model is the interval-uncertainty one used throughout the
experiments: each simulated frequency is the exact probability scaled by
(1 + u) with u uniform on [-level, +level], and the declared bound epsilon
is level times the exact probability. Frequencies are deliberately not
renormalized within a class; absorbing such inconsistencies is the job of
the reconstruction's relaxation variables.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass

import numpy as np

from .bases import ProjectorSet
from .linalg import InvalidInputError

RNG_ALGORITHM = "numpy PCG64"


@dataclass(frozen=True)
class NoiseModel:
    """Uniform multiplicative noise of a given maximum relative level."""

    kind: str = "uniform-multiplicative"
    level: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.kind not in ("none", "uniform-multiplicative"):
            raise InvalidInputError(f"unknown noise kind {self.kind!r}")
        if not 0.0 <= self.level < 1.0:
            raise InvalidInputError("noise level must lie in [0, 1)")


@dataclass(frozen=True)
class MeasurementRecord:
    """One measured frequency for projector lambda with its noise bound."""

    projector_index: int
    frequency: float
    epsilon: float

    def __post_init__(self):
        if self.frequency < 0 or self.frequency > 1 + self.epsilon:
            raise InvalidInputError(
                f"frequency {self.frequency} outside [0, 1 + epsilon]"
            )
        if self.epsilon < 0:
            raise InvalidInputError("epsilon must be nonnegative")


def swap_operator(d: int) -> np.ndarray:
    """F|ij> = |ji> on C^d (x) C^d."""
    if d < 2:
        raise InvalidInputError("dimension must be at least 2")
    f = np.zeros((d * d, d * d))
    for i in range(d):
        for j in range(d):
            f[j * d + i, i * d + j] = 1.0
    return f


def werner_state(beta: float, d: int = 3) -> np.ndarray:
    """Werner family (I + beta F) / (d^2 + d beta) on two qudits."""
    if not -1.0 <= beta <= 1.0:
        raise InvalidInputError("beta must lie in [-1, 1]")
    f = swap_operator(d)
    rho = (np.eye(d * d) + beta * f) / (d * d + d * beta)
    return rho.astype(complex)


def werner_purity(beta: float, d: int = 3) -> float:
    """Closed form Tr(rho^2) for the Werner family."""
    return (d * d + 2 * d * beta + d * d * beta * beta) / (d * d + d * beta) ** 2


def random_pure(d: int, seed: int) -> np.ndarray:
    """Projector onto a Haar-direction random vector (Gaussian coefficients)."""
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(d) + 1j * rng.standard_normal(d)
    v /= np.linalg.norm(v)
    return np.outer(v, v.conj())


def random_density(d: int, rank: int, seed: int) -> np.ndarray:
    """Normalized G G^dagger with G a d x rank complex Gaussian matrix."""
    if not 1 <= rank <= d:
        raise InvalidInputError(f"rank must lie in [1, {d}]")
    rng = np.random.default_rng(seed)
    g = rng.standard_normal((d, rank)) + 1j * rng.standard_normal((d, rank))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


def exact_probabilities(rho: np.ndarray, ps: ProjectorSet) -> np.ndarray:
    """Born probabilities Tr(rho P_lambda) over the whole flat index range."""
    if rho.shape != (ps.dim, ps.dim):
        raise InvalidInputError(
            f"state dimension {rho.shape} does not match projector set {ps.dim}"
        )
    out = np.empty(ps.n_projectors)
    for l, basis in enumerate(ps.bases):
        probs = np.einsum("ij,ik,kj->j", basis.conj(), rho, basis).real
        out[l * ps.dim : (l + 1) * ps.dim] = probs
    return np.clip(out, 0.0, None, out=out)


def noisy_frequencies(
    probabilities: np.ndarray, model: NoiseModel
) -> list[MeasurementRecord]:
    """Perturb each probability independently by its multiplicative noise draw."""
    probabilities = np.asarray(probabilities, dtype=float)
    if model.kind == "none" or model.level == 0.0:
        return [
            MeasurementRecord(lam, float(p), 0.0)
            for lam, p in enumerate(probabilities)
        ]
    rng = np.random.default_rng(model.seed)
    u = rng.uniform(-model.level, model.level, size=probabilities.shape)
    return [
        MeasurementRecord(lam, float(p * (1.0 + ui)), float(model.level * p))
        for lam, (p, ui) in enumerate(zip(probabilities, u))
    ]


RECORD_HEADER = ["lambda", "frequency", "epsilon"]


def records_to_csv(records: list[MeasurementRecord]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(RECORD_HEADER)
    for r in records:
        writer.writerow([r.projector_index, f"{r.frequency:.17g}", f"{r.epsilon:.17g}"])
    return buf.getvalue()


def records_from_csv(text: str) -> list[MeasurementRecord]:
    reader = csv.reader(io.StringIO(text))
    header = next(reader)
    if header != RECORD_HEADER:
        raise InvalidInputError(f"unexpected records header {header}")
    return [
        MeasurementRecord(int(row[0]), float(row[1]), float(row[2])) for row in reader
    ]


def save_records(records: list[MeasurementRecord], path: str) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(records_to_csv(records))


def load_records(path: str) -> list[MeasurementRecord]:
    with open(path) as fh:
        return records_from_csv(fh.read())
