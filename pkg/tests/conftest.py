import os

# keep BLAS single-threaded: the suite runs many small dense factorizations
# and OpenBLAS fan-out on them costs 20x (the solver also pins itself)
for _var in ("OPENBLAS_NUM_THREADS", "OMP_NUM_THREADS", "MKL_NUM_THREADS"):
    os.environ.setdefault(_var, "1")

import numpy as np
import pytest

import vqtomo as vq


@pytest.fixture(scope="session")
def mub3():
    return vq.mub(3)


@pytest.fixture(scope="session")
def mub9():
    return vq.mub(9)


@pytest.fixture(scope="session")
def werner_m08():
    return vq.werner_state(-0.8)


def random_hermitian(d, rng):
    m = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    return (m + m.conj().T) / 2


def random_psd(d, rng):
    g = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    return g @ g.conj().T


@pytest.fixture
def rng():
    return np.random.default_rng(20240811)
