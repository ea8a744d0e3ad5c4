import numpy as np
import pytest

import vqtomo as vq
from vqtomo import linalg
from vqtomo.witness import UndefinedFractionError, decomposable_witness

BELL = np.outer(*(2 * [np.array([1, 0, 0, 1]) / np.sqrt(2)])).astype(complex)


def witness_value_oracle(rho, dims):
    """Closed form: the optimum puts all trace weight on whichever of rho,
    rho^T_B has the smaller minimal eigenvalue."""
    w_rho = np.linalg.eigvalsh(rho)[0]
    w_pt = np.linalg.eigvalsh(linalg.partial_transpose(rho, dims, "B"))[0]
    return min(w_rho, w_pt)


class TestDecomposableWitness:
    def test_bell_value(self):
        res = decomposable_witness(BELL, (2, 2))
        assert res.value == pytest.approx(-0.5, abs=1e-6)
        # known optimal witness I/2 - |Phi+><Phi+|
        want = np.eye(4) / 2 - BELL
        assert np.max(np.abs(res.witness - want)) <= 1e-5
        assert res.gap <= 1e-7

    def test_product_state(self):
        ket00 = np.zeros((4, 4), dtype=complex)
        ket00[0, 0] = 1.0
        res = decomposable_witness(ket00, (2, 2))
        assert res.value >= -1e-8
        assert res.entanglement == 0.0

    def test_werner_reported_value(self, werner_m08):
        res = decomposable_witness(werner_m08, (3, 3))
        closed = (1 + 3 * (-0.8)) / (9 + 3 * (-0.8))
        assert closed == pytest.approx(-0.2121212121212121, abs=1e-12)
        assert res.value == pytest.approx(closed, abs=1e-5)

    def test_result_invariants(self, werner_m08):
        res = decomposable_witness(werner_m08, (3, 3))
        assert np.trace(res.witness).real == pytest.approx(1.0, abs=1e-8)
        assert np.linalg.eigvalsh(res.p_block)[0] >= -1e-8
        assert np.linalg.eigvalsh(res.q_block)[0] >= -1e-8
        rebuilt = res.p_block + linalg.partial_transpose(res.q_block, (3, 3), "B")
        assert np.max(np.abs(res.witness - rebuilt)) <= 1e-8

    def test_maximally_mixed_upper_bound(self, rng):
        for dims in ((2, 2), (2, 3)):
            d = dims[0] * dims[1]
            rho = vq.random_density(d, d, seed=17)
            res = decomposable_witness(rho, dims)
            assert res.value <= 1 / d + 1e-7

    @pytest.mark.parametrize("dims", [(2, 2), (2, 3)])
    def test_matches_oracle(self, dims):
        d = dims[0] * dims[1]
        for i in range(20):
            rho = vq.random_density(d, min(d, 1 + i % d), seed=400 + i)
            res = decomposable_witness(rho, dims)
            assert res.value == pytest.approx(witness_value_oracle(rho, dims), abs=1e-6)

    @pytest.mark.parametrize("dims", [(2, 2), (2, 3)])
    def test_ppt_agreement(self, dims):
        # negative value exactly when the partial transpose is not PSD
        d = dims[0] * dims[1]
        for i in range(50):
            rho = vq.random_density(d, d, seed=800 + i)
            res = decomposable_witness(rho, dims)
            npt = np.linalg.eigvalsh(linalg.partial_transpose(rho, dims, "B"))[0] < -1e-7
            if npt:
                assert res.value < 1e-7
            else:
                assert res.value > -1e-7

    def test_depolarizing_sweep_monotone(self):
        rho = vq.werner_state(-0.8)
        d = 9
        values = []
        for t in np.linspace(0, 1, 5):
            mixed = (1 - t) * rho + t * np.eye(d) / d
            values.append(decomposable_witness(mixed, (3, 3)).value)
        for a, b in zip(values, values[1:]):
            assert b >= a - 1e-7  # mixing never certifies more entanglement

    def test_dimension_mismatch(self):
        with pytest.raises(linalg.InvalidInputError):
            decomposable_witness(np.eye(4) / 4, (2, 3))


class TestEntanglementValue:
    def test_separable(self):
        assert vq.entanglement_value(np.eye(4) / 4, (2, 2)) == 0.0

    def test_werner_boundary(self):
        rho = vq.werner_state(-1 / 3)
        assert vq.entanglement_value(rho, (3, 3)) == pytest.approx(0.0, abs=1e-6)

    def test_werner_entangled(self, werner_m08):
        assert vq.entanglement_value(werner_m08, (3, 3)) == pytest.approx(
            -0.21212121, abs=1e-5
        )


class TestEntanglementFraction:
    def test_equal_states(self, werner_m08):
        assert vq.entanglement_fraction(werner_m08, werner_m08, (3, 3)) == pytest.approx(
            1.0, abs=1e-4
        )

    def test_maximally_mixed_estimate(self, werner_m08):
        frac = vq.entanglement_fraction(np.eye(9) / 9, werner_m08, (3, 3))
        assert frac == pytest.approx(0.0, abs=1e-6)

    def test_separable_truth_rejected(self):
        with pytest.raises(UndefinedFractionError):
            vq.entanglement_fraction(BELL, np.eye(4) / 4, (2, 2))
