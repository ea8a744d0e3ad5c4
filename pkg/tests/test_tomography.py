import json

import numpy as np
import pytest

import vqtomo as vq
from vqtomo.linalg import InvalidInputError
from vqtomo.solver import SolverSettings
from vqtomo.states import MeasurementRecord
from vqtomo.tomography import (
    TomographyProblem,
    detect_incompatible,
    matrix_from_json,
    problem_from_records,
    result_to_json,
)

TIGHT = SolverSettings(gap_tol=1e-9, feas_tol=1e-8)


def exact_records(ps, rho, count=None):
    probs = vq.exact_probabilities(rho, ps)
    count = ps.n_projectors if count is None else count
    return [MeasurementRecord(lam, float(probs[lam]), 0.0) for lam in range(count)]


class TestCostOperator:
    def test_empty(self, mub3):
        h = vq.cost_operator(mub3, ())
        assert np.max(np.abs(h)) == 0.0

    def test_full_mub_set(self, mub3):
        h = vq.cost_operator(mub3, tuple(range(mub3.n_projectors)))
        assert np.max(np.abs(h - 4 * np.eye(3))) <= 1e-10  # each class sums to I

    def test_single_class_gives_unit_cost(self, mub3):
        h = vq.cost_operator(mub3, tuple(mub3.class_indices(2)))
        assert np.max(np.abs(h - np.eye(3))) <= 1e-10
        rho = vq.random_density(3, 2, seed=1)
        assert np.vdot(h, rho).real == pytest.approx(1.0, abs=1e-10)


class TestAssemble:
    def test_structure(self, mub3):
        recs = exact_records(mub3, np.eye(3) / 3, count=6)
        prog = vq.assemble_sdp(problem_from_records(mub3, recs))
        assert prog.psd_dim == 3
        assert prog.nonneg_count == 6
        assert len(prog.equalities) == 1
        assert len(prog.inequalities) == 12
        assert prog.objective.nonneg == {k: 1.0 for k in range(6)}

    def test_zero_frequency_record_pins_projection(self, mub3):
        # both inequalities collapse to Tr(rho P) = 0 regardless of Delta
        recs = [MeasurementRecord(0, 0.0, 0.0)]
        tp = TomographyProblem(mub3, recs, tuple(range(1, 12)))
        prog = vq.assemble_sdp(tp)
        (lo_op, lo_rhs, lo_sense), (hi_op, hi_rhs, hi_sense) = prog.inequalities
        assert lo_rhs == hi_rhs == 0.0
        assert lo_op.nonneg[0] == hi_op.nonneg[0] == 0.0
        assert (lo_sense, hi_sense) == (">=", "<=")

    def test_nothing_measured_costs_full_sum(self, mub3):
        tp = TomographyProblem(mub3, [], tuple(range(12)))
        res = vq.reconstruct(tp)
        assert res.objective == pytest.approx(4.0, abs=1e-6)  # (d+1) for d = 3

    def test_index_cover_validation(self, mub3):
        with pytest.raises(InvalidInputError):
            TomographyProblem(mub3, [MeasurementRecord(0, 0.1, 0.0)], (0, 1))


class TestExactDataFixedPoints:
    @pytest.mark.parametrize("d", [3, 4, 9])
    def test_full_measurement_recovers_state(self, d):
        ps = vq.mub(d)
        for i in range(5):
            rho = vq.random_density(d, d, seed=100 * d + i)
            res = vq.reconstruct(problem_from_records(ps, exact_records(ps, rho)), settings=TIGHT)
            assert vq.trace_distance(res.estimate, rho) <= 1e-6
            assert res.deltas.sum() <= 1e-6
            assert res.certified

    def test_werner_full_measurement(self, mub9, werner_m08):
        res = vq.reconstruct(
            problem_from_records(mub9, exact_records(mub9, werner_m08)), settings=TIGHT
        )
        assert vq.trace_distance(res.estimate, werner_m08) <= 1e-6

    def test_estimate_is_valid_density_matrix(self, mub9):
        rho = vq.random_density(9, 3, seed=5)
        res = vq.reconstruct(problem_from_records(mub9, exact_records(mub9, rho, 45)))
        vq.linalg.check_density(res.estimate)


class TestNoisyReconstruction:
    def test_feasibility_never_infeasible(self, mub9, werner_m08):
        probs = vq.exact_probabilities(werner_m08, mub9)
        for seed in range(10):
            recs = vq.noisy_frequencies(probs, vq.NoiseModel(level=0.5, seed=seed))
            res = vq.reconstruct(problem_from_records(mub9, recs[: 9 * (1 + seed % 10)]))
            assert res.solver_status == "Optimal"

    def test_werner_partial_noisy(self, werner_m08):
        # the first three swap-adapted classes at 50% noise keep the witnessed
        # entanglement near the true value
        from vqtomo.experiments import _fig1_projector_set

        ps = _fig1_projector_set(None)
        probs = vq.exact_probabilities(werner_m08, ps)
        vals = []
        for seed in range(5):
            recs = vq.noisy_frequencies(probs, vq.NoiseModel(level=0.5, seed=seed))[:27]
            res = vq.reconstruct(
                problem_from_records(ps, recs),
                reference=werner_m08,
                witness_dims=(3, 3),
            )
            vals.append(res.diagnostics["witnessed_entanglement"])
            assert res.diagnostics["fidelity"] >= 0.95
        assert abs(np.mean(vals) - (-0.21)) <= 0.05

    def test_deltas_zero_for_in_bound_noise(self, mub9, werner_m08):
        probs = vq.exact_probabilities(werner_m08, mub9)
        recs = vq.noisy_frequencies(probs, vq.NoiseModel(level=0.5, seed=3))
        res = vq.reconstruct(problem_from_records(mub9, recs))
        assert res.deltas.sum() <= 1e-6  # true state feasible within declared bounds


class TestMonotoneInformation:
    def test_noiseless_class_sweep_non_increasing(self, mub9):
        # the 1e-8 slack sits near solver-termination jitter, so measure with
        # tolerances an order tighter than the slack
        xtight = SolverSettings(gap_tol=1e-10, feas_tol=1e-9, max_iters=300)
        for trial in range(20):
            rho = vq.random_density(9, 1 + trial % 2, seed=500 + trial)
            probs = vq.exact_probabilities(rho, mub9)
            prev = None
            for ncl in range(1, 11):
                recs = [
                    MeasurementRecord(lam, float(probs[lam]), 0.0)
                    for lam in range(ncl * 9)
                ]
                res = vq.reconstruct(problem_from_records(mub9, recs), settings=xtight)
                td = vq.trace_distance(res.estimate, rho)
                if prev is not None:
                    assert td <= prev + 1e-8, f"trial {trial}, classes {ncl}"
                prev = td


@pytest.fixture(scope="module")
def sweep_means(werner_m08):
    """Run means across the measurement sweep, 50 noisy runs per count."""
    from vqtomo.experiments import _fig1_projector_set

    ps = _fig1_projector_set(None)
    probs = vq.exact_probabilities(werner_m08, ps)
    out = {}
    for count in range(9, 91, 9):
        ents, purities = [], []
        for seed in range(50):
            recs = vq.noisy_frequencies(probs, vq.NoiseModel(level=0.5, seed=seed))[
                :count
            ]
            res = vq.reconstruct(
                problem_from_records(ps, recs),
                reference=werner_m08,
                witness_dims=(3, 3),
            )
            ents.append(res.diagnostics["witnessed_entanglement"])
            purities.append(res.diagnostics["purity"])
        out[count] = (float(np.mean(ents)), float(np.mean(purities)))
    return out


class TestNonOverestimation:
    """Statistical form of the never-overestimate claim."""

    def test_mean_entanglement_never_overestimated(self, sweep_means):
        for count, (mean_e, _) in sweep_means.items():
            assert mean_e >= -0.21 - 0.02, f"count {count}: mean E {mean_e}"

    def test_mean_purity_never_overestimated(self, sweep_means):
        for count, (_, mean_p) in sweep_means.items():
            assert mean_p <= 0.23 + 0.02, f"count {count}: mean purity {mean_p}"


class TestDetection:
    def test_compatible_noisy_data_unflagged(self, mub9, werner_m08):
        probs = vq.exact_probabilities(werner_m08, mub9)
        recs = vq.noisy_frequencies(probs, vq.NoiseModel(level=0.5, seed=8))
        res = vq.reconstruct(problem_from_records(mub9, recs), detect=True)
        assert res.incompatible == []

    def test_single_corrupted_record_flagged(self, mub9, werner_m08):
        recs = exact_records(mub9, werner_m08)
        bad = 40
        recs[bad] = MeasurementRecord(bad, 1.0, 0.0)
        res = vq.reconstruct(problem_from_records(mub9, recs), detect=True)
        assert res.incompatible == [bad]

    def test_injected_class_flagged(self, werner_m08):
        from vqtomo.experiments import _fig1_projector_set

        ps = _fig1_projector_set(None)
        probs_good = vq.exact_probabilities(werner_m08, ps)
        probs_bad = vq.exact_probabilities(vq.werner_state(0.8), ps)
        model = vq.NoiseModel(level=0.5, seed=1)
        good = vq.noisy_frequencies(probs_good, model)
        bad = vq.noisy_frequencies(probs_bad, model)
        recs = [bad[lam] if lam // 9 == 2 else good[lam] for lam in range(90)]
        res = vq.reconstruct(problem_from_records(ps, recs), detect=True)
        assert res.incompatible, "expected flags on the injected class"
        assert all(18 <= lam <= 26 for lam in res.incompatible)

    def test_detect_requires_matching_records(self, mub9, werner_m08):
        res = vq.reconstruct(
            problem_from_records(mub9, exact_records(mub9, werner_m08))
        )
        with pytest.raises(InvalidInputError):
            detect_incompatible(res, records=exact_records(mub9, werner_m08)[:10])


class TestDiagnostics:
    def test_identical_states(self, werner_m08):
        out = vq.diagnostics(werner_m08, werner_m08)
        assert out["fidelity"] == pytest.approx(1.0, abs=1e-8)
        assert out["trace_distance"] == pytest.approx(0.0, abs=1e-9)

    def test_purity_is_of_first_argument(self, werner_m08):
        out = vq.diagnostics(np.eye(9) / 9, werner_m08)
        assert out["purity"] == pytest.approx(1 / 9, abs=1e-12)

    def test_witnessed_entanglement(self, werner_m08):
        out = vq.diagnostics(werner_m08, werner_m08, dims=(3, 3))
        assert out["witnessed_entanglement"] == pytest.approx(-0.2121, abs=1e-3)


class TestResultJson:
    def test_round_trip(self, mub3):
        rho = vq.random_density(3, 2, seed=2)
        res = vq.reconstruct(
            problem_from_records(mub3, exact_records(mub3, rho)), reference=rho
        )
        data = json.loads(json.dumps(result_to_json(res)))
        est = matrix_from_json(data["estimate"])
        assert np.max(np.abs(est - res.estimate)) <= 1e-15
        assert data["status"] == "Optimal"
        assert data["certified"] is True
        assert len(data["deltas"]) == len(res.deltas)
        assert "fidelity" in data["diagnostics"]
