import json
import os

import numpy as np
import pytest

import vqtomo as vq
from vqtomo import experiments as ex
from vqtomo.linalg import InvalidInputError


def read(path):
    with open(path) as fh:
        return fh.read()


class TestConfig:
    def test_defaults_per_experiment(self):
        for name in ex.EXPERIMENTS:
            cfg = ex.default_config(name)
            assert cfg.experiment == name
            cfg.settings()  # solver block parses

    def test_unknown_keys_rejected(self):
        with pytest.raises(InvalidInputError):
            ex.config_from_json({"experiment": "fig1", "bogus": 1})

    def test_manifest_embedding_accepted(self):
        cfg = ex.default_config("fig2")
        data = {"config": json.loads(json.dumps(cfg.__dict__)), "environment": {}}
        back = ex.config_from_json(data)
        assert back.experiment == "fig2"
        assert back.sweep == cfg.sweep

    def test_sweep_must_increase(self):
        with pytest.raises(InvalidInputError):
            ex.default_config("fig2", sweep=[3, 2])

    def test_unknown_experiment(self):
        with pytest.raises(InvalidInputError):
            ex.default_config("fig9")


class TestClassOrder:
    def test_permutation_validated(self, mub3):
        with pytest.raises(InvalidInputError):
            ex.permute_classes(mub3, [0, 0, 1, 2])

    def test_swap_adapted_order(self):
        ps = vq.mub(9)
        order = ex.swap_adapted_class_order(ps, 3)
        assert sorted(order) == list(range(10))
        f = vq.swap_operator(3).astype(complex)
        scores = [
            float(np.sum(np.einsum("ij,ik,kj->j", ps.bases[l].conj(), f, ps.bases[l]).real ** 2))
            for l in range(10)
        ]
        # swap-resolving classes open and close the sweep
        assert scores[order[0]] > 2.5
        assert scores[order[-1]] > 2.5
        assert all(scores[l] > 2.5 for l in order[:3])


@pytest.fixture(scope="module")
def fig1_run(tmp_path_factory):
    out = str(tmp_path_factory.mktemp("fig1"))
    cfg = ex.default_config("fig1", seeds=[0, 1], sweep=[9, 27, 90], out_dir=out)
    summary = ex.run_fig1(cfg)
    return out, summary


class TestFig1:
    @pytest.fixture
    def run(self, fig1_run):
        return fig1_run

    def test_outputs_exist(self, run):
        out, _ = run
        for name in ("panel1.csv", "panel2.csv", "panel3.csv", "summary.json", "manifest.json"):
            assert os.path.exists(os.path.join(out, name))

    def test_csv_schema_and_finiteness(self, run):
        out, _ = run
        lines = read(os.path.join(out, "panel1.csv")).splitlines()
        assert lines[0] == "count,purity,fidelity,trace_distance,entanglement,n_flagged"
        for line in lines[1:]:
            vals = [float(x) for x in line.split(",")]
            assert all(np.isfinite(v) for v in vals)
            assert 0 <= vals[2] <= 1 + 1e-8  # fidelity
            assert 0 <= vals[3] <= 1 + 1e-8  # trace distance

    def test_flags_concentrate(self, run):
        # smoke at two seeds; the >= 80% criterion runs at 20 seeds in the
        # acceptance suite
        _, summary = run
        flags2 = summary["panels"]["2"]["flag_positions_final"]
        in2 = sum(1 for pos in flags2 if 19 <= pos <= 27)
        assert flags2 and in2 >= len(flags2) / 2
        flags3 = summary["panels"]["3"]["flag_positions_final"]
        in3 = sum(1 for pos in flags3 if 81 <= pos <= 90)
        assert in3 >= len(flags3) / 2

    def test_manifest_reproduces_run(self, run, tmp_path):
        out, _ = run
        manifest = json.loads(read(os.path.join(out, "manifest.json")))
        cfg = ex.config_from_json(manifest)
        cfg.out_dir = str(tmp_path / "rerun")
        ex.run_fig1(cfg)
        for name in ("panel1.csv", "panel2.csv", "panel3.csv"):
            assert read(os.path.join(cfg.out_dir, name)) == read(os.path.join(out, name))

    def test_threads_do_not_change_output(self, run, tmp_path):
        out, _ = run
        manifest = json.loads(read(os.path.join(out, "manifest.json")))
        cfg = ex.config_from_json(manifest)
        cfg.out_dir = str(tmp_path / "mt")
        cfg.threads = 2
        ex.run_fig1(cfg)
        for name in ("panel1.csv", "panel2.csv", "panel3.csv"):
            assert read(os.path.join(cfg.out_dir, name)) == read(os.path.join(out, name))


class TestFig2:
    def test_small_sweep(self, tmp_path):
        cfg = ex.default_config("fig2", sweep=[1, 5, 33], out_dir=str(tmp_path))
        summary = ex.run_fig2(cfg)
        lines = read(os.path.join(str(tmp_path), "sweep.csv")).splitlines()
        assert lines[0] == "count,purity,fidelity,trace_distance"
        # one class cannot determine a random pure state on d = 32
        assert summary["fidelity"]["32"] < 1 - 1e-3
        # five classes recover it; complete information certainly does
        assert summary["trace_distance"]["160"] <= 1e-4
        assert summary["trace_distance"]["1056"] <= 1e-6


class TestFig3:
    def test_rank_trend(self, tmp_path):
        cfg = ex.default_config(
            "fig3", ranks=[1, 16], n_states=2, out_dir=str(tmp_path)
        )
        summary = ex.run_fig3(cfg)
        by_rank = summary["measurements_by_rank"]
        assert by_rank["1"]["mean"] < by_rank["16"]["mean"]
        assert by_rank["16"]["max"] <= 17
        lines = read(os.path.join(str(tmp_path), "ranks.csv")).splitlines()
        assert lines[0] == "rank,mean_measurements,min_measurements,max_measurements,samples"


class TestFig4:
    def test_small_run(self, tmp_path):
        cfg = ex.default_config(
            "fig4", n_states=3, sweep=[12, 36], out_dir=str(tmp_path)
        )
        summary = ex.run_fig4(cfg)
        pts = summary["points"]
        assert pts["36"]["mean_trace_distance"] <= 1e-5
        assert pts["36"]["mean_entanglement_fraction"] == pytest.approx(1.0, abs=0.01)
        assert pts["12"]["mean_entanglement_fraction"] <= pts["36"]["mean_entanglement_fraction"] + 0.02
        lines = read(os.path.join(str(tmp_path), "sweep.csv")).splitlines()
        assert (
            lines[0]
            == "n_observables,mean_trace_distance,mean_entanglement_fraction,se_fraction,n_excluded"
        )


class TestManifestContents:
    def test_fields(self, tmp_path):
        cfg = ex.default_config("fig2", sweep=[1], out_dir=str(tmp_path))
        ex.run_fig2(cfg)
        manifest = json.loads(read(os.path.join(str(tmp_path), "manifest.json")))
        assert manifest["rng"] == "numpy PCG64"
        assert manifest["config"]["experiment"] == "fig2"
        assert "numpy" in manifest["environment"]
        assert "construction" in manifest
