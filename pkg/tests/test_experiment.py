"""Experiment driver: artifact contract, determinism, global explanations."""

import json

import numpy as np
import pytest

from shypx import hypergnn as hg
from shypx.experiment import (
    ExperimentConfig,
    InstanceSelection,
    load_records,
    read_csv_rows,
    run_experiment,
    run_global_explanations,
)
from shypx.explain import ExplainConfig
from shypx.hypergraph import load_hypergraph
from shypx.synth import DatasetSpec


def tiny_spec(seed=1):
    return DatasetSpec(base_kind="tree", motif_kind="cycle",
                       target_base_nodes=63, num_motifs=6,
                       num_perturbations=6, feature_dim=4, seed=seed)


def tiny_config(out_dir, **kw) -> ExperimentConfig:
    defaults = dict(
        out_dir=str(out_dir),
        dataset_name="tiny",
        dataset_spec=tiny_spec(),
        train=hg.TrainConfig(epochs=200),
        train_seeds=1,
        explain=ExplainConfig(epochs=100, lambda_size=0.05, seed=0),
        methods=("shypx", "random", "gradient"),
        baseline_n=5,
        instances=InstanceSelection("sample", count=4, seed=0),
    )
    defaults.update(kw)
    return ExperimentConfig(**defaults)


@pytest.fixture(scope="module")
def artifacts(tmp_path_factory):
    out = tmp_path_factory.mktemp("exp") / "run1"
    run_experiment(tiny_config(out, curve_ratios=(0.1, 0.01),
                               ablate_samplers=True))
    return out


class TestArtifacts:
    def test_declared_files_exist_and_parse(self, artifacts):
        G = load_hypergraph(artifacts / "dataset.json")
        assert G.num_nodes == 99
        model = hg.load_checkpoint(artifacts / "model")
        assert model.num_layers == 3
        for method in ("shypx", "random", "gradient"):
            records = load_records(artifacts / f"explanations_{method}.json", G)
            assert len(records) == 4
            assert all(r.method == method for r in records)
        manifest = json.loads((artifacts / "MANIFEST.json").read_text())
        assert "train" in manifest["completed_stages"]
        assert manifest["num_instances"] == 4

    def test_fidelity_csv_layout(self, artifacts):
        rows = read_csv_rows(artifacts / "fidelity.csv")
        assert [r["method"] for r in rows] == ["shypx", "random", "gradient"]
        for row in rows:
            assert float(row["fid_minus_kl"]) >= 0
            assert 0 <= float(row["density"]) <= 1

    def test_curve_csv(self, artifacts):
        rows = read_csv_rows(artifacts / "curve.csv")
        assert [float(r["lambda_ratio"]) for r in rows] == [0.1, 0.01]

    def test_ablation_csv(self, artifacts):
        rows = read_csv_rows(artifacts / "ablation.csv")
        assert [r["sampler"] for r in rows] == ["gumbel", "relax_thresh",
                                                "sparsemax"]

    def test_rerun_is_byte_identical(self, artifacts, tmp_path):
        out2 = tmp_path / "run2"
        run_experiment(tiny_config(out2, curve_ratios=(0.1, 0.01),
                                   ablate_samplers=True))
        for name in ("dataset.json", "fidelity.csv", "curve.csv",
                     "ablation.csv"):
            assert (artifacts / name).read_bytes() == (out2 / name).read_bytes()
        assert (artifacts / "model" / "weights.bin").read_bytes() == \
            (out2 / "model" / "weights.bin").read_bytes()

    def test_failure_keeps_partial_artifacts(self, tmp_path):
        config = tiny_config(tmp_path / "bad", methods=("shypx",),
                             instances=InstanceSelection("bogus"))
        with pytest.raises(ValueError):
            run_experiment(config)
        manifest = json.loads((tmp_path / "bad" / "MANIFEST.json").read_text())
        assert "train" in manifest["completed_stages"]
        assert not any(s.startswith("explain") for s in
                       manifest["completed_stages"])


class TestWorkerPool:
    def test_parallel_matches_sequential(self, artifacts):
        from shypx.experiment import explain_nodes

        G = load_hypergraph(artifacts / "dataset.json")
        model = hg.load_checkpoint(artifacts / "model")
        cfg = ExplainConfig(epochs=60, seed=3)
        nodes = G.val_indices[:4]
        seq = explain_nodes(model, G, nodes, cfg, workers=1)
        par = explain_nodes(model, G, nodes, cfg, workers=2)
        for a, b in zip(seq, par):
            assert a.node == b.node
            assert np.array_equal(a.explanation.kept_links,
                                  b.explanation.kept_links)


class TestGlobalExplanations:
    def test_concept_artifacts(self, artifacts, tmp_path):
        G = load_hypergraph(artifacts / "dataset.json")
        model = hg.load_checkpoint(artifacts / "model")
        out = run_global_explanations(model, G, k=4,
                                      explain_config=ExplainConfig(epochs=60),
                                      out_dir=tmp_path / "concepts", seed=0)
        index = json.loads((out / "concepts_index.json").read_text())
        assert index["k"] == 4
        assert index["completeness"] is not None
        concept_files = sorted(out.glob("concept_*.json"))
        dot_files = sorted(out.glob("concept_*.dot"))
        assert len(concept_files) == len(dot_files) >= 1
        listed = [c for cs in index["classes"].values() for c in cs]
        assert sorted(listed) == sorted(set(listed))  # partition
        payload = json.loads(concept_files[0].read_text())
        assert {"concept", "majority_class", "num_members"} <= payload.keys()
