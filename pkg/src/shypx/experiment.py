"""End-to-end experiment driver.

run_experiment() chains dataset generation (or loading), training,
per-method explanation, fidelity reporting, and the optional tradeoff
curve and sampler ablation, writing every artifact into one output
directory with a MANIFEST recording seeds, stage completion, and files.
Identical configs and seeds reproduce identical bytes.

Stage outputs:
  dataset.json            generated hypergraph (omitted when loaded)
  model/                  checkpoint (manifest.json + weights.bin)
  explanations_<m>.json   one record list per method
  fidelity.csv            one row per method, benchmark-table layout
  instance_metrics.json   full per-instance values
  curve.csv               size/faithfulness tradeoff over the ratio grid
  ablation.csv            sampler comparison at the ablation penalty
  MANIFEST.json
"""

from __future__ import annotations

import csv
import io
import json
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from shypx import hypergnn as hg
from shypx import metrics as mt
from shypx.baselines import BaselineConfig, baseline_explanations
from shypx.concepts import (
    class_explanations,
    concept_completeness,
    concept_representative,
    extract_concepts,
)
from shypx.explain import (
    SAMPLERS,
    ExplainConfig,
    ExplanationRecord,
    explain_instance,
    record_from_json_dict,
    record_to_json_dict,
)
from shypx.hypergraph import Hypergraph, load_hypergraph, save_hypergraph
from shypx.synth import DatasetSpec, assemble_dataset
from shypx.viz import export_dot

SHYPX = "shypx"
ALL_METHODS = (SHYPX, "random", "gradient", "attention")

FIDELITY_COLUMNS = [
    "dataset", "method",
    "fid_minus_acc", "fid_minus_kl", "fid_minus_tv", "fid_minus_xent",
    "fid_plus_acc", "fid_plus_kl", "fid_plus_tv", "fid_plus_xent",
    "size", "density", "num_instances",
]
CURVE_COLUMNS = ["dataset", "lambda_ratio", "fid_minus_kl", "size", "num_instances"]
ABLATION_COLUMNS = [
    "dataset", "sampler", "loss",
    "fid_minus_acc", "fid_minus_kl", "fid_minus_tv",
    "size", "density", "num_instances",
]


@dataclass
class InstanceSelection:
    kind: str = "all_val"  # all_val | sample
    count: int = 50
    seed: int = 0

    def pick(self, G: Hypergraph) -> np.ndarray:
        val = G.val_indices
        if self.kind == "all_val":
            return val
        if self.kind == "sample":
            rng = np.random.default_rng(self.seed)
            take = min(self.count, val.size)
            return np.sort(rng.choice(val, size=take, replace=False))
        raise ValueError(f"unknown instance selection {self.kind!r}")


@dataclass
class ExperimentConfig:
    out_dir: str
    dataset_name: str = "dataset"
    dataset_spec: DatasetSpec | None = None
    dataset_path: str | None = None
    aggregation: str = hg.SUM
    num_layers: int = 3
    hidden_dim: int = 16
    train: hg.TrainConfig = field(default_factory=hg.TrainConfig)
    train_seeds: int = 1
    explain: ExplainConfig = field(default_factory=ExplainConfig)
    methods: tuple[str, ...] = (SHYPX,)
    baseline_n: int = 10
    instances: InstanceSelection = field(default_factory=InstanceSelection)
    curve_ratios: tuple[float, ...] = ()
    ablate_samplers: bool = False
    ablation_lambda_size: float = 0.005
    workers: int = 1

    def __post_init__(self):
        if not self.methods and not self.curve_ratios and not self.ablate_samplers:
            raise ValueError("experiment requests no work")
        for m in self.methods:
            if m not in ALL_METHODS:
                raise ValueError(f"unknown method {m!r}")


def _write_csv(path: Path, columns: list[str], rows: list[dict]) -> None:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=columns, lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({k: _fmt(row.get(k, "")) for k in columns})
    path.write_text(buf.getvalue())


def _fmt(x):
    if isinstance(x, float):
        return repr(x)
    return x


def read_csv_rows(path) -> list[dict]:
    with open(path, newline="") as fh:
        return [dict(row) for row in csv.DictReader(fh)]


def _explain_one(args):
    model, G, v, config = args
    return explain_instance(model, G, v, config)


def explain_nodes(model, G, nodes, config: ExplainConfig, workers: int = 1,
                  method: str = SHYPX) -> list[ExplanationRecord]:
    """Fan explanation instances out to a worker pool; per-instance RNG
    streams make the result independent of evaluation order."""
    nodes = sorted(int(v) for v in nodes)
    if workers <= 1:
        records = [explain_instance(model, G, v, config) for v in nodes]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(
                _explain_one, [(model, G, v, config) for v in nodes],
                chunksize=max(1, len(nodes) // (4 * workers))))
    for rec in records:
        rec.method = method
    return records


def method_records(model, G, method: str, nodes, config: ExperimentConfig):
    if method == SHYPX:
        return explain_nodes(model, G, nodes, config.explain,
                             workers=config.workers)
    return baseline_explanations(
        model, G, nodes,
        BaselineConfig(n=config.baseline_n, seed=config.explain.seed,
                       method=method))


def tradeoff_curve(model, G, nodes, base: ExplainConfig, ratios,
                   workers: int = 1) -> list[dict]:
    """Mean Fid-(KL) and size per lambda_size value (lambda_pred = 1)."""
    rows = []
    for ratio in ratios:
        cfg = replace(base, lambda_pred=1.0, lambda_size=float(ratio))
        records = explain_nodes(model, G, nodes, cfg, workers=workers)
        report = mt.evaluate_explanations(model, G, records)
        rows.append({
            "lambda_ratio": float(ratio),
            "fid_minus_kl": report.fid_minus["kl"],
            "size": report.mean_size,
            "num_instances": report.num_instances,
        })
    return rows


def sampler_ablation(model, G, nodes, base: ExplainConfig,
                     lambda_size: float = 0.005, workers: int = 1) -> list[dict]:
    """Mean best loss plus fidelity/size per sampling strategy."""
    rows = []
    for sampler in SAMPLERS:
        cfg = replace(base, sampler=sampler, lambda_pred=1.0,
                      lambda_size=lambda_size)
        records = explain_nodes(model, G, nodes, cfg, workers=workers)
        report = mt.evaluate_explanations(model, G, records)
        rows.append({
            "sampler": sampler,
            "loss": float(np.mean([r.best_loss for r in records])),
            "fid_minus_acc": report.fid_minus["acc"],
            "fid_minus_kl": report.fid_minus["kl"],
            "fid_minus_tv": report.fid_minus["tv"],
            "size": report.mean_size,
            "density": report.mean_density,
            "num_instances": report.num_instances,
        })
    return rows


def train_best_model(G, config: ExperimentConfig):
    """Train train_seeds models, keep the best val accuracy."""
    best = None
    accs = []
    for seed in range(config.train_seeds):
        model = hg.model_for_graph(
            G, num_layers=config.num_layers, hidden_dim=config.hidden_dim,
            aggregation=config.aggregation,
            seed=config.train.seed + seed)
        result = hg.train(model, G, replace(config.train,
                                            seed=config.train.seed + seed))
        accs.append(result.val_acc)
        if best is None or result.val_acc > best.val_acc:
            best = result
    return best, accs


def run_experiment(config: ExperimentConfig) -> Path:
    """Run all requested stages; artifacts land in config.out_dir.

    On a stage failure the partial artifacts stay on disk and the MANIFEST
    names the completed stages before the error is re-raised.
    """
    out = Path(config.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    manifest = {
        "dataset": config.dataset_name,
        "seeds": {
            "train": config.train.seed,
            "explain": config.explain.seed,
            "instances": config.instances.seed,
        },
        "completed_stages": [],
        "files": [],
        "timings_s": {},
    }

    def done(stage, *files):
        manifest["completed_stages"].append(stage)
        manifest["files"].extend(str(f.name) for f in files)
        (out / "MANIFEST.json").write_text(json.dumps(manifest, indent=2))

    try:
        t0 = time.time()
        if config.dataset_path:
            G = load_hypergraph(config.dataset_path)
        elif config.dataset_spec is not None:
            G = assemble_dataset(config.dataset_spec)
            save_hypergraph(G, out / "dataset.json")
            done("dataset", out / "dataset.json")
        else:
            raise ValueError("config needs dataset_spec or dataset_path")
        manifest["timings_s"]["dataset"] = round(time.time() - t0, 3)

        t0 = time.time()
        best, accs = train_best_model(G, config)
        model = best.model
        hg.save_checkpoint(model, out / "model", meta={
            "val_accuracies": accs, "train_acc": best.train_acc,
            "val_acc": best.val_acc, "dataset": config.dataset_name})
        manifest["model"] = {"val_acc": best.val_acc, "seed_val_accs": accs}
        manifest["timings_s"]["train"] = round(time.time() - t0, 3)
        done("train", out / "model")

        nodes = config.instances.pick(G)
        manifest["num_instances"] = int(nodes.size)

        fidelity_rows = []
        for method in config.methods:
            t0 = time.time()
            records = method_records(model, G, method, nodes, config)
            outcomes = [mt.instance_outcome(model, G, r) for r in records]
            report = mt.report_from_outcomes(outcomes)
            rows_json = [record_to_json_dict(r) for r in records]
            path = out / f"explanations_{method}.json"
            path.write_text(json.dumps(rows_json, indent=1))
            fidelity_rows.append({"dataset": config.dataset_name,
                                  "method": method, **report.as_row()})
            (out / f"instance_metrics_{method}.json").write_text(
                json.dumps(mt.instance_metrics_json(outcomes), indent=1))
            manifest["timings_s"][f"explain_{method}"] = round(time.time() - t0, 3)
            done(f"explain_{method}", path,
                 out / f"instance_metrics_{method}.json")

        if config.methods:
            _write_csv(out / "fidelity.csv", FIDELITY_COLUMNS, fidelity_rows)
            done("fidelity", out / "fidelity.csv")

        if config.curve_ratios:
            t0 = time.time()
            rows = tradeoff_curve(model, G, nodes, config.explain,
                                  config.curve_ratios, workers=config.workers)
            for row in rows:
                row["dataset"] = config.dataset_name
            _write_csv(out / "curve.csv", CURVE_COLUMNS, rows)
            manifest["timings_s"]["curve"] = round(time.time() - t0, 3)
            done("curve", out / "curve.csv")

        if config.ablate_samplers:
            t0 = time.time()
            rows = sampler_ablation(model, G, nodes, config.explain,
                                    config.ablation_lambda_size,
                                    workers=config.workers)
            for row in rows:
                row["dataset"] = config.dataset_name
            _write_csv(out / "ablation.csv", ABLATION_COLUMNS, rows)
            manifest["timings_s"]["ablation"] = round(time.time() - t0, 3)
            done("ablation", out / "ablation.csv")
    except Exception:
        (out / "MANIFEST.json").write_text(json.dumps(manifest, indent=2))
        raise
    return out


def run_global_explanations(model, G: Hypergraph, k: int,
                            explain_config: ExplainConfig, out_dir,
                            seed: int = 0) -> Path:
    """Concept extraction plus one explained representative per concept.

    Writes concept_<c>.json and concept_<c>.dot per nonempty concept, and
    an index mapping classes to their concepts (with completeness).
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    Z = hg.node_embeddings(model, G)
    cm = extract_concepts(Z, k, seed=seed, labels=G.labels)

    explained: dict[int, ExplanationRecord] = {}

    def explain_fn(v: int) -> ExplanationRecord:
        if v not in explained:
            explained[v] = explain_instance(model, G, v, explain_config)
        return explained[v]

    by_class = class_explanations(cm, Z, G.labels, explain_fn)
    index = {
        "k": k,
        "seed": seed,
        "completeness": (concept_completeness(cm, G.labels, G.split)
                         if G.split is not None else None),
        "classes": {},
    }
    rep_of = {}
    for c in range(cm.k):
        members = cm.members(c)
        if members.size == 0:
            continue
        rep = concept_representative(cm, Z, c)
        rep_of[c] = rep
        rec = explain_fn(rep)
        (out / f"concept_{c}.json").write_text(json.dumps(
            record_to_json_dict(rec) | {
                "concept": c,
                "majority_class": int(cm.majority_class[c]),
                "num_members": int(members.size),
            }, indent=1))
        (out / f"concept_{c}.dot").write_text(
            export_dot(rec.explanation, title=f"concept {c}"))
    for y, records in sorted(by_class.items()):
        index["classes"][str(y)] = [
            c for c in range(cm.k)
            if cm.members(c).size and int(cm.majority_class[c]) == y
        ]
    (out / "concepts_index.json").write_text(json.dumps(index, indent=2))
    return out


def load_records(path, G: Hypergraph) -> list[ExplanationRecord]:
    data = json.loads(Path(path).read_text())
    if isinstance(data, dict):
        data = [data]
    return [record_from_json_dict(d, G) for d in data]
