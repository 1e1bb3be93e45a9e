"""Command-line interface.

Subcommands: generate-dataset, train, explain, explain-global, evaluate,
curve, ablate-sampler, export-dot, run. Config files are JSON mirroring
the dataclass field names; explicit flags override config values. Relative
output paths resolve under $SHYPX_OUTPUT_ROOT when it is set.

Exit codes: 0 success, 1 usage error, 2 stage failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import traceback
from dataclasses import replace
from pathlib import Path


from shypx import hypergnn as hg
from shypx import metrics as mt
from shypx.baselines import METHODS as BASELINE_METHODS
from shypx.baselines import BaselineConfig, baseline_explanations
from shypx.experiment import (
    ABLATION_COLUMNS,
    CURVE_COLUMNS,
    FIDELITY_COLUMNS,
    SHYPX,
    ExperimentConfig,
    InstanceSelection,
    _write_csv,
    load_records,
    run_experiment,
    run_global_explanations,
    sampler_ablation,
    tradeoff_curve,
)
from shypx.explain import ExplainConfig, explain_instance, record_to_json_dict
from shypx.hypergraph import load_hypergraph, save_hypergraph
from shypx.synth import BENCHMARKS, DatasetSpec, assemble_dataset, benchmark_spec
from shypx.viz import export_dot

OUTPUT_ROOT_VAR = "SHYPX_OUTPUT_ROOT"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _resolve_out(path: str) -> Path:
    root = os.environ.get(OUTPUT_ROOT_VAR)
    p = Path(path)
    if root and not p.is_absolute():
        return Path(root) / p
    return p


def _load_json(path):
    return json.loads(Path(path).read_text())


def _explain_config(args) -> ExplainConfig:
    cfg = ExplainConfig() if args.config is None else \
        ExplainConfig.from_json_dict(_load_json(args.config))
    overrides = {}
    for flag, name in [("lambda_pred", "lambda_pred"),
                       ("lambda_size", "lambda_size"),
                       ("epochs", "epochs"), ("seed", "seed"),
                       ("sampler", "sampler"),
                       ("learning_rate", "learning_rate")]:
        value = getattr(args, flag, None)
        if value is not None:
            overrides[name] = value
    return replace(cfg, **overrides) if overrides else cfg


def _instances(args) -> InstanceSelection:
    if args.sample is not None:
        return InstanceSelection("sample", count=args.sample,
                                 seed=args.instance_seed)
    return InstanceSelection("all_val")


def _add_explain_flags(p):
    p.add_argument("--config", help="ExplainConfig JSON file")
    p.add_argument("--lambda-pred", dest="lambda_pred", type=float)
    p.add_argument("--lambda-size", dest="lambda_size", type=float)
    p.add_argument("--epochs", type=int)
    p.add_argument("--learning-rate", dest="learning_rate", type=float)
    p.add_argument("--seed", type=int)
    p.add_argument("--sampler", choices=("gumbel", "relax_thresh", "sparsemax"))


def _add_instance_flags(p):
    p.add_argument("--sample", type=int,
                   help="evaluate a random val-node sample of this size "
                        "(default: all val nodes)")
    p.add_argument("--instance-seed", type=int, default=0)


def build_parser() -> _Parser:
    parser = _Parser(prog="shypx", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate-dataset", help="build a synthetic hypergraph")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--spec", help="DatasetSpec JSON file")
    src.add_argument("--preset", choices=sorted(BENCHMARKS))
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", required=True)

    p = sub.add_parser("train", help="train a hyperGNN on a dataset")
    p.add_argument("--data", required=True)
    p.add_argument("--out", required=True, help="checkpoint directory")
    p.add_argument("--config", help="TrainConfig JSON file")
    p.add_argument("--layers", type=int, default=3)
    p.add_argument("--hidden", type=int, default=16)
    p.add_argument("--aggregation", choices=(hg.SUM, hg.ATTENTION),
                   default=hg.SUM)
    p.add_argument("--epochs", type=int)
    p.add_argument("--learning-rate", dest="learning_rate", type=float)
    p.add_argument("--seed", type=int)
    p.add_argument("--train-seeds", type=int, default=1,
                   help="train this many seeds, keep the best val accuracy")

    p = sub.add_parser("explain", help="explain one node instance")
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--node", type=int, required=True)
    p.add_argument("--method", choices=(SHYPX,) + BASELINE_METHODS,
                   default=SHYPX)
    p.add_argument("--top-n", dest="top_n", type=int, default=10,
                   help="link budget for baseline methods")
    _add_explain_flags(p)
    p.add_argument("--out", required=True)

    p = sub.add_parser("explain-global", help="concept-level explanations")
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--k", type=int, default=10)
    p.add_argument("--concept-seed", type=int, default=0)
    _add_explain_flags(p)
    p.add_argument("--out", required=True, help="output directory")

    p = sub.add_parser("evaluate", help="fidelity report for explanation files")
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--explanations", nargs="+", required=True,
                   help="explanation JSON files (one per method)")
    p.add_argument("--dataset-name", default="dataset")
    p.add_argument("--out", required=True, help="CSV output path")

    p = sub.add_parser("curve", help="faithfulness/size tradeoff curve")
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--ratios", type=float, nargs="+",
                   default=[0.2, 0.1, 0.05, 0.02, 0.01, 0.005])
    p.add_argument("--dataset-name", default="dataset")
    _add_explain_flags(p)
    _add_instance_flags(p)
    p.add_argument("--out", required=True)

    p = sub.add_parser("ablate-sampler", help="compare sampling strategies")
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--ablation-lambda-size", type=float, default=0.005)
    p.add_argument("--dataset-name", default="dataset")
    _add_explain_flags(p)
    _add_instance_flags(p)
    p.add_argument("--out", required=True)

    p = sub.add_parser("export-dot", help="render an explanation as DOT")
    p.add_argument("--data", required=True)
    p.add_argument("--explanation", required=True)
    p.add_argument("--out", required=True)

    p = sub.add_parser("run", help="full experiment from a config file")
    p.add_argument("--config", required=True)
    p.add_argument("--out", help="override the config's output directory")
    return parser


def _cmd_generate_dataset(args) -> None:
    if args.preset:
        spec = benchmark_spec(args.preset, seed=args.seed or 0)
    else:
        spec = DatasetSpec.from_json_dict(_load_json(args.spec))
        if args.seed is not None:
            spec = replace(spec, seed=args.seed)
    G = assemble_dataset(spec)
    out = _resolve_out(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    save_hypergraph(G, out)
    print(f"wrote {out}: {G.num_nodes} nodes, {G.num_hyperedges} hyperedges, "
          f"{G.num_links} links, {G.num_classes} classes")


def _cmd_train(args) -> None:
    G = load_hypergraph(args.data)
    cfg = hg.TrainConfig() if args.config is None else \
        hg.TrainConfig(**_load_json(args.config))
    overrides = {k: getattr(args, k) for k in ("epochs", "learning_rate", "seed")
                 if getattr(args, k) is not None}
    cfg = replace(cfg, **overrides) if overrides else cfg
    best, accs = None, []
    for s in range(args.train_seeds):
        model = hg.model_for_graph(G, num_layers=args.layers,
                                   hidden_dim=args.hidden,
                                   aggregation=args.aggregation,
                                   seed=cfg.seed + s)
        result = hg.train(model, G, replace(cfg, seed=cfg.seed + s))
        accs.append(result.val_acc)
        if best is None or result.val_acc > best.val_acc:
            best = result
    out = _resolve_out(args.out)
    hg.save_checkpoint(best.model, out, meta={
        "val_accuracies": accs, "train_acc": best.train_acc,
        "val_acc": best.val_acc, "config": cfg.__dict__})
    print(f"wrote {out}: train_acc={best.train_acc:.4f} "
          f"val_acc={best.val_acc:.4f} (seeds: {accs})")


def _cmd_explain(args) -> None:
    G = load_hypergraph(args.data)
    model = hg.load_checkpoint(args.model)
    cfg = _explain_config(args)
    if args.method == SHYPX:
        rec = explain_instance(model, G, args.node, cfg)
    else:
        rec = baseline_explanations(
            model, G, [args.node],
            BaselineConfig(n=args.top_n, seed=cfg.seed, method=args.method))[0]
    outcome = mt.instance_outcome(model, G, rec)
    sims = outcome.similarities()
    metrics = {
        "fid_minus": sims["minus"], "fid_plus": sims["plus"],
        "size": outcome.size, "comp_size": outcome.comp_size,
        "density": outcome.density,
    }
    out = _resolve_out(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(json.dumps(record_to_json_dict(rec, metrics=metrics), indent=1))
    print(f"wrote {out}: node={rec.node} size={outcome.size} "
          f"fid_minus_kl={sims['minus']['kl']:.6f}")


def _cmd_explain_global(args) -> None:
    G = load_hypergraph(args.data)
    model = hg.load_checkpoint(args.model)
    out = run_global_explanations(model, G, args.k, _explain_config(args),
                                  _resolve_out(args.out),
                                  seed=args.concept_seed)
    index = json.loads((out / "concepts_index.json").read_text())
    print(f"wrote {out}: k={args.k} completeness={index['completeness']}")


def _cmd_evaluate(args) -> None:
    G = load_hypergraph(args.data)
    model = hg.load_checkpoint(args.model)
    rows = []
    for path in args.explanations:
        records = load_records(path, G)
        report = mt.evaluate_explanations(model, G, records)
        method = records[0].method if records else "unknown"
        rows.append({"dataset": args.dataset_name, "method": method,
                     **report.as_row()})
    out = _resolve_out(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    _write_csv(out, FIDELITY_COLUMNS, rows)
    print(f"wrote {out}: {len(rows)} method rows")


def _cmd_curve(args) -> None:
    G = load_hypergraph(args.data)
    model = hg.load_checkpoint(args.model)
    nodes = _instances(args).pick(G)
    rows = tradeoff_curve(model, G, nodes, _explain_config(args), args.ratios)
    for row in rows:
        row["dataset"] = args.dataset_name
    out = _resolve_out(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    _write_csv(out, CURVE_COLUMNS, rows)
    print(f"wrote {out}: {len(rows)} grid points over {nodes.size} instances")


def _cmd_ablate_sampler(args) -> None:
    G = load_hypergraph(args.data)
    model = hg.load_checkpoint(args.model)
    nodes = _instances(args).pick(G)
    rows = sampler_ablation(model, G, nodes, _explain_config(args),
                            args.ablation_lambda_size)
    for row in rows:
        row["dataset"] = args.dataset_name
    out = _resolve_out(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    _write_csv(out, ABLATION_COLUMNS, rows)
    print(f"wrote {out}: {len(rows)} samplers over {nodes.size} instances")


def _cmd_export_dot(args) -> None:
    from shypx.explain import record_from_json_dict

    G = load_hypergraph(args.data)
    payload = _load_json(args.explanation)
    if isinstance(payload, list):
        records = [record_from_json_dict(d, G) for d in payload]
    else:
        records = [record_from_json_dict(payload, G)]
    out = _resolve_out(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(export_dot(records[0].explanation,
                              title=f"node {records[0].node}"))
    print(f"wrote {out}")


def _experiment_from_json(d: dict) -> ExperimentConfig:
    dataset = d.pop("dataset", {})
    spec = None
    path = None
    if "preset" in dataset:
        spec = benchmark_spec(dataset["preset"], seed=dataset.get("seed", 0))
    elif "spec" in dataset:
        spec = DatasetSpec.from_json_dict(dataset["spec"])
    elif "path" in dataset:
        path = dataset["path"]
    kwargs = dict(d)
    if "train" in kwargs:
        kwargs["train"] = hg.TrainConfig(**kwargs["train"])
    if "explain" in kwargs:
        kwargs["explain"] = ExplainConfig.from_json_dict(kwargs["explain"])
    if "instances" in kwargs:
        kwargs["instances"] = InstanceSelection(**kwargs["instances"])
    if "methods" in kwargs:
        kwargs["methods"] = tuple(kwargs["methods"])
    if "curve_ratios" in kwargs:
        kwargs["curve_ratios"] = tuple(kwargs["curve_ratios"])
    return ExperimentConfig(dataset_spec=spec, dataset_path=path, **kwargs)


def _cmd_run(args) -> None:
    d = _load_json(args.config)
    if args.out:
        d["out_dir"] = args.out
    d["out_dir"] = str(_resolve_out(d["out_dir"]))
    config = _experiment_from_json(d)
    out = run_experiment(config)
    print(f"experiment complete: {out}")


_HANDLERS = {
    "generate-dataset": _cmd_generate_dataset,
    "train": _cmd_train,
    "explain": _cmd_explain,
    "explain-global": _cmd_explain_global,
    "evaluate": _cmd_evaluate,
    "curve": _cmd_curve,
    "ablate-sampler": _cmd_ablate_sampler,
    "export-dot": _cmd_export_dot,
    "run": _cmd_run,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    try:
        _HANDLERS[args.command](args)
    except Exception as exc:  # stage failure
        traceback.print_exception(exc, file=sys.stderr)
        print(f"stage failure: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
