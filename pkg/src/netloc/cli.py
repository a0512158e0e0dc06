"""Command-line entry point: netloc {generate,spectral,features,ingest-tu,train,eval,gradcheck}.

Machine-readable behavior: results go to stdout as JSON or CSV, operational
failures print a one-line JSON error object to stderr and exit 1, usage errors
exit 2 (argparse's convention).
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

from . import data as data_mod
from .features import FEATURE_COLUMNS, build_feature_matrix
from .graphs import read_edgelist
from .models import load_checkpoint
from .spectral import RegionThresholds, ipr, label_graph, power_iteration
from .train import (
    TrainConfig,
    evaluate,
    gradient_check,
    train,
    write_eval_report,
    write_training_artifacts,
)


def _emit(obj: dict) -> None:
    print(json.dumps(obj, sort_keys=True))


def _thresholds(args) -> RegionThresholds:
    return RegionThresholds(tau1=args.tau1, tau2=args.tau2, epsilon=args.epsilon)


def _add_threshold_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--tau1", type=float, default=0.05, help="delocalized/weak threshold")
    p.add_argument("--tau2", type=float, default=0.2, help="weak/strong threshold")
    p.add_argument("--epsilon", type=float, default=1e-6, help="threshold margin")


def _cmd_spectral(args) -> int:
    g = read_edgelist(args.edgelist)
    res = power_iteration(g, tol=args.tol, max_iter=args.max_iter)
    y = ipr(res.pev)
    _, region = label_graph(g, _thresholds(args), tol=args.tol, max_iter=args.max_iter)
    _emit(
        {
            "n": g.n,
            "m": g.m,
            "lambda1": res.eigenvalue,
            "ipr": y,
            "region": int(region),
            "region_name": region.name,
            "iterations": res.iterations,
            "residual": res.residual,
        }
    )
    return 0


def _cmd_features(args) -> int:
    g = read_edgelist(args.edgelist)
    h = build_feature_matrix(g)
    lines = [",".join(FEATURE_COLUMNS)]
    lines.extend(",".join(repr(float(v)) for v in row) for row in h)
    text = "\n".join(lines) + "\n"
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
        _emit({"out": str(args.out), "rows": g.n, "cols": len(FEATURE_COLUMNS)})
    else:
        sys.stdout.write(text)
    return 0


def _cmd_generate(args) -> int:
    if args.config:
        spec = data_mod.DatasetSpec.from_dict(json.loads(Path(args.config).read_text(encoding="utf-8")))
    else:
        spec = data_mod.DatasetSpec()
    overrides: dict = {}
    if args.families:
        overrides["families"] = tuple(args.families.split(","))
    for key, flag in (
        ("train_count", args.train_count),
        ("test_count", args.test_count),
        ("seed", args.seed),
        ("er_mean_degree", args.er_mean_degree),
        ("sf_m", args.sf_m),
    ):
        if flag is not None:
            overrides[key] = flag
    if args.train_sizes:
        overrides["train_size_range"] = tuple(args.train_sizes)
    if args.test_sizes:
        overrides["test_size_range"] = tuple(args.test_sizes)
    if overrides:
        spec = data_mod.DatasetSpec(**{**spec.to_dict(), **overrides})
    t0 = time.perf_counter()
    train_items, test_items = data_mod.build_synthetic(spec)
    out = Path(args.out)
    data_mod.save_dataset(train_items, out / "train", spec=spec, name="train")
    data_mod.save_dataset(test_items, out / "test", spec=spec, name="test")
    _emit(
        {
            "out": str(out),
            "train": len(train_items),
            "test": len(test_items),
            "seconds": round(time.perf_counter() - t0, 3),
        }
    )
    return 0


def _cmd_ingest_tu(args) -> int:
    graphs = data_mod.ingest_tu_dataset(args.directory, name=args.name)
    kept = data_mod.preprocess(graphs, name=args.name or "tu", min_nodes=args.min_nodes)
    data_mod.save_dataset(kept, args.out, name=args.name or "tu")
    _emit({"raw": len(graphs), "kept": len(kept), "out": str(args.out)})
    return 0


def _cmd_train(args) -> int:
    if args.config:
        config = TrainConfig.from_json(args.config)
    else:
        config = TrainConfig()
    overrides: dict = {}
    for key in ("model", "loss", "optimizer", "lr", "weight_decay", "epochs", "seed", "dropout"):
        val = getattr(args, key)
        if val is not None:
            overrides[key] = val
    if args.batch_size is not None:
        overrides["batch_size"] = None if args.batch_size == 0 else args.batch_size
    if overrides:
        config = TrainConfig.from_dict({**config.to_dict(), **overrides})
    items, _ = data_mod.load_dataset(args.data, verify=not args.no_verify)
    t0 = time.perf_counter()
    result = train(config, items)
    write_training_artifacts(result, args.out)
    _emit(
        {
            "out": str(args.out),
            "epochs": config.epochs,
            "final_loss": float(result.loss_curve[-1]) if config.epochs else None,
            "seconds": round(time.perf_counter() - t0, 3),
        }
    )
    return 0


def _cmd_eval(args) -> int:
    model, params, _ = load_checkpoint(args.checkpoint)
    items, _ = data_mod.load_dataset(args.data, verify=not args.no_verify)
    report = evaluate(model, params, items, _thresholds(args))
    write_eval_report(report, args.out)
    _emit(
        {
            "out": str(args.out),
            "count": report.count,
            "mse": report.mse,
            "region_accuracy": report.region_accuracy,
            "seconds": round(report.runtime_s, 3),
        }
    )
    return 0


def _cmd_gradcheck(args) -> int:
    worst = 0.0
    for s in range(args.seeds):
        worst = max(worst, gradient_check(args.model, seed=args.seed + s))
    _emit({"model": args.model, "seeds": args.seeds, "max_rel_err": worst, "tolerance": 1e-4})
    return 0 if worst < 1e-4 else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="netloc",
        description="Spectral localization labels and graph neural regressors.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("spectral", help="principal eigenpair and IPR of one edge list")
    p.add_argument("edgelist")
    p.add_argument("--tol", type=float, default=1e-10)
    p.add_argument("--max-iter", type=int, default=100000, dest="max_iter")
    _add_threshold_flags(p)
    p.set_defaults(func=_cmd_spectral)

    p = sub.add_parser("features", help="7-column node feature CSV of one edge list")
    p.add_argument("edgelist")
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_features)

    p = sub.add_parser("generate", help="build a synthetic train/test dataset")
    p.add_argument("--out", required=True)
    p.add_argument("--config", default=None, help="DatasetSpec JSON file")
    p.add_argument("--families", default=None, help="comma list, e.g. cycle,star")
    p.add_argument("--train-count", type=int, default=None, dest="train_count")
    p.add_argument("--test-count", type=int, default=None, dest="test_count")
    p.add_argument("--train-sizes", type=int, nargs=2, default=None, dest="train_sizes", metavar=("LO", "HI"))
    p.add_argument("--test-sizes", type=int, nargs=2, default=None, dest="test_sizes", metavar=("LO", "HI"))
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--er-mean-degree", type=float, default=None, dest="er_mean_degree")
    p.add_argument("--sf-m", type=int, default=None, dest="sf_m")
    p.set_defaults(func=_cmd_generate)

    p = sub.add_parser("ingest-tu", help="parse a TU text dataset, filter, label, save")
    p.add_argument("directory")
    p.add_argument("--out", required=True)
    p.add_argument("--name", default=None)
    p.add_argument("--min-nodes", type=int, default=10, dest="min_nodes")
    p.set_defaults(func=_cmd_ingest_tu)

    p = sub.add_parser("train", help="train a model on a saved dataset")
    p.add_argument("--data", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--config", default=None, help="TrainConfig JSON file")
    p.add_argument("--model", choices=("gcn", "gat"), default=None)
    p.add_argument("--loss", choices=("mse", "logmse"), default=None)
    p.add_argument("--optimizer", choices=("gd", "adam", "adamw"), default=None)
    p.add_argument("--lr", type=float, default=None)
    p.add_argument("--weight-decay", type=float, default=None, dest="weight_decay")
    p.add_argument("--dropout", type=float, default=None)
    p.add_argument("--epochs", type=int, default=None)
    p.add_argument("--batch-size", type=int, default=None, dest="batch_size", help="0 means full batch")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--no-verify", action="store_true", dest="no_verify")
    p.set_defaults(func=_cmd_train)

    p = sub.add_parser("eval", help="evaluate a checkpoint on a saved dataset")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--no-verify", action="store_true", dest="no_verify")
    _add_threshold_flags(p)
    p.set_defaults(func=_cmd_eval)

    p = sub.add_parser("gradcheck", help="finite-difference check of model gradients")
    p.add_argument("--model", choices=("gcn", "gat"), default="gcn")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--seeds", type=int, default=5, help="number of consecutive seeds to check")
    p.set_defaults(func=_cmd_gradcheck)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except BrokenPipeError:
        return 1
    except Exception as exc:  # operational failure: machine-readable, nonzero
        print(json.dumps({"error": str(exc), "type": type(exc).__name__}), file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
