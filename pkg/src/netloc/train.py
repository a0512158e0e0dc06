"""Training loop, evaluation report, artifact writers, and gradient checking.

Every run is a pure function of (config, dataset): parameter init, batch
order, and dropout all derive from the config seed, and no wall-clock value is
ever written into an artifact file.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field, asdict
from pathlib import Path

import numpy as np

from .data import LabeledGraph
from .gat import GAT
from .gcn import GCN
from .graphs import is_connected, make_er
from .kernels import LossKind, loss
from .models import GraphRegressor, save_checkpoint
from .optim import make_optimizer
from .spectral import Region, RegionThresholds, classify_region

__all__ = [
    "TrainConfig",
    "TrainResult",
    "EvalReport",
    "NumericFailure",
    "build_model",
    "train",
    "evaluate",
    "write_training_artifacts",
    "write_eval_report",
    "gradient_check",
]

CONFIG_FORMAT = "netloc-train-config"
CONFIG_VERSION = 1

SNAPSHOT_EPOCHS = (0, 1, 2, 3, 4)


class NumericFailure(ArithmeticError):
    """Training loss left the finite range; carries the failing epoch."""

    def __init__(self, message: str, epoch: int, loss_value: float):
        super().__init__(message)
        self.epoch = epoch
        self.loss_value = loss_value


@dataclass(frozen=True)
class TrainConfig:
    """Complete recipe for one training run."""

    model: str = "gcn"
    loss: str = "mse"
    optimizer: str = "adam"
    lr: float = 0.01
    weight_decay: float = 5e-4
    epochs: int = 500
    batch_size: int | None = None
    seed: int = 0
    d: int = 7
    k0: int = 64
    k1: int = 64
    k2: int = 64
    heads: int = 4
    f1: int = 16
    f2: int = 64
    dropout: float = 0.6

    def __post_init__(self) -> None:
        if self.model not in ("gcn", "gat"):
            raise ValueError(f"model must be 'gcn' or 'gat', got {self.model!r}")
        if self.loss not in ("mse", "logmse"):
            raise ValueError(f"loss must be 'mse' or 'logmse', got {self.loss!r}")
        if self.epochs < 0:
            raise ValueError(f"epochs must be nonnegative, got {self.epochs}")
        if self.batch_size is not None and self.batch_size < 1:
            raise ValueError(f"batch_size must be positive or null, got {self.batch_size}")

    def to_dict(self) -> dict:
        return {"format": CONFIG_FORMAT, "version": CONFIG_VERSION, **asdict(self)}

    @classmethod
    def from_dict(cls, d: dict) -> "TrainConfig":
        d = dict(d)
        fmt = d.pop("format", CONFIG_FORMAT)
        ver = d.pop("version", CONFIG_VERSION)
        if fmt != CONFIG_FORMAT:
            raise ValueError(f"config format {fmt!r} is not {CONFIG_FORMAT!r}")
        if ver != CONFIG_VERSION:
            raise ValueError(f"config version {ver!r} unsupported (expected {CONFIG_VERSION})")
        return cls(**d)

    @classmethod
    def from_json(cls, path: str | Path) -> "TrainConfig":
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))

    def to_json(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), sort_keys=True, indent=1) + "\n", encoding="utf-8")


@dataclass
class TrainResult:
    model: GraphRegressor
    params: dict[str, np.ndarray]
    loss_curve: np.ndarray
    snapshots: dict[int, dict[str, np.ndarray]]
    config: TrainConfig


@dataclass
class EvalReport:
    """Evaluation summary; ``runtime_s`` is informational and never serialized."""

    count: int
    mse: float
    region_accuracy: float
    confusion: np.ndarray
    region_counts: tuple[int, int, int]
    predictions: np.ndarray
    targets: np.ndarray
    families: list[str]
    sizes: list[int]
    runtime_s: float = field(default=0.0, compare=False)


def build_model(config: TrainConfig) -> GraphRegressor:
    if config.model == "gcn":
        return GCN(d=config.d, k0=config.k0, k1=config.k1, k2=config.k2)
    return GAT(d=config.d, heads=config.heads, f1=config.f1, f2=config.f2, dropout=config.dropout)


def _copy_params(params: dict[str, np.ndarray]) -> dict[str, np.ndarray]:
    return {k: v.copy() for k, v in params.items()}


def train(config: TrainConfig, items: list[LabeledGraph]) -> TrainResult:
    """Run the full training loop over labeled graphs.

    Weight snapshots are taken at epochs 0 (initialization) through 4 and at
    the final epoch, matching what the weight-histogram artifacts need.
    """
    if not items:
        raise ValueError("cannot train on an empty dataset")
    model = build_model(config)
    params = model.init_params(np.random.default_rng(config.seed))
    prepared = [model.prepare(it.graph, it.features) for it in items]
    targets = np.array([it.target for it in items])
    kind = LossKind(config.loss)
    opt = make_optimizer(config.optimizer, config.lr, config.weight_decay)
    order_rng = np.random.default_rng([config.seed, 1])
    dropout_rng = np.random.default_rng([config.seed, 2])
    n_items = len(items)
    snapshots = {0: _copy_params(params)}
    curve = np.zeros(config.epochs)
    for epoch in range(1, config.epochs + 1):
        if config.batch_size is None or config.batch_size >= n_items:
            batches = [np.arange(n_items)]
        else:
            perm = order_rng.permutation(n_items)
            batches = [perm[i : i + config.batch_size] for i in range(0, n_items, config.batch_size)]
        epoch_loss = 0.0
        for batch in batches:
            batch_loss, grads = model.batch_step(
                params,
                [prepared[i] for i in batch],
                targets[batch],
                kind,
                train=True,
                rng=dropout_rng,
            )
            if not np.isfinite(batch_loss):
                raise NumericFailure(
                    f"loss became {batch_loss} at epoch {epoch} "
                    f"(lr={config.lr}, optimizer={config.optimizer}); lower the learning rate",
                    epoch=epoch,
                    loss_value=float(batch_loss),
                )
            opt.step(params, grads)
            epoch_loss += batch_loss * len(batch) / n_items
        curve[epoch - 1] = epoch_loss
        if epoch in SNAPSHOT_EPOCHS or epoch == config.epochs:
            snapshots[epoch] = _copy_params(params)
    return TrainResult(model=model, params=params, loss_curve=curve, snapshots=snapshots, config=config)


def evaluate(
    model: GraphRegressor,
    params: dict[str, np.ndarray],
    items: list[LabeledGraph],
    thresholds: RegionThresholds = RegionThresholds(),
) -> EvalReport:
    """Eval-mode predictions with MSE, region accuracy, and a 3x3 confusion matrix.

    Confusion rows are true regions expressed as percentages summing to 100
    (rows with no members stay zero).
    """
    if not items:
        raise ValueError("cannot evaluate an empty dataset")
    t0 = time.perf_counter()
    prepared = [model.prepare(it.graph, it.features) for it in items]
    preds = model.predict(params, prepared)
    targets = np.array([it.target for it in items])
    true_r = np.array([int(classify_region(t, thresholds)) for t in targets])
    pred_r = np.array([int(classify_region(p, thresholds)) for p in preds])
    counts = np.zeros((3, 3), dtype=np.int64)
    for tr, pr in zip(true_r, pred_r):
        counts[tr - 1, pr - 1] += 1
    confusion = np.zeros((3, 3))
    for row in range(3):
        total = counts[row].sum()
        if total > 0:
            confusion[row] = 100.0 * counts[row] / total
    report = EvalReport(
        count=len(items),
        mse=loss(preds, targets),
        region_accuracy=float(np.mean(true_r == pred_r)),
        confusion=confusion,
        region_counts=tuple(int(c) for c in counts.sum(axis=1)),
        predictions=preds,
        targets=targets,
        families=[it.family for it in items],
        sizes=[it.graph.n for it in items],
        runtime_s=time.perf_counter() - t0,
    )
    return report


def write_training_artifacts(result: TrainResult, directory: str | Path) -> None:
    """checkpoint.json, loss_curve.csv, and per-snapshot weight histograms."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    save_checkpoint(directory / "checkpoint.json", result.model, result.params, result.config.to_dict())
    rows = ["epoch,loss"]
    rows.extend(f"{e + 1},{v!r}" for e, v in enumerate(result.loss_curve))
    (directory / "loss_curve.csv").write_text("\n".join(rows) + "\n", encoding="utf-8")
    for epoch in sorted(result.snapshots):
        for name, w in result.snapshots[epoch].items():
            counts, edges = np.histogram(w.ravel(), bins=30)
            lines = ["bin_lo,bin_hi,count"]
            lines.extend(
                f"{edges[k]!r},{edges[k + 1]!r},{int(counts[k])}" for k in range(len(counts))
            )
            path = directory / f"weights_epoch{epoch:04d}_{name}.csv"
            path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def write_eval_report(report: EvalReport, directory: str | Path) -> None:
    """predictions.csv, confusion.csv, and summary.json (no volatile fields)."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    rows = ["id,n,family,target,prediction,true_region,pred_region"]
    for i in range(report.count):
        t = report.targets[i]
        p = report.predictions[i]
        rows.append(
            f"{i},{report.sizes[i]},{report.families[i]},{t!r},{p!r},"
            f"{int(classify_region(float(t)))},{int(classify_region(float(p)))}"
        )
    (directory / "predictions.csv").write_text("\n".join(rows) + "\n", encoding="utf-8")
    lines = ["true_region,pred_1,pred_2,pred_3"]
    for row in range(3):
        vals = ",".join(repr(float(v)) for v in report.confusion[row])
        lines.append(f"{row + 1},{vals}")
    (directory / "confusion.csv").write_text("\n".join(lines) + "\n", encoding="utf-8")
    summary = {
        "count": report.count,
        "mse": report.mse,
        "region_accuracy": report.region_accuracy,
        "region_counts": list(report.region_counts),
    }
    (directory / "summary.json").write_text(
        json.dumps(summary, sort_keys=True, indent=1) + "\n", encoding="utf-8"
    )


def _batch_loss(model: GraphRegressor, params, prepared, targets, kind: LossKind) -> float:
    preds = model.predict(params, prepared)
    return loss(preds, targets, kind)


def gradient_check(
    model_kind: str = "gcn",
    seed: int = 0,
    h: float = 1e-6,
    n_range: tuple[int, int] = (5, 10),
) -> float:
    """Max relative error between analytic and central-difference gradients.

    Runs in eval mode on a small random connected graph pair, redrawing the
    seed when any pre-activation sits within 1e-4 of a ReLU/LeakyReLU kink
    (finite differences straddle kinks, analytic gradients do not).

    Entries where analytic and numeric are both below 1e-8 count as agreeing:
    central differences at h=1e-6 carry about eps*loss/(2h) ~ 1e-10 of float64
    rounding noise, so they cannot resolve an exact-zero gradient (the
    attention softmax produces true zeros whenever a neighborhood's scores all
    sit on one side of the LeakyReLU kink).
    """
    if model_kind == "gcn":
        model: GraphRegressor = GCN(d=7, k0=8, k1=8, k2=8)
    elif model_kind == "gat":
        model = GAT(d=7, heads=2, f1=4, f2=8, dropout=0.0)
    else:
        raise ValueError(f"model must be 'gcn' or 'gat', got {model_kind!r}")
    for attempt in range(50):
        rng = np.random.default_rng([seed, attempt])
        prepared = []
        for _ in range(2):
            n = int(rng.integers(n_range[0], n_range[1] + 1))
            g = None
            for _ in range(100):
                cand = make_er(n, 0.5, int(rng.integers(2**63)))
                if is_connected(cand):
                    g = cand
                    break
            if g is None:
                break
            prepared.append(model.prepare(g, rng.random((n, model.d if hasattr(model, "d") else 7))))
        if len(prepared) != 2:
            continue
        targets = rng.uniform(0.05, 0.5, size=2)
        params = model.init_params(rng)
        gap = min(_kink_gap(model, params, inp) for inp in prepared)
        if gap < 1e-4:
            continue
        _, grads = model.batch_step(params, prepared, targets)
        max_rel = 0.0
        for name in model.param_names:
            p = params[name]
            for idx in np.ndindex(p.shape):
                orig = p[idx]
                p[idx] = orig + h
                lp = _batch_loss(model, params, prepared, targets, LossKind("mse"))
                p[idx] = orig - h
                lm = _batch_loss(model, params, prepared, targets, LossKind("mse"))
                p[idx] = orig
                numeric = (lp - lm) / (2.0 * h)
                analytic = float(grads[name][idx])
                if abs(analytic) + abs(numeric) < 1e-8:
                    continue
                rel = abs(analytic - numeric) / max(1e-6, abs(analytic) + abs(numeric))
                max_rel = max(max_rel, rel)
        return max_rel
    raise RuntimeError(f"no kink-free configuration found for seed {seed}")


def _kink_gap(model: GraphRegressor, params, inputs) -> float:
    """Smallest |pre-activation| of an eval forward pass."""
    _, acts = model.forward(params, inputs)
    if isinstance(model, GCN):
        return min(float(np.min(np.abs(a))) for a in (acts.q1, acts.q2, acts.q3))
    vals = [acts.layer2.pre, acts.layer2.s]
    for cache in acts.heads:
        vals.extend([cache.pre, cache.s])
    return min(float(np.min(np.abs(v))) for v in vals)
