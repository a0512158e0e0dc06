"""Dense numeric kernels: matrix ops, activations, init, and regression losses.

Everything is float64 numpy. These are the only primitives the model modules
build on, so their contracts (shapes, kinks, gradients) are pinned by tests.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .graphs import Graph

__all__ = [
    "matmul",
    "normalized_adjacency",
    "relu",
    "relu_grad",
    "leaky_relu",
    "leaky_relu_grad",
    "softmax",
    "mean_pool",
    "glorot_init",
    "LossKind",
    "MSE",
    "LOG_MSE",
    "loss",
    "loss_grad",
]


def matmul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Product of two 2-D float matrices with explicit shape validation."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.ndim != 2 or b.ndim != 2:
        raise ValueError(f"matmul needs 2-D operands, got {a.ndim}-D and {b.ndim}-D")
    if a.shape[1] != b.shape[0]:
        raise ValueError(f"inner dimensions differ: {a.shape} @ {b.shape}")
    return a @ b


def normalized_adjacency(g: Graph) -> np.ndarray:
    """Self-looped symmetric normalization D^(-1/2) (A + I) D^(-1/2).

    D is the degree matrix of A + I, so every row has positive degree and the
    result is symmetric with leading eigenvalue exactly 1.
    """
    a = g.adjacency_matrix()
    a[np.diag_indices(g.n)] += 1.0
    d_inv_sqrt = 1.0 / np.sqrt(a.sum(axis=1))
    return a * d_inv_sqrt[:, None] * d_inv_sqrt[None, :]


def relu(x: np.ndarray) -> np.ndarray:
    return np.maximum(x, 0.0)


def relu_grad(x: np.ndarray) -> np.ndarray:
    """Derivative of relu taken as 0 at the kink."""
    return (x > 0.0).astype(np.float64)


def leaky_relu(x: np.ndarray, slope: float = 0.2) -> np.ndarray:
    return np.where(x > 0.0, x, slope * x)


def leaky_relu_grad(x: np.ndarray, slope: float = 0.2) -> np.ndarray:
    return np.where(x > 0.0, 1.0, slope)


def softmax(x: np.ndarray) -> np.ndarray:
    """Stable softmax over the last axis; invariant to a constant shift."""
    x = np.asarray(x, dtype=np.float64)
    shifted = x - np.max(x, axis=-1, keepdims=True)
    e = np.exp(shifted)
    return e / np.sum(e, axis=-1, keepdims=True)


def mean_pool(h: np.ndarray) -> np.ndarray:
    """Column means of a node-embedding matrix: the graph readout vector."""
    h = np.asarray(h, dtype=np.float64)
    if h.ndim != 2 or h.shape[0] == 0:
        raise ValueError(f"mean_pool needs a nonempty 2-D matrix, got shape {h.shape}")
    return h.mean(axis=0)


def glorot_init(f_in: int, f_out: int, rng: int | np.random.Generator) -> np.ndarray:
    """Glorot-uniform matrix: i.i.d. U(-L, L) with L = sqrt(6 / (f_in + f_out))."""
    if f_in < 1 or f_out < 1:
        raise ValueError(f"fan sizes must be positive, got ({f_in}, {f_out})")
    if not isinstance(rng, np.random.Generator):
        rng = np.random.default_rng(rng)
    limit = np.sqrt(6.0 / (f_in + f_out))
    return rng.uniform(-limit, limit, size=(f_in, f_out))


@dataclass(frozen=True)
class LossKind:
    """Regression loss selector: plain MSE or MSE in log space.

    The log variant clamps both prediction and target from below at
    ``log_floor`` before taking logs; the clamp has zero gradient below the
    floor.
    """

    kind: str = "mse"
    log_floor: float = 1e-12

    def __post_init__(self) -> None:
        if self.kind not in ("mse", "logmse"):
            raise ValueError(f"unknown loss kind {self.kind!r}")
        if self.log_floor <= 0.0:
            raise ValueError(f"log_floor must be positive, got {self.log_floor}")


MSE = LossKind("mse")
LOG_MSE = LossKind("logmse")


def _check_pair(pred: np.ndarray, target: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    pred = np.asarray(pred, dtype=np.float64)
    target = np.asarray(target, dtype=np.float64)
    if pred.ndim != 1 or target.ndim != 1:
        raise ValueError("loss expects 1-D prediction and target vectors")
    if pred.shape != target.shape:
        raise ValueError(f"length mismatch: {pred.shape[0]} predictions, {target.shape[0]} targets")
    if pred.shape[0] == 0:
        raise ValueError("loss needs at least one sample")
    return pred, target


def loss(pred: np.ndarray, target: np.ndarray, kind: LossKind = MSE) -> float:
    """Mean squared error of the batch, optionally in log space."""
    pred, target = _check_pair(pred, target)
    if kind.kind == "mse":
        diff = pred - target
    else:
        diff = np.log(np.maximum(pred, kind.log_floor)) - np.log(np.maximum(target, kind.log_floor))
    return float(np.mean(diff * diff))


def loss_grad(pred: np.ndarray, target: np.ndarray, kind: LossKind = MSE) -> np.ndarray:
    """Gradient of :func:`loss` with respect to each prediction: (2/N) terms."""
    pred, target = _check_pair(pred, target)
    n = pred.shape[0]
    if kind.kind == "mse":
        return (2.0 / n) * (pred - target)
    clamped = np.maximum(pred, kind.log_floor)
    diff = np.log(clamped) - np.log(np.maximum(target, kind.log_floor))
    grad = (2.0 / n) * diff / clamped
    grad[pred < kind.log_floor] = 0.0
    return grad
