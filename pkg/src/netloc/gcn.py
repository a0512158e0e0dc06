"""Three-layer graph convolutional regressor with hand-written backprop.

Forward pass per graph, with Ahat the self-looped symmetric normalized
adjacency and H0 the n x d feature matrix:

    Q(l) = Ahat @ H(l-1) @ W(l-1)      H(l) = relu(Q(l))     l = 1..3
    z    = column mean of H(3)         yhat = z @ w_lin + b

The backward pass mirrors this exactly; every intermediate needed by the
chain rule is cached in :class:`GcnActivations`.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .graphs import Graph
from .kernels import glorot_init, mean_pool, normalized_adjacency, relu, relu_grad
from .models import GraphRegressor

__all__ = ["GcnActivations", "GCN"]


@dataclass
class GcnActivations:
    """Every intermediate of one forward pass. p(l) = Ahat @ H(l-1)."""

    ahat: np.ndarray
    h0: np.ndarray
    p1: np.ndarray
    q1: np.ndarray
    h1: np.ndarray
    p2: np.ndarray
    q2: np.ndarray
    h2: np.ndarray
    p3: np.ndarray
    q3: np.ndarray
    h3: np.ndarray
    z: np.ndarray
    yhat: float


class GCN(GraphRegressor):
    """Widths d -> k0 -> k1 -> k2 -> scalar head."""

    kind = "gcn"
    param_names = ("w0", "w1", "w2", "w_lin", "b")

    def __init__(self, d: int = 7, k0: int = 64, k1: int = 64, k2: int = 64):
        if min(d, k0, k1, k2) < 1:
            raise ValueError(f"widths must be positive, got {(d, k0, k1, k2)}")
        self.d = d
        self.k0 = k0
        self.k1 = k1
        self.k2 = k2

    def widths(self) -> dict:
        return {"d": self.d, "k0": self.k0, "k1": self.k1, "k2": self.k2}

    def init_params(self, seed: int | np.random.Generator) -> dict[str, np.ndarray]:
        rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
        return {
            "w0": glorot_init(self.d, self.k0, rng),
            "w1": glorot_init(self.k0, self.k1, rng),
            "w2": glorot_init(self.k1, self.k2, rng),
            "w_lin": glorot_init(self.k2, 1, rng),
            "b": np.zeros(()),
        }

    def prepare(self, graph: Graph, h0: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        h0 = np.asarray(h0, dtype=np.float64)
        if h0.shape != (graph.n, self.d):
            raise ValueError(f"features must be {(graph.n, self.d)}, got {h0.shape}")
        return normalized_adjacency(graph), h0

    def forward(self, params, inputs, train: bool = False, rng=None) -> tuple[float, GcnActivations]:
        ahat, h0 = inputs
        p1 = ahat @ h0
        q1 = p1 @ params["w0"]
        h1 = relu(q1)
        p2 = ahat @ h1
        q2 = p2 @ params["w1"]
        h2 = relu(q2)
        p3 = ahat @ h2
        q3 = p3 @ params["w2"]
        h3 = relu(q3)
        z = mean_pool(h3)
        yhat = float(z @ params["w_lin"][:, 0] + params["b"])
        return yhat, GcnActivations(ahat, h0, p1, q1, h1, p2, q2, h2, p3, q3, h3, z, yhat)

    def backward(self, params, acts: GcnActivations, dy: float) -> dict[str, np.ndarray]:
        """Gradients of dy * yhat's upstream loss term for one graph."""
        n = acts.h0.shape[0]
        dz = dy * params["w_lin"][:, 0]
        dw_lin = dy * acts.z[:, None]
        db = np.array(dy)
        # Mean pooling spreads dz uniformly over rows with weight 1/n.
        dq3 = relu_grad(acts.q3) * (dz / n)[None, :]
        dw2 = acts.p3.T @ dq3
        dh2 = acts.ahat @ (dq3 @ params["w2"].T)
        dq2 = relu_grad(acts.q2) * dh2
        dw1 = acts.p2.T @ dq2
        dh1 = acts.ahat @ (dq2 @ params["w1"].T)
        dq1 = relu_grad(acts.q1) * dh1
        dw0 = acts.p1.T @ dq1
        return {"w0": dw0, "w1": dw1, "w2": dw2, "w_lin": dw_lin, "b": db}
