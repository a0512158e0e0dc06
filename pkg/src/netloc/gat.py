"""Two-layer graph attention regressor with hand-written backprop.

Layer 1 runs ``heads`` independent attention heads (feature width f1 each) and
concatenates them; layer 2 is a single head of width f2. Attention follows the
standard recipe: for j in N(i) plus the self loop,

    e_ij    = LeakyReLU(a . [W h_i || W h_j])        (slope 0.2)
    alpha_i = softmax over e_i.
    h'_i    = relu(sum_j alpha_ij W h_j)

In train mode, dropout is applied to each layer's input features and to the
normalized attention weights; eval mode is deterministic.

Neighborhoods are flattened into one directed edge array grouped by target
node, so softmax and aggregation are numpy segment operations rather than
per-node loops.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .graphs import Graph
from .kernels import glorot_init, leaky_relu, leaky_relu_grad, mean_pool, relu, relu_grad, softmax
from .models import GraphRegressor

__all__ = ["LEAKY_SLOPE", "GatInputs", "GatActivations", "GAT", "attention_scores", "attention_normalize"]

LEAKY_SLOPE = 0.2


def attention_scores(wh_i: np.ndarray, wh_j: np.ndarray, a: np.ndarray, slope: float = LEAKY_SLOPE) -> np.ndarray:
    """Raw score e_ij = LeakyReLU(a . [wh_i || wh_j]) for one or many row pairs."""
    wh_i = np.asarray(wh_i, dtype=np.float64)
    wh_j = np.asarray(wh_j, dtype=np.float64)
    a = np.asarray(a, dtype=np.float64)
    f = wh_i.shape[-1]
    if a.shape != (2 * f,):
        raise ValueError(f"attention vector must have length {2 * f}, got {a.shape}")
    return leaky_relu(wh_i @ a[:f] + wh_j @ a[f:], slope)


def attention_normalize(scores: np.ndarray) -> np.ndarray:
    """Softmax of one neighborhood's raw scores; positive and sums to 1."""
    scores = np.asarray(scores, dtype=np.float64)
    if scores.ndim != 1 or scores.shape[0] == 0:
        raise ValueError("attention_normalize expects a nonempty 1-D score vector")
    return softmax(scores)


@dataclass
class GatInputs:
    """Flattened self-looped neighborhoods of one graph.

    ``tgt``/``nbr`` list every directed pair (i attends to j) grouped by i,
    ``starts`` holds each node's segment start, and ``tperm`` permutes edge
    values into nbr-grouped order (the transpose), which turns scatter-adds
    into contiguous segment sums.
    """

    n: int
    h0: np.ndarray
    tgt: np.ndarray
    nbr: np.ndarray
    starts: np.ndarray
    tperm: np.ndarray


@dataclass
class AttnCache:
    """One attention sublayer's intermediates for one forward pass."""

    wh: np.ndarray
    pre: np.ndarray
    alpha: np.ndarray
    alpha_used: np.ndarray
    amask: np.ndarray | None
    s: np.ndarray


@dataclass
class GatActivations:
    inputs: GatInputs
    train: bool
    h0d: np.ndarray
    mask0: np.ndarray | None
    heads: list[AttnCache]
    h1c: np.ndarray
    mask1: np.ndarray | None
    h1in: np.ndarray
    layer2: AttnCache
    h2: np.ndarray
    z: np.ndarray
    yhat: float


class GAT(GraphRegressor):
    """d -> heads x f1 (concat) -> f2 -> scalar head, dropout rate ``dropout``.

    The head bias starts at ``bias_init`` (default 0.15) rather than zero.
    This model is normally fit with the log-space loss, which has no gradient
    once a prediction falls below the positivity floor; a small positive
    starting bias keeps early predictions inside the loss's live range.
    """

    kind = "gat"

    def __init__(
        self,
        d: int = 7,
        heads: int = 4,
        f1: int = 16,
        f2: int = 64,
        dropout: float = 0.6,
        bias_init: float = 0.15,
    ):
        if min(d, heads, f1, f2) < 1:
            raise ValueError(f"widths must be positive, got {(d, heads, f1, f2)}")
        if not (0.0 <= dropout < 1.0):
            raise ValueError(f"dropout must lie in [0,1), got {dropout}")
        if not np.isfinite(bias_init):
            raise ValueError(f"bias_init must be finite, got {bias_init}")
        self.d = d
        self.heads = heads
        self.f1 = f1
        self.f2 = f2
        self.dropout = dropout
        self.bias_init = float(bias_init)
        names: list[str] = []
        for h in range(heads):
            names.append(f"w1h{h}")
            names.append(f"a1h{h}")
        names.extend(["w2", "a2", "w_lin", "b"])
        self.param_names = tuple(names)

    def widths(self) -> dict:
        return {
            "d": self.d,
            "heads": self.heads,
            "f1": self.f1,
            "f2": self.f2,
            "dropout": self.dropout,
            "bias_init": self.bias_init,
        }

    def init_params(self, seed: int | np.random.Generator) -> dict[str, np.ndarray]:
        rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
        params: dict[str, np.ndarray] = {}
        for h in range(self.heads):
            params[f"w1h{h}"] = glorot_init(self.d, self.f1, rng)
            params[f"a1h{h}"] = glorot_init(2 * self.f1, 1, rng).ravel()
        params["w2"] = glorot_init(self.heads * self.f1, self.f2, rng)
        params["a2"] = glorot_init(2 * self.f2, 1, rng).ravel()
        params["w_lin"] = glorot_init(self.f2, 1, rng)
        params["b"] = np.full((), self.bias_init)
        return params

    def prepare(self, graph: Graph, h0: np.ndarray) -> GatInputs:
        h0 = np.asarray(h0, dtype=np.float64)
        if h0.shape != (graph.n, self.d):
            raise ValueError(f"features must be {(graph.n, self.d)}, got {h0.shape}")
        tgt: list[int] = []
        nbr: list[int] = []
        starts: list[int] = []
        pos: dict[tuple[int, int], int] = {}
        k = 0
        for i in range(graph.n):
            starts.append(k)
            for j in sorted(graph.neighbors[i] + (i,)):
                pos[(i, j)] = k
                tgt.append(i)
                nbr.append(j)
                k += 1
        tperm = np.array([pos[(nbr[q], tgt[q])] for q in range(k)], dtype=np.int64)
        return GatInputs(
            n=graph.n,
            h0=h0,
            tgt=np.array(tgt, dtype=np.int64),
            nbr=np.array(nbr, dtype=np.int64),
            starts=np.array(starts, dtype=np.int64),
            tperm=tperm,
        )

    def _attend(self, wh, a, inputs: GatInputs, train: bool, rng, keep: float) -> AttnCache:
        f = wh.shape[1]
        u = wh @ a[:f]
        v = wh @ a[f:]
        pre = u[inputs.tgt] + v[inputs.nbr]
        e = leaky_relu(pre, LEAKY_SLOPE)
        mx = np.maximum.reduceat(e, inputs.starts)
        ex = np.exp(e - mx[inputs.tgt])
        denom = np.add.reduceat(ex, inputs.starts)
        alpha = ex / denom[inputs.tgt]
        if train and self.dropout > 0.0:
            amask = (rng.random(alpha.shape[0]) < keep).astype(np.float64)
            alpha_used = alpha * amask / keep
        else:
            amask = None
            alpha_used = alpha
        s = np.add.reduceat(alpha_used[:, None] * wh[inputs.nbr], inputs.starts, axis=0)
        return AttnCache(wh=wh, pre=pre, alpha=alpha, alpha_used=alpha_used, amask=amask, s=s)

    def _attend_backward(self, cache: AttnCache, a, ds, inputs: GatInputs, keep: float):
        """Gradients of one attention sublayer: returns (d_wh, d_a)."""
        tgt, nbr, starts, tperm = inputs.tgt, inputs.nbr, inputs.starts, inputs.tperm
        dalpha_used = (ds[tgt] * cache.wh[nbr]).sum(axis=1)
        edge_vals = cache.alpha_used[:, None] * ds[tgt]
        dwh = np.add.reduceat(edge_vals[tperm], starts, axis=0)
        if cache.amask is not None:
            dalpha = dalpha_used * cache.amask / keep
        else:
            dalpha = dalpha_used
        # Softmax Jacobian per neighborhood: de = alpha * (dalpha - <alpha, dalpha>).
        seg_dot = np.add.reduceat(cache.alpha * dalpha, starts)
        de = cache.alpha * (dalpha - seg_dot[tgt])
        dpre = de * leaky_relu_grad(cache.pre, LEAKY_SLOPE)
        du = np.add.reduceat(dpre, starts)
        dv = np.add.reduceat(dpre[tperm], starts)
        f = cache.wh.shape[1]
        da = np.concatenate([cache.wh.T @ du, cache.wh.T @ dv])
        dwh = dwh + du[:, None] * a[:f][None, :] + dv[:, None] * a[f:][None, :]
        return dwh, da

    def forward(self, params, inputs: GatInputs, train: bool = False, rng=None) -> tuple[float, GatActivations]:
        if train and self.dropout > 0.0 and rng is None:
            raise ValueError("train-mode forward needs an rng for dropout")
        keep = 1.0 - self.dropout
        drop = train and self.dropout > 0.0
        if drop:
            mask0 = (rng.random(inputs.h0.shape) < keep).astype(np.float64)
            h0d = inputs.h0 * mask0 / keep
        else:
            mask0 = None
            h0d = inputs.h0
        head_caches: list[AttnCache] = []
        head_outs: list[np.ndarray] = []
        for h in range(self.heads):
            wh = h0d @ params[f"w1h{h}"]
            cache = self._attend(wh, params[f"a1h{h}"], inputs, train, rng, keep)
            head_caches.append(cache)
            head_outs.append(relu(cache.s))
        h1c = np.concatenate(head_outs, axis=1)
        if drop:
            mask1 = (rng.random(h1c.shape) < keep).astype(np.float64)
            h1in = h1c * mask1 / keep
        else:
            mask1 = None
            h1in = h1c
        wh2 = h1in @ params["w2"]
        layer2 = self._attend(wh2, params["a2"], inputs, train, rng, keep)
        h2 = relu(layer2.s)
        z = mean_pool(h2)
        yhat = float(z @ params["w_lin"][:, 0] + params["b"])
        return yhat, GatActivations(
            inputs=inputs,
            train=train,
            h0d=h0d,
            mask0=mask0,
            heads=head_caches,
            h1c=h1c,
            mask1=mask1,
            h1in=h1in,
            layer2=layer2,
            h2=h2,
            z=z,
            yhat=yhat,
        )

    def backward(self, params, acts: GatActivations, dy: float) -> dict[str, np.ndarray]:
        inputs = acts.inputs
        keep = 1.0 - self.dropout
        n = inputs.n
        dz = dy * params["w_lin"][:, 0]
        dw_lin = dy * acts.z[:, None]
        db = np.array(dy)
        ds2 = relu_grad(acts.layer2.s) * (dz / n)[None, :]
        dwh2, da2 = self._attend_backward(acts.layer2, params["a2"], ds2, inputs, keep)
        dw2 = acts.h1in.T @ dwh2
        dh1in = dwh2 @ params["w2"].T
        if acts.mask1 is not None:
            dh1c = dh1in * acts.mask1 / keep
        else:
            dh1c = dh1in
        grads: dict[str, np.ndarray] = {"w2": dw2, "a2": da2, "w_lin": dw_lin, "b": db}
        for h in range(self.heads):
            cache = acts.heads[h]
            dh1_h = dh1c[:, h * self.f1 : (h + 1) * self.f1]
            ds_h = relu_grad(cache.s) * dh1_h
            dwh_h, da1_h = self._attend_backward(cache, params[f"a1h{h}"], ds_h, inputs, keep)
            grads[f"w1h{h}"] = acts.h0d.T @ dwh_h
            grads[f"a1h{h}"] = da1_h
        return grads
