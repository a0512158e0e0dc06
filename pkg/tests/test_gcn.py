import numpy as np
import pytest

from netloc.gcn import GCN
from netloc.graphs import Graph, make_er, make_star
from netloc.kernels import MSE, loss
from netloc.optim import GradientDescent

from oracles import fd_gradient


def connected_er(n, p, seed):
    from netloc.graphs import is_connected

    for s in range(seed, seed + 50):
        g = make_er(n, p, seed=s)
        if is_connected(g):
            return g
    raise AssertionError("no connected sample found")


def zero_params(model):
    return {name: np.zeros_like(p) for name, p in model.init_params(0).items()}


class TestForward:
    def test_zero_weights_output_is_bias(self):
        model = GCN(d=7, k0=4, k1=4, k2=4)
        params = zero_params(model)
        params["b"] = np.array(0.7)
        g = make_star(6)
        inputs = model.prepare(g, np.zeros((6, 7)))
        yhat, _ = model.forward(params, inputs)
        assert yhat == 0.7

    def test_first_layer_matches_integer_chain(self):
        # Drive layer 1 with hand-checkable integers: the propagation input is
        # fed in directly as a 2x2 "adjacency", so q1 = (A @ H0) @ W0 must come
        # out bit-for-bit.
        model = GCN(d=3, k0=2, k1=2, k2=2)
        params = zero_params(model)
        params["w0"] = np.array([[1.0, 2.0], [0.0, 1.0], [-1.0, 0.0]])
        a = np.array([[1.0, 2.0], [3.0, 4.0]])
        h0 = np.array([[1.0, 0.0, 2.0], [-1.0, 3.0, 1.0]])
        _, acts = model.forward(params, (a, h0))
        assert acts.p1.tolist() == [[-1.0, 6.0, 4.0], [-1.0, 12.0, 10.0]]
        assert acts.q1.tolist() == [[-5.0, 4.0], [-11.0, 10.0]]

    def test_readout_is_mean_of_last_layer(self):
        model = GCN(d=7, k0=3, k1=3, k2=2)
        params = model.init_params(3)
        g = connected_er(8, 0.4, seed=1)
        inputs = model.prepare(g, np.random.default_rng(0).uniform(size=(8, 7)))
        yhat, acts = model.forward(params, inputs)
        np.testing.assert_allclose(acts.z, acts.h3.mean(axis=0))
        assert yhat == pytest.approx(float(acts.z @ params["w_lin"][:, 0] + params["b"]))

    def test_prepare_validates_feature_shape(self):
        model = GCN(d=7)
        with pytest.raises(ValueError, match="features"):
            model.prepare(make_star(5), np.zeros((5, 6)))

    def test_init_is_deterministic(self):
        model = GCN(d=7, k0=8, k1=8, k2=8)
        p1 = model.init_params(42)
        p2 = model.init_params(42)
        for name in model.param_names:
            np.testing.assert_array_equal(p1[name], p2[name])

    def test_width_validation(self):
        with pytest.raises(ValueError, match="widths"):
            GCN(d=0)


class TestBatchGradients:
    def build_batch(self, model, n_graphs=3, seed=0):
        rng = np.random.default_rng(seed)
        inputs, targets = [], []
        for k in range(n_graphs):
            g = connected_er(6, 0.5, seed=100 * seed + k)
            inputs.append(model.prepare(g, rng.uniform(size=(6, model.d))))
            targets.append(rng.uniform(0.05, 0.5))
        return inputs, np.array(targets)

    def test_head_gradient_accumulates_per_graph_terms(self):
        # For MSE over 3 graphs the w_lin gradient must be the literal sum of
        # (2/3)(yhat_k - y_k) z_k, and b's the sum of (2/3)(yhat_k - y_k).
        model = GCN(d=7, k0=5, k1=4, k2=3)
        params = model.init_params(7)
        inputs, targets = self.build_batch(model, n_graphs=3, seed=2)
        _, grads = model.batch_step(params, inputs, targets, MSE)

        dw_lin = np.zeros_like(params["w_lin"])
        db = 0.0
        for inp, y in zip(inputs, targets):
            yhat, acts = model.forward(params, inp)
            coeff = (2.0 / 3.0) * (yhat - y)
            dw_lin += coeff * acts.z[:, None]
            db += coeff
        np.testing.assert_allclose(grads["w_lin"], dw_lin, atol=1e-14)
        np.testing.assert_allclose(grads["b"], db, atol=1e-14)

    def test_gradients_match_finite_differences(self):
        model = GCN(d=7, k0=5, k1=4, k2=3)
        params = model.init_params(11)
        inputs, targets = self.build_batch(model, n_graphs=2, seed=5)
        _, grads = model.batch_step(params, inputs, targets, MSE)

        for name in model.param_names:
            def f(flat, name=name):
                trial = dict(params)
                trial[name] = flat.reshape(params[name].shape)
                preds = model.predict(trial, inputs)
                return loss(preds, targets, MSE)

            num = fd_gradient(f, params[name].ravel()).reshape(params[name].shape)
            scale = np.maximum(1e-6, np.abs(grads[name]) + np.abs(num))
            worst = float((np.abs(grads[name] - num) / scale).max())
            assert worst < 1e-4, f"{name}: max relative error {worst}"

    def test_batch_size_mismatch_rejected(self):
        model = GCN(d=7, k0=3, k1=3, k2=3)
        params = model.init_params(0)
        inputs, _ = self.build_batch(model, n_graphs=2, seed=1)
        with pytest.raises(ValueError, match="batch size"):
            model.batch_step(params, inputs, np.array([0.1]))


class TestBehaviour:
    def test_permutation_invariance(self):
        model = GCN(d=7, k0=6, k1=6, k2=6)
        params = model.init_params(9)
        g = connected_er(10, 0.3, seed=4)
        feats = np.random.default_rng(1).uniform(size=(10, 7))
        yhat, _ = model.forward(params, model.prepare(g, feats))

        perm = np.random.default_rng(2).permutation(10)
        remapped = Graph(
            g.n,
            tuple(tuple(sorted((int(perm[i]), int(perm[j])))) for i, j in g.edges),
        )
        feats_p = np.empty_like(feats)
        feats_p[perm] = feats
        yhat_p, _ = model.forward(params, model.prepare(remapped, feats_p))
        assert abs(yhat - yhat_p) < 1e-10

    def test_gradient_descent_reduces_loss(self):
        model = GCN(d=7, k0=8, k1=8, k2=8)
        params = model.init_params(13)
        rng = np.random.default_rng(3)
        inputs, targets = [], []
        for k in range(4):
            g = connected_er(8, 0.4, seed=200 + k)
            inputs.append(model.prepare(g, rng.uniform(size=(8, 7))))
            targets.append(rng.uniform(0.1, 0.4))
        targets = np.array(targets)

        opt = GradientDescent(lr=0.05)
        first, _ = model.batch_step(params, inputs, targets, MSE)
        for _ in range(60):
            _, grads = model.batch_step(params, inputs, targets, MSE)
            opt.step(params, grads)
        last, _ = model.batch_step(params, inputs, targets, MSE)
        assert last < first * 0.5

    def test_checkpoint_round_trip(self):
        from netloc.models import load_checkpoint, save_checkpoint

        model = GCN(d=7, k0=4, k1=5, k2=6)
        params = model.init_params(17)
        import tempfile
        from pathlib import Path

        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / "ck.json"
            save_checkpoint(path, model, params, {"note": "test"})
            loaded_model, loaded, config = load_checkpoint(path)
        assert isinstance(loaded_model, GCN)
        assert loaded_model.widths() == model.widths()
        assert config == {"note": "test"}
        for name in model.param_names:
            np.testing.assert_array_equal(loaded[name], params[name])
