import numpy as np
import pytest

from netloc.graphs import make_cycle, make_er, make_star, make_wheel
from netloc.kernels import (
    LOG_MSE,
    MSE,
    LossKind,
    glorot_init,
    leaky_relu,
    leaky_relu_grad,
    loss,
    loss_grad,
    matmul,
    mean_pool,
    normalized_adjacency,
    relu,
    relu_grad,
    softmax,
)

from oracles import fd_gradient, principal_eigenpair


class TestMatmul:
    def test_integer_chain_exact(self):
        # Hand-checkable integer chain; float64 keeps small integers exact,
        # so this must match bit for bit.
        a = np.array([[1.0, 2.0], [3.0, 4.0]])
        h = np.array([[1.0, 0.0, 2.0], [-1.0, 3.0, 1.0]])
        w = np.array([[1.0, 2.0], [0.0, 1.0], [-1.0, 0.0]])
        e = matmul(a, h)
        assert e.tolist() == [[-1.0, 6.0, 4.0], [-1.0, 12.0, 10.0]]
        d = matmul(e, w)
        assert d.tolist() == [[-5.0, 4.0], [-11.0, 10.0]]

    def test_identity(self):
        x = np.arange(6.0).reshape(2, 3)
        np.testing.assert_array_equal(matmul(np.eye(2), x), x)

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError, match="inner dimensions"):
            matmul(np.ones((2, 3)), np.ones((2, 3)))

    def test_rejects_1d(self):
        with pytest.raises(ValueError, match="2-D"):
            matmul(np.ones(3), np.ones((3, 1)))

    def test_associativity_to_tolerance(self):
        rng = np.random.default_rng(0)
        for _ in range(10):
            a, b, c = (rng.normal(size=(7, 7)) for _ in range(3))
            left = matmul(matmul(a, b), c)
            right = matmul(a, matmul(b, c))
            np.testing.assert_allclose(left, right, rtol=1e-9, atol=1e-9)


class TestNormalizedAdjacency:
    def test_single_edge(self):
        from netloc.graphs import Graph

        ahat = normalized_adjacency(Graph(2, ((0, 1),)))
        np.testing.assert_allclose(ahat, np.full((2, 2), 0.5))

    def test_symmetric(self):
        ahat = normalized_adjacency(make_er(30, 0.2, seed=1))
        np.testing.assert_array_equal(ahat, ahat.T)

    def test_leading_eigenvalue_is_one(self):
        for g in (make_cycle(12), make_star(12), make_wheel(12)):
            lam, _ = principal_eigenpair(normalized_adjacency(g))
            assert abs(lam - 1.0) < 1e-10

    def test_diagonal_positive(self):
        ahat = normalized_adjacency(make_star(6))
        assert np.all(np.diag(ahat) > 0)


class TestActivations:
    def test_relu_values(self):
        np.testing.assert_array_equal(relu(np.array([-2.0, 0.0, 3.0])), [0.0, 0.0, 3.0])

    def test_relu_grad_zero_at_kink(self):
        np.testing.assert_array_equal(relu_grad(np.array([-2.0, 0.0, 3.0])), [0.0, 0.0, 1.0])

    def test_leaky_relu_slope(self):
        np.testing.assert_allclose(leaky_relu(np.array([-1.0, 2.0])), [-0.2, 2.0])
        np.testing.assert_allclose(leaky_relu_grad(np.array([-1.0, 2.0])), [0.2, 1.0])

    def test_softmax_uniform(self):
        np.testing.assert_allclose(softmax(np.zeros(4)), np.full(4, 0.25))

    def test_softmax_shift_invariant(self):
        x = np.array([0.3, -1.2, 2.0, 0.0])
        np.testing.assert_allclose(softmax(x), softmax(x + 100.0), atol=1e-12)

    def test_softmax_sums_to_one(self):
        rng = np.random.default_rng(4)
        for _ in range(10):
            s = softmax(rng.normal(size=9) * 10)
            assert abs(s.sum() - 1.0) < 1e-12
            assert np.all(s > 0)

    def test_mean_pool(self):
        np.testing.assert_array_equal(mean_pool(np.array([[1.0, 2.0], [3.0, 4.0]])), [2.0, 3.0])


class TestGlorot:
    def test_bounds_and_determinism(self):
        w = glorot_init(7, 64, rng=0)
        limit = np.sqrt(6 / (7 + 64))
        assert w.shape == (7, 64)
        assert np.all(np.abs(w) <= limit)
        np.testing.assert_array_equal(w, glorot_init(7, 64, rng=0))

    def test_mean_near_zero(self):
        w = glorot_init(200, 200, rng=1)
        limit = np.sqrt(6 / 400)
        assert abs(w.mean()) < limit / 10

    def test_fan_validation(self):
        with pytest.raises(ValueError):
            glorot_init(0, 4, rng=0)


class TestLoss:
    def test_mse_value(self):
        assert loss(np.array([1.0, 2.0]), np.array([0.0, 0.0])) == 2.5

    def test_mse_zero_at_fit(self):
        assert loss(np.array([0.3, 0.4]), np.array([0.3, 0.4])) == 0.0

    def test_logmse_decade_off(self):
        val = loss(np.array([0.1]), np.array([0.01]), LOG_MSE)
        assert abs(val - np.log(10.0) ** 2) < 1e-12

    def test_logmse_floor_applies(self):
        # Prediction below the floor behaves as if it sat at the floor.
        v1 = loss(np.array([0.0]), np.array([0.01]), LOG_MSE)
        v2 = loss(np.array([1e-12]), np.array([0.01]), LOG_MSE)
        assert v1 == v2

    def test_mse_grad_coefficient(self):
        g = loss_grad(np.array([1.0, 2.0, 3.0]), np.array([0.0, 0.0, 0.0]))
        np.testing.assert_allclose(g, [2 / 3, 4 / 3, 2.0])

    def test_grads_match_finite_differences(self):
        rng = np.random.default_rng(7)
        target = rng.uniform(0.01, 0.5, size=6)
        pred = rng.uniform(0.01, 0.5, size=6)
        for kind in (MSE, LOG_MSE):
            ana = loss_grad(pred, target, kind)
            num = fd_gradient(lambda p: loss(p, target, kind), pred)
            np.testing.assert_allclose(ana, num, rtol=1e-6, atol=1e-9)

    def test_logmse_grad_zero_below_floor(self):
        g = loss_grad(np.array([-0.5, 0.1]), np.array([0.1, 0.1]), LOG_MSE)
        assert g[0] == 0.0

    def test_length_mismatch(self):
        with pytest.raises(ValueError, match="mismatch"):
            loss(np.ones(3), np.ones(2))

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            loss(np.array([]), np.array([]))

    def test_bad_kind_rejected(self):
        with pytest.raises(ValueError, match="unknown loss"):
            LossKind("huber")
