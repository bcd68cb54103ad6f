"""Tests for the feed-forward Q-network baseline."""

import numpy as np
import pytest

from ferl.dqn import DqnConfig, Mlp, forward, td0_gradient_step, train_dqn
from ferl.gridworld import GridWorld


def frozen_target(mlp, transition, discount):
    _, _, reward, s2_enc = transition
    return reward + discount * float(np.max(forward(mlp, s2_enc)))


def loss(mlp, transition, target):
    s_enc, action, _, _ = transition
    return (target - forward(mlp, s_enc)[action]) ** 2


def numerical_gradients(mlp, transition, discount, h=1e-6):
    # the update is a semi-gradient: the bootstrap target is a constant,
    # so the finite-difference loss must hold it at the unperturbed value
    target = frozen_target(mlp, transition, discount)
    grads_w, grads_b = [], []
    for layer in range(len(mlp.weights)):
        gw = np.zeros_like(mlp.weights[layer])
        for idx in np.ndindex(*gw.shape):
            plus = mlp.copy()
            plus.weights[layer][idx] += h
            minus = mlp.copy()
            minus.weights[layer][idx] -= h
            gw[idx] = (loss(plus, transition, target)
                       - loss(minus, transition, target)) / (2 * h)
        grads_w.append(gw)
        gb = np.zeros_like(mlp.biases[layer])
        for idx in np.ndindex(*gb.shape):
            plus = mlp.copy()
            plus.biases[layer][idx] += h
            minus = mlp.copy()
            minus.biases[layer][idx] -= h
            gb[idx] = (loss(plus, transition, target)
                       - loss(minus, transition, target)) / (2 * h)
        grads_b.append(gb)
    return grads_w, grads_b


class TestMlp:
    def test_create_shapes(self):
        mlp = Mlp.create((14, 8, 8, 5), np.random.default_rng(0))
        assert [w.shape for w in mlp.weights] == [(14, 8), (8, 8), (8, 5)]
        assert [b.shape for b in mlp.biases] == [(8,), (8,), (5,)]

    def test_copy_is_deep(self):
        mlp = Mlp.create((3, 4, 2), np.random.default_rng(1))
        clone = mlp.copy()
        clone.weights[0][0, 0] += 1.0
        assert mlp.weights[0][0, 0] != clone.weights[0][0, 0]

    def test_forward_linear_output(self):
        # zero weights everywhere: output equals the final bias vector
        mlp = Mlp.create((3, 2, 2), np.random.default_rng(2), scale=0.0)
        mlp.biases[-1][:] = [0.5, -1.0]
        np.testing.assert_allclose(forward(mlp, np.eye(3)[0]), [0.5, -1.0])


class TestGradientStep:
    def test_matches_numerical_gradient(self):
        # analytic backprop step vs central differences on the TD loss
        rng = np.random.default_rng(3)
        mlp = Mlp.create((4, 3, 3, 2), rng, scale=0.5)
        lr = 1.0
        for trial in range(5):
            s = np.eye(4)[rng.integers(0, 4)]
            s2 = np.eye(4)[rng.integers(0, 4)]
            transition = (s, int(rng.integers(0, 2)), float(rng.normal()), s2)
            stepped = td0_gradient_step(mlp, transition, lr, 0.8)
            gw, gb = numerical_gradients(mlp, transition, 0.8)
            for layer in range(len(mlp.weights)):
                analytic_w = (mlp.weights[layer] - stepped.weights[layer]) / lr
                analytic_b = (mlp.biases[layer] - stepped.biases[layer]) / lr
                np.testing.assert_allclose(analytic_w, gw[layer], atol=1e-6, rtol=1e-5)
                np.testing.assert_allclose(analytic_b, gb[layer], atol=1e-6, rtol=1e-5)

    def test_step_reduces_loss(self):
        mlp = Mlp.create((4, 3, 2), np.random.default_rng(4), scale=0.5)
        transition = (np.eye(4)[1], 0, 5.0, np.eye(4)[2])
        target = frozen_target(mlp, transition, 0.8)
        before = loss(mlp, transition, target)
        stepped = td0_gradient_step(mlp, transition, 0.001, 0.8)
        after = loss(stepped, transition, target)
        assert after < before

    def test_input_not_mutated(self):
        mlp = Mlp.create((4, 3, 2), np.random.default_rng(5), scale=0.5)
        saved = [w.copy() for w in mlp.weights]
        td0_gradient_step(mlp, (np.eye(4)[0], 1, 1.0, np.eye(4)[1]), 0.1, 0.8)
        for w, old in zip(mlp.weights, saved):
            np.testing.assert_array_equal(w, old)


class TestTrainDqn:
    def test_shapes_and_determinism(self):
        env = GridWorld()
        cfg = DqnConfig(training_samples=50)
        h1 = train_dqn(env, cfg, 7)
        h2 = train_dqn(env, cfg, 7)
        assert h1.policies.shape == (50, 14)
        np.testing.assert_array_equal(h1.policies, h2.policies)
        np.testing.assert_array_equal(h1.td_errors, h2.td_errors)

    def test_rejects_mismatched_layers(self):
        env = GridWorld()
        with pytest.raises(ValueError, match="input width"):
            train_dqn(env, DqnConfig(layer_sizes=(10, 8, 5)), 0)
        with pytest.raises(ValueError, match="output width"):
            train_dqn(env, DqnConfig(layer_sizes=(14, 8, 4)), 0)
