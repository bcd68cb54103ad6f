"""Feed-forward Q-network baseline trained with TD(0) gradient steps.

Architecture: one-hot state input, two sigmoid hidden layers, linear output
of one Q-value per action.  Plain SGD on the squared TD error with the
bootstrap target held constant.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import gridworld

__all__ = ["Mlp", "DqnConfig", "forward", "td0_gradient_step", "train_dqn"]


@dataclass
class Mlp:
    """Weight matrices and bias vectors; sigmoid hidden, identity output."""

    weights: list[np.ndarray]
    biases: list[np.ndarray]

    @classmethod
    def create(cls, layer_sizes, rng: np.random.Generator, scale: float = 0.1):
        weights, biases = [], []
        for fan_in, fan_out in zip(layer_sizes[:-1], layer_sizes[1:]):
            weights.append(rng.uniform(-scale, scale, (fan_in, fan_out)))
            biases.append(rng.uniform(-scale, scale, fan_out))
        return cls(weights=weights, biases=biases)

    def copy(self) -> "Mlp":
        return Mlp([w.copy() for w in self.weights], [b.copy() for b in self.biases])


@dataclass(frozen=True)
class DqnConfig:
    layer_sizes: tuple = (14, 8, 8, 5)
    learning_rate: float = 0.01
    discount: float = 0.8
    training_samples: int = 500
    exploration: str = "epsilon-greedy"
    epsilon: float = 0.3
    init_scale: float = 0.1


def _sigmoid(x):
    return 1.0 / (1.0 + np.exp(-x))


def _forward_trace(mlp: Mlp, x):
    """Activations per layer, for backpropagation."""
    activations = [np.asarray(x, dtype=np.float64)]
    last = len(mlp.weights) - 1
    for layer, (w, b) in enumerate(zip(mlp.weights, mlp.biases)):
        z = activations[-1] @ w + b
        activations.append(z if layer == last else _sigmoid(z))
    return activations


def forward(mlp: Mlp, state_encoding) -> np.ndarray:
    """Q-values for all actions given a state encoding."""
    return _forward_trace(mlp, state_encoding)[-1]


def td0_gradient_step(mlp: Mlp, transition, learning_rate: float,
                      discount: float) -> Mlp:
    """One SGD step on the squared TD error for a (s, a, r, s') transition.

    ``transition`` is (state_encoding, action, reward, next_state_encoding).
    The target r + discount * max_a' Q(s', a') is treated as a constant.
    """
    s_enc, action, reward, s2_enc = transition
    target = reward + discount * float(np.max(forward(mlp, s2_enc)))
    activations = _forward_trace(mlp, s_enc)
    q_sa = activations[-1][action]

    # d/dQ of (target - Q)^2 with target frozen
    delta_out = np.zeros_like(activations[-1])
    delta_out[action] = 2.0 * (q_sa - target)

    out = mlp.copy()
    delta = delta_out
    for layer in reversed(range(len(mlp.weights))):
        grad_w = np.outer(activations[layer], delta)
        grad_b = delta
        if layer > 0:
            upstream = delta @ mlp.weights[layer].T
            act = activations[layer]
            delta = upstream * act * (1.0 - act)  # sigmoid derivative
        out.weights[layer] -= learning_rate * grad_w
        out.biases[layer] -= learning_rate * grad_b
    return out


def train_dqn(env: gridworld.GridWorld, config: DqnConfig, seed):
    """Same sampling and snapshot regime as the FERL trainer."""
    from .rl import TrainingHistory  # shared history container

    states = env.states
    if config.layer_sizes[0] != len(states):
        raise ValueError("input width must match the state count")
    if config.layer_sizes[-1] != gridworld.ACTION_COUNT:
        raise ValueError("output width must match the action count")
    rng = np.random.Generator(np.random.PCG64(seed))
    mlp = Mlp.create(config.layer_sizes, rng, config.init_scale)
    t_s = config.training_samples
    policies = np.zeros((t_s, len(states)), dtype=np.int8)
    td_errors = np.zeros(t_s)
    encodings = np.eye(len(states))

    def greedy(idx: int) -> int:
        qs = forward(mlp, encodings[idx])
        best = np.flatnonzero(qs >= qs.max() - 1e-9)
        return int(best[rng.integers(0, len(best))])

    state_index = {s: i for i, s in enumerate(states)}
    for i in range(t_s):
        s_idx = int(rng.integers(0, len(states)))
        if config.exploration == "epsilon-greedy" and rng.random() < config.epsilon:
            a = int(rng.integers(0, gridworld.ACTION_COUNT))
        else:
            a = greedy(s_idx)
        s2, reward = gridworld.step(env, states[s_idx], a)
        s2_idx = state_index[s2]
        q_now = forward(mlp, encodings[s_idx])[a]
        target = reward + config.discount * float(
            np.max(forward(mlp, encodings[s2_idx]))
        )
        td_errors[i] = target - q_now
        mlp = td0_gradient_step(
            mlp,
            (encodings[s_idx], a, reward, encodings[s2_idx]),
            config.learning_rate,
            config.discount,
        )
        for col in range(len(states)):
            policies[i, col] = greedy(col)

    return TrainingHistory(policies=policies, td_errors=td_errors, topology=mlp)
