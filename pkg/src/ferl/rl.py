"""Free-energy reinforcement learning: Q ~ -F with TD(0) weight updates.

Four interchangeable backends supply the free energies:

* ``rbm``     -- closed-form clamped free energy (coupling-free models only),
* ``sa``      -- simulated-annealing pools, classical update rule,
* ``sqa``     -- simulated-quantum-annealing pools, quantum update rule,
* ``stacked`` -- replica stacking over an annealer-emulation read pool,
                 quantum update rule.

Classical backends use binary hidden expectations <h>, <hh'>; quantum
backends use +-1 spin observables <sigma^z>, <sigma^z sigma^z>.  The TD
error is r - gamma * F(s', a') + F(s, a) in both cases.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import gridworld
from .ising import TfimParameters
from .samplers import _sa_kernel, _sa_kernel_batch, _sqa_kernel, _sqa_kernel_batch
from .topology import NetworkTopology, clamp

__all__ = [
    "AgentConfig",
    "TrainingHistory",
    "BACKENDS",
    "q_value",
    "select_action",
    "td0_update_quantum",
    "td0_update_classical",
    "train",
]

BACKENDS = ("rbm", "sa", "sqa", "stacked")
CLASSICAL_BACKENDS = ("rbm", "sa")


@dataclass(frozen=True)
class AgentConfig:
    """Hyperparameters of one FERL agent."""

    backend: str = "rbm"
    learning_rate: float = 0.01
    discount: float = 0.8
    training_samples: int = 500
    exploration: str = "epsilon-greedy"  # or "greedy"
    epsilon: float = 0.3
    on_policy: bool = False              # a' greedy (default) or sampled
    reward_scale: float = 1.0            # multiplies rewards; argmax-invariant
    beta: float = 2.0
    gamma_field: float = 0.5
    replicas: int = 25
    reads: int = 20
    sweeps: int = 50
    beta_initial: float = 0.1
    gamma_initial: float = 8.0
    stack_pool_size: int = 3750
    stack_count: int = 150
    policy_reads: int | None = None      # reads for selection/snapshot Q

    def __post_init__(self):
        if self.backend not in BACKENDS:
            raise ValueError(f"unknown backend {self.backend!r}")
        if not 0 < self.discount < 1:
            raise ValueError("discount must lie in (0, 1)")
        if self.training_samples < 1:
            raise ValueError("training_samples must be >= 1")
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")
        if self.reward_scale <= 0:
            raise ValueError("reward_scale must be positive")
        if self.exploration not in ("epsilon-greedy", "greedy"):
            raise ValueError(f"unknown exploration {self.exploration!r}")

    @property
    def params(self) -> TfimParameters:
        return TfimParameters(
            gamma=self.gamma_field, beta=self.beta, replicas=self.replicas
        )


@dataclass
class TrainingHistory:
    """Per-sample greedy-policy snapshots and TD errors, plus final weights."""

    policies: np.ndarray      # (T_s, |S|) action indices
    td_errors: np.ndarray     # (T_s,)
    topology: NetworkTopology


def _entropy_sum(configs: np.ndarray) -> int | float:
    flat = configs.reshape(configs.shape[0], -1)
    # pack the +-1 spins into bytes so np.unique compares short rows
    packed = np.packbits(flat > 0, axis=1)
    _, counts = np.unique(packed, axis=0, return_counts=True)
    p = counts / flat.shape[0]
    return float(np.sum(p * np.log(p)))


class _Evaluator:
    """Backend-dispatching free-energy evaluation over live weight arrays.

    Operates directly on the topology's weight arrays so that TD updates are
    visible without re-clamping; estimates are computed inline for speed and
    are checked against the public estimators in the test suite.
    """

    def __init__(self, topology: NetworkTopology, config: AgentConfig, rng):
        if config.backend == "rbm" and topology.hidden_mask.any():
            raise ValueError("rbm backend requires a coupling-free topology")
        self.topology = topology
        self.config = config
        self.rng = rng
        pairs = np.array(
            list(zip(*np.nonzero(np.triu(topology.hidden_mask)))), dtype=np.int64
        ).reshape(-1, 2)
        self.pairs = pairs
        self.n = topology.hidden_count

    def bias(self, s_idx: int, a_idx: int) -> np.ndarray:
        return self.topology.state_weights[s_idx] + self.topology.action_weights[a_idx]

    def _seed(self) -> int:
        return int(self.rng.integers(0, 2**31 - 1))

    def _coupling(self) -> np.ndarray:
        return self.topology.hidden_weights

    # Each evaluate() call draws a fresh pool; observables and the free
    # energy at (s, a) always come from the same pool.

    def evaluate(self, s_idx: int, a_idx: int, reads: int | None = None):
        """Return (F, node_expectations, pair_expectations) at (s, a)."""
        cfg = self.config
        reads = reads or cfg.reads
        bias = self.bias(s_idx, a_idx)
        if cfg.backend == "rbm":
            # closed form, identical to rbm_free_energy / rbm_hidden_expectations
            f = -float(np.sum(np.logaddexp(0.0, cfg.beta * bias))) / cfg.beta
            h = 1.0 / (1.0 + np.exp(-cfg.beta * bias))
            return f, h, np.zeros(0)
        if cfg.backend == "sa":
            spins = _sa_kernel(
                bias, self._coupling(), cfg.beta_initial, cfg.beta,
                cfg.sweeps, reads, self._seed(),
            )
            return self._classical_estimate(bias, spins)
        if cfg.backend == "sqa":
            spins = _sqa_kernel(
                bias, self._coupling(), cfg.beta, cfg.gamma_initial,
                cfg.gamma_field, cfg.replicas, cfg.sweeps, reads, self._seed(),
            )
            return self._effective_estimate(bias, spins)
        # stacked: emulate annealer reads with SQA replica slices, then stack
        chains = max(1, -(-cfg.stack_pool_size // cfg.replicas))
        raw = _sqa_kernel(
            bias, self._coupling(), cfg.beta, cfg.gamma_initial,
            cfg.gamma_field, cfg.replicas, cfg.sweeps, chains, self._seed(),
        )
        pool = raw.reshape(-1, self.n)[: cfg.stack_pool_size]
        idx = self.rng.integers(0, pool.shape[0], size=(cfg.stack_count, cfg.replicas))
        return self._effective_estimate(bias, pool[idx])

    def _classical_estimate(self, bias, spins):
        cfg = self.config
        h = (spins.astype(np.float64) + 1.0) * 0.5
        energies = -h @ bias
        hh = np.zeros(len(self.pairs))
        if len(self.pairs):
            prod = h[:, self.pairs[:, 0]] * h[:, self.pairs[:, 1]]
            hh = prod.mean(axis=0)
            energies -= prod @ self.topology.hidden_weights[
                self.pairs[:, 0], self.pairs[:, 1]
            ]
        f = float(energies.mean()) + _entropy_sum(spins) / cfg.beta
        return f, h.mean(axis=0), hh

    def _effective_estimate(self, bias, spins):
        cfg = self.config
        r = cfg.replicas
        x = cfg.gamma_field * cfg.beta / r
        wplus = (np.log(np.cosh(x)) - np.log(np.sinh(x))) / (2.0 * cfg.beta)
        s = spins.astype(np.float64)
        energies = -(s @ bias).sum(axis=1) / r
        zz = np.zeros(len(self.pairs))
        if len(self.pairs):
            prod = s[:, :, self.pairs[:, 0]] * s[:, :, self.pairs[:, 1]]
            zz = prod.mean(axis=(0, 1))
            energies -= prod.sum(axis=1) @ self.topology.hidden_weights[
                self.pairs[:, 0], self.pairs[:, 1]
            ] / r
        chain = np.sum(s[:, :-1, :] * s[:, 1:, :], axis=(1, 2))
        chain += np.sum(s[:, 0, :] * s[:, -1, :], axis=1)
        energies -= wplus * chain
        f = float(energies.mean()) + _entropy_sum(spins) / cfg.beta
        return f, s.mean(axis=(0, 1)), zz

    def q(self, s_idx: int, a_idx: int, reads: int | None = None) -> float:
        return -self.evaluate(s_idx, a_idx, reads)[0]

    def _free_energies(self, bias_rows: np.ndarray, reads: int | None) -> np.ndarray:
        """Free energy per bias row, all rows sampled in one kernel call."""
        cfg = self.config
        reads = reads or cfg.reads
        if cfg.backend == "rbm":
            return -np.logaddexp(0.0, cfg.beta * bias_rows).sum(axis=1) / cfg.beta
        if cfg.backend == "sa":
            pools = _sa_kernel_batch(
                bias_rows, self._coupling(), cfg.beta_initial, cfg.beta,
                cfg.sweeps, reads, self._seed(),
            )
            return np.array([
                self._classical_estimate(bias_rows[p], pools[p])[0]
                for p in range(len(bias_rows))
            ])
        if cfg.backend == "sqa":
            pools = _sqa_kernel_batch(
                bias_rows, self._coupling(), cfg.beta, cfg.gamma_initial,
                cfg.gamma_field, cfg.replicas, cfg.sweeps, reads, self._seed(),
            )
            return np.array([
                self._effective_estimate(bias_rows[p], pools[p])[0]
                for p in range(len(bias_rows))
            ])
        chains = max(1, -(-cfg.stack_pool_size // cfg.replicas))
        pools = _sqa_kernel_batch(
            bias_rows, self._coupling(), cfg.beta, cfg.gamma_initial,
            cfg.gamma_field, cfg.replicas, cfg.sweeps, chains, self._seed(),
        )
        out = np.empty(len(bias_rows))
        for p in range(len(bias_rows)):
            pool = pools[p].reshape(-1, self.n)[: cfg.stack_pool_size]
            idx = self.rng.integers(
                0, pool.shape[0], size=(cfg.stack_count, cfg.replicas)
            )
            out[p] = self._effective_estimate(bias_rows[p], pool[idx])[0]
        return out

    def _action_biases(self, s_idx: int) -> np.ndarray:
        return (
            self.topology.state_weights[s_idx][None, :]
            + self.topology.action_weights
        )

    def greedy(self, s_idx: int, reads: int | None = None) -> tuple[int, float]:
        """Greedy action with uniform tie-breaking; returns (action, Q)."""
        qs = -self._free_energies(self._action_biases(s_idx), reads)
        best = np.flatnonzero(qs >= qs.max() - 1e-9)
        choice = int(best[self.rng.integers(0, len(best))])
        return choice, float(qs[choice])

    def greedy_all(self, reads: int | None = None) -> np.ndarray:
        """Greedy action per state, every (state, action) in one kernel call."""
        s_count = self.topology.state_count
        a_count = self.topology.action_count
        rows = (
            self.topology.state_weights[:, None, :]
            + self.topology.action_weights[None, :, :]
        ).reshape(s_count * a_count, self.n)
        qs = -self._free_energies(rows, reads).reshape(s_count, a_count)
        actions = np.empty(s_count, dtype=np.int8)
        for s_idx in range(s_count):
            best = np.flatnonzero(qs[s_idx] >= qs[s_idx].max() - 1e-9)
            actions[s_idx] = best[self.rng.integers(0, len(best))]
        return actions


def td0_update_quantum(td_error, state_encoding, action_encoding,
                       sigma_z, sigma_zz, pairs, learning_rate):
    """Weight deltas for the quantum rule: eps * td * v * <sigma^z> etc.

    Returns (state deltas, action deltas, list of (i, j, delta)).
    """
    s = np.asarray(state_encoding, dtype=np.float64)
    a = np.asarray(action_encoding, dtype=np.float64)
    dw_s = learning_rate * td_error * np.outer(s, sigma_z)
    dw_a = learning_rate * td_error * np.outer(a, sigma_z)
    dw_h = [
        (int(i), int(j), learning_rate * td_error * zz)
        for (i, j), zz in zip(pairs, sigma_zz)
    ]
    return dw_s, dw_a, dw_h


def td0_update_classical(td_error, state_encoding, action_encoding,
                         h_mean, hh_mean, pairs, learning_rate):
    """Weight deltas for the classical rule, with binary {0,1} expectations."""
    return td0_update_quantum(
        td_error, state_encoding, action_encoding, h_mean, hh_mean, pairs,
        learning_rate,
    )


def q_value(topology: NetworkTopology, state_encoding, action_encoding,
            config: AgentConfig, rng: np.random.Generator) -> float:
    """Negative free energy of the clamped model under the configured backend."""
    ev = _Evaluator(topology, config, rng)
    s_idx = int(np.argmax(state_encoding))
    a_idx = int(np.argmax(action_encoding))
    # validate encodings via the public clamp contract
    clamp(topology, state_encoding, action_encoding)
    return ev.q(s_idx, a_idx)


def select_action(topology: NetworkTopology, state_encoding,
                  config: AgentConfig, rng: np.random.Generator) -> int:
    """Epsilon-greedy (or greedy) action choice over backend Q estimates."""
    ev = _Evaluator(topology, config, rng)
    s_idx = int(np.argmax(state_encoding))
    if config.exploration == "epsilon-greedy" and rng.random() < config.epsilon:
        return int(rng.integers(0, topology.action_count))
    return ev.greedy(s_idx, config.policy_reads)[0]


def train(env: gridworld.GridWorld, topology: NetworkTopology,
          config: AgentConfig, seed) -> TrainingHistory:
    """Run TD(0) FERL and record a greedy-policy snapshot per sample.

    Each iteration draws a state uniformly from the non-wall cells, picks an
    action by the exploration rule, steps the environment, forms the TD
    target with the greedy (or, with ``on_policy``, sampled) next action, and
    applies the backend's update rule.  Deterministic given the seed.

    Greedy choices that feed learning (behavior policy and the TD target's
    next action) use the estimator's full ``reads`` budget; the per-sample
    policy snapshots use the cheaper ``policy_reads``.
    """
    states = env.states
    if topology.state_count != len(states):
        raise ValueError(
            f"topology has {topology.state_count} state nodes, "
            f"environment has {len(states)} states"
        )
    if topology.action_count != gridworld.ACTION_COUNT:
        raise ValueError("topology action nodes must match the action count")

    rng = np.random.Generator(np.random.PCG64(seed))
    topo = topology.copy()
    ev = _Evaluator(topo, config, rng)
    classical = config.backend in CLASSICAL_BACKENDS
    t_s = config.training_samples
    policies = np.zeros((t_s, len(states)), dtype=np.int8)
    td_errors = np.zeros(t_s)
    state_index = {s: i for i, s in enumerate(states)}

    for i in range(t_s):
        s_idx = int(rng.integers(0, len(states)))
        if config.exploration == "epsilon-greedy" and rng.random() < config.epsilon:
            a = int(rng.integers(0, topo.action_count))
        else:
            a = ev.greedy(s_idx, config.reads)[0]
        s2, reward = gridworld.step(env, states[s_idx], a)
        s2_idx = state_index[s2]

        if config.on_policy:
            if (config.exploration == "epsilon-greedy"
                    and rng.random() < config.epsilon):
                a2 = int(rng.integers(0, topo.action_count))
            else:
                a2 = ev.greedy(s2_idx, config.reads)[0]
        else:
            a2 = ev.greedy(s2_idx, config.reads)[0]

        f1, node_exp, pair_exp = ev.evaluate(s_idx, a)
        f2 = ev.evaluate(s2_idx, a2)[0]
        td = config.reward_scale * reward - config.discount * f2 + f1
        td_errors[i] = td

        scale = config.learning_rate * td
        topo.state_weights[s_idx] += scale * node_exp * topo.state_mask[s_idx]
        topo.action_weights[a] += scale * node_exp * topo.action_mask[a]
        if len(ev.pairs):
            di, dj = ev.pairs[:, 0], ev.pairs[:, 1]
            topo.hidden_weights[di, dj] += scale * pair_exp
            topo.hidden_weights[dj, di] = topo.hidden_weights[di, dj]

        policies[i] = ev.greedy_all(config.policy_reads)

    return TrainingHistory(policies=policies, td_errors=td_errors, topology=topo)
