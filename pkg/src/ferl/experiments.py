"""Seeded experiment harness: learning curves and the virtual-parameter grid.

Every run gets its seed from a splittable scheme keyed on the master seed
plus stable method/run (or cell/run) indices, so adding methods or runs
never perturbs existing results.  Run-level parallelism collects results in
a fixed order, making output independent of the worker count.
"""

from __future__ import annotations

import dataclasses
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import dqn, gridworld, rl, topology as topo_mod

__all__ = [
    "METHODS",
    "CurvesSpec",
    "HeatmapSpec",
    "run_learning_curves",
    "run_heatmap",
    "run_seed",
    "cell_seed",
]

# method -> (backend, topology builder); DQN is special-cased
_TOPOLOGY_BUILDERS = {
    "chimera": topo_mod.build_chimera_two_cell,
    "bipartite": topo_mod.build_dbm,
    "rbm": topo_mod.build_rbm,
}

METHODS = {
    "rbm": ("rbm", "rbm"),
    "sa-bipartite": ("sa", "bipartite"),
    "sa-chimera": ("sa", "chimera"),
    "sqa-bipartite": ("sqa", "bipartite"),
    "sqa-chimera": ("sqa", "chimera"),
    "external-stacked": ("stacked", "chimera"),
    "external-classical": ("sa", "chimera"),
    "dqn": (None, None),
}
_METHOD_INDEX = {name: i for i, name in enumerate(METHODS)}

DEFAULT_BETAS = (0.5, 1.0, 2.0, 4.0)
DEFAULT_GAMMAS = (0.0, 0.1, 0.25, 0.5, 1.0, 2.0)

INIT_SCALE = 0.1


@dataclasses.dataclass(frozen=True)
class CurvesSpec:
    methods: tuple[str, ...]
    runs: int = 100
    samples: int = 500
    master_seed: int = 0
    agent: rl.AgentConfig = dataclasses.field(default_factory=rl.AgentConfig)
    env: gridworld.GridWorld = dataclasses.field(default_factory=gridworld.GridWorld)

    def __post_init__(self):
        if not self.methods:
            raise ValueError("no methods configured")
        for m in self.methods:
            if m not in METHODS:
                raise ValueError(f"unknown method {m!r}")
        if self.runs < 1 or self.samples < 1:
            raise ValueError("runs and samples must be >= 1")


@dataclasses.dataclass(frozen=True)
class HeatmapSpec:
    betas: tuple[float, ...] = DEFAULT_BETAS
    gammas: tuple[float, ...] = DEFAULT_GAMMAS
    runs: int = 10
    samples: int = 300
    master_seed: int = 0
    method: str = "external-stacked"
    agent: rl.AgentConfig = dataclasses.field(default_factory=rl.AgentConfig)
    env: gridworld.GridWorld = dataclasses.field(default_factory=gridworld.GridWorld)

    def __post_init__(self):
        if not self.betas or not self.gammas:
            raise ValueError("beta and gamma grids must be nonempty")
        if any(b <= 0 for b in self.betas):
            raise ValueError("beta grid values must be positive")
        if any(g < 0 for g in self.gammas):
            raise ValueError("gamma grid values must be non-negative")
        if self.runs < 1 or self.samples < 1:
            raise ValueError("runs and samples must be >= 1")
        if self.method == "dqn" or self.method not in METHODS:
            raise ValueError(f"heatmap cannot use method {self.method!r}")


def run_seed(master_seed: int, method: str, run: int) -> np.random.SeedSequence:
    return np.random.SeedSequence([master_seed, _METHOD_INDEX[method], run])


def cell_seed(master_seed: int, beta: float, gamma: float, run: int) -> np.random.SeedSequence:
    return np.random.SeedSequence(
        [master_seed, int(round(beta * 10**6)), int(round(gamma * 10**6)), run]
    )


def _agent_for(method: str, agent: rl.AgentConfig, samples: int) -> rl.AgentConfig:
    backend, _ = METHODS[method]
    return dataclasses.replace(agent, backend=backend, training_samples=samples)


def _run_one(env, method, agent, samples, seed_seq) -> np.ndarray:
    """Train one run of one method; returns the (T_s, |S|) policy snapshots."""
    seed_init, seed_train = seed_seq.spawn(2)
    if method == "dqn":
        config = dqn.DqnConfig(
            layer_sizes=(env.state_count, 8, 8, gridworld.ACTION_COUNT),
            learning_rate=agent.learning_rate,
            discount=agent.discount,
            training_samples=samples,
            exploration=agent.exploration,
            epsilon=agent.epsilon,
            init_scale=INIT_SCALE,
        )
        return dqn.train_dqn(env, config, seed_train).policies
    backend, topo_name = METHODS[method]
    topo = _TOPOLOGY_BUILDERS[topo_name](env.state_count, gridworld.ACTION_COUNT)
    rng = np.random.Generator(np.random.PCG64(seed_init))
    topo = topo_mod.init_weights(topo, rng, INIT_SCALE)
    config = _agent_for(method, agent, samples)
    return rl.train(env, topo, config, seed_train).policies


def _curves_task(args):
    env, method, agent, samples, master_seed, run = args
    return _run_one(env, method, agent, samples, run_seed(master_seed, method, run))


def _heatmap_task(args):
    env, method, agent, samples, master_seed, beta, gamma, run = args
    if gamma == 0.0:
        # classical row: reads are treated as plain Boltzmann samples
        cell_agent = dataclasses.replace(agent, beta=beta, backend="sa")
        cell_method = "sa-chimera" if METHODS[method][1] == "chimera" else "sa-bipartite"
    else:
        cell_agent = dataclasses.replace(agent, beta=beta, gamma_field=gamma)
        cell_method = method
    cell_agent = dataclasses.replace(cell_agent, backend=METHODS[cell_method][0])
    return _run_one(
        env, cell_method, cell_agent, samples,
        cell_seed(master_seed, beta, gamma, run),
    )


def _map_tasks(task_fn, tasks, jobs: int):
    if jobs <= 1:
        return [task_fn(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(task_fn, tasks, chunksize=1))


def run_learning_curves(spec: CurvesSpec, jobs: int = 1) -> list[tuple]:
    """Rows (method, sample_index, mean_fidelity, stderr), 1-based samples."""
    _, optimal_sets = gridworld.value_iteration(spec.env)
    rows = []
    for method in spec.methods:
        tasks = [
            (spec.env, method, spec.agent, spec.samples, spec.master_seed, run)
            for run in range(spec.runs)
        ]
        policies = _map_tasks(_curves_task, tasks, jobs)
        per_run = np.stack([
            gridworld.fidelity([p], optimal_sets, states=spec.env.states)
            for p in policies
        ])  # (runs, samples)
        mean = per_run.mean(axis=0)
        if spec.runs > 1:
            stderr = per_run.std(axis=0, ddof=1) / np.sqrt(spec.runs)
        else:
            stderr = np.zeros(spec.samples)
        for i in range(spec.samples):
            rows.append((method, i + 1, float(mean[i]), float(stderr[i])))
    return rows


def run_heatmap(spec: HeatmapSpec, jobs: int = 1) -> list[tuple]:
    """Rows (beta, gamma, avg_fidelity), fidelity averaged over runs and samples."""
    _, optimal_sets = gridworld.value_iteration(spec.env)
    rows = []
    for beta in spec.betas:
        for gamma in spec.gammas:
            tasks = [
                (spec.env, spec.method, spec.agent, spec.samples,
                 spec.master_seed, beta, gamma, run)
                for run in range(spec.runs)
            ]
            policies = _map_tasks(_heatmap_task, tasks, jobs)
            per_run = np.stack([
                gridworld.fidelity([p], optimal_sets, states=spec.env.states)
                for p in policies
            ])
            rows.append((float(beta), float(gamma), float(per_run.mean())))
    return rows


def curves_csv(rows) -> str:
    lines = ["method,sample,mean_fidelity,stderr"]
    for method, sample, mean, stderr in rows:
        lines.append(f"{method},{sample},{mean:.6f},{stderr:.6f}")
    return "\n".join(lines) + "\n"


def heatmap_csv(rows) -> str:
    lines = ["beta,gamma,avg_fidelity"]
    for beta, gamma, avg in rows:
        lines.append(f"{beta:g},{gamma:g},{avg:.6f}")
    return "\n".join(lines) + "\n"
