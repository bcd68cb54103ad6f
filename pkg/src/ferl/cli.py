"""Command-line entry point.

Subcommands: ``curves`` (learning-curve CSV), ``heatmap`` (virtual-parameter
grid CSV), ``oracle-check`` (small-instance validation battery), ``sample``
(dump a spin pool for one clamped model).  Exit codes: 0 success, 1 config
error, 2 runtime failure.
"""

from __future__ import annotations

import argparse
import configparser
import dataclasses
import sys

import numpy as np

from . import experiments, gridworld, rl, samplers, topology as topo_mod
from .free_energy import (
    exact_binary_free_energy,
    exact_classical_free_energy,
    exact_quantum_free_energy,
    rbm_free_energy,
)
from .ising import ClampedModel, TfimParameters, replica_coupling, tfim_matrix


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(f"{message}\n{self.format_usage()}")


_AGENT_FLOAT_KEYS = ("learning_rate", "discount", "epsilon", "beta",
                     "gamma_field", "beta_initial", "gamma_initial")
_AGENT_INT_KEYS = ("replicas", "reads", "sweeps", "stack_pool_size",
                   "stack_count", "policy_reads")


def _read_config(path) -> configparser.ConfigParser:
    parser = configparser.ConfigParser()
    loaded = parser.read(path)
    if not loaded:
        raise _UsageError(f"config file not found: {path}")
    return parser


def _agent_from_section(section) -> rl.AgentConfig:
    kwargs = {}
    for key in _AGENT_FLOAT_KEYS:
        if key in section:
            kwargs[key] = section.getfloat(key)
    for key in _AGENT_INT_KEYS:
        if key in section:
            kwargs[key] = section.getint(key)
    if "exploration" in section:
        kwargs["exploration"] = section.get("exploration")
    try:
        return rl.AgentConfig(**kwargs)
    except ValueError as exc:
        raise _UsageError(f"bad agent configuration: {exc}") from exc


def _float_list(raw: str) -> tuple[float, ...]:
    return tuple(float(tok) for tok in raw.replace(",", " ").split())


def _cmd_curves(args) -> int:
    methods = tuple(experiments.METHODS)
    runs, samples = 100, 500
    agent = rl.AgentConfig()
    if args.config:
        cfg = _read_config(args.config)
        if cfg.has_section("curves"):
            section = cfg["curves"]
            if "methods" in section:
                methods = tuple(
                    tok for tok in section.get("methods").replace(",", " ").split()
                )
            runs = section.getint("runs", runs)
            samples = section.getint("samples", samples)
            agent = _agent_from_section(section)
    try:
        spec = experiments.CurvesSpec(
            methods=methods, runs=runs, samples=samples,
            master_seed=args.seed, agent=agent,
        )
    except ValueError as exc:
        raise _UsageError(str(exc)) from exc
    rows = experiments.run_learning_curves(spec, jobs=args.jobs)
    _write(args.out, experiments.curves_csv(rows))
    return 0


def _cmd_heatmap(args) -> int:
    betas = experiments.DEFAULT_BETAS
    gammas = experiments.DEFAULT_GAMMAS
    runs, samples = 10, 300
    method = "external-stacked"
    agent = rl.AgentConfig()
    if args.config:
        cfg = _read_config(args.config)
        if cfg.has_section("heatmap"):
            section = cfg["heatmap"]
            if "betas" in section:
                betas = _float_list(section.get("betas"))
            if "gammas" in section:
                gammas = _float_list(section.get("gammas"))
            runs = section.getint("runs", runs)
            samples = section.getint("samples", samples)
            method = section.get("method", method)
            agent = _agent_from_section(section)
    try:
        spec = experiments.HeatmapSpec(
            betas=betas, gammas=gammas, runs=runs, samples=samples,
            master_seed=args.seed, method=method, agent=agent,
        )
    except ValueError as exc:
        raise _UsageError(str(exc)) from exc
    rows = experiments.run_heatmap(spec, jobs=args.jobs)
    _write(args.out, experiments.heatmap_csv(rows))
    return 0


def _check(name: str, ok: bool, detail: str = "") -> bool:
    status = "ok" if ok else "FAIL"
    line = f"{status:4s}  {name}"
    if detail:
        line += f"  ({detail})"
    print(line)
    return ok


def _cmd_oracle_check(_args) -> int:
    rng = np.random.default_rng(7)
    all_ok = True

    params = TfimParameters(gamma=1.0, beta=1.0, replicas=1)
    got = replica_coupling(params)
    want = 0.5 * np.log(1.0 / np.tanh(1.0))
    all_ok &= _check("replica coupling closed form", abs(got - want) < 1e-12)

    model = ClampedModel(biases=rng.uniform(-1, 1, 3),
                         couplings={(0, 1): 0.4, (1, 2): -0.3})
    eig = np.sort(np.linalg.eigvalsh(tfim_matrix(model, 0.0)))
    from itertools import product
    from .ising import spin_energy
    classical = np.sort([
        spin_energy(model, np.array(c)) for c in product((-1, 1), repeat=3)
    ])
    all_ok &= _check("TFIM at zero field is diagonal with the classical spectrum",
                     np.allclose(eig, classical))

    free_model = ClampedModel(biases=rng.uniform(-1, 1, 6))
    all_ok &= _check(
        "RBM closed form vs enumeration",
        abs(rbm_free_energy(free_model, 2.0) - exact_binary_free_energy(free_model, 2.0))
        < 1e-12,
    )

    q0 = exact_quantum_free_energy(model, TfimParameters(gamma=1e-12, beta=1.5))
    c0 = exact_classical_free_energy(model, 1.5)
    all_ok &= _check("quantum oracle matches classical oracle at zero field",
                     abs(q0 - c0) < 1e-9)

    env = gridworld.GridWorld()
    q, _sets = gridworld.value_iteration(env, tolerance=1e-10)
    residual = 0.0
    for s in env.states:
        for a in range(gridworld.ACTION_COUNT):
            s2, r = gridworld.step(env, s, a)
            best = max(q[(s2, a2)] for a2 in range(gridworld.ACTION_COUNT))
            residual = max(residual, abs(q[(s, a)] - (r + env.discount * best)))
    all_ok &= _check("value iteration Bellman residual", residual < 1e-8,
                     f"residual {residual:.2e}")

    small = ClampedModel(biases=np.array([0.7, -0.4]), couplings={(0, 1): 0.5})
    pool = samplers.sa_sample(
        small, samplers.AnnealSchedule(sweeps=500, initial_value=0.1, final_value=2.0),
        4000, np.random.default_rng(11),
    )
    from itertools import product as _product
    from .ising import classical_energy, spins_to_binary
    states = [np.array(c) for c in _product((0, 1), repeat=2)]
    weights = np.array([np.exp(-2.0 * classical_energy(small, h)) for h in states])
    exact = weights / weights.sum()
    binary = spins_to_binary(pool.configs)
    counts = np.zeros(4)
    for row in binary:
        counts[int(row[0]) * 2 + int(row[1])] += 1
    tv = 0.5 * float(np.abs(counts / len(pool) - exact).sum())
    all_ok &= _check("SA total variation vs enumeration", tv < 0.05, f"TV {tv:.3f}")

    return 0 if all_ok else 2


def _cmd_sample(args) -> int:
    builders = {
        "rbm": topo_mod.build_rbm,
        "chimera": topo_mod.build_chimera_two_cell,
        "bipartite": topo_mod.build_dbm,
    }
    if args.topology not in builders:
        raise _UsageError(f"unknown topology {args.topology!r}")
    env = gridworld.GridWorld()
    if not 0 <= args.state < env.state_count:
        raise _UsageError(f"state index out of range 0..{env.state_count - 1}")
    if not 0 <= args.action < gridworld.ACTION_COUNT:
        raise _UsageError("action index out of range 0..4")
    rng = np.random.Generator(np.random.PCG64(args.seed))
    topo = topo_mod.init_weights(
        builders[args.topology](env.state_count, gridworld.ACTION_COUNT),
        rng, experiments.INIT_SCALE,
    )
    model = topo_mod.clamp(
        topo,
        gridworld.encode_state(env, env.states[args.state]),
        gridworld.encode_action(args.action),
    )
    if args.backend == "sa":
        schedule = samplers.AnnealSchedule(
            sweeps=args.sweeps, initial_value=0.1, final_value=args.beta
        )
        pool = samplers.sa_sample(model, schedule, args.reads, rng)
    elif args.backend == "sqa":
        params = TfimParameters(gamma=args.gamma, beta=args.beta, replicas=args.replicas)
        schedule = samplers.AnnealSchedule(
            sweeps=args.sweeps,
            initial_value=samplers.DEFAULT_GAMMA_INITIAL,
            final_value=args.gamma,
        )
        eff = samplers.sqa_sample(model, params, schedule, args.reads, rng)
        # write replica slices as individual annealer-style reads
        pool = samplers.SamplePool(
            configs=eff.configs.reshape(-1, model.hidden_count), source="SQA"
        )
    else:
        raise _UsageError(f"unknown backend {args.backend!r}")
    samplers.save_pool(pool, args.out)
    return 0


def _write(path, text: str) -> None:
    if path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def _build_parser() -> _Parser:
    parser = _Parser(prog="ferl", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    for name, fn in (("curves", _cmd_curves), ("heatmap", _cmd_heatmap)):
        p = sub.add_parser(name)
        p.add_argument("--config", default=None)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--out", default="-")
        p.add_argument("--jobs", type=int, default=1)
        p.set_defaults(fn=fn)

    p = sub.add_parser("oracle-check")
    p.set_defaults(fn=_cmd_oracle_check)

    p = sub.add_parser("sample")
    p.add_argument("--topology", default="chimera")
    p.add_argument("--state", type=int, default=0)
    p.add_argument("--action", type=int, default=0)
    p.add_argument("--backend", default="sa")
    p.add_argument("--reads", type=int, default=1000)
    p.add_argument("--sweeps", type=int, default=1000)
    p.add_argument("--beta", type=float, default=2.0)
    p.add_argument("--gamma", type=float, default=0.5)
    p.add_argument("--replicas", type=int, default=25)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=_cmd_sample)
    return parser


def cli_entry(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(exc, file=sys.stderr)
        return 1
    try:
        return args.fn(args)
    except _UsageError as exc:
        print(exc, file=sys.stderr)
        return 1
    except Exception as exc:  # noqa: BLE001 - runtime failures map to exit 2
        print(f"error: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(cli_entry())


if __name__ == "__main__":
    main()
