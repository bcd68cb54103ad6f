"""Spin-configuration pools from annealing backends.

Three sources produce pools: classical simulated annealing (SA), simulated
quantum annealing (SQA, path-integral Monte Carlo on the replica-expanded
model), and external read files standing in for quantum-annealer output.
``stack_replicas`` assembles single reads into effective configurations.

SA targets the Boltzmann distribution of the clamped Boltzmann machine (the
binary-convention energy); configurations are returned as +-1 spins via the
standard bridge.  SQA targets the Boltzmann distribution of the effective
classical Hamiltonian at the requested transverse field.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

from .ising import ClampedModel, ClassicalLimitError, TfimParameters

__all__ = [
    "AnnealSchedule",
    "SamplePool",
    "sa_sample",
    "sqa_sample",
    "load_external_pool",
    "save_pool",
    "stack_replicas",
    "DEFAULT_SWEEPS",
    "DEFAULT_GAMMA_INITIAL",
]

DEFAULT_SWEEPS = 1000
DEFAULT_GAMMA_INITIAL = 8.0


@dataclass(frozen=True)
class AnnealSchedule:
    """Linear ramp of the annealed control (beta for SA, Gamma for SQA)."""

    sweeps: int
    initial_value: float
    final_value: float
    kind: str = "linear"

    def __post_init__(self):
        if self.sweeps < 1:
            raise ValueError("sweeps must be >= 1")
        if self.kind != "linear":
            raise ValueError(f"unsupported schedule kind {self.kind!r}")
        if not (np.isfinite(self.initial_value) and np.isfinite(self.final_value)):
            raise ValueError("schedule values must be finite")


@dataclass
class SamplePool:
    """Multiset of spin configurations from one backend.

    ``configs`` is int8 with shape (N, width) for single reads or
    (N, r, width) for effective configurations.
    """

    configs: np.ndarray
    source: str

    def __post_init__(self):
        self.configs = np.asarray(self.configs, dtype=np.int8)
        if self.configs.ndim not in (2, 3):
            raise ValueError("configs must be (N, width) or (N, r, width)")

    def __len__(self) -> int:
        return self.configs.shape[0]

    @property
    def width(self) -> int:
        return self.configs.shape[-1]

    @property
    def replicas(self) -> int | None:
        return self.configs.shape[1] if self.configs.ndim == 3 else None


@njit(cache=True)
def _read_seed(seed, read):
    # distinct, deterministic stream per chain (Weyl-style mixing)
    return (seed + (read + 1) * 2654435761) % 2147483647


@njit(cache=True)
def _sa_kernel(biases, coupling, beta0, beta1, sweeps, reads, seed):
    """Single-spin-flip Metropolis chains on binary hidden units.

    Each read is an independent chain with a linear beta ramp; the final
    configuration is returned as +-1 spins.
    """
    n = biases.shape[0]
    out = np.empty((reads, n), dtype=np.int8)
    for read in range(reads):
        np.random.seed(_read_seed(seed, read))
        h = (np.random.random(n) < 0.5).astype(np.float64)
        for sweep in range(sweeps):
            if sweeps > 1:
                beta = beta0 + (beta1 - beta0) * sweep / (sweeps - 1)
            else:
                beta = beta1
            for i in range(n):
                local = biases[i]
                for j in range(n):
                    local += coupling[i, j] * h[j]
                # flipping h_i changes the energy by -(1 - 2 h_i) * local
                delta = -(1.0 - 2.0 * h[i]) * local
                if delta <= 0.0 or np.random.random() < np.exp(-beta * delta):
                    h[i] = 1.0 - h[i]
        for i in range(n):
            out[read, i] = np.int8(2 * h[i] - 1)
    return out


@njit(cache=True)
def _problem_seed(seed, problem):
    return (seed + (problem + 1) * 40503) % 2147483647


@njit(cache=True)
def _sa_kernel_batch(bias_rows, coupling, beta0, beta1, sweeps, reads, seed):
    """Run _sa_kernel for every bias vector in one compiled call.

    Batches the per-problem Python/launch overhead away when many clamped
    models share one coupling matrix (action sweeps, policy snapshots).
    """
    problems = bias_rows.shape[0]
    n = bias_rows.shape[1]
    out = np.empty((problems, reads, n), dtype=np.int8)
    for p in range(problems):
        out[p] = _sa_kernel(
            bias_rows[p], coupling, beta0, beta1, sweeps, reads,
            _problem_seed(seed, p),
        )
    return out


@njit(cache=True)
def _sqa_kernel(biases, coupling, beta, gamma0, gamma1, replicas, sweeps, reads, seed):
    """Path-integral Monte Carlo on the replica-expanded model.

    Gamma ramps linearly from gamma0 to gamma1; the inter-replica coupling
    is recomputed every sweep.  r = 1 has a constant closure bond (no local
    field) and r = 2 a doubled chain bond, matching the energy convention.
    """
    n = biases.shape[0]
    r = replicas
    bias_r = biases / r
    coup_r = coupling / r
    out = np.empty((reads, r, n), dtype=np.int8)
    for read in range(reads):
        np.random.seed(_read_seed(seed, read))
        # Start every replica from the same random classical configuration.
        # A per-site random start seeds ~n*r/2 replica-chain kinks whose
        # pairwise annihilation is diffusive (~r^2 sweeps); an aligned start
        # leaves kink creation to the thermal acceptance rule instead.
        row = np.where(np.random.random(n) < 0.5, -1.0, 1.0)
        s = np.empty((r, n))
        for k in range(r):
            s[k] = row
        for sweep in range(sweeps):
            if sweeps > 1:
                gamma = gamma0 + (gamma1 - gamma0) * sweep / (sweeps - 1)
            else:
                gamma = gamma1
            x = gamma * beta / r
            wplus = (np.log(np.cosh(x)) - np.log(np.sinh(x))) / (2.0 * beta)
            wplus2 = 2.0 * wplus
            for k in range(r):
                km = k - 1 if k > 0 else r - 1
                kp = k + 1 if k < r - 1 else 0
                for i in range(n):
                    local = bias_r[i]
                    for j in range(n):
                        local += coup_r[i, j] * s[k, j]
                    if r == 2:
                        local += wplus2 * s[1 - k, i]
                    elif r > 2:
                        local += wplus * (s[km, i] + s[kp, i])
                    delta = 2.0 * s[k, i] * local
                    if delta <= 0.0 or np.random.random() < np.exp(-beta * delta):
                        s[k, i] = -s[k, i]
        out[read] = s.astype(np.int8)
    return out


@njit(cache=True)
def _sqa_kernel_batch(bias_rows, coupling, beta, gamma0, gamma1, replicas,
                      sweeps, reads, seed):
    """Run _sqa_kernel for every bias vector in one compiled call."""
    problems = bias_rows.shape[0]
    n = bias_rows.shape[1]
    out = np.empty((problems, reads, replicas, n), dtype=np.int8)
    for p in range(problems):
        out[p] = _sqa_kernel(
            bias_rows[p], coupling, beta, gamma0, gamma1, replicas, sweeps,
            reads, _problem_seed(seed, p),
        )
    return out


def _kernel_seed(rng: np.random.Generator) -> int:
    return int(rng.integers(0, 2**31 - 1))


def sa_sample(
    model: ClampedModel,
    schedule: AnnealSchedule,
    reads: int,
    rng: np.random.Generator,
) -> SamplePool:
    """Run ``reads`` independent SA chains and collect final configurations."""
    if schedule.final_value <= 0:
        raise ValueError("final beta must be positive")
    if reads < 1:
        raise ValueError("reads must be >= 1")
    configs = _sa_kernel(
        model.biases,
        model.coupling_matrix(),
        float(schedule.initial_value),
        float(schedule.final_value),
        schedule.sweeps,
        reads,
        _kernel_seed(rng),
    )
    return SamplePool(configs=configs, source="SA")


def sqa_sample(
    model: ClampedModel,
    params: TfimParameters,
    schedule: AnnealSchedule,
    reads: int,
    rng: np.random.Generator,
) -> SamplePool:
    """Run ``reads`` SQA chains; each returns an r-replica configuration."""
    if params.gamma <= 0:
        raise ClassicalLimitError("gamma must be positive; use sa_sample at gamma = 0")
    if schedule.final_value != params.gamma:
        raise ValueError(
            f"schedule must end at the target gamma: {schedule.final_value} != {params.gamma}"
        )
    if schedule.initial_value <= 0:
        raise ValueError("initial gamma must be positive")
    if reads < 1:
        raise ValueError("reads must be >= 1")
    configs = _sqa_kernel(
        model.biases,
        model.coupling_matrix(),
        float(params.beta),
        float(schedule.initial_value),
        float(schedule.final_value),
        params.replicas,
        schedule.sweeps,
        reads,
        _kernel_seed(rng),
    )
    return SamplePool(configs=configs, source="SQA")


def sqa_schedule(params: TfimParameters, sweeps: int = DEFAULT_SWEEPS,
                 initial_gamma: float = DEFAULT_GAMMA_INITIAL) -> AnnealSchedule:
    """Convenience linear Gamma ramp ending at the model's target field."""
    return AnnealSchedule(sweeps=sweeps, initial_value=initial_gamma,
                          final_value=params.gamma)


def load_external_pool(path) -> SamplePool:
    """Read a pool of +-1 configurations, one space-separated line per read."""
    rows = []
    width = None
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            values = []
            for token in line.split(" "):
                if token in ("1", "+1"):
                    values.append(1)
                elif token == "-1":
                    values.append(-1)
                else:
                    raise ValueError(
                        f"{path}:{lineno}: invalid spin value {token!r} (only +-1 admitted)"
                    )
            if width is None:
                width = len(values)
            elif len(values) != width:
                raise ValueError(
                    f"{path}:{lineno}: expected {width} values, got {len(values)}"
                )
            rows.append(values)
    if not rows:
        raise ValueError(f"{path}: empty pool file")
    return SamplePool(configs=np.array(rows, dtype=np.int8), source="external")


def save_pool(pool: SamplePool, path) -> None:
    """Write single-read configurations in the external pool format."""
    if pool.configs.ndim != 2:
        raise ValueError("only single-read pools can be written")
    with open(path, "w", encoding="utf-8") as fh:
        for row in pool.configs:
            fh.write(" ".join(str(int(v)) for v in row) + "\n")


def stack_replicas(
    pool: SamplePool,
    params: TfimParameters,
    count: int,
    rng: np.random.Generator,
) -> SamplePool:
    """Assemble effective configurations by drawing r reads with replacement."""
    if len(pool) == 0:
        raise ValueError("cannot stack from an empty pool")
    if pool.configs.ndim != 2:
        raise ValueError("stacking expects a pool of single reads")
    if count < 1:
        raise ValueError("count must be >= 1")
    idx = rng.integers(0, len(pool), size=(count, params.replicas))
    return SamplePool(configs=pool.configs[idx], source="stacked")
