"""Free-energy and observable estimation from sample pools, plus exact oracles.

The empirical estimators implement the plug-in scheme: mean energy over the
pool plus (1/beta) times the empirical sum of p log p over distinct observed
configurations.  Exact small-instance values come from dense diagonalization
(quantum), transfer matrices (replica-expanded model), or enumeration
(classical), and exist to validate the samplers and estimators.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .ising import (
    TFIM_ORACLE_LIMIT,
    ClampedModel,
    ClassicalLimitError,
    TfimParameters,
    classical_energy,
    replica_coupling,
    spin_energy,
    spins_to_binary,
    tfim_matrix,
)
from .samplers import SamplePool

__all__ = [
    "FreeEnergyEstimate",
    "ObservableEstimate",
    "estimate_observables",
    "estimate_effective_free_energy",
    "estimate_classical_free_energy",
    "rbm_free_energy",
    "rbm_hidden_expectations",
    "exact_quantum_free_energy",
    "exact_classical_free_energy",
    "exact_binary_free_energy",
    "exact_effective_free_energy",
    "exact_tfim_observables",
    "suzuki_trotter_offset",
]


@dataclass(frozen=True)
class FreeEnergyEstimate:
    """Plug-in free energy with its decomposition recorded exactly."""

    value: float
    mean_energy: float
    entropy_term: float
    support_size: int


@dataclass
class ObservableEstimate:
    """Per-node magnetizations and same-replica pair correlations."""

    sigma_z: np.ndarray
    sigma_zz: dict[tuple[int, int], float]


def _empirical_entropy_sum(configs: np.ndarray) -> tuple[float, int]:
    """Sum of p log p over distinct configurations (a non-positive number)."""
    flat = configs.reshape(configs.shape[0], -1)
    _, counts = np.unique(flat, axis=0, return_counts=True)
    p = counts / flat.shape[0]
    return float(np.sum(p * np.log(p))), int(counts.size)


def estimate_observables(pool: SamplePool, model: ClampedModel) -> ObservableEstimate:
    """Average classical spin values over reads (and replicas, if present).

    Pair correlations are same-replica products, reported for exactly the
    model's coupling keys.
    """
    if len(pool) == 0:
        raise ValueError("empty pool")
    configs = pool.configs.astype(np.float64)
    if configs.ndim == 2:
        configs = configs[:, None, :]
    sigma_z = configs.mean(axis=(0, 1))
    sigma_zz = {
        (i, j): float(np.mean(configs[:, :, i] * configs[:, :, j]))
        for (i, j) in model.couplings
    }
    return ObservableEstimate(sigma_z=sigma_z, sigma_zz=sigma_zz)


def estimate_effective_free_energy(
    model: ClampedModel, pool: SamplePool, params: TfimParameters
) -> FreeEnergyEstimate:
    """Plug-in free energy of the replica-expanded model from effective configs."""
    if len(pool) == 0:
        raise ValueError("empty pool")
    if pool.configs.ndim != 3:
        raise ValueError("effective free energy needs effective configurations")
    spins = pool.configs.astype(np.float64)
    reads, r, n = spins.shape
    if r != params.replicas:
        raise ValueError(f"pool has {r} replicas, parameters say {params.replicas}")
    if n != model.hidden_count:
        raise ValueError("pool width does not match the model")
    wplus = replica_coupling(params)

    energies = -spins @ model.biases / r  # (reads, r) bias terms
    energies = energies.sum(axis=1)
    coupling = model.coupling_matrix()
    if model.couplings:
        quad = np.einsum("akl,lm,akm->a", spins, coupling, spins) / 2.0
        energies -= quad / r
    chain = np.sum(spins[:, :-1, :] * spins[:, 1:, :], axis=(1, 2))
    chain += np.sum(spins[:, 0, :] * spins[:, -1, :], axis=1)
    energies -= wplus * chain

    mean_energy = float(energies.mean())
    plogp, support = _empirical_entropy_sum(pool.configs)
    entropy_term = plogp / params.beta
    return FreeEnergyEstimate(
        value=mean_energy + entropy_term,
        mean_energy=mean_energy,
        entropy_term=entropy_term,
        support_size=support,
    )


def estimate_classical_free_energy(
    model: ClampedModel, pool: SamplePool, beta: float
) -> FreeEnergyEstimate:
    """Plug-in free energy of the clamped Boltzmann machine from +-1 reads."""
    if len(pool) == 0:
        raise ValueError("empty pool")
    if pool.configs.ndim != 2:
        raise ValueError("classical free energy needs single-read configurations")
    if beta <= 0:
        raise ValueError("beta must be positive")
    binary = spins_to_binary(pool.configs).astype(np.float64)
    energies = -binary @ model.biases
    coupling = model.coupling_matrix()
    if model.couplings:
        energies -= np.einsum("ak,kl,al->a", binary, coupling, binary) / 2.0
    mean_energy = float(energies.mean())
    plogp, support = _empirical_entropy_sum(pool.configs)
    entropy_term = plogp / beta
    return FreeEnergyEstimate(
        value=mean_energy + entropy_term,
        mean_energy=mean_energy,
        entropy_term=entropy_term,
        support_size=support,
    )


def rbm_free_energy(model: ClampedModel, beta: float) -> float:
    """Closed-form clamped free energy for a coupling-free (RBM) model.

    Hidden units factorize, so F = -(1/beta) sum_h ln(1 + exp(beta b_h)).
    """
    if model.couplings:
        raise ValueError("not an RBM: model has hidden-hidden couplings")
    if beta <= 0:
        raise ValueError("beta must be positive")
    return -float(np.sum(np.logaddexp(0.0, beta * model.biases))) / beta


def rbm_hidden_expectations(model: ClampedModel, beta: float) -> np.ndarray:
    """Exact <h> for a coupling-free model: the logistic of beta * bias."""
    if model.couplings:
        raise ValueError("not an RBM: model has hidden-hidden couplings")
    return 1.0 / (1.0 + np.exp(-beta * model.biases))


def _gibbs_weights(eigenvalues: np.ndarray, beta: float) -> np.ndarray:
    shifted = -beta * (eigenvalues - eigenvalues.min())
    w = np.exp(shifted)
    return w / w.sum()


def exact_quantum_free_energy(
    model: ClampedModel, params: TfimParameters, limit: int = TFIM_ORACLE_LIMIT
) -> float:
    """-(1/beta) ln tr exp(-beta H) by dense diagonalization."""
    ham = tfim_matrix(model, params.gamma, limit=limit)
    eig = np.linalg.eigvalsh(ham)
    ground = eig.min()
    logz = np.log(np.sum(np.exp(-params.beta * (eig - ground)))) - params.beta * ground
    return -logz / params.beta


def exact_classical_free_energy(
    model: ClampedModel, beta: float, limit: int = TFIM_ORACLE_LIMIT
) -> float:
    """Enumeration free energy over +-1 spin configurations."""
    n = model.hidden_count
    if n > limit:
        raise ValueError(f"{n} hidden nodes exceeds the oracle limit of {limit}")
    energies = np.array(
        [spin_energy(model, np.array(c)) for c in itertools.product((-1, 1), repeat=n)]
    )
    ground = energies.min()
    logz = np.log(np.sum(np.exp(-beta * (energies - ground)))) - beta * ground
    return -logz / beta


def exact_binary_free_energy(
    model: ClampedModel, beta: float, limit: int = TFIM_ORACLE_LIMIT
) -> float:
    """Enumeration free energy over binary {0, 1} configurations."""
    n = model.hidden_count
    if n > limit:
        raise ValueError(f"{n} hidden nodes exceeds the oracle limit of {limit}")
    energies = np.array(
        [classical_energy(model, np.array(c)) for c in itertools.product((0, 1), repeat=n)]
    )
    ground = energies.min()
    logz = np.log(np.sum(np.exp(-beta * (energies - ground)))) - beta * ground
    return -logz / beta


def exact_effective_free_energy(
    model: ClampedModel, params: TfimParameters, limit: int = 10
) -> float:
    """-(1/beta) ln Z of the replica-expanded model, via transfer matrices.

    Slice states are the 2^|H| spin assignments of one replica; the chain of
    r slices is contracted exactly.  This is the quantity the empirical
    effective estimator converges to at finite r.
    """
    n = model.hidden_count
    if n > limit:
        raise ValueError(f"{n} hidden nodes exceeds the transfer-matrix limit of {limit}")
    if params.gamma <= 0:
        raise ClassicalLimitError("gamma must be positive")
    beta, r = params.beta, params.replicas
    wplus = replica_coupling(params)
    states = np.array(list(itertools.product((-1, 1), repeat=n)), dtype=np.float64)
    intra = np.array([spin_energy(model, s) for s in states]) / r
    bond = states @ states.T  # sum_i s_i s'_i between slices

    if r == 1:
        # single replica: chain sum empty, closure bond is the constant n
        energies = intra - wplus * n
        ground = energies.min()
        logz = np.log(np.sum(np.exp(-beta * (energies - ground)))) - beta * ground
        return -logz / beta
    if r == 2:
        # the (1,2) bond appears twice: once from the chain, once from closure
        total = intra[:, None] + intra[None, :] - 2.0 * wplus * bond
        ground = total.min()
        logz = np.log(np.sum(np.exp(-beta * (total - ground)))) - beta * ground
        return -logz / beta

    # r >= 3: periodic chain, Z = tr(T^r) = sum_i lambda_i^r with a
    # symmetric transfer matrix; the Perron eigenvalue dominates
    log_t = -beta * (intra[:, None] / 2.0 + intra[None, :] / 2.0 - wplus * bond)
    shift = log_t.max()
    t = np.exp(log_t - shift)
    eig = np.linalg.eigvalsh((t + t.T) / 2.0)
    top = np.abs(eig).max()
    trace_r = float(np.sum((eig / top) ** r))  # dominant term is +1
    logz = r * (shift + np.log(top)) + np.log(trace_r)
    return -logz / beta


def exact_tfim_observables(
    model: ClampedModel, params: TfimParameters, limit: int = TFIM_ORACLE_LIMIT
) -> ObservableEstimate:
    """Exact Gibbs-state <sigma^z> and <sigma^z sigma^z> from diagonalization."""
    n = model.hidden_count
    ham = tfim_matrix(model, params.gamma, limit=limit)
    eigval, eigvec = np.linalg.eigh(ham)
    weights = _gibbs_weights(eigval, params.beta)

    # diagonal of sigma^z_i in the computational basis
    basis = np.array(list(itertools.product((1, -1), repeat=n)), dtype=np.float64)
    probs = (np.abs(eigvec) ** 2) @ weights  # P(basis state) under the Gibbs state
    sigma_z = basis.T @ probs
    sigma_zz = {
        (i, j): float((basis[:, i] * basis[:, j]) @ probs)
        for (i, j) in model.couplings
    }
    return ObservableEstimate(sigma_z=sigma_z, sigma_zz=sigma_zz)


def suzuki_trotter_offset(hidden_count: int, params: TfimParameters) -> float:
    """Constant linking the replica-model and quantum free energies.

    The replica expansion carries a multiplicative normalization per site and
    slice, so F_replica = F_quantum + offset with
    offset = (|H| r / 2 beta) * ln( sinh(2 beta Gamma / r) / 2 ).
    The offset is weight-independent and cancels in every TD error.
    """
    if params.gamma <= 0:
        raise ClassicalLimitError("gamma must be positive")
    beta, r = params.beta, params.replicas
    x = 2.0 * beta * params.gamma / r
    return hidden_count * r / (2.0 * beta) * float(np.log(np.sinh(x) / 2.0))
