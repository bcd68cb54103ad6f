"""Energy functions for clamped Boltzmann machines.

Three closely related models share one set of weights:

* the clamped classical Boltzmann machine, whose hidden units are binary
  {0, 1} variables,
* the clamped transverse-field Ising model (TFIM), a Hermitian operator on
  the hidden qubits, and
* the replica-expanded classical model obtained from the TFIM by the
  Suzuki-Trotter decomposition, whose degrees of freedom are +-1 spins.

Binary values are used wherever the classical Boltzmann-machine formulas
apply; +-1 spins are used for the TFIM, the effective model, and everything
a sampler returns.  ``binary_to_spins`` / ``spins_to_binary`` is the single
bridge between the two conventions.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "ClampedModel",
    "TfimParameters",
    "ClassicalLimitError",
    "DimensionMismatchError",
    "binary_to_spins",
    "spins_to_binary",
    "classical_energy",
    "spin_energy",
    "replica_coupling",
    "effective_energy",
    "tfim_matrix",
    "TFIM_ORACLE_LIMIT",
]

#: Largest hidden-node count for which the dense TFIM matrix is built.
TFIM_ORACLE_LIMIT = 12


class DimensionMismatchError(ValueError):
    """A configuration does not match the model's hidden-node count."""


class ClassicalLimitError(ValueError):
    """Gamma = 0: the replica construction is undefined (w+ diverges)."""


@dataclass(frozen=True)
class TfimParameters:
    """Virtual transverse field, inverse temperature, and replica count."""

    gamma: float
    beta: float
    replicas: int = 25

    def __post_init__(self):
        if self.beta <= 0:
            raise ValueError(f"beta must be positive, got {self.beta}")
        if self.gamma < 0:
            raise ValueError(f"gamma must be non-negative, got {self.gamma}")
        if self.replicas < 1:
            raise ValueError(f"replicas must be >= 1, got {self.replicas}")


@dataclass
class ClampedModel:
    """Hidden-only Ising problem with visible assignments folded into biases.

    ``biases[h]`` holds the accumulated visible-to-hidden contribution for
    hidden node ``h``; ``couplings`` maps unordered hidden pairs to their
    weights.  Pair keys are stored as sorted index tuples.
    """

    biases: np.ndarray
    couplings: dict[tuple[int, int], float] = field(default_factory=dict)

    def __post_init__(self):
        self.biases = np.asarray(self.biases, dtype=np.float64)
        if self.biases.ndim != 1:
            raise ValueError("biases must be a 1-d array")
        if not np.all(np.isfinite(self.biases)):
            raise ValueError("biases must be finite")
        normalized = {}
        for (i, j), w in self.couplings.items():
            if i == j:
                raise ValueError(f"self-coupling on node {i}")
            if not (0 <= i < self.hidden_count and 0 <= j < self.hidden_count):
                raise ValueError(f"coupling ({i}, {j}) references unknown node")
            if not np.isfinite(w):
                raise ValueError(f"coupling ({i}, {j}) is not finite")
            key = (i, j) if i < j else (j, i)
            if key in normalized:
                raise ValueError(f"duplicate coupling {key}")
            normalized[key] = float(w)
        self.couplings = normalized

    @property
    def hidden_count(self) -> int:
        return self.biases.shape[0]

    def coupling_matrix(self) -> np.ndarray:
        """Dense symmetric coupling matrix (zero diagonal)."""
        n = self.hidden_count
        mat = np.zeros((n, n))
        for (i, j), w in self.couplings.items():
            mat[i, j] = w
            mat[j, i] = w
        return mat


def binary_to_spins(values: np.ndarray) -> np.ndarray:
    """Map {0, 1} hidden values to +-1 spins."""
    values = np.asarray(values)
    return (2 * values - 1).astype(np.int8)


def spins_to_binary(spins: np.ndarray) -> np.ndarray:
    """Map +-1 spins to {0, 1} hidden values."""
    spins = np.asarray(spins)
    return ((spins + 1) // 2).astype(np.int8)


def _check_width(model: ClampedModel, values: np.ndarray, what: str) -> np.ndarray:
    values = np.asarray(values, dtype=np.float64)
    if values.shape[-1] != model.hidden_count:
        raise DimensionMismatchError(
            f"{what} has width {values.shape[-1]}, model has "
            f"{model.hidden_count} hidden nodes"
        )
    return values


def classical_energy(model: ClampedModel, config) -> float:
    """Energy of the clamped Boltzmann machine for a binary configuration.

    ``-sum_h bias_h * h - sum_{hh'} w_{hh'} * h * h'`` with ``h`` in {0, 1}.
    """
    h = _check_width(model, config, "configuration")
    energy = -float(model.biases @ h)
    for (i, j), w in model.couplings.items():
        energy -= w * h[i] * h[j]
    return energy


def spin_energy(model: ClampedModel, spins) -> float:
    """Same quadratic form evaluated on +-1 spins (sigma^z eigenvalues)."""
    s = _check_width(model, spins, "spin configuration")
    energy = -float(model.biases @ s)
    for (i, j), w in model.couplings.items():
        energy -= w * s[i] * s[j]
    return energy


def replica_coupling(params: TfimParameters) -> float:
    """Inter-replica coupling w+ = (1 / 2 beta) * ln coth(Gamma beta / r)."""
    if params.gamma == 0:
        raise ClassicalLimitError(
            "classical limit: effective-model construction undefined"
        )
    x = params.gamma * params.beta / params.replicas
    # ln coth(x) = ln cosh(x) - ln sinh(x), stable for small x
    return (np.log(np.cosh(x)) - np.log(np.sinh(x))) / (2.0 * params.beta)


def effective_energy(model: ClampedModel, config, params: TfimParameters) -> float:
    """Energy of the replica-expanded classical model on an r x |H| spin array.

    Intra-replica couplings and biases are scaled by 1/r; adjacent replicas
    of each hidden node are coupled with strength w+.  The replica chain is
    closed periodically exactly as the construction prescribes: bonds
    (k, k+1) for k = 1..r-1 plus an explicit (1, r) closure.  For r = 2 the
    closure doubles the single chain bond; for r = 1 it contributes the
    constant -w+ per node.
    """
    spins = np.asarray(config, dtype=np.float64)
    if spins.ndim != 2:
        raise DimensionMismatchError("effective configuration must be 2-d (r x |H|)")
    r, width = spins.shape
    if r != params.replicas:
        raise DimensionMismatchError(
            f"configuration has {r} replicas, parameters say {params.replicas}"
        )
    _check_width(model, spins[0], "replica row")
    wplus = replica_coupling(params)

    energy = -float(np.sum(model.biases * spins)) / r
    for (i, j), w in model.couplings.items():
        energy -= (w / r) * float(spins[:, i] @ spins[:, j])

    chain = float(np.sum(spins[:-1] * spins[1:]))  # bonds k=1..r-1
    chain += float(np.sum(spins[0] * spins[-1]))   # explicit closure h_1 h_r
    return energy - wplus * chain


_PAULI_Z = np.array([[1.0, 0.0], [0.0, -1.0]])
_PAULI_X = np.array([[0.0, 1.0], [1.0, 0.0]])


def _single_site(op: np.ndarray, site: int, n: int) -> np.ndarray:
    out = np.eye(1)
    for k in range(n):
        out = np.kron(out, op if k == site else np.eye(2))
    return out


def tfim_matrix(model: ClampedModel, gamma: float, limit: int = TFIM_ORACLE_LIMIT) -> np.ndarray:
    """Dense Hermitian matrix of the clamped TFIM, for small-instance oracles.

    ``-sum_h bias_h sigma^z_h - sum_{hh'} w_{hh'} sigma^z_h sigma^z_{h'}
    - Gamma sum_h sigma^x_h`` built by Kronecker products.
    """
    n = model.hidden_count
    if n > limit:
        raise ValueError(f"{n} hidden nodes exceeds the oracle limit of {limit}")
    dim = 2 ** n
    ham = np.zeros((dim, dim))
    for h in range(n):
        ham -= model.biases[h] * _single_site(_PAULI_Z, h, n)
    for (i, j), w in model.couplings.items():
        ham -= w * (_single_site(_PAULI_Z, i, n) @ _single_site(_PAULI_Z, j, n))
    if gamma != 0.0:
        for h in range(n):
            ham -= gamma * _single_site(_PAULI_X, h, n)
    return ham
