"""Free energy-based reinforcement learning with Boltzmann-machine samplers."""

from .ising import (
    ClampedModel,
    TfimParameters,
    classical_energy,
    effective_energy,
    replica_coupling,
    tfim_matrix,
)
from .topology import (
    NetworkTopology,
    build_chimera_two_cell,
    build_dbm,
    build_rbm,
    clamp,
    init_weights,
)
from .samplers import AnnealSchedule, SamplePool, load_external_pool, sa_sample, sqa_sample, stack_replicas
from .free_energy import (
    FreeEnergyEstimate,
    ObservableEstimate,
    estimate_classical_free_energy,
    estimate_effective_free_energy,
    estimate_observables,
    rbm_free_energy,
)
from .gridworld import GridWorld, fidelity, value_iteration
from .rl import AgentConfig, TrainingHistory, q_value, select_action, train

__version__ = "0.1.0"
