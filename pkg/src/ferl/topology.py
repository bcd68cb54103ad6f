"""Boltzmann-machine graphs used in the grid-world experiments.

Three topologies are provided: the two-cell Chimera graph (16 qubits, two
complete-bipartite unit cells joined by four couplers), a two-layer deep
Boltzmann machine, and a restricted Boltzmann machine.  State and action
nodes are the visible units; clamping folds a one-hot (state, action)
assignment into hidden biases.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .ising import ClampedModel

__all__ = [
    "NodeId",
    "NetworkTopology",
    "build_chimera_two_cell",
    "build_dbm",
    "build_rbm",
    "clamp",
    "init_weights",
    "save_topology",
    "load_topology",
]

STATE_KIND = "state-visible"
ACTION_KIND = "action-visible"
HIDDEN_KIND = "hidden"


@dataclass(frozen=True)
class NodeId:
    index: int
    kind: str


@dataclass
class NetworkTopology:
    """Weighted graph of visible (state/action) and hidden nodes.

    Adjacency is fixed by the boolean masks; the weight arrays carry values
    only on masked entries.  ``hidden_weights`` is kept symmetric with a zero
    diagonal.
    """

    state_count: int
    action_count: int
    hidden_count: int
    state_mask: np.ndarray   # (S, H) bool
    action_mask: np.ndarray  # (A, H) bool
    hidden_mask: np.ndarray  # (H, H) bool, symmetric, zero diagonal
    state_weights: np.ndarray
    action_weights: np.ndarray
    hidden_weights: np.ndarray

    def __post_init__(self):
        for name in ("state_weights", "action_weights", "hidden_weights"):
            arr = getattr(self, name)
            if not np.all(np.isfinite(arr)):
                raise ValueError(f"{name} contains non-finite values")

    @property
    def state_nodes(self) -> list[NodeId]:
        return [NodeId(i, STATE_KIND) for i in range(self.state_count)]

    @property
    def action_nodes(self) -> list[NodeId]:
        return [NodeId(i, ACTION_KIND) for i in range(self.action_count)]

    @property
    def hidden_nodes(self) -> list[NodeId]:
        return [NodeId(i, HIDDEN_KIND) for i in range(self.hidden_count)]

    @property
    def visible_hidden_weights(self) -> dict[tuple[NodeId, NodeId], float]:
        out = {}
        for v, h in zip(*np.nonzero(self.state_mask)):
            out[(NodeId(int(v), STATE_KIND), NodeId(int(h), HIDDEN_KIND))] = float(
                self.state_weights[v, h]
            )
        for v, h in zip(*np.nonzero(self.action_mask)):
            out[(NodeId(int(v), ACTION_KIND), NodeId(int(h), HIDDEN_KIND))] = float(
                self.action_weights[v, h]
            )
        return out

    @property
    def hidden_hidden_weights(self) -> dict[tuple[int, int], float]:
        out = {}
        for i, j in zip(*np.nonzero(np.triu(self.hidden_mask))):
            out[(int(i), int(j))] = float(self.hidden_weights[i, j])
        return out

    def hidden_edge_count(self) -> int:
        return int(np.count_nonzero(np.triu(self.hidden_mask)))

    def visible_edge_count(self) -> int:
        return int(np.count_nonzero(self.state_mask)) + int(
            np.count_nonzero(self.action_mask)
        )

    def copy(self) -> "NetworkTopology":
        return NetworkTopology(
            self.state_count,
            self.action_count,
            self.hidden_count,
            self.state_mask,
            self.action_mask,
            self.hidden_mask,
            self.state_weights.copy(),
            self.action_weights.copy(),
            self.hidden_weights.copy(),
        )


def _empty(state_count, action_count, hidden_count, state_mask, action_mask, hidden_mask):
    return NetworkTopology(
        state_count,
        action_count,
        hidden_count,
        state_mask,
        action_mask,
        hidden_mask,
        np.zeros((state_count, hidden_count)),
        np.zeros((action_count, hidden_count)),
        np.zeros((hidden_count, hidden_count)),
    )


def build_chimera_two_cell(
    state_count: int = 14,
    action_count: int = 5,
    blue_side: int = 0,
) -> NetworkTopology:
    """Two adjacent Chimera unit cells: 16 qubits, 36 hidden couplers.

    Qubits 0-7 form cell one (sides {0-3} and {4-7}), qubits 8-15 cell two.
    Each cell is an internal K4,4; four inter-cell couplers join the
    corresponding side-1 qubits of the two cells.  State nodes attach to all
    eight "blue" qubits (side ``blue_side`` of both cells) and action nodes
    to the eight "red" qubits on the other side.
    """
    if blue_side not in (0, 1):
        raise ValueError("blue_side must be 0 or 1")
    n = 16
    hidden_mask = np.zeros((n, n), dtype=bool)
    for cell in (0, 8):
        for i in range(4):
            for j in range(4, 8):
                hidden_mask[cell + i, cell + j] = True
                hidden_mask[cell + j, cell + i] = True
    for i in range(4):  # inter-cell couplers between corresponding qubits
        hidden_mask[4 + i, 12 + i] = True
        hidden_mask[12 + i, 4 + i] = True

    side0 = [0, 1, 2, 3, 8, 9, 10, 11]
    side1 = [4, 5, 6, 7, 12, 13, 14, 15]
    blue = side0 if blue_side == 0 else side1
    red = side1 if blue_side == 0 else side0

    state_mask = np.zeros((state_count, n), dtype=bool)
    state_mask[:, blue] = True
    action_mask = np.zeros((action_count, n), dtype=bool)
    action_mask[:, red] = True
    return _empty(state_count, action_count, n, state_mask, action_mask, hidden_mask)


def build_dbm(
    state_count: int = 14,
    action_count: int = 5,
    layer_sizes: tuple[int, int] = (8, 8),
) -> NetworkTopology:
    """Deep Boltzmann machine: states - layer 1 - layer 2 - actions."""
    l1, l2 = layer_sizes
    if l1 < 1 or l2 < 1:
        raise ValueError("layer sizes must be positive")
    n = l1 + l2
    hidden_mask = np.zeros((n, n), dtype=bool)
    hidden_mask[:l1, l1:] = True
    hidden_mask[l1:, :l1] = True
    state_mask = np.zeros((state_count, n), dtype=bool)
    state_mask[:, :l1] = True
    action_mask = np.zeros((action_count, n), dtype=bool)
    action_mask[:, l1:] = True
    return _empty(state_count, action_count, n, state_mask, action_mask, hidden_mask)


def build_rbm(
    state_count: int = 14,
    action_count: int = 5,
    hidden_count: int = 16,
) -> NetworkTopology:
    """Restricted Boltzmann machine: one hidden layer, no hidden couplings."""
    if hidden_count < 1:
        raise ValueError("hidden_count must be >= 1")
    state_mask = np.ones((state_count, hidden_count), dtype=bool)
    action_mask = np.ones((action_count, hidden_count), dtype=bool)
    hidden_mask = np.zeros((hidden_count, hidden_count), dtype=bool)
    return _empty(state_count, action_count, hidden_count, state_mask, action_mask, hidden_mask)


def _check_one_hot(encoding, width: int, what: str) -> np.ndarray:
    enc = np.asarray(encoding, dtype=np.float64)
    if enc.shape != (width,):
        raise ValueError(f"{what} encoding must have width {width}, got {enc.shape}")
    if not (np.all((enc == 0) | (enc == 1)) and enc.sum() == 1):
        raise ValueError(f"{what} encoding must be one-hot")
    return enc


def clamp(topology: NetworkTopology, state_encoding, action_encoding) -> ClampedModel:
    """Fold a one-hot (state, action) assignment into hidden biases."""
    s = _check_one_hot(state_encoding, topology.state_count, "state")
    a = _check_one_hot(action_encoding, topology.action_count, "action")
    biases = s @ topology.state_weights + a @ topology.action_weights
    couplings = {
        (int(i), int(j)): float(topology.hidden_weights[i, j])
        for i, j in zip(*np.nonzero(np.triu(topology.hidden_mask)))
    }
    return ClampedModel(biases=biases, couplings=couplings)


def init_weights(
    topology: NetworkTopology,
    rng: np.random.Generator,
    scale: float = 0.1,
    hidden_shift: float = 0.0,
) -> NetworkTopology:
    """Fresh copy with weights drawn i.i.d. uniform in [-scale, scale].

    ``hidden_shift`` is subtracted from every hidden-hidden coupling,
    biasing them antiferromagnetic.  With binary hidden units the
    co-activation statistic driving coupling updates is non-negative, so
    couplings started near zero tend to ratchet upward until the network
    degenerates into an additive value function; starting them negative
    keeps the interaction terms trainable.
    """
    if scale < 0:
        raise ValueError("scale must be non-negative")
    out = topology.copy()
    out.state_weights = np.where(
        topology.state_mask,
        rng.uniform(-scale, scale, topology.state_weights.shape),
        0.0,
    )
    out.action_weights = np.where(
        topology.action_mask,
        rng.uniform(-scale, scale, topology.action_weights.shape),
        0.0,
    )
    upper = rng.uniform(-scale, scale, topology.hidden_weights.shape)
    upper = np.triu(upper, 1)
    sym = upper + upper.T - hidden_shift
    out.hidden_weights = np.where(topology.hidden_mask, sym, 0.0)
    return out


# Node numbering in the serialized form: states, then actions, then hidden.

def save_topology(topology: NetworkTopology, path) -> None:
    """Write the line-oriented checkpoint format: header plus edge lines."""
    s, a = topology.state_count, topology.action_count
    lines = [f"topology {s} {a} {topology.hidden_count}"]
    for v, h in zip(*np.nonzero(topology.state_mask)):
        lines.append(f"edge {v} {s + a + h} {float(topology.state_weights[v, h])!r}")
    for v, h in zip(*np.nonzero(topology.action_mask)):
        lines.append(f"edge {s + v} {s + a + h} {float(topology.action_weights[v, h])!r}")
    for i, j in zip(*np.nonzero(np.triu(topology.hidden_mask))):
        lines.append(f"edge {s + a + i} {s + a + j} {float(topology.hidden_weights[i, j])!r}")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def load_topology(path) -> NetworkTopology:
    """Read a checkpoint written by :func:`save_topology`."""
    with open(path, encoding="utf-8") as fh:
        lines = [ln.strip() for ln in fh if ln.strip()]
    if not lines or not lines[0].startswith("topology "):
        raise ValueError(f"{path}: missing topology header")
    _, s, a, n = lines[0].split()
    s, a, n = int(s), int(a), int(n)
    topo = _empty(
        s, a, n,
        np.zeros((s, n), dtype=bool),
        np.zeros((a, n), dtype=bool),
        np.zeros((n, n), dtype=bool),
    )
    for lineno, line in enumerate(lines[1:], start=2):
        parts = line.split()
        if len(parts) != 4 or parts[0] != "edge":
            raise ValueError(f"{path}:{lineno}: malformed edge line")
        u, v, w = int(parts[1]), int(parts[2]), float(parts[3])
        if u > v:
            u, v = v, u
        if v < s + a:
            raise ValueError(f"{path}:{lineno}: visible-visible edge not allowed")
        h = v - s - a
        if u < s:
            topo.state_mask[u, h] = True
            topo.state_weights[u, h] = w
        elif u < s + a:
            topo.action_mask[u - s, h] = True
            topo.action_weights[u - s, h] = w
        else:
            i = u - s - a
            topo.hidden_mask[i, h] = topo.hidden_mask[h, i] = True
            topo.hidden_weights[i, h] = topo.hidden_weights[h, i] = w
    return topo
