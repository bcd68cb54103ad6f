"""The 3x5 grid-world MDP, encodings, value-iteration oracle, and fidelity.

The canonical instance has the reward cell in the top-left corner (value
200), one wall, one penalty cell (value 0), and neutral value 100 elsewhere.
Moves that would enter the wall or leave the grid keep the agent in place;
the reward of a step is the value of the cell the agent occupies after it.
The MDP is continuing (no terminal states) with discount 0.8.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "GridWorld",
    "ACTIONS",
    "ACTION_COUNT",
    "step",
    "encode_state",
    "decode_state",
    "encode_action",
    "value_iteration",
    "fidelity",
    "random_policy_fidelity",
    "parse_map",
    "load_map",
]

# action index -> (drow, dcol)
ACTIONS = {
    0: (-1, 0),  # up
    1: (1, 0),   # down
    2: (0, -1),  # left
    3: (0, 1),   # right
    4: (0, 0),   # stand still
}
ACTION_COUNT = 5

REWARD_VALUE = 200.0
NEUTRAL_VALUE = 100.0
PENALTY_VALUE = 0.0


@dataclass(frozen=True)
class GridWorld:
    rows: int = 3
    cols: int = 5
    reward_cell: tuple[int, int] | None = (0, 0)
    wall_cells: frozenset = frozenset({(1, 2)})
    penalty_cell: tuple[int, int] | None = (2, 2)
    discount: float = 0.8

    def __post_init__(self):
        special = [c for c in (self.reward_cell, self.penalty_cell) if c is not None]
        cells = set(special) | set(self.wall_cells)
        if len(cells) != len(special) + len(self.wall_cells):
            raise ValueError("reward, wall, and penalty cells must be disjoint")
        for cell in cells:
            if not self._in_grid(cell):
                raise ValueError(f"cell {cell} outside the grid")
        if not 0 < self.discount < 1:
            raise ValueError("discount must lie in (0, 1)")

    def _in_grid(self, cell) -> bool:
        r, c = cell
        return 0 <= r < self.rows and 0 <= c < self.cols

    @property
    def states(self) -> list[tuple[int, int]]:
        """Non-wall cells in row-major order."""
        return [
            (r, c)
            for r in range(self.rows)
            for c in range(self.cols)
            if (r, c) not in self.wall_cells
        ]

    @property
    def state_count(self) -> int:
        return len(self.states)

    def cell_value(self, cell) -> float:
        if self.reward_cell is not None and cell == self.reward_cell:
            return REWARD_VALUE
        if self.penalty_cell is not None and cell == self.penalty_cell:
            return PENALTY_VALUE
        return NEUTRAL_VALUE


def step(env: GridWorld, state, action: int):
    """Deterministic transition; blocked moves leave the agent in place."""
    state = tuple(state)
    if state in env.wall_cells or not env._in_grid(state):
        raise ValueError(f"invalid state {state}")
    if action not in ACTIONS:
        raise ValueError(f"invalid action {action}")
    dr, dc = ACTIONS[action]
    target = (state[0] + dr, state[1] + dc)
    if not env._in_grid(target) or target in env.wall_cells:
        target = state
    return target, env.cell_value(target)


def encode_state(env: GridWorld, state) -> np.ndarray:
    """One-hot over non-wall cells, row-major order skipping walls."""
    states = env.states
    state = tuple(state)
    if state not in states:
        raise ValueError(f"{state} is not an encodable (non-wall) state")
    enc = np.zeros(len(states))
    enc[states.index(state)] = 1.0
    return enc


def decode_state(env: GridWorld, index: int):
    return env.states[index]


def encode_action(action: int) -> np.ndarray:
    if action not in ACTIONS:
        raise ValueError(f"invalid action {action}")
    enc = np.zeros(ACTION_COUNT)
    enc[action] = 1.0
    return enc


def value_iteration(env: GridWorld, tolerance: float = 1e-10):
    """Fixed-point iteration of the Bellman operator on Q.

    Returns the optimal Q table (dict keyed by (state, action)) and the set
    of optimal actions per state (argmax with tie tolerance 1e-9).
    """
    if tolerance <= 0:
        raise ValueError("tolerance must be positive")
    states = env.states
    transitions = {
        (s, a): step(env, s, a) for s in states for a in range(ACTION_COUNT)
    }
    q = {key: 0.0 for key in transitions}
    while True:
        best = {s: max(q[(s, a)] for a in range(ACTION_COUNT)) for s in states}
        delta = 0.0
        new_q = {}
        for (s, a), (s2, r) in transitions.items():
            val = r + env.discount * best[s2]
            delta = max(delta, abs(val - q[(s, a)]))
            new_q[(s, a)] = val
        q = new_q
        if delta < tolerance:
            break
    optimal_sets = {}
    for s in states:
        top = max(q[(s, a)] for a in range(ACTION_COUNT))
        optimal_sets[s] = {a for a in range(ACTION_COUNT) if q[(s, a)] >= top - 1e-9}
    return q, optimal_sets


def fidelity(policy_histories, optimal_sets, states=None) -> np.ndarray:
    """Per-sample fraction of (run, state) pairs whose action is optimal.

    ``policy_histories`` is a sequence of (T_s, |S|) integer arrays, one per
    run, with column order matching ``states`` (row-major non-wall order).
    """
    histories = [np.asarray(getattr(h, "policies", h)) for h in policy_histories]
    if not histories:
        raise ValueError("no histories given")
    shape = histories[0].shape
    for h in histories:
        if h.shape != shape:
            raise ValueError("histories must share the same shape")
    if states is None:
        states = sorted(optimal_sets)
    optimal = np.zeros((len(states), ACTION_COUNT), dtype=bool)
    for col, s in enumerate(states):
        for a in optimal_sets[s]:
            optimal[col, a] = True
    total = np.zeros(shape[0])
    for h in histories:
        total += optimal[np.arange(len(states))[None, :], h].mean(axis=1)
    return total / len(histories)


def random_policy_fidelity(optimal_sets) -> float:
    """Expected fidelity of uniformly random policies."""
    sizes = [len(v) for v in optimal_sets.values()]
    return float(np.mean(sizes)) / ACTION_COUNT


def parse_map(text: str, discount: float = 0.8) -> GridWorld:
    """Build a GridWorld from a character map (R, W, P, '.')."""
    rows = [line for line in text.splitlines() if line.strip()]
    if not rows:
        raise ValueError("empty map")
    cols = len(rows[0])
    if any(len(r) != cols for r in rows):
        raise ValueError("ragged map rows")
    reward = penalty = None
    walls = set()
    for r, line in enumerate(rows):
        for c, ch in enumerate(line):
            if ch == "R":
                if reward is not None:
                    raise ValueError("multiple reward cells")
                reward = (r, c)
            elif ch == "W":
                walls.add((r, c))
            elif ch == "P":
                if penalty is not None:
                    raise ValueError("multiple penalty cells")
                penalty = (r, c)
            elif ch != ".":
                raise ValueError(f"unknown map character {ch!r} at {(r, c)}")
    return GridWorld(
        rows=len(rows),
        cols=cols,
        reward_cell=reward,
        wall_cells=frozenset(walls),
        penalty_cell=penalty,
        discount=discount,
    )


def load_map(path, discount: float = 0.8) -> GridWorld:
    with open(path, encoding="utf-8") as fh:
        return parse_map(fh.read(), discount=discount)
