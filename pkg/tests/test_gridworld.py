import numpy as np
import pytest

from ferl.gridworld import (
    ACTIONS,
    GridWorld,
    decode_state,
    encode_action,
    encode_state,
    fidelity,
    load_map,
    parse_map,
    random_policy_fidelity,
    step,
    value_iteration,
)

UP, DOWN, LEFT, RIGHT, STAND = 0, 1, 2, 3, 4


@pytest.fixture(scope="module")
def env():
    return GridWorld()


@pytest.fixture(scope="module")
def oracle(env):
    return value_iteration(env)


class TestLayout:
    def test_canonical_dimensions(self, env):
        assert env.rows == 3 and env.cols == 5
        assert env.state_count == 14
        assert env.reward_cell == (0, 0)
        assert (1, 2) in env.wall_cells
        assert env.penalty_cell == (2, 2)

    def test_states_exclude_wall(self, env):
        assert (1, 2) not in env.states
        assert len(env.states) == 14

    def test_cell_values(self, env):
        assert env.cell_value((0, 0)) == 200.0
        assert env.cell_value((2, 2)) == 0.0
        assert env.cell_value((1, 1)) == 100.0


class TestStep:
    def test_plain_move(self, env):
        assert step(env, (2, 0), UP) == ((1, 0), 100.0)

    def test_move_into_reward(self, env):
        assert step(env, (1, 0), UP) == ((0, 0), 200.0)

    def test_move_into_penalty(self, env):
        assert step(env, (2, 1), RIGHT) == ((2, 2), 0.0)

    def test_wall_blocks(self, env):
        # (1,1) right would enter the wall; the agent stays put
        assert step(env, (1, 1), RIGHT) == ((1, 1), 100.0)

    def test_edge_blocks(self, env):
        assert step(env, (0, 0), UP) == ((0, 0), 200.0)
        assert step(env, (2, 4), DOWN) == ((2, 4), 100.0)

    def test_stand_still(self, env):
        assert step(env, (0, 0), STAND) == ((0, 0), 200.0)

    def test_deterministic(self, env):
        for s in env.states:
            for a in ACTIONS:
                assert step(env, s, a) == step(env, s, a)

    def test_invalid_action(self, env):
        with pytest.raises(ValueError):
            step(env, (0, 0), 7)

    def test_invalid_state(self, env):
        with pytest.raises(ValueError):
            step(env, (1, 2), UP)


class TestEncoding:
    def test_one_hot_roundtrip(self, env):
        for i, s in enumerate(env.states):
            enc = encode_state(env, s)
            assert enc.shape == (14,)
            assert enc.sum() == 1 and enc[i] == 1
            assert decode_state(env, i) == s

    def test_action_encoding(self):
        enc = encode_action(3)
        assert enc.shape == (5,) and enc[3] == 1 and enc.sum() == 1


class TestValueIteration:
    def test_myopic_limit(self):
        env = GridWorld(discount=1e-12)
        q, _ = value_iteration(env)
        for s in env.states:
            for a in ACTIONS:
                _, r = step(env, s, a)
                assert q[(s, a)] == pytest.approx(r, abs=1e-6)

    def test_bellman_residual(self, env, oracle):
        q, _ = oracle
        for s in env.states:
            for a in ACTIONS:
                s2, r = step(env, s, a)
                target = r + env.discount * max(q[(s2, b)] for b in ACTIONS)
                assert q[(s, a)] == pytest.approx(target, abs=1e-8)

    def test_reward_cell_value(self, env, oracle):
        # standing on the reward cell earns 200 forever: 200 / (1 - 0.8)
        q, _ = oracle
        assert q[((0, 0), STAND)] == pytest.approx(1000.0, abs=1e-6)

    def test_known_optimal_actions(self, env, oracle):
        _, optimal = oracle
        assert optimal[(0, 1)] == {LEFT}
        assert optimal[(1, 0)] == {UP}
        assert STAND in optimal[(0, 0)]

    def test_reward_cell_reachable_quickly(self, env, oracle):
        _, optimal = oracle
        for s in env.states:
            cur = s
            for _ in range(8):
                if cur == env.reward_cell:
                    break
                cur, _r = step(env, cur, min(optimal[cur]))
            assert cur == env.reward_cell

    def test_uniform_rewards_all_optimal(self):
        env = GridWorld(reward_cell=(0, 0), penalty_cell=(2, 2))
        # override values so that every cell pays the same
        uniform = parse_map(".....\n..W..\n.....")
        _, optimal = value_iteration(uniform)
        for s in uniform.states:
            assert optimal[s] == set(ACTIONS)


class TestFidelity:
    def test_all_optimal(self, env, oracle):
        _, optimal = oracle
        pol = np.array([[min(optimal[s]) for s in env.states]] * 3)
        assert fidelity([pol], optimal, env.states)[0] == 1.0

    def test_half_correct(self, env, oracle):
        _, optimal = oracle
        pol = np.array([[min(optimal[s]) for s in env.states]])
        wrong = [a for a in ACTIONS if a not in optimal[env.states[0]]][0]
        for col in range(7):
            s = env.states[col]
            pol[0, col] = [a for a in ACTIONS if a not in optimal[s]][0]
        assert fidelity([pol], optimal, env.states)[0] == pytest.approx(0.5)

    def test_monotone_under_improvement(self, env, oracle):
        _, optimal = oracle
        rng = np.random.default_rng(0)
        pol = rng.integers(0, 5, size=(1, 14))
        base = fidelity([pol], optimal, env.states)[0]
        better = pol.copy()
        better[0, 3] = min(optimal[env.states[3]])
        assert fidelity([better], optimal, env.states)[0] >= base

    def test_random_policy_expectation(self, env, oracle):
        _, optimal = oracle
        expected = np.mean([len(optimal[s]) / 5 for s in env.states])
        assert random_policy_fidelity(optimal) == pytest.approx(expected)
        rng = np.random.default_rng(7)
        pols = [rng.integers(0, 5, size=(200, 14)) for _ in range(50)]
        observed = fidelity(pols, optimal, env.states).mean()
        assert observed == pytest.approx(expected, abs=0.02)

    def test_length_mismatch(self, env, oracle):
        _, optimal = oracle
        with pytest.raises(ValueError):
            fidelity(
                [np.zeros((3, 14), dtype=int), np.zeros((4, 14), dtype=int)],
                optimal,
                env.states,
            )


class TestMapParsing:
    def test_canonical_map(self, env):
        text = "R....\n..W..\n..P.."
        parsed = parse_map(text)
        assert parsed.reward_cell == env.reward_cell
        assert parsed.wall_cells == env.wall_cells
        assert parsed.penalty_cell == env.penalty_cell

    def test_load_roundtrip(self, tmp_path):
        p = tmp_path / "grid.txt"
        p.write_text("R....\n..W..\n..P..\n", encoding="utf-8")
        assert load_map(p).state_count == 14

    def test_bad_character(self):
        with pytest.raises(ValueError):
            parse_map("RX...\n..W..\n..P..")

    def test_ragged_rows(self):
        with pytest.raises(ValueError):
            parse_map("R....\n..W.\n..P..")
