"""Tests for plug-in estimators and exact free-energy oracles."""

import numpy as np
import pytest

from ferl.free_energy import (
    estimate_classical_free_energy,
    estimate_effective_free_energy,
    estimate_observables,
    exact_binary_free_energy,
    exact_classical_free_energy,
    exact_effective_free_energy,
    exact_quantum_free_energy,
    exact_tfim_observables,
    rbm_free_energy,
    rbm_hidden_expectations,
    suzuki_trotter_offset,
)
from ferl.ising import ClampedModel, ClassicalLimitError, TfimParameters, effective_energy
from ferl.samplers import SamplePool


def pool_from_counts(configs, counts):
    rows = np.repeat(np.asarray(configs, dtype=np.int8), counts, axis=0)
    return SamplePool(configs=rows, source="external")


class TestClassicalPlugIn:
    def test_exact_on_full_distribution_pool(self):
        # a pool whose empirical distribution equals the Gibbs distribution
        # reproduces the exact binary free energy up to count rounding
        beta = 1.0
        model = ClampedModel(biases=np.array([np.log(3.0)]))  # P(h=1) = 3/4
        pool = pool_from_counts([[-1], [1]], [1, 3])
        est = estimate_classical_free_energy(model, pool, beta)
        exact = exact_binary_free_energy(model, beta)
        assert est.value == pytest.approx(exact, abs=1e-12)
        assert est.support_size == 2

    def test_decomposition_identity(self):
        model = ClampedModel(biases=np.array([0.2, -0.4]), couplings={(0, 1): 0.3})
        pool = pool_from_counts([[1, 1], [1, -1], [-1, -1]], [2, 1, 1])
        est = estimate_classical_free_energy(model, pool, beta=2.0)
        assert est.value == pytest.approx(est.mean_energy + est.entropy_term)
        assert est.entropy_term <= 0.0
        assert est.support_size == 3

    def test_rejects_effective_pool(self):
        model = ClampedModel(biases=np.zeros(2))
        pool = SamplePool(configs=np.ones((3, 2, 2)), source="SQA")
        with pytest.raises(ValueError):
            estimate_classical_free_energy(model, pool, beta=1.0)

    def test_rejects_bad_beta(self):
        model = ClampedModel(biases=np.zeros(2))
        pool = SamplePool(configs=np.ones((3, 2), dtype=np.int8), source="SA")
        with pytest.raises(ValueError):
            estimate_classical_free_energy(model, pool, beta=0.0)


class TestEffectivePlugIn:
    def test_single_configuration_pool(self):
        # zero-entropy pool: the estimate is the effective energy itself
        params = TfimParameters(gamma=0.5, beta=2.0, replicas=3)
        model = ClampedModel(biases=np.array([0.7, -0.2]), couplings={(0, 1): 0.4})
        config = np.array([[1, -1], [1, 1], [-1, 1]], dtype=np.int8)
        pool = SamplePool(configs=np.repeat(config[None], 5, axis=0), source="SQA")
        est = estimate_effective_free_energy(model, pool, params)
        assert est.entropy_term == 0.0
        assert est.support_size == 1
        assert est.value == pytest.approx(effective_energy(model, config, params), abs=1e-12)

    def test_full_distribution_pool_matches_transfer_matrix(self):
        # enumerate all effective configurations of a 1-node, 2-replica model
        # and weight the pool by exact Gibbs counts
        params = TfimParameters(gamma=1.0, beta=1.0, replicas=2)
        model = ClampedModel(biases=np.array([0.3]))
        configs = np.array(
            [[[a], [b]] for a in (-1, 1) for b in (-1, 1)], dtype=np.int8
        )
        energies = np.array([effective_energy(model, c, params) for c in configs])
        weights = np.exp(-params.beta * (energies - energies.min()))
        probs = weights / weights.sum()
        counts = np.round(probs * 100000).astype(int)
        pool = SamplePool(configs=np.repeat(configs, counts, axis=0), source="SQA")
        est = estimate_effective_free_energy(model, pool, params)
        exact = exact_effective_free_energy(model, params)
        assert est.value == pytest.approx(exact, abs=1e-3)

    def test_replica_mismatch_rejected(self):
        params = TfimParameters(gamma=0.5, beta=2.0, replicas=4)
        model = ClampedModel(biases=np.zeros(2))
        pool = SamplePool(configs=np.ones((3, 3, 2)), source="SQA")
        with pytest.raises(ValueError, match="replicas"):
            estimate_effective_free_energy(model, pool, params)

    def test_width_mismatch_rejected(self):
        params = TfimParameters(gamma=0.5, beta=2.0, replicas=3)
        model = ClampedModel(biases=np.zeros(4))
        pool = SamplePool(configs=np.ones((3, 3, 2)), source="SQA")
        with pytest.raises(ValueError, match="width"):
            estimate_effective_free_energy(model, pool, params)


class TestObservables:
    def test_hand_computed(self):
        model = ClampedModel(biases=np.zeros(2), couplings={(0, 1): 1.0})
        pool = pool_from_counts([[1, 1], [1, -1]], [3, 1])
        obs = estimate_observables(pool, model)
        np.testing.assert_allclose(obs.sigma_z, [1.0, 0.5])
        assert obs.sigma_zz[(0, 1)] == pytest.approx(0.5)

    def test_effective_pool_averages_replicas(self):
        model = ClampedModel(biases=np.zeros(1))
        configs = np.array([[[1], [-1], [1]]], dtype=np.int8)  # one read, r = 3
        obs = estimate_observables(SamplePool(configs=configs, source="SQA"), model)
        assert obs.sigma_z[0] == pytest.approx(1.0 / 3.0)


class TestRbmClosedForms:
    def test_free_energy_matches_enumeration(self):
        model = ClampedModel(biases=np.array([0.8, -1.3, 0.1]))
        for beta in (0.5, 1.0, 2.0):
            assert rbm_free_energy(model, beta) == pytest.approx(
                exact_binary_free_energy(model, beta), abs=1e-12
            )

    def test_hidden_expectations_are_logistic(self):
        model = ClampedModel(biases=np.array([0.0, 2.0]))
        h = rbm_hidden_expectations(model, beta=1.0)
        assert h[0] == pytest.approx(0.5)
        assert h[1] == pytest.approx(1.0 / (1.0 + np.exp(-2.0)))

    def test_rejects_couplings(self):
        model = ClampedModel(biases=np.zeros(2), couplings={(0, 1): 0.5})
        with pytest.raises(ValueError, match="RBM"):
            rbm_free_energy(model, 1.0)
        with pytest.raises(ValueError, match="RBM"):
            rbm_hidden_expectations(model, 1.0)


class TestExactOracles:
    def test_quantum_reduces_to_classical_at_small_gamma(self):
        model = ClampedModel(biases=np.array([0.5, -0.3]), couplings={(0, 1): 0.7})
        fq = exact_quantum_free_energy(model, TfimParameters(gamma=1e-8, beta=1.5))
        fc = exact_classical_free_energy(model, beta=1.5)
        assert fq == pytest.approx(fc, abs=1e-6)

    def test_single_qubit_closed_form(self):
        # H = -b sigma_z - G sigma_x has eigenvalues +-sqrt(b^2 + G^2)
        b, g, beta = 0.7, 1.1, 2.0
        model = ClampedModel(biases=np.array([b]))
        e = np.hypot(b, g)
        expected = -np.log(2.0 * np.cosh(beta * e)) / beta
        fq = exact_quantum_free_energy(model, TfimParameters(gamma=g, beta=beta))
        assert fq == pytest.approx(expected, abs=1e-12)

    def test_effective_converges_to_quantum_plus_offset(self):
        # replica-expansion error decays with r; at r = 200 the residual is tiny
        model = ClampedModel(biases=np.array([0.6, -0.4]), couplings={(0, 1): 0.5})
        params = TfimParameters(gamma=0.8, beta=1.0, replicas=200)
        feff = exact_effective_free_energy(model, params)
        fq = exact_quantum_free_energy(model, params)
        off = suzuki_trotter_offset(model.hidden_count, params)
        assert feff == pytest.approx(fq + off, abs=1e-4)

    def test_effective_small_r_cases_consistent(self):
        # r = 1 and r = 2 take dedicated code paths; check against direct
        # enumeration of the replica-expanded energies
        model = ClampedModel(biases=np.array([0.5]))
        for r in (1, 2, 3):
            params = TfimParameters(gamma=0.7, beta=1.3, replicas=r)
            configs = [
                np.array(c, dtype=float).reshape(r, 1)
                for c in np.ndindex(*(2,) * r)
            ]
            energies = np.array(
                [effective_energy(model, 2 * c - 1, params) for c in configs]
            )
            logz = np.log(np.sum(np.exp(-params.beta * energies)))
            assert exact_effective_free_energy(model, params) == pytest.approx(
                -logz / params.beta, abs=1e-10
            )

    def test_tfim_observables_single_qubit(self):
        b, g, beta = 0.7, 1.1, 2.0
        model = ClampedModel(biases=np.array([b]))
        obs = exact_tfim_observables(model, TfimParameters(gamma=g, beta=beta))
        e = np.hypot(b, g)
        expected = (b / e) * np.tanh(beta * e)
        assert obs.sigma_z[0] == pytest.approx(expected, abs=1e-12)

    def test_offset_rejects_classical_limit(self):
        with pytest.raises(ClassicalLimitError):
            suzuki_trotter_offset(4, TfimParameters(gamma=0.0, beta=1.0, replicas=5))

    def test_oracle_limits_enforced(self):
        model = ClampedModel(biases=np.zeros(13))
        with pytest.raises(ValueError, match="limit"):
            exact_classical_free_energy(model, beta=1.0)
        with pytest.raises(ValueError, match="limit"):
            exact_effective_free_energy(
                model, TfimParameters(gamma=0.5, beta=1.0, replicas=3)
            )
