import math

import numpy as np
import pytest

from oracles import fista_l1, soft_threshold
from ramsi.core import SensingMatrix, SolverConfig, generate_sensing_matrix, lipschitz_constant
from ramsi.errors import DimensionError
from ramsi.prox import prox_vector
from ramsi.solver import WeightPolicy, initial_weights, objective, ramsi
from ramsi.synth import ScenarioSpec, generate_scenario
from ramsi.weights import ZERO_WEIGHT, update_weights

ALL_POLICIES = [(WeightPolicy.ADAPTIVE, 2), (WeightPolicy.FIXED_L1, 2), (WeightPolicy.FIXED_L1L1, 2)]


def test_zero_measurements_give_zero():
    A = generate_sensing_matrix(1, 20, 40)
    x, trace = ramsi(np.zeros(20), A, np.zeros((2, 40)))
    assert np.all(x == 0)
    assert trace.iterations == 1 and trace.converged


@pytest.mark.parametrize("policy,J", ALL_POLICIES)
def test_square_system_recovered(policy, J):
    rng = np.random.default_rng(12)
    A = generate_sensing_matrix(12, 12, 12)
    x = np.zeros(12)
    x[[1, 4, 9]] = rng.standard_normal(3)
    ens = x + 0.3 * rng.standard_normal((J, 12))
    cfg = SolverConfig(lam=1e-8, max_iters=200000, rel_tol=1e-12)
    xh, _ = ramsi(A.entries @ x, A, ens, cfg, policy)
    ref = np.linalg.solve(A.entries, A.entries @ x)
    assert np.linalg.norm(xh - ref) <= 1e-4 * np.linalg.norm(ref)


def test_fixed_l1_matches_textbook_fista():
    rng = np.random.default_rng(5)
    A = generate_sensing_matrix(3, 40, 100)
    x = np.zeros(100)
    x[rng.choice(100, 8, replace=False)] = rng.standard_normal(8)
    y = A.entries @ x
    L = lipschitz_constant(A)
    lam = 1e-2
    ref = fista_l1(A.entries, y, lam, L, 60)
    for k in (1, 7, 60):
        cfg = SolverConfig(lam=lam, max_iters=k, rel_tol=1e-300, lipschitz_override=L)
        xh, trace = ramsi(y, A, None, cfg, WeightPolicy.FIXED_L1)
        assert trace.iterations == k
        np.testing.assert_allclose(xh, ref[k - 1], rtol=0, atol=1e-10)


def test_fixed_l1l1_fixed_point():
    spec = ScenarioSpec.uniform(200, 20, 12, 10, 1, seed=4)
    x, ens = generate_scenario(spec)
    A = generate_sensing_matrix(9, 80, 200)
    y = A.entries @ x
    cfg = SolverConfig(lam=1e-3, max_iters=50000, rel_tol=1e-14, patience=50)
    xh, trace = ramsi(y, A, ens, cfg, WeightPolicy.FIXED_L1L1)
    L = trace.lipschitz
    W = initial_weights(WeightPolicy.FIXED_L1L1, 1, 200)
    step = prox_vector(xh - A.entries.T @ (A.entries @ xh - y) / L, ens, W, cfg.lam / L)
    assert np.max(np.abs(step - xh)) <= 1e-8


def test_initial_weights_sum_to_one():
    for policy in WeightPolicy:
        W = initial_weights(policy, 3, 5)
        np.testing.assert_allclose(W.sum(axis=0), 1.0, atol=1e-15)
        assert np.all(W > 0)
    assert initial_weights(WeightPolicy.FIXED_L1, 0, 4).tolist() == [[1.0] * 4]
    assert initial_weights(WeightPolicy.FIXED_L1L1, 1, 2)[1, 0] == 0.5
    assert initial_weights(WeightPolicy.FIXED_L1, 2, 1)[1, 0] == ZERO_WEIGHT


def test_objective_zero_cases():
    A = generate_sensing_matrix(2, 4, 6)
    W = np.full((3, 6), 1 / 3)
    assert objective(np.zeros(6), np.zeros(4), A, np.zeros((2, 6)), W, 0.1) == 0.0
    x = np.arange(6.0)
    W = update_weights(x, [x, x])
    # the data term and the z_1, z_2 terms vanish; z_0 = 0 always contributes
    only_prior = 0.1 * np.sum(W[0] * np.abs(x))
    assert objective(x, A.entries @ x, A, np.vstack([x, x]), W, 0.1) == pytest.approx(only_prior, rel=1e-9)


def test_objective_hand_expansion():
    M = np.array([[1.0, 2.0, 0.0], [0.0, -1.0, 3.0]])
    A = SensingMatrix(M)
    x = np.array([1.0, -1.0, 2.0])
    y = np.array([0.5, 1.0])
    z1 = np.array([0.0, 1.0, 1.0])
    W = np.array([[0.2, 0.3, 0.4], [0.8, 0.7, 0.6]])
    r = [1 - 2 - 0.5, 1 + 6 - 1.0]
    pen = 0.2 * 1 + 0.3 * 1 + 0.4 * 2 + 0.8 * 1 + 0.7 * 2 + 0.6 * 1
    assert objective(x, y, A, [z1], W, 0.5) == pytest.approx(0.5 * (r[0] ** 2 + r[1] ** 2) + 0.5 * pen, rel=1e-15)


def test_objective_shape_errors():
    A = generate_sensing_matrix(2, 4, 6)
    with pytest.raises(DimensionError):
        objective(np.zeros(6), np.zeros(4), A, np.zeros((2, 6)), np.ones((2, 6)), 0.1)
    with pytest.raises(DimensionError):
        ramsi(np.zeros(5), A)


def test_trace_and_determinism():
    spec = ScenarioSpec.uniform(300, 30, 15, 12, 2, seed=8)
    x, ens = generate_scenario(spec)
    A = generate_sensing_matrix(3, 150, 300)
    cfg = SolverConfig(max_iters=3000)
    a, ta = ramsi(A.entries @ x, A, ens, cfg)
    b, tb = ramsi(A.entries @ x, A, ens, cfg)
    assert np.array_equal(a, b) and ta.objective_history == tb.objective_history
    h = np.array(ta.objective_history)
    assert np.all(np.isfinite(h)) and np.all(h >= 0)
    assert len(h) == ta.iterations
    if ta.converged:
        assert ta.final_relative_change < cfg.rel_tol


def test_adaptive_recovers_moderate_instance():
    spec = ScenarioSpec.uniform(400, 40, 20, 16, 3, seed=1)
    x, ens = generate_scenario(spec)
    A = generate_sensing_matrix(11, 160, 400)
    xh, trace = ramsi(A.entries @ x, A, ens, SolverConfig(max_iters=30000))
    assert np.linalg.norm(xh - x) <= 1e-2 * np.linalg.norm(x)


def test_adaptive_success_rate_at_400_measurements():
    from ramsi.harness import PolicyChoice, SweepSpec, run_sweep
    spec = SweepSpec(scenario=ScenarioSpec.uniform(1000, 128, 64, 51, 3), m_values=(400,), trials=20,
                     policies=(PolicyChoice(WeightPolicy.ADAPTIVE, 3),), base_seed=3)
    assert run_sweep(spec).points[0].success_rate >= 0.9
