import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import golden_section_prox, h_value, random_prox_batch, soft_threshold
from ramsi.errors import ArgumentError, DimensionError
from ramsi.prox import AnchorSet, prox_element, prox_vector
from ramsi.weights import update_weights


def anchors_of(z_row, w_row, J):
    return [(float(z_row[j]), float(w_row[j])) for j in range(J + 1)]


def test_soft_threshold_cases():
    assert prox_element(2.0, [(0.0, 1.0)], 0.5) == 1.5
    assert prox_element(0.3, [(0.0, 1.0)], 0.5) == 0.0
    assert prox_element(-2.0, [(0.0, 1.0)], 0.5) == -1.5


def test_symmetric_weights_between_anchors():
    assert prox_element(0.5, [(0.0, 0.5), (1.0, 0.5)], 0.1) == pytest.approx(0.5, abs=1e-15)


def test_clamps_onto_anchor():
    # x slightly right of z_1 = 1: the penalty slope to the right beats the pull
    assert prox_element(1.05, [(0.0, 0.5), (1.0, 0.5)], 0.1) == 1.0


def test_tied_anchors_merge():
    a = prox_element(1.3, [(0.0, 0.2), (1.0, 0.3), (1.0, 0.5)], 0.4)
    b = prox_element(1.3, [(0.0, 0.2), (1.0, 0.8)], 0.4)
    assert a == b


@pytest.mark.parametrize("bad", [
    dict(x=0.0, anchors=[(0.0, 0.0)], step=1.0),
    dict(x=0.0, anchors=[(0.0, 1.0)], step=0.0),
    dict(x=0.0, anchors=[], step=1.0),
])
def test_argument_errors(bad):
    with pytest.raises(ArgumentError):
        prox_element(**bad)


def test_against_golden_section():
    rng = np.random.default_rng(2024)
    J, z, w, x, step = random_prox_batch(rng, 10000)
    ref = golden_section_prox(x, z, w, step)
    got = np.array([prox_element(x[i], anchors_of(z[i], w[i], J[i]), step[i]) for i in range(x.size)])
    assert np.max(np.abs(got - ref)) <= 1e-8


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 3), st.integers(0, 2**31 - 1))
def test_minimizer_property(J, seed):
    rng = np.random.default_rng(seed)
    z = np.concatenate([[0.0], rng.normal(scale=2, size=J)])
    w = rng.uniform(0.01, 1, J + 1)
    x = rng.normal(scale=3)
    step = rng.uniform(0.01, 2)
    anchors = anchors_of(z, w, J)
    v = prox_element(x, anchors, step)
    hv = h_value(v, x, anchors, step)
    probes = v + rng.normal(scale=rng.choice([1e-6, 1e-2, 1.0]), size=1000)
    assert all(hv <= h_value(p, x, anchors, step) + 1e-12 for p in probes)


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 3), st.integers(0, 2**31 - 1))
def test_nonexpansive_and_monotone(J, seed):
    rng = np.random.default_rng(seed)
    z = np.concatenate([[0.0], rng.normal(scale=2, size=J)])
    w = rng.uniform(0.01, 1, J + 1)
    step = rng.uniform(0.01, 2)
    anchors = anchors_of(z, w, J)
    a, b = sorted(rng.normal(scale=3, size=2))
    pa, pb = prox_element(a, anchors, step), prox_element(b, anchors, step)
    assert abs(pb - pa) <= (b - a) + 1e-15
    assert pa <= pb


def test_vector_matches_element_loop():
    rng = np.random.default_rng(7)
    n, J = 50, 3
    x = rng.normal(scale=2, size=n)
    ens = rng.normal(size=(J, n))
    ens[1, :10] = ens[0, :10]  # ties
    ens[2, 10:20] = 0.0        # ties with z_0
    W = rng.uniform(0.05, 1, size=(J + 1, n))
    step = 0.7
    got = prox_vector(x, ens, W, step)
    Z = np.vstack([np.zeros(n), ens])
    for i in range(n):
        assert got[i] == pytest.approx(prox_element(x[i], anchors_of(Z[:, i], W[:, i], J), step), abs=1e-14)


def test_vector_vanishing_step_is_identity():
    rng = np.random.default_rng(1)
    x = rng.standard_normal(30)
    ens = rng.standard_normal((2, 30))
    W = np.full((3, 30), 1 / 3)
    np.testing.assert_allclose(prox_vector(x, ens, W, 1e-15), x, atol=1e-12)


@pytest.mark.parametrize("step", [1e-6, 0.1, 10.0, 1e3])
def test_vector_fixed_point_when_side_information_is_exact(step):
    # z_j = x for all j >= 1; with the adaptive weights at x the matching
    # anchors carry almost all mass, so x is the minimizer of the prox problem
    rng = np.random.default_rng(3)
    x = rng.standard_normal(40)
    ens = np.vstack([x, x, x])
    W = update_weights(x, ens, 1e-5)
    np.testing.assert_array_equal(prox_vector(x, ens, W, step), x)


def test_vector_single_anchor_is_soft_threshold():
    rng = np.random.default_rng(4)
    x = rng.standard_normal(100)
    W = np.full((1, 100), 0.8)
    np.testing.assert_array_equal(prox_vector(x, None, W, 0.3), soft_threshold(x, 0.24))


def test_vector_shape_errors():
    with pytest.raises(DimensionError):
        prox_vector(np.zeros(4), np.zeros((2, 4)), np.ones((2, 4)), 1.0)
    with pytest.raises(ArgumentError):
        prox_vector(np.zeros(4), np.zeros((1, 4)), np.ones((2, 4)), 0.0)


def test_anchor_set_reuse():
    rng = np.random.default_rng(9)
    ens = rng.standard_normal((2, 25))
    A = AnchorSet(ens, 25)
    for _ in range(3):
        x = rng.standard_normal(25)
        W = rng.uniform(0.1, 1, (3, 25))
        np.testing.assert_array_equal(A.prox(x, W, 0.5), prox_vector(x, ens, W, 0.5))
